use std::collections::BTreeMap;

use super::selftest::{run_selftest, Mutation};
use super::*;
use crate::curve::{FieldCurve, FieldSource};
use crate::maxwell_system::{NMatrix, Slot};
use crate::spacetime::SolutionSample;
use crate::timefunc::TimeFunc;

fn tf(s: &str) -> TimeFunc {
    TimeFunc::new(s, &BTreeMap::new()).unwrap()
}

fn grid(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t0 + (t1 - t0) * k as f64 / steps as f64).collect()
}

fn case5b() -> SpacetimeSolution {
    let free = BTreeMap::from([(Slot::N11, tf("1")), (Slot::N12, tf("0")), (Slot::N22, tf("1"))]);
    let curve = FieldCurve::new(FieldSource::Case5b { c: 1.0, phi: tf("t") }, free);
    SpacetimeSolution::assemble(CaseId::Case5b, curve, &grid(0.1, 1.3, 12), serde_json::Value::Null).unwrap()
}

fn small_grid(h: f64) -> GridSpec {
    GridSpec {
        u0: Axis::new(0.3, 1.1, 3),
        u1: Axis::new(0.5, 2.5, 3),
        u2: Axis::new(0.3, 5.0, 3),
        u3: Axis::new(0.3, 5.0, 3),
        h,
    }
}

fn max_residual(sol: &SpacetimeSolution, g: &GridSpec) -> f64 {
    g.events()
        .into_iter()
        .map(|u| {
            let r = maxwell_residual(sol, &Event::new(u).unwrap(), g.h).unwrap();
            r.iter().fold(0f64, |m, x| m.max(x.abs()))
        })
        .fold(0.0, f64::max)
}

#[test]
fn closed_form_case5b_has_tiny_residual() {
    let sol = case5b();
    assert!(sol.samples.iter().all(|s| s.valid));
    let r = max_residual(&sol, &small_grid(1e-3));
    assert!(r <= 1e-8, "{r}");
}

#[test]
fn perturbed_metric_is_detected() {
    let sol = case5b();
    let samples: Vec<SolutionSample> = sol
        .samples
        .iter()
        .map(|s| {
            let mut n: NMatrix = s.n;
            n.n.set(2, 2, n.n.get(2, 2) + 0.1);
            SolutionSample::from_solution(s.u0, s.state, n)
        })
        .collect();
    let bad = SpacetimeSolution::from_samples(sol.header.clone(), samples).unwrap();
    let r = max_residual(&bad, &small_grid(1e-3));
    assert!(r >= 1e-3, "{r}");
}

#[test]
fn residual_converges_under_step_halving() {
    let free = BTreeMap::from([(Slot::N11, tf("1")), (Slot::N12, tf("0")), (Slot::N22, tf("1"))]);
    let curve = FieldCurve::new(FieldSource::Case5b { c: 1.0, phi: tf("t + 0.2*t^2") }, free);
    let sol = SpacetimeSolution::assemble(CaseId::Case5b, curve, &grid(0.1, 1.3, 12), serde_json::Value::Null).unwrap();
    let r1 = max_residual(&sol, &small_grid(0.08));
    let r2 = max_residual(&sol, &small_grid(0.04));
    assert!(r1 / r2 >= 8.0, "{r1} {r2}");
}

// With phi = t and eta = I every component of sqrt(-g) F is a unit-frequency
// harmonic, on which the stencil is exact up to a common factor.
#[test]
fn closed_form_is_stencil_exact() {
    let r = max_residual(&case5b(), &small_grid(0.08));
    assert!(r < 1e-12, "{r}");
}

#[test]
fn grid_validation() {
    assert!(GridSpec::default().validate().is_ok());
    let g = GridSpec {
        u1: Axis::new(0.0, 1.0, 3),
        ..GridSpec::default()
    };
    assert!(matches!(g.validate(), Err(VerifyError::BadGrid(_))));
    let mut g = GridSpec::default();
    g.u2.points = 0;
    assert!(g.validate().is_err());
    let g = GridSpec { h: -1.0, ..GridSpec::default() };
    assert!(g.validate().is_err());
    assert_eq!(GridSpec::default().events().len(), 625);
}

#[test]
fn grid_outside_samples_is_empty() {
    let sol = case5b();
    let mut g = small_grid(1e-3);
    g.u0 = Axis::new(5.0, 6.0, 2);
    let table = SpacetimeSolution::from_samples(sol.header.clone(), sol.samples.clone()).unwrap();
    assert!(matches!(
        residual_report(&table, &g, &Tolerances::default(), 1),
        Err(VerifyError::EmptyGrid)
    ));
}

#[test]
fn admissibility_accepts_the_solution_and_rejects_a_control() {
    let sol = case5b();
    let p = SpacePoint::new(1.1, 0.7, 2.3).unwrap();
    let ev = Event::new([0.6, 1.1, 0.7, 2.3]).unwrap();
    let good = check_admissibility(&sol, &[ev], 1e-6).unwrap();
    assert!(good.pass, "{good:?}");
    let bad = misplaced_alpha_residual(&sol, &p).unwrap();
    assert!(bad > 1e-3, "{bad}");
}

#[test]
fn report_passes_and_is_deterministic() {
    let sol = case5b();
    let g = small_grid(1e-3);
    let a = residual_report(&sol, &g, &Tolerances::default(), 7).unwrap();
    assert!(a.pass(), "{:?}", a.failed());
    let b = residual_report(&sol, &g, &Tolerances::default(), 7).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(!a.residual.interpolated);
    assert!(a.typo_findings.iter().any(|f| f.case == CaseId::Case3 && f.allowlisted));
}

#[test]
fn table_consistency_flags_edits() {
    let sol = case5b();
    let table = SpacetimeSolution::from_samples(sol.header.clone(), sol.samples.clone()).unwrap();
    assert!(table_consistency(&table, &sol, 1e-9).unwrap().pass);
    let mut edited = sol.samples.clone();
    edited[3].state.alpha[2] += 1e-4;
    let table = SpacetimeSolution::from_samples(sol.header.clone(), edited).unwrap();
    assert!(!table_consistency(&table, &sol, 1e-9).unwrap().pass);
}

#[test]
fn selftest_passes() {
    let s = run_selftest(3, &Tolerances::default(), Mutation::None).unwrap();
    assert!(s.pass(), "{:?}", s.checks);
}

#[test]
fn selftest_mutations_fail_the_intended_check() {
    let tol = Tolerances::default();
    let failed = |m| {
        run_selftest(3, &tol, m)
            .unwrap()
            .checks
            .into_iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect::<Vec<_>>()
    };
    let flip = failed(Mutation::FlipC312);
    assert!(flip.contains(&"commutators".to_string()), "{flip:?}");
    let swap = failed(Mutation::SwapV);
    assert_eq!(swap, vec!["omega-consistency".to_string()]);
}
