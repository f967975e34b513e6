//! Seeded invariant suite, independent of any particular solution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{random_point, vw_defect, Check, Tolerances, VerifyError};
use crate::algebra::{GroupVector, SymMatrix3};
use crate::frame::{self, StructureConstants, VectorBasis};
use crate::maxwell_system::omega::inverse_defect;
use crate::maxwell_system::sample::sample_admissible;
use crate::maxwell_system::{generic_solve, solve_case, system_residual, system_scale, CaseId, FieldState};

/// Deliberate defects used to confirm that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Expect C³₁₂ = −1 instead of +1.
    FlipC312,
    /// Build V = β × α instead of α × β.
    SwapV,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestSummary {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub total: usize,
}

impl SelftestSummary {
    pub fn pass(&self) -> bool {
        self.passed == self.total
    }
}

/// Samples per branch for the solver comparisons.
pub const SAMPLES_PER_CASE: usize = 300;

fn random_state<R: Rng>(rng: &mut R) -> FieldState {
    let mut v = || GroupVector::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
    FieldState {
        alpha: v(),
        beta: v(),
        alpha_dot: v(),
        beta_dot: v(),
    }
}

/// Random symmetric positive-definite matrix with eigenvalues in [0.5, 3].
pub fn random_spd<R: Rng>(rng: &mut R) -> SymMatrix3 {
    let mut m = [[0.0; 3]; 3];
    for row in &mut m {
        for x in row.iter_mut() {
            *x = rng.gen_range(-0.5..0.5);
        }
    }
    let mut s = [0.0; 6];
    let mut k = 0;
    for i in 0..3 {
        for j in i..3 {
            let mut v: f64 = (0..3).map(|l| m[i][l] * m[j][l]).sum();
            if i == j {
                v += 0.5;
            }
            s[k] = v;
            k += 1;
        }
    }
    SymMatrix3(s)
}

pub fn run_selftest(seed: u64, tol: &Tolerances, mutation: Mutation) -> Result<SelftestSummary, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut vw: f64 = 0.0;
    for _ in 0..1000 {
        vw = vw.max(vw_defect(&random_state(&mut rng)));
    }
    checks.push(Check::new("vw-zero", vw, tol.vw_zero));

    let expected = match mutation {
        Mutation::FlipC312 => frame::structure_constants().with_entry(2, 0, 1, -1.0),
        _ => frame::structure_constants(),
    };
    let (mut dual, mut comm, mut z, mut rho) = (0f64, 0f64, 0f64, 0f64);
    for _ in 0..100 {
        let p = random_point(&mut rng);
        dual = dual.max(frame::duality_error(&p));
        rho = rho.max(frame::rho(&p).max_abs());
        for basis in [VectorBasis::Frame, VectorBasis::Killing] {
            let got: StructureConstants = frame::commutator_coefficients(basis, &p, frame::FRAME_FD_STEP)?;
            comm = comm.max(got.max_abs_diff(&expected));
        }
        z = z.max(frame::z_relation_residual(&p, &expected, frame::FRAME_FD_STEP)?);
    }
    checks.push(Check::new("duality", dual, tol.duality));
    checks.push(Check::new("commutators", comm, tol.commutators));
    checks.push(Check::new("z-relation", z, tol.z_relation));
    checks.push(Check::new("rho-zero", rho, tol.rho_zero));

    let mut killing: f64 = 0.0;
    for _ in 0..10 {
        let eta = random_spd(&mut rng);
        for _ in 0..5 {
            let p = random_point(&mut rng);
            killing = killing.max(frame::killing_residual(&p, &eta, frame::FRAME_FD_STEP)?);
        }
    }
    checks.push(Check::new("killing", killing, tol.killing));

    let cross: fn(&GroupVector, &GroupVector) -> GroupVector = match mutation {
        Mutation::SwapV => |a, b| b.cross(a),
        _ => |a, b| a.cross(b),
    };
    let mut oracle: f64 = 0.0;
    let mut sys: f64 = 0.0;
    let mut omega: f64 = 0.0;
    for case in CaseId::ALL {
        for _ in 0..SAMPLES_PER_CASE {
            let smp = sample_admissible(case, &mut rng);
            let free = smp.free_values();
            let scale = 1f64.max(smp.n.n.max_abs());
            match (solve_case(case, &smp.state, &free), generic_solve(&smp.state, case.free_slots(), &free)) {
                (Ok(a), Ok(b)) => {
                    let d = a.packed().iter().zip(b.packed()).fold(0f64, |m, (x, y)| m.max((x - y).abs()));
                    oracle = oracle.max(d / scale);
                    let r = crate::smallmat::norm(&system_residual(&smp.state, &a));
                    sys = sys.max(r / system_scale(&smp.state, &a));
                }
                _ => oracle = f64::INFINITY,
            }
            if let Some(d) = inverse_defect(case, &smp.state, cross) {
                omega = omega.max(d);
            }
        }
    }
    checks.push(Check::new("case-vs-oracle", oracle, tol.case_vs_oracle));
    checks.push(Check::new("system-residual", sys, tol.system_residual));
    checks.push(Check::new("omega-consistency", omega, tol.omega_consistency));

    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(SelftestSummary {
        seed,
        total: checks.len(),
        passed,
        checks,
    })
}
