//! Random admissible states for each branch.
//!
//! α and β are drawn with the branch's zero pattern and kept away from the
//! branch's denominators. A random symmetric n is then projected onto the
//! linear conditions that keep the zero pattern stationary, and the
//! derivatives are generated from it (α̇ = nβ, β̇ = −nα), so every sample is
//! exactly solvable and the generating n is a third reference value.

use rand::Rng;

use super::{cross_v, CaseId, FieldState, NMatrix};
use crate::algebra::{packed_index, GroupVector, SymMatrix3};

/// Smallest |·| accepted for a branch denominator (components are O(1)).
pub const MARGIN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleSample {
    pub case: CaseId,
    pub state: FieldState,
    pub n: NMatrix,
}

impl AdmissibleSample {
    /// The generating n restricted to the branch's free slots.
    pub fn free_values(&self) -> Vec<f64> {
        self.case.free_slots().iter().map(|s| self.n.get(*s)).collect()
    }
}

fn uniform3<R: Rng>(rng: &mut R) -> GroupVector {
    GroupVector([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
}

/// Row of coefficients for the packed unknowns in (n v)_a.
fn row_of(a: usize, v: &GroupVector) -> [f64; 6] {
    let mut r = [0.0; 6];
    for b in 0..3 {
        r[packed_index(a, b)] += v[b];
    }
    r
}

/// Coefficients of pᵀ n q.
fn bilinear(p: &GroupVector, q: &GroupVector) -> [f64; 6] {
    let mut r = [0.0; 6];
    for a in 0..3 {
        for b in 0..3 {
            r[packed_index(a, b)] += p[a] * q[b];
        }
    }
    r
}

/// Removes from `x` its components along the span of `rows`.
fn project_out(x: &mut [f64; 6], rows: &[[f64; 6]]) {
    let mut basis: Vec<[f64; 6]> = Vec::new();
    for r in rows {
        let mut q = *r;
        for b in &basis {
            let d: f64 = q.iter().zip(b).map(|(u, v)| u * v).sum();
            q.iter_mut().zip(b).for_each(|(u, v)| *u -= d * v);
        }
        let nq = q.iter().map(|u| u * u).sum::<f64>().sqrt();
        if nq > 1e-12 {
            basis.push(q.map(|u| u / nq));
        }
    }
    for b in &basis {
        let d: f64 = x.iter().zip(b).map(|(u, v)| u * v).sum();
        x.iter_mut().zip(b).for_each(|(u, v)| *u -= d * v);
    }
}

/// Two unit vectors orthogonal to `c`.
fn complement(c: &GroupVector) -> (GroupVector, GroupVector) {
    let trial = if c[0].abs() < 0.9 * c.norm() {
        GroupVector::new(1.0, 0.0, 0.0)
    } else {
        GroupVector::new(0.0, 1.0, 0.0)
    };
    let p = c.cross(&trial);
    let p = p.scale(1.0 / p.norm());
    let q = c.cross(&p);
    (p, q.scale(1.0 / q.norm()))
}

fn draw_fields<R: Rng>(case: CaseId, rng: &mut R) -> (GroupVector, GroupVector) {
    loop {
        let (mut a, mut b) = (uniform3(rng), uniform3(rng));
        let ok = match case {
            CaseId::Case1 => a[0].abs() > MARGIN && a.cross(&b)[0].abs() > MARGIN,
            CaseId::Case2 => {
                a[0] = 0.0;
                a[1].abs() > MARGIN && a.cross(&b)[0].abs() > MARGIN
            }
            CaseId::Case3 => {
                a[0] = 0.0;
                a[1] = 0.0;
                a[2].abs() > MARGIN && b[1].abs() > MARGIN
            }
            CaseId::Case4 => {
                a[2] = 0.0;
                b[2] = 0.0;
                a[0].abs() > MARGIN && a.cross(&b)[2].abs() > MARGIN
            }
            CaseId::Case5a => {
                let c = GroupVector::new(1.0, a[1], a[2]);
                let e = rng.gen_range(0.5..1.5);
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let ok = (e * phi.sin()).abs() > MARGIN;
                a = c.scale(e * phi.sin());
                b = c.scale(e * phi.cos());
                ok
            }
            CaseId::Case5b => {
                a = GroupVector::new(0.0, 0.0, a[2]);
                b = GroupVector::new(0.0, 0.0, b[2]);
                a[2].abs() > MARGIN
            }
        };
        if ok {
            return (a, b);
        }
    }
}

/// Linear conditions on n̂ that keep the branch's zero pattern in time.
fn stationarity_rows(case: CaseId, a: &GroupVector, b: &GroupVector) -> Vec<[f64; 6]> {
    match case {
        CaseId::Case1 => vec![],
        CaseId::Case2 => vec![row_of(0, b)],
        CaseId::Case3 => vec![row_of(0, b), row_of(1, b)],
        CaseId::Case4 => vec![row_of(2, a), row_of(2, b)],
        CaseId::Case5a => {
            let c = if a.norm() > b.norm() { *a } else { *b };
            let (p, q) = complement(&c);
            vec![bilinear(&p, &c), bilinear(&q, &c)]
        }
        CaseId::Case5b => {
            let mut r13 = [0.0; 6];
            r13[packed_index(0, 2)] = 1.0;
            let mut r23 = [0.0; 6];
            r23[packed_index(1, 2)] = 1.0;
            vec![r13, r23]
        }
    }
}

/// Draws one admissible state of the given branch together with the n that
/// generated its derivatives.
pub fn sample_admissible<R: Rng>(case: CaseId, rng: &mut R) -> AdmissibleSample {
    let (alpha, beta) = draw_fields(case, rng);
    let mut packed: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    project_out(&mut packed, &stationarity_rows(case, &alpha, &beta));
    let n = SymMatrix3(packed);
    let state = FieldState {
        alpha,
        beta,
        alpha_dot: n.mul_vec(&beta),
        beta_dot: -n.mul_vec(&alpha),
    };
    debug_assert!(case != CaseId::Case1 || cross_v(&state)[0] != 0.0);
    AdmissibleSample {
        case,
        state,
        n: NMatrix { n },
    }
}

#[cfg(test)]
mod tests {
    use super::super::{constraint_rate, point_pattern};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_carry_their_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for case in CaseId::ALL {
            for _ in 0..200 {
                let s = sample_admissible(case, &mut rng);
                assert_eq!(point_pattern(&s.state, 1e-9), Some(case));
                assert!(constraint_rate(&s.state).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivatives_keep_the_zero_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let s = sample_admissible(CaseId::Case3, &mut rng).state;
            assert!(s.alpha_dot[0].abs() < 1e-14 && s.alpha_dot[1].abs() < 1e-14);
            let s = sample_admissible(CaseId::Case4, &mut rng).state;
            assert!(s.alpha_dot[2].abs() < 1e-14 && s.beta_dot[2].abs() < 1e-14);
            let s = sample_admissible(CaseId::Case5a, &mut rng).state;
            assert!(s.alpha.cross(&s.alpha_dot).max_abs() < 1e-14);
            assert!(s.alpha.cross(&s.beta_dot).max_abs() < 1e-14);
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = sample_admissible(CaseId::Case2, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_admissible(CaseId::Case2, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }
}
