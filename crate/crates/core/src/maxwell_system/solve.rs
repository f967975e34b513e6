use thiserror::Error;

use super::omega::{corrected_omega, minor_layout, reduced_rhs};
use super::{
    build_omega, build_w, constraint_c2, constraint_rate, cross_v, system_residual, system_scale,
    CaseId, FieldState, NMatrix, Slot,
};
use crate::algebra::SymMatrix3;
use crate::smallmat::{LinalgError, DEFAULT_RANK_TOL};

/// |d(c²)/du⁰| allowed per unit of (1 + c²).
pub const CONSTRAINT_RATE_TOL: f64 = 1e-8;

/// Relative size below which a case denominator counts as zero.
pub const DENOMINATOR_TOL: f64 = 1e-12;

/// ‖Ŵn̂ − ω̂‖ allowed per unit of [`system_scale`].
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("{case} expects {expected} free value(s), got {got}")]
    WrongFreeCount {
        case: CaseId,
        expected: usize,
        got: usize,
    },
    #[error("non-finite input to the reduced system")]
    NonFinite,
    #[error("{case}: denominator {what} = {value:e} vanishes")]
    DenominatorVanishes {
        case: CaseId,
        what: &'static str,
        value: f64,
    },
    #[error("inconsistent system: {detail}")]
    InconsistentSystem { detail: String },
    #[error("pinned slots {slots:?} are not free: the remaining columns do not determine n")]
    SlotsNotFree { slots: Vec<Slot> },
}

fn check_constraint(s: &FieldState) -> Result<(), SolveError> {
    let rate = constraint_rate(s);
    let c2 = constraint_c2(s);
    let tol = CONSTRAINT_RATE_TOL * (1.0 + c2);
    if !(rate.abs() <= tol) {
        return Err(SolveError::InconsistentSystem {
            detail: format!(
                "conservation of c^2 = sum(alpha_a^2 + beta_a^2) is violated: d(c^2)/du0 = {rate:e} exceeds {tol:e}"
            ),
        });
    }
    Ok(())
}

fn check_residual(s: &FieldState, n: &NMatrix) -> Result<(), SolveError> {
    let r = crate::smallmat::norm(&system_residual(s, n));
    let tol = RESIDUAL_TOL * system_scale(s, n);
    if !(r <= tol) {
        return Err(SolveError::InconsistentSystem {
            detail: format!("reduced field equations W n = omega leave residual {r:e} above {tol:e}"),
        });
    }
    Ok(())
}

fn nonzero(case: CaseId, what: &'static str, value: f64, scale: f64) -> Result<f64, SolveError> {
    if !(value.abs() > DENOMINATOR_TOL * scale) {
        return Err(SolveError::DenominatorVanishes { case, what, value });
    }
    Ok(value)
}

/// Solves one branch with its published closed form. `free` lists values for
/// `case.free_slots()` in order.
pub fn solve_case(case: CaseId, s: &FieldState, free: &[f64]) -> Result<NMatrix, SolveError> {
    let slots = case.free_slots();
    if free.len() != slots.len() {
        return Err(SolveError::WrongFreeCount {
            case,
            expected: slots.len(),
            got: free.len(),
        });
    }
    if !s.is_finite() || !free.iter().all(|v| v.is_finite()) {
        return Err(SolveError::NonFinite);
    }
    check_constraint(s)?;
    let scale = constraint_c2(s).sqrt();
    let mut n = [0.0; 6];
    for (slot, v) in slots.iter().zip(free) {
        n[slot.index()] = *v;
    }
    match case {
        CaseId::Case1 | CaseId::Case2 | CaseId::Case3 | CaseId::Case4 => {
            let v = cross_v(s);
            let (a, b) = (&s.alpha, &s.beta);
            let sq = scale * scale;
            match case {
                CaseId::Case1 => {
                    nonzero(case, "alpha1", a[0], scale)?;
                    nonzero(case, "V1", v[0], sq)?;
                }
                CaseId::Case2 => {
                    nonzero(case, "alpha2", a[1], scale)?;
                    nonzero(case, "V1", v[0], sq)?;
                }
                CaseId::Case3 => {
                    nonzero(case, "alpha3", a[2], scale)?;
                    nonzero(case, "beta2", b[1], scale)?;
                }
                _ => {
                    nonzero(case, "alpha1", a[0], scale)?;
                    nonzero(case, "V3", v[2], sq)?;
                }
            }
            let layout = minor_layout(case).expect("cases 1-4 have a minor");
            let om = corrected_omega(case, s, &v).expect("cases 1-4 have an inverse");
            let rhs = reduced_rhs(&layout, s, free[0]);
            for (i, slot) in layout.unknowns.iter().enumerate() {
                n[slot.index()] = (0..5).map(|j| om[i][j] * rhs[j]).sum();
            }
        }
        CaseId::Case5a => {
            // Use whichever of the parallel families α, β has the larger first
            // component; the other family is then implied by the constraint.
            let (a, b) = (&s.alpha, &s.beta);
            let (p, rhs, what) = if a[0].abs() >= b[0].abs() {
                (a, -s.beta_dot, "alpha1")
            } else {
                (b, s.alpha_dot, "beta1")
            };
            let p1 = nonzero(case, what, p[0], scale)?;
            let (n22, n23, n33) = (free[0], free[1], free[2]);
            let q2 = rhs[1] - (p[1] * n22 + p[2] * n23);
            let q3 = rhs[2] - (p[1] * n23 + p[2] * n33);
            let n12 = q2 / p1;
            let n13 = q3 / p1;
            n[Slot::N12.index()] = n12;
            n[Slot::N13.index()] = n13;
            n[Slot::N11.index()] = (rhs[0] - p[1] * n12 - p[2] * n13) / p1;
        }
        CaseId::Case5b => {
            let (a3, b3) = (s.alpha[2], s.beta[2]);
            let d = nonzero(case, "alpha3^2 + beta3^2", a3 * a3 + b3 * b3, scale * scale)?;
            let along = |k: usize| (b3 * s.alpha_dot[k] - a3 * s.beta_dot[k]) / d;
            n[Slot::N13.index()] = along(0);
            n[Slot::N23.index()] = along(1);
            n[Slot::N33.index()] = along(2);
        }
    }
    let out = NMatrix { n: SymMatrix3(n) };
    check_residual(s, &out)?;
    Ok(out)
}

/// First-principles solve of Ŵ n̂ = ω̂ by rank-revealing elimination with
/// the given slots pinned to the given values.
pub fn generic_solve(
    s: &FieldState,
    free_slots: &[Slot],
    free_values: &[f64],
) -> Result<NMatrix, SolveError> {
    if free_slots.len() != free_values.len() {
        return Err(SolveError::InconsistentSystem {
            detail: format!(
                "{} pinned slots but {} values",
                free_slots.len(),
                free_values.len()
            ),
        });
    }
    if !s.is_finite() || !free_values.iter().all(|v| v.is_finite()) {
        return Err(SolveError::NonFinite);
    }
    let w = build_w(s);
    let mut rhs = build_omega(s);
    let mut pinned: Vec<usize> = Vec::new();
    for (slot, v) in free_slots.iter().zip(free_values) {
        let c = slot.index();
        if pinned.contains(&c) {
            return Err(SolveError::SlotsNotFree {
                slots: free_slots.to_vec(),
            });
        }
        pinned.push(c);
        for (r, x) in rhs.iter_mut().enumerate() {
            *x -= w[(r, c)] * v;
        }
    }
    let reduced = w.without_columns(&pinned);
    let full_rank = w.rank(DEFAULT_RANK_TOL);
    let sol = reduced.solve_ranked(&rhs, DEFAULT_RANK_TOL).map_err(|e| match e {
        LinalgError::Inconsistent { violation, threshold } => SolveError::InconsistentSystem {
            detail: format!(
                "reduced field equations have no solution: residual {violation:e} above {threshold:e}"
            ),
        },
        other => SolveError::InconsistentSystem {
            detail: other.to_string(),
        },
    })?;
    if !sol.nullspace_basis.is_empty() || sol.rank < full_rank {
        return Err(SolveError::SlotsNotFree {
            slots: free_slots.to_vec(),
        });
    }
    let mut n = [0.0; 6];
    let mut k = 0;
    for (c, slot) in n.iter_mut().enumerate() {
        if let Some(i) = pinned.iter().position(|&p| p == c) {
            *slot = free_values[i];
        } else {
            *slot = sol.particular[k];
            k += 1;
        }
    }
    let out = NMatrix { n: SymMatrix3(n) };
    check_residual(s, &out)?;
    Ok(out)
}
