use thiserror::Error;

use super::{constraint_c2, CaseId, FieldState};
use crate::curve::{CurveError, FieldCurve};

/// Normalized magnitude below which a quantity counts as identically zero.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("no samples to classify")]
    EmptyGrid,
    #[error("case pattern changes along the grid: {first} at u0 = {t_first}, {second} at u0 = {t_second}")]
    CasePatternUnstable {
        first: String,
        t_first: f64,
        second: String,
        t_second: f64,
    },
    #[error("no admissible case: {reason}")]
    NoAdmissibleCase { reason: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Branch matched by a single state, or `None`.
///
/// Components are compared after dividing by c = √(c²), products V_a by c².
pub fn point_pattern(s: &FieldState, tol: f64) -> Option<CaseId> {
    let c = constraint_c2(s).sqrt();
    if !(c > 0.0) || !s.is_finite() {
        return None;
    }
    let a = s.alpha.scale(1.0 / c);
    let b = s.beta.scale(1.0 / c);
    let v = a.cross(&b);
    let nz = |x: f64| x.abs() > tol;
    let v_zero = !nz(v[0]) && !nz(v[1]) && !nz(v[2]);
    if !nz(a[0]) && !nz(a[1]) && !nz(a[2]) {
        return None;
    }
    if nz(a[0]) && nz(v[0]) {
        Some(CaseId::Case1)
    } else if !nz(a[0]) && nz(a[1]) && nz(v[0]) {
        Some(CaseId::Case2)
    } else if !nz(a[0]) && !nz(a[1]) && nz(a[2]) && nz(v[0]) {
        Some(CaseId::Case3)
    } else if !nz(v[0]) && !nz(v[1]) && !nz(a[2]) && !nz(b[2]) && nz(a[0]) && nz(v[2]) {
        Some(CaseId::Case4)
    } else if v_zero && nz(a[0]) {
        Some(CaseId::Case5a)
    } else if v_zero && !nz(a[0]) && !nz(a[1]) && nz(a[2]) {
        Some(CaseId::Case5b)
    } else {
        None
    }
}

fn describe(p: Option<CaseId>) -> String {
    p.map_or_else(|| "no case".to_string(), |c| c.to_string())
}

/// Classifies a sampled trajectory; the same branch must hold at every sample.
pub fn classify_states(samples: &[(f64, FieldState)], tol: f64) -> Result<CaseId, ClassifyError> {
    let Some((t0, s0)) = samples.first() else {
        return Err(ClassifyError::EmptyGrid);
    };
    let first = point_pattern(s0, tol);
    for (t, s) in &samples[1..] {
        let p = point_pattern(s, tol);
        if p != first {
            return Err(ClassifyError::CasePatternUnstable {
                first: describe(first),
                t_first: *t0,
                second: describe(p),
                t_second: *t,
            });
        }
    }
    first.ok_or_else(|| {
        let alpha_zero = samples
            .iter()
            .all(|(_, s)| s.alpha.max_abs() <= tol * constraint_c2(s).sqrt().max(f64::MIN_POSITIVE));
        let reason = if alpha_zero {
            "alpha vanishes, which forces det n = 0".to_string()
        } else {
            "the zero pattern of alpha, beta and V = alpha x beta matches none of the branches".to_string()
        };
        ClassifyError::NoAdmissibleCase { reason }
    })
}

pub fn classify(curve: &FieldCurve, samples: &[f64], tol: f64) -> Result<CaseId, ClassifyError> {
    let states = samples
        .iter()
        .map(|&t| Ok((t, curve.state_at(t)?)))
        .collect::<Result<Vec<_>, CurveError>>()?;
    classify_states(&states, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::FieldSource;
    use crate::timefunc::TimeFunc;
    use std::collections::BTreeMap;

    fn tf(s: &str) -> TimeFunc {
        TimeFunc::new(s, &BTreeMap::new()).unwrap()
    }

    fn direct(alpha: [&str; 3], beta: [&str; 3]) -> FieldCurve {
        FieldCurve::new(
            FieldSource::Direct {
                alpha: alpha.map(tf),
                beta: beta.map(tf),
            },
            BTreeMap::new(),
        )
    }

    fn grid() -> Vec<f64> {
        (0..11).map(|k| 0.2 + 0.1 * k as f64).collect()
    }

    #[test]
    fn canonical_patterns() {
        let c = direct(
            ["1*(1+t)", "2*(1+t)", "3*(1+t)"],
            ["3*(1+t)", "2*(1+t)", "1*(1+t)"],
        );
        assert_eq!(classify(&c, &grid(), DEFAULT_CLASSIFY_TOL), Ok(CaseId::Case1));
        let c = direct(["0", "1+t", "0"], ["0", "0", "2*(1+t)"]);
        assert_eq!(classify(&c, &grid(), DEFAULT_CLASSIFY_TOL), Ok(CaseId::Case2));
        let c = direct(["0", "0", "sin(t)"], ["0", "0", "cos(t)"]);
        assert_eq!(classify(&c, &grid(), DEFAULT_CLASSIFY_TOL), Ok(CaseId::Case5b));
    }

    #[test]
    fn remaining_branches() {
        let c = direct(["0", "0", "1"], ["0.3", "cos(t)", "0"]);
        assert_eq!(classify(&c, &grid(), DEFAULT_CLASSIFY_TOL), Ok(CaseId::Case3));
        let c = direct(["1", "0.5", "0"], ["0", "1", "0"]);
        assert_eq!(classify(&c, &grid(), DEFAULT_CLASSIFY_TOL), Ok(CaseId::Case4));
        let c = FieldCurve::new(
            FieldSource::Case5a { e: 1.0, c2: 0.5, c3: -1.0, phi: tf("t") },
            BTreeMap::new(),
        );
        assert_eq!(classify(&c, &grid(), DEFAULT_CLASSIFY_TOL), Ok(CaseId::Case5a));
    }

    #[test]
    fn pattern_change_is_an_error() {
        // α1 crosses zero at t = 0.7.
        let c = direct(["t - 0.7", "1", "0.5"], ["0.2", "0.3", "1"]);
        assert!(matches!(
            classify(&c, &grid(), DEFAULT_CLASSIFY_TOL),
            Err(ClassifyError::CasePatternUnstable { .. })
        ));
    }

    #[test]
    fn zero_alpha_is_rejected() {
        let c = direct(["0", "0", "0"], ["1", "0", "0"]);
        match classify(&c, &grid(), DEFAULT_CLASSIFY_TOL) {
            Err(ClassifyError::NoAdmissibleCase { reason }) => assert!(reason.contains("det n")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unmatched_pattern_is_rejected() {
        // α1 = 0 and V1 = 0 but V3 ≠ 0: a relabelled branch, not a listed one.
        let c = direct(["0", "1", "0"], ["1", "0", "0"]);
        assert!(matches!(
            classify(&c, &grid(), DEFAULT_CLASSIFY_TOL),
            Err(ClassifyError::NoAdmissibleCase { .. })
        ));
    }

    #[test]
    fn empty_grid() {
        let c = direct(["1", "0", "0"], ["0", "1", "0"]);
        assert_eq!(classify(&c, &[], DEFAULT_CLASSIFY_TOL), Err(ClassifyError::EmptyGrid));
    }

    #[test]
    fn tolerance_is_scale_free() {
        let s = FieldState {
            alpha: crate::algebra::GroupVector::new(1e-6, 2e-6, 0.0),
            beta: crate::algebra::GroupVector::new(0.0, 1e-6, 0.0),
            ..Default::default()
        };
        assert_eq!(point_pattern(&s, DEFAULT_CLASSIFY_TOL), Some(CaseId::Case4));
        let big = FieldState {
            alpha: s.alpha.scale(1e9),
            beta: s.beta.scale(1e9),
            ..Default::default()
        };
        assert_eq!(point_pattern(&big, DEFAULT_CLASSIFY_TOL), Some(CaseId::Case4));
    }
}
