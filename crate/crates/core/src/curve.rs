//! Expression-backed time dependence of the potential amplitudes and of the
//! free entries of n.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::GroupVector;
use crate::maxwell_system::{case5a_parametrize, case5b_parametrize, CaseId, FieldState, Slot};
use crate::timefunc::{EvalError, TimeFunc};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("evaluating `{source_text}` at u0 = {t}: {error}")]
    Eval {
        source_text: String,
        t: f64,
        error: EvalError,
    },
    #[error("{case} needs an expression for free slot {slot}")]
    MissingFreeSlot { case: CaseId, slot: Slot },
}

/// How α and β are given.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    /// Six independent expressions.
    Direct {
        alpha: [TimeFunc; 3],
        beta: [TimeFunc; 3],
    },
    /// α = e sinφ (1, c2, c3), β = e cosφ (1, c2, c3).
    Case5a {
        e: f64,
        c2: f64,
        c3: f64,
        phi: TimeFunc,
    },
    /// α = (0, 0, c sinφ), β = (0, 0, c cosφ).
    Case5b { c: f64, phi: TimeFunc },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldCurve {
    pub source: FieldSource,
    pub free: BTreeMap<Slot, TimeFunc>,
}

fn eval(f: &TimeFunc, t: f64) -> Result<crate::timefunc::Dual, CurveError> {
    f.eval(t).map_err(|error| CurveError::Eval {
        source_text: f.source().to_string(),
        t,
        error,
    })
}

impl FieldCurve {
    pub fn new(source: FieldSource, free: BTreeMap<Slot, TimeFunc>) -> Self {
        Self { source, free }
    }

    pub fn state_at(&self, t: f64) -> Result<FieldState, CurveError> {
        match &self.source {
            FieldSource::Direct { alpha, beta } => {
                let mut s = FieldState::default();
                for k in 0..3 {
                    let a = eval(&alpha[k], t)?;
                    let b = eval(&beta[k], t)?;
                    s.alpha[k] = a.value;
                    s.alpha_dot[k] = a.deriv;
                    s.beta[k] = b.value;
                    s.beta_dot[k] = b.deriv;
                }
                Ok(s)
            }
            FieldSource::Case5a { e, c2, c3, phi } => case5a_parametrize(*e, *c2, *c3, phi, t)
                .map_err(|error| CurveError::Eval {
                    source_text: phi.source().to_string(),
                    t,
                    error,
                }),
            FieldSource::Case5b { c, phi } => {
                case5b_parametrize(*c, phi, t).map_err(|error| CurveError::Eval {
                    source_text: phi.source().to_string(),
                    t,
                    error,
                })
            }
        }
    }

    /// Values of the branch's free slots at `t`, in `case.free_slots()` order.
    pub fn free_values(&self, case: CaseId, t: f64) -> Result<Vec<f64>, CurveError> {
        case.free_slots()
            .iter()
            .map(|slot| {
                let f = self
                    .free
                    .get(slot)
                    .ok_or(CurveError::MissingFreeSlot { case, slot: *slot })?;
                Ok(eval(f, t)?.value)
            })
            .collect()
    }

    /// Slots that have an expression but are not free in `case`.
    pub fn extra_slots(&self, case: CaseId) -> Vec<Slot> {
        self.free
            .keys()
            .filter(|s| !case.free_slots().contains(s))
            .copied()
            .collect()
    }

    /// The potential amplitudes only, without derivatives.
    pub fn alpha_at(&self, t: f64) -> Result<GroupVector, CurveError> {
        Ok(self.state_at(t)?.alpha)
    }
}
