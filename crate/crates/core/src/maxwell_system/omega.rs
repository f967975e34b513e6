//! Published closed-form inverses Ω̂_k of the 5×5 minors used in cases 1–4,
//! transcribed as printed, plus an audit that compares each entry with a
//! numerical inverse of the minor.
//!
//! Entries that fail the inverse property are listed in [`TYPO_ALLOWLIST`]
//! together with the corrected formula. The solver uses the corrected
//! matrices; the audit reports every divergence it sees, listed or not.

use serde::Serialize;

use super::{build_omega, build_w, CaseId, FieldState, Slot};
use crate::algebra::GroupVector;
use crate::smallmat::{LinalgError, Matrix};

/// Which rows of Ŵ are kept and which columns are unknown in each minor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinorLayout {
    pub rows: [usize; 5],
    pub unknowns: [Slot; 5],
    pub pinned: Slot,
}

pub fn minor_layout(case: CaseId) -> Option<MinorLayout> {
    use Slot::*;
    let five = [N12, N13, N22, N23, N33];
    let (rows, unknowns, pinned) = match case {
        CaseId::Case1 => ([0, 2, 3, 4, 5], five, N11),
        CaseId::Case2 => ([0, 1, 2, 4, 5], five, N11),
        CaseId::Case3 => ([0, 1, 2, 3, 4], five, N11),
        CaseId::Case4 => ([0, 2, 3, 4, 5], [N11, N12, N13, N22, N23], N33),
        CaseId::Case5a | CaseId::Case5b => return None,
    };
    Some(MinorLayout { rows, unknowns, pinned })
}

/// The 5×5 minor Ŵ_k.
pub fn minor(layout: &MinorLayout, s: &FieldState) -> Matrix {
    let cols = layout.unknowns.map(Slot::index);
    build_w(s).select(&layout.rows, &cols)
}

/// Right-hand side of the minor system with the pinned slot moved across.
pub fn reduced_rhs(layout: &MinorLayout, s: &FieldState, pinned_value: f64) -> [f64; 5] {
    let w = build_w(s);
    let om = build_omega(s);
    let c = layout.pinned.index();
    layout.rows.map(|r| om[r] - w[(r, c)] * pinned_value)
}

/// Right-hand sides as printed, for cases whose zero pattern they assume.
pub fn printed_rhs(case: CaseId, s: &FieldState, free: f64) -> Option<[f64; 5]> {
    let (a, b, ad, bd) = (&s.alpha, &s.beta, &s.alpha_dot, &s.beta_dot);
    let n11 = free;
    Some(match case {
        CaseId::Case1 => [-bd[0] - a[0] * n11, -bd[1], ad[1], -b[2], ad[2]],
        CaseId::Case2 => [-bd[0], -b[0] * n11, -bd[1], -bd[2], ad[2]],
        CaseId::Case3 => [-bd[0], -b[0] * n11, -bd[1], 0.0, -bd[2]],
        CaseId::Case4 => [-bd[0], -bd[1], ad[1], 0.0, 0.0],
        _ => return None,
    })
}

/// Ω̂_k exactly as printed; `v` is whatever the caller takes V_a to be.
pub fn printed_omega(case: CaseId, s: &FieldState, v: &GroupVector) -> Option<[[f64; 5]; 5]> {
    let (a1, a2, a3) = (s.alpha[0], s.alpha[1], s.alpha[2]);
    let (b1, b2, b3) = (s.beta[0], s.beta[1], s.beta[2]);
    let (v1, v2, v3) = (v[0], v[1], v[2]);
    Some(match case {
        CaseId::Case1 => {
            let d1 = a1 * v1;
            let d2 = a1 * v1 * v1;
            [
                [-v2 / d1, -a3 * b2 / d1, a2 * a3 / d1, -a3 * b3 / d1, a3 * a3 / d1],
                [-v3 / d1, a2 * b2 / d1, -a2 * a2 / d1, a2 * b3 / d1, -a2 * a3 / d1],
                [
                    -v2 * v2 / d2,
                    (a3 * b1 * v1 - a2 * b3 * v3) / d2,
                    a3 * (a2 * v2 - a1 * v1) / d2,
                    -a3 * b3 * v2 / d2,
                    a2 * a2 * v2 / d2,
                ],
                [
                    -v2 * v3 / d2,
                    a2 * b2 * v2 / d2,
                    -a2 * a2 * v2 / d2,
                    -a3 * b3 * v3 / d2,
                    a3 * a3 * v3 / d2,
                ],
                [
                    -v3 * v3 / d2,
                    a2 * b2 * v3 / d2,
                    -a2 * a2 * v3 / d2,
                    (a3 * b2 * v3 - a2 * b1 * v1) / d2,
                    a2 * (a1 * v1 - a3 * v3) / d2,
                ],
            ]
        }
        CaseId::Case2 => {
            let q = v1 * v1;
            [
                [b3 / v1, -a3 / v1, 0.0, 0.0, 0.0],
                [-b2 / v1, a2 / v1, 0.0, 0.0, 0.0],
                [
                    a3 * a3 * b1 * b2 / (a2 * q),
                    -a3 * a3 * b1 / q,
                    1.0 / a2,
                    -a3 * b3 / (a2 * v1),
                    a3 * a3 / (a2 * v1),
                ],
                [-a3 * b1 * b2 / q, a2 * a3 * b1 / q, 0.0, b3 / v1, -a3 / v1],
                [a2 * b1 * b2 / v1, -a2 * a2 * b1 / v1, 0.0, -b2 / v1, a2 / v1],
            ]
        }
        CaseId::Case3 => [
            [-b3 / (a3 * b2), 1.0 / b3, 0.0, 0.0, 0.0],
            [1.0 / a3, 0.0, 0.0, 0.0, 0.0],
            [
                b1 * b3 / (a3 * b2 * b2),
                -b1 / (b2 * b2),
                -b3 / (b2 * a3),
                1.0 / b2,
                0.0,
            ],
            [0.0, 0.0, 1.0 / a3, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0 / a3],
        ],
        CaseId::Case4 => [
            [1.0 / a1, -a2 * b2 / (a1 * v3), a2 * a2 / (a1 * v3), 0.0, 0.0],
            [0.0, b2 / v3, -a2 / v3, 0.0, 0.0],
            [0.0, 0.0, 0.0, b2 / v3, -a2 / v3],
            [0.0, -b1 / v3, a1 / v3, 0.0, 0.0],
            [0.0, 0.0, 0.0, -b1 / v3, a1 / v3],
        ],
        CaseId::Case5a | CaseId::Case5b => return None,
    })
}

/// Which printed object a finding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrintedObject {
    Inverse,
    Rhs,
}

/// A known transcription defect and its replacement. Rows and columns are
/// 1-based, as printed.
#[derive(Debug, Clone, Copy)]
pub struct TypoEntry {
    pub case: CaseId,
    pub object: PrintedObject,
    pub row: usize,
    pub col: usize,
    pub printed: &'static str,
    pub corrected: &'static str,
    pub value: fn(&FieldState, &GroupVector) -> f64,
}

pub static TYPO_ALLOWLIST: &[TypoEntry] = &[
    TypoEntry {
        case: CaseId::Case1,
        object: PrintedObject::Inverse,
        row: 3,
        col: 2,
        printed: "(a3*b1*V1 - a2*b3*V3)/(a1*V1^2)",
        corrected: "(a1*a2*b3^2 - a3^2*b1*b2)/(a1*V1^2)",
        value: |s, v| {
            let (a, b) = (&s.alpha, &s.beta);
            (a[0] * a[1] * b[2] * b[2] - a[2] * a[2] * b[0] * b[1]) / (a[0] * v[0] * v[0])
        },
    },
    TypoEntry {
        case: CaseId::Case1,
        object: PrintedObject::Inverse,
        row: 3,
        col: 5,
        printed: "a2^2*V2/(a1*V1^2)",
        corrected: "a3^2*V2/(a1*V1^2)",
        value: |s, v| s.alpha[2] * s.alpha[2] * v[1] / (s.alpha[0] * v[0] * v[0]),
    },
    TypoEntry {
        case: CaseId::Case2,
        object: PrintedObject::Inverse,
        row: 5,
        col: 1,
        printed: "a2*b1*b2/V1",
        corrected: "a2*b1*b2/V1^2",
        value: |s, v| s.alpha[1] * s.beta[0] * s.beta[1] / (v[0] * v[0]),
    },
    TypoEntry {
        case: CaseId::Case2,
        object: PrintedObject::Inverse,
        row: 5,
        col: 2,
        printed: "-a2^2*b1/V1",
        corrected: "-a2^2*b1/V1^2",
        value: |s, v| -s.alpha[1] * s.alpha[1] * s.beta[0] / (v[0] * v[0]),
    },
    TypoEntry {
        case: CaseId::Case3,
        object: PrintedObject::Inverse,
        row: 1,
        col: 2,
        printed: "1/b3",
        corrected: "1/b2",
        value: |s, _| 1.0 / s.beta[1],
    },
    TypoEntry {
        case: CaseId::Case1,
        object: PrintedObject::Rhs,
        row: 4,
        col: 1,
        printed: "-b3",
        corrected: "-db3/dt",
        value: |s, _| -s.beta_dot[2],
    },
];

fn allowlisted(case: CaseId, object: PrintedObject, row: usize, col: usize) -> Option<&'static TypoEntry> {
    TYPO_ALLOWLIST
        .iter()
        .find(|e| e.case == case && e.object == object && e.row == row && e.col == col)
}

/// Printed Ω̂_k with the allowlisted corrections applied.
pub fn corrected_omega(case: CaseId, s: &FieldState, v: &GroupVector) -> Option<[[f64; 5]; 5]> {
    let mut m = printed_omega(case, s, v)?;
    for e in TYPO_ALLOWLIST
        .iter()
        .filter(|e| e.case == case && e.object == PrintedObject::Inverse)
    {
        m[e.row - 1][e.col - 1] = (e.value)(s, v);
    }
    Some(m)
}

/// Printed right-hand side with the allowlisted corrections applied.
pub fn corrected_rhs(case: CaseId, s: &FieldState, free: f64) -> Option<[f64; 5]> {
    let mut r = printed_rhs(case, s, free)?;
    for e in TYPO_ALLOWLIST
        .iter()
        .filter(|e| e.case == case && e.object == PrintedObject::Rhs)
    {
        r[e.row - 1] = (e.value)(s, &super::cross_v(s));
    }
    Some(r)
}

/// One printed entry that disagrees with first-principles elimination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypoFinding {
    pub case: CaseId,
    pub object: PrintedObject,
    pub row: usize,
    pub col: usize,
    pub printed_value: f64,
    pub derived_value: f64,
    pub printed_formula: Option<String>,
    pub corrected_formula: Option<String>,
    pub allowlisted: bool,
}

/// Relative tolerance for calling a printed entry wrong.
pub const AUDIT_TOL: f64 = 1e-8;

/// Compares printed Ω̂_k and the printed right-hand side with a numerical
/// inverse of the minor and with the derived right-hand side at `s`.
/// `cross` supplies V_a; the real definition is α × β.
pub fn audit_case(
    case: CaseId,
    s: &FieldState,
    free: f64,
    cross: fn(&GroupVector, &GroupVector) -> GroupVector,
) -> Result<Vec<TypoFinding>, LinalgError> {
    let Some(layout) = minor_layout(case) else {
        return Ok(Vec::new());
    };
    let v = cross(&s.alpha, &s.beta);
    let derived = minor(&layout, s).invert()?;
    let printed = printed_omega(case, s, &v).expect("cases 1-4 have a printed inverse");
    let scale = derived.max_abs().max(1.0);
    let mut out = Vec::new();
    let mut push = |object, row: usize, col: usize, p: f64, d: f64| {
        let entry = allowlisted(case, object, row, col);
        out.push(TypoFinding {
            case,
            object,
            row,
            col,
            printed_value: p,
            derived_value: d,
            printed_formula: entry.map(|e| e.printed.to_string()),
            corrected_formula: entry.map(|e| e.corrected.to_string()),
            allowlisted: entry.is_some(),
        });
    };
    for i in 0..5 {
        for j in 0..5 {
            let (p, d) = (printed[i][j], derived[(i, j)]);
            if !((p - d).abs() <= AUDIT_TOL * scale) {
                push(PrintedObject::Inverse, i + 1, j + 1, p, d);
            }
        }
    }
    let pr = printed_rhs(case, s, free).expect("cases 1-4 have a printed rhs");
    let dr = reduced_rhs(&layout, s, free);
    let rscale = dr.iter().chain(&pr).fold(1f64, |m, x| m.max(x.abs()));
    for k in 0..5 {
        if !((pr[k] - dr[k]).abs() <= AUDIT_TOL * rscale) {
            push(PrintedObject::Rhs, k + 1, 1, pr[k], dr[k]);
        }
    }
    Ok(out)
}

/// Largest entry of Ŵ_k Ω̂_k − I using the corrected transcription.
pub fn inverse_defect(
    case: CaseId,
    s: &FieldState,
    cross: fn(&GroupVector, &GroupVector) -> GroupVector,
) -> Option<f64> {
    let layout = minor_layout(case)?;
    let om = corrected_omega(case, s, &cross(&s.alpha, &s.beta))?;
    let om = Matrix::from_rows(&om).ok()?;
    let prod = minor(&layout, s).matmul(&om).ok()?;
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).abs());
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::super::sample::sample_admissible;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real_cross(a: &GroupVector, b: &GroupVector) -> GroupVector {
        a.cross(b)
    }

    fn swapped_cross(a: &GroupVector, b: &GroupVector) -> GroupVector {
        b.cross(a)
    }

    #[test]
    fn layouts_pin_the_free_slot() {
        for case in [CaseId::Case1, CaseId::Case2, CaseId::Case3, CaseId::Case4] {
            let l = minor_layout(case).unwrap();
            assert_eq!(case.free_slots(), &[l.pinned]);
            assert!(!l.unknowns.contains(&l.pinned));
        }
        assert!(minor_layout(CaseId::Case5a).is_none());
    }

    #[test]
    fn corrected_inverses_invert_the_minors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in [CaseId::Case1, CaseId::Case2, CaseId::Case3, CaseId::Case4] {
            for _ in 0..200 {
                let smp = sample_admissible(case, &mut rng);
                let d = inverse_defect(case, &smp.state, real_cross).unwrap();
                assert!(d < 1e-9, "{case}: {d}");
            }
        }
    }

    #[test]
    fn audit_reports_exactly_the_allowlist() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in [CaseId::Case1, CaseId::Case2, CaseId::Case3, CaseId::Case4] {
            let smp = sample_admissible(case, &mut rng);
            let free = smp.free_values()[0];
            let found = audit_case(case, &smp.state, free, real_cross).unwrap();
            assert!(found.iter().all(|f| f.allowlisted), "{case}: {found:?}");
            let listed = TYPO_ALLOWLIST.iter().filter(|e| e.case == case).count();
            assert_eq!(found.len(), listed, "{case}: {found:?}");
        }
    }

    #[test]
    fn case3_finding_names_the_beta2_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let smp = sample_admissible(CaseId::Case3, &mut rng);
        let found = audit_case(CaseId::Case3, &smp.state, smp.free_values()[0], real_cross).unwrap();
        let f = &found[0];
        assert_eq!((f.row, f.col), (1, 2));
        assert!((f.derived_value - 1.0 / smp.state.beta[1]).abs() < 1e-9);
        assert!((f.printed_value - 1.0 / smp.state.beta[2]).abs() < 1e-12);
        assert_eq!(f.corrected_formula.as_deref(), Some("1/b2"));
    }

    #[test]
    fn corrected_rhs_matches_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in [CaseId::Case1, CaseId::Case2, CaseId::Case3, CaseId::Case4] {
            for _ in 0..50 {
                let smp = sample_admissible(case, &mut rng);
                let free = smp.free_values()[0];
                let l = minor_layout(case).unwrap();
                let a = corrected_rhs(case, &smp.state, free).unwrap();
                let b = reduced_rhs(&l, &smp.state, free);
                for k in 0..5 {
                    assert!((a[k] - b[k]).abs() < 1e-12, "{case} {k}");
                }
            }
        }
    }

    #[test]
    fn swapped_v_breaks_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for case in [CaseId::Case1, CaseId::Case2, CaseId::Case4] {
            let smp = sample_admissible(case, &mut rng);
            let d = inverse_defect(case, &smp.state, swapped_cross).unwrap();
            assert!(d > 1e-3, "{case}: {d}");
            let found = audit_case(case, &smp.state, smp.free_values()[0], swapped_cross).unwrap();
            assert!(found.iter().any(|f| !f.allowlisted));
        }
    }
}
