//! The reduced Maxwell system for admissible potentials on type IX.
//!
//! With A_α = α_a(u⁰) l^a_α the field equations collapse to a 6×6 linear
//! system Ŵ n̂ = ω̂ in the scaled metric unknowns n̂ = (n11, n12, n13, n22,
//! n23, n33). Ŵ is singular; V̂ annuls it, and the single compatibility
//! condition is conservation of c² = Σ α_a² + β_a².

mod classify;
pub mod omega;
pub mod sample;
mod solve;

use std::fmt;
use std::ops::{Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{packed_index, GroupVector, SymMatrix3};
use crate::smallmat::Matrix;
use crate::timefunc::{EvalError, TimeFunc};

pub use classify::{classify, classify_states, point_pattern, ClassifyError, DEFAULT_CLASSIFY_TOL};
pub use solve::{
    generic_solve, solve_case, SolveError, CONSTRAINT_RATE_TOL, DENOMINATOR_TOL, RESIDUAL_TOL,
};

/// Potential amplitudes and their first time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldState {
    pub alpha: GroupVector,
    pub beta: GroupVector,
    pub alpha_dot: GroupVector,
    pub beta_dot: GroupVector,
}

impl FieldState {
    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite()
            && self.beta.is_finite()
            && self.alpha_dot.is_finite()
            && self.beta_dot.is_finite()
    }

    /// Applies the same index permutation to all four triples:
    /// component `a` of the result is component `perm[a]` of the input.
    pub fn permuted(&self, perm: [usize; 3]) -> FieldState {
        let p = |v: &GroupVector| GroupVector([v[perm[0]], v[perm[1]], v[perm[2]]]);
        FieldState {
            alpha: p(&self.alpha),
            beta: p(&self.beta),
            alpha_dot: p(&self.alpha_dot),
            beta_dot: p(&self.beta_dot),
        }
    }
}

/// σ_a and γ_a = η_ab σ_b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedSources {
    pub sigma: GroupVector,
    pub gamma: GroupVector,
}

/// σ_a = ½ ε_abc C^a_bc contraction of α; for type IX this is α itself.
pub fn reduced_sources(alpha: GroupVector, eta: &SymMatrix3) -> ReducedSources {
    let c = crate::frame::structure_constants();
    let mut sigma = GroupVector::ZERO;
    for a in 0..3 {
        let (b, d) = ((a + 1) % 3, (a + 2) % 3);
        sigma[a] = (0..3).map(|k| c.get(k, b, d) * alpha[k]).sum();
    }
    ReducedSources {
        sigma,
        gamma: eta.mul_vec(&sigma),
    }
}

/// One entry of the packed unknown vector n̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "n11")]
    N11,
    #[serde(rename = "n12")]
    N12,
    #[serde(rename = "n13")]
    N13,
    #[serde(rename = "n22")]
    N22,
    #[serde(rename = "n23")]
    N23,
    #[serde(rename = "n33")]
    N33,
}

impl Slot {
    pub const ALL: [Slot; 6] = [Slot::N11, Slot::N12, Slot::N13, Slot::N22, Slot::N23, Slot::N33];

    /// Column of Ŵ (and index into n̂).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Slot> {
        Slot::ALL.get(i).copied()
    }

    /// 0-based matrix position (a, b) with a ≤ b.
    pub fn position(self) -> (usize, usize) {
        match self {
            Slot::N11 => (0, 0),
            Slot::N12 => (0, 1),
            Slot::N13 => (0, 2),
            Slot::N22 => (1, 1),
            Slot::N23 => (1, 2),
            Slot::N33 => (2, 2),
        }
    }

    pub fn name(self) -> &'static str {
        ["n11", "n12", "n13", "n22", "n23", "n33"][self.index()]
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Slot {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Slot::ALL
            .iter()
            .copied()
            .find(|slot| slot.name() == s)
            .ok_or_else(|| format!("unknown slot `{s}` (expected one of n11, n12, n13, n22, n23, n33)"))
    }
}

/// The non-equivalent solution branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
    Case4,
    Case5a,
    Case5b,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::Case1,
        CaseId::Case2,
        CaseId::Case3,
        CaseId::Case4,
        CaseId::Case5a,
        CaseId::Case5b,
    ];

    /// Entries of n that stay arbitrary functions of time in this branch.
    pub fn free_slots(self) -> &'static [Slot] {
        match self {
            CaseId::Case1 | CaseId::Case2 | CaseId::Case3 => &[Slot::N11],
            CaseId::Case4 => &[Slot::N33],
            CaseId::Case5a => &[Slot::N22, Slot::N23, Slot::N33],
            CaseId::Case5b => &[Slot::N11, Slot::N12, Slot::N22],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
            CaseId::Case4 => "case4",
            CaseId::Case5a => "case5a",
            CaseId::Case5b => "case5b",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CaseId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown case `{s}`"))
    }
}

/// Scaled metric n_ab = η_ab / η.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NMatrix {
    pub n: SymMatrix3,
}

impl NMatrix {
    pub fn from_packed(v: [f64; 6]) -> Self {
        Self { n: SymMatrix3(v) }
    }

    pub fn packed(&self) -> [f64; 6] {
        self.n.0
    }

    pub fn get(&self, slot: Slot) -> f64 {
        self.n.0[slot.index()]
    }

    pub fn det(&self) -> f64 {
        self.n.det()
    }

    /// P n Pᵀ for the same permutation convention as [`FieldState::permuted`].
    pub fn permuted(&self, perm: [usize; 3]) -> NMatrix {
        let mut out = SymMatrix3::default();
        for a in 0..3 {
            for b in a..3 {
                out.set(a, b, self.n.get(perm[a], perm[b]));
            }
        }
        NMatrix { n: out }
    }
}

/// Entries of Ŵ for any scalar type. Rows come in (α-row, β-row) pairs per
/// component a; row 2a holds Σ_b α_b n_ab, row 2a+1 holds Σ_b β_b n_ab.
pub fn system_entries<T: Clone + Zero>(alpha: &[T; 3], beta: &[T; 3]) -> [[T; 6]; 6] {
    let mut w: [[T; 6]; 6] = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    for a in 0..3 {
        for b in 0..3 {
            let col = packed_index(a, b);
            w[2 * a][col] = alpha[b].clone();
            w[2 * a + 1][col] = beta[b].clone();
        }
    }
    w
}

/// Cross product for any scalar type.
pub fn cross_entries<T>(a: &[T; 3], b: &[T; 3]) -> [T; 3]
where
    T: Clone + Sub<Output = T> + Mul<Output = T>,
{
    let m = |x: &T, y: &T| x.clone() * y.clone();
    [
        m(&a[1], &b[2]) - m(&a[2], &b[1]),
        m(&a[2], &b[0]) - m(&a[0], &b[2]),
        m(&a[0], &b[1]) - m(&a[1], &b[0]),
    ]
}

/// Entries of V̂ for any scalar type: row (i, j) in packed order is
/// V_i V_j (β1, −α1, β2, −α2, β3, −α3).
pub fn annulling_entries<T>(alpha: &[T; 3], beta: &[T; 3]) -> [[T; 6]; 6]
where
    T: Clone + Zero + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    let v = cross_entries(alpha, beta);
    let base: [T; 6] = std::array::from_fn(|k| {
        let a = k / 2;
        if k % 2 == 0 {
            beta[a].clone()
        } else {
            -alpha[a].clone()
        }
    });
    std::array::from_fn(|row| {
        let (i, j) = Slot::ALL[row].position();
        let vv = v[i].clone() * v[j].clone();
        std::array::from_fn(|k| vv.clone() * base[k].clone())
    })
}

fn to_matrix(e: &[[f64; 6]; 6]) -> Matrix {
    Matrix::from_rows(e).expect("6x6 fits")
}

pub fn build_w(s: &FieldState) -> Matrix {
    to_matrix(&system_entries(&s.alpha.0, &s.beta.0))
}

pub fn build_v(s: &FieldState) -> Matrix {
    to_matrix(&annulling_entries(&s.alpha.0, &s.beta.0))
}

/// ω̂ = (−β̇1, α̇1, −β̇2, α̇2, −β̇3, α̇3).
pub fn build_omega(s: &FieldState) -> [f64; 6] {
    let mut w = [0.0; 6];
    for a in 0..3 {
        w[2 * a] = -s.beta_dot[a];
        w[2 * a + 1] = s.alpha_dot[a];
    }
    w
}

/// V = α × β.
pub fn cross_v(s: &FieldState) -> GroupVector {
    s.alpha.cross(&s.beta)
}

/// c² = Σ α_a² + β_a².
pub fn constraint_c2(s: &FieldState) -> f64 {
    s.alpha.dot(&s.alpha) + s.beta.dot(&s.beta)
}

/// d(c²)/du⁰ = 2 Σ (α_a α̇_a + β_a β̇_a).
pub fn constraint_rate(s: &FieldState) -> f64 {
    2.0 * (s.alpha.dot(&s.alpha_dot) + s.beta.dot(&s.beta_dot))
}

/// Residual Ŵ n̂ − ω̂.
pub fn system_residual(s: &FieldState, n: &NMatrix) -> [f64; 6] {
    let wn = build_w(s).mul_vec(&n.packed()).expect("6x6 times 6");
    let om = build_omega(s);
    std::array::from_fn(|k| wn[k] - om[k])
}

/// Scale against which residuals of Ŵ n̂ = ω̂ are judged.
pub fn system_scale(s: &FieldState, n: &NMatrix) -> f64 {
    let w = build_w(s);
    let om = build_omega(s);
    1f64.max(crate::smallmat::norm(&om))
        .max(w.max_row_norm() * crate::smallmat::norm(&n.packed()))
}

/// α = e sinφ (1, c2, c3), β = e cosφ (1, c2, c3) with exact derivatives.
pub fn case5a_parametrize(
    e: f64,
    c2: f64,
    c3: f64,
    phi: &TimeFunc,
    t: f64,
) -> Result<FieldState, EvalError> {
    let p = phi.eval(t)?;
    let dir = GroupVector::new(1.0, c2, c3).scale(e);
    Ok(FieldState {
        alpha: dir.scale(p.value.sin()),
        beta: dir.scale(p.value.cos()),
        alpha_dot: dir.scale(p.value.cos() * p.deriv),
        beta_dot: dir.scale(-p.value.sin() * p.deriv),
    })
}

/// α = (0, 0, c sinφ), β = (0, 0, c cosφ).
pub fn case5b_parametrize(c: f64, phi: &TimeFunc, t: f64) -> Result<FieldState, EvalError> {
    case5a_parametrize(c, 0.0, 0.0, phi, t).map(|s| s.permuted([1, 2, 0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallmat::DEFAULT_RANK_TOL;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn state(alpha: [f64; 3], beta: [f64; 3]) -> FieldState {
        FieldState {
            alpha: GroupVector(alpha),
            beta: GroupVector(beta),
            ..Default::default()
        }
    }

    fn rat(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    /// Exact rank by fraction-field Gaussian elimination.
    fn exact_rank(m: &[[BigRational; 6]; 6]) -> usize {
        let mut a: Vec<Vec<BigRational>> = m.iter().map(|r| r.to_vec()).collect();
        let mut rank = 0;
        for c in 0..6 {
            let Some(p) = (rank..6).find(|&r| !a[r][c].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for r in 0..6 {
                if r != rank && !a[r][c].is_zero() {
                    let f = a[r][c].clone() / a[rank][c].clone();
                    for k in 0..6 {
                        let d = f.clone() * a[rank][k].clone();
                        a[r][k] = a[r][k].clone() - d;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn reduced_sources_examples() {
        let r = reduced_sources(GroupVector::new(1.0, 2.0, 3.0), &SymMatrix3::identity());
        assert_eq!(r.sigma, GroupVector::new(1.0, 2.0, 3.0));
        assert_eq!(r.gamma, GroupVector::new(1.0, 2.0, 3.0));
        let r = reduced_sources(GroupVector::new(1.0, 0.0, 0.0), &SymMatrix3::diagonal([2.0, 1.0, 1.0]));
        assert_eq!(r.gamma, GroupVector::new(2.0, 0.0, 0.0));
        let r = reduced_sources(GroupVector::ZERO, &SymMatrix3::identity());
        assert_eq!(r.sigma, GroupVector::ZERO);
        assert_eq!(r.gamma, GroupVector::ZERO);
    }

    #[test]
    fn w_pattern_example() {
        let w = build_w(&state([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]));
        let expected = [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        ];
        assert_eq!(w, Matrix::from_rows(&expected).unwrap());
    }

    #[test]
    fn w_rank_example_matches_exact_oracle() {
        let a = [rat(1), rat(0), rat(0)];
        let b = [rat(0), rat(1), rat(0)];
        assert_eq!(exact_rank(&system_entries(&a, &b)), 5);
        let w = build_w(&state([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]));
        let sol = w.solve_ranked(&[0.0; 6], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(sol.rank, 5);
        assert_eq!(sol.nullspace_basis.len(), 1);
    }

    #[test]
    fn omega_examples() {
        assert_eq!(build_omega(&FieldState::default()), [0.0; 6]);
        let s = FieldState {
            alpha_dot: GroupVector::new(1.0, 2.0, 3.0),
            beta_dot: GroupVector::new(4.0, 5.0, 6.0),
            ..Default::default()
        };
        assert_eq!(build_omega(&s), [-4.0, 1.0, -5.0, 2.0, -6.0, 3.0]);
        let phi = TimeFunc::new("t", &BTreeMap::new()).unwrap();
        let s = case5b_parametrize(1.0, &phi, 0.0).unwrap();
        assert_eq!(build_omega(&s), [0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn cross_v_examples() {
        assert_eq!(cross_v(&state([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])), GroupVector::new(0.0, 0.0, 1.0));
        assert_eq!(cross_v(&state([1.0, 2.0, 3.0], [2.0, 4.0, 6.0])), GroupVector::ZERO);
        assert_eq!(cross_v(&state([0.0, 1.0, 0.0], [0.0, 0.0, 2.0])), GroupVector::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn v_vanishes_for_parallel_fields() {
        let v = build_v(&state([1.0, -2.0, 0.5], [-2.0, 4.0, -1.0]));
        assert_eq!(v.max_abs(), 0.0);
    }

    #[test]
    fn constraint_examples() {
        assert_eq!(constraint_c2(&state([3.0, 0.0, 0.0], [0.0, 4.0, 0.0])), 25.0);
        assert_eq!(constraint_c2(&FieldState::default()), 0.0);
        let phi = TimeFunc::new("t", &BTreeMap::new()).unwrap();
        for t in [0.0, 0.3, 1.7, -2.0] {
            let s = case5a_parametrize(1.0, 0.0, 0.0, &phi, t).unwrap();
            assert!((constraint_c2(&s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn case5a_parametrize_examples() {
        let phi = TimeFunc::new("t", &BTreeMap::new()).unwrap();
        let s = case5a_parametrize(1.0, 0.0, 0.0, &phi, 0.0).unwrap();
        assert_eq!(s.alpha, GroupVector::ZERO);
        assert_eq!(s.beta, GroupVector::new(1.0, 0.0, 0.0));
        let mut p = BTreeMap::new();
        p.insert("w".to_string(), 0.7);
        let phi = TimeFunc::new("w*t + sin(t)", &p).unwrap();
        for t in [0.1, 0.9, 2.5] {
            let s = case5a_parametrize(1.3, -0.4, 2.0, &phi, t).unwrap();
            let c2 = 1.3f64.powi(2) * (1.0 + 0.16 + 4.0);
            assert!((constraint_c2(&s) - c2).abs() < 1e-13);
            assert!(cross_v(&s).max_abs() < 1e-15);
            assert!(constraint_rate(&s).abs() < 1e-13);
        }
    }

    #[test]
    fn case5b_parametrize_places_third_component() {
        let phi = TimeFunc::new("t", &BTreeMap::new()).unwrap();
        let s = case5b_parametrize(2.0, &phi, 0.5).unwrap();
        assert_eq!(s.alpha, GroupVector::new(0.0, 0.0, 2.0 * 0.5f64.sin()));
        assert_eq!(s.beta_dot, GroupVector::new(0.0, 0.0, -2.0 * 0.5f64.sin()));
    }

    #[test]
    fn annulling_identity_is_exact_in_rationals() {
        let a = [rat(3), rat(-7), rat(2)];
        let b = [rat(5), rat(1), rat(-4)];
        let w = system_entries(&a, &b);
        let v = annulling_entries(&a, &b);
        for i in 0..6 {
            for j in 0..6 {
                let s = (0..6).fold(rat(0), |acc, k| acc + v[i][k].clone() * w[k][j].clone());
                assert!(s.is_zero());
            }
        }
        assert_eq!(exact_rank(&w), 5);
    }

    #[test]
    fn slot_and_case_names_round_trip() {
        for s in Slot::ALL {
            assert_eq!(s.name().parse::<Slot>().unwrap(), s);
            assert_eq!(Slot::from_index(s.index()), Some(s));
            let (a, b) = s.position();
            assert_eq!(packed_index(a, b), s.index());
        }
        for c in CaseId::ALL {
            assert_eq!(c.name().parse::<CaseId>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
        }
        assert!("n21".parse::<Slot>().is_err());
    }

    #[test]
    fn free_slot_table() {
        use Slot::*;
        assert_eq!(CaseId::Case1.free_slots(), &[N11]);
        assert_eq!(CaseId::Case2.free_slots(), &[N11]);
        assert_eq!(CaseId::Case3.free_slots(), &[N11]);
        assert_eq!(CaseId::Case4.free_slots(), &[N33]);
        assert_eq!(CaseId::Case5a.free_slots(), &[N22, N23, N33]);
        assert_eq!(CaseId::Case5b.free_slots(), &[N11, N12, N22]);
    }

    fn arb_vec(r: f64) -> impl Strategy<Value = [f64; 3]> {
        [-r..r, -r..r, -r..r]
    }

    proptest! {
        #[test]
        fn w_is_singular(a in arb_vec(10.0), b in arb_vec(10.0)) {
            let w = build_w(&state(a, b));
            let scale = w.max_row_norm().powi(6).max(1e-300);
            prop_assert!(w.det().unwrap().abs() <= 1e-12 * scale);
        }

        #[test]
        fn w_rank_is_five_when_v_nonzero(a in arb_vec(1.0), b in arb_vec(1.0)) {
            let s = state(a, b);
            let v = cross_v(&s);
            prop_assume!(a[0].abs() > 0.1 && v[0].abs() > 0.1);
            prop_assert_eq!(build_w(&s).rank(DEFAULT_RANK_TOL), 5);
        }

        #[test]
        fn annulling_identity(a in arb_vec(10.0), b in arb_vec(10.0)) {
            let s = state(a, b);
            let vw = build_v(&s).matmul(&build_w(&s)).unwrap();
            let bound = build_v(&s).max_abs() * build_w(&s).max_abs();
            prop_assert!(vw.max_abs() <= 1e-15 * bound.max(1.0));
        }

        #[test]
        fn v_omega_links_to_constraint_rate(
            a in arb_vec(2.0), b in arb_vec(2.0), ad in arb_vec(2.0), bd in arb_vec(2.0)
        ) {
            let s = FieldState {
                alpha: GroupVector(a), beta: GroupVector(b),
                alpha_dot: GroupVector(ad), beta_dot: GroupVector(bd),
            };
            let vo = build_v(&s).mul_vec(&build_omega(&s)).unwrap();
            let v = cross_v(&s);
            let rate = 0.5 * constraint_rate(&s);
            for (row, slot) in Slot::ALL.iter().enumerate() {
                let (i, j) = slot.position();
                let expected = -v[i] * v[j] * rate;
                prop_assert!((vo[row] - expected).abs() <= 1e-12 * (1.0 + expected.abs()) * 100.0);
            }
        }

        #[test]
        fn exact_rank_agrees_with_float_rank(
            a in prop::array::uniform3(-3i64..=3), b in prop::array::uniform3(-3i64..=3)
        ) {
            let exact = exact_rank(&system_entries(&a.map(rat), &b.map(rat)));
            let fl = build_w(&state(a.map(|x| x as f64), b.map(|x| x as f64))).rank(DEFAULT_RANK_TOL);
            prop_assert_eq!(exact, fl);
        }
    }

    #[test]
    fn rational_v_entries_match_float() {
        let a = [rat(2), rat(-1), rat(3)];
        let b = [rat(1), rat(4), rat(-2)];
        let v = annulling_entries(&a, &b);
        let f = build_v(&state([2.0, -1.0, 3.0], [1.0, 4.0, -2.0]));
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(v[i][j].to_f64().unwrap(), f[(i, j)]);
            }
        }
    }
}
