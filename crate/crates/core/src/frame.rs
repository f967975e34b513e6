//! Bianchi type-IX geometry on the spatial slice: the invariant triad, its
//! dual, the Killing vectors, the intertwining Z-matrix and the structure
//! constants.
//!
//! Index orientation is fixed throughout:
//!
//! * [`frame_matrix`] returns l^a_α with **rows indexed by the coordinate α**
//!   and columns by the group index a;
//! * [`inverse_frame`] returns l_a^α with **rows indexed by a**, columns by α;
//! * [`killing_vectors`] returns ξ_a^α with rows indexed by a, columns by α.
//!
//! Under this orientation `inverse_frame(p) · frame_matrix(p) = I`, i.e.
//! Σ_α l_a^α l^b_α = δ_a^b.
//!
//! Coordinates (u¹, u², u³) are Euler-angle-like; the chart degenerates where
//! sin u¹ = 0.

use thiserror::Error;

use crate::algebra::{det3, identity3, mat3_mul, max_abs_diff3, GroupVector, Mat3, SymMatrix3};
use crate::fd;
use crate::smallmat::Matrix;

/// Minimum |sin u¹| accepted by the chart.
pub const CHART_EPSILON: f64 = 1e-6;

/// Default step for finite-difference invariant checks on frame quantities.
pub const FRAME_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("chart singularity: |sin u1| = {sin_u1:e} at u1 = {u1} (need > {CHART_EPSILON:e})")]
    ChartSingularity { u1: f64, sin_u1: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
}

/// A point (u¹, u², u³) of the spatial slice, valid for the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacePoint {
    u: [f64; 3],
}

impl SpacePoint {
    pub fn new(u1: f64, u2: f64, u3: f64) -> Result<Self, FrameError> {
        Self::from_array([u1, u2, u3])
    }

    pub fn from_array(u: [f64; 3]) -> Result<Self, FrameError> {
        if !u.iter().all(|v| v.is_finite()) {
            return Err(FrameError::NonFinite);
        }
        let s = u[0].sin();
        if !(s.abs() > CHART_EPSILON) {
            return Err(FrameError::ChartSingularity { u1: u[0], sin_u1: s });
        }
        Ok(Self { u })
    }

    pub fn coords(&self) -> [f64; 3] {
        self.u
    }

    pub fn u1(&self) -> f64 {
        self.u[0]
    }

    pub fn u2(&self) -> f64 {
        self.u[1]
    }

    pub fn u3(&self) -> f64 {
        self.u[2]
    }
}

/// C^c_{ab} stored as `c[c][a][b]`, antisymmetric in (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants {
    pub c: [[[f64; 3]; 3]; 3],
}

impl StructureConstants {
    /// Sets C^c_{ab} = value and C^c_{ba} = −value (0-based indices).
    pub fn with_entry(mut self, c: usize, a: usize, b: usize, value: f64) -> Self {
        self.c[c][a][b] = value;
        self.c[c][b][a] = -value;
        self
    }

    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.c[c][a][b]
    }

    /// Largest violation of C^d_{ab} C^e_{dc} + cyclic = 0.
    pub fn jacobi_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for e in 0..3 {
                        let s: f64 = (0..3)
                            .map(|d| {
                                self.c[d][a][b] * self.c[e][d][c]
                                    + self.c[d][b][c] * self.c[e][d][a]
                                    + self.c[d][c][a] * self.c[e][d][b]
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &StructureConstants) -> f64 {
        let mut worst: f64 = 0.0;
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    worst = worst.max((self.c[c][a][b] - other.c[c][a][b]).abs());
                }
            }
        }
        worst
    }
}

/// The type-IX table: C³₁₂ = C²₃₁ = C¹₂₃ = 1, i.e. C^c_{ab} = ε_{cab}.
pub fn structure_constants() -> StructureConstants {
    StructureConstants {
        c: [[[0.0; 3]; 3]; 3],
    }
    .with_entry(2, 0, 1, 1.0)
    .with_entry(1, 2, 0, 1.0)
    .with_entry(0, 1, 2, 1.0)
}

/// l^a_α, rows indexed by α.
pub fn frame_matrix(p: &SpacePoint) -> Mat3 {
    let (s1, c1) = p.u1().sin_cos();
    let (s3, c3) = p.u3().sin_cos();
    [[c3, -s3, 0.0], [s1 * s3, s1 * c3, c1], [0.0, 0.0, 1.0]]
}

/// l_a^α, rows indexed by a.
pub fn inverse_frame(p: &SpacePoint) -> Mat3 {
    let (s1, c1) = p.u1().sin_cos();
    let (s3, c3) = p.u3().sin_cos();
    [
        [c3, s3 / s1, -c1 * s3 / s1],
        [-s3, c3 / s1, -c1 * c3 / s1],
        [0.0, 0.0, 1.0],
    ]
}

/// ξ_a^α, rows indexed by a.
pub fn killing_vectors(p: &SpacePoint) -> Mat3 {
    let (s1, c1) = p.u1().sin_cos();
    let (s2, c2) = p.u2().sin_cos();
    [
        [0.0, 1.0, 0.0],
        [c2, -c1 * s2 / s1, s2 / s1],
        [-s2, -c1 * c2 / s1, c2 / s1],
    ]
}

/// Z_a^b = ξ_a^α l^b_α, rows indexed by a.
pub fn z_matrix(p: &SpacePoint) -> Mat3 {
    mat3_mul(&killing_vectors(p), &frame_matrix(p))
}

/// The Z-matrix written out entry by entry; must agree with [`z_matrix`].
pub fn z_matrix_closed_form(p: &SpacePoint) -> Mat3 {
    let (s1, c1) = p.u1().sin_cos();
    let (s2, c2) = p.u2().sin_cos();
    let (s3, c3) = p.u3().sin_cos();
    [
        [s1 * s3, s1 * c3, c1],
        [c2 * c3 - s2 * s3 * c1, -(c2 * s3 + s2 * c3 * c1), s1 * s2],
        [-(s2 * c3 + c2 * s3 * c1), s2 * s3 - c2 * c3 * c1, c2 * s1],
    ]
}

/// det l^a_α = sin u¹.
pub fn frame_det(p: &SpacePoint) -> f64 {
    p.u1().sin()
}

/// ρ_a = ∂_α l_a^α + l_a^α ∂_α(ln l), from the closed-form derivatives.
///
/// Only ∂₃ of the first two rows and ∂₁ of ln l = ln sin u¹ are non-zero.
pub fn rho(p: &SpacePoint) -> GroupVector {
    let (s1, c1) = p.u1().sin_cos();
    let (s3, c3) = p.u3().sin_cos();
    let cot1 = c1 / s1;
    let divergence = [-cot1 * c3, cot1 * s3, 0.0];
    let l_up = inverse_frame(p);
    let log_det_gradient = [cot1, 0.0, 0.0];
    let mut out = GroupVector::ZERO;
    for a in 0..3 {
        let transport: f64 = (0..3).map(|al| l_up[a][al] * log_det_gradient[al]).sum();
        out[a] = divergence[a] + transport;
    }
    out
}

/// All frame matrices at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMatrices {
    pub l_down: Mat3,
    pub l_up: Mat3,
    pub xi: Mat3,
    pub z: Mat3,
}

pub fn frame_matrices(p: &SpacePoint) -> FrameMatrices {
    FrameMatrices {
        l_down: frame_matrix(p),
        l_up: inverse_frame(p),
        xi: killing_vectors(p),
        z: z_matrix(p),
    }
}

/// max |Σ_α l_a^α l^b_α − δ| and max |Σ_a l^a_α l_a^β − δ|.
pub fn duality_error(p: &SpacePoint) -> f64 {
    let down = frame_matrix(p);
    let up = inverse_frame(p);
    let e1 = max_abs_diff3(&mat3_mul(&up, &down), &identity3());
    let e2 = max_abs_diff3(&mat3_mul(&down, &up), &identity3());
    e1.max(e2)
}

/// Which vector-field basis to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorBasis {
    /// Ŷ_a = l_a^α ∂_α
    Frame,
    /// X̂_a = ξ_a^α ∂_α
    Killing,
}

impl VectorBasis {
    fn field(self, p: &SpacePoint) -> Mat3 {
        match self {
            VectorBasis::Frame => inverse_frame(p),
            VectorBasis::Killing => killing_vectors(p),
        }
    }
}

fn field_at(basis: VectorBasis, u: [f64; 3]) -> Result<[f64; 9], FrameError> {
    let p = SpacePoint::from_array(u)?;
    Ok(fd::flatten3(&basis.field(&p)))
}

/// Finite-difference structure coefficients of a basis: `out[c][a][b]` is the
/// coefficient of the c-th field in [V_a, V_b].
pub fn commutator_coefficients(
    basis: VectorBasis,
    p: &SpacePoint,
    h: f64,
) -> Result<StructureConstants, FrameError> {
    let v = basis.field(p);
    // grad[m][a*3+k] = ∂_m V_a^k
    let mut grad = [[0.0; 9]; 3];
    for (m, g) in grad.iter_mut().enumerate() {
        *g = fd::partial(|u| field_at(basis, u), p.coords(), m, h)?;
    }
    let inv = Matrix::from_rows(&v)
        .and_then(|m| m.invert())
        .map_err(|_| FrameError::ChartSingularity {
            u1: p.u1(),
            sin_u1: p.u1().sin(),
        })?;
    let mut out = StructureConstants {
        c: [[[0.0; 3]; 3]; 3],
    };
    for a in 0..3 {
        for b in 0..3 {
            let mut bracket = [0.0; 3];
            for (k, br) in bracket.iter_mut().enumerate() {
                *br = (0..3)
                    .map(|m| v[a][m] * grad[m][3 * b + k] - v[b][m] * grad[m][3 * a + k])
                    .sum();
            }
            // bracket^k = Σ_c coeff_c V_c^k  ⇒  coeff = bracket · V⁻¹
            for c in 0..3 {
                out.c[c][a][b] = (0..3).map(|k| bracket[k] * inv[(k, c)]).sum();
            }
        }
    }
    Ok(out)
}

/// Contravariant spatial metric g^{αβ} = η^{ab} l_a^α l_b^β.
pub fn inverse_spatial_metric(p: &SpacePoint, eta_inv: &SymMatrix3) -> Mat3 {
    let up = inverse_frame(p);
    let mut g = [[0.0; 3]; 3];
    for al in 0..3 {
        for be in 0..3 {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += eta_inv.get(a, b) * up[a][al] * up[b][be];
                }
            }
            g[al][be] = s;
        }
    }
    g
}

/// Relative residual of the Killing equations in contravariant form,
/// g^{αβ}_{,γ} ξ_a^γ − g^{αγ} ξ_a^β_{,γ} − g^{βγ} ξ_a^α_{,γ}, maximised over
/// a, α, β and divided by the largest term magnitude.
pub fn killing_residual(p: &SpacePoint, eta: &SymMatrix3, h: f64) -> Result<f64, FrameError> {
    let eta_inv = eta.inverse().ok_or(FrameError::NonFinite)?;
    let g = inverse_spatial_metric(p, &eta_inv);
    let xi = killing_vectors(p);
    let mut dg = [[0.0; 9]; 3];
    let mut dxi = [[0.0; 9]; 3];
    for m in 0..3 {
        dg[m] = fd::partial(
            |u| {
                let q = SpacePoint::from_array(u)?;
                Ok(fd::flatten3(&inverse_spatial_metric(&q, &eta_inv)))
            },
            p.coords(),
            m,
            h,
        )?;
        dxi[m] = fd::partial(|u| field_at(VectorBasis::Killing, u), p.coords(), m, h)?;
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for a in 0..3 {
        for al in 0..3 {
            for be in 0..3 {
                let transport: f64 = (0..3).map(|ga| dg[ga][3 * al + be] * xi[a][ga]).sum();
                let t1: f64 = (0..3).map(|ga| g[al][ga] * dxi[ga][3 * a + be]).sum();
                let t2: f64 = (0..3).map(|ga| g[be][ga] * dxi[ga][3 * a + al]).sum();
                worst = worst.max((transport - t1 - t2).abs());
                scale = scale.max(transport.abs()).max(t1.abs()).max(t2.abs());
            }
        }
    }
    Ok(worst / scale.max(1.0))
}

/// Residual of ξ_c^α ∂_α Z_a^b − C^d_{ca} Z_d^b, maximised over indices.
pub fn z_relation_residual(
    p: &SpacePoint,
    constants: &StructureConstants,
    h: f64,
) -> Result<f64, FrameError> {
    let z = z_matrix(p);
    let xi = killing_vectors(p);
    let mut dz = [[0.0; 9]; 3];
    for (m, d) in dz.iter_mut().enumerate() {
        *d = fd::partial(
            |u| Ok(fd::flatten3(&z_matrix(&SpacePoint::from_array(u)?))),
            p.coords(),
            m,
            h,
        )?;
    }
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let lhs: f64 = (0..3).map(|m| xi[c][m] * dz[m][3 * a + b]).sum();
                let rhs: f64 = (0..3).map(|d| constants.get(d, c, a) * z[d][b]).sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// ρ_a by finite differences of the inverse frame and of ln sin u¹.
pub fn rho_fd(p: &SpacePoint, h: f64) -> Result<GroupVector, FrameError> {
    let up = inverse_frame(p);
    let mut out = GroupVector::ZERO;
    for m in 0..3 {
        let d = fd::partial(|u| field_at(VectorBasis::Frame, u), p.coords(), m, h)?;
        let dl = fd::partial(
            |u| Ok::<_, FrameError>([frame_det(&SpacePoint::from_array(u)?).abs().ln()]),
            p.coords(),
            m,
            h,
        )?;
        for a in 0..3 {
            out[a] += d[3 * a + m] + up[a][m] * dl[0];
        }
    }
    Ok(out)
}

pub fn det_z(p: &SpacePoint) -> f64 {
    det3(&z_matrix(p))
}
