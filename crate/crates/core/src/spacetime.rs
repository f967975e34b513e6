//! The assembled 4D solution: η_ab from n_ab, the semi-geodesic metric,
//! the admissible potential and its field strength, plus table export and
//! import.
//!
//! A solution built from a [`FieldCurve`] re-solves the reduced system at
//! any requested u⁰, so evaluators never interpolate. A solution imported
//! from a table has no curve; between samples it uses cubic Hermite
//! interpolation of α and β (node slopes from α̇ = nβ, β̇ = −nα) and linear
//! interpolation of n.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{GroupVector, SymMatrix3};
use crate::curve::{CurveError, FieldCurve};
use crate::frame::{self, FrameError, SpacePoint};
use crate::maxwell_system::{
    classify_states, constraint_c2, solve_case, CaseId, ClassifyError, FieldState, NMatrix, Slot,
    SolveError, DEFAULT_CLASSIFY_TOL,
};

/// |det n| at or below this is treated as degenerate.
pub const DET_N_TOL: f64 = 1e-12;

/// Allowed |c²(t) − c²(t₀)| per unit of (1 + c²(t₀)) along a run.
pub const CONSTRAINT_DRIFT_TOL: f64 = 1e-8;

pub type Matrix4 = [[f64; 4]; 4];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpacetimeError {
    #[error("degenerate n: det n = {det:e}")]
    DegenerateN { det: f64 },
    #[error(transparent)]
    Chart(#[from] FrameError),
    #[error("sample at u0 = {u0} has no Lorentzian metric (eta_ab not positive definite)")]
    InvalidSample { u0: f64 },
    #[error("u0 = {u0} lies outside the tabulated range [{lo}, {hi}]")]
    OutsideGrid { u0: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("at u0 = {u0}: {error}")]
    Solve { u0: f64, error: SolveError },
    #[error(
        "conservation of c^2 = sum(alpha_a^2 + beta_a^2) drifts by {drift:e} at u0 = {u0} (allowed {tol:e})"
    )]
    ConstraintDrift { u0: f64, drift: f64, tol: f64 },
    #[error("time grid must be non-empty, finite and strictly increasing")]
    BadGrid,
    #[error("table: {0}")]
    Format(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("i/o: {0}")]
    Io(String),
}

/// η = 1/det n and η_ab = η n_ab.
pub fn eta_from_n(n: &NMatrix) -> Result<(f64, SymMatrix3), SpacetimeError> {
    let det = n.det();
    if !(det.abs() > DET_N_TOL) {
        return Err(SpacetimeError::DegenerateN { det });
    }
    let eta = 1.0 / det;
    Ok((eta, n.n.scale(eta)))
}

/// A spacetime point (u⁰, u¹, u², u³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub u0: f64,
    pub p: SpacePoint,
}

impl Event {
    pub fn new(u: [f64; 4]) -> Result<Self, FrameError> {
        Ok(Self {
            u0: u[0],
            p: SpacePoint::from_array([u[1], u[2], u[3]])?,
        })
    }

    pub fn coords(&self) -> [f64; 4] {
        let c = self.p.coords();
        [self.u0, c[0], c[1], c[2]]
    }
}

/// Everything known at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub u0: f64,
    pub state: FieldState,
    pub n: NMatrix,
    pub eta_scalar: f64,
    pub eta: SymMatrix3,
    pub valid: bool,
}

impl SolutionSample {
    /// Completes a solved (state, n) pair. Degenerate n gives an invalid
    /// sample with η = 0.
    pub fn from_solution(u0: f64, state: FieldState, n: NMatrix) -> Self {
        match eta_from_n(&n) {
            Ok((eta_scalar, eta)) => SolutionSample {
                u0,
                state,
                n,
                eta_scalar,
                eta,
                valid: eta.is_positive_definite() && eta.is_finite(),
            },
            Err(_) => SolutionSample {
                u0,
                state,
                n,
                eta_scalar: 0.0,
                eta: SymMatrix3::default(),
                valid: false,
            },
        }
    }
}

/// Identifies a solution in exported tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHeader {
    pub case: CaseId,
    pub free_slots: Vec<Slot>,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeSolution {
    pub header: SolutionHeader,
    pub samples: Vec<SolutionSample>,
    curve: Option<FieldCurve>,
}

fn check_grid(grid: &[f64]) -> Result<(), SpacetimeError> {
    if grid.is_empty()
        || !grid.iter().all(|t| t.is_finite())
        || grid.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(SpacetimeError::BadGrid);
    }
    Ok(())
}

fn hermite(t: f64, t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (value, deriv)
}

impl SpacetimeSolution {
    /// Solves the branch at every grid time and checks conservation of c².
    pub fn assemble(
        case: CaseId,
        curve: FieldCurve,
        grid: &[f64],
        parameters: serde_json::Value,
    ) -> Result<Self, SpacetimeError> {
        check_grid(grid)?;
        let mut samples = Vec::with_capacity(grid.len());
        let mut c2_start = None;
        for &u0 in grid {
            let state = curve.state_at(u0)?;
            let c2 = constraint_c2(&state);
            let c0 = *c2_start.get_or_insert(c2);
            let tol = CONSTRAINT_DRIFT_TOL * (1.0 + c0);
            if !((c2 - c0).abs() <= tol) {
                return Err(SpacetimeError::ConstraintDrift {
                    u0,
                    drift: c2 - c0,
                    tol,
                });
            }
            let free = curve.free_values(case, u0)?;
            let n = solve_case(case, &state, &free).map_err(|error| SpacetimeError::Solve { u0, error })?;
            samples.push(SolutionSample::from_solution(u0, state, n));
        }
        Ok(Self {
            header: SolutionHeader {
                case,
                free_slots: case.free_slots().to_vec(),
                parameters,
            },
            samples,
            curve: Some(curve),
        })
    }

    /// A table-backed solution (no curve).
    pub fn from_samples(header: SolutionHeader, samples: Vec<SolutionSample>) -> Result<Self, SpacetimeError> {
        let grid: Vec<f64> = samples.iter().map(|s| s.u0).collect();
        check_grid(&grid)?;
        Ok(Self {
            header,
            samples,
            curve: None,
        })
    }

    /// Attaches an analytic curve to a table; `local` then re-solves from it
    /// while the stored samples are kept as they are.
    pub fn with_curve(mut self, curve: FieldCurve) -> Self {
        self.curve = Some(curve);
        self
    }

    pub fn case(&self) -> CaseId {
        self.header.case
    }

    pub fn curve(&self) -> Option<&FieldCurve> {
        self.curve.as_ref()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.u0).collect()
    }

    /// Data at an arbitrary u⁰: exact re-solve when a curve is present,
    /// interpolation between table samples otherwise.
    pub fn local(&self, u0: f64) -> Result<SolutionSample, SpacetimeError> {
        if let Some(curve) = &self.curve {
            let state = curve.state_at(u0)?;
            let free = curve.free_values(self.header.case, u0)?;
            let n = solve_case(self.header.case, &state, &free)
                .map_err(|error| SpacetimeError::Solve { u0, error })?;
            return Ok(SolutionSample::from_solution(u0, state, n));
        }
        let (lo, hi) = (self.samples[0].u0, self.samples[self.samples.len() - 1].u0);
        if !(u0 >= lo && u0 <= hi) {
            return Err(SpacetimeError::OutsideGrid { u0, lo, hi });
        }
        let k = self.samples.partition_point(|s| s.u0 <= u0);
        if k > 0 && self.samples[k - 1].u0 == u0 {
            return Ok(self.samples[k - 1]);
        }
        let (a, b) = (&self.samples[k - 1], &self.samples[k]);
        let slope = |s: &SolutionSample| {
            (
                s.n.n.mul_vec(&s.state.beta),
                -s.n.n.mul_vec(&s.state.alpha),
            )
        };
        let ((da0, db0), (da1, db1)) = (slope(a), slope(b));
        let mut state = FieldState::default();
        for i in 0..3 {
            let (v, d) = hermite(u0, a.u0, b.u0, a.state.alpha[i], b.state.alpha[i], da0[i], da1[i]);
            state.alpha[i] = v;
            state.alpha_dot[i] = d;
            let (v, d) = hermite(u0, a.u0, b.u0, a.state.beta[i], b.state.beta[i], db0[i], db1[i]);
            state.beta[i] = v;
            state.beta_dot[i] = d;
        }
        let w = (u0 - a.u0) / (b.u0 - a.u0);
        let n = NMatrix::from_packed(std::array::from_fn(|j| {
            (1.0 - w) * a.n.packed()[j] + w * b.n.packed()[j]
        }));
        Ok(SolutionSample::from_solution(u0, state, n))
    }

    fn valid_local(&self, u0: f64) -> Result<SolutionSample, SpacetimeError> {
        let s = self.local(u0)?;
        if !s.valid {
            return Err(SpacetimeError::InvalidSample { u0 });
        }
        Ok(s)
    }

    /// g_ij with g₀₀ = −1, g₀α = 0, g_αβ = η_ab l^a_α l^b_β.
    pub fn metric(&self, ev: &Event) -> Result<Matrix4, SpacetimeError> {
        let s = self.valid_local(ev.u0)?;
        Ok(metric_from(&s.eta, &ev.p))
    }

    /// g^ij.
    pub fn inverse_metric(&self, ev: &Event) -> Result<Matrix4, SpacetimeError> {
        let s = self.valid_local(ev.u0)?;
        let inv = s.eta.inverse().ok_or(SpacetimeError::InvalidSample { u0: ev.u0 })?;
        let g = frame::inverse_spatial_metric(&ev.p, &inv);
        let mut out = [[0.0; 4]; 4];
        out[0][0] = -1.0;
        for a in 0..3 {
            for b in 0..3 {
                out[a + 1][b + 1] = g[a][b];
            }
        }
        Ok(out)
    }

    /// √−g = |η sin u¹|.
    pub fn sqrt_minus_g(&self, ev: &Event) -> Result<f64, SpacetimeError> {
        let s = self.valid_local(ev.u0)?;
        Ok((s.eta_scalar * frame::frame_det(&ev.p)).abs())
    }

    /// A_i with A₀ = 0 and A_α = α_a l^a_α.
    pub fn potential(&self, ev: &Event) -> Result<[f64; 4], SpacetimeError> {
        let s = self.local(ev.u0)?;
        Ok(potential_from(&s.state.alpha, &ev.p))
    }

    /// F_ij from the closed form: F₀α = α̇_a l^a_α and
    /// F_αβ = l^b_β l^a_α C^c_ba α_c.
    pub fn field_strength(&self, ev: &Event) -> Result<Matrix4, SpacetimeError> {
        let s = self.local(ev.u0)?;
        Ok(field_strength_from(&s.state, &ev.p))
    }
}

pub fn metric_from(eta: &SymMatrix3, p: &SpacePoint) -> Matrix4 {
    let l = frame::frame_matrix(p);
    let mut g = [[0.0; 4]; 4];
    g[0][0] = -1.0;
    for al in 0..3 {
        for be in 0..3 {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += eta.get(a, b) * l[al][a] * l[be][b];
                }
            }
            g[al + 1][be + 1] = s;
        }
    }
    g
}

pub fn potential_from(alpha: &GroupVector, p: &SpacePoint) -> [f64; 4] {
    let l = frame::frame_matrix(p);
    let mut a = [0.0; 4];
    for al in 0..3 {
        a[al + 1] = (0..3).map(|k| alpha[k] * l[al][k]).sum();
    }
    a
}

pub fn field_strength_from(s: &FieldState, p: &SpacePoint) -> Matrix4 {
    let l = frame::frame_matrix(p);
    let c = frame::structure_constants();
    let mut f = [[0.0; 4]; 4];
    for al in 0..3 {
        let e: f64 = (0..3).map(|a| s.alpha_dot[a] * l[al][a]).sum();
        f[0][al + 1] = e;
        f[al + 1][0] = -e;
    }
    for al in 0..3 {
        for be in (al + 1)..3 {
            let mut v = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let cab: f64 = (0..3).map(|k| c.get(k, b, a) * s.alpha[k]).sum();
                    v += l[be][b] * l[al][a] * cab;
                }
            }
            f[al + 1][be + 1] = v;
            f[be + 1][al + 1] = -v;
        }
    }
    f
}

/// The Petrov-form metric components that carry no transcription risk:
/// g₁₃ = a13 cos u³ − a23 sin u³, g₂₃ = a33 cos u¹ + (a23 cos u³ + a13 sin u³) sin u¹,
/// g₃₃ = a33, with a_ab = η_ab.
pub fn petrov_components(eta: &SymMatrix3, p: &SpacePoint) -> [f64; 3] {
    let (s1, c1) = p.u1().sin_cos();
    let (s3, c3) = p.u3().sin_cos();
    let (a13, a23, a33) = (eta.get(0, 2), eta.get(1, 2), eta.get(2, 2));
    [
        a13 * c3 - a23 * s3,
        a33 * c1 + (a23 * c3 + a13 * s3) * s1,
        a33,
    ]
}

/// Fixed table columns, in order.
pub const CSV_COLUMNS: [&str; 22] = [
    "u0", "alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3", "n11", "n12", "n13", "n22",
    "n23", "n33", "eta", "eta11", "eta12", "eta13", "eta22", "eta23", "eta33", "c2", "valid",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    u0: f64,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    beta1: f64,
    beta2: f64,
    beta3: f64,
    n11: f64,
    n12: f64,
    n13: f64,
    n22: f64,
    n23: f64,
    n33: f64,
    eta: f64,
    eta11: f64,
    eta12: f64,
    eta13: f64,
    eta22: f64,
    eta23: f64,
    eta33: f64,
    c2: f64,
    valid: bool,
}

impl Row {
    fn from_sample(s: &SolutionSample) -> Self {
        let (a, b, n, e) = (s.state.alpha, s.state.beta, s.n.packed(), s.eta.0);
        Row {
            u0: s.u0,
            alpha1: a[0],
            alpha2: a[1],
            alpha3: a[2],
            beta1: b[0],
            beta2: b[1],
            beta3: b[2],
            n11: n[0],
            n12: n[1],
            n13: n[2],
            n22: n[3],
            n23: n[4],
            n33: n[5],
            eta: s.eta_scalar,
            eta11: e[0],
            eta12: e[1],
            eta13: e[2],
            eta22: e[3],
            eta23: e[4],
            eta33: e[5],
            c2: constraint_c2(&s.state),
            valid: s.valid,
        }
    }

    fn values(&self) -> [f64; 21] {
        [
            self.u0, self.alpha1, self.alpha2, self.alpha3, self.beta1, self.beta2, self.beta3,
            self.n11, self.n12, self.n13, self.n22, self.n23, self.n33, self.eta, self.eta11,
            self.eta12, self.eta13, self.eta22, self.eta23, self.eta33, self.c2,
        ]
    }

    /// Rebuilds the sample; derivatives come from α̇ = nβ, β̇ = −nα.
    fn to_sample(self) -> Result<SolutionSample, SpacetimeError> {
        if let Some(k) = self.values().iter().position(|v| !v.is_finite()) {
            return Err(SpacetimeError::Format(format!(
                "non-finite {} at u0 = {}",
                CSV_COLUMNS[k], self.u0
            )));
        }
        let alpha = GroupVector::new(self.alpha1, self.alpha2, self.alpha3);
        let beta = GroupVector::new(self.beta1, self.beta2, self.beta3);
        let n = SymMatrix3([self.n11, self.n12, self.n13, self.n22, self.n23, self.n33]);
        Ok(SolutionSample {
            u0: self.u0,
            state: FieldState {
                alpha,
                beta,
                alpha_dot: n.mul_vec(&beta),
                beta_dot: -n.mul_vec(&alpha),
            },
            n: NMatrix { n },
            eta_scalar: self.eta,
            eta: SymMatrix3([self.eta11, self.eta12, self.eta13, self.eta22, self.eta23, self.eta33]),
            valid: self.valid,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonTable {
    header: SolutionHeader,
    samples: Vec<Row>,
}

fn io_err(e: impl std::fmt::Display) -> SpacetimeError {
    SpacetimeError::Io(e.to_string())
}

pub fn export_solution<W: Write>(
    sol: &SpacetimeSolution,
    format: ExportFormat,
    out: W,
) -> Result<(), SpacetimeError> {
    match format {
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for s in &sol.samples {
                w.serialize(Row::from_sample(s)).map_err(io_err)?;
            }
            w.flush().map_err(io_err)
        }
        ExportFormat::Json => {
            let table = JsonTable {
                header: sol.header.clone(),
                samples: sol.samples.iter().map(Row::from_sample).collect(),
            };
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &table).map_err(io_err)?;
            out.write_all(b"\n").map_err(io_err)
        }
    }
}

/// Reads a CSV table. The branch is recovered by classifying the samples.
pub fn import_csv<R: Read>(input: R) -> Result<SpacetimeSolution, SpacetimeError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| SpacetimeError::Format(e.to_string()))?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(SpacetimeError::Format(format!(
            "expected columns {}, found {}",
            CSV_COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for row in r.deserialize::<Row>() {
        let row = row.map_err(|e| SpacetimeError::Format(e.to_string()))?;
        samples.push(row.to_sample()?);
    }
    let states: Vec<(f64, FieldState)> = samples.iter().map(|s| (s.u0, s.state)).collect();
    let case = classify_states(&states, DEFAULT_CLASSIFY_TOL)?;
    SpacetimeSolution::from_samples(
        SolutionHeader {
            case,
            free_slots: case.free_slots().to_vec(),
            parameters: serde_json::Value::Null,
        },
        samples,
    )
}

pub fn import_json<R: Read>(input: R) -> Result<SpacetimeSolution, SpacetimeError> {
    let table: JsonTable =
        serde_json::from_reader(input).map_err(|e| SpacetimeError::Format(e.to_string()))?;
    if table.header.free_slots != table.header.case.free_slots() {
        return Err(SpacetimeError::Format(format!(
            "free_slots {:?} do not match {}",
            table.header.free_slots, table.header.case
        )));
    }
    let samples = table
        .samples
        .into_iter()
        .map(Row::to_sample)
        .collect::<Result<Vec<_>, _>>()?;
    SpacetimeSolution::from_samples(table.header, samples)
}
