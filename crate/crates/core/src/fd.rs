//! Fourth-order central finite differences.

/// Stencil offsets and weights of the 4th-order first-derivative formula;
/// the sum is divided by `12 h`.
pub const STENCIL: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// d/dx of a vector-valued function at `x`.
pub fn derivative<const N: usize, E>(
    mut f: impl FnMut(f64) -> Result<[f64; N], E>,
    x: f64,
    h: f64,
) -> Result<[f64; N], E> {
    let mut out = [0.0; N];
    for (k, w) in STENCIL {
        let v = f(x + k * h)?;
        for (o, vi) in out.iter_mut().zip(v) {
            *o += w * vi;
        }
    }
    for o in &mut out {
        *o /= 12.0 * h;
    }
    Ok(out)
}

/// Partial derivative along coordinate `axis` of a function of a point
/// given as a coordinate array.
pub fn partial<const D: usize, const N: usize, E>(
    mut f: impl FnMut([f64; D]) -> Result<[f64; N], E>,
    x: [f64; D],
    axis: usize,
    h: f64,
) -> Result<[f64; N], E> {
    derivative(
        |s| {
            let mut y = x;
            y[axis] = s;
            f(y)
        },
        x[axis],
        h,
    )
}

pub fn flatten3(m: &[[f64; 3]; 3]) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[i][j];
        }
    }
    out
}
