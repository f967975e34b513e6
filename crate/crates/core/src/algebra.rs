//! Small value types indexed by the group index a = 1..3.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// 3×3 matrix as nested arrays, `m[row][col]`.
pub type Mat3 = [[f64; 3]; 3];

/// A triple indexed by the group index (stored 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupVector(pub [f64; 3]);

impl GroupVector {
    pub const ZERO: GroupVector = GroupVector([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn dot(&self, o: &GroupVector) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &GroupVector) -> GroupVector {
        let (a, b) = (self.0, o.0);
        GroupVector([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> GroupVector {
        GroupVector(self.0.map(|v| v * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for GroupVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for GroupVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for GroupVector {
    type Output = GroupVector;
    fn add(self, o: GroupVector) -> GroupVector {
        GroupVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for GroupVector {
    type Output = GroupVector;
    fn sub(self, o: GroupVector) -> GroupVector {
        GroupVector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for GroupVector {
    type Output = GroupVector;
    fn neg(self) -> GroupVector {
        GroupVector(self.0.map(|v| -v))
    }
}

impl Mul<f64> for GroupVector {
    type Output = GroupVector;
    fn mul(self, s: f64) -> GroupVector {
        self.scale(s)
    }
}

/// Symmetric 3×3 matrix stored as its upper triangle in the order
/// (11, 12, 13, 22, 23, 33).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMatrix3(pub [f64; 6]);

/// Position of entry (a, b) (0-based) in the packed upper-triangle order.
pub const fn packed_index(a: usize, b: usize) -> usize {
    let (i, j) = if a <= b { (a, b) } else { (b, a) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

impl SymMatrix3 {
    pub fn identity() -> Self {
        Self([1.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        Self([d[0], 0.0, 0.0, d[1], 0.0, d[2]])
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[packed_index(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.0[packed_index(a, b)] = v;
    }

    pub fn to_mat3(&self) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = self.get(a, b);
            }
        }
        m
    }

    /// Symmetric part of an arbitrary 3×3 matrix.
    pub fn from_mat3(m: &Mat3) -> Self {
        let mut s = Self::default();
        for a in 0..3 {
            for b in a..3 {
                s.set(a, b, 0.5 * (m[a][b] + m[b][a]));
            }
        }
        s
    }

    pub fn det(&self) -> f64 {
        det3(&self.to_mat3())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|v| v * s))
    }

    pub fn mul_vec(&self, v: &GroupVector) -> GroupVector {
        let mut out = GroupVector::ZERO;
        for a in 0..3 {
            out[a] = (0..3).map(|b| self.get(a, b) * v[b]).sum();
        }
        out
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<SymMatrix3> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = self.to_mat3();
        let cof = |a: usize, b: usize| {
            let (r0, r1) = ((a + 1) % 3, (a + 2) % 3);
            let (c0, c1) = ((b + 1) % 3, (b + 2) % 3);
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let mut inv = SymMatrix3::default();
        for a in 0..3 {
            for b in a..3 {
                inv.set(a, b, cof(b, a) / d);
            }
        }
        Some(inv)
    }

    /// Sylvester's criterion on the leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        let m1 = self.get(0, 0);
        let m2 = self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0);
        m1 > 0.0 && m2 > 0.0 && self.det() > 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose3(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[j][i] = m[i][j];
        }
    }
    t
}

pub fn identity3() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn max_abs_diff3(a: &Mat3, b: &Mat3) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_orientation() {
        let a = GroupVector::new(1.0, 0.0, 0.0);
        let b = GroupVector::new(0.0, 1.0, 0.0);
        assert_eq!(a.cross(&b), GroupVector::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn packed_order() {
        let s = SymMatrix3([11.0, 12.0, 13.0, 22.0, 23.0, 33.0]);
        assert_eq!(s.get(2, 1), 23.0);
        assert_eq!(s.get(1, 0), 12.0);
        assert_eq!(s.get(2, 2), 33.0);
    }

    #[test]
    fn inverse_and_definiteness() {
        let s = SymMatrix3([2.0, 0.5, 0.1, 3.0, -0.2, 1.5]);
        let inv = s.inverse().unwrap();
        let prod = mat3_mul(&s.to_mat3(), &inv.to_mat3());
        assert!(max_abs_diff3(&prod, &identity3()) < 1e-14);
        assert!(s.is_positive_definite());
        assert!(!SymMatrix3::diagonal([1.0, -1.0, 1.0]).is_positive_definite());
        assert!(!SymMatrix3::diagonal([-1.0, -1.0, 1.0]).is_positive_definite());
        assert!(SymMatrix3::diagonal([1.0, 0.0, 1.0]).inverse().is_none());
    }
}
