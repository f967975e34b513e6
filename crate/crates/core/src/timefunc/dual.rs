use std::ops::{Add, Div, Mul, Neg, Sub};

/// A value paired with its derivative with respect to u⁰.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub const fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    pub const fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }

    /// The independent variable itself at `t`.
    pub const fn variable(t: f64) -> Self {
        Self { value: t, deriv: 1.0 }
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.deriv * self.value.cos())
    }

    pub fn cos(self) -> Self {
        Self::new(self.value.cos(), -self.deriv * self.value.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, self.deriv * e)
    }

    /// Caller guarantees `value > 0` (or `value == 0` with zero derivative).
    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        let d = if self.deriv == 0.0 { 0.0 } else { self.deriv / (2.0 * r) };
        Self::new(r, d)
    }

    pub fn powi(self, k: u32) -> Self {
        match k {
            0 => Self::constant(1.0),
            _ => {
                let k_i = k as i32;
                Self::new(
                    self.value.powi(k_i),
                    k as f64 * self.value.powi(k_i - 1) * self.deriv,
                )
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.deriv.is_finite()
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let v = self.value / rhs.value;
        Dual::new(v, (self.deriv - v * rhs.deriv) / rhs.value)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual::new(self.value * rhs, self.deriv * rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_rule_on_products() {
        let t = Dual::variable(2.0);
        let f = t * t + Dual::constant(3.0);
        assert_eq!(f, Dual::new(7.0, 4.0));
        assert_eq!(t.powi(3), Dual::new(8.0, 12.0));
        assert_eq!(t.powi(0), Dual::constant(1.0));
    }

    #[test]
    fn quotient_rule() {
        let t = Dual::variable(2.0);
        let f = Dual::constant(1.0) / t;
        assert_eq!(f, Dual::new(0.5, -0.25));
    }

    #[test]
    fn transcendental() {
        let t = Dual::variable(0.0);
        assert_eq!(t.sin(), Dual::new(0.0, 1.0));
        assert_eq!(t.cos(), Dual::new(1.0, -0.0));
        assert_eq!(t.exp(), Dual::new(1.0, 1.0));
        assert_eq!(Dual::variable(4.0).sqrt(), Dual::new(2.0, 0.25));
    }
}
