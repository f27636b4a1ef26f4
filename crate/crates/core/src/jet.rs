//! Second-order forward-mode differentiation in a single variable (time).
//!
//! A [`Jet`] carries `(f, f', f'')`. Arithmetic follows the product and
//! chain rules, so any closed-form expression of the ramped springs yields
//! exact first and second time derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    pub fn recip(self) -> Self {
        let v = 1.0 / self.value;
        Self::new(
            v,
            -self.d1 * v * v,
            2.0 * self.d1 * self.d1 * v * v * v - self.d2 * v * v,
        )
    }

    /// Panics in debug builds on a negative argument.
    pub fn sqrt(self) -> Self {
        debug_assert!(self.value >= 0.0, "sqrt of negative jet {self:?}");
        let r = self.value.sqrt();
        Self::new(
            r,
            self.d1 / (2.0 * r),
            self.d2 / (2.0 * r) - self.d1 * self.d1 / (4.0 * r * r * r),
        )
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.value * k, self.d1 * k, self.d2 * k)
    }

    pub fn is_static(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.d1, -self.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        Jet::new(self.value + o, self.d1, self.d2)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, o: f64) -> Jet {
        Jet::new(self.value - o, self.d1, self.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        self.scale(1.0 / o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lift(f: impl Fn(Jet) -> Jet, t: f64) -> Jet {
        f(Jet::new(t, 1.0, 0.0))
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = |x: Jet| (x * x + 3.0).sqrt() / (x + 2.0) - x.recip() * 0.5;
        let g = |x: f64| (x * x + 3.0).sqrt() / (x + 2.0) - 0.5 / x;
        for &t in &[0.3, 1.1, 2.7] {
            let j = lift(f, t);
            let h = 1e-4;
            let d1 = (g(t + 0.1 * h) - g(t - 0.1 * h)) / (0.2 * h);
            let d2 = (g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h);
            assert!((j.value - g(t)).abs() < 1e-14);
            assert!((j.d1 - d1).abs() < 1e-7 * d1.abs(), "{} vs {}", j.d1, d1);
            assert!((j.d2 - d2).abs() < 1e-5 * d2.abs(), "{} vs {}", j.d2, d2);
        }
    }

    #[test]
    fn constants_stay_static() {
        let c = Jet::constant(4.0);
        assert!((c.sqrt() * c / c.recip()).is_static());
    }
}
