//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] carries the normalized Taylor coefficients `f(x0 + h) = sum c[k] h^k`
//! up to order [`ORDER`]. Propagating jets through `+ - * / exp` gives exact
//! derivatives of closed-form expressions (up to rounding), which is how the
//! cutoff profiles and the time mollifier get their derivative tables.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 5;

const FACTORIAL: [f64; ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; ORDER + 1],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; ORDER + 1];
        c[0] = v;
        Self { c }
    }

    /// The independent variable evaluated at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; ORDER + 1];
        c[0] = x0;
        c[1] = 1.0;
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k] * FACTORIAL[k]
    }

    /// Derivatives `0..=ORDER` as an array.
    pub fn derivatives(&self) -> [f64; ORDER + 1] {
        let mut d = [0.0; ORDER + 1];
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = self.derivative(k);
        }
        d
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.c {
            *v *= s;
        }
        self
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; ORDER + 1];
        e[0] = self.c[0].exp();
        for k in 1..=ORDER {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Self { c: e }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [0.0; ORDER + 1];
        for (k, ck) in c.iter_mut().enumerate() {
            for j in 0..=k {
                *ck += self.c[j] * rhs.c[k - j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let mut q = [0.0; ORDER + 1];
        for k in 0..=ORDER {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= rhs.c[j] * q[k - j];
            }
            q[k] = acc / rhs.c[0];
        }
        Jet { c: q }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

/// `exp(-1/t)` for `t > 0`, identically zero otherwise.
///
/// Below `t = 1e-3` every derivative underflows to zero in double precision,
/// so the jet is returned as zero there instead of forming `1/t^k` terms.
pub fn flat_exp(t: Jet) -> Jet {
    if t.value() < 1e-3 {
        return Jet::constant(0.0);
    }
    (-t.recip()).exp()
}

/// Smooth cutoff equal to 1 on `(-inf, 1]`, 0 on `[2, inf)`.
pub fn smooth_cutoff(s: Jet) -> Jet {
    let x = s.value();
    if x <= 1.0 {
        return Jet::constant(1.0);
    }
    if x >= 2.0 {
        return Jet::constant(0.0);
    }
    let a = flat_exp(-(s - 2.0));
    let b = flat_exp(s - 1.0);
    a / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives_are_exact() {
        let x = Jet::variable(1.5);
        let p = x * x * x - x * 2.0 + 1.0;
        let d = p.derivatives();
        assert!((d[0] - (3.375 - 3.0 + 1.0)).abs() < 1e-14);
        assert!((d[1] - (3.0 * 2.25 - 2.0)).abs() < 1e-14);
        assert!((d[2] - 9.0).abs() < 1e-14);
        assert!((d[3] - 6.0).abs() < 1e-14);
        assert_eq!(d[4], 0.0);
    }

    #[test]
    fn exp_and_division_match_finite_differences() {
        let f = |x: f64| (-1.0 / (x * (1.0 - x))).exp();
        let x0 = 0.37;
        let x = Jet::variable(x0);
        let j = (-(x * (-x + 1.0)).recip()).exp();
        let h = 1e-4;
        let fd1 = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        let fd2 = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
        assert!((j.value() - f(x0)).abs() < 1e-15);
        assert!((j.derivative(1) - fd1).abs() < 1e-7 * fd1.abs().max(1.0));
        assert!((j.derivative(2) - fd2).abs() < 1e-5 * fd2.abs().max(1.0));
    }

    #[test]
    fn cutoff_is_flat_outside_transition() {
        assert_eq!(smooth_cutoff(Jet::variable(0.3)).derivatives(), Jet::constant(1.0).derivatives());
        assert_eq!(smooth_cutoff(Jet::variable(2.5)).value(), 0.0);
        let mid = smooth_cutoff(Jet::variable(1.5)).value();
        assert!((mid - 0.5).abs() < 1e-15);
        // continuity of value and slope at the junctions
        let near = smooth_cutoff(Jet::variable(1.0 + 1e-6));
        assert!((near.value() - 1.0).abs() < 1e-12);
        assert!(near.derivative(1).abs() < 1e-12);
    }
}
