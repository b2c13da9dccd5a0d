//! Crank-Nicolson solvers for a single lateral Fourier mode on the vertical grid.

use num_complex::Complex64;

use crate::banded::{BandedLu, BandedMatrix};

type C = Complex64;

fn re(v: f64) -> C {
    C::new(v, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TopRow {
    Dirichlet,
    /// One-sided second-order `d_n u = 0`.
    Neumann,
}

fn second_diff(u: &[C], j: usize, h2: f64) -> C {
    (u[j + 1] - u[j] * 2.0 + u[j - 1]) / h2
}

/// `(1/dt) u - (1/2)(D2 - k2) u = explicit part + forcing`, `u_0 = 0`.
#[derive(Debug, Clone)]
pub(crate) struct HeatSolver {
    lu: BandedLu,
    m: usize,
    h: f64,
    k2: f64,
    alpha: f64,
    top: TopRow,
}

impl HeatSolver {
    pub(crate) fn new(m: usize, h: f64, k2: f64, dt: f64, top: TopRow) -> Result<Self, usize> {
        let alpha = 1.0 / dt;
        let h2 = h * h;
        let mut a = BandedMatrix::new(m, 2, 1);
        a.set(0, 0, re(1.0));
        for j in 1..m - 1 {
            a.set(j, j - 1, re(-0.5 / h2));
            a.set(j, j, re(alpha + 1.0 / h2 + 0.5 * k2));
            a.set(j, j + 1, re(-0.5 / h2));
        }
        match top {
            TopRow::Dirichlet => a.set(m - 1, m - 1, re(1.0)),
            TopRow::Neumann => {
                a.set(m - 1, m - 1, re(1.5 / h));
                a.set(m - 1, m - 2, re(-2.0 / h));
                a.set(m - 1, m - 3, re(0.5 / h));
            }
        }
        Ok(Self { lu: a.factor()?, m, h, k2, alpha, top })
    }

    /// One step in place; `top` is the Dirichlet value at the new time level.
    pub(crate) fn advance(&self, u: &mut [C], forcing: C, top: C) {
        let h2 = self.h * self.h;
        let mut rhs = vec![C::new(0.0, 0.0); self.m];
        for j in 1..self.m - 1 {
            rhs[j] = u[j] * self.alpha + (second_diff(u, j, h2) - u[j] * self.k2) * 0.5 + forcing;
        }
        if self.top == TopRow::Dirichlet {
            rhs[self.m - 1] = top;
        }
        self.lu.solve(&mut rhs);
        u.copy_from_slice(&rhs);
    }
}

/// Coupled solve for the longitudinal amplitude `a` (along `xi'/kappa`), the
/// normal component `b` and the pressure `q` of one mode with `kappa > 0`.
///
/// Unknowns interleaved as `3j + {0, 1, 2}`; the divergence `i kappa a + D b`
/// is imposed at every node (one-sided at the ends), the momentum equations
/// at interior nodes, no-slip at the wall.
#[derive(Debug, Clone)]
pub(crate) struct SaddleSolver {
    lu: BandedLu,
    m: usize,
    h: f64,
    k2: f64,
    alpha: f64,
}

impl SaddleSolver {
    pub(crate) fn new(m: usize, h: f64, kappa: f64, dt: f64, top: TopRow) -> Result<Self, usize> {
        let alpha = 1.0 / dt;
        let h2 = h * h;
        let k2 = kappa * kappa;
        let ik = C::new(0.0, kappa);
        let (ia, ib, iq) = (|j: usize| 3 * j, |j: usize| 3 * j + 1, |j: usize| 3 * j + 2);
        let mut a = BandedMatrix::new(3 * m, 7, 5);
        let diag = re(alpha + 1.0 / h2 + 0.5 * k2);
        let off = re(-0.5 / h2);
        a.set(ia(0), ia(0), re(1.0));
        a.set(ib(0), ib(0), re(1.0));
        for j in 1..m - 1 {
            a.set(ia(j), ia(j - 1), off);
            a.set(ia(j), ia(j), diag);
            a.set(ia(j), ia(j + 1), off);
            a.set(ia(j), iq(j), ik);
            a.set(ib(j), ib(j - 1), off);
            a.set(ib(j), ib(j), diag);
            a.set(ib(j), ib(j + 1), off);
            a.set(ib(j), iq(j + 1), re(0.5 / h));
            a.set(ib(j), iq(j - 1), re(-0.5 / h));
        }
        for j in 0..m {
            a.set(iq(j), ia(j), ik);
            if j == 0 {
                a.set(iq(0), ib(0), re(-1.5 / h));
                a.set(iq(0), ib(1), re(2.0 / h));
                a.set(iq(0), ib(2), re(-0.5 / h));
            } else if j == m - 1 {
                a.set(iq(j), ib(j), re(1.5 / h));
                a.set(iq(j), ib(j - 1), re(-2.0 / h));
                a.set(iq(j), ib(j - 2), re(0.5 / h));
            } else {
                a.set(iq(j), ib(j + 1), re(0.5 / h));
                a.set(iq(j), ib(j - 1), re(-0.5 / h));
            }
        }
        let t = m - 1;
        match top {
            TopRow::Dirichlet => a.set(ia(t), ia(t), re(1.0)),
            TopRow::Neumann => {
                a.set(ia(t), ia(t), re(1.5 / h));
                a.set(ia(t), ia(t - 1), re(-2.0 / h));
                a.set(ia(t), ia(t - 2), re(0.5 / h));
            }
        }
        a.set(ib(t), ib(t), re(1.0));
        Ok(Self { lu: a.factor()?, m, h, k2, alpha })
    }

    /// One step in place.
    pub(crate) fn advance(&self, a: &mut [C], b: &mut [C]) {
        let h2 = self.h * self.h;
        let mut rhs = vec![C::new(0.0, 0.0); 3 * self.m];
        for j in 1..self.m - 1 {
            rhs[3 * j] = a[j] * self.alpha + (second_diff(a, j, h2) - a[j] * self.k2) * 0.5;
            rhs[3 * j + 1] = b[j] * self.alpha + (second_diff(b, j, h2) - b[j] * self.k2) * 0.5;
        }
        self.lu.solve(&mut rhs);
        for j in 0..self.m {
            a[j] = rhs[3 * j];
            b[j] = rhs[3 * j + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_keeps_divergence_and_walls() {
        let m = 33;
        let h = 4.0 / (m - 1) as f64;
        let kappa = 1.5;
        for top in [TopRow::Dirichlet, TopRow::Neumann] {
            let s = SaddleSolver::new(m, h, kappa, 0.01, top).unwrap();
            let mut a: Vec<C> = (0..m).map(|j| C::new((j as f64 * 0.3).sin(), 0.2)).collect();
            let mut b: Vec<C> = (0..m).map(|j| C::new(0.1, (j as f64 * 0.7).cos())).collect();
            for _ in 0..5 {
                s.advance(&mut a, &mut b);
            }
            assert!(a[0].norm() < 1e-13 && b[0].norm() < 1e-13 && b[m - 1].norm() < 1e-13);
            let ik = C::new(0.0, kappa);
            for j in 1..m - 1 {
                let div = ik * a[j] + (b[j + 1] - b[j - 1]) / (2.0 * h);
                assert!(div.norm() < 1e-11, "div {}", div.norm());
            }
            if top == TopRow::Neumann {
                let d = (a[m - 1] * 3.0 - a[m - 2] * 4.0 + a[m - 3]) / (2.0 * h);
                assert!(d.norm() < 1e-11);
            }
        }
    }

    #[test]
    fn heat_mode_decays_at_exact_rate() {
        // sin(pi x / H) with Dirichlet ends decays like exp(-((pi/H)^2 + k2) t)
        let (m, hgt, k2, dt) = (129, 2.0, 1.0, 0.005);
        let h = hgt / (m - 1) as f64;
        let s = HeatSolver::new(m, h, k2, dt, TopRow::Dirichlet).unwrap();
        let mut u: Vec<C> = (0..m).map(|j| re((std::f64::consts::PI * j as f64 * h / hgt).sin())).collect();
        for _ in 0..100 {
            s.advance(&mut u, C::new(0.0, 0.0), C::new(0.0, 0.0));
        }
        let rate = (std::f64::consts::PI / hgt).powi(2) + k2;
        let exact = (-rate * 0.5).exp();
        assert!((u[(m - 1) / 2].re - exact).abs() < 1e-4 * exact);
    }
}
