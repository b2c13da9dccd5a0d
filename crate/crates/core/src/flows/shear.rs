//! Ancient shear flow driven by a lateral pressure gradient.
//!
//! `d_t u_i - d_n^2 u_i = f_i(t)`, `u_i(0, t) = 0`, with `p = sum_i c_i(t) x_i`,
//! `c_i = -f_i`. The profile is `u(x, t) = int f(s) E(x, t - s) ds` where
//! `E(x, tau) = erf(x / (2 sqrt(tau)))` is the half-line Dirichlet heat flow of
//! the constant 1.

use std::f64::consts::PI;

use libm::erfc;

use super::signal::TimeSignal;
use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField, VectorField};

/// `E(x, tau)`.
pub fn dirichlet_unit(x: f64, tau: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if tau <= 0.0 {
        return 1.0;
    }
    1.0 - erfc(x / (2.0 * tau.sqrt()))
}

/// `(int_0^tau E, int_0^tau sigma E)` in closed form.
fn moments(x: f64, tau: f64) -> (f64, f64) {
    if tau <= 0.0 {
        return (0.0, 0.0);
    }
    let z = x / (2.0 * tau.sqrt());
    let ec = erfc(z);
    let g = x * (tau / PI).sqrt() * (-z * z).exp();
    let f0 = (tau + 0.5 * x * x) * ec - g;
    let f1 = (0.5 * tau * tau - x.powi(4) / 24.0) * ec + (-tau / 6.0 + x * x / 12.0) * g;
    (tau - f0, 0.5 * tau * tau - f1)
}

/// `u(x, t)` at each height in `xn`.
///
/// `f` is taken piecewise linear between samples and integrated against `E`
/// exactly, which stays accurate for `x` far below `sqrt(dt)`. The signal must
/// be known to vanish before its first sample, and after its last sample if
/// `t` lies beyond it.
pub fn dirichlet_heat_shear(f: &TimeSignal, xn: &[f64], t: f64) -> Result<Vec<f64>> {
    if !f.vanishes_before() {
        return Err(Error::InvalidArgument(format!(
            "forcing must vanish at its first sample (t = {}) so that its past is known",
            f.t0()
        )));
    }
    if t > f.t_end() + 1e-9 * f.dt() && !f.vanishes_after() {
        return Err(Error::SignalRangeExceeded(t));
    }
    let s = f.samples();
    let mut knots: Vec<(f64, f64)> = Vec::new();
    for (j, &v) in s.iter().enumerate() {
        let tj = f.time(j);
        if tj >= t {
            break;
        }
        knots.push((tj, v));
    }
    if knots.is_empty() {
        return Ok(vec![0.0; xn.len()]);
    }
    if t <= f.t_end() {
        knots.push((t, f.value_at(t)?));
    }
    Ok(xn
        .iter()
        .map(|&x| {
            if x <= 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            let mut prev = moments(x, t - knots[0].0);
            for w in knots.windows(2) {
                let ((sa, fa), (sb, fb)) = (w[0], w[1]);
                let next = moments(x, t - sb);
                if fa != 0.0 || fb != 0.0 {
                    // tau runs from beta = t - sa down to alpha = t - sb
                    let beta = t - sa;
                    let d = sb - sa;
                    let a = prev.0 - next.0;
                    let b = beta * a - (prev.1 - next.1);
                    acc += fa * (a - b / d) + fb * (b / d);
                }
                prev = next;
            }
            acc
        })
        .collect())
}

/// Shear flow `u = (u_1(x_n, t), ..., u_{n-1}(x_n, t), 0)` on the vertical
/// grid of a wall-bounded [`Grid`], at the requested times.
#[derive(Debug, Clone)]
pub struct ShearSolution {
    pub grid: Grid,
    pub times: Vec<f64>,
    /// `profiles[i][l][k] = u_i(x_k, times[l])`.
    pub profiles: Vec<Vec<Vec<f64>>>,
    pub forcing: Vec<TimeSignal>,
}

pub fn assemble_shear(signals: &[TimeSignal], grid: &Grid, times: &[f64]) -> Result<ShearSolution> {
    if grid.is_periodic() {
        return Err(Error::UnsupportedGeometry("shear flow needs a wall-bounded grid".into()));
    }
    if signals.len() != grid.dim() - 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} forcing signals for dimension {}",
            signals.len(),
            grid.dim()
        )));
    }
    let dt = signals[0].dt();
    if signals.iter().any(|s| (s.dt() - dt).abs() > 1e-12 * dt) {
        return Err(Error::InvalidArgument("forcing signals must share dt".into()));
    }
    let xs = grid.vertical_coords();
    let profiles = signals
        .iter()
        .map(|f| times.iter().map(|&t| dirichlet_heat_shear(f, &xs, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(ShearSolution { grid: *grid, times: times.to_vec(), profiles, forcing: signals.to_vec() })
}

impl ShearSolution {
    /// Pressure gradient `c_i(t) = -f_i(t)`.
    pub fn pressure_coefficients(&self, t: f64) -> Result<Vec<f64>> {
        self.forcing.iter().map(|f| f.value_at(t).map(|v| -v)).collect()
    }

    /// Full velocity field at `times[l]`.
    pub fn velocity(&self, l: usize) -> VectorField {
        let n = self.grid.dim();
        let m = self.grid.column_len();
        let mut comps: Vec<ScalarField> = self
            .profiles
            .iter()
            .map(|p| {
                let col = &p[l];
                let mut f = ScalarField::zeros(self.grid);
                for (i, v) in f.values_mut().iter_mut().enumerate() {
                    *v = col[i % m];
                }
                f
            })
            .collect();
        comps.push(ScalarField::zeros(self.grid));
        debug_assert_eq!(comps.len(), n);
        VectorField::new(comps).unwrap_or_else(|_| VectorField::zeros(self.grid))
    }

    pub fn sup(&self) -> f64 {
        self.profiles
            .iter()
            .flatten()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_flow_limits() {
        assert_eq!(dirichlet_unit(0.0, 1.0), 0.0);
        assert!((dirichlet_unit(20.0, 1.0) - 1.0).abs() < 1e-15);
        let (g0, g1) = moments(0.7, 2.3);
        // compare against midpoint sums
        let n = 200_000;
        let h = 2.3 / n as f64;
        let (mut a, mut b) = (0.0, 0.0);
        for j in 0..n {
            let s = (j as f64 + 0.5) * h;
            a += dirichlet_unit(0.7, s) * h;
            b += s * dirichlet_unit(0.7, s) * h;
        }
        assert!((g0 - a).abs() < 1e-8);
        assert!((g1 - b).abs() < 1e-8);
    }

    #[test]
    fn zero_forcing_and_wall_value() {
        let f = TimeSignal::from_fn(-3.0, 0.0, 1e-2, |_| 0.0).unwrap();
        assert!(dirichlet_heat_shear(&f, &[0.0, 1.0], -1.0).unwrap().iter().all(|&v| v == 0.0));
        let b = TimeSignal::bump(-2.0, -1.0, 1.0, -3.0, 0.0, 1e-3).unwrap();
        let u = dirichlet_heat_shear(&b, &[0.0, 0.5, 1.0], -0.5).unwrap();
        assert_eq!(u[0], 0.0);
        assert!(u[1] > 0.0 && u[2] > u[1]);
    }

    #[test]
    fn far_field_tends_to_mass() {
        let b = TimeSignal::bump(-2.0, -1.0, 1.0, -3.0, 0.0, 1e-3).unwrap();
        let t = -0.5;
        let x = 10.0 * (t + 2.0f64).sqrt();
        let u = dirichlet_heat_shear(&b, &[x], t).unwrap()[0];
        assert!((u - b.integral()).abs() < 0.01 * b.integral());
    }

    #[test]
    fn range_errors() {
        let ramp = TimeSignal::from_fn(-2.0, -1.0, 1e-2, |t| t + 3.0).unwrap();
        assert!(matches!(dirichlet_heat_shear(&ramp, &[1.0], -1.5), Err(Error::InvalidArgument(_))));
        let tail = TimeSignal::from_fn(-2.0, -1.0, 1e-2, |t| (t + 2.0).powi(2)).unwrap();
        assert!(dirichlet_heat_shear(&tail, &[1.0], -1.5).is_ok());
        assert!(matches!(dirichlet_heat_shear(&tail, &[1.0], -0.5), Err(Error::SignalRangeExceeded(_))));
    }

    #[test]
    fn linear_and_monotone() {
        let a = TimeSignal::bump(-2.0, -1.0, 1.0, -3.0, 0.0, 1e-3).unwrap();
        let b = TimeSignal::bump(-2.5, -0.8, 0.4, -3.0, 0.0, 1e-3).unwrap();
        let sum = TimeSignal::new(
            a.samples().iter().zip(b.samples()).map(|(x, y)| x + 2.0 * y).collect(),
            1e-3,
            -3.0,
        )
        .unwrap();
        let xs = [0.1, 0.5, 2.0];
        let ua = dirichlet_heat_shear(&a, &xs, -0.9).unwrap();
        let ub = dirichlet_heat_shear(&b, &xs, -0.9).unwrap();
        let us = dirichlet_heat_shear(&sum, &xs, -0.9).unwrap();
        for k in 0..3 {
            assert!((us[k] - ua[k] - 2.0 * ub[k]).abs() < 1e-12);
            assert!(ua[k] >= -1e-12);
        }
    }

    #[test]
    fn assembled_family_member() {
        let grid = Grid::half_strip(3, 8, 2.0 * PI, 17, 4.0).unwrap();
        let f1 = TimeSignal::bump(-2.0, -1.0, 1.0, -3.0, 0.0, 1e-3).unwrap();
        let f2 = TimeSignal::from_fn(-3.0, 0.0, 1e-3, |_| 0.0).unwrap();
        let sol = assemble_shear(&[f1.clone(), f2], &grid, &[-1.5, -1.0, -0.5]).unwrap();
        assert!(sol.profiles[1].iter().flatten().all(|&v| v == 0.0));
        assert!(sol.profiles[0][2].iter().any(|&v| v > 0.01));
        let u = sol.velocity(2);
        assert_eq!(u.component(2).max_abs(), 0.0);
        assert!(u.components().iter().all(|c| c.lateral_deviation() == 0.0));
        assert!(sol.sup() <= f1.l1() * 1.01);
        assert_eq!(sol.pressure_coefficients(-1.5).unwrap()[0], -f1.value_at(-1.5).unwrap());
        let coarse = TimeSignal::bump(-2.0, -1.0, 1.0, -3.0, 0.0, 2e-3).unwrap();
        assert!(assemble_shear(&[f1, coarse], &grid, &[-1.0]).is_err());
    }
}
