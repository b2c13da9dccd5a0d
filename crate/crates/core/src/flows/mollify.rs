//! One-sided time mollification.
//!
//! `u_eps(t) = int u(t - eps s) eta(s) ds` with `supp eta` in `(0, 1)`, so `u_eps(t)`
//! only sees `u` on `[t - eps, t]` and stays defined on an ancient time slab.

use super::signal::TimeSignal;
use crate::error::{Error, Result};
use crate::jet::{flat_exp, Jet};

pub const MAX_ORDER: usize = 4;

/// `eta(s) = c exp(-1/(s(1-s)))` on `(0, 1)`, normalized to unit mass.
#[derive(Debug, Clone)]
pub struct Mollifier {
    c: f64,
    l1: [f64; MAX_ORDER + 1],
}

const TABLE_POINTS: usize = 200_000;

impl Default for Mollifier {
    fn default() -> Self {
        Self::new()
    }
}

impl Mollifier {
    pub fn new() -> Self {
        let raw = |s: f64| -> [f64; 6] {
            if s <= 0.0 || s >= 1.0 {
                return [0.0; 6];
            }
            let x = Jet::variable(s);
            flat_exp(x * (-x + 1.0)).derivatives()
        };
        let h = 1.0 / TABLE_POINTS as f64;
        let mut mass = 0.0;
        let mut l1 = [0.0; MAX_ORDER + 1];
        // the integrands vanish to all orders at both ends: the trapezoid rule is spectrally accurate
        for j in 1..TABLE_POINTS {
            let d = raw(j as f64 * h);
            mass += d[0] * h;
            for (k, acc) in l1.iter_mut().enumerate() {
                *acc += d[k].abs() * h;
            }
        }
        let c = 1.0 / mass;
        l1.iter_mut().for_each(|v| *v *= c);
        Self { c, l1 }
    }

    /// Normalization constant `c`.
    pub fn constant(&self) -> f64 {
        self.c
    }

    /// `eta^(k)(s)` for `k <= 4`.
    pub fn derivative(&self, s: f64, k: usize) -> f64 {
        if s <= 0.0 || s >= 1.0 || k > MAX_ORDER {
            return 0.0;
        }
        let x = Jet::variable(s);
        self.c * flat_exp(x * (-x + 1.0)).derivative(k)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.derivative(s, 0)
    }

    /// `||eta^(k)||_1`.
    pub fn l1_norm(&self, k: usize) -> f64 {
        self.l1[k.min(MAX_ORDER)]
    }

    /// Bound `||eta^(k)||_1 eps^-k sup|u|` on `sup |d_t^k u_eps|`.
    pub fn derivative_bound(&self, k: usize, eps: f64, sup_u: f64) -> f64 {
        self.l1_norm(k) * eps.powi(-(k as i32)) * sup_u
    }
}

/// `d_t^k u_eps` on the part of the sample grid where `[t - eps, t]` is covered.
///
/// Composite Simpson in `s` with step `dt / eps` over an even number of panels
/// covering `(0, 1)`; samples where `eta` vanishes are not needed. For `k = 0`
/// the weights are rescaled to sum to one.
pub fn mollify_time(u: &TimeSignal, eps: f64, k: usize, eta: &Mollifier) -> Result<TimeSignal> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!("mollification width {eps} must be positive")));
    }
    if k > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order {k} unsupported (mollifier derivatives tabulated to order {MAX_ORDER})"
        )));
    }
    let dt = u.dt();
    let ratio = eps / dt;
    // largest lag with eta(j dt / eps) possibly nonzero
    let jmax = ((ratio - 1e-9).ceil() as usize).saturating_sub(1);
    let panels = if jmax % 2 == 0 { jmax.max(2) } else { jmax + 1 };
    let scale = eps.powi(-(k as i32)) * dt / eps;
    let mut weights: Vec<f64> = (0..=panels)
        .map(|j| {
            let simpson = if j == 0 || j == panels {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            simpson / 3.0 * eta.derivative(j as f64 / ratio, k) * scale
        })
        .collect();
    if k == 0 {
        // discrete unit mass, so constants are reproduced to rounding
        let mass: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= mass);
    }
    let samples = u.samples();
    if samples.len() <= jmax + 1 {
        return Err(Error::SignalRangeExceeded(u.t0() + eps));
    }
    let out: Vec<f64> = (jmax..samples.len())
        .map(|i| {
            weights
                .iter()
                .enumerate()
                .take(i + 1)
                .map(|(j, w)| w * samples[i - j])
                .sum()
        })
        .collect();
    TimeSignal::new(out, dt, u.time(jmax))
}
