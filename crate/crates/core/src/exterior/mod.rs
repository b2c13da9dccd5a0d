//! Decay of bounded solutions outside a ball, via projected heat kernel potentials.

pub mod kernel;
pub mod potential;
pub mod surface;

pub use kernel::{kernel_full_grid, ProjectedHeatKernel};
pub use potential::{potential, velocity_on_shells, vorticity_on_shells, PotentialOptions, PotentialOutput};
pub use surface::{sphere_quadrature, SurfaceForce};

use crate::error::{Error, Result};
use crate::fit::loglog_fit;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstantModel {
    /// Fit the values as they are.
    None,
    /// Subtract a known constant; its length sets the block size.
    Given(Vec<f64>),
    /// Subtract the constant (one per component of a block of the given size)
    /// that best explains the samples as `a + c r^p`.
    BestFit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub rms: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// The subtracted constant (empty for [`ConstantModel::None`]).
    pub constant: Vec<f64>,
}

impl DecayFitResult {
    pub const CSV_HEADER: &'static str = "exponent,intercept,rms,r_min,r_max";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            self.exponent, self.intercept, self.rms, self.r_min, self.r_max
        )
    }
}

/// Best constant per block component for a fixed exponent `p`, and the residual.
///
/// For each slot `e` the model is `v_e(r) = a_{e mod b} + c_e r^p`; with `Q` the
/// projection orthogonal to `phi = r^p`, `a = sum_e <Q v_e, Q 1> / (|S| |Q 1|^2)`.
fn constant_for_exponent(radii: &[f64], values: &[Vec<f64>], block: usize, p: f64) -> (Vec<f64>, f64) {
    let phi: Vec<f64> = radii.iter().map(|r| r.powf(p)).collect();
    let pp: f64 = phi.iter().map(|v| v * v).sum();
    let project = |v: &[f64]| -> Vec<f64> {
        let c = v.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>() / pp;
        v.iter().zip(&phi).map(|(a, b)| a - c * b).collect()
    };
    let q1 = project(&vec![1.0; radii.len()]);
    let q1n: f64 = q1.iter().map(|v| v * v).sum();
    let slots = values[0].len();
    let mut a = vec![0.0; block];
    let mut count = vec![0usize; block];
    let mut columns = Vec::with_capacity(slots);
    for e in 0..slots {
        let col: Vec<f64> = values.iter().map(|row| row[e]).collect();
        let qv = project(&col);
        a[e % block] += qv.iter().zip(&q1).map(|(x, y)| x * y).sum::<f64>();
        count[e % block] += 1;
        columns.push(qv);
    }
    for (ab, c) in a.iter_mut().zip(&count) {
        *ab /= *c as f64 * q1n.max(f64::MIN_POSITIVE);
    }
    let resid = columns
        .iter()
        .enumerate()
        .map(|(e, qv)| qv.iter().zip(&q1).map(|(x, y)| (x - a[e % block] * y).powi(2)).sum::<f64>())
        .sum();
    (a, resid)
}

fn best_constant(radii: &[f64], values: &[Vec<f64>], block: usize) -> Vec<f64> {
    let cost = |p: f64| constant_for_exponent(radii, values, block, p).1;
    // coarse scan then golden section on the bracketing cell
    let grid: Vec<f64> = (0..=400).map(|j| -8.0 + j as f64 * (7.99 / 400.0)).collect();
    let best = (0..grid.len()).min_by(|&i, &j| cost(grid[i]).total_cmp(&cost(grid[j]))).unwrap_or(0);
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if cost(m1) < cost(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    constant_for_exponent(radii, values, block, 0.5 * (lo + hi)).0
}

/// Log-log fit of `max_blocks |v(r) - a|` against `r`.
///
/// `values[i]` holds the samples at `radii[i]`, grouped into blocks (e.g. the
/// three components at each of several directions). Requires at least six radii
/// spanning a factor of three, all at least `4 R` for obstacle radius `R`.
pub fn farfield_fit(
    radii: &[f64],
    values: &[Vec<f64>],
    model: &ConstantModel,
    obstacle: f64,
) -> Result<DecayFitResult> {
    if radii.len() != values.len() {
        return Err(Error::DimensionMismatch(format!("{} radii, {} value rows", radii.len(), values.len())));
    }
    if radii.len() < 6 {
        return Err(Error::InvalidArgument(format!("{} radii, need at least 6", radii.len())));
    }
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    if !(r_min > 0.0 && r_max >= 3.0 * r_min) {
        return Err(Error::InvalidArgument(format!("radii [{r_min}, {r_max}] must span a factor of 3")));
    }
    if r_min < 4.0 * obstacle {
        return Err(Error::InvalidArgument(format!("radius {r_min} below 4R = {}", 4.0 * obstacle)));
    }
    let slots = values[0].len();
    if slots == 0 || values.iter().any(|v| v.len() != slots) {
        return Err(Error::DimensionMismatch("value rows differ in length".into()));
    }
    let (constant, block) = match model {
        ConstantModel::None => (Vec::new(), 1),
        ConstantModel::Given(a) => (a.clone(), a.len().max(1)),
        ConstantModel::BestFit(b) => (best_constant(radii, values, (*b).max(1)), (*b).max(1)),
    };
    if slots % block != 0 {
        return Err(Error::DimensionMismatch(format!("{slots} samples per radius, block size {block}")));
    }
    let mags: Vec<f64> = values
        .iter()
        .map(|row| {
            row.chunks(block)
                .map(|c| {
                    c.iter()
                        .enumerate()
                        .map(|(k, v)| (v - constant.get(k).copied().unwrap_or(0.0)).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let fit = loglog_fit(radii, &mags)?;
    Ok(DecayFitResult { exponent: fit.slope, intercept: fit.intercept, rms: fit.rms, r_min, r_max, constant })
}

/// Decay fit for vorticity samples (no constant is subtracted).
pub fn vorticity_decay_check(radii: &[f64], values: &[Vec<f64>], obstacle: f64) -> Result<DecayFitResult> {
    farfield_fit(radii, values, &ConstantModel::None, obstacle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radii() -> Vec<f64> {
        (0..9).map(|j| 4.0 + j as f64).collect()
    }

    #[test]
    fn exact_power_laws() {
        let r = radii();
        let v: Vec<Vec<f64>> = r.iter().map(|x| vec![2.0 / x]).collect();
        let f = farfield_fit(&r, &v, &ConstantModel::None, 1.0).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-6);
        let f = farfield_fit(&r, &v, &ConstantModel::BestFit(1), 1.0).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-6, "{}", f.exponent);
        let w: Vec<Vec<f64>> = r.iter().map(|x| vec![0.5 / (x * x), -1.0 / (x * x), 0.0]).collect();
        let f = vorticity_decay_check(&r, &w, 1.0).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-6);
    }

    #[test]
    fn constant_is_removed() {
        let r = radii();
        let v: Vec<Vec<f64>> = r.iter().map(|x| vec![0.7 + 3.0 / x, -0.2 - 1.0 / x, 0.1]).collect();
        let f = farfield_fit(&r, &v, &ConstantModel::BestFit(3), 1.0).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-3, "{}", f.exponent);
        assert!((f.constant[0] - 0.7).abs() < 1e-6);
        let g = farfield_fit(&r, &v, &ConstantModel::Given(vec![0.7, -0.2, 0.1]), 1.0).unwrap();
        assert!((g.exponent + 1.0).abs() < 1e-9);
        // shared constant across two direction blocks
        let v2: Vec<Vec<f64>> = r.iter().map(|x| vec![1.0 + 1.0 / x, 1.0 - 2.0 / x]).collect();
        let h = farfield_fit(&r, &v2, &ConstantModel::BestFit(1), 1.0).unwrap();
        assert!((h.exponent + 1.0).abs() < 1e-3 && (h.constant[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn preconditions_and_degenerate() {
        let r = radii();
        let zero: Vec<Vec<f64>> = r.iter().map(|_| vec![0.0; 3]).collect();
        assert!(matches!(vorticity_decay_check(&r, &zero, 1.0), Err(Error::FitDegenerate(_))));
        let v: Vec<Vec<f64>> = r.iter().map(|x| vec![1.0 / x]).collect();
        assert!(farfield_fit(&r[..5], &v[..5], &ConstantModel::None, 1.0).is_err());
        assert!(farfield_fit(&r, &v, &ConstantModel::None, 2.0).is_err());
        let narrow: Vec<f64> = (0..8).map(|j| 4.0 + 0.5 * j as f64).collect();
        assert!(farfield_fit(&narrow, &v[..8], &ConstantModel::None, 1.0).is_err());
    }
}
