//! Kernel of `P e^Delta` in three dimensions, sampled from its Fourier symbol
//! `(delta_ij - xi_i xi_j / |xi|^2) exp(-|xi|^2)` on a large periodic box.
//!
//! By isotropy `k(y) = A(|y|) I + B(|y|) y y^T / |y|^2`, so samples along the
//! `x1` axis (`k11 = A + B`, `k22 = A`) determine the whole kernel. Beyond the
//! trusted radius both profiles follow their fitted power laws.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::spectral::{idft, Grid, ScalarField, SpectralField};

/// Smallest box accepted.
pub const MIN_BOX: f64 = 40.0;
/// Largest tolerated periodization bias at the trusted radius.
pub const MAX_BIAS: f64 = 0.05;

/// Scalar heat kernel at unit time, `(4 pi)^(-3/2) exp(-r^2/4)`.
pub fn heat_kernel(r: f64) -> f64 {
    (4.0 * PI).powf(-1.5) * (-r * r / 4.0).exp()
}

/// `k_ij(0) = delta_ij / (12 pi^(3/2))` in free space.
pub fn free_kernel_at_origin() -> f64 {
    1.0 / (12.0 * PI.powf(1.5))
}

fn symbol(xi: [f64; 3], i: usize, j: usize) -> f64 {
    let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let delta = if i == j { 1.0 } else { 0.0 };
    if k2 == 0.0 {
        // the zero mode is kept as the identity
        return delta;
    }
    (delta - xi[i] * xi[j] / k2) * (-k2).exp()
}

#[derive(Debug, Clone)]
pub struct ProjectedHeatKernel {
    box_len: f64,
    n: usize,
    h: f64,
    /// `A` and `B` at `r = j h`, `j = 0..=n/2`.
    a: Vec<f64>,
    b: Vec<f64>,
    trusted: f64,
    /// `(exponent, coefficient)` of the power-law tails of `A` and `B`.
    tail_a: (f64, f64),
    tail_b: (f64, f64),
    bias: f64,
}

impl ProjectedHeatKernel {
    /// Samples the kernel on a box of side `box_len` with `n` modes per axis;
    /// `r_max` is the largest radius trusted (and used for the tail fit on
    /// `[r_max / 3, r_max]`).
    pub fn new(dim: usize, box_len: f64, n: usize, r_max: f64) -> Result<Self> {
        if dim != 3 {
            return Err(Error::UnsupportedGeometry(format!(
                "projected heat kernel tables exist for n = 3 only (got n = {dim}); for n = 2 the time integral may diverge"
            )));
        }
        if !(box_len >= MIN_BOX) {
            return Err(Error::InvalidArgument(format!("box size {box_len} below {MIN_BOX}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("resolution {n} must be even and at least 8")));
        }
        let h = box_len / n as f64;
        if !(r_max > 3.0 * h && r_max < box_len / 2.0) {
            return Err(Error::InvalidArgument(format!("trusted radius {r_max} outside (3h, L/2)")));
        }
        let freq = |m: usize| {
            let k = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            2.0 * PI * k / box_len
        };
        // partial sums over the two transverse frequencies
        let mut s11 = vec![0.0; n];
        let mut s22 = vec![0.0; n];
        for (m1, (p, q)) in s11.iter_mut().zip(s22.iter_mut()).enumerate() {
            for m2 in 0..n {
                for m3 in 0..n {
                    let xi = [freq(m1), freq(m2), freq(m3)];
                    *p += symbol(xi, 0, 0);
                    *q += symbol(xi, 1, 1);
                }
            }
        }
        let vol = box_len.powi(3);
        let axis = |s: &[f64], y: f64| -> f64 {
            s.iter().enumerate().map(|(m, v)| v * (freq(m) * y).cos()).sum::<f64>() / vol
        };
        let count = n / 2 + 1;
        let mut a = Vec::with_capacity(count);
        let mut b = Vec::with_capacity(count);
        for j in 0..count {
            let y = j as f64 * h;
            let k11 = axis(&s11, y);
            let k22 = axis(&s22, y);
            a.push(k22);
            b.push(k11 - k22);
        }
        let mut kern = Self { box_len, n, h, a, b, trusted: r_max, tail_a: (0.0, 0.0), tail_b: (0.0, 0.0), bias: 0.0 };
        // the image sum is nearly constant near the origin: compare it with the decayed kernel
        let at0 = kern.sample_norm_diff_origin();
        let at_max = kern.frobenius(r_max);
        kern.bias = at0 / at_max;
        if kern.bias > MAX_BIAS {
            return Err(Error::TailUnresolved { bias: kern.bias, r_max });
        }
        let radii: Vec<f64> = (0..count)
            .map(|j| j as f64 * h)
            .filter(|&r| r >= r_max / 3.0 - 1e-12 && r <= r_max + 1e-12)
            .collect();
        let fit_tail = |prof: &[f64]| -> Result<(f64, f64)> {
            let vals: Vec<f64> = radii.iter().map(|&r| prof[(r / h).round() as usize].abs()).collect();
            let f = loglog_fit(&radii, &vals)?;
            let sign = prof[(r_max / h).round() as usize].signum();
            Ok((f.slope, sign * f.intercept.exp()))
        };
        kern.tail_a = fit_tail(&kern.a)?;
        kern.tail_b = fit_tail(&kern.b)?;
        Ok(kern)
    }

    /// Default table: box 64, 256 modes, trusted to `r = 15`.
    pub fn standard() -> Result<Self> {
        Self::new(3, 64.0, 256, 15.0)
    }

    fn sample_norm_diff_origin(&self) -> f64 {
        let f = free_kernel_at_origin();
        let d11 = self.a[0] + self.b[0] - f;
        let d22 = self.a[0] - f;
        (d11 * d11 + 2.0 * d22 * d22).sqrt()
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn trusted_radius(&self) -> f64 {
        self.trusted
    }

    /// Relative periodization bias estimated at the trusted radius.
    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Fitted tail exponents of `A` and `B`.
    pub fn tail_exponents(&self) -> (f64, f64) {
        (self.tail_a.0, self.tail_b.0)
    }

    /// Sampled `(r, A, B)` on the axis grid up to the trusted radius.
    pub fn radial_samples(&self) -> Vec<(f64, f64, f64)> {
        (0..self.a.len())
            .map(|j| (j as f64 * self.h, self.a[j], self.b[j]))
            .filter(|s| s.0 <= self.trusted + 1e-12)
            .collect()
    }

    /// Four-point Lagrange interpolation of a profile extended evenly to `r < 0`.
    fn interp(&self, prof: &[f64], r: f64) -> f64 {
        let s = r / self.h;
        let j = s.floor() as i64;
        let t = s - j as f64;
        let at = |i: i64| prof[i.unsigned_abs() as usize];
        let (p0, p1, p2, p3) = (at(j - 1), at(j), at(j + 1), at(j + 2));
        p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
    }

    /// `(A(r), B(r))`.
    pub fn profiles(&self, r: f64) -> (f64, f64) {
        if r <= self.trusted {
            (self.interp(&self.a, r), self.interp(&self.b, r))
        } else {
            (self.tail_a.1 * r.powf(self.tail_a.0), self.tail_b.1 * r.powf(self.tail_b.0))
        }
    }

    /// Matrix kernel at `y`.
    pub fn eval(&self, y: [f64; 3]) -> [[f64; 3]; 3] {
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        let (a, b) = self.profiles(r);
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let yy = if r > 0.0 { y[i] * y[j] / (r * r) } else { 0.0 };
                k[i][j] = b * yy + if i == j { a } else { 0.0 };
            }
        }
        k
    }

    /// Frobenius norm `sqrt((A + B)^2 + 2 A^2)`.
    pub fn frobenius(&self, r: f64) -> f64 {
        let (a, b) = self.profiles(r);
        ((a + b).powi(2) + 2.0 * a * a).sqrt()
    }

    /// `|tr k(0) - (2 G(0) + 1/L^3)|`: the trace of the sampled symbol is
    /// `2 exp(-|xi|^2)` away from the zero mode, where it is 3.
    pub fn trace_defect(&self) -> f64 {
        let tr = 3.0 * self.a[0] + self.b[0];
        (tr - (2.0 * heat_kernel(0.0) + self.box_len.powi(-3))).abs()
    }
}

/// All nine components `k_ij` on the full periodic grid of side `box_len`
/// with `n` points per axis (row-major `[i][j]`).
pub fn kernel_full_grid(box_len: f64, n: usize) -> Result<Vec<Vec<ScalarField>>> {
    let grid = Grid::periodic_box(3, n, box_len)?;
    let scale = (grid.len() as f64).sqrt() / box_len.powi(3);
    let mut out = vec![Vec::with_capacity(3); 3];
    for (i, row) in out.iter_mut().enumerate() {
        for j in 0..3 {
            let coeffs = (0..grid.len())
                .map(|flat| {
                    let idx = grid.unflatten(flat);
                    let xi = [grid.wavenumber(idx[0]), grid.wavenumber(idx[1]), grid.wavenumber(idx[2])];
                    Complex64::new(symbol(xi, i, j) * scale, 0.0)
                })
                .collect();
            row.push(idft(&SpectralField::from_coeffs(grid, coeffs)?));
        }
    }
    Ok(out)
}
