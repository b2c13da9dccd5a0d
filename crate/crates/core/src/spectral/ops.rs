//! Differential operators: spectral along periodic axes, second-order finite
//! differences along the vertical axis of wall-bounded grids.

use num_complex::Complex64;

use super::field::{ScalarField, SpectralField, VectorField, Vorticity};
use super::grid::Grid;
use super::transform::{dft, idft};
use crate::error::{Error, Result};

/// First derivative of a sampled column with spacing `h`: centered inside,
/// one-sided second-order at both ends.
pub fn fd_first(col: &[f64], h: f64) -> Vec<f64> {
    let m = col.len();
    let mut d = vec![0.0; m];
    for k in 1..m - 1 {
        d[k] = (col[k + 1] - col[k - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * col[0] + 4.0 * col[1] - col[2]) / (2.0 * h);
    d[m - 1] = (3.0 * col[m - 1] - 4.0 * col[m - 2] + col[m - 3]) / (2.0 * h);
    d
}

/// Second derivative: 3-point inside, 4-point second-order at both ends.
pub fn fd_second(col: &[f64], h: f64) -> Vec<f64> {
    let m = col.len();
    let h2 = h * h;
    let mut d = vec![0.0; m];
    for k in 1..m - 1 {
        d[k] = (col[k + 1] - 2.0 * col[k] + col[k - 1]) / h2;
    }
    d[0] = (2.0 * col[0] - 5.0 * col[1] + 4.0 * col[2] - col[3]) / h2;
    d[m - 1] = (2.0 * col[m - 1] - 5.0 * col[m - 2] + 4.0 * col[m - 3] - col[m - 4]) / h2;
    d
}

/// Wavenumber used by odd symbols: the Nyquist index is treated as zero.
pub fn resolved_wavenumber(grid: &Grid, idx: usize) -> f64 {
    if grid.is_nyquist(idx) {
        0.0
    } else {
        grid.wavenumber(idx)
    }
}

fn check_axis(field: &ScalarField, axis: usize) -> Result<()> {
    if axis >= field.grid().dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for dimension {}",
            field.grid().dim()
        )));
    }
    Ok(())
}

fn map_columns(field: &ScalarField, f: impl Fn(&[f64]) -> Vec<f64>) -> ScalarField {
    let col = field.grid().column_len();
    let mut out = Vec::with_capacity(field.values().len());
    for c in field.values().chunks(col) {
        out.extend(f(c));
    }
    ScalarField::from_values(*field.grid(), out).unwrap_or_else(|_| ScalarField::zeros(*field.grid()))
}

/// Multiplies each coefficient by `m(periodic multi-index)`.
pub(crate) fn scale_modes(spec: &mut SpectralField, m: impl Fn(&[usize]) -> Complex64) {
    let grid = *spec.grid();
    let p = grid.periodic_axes();
    let coeffs = spec.coeffs_mut();
    let mut idx = vec![0; grid.dim()];
    for (flat, c) in coeffs.iter_mut().enumerate() {
        grid.unflatten_into(flat, &mut idx);
        *c *= m(&idx[..p]);
    }
}

/// `d/dx_axis`.
pub fn derivative(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(field, axis)?;
    let grid = *field.grid();
    if grid.axis_is_periodic(axis) {
        let mut s = dft(field)?;
        scale_modes(&mut s, |idx| Complex64::new(0.0, resolved_wavenumber(&grid, idx[axis])));
        Ok(idft(&s))
    } else {
        let h = grid.vertical_spacing();
        Ok(map_columns(field, |c| fd_first(c, h)))
    }
}

/// `d^2/dx_axis^2`.
pub fn second_derivative(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(field, axis)?;
    let grid = *field.grid();
    if grid.axis_is_periodic(axis) {
        let mut s = dft(field)?;
        scale_modes(&mut s, |idx| {
            let k = grid.wavenumber(idx[axis]);
            Complex64::new(-k * k, 0.0)
        });
        Ok(idft(&s))
    } else {
        let h = grid.vertical_spacing();
        Ok(map_columns(field, |c| fd_second(c, h)))
    }
}

pub fn laplacian(field: &ScalarField) -> Result<ScalarField> {
    let mut acc = ScalarField::zeros(*field.grid());
    for a in 0..field.grid().dim() {
        acc = &acc + &second_derivative(field, a)?;
    }
    Ok(acc)
}

pub fn gradient(field: &ScalarField) -> Result<VectorField> {
    let comps = (0..field.grid().dim())
        .map(|a| derivative(field, a))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    let mut acc = ScalarField::zeros(*v.grid());
    for a in 0..v.dim() {
        acc = &acc + &derivative(v.component(a), a)?;
    }
    Ok(acc)
}

/// `w_ij = d_i u_j - d_j u_i` for `i < j`.
pub fn vorticity(v: &VectorField) -> Result<Vorticity> {
    let dim = v.dim();
    let pairs = Vorticity::pairs_for(dim)
        .into_iter()
        .map(|(i, j)| Ok(&derivative(v.component(j), i)? - &derivative(v.component(i), j)?))
        .collect::<Result<Vec<_>>>()?;
    Vorticity::new(dim, pairs)
}

/// Velocity recovered from vorticity plus the reported consistency residual
/// `max |vorticity(velocity) - w|`.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub velocity: VectorField,
    pub residual: f64,
}

/// Solves `Lap u_i = -sum_j d_j w_ij` spectrally with prescribed mean.
pub fn velocity_from_vorticity(w: &Vorticity, mean: &[f64]) -> Result<Recovery> {
    let grid = *w.grid();
    if !grid.is_periodic() {
        return Err(Error::UnsupportedGeometry(format!(
            "velocity recovery needs the periodic box, got {}",
            grid.geometry()
        )));
    }
    let dim = w.dim();
    if mean.len() != dim {
        return Err(Error::DimensionMismatch(format!("{} mean values for dimension {dim}", mean.len())));
    }
    let specs: Vec<SpectralField> = w.pairs().iter().map(dft).collect::<Result<_>>()?;
    let pair_coeff = |i: usize, j: usize, flat: usize| -> Complex64 {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => specs[Vorticity::pair_index(dim, i, j)].coeffs()[flat],
            Ordering::Greater => -specs[Vorticity::pair_index(dim, j, i)].coeffs()[flat],
            Ordering::Equal => Complex64::new(0.0, 0.0),
        }
    };
    let root = (grid.len() as f64).sqrt();
    let mut comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut out = SpectralField::zeros(grid);
        for flat in 0..grid.len() {
            let idx = grid.unflatten(flat);
            let xi: Vec<f64> = idx.iter().map(|&k| resolved_wavenumber(&grid, k)).collect();
            let k2: f64 = xi.iter().map(|x| x * x).sum();
            let c = if idx.iter().all(|&k| k == 0) {
                Complex64::new(mean[i] * root, 0.0)
            } else if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &xj) in xi.iter().enumerate() {
                    acc += Complex64::new(0.0, xj) * pair_coeff(i, j, flat);
                }
                acc / k2
            };
            out.coeffs_mut()[flat] = c;
        }
        comps.push(idft(&out));
    }
    let velocity = VectorField::new(comps)?;
    let residual = vorticity(&velocity)?.max_diff(w);
    Ok(Recovery { velocity, residual })
}
