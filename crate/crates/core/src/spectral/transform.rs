//! Unitary DFT over the periodic axes of a [`Grid`].
//!
//! Both directions carry the factor `1/sqrt(N^p)` (`p` periodic axes), so the
//! transform is an isometry and Parseval needs no constants. The vertical axis
//! of wall-bounded grids is left in physical space.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::field::{ScalarField, SpectralField};
use super::grid::Grid;
use crate::error::{Error, Result};

fn transform_axes(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = data.len();
    let mut lines = Vec::new();
    for axis in 0..grid.periodic_axes() {
        let stride = grid.stride(axis);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        // gather a few strided lines at a time into a contiguous batch
        const CHUNK: usize = 16;
        let block = stride * n;
        lines.resize(CHUNK * n, Complex64::new(0.0, 0.0));
        for base in (0..total).step_by(block) {
            for off0 in (0..stride).step_by(CHUNK) {
                let width = CHUNK.min(stride - off0);
                let batch = &mut lines[..width * n];
                for k in 0..n {
                    let row = base + k * stride + off0;
                    for (c, v) in data[row..row + width].iter().enumerate() {
                        batch[c * n + k] = *v;
                    }
                }
                fft.process_with_scratch(batch, &mut scratch);
                for k in 0..n {
                    let row = base + k * stride + off0;
                    for (c, v) in data[row..row + width].iter_mut().enumerate() {
                        *v = batch[c * n + k];
                    }
                }
            }
        }
    }
    let scale = 1.0 / (grid.lateral_count() as f64).sqrt();
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Forward transform. Rejects non-finite samples.
pub fn dft(field: &ScalarField) -> Result<SpectralField> {
    if !field.is_finite() {
        return Err(Error::NonFinite);
    }
    let grid = *field.grid();
    let mut data: Vec<Complex64> = field.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_axes(&grid, &mut data, false);
    SpectralField::from_coeffs(grid, data)
}

/// Forward transforms of two real fields from one complex transform of `f + i g`.
pub fn dft_pair(f: &ScalarField, g: &ScalarField) -> Result<(SpectralField, SpectralField)> {
    let grid = *f.grid();
    if *g.grid() != grid {
        return Err(Error::DimensionMismatch("fields live on different grids".into()));
    }
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut z: Vec<Complex64> = f.values().iter().zip(g.values()).map(|(&a, &b)| Complex64::new(a, b)).collect();
    transform_axes(&grid, &mut z, false);
    let p = grid.periodic_axes();
    let dim = grid.dim();
    // offset of the mirrored index along each axis; the conjugate position is their sum
    let offsets: Vec<Vec<usize>> = (0..dim)
        .map(|ax| {
            let len = grid.axis_len(ax);
            let stride = grid.stride(ax);
            (0..len).map(|i| if ax < p { (len - i) % len * stride } else { i * stride }).collect()
        })
        .collect();
    let lens: Vec<usize> = offsets.iter().map(Vec::len).collect();
    let mut idx = vec![0; dim];
    let mut conj: usize = offsets.iter().map(|o| o[0]).sum();
    let mut a = Vec::with_capacity(z.len());
    let mut b = Vec::with_capacity(z.len());
    for zk in &z {
        let zc = z[conj].conj();
        a.push((zk + zc) * 0.5);
        b.push((zk - zc) * Complex64::new(0.0, -0.5));
        for ax in (0..dim).rev() {
            let o = &offsets[ax];
            conj -= o[idx[ax]];
            idx[ax] += 1;
            if idx[ax] < lens[ax] {
                conj += o[idx[ax]];
                break;
            }
            idx[ax] = 0;
            conj += o[0];
        }
    }
    Ok((SpectralField::from_coeffs(grid, a)?, SpectralField::from_coeffs(grid, b)?))
}

/// Inverse transforms of two spectra of real fields from one complex transform.
pub fn idft_pair(a: &SpectralField, b: &SpectralField) -> Result<(ScalarField, ScalarField)> {
    let grid = *a.grid();
    if *b.grid() != grid {
        return Err(Error::DimensionMismatch("spectra live on different grids".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x + i * y).collect();
    transform_axes(&grid, &mut z, true);
    Ok((
        ScalarField::from_values(grid, z.iter().map(|c| c.re).collect())?,
        ScalarField::from_values(grid, z.iter().map(|c| c.im).collect())?,
    ))
}

/// Inverse transform to complex samples, without discarding the imaginary part.
pub fn idft_complex(spec: &SpectralField) -> Vec<Complex64> {
    let mut data = spec.coeffs().to_vec();
    transform_axes(spec.grid(), &mut data, true);
    data
}

/// Inverse transform; the imaginary residue is dropped.
pub fn idft(spec: &SpectralField) -> ScalarField {
    let (f, _) = idft_with_residue(spec);
    f
}

/// Inverse transform returning the real part and the max-norm of the
/// discarded imaginary part.
pub fn idft_with_residue(spec: &SpectralField) -> (ScalarField, f64) {
    let data = idft_complex(spec);
    let residue = data.iter().fold(0.0, |m: f64, c| m.max(c.im.abs()));
    let values = data.into_iter().map(|c| c.re).collect();
    let f = ScalarField::from_values(*spec.grid(), values)
        .unwrap_or_else(|_| ScalarField::zeros(*spec.grid()));
    (f, residue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Direct O(N^2) sum over the periodic axes.
    fn naive_dft(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
        let p = grid.periodic_axes();
        let n = grid.n() as f64;
        let norm = 1.0 / (grid.lateral_count() as f64).sqrt();
        (0..grid.len())
            .map(|out| {
                let ko = grid.unflatten(out);
                let mut acc = Complex64::new(0.0, 0.0);
                for (inp, &v) in values.iter().enumerate() {
                    let xi = grid.unflatten(inp);
                    if p < grid.dim() && xi[grid.dim() - 1] != ko[grid.dim() - 1] {
                        continue;
                    }
                    let phase: f64 = (0..p).map(|a| (ko[a] * xi[a]) as f64).sum::<f64>() * 2.0 * PI / n;
                    acc += Complex64::from_polar(v, -phase);
                }
                acc * norm
            })
            .collect()
    }

    fn random_field(grid: Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_values(grid, v).unwrap()
    }

    #[test]
    fn paired_transforms_match_single() {
        let g = Grid::half_strip(3, 8, 2.0, 5, 1.0).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let f = ScalarField::from_values(g, (0..g.len()).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap();
        let h = ScalarField::from_values(g, (0..g.len()).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap();
        let (a, b) = dft_pair(&f, &h).unwrap();
        let (sa, sb) = (dft(&f).unwrap(), dft(&h).unwrap());
        for k in 0..g.len() {
            assert!((a.coeffs()[k] - sa.coeffs()[k]).norm() < 1e-13);
            assert!((b.coeffs()[k] - sb.coeffs()[k]).norm() < 1e-13);
        }
        let (f2, h2) = idft_pair(&a, &b).unwrap();
        assert!(f2.max_diff(&f) < 1e-13 && h2.max_diff(&h) < 1e-13);
    }

    #[test]
    fn matches_direct_sum() {
        for grid in [
            Grid::periodic_box(2, 8, 1.0).unwrap(),
            Grid::periodic_box(3, 8, 2.0).unwrap(),
            Grid::half_strip(3, 8, 1.0, 5, 1.0).unwrap(),
        ] {
            let f = random_field(grid, 3);
            let fast = dft(&f).unwrap();
            let slow = naive_dft(&grid, f.values());
            let err = fast.coeffs().iter().zip(&slow).fold(0.0, |m: f64, (a, b)| m.max((a - b).norm()));
            assert!(err < 1e-12, "dft mismatch {err}");
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for grid in [
            Grid::periodic_box(1, 16, 1.0).unwrap(),
            Grid::periodic_box(3, 16, 1.0).unwrap(),
            Grid::channel(2, 32, 1.0, 9, 1.0).unwrap(),
        ] {
            let f = random_field(grid, 11);
            let s = dft(&f).unwrap();
            let back = idft(&s);
            assert!(back.max_diff(&f) <= 1e-12 * f.max_abs());
            let e_phys: f64 = f.values().iter().map(|v| v * v).sum();
            let e_spec: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
            assert!((e_phys - e_spec).abs() < 1e-11 * e_phys);
            assert!(s.conjugate_symmetry_defect() < 1e-13);
        }
    }

    #[test]
    fn constant_and_pure_mode() {
        let g = Grid::periodic_box(2, 16, 2.0 * PI).unwrap();
        let s = dft(&ScalarField::constant(g, 1.0)).unwrap();
        assert_eq!(s.count_nonzero(1e-12), 1);
        assert!((s.coefficient(&[0, 0], 0).re - 16.0).abs() < 1e-12);
        let s = dft(&ScalarField::from_fn(g, |x| x[0].sin())).unwrap();
        assert_eq!(s.count_nonzero(1e-12), 2);
        assert!(s.coefficient(&[1, 0], 0).norm() > 1.0);
        assert!(s.coefficient(&[-1, 0], 0).norm() > 1.0);
    }

    #[test]
    fn rejects_nan() {
        let g = Grid::periodic_box(1, 4, 1.0).unwrap();
        let mut f = ScalarField::zeros(g);
        f.values_mut()[2] = f64::NAN;
        let err = dft(&f).unwrap_err();
        assert_eq!(err.to_string(), "non-finite field");
    }
}
