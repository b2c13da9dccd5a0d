//! Seeded random test data.

use num_complex::Complex64;
use rand::Rng;

use super::field::{ScalarField, SpectralField};
use super::grid::Grid;
use super::transform::idft_complex;

/// Real field whose coefficients vanish unless every periodic wave index
/// satisfies `|k| <= band` (so no Nyquist content when `band < N/2`).
///
/// On wall-bounded grids every vertical level gets independent coefficients.
pub fn band_limited(grid: Grid, band: usize, rng: &mut impl Rng) -> ScalarField {
    let p = grid.periodic_axes();
    let dim = grid.dim();
    let mut spec = SpectralField::zeros(grid);
    let band = band.min(grid.n() / 2 - 1) as i64;
    // in-band indices per axis, visited in storage order
    let axes: Vec<Vec<usize>> = (0..dim)
        .map(|a| {
            (0..grid.axis_len(a)).filter(|&k| a >= p || grid.wave_index(k).abs() <= band).collect()
        })
        .collect();
    let mut pos = vec![0usize; dim];
    let mut idx = vec![0usize; dim];
    'outer: loop {
        for a in 0..dim {
            idx[a] = axes[a][pos[a]];
        }
        spec.coeffs_mut()[grid.flatten(&idx)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for a in (0..dim).rev() {
            pos[a] += 1;
            if pos[a] < axes[a].len() {
                continue 'outer;
            }
            pos[a] = 0;
        }
        break;
    }
    let values = idft_complex(&spec).into_iter().map(|c| c.re).collect();
    ScalarField::from_values(grid, values).unwrap_or_else(|_| ScalarField::zeros(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::transform::dft;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_content_above_band() {
        let g = Grid::periodic_box(2, 16, 1.0).unwrap();
        let f = band_limited(g, 3, &mut ChaCha8Rng::seed_from_u64(1));
        let s = dft(&f).unwrap();
        for flat in 0..g.len() {
            let idx = g.unflatten(flat);
            if idx.iter().any(|&k| g.wave_index(k).abs() > 3) {
                assert!(s.coeffs()[flat].norm() < 1e-13);
            }
        }
        assert!(f.max_abs() > 0.1);
    }
}
