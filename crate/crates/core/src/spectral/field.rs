use std::ops::{Add, Sub};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { values: vec![0.0; grid.len()], grid }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { values: vec![c; grid.len()], grid }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point (coordinates in axis order).
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Values on the vertical plane `k` (lateral points in storage order).
    pub fn plane(&self, k: usize) -> Vec<f64> {
        let col = self.grid.column_len();
        self.values.iter().skip(k).step_by(col).copied().collect()
    }

    /// Values along the vertical column at lateral flat index `lat`.
    pub fn column(&self, lat: usize) -> &[f64] {
        let col = self.grid.column_len();
        &self.values[lat * col..(lat + 1) * col]
    }

    /// Lateral mean on each vertical plane.
    pub fn lateral_mean_profile(&self) -> Vec<f64> {
        let col = self.grid.column_len();
        let lat = self.values.len() / col;
        let mut prof = vec![0.0; col];
        for c in self.values.chunks(col) {
            for (p, v) in prof.iter_mut().zip(c) {
                *p += v;
            }
        }
        prof.iter_mut().for_each(|p| *p /= lat as f64);
        prof
    }

    /// Sup of the deviation from the lateral mean of each plane; exactly zero
    /// when every plane is constant.
    pub fn lateral_deviation(&self) -> f64 {
        let prof = self.lateral_mean_profile();
        let col = prof.len();
        let mut lo = vec![f64::INFINITY; col];
        let mut hi = vec![f64::NEG_INFINITY; col];
        for (i, &v) in self.values.iter().enumerate() {
            lo[i % col] = lo[i % col].min(v);
            hi[i % col] = hi[i % col].max(v);
        }
        (0..col)
            .filter(|&k| hi[k] > lo[k])
            .map(|k| (hi[k] - prof[k]).max(prof[k] - lo[k]))
            .fold(0.0, f64::max)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `n` scalar components on a common grid, optionally tagged with the
/// divergence tolerance it is supposed to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
    divfree_tol: Option<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
            grid,
            divfree_tol: None,
        }
    }

    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components
            .first()
            .ok_or_else(|| Error::DimensionMismatch("vector field needs components".into()))?
            .grid();
        if components.len() != grid.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::DimensionMismatch("components live on different grids".into()));
        }
        Ok(Self { grid, components, divfree_tol: None })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let pts: Vec<Vec<f64>> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        let components = (0..grid.dim())
            .map(|c| {
                ScalarField::from_values(grid, pts.iter().map(|p| p[c]).collect())
                    .unwrap_or_else(|_| ScalarField::zeros(grid))
            })
            .collect();
        Self { grid, components, divfree_tol: None }
    }

    pub fn with_divfree_tol(mut self, tol: f64) -> Self {
        self.divfree_tol = Some(tol);
        self
    }

    pub fn divfree_tol(&self) -> Option<f64> {
        self.divfree_tol
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn max_diff(&self, other: &VectorField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max(a.max_diff(b)))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            components: self.components.iter().map(|c| c.scale(s)).collect(),
            divfree_tol: self.divfree_tol,
        }
    }

    pub fn means(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.mean()).collect()
    }

    /// Discrete `L^2` inner product: periodic directions use the uniform rule,
    /// the vertical direction the trapezoid rule.
    pub fn inner(&self, other: &VectorField) -> f64 {
        let w = quadrature_weights(&self.grid);
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                a.values()
                    .iter()
                    .zip(b.values())
                    .enumerate()
                    .map(|(i, (x, y))| w[i % w.len()] * x * y)
                    .sum::<f64>()
            })
            .sum::<f64>()
            * lateral_cell(&self.grid)
    }

    pub fn energy(&self) -> f64 {
        self.inner(self)
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            grid: self.grid,
            components: self.components.iter().zip(&rhs.components).map(|(a, b)| a + b).collect(),
            divfree_tol: None,
        }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            grid: self.grid,
            components: self.components.iter().zip(&rhs.components).map(|(a, b)| a - b).collect(),
            divfree_tol: None,
        }
    }
}

/// Per-column quadrature weights along the last axis.
pub(crate) fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    let col = grid.column_len();
    if grid.is_periodic() {
        vec![grid.spacing(); col]
    } else {
        let h = grid.vertical_spacing();
        let mut w = vec![h; col];
        w[0] = 0.5 * h;
        w[col - 1] = 0.5 * h;
        w
    }
}

/// Cell volume of the axes other than the last one.
fn lateral_cell(grid: &Grid) -> f64 {
    grid.spacing().powi(grid.dim() as i32 - 1)
}

/// Complex coefficients over the periodic wavenumbers (lateral only for
/// wall-bounded grids, where the vertical index is kept in physical space).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); grid.len()], grid }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at signed integer wavenumbers `k` (one per periodic axis) and
    /// vertical index `level` (ignored for the periodic box).
    pub fn coefficient(&self, k: &[i64], level: usize) -> Complex64 {
        self.coeffs[self.flat_index(k, level)]
    }

    pub fn flat_index(&self, k: &[i64], level: usize) -> usize {
        let n = self.grid.n() as i64;
        let mut idx: Vec<usize> = k.iter().map(|&ki| ki.rem_euclid(n) as usize).collect();
        if !self.grid.is_periodic() {
            idx.push(level);
        }
        self.grid.flatten(&idx)
    }

    /// Flat index of the conjugate frequency `-xi` (same vertical level).
    pub fn conjugate_flat(&self, flat: usize) -> usize {
        let mut idx = self.grid.unflatten(flat);
        for a in 0..self.grid.periodic_axes() {
            idx[a] = self.grid.conjugate_index(idx[a]);
        }
        self.grid.flatten(&idx)
    }

    /// Max over all coefficients of `|c(-xi) - conj(c(xi))|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.conjugate_flat(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Number of coefficients with modulus above `tol`.
    pub fn count_nonzero(&self, tol: f64) -> usize {
        self.coeffs.iter().filter(|c| c.norm() > tol).count()
    }
}

/// Antisymmetric vorticity `w_ij = d_i u_j - d_j u_i`; only `i < j` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Vorticity {
    dim: usize,
    pairs: Vec<ScalarField>,
}

impl Vorticity {
    pub fn pair_index(dim: usize, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < dim);
        // rows 0..i contribute (dim-1) + (dim-2) + ... entries
        i * (2 * dim - i - 1) / 2 + (j - i - 1)
    }

    pub fn pairs_for(dim: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..dim {
            for j in (i + 1)..dim {
                out.push((i, j));
            }
        }
        out
    }

    pub fn new(dim: usize, pairs: Vec<ScalarField>) -> Result<Self> {
        if pairs.len() != dim * (dim - 1) / 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} vorticity components for dimension {dim}",
                pairs.len()
            )));
        }
        Ok(Self { dim, pairs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &Grid {
        self.pairs[0].grid()
    }

    /// Stored component `w_ij` for `i < j`.
    pub fn stored(&self, i: usize, j: usize) -> &ScalarField {
        &self.pairs[Self::pair_index(self.dim, i, j)]
    }

    /// `w_ij` for any `i, j`: negation for `i > j`, zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> ScalarField {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => self.stored(i, j).clone(),
            Ordering::Greater => self.stored(j, i).scale(-1.0),
            Ordering::Equal => ScalarField::zeros(*self.grid()),
        }
    }

    pub fn pairs(&self) -> &[ScalarField] {
        &self.pairs
    }

    pub fn max_abs(&self) -> f64 {
        self.pairs.iter().fold(0.0, |m, p| m.max(p.max_abs()))
    }

    pub fn max_diff(&self, other: &Vorticity) -> f64 {
        self.pairs
            .iter()
            .zip(&other.pairs)
            .fold(0.0, |m, (a, b)| m.max(a.max_diff(b)))
    }

    /// Sup of `|w - mean(w)|` over all stored components.
    pub fn deviation_from_mean(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| {
                let m = p.mean();
                p.values().iter().fold(0.0, |acc: f64, v| acc.max((v - m).abs()))
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indexing_is_dense() {
        for dim in 2..=4 {
            let pairs = Vorticity::pairs_for(dim);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                assert_eq!(Vorticity::pair_index(dim, i, j), k);
            }
        }
    }

    #[test]
    fn antisymmetric_accessor() {
        let g = Grid::periodic_box(3, 4, 1.0).unwrap();
        let w = Vorticity::new(
            3,
            vec![
                ScalarField::constant(g, 1.0),
                ScalarField::constant(g, 2.0),
                ScalarField::constant(g, 3.0),
            ],
        )
        .unwrap();
        assert_eq!(w.get(2, 1).values()[0], -3.0);
        assert_eq!(w.get(1, 2).values()[0], 3.0);
        assert_eq!(w.get(0, 0).max_abs(), 0.0);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = Grid::periodic_box(1, 4, 1.0).unwrap();
        assert!(matches!(
            ScalarField::from_values(g, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite)
        ));
        assert!(ScalarField::from_values(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn energy_of_constant_field_is_volume() {
        let g = Grid::half_strip(2, 8, 2.0, 5, 1.0).unwrap();
        let v = VectorField::new(vec![ScalarField::constant(g, 1.0), ScalarField::zeros(g)]).unwrap();
        assert!((v.energy() - 2.0).abs() < 1e-14);
        let p = Grid::periodic_box(3, 4, 2.0).unwrap();
        let v = VectorField::new(vec![ScalarField::constant(p, 1.0), ScalarField::zeros(p), ScalarField::zeros(p)]).unwrap();
        assert!((v.energy() - 8.0).abs() < 1e-13);
    }
}
