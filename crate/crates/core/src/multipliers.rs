//! Fourier multipliers: `|grad|`, Riesz transforms, Helmholtz projection,
//! Poisson and heat semigroups, and the Dirichlet-to-Neumann identity.

use std::f64::consts::PI;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::ops::{fd_first, resolved_wavenumber};
use crate::spectral::{dft, dft_pair, idft_pair, idft_with_residue, Grid, ScalarField, SpectralField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Scalar,
    Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolValue {
    Scalar(Complex64),
    /// Row-major `n x n`.
    Matrix(Vec<Complex64>),
}

impl SymbolValue {
    fn is_finite(&self) -> bool {
        match self {
            SymbolValue::Scalar(c) => c.is_finite(),
            SymbolValue::Matrix(m) => m.iter().all(|c| c.is_finite()),
        }
    }

    /// `(self + conj(other)) / 2`.
    fn symmetrize(self, other: SymbolValue) -> SymbolValue {
        match (self, other) {
            (SymbolValue::Scalar(a), SymbolValue::Scalar(b)) => SymbolValue::Scalar((a + b.conj()) * 0.5),
            (SymbolValue::Matrix(a), SymbolValue::Matrix(b)) => {
                SymbolValue::Matrix(a.iter().zip(&b).map(|(x, y)| (x + y.conj()) * 0.5).collect())
            }
            (a, _) => a,
        }
    }
}

type EvalFn = Arc<dyn Fn(&[f64]) -> SymbolValue + Send + Sync>;

/// A map from a frequency vector to a complex scalar or matrix.
///
/// `dim` is the length of the frequency vector: all directions on the periodic
/// box, the lateral directions on wall-bounded grids (applied plane by plane).
/// Odd symbols are evaluated with the Nyquist wavenumber set to zero.
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    kind: SymbolKind,
    dim: usize,
    odd: bool,
    eval: EvalFn,
    /// Set for built-in symbols whose tables may be shared between calls.
    cache_key: Option<String>,
}

/// Symbol values in storage order, `width` entries per lateral mode
/// (1 for scalars, `n^2` row-major for matrices).
#[derive(Debug)]
struct Table {
    width: usize,
    values: Vec<Complex64>,
}

impl Table {
    fn from_values(vals: Vec<SymbolValue>) -> Self {
        let width = match vals.first() {
            Some(SymbolValue::Matrix(m)) => m.len(),
            _ => 1,
        };
        let mut values = Vec::with_capacity(width * vals.len());
        for v in vals {
            match v {
                SymbolValue::Scalar(c) => values.push(c),
                SymbolValue::Matrix(m) => values.extend(m),
            }
        }
        Self { width, values }
    }

    fn at(&self, mode: usize) -> &[Complex64] {
        &self.values[mode * self.width..(mode + 1) * self.width]
    }
}

type TableCache = Mutex<HashMap<(String, String), Arc<Table>>>;

/// Tables of built-in symbols, keyed by symbol and grid; cleared when full.
fn table_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

const CACHE_CAPACITY: usize = 16;

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("odd", &self.odd)
            .finish()
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl MultiplierSymbol {
    pub fn scalar(
        name: impl Into<String>,
        dim: usize,
        odd: bool,
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: SymbolKind::Scalar,
            dim,
            odd,
            eval: Arc::new(move |xi| SymbolValue::Scalar(f(xi))),
            cache_key: None,
        }
    }

    pub fn matrix(
        name: impl Into<String>,
        dim: usize,
        odd: bool,
        f: impl Fn(&[f64]) -> Vec<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: SymbolKind::Matrix,
            dim,
            odd,
            eval: Arc::new(move |xi| SymbolValue::Matrix(f(xi))),
            cache_key: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn kind(&self) -> SymbolKind {
        self.kind
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn cached(mut self, key: String) -> Self {
        self.cache_key = Some(format!("{key}/{}", self.dim));
        self
    }

    pub fn eval(&self, xi: &[f64]) -> SymbolValue {
        (self.eval)(xi)
    }

    /// `|xi|`, zero at the origin.
    pub fn abs_grad(dim: usize) -> Self {
        Self::scalar("abs_grad", dim, false, |xi| Complex64::new(norm(xi), 0.0)).cached("abs_grad".into())
    }

    /// Riesz transform `R_j`: `-i xi_j / |xi|`, zero at the origin.
    pub fn riesz(dim: usize, j: usize) -> Self {
        Self::scalar(format!("riesz_{}", j + 1), dim, true, move |xi| {
            let r = norm(xi);
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -xi[j] / r)
            }
        })
        .cached(format!("riesz/{j}"))
    }

    /// `d_j`: `i xi_j`.
    pub fn partial(dim: usize, j: usize) -> Self {
        Self::scalar(format!("partial_{}", j + 1), dim, true, move |xi| Complex64::new(0.0, xi[j]))
            .cached(format!("partial/{j}"))
    }

    /// Helmholtz projection `I - xi xi^T / |xi|^2`, identity at the origin.
    pub fn helmholtz(dim: usize) -> Self {
        Self::matrix("helmholtz", dim, true, move |xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let proj = if r2 == 0.0 { 0.0 } else { xi[i] * xi[j] / r2 };
                    m[i * dim + j] = Complex64::new(delta - proj, 0.0);
                }
            }
            m
        })
        .cached("helmholtz".into())
    }

    /// Poisson semigroup `exp(-|xi| x_n)` at height `xn`.
    pub fn poisson(dim: usize, xn: f64) -> Self {
        Self::scalar("poisson", dim, false, move |xi| Complex64::new((-norm(xi) * xn).exp(), 0.0))
    }

    /// Heat semigroup `exp(-|xi|^2 tau)`.
    pub fn heat(dim: usize, tau: f64) -> Self {
        Self::scalar("heat", dim, false, move |xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            Complex64::new((-r2 * tau).exp(), 0.0)
        })
    }

    /// Symmetrized symbol values for every lateral mode of `grid`, in storage order.
    fn table(&self, grid: &Grid) -> Result<Arc<Table>> {
        let Some(key) = &self.cache_key else {
            return Ok(Arc::new(Table::from_values(self.build_table(grid)?)));
        };
        let slot = (key.clone(), format!("{grid:?}"));
        if let Some(t) = table_cache().lock().map_err(|_| Error::InvalidArgument("table cache poisoned".into()))?.get(&slot) {
            return Ok(t.clone());
        }
        let t = Arc::new(Table::from_values(self.build_table(grid)?));
        let mut cache = table_cache().lock().map_err(|_| Error::InvalidArgument("table cache poisoned".into()))?;
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(slot, t.clone());
        Ok(t)
    }

    fn build_table(&self, grid: &Grid) -> Result<Vec<SymbolValue>> {
        let p = grid.periodic_axes();
        if self.dim != p {
            return Err(Error::DimensionMismatch(format!(
                "symbol `{}` acts on {} directions, grid has {p} periodic directions",
                self.name, self.dim
            )));
        }
        let wave = |k: usize| if self.odd { resolved_wavenumber(grid, k) } else { grid.wavenumber(k) };
        let checked = |xi: &[f64]| -> Result<SymbolValue> {
            let v = self.eval(xi);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::SymbolNonFinite { name: self.name.clone(), freq: xi.to_vec() })
            }
        };
        let count = grid.n().pow(p as u32);
        let mut idx = vec![0usize; p];
        let mut xi = vec![0.0; p];
        let mut xc = vec![0.0; p];
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            for a in 0..p {
                xi[a] = wave(idx[a]);
                xc[a] = wave(grid.conjugate_index(idx[a]));
            }
            out.push(checked(&xi)?.symmetrize(checked(&xc)?));
            // next multi-index in storage order
            for a in (0..p).rev() {
                idx[a] += 1;
                if idx[a] < grid.n() {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(out)
    }

    fn mode_of(grid: &Grid, flat: usize) -> usize {
        if grid.is_periodic() {
            flat
        } else {
            flat / grid.column_len()
        }
    }

    /// Applies a scalar symbol; also returns the imaginary residue of the output.
    pub fn apply_with_residue(&self, f: &ScalarField) -> Result<(ScalarField, f64)> {
        if self.kind != SymbolKind::Scalar {
            return Err(Error::DimensionMismatch(format!("matrix symbol `{}` needs a vector field", self.name)));
        }
        let mut s = dft(f)?;
        self.apply_spectral(&mut s)?;
        Ok(idft_with_residue(&s))
    }

    /// Multiplies the coefficients of `s` by a scalar symbol in place.
    pub fn apply_spectral(&self, s: &mut SpectralField) -> Result<()> {
        if self.kind != SymbolKind::Scalar {
            return Err(Error::DimensionMismatch(format!("matrix symbol `{}` needs a vector field", self.name)));
        }
        let grid = *s.grid();
        let table = self.table(&grid)?;
        if grid.is_periodic() {
            for (c, m) in s.coeffs_mut().iter_mut().zip(&table.values) {
                *c *= m;
            }
        } else {
            for (col, m) in s.coeffs_mut().chunks_mut(grid.column_len()).zip(&table.values) {
                col.iter_mut().for_each(|c| *c *= m);
            }
        }
        Ok(())
    }

    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        Ok(self.apply_with_residue(f)?.0)
    }

    /// Scalar symbols act componentwise; matrix symbols mix components.
    pub fn apply_vector(&self, v: &VectorField) -> Result<VectorField> {
        match self.kind {
            SymbolKind::Scalar => {
                VectorField::new(v.components().iter().map(|c| self.apply(c)).collect::<Result<_>>()?)
            }
            SymbolKind::Matrix => self.apply_matrix(v).map(|(out, _)| out),
        }
    }

    fn apply_matrix(&self, v: &VectorField) -> Result<(VectorField, f64)> {
        let n = v.dim();
        let mut specs: Vec<SpectralField> = v.components().iter().map(dft).collect::<Result<_>>()?;
        self.apply_matrix_spectral(&mut specs)?;
        let mut residue: f64 = 0.0;
        let mut comps = Vec::with_capacity(n);
        for s in &specs {
            let (c, r) = idft_with_residue(s);
            residue = residue.max(r);
            comps.push(c);
        }
        Ok((VectorField::new(comps)?, residue))
    }

    /// Applies a matrix symbol to the coefficients of the components in place.
    pub fn apply_matrix_spectral(&self, specs: &mut [SpectralField]) -> Result<()> {
        let n = specs.len();
        let grid = *specs.first().ok_or_else(|| Error::DimensionMismatch("no components".into()))?.grid();
        let table = self.table(&grid)?;
        if self.kind != SymbolKind::Matrix || table.width != n * n {
            return Err(Error::DimensionMismatch(format!("symbol `{}` is not {n}x{n}", self.name)));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for flat in 0..grid.len() {
            for (xj, s) in x.iter_mut().zip(specs.iter()) {
                *xj = s.coeffs()[flat];
            }
            let m = table.at(Self::mode_of(&grid, flat));
            for (i, s) in specs.iter_mut().enumerate() {
                s.coeffs_mut()[flat] = m[i * n..(i + 1) * n].iter().zip(&x).map(|(a, b)| a * b).sum();
            }
        }
        Ok(())
    }

    /// Imaginary residue of applying this symbol, for real-output checks.
    pub fn vector_residue(&self, v: &VectorField) -> Result<f64> {
        match self.kind {
            SymbolKind::Scalar => v
                .components()
                .iter()
                .map(|c| self.apply_with_residue(c).map(|(_, r)| r))
                .try_fold(0.0, |m: f64, r| r.map(|r| m.max(r))),
            SymbolKind::Matrix => self.apply_matrix(v).map(|(_, r)| r),
        }
    }
}

fn require_periodic(grid: &Grid, what: &str) -> Result<()> {
    if grid.is_periodic() {
        Ok(())
    } else {
        Err(Error::UnsupportedGeometry(format!("{what} needs the periodic box, got {}", grid.geometry())))
    }
}

/// Max-norm of `|grad| f - sum_j R_j d_j f`.
pub fn riesz_decomposition_check(f: &ScalarField) -> Result<f64> {
    require_periodic(f.grid(), "riesz decomposition")?;
    let r = riesz_residual_spectrum(&dft(f)?)?;
    Ok(idft_with_residue(&r).0.max_abs())
}

/// Spectrum of `|grad| f - sum_j R_j d_j f`, given the spectrum of `f`.
pub fn riesz_residual_spectrum(s: &SpectralField) -> Result<SpectralField> {
    let grid = *s.grid();
    require_periodic(&grid, "riesz decomposition")?;
    let d = grid.dim();
    let abs = MultiplierSymbol::abs_grad(d).table(&grid)?;
    let parts = (0..d)
        .map(|j| Ok((MultiplierSymbol::riesz(d, j).table(&grid)?, MultiplierSymbol::partial(d, j).table(&grid)?)))
        .collect::<Result<Vec<_>>>()?;
    // both sides in one pass over the coefficients
    let coeffs = s
        .coeffs()
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let rhs: Complex64 = parts.iter().map(|(r, p)| r.values[flat] * (p.values[flat] * c)).sum();
            abs.values[flat] * c - rhs
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

/// `(max |P P v - P v|, max |div P v|)` for the Helmholtz projection `P`.
pub fn helmholtz_check(v: &VectorField) -> Result<(f64, f64)> {
    require_periodic(v.grid(), "helmholtz projection")?;
    let mut specs = Vec::with_capacity(v.dim());
    for pair in v.components().chunks(2) {
        match pair {
            [a, b] => {
                let (x, y) = dft_pair(a, b)?;
                specs.push(x);
                specs.push(y);
            }
            [a] => specs.push(dft(a)?),
            _ => unreachable!(),
        }
    }
    let refs: Vec<&SpectralField> = specs.iter().collect();
    let (mut res, div) = helmholtz_residual_spectra(&refs)?;
    res.push(div);
    let mut out = max_abs_inverse(&res)?;
    let div = out.pop().unwrap_or(0.0);
    Ok((out.into_iter().fold(0.0, f64::max), div))
}

/// Spectra of `P P v - P v` (per component) and of `div P v`, given the
/// component spectra of `v`.
pub fn helmholtz_residual_spectra(v: &[&SpectralField]) -> Result<(Vec<SpectralField>, SpectralField)> {
    let grid = *v.first().ok_or_else(|| Error::InvalidArgument("empty vector field".into()))?.grid();
    require_periodic(&grid, "helmholtz projection")?;
    let n = grid.dim();
    if v.len() != n || v.iter().any(|s| *s.grid() != grid) {
        return Err(Error::DimensionMismatch(format!("{} components for dimension {n}", v.len())));
    }
    let p = MultiplierSymbol::helmholtz(n).table(&grid)?;
    let partial = (0..n).map(|j| MultiplierSymbol::partial(n, j).table(&grid)).collect::<Result<Vec<_>>>()?;
    if n > 3 {
        return Err(Error::DimensionMismatch(format!("dimension {n} above 3")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let input: Vec<&[Complex64]> = v.iter().map(|s| s.coeffs()).collect();
    let len = grid.len();
    let mut res: Vec<Vec<Complex64>> = (0..n).map(|_| Vec::with_capacity(len)).collect();
    let mut div = Vec::with_capacity(len);
    for flat in 0..len {
        let m = p.at(flat);
        let mut x = [zero; 3];
        for (xj, c) in x.iter_mut().zip(&input) {
            *xj = c[flat];
        }
        let mut y = [zero; 3];
        for (yi, row) in y.iter_mut().zip(m.chunks_exact(n)) {
            *yi = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        }
        // P P v - P v
        for (out, (row, yi)) in res.iter_mut().zip(m.chunks_exact(n).zip(&y)) {
            out.push(row.iter().zip(&y).map(|(a, b)| a * b).sum::<Complex64>() - yi);
        }
        div.push(partial.iter().zip(&y).map(|(t, yj)| t.values[flat] * yj).sum());
    }
    let res = res.into_iter().map(|c| SpectralField::from_coeffs(grid, c)).collect::<Result<Vec<_>>>()?;
    Ok((res, SpectralField::from_coeffs(grid, div)?))
}

/// Max-norm of the (real) inverse transform of each spectrum, two per FFT.
pub fn max_abs_inverse(specs: &[SpectralField]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(specs.len());
    for pair in specs.chunks(2) {
        match pair {
            [a, b] => {
                let (x, y) = idft_pair(a, b)?;
                out.push(x.max_abs());
                out.push(y.max_abs());
            }
            [a] => out.push(idft_with_residue(a).0.max_abs()),
            _ => unreachable!(),
        }
    }
    Ok(out)
}

pub fn helmholtz_project(v: &VectorField) -> Result<VectorField> {
    require_periodic(v.grid(), "helmholtz projection")?;
    MultiplierSymbol::helmholtz(v.dim()).apply_vector(v)
}

/// Bounded harmonic extension `g^(xi') exp(-|xi'| x_n)` of wall data onto `grid`.
pub fn poisson_extend(g: &ScalarField, grid: &Grid) -> Result<ScalarField> {
    let wall = grid.wall()?;
    if *g.grid() != wall {
        return Err(Error::DimensionMismatch("boundary data does not live on the wall torus".into()));
    }
    let ghat = dft(g)?;
    let m = grid.column_len();
    let mut spec = SpectralField::zeros(*grid);
    for (k, xn) in grid.vertical_coords().into_iter().enumerate() {
        let table = MultiplierSymbol::poisson(wall.dim(), xn).table(&wall)?;
        for (lat, c) in ghat.coeffs().iter().enumerate() {
            spec.coeffs_mut()[lat * m + k] = c * table.values[lat];
        }
    }
    let (mut f, _) = idft_with_residue(&spec);
    // the wall plane is the data itself
    let gv = g.values().to_vec();
    for (lat, v) in gv.into_iter().enumerate() {
        f.values_mut()[lat * m] = v;
    }
    Ok(f)
}

/// `(x_n, max |d_n f + |grad'| f|)` on every interior plane of the Poisson
/// extension of `g`, with `d_n` the centered finite difference.
pub fn dtn_plane_residuals(g: &ScalarField, grid: &Grid) -> Result<Vec<(f64, f64)>> {
    let f = poisson_extend(g, grid)?;
    let wall = grid.wall()?;
    let lateral = MultiplierSymbol::abs_grad(wall.dim());
    let m = grid.column_len();
    let h = grid.vertical_spacing();
    let xs = grid.vertical_coords();
    let mut dn = vec![0.0; f.values().len()];
    for (lat, col) in f.values().chunks(m).enumerate() {
        dn[lat * m..(lat + 1) * m].copy_from_slice(&fd_first(col, h));
    }
    let mut out = Vec::with_capacity(m.saturating_sub(2));
    for k in 1..m - 1 {
        let plane = ScalarField::from_values(wall, f.plane(k))?;
        let lg = lateral.apply(&plane)?;
        let r = lg
            .values()
            .iter()
            .enumerate()
            .fold(0.0, |acc: f64, (lat, v)| acc.max((dn[lat * m + k] + v).abs()));
        out.push((xs[k], r));
    }
    Ok(out)
}

/// Max over interior planes of `|d_n f + |grad'| f|` for `f = poisson_extend(g)`.
pub fn dtn_residual(g: &ScalarField, grid: &Grid) -> Result<f64> {
    Ok(dtn_plane_residuals(g, grid)?.into_iter().fold(0.0, |m, (_, r)| m.max(r)))
}

/// DtN residual restricted to the interior planes at the given heights; every
/// height must be a grid plane.
pub fn dtn_residual_at(g: &ScalarField, grid: &Grid, heights: &[f64]) -> Result<f64> {
    let planes = dtn_plane_residuals(g, grid)?;
    let h = grid.vertical_spacing();
    heights.iter().try_fold(0.0, |acc: f64, &z| {
        planes
            .iter()
            .find(|(x, _)| (x - z).abs() < 1e-9 * h.max(1.0))
            .map(|&(_, r)| acc.max(r))
            .ok_or_else(|| Error::InvalidArgument(format!("height {z} is not an interior grid plane")))
    })
}

pub fn heat_propagate(f: &ScalarField, tau: f64) -> Result<ScalarField> {
    if tau < 0.0 {
        return Err(Error::BackwardHeat(tau));
    }
    require_periodic(f.grid(), "heat propagation")?;
    MultiplierSymbol::heat(f.grid().dim(), tau).apply(f)
}

/// Operator norm of the discrete `|grad|` on fields band-limited to `|k| <= band`
/// in every periodic direction: the largest `|xi|` in that band.
pub fn abs_grad_operator_bound(grid: &Grid, band: usize) -> f64 {
    let k = 2.0 * PI / grid.length() * band.min(grid.n() / 2) as f64;
    k * (grid.periodic_axes() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::band_limited;
    use crate::spectral::{divergence, gradient};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn box3(n: usize) -> Grid {
        Grid::periodic_box(3, n, 2.0 * PI).unwrap()
    }

    #[test]
    fn elementary_symbols() {
        let g = box3(8);
        let s = ScalarField::from_fn(g, |x| x[0].sin());
        let a = MultiplierSymbol::abs_grad(3).apply(&s).unwrap();
        assert!(a.max_diff(&s) < 1e-13);
        let c = MultiplierSymbol::abs_grad(3).apply(&ScalarField::constant(g, 2.0)).unwrap();
        assert!(c.max_abs() < 1e-13);
        let cosf = ScalarField::from_fn(g, |x| x[0].cos());
        let r = MultiplierSymbol::riesz(3, 0).apply(&cosf).unwrap();
        assert!(r.max_diff(&s) < 1e-13);
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let g = box3(8);
        let f = ScalarField::constant(g, 1.0);
        assert!(matches!(MultiplierSymbol::abs_grad(2).apply(&f), Err(Error::DimensionMismatch(_))));
        let bad = MultiplierSymbol::scalar("inverse", 3, false, |xi| Complex64::new(1.0 / norm(xi), 0.0));
        match bad.apply(&f) {
            Err(Error::SymbolNonFinite { name, freq }) => {
                assert_eq!(name, "inverse");
                assert_eq!(freq, vec![0.0, 0.0, 0.0]);
            }
            other => panic!("expected non-finite symbol error, got {other:?}"),
        }
    }

    #[test]
    fn riesz_identity() {
        let g = box3(16);
        let f = ScalarField::from_fn(g, |x| x[0].sin() * x[1].cos());
        assert!(riesz_decomposition_check(&f).unwrap() < 1e-12);
        assert!(riesz_decomposition_check(&ScalarField::constant(g, 1.0)).unwrap() < 1e-15);
    }

    #[test]
    fn helmholtz_examples() {
        let g = box3(8);
        let grad = gradient(&ScalarField::from_fn(g, |x| x[0].sin())).unwrap();
        assert!(helmholtz_project(&grad).unwrap().max_abs() < 1e-13);
        let shear = VectorField::from_fn(g, |x| vec![x[1].sin(), 0.0, 0.0]);
        assert!(helmholtz_project(&shear).unwrap().max_diff(&shear) < 1e-13);
        // at xi = e1 the symbol kills the first component of a pure e1 mode
        let comp = VectorField::from_fn(g, |x| vec![x[0].sin(), 0.0, 0.0]);
        let p = helmholtz_project(&comp).unwrap();
        assert!(p.max_abs() < 1e-13);
        assert!(divergence(&p).unwrap().max_abs() < 1e-12);
        let wall = Grid::half_strip(3, 8, 1.0, 5, 1.0).unwrap();
        assert!(matches!(helmholtz_project(&VectorField::zeros(wall)), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn helmholtz_properties_on_random_fields() {
        let g = box3(16);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mk = |rng: &mut ChaCha8Rng| {
            VectorField::new((0..3).map(|_| band_limited(g, 7, rng)).collect()).unwrap()
        };
        let u = mk(&mut rng);
        let w = mk(&mut rng);
        let pu = helmholtz_project(&u).unwrap();
        let ppu = helmholtz_project(&pu).unwrap();
        assert!(ppu.max_diff(&pu) < 1e-12);
        assert!(divergence(&pu).unwrap().max_abs() < 1e-12);
        let pw = helmholtz_project(&w).unwrap();
        let scale = u.energy().sqrt() * w.energy().sqrt();
        assert!((pu.inner(&w) - u.inner(&pw)).abs() < 1e-12 * scale);
    }

    #[test]
    fn poisson_single_mode() {
        let grid = Grid::half_strip(2, 16, 2.0 * PI, 33, 8.0).unwrap();
        let wall = grid.wall().unwrap();
        let g = ScalarField::from_fn(wall, |x| x[0].cos());
        let f = poisson_extend(&g, &grid).unwrap();
        let exact = ScalarField::from_fn(grid, |x| (-x[1]).exp() * x[0].cos());
        assert!(f.max_diff(&exact) < 1e-10);
        let c = poisson_extend(&ScalarField::constant(wall, 3.0), &grid).unwrap();
        assert!(c.max_diff(&ScalarField::constant(grid, 3.0)) < 1e-13);
        assert!(dtn_residual(&ScalarField::constant(wall, 3.0), &grid).unwrap() < 1e-13);
    }

    #[test]
    fn dtn_single_mode_ratio() {
        let res = |m: usize| {
            let grid = Grid::half_strip(2, 16, 2.0 * PI, m, 8.0).unwrap();
            let g = ScalarField::from_fn(grid.wall().unwrap(), |x| x[0].cos());
            dtn_residual(&g, &grid).unwrap()
        };
        let ratio = res(33) / res(65);
        assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
    }

    #[test]
    fn dtn_mixture_matches_truncation_oracle() {
        // leading centered-difference error h^2/6 * f''' with f''' = -|xi|^3 e^{-|xi| x} g^
        let grid = Grid::half_strip(2, 16, 2.0 * PI, 129, 8.0).unwrap();
        let wall = grid.wall().unwrap();
        let g = ScalarField::from_fn(wall, |x| (1..=4).map(|k| (k as f64 * x[0]).cos()).sum());
        let h = grid.vertical_spacing();
        for (x, r) in dtn_plane_residuals(&g, &grid).unwrap().into_iter().take(10) {
            let oracle: f64 = (1..=4).map(|k| (k as f64).powi(3) * (-(k as f64) * x).exp()).sum::<f64>() * h * h / 6.0;
            assert!((r - oracle).abs() < 0.05 * oracle, "x = {x}: {r} vs {oracle}");
        }
    }

    #[test]
    fn heat_semigroup() {
        let g = box3(16);
        let s = ScalarField::from_fn(g, |x| x[0].sin());
        let h = heat_propagate(&s, 1.0).unwrap();
        assert!(h.max_diff(&s.scale((-1.0f64).exp())) < 1e-13);
        let f = band_limited(g, 5, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(heat_propagate(&f, 0.0).unwrap().max_diff(&f) < 1e-13);
        let a = heat_propagate(&heat_propagate(&f, 0.3).unwrap(), 0.3).unwrap();
        let b = heat_propagate(&f, 0.6).unwrap();
        assert!(a.max_diff(&b) < 1e-12);
        assert!((b.mean() - f.mean()).abs() < 1e-13);
        assert!(b.max_abs() <= f.max_abs() + 1e-12);
        assert!(matches!(heat_propagate(&f, -0.1), Err(Error::BackwardHeat(_))));
    }

    #[test]
    fn operator_bound_holds() {
        let g = Grid::periodic_box(2, 32, 2.0 * PI).unwrap();
        let f = band_limited(g, 6, &mut ChaCha8Rng::seed_from_u64(9));
        let a = MultiplierSymbol::abs_grad(2).apply(&f).unwrap();
        let l2 = |s: &ScalarField| s.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(l2(&a) <= abs_grad_operator_bound(&g, 6) * l2(&f) * (1.0 + 1e-12));
    }
}
