//! Divergence-free extension of tangential wall data.
//!
//! With `w_in = rho(x_n) g_i(x')` the field `phi_i = d_n w_in`,
//! `phi_n = -sum_i d_i w_in` is divergence free, vanishes on the wall and has
//! normal derivative `g` there, provided `rho(0) = rho'(0) = 0`, `rho''(0) = 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{smooth_cutoff, Jet};
use crate::spectral::ops::fd_first;
use crate::spectral::{derivative, Grid, ScalarField, VectorField};

type ProfileFn = Arc<dyn Fn(Jet) -> Jet + Send + Sync>;

/// Vertical profile `rho` with support in `[0, H/2]` and jets `(0, 0, 1)` at the wall.
#[derive(Clone)]
pub struct VerticalProfile {
    height: f64,
    rho: ProfileFn,
}

impl fmt::Debug for VerticalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VerticalProfile").field("height", &self.height).finish()
    }
}

impl VerticalProfile {
    /// Validates the wall jets and the support bound of an arbitrary profile.
    pub fn new(height: f64, rho: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> Result<Self> {
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::InvalidArgument(format!("profile height {height} must be positive")));
        }
        let p = Self { height, rho: Arc::new(rho) };
        let d = p.jet(0.0).derivatives();
        let tol = 1e-12;
        if d[0].abs() > tol || d[1].abs() > tol || (d[2] - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "profile jets at the wall are ({:.3e}, {:.3e}, {:.3e}), need (0, 0, 1)",
                d[0], d[1], d[2]
            )));
        }
        let end = p.support_end();
        for k in 1..=400 {
            let x = end + (height - end) * k as f64 / 400.0;
            if p.jet(x).derivatives().iter().any(|v| v.abs() > 1e-14) {
                return Err(Error::InvalidArgument(format!("profile does not vanish at x_n = {x}")));
            }
        }
        Ok(p)
    }

    /// `rho(x) = (x^2/2) exp(-4x/H) chi(4x/H)`.
    ///
    /// The exponential factor keeps `rho'''(0) != 0`, so one-sided wall
    /// differences show their true second-order error.
    pub fn standard(height: f64) -> Result<Self> {
        let a = 4.0 / height;
        Self::new(height, move |x| x * x * 0.5 * (x * -a).exp() * smooth_cutoff(x * a))
    }

    /// `rho(x) = (x^2/2) chi(4x/H)`: exactly quadratic near the wall.
    pub fn quadratic(height: f64) -> Result<Self> {
        let a = 4.0 / height;
        Self::new(height, move |x| x * x * 0.5 * smooth_cutoff(x * a))
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn support_end(&self) -> f64 {
        0.5 * self.height
    }

    pub fn jet(&self, x: f64) -> Jet {
        (self.rho)(Jet::variable(x))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).value()
    }

    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        self.jet(x).derivative(k)
    }
}

/// Nonzero stream entries `w_in`, `i < n`; `w_ni = -w_in` is implied.
#[derive(Debug, Clone)]
pub struct StreamTensor {
    pub entries: Vec<ScalarField>,
    pub profile: VerticalProfile,
}

/// Extension field together with samples of its normal derivative.
#[derive(Debug, Clone)]
pub struct Extension {
    pub phi: VectorField,
    /// `d_n phi` in closed form when built from a profile, by finite
    /// differences when wrapped with [`Extension::from_field`].
    pub dn_phi: VectorField,
    pub stream: Option<StreamTensor>,
}

impl Extension {
    pub fn from_field(phi: VectorField) -> Result<Self> {
        let n = phi.dim();
        let dn_phi = VectorField::new(
            (0..n).map(|i| derivative(phi.component(i), n - 1)).collect::<Result<_>>()?,
        )?;
        Ok(Self { phi, dn_phi, stream: None })
    }
}

fn check_wall_data(g: &[ScalarField], grid: &Grid) -> Result<Grid> {
    if grid.is_periodic() {
        return Err(Error::UnsupportedGeometry("extension needs a wall-bounded grid".into()));
    }
    let wall = grid.wall()?;
    if g.len() != grid.dim() - 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} tangential components for dimension {}",
            g.len(),
            grid.dim()
        )));
    }
    if g.iter().any(|c| *c.grid() != wall) {
        return Err(Error::DimensionMismatch("boundary data does not live on the wall torus".into()));
    }
    if g.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(wall)
}

/// Tensor product `a(x') b(x_n)` on `grid`.
fn outer(grid: &Grid, lateral: &ScalarField, vertical: &[f64]) -> ScalarField {
    let mut v = Vec::with_capacity(grid.len());
    for &a in lateral.values() {
        v.extend(vertical.iter().map(|b| a * b));
    }
    ScalarField::from_values(*grid, v).unwrap_or_else(|_| ScalarField::zeros(*grid))
}

pub fn build_extension(g: &[ScalarField], grid: &Grid, profile: &VerticalProfile) -> Result<Extension> {
    let wall = check_wall_data(g, grid)?;
    let n = grid.dim();
    let xs = grid.vertical_coords();
    let jets: Vec<[f64; 6]> = xs.iter().map(|&x| profile.jet(x).derivatives()).collect();
    let rho: Vec<f64> = jets.iter().map(|d| d[0]).collect();
    let rho1: Vec<f64> = jets.iter().map(|d| d[1]).collect();
    let rho2: Vec<f64> = jets.iter().map(|d| d[2]).collect();

    let mut div_g = ScalarField::zeros(wall);
    for (i, gi) in g.iter().enumerate() {
        div_g = &div_g + &derivative(gi, i)?;
    }

    let mut phi = Vec::with_capacity(n);
    let mut dn = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n - 1);
    for gi in g {
        entries.push(outer(grid, gi, &rho));
        phi.push(outer(grid, gi, &rho1));
        dn.push(outer(grid, gi, &rho2));
    }
    let minus_div = div_g.scale(-1.0);
    phi.push(outer(grid, &minus_div, &rho));
    dn.push(outer(grid, &minus_div, &rho1));

    Ok(Extension {
        phi: VectorField::new(phi)?,
        dn_phi: VectorField::new(dn)?,
        stream: Some(StreamTensor { entries, profile: profile.clone() }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionReport {
    /// `max |div phi|`, lateral derivatives spectral, `d_n phi_n` from the extension.
    pub div_max: f64,
    /// `max |phi(., 0)|`.
    pub trace_max: f64,
    /// `max |D phi_i(., 0) - g_i|` with the one-sided wall difference `D`.
    pub neumann_err: f64,
    /// `max |D phi_n(., 0)|`, which the construction makes small without imposing it.
    pub normal_neumann: f64,
    /// `phi` vanishes above `H/2`.
    pub support_ok: bool,
}

impl ExtensionReport {
    /// Rows `(quantity, value, tolerance, pass)` for tabular output.
    pub fn rows(&self, h: f64, g_max: f64) -> Vec<(&'static str, f64, f64, bool)> {
        let neumann_tol = 4.0 * h * h * g_max.max(1.0);
        vec![
            ("div_max", self.div_max, 1e-12, self.div_max <= 1e-12),
            ("trace_max", self.trace_max, 0.0, self.trace_max == 0.0),
            ("neumann_err", self.neumann_err, neumann_tol, self.neumann_err <= neumann_tol),
            ("normal_neumann", self.normal_neumann, neumann_tol, self.normal_neumann <= neumann_tol),
            ("support_ok", if self.support_ok { 1.0 } else { 0.0 }, 1.0, self.support_ok),
        ]
    }
}

pub fn verify_extension(ext: &Extension, g: &[ScalarField]) -> Result<ExtensionReport> {
    let phi = &ext.phi;
    let grid = *phi.grid();
    check_wall_data(g, &grid)?;
    let n = grid.dim();
    let m = grid.column_len();
    let h = grid.vertical_spacing();

    let mut div = ext.dn_phi.component(n - 1).clone();
    for i in 0..n - 1 {
        div = &div + &derivative(phi.component(i), i)?;
    }

    let trace_max = phi
        .components()
        .iter()
        .map(|c| (0..grid.lateral_count()).fold(0.0, |acc: f64, lat| acc.max(c.values()[lat * m].abs())))
        .fold(0.0, f64::max);

    let wall_slope = |c: &ScalarField, lat: usize| fd_first(&c.column(lat)[..3], h)[0];
    let mut neumann_err: f64 = 0.0;
    for (i, gi) in g.iter().enumerate() {
        for (lat, gv) in gi.values().iter().enumerate() {
            neumann_err = neumann_err.max((wall_slope(phi.component(i), lat) - gv).abs());
        }
    }
    let normal_neumann = (0..grid.lateral_count())
        .fold(0.0, |acc: f64, lat| acc.max(wall_slope(phi.component(n - 1), lat).abs()));

    let cut = 0.5 * grid.height();
    let xs = grid.vertical_coords();
    let support_ok = phi.components().iter().all(|c| {
        c.values()
            .iter()
            .enumerate()
            .all(|(flat, v)| xs[flat % m] <= cut + 1e-12 || v.abs() <= 1e-14)
    });

    Ok(ExtensionReport { div_max: div.max_abs(), trace_max, neumann_err, normal_neumann, support_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::band_limited;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn strip(m: usize) -> Grid {
        Grid::half_strip(3, 16, 2.0 * PI, m, 4.0).unwrap()
    }

    #[test]
    fn profiles_validate_jets() {
        assert!(VerticalProfile::standard(4.0).is_ok());
        assert!(VerticalProfile::quadratic(4.0).is_ok());
        assert!(VerticalProfile::new(4.0, |x| x * x).is_err());
        assert!(VerticalProfile::new(4.0, |x| x * x * 0.5).is_err());
        let p = VerticalProfile::standard(4.0).unwrap();
        assert_eq!(p.value(2.5), 0.0);
        assert!((p.derivative(0.0, 3) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_data_matches_closed_form() {
        let grid = strip(33);
        let wall = grid.wall().unwrap();
        let p = VerticalProfile::standard(4.0).unwrap();
        let g = vec![ScalarField::from_fn(wall, |x| x[0].cos()), ScalarField::zeros(wall)];
        let ext = build_extension(&g, &grid, &p).unwrap();
        let e0 = ScalarField::from_fn(grid, |x| p.derivative(x[2], 1) * x[0].cos());
        let e2 = ScalarField::from_fn(grid, |x| p.value(x[2]) * x[0].sin());
        assert!(ext.phi.component(0).max_diff(&e0) < 1e-13);
        assert!(ext.phi.component(1).max_abs() == 0.0);
        assert!(ext.phi.component(2).max_diff(&e2) < 1e-13);
        let r = verify_extension(&ext, &g).unwrap();
        assert!(r.div_max < 1e-12);
        assert_eq!(r.trace_max, 0.0);
        assert!(r.support_ok);
    }

    #[test]
    fn zero_data() {
        let grid = strip(17);
        let wall = grid.wall().unwrap();
        let g = vec![ScalarField::zeros(wall); 2];
        let ext = build_extension(&g, &grid, &VerticalProfile::standard(4.0).unwrap()).unwrap();
        assert_eq!(ext.phi.max_abs(), 0.0);
        let r = verify_extension(&ext, &g).unwrap();
        assert_eq!((r.div_max, r.trace_max, r.neumann_err), (0.0, 0.0, 0.0));
        let r = verify_extension(&Extension::from_field(VectorField::zeros(grid)).unwrap(), &g).unwrap();
        assert_eq!((r.div_max, r.trace_max, r.neumann_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn normal_only_field_is_flagged() {
        let grid = strip(33);
        let wall = grid.wall().unwrap();
        let p = VerticalProfile::standard(4.0).unwrap();
        let phi = VectorField::new(vec![
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::from_fn(grid, |x| p.value(x[2])),
        ])
        .unwrap();
        let r = verify_extension(&Extension::from_field(phi).unwrap(), &vec![ScalarField::zeros(wall); 2]).unwrap();
        assert_eq!(r.trace_max, 0.0);
        assert!(r.div_max > 0.1);
    }

    #[test]
    fn neumann_error_is_second_order() {
        let p = VerticalProfile::standard(4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let wall = strip(33).wall().unwrap();
        let g: Vec<ScalarField> = (0..2).map(|_| band_limited(wall, 4, &mut rng)).collect();
        let errs: Vec<f64> = [33, 65, 129]
            .iter()
            .map(|&m| {
                let grid = strip(m);
                verify_extension(&build_extension(&g, &grid, &p).unwrap(), &g).unwrap().neumann_err
            })
            .collect();
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.6);
        assert!((errs[1] / errs[2] - 4.0).abs() < 0.6);
    }

    #[test]
    fn quadratic_profile_hides_the_error() {
        let p = VerticalProfile::quadratic(4.0).unwrap();
        let grid = strip(33);
        let wall = grid.wall().unwrap();
        let g = vec![ScalarField::from_fn(wall, |x| x[1].sin()), ScalarField::zeros(wall)];
        let r = verify_extension(&build_extension(&g, &grid, &p).unwrap(), &g).unwrap();
        assert!(r.neumann_err < 1e-12);
    }

    #[test]
    fn linear_in_data() {
        let grid = strip(17);
        let wall = grid.wall().unwrap();
        let p = VerticalProfile::standard(4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<ScalarField> = (0..2).map(|_| band_limited(wall, 3, &mut rng)).collect();
        let b: Vec<ScalarField> = (0..2).map(|_| band_limited(wall, 3, &mut rng)).collect();
        let s: Vec<ScalarField> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ea = build_extension(&a, &grid, &p).unwrap().phi;
        let eb = build_extension(&b, &grid, &p).unwrap().phi;
        let es = build_extension(&s, &grid, &p).unwrap().phi;
        assert!(es.max_diff(&(&ea + &eb)) < 1e-13);
    }
}
