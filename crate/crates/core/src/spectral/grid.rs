use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// All directions periodic with period `L`.
    PeriodicBox,
    /// Periodic in `x'`, wall at `x_n = 0`, artificial boundary at `x_n = H`.
    HalfStrip,
    /// Periodic in `x'`, walls at `x_n = 0` and `x_n = H`.
    Channel,
}

impl Geometry {
    pub fn code(self) -> u8 {
        match self {
            Geometry::PeriodicBox => 0,
            Geometry::HalfStrip => 1,
            Geometry::Channel => 2,
        }
    }

    pub fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(Geometry::PeriodicBox),
            1 => Ok(Geometry::HalfStrip),
            2 => Ok(Geometry::Channel),
            _ => Err(Error::Parse(format!("unknown geometry code {c}"))),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Geometry::PeriodicBox => "periodic",
            Geometry::HalfStrip => "halfstrip",
            Geometry::Channel => "channel",
        };
        f.write_str(s)
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" | "periodicbox" | "box" => Ok(Geometry::PeriodicBox),
            "halfstrip" | "half-strip" | "halfspace" => Ok(Geometry::HalfStrip),
            "channel" => Ok(Geometry::Channel),
            other => Err(Error::Parse(format!("unknown geometry `{other}`"))),
        }
    }
}

/// Tensor-product grid: a lateral torus of `N` points per periodic direction,
/// plus (for wall-bounded geometries) `M` vertical nodes on `[0, H]` including
/// both end planes.
///
/// Samples are stored row-major with the last axis (`x_n`) fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    m: usize,
    height: f64,
    geometry: Geometry,
}

impl Grid {
    pub fn new(
        dim: usize,
        n: usize,
        length: f64,
        m: usize,
        height: f64,
        geometry: Geometry,
    ) -> Result<Self> {
        let min_dim = if geometry == Geometry::PeriodicBox { 1 } else { 2 };
        if !(min_dim..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not supported for {geometry}"
            )));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "lateral resolution N = {n} must be a power of two >= 4"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("period L = {length} must be positive")));
        }
        if geometry != Geometry::PeriodicBox {
            if m < 4 {
                return Err(Error::InvalidGrid(format!("vertical resolution M = {m} must be >= 4")));
            }
            if !(height.is_finite() && height > 0.0) {
                return Err(Error::InvalidGrid(format!("height H = {height} must be positive")));
            }
        }
        let (m, height) = if geometry == Geometry::PeriodicBox { (n, length) } else { (m, height) };
        Ok(Self { dim, n, length, m, height, geometry })
    }

    pub fn periodic_box(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(dim, n, length, n, length, Geometry::PeriodicBox)
    }

    pub fn half_strip(dim: usize, n: usize, length: f64, m: usize, height: f64) -> Result<Self> {
        Self::new(dim, n, length, m, height, Geometry::HalfStrip)
    }

    pub fn channel(dim: usize, n: usize, length: f64, m: usize, height: f64) -> Result<Self> {
        Self::new(dim, n, length, m, height, Geometry::Channel)
    }

    /// The lateral torus `x'` carrying boundary data of a wall-bounded grid.
    pub fn wall(&self) -> Result<Grid> {
        if self.is_periodic() {
            return Err(Error::UnsupportedGeometry("periodic box has no wall".into()));
        }
        Grid::periodic_box(self.dim - 1, self.n, self.length)
    }

    /// Same lateral layout, different vertical resolution or height.
    pub fn with_vertical(&self, m: usize, height: f64) -> Result<Grid> {
        Grid::new(self.dim, self.n, self.length, m, height, self.geometry)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn height(&self) -> f64 {
        self.height
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn is_periodic(&self) -> bool {
        self.geometry == Geometry::PeriodicBox
    }

    /// Number of periodic directions (the transform acts on these only).
    pub fn periodic_axes(&self) -> usize {
        if self.is_periodic() {
            self.dim
        } else {
            self.dim - 1
        }
    }

    pub fn axis_is_periodic(&self, axis: usize) -> bool {
        axis < self.periodic_axes()
    }

    pub fn axis_len(&self, axis: usize) -> usize {
        if self.axis_is_periodic(axis) {
            self.n
        } else {
            self.m
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim).map(|a| self.axis_len(a)).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of points along the last (fastest) axis.
    pub fn column_len(&self) -> usize {
        self.axis_len(self.dim - 1)
    }

    /// Number of lateral points per vertical plane (`N^(n-1)`) for wall-bounded
    /// grids; total point count for the periodic box.
    pub fn lateral_count(&self) -> usize {
        self.n.pow(self.periodic_axes() as u32)
    }

    pub fn stride(&self, axis: usize) -> usize {
        ((axis + 1)..self.dim).map(|a| self.axis_len(a)).product()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Vertical spacing `h = H / (M - 1)`; for the periodic box the lateral spacing.
    pub fn vertical_spacing(&self) -> f64 {
        if self.is_periodic() {
            self.spacing()
        } else {
            self.height / (self.m - 1) as f64
        }
    }

    pub fn coord(&self, axis: usize, idx: usize) -> f64 {
        if self.axis_is_periodic(axis) {
            idx as f64 * self.spacing()
        } else {
            idx as f64 * self.vertical_spacing()
        }
    }

    pub fn vertical_coords(&self) -> Vec<f64> {
        let last = self.dim - 1;
        (0..self.column_len()).map(|k| self.coord(last, k)).collect()
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            let len = self.axis_len(a);
            idx[a] = flat % len;
            flat /= len;
        }
        idx
    }

    /// [`Grid::unflatten`] into a caller buffer of length `dim`.
    pub fn unflatten_into(&self, mut flat: usize, idx: &mut [usize]) {
        for a in (0..self.dim).rev() {
            let len = self.axis_len(a);
            idx[a] = flat % len;
            flat /= len;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().enumerate().fold(0, |acc, (a, &i)| acc * self.axis_len(a) + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coord(a, i))
            .collect()
    }

    /// Signed integer wavenumber of a periodic index, in `-N/2 ..= N/2 - 1`.
    pub fn wave_index(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n / 2
    }

    /// Physical wavenumber `2 pi k / L` of a periodic index.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * self.wave_index(idx) as f64 / self.length
    }

    /// Index of the conjugate frequency `-xi`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        (self.n - idx) % self.n
    }

    /// Enumerates the multi-indices of the periodic directions in storage order.
    pub fn lateral_indices(&self) -> Vec<Vec<usize>> {
        let p = self.periodic_axes();
        let count = self.n.pow(p as u32);
        (0..count)
            .map(|mut flat| {
                let mut idx = vec![0; p];
                for a in (0..p).rev() {
                    idx[a] = flat % self.n;
                    flat /= self.n;
                }
                idx
            })
            .collect()
    }
}
