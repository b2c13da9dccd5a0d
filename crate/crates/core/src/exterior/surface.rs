//! Sphere quadrature and sampled surface tractions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Product rule on the sphere of radius `r`: Gauss-Legendre in `cos theta`
/// with `n_theta` nodes times `2 n_theta` uniform azimuths.
pub fn sphere_quadrature(radius: f64, n_theta: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let (ct, wt) = gauss_legendre(n_theta);
    let n_phi = 2 * n_theta;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (c, w) in ct.iter().zip(&wt) {
        let s = (1.0 - c * c).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
            nodes.push([radius * s * phi.cos(), radius * s * phi.sin(), radius * c]);
            weights.push(w * 2.0 * PI / n_phi as f64 * radius * radius);
        }
    }
    (nodes, weights)
}

/// Traction `f(y, s)` on the sphere `|y| = R`, sampled per node at increasing
/// times. Before the first sample the traction is held at its first value
/// (the ancient past is taken to be stationary); past the last sample it is
/// undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceForce {
    radius: f64,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    times: Vec<f64>,
    /// `samples[time][node]`.
    samples: Vec<Vec<[f64; 3]>>,
}

impl SurfaceForce {
    pub fn new(
        radius: f64,
        nodes: Vec<[f64; 3]>,
        weights: Vec<f64>,
        times: Vec<f64>,
        samples: Vec<Vec<[f64; 3]>>,
    ) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("sphere radius {radius} must be positive")));
        }
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::DimensionMismatch(format!("{} nodes, {} weights", nodes.len(), weights.len())));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument("quadrature weights must be positive".into()));
        }
        let area = 4.0 * PI * radius * radius;
        let total: f64 = weights.iter().sum();
        if (total - area).abs() > 1e-10 * area.max(1.0) {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, sphere area is {area}")));
        }
        if times.is_empty() || times.len() != samples.len() {
            return Err(Error::DimensionMismatch(format!("{} times, {} sample sets", times.len(), samples.len())));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("traction times must increase".into()));
        }
        for s in &samples {
            if s.len() != nodes.len() {
                return Err(Error::DimensionMismatch(format!("{} samples for {} nodes", s.len(), nodes.len())));
            }
            if s.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { radius, nodes, weights, times, samples })
    }

    /// Traction `f(y, t)` sampled at `times` on the product rule of order `n_theta`.
    pub fn from_fn(radius: f64, n_theta: usize, times: Vec<f64>, f: impl Fn([f64; 3], f64) -> [f64; 3]) -> Result<Self> {
        let (nodes, weights) = sphere_quadrature(radius, n_theta);
        let samples = times.iter().map(|&t| nodes.iter().map(|&y| f(y, t)).collect()).collect();
        Self::new(radius, nodes, weights, times, samples)
    }

    /// Time-independent traction `value` everywhere on the sphere.
    pub fn constant(radius: f64, n_theta: usize, value: [f64; 3]) -> Result<Self> {
        Self::from_fn(radius, n_theta, vec![0.0], |_, _| value)
    }

    /// Antipodally odd traction `(y1 / R) e1`.
    pub fn odd(radius: f64, n_theta: usize) -> Result<Self> {
        Self::from_fn(radius, n_theta, vec![0.0], |y, _| [y[0] / radius, 0.0, 0.0])
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn is_stationary(&self) -> bool {
        self.times.len() == 1
    }

    /// Largest traction magnitude over all nodes and times.
    pub fn sup(&self) -> f64 {
        self.samples
            .iter()
            .flatten()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max)
    }

    /// Samples at time index `l`.
    pub fn samples_at(&self, l: usize) -> &[[f64; 3]] {
        &self.samples[l]
    }

    /// All node values at time `s`, linear in time.
    pub fn values_at(&self, s: f64) -> Result<Vec<[f64; 3]>> {
        let last = *self.times.last().expect("non-empty");
        if s <= self.times[0] || self.is_stationary() {
            if s > last + 1e-12 && !self.is_stationary() {
                return Err(Error::SignalRangeExceeded(s));
            }
            return Ok(self.samples[0].clone());
        }
        if s > last + 1e-12 {
            return Err(Error::SignalRangeExceeded(s));
        }
        let j = self.times.partition_point(|&t| t <= s).min(self.times.len() - 1).max(1);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = ((s - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Ok(self.samples[j - 1]
            .iter()
            .zip(&self.samples[j])
            .map(|(a, b)| [0, 1, 2].map(|k| (1.0 - w) * a[k] + w * b[k]))
            .collect())
    }

    /// Same traction shifted in time by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.times.iter_mut().for_each(|t| *t += delta);
        out
    }

    /// Scaled traction.
    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().flatten().for_each(|v| v.iter_mut().for_each(|x| *x *= c));
        out
    }

    /// `node,t,f1,f2,f3` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,t,f1,f2,f3\n");
        for (l, t) in self.times.iter().enumerate() {
            for (q, v) in self.samples[l].iter().enumerate() {
                s.push_str(&format!("{q},{t:.11e},{:.11e},{:.11e},{:.11e}\n", v[0], v[1], v[2]));
            }
        }
        s
    }

    /// Reads `node,t,f1,f2,f3` rows for the product rule of order `n_theta`.
    pub fn from_csv(radius: f64, n_theta: usize, text: &str) -> Result<Self> {
        let (nodes, weights) = sphere_quadrature(radius, n_theta);
        let mut rows: Vec<(usize, f64, [f64; 3])> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("node") || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("traction line {}: expected node,t,f1,f2,f3", ln + 1));
            if f.len() != 5 {
                return Err(bad());
            }
            let q: usize = f[0].parse().map_err(|_| bad())?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            if q >= nodes.len() {
                return Err(Error::Parse(format!("traction line {}: node {q} out of range", ln + 1)));
            }
            rows.push((q, num(f[1])?, [num(f[2])?, num(f[3])?, num(f[4])?]));
        }
        let mut times: Vec<f64> = rows.iter().map(|r| r.1).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut samples = vec![vec![[f64::NAN; 3]; nodes.len()]; times.len()];
        for (q, t, v) in rows {
            let l = times.partition_point(|&s| s < t);
            samples[l][q] = v;
        }
        if samples.iter().flatten().any(|v| v[0].is_nan()) {
            return Err(Error::Parse("traction table misses some (node, time) pairs".into()));
        }
        Self::new(radius, nodes, weights, times, samples)
    }
}
