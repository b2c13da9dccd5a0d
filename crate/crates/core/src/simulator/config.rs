//! Simulation configuration and its `key = value` text form.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::flows::signal::bump_shape;
use crate::flows::TimeSignal;
use crate::spectral::{Geometry, Grid};

/// Boundary condition at `x_n = H` for the half strip (the channel always
/// has a second no-slip wall there).
#[derive(Debug, Clone, PartialEq)]
pub enum TopBoundary {
    Dirichlet0,
    /// `d_n u' = 0`, `u_n = 0`.
    FreeSlip,
    /// Zero mode of `u'` pinned to the given values, other modes no-slip.
    Prescribed(Vec<TimeSignal>),
}

impl TopBoundary {
    pub fn label(&self) -> &'static str {
        match self {
            TopBoundary::Dirichlet0 => "dirichlet0",
            TopBoundary::FreeSlip => "freeslip",
            TopBoundary::Prescribed(_) => "prescribed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: Grid,
    pub dt: f64,
    /// Duration of the run.
    pub horizon: f64,
    /// Start time.
    pub t0: f64,
    pub top_bc: TopBoundary,
    /// Lateral pressure-gradient signals `c_i(t)`, one per lateral direction, or none.
    pub forcing: Vec<TimeSignal>,
    pub seed: u64,
    /// Diagnostics every `stride` steps.
    pub stride: usize,
    /// Lateral band limit of random initial data.
    pub band: usize,
    /// Max-norm of random initial data.
    pub amplitude: f64,
}

pub const MAX_DT: f64 = 0.1;

impl SimConfig {
    pub fn new(grid: Grid, dt: f64, horizon: f64) -> Self {
        Self {
            grid,
            dt,
            horizon,
            t0: 0.0,
            top_bc: TopBoundary::Dirichlet0,
            forcing: Vec::new(),
            seed: 0,
            stride: 1,
            band: 4,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::InvalidArgument(format!("dt = {} must lie in (0, {MAX_DT}]", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon T = {} must be positive", self.horizon)));
        }
        if !self.t0.is_finite() {
            return Err(Error::InvalidArgument("start time must be finite".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be at least 1".into()));
        }
        let lateral = if self.grid.is_periodic() { self.grid.dim() } else { self.grid.dim() - 1 };
        if self.forcing.len() > lateral {
            return Err(Error::InvalidArgument(format!(
                "{} forcing signals, at most {lateral} allowed",
                self.forcing.len()
            )));
        }
        if let TopBoundary::Prescribed(v) = &self.top_bc {
            if self.grid.geometry() != Geometry::HalfStrip || v.len() != self.grid.dim() - 1 {
                return Err(Error::InvalidArgument(
                    "prescribed top values need a half strip and one signal per lateral direction".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }

    /// Parses `key = value` lines; `#` starts a comment. Relative signal paths
    /// are resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", ln + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_map(&map, base)
    }

    pub fn from_map(map: &BTreeMap<String, String>, base: Option<&Path>) -> Result<Self> {
        const KEYS: [&str; 18] = [
            "n", "N", "L", "M", "H", "geometry", "dt", "T", "t0", "top_bc", "seed", "stride", "band",
            "amplitude", "forcing1", "forcing2", "forcing3", "top_values",
        ];
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let num = |k: &str, default: Option<f64>| -> Result<f64> {
            match get(k) {
                Some(v) => v.parse::<f64>().map_err(|_| Error::Parse(format!("key `{k}`: `{v}` is not a number"))),
                None => default.ok_or_else(|| Error::Parse(format!("missing key `{k}`"))),
            }
        };
        let int = |k: &str, default: Option<usize>| -> Result<usize> {
            match get(k) {
                Some(v) => v.parse::<usize>().map_err(|_| Error::Parse(format!("key `{k}`: `{v}` is not an integer"))),
                None => default.ok_or_else(|| Error::Parse(format!("missing key `{k}`"))),
            }
        };
        let geometry: Geometry = get("geometry")
            .unwrap_or("halfstrip")
            .parse()
            .map_err(|_| Error::Parse(format!("key `geometry`: `{}` unknown", get("geometry").unwrap_or(""))))?;
        let grid = Grid::new(
            int("n", Some(3))?,
            int("N", Some(32))?,
            num("L", Some(2.0 * std::f64::consts::PI))?,
            int("M", Some(65))?,
            num("H", Some(4.0))?,
            geometry,
        )?;
        let mut cfg = SimConfig::new(grid, num("dt", Some(0.01))?, num("T", None)?);
        cfg.t0 = num("t0", Some(0.0))?;
        cfg.seed = int("seed", Some(0))? as u64;
        cfg.stride = int("stride", Some(10))?;
        cfg.band = int("band", Some(4))?;
        cfg.amplitude = num("amplitude", Some(1.0))?;
        let t_end = cfg.t0 + cfg.horizon + cfg.dt;
        for i in 1..=3 {
            let key = format!("forcing{i}");
            if let Some(spec) = get(&key) {
                if cfg.forcing.len() != i - 1 {
                    return Err(Error::Parse(format!("key `{key}` given without forcing{}", i - 1)));
                }
                cfg.forcing.push(signal_spec(&key, spec, cfg.t0, t_end, cfg.dt, base)?);
            }
        }
        cfg.top_bc = match get("top_bc").unwrap_or("dirichlet0") {
            "dirichlet0" | "dirichlet" => TopBoundary::Dirichlet0,
            "freeslip" | "free-slip" => TopBoundary::FreeSlip,
            "prescribed" => {
                let specs = get("top_values")
                    .ok_or_else(|| Error::Parse("key `top_values` required for prescribed top".into()))?;
                TopBoundary::Prescribed(
                    specs
                        .split(';')
                        .map(|s| signal_spec("top_values", s.trim(), cfg.t0, t_end, cfg.dt, base))
                        .collect::<Result<_>>()?,
                )
            }
            other => return Err(Error::Parse(format!("key `top_bc`: `{other}` unknown"))),
        };
        cfg.validate().map_err(|e| Error::Parse(format!("config: {e}")))?;
        Ok(cfg)
    }

    /// Text form accepted by [`SimConfig::parse`]; signals are described by
    /// their file names `forcing<i>.csv` / `top<i>.csv`, which the caller writes.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut s = format!(
            "n = {}\nN = {}\nL = {}\nM = {}\nH = {}\ngeometry = {}\ndt = {}\nT = {}\nt0 = {}\ntop_bc = {}\nseed = {}\nstride = {}\nband = {}\namplitude = {}\n",
            g.dim(),
            g.n(),
            g.length(),
            g.m(),
            g.height(),
            g.geometry(),
            self.dt,
            self.horizon,
            self.t0,
            self.top_bc.label(),
            self.seed,
            self.stride,
            self.band,
            self.amplitude
        );
        for i in 0..self.forcing.len() {
            s.push_str(&format!("forcing{} = forcing{}.csv\n", i + 1, i + 1));
        }
        if let TopBoundary::Prescribed(v) = &self.top_bc {
            let names: Vec<String> = (1..=v.len()).map(|i| format!("top{i}.csv")).collect();
            s.push_str(&format!("top_values = {}\n", names.join(";")));
        }
        s
    }
}

/// `bump(a,b,amp)`, `const(v)`, `zero`, or a path to a `t,value` CSV.
pub fn signal_spec(key: &str, spec: &str, t0: f64, t1: f64, dt: f64, base: Option<&Path>) -> Result<TimeSignal> {
    let bad = || Error::Parse(format!("key `{key}`: cannot read signal `{spec}`"));
    let args = |inner: &str| -> Result<Vec<f64>> {
        inner.split(',').map(|a| a.trim().parse::<f64>().map_err(|_| bad())).collect()
    };
    if let Some(inner) = spec.strip_prefix("bump(").and_then(|r| r.strip_suffix(')')) {
        let v = args(inner)?;
        if v.len() != 3 || !(v[1] > v[0]) {
            return Err(bad());
        }
        let (a, b, amp) = (v[0], v[1], v[2]);
        return TimeSignal::from_fn(t0, t1, dt, |t| amp * bump_shape((t - a) / (b - a)));
    }
    if let Some(inner) = spec.strip_prefix("const(").and_then(|r| r.strip_suffix(')')) {
        let v = args(inner)?;
        if v.len() != 1 {
            return Err(bad());
        }
        return TimeSignal::from_fn(t0, t1, dt, |_| v[0]);
    }
    if spec == "zero" {
        return TimeSignal::from_fn(t0, t1, dt, |_| 0.0);
    }
    let path = match base {
        Some(b) => b.join(spec),
        None => Path::new(spec).to_path_buf(),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse(format!("key `{key}`: {}: {e}", path.display())))?;
    TimeSignal::from_csv(&text).map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg = SimConfig::parse(
            "n = 2\nN = 16\nM = 33\nH = 4\ngeometry = halfstrip\ndt = 0.01\nT = 1 # horizon\nforcing1 = bump(0.2, 0.8, 1)\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.grid.dim(), 2);
        assert_eq!(cfg.forcing.len(), 1);
        assert!(cfg.forcing[0].sup() > 0.99);
        assert_eq!(cfg.steps(), 100);
        let err = SimConfig::parse("T = 1\nbogus = 3\n", None).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = SimConfig::parse("T = 1\ndt = x\n", None).unwrap_err();
        assert!(err.to_string().contains("dt"));
        assert!(SimConfig::parse("dt = 0.01\n", None).unwrap_err().to_string().contains("`T`"));
        assert!(SimConfig::parse("T = 1\ndt = 0.5\n", None).is_err());
    }
}
