use crate::error::{Error, Result};

/// Uniformly sampled function of time, `samples[j] = f(t0 + j dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<f64>,
    dt: f64,
    t0: f64,
    support: Option<(f64, f64)>,
}

/// Samples outside the declared support may not exceed this.
pub const SUPPORT_TOL: f64 = 1e-14;

impl TimeSignal {
    pub fn new(samples: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidArgument("a signal needs at least two samples".into()));
        }
        if !t0.is_finite() || samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { samples, dt, t0, support: None })
    }

    /// Samples `f` on `t0, t0 + dt, ...` up to and including `t1` (rounded).
    pub fn from_fn(t0: f64, t1: f64, dt: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidArgument(format!("empty time range [{t0}, {t1}]")));
        }
        let count = ((t1 - t0) / dt).round() as usize + 1;
        Self::new((0..count).map(|j| f(t0 + j as f64 * dt)).collect(), dt, t0)
    }

    /// Smooth bump `amp * exp(4 - 1/(s(1-s)))`, `s = (t-a)/(b-a)`, peak `amp`
    /// at the midpoint, sampled on `[t0, t1]` with declared support `[a, b]`.
    pub fn bump(a: f64, b: f64, amp: f64, t0: f64, t1: f64, dt: f64) -> Result<Self> {
        let sig = Self::from_fn(t0, t1, dt, |t| amp * bump_shape((t - a) / (b - a)))?;
        sig.with_support(a, b)
    }

    /// Declares `[a, b]` as the support: requires `b < 0` and vanishing samples outside.
    pub fn with_support(mut self, a: f64, b: f64) -> Result<Self> {
        if !(a < b && b < 0.0) {
            return Err(Error::InvalidArgument(format!("support [{a}, {b}] must satisfy a < b < 0")));
        }
        for (j, v) in self.samples.iter().enumerate() {
            let t = self.time(j);
            if (t < a || t > b) && v.abs() > SUPPORT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "signal is {v:.3e} at t = {t}, outside its declared support [{a}, {b}]"
                )));
            }
        }
        self.support = Some((a, b));
        Ok(self)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|j| self.time(j)).collect()
    }

    /// Whether the signal is known to vanish before its first sample.
    pub fn vanishes_before(&self) -> bool {
        self.samples[0].abs() <= SUPPORT_TOL
    }

    /// Whether the signal is known to vanish after its last sample.
    pub fn vanishes_after(&self) -> bool {
        self.samples[self.samples.len() - 1].abs() <= SUPPORT_TOL
    }

    /// Linear interpolation; outside the stored range the signal is zero when
    /// it vanishes at that end, otherwise the time is out of range.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let x = (t - self.t0) / self.dt;
        let last = (self.samples.len() - 1) as f64;
        if x < -1e-9 {
            return if self.vanishes_before() { Ok(0.0) } else { Err(Error::SignalRangeExceeded(t)) };
        }
        if x > last + 1e-9 {
            return if self.vanishes_after() { Ok(0.0) } else { Err(Error::SignalRangeExceeded(t)) };
        }
        let x = x.clamp(0.0, last);
        let j = (x.floor() as usize).min(self.samples.len() - 2);
        let w = x - j as f64;
        Ok(self.samples[j] * (1.0 - w) + self.samples[j + 1] * w)
    }

    pub fn sup(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid integral of `|f|`.
    pub fn l1(&self) -> f64 {
        trapezoid(&self.samples.iter().map(|v| v.abs()).collect::<Vec<_>>(), self.dt)
    }

    /// Trapezoid integral of `f`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.samples, self.dt)
    }

    pub fn scale(&self, s: f64) -> TimeSignal {
        TimeSignal { samples: self.samples.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    /// Same samples moved by `shift` in time.
    pub fn shifted(&self, shift: f64) -> TimeSignal {
        TimeSignal {
            samples: self.samples.clone(),
            dt: self.dt,
            t0: self.t0 + shift,
            support: self.support.map(|(a, b)| (a + shift, b + shift)),
        }
    }

    /// Two-column CSV `t,value` with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (j, v) in self.samples.iter().enumerate() {
            out.push_str(&format!("{:.11e},{:.11e}\n", self.time(j), v));
        }
        out
    }

    /// Parses `t,value` rows (an optional non-numeric header is skipped); the
    /// time column must be uniform.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut t = Vec::new();
        let mut v = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(Error::Parse(format!("line {}: expected two columns", ln + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    t.push(a);
                    v.push(b);
                }
                _ if t.is_empty() && ln == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: not numeric", ln + 1))),
            }
        }
        if t.len() < 2 {
            return Err(Error::Parse("signal needs at least two rows".into()));
        }
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        for (j, tj) in t.iter().enumerate() {
            if (tj - (t[0] + j as f64 * dt)).abs() > 1e-6 * dt {
                return Err(Error::Parse(format!("non-uniform time column at row {}", j + 1)));
            }
        }
        Self::new(v, dt, t[0])
    }
}

/// `exp(4 - 1/(s(1-s)))` on `(0, 1)`, zero elsewhere; peak value 1.
pub fn bump_shape(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (4.0 - 1.0 / (s * (1.0 - s))).exp()
    }
}

pub(crate) fn trapezoid(v: &[f64], h: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
}
