//! Command-line driver: one experiment per invocation, `--key value` flags or a
//! `key = value` config file, CSV tables written to `--out-dir`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{
    DtnConvergence, ExtensionStudy, ExteriorStudy, HalfStripClassification, KernelStudy, MollifierStudy,
    OperatorIdentities, PeriodicClassification, Report, ShearStudy, Traction,
};
use crate::exterior::SurfaceForce;
use crate::simulator::config::signal_spec;
use crate::simulator::{run, SimConfig, SimState};
use crate::spectral::snapshot::{read_snapshot, write_snapshot};
use crate::spectral::VectorField;

pub const USAGE: &str = "\
usage: stokes-liouville <command> [--key value ...] [--config FILE] [--out-dir DIR]

commands:
  riesz      multiplier identities on random periodic fields
             keys: n N fields band seed
  dtn        Dirichlet-to-Neumann residual of Poisson extensions vs M
             keys: n N modes H M seed
  extend     divergence-free extension of random wall data
             keys: n N H M fields band seed
  shear      explicit shear flow, residual orders and finite-difference check
             keys: signal t0 T H M dt
  mollify    derivative bounds for one-sided time mollification
             keys: signal eps k dt
  simulate   per-mode Stokes simulator
             keys: n N L M H geometry dt T t0 top_bc seed stride band amplitude
                   forcing1 forcing2 forcing3 top_values initial snapshot
  kernel     tail of the projected heat kernel
             keys: L N rmin rmax check_N
  exterior   far-field decay of the potential outside a ball
             keys: R ntheta traction rmin rmax radii t panels
  classify   long-time behaviour from random data
             keys: geometry (periodic|halfstrip) N dt T band seed tol H M t0 unforced_T

M may be the finest level (three levels are derived by halving) or a comma list.
Exit status: 0 once outputs are written (failed checks are reported as FAIL
lines and in <name>_checks.csv), 2 on invalid input.
";

/// Parsed invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub out_dir: PathBuf,
    /// Directory against which relative input paths are resolved.
    pub base: Option<PathBuf>,
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", ln + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn parse_args(args: &[String]) -> Result<Invocation> {
    let command = args.first().ok_or_else(|| Error::Parse("missing command".into()))?.clone();
    let mut params = BTreeMap::new();
    let mut flags = BTreeMap::new();
    let mut out_dir = PathBuf::from("out");
    let mut base = None;
    let mut it = args[1..].iter();
    while let Some(a) = it.next() {
        let key = a.strip_prefix("--").ok_or_else(|| Error::Parse(format!("unexpected argument `{a}`")))?;
        let value = it.next().ok_or_else(|| Error::Parse(format!("flag `--{key}` needs a value")))?;
        match key {
            "config" => {
                let text = fs::read_to_string(value)
                    .map_err(|e| Error::Parse(format!("key `config`: cannot read `{value}`: {e}")))?;
                params.extend(parse_key_values(&text)?);
                base = Path::new(value).parent().map(Path::to_path_buf);
            }
            "out-dir" => out_dir = PathBuf::from(value),
            _ => {
                flags.insert(key.to_string(), value.clone());
            }
        }
    }
    // flags override the config file
    params.extend(flags);
    Ok(Invocation { command, params, out_dir, base })
}

struct Params<'a> {
    map: &'a BTreeMap<String, String>,
    base: Option<&'a Path>,
}

impl<'a> Params<'a> {
    fn new(inv: &'a Invocation, allowed: &[&str]) -> Result<Self> {
        if let Some(k) = inv.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown key `{k}` for `{}`", inv.command)));
        }
        Ok(Self { map: &inv.params, base: inv.base.as_deref() })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn value<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("key `{key}`: cannot parse `{v}`"))),
            None => Ok(default),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.get(key) {
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("key `{key}`: cannot parse `{s}`"))))
                .collect(),
            None => Ok(default),
        }
    }

    /// `M` as a comma list, or the finest level from which two coarser ones follow.
    fn levels(&self, default: Vec<usize>) -> Result<Vec<usize>> {
        let levels = self.list("M", default)?;
        if levels.len() != 1 {
            return Ok(levels);
        }
        let m = levels[0];
        if m < 9 || (m - 1) % 4 != 0 {
            return Err(Error::Parse(format!("key `M`: {m} must be 1 mod 4 and at least 9")));
        }
        Ok(vec![(m - 1) / 4 + 1, (m - 1) / 2 + 1, m])
    }

    fn path(&self, value: &str) -> PathBuf {
        match self.base {
            Some(b) if Path::new(value).is_relative() => b.join(value),
            _ => PathBuf::from(value),
        }
    }
}

fn write_outputs(dir: &Path, tables: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, text) in tables {
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

/// Builds and runs the experiment named by the invocation.
pub fn run_experiment(inv: &Invocation) -> Result<Report> {
    match inv.command.as_str() {
        "riesz" => {
            let p = Params::new(inv, &["n", "N", "fields", "band", "seed"])?;
            let d = OperatorIdentities::default();
            OperatorIdentities {
                dim: p.value("n", d.dim)?,
                n: p.value("N", d.n)?,
                fields: p.value("fields", d.fields)?,
                band: p.value("band", d.band)?,
                seed: p.value("seed", d.seed)?,
            }
            .run()
        }
        "dtn" => {
            let p = Params::new(inv, &["n", "N", "modes", "H", "M", "seed"])?;
            let d = DtnConvergence::default();
            DtnConvergence {
                dim: p.value("n", d.dim)?,
                n: p.value("N", d.n)?,
                modes: p.value("modes", d.modes)?,
                height: p.value("H", d.height)?,
                levels: p.levels(d.levels)?,
                seed: p.value("seed", d.seed)?,
            }
            .run()
        }
        "extend" => {
            let p = Params::new(inv, &["n", "N", "H", "M", "fields", "band", "seed"])?;
            let d = ExtensionStudy::default();
            ExtensionStudy {
                dim: p.value("n", d.dim)?,
                n: p.value("N", d.n)?,
                height: p.value("H", d.height)?,
                levels: p.levels(d.levels)?,
                fields: p.value("fields", d.fields)?,
                band: p.value("band", d.band)?,
                seed: p.value("seed", d.seed)?,
            }
            .run()
        }
        "shear" => {
            let p = Params::new(inv, &["signal", "t0", "T", "H", "M", "dt"])?;
            let d = ShearStudy::default();
            let dt = p.value("dt", d.dt)?;
            let t = p.value("T", d.t)?;
            let t0 = p.value("t0", -3.0)?;
            let signal = match p.get("signal") {
                Some(spec) => Some(signal_spec("signal", spec, t0, 0.0, dt / 4.0, p.base)?),
                None => None,
            };
            ShearStudy { signal, t, height: p.value("H", d.height)?, m: p.value("M", d.m)?, dt }.run()
        }
        "mollify" => {
            let p = Params::new(inv, &["signal", "eps", "k", "dt"])?;
            let d = MollifierStudy::default();
            let study =
                MollifierStudy { eps: p.list("eps", d.eps)?, orders: p.list("k", d.orders)?, dt: p.value("dt", d.dt)? };
            match p.get("signal") {
                Some(spec) => {
                    let u = signal_spec("signal", spec, -1.0, 0.0, study.dt, p.base)?;
                    study.run_on(&[("signal", u)])
                }
                None => study.run(),
            }
        }
        "simulate" => simulate(inv),
        "kernel" => {
            let p = Params::new(inv, &["L", "N", "rmin", "rmax", "check_N"])?;
            let d = KernelStudy::default();
            KernelStudy {
                box_len: p.value("L", d.box_len)?,
                n: p.value("N", d.n)?,
                fit_range: (p.value("rmin", d.fit_range.0)?, p.value("rmax", d.fit_range.1)?),
                check_n: p.value("check_N", d.check_n)?,
            }
            .run()
        }
        "exterior" => {
            let p = Params::new(inv, &["R", "ntheta", "traction", "rmin", "rmax", "radii", "t", "panels"])?;
            let d = ExteriorStudy::default();
            let radius = p.value("R", d.radius)?;
            let n_theta = p.value("ntheta", d.n_theta)?;
            let traction = match p.get("traction") {
                None => d.traction,
                Some("odd") => Traction::Odd,
                Some(s) if s.starts_with("constant(") && s.ends_with(')') => {
                    let v: Vec<f64> = s["constant(".len()..s.len() - 1]
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::Parse(format!("key `traction`: cannot parse `{s}`")))?;
                    let v: [f64; 3] = v
                        .try_into()
                        .map_err(|_| Error::Parse("key `traction`: constant needs three components".into()))?;
                    Traction::Constant(v)
                }
                Some(path) => {
                    let text = fs::read_to_string(p.path(path))
                        .map_err(|e| Error::Parse(format!("key `traction`: cannot read `{path}`: {e}")))?;
                    Traction::Given(SurfaceForce::from_csv(radius, n_theta, &text)?)
                }
            };
            let (r0, r1) = (p.value("rmin", 4.0 * radius)?, p.value("rmax", 12.0 * radius)?);
            let count: usize = p.value("radii", d.radii.len())?;
            if count < 2 {
                return Err(Error::Parse("key `radii`: need at least two radii".into()));
            }
            let radii = (0..count).map(|j| r0 + (r1 - r0) * j as f64 / (count - 1) as f64).collect();
            let mut options = d.options;
            options.panels_per_decade = p.value("panels", options.panels_per_decade)?;
            ExteriorStudy { radius, n_theta, traction, radii, t: p.value("t", d.t)?, options }.run()
        }
        "classify" => {
            let geometry = inv.params.get("geometry").map(String::as_str).unwrap_or("periodic");
            match geometry {
                "periodic" => {
                    let p = Params::new(inv, &["geometry", "N", "dt", "T", "band", "seed"])?;
                    let d = PeriodicClassification::default();
                    PeriodicClassification {
                        n: p.value("N", d.n)?,
                        dt: p.value("dt", d.dt)?,
                        horizon: p.value("T", d.horizon)?,
                        band: p.value("band", d.band)?,
                        seed: p.value("seed", d.seed)?,
                    }
                    .run()
                }
                "halfstrip" => {
                    let p = Params::new(
                        inv,
                        &["geometry", "N", "dt", "T", "band", "seed", "tol", "H", "M", "t0", "unforced_T"],
                    )?;
                    let d = HalfStripClassification::default();
                    if p.get("T").is_some() && p.get("t0").is_some() {
                        return Err(Error::Parse("key `T`: give either `T` or `t0`, not both".into()));
                    }
                    let t0 = match p.get("T") {
                        Some(_) => -p.value("T", -d.t0)?,
                        None => p.value("t0", d.t0)?,
                    };
                    HalfStripClassification {
                        n: p.value("N", d.n)?,
                        height: p.value("H", d.height)?,
                        m: p.value("M", d.m)?,
                        dt: p.value("dt", d.dt)?,
                        t0,
                        pulse: d.pulse,
                        band: p.value("band", d.band)?,
                        seed: p.value("seed", d.seed)?,
                        tol: p.value("tol", d.tol)?,
                        unforced_horizon: p.value("unforced_T", d.unforced_horizon)?,
                    }
                    .run()
                }
                other => Err(Error::Parse(format!("key `geometry`: `{other}` is not periodic or halfstrip"))),
            }
        }
        other => Err(Error::Parse(format!("unknown command `{other}`"))),
    }
}

fn simulate(inv: &Invocation) -> Result<Report> {
    let mut map = inv.params.clone();
    let initial = map.remove("initial");
    let snapshot = map.remove("snapshot");
    let snapshot = match snapshot.as_deref() {
        None | Some("false") => false,
        Some("true") => true,
        Some(v) => return Err(Error::Parse(format!("key `snapshot`: `{v}` is not true or false"))),
    };
    let cfg = SimConfig::from_map(&map, inv.base.as_deref())?;
    let u0 = match initial {
        Some(path) => {
            let full = match &inv.base {
                Some(b) if Path::new(&path).is_relative() => b.join(&path),
                _ => PathBuf::from(&path),
            };
            let mut file = fs::File::open(&full)
                .map_err(|e| Error::Parse(format!("key `initial`: cannot open `{path}`: {e}")))?;
            let comps = read_snapshot(&mut file)?;
            if comps.first().map(|c| *c.grid()) != Some(cfg.grid) {
                return Err(Error::Parse("key `initial`: snapshot grid differs from the configured grid".into()));
            }
            Some(VectorField::new(comps)?)
        }
        None => None,
    };
    let out = run(&cfg, u0.as_ref())?;
    let mut diag = String::from(crate::simulator::LiouvilleDiagnostics::CSV_HEADER);
    diag.push('\n');
    for d in &out.diagnostics {
        diag.push_str(&d.csv_row());
        diag.push('\n');
    }
    let mut report = Report { name: "simulate".into(), checks: Vec::new(), tables: Vec::new() };
    report.tables.push(("simulate.csv".into(), diag));
    report.tables.push(("simulate_config.txt".into(), cfg.to_text()));
    if snapshot {
        let SimState { velocity, .. } = &out.final_state;
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, velocity.components())?;
        fs::create_dir_all(&inv.out_dir)?;
        fs::write(inv.out_dir.join("final.lvf"), bytes)?;
    }
    Ok(report)
}

/// Runs one command; `args` excludes the program name. Returns the exit code.
pub fn run_cli(args: &[String]) -> i32 {
    if args.is_empty() || matches!(args[0].as_str(), "-h" | "--help" | "help") {
        eprint!("{USAGE}");
        return 2;
    }
    let inv = match parse_args(args) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let report = match run_experiment(&inv) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = write_outputs(&inv.out_dir, &report.all_tables()) {
        eprintln!("error: writing outputs to {}: {e}", inv.out_dir.display());
        return 2;
    }
    for c in &report.checks {
        println!("{} {:.6e} {} {}", c.name, c.value, c.requirement, if c.pass { "PASS" } else { "FAIL" });
    }
    println!("{}", report.summary());
    0
}
