//! Acceptance suite. Runs the reference experiments one after another, so the
//! wall-clock limits are not distorted by parallel tests. Prints one PASS/FAIL
//! line per criterion and exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use stokes_liouville::experiments::{
    DtnConvergence, ExtensionStudy, ExteriorStudy, HalfStripClassification, KernelStudy, MollifierStudy,
    OperatorIdentities, PeriodicClassification, Report, ShearStudy,
};
use stokes_liouville::Result;

type Runner = fn() -> Result<Report>;

fn criteria() -> Vec<(&'static str, Runner, u64)> {
    vec![
        ("operator identities", || OperatorIdentities::default().run(), 10),
        ("DtN convergence", || DtnConvergence::default().run(), 10),
        ("extension", || ExtensionStudy::default().run(), 10),
        ("shear flow", || ShearStudy::default().run(), 30),
        ("mollifier bounds", || MollifierStudy::default().run(), 5),
        ("periodic classification", || PeriodicClassification::default().run(), 60),
        ("half-strip classification", || HalfStripClassification::default().run(), 300),
        ("kernel decay", || KernelStudy::default().run(), 60),
        ("exterior far field", || ExteriorStudy::default().run(), 120),
    ]
}

fn main() {
    // libtest flags are accepted but meaningless here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut all_pass = true;
    let mut first: Vec<Vec<(String, String)>> = Vec::new();
    for (k, (name, runner, limit)) in criteria().into_iter().enumerate() {
        let start = Instant::now();
        let result = runner();
        let elapsed = start.elapsed();
        let (pass, detail, tables) = match result {
            Ok(r) => {
                let in_time = elapsed <= Duration::from_secs(limit);
                let mut detail = r.summary();
                if !in_time {
                    detail.push_str(&format!("; runtime over {limit} s"));
                }
                (r.passed() && in_time, detail, r.all_tables())
            }
            Err(e) => (false, format!("error: {e}"), Vec::new()),
        };
        all_pass &= pass;
        println!(
            "C{} {} {name} ({:.1} s, limit {limit} s): {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        first.push(tables);
    }

    // determinism: every table of every criterion again, byte for byte
    let mut mismatches = Vec::new();
    for (k, (_, runner, _)) in criteria().into_iter().enumerate() {
        match runner() {
            Ok(r) => {
                let again = r.all_tables();
                if first[k].is_empty() || again.len() != first[k].len() {
                    mismatches.push(format!("C{}: table set differs", k + 1));
                    continue;
                }
                let names: Vec<&str> =
                    again.iter().zip(&first[k]).filter(|(a, b)| a != b).map(|(a, _)| a.0.as_str()).collect();
                if !names.is_empty() {
                    mismatches.push(format!("C{}: {}", k + 1, names.join(" ")));
                }
            }
            Err(e) => mismatches.push(format!("C{}: error {e}", k + 1)),
        }
    }
    let pass = mismatches.is_empty();
    all_pass &= pass;
    println!(
        "C10 {} determinism: {}",
        if pass { "PASS" } else { "FAIL" },
        if pass { "all tables byte-identical on rerun".to_string() } else { mismatches.join("; ") }
    );
    if !all_pass {
        std::process::exit(1);
    }
}
