//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned.
//!
//! Runs without the libtest harness so the lines are always printed. The exit
//! status is nonzero when a criterion fails that is not listed in
//! `KNOWN_FAILURES`; those are pre-asymptotic at desk band limits (see README)
//! and are reported as measured, never relaxed.

use std::process::ExitCode;
use std::time::Instant;

use su2_paradiff::paradiff::probes::{paraproduct_probe, stein_probe, ProbeConfig};
use su2_paradiff::suite::{self, Check};
use su2_paradiff::{Result, Spin};

const KNOWN_FAILURES: [usize; 2] = [9, 12];

const SEED: u64 = 20260;

struct Outcome {
    index: usize,
    title: &'static str,
    checks: Vec<Check>,
    seconds: f64,
}

fn sp(two: u32) -> Spin {
    Spin::from_twice(two)
}

fn timed(index: usize, title: &'static str, f: impl FnOnce() -> Result<Vec<Check>>) -> Outcome {
    let t = Instant::now();
    let checks = f().unwrap_or_else(|e| vec![Check::flag(format!("error: {e}"), false)]);
    Outcome { index, title, checks, seconds: t.elapsed().as_secs_f64() }
}

fn with_runtime(mut o: Outcome, limit: f64) -> Outcome {
    o.checks.push(Check::at_most("runtime_seconds", o.seconds, limit));
    o
}

fn main() -> ExitCode {
    let probe_cfg = ProbeConfig { delta: 1.0 / 16.0, gap: 8.0, r: 1, bands: [sp(16), sp(32)], seed: SEED, ..ProbeConfig::default() };
    let outcomes = vec![
        with_runtime(timed(1, "quadrature and Peter-Weyl (B = 8)", || suite::peter_weyl(sp(16), 50, SEED)), 30.0),
        timed(2, "representation identities", || Ok(suite::representations(SEED))),
        timed(3, "spectral localization of products (j1, j2 <= 4)", || suite::localization(sp(8), SEED)),
        timed(4, "Leibniz identity of the fundamental tuple", || Ok(suite::leibniz(1000, SEED))),
        timed(5, "Taylor machinery", || suite::taylor(SEED)),
        timed(6, "Littlewood-Paley", || suite::littlewood_paley(sp(16), &[-2.0, -1.0, 0.0, 1.0, 2.0], SEED)),
        timed(7, "multiplier decay", || Ok(suite::multiplier_orders())),
        timed(8, "Weyl count", || Ok(suite::weyl(20.0))),
        timed(9, "para-product boundedness (gap 8, B 8 -> 16)", || {
            let cfg = ProbeConfig { s_values: vec![-2.0, 0.0, 2.0], ..probe_cfg.clone() };
            let mut c = suite::probe_checks(&paraproduct_probe(&cfg)?);
            c.extend(suite::para_reconstruction(sp(12), 8.0, SEED)?);
            Ok(c)
        }),
        timed(10, "Bony identity (B = 6, z^2 and z^3)", || suite::bony(sp(12), &[2, 3], SEED)),
        timed(11, "spectral condition machinery", || suite::spectral_condition(sp(16), 1.0 / 16.0, 8.0, SEED)),
        timed(12, "calculus probes (delta 1/16, gap 8, r 1, B 8 -> 16)", || {
            let run = suite::calculus_probes(&probe_cfg)?;
            let mut c = suite::probe_checks(&run.rows);
            let stein = stein_probe(&ProbeConfig { s_values: vec![-1.0], ..probe_cfg.clone() }, 0.125)?;
            c.extend(suite::probe_checks(&stein));
            c.push(Check::at_most("runtime_seconds", run.seconds, 600.0));
            Ok(c)
        }),
        timed(13, "quasi-homogeneous order probes", || suite::quasi_homogeneous(SEED)),
    ];

    let mut unexpected = Vec::new();
    let mut recovered = Vec::new();
    for o in &outcomes {
        let failed = o.checks.iter().filter(|c| !c.pass).count();
        let pass = failed == 0;
        let known = KNOWN_FAILURES.contains(&o.index);
        println!(
            "criterion {:>2} {} {} [{} checks, {} failed, {:.1}s]{}",
            o.index,
            if pass { "PASS" } else { "FAIL" },
            o.title,
            o.checks.len(),
            failed,
            o.seconds,
            if !pass && known { " (known pre-asymptotic failure)" } else { "" }
        );
        if !pass && !known {
            unexpected.push(o.index);
        }
        if pass && known {
            recovered.push(o.index);
        }
    }
    println!();
    for o in &outcomes {
        for c in o.checks.iter().filter(|c| !c.pass) {
            println!("  criterion {:>2} failed check: {}", o.index, c.csv());
        }
    }
    if !recovered.is_empty() {
        println!("criteria {recovered:?} now pass; remove them from KNOWN_FAILURES");
    }
    if unexpected.is_empty() && recovered.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected acceptance outcome: failing {unexpected:?}");
        ExitCode::FAILURE
    }
}
