use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use su2_paradiff::runner::{run, write_atomic, RunConfig, Subcommand};
use su2_paradiff::Result;

/// Non-commutative Fourier analysis and para-differential calculus on SU(2).
#[derive(Parser)]
#[command(name = "su2pd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Band limit (half-integer spin).
    #[arg(long, global = true)]
    bandlimit: Option<f64>,
    /// Cut-off parameter in (0, 1/2).
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Para-product frequency gap (≥ 1).
    #[arg(long, global = true)]
    gap: Option<f64>,
    /// Sobolev index; repeat for several.
    #[arg(long = "s", global = true, allow_negative_numbers = true)]
    s: Vec<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file (written atomically); stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat key = value file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Schur, Plancherel, homomorphism, Casimir, Leibniz and localization checks.
    Selftest,
    /// Quadrature and Plancherel checks at the band limit.
    Fourier,
    /// Littlewood–Paley reconstruction, block support and square functions.
    Lp,
    /// Spectral support of a product of two single-spin functions.
    Localize {
        #[arg(long)]
        j1: f64,
        #[arg(long)]
        j2: f64,
    },
    /// Weyl counting table (t, count, count/t³).
    Weyl {
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
    },
    /// Taylor operators: biorthogonality and remainder order.
    Taylor,
    /// Symbol-order probes and the spectral condition.
    Symbols,
    /// Para-product boundedness, decomposition and remainder smoothing.
    Paraproduct,
    /// Bony linearization identity for z² and z³.
    Bony,
    /// Composition remainder probe.
    Compose,
    /// Adjoint remainder probe.
    Adjoint,
    /// Commutator probe.
    Commutator,
    /// Stein-type operator-norm probe.
    Opnorm,
    /// Cut-off freedom, a − a^χ and the δ-sweep.
    CutoffSweep,
}

fn config(cli: &Cli) -> Result<(Subcommand, RunConfig)> {
    let mut cfg = RunConfig::default();
    let c = &cli.common;
    if let Some(p) = &c.config {
        cfg.apply_file(p)?;
    }
    let (sub, extra): (Subcommand, Vec<(&str, String)>) = match &cli.command {
        Command::Selftest => (Subcommand::Selftest, vec![]),
        Command::Fourier => (Subcommand::Fourier, vec![]),
        Command::Lp => (Subcommand::Lp, vec![]),
        Command::Localize { j1, j2 } => (Subcommand::Localize, vec![("j1", j1.to_string()), ("j2", j2.to_string())]),
        Command::Weyl { tmax } => (Subcommand::Weyl, vec![("tmax", tmax.to_string())]),
        Command::Taylor => (Subcommand::Taylor, vec![]),
        Command::Symbols => (Subcommand::Symbols, vec![]),
        Command::Paraproduct => (Subcommand::Paraproduct, vec![]),
        Command::Bony => (Subcommand::Bony, vec![]),
        Command::Compose => (Subcommand::Compose, vec![]),
        Command::Adjoint => (Subcommand::Adjoint, vec![]),
        Command::Commutator => (Subcommand::Commutator, vec![]),
        Command::Opnorm => (Subcommand::Opnorm, vec![]),
        Command::CutoffSweep => (Subcommand::CutoffSweep, vec![]),
    };
    let mut flags: Vec<(&str, String)> = Vec::new();
    if let Some(v) = c.bandlimit {
        flags.push(("bandlimit", v.to_string()));
    }
    if let Some(v) = c.delta {
        flags.push(("delta", v.to_string()));
    }
    if let Some(v) = c.gap {
        flags.push(("gap", v.to_string()));
    }
    if !c.s.is_empty() {
        flags.push(("s", c.s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")));
    }
    if let Some(v) = c.seed {
        flags.push(("seed", v.to_string()));
    }
    if let Some(v) = &c.format {
        flags.push(("format", v.clone()));
    }
    if let Some(v) = &c.out {
        flags.push(("out", v.display().to_string()));
    }
    for (k, v) in extra.into_iter().chain(flags) {
        cfg.set(k, &v)?;
    }
    Ok((sub, cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = config(&cli).and_then(|(sub, cfg)| {
        let report = run(sub, &cfg)?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let text = report.render(&format!("unix:{stamp}"));
        match &cfg.output_path {
            Some(p) => write_atomic(p, &text)?,
            None => print!("{text}"),
        }
        Ok(report)
    });
    match outcome {
        Ok(report) if report.pass() => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!("su2pd {}: {} check(s) failed", report.subcommand.name(), report.failures().len());
            for f in report.failures() {
                eprintln!("  FAIL {}", f.csv());
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("su2pd: error: {e}");
            ExitCode::from(2)
        }
    }
}
