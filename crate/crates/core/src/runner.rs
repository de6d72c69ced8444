//! Batch experiment runner behind the `su2pd` binary: configuration, one report
//! per subcommand, and deterministic CSV/JSON rendering.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::paradiff::probes::{self, ProbeConfig, ProbeRow};
use crate::spin::Spin;
use crate::suite::{self, Check};

/// Parameter of the constrained symbol in the Stein probe.
pub const STEIN_DELTA: f64 = 0.125;
/// Cut-off parameters scanned by `cutoff-sweep`.
pub const SWEEP_DELTAS: [f64; 4] = [0.25, 0.125, 0.0625, 0.03125];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown output format '{s}' (csv|json)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Selftest,
    Fourier,
    Lp,
    Localize,
    Weyl,
    Taylor,
    Symbols,
    Paraproduct,
    Bony,
    Compose,
    Adjoint,
    Commutator,
    Opnorm,
    CutoffSweep,
}

impl Subcommand {
    pub const ALL: [Subcommand; 14] = [
        Subcommand::Selftest,
        Subcommand::Fourier,
        Subcommand::Lp,
        Subcommand::Localize,
        Subcommand::Weyl,
        Subcommand::Taylor,
        Subcommand::Symbols,
        Subcommand::Paraproduct,
        Subcommand::Bony,
        Subcommand::Compose,
        Subcommand::Adjoint,
        Subcommand::Commutator,
        Subcommand::Opnorm,
        Subcommand::CutoffSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Selftest => "selftest",
            Subcommand::Fourier => "fourier",
            Subcommand::Lp => "lp",
            Subcommand::Localize => "localize",
            Subcommand::Weyl => "weyl",
            Subcommand::Taylor => "taylor",
            Subcommand::Symbols => "symbols",
            Subcommand::Paraproduct => "paraproduct",
            Subcommand::Bony => "bony",
            Subcommand::Compose => "compose",
            Subcommand::Adjoint => "adjoint",
            Subcommand::Commutator => "commutator",
            Subcommand::Opnorm => "opnorm",
            Subcommand::CutoffSweep => "cutoff-sweep",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Subcommand> {
        Subcommand::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Config(format!("unknown subcommand '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub bandlimit: Spin,
    pub delta: f64,
    pub gap: f64,
    pub sobolev_s: Vec<f64>,
    pub seed: u64,
    pub output_format: Format,
    pub output_path: Option<PathBuf>,
    /// Subcommand-specific parameters (`j1`, `j2`, `tmax`).
    pub j1: Spin,
    pub j2: Spin,
    pub tmax: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bandlimit: Spin::from_twice(16),
            delta: 1.0 / 16.0,
            gap: 8.0,
            sobolev_s: vec![0.0],
            seed: 7,
            output_format: Format::Csv,
            output_path: None,
            j1: Spin::HALF,
            j2: Spin::HALF,
            tmax: 20.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
}

fn spin(key: &str, v: &str) -> Result<Spin> {
    Spin::new(parse(key, v)?)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "bandlimit" => self.bandlimit = spin(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "gap" => self.gap = parse(key, value)?,
            "s" | "sobolev_s" => self.sobolev_s = value.split(',').map(|x| parse(key, x)).collect::<Result<_>>()?,
            "seed" => self.seed = parse(key, value)?,
            "format" | "output_format" => self.output_format = value.trim().parse()?,
            "out" | "output_path" => self.output_path = Some(PathBuf::from(value.trim())),
            "j1" => self.j1 = spin(key, value)?,
            "j2" => self.j2 = spin(key, value)?,
            "tmax" => self.tmax = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::Config(format!("delta must lie in (0, 1/2), got {}", self.delta)));
        }
        if !(self.gap >= 1.0) {
            return Err(Error::Config(format!("gap must be ≥ 1, got {}", self.gap)));
        }
        if self.sobolev_s.is_empty() || self.sobolev_s.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("need at least one finite Sobolev index".into()));
        }
        Ok(())
    }

    /// One-line echo of every parameter, as written into output headers.
    pub fn echo(&self) -> String {
        let s: Vec<String> = self.sobolev_s.iter().map(|x| x.to_string()).collect();
        format!(
            "bandlimit={} delta={} gap={} s={} seed={} format={} out={} j1={} j2={} tmax={}",
            self.bandlimit,
            self.delta,
            self.gap,
            s.join(","),
            self.seed,
            match self.output_format {
                Format::Csv => "csv",
                Format::Json => "json",
            },
            self.output_path.as_ref().map_or("-".to_string(), |p| p.display().to_string()),
            self.j1,
            self.j2,
            self.tmax
        )
    }

    fn probe_config(&self) -> ProbeConfig {
        let b = self.bandlimit.max(Spin::HALF);
        ProbeConfig {
            delta: self.delta,
            gap: self.gap,
            s_values: self.sobolev_s.clone(),
            bands: [b, Spin::from_twice(2 * b.two_j())],
            seed: self.seed,
            ..ProbeConfig::default()
        }
    }
}

/// A finished run: a table plus the checks that decide the exit status.
#[derive(Clone, Debug)]
pub struct Report {
    pub subcommand: Subcommand,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub checks: Vec<Check>,
}

impl Report {
    fn from_checks(subcommand: Subcommand, config: &RunConfig, checks: Vec<Check>) -> Report {
        let rows = checks.iter().map(|c| vec![json!(c.name), num(c.measured), num(c.lo), num(c.hi), json!(c.pass)]).collect();
        Report { subcommand, config: config.clone(), columns: cols(Check::HEADER), rows, checks }
    }

    fn from_probes(subcommand: Subcommand, config: &RunConfig, probe_rows: Vec<ProbeRow>, mut extra: Vec<Check>) -> Report {
        let rows = probe_rows
            .iter()
            .map(|r| {
                vec![
                    json!(r.probe),
                    num(r.band),
                    num(r.s),
                    num(r.m),
                    num(r.m_prime),
                    num(r.r),
                    num(r.delta),
                    num(r.gap),
                    num(r.measured_norm),
                    r.pass_bound.map_or(Value::Null, num),
                    r.pass.map_or(Value::Null, |p| json!(p)),
                ]
            })
            .collect();
        let mut checks = suite::probe_checks(&probe_rows);
        checks.append(&mut extra);
        Report { subcommand, config: config.clone(), columns: cols(ProbeRow::HEADER), rows, checks }
    }

    pub fn pass(&self) -> bool {
        suite::all_pass(&self.checks)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    fn header(&self, generated: &str) -> Vec<String> {
        vec![format!("su2pd {}", self.subcommand.name()), format!("config: {}", self.config.echo()), format!("generated: {generated}")]
    }

    /// The body without the header (byte-identical for identical config and seed).
    pub fn body(&self) -> String {
        match self.config.output_format {
            Format::Csv => {
                let mut out = self.columns.join(",") + "\n";
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(cell).collect();
                    out += &cells.join(",");
                    out.push('\n');
                }
                if self.columns != cols(Check::HEADER) {
                    for c in &self.checks {
                        let _ = writeln!(out, "# check {}", c.csv());
                    }
                }
                out
            }
            Format::Json => {
                let records: Vec<Value> =
                    self.rows.iter().map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect())).collect();
                let v = json!({ "records": records, "checks": self.checks, "pass": self.pass() });
                serde_json::to_string_pretty(&v).expect("serializable") + "\n"
            }
        }
    }

    pub fn render(&self, generated: &str) -> String {
        match self.config.output_format {
            Format::Csv => self.header(generated).iter().map(|h| format!("# {h}\n")).collect::<String>() + &self.body(),
            Format::Json => {
                let body: Value = serde_json::from_str(&self.body()).expect("own output");
                let v = json!({
                    "subcommand": self.subcommand.name(),
                    "config": self.config.echo(),
                    "generated": generated,
                    "records": body["records"],
                    "checks": body["checks"],
                    "pass": body["pass"],
                });
                serde_json::to_string_pretty(&v).expect("serializable") + "\n"
            }
        }
    }
}

fn cols(header: &str) -> Vec<String> {
    header.split(',').map(String::from).collect()
}

// non-finite values have no JSON number form; they become strings
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Runs one subcommand.
pub fn run(sub: Subcommand, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let b = cfg.bandlimit;
    let seed = cfg.seed;
    let checks = |c: Vec<Check>| Ok(Report::from_checks(sub, cfg, c));
    match sub {
        Subcommand::Selftest => {
            let mut c = suite::peter_weyl(b.max(Spin::HALF), 50, seed)?;
            c.extend(suite::representations(seed));
            c.extend(suite::leibniz(1000, seed));
            c.extend(suite::localization(b.min(Spin::from_twice(8)), seed)?);
            checks(c)
        }
        Subcommand::Fourier => checks(suite::peter_weyl(b.max(Spin::HALF), 50, seed)?),
        Subcommand::Lp => checks(suite::littlewood_paley(b, &cfg.sobolev_s, seed)?),
        Subcommand::Localize => {
            let rep = suite::localize(cfg.j1, cfg.j2, seed)?;
            let expected: Vec<Spin> = crate::structure::product_support(cfg.j1, cfg.j2);
            let support: Vec<String> = rep.support.iter().map(|j| j.to_string()).collect();
            let c = vec![
                Check::at_most("outside_triangle_mass", rep.outside_mass, 1e-10),
                Check::flag("support_within_triangle", rep.support.iter().all(|j| expected.contains(j))),
            ];
            let columns = cols("j1,j2,support,inside_mass,outside_mass,size_ratio");
            let row = vec![json!(cfg.j1.to_string()), json!(cfg.j2.to_string()), json!(support.join(";")), num(rep.inside_mass), num(rep.outside_mass), num(rep.size_ratio)];
            Ok(Report { subcommand: sub, config: cfg.clone(), columns, rows: vec![row], checks: c })
        }
        Subcommand::Weyl => {
            let rows = suite::weyl_table(1.0, cfg.tmax.max(1.0), 0.25).into_iter().map(|(t, c, r)| vec![num(t), num(c), num(r)]).collect();
            Ok(Report { subcommand: sub, config: cfg.clone(), columns: cols("t,count,count_over_t3"), rows, checks: suite::weyl(cfg.tmax) })
        }
        Subcommand::Taylor => checks(suite::taylor(seed)?),
        Subcommand::Symbols => {
            let mut c = suite::multiplier_orders();
            c.extend(suite::quasi_homogeneous(seed)?);
            c.extend(suite::spectral_condition(b, cfg.delta, cfg.gap, seed)?);
            checks(c)
        }
        Subcommand::Paraproduct => {
            let rows = probes::paraproduct_probe(&cfg.probe_config())?;
            Ok(Report::from_probes(sub, cfg, rows, suite::para_reconstruction(b.min(Spin::from_twice(12)), cfg.gap, seed)?))
        }
        Subcommand::Bony => checks(suite::bony(b, &[2, 3], seed)?),
        Subcommand::Compose => Ok(Report::from_probes(sub, cfg, probes::composition_probe(&cfg.probe_config())?, vec![])),
        Subcommand::Adjoint => Ok(Report::from_probes(sub, cfg, probes::adjoint_probe(&cfg.probe_config())?, vec![])),
        Subcommand::Commutator => Ok(Report::from_probes(sub, cfg, probes::commutator_probe(&cfg.probe_config())?, vec![])),
        Subcommand::Opnorm => {
            let pc = ProbeConfig { s_values: vec![-1.0], ..cfg.probe_config() };
            Ok(Report::from_probes(sub, cfg, probes::stein_probe(&pc, STEIN_DELTA)?, vec![]))
        }
        Subcommand::CutoffSweep => {
            let pc = cfg.probe_config();
            let mut rows = probes::cutoff_freedom_probe(&pc, (cfg.delta, 2.0 * cfg.delta))?;
            rows.extend(probes::regularization_probe(&pc)?);
            // the sweep is diagnostic: its verdicts are reported but do not set the exit status
            let sweep = probes::delta_sweep(&pc, &SWEEP_DELTAS)?;
            let mut report = Report::from_probes(sub, cfg, rows, vec![]);
            for r in &sweep {
                report.rows.push(vec![
                    json!(r.probe),
                    num(r.band),
                    num(r.s),
                    num(r.m),
                    num(r.m_prime),
                    num(r.r),
                    num(r.delta),
                    num(r.gap),
                    num(r.measured_norm),
                    r.pass_bound.map_or(Value::Null, num),
                    r.pass.map_or(Value::Null, |p| json!(p)),
                ]);
            }
            Ok(report)
        }
    }
}
