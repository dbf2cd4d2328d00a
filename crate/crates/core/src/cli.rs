//! Batch front-end: flag/config parsing, sweep execution, and
//! deterministic CSV/JSON/SVG emission with a digest manifest.
//!
//! Identical configs produce byte-identical data files: fixed summation
//! order, fixed float formatting (17 significant digits, LF endings).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dqpt::{
    critical_modes, fisher_zeros, rate_function, winding_number, QuenchSpec, TimeGrid,
};
use crate::ssh::{bloch_vector, classify_phase, MomentumGrid, SshParams};

/// Errors surfaced by the CLI layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Module(#[from] crate::Error),
}

/// Subcommand selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    PhaseDiagram,
    Spectrum,
    Quench,
    FisherZeros,
    Winding,
    Critical,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::PhaseDiagram => "phase-diagram",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Quench => "quench",
            CommandKind::FisherZeros => "fisher-zeros",
            CommandKind::Winding => "winding",
            CommandKind::Critical => "critical",
        }
    }

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "phase-diagram" => CommandKind::PhaseDiagram,
            "spectrum" => CommandKind::Spectrum,
            "quench" => CommandKind::Quench,
            "fisher-zeros" => CommandKind::FisherZeros,
            "winding" => CommandKind::Winding,
            "critical" => CommandKind::Critical,
            other => return Err(CliError::Parse(format!("unknown command `{other}`"))),
        })
    }
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            "svg" => OutputFormat::Svg,
            other => return Err(CliError::Parse(format!("unknown format `{other}`"))),
        })
    }

    fn ext(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Svg => "svg",
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub q: f64,
    pub eta: f64,
    pub qf: f64,
    pub etaf: f64,
    /// Momentum samples M.
    pub kpoints: usize,
    /// Time samples T.
    pub tpoints: usize,
    pub tmax: f64,
    /// Fisher-zero branch l.
    pub branch: i64,
    pub out: PathBuf,
    pub format: OutputFormat,
}

#[derive(Parser, Debug)]
#[command(
    name = "nhssh",
    disable_help_subcommand = true,
    about = "Non-Hermitian SSH quench analysis: phase diagrams, spectra, \
             Fisher zeros, rate functions, and dynamical winding numbers"
)]
struct RawArgs {
    /// One of: phase-diagram, spectrum, quench, fisher-zeros, winding, critical
    command: String,
    /// Pre-quench hopping ratio J2/J1
    #[arg(long)]
    q: Option<f64>,
    /// Pre-quench gain/loss mu/J1
    #[arg(long)]
    eta: Option<f64>,
    /// Post-quench hopping ratio (defaults to --q: no quench)
    #[arg(long)]
    qf: Option<f64>,
    /// Post-quench gain/loss (defaults to --eta)
    #[arg(long)]
    etaf: Option<f64>,
    /// Momentum samples
    #[arg(long)]
    kpoints: Option<usize>,
    /// Time samples
    #[arg(long)]
    tpoints: Option<usize>,
    /// Final time (units 1/J1)
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Fisher-zero branch index l
    #[arg(long)]
    branch: Option<i64>,
    /// Output file (default: <command>.<format>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json | svg
    #[arg(long)]
    format: Option<String>,
    /// key=value config file; flags override file values override defaults
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default)]
struct FileValues {
    q: Option<f64>,
    eta: Option<f64>,
    qf: Option<f64>,
    etaf: Option<f64>,
    kpoints: Option<usize>,
    tpoints: Option<usize>,
    tmax: Option<f64>,
    branch: Option<i64>,
    out: Option<PathBuf>,
    format: Option<String>,
}

fn parse_file_values(text: &str) -> Result<FileValues, CliError> {
    let mut v = FileValues::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, val) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("line {}: expected key=value", lineno + 1)))?;
        let (key, val) = (key.trim(), val.trim());
        let bad = |e: &dyn std::fmt::Display| {
            CliError::Parse(format!("line {}: {key}: {e}", lineno + 1))
        };
        match key {
            "q" => v.q = Some(val.parse().map_err(|e| bad(&e))?),
            "eta" => v.eta = Some(val.parse().map_err(|e| bad(&e))?),
            "qf" => v.qf = Some(val.parse().map_err(|e| bad(&e))?),
            "etaf" => v.etaf = Some(val.parse().map_err(|e| bad(&e))?),
            "kpoints" => v.kpoints = Some(val.parse().map_err(|e| bad(&e))?),
            "tpoints" => v.tpoints = Some(val.parse().map_err(|e| bad(&e))?),
            "tmax" => v.tmax = Some(val.parse().map_err(|e| bad(&e))?),
            "branch" => v.branch = Some(val.parse().map_err(|e| bad(&e))?),
            "out" => v.out = Some(PathBuf::from(val)),
            "format" => v.format = Some(val.to_string()),
            other => return Err(CliError::Parse(format!("unknown key `{other}`"))),
        }
    }
    Ok(v)
}

/// Parse command-line arguments (after the binary name) into a fully
/// resolved config: flags override config-file values override defaults
/// (M = 2000, T = 2000, t_max = 10, l = 0).
pub fn parse_config(args: &[String]) -> Result<ExperimentConfig, CliError> {
    if args.is_empty() {
        return Err(CliError::Parse("no command given".into()));
    }
    let raw = RawArgs::try_parse_from(std::iter::once("nhssh".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let command = CommandKind::from_str(&raw.command)?;
    let file = match &raw.config {
        Some(path) => parse_file_values(&std::fs::read_to_string(path)?)?,
        None => FileValues::default(),
    };
    let q = raw.q.or(file.q).unwrap_or(0.5);
    let eta = raw.eta.or(file.eta).unwrap_or(0.0);
    let format = match raw.format.or(file.format) {
        Some(s) => OutputFormat::from_str(&s)?,
        None => OutputFormat::Csv,
    };
    let config = ExperimentConfig {
        command,
        q,
        eta,
        qf: raw.qf.or(file.qf).unwrap_or(q),
        etaf: raw.etaf.or(file.etaf).unwrap_or(eta),
        kpoints: raw.kpoints.or(file.kpoints).unwrap_or(2000),
        tpoints: raw.tpoints.or(file.tpoints).unwrap_or(2000),
        tmax: raw.tmax.or(file.tmax).unwrap_or(10.0),
        branch: raw.branch.or(file.branch).unwrap_or(0),
        out: raw
            .out
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from(format!("{}.{}", command.as_str(), format.ext()))),
        format,
    };
    validate(&config)?;
    Ok(config)
}

fn validate(c: &ExperimentConfig) -> Result<(), CliError> {
    let finite = [c.q, c.eta, c.qf, c.etaf, c.tmax];
    if finite.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Validation("parameters must be finite".into()));
    }
    if c.kpoints < 16 {
        return Err(CliError::Validation(format!("kpoints = {} < 16", c.kpoints)));
    }
    if c.tpoints < 16 {
        return Err(CliError::Validation(format!("tpoints = {} < 16", c.tpoints)));
    }
    if c.tmax <= 0.0 {
        return Err(CliError::Validation(format!("tmax = {} must be > 0", c.tmax)));
    }
    if c.branch < 0 {
        return Err(CliError::Validation(format!("branch = {} must be >= 0", c.branch)));
    }
    Ok(())
}

/// Render a config back into the flag form accepted by [`parse_config`].
pub fn render(c: &ExperimentConfig) -> Vec<String> {
    let mut v = vec![c.command.as_str().to_string()];
    let mut push = |flag: &str, val: String| {
        v.push(format!("--{flag}"));
        v.push(val);
    };
    push("q", fmt_f(c.q));
    push("eta", fmt_f(c.eta));
    push("qf", fmt_f(c.qf));
    push("etaf", fmt_f(c.etaf));
    push("kpoints", c.kpoints.to_string());
    push("tpoints", c.tpoints.to_string());
    push("tmax", fmt_f(c.tmax));
    push("branch", c.branch.to_string());
    push("out", c.out.display().to_string());
    push("format", c.format.ext().to_string());
    v
}

/// Run manifest: what was computed and the digests of what was written.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultManifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// A rectangular result table: header plus rows of preformatted cells.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    /// (x, y) column indices used for SVG polylines.
    plot: Option<(usize, usize)>,
}

/// 17 significant digits, locale-independent.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Execute a resolved config: compute, write the data file and the
/// manifest (`<out>.manifest.json`), and return the manifest.
pub fn run(config: &ExperimentConfig) -> Result<ResultManifest, CliError> {
    let start = Instant::now();
    let table = compute(config)?;
    let payload = match config.format {
        OutputFormat::Csv => to_csv(&table),
        OutputFormat::Json => to_json(&table),
        OutputFormat::Svg => to_svg(&table, config.command.as_str()),
    };
    std::fs::write(&config.out, payload.as_bytes())?;
    let digest = sha256_file(&config.out)?;
    let mut manifest = ResultManifest {
        command: config.command.as_str().to_string(),
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: vec![OutputRecord {
            path: config.out.display().to_string(),
            sha256: digest,
        }],
    };
    let manifest_path = manifest_path(&config.out);
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serialization"),
    )?;
    manifest.outputs.push(OutputRecord {
        path: manifest_path.display().to_string(),
        sha256: String::new(), // the manifest cannot contain its own digest
    });
    Ok(manifest)
}

/// `<out>.manifest.json` next to the data file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        write!(s, "{b:02x}").unwrap();
    }
    Ok(s)
}

fn quench_spec(c: &ExperimentConfig, midpoint: bool) -> QuenchSpec {
    QuenchSpec {
        initial: SshParams::new(c.q, c.eta),
        final_: SshParams::new(c.qf, c.etaf),
        grid: if midpoint {
            MomentumGrid::midpoint(c.kpoints)
        } else {
            MomentumGrid::inclusive(c.kpoints)
        },
        times: TimeGrid::uniform(c.tmax, c.tpoints),
    }
}

fn compute(c: &ExperimentConfig) -> Result<Table, CliError> {
    match c.command {
        CommandKind::PhaseDiagram => {
            // raster over q in [0,3], eta in [0,2]; resolution capped so the
            // default kpoints=2000 does not produce multi-million-row files
            let n = c.kpoints.min(161);
            let mut rows = Vec::with_capacity(n * n);
            for je in 0..n {
                let eta = 2.0 * je as f64 / (n - 1) as f64;
                for jq in 0..n {
                    let q = 3.0 * jq as f64 / (n - 1) as f64;
                    let label = classify_phase(SshParams::new(q, eta));
                    rows.push(vec![fmt_f(q), fmt_f(eta), format!("{label:?}")]);
                }
            }
            Ok(Table { columns: vec!["q", "eta", "label"], rows, plot: None })
        }
        CommandKind::Spectrum => {
            let p = SshParams::new(c.q, c.eta);
            let grid = MomentumGrid::inclusive(c.kpoints);
            let rows = grid
                .ks()
                .iter()
                .map(|&k| {
                    let d = bloch_vector(p, k).d;
                    vec![fmt_f(k), fmt_f(d.re), fmt_f(d.im), fmt_f(-d.re), fmt_f(-d.im)]
                })
                .collect();
            Ok(Table {
                columns: vec!["k", "re_e_plus", "im_e_plus", "re_e_minus", "im_e_minus"],
                rows,
                plot: Some((0, 1)),
            })
        }
        CommandKind::Quench => {
            let spec = quench_spec(c, true);
            let r = rate_function(&spec)?;
            let rows = (0..r.times.len())
                .map(|j| vec![fmt_f(r.times[j]), fmt_f(r.re_r[j]), fmt_f(r.im_r[j])])
                .collect();
            Ok(Table { columns: vec!["t", "re_r", "im_r"], rows, plot: Some((0, 1)) })
        }
        CommandKind::FisherZeros => {
            let spec = quench_spec(c, true);
            let curve = fisher_zeros(&spec, c.branch)?;
            let rows = curve
                .samples
                .iter()
                .map(|&(k, z)| vec![fmt_f(k), fmt_f(z.re), fmt_f(z.im)])
                .collect();
            Ok(Table { columns: vec!["k", "re_z", "im_z"], rows, plot: Some((1, 2)) })
        }
        CommandKind::Winding => {
            let spec = quench_spec(c, true);
            let w = winding_number(&spec)?;
            let rows = (0..w.times.len())
                .map(|j| {
                    vec![
                        fmt_f(w.times[j]),
                        fmt_f(w.re_nu[j]),
                        if w.flags[j] { "1".into() } else { "0".into() },
                    ]
                })
                .collect();
            Ok(Table { columns: vec!["t", "re_nu", "valid"], rows, plot: Some((0, 1)) })
        }
        CommandKind::Critical => {
            let spec = quench_spec(c, true);
            let cs = critical_modes(&spec);
            let mut rows = Vec::new();
            for &kc in &cs.modes {
                rows.push(vec!["mode".into(), fmt_f(kc), "0".into(), fmt_f(0.0)]);
            }
            for &(kc, l, t) in &cs.times {
                rows.push(vec!["time".into(), fmt_f(kc), l.to_string(), fmt_f(t)]);
            }
            if let Some((lo, hi)) = cs.aperiodic_band {
                rows.push(vec!["band".into(), fmt_f(lo), "0".into(), fmt_f(hi)]);
            }
            Ok(Table { columns: vec!["kind", "a", "l", "b"], rows, plot: None })
        }
    }
}

fn to_csv(t: &Table) -> String {
    let mut s = String::new();
    s.push_str(&t.columns.join(","));
    s.push('\n');
    for row in &t.rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn to_json(t: &Table) -> String {
    // cells stay preformatted strings so CSV and JSON agree digit-for-digit
    let rows: Vec<serde_json::Value> = t
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, serde_json::Value> = t
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.to_string(), serde_json::Value::String(v.clone())))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&serde_json::json!({
        "columns": t.columns,
        "rows": rows,
    }))
    .expect("json serialization");
    out.push('\n');
    out
}

/// Minimal SVG 1.1 line plot: one polyline, axes, five ticks per axis.
fn to_svg(t: &Table, title: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 30.0;
    const MB: f64 = 50.0;

    let (xi, yi) = t.plot.unwrap_or((0, 1));
    let pts: Vec<(f64, f64)> = t
        .rows
        .iter()
        .filter_map(|r| {
            let x: f64 = r.get(xi)?.parse().ok()?;
            let y: f64 = r.get(yi)?.parse().ok()?;
            (x.is_finite() && y.is_finite()).then_some((x, y))
        })
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if (x1 - x0).abs() < 1e-300 {
        x1 = x0 + 1.0;
    }
    if (y1 - y0).abs() < 1e-300 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n",
        W / 2.0
    ));
    s.push_str(&format!(
        "  <rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"black\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));
    for j in 0..=4 {
        let fx = x0 + (x1 - x0) * j as f64 / 4.0;
        let fy = y0 + (y1 - y0) * j as f64 / 4.0;
        let px = sx(fx);
        let py = sy(fy);
        s.push_str(&format!(
            "  <line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 6.0
        ));
        s.push_str(&format!(
            "  <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
             font-family=\"sans-serif\" font-size=\"11\">{fx:.4}</text>\n",
            H - MB + 20.0
        ));
        s.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{ML:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            ML - 6.0
        ));
        s.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" \
             font-family=\"sans-serif\" font-size=\"11\">{fy:.4}</text>\n",
            ML - 10.0,
            py + 4.0
        ));
    }
    if !pts.is_empty() {
        let mut poly = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            if j > 0 {
                poly.push(' ');
            }
            write!(poly, "{:.3},{:.3}", sx(x), sy(y)).unwrap();
        }
        s.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"{poly}\"/>\n"
        ));
    }
    s.push_str("</svg>\n");
    s
}
