//! Command-line front end.
//!
//! Each subcommand writes a CSV (to `--out` or standard output) and a run
//! manifest `{command, config, warnings, timing_ms}` next to it as
//! `<out>.manifest.json`. `matrix-symbol --out dir/sym.csv` writes one
//! `s,re,im` file per entry (`dir/sym_1_2.csv`, ...). Failures print one JSON line on standard error and
//! exit with 2 for usage errors or 1 for numerical ones.

use crate::calculus::{
    boyd_power_kernel, calderon_fractional_kernel, fractional_kernel_with, holomorphic_kernel_with, CalculusSettings,
    HoloFunctionSpec,
};
use crate::error::{Error, Result};
use crate::grid::{read_csv, write_csv_to, Axis, Diagnostics, Grid, SampledFunction};
use crate::model::{load_model, presets, KernelSpec, MatrixFamily};
use crate::operator::{apply_iterated_with, half_line_grid, OperatorSpec};
use crate::symbol::{matrix_symbol_with, scalar_symbol_with, spectrum_estimate, SymbolMethod, SymbolSettings};
use crate::verify::{gaussian, run_suite, VerifyOptions, SUITE_NAMES};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser, Serialize)]
#[command(name = "hausdorff", version, about = "Matrix symbols and functional calculus of Hausdorff operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Scalar symbol on an s-grid (positive-definite families).
    Symbol(SymbolArgs),
    /// All entries of the matrix symbol.
    MatrixSymbol(SymbolArgs),
    /// Applies the operator (or its l-th power) to sampled data.
    Apply(ApplyArgs),
    /// Kernel of the l-th power.
    Power(PowerArgs),
    /// Kernel of F(H) for a holomorphic F with F(0) = 0.
    Function(FunctionArgs),
    /// Kernel of a real fractional power.
    Fracpow(FracpowArgs),
    /// Sampled spectrum of a scalar symbol.
    Spectrum(SymbolArgs),
    /// Runs a verification suite and writes its JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Built-in kernel and family.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Boyd exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// JSON definition file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SGridArgs {
    #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 4001)]
    pub s_count: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TGridArgs {
    /// Log-coordinate step.
    #[arg(long)]
    pub t_step: Option<f64>,
    /// Log-coordinate half-width.
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct UGridArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub u_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub u_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub u_count: usize,
    /// Uniform instead of log-uniform u nodes.
    #[arg(long)]
    pub u_linear: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Direct,
    LogFourier,
}

#[derive(Debug, Args, Serialize)]
pub struct SymbolArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub s: SGridArgs,
    #[command(flatten)]
    pub t: TGridArgs,
    #[arg(long, value_enum, default_value = "direct")]
    pub method: MethodArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ApplyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sampled f in the module CSV format.
    #[arg(long, conflicts_with = "gaussian")]
    pub input: Option<PathBuf>,
    /// `center,width` of a Gaussian on the log grid [1e-4, 1e4] with 4096 nodes.
    #[arg(long)]
    pub gaussian: Option<String>,
    /// Number of applications.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PowerArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub l: u32,
    #[command(flatten)]
    pub u: UGridArgs,
    #[command(flatten)]
    pub t: TGridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FunctionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `poly:c0,c1,..`, `expm1`, `power:a` or `table:x:y,..`.
    #[arg(long)]
    pub function: String,
    #[command(flatten)]
    pub u: UGridArgs,
    #[command(flatten)]
    pub t: TGridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FracpowArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Exponent of the power.
    #[arg(long)]
    pub power: f64,
    /// Closed-form Calderon kernel instead of the spectral pipeline.
    #[arg(long)]
    pub closed: bool,
    #[command(flatten)]
    pub u: UGridArgs,
    #[command(flatten)]
    pub t: TGridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = crate::verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Power for the boyd-power suite.
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a Command,
    warnings: Vec<String>,
    timing_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<serde_json::Value>,
}

/// What a subcommand produced.
struct Output {
    body: Vec<u8>,
    /// Per-entry CSVs keyed by file suffix; written instead of `body` under `--out`.
    parts: Vec<(String, Vec<u8>)>,
    warnings: Vec<String>,
    result: Option<serde_json::Value>,
    failed: Option<String>,
}

impl Output {
    fn csv(body: Vec<u8>, diagnostics: Diagnostics) -> Self {
        Self {
            body,
            parts: Vec::new(),
            warnings: diagnostics.warnings,
            result: None,
            failed: None,
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            report_error("usage", first);
            return 2;
        }
    };
    match run(&cli) {
        Ok(None) => 0,
        Ok(Some(msg)) => {
            report_error("verification_failed", &msg);
            1
        }
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn report_error(kind: &str, message: &str) {
    let line = serde_json::json!({"error": kind, "message": message});
    eprintln!("{line}");
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Symbol(_) => "symbol",
        Command::MatrixSymbol(_) => "matrix-symbol",
        Command::Apply(_) => "apply",
        Command::Power(_) => "power",
        Command::Function(_) => "function",
        Command::Fracpow(_) => "fracpow",
        Command::Spectrum(_) => "spectrum",
        Command::Verify(_) => "verify",
    }
}

/// Runs a parsed command; `Ok(Some(msg))` reports a failed verification.
pub fn run(cli: &Cli) -> Result<Option<String>> {
    let start = Instant::now();
    let out = match &cli.command {
        Command::Symbol(a) => symbol(a)?,
        Command::MatrixSymbol(a) => matrix(a)?,
        Command::Apply(a) => apply(a)?,
        Command::Power(a) => power(a)?,
        Command::Function(a) => function(a)?,
        Command::Fracpow(a) => fracpow(a)?,
        Command::Spectrum(a) => spectrum(a)?,
        Command::Verify(a) => verify(a)?,
    };
    let name = command_name(&cli.command);
    let path = out_path(&cli.command);
    let mut result = out.result;
    let mut files = Vec::new();
    if let Some(path) = path {
        for (suffix, bytes) in &out.parts {
            let p = part_path(path, suffix);
            std::fs::write(&p, bytes)?;
            files.push(p.display().to_string());
        }
        if !files.is_empty() {
            result = Some(serde_json::json!({ "files": files }));
        }
    }
    let manifest = Manifest {
        command: name,
        config: &cli.command,
        warnings: out.warnings,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
        result,
    };
    match path {
        Some(path) => {
            if files.is_empty() {
                std::fs::write(path, &out.body)?;
            }
            let mut m = path.as_os_str().to_owned();
            m.push(".manifest.json");
            std::fs::write(m, serde_json::to_vec_pretty(&manifest)?)?;
        }
        None => {
            std::io::stdout().write_all(&out.body)?;
            eprintln!("{}", serde_json::to_string(&manifest)?);
        }
    }
    Ok(out.failed)
}

/// `dir/sym.csv` with suffix `1_2` becomes `dir/sym_1_2.csv`.
fn part_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn out_path(c: &Command) -> Option<&Path> {
    match c {
        Command::Symbol(a) | Command::MatrixSymbol(a) | Command::Spectrum(a) => a.out.as_deref(),
        Command::Apply(a) => a.out.as_deref(),
        Command::Power(a) => a.out.as_deref(),
        Command::Function(a) => a.out.as_deref(),
        Command::Fracpow(a) => a.out.as_deref(),
        Command::Verify(a) => a.out.as_deref(),
    }
}

impl ModelArgs {
    fn load(&self) -> Result<(KernelSpec, MatrixFamily)> {
        match (&self.preset, &self.config) {
            (Some(p), None) => presets::preset(p, self.alpha),
            (None, Some(path)) => load_model(path),
            _ => Err(Error::Config("exactly one of --preset and --config is required".into())),
        }
    }

    fn operator(&self) -> Result<OperatorSpec> {
        let (k, f) = self.load()?;
        OperatorSpec::new(k, f)
    }
}

impl SGridArgs {
    fn grid(&self, dim: usize) -> Result<Grid> {
        Grid::new(vec![Axis::uniform(self.s_min, self.s_max, self.s_count)?; dim])
    }
}

impl TGridArgs {
    fn calculus(&self) -> CalculusSettings {
        CalculusSettings {
            t_step: self.t_step,
            t_max: self.t_max,
            ..CalculusSettings::default()
        }
    }

    fn symbol(&self) -> SymbolSettings {
        let d = SymbolSettings::default();
        SymbolSettings {
            t_step: self.t_step.unwrap_or(d.t_step),
            t_max: self.t_max,
        }
    }
}

impl UGridArgs {
    fn grid(&self, dim: usize) -> Result<Grid> {
        let axis = if self.u_linear {
            Axis::uniform(self.u_min, self.u_max, self.u_count)?
        } else {
            Axis::half_line(self.u_min, self.u_max, self.u_count)?
        };
        Grid::new(vec![axis; dim])
    }
}

fn method(m: MethodArg) -> SymbolMethod {
    match m {
        MethodArg::Direct => SymbolMethod::Direct,
        MethodArg::LogFourier => SymbolMethod::LogFourier,
    }
}

fn coord_names(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=dim).map(|k| format!("{prefix}{k}")).collect()
    }
}

fn csv_bytes(f: &SampledFunction, prefix: &str) -> Result<Vec<u8>> {
    let names = coord_names(prefix, f.grid().dim());
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut body = Vec::new();
    write_csv_to(&mut body, f, &names)?;
    Ok(body)
}

fn kernel_csv(k: &KernelSpec, u: &UGridArgs, diagnostics: Diagnostics) -> Result<Output> {
    let grid = u.grid(k.dim())?;
    let values = crate::par::try_map_range(grid.len(), |i| k.evaluate(&grid.point(i)).map(|v| Complex64::new(v, 0.0)))?;
    let f = SampledFunction::new(grid, values)?;
    Ok(Output::csv(csv_bytes(&f, "u")?, diagnostics))
}

fn symbol(a: &SymbolArgs) -> Result<Output> {
    let op = a.model.operator()?;
    let mut d = Diagnostics::default();
    let phi = scalar_symbol_with(&op, &a.s.grid(op.family().dim())?, method(a.method), &a.t.symbol(), &mut d)?;
    Ok(Output::csv(csv_bytes(&phi, "s")?, d))
}

fn matrix(a: &SymbolArgs) -> Result<Output> {
    let op = a.model.operator()?;
    let dim = op.family().dim();
    let mut d = Diagnostics::default();
    let phi = matrix_symbol_with(&op, &a.s.grid(dim)?, &a.t.symbol(), &mut d)?;
    let n = phi.size();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = coord_names("s", dim);
    for i in 1..=n {
        for j in 1..=n {
            header.push(format!("re_{i}_{j}"));
            header.push(format!("im_{i}_{j}"));
        }
    }
    w.write_record(&header)?;
    for p in 0..phi.s_grid().len() {
        let m = phi.matrix_at(p);
        let mut row: Vec<String> = phi.s_grid().point(p).iter().map(|x| format!("{x:.15e}")).collect();
        for r in &m {
            for z in r {
                row.push(format!("{:.15e}", z.re));
                row.push(format!("{:.15e}", z.im));
            }
        }
        w.write_record(&row)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let mut out = Output::csv(body, d);
    for i in 1..=n {
        for j in 1..=n {
            out.parts.push((format!("{i}_{j}"), csv_bytes(phi.entry(i, j)?, "s")?));
        }
    }
    Ok(out)
}

fn parse_gaussian(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("--gaussian expects center,width, got '{text}'"));
    let (c, w) = text.split_once(',').ok_or_else(bad)?;
    let (c, w) = (c.trim().parse::<f64>().map_err(|_| bad())?, w.trim().parse::<f64>().map_err(|_| bad())?);
    if !(w > 0.0) {
        return Err(bad());
    }
    Ok((c, w))
}

fn apply(a: &ApplyArgs) -> Result<Output> {
    let op = a.model.operator()?;
    let f = match (&a.input, &a.gaussian) {
        (Some(p), None) => read_csv(p)?,
        (None, Some(g)) => {
            let (c, w) = parse_gaussian(g)?;
            gaussian(&half_line_grid(1e-4, 1e4, 4096)?, c, w)
        }
        _ => return Err(Error::Config("exactly one of --input and --gaussian is required".into())),
    };
    let grid = f.grid().clone();
    let applied = apply_iterated_with(&op, a.l, &f, &grid)?;
    let mut d = applied.diagnostics;
    if applied.accumulated_fraction > 0.0 {
        d.warn(format!("accumulated out-of-domain fraction {:.3e}", applied.accumulated_fraction));
    }
    let mut out = Output::csv(csv_bytes(&applied.result, "x")?, d);
    out.result = Some(serde_json::json!({
        "evaluations": applied.evaluations,
        "out_of_domain": applied.out_of_domain,
        "accumulated_fraction": applied.accumulated_fraction,
    }));
    Ok(out)
}

fn power(a: &PowerArgs) -> Result<Output> {
    if a.l == 0 {
        return Err(Error::InvalidArgument("--l must be at least 1".into()));
    }
    let closed = match (a.model.preset.as_deref(), &a.model.config) {
        (Some("cesaro"), None) => Some(0.0),
        (Some("boyd"), None) => Some(a.model.alpha.unwrap_or(presets::DEFAULT_BOYD_ALPHA)),
        _ => None,
    };
    let mut d = Diagnostics::default();
    let k = match closed {
        Some(alpha) => boyd_power_kernel(alpha, a.l)?,
        None => {
            let mut c = vec![0.0; a.l as usize + 1];
            c[a.l as usize] = 1.0;
            let f = HoloFunctionSpec::Polynomial { coefficients: c };
            holomorphic_kernel_with(&a.model.operator()?, &f, &a.t.calculus(), &mut d)?
        }
    };
    kernel_csv(&k, &a.u, d)
}

fn function(a: &FunctionArgs) -> Result<Output> {
    let f = HoloFunctionSpec::parse(&a.function)?;
    let mut d = Diagnostics::default();
    let k = holomorphic_kernel_with(&a.model.operator()?, &f, &a.t.calculus(), &mut d)?;
    kernel_csv(&k, &a.u, d)
}

fn fracpow(a: &FracpowArgs) -> Result<Output> {
    if a.closed {
        if a.model.preset.as_deref() != Some("calderon") {
            return Err(Error::Config("--closed is available for the calderon preset only".into()));
        }
        let grid = a.u.grid(1)?;
        let values = crate::par::try_map_range(grid.len(), |i| {
            calderon_fractional_kernel(a.power, grid.point(i)[0]).map(|v| Complex64::new(v, 0.0))
        })?;
        let f = SampledFunction::new(grid, values)?;
        return Ok(Output::csv(csv_bytes(&f, "u")?, Diagnostics::default()));
    }
    let mut d = Diagnostics::default();
    let k = fractional_kernel_with(&a.model.operator()?, a.power, &a.t.calculus(), &mut d)?;
    kernel_csv(&k, &a.u, d)
}

fn spectrum(a: &SymbolArgs) -> Result<Output> {
    let op = a.model.operator()?;
    let mut d = Diagnostics::default();
    let phi = scalar_symbol_with(&op, &a.s.grid(op.family().dim())?, method(a.method), &a.t.symbol(), &mut d)?;
    let est = spectrum_estimate(&phi);
    for w in &est.warnings {
        d.warn(w.clone());
    }
    let mut out = Output::csv(csv_bytes(&phi, "s")?, d);
    out.result = Some(serde_json::json!({ "hull": est.hull }));
    Ok(out)
}

fn verify(a: &VerifyArgs) -> Result<Output> {
    let options = VerifyOptions { seed: a.seed, l: a.l };
    let names: Vec<&str> = if a.suite == "all" { SUITE_NAMES.to_vec() } else { vec![a.suite.as_str()] };
    let reports = names.iter().map(|n| run_suite(n, &options)).collect::<Result<Vec<_>>>()?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.suite.as_str()).collect();
    let body = if reports.len() == 1 {
        serde_json::to_vec_pretty(&reports[0])?
    } else {
        serde_json::to_vec_pretty(&reports)?
    };
    let mut body = body;
    body.push(b'\n');
    Ok(Output {
        body,
        parts: Vec::new(),
        warnings: Vec::new(),
        result: Some(serde_json::json!({ "seed": a.seed, "pass": failed.is_empty() })),
        failed: (!failed.is_empty()).then(|| format!("failed suites: {}", failed.join(", "))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_symbol_flags() {
        let cli = Cli::try_parse_from([
            "hausdorff", "symbol", "--preset", "calderon", "--s-min", "-5", "--s-max", "5", "--s-count", "11",
        ])
        .unwrap();
        let Command::Symbol(a) = &cli.command else { panic!() };
        assert_eq!((a.s.s_min, a.s.s_count), (-5.0, 11));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(execute(["hausdorff", "symbol", "--preset", "nosuch"]), 2);
        assert_eq!(execute(["hausdorff", "frobnicate"]), 2);
        assert_eq!(execute(["hausdorff", "symbol"]), 2);
    }

    #[test]
    fn gaussian_argument() {
        assert_eq!(parse_gaussian("2, 0.3").unwrap(), (2.0, 0.3));
        assert!(parse_gaussian("2").is_err());
        assert!(parse_gaussian("2,-1").is_err());
    }
}
