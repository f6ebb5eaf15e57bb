//! Command-line front end: configuration, sweep execution and output files.
//!
//! Settings come from four layers, later ones winning: built-in defaults, a
//! figure preset (`--plot-preset`), a `key = value` file (`--config`), and
//! command-line flags. File keys are the flag names without the dashes.

pub mod output;
pub mod plot;
pub mod presets;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Arg, ArgAction, Command};
use serde::{Deserialize, Serialize};

use crate::model::{Convention, ModelParams, Spin};
use crate::odeint::IntegratorConfig;
use crate::oracle::DEFAULT_SEGMENTS;
use crate::sweep::{
    convergence_check, peak_analysis, run_sweep, Axis, ConvergenceReport, PeakAnalysis, SolverChoice, SweepPlan,
    SweepResult, DEFAULT_PROMINENCE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_ALL_FAILED: i32 = 4;

/// Worker-count cap read from the environment.
pub const THREADS_ENV: &str = "CC_TUNNEL_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    Info(String),
    Usage(String),
    Io(String),
    AllFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::AllFailed(_) => EXIT_ALL_FAILED,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Info(s) | CliError::Usage(s) | CliError::Io(s) | CliError::AllFailed(s) => f.write_str(s),
        }
    }
}

impl std::error::Error for CliError {}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Everything one sweep needs. Serializes losslessly; the JSON output embeds
/// it so a run can be repeated exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    pub integrator: IntegratorConfig,
    pub axis: Axis,
    pub start: f64,
    pub span: f64,
    pub points: usize,
    pub energy: Option<f64>,
    pub incident_channel: usize,
    pub incident_spin: Spin,
    pub solver: SolverChoice,
    pub segments: usize,
    pub convergence_check: bool,
    pub prominence: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub plot_preset: Option<String>,
    pub panel: Option<String>,
}

impl RunConfig {
    pub fn plan(&self, threads: Option<usize>) -> SweepPlan {
        SweepPlan {
            params: self.params.clone(),
            axis: self.axis,
            start: self.start,
            span: self.span,
            points: self.points,
            energy: self.energy,
            incident_channel: self.incident_channel,
            incident_spin: self.incident_spin,
            solver: self.solver,
            segments: self.segments,
            convergence_check: self.convergence_check,
            threads,
        }
    }

    /// Recovers the configuration embedded in a JSON result file.
    pub fn from_json_output(text: &str) -> Result<RunConfig, CliError> {
        #[derive(Deserialize)]
        struct Head {
            config: RunConfig,
        }
        serde_json::from_str::<Head>(text)
            .map(|h| h.config)
            .map_err(|e| usage(format!("cannot read configuration from JSON: {e}")))
    }
}

/// Keys accepted as `--key VALUE` flags and as `key = value` file lines.
pub const KEYS: &[(&str, &str)] = &[
    ("a", "barrier width"),
    ("b", "half-width of the field region"),
    ("d", "well width"),
    ("l", "mean particle separation"),
    ("u", "field strength"),
    ("v0", "barrier height"),
    ("mass", "particle mass"),
    ("hbar", "reduced Planck constant"),
    ("n-max", "highest internal mode considered"),
    ("convention", "paper-code or derived"),
    ("axis", "swept quantity: E, b or u"),
    ("start", "grid offset"),
    ("span", "grid length; points sit at start + i*span/points"),
    ("points", "number of grid points"),
    ("energy", "(E - eps1)/V0 for b and u sweeps"),
    ("incident-channel", "incident internal mode (1-based)"),
    ("incident-spin", "up or down"),
    ("solver", "vra, tm or both"),
    ("segments", "transfer-matrix segment count"),
    ("rtol", "relative tolerance"),
    ("atol", "absolute tolerance"),
    ("max-step", "largest integration step"),
    ("max-evals", "right-hand-side evaluation budget per point"),
    ("convergence-check", "rerun every 10th point with max-step/5"),
    ("prominence", "minimum peak prominence"),
    ("output", "output file (stdout when absent)"),
    ("format", "csv or json"),
    ("plot-preset", "named parameter preset; also writes a gnuplot script"),
];

fn command() -> Command {
    let mut cmd = Command::new("cc-tunnel")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Spin-resolved transmission of a bound pair through a barrier with a localized field")
        .after_help(format!(
            "Exit codes: 0 success, 2 usage or configuration, 3 I/O, 4 every grid point failed.\n\
             {THREADS_ENV} caps the worker count.\nPresets: {}",
            presets::PRESET_NAMES.join(", ")
        ))
        .arg(Arg::new("config").long("config").value_name("FILE").help("key = value settings file"));
    for &(key, help) in KEYS {
        let arg = Arg::new(key).long(key).help(help);
        let arg = if key == "convergence-check" {
            arg.action(ArgAction::SetTrue)
        } else {
            arg.value_name("VALUE").num_args(1).allow_negative_numbers(true)
        };
        cmd = cmd.arg(arg);
    }
    cmd
}

/// Reads a `key = value` file. `#` starts a comment.
pub fn parse_config_file(text: &str, origin: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("{origin}:{}: expected `key = value`, got `{line}`", n + 1)));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(usage(format!("{origin}:{}: unknown key `{key}`", n + 1)));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Settings under construction; `axis` and `span` have no default.
struct Draft {
    cfg: RunConfig,
    axis: Option<Axis>,
    span: Option<f64>,
}

impl Draft {
    fn new() -> Self {
        let cfg = RunConfig {
            params: ModelParams::default(),
            integrator: IntegratorConfig::default(),
            axis: Axis::Energy,
            start: 0.0,
            span: f64::NAN,
            points: 800,
            energy: None,
            incident_channel: 1,
            incident_spin: Spin::Up,
            solver: SolverChoice::Vra,
            segments: DEFAULT_SEGMENTS,
            convergence_check: false,
            prominence: DEFAULT_PROMINENCE,
            output: None,
            format: Format::Csv,
            plot_preset: None,
            panel: None,
        };
        Draft { cfg, axis: None, span: None }
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num(key: &str, v: &str) -> Result<f64, CliError> {
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(usage(format!("{key}: `{v}` is not a finite number"))),
            }
        }
        fn count(key: &str, v: &str) -> Result<usize, CliError> {
            v.parse::<usize>().map_err(|_| usage(format!("{key}: `{v}` is not a non-negative integer")))
        }
        fn parsed<T: FromStr<Err = String>>(key: &str, v: &str) -> Result<T, CliError> {
            v.parse::<T>().map_err(|e| usage(format!("{key}: {e}")))
        }
        let c = &mut self.cfg;
        let p = &mut c.params;
        match key {
            "a" => p.a = num(key, value)?,
            "b" => p.b = num(key, value)?,
            "d" => p.d = num(key, value)?,
            "l" => p.l = num(key, value)?,
            "u" => p.u = num(key, value)?,
            "v0" => p.v0 = num(key, value)?,
            "mass" => p.m = num(key, value)?,
            "hbar" => p.hbar = num(key, value)?,
            "n-max" => p.n_max = count(key, value)?,
            "convention" => p.convention = parsed::<Convention>(key, value)?,
            "axis" => self.axis = Some(parsed(key, value)?),
            "start" => c.start = num(key, value)?,
            "span" => self.span = Some(num(key, value)?),
            "points" => c.points = count(key, value)?,
            "energy" => c.energy = Some(num(key, value)?),
            "incident-channel" => c.incident_channel = count(key, value)?,
            "incident-spin" => c.incident_spin = parsed(key, value)?,
            "solver" => c.solver = parsed(key, value)?,
            "segments" => c.segments = count(key, value)?,
            "rtol" => c.integrator.rtol = num(key, value)?,
            "atol" => c.integrator.atol = num(key, value)?,
            "max-step" => c.integrator.max_step = num(key, value)?,
            "max-evals" => c.integrator.max_evals = count(key, value)?,
            "convergence-check" => {
                c.convergence_check = match value {
                    "true" | "yes" | "1" | "on" => true,
                    "false" | "no" | "0" | "off" => false,
                    other => return Err(usage(format!("{key}: `{other}` is not a boolean"))),
                }
            }
            "prominence" => c.prominence = num(key, value)?,
            "output" => c.output = Some(PathBuf::from(value)),
            "format" => c.format = parsed(key, value)?,
            "plot-preset" => c.plot_preset = Some(value.to_string()),
            other => return Err(usage(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, CliError> {
        let mut missing = Vec::new();
        if self.axis.is_none() {
            missing.push("--axis");
        }
        if self.span.is_none() {
            missing.push("--span");
        }
        if !missing.is_empty() {
            return Err(usage(format!(
                "missing required settings: {} (give them as flags, in a --config file, or via --plot-preset)",
                missing.join(", ")
            )));
        }
        let mut cfg = self.cfg;
        cfg.axis = self.axis.unwrap();
        cfg.span = self.span.unwrap();
        cfg.integrator.validate().map_err(|e| usage(e.to_string()))?;
        cfg.plan(None).validate().map_err(|e| usage(e.to_string()))?;
        if !(cfg.prominence >= 0.0) {
            return Err(usage("prominence: must be non-negative"));
        }
        Ok(cfg)
    }
}

/// Resolves flags and the optional `--config` file into one configuration
/// per figure panel (one when no preset is given).
pub fn parse_config<I, T>(args: I) -> Result<Vec<RunConfig>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = command().try_get_matches_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => usage(e.to_string()),
        }
    })?;

    let file_pairs = match matches.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("config: cannot read {path}: {e}")))?;
            parse_config_file(&text, path)?
        }
        None => Vec::new(),
    };
    let mut flag_pairs = Vec::new();
    for &(key, _) in KEYS {
        if key == "convergence-check" {
            if matches.get_flag(key) {
                flag_pairs.push((key.to_string(), "true".to_string()));
            }
        } else if let Some(v) = matches.get_one::<String>(key) {
            flag_pairs.push((key.to_string(), v.clone()));
        }
    }

    let preset_name = flag_pairs
        .iter()
        .chain(&file_pairs)
        .find(|(k, _)| k == "plot-preset")
        .map(|(_, v)| v.clone());
    let panels = match &preset_name {
        Some(name) => presets::preset(name).ok_or_else(|| {
            usage(format!("plot-preset: unknown preset `{name}` (known: {})", presets::PRESET_NAMES.join(", ")))
        })?,
        None => vec![presets::Panel { label: "", settings: Vec::new() }],
    };

    let mut configs = Vec::with_capacity(panels.len());
    for panel in &panels {
        let mut draft = Draft::new();
        for (k, v) in &panel.settings {
            draft.apply(k, v)?;
        }
        for (k, v) in file_pairs.iter().chain(&flag_pairs) {
            draft.apply(k, v)?;
        }
        let mut cfg = draft.finish()?;
        if preset_name.is_some() {
            cfg.panel = Some(panel.label.to_string());
        }
        configs.push(cfg);
    }
    if configs.len() > 1 && configs[0].output.is_none() {
        return Err(usage("output: multi-panel presets write one file per panel and need --output"));
    }
    if preset_name.is_some() && configs[0].output.is_some() && configs[0].format != Format::Csv {
        return Err(usage("format: plot scripts read CSV; use --format csv with --plot-preset"));
    }
    Ok(configs)
}

/// `dir/name.csv` becomes `dir/name-a.csv` for panel `a`.
pub fn panel_path(base: &Path, label: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{label}"),
    };
    base.with_file_name(name)
}

/// Companion gnuplot script path for an output file.
pub fn script_path(base: &Path) -> PathBuf {
    base.with_extension("gp")
}

pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(usage(format!("{THREADS_ENV}: `{v}` is not a positive integer"))),
            Ok(n) => Ok(Some(n)),
        },
        Err(_) => Ok(None),
    }
}

/// Outcome of one panel.
#[derive(Clone, Debug)]
pub struct PanelRun {
    pub config: RunConfig,
    pub result: SweepResult,
    pub peaks: Option<PeakAnalysis>,
    pub convergence: Option<ConvergenceReport>,
    pub path: Option<PathBuf>,
}

/// Runs every panel, writes its output and, for presets, the plot script.
pub fn execute(configs: &[RunConfig], threads: Option<usize>, log: &mut dyn Write) -> Result<Vec<PanelRun>, CliError> {
    let multi = configs.len() > 1;
    let mut runs = Vec::with_capacity(configs.len());
    for cfg in configs {
        let plan = cfg.plan(threads);
        let result = run_sweep(&plan, &cfg.integrator).map_err(|e| usage(e.to_string()))?;
        let convergence = if cfg.convergence_check {
            Some(convergence_check(&plan, &cfg.integrator).map_err(|e| usage(e.to_string()))?)
        } else {
            None
        };
        let peaks = (cfg.axis == Axis::Energy).then(|| peak_analysis(&result, cfg.prominence));
        let path = cfg.output.as_ref().map(|p| match (&cfg.panel, multi) {
            (Some(label), true) => panel_path(p, label),
            _ => p.clone(),
        });

        let mut buf = Vec::new();
        match cfg.format {
            Format::Csv => output::write_csv(&result, &mut buf),
            Format::Json => output::write_json(cfg, &result, peaks.as_ref(), convergence.as_ref(), &mut buf),
        }
        .map_err(|e| CliError::Io(format!("output: {e}")))?;
        match &path {
            Some(p) => std::fs::write(p, &buf).map_err(|e| CliError::Io(format!("output: cannot write {}: {e}", p.display())))?,
            None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Io(format!("stdout: {e}")))?,
        }
        report(log, cfg, &result, peaks.as_ref(), convergence.as_ref(), path.as_deref());
        runs.push(PanelRun { config: cfg.clone(), result, peaks, convergence, path });
    }

    if let (Some(name), Some(base)) = (&configs[0].plot_preset, &configs[0].output) {
        let files: Vec<(String, PathBuf)> = runs
            .iter()
            .map(|r| (r.config.panel.clone().unwrap_or_default(), r.path.clone().unwrap()))
            .collect();
        let script = script_path(base);
        plot::emit_plot_script(name, configs[0].axis, &files, &script)
            .map_err(|e| CliError::Io(format!("plot script: cannot write {}: {e}", script.display())))?;
        let _ = writeln!(log, "plot script: {}", script.display());
    }

    if let Some(run) = runs.iter().find(|r| r.result.failures() == r.result.points.len()) {
        let first = run.result.points.iter().find_map(|p| p.summary.as_ref().err().cloned()).unwrap_or_default();
        return Err(CliError::AllFailed(format!("every grid point failed; first error: {first}")));
    }
    Ok(runs)
}

fn report(
    log: &mut dyn Write,
    cfg: &RunConfig,
    result: &SweepResult,
    peaks: Option<&PeakAnalysis>,
    convergence: Option<&ConvergenceReport>,
    path: Option<&Path>,
) {
    let label = cfg.panel.as_deref().map(|l| format!(" panel {l}")).unwrap_or_default();
    let suspect = result.points.iter().filter(|p| p.summary.as_ref().is_ok_and(|s| s.suspect)).count();
    let _ = writeln!(
        log,
        "sweep{label}: {} points, {} failed, {} suspect, max unitarity defect {:.3e}{}",
        result.points.len(),
        result.failures(),
        suspect,
        result.max_unitarity_defect(),
        path.map(|p| format!(" -> {}", p.display())).unwrap_or_default()
    );
    for p in result.points.iter().filter(|p| p.summary.is_err()).take(5) {
        let _ = writeln!(log, "  gap at {:.6}: {}", p.abscissa, p.summary.as_ref().unwrap_err());
    }
    if let Some(c) = convergence {
        let _ = writeln!(
            log,
            "convergence: {} points rerun at max-step/5, max deviation {:.3e}, {} flagged",
            c.points_checked,
            c.max_deviation,
            c.flagged.len()
        );
    }
    if let Some(pk) = peaks {
        for p in &pk.peaks {
            let _ = writeln!(log, "peak at {:.6}: height {:.6}, width {:.3e}", p.position, p.height, p.width);
        }
        for s in &pk.split_pairs {
            let _ = writeln!(log, "split pair {}-{}: separation {:.6}", s.first, s.second, s.separation);
        }
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I, log: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = parse_config(args).and_then(|configs| {
        let threads = threads_from_env()?;
        execute(&configs, threads, log)
    });
    match outcome {
        Ok(_) => EXIT_OK,
        Err(CliError::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}
