//! Command line, run configuration and output files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::benchmarks::{configure_run, Problem, SchemeSpec};
use crate::error::{Error, Result};
use crate::fluxes::VolumeFlux;
use crate::limiting::{BlendMode, IdpOptions, LimiterKind};
use crate::mesh::SolutionField;
use crate::physics::{pressure, EquationParams};
use crate::sbp_ops::{verify_sbp, OperatorKind};
use crate::semidisc::Scheme;
use crate::solver::{LimiterConfig, Solver};
use crate::verification::equivalence_deviation;

pub const SNAPSHOT_HEADER: &str = "x,y,rho,mx,my,mz,rhoE,B1,B2,B3,psi,p,alpha";

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("SBP_MHD_GIT_HASH"));

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Nodes on the grid line closest to `axis = coord`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceRequest {
    pub axis: Axis,
    pub coord: f64,
}

impl std::str::FromStr for SliceRequest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::config(format!(
                "invalid slice `{s}` (expected x=<coord> or y=<coord>)"
            ))
        };
        let (a, c) = s.split_once('=').ok_or_else(bad)?;
        let axis = match a.trim() {
            "x" => Axis::X,
            "y" => Axis::Y,
            _ => return Err(bad()),
        };
        let coord: f64 = c.trim().parse().map_err(|_| bad())?;
        if !coord.is_finite() {
            return Err(bad());
        }
        Ok(SliceRequest { axis, coord })
    }
}

impl std::fmt::Display for SliceRequest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = if self.axis == Axis::X { "x" } else { "y" };
        write!(f, "{a}={}", self.coord)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub scheme: SchemeSpec,
    pub dof_per_axis: usize,
    pub volume_flux: VolumeFlux,
    pub limiter: LimiterKind,
    pub blend_mode: BlendMode,
    pub loehner_eps: f64,
    pub idp_density: bool,
    pub idp_entropy: bool,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub output_dir: PathBuf,
    /// Snapshot spacing in time; `None` writes the initial and final states.
    pub snapshot_interval: Option<f64>,
    pub sample_interval: f64,
    pub slices: Vec<SliceRequest>,
    pub gamma: f64,
    pub c_h: f64,
}

const KEYS: &[&str] = &[
    "problem",
    "scheme",
    "dof",
    "volume-flux",
    "limiter",
    "blend",
    "loehner-eps",
    "idp-density",
    "idp-entropy",
    "dt",
    "t-end",
    "output",
    "snapshot-interval",
    "sample-interval",
    "slice",
    "gamma",
    "c-h",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value `{v}` for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(format!(
            "invalid value `{v}` for {key} (expected true | false)"
        ))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(format!("{key} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Builds a configuration from ordered `key=value` settings; later
    /// entries win, `slice` entries accumulate.
    pub fn from_settings(settings: &[(String, String)]) -> Result<Self> {
        let mut problem = None;
        let mut c = RunConfig {
            problem: Problem::OrszagTang,
            scheme: SchemeSpec {
                kind: OperatorKind::Lgl,
                size: 3,
            },
            dof_per_axis: 128,
            volume_flux: VolumeFlux::Central,
            limiter: LimiterKind::None,
            blend_mode: BlendMode::Subcell,
            loehner_eps: 0.2,
            idp_density: true,
            idp_entropy: true,
            dt: None,
            t_end: None,
            output_dir: PathBuf::from("output"),
            snapshot_interval: None,
            sample_interval: 0.01,
            slices: Vec::new(),
            gamma: EquationParams::default().gamma,
            c_h: EquationParams::default().c_h,
        };
        for (k, v) in settings {
            let key = k.trim().replace('_', "-");
            let v = v.trim();
            match key.as_str() {
                "problem" => problem = Some(v.parse::<Problem>()?),
                "scheme" => c.scheme = v.parse()?,
                "dof" => c.dof_per_axis = parse_num(&key, v)?,
                "volume-flux" => c.volume_flux = v.parse()?,
                "limiter" => c.limiter = v.parse()?,
                "blend" => c.blend_mode = v.parse()?,
                "loehner-eps" => c.loehner_eps = positive(&key, parse_num(&key, v)?)?,
                "idp-density" => c.idp_density = parse_bool(&key, v)?,
                "idp-entropy" => c.idp_entropy = parse_bool(&key, v)?,
                "dt" => c.dt = Some(positive(&key, parse_num(&key, v)?)?),
                "t-end" => {
                    let t: f64 = parse_num(&key, v)?;
                    if !(t >= 0.0 && t.is_finite()) {
                        return Err(Error::config(format!(
                            "t-end must be non-negative, got {t}"
                        )));
                    }
                    c.t_end = Some(t);
                }
                "output" => c.output_dir = PathBuf::from(v),
                "snapshot-interval" => {
                    c.snapshot_interval = Some(positive(&key, parse_num(&key, v)?)?)
                }
                "sample-interval" => c.sample_interval = positive(&key, parse_num(&key, v)?)?,
                "slice" => c.slices.push(v.parse()?),
                "gamma" => c.gamma = parse_num(&key, v)?,
                "c-h" => c.c_h = parse_num(&key, v)?,
                _ => {
                    return Err(Error::config(format!(
                        "unknown setting `{k}` (valid: {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        c.problem =
            problem.ok_or_else(|| Error::config("missing problem (valid: orszag_tang, rotor)"))?;
        c.params().validate()?;
        configure_run(c.problem, c.scheme, c.dof_per_axis)?;
        Ok(c)
    }

    pub fn params(&self) -> EquationParams {
        EquationParams {
            gamma: self.gamma,
            c_h: self.c_h,
            ..EquationParams::default()
        }
    }

    pub fn limiter_config(&self) -> LimiterConfig {
        LimiterConfig {
            kind: self.limiter,
            mode: self.blend_mode,
            loehner_eps: self.loehner_eps,
            idp: IdpOptions {
                density: self.idp_density,
                entropy: self.idp_entropy,
                ..IdpOptions::default()
            },
        }
    }

    fn echo(&self, out: &mut String) {
        let _ = writeln!(out, "problem={}", self.problem);
        let _ = writeln!(out, "scheme={}", self.scheme);
        let _ = writeln!(out, "dof={}", self.dof_per_axis);
        let _ = writeln!(out, "volume_flux={}", self.volume_flux);
        let _ = writeln!(out, "limiter={}", self.limiter);
        let _ = writeln!(out, "blend={}", self.blend_mode);
        let _ = writeln!(out, "loehner_eps={}", self.loehner_eps);
        let _ = writeln!(out, "idp_density={}", self.idp_density);
        let _ = writeln!(out, "idp_entropy={}", self.idp_entropy);
        let _ = writeln!(out, "gamma={}", self.gamma);
        let _ = writeln!(out, "c_h={}", self.c_h);
        let _ = writeln!(out, "sample_interval={}", self.sample_interval);
        if let Some(s) = self.snapshot_interval {
            let _ = writeln!(out, "snapshot_interval={s}");
        }
        for s in &self.slices {
            let _ = writeln!(out, "slice={s}");
        }
        let _ = writeln!(out, "output={}", self.output_dir.display());
    }
}

/// `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("config line {}: expected key=value", lineno + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

#[derive(Debug, Parser)]
#[command(name = "sbp-mhd", version = VERSION, about = "Split-form SBP solver for GLM-MHD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a benchmark.
    Run(Box<RunArgs>),
    /// Check the algebraic properties of an operator.
    CheckOps {
        #[arg(long, value_parser = ["lgl", "fdsbp"])]
        kind: String,
        /// Polynomial degree (lgl) or node count (fdsbp).
        #[arg(long)]
        n: usize,
    },
    /// Compare the direct and flux-differencing forms on random fields.
    EquivalenceTest {
        #[arg(long, default_value = "lgl:3")]
        scheme: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        fields: usize,
        #[arg(long, default_value_t = 4)]
        elements: usize,
    },
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// key=value file with defaults for the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// orszag_tang | rotor
    #[arg(long)]
    pub problem: Option<String>,
    /// lgl:<degree> | fdsbp:<nodes>
    #[arg(long)]
    pub scheme: Option<String>,
    /// Nodes per axis.
    #[arg(long)]
    pub dof: Option<String>,
    /// central | ec
    #[arg(long)]
    pub volume_flux: Option<String>,
    /// none | loehner | idp | fv
    #[arg(long)]
    pub limiter: Option<String>,
    /// subcell | element
    #[arg(long)]
    pub blend: Option<String>,
    #[arg(long)]
    pub loehner_eps: Option<String>,
    #[arg(long)]
    pub idp_density: Option<String>,
    #[arg(long)]
    pub idp_entropy: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub t_end: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long)]
    pub snapshot_interval: Option<String>,
    #[arg(long)]
    pub sample_interval: Option<String>,
    /// x=<coord> or y=<coord>; repeatable.
    #[arg(long)]
    pub slice: Vec<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub c_h: Option<String>,
}

impl RunArgs {
    fn flag_settings(&self) -> Vec<(String, String)> {
        let pairs = [
            ("problem", &self.problem),
            ("scheme", &self.scheme),
            ("dof", &self.dof),
            ("volume-flux", &self.volume_flux),
            ("limiter", &self.limiter),
            ("blend", &self.blend),
            ("loehner-eps", &self.loehner_eps),
            ("idp-density", &self.idp_density),
            ("idp-entropy", &self.idp_entropy),
            ("dt", &self.dt),
            ("t-end", &self.t_end),
            ("output", &self.output),
            ("snapshot-interval", &self.snapshot_interval),
            ("sample-interval", &self.sample_interval),
            ("gamma", &self.gamma),
            ("c-h", &self.c_h),
        ];
        let mut out: Vec<(String, String)> = pairs
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        out.extend(self.slice.iter().map(|s| ("slice".to_string(), s.clone())));
        out
    }

    /// File settings overridden key by key by the flags.
    pub fn to_config(&self) -> Result<RunConfig> {
        let flags = self.flag_settings();
        let mut settings = match &self.config {
            Some(p) => read_config_file(p)?,
            None => Vec::new(),
        };
        settings.retain(|(k, _)| {
            let k = k.trim().replace('_', "-");
            !flags.iter().any(|(f, _)| *f == k)
        });
        settings.extend(flags);
        RunConfig::from_settings(&settings)
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub snapshots: Vec<PathBuf>,
    pub slices: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows(path: &Path, rows: impl Iterator<Item = String>) -> Result<()> {
    let io = io_err(path);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(&io)?);
    writeln!(w, "{SNAPSHOT_HEADER}").map_err(&io)?;
    for r in rows {
        writeln!(w, "{r}").map_err(&io)?;
    }
    w.flush().map_err(&io)
}

fn node_row(
    x: f64,
    y: f64,
    u: &crate::physics::ConsState,
    p: &EquationParams,
    alpha: f64,
) -> String {
    let mut s = format!("{x},{y}");
    for v in u.0 {
        let _ = write!(s, ",{v}");
    }
    let _ = write!(s, ",{},{alpha}", pressure(u, p));
    s
}

/// Every node of the field with its coordinates, pressure and `alpha`.
pub fn write_snapshot(
    path: &Path,
    field: &SolutionField,
    scheme: &Scheme,
    alpha: &[f64],
) -> Result<()> {
    let (op, mesh, p) = (&scheme.op, &scheme.mesh, &scheme.params);
    let n = scheme.n();
    let rows = (0..mesh.n_elements()).flat_map(move |e| {
        (0..n * n).map(move |k| {
            let (i, j) = (k % n, k / n);
            let (x, y) = mesh.node_coords(op, e, i, j);
            let idx = field.idx(e, i, j);
            node_row(x, y, &field.data[idx], p, alpha[idx])
        })
    });
    write_rows(path, rows)
}

/// Nodes of the grid line nearest to the request, ordered along the line.
pub fn slice_nodes(scheme: &Scheme, req: &SliceRequest) -> Vec<(usize, f64, f64)> {
    let (op, mesh) = (&scheme.op, &scheme.mesh);
    let n = scheme.n();
    let mut nodes = Vec::with_capacity(mesh.n_elements() * n * n);
    for e in 0..mesh.n_elements() {
        for j in 0..n {
            for i in 0..n {
                let (x, y) = mesh.node_coords(op, e, i, j);
                nodes.push((e * n * n + j * n + i, x, y));
            }
        }
    }
    let across = |t: &(usize, f64, f64)| if req.axis == Axis::Y { t.2 } else { t.1 };
    let along = |t: &(usize, f64, f64)| if req.axis == Axis::Y { t.1 } else { t.2 };
    let best = nodes
        .iter()
        .map(|t| (across(t) - req.coord).abs())
        .fold(f64::INFINITY, f64::min);
    let line = nodes
        .iter()
        .find(|t| (across(t) - req.coord).abs() == best)
        .map(across)
        .unwrap_or(req.coord);
    let mut sel: Vec<_> = nodes.into_iter().filter(|t| across(t) == line).collect();
    sel.sort_by(|a, b| along(a).total_cmp(&along(b)).then(a.0.cmp(&b.0)));
    sel
}

pub fn write_slice(
    path: &Path,
    field: &SolutionField,
    scheme: &Scheme,
    alpha: &[f64],
    req: &SliceRequest,
) -> Result<()> {
    let p = &scheme.params;
    let rows = slice_nodes(scheme, req)
        .into_iter()
        .map(|(k, x, y)| node_row(x, y, &field.data[k], p, alpha[k]));
    write_rows(path, rows)
}

fn snapshot_times(t_end: f64, interval: Option<f64>) -> Vec<f64> {
    let mut ts = vec![0.0];
    if let Some(h) = interval {
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t >= t_end * (1.0 - 1e-12) {
                break;
            }
            ts.push(t);
            k += 1;
        }
    }
    if t_end > 0.0 {
        ts.push(t_end);
    }
    ts
}

fn slice_name(req: &SliceRequest, t: f64) -> String {
    let a = if req.axis == Axis::X { "x" } else { "y" };
    format!("slice_{a}{:.4}_t{t:.4}.csv", req.coord)
}

/// Initialised solver with the resolved step, end time and volume flux.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub solver: Solver,
    pub dt: f64,
    pub t_end: f64,
    pub volume_flux: VolumeFlux,
}

pub fn prepare(config: &RunConfig) -> Result<PreparedRun> {
    let setup = configure_run(config.problem, config.scheme, config.dof_per_axis)?;
    let volume_flux = match config.volume_flux.resolve() {
        Ok(f) => f,
        Err(e) => {
            log::warn!("{e}; using the central volume flux");
            VolumeFlux::Central
        }
    };
    let scheme = Scheme::new(setup.op, setup.mesh, config.params(), volume_flux)?;
    let field = Solver::initial_field(&scheme, |x, y| config.problem.initial_state(x, y));
    Ok(PreparedRun {
        solver: Solver::new(
            scheme,
            field,
            config.limiter_config(),
            config.sample_interval,
        )?,
        dt: config.dt.unwrap_or(setup.dt),
        t_end: config.t_end.unwrap_or(setup.t_end),
        volume_flux,
    })
}

/// Runs a benchmark and writes snapshots, slices, `diagnostics.csv` and
/// `manifest.txt` into the output directory.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let PreparedRun {
        mut solver,
        dt,
        t_end,
        volume_flux: flux,
    } = prepare(config)?;

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mass0 = solver.total_mass();
    let mut snapshots = Vec::new();
    let mut slices = Vec::new();

    let mut outcome = (|| -> Result<()> {
        let row = solver.sample()?;
        solver.diagnostics.push(row)?;
        for t in snapshot_times(t_end, config.snapshot_interval) {
            if t > 0.0 {
                solver.advance_to(t, dt)?;
                log::info!("t = {:.4} after {} steps", solver.time, solver.steps);
            }
            let path = dir.join(format!("snapshot_t{t:.4}.csv"));
            write_snapshot(&path, &solver.field, &solver.scheme, &solver.last_alpha)?;
            snapshots.push(path);
        }
        for req in &config.slices {
            let path = dir.join(slice_name(req, solver.time));
            write_slice(
                &path,
                &solver.field,
                &solver.scheme,
                &solver.last_alpha,
                req,
            )?;
            slices.push(path);
        }
        Ok(())
    })();

    let diag_path = dir.join("diagnostics.csv");
    if let Err(e) = solver.diagnostics.write_csv(&diag_path) {
        if outcome.is_ok() {
            outcome = Err(e);
        }
    }

    let mut m = String::new();
    let _ = writeln!(
        m,
        "status={}",
        if outcome.is_ok() { "ok" } else { "failed" }
    );
    if let Err(e) = &outcome {
        let _ = writeln!(m, "error={}", e.to_string().replace('\n', " "));
    }
    let _ = writeln!(m, "version={VERSION}");
    config.echo(&mut m);
    if flux != config.volume_flux {
        let _ = writeln!(m, "volume_flux_used={flux}");
    }
    let _ = writeln!(m, "dt={dt}");
    let _ = writeln!(m, "t_end={t_end}");
    let _ = writeln!(m, "final_time={}", solver.time);
    let _ = writeln!(m, "steps={}", solver.steps);
    let mass1 = solver.total_mass();
    let _ = writeln!(m, "mass_initial={mass0}");
    let _ = writeln!(m, "mass_final={mass1}");
    let _ = writeln!(m, "mass_relative_drift={:e}", (mass1 - mass0) / mass0);
    let (min_rho, min_p) = solver
        .diagnostics
        .rows
        .iter()
        .fold((f64::INFINITY, f64::INFINITY), |a, r| {
            (a.0.min(r.min_rho), a.1.min(r.min_p))
        });
    let _ = writeln!(m, "min_rho_sampled={min_rho}");
    let _ = writeln!(m, "min_p_sampled={min_p}");
    if config.limiter == LimiterKind::Idp {
        let s = &solver.idp_stats;
        let _ = writeln!(m, "idp_stages={}", s.stages);
        let _ = writeln!(m, "idp_correction_passes={}", s.correction_passes);
        let _ = writeln!(m, "idp_fallback_nodes={}", s.fallback_nodes);
        let _ = writeln!(m, "idp_flagged={}", s.flagged);
        let _ = writeln!(m, "idp_max_rho_violation={:e}", s.max_rho_violation);
        let _ = writeln!(m, "idp_max_theta_violation={:e}", s.max_theta_violation);
    }
    let _ = writeln!(m, "wall_time_s={:.3}", started.elapsed().as_secs_f64());
    let manifest = dir.join("manifest.txt");
    std::fs::write(&manifest, m).map_err(io_err(&manifest))?;

    outcome?;
    Ok(RunSummary {
        steps: solver.steps,
        final_time: solver.time,
        snapshots,
        slices,
        manifest,
    })
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run(args) => {
            let config = args.to_config()?;
            let s = run(&config)?;
            println!(
                "finished t={} after {} steps; manifest {}",
                s.final_time,
                s.steps,
                s.manifest.display()
            );
            Ok(0)
        }
        Command::CheckOps { kind, n } => {
            let spec: SchemeSpec = format!("{kind}:{n}").parse()?;
            let report = verify_sbp(&spec.build()?);
            print!("{report}");
            let ok = report.passes(1e-13);
            println!("{}", if ok { "PASS" } else { "FAIL" });
            Ok(if ok { 0 } else { 3 })
        }
        Command::EquivalenceTest {
            scheme,
            seed,
            fields,
            elements,
        } => {
            let spec: SchemeSpec = scheme.parse()?;
            if elements == 0 || fields == 0 {
                return Err(Error::config("elements and fields must be positive"));
            }
            let d = equivalence_deviation(&spec.build()?, elements, fields, seed)?;
            println!("scheme={spec} seed={seed} fields={fields} elements={elements}x{elements}");
            println!("max deviation {d:e}");
            Ok(if d <= 1e-12 { 0 } else { 3 })
        }
    }
}
