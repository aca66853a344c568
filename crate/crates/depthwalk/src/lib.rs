//! Experiment runner over the depth/walk/spectra library: reproducible CLI,
//! CSV/JSON emission and run manifests.
//!
//! Every run is fully determined by its resolved configuration: same config,
//! same bytes in every data file. The manifest echoes the configuration and
//! records wall time, and is the only file excluded from byte-for-byte
//! reproducibility.

pub mod spec;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use depthwalk_core::density;
use depthwalk_core::depth::{self, DepthValue};
use depthwalk_core::error::{Error, ErrorKind};
use depthwalk_core::expectations;
use depthwalk_core::groups;
use depthwalk_core::quotients::lambda_table;
use depthwalk_core::spectra;
use depthwalk_core::walks;
use serde_json::json;

use spec::{parse_group, parse_predicate, parse_quotient, QuotientSpec};

/// Exit codes: 0 ok, 1 unexpected/io, 2 usage, 3 capacity, 4 numerical.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Usage => 2,
                ErrorKind::Capacity => 3,
                ErrorKind::Numerical => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "depthwalk",
    version,
    about = "Depth functions, intersection growth and lazy-walk statistics \
             for explicit finitely generated groups"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct Common {
    /// Flat key=value config file; flags override file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (flag > DEPTHWALK_OUT > config > "out").
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Depth of one element: JSON {value, method, witness}.
    Depth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        group: Option<String>,
        /// Element literal, e.g. Z:6, H:1,0,2, F:ab^-1a, (Z:1|T:0).
        #[arg(long)]
        element: Option<String>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Intersection-growth table: CSV (k, index, provenance).
    Lambda {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        group: Option<String>,
        #[arg(long = "k-max")]
        k_max: Option<u64>,
    },
    /// Monte Carlo expected depth across a step grid: CSV per n.
    Walk {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        group: Option<String>,
        /// Comma-separated step counts, e.g. 1,10,100.
        #[arg(long = "n-grid")]
        n_grid: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Spectrum and mixing verification of a finite quotient: JSON.
    Spectra {
        #[command(flatten)]
        common: Common,
        /// Quotient spec, e.g. Z%12, H%3, Z/6, SL3/2.
        #[arg(long)]
        quotient: Option<String>,
        #[arg(long = "n-max")]
        n_max: Option<u64>,
    },
    /// Ball census of a predicate: CSV (n, ball, hits, ratio).
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        group: Option<String>,
        /// even | mod:<m> | kernel:<m>
        #[arg(long)]
        predicate: Option<String>,
        #[arg(long)]
        radius: Option<u64>,
    },
    /// Expected depth vs the truncated limit series: CSV + JSON summary.
    Expect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        group: Option<String>,
        #[arg(long = "n-grid")]
        n_grid: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long = "k-max")]
        k_max: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Run the subcommand named by the `subcommand` key of a config file.
    Run {
        #[command(flatten)]
        common: Common,
    },
}

/// Resolved key/value options: config file entries overridden by flags.
struct Opts {
    map: BTreeMap<String, String>,
}

impl Opts {
    fn from_config(common: &Common) -> CliResult<Opts> {
        let mut map = BTreeMap::new();
        if let Some(path) = &common.config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::usage(format!(
                        "{}:{}: expected key=value, got {raw:?}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Opts { map })
    }

    fn set_flag(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.map.insert(key.to_string(), v);
        }
    }

    fn require(&self, key: &str) -> CliResult<&str> {
        self.map
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::usage(format!("missing required option --{key}")).into())
    }

    fn get_u64(&self, key: &str, default: u64) -> CliResult<u64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::usage(format!("option {key}: bad integer {v:?}")).into()),
        }
    }

    fn grid(&self, key: &str) -> CliResult<Vec<u64>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::usage(format!("option {key}: bad entry {p:?}")).into())
            })
            .collect()
    }
}

/// Where the data files of a run went, plus a one-line summary.
#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn out_dir(opts: &Opts, common: &Common) -> PathBuf {
    if let Some(o) = &common.out {
        return PathBuf::from(o);
    }
    if let Ok(o) = std::env::var("DEPTHWALK_OUT") {
        if !o.is_empty() {
            return PathBuf::from(o);
        }
    }
    PathBuf::from(opts.map.get("out").cloned().unwrap_or_else(|| "out".into()))
}

fn write_artifacts(
    dir: &Path,
    command: &str,
    opts: &Opts,
    started: Instant,
    files: Vec<(String, String)>,
    summary: String,
) -> CliResult<RunOutcome> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(&name);
        fs::write(&path, contents.as_bytes())?;
        written.push(path);
    }
    let threads = std::env::var("DEPTHWALK_THREADS").unwrap_or_else(|_| "1".into());
    let manifest = json!({
        "tool": "depthwalk",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": opts.map,
        "threads": threads,
        "wall_time_ms": started.elapsed().as_millis() as u64,
    });
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, format!("{:#}\n", manifest).as_bytes())?;
    written.push(manifest_path);
    Ok(RunOutcome {
        out_dir: dir.to_path_buf(),
        files: written,
        summary,
    })
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "unknown".into()
    }
}

// ----------------------------------------------------------------------
// Subcommand bodies
// ----------------------------------------------------------------------

fn run_depth(opts: &Opts, common: &Common) -> CliResult<RunOutcome> {
    let t0 = Instant::now();
    let group = parse_group(opts.require("group")?)?;
    let element = groups::parse_element(opts.require("element")?)?;
    let cap = opts.get_u64("cap", 64)?;
    let result = depth::depth(&element, &group, cap)?;
    let (value, exceeds, upper) = match result.value {
        DepthValue::Exact(v) => (Some(v), false, None),
        DepthValue::ExceedsCap { upper_bound, .. } => (None, true, upper_bound),
    };
    let doc = json!({
        "group": group.name(),
        "element": groups::format_element(&element),
        "cap": cap,
        "value": value,
        "exceeds_cap": exceeds,
        "upper_bound": upper,
        "method": result.method.as_str(),
        "witness": result.witness,
    });
    let rendered = format!("{:#}\n", doc);
    let summary = match value {
        Some(v) => format!("depth({}) = {v}", groups::format_element(&element)),
        None => format!(
            "depth({}) exceeds cap {cap}{}",
            groups::format_element(&element),
            upper
                .map(|u| format!(" (upper bound {u})"))
                .unwrap_or_default()
        ),
    };
    write_artifacts(
        &out_dir(opts, common),
        "depth",
        opts,
        t0,
        vec![("depth.json".into(), rendered)],
        summary,
    )
}

fn run_lambda(opts: &Opts, common: &Common) -> CliResult<RunOutcome> {
    let t0 = Instant::now();
    let group = parse_group(opts.require("group")?)?;
    let k_max = opts.get_u64("k-max", 8)?;
    let table = lambda_table(&group, k_max)?;
    let mut csv = String::from("# depthwalk lambda csv v1\nk,index,provenance\n");
    for e in &table.entries {
        let _ = writeln!(csv, "{},{},{}", e.k, e.index, e.provenance.as_str());
    }
    let summary = format!(
        "lambda table for {} up to K={k_max}; {}",
        group.name(),
        table.tail_note()
    );
    write_artifacts(
        &out_dir(opts, common),
        "lambda",
        opts,
        t0,
        vec![("lambda.csv".into(), csv)],
        summary,
    )
}

fn run_walk(opts: &Opts, common: &Common) -> CliResult<RunOutcome> {
    let t0 = Instant::now();
    let group = parse_group(opts.require("group")?)?;
    let grid = opts.grid("n-grid")?;
    let trials = opts.get_u64("trials", 10_000)?;
    let seed = opts.get_u64("seed", 0)?;
    let cap = opts.get_u64("cap", 64)?;
    let exact_available = matches!(group.family(), groups::Family::Integer);
    let mut csv = String::from("# depthwalk walk csv v1\nn,estimate,stderr,cap_hits,exact\n");
    for &n in &grid {
        let cfg = walks::WalkConfig {
            group: group.clone(),
            steps: n,
            seed: depthwalk_core::rng::mix64(seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            trials,
        };
        let est = walks::monte_carlo_expected_depth(&cfg, cap)?;
        let exact = if exact_available && n <= walks::EXPECTED_DEPTH_STEP_BUDGET {
            format!("{}", walks::exact_expected_depth_integer(n)?)
        } else {
            String::new()
        };
        let _ = writeln!(
            csv,
            "{n},{},{},{},{exact}",
            est.mean, est.std_error, est.cap_hits
        );
    }
    let summary = format!(
        "lazy-walk expected depth on {} over {} grid points, {trials} trials each",
        group.name(),
        grid.len()
    );
    write_artifacts(
        &out_dir(opts, common),
        "walk",
        opts,
        t0,
        vec![("walk.csv".into(), csv)],
        summary,
    )
}

fn run_spectra(opts: &Opts, common: &Common) -> CliResult<RunOutcome> {
    let t0 = Instant::now();
    let quotient_spec = opts.require("quotient")?;
    let n_max = opts.get_u64("n-max", 300)?;
    let doc;
    let summary;
    match parse_quotient(quotient_spec)? {
        QuotientSpec::Map(map) => {
            let report = spectra::verify_mixing_bound(&map, n_max)?;
            summary = format!(
                "{}: order {}, mu2 = {}, mixing check {}",
                report.quotient,
                report.order,
                report.mu2,
                if report.passed() { "pass" } else { "FAIL" }
            );
            doc = json!({
                "quotient": report.quotient,
                "order": report.order,
                "mu2": report.mu2,
                "check": if report.passed() { "pass" } else { "fail" },
                "max_slack": report.max_slack,
                "n_max": n_max,
                "violations": report.violations.len(),
            });
        }
        QuotientSpec::ActionOnly(action) => {
            let mu2 = spectra::lazy_mu2_by_iteration(&action)?;
            summary = format!(
                "{}: order {}, mu2 = {mu2} (iterative; mixing check skipped)",
                action.name(),
                action.order()
            );
            doc = json!({
                "quotient": action.name(),
                "order": action.order(),
                "mu2": mu2,
                "check": "mu2-only",
                "max_slack": serde_json::Value::Null,
                "n_max": n_max,
                "violations": serde_json::Value::Null,
            });
        }
    }
    write_artifacts(
        &out_dir(opts, common),
        "spectra",
        opts,
        t0,
        vec![("spectra.json".into(), format!("{:#}\n", doc))],
        summary,
    )
}

fn run_density(opts: &Opts, common: &Common) -> CliResult<RunOutcome> {
    let t0 = Instant::now();
    let group = parse_group(opts.require("group")?)?;
    let predicate = parse_predicate(opts.require("predicate")?)?;
    let radius = opts.get_u64("radius", 8)?;
    let census = density::ball_census(&group, predicate, radius, density::BALL_BUDGET)?;
    let mut csv = String::from("# depthwalk density csv v1\nn,ball,hits,ratio_num,ratio_den\n");
    for row in &census {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.radius,
            row.ball_size,
            row.subset_count,
            row.ratio.numerator(),
            row.ratio.denominator()
        );
    }
    let last = census.last().expect("census has the radius-0 row");
    let summary = format!(
        "density of {} in {} at radius {radius}: {} ({:.6})",
        predicate.name(),
        group.name(),
        last.ratio,
        last.ratio.to_f64()
    );
    write_artifacts(
        &out_dir(opts, common),
        "density",
        opts,
        t0,
        vec![("density.csv".into(), csv)],
        summary,
    )
}

fn run_expect(opts: &Opts, common: &Common) -> CliResult<RunOutcome> {
    let t0 = Instant::now();
    let group = parse_group(opts.require("group")?)?;
    let grid = opts.grid("n-grid")?;
    let trials = opts.get_u64("trials", 10_000)?;
    let k_max = opts.get_u64("k-max", 8)?;
    let seed = opts.get_u64("seed", 0)?;
    let cap = opts.get_u64("cap", 64)?;
    let report = expectations::convergence_report(&group, &grid, trials, k_max, seed, cap)?;
    let mut csv = String::from(
        "# depthwalk expect csv v1\nn,estimate,stderr,cap_hits,partial_limit,gap,fatou_ok\n",
    );
    for row in &report.rows {
        let stderr = row
            .std_error
            .map(|s| format!("{s}"))
            .unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{stderr},{},{},{},{}",
            row.n, row.estimate, row.cap_hits, report.partial_limit, row.gap, row.fatou_ok
        );
    }
    let rows_json: Vec<serde_json::Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "estimate": r.estimate,
                "stderr": r.std_error,
                "cap_hits": r.cap_hits,
                "gap": r.gap,
                "fatou_ok": r.fatou_ok,
            })
        })
        .collect();
    let doc = json!({
        "group": report.group,
        "k_max": report.truncation,
        "partial_limit": report.partial_limit,
        "tail_bound": if report.tail_bound.is_finite() {
            serde_json::Value::from(report.tail_bound)
        } else {
            serde_json::Value::String("unknown".into())
        },
        "tail_method": report.tail_method.as_str(),
        "fatou_floor": report.fatou_floor,
        "seed": seed,
        "trials": trials,
        "depth_cap": cap,
        "rows": rows_json,
    });
    let summary = format!(
        "expected depth on {}: partial limit {} (tail {}), {} grid points, {} lower-bound flags",
        report.group,
        report.partial_limit,
        fmt_f64(report.tail_bound),
        report.rows.len(),
        report.fatou_violations()
    );
    write_artifacts(
        &out_dir(opts, common),
        "expect",
        opts,
        t0,
        vec![
            ("expect.csv".into(), csv),
            ("expect.json".into(), format!("{:#}\n", doc)),
        ],
        summary,
    )
}

// ----------------------------------------------------------------------
// Dispatch
// ----------------------------------------------------------------------

fn dispatch(command: &Command) -> CliResult<RunOutcome> {
    match command {
        Command::Depth {
            common,
            group,
            element,
            cap,
        } => {
            let mut opts = Opts::from_config(common)?;
            opts.set_flag("group", group.clone());
            opts.set_flag("element", element.clone());
            opts.set_flag("cap", cap.map(|v| v.to_string()));
            run_depth(&opts, common)
        }
        Command::Lambda {
            common,
            group,
            k_max,
        } => {
            let mut opts = Opts::from_config(common)?;
            opts.set_flag("group", group.clone());
            opts.set_flag("k-max", k_max.map(|v| v.to_string()));
            run_lambda(&opts, common)
        }
        Command::Walk {
            common,
            group,
            n_grid,
            trials,
            seed,
            cap,
        } => {
            let mut opts = Opts::from_config(common)?;
            opts.set_flag("group", group.clone());
            opts.set_flag("n-grid", n_grid.clone());
            opts.set_flag("trials", trials.map(|v| v.to_string()));
            opts.set_flag("seed", seed.map(|v| v.to_string()));
            opts.set_flag("cap", cap.map(|v| v.to_string()));
            run_walk(&opts, common)
        }
        Command::Spectra {
            common,
            quotient,
            n_max,
        } => {
            let mut opts = Opts::from_config(common)?;
            opts.set_flag("quotient", quotient.clone());
            opts.set_flag("n-max", n_max.map(|v| v.to_string()));
            run_spectra(&opts, common)
        }
        Command::Density {
            common,
            group,
            predicate,
            radius,
        } => {
            let mut opts = Opts::from_config(common)?;
            opts.set_flag("group", group.clone());
            opts.set_flag("predicate", predicate.clone());
            opts.set_flag("radius", radius.map(|v| v.to_string()));
            run_density(&opts, common)
        }
        Command::Expect {
            common,
            group,
            n_grid,
            trials,
            k_max,
            seed,
            cap,
        } => {
            let mut opts = Opts::from_config(common)?;
            opts.set_flag("group", group.clone());
            opts.set_flag("n-grid", n_grid.clone());
            opts.set_flag("trials", trials.map(|v| v.to_string()));
            opts.set_flag("k-max", k_max.map(|v| v.to_string()));
            opts.set_flag("seed", seed.map(|v| v.to_string()));
            opts.set_flag("cap", cap.map(|v| v.to_string()));
            run_expect(&opts, common)
        }
        Command::Run { common } => {
            if common.config.is_none() {
                return Err(Error::usage("run requires --config").into());
            }
            let opts = Opts::from_config(common)?;
            let sub = opts.require("subcommand")?.to_string();
            match sub.as_str() {
                "depth" => run_depth(&opts, common),
                "lambda" => run_lambda(&opts, common),
                "walk" => run_walk(&opts, common),
                "spectra" => run_spectra(&opts, common),
                "density" => run_density(&opts, common),
                "expect" => run_expect(&opts, common),
                other => {
                    Err(Error::usage(format!("unknown subcommand in config: {other:?}")).into())
                }
            }
        }
    }
}

/// Parse an argv-style vector and run it; used by `main` and by tests.
pub fn execute<I, S>(argv: I) -> CliResult<RunOutcome>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)
        .map_err(|e| Error::usage(format!("argument error: {e}")))?;
    dispatch(&cli.command)
}

pub fn run_main() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// Re-exported for integration tests that need direct access to the core.
pub use depthwalk_core as core;
