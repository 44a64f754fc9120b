//! Command-line front end: `run`, `synth`, `bench` and `sweep`.
//!
//! Every pipeline parameter can come from a `key=value` config file
//! (`--config`) or a flag; flags win. Exit status is 0 on success, 1 on a
//! usage error and 2 on a data error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::eval::{self, output, PipelineParams, PARAM_KEYS};
use crate::stream_io::{self, EdgeFormat, SyntheticConfig};
use crate::tensor_sketch::EdgeEvent;

#[derive(Debug, Parser)]
#[command(name = "edgesketch", version, about = "Streaming edge anomaly detection with a temporal Count-Min sketch")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score an edge stream and write one row per edge.
    Run(CommonArgs),
    /// Generate a labeled synthetic stream.
    Synth(CommonArgs),
    /// Time the pipeline on prefixes of 10, 100, ..., 10^6 edges.
    Bench(CommonArgs),
    /// Run a parameter grid and report AUC and runtime per cell.
    Sweep(CommonArgs),
}

#[derive(Debug, Args, Default)]
struct CommonArgs {
    /// key=value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge file (u,v,t per line).
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Label file (0/1 per line). For `synth`, where labels are written.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Edge file separator: comma or space.
    #[arg(long)]
    format: Option<String>,
    /// Sweep grid file (key=v1,v2,... per line).
    #[arg(long)]
    grid: Option<PathBuf>,

    #[arg(long)]
    rows: Option<String>,
    #[arg(long)]
    cols: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long = "bin-width", alias = "bin_width")]
    bin_width: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long = "delta-shift", alias = "delta_shift")]
    delta_shift: Option<String>,
    #[arg(long)]
    prior: Option<String>,
    #[arg(long = "variance-factor", alias = "variance_factor")]
    variance_factor: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Fixed threshold instead of mean + k * std.
    #[arg(long)]
    threshold: Option<String>,
    /// posterior or raw.
    #[arg(long = "score-mode", alias = "score_mode")]
    score_mode: Option<String>,
    /// smoothed or raw.
    #[arg(long = "flag-mode", alias = "flag_mode")]
    flag_mode: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Repeats per sweep cell, or best-of count for bench.
    #[arg(long)]
    repeats: Option<String>,
    /// Worker threads for sweep.
    #[arg(long)]
    threads: Option<String>,

    // synthetic stream
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long = "n-edges", alias = "n_edges")]
    n_edges: Option<String>,
    #[arg(long)]
    bins: Option<String>,
    #[arg(long)]
    bursts: Option<String>,
    #[arg(long = "burst-size", alias = "burst_size")]
    burst_size: Option<String>,
    #[arg(long)]
    fanout: Option<String>,
    #[arg(long = "background-rate", alias = "background_rate")]
    background_rate: Option<String>,
}

const OTHER_KEYS: &[&str] = &[
    "edges",
    "labels",
    "out",
    "format",
    "grid",
    "repeats",
    "threads",
    "nodes",
    "n_edges",
    "bins",
    "bursts",
    "burst_size",
    "fanout",
    "background_rate",
];

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    /// Downstream reader went away, as with `| head`.
    Closed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        CliError::Closed
    } else {
        CliError::Data(format!("stdout: {e}"))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Merged view of config file entries and flags.
struct Settings {
    values: BTreeMap<&'static str, String>,
}

impl Settings {
    fn load(args: &CommonArgs) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(CliError::Usage(format!(
                        "{}:{}: expected key=value",
                        path.display(),
                        i + 1
                    )));
                };
                let key = canonical(k).ok_or_else(|| {
                    CliError::Usage(format!("{}:{}: unknown key `{}`", path.display(), i + 1, k.trim()))
                })?;
                values.insert(key, v.trim().to_owned());
            }
        }
        let path_str = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let flags: [(&'static str, Option<String>); 28] = [
            ("edges", path_str(&args.edges)),
            ("labels", path_str(&args.labels)),
            ("out", path_str(&args.out)),
            ("format", args.format.clone()),
            ("grid", path_str(&args.grid)),
            ("rows", args.rows.clone()),
            ("cols", args.cols.clone()),
            ("window", args.window.clone()),
            ("bin_width", args.bin_width.clone()),
            ("gamma", args.gamma.clone()),
            ("delta_shift", args.delta_shift.clone()),
            ("prior", args.prior.clone()),
            ("variance_factor", args.variance_factor.clone()),
            ("lambda", args.lambda.clone()),
            ("k", args.k.clone()),
            ("threshold", args.threshold.clone()),
            ("score_mode", args.score_mode.clone()),
            ("flag_mode", args.flag_mode.clone()),
            ("seed", args.seed.clone()),
            ("repeats", args.repeats.clone()),
            ("threads", args.threads.clone()),
            ("nodes", args.nodes.clone()),
            ("n_edges", args.n_edges.clone()),
            ("bins", args.bins.clone()),
            ("bursts", args.bursts.clone()),
            ("burst_size", args.burst_size.clone()),
            ("fanout", args.fanout.clone()),
            ("background_rate", args.background_rate.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k, v);
            }
        }
        Ok(Settings { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn params(&self) -> Result<PipelineParams, CliError> {
        let mut p = PipelineParams::default();
        for &key in PARAM_KEYS {
            if let Some(v) = self.get(key) {
                p.set(key, v)?;
            }
        }
        p.validate()?;
        Ok(p)
    }

    fn format(&self) -> Result<EdgeFormat, CliError> {
        Ok(match self.get("format") {
            Some(f) => f.parse()?,
            None => EdgeFormat::Comma,
        })
    }

    fn synthetic(&self, seed: u64) -> Result<SyntheticConfig, CliError> {
        let d = SyntheticConfig::default();
        let background_rate = match self.get("background_rate") {
            Some(_) => Some(self.parse("background_rate", 0.0)?),
            None => None,
        };
        let cfg = SyntheticConfig {
            n_nodes: self.parse("nodes", d.n_nodes)?,
            n_edges: self.parse("n_edges", d.n_edges)?,
            n_bins: self.parse("bins", d.n_bins)?,
            burst_count: self.parse("bursts", d.burst_count)?,
            burst_size: self.parse("burst_size", d.burst_size)?,
            burst_fanout: self.parse("fanout", d.burst_fanout)?,
            background_rate,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn canonical(key: &str) -> Option<&'static str> {
    let k = key.trim().replace('-', "_");
    eval::canonical_key(&k).or_else(|| OTHER_KEYS.iter().copied().find(|&o| o == k))
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => Settings::load(a).and_then(|s| cmd_run(&s, stdout, stderr)),
        Command::Synth(a) => Settings::load(a).and_then(|s| cmd_synth(&s, stdout)),
        Command::Bench(a) => Settings::load(a).and_then(|s| cmd_bench(&s, stdout, stderr)),
        Command::Sweep(a) => Settings::load(a).and_then(|s| cmd_sweep(&s, stdout, stderr)),
    };
    match result {
        Ok(()) | Err(CliError::Closed) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn meta_path(edges: &Path) -> PathBuf {
    let mut s = edges.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Reads edges (and labels, if configured). Returns the stream and the load
/// time in seconds.
fn load_stream(s: &Settings, stderr: &mut dyn Write) -> Result<Option<(Vec<EdgeEvent>, f64)>, CliError> {
    let Some(path) = s.path("edges") else {
        return Ok(None);
    };
    let format = s.format()?;
    let start = Instant::now();
    let (mut edges, warning) = stream_io::read_edges(&path, format)?;
    if let Some(w) = warning {
        let _ = writeln!(stderr, "warning: {w}");
    }
    if let Some(lp) = s.path("labels") {
        let labels = stream_io::read_labels(&lp)?;
        stream_io::attach_labels(&mut edges, &labels)?;
    }
    let load = start.elapsed().as_secs_f64();
    check_meta(&path, edges.len())?;
    Ok(Some((edges, load)))
}

/// Compares the edge count against a `<edges>.meta` side-car, when present.
fn check_meta(edges_path: &Path, n: usize) -> Result<(), CliError> {
    let meta = meta_path(edges_path);
    let Ok(text) = fs::read_to_string(&meta) else {
        return Ok(());
    };
    for line in text.lines() {
        if let Some(v) = line.trim().strip_prefix("n_edges=") {
            let expected: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::Data(format!("{}: bad n_edges `{v}`", meta.display())))?;
            if expected != n {
                return Err(CliError::Data(format!(
                    "{} records {expected} edges but {} holds {n}",
                    meta.display(),
                    edges_path.display()
                )));
            }
        }
    }
    Ok(())
}

/// Edges from `--edges`, or a synthetic stream built from the synth keys.
fn stream_or_synthetic(s: &Settings, seed: u64, stderr: &mut dyn Write) -> Result<Vec<EdgeEvent>, CliError> {
    match load_stream(s, stderr)? {
        Some((edges, _)) => Ok(edges),
        None => {
            let cfg = s.synthetic(seed)?;
            Ok(stream_io::generate_synthetic(&cfg)?.edges)
        }
    }
}

fn cmd_run(s: &Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let params = s.params()?;
    if s.get("edges").is_none() {
        return Err(CliError::Usage("`run` needs --edges".into()));
    }
    let (edges, load) = load_stream(s, stderr)?.expect("edges path checked above");
    let (scored, mut report) = eval::run_pipeline(&edges, &params)?;
    report.load_seconds = Some(load);

    match s.path("out") {
        Some(path) => {
            let mut w = create(&path)?;
            output::write_scores(&mut w, &scored).map_err(|e| io_err(&path, e))?;
        }
        None => output::write_scores(&mut *stdout, &scored).map_err(stdout_err)?,
    }
    output::write_report(&mut *stdout, &report, "# ").map_err(stdout_err)?;
    Ok(())
}

fn cmd_synth(s: &Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seed = s.parse("seed", 42u64)?;
    let cfg = s.synthetic(seed)?;
    let Some(out) = s.path("out") else {
        return Err(CliError::Usage("`synth` needs --out".into()));
    };
    let format = s.format()?;
    let labels_path = s.path("labels").unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".labels");
        PathBuf::from(p)
    });
    let stream = stream_io::generate_synthetic(&cfg)?;
    let mut w = create(&out)?;
    stream_io::write_edges(&mut w, &stream.edges, format).map_err(|e| io_err(&out, e))?;
    let mut w = create(&labels_path)?;
    stream_io::write_labels(&mut w, &stream.edges).map_err(|e| io_err(&labels_path, e))?;

    let anomalous = stream.edges.iter().filter(|e| e.label == Some(true)).count();
    let meta = meta_path(&out);
    let mut w = create(&meta)?;
    writeln!(
        w,
        "n_edges={}\nanomalous={anomalous}\nnodes={}\nbins={}\nbursts={}\nburst_size={}\nfanout={}\nseed={}",
        stream.edges.len(),
        cfg.n_nodes,
        cfg.effective_bins(),
        cfg.burst_count,
        cfg.burst_size,
        cfg.burst_fanout,
        cfg.seed
    )
    .and_then(|_| w.flush())
    .map_err(|e| io_err(&meta, e))?;

    let _ = writeln!(
        stdout,
        "wrote {} edges ({anomalous} anomalous) to {}, labels to {}",
        stream.edges.len(),
        out.display(),
        labels_path.display()
    );
    Ok(())
}

fn cmd_bench(s: &Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let params = s.params()?;
    let repeats = s.parse("repeats", 3usize)?;
    let edges = stream_or_synthetic(s, params.sketch.seed, stderr)?;
    let prefixes: Vec<usize> = (1..=6).map(|e| 10usize.pow(e)).collect();
    let rows = eval::bench(&edges, &params, &prefixes, repeats)?;
    match s.path("out") {
        Some(path) => {
            let mut w = create(&path)?;
            output::write_bench(&mut w, &rows).map_err(|e| io_err(&path, e))?;
        }
        None => output::write_bench(&mut *stdout, &rows).map_err(stdout_err)?,
    }
    Ok(())
}

fn cmd_sweep(s: &Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let params = s.params()?;
    let repeats = s.parse("repeats", 5usize)?;
    let threads = s.parse("threads", 1usize)?;
    let Some(grid_path) = s.path("grid") else {
        return Err(CliError::Usage("`sweep` needs --grid".into()));
    };
    let text = fs::read_to_string(&grid_path).map_err(|e| io_err(&grid_path, e))?;
    let grid = eval::parse_grid(&text).map_err(|e| match e {
        Error::Parse { line, reason, .. } => {
            CliError::Usage(format!("{}:{line}: {reason}", grid_path.display()))
        }
        other => CliError::from(other),
    })?;
    let edges = stream_or_synthetic(s, params.sketch.seed, stderr)?;
    let rows = eval::sweep(&grid, &params, &edges, repeats, threads)?;
    for r in &rows {
        if let Some(err) = &r.error {
            let _ = writeln!(stderr, "warning: sweep cell failed: {err}");
        }
    }
    match s.path("out") {
        Some(path) => {
            let mut w = create(&path)?;
            output::write_sweep_report(&mut w, &rows).map_err(|e| io_err(&path, e))?;
        }
        None => output::write_sweep_report(&mut *stdout, &rows).map_err(stdout_err)?,
    }
    Ok(())
}
