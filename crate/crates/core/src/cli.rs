//! Batch front-end behind the `meshless` binary.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    convergence_run, convergence_slope, halton_with_boundary, lebesgue_map, loglog_slope, spectrum_study, timing_run,
};
use crate::error::{Error, Result};
use crate::geometry::{generate_reference_nodes, spacing_for_target};
use crate::params::ScalingLaw;
use crate::problems::{problem_by_name, ProblemDef};
use crate::timestepper::{SolverConfig, SolverState};

/// Run configuration. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `disk2d` or `heat`.
    pub problem: String,
    /// Peclet number of `disk2d`: 1 or 1000.
    pub pe: u32,
    pub xi: u32,
    /// Node spacing; takes precedence over `n_target`.
    pub h: Option<f64>,
    /// Approximate interior plus boundary node count.
    pub n_target: usize,
    pub t_final: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub xi_list: Vec<u32>,
    pub n_list: Vec<usize>,
    /// Polynomial degree for `spectrum` and `lebesgue-map`.
    pub ell: u32,
    pub law: ScalingLaw,
    pub n_halton: usize,
    /// Evenly spaced points per side of the square in `lebesgue-map`.
    pub n_edge: usize,
    /// Timed steps per node count in `bench`.
    pub bench_steps: usize,
    /// Record real wall-clock times in `steps.csv`.
    pub wall_clock: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "disk2d".into(),
            pe: 1000,
            xi: 2,
            h: None,
            n_target: 1400,
            t_final: None,
            seed: 1,
            out_dir: PathBuf::from("out"),
            xi_list: vec![2, 4],
            n_list: vec![700, 1400, 2800],
            ell: 6,
            law: ScalingLaw::MinusOne,
            n_halton: 4000,
            n_edge: 63,
            bench_steps: 5,
            wall_clock: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn problem(&self) -> Result<ProblemDef> {
        problem_by_name(&self.problem, self.pe)
    }

    pub fn spacing(&self) -> Result<f64> {
        match self.h {
            Some(h) => Ok(h),
            None => spacing_for_target(self.n_target, self.seed),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "meshless", version, about = "Overlapped RBF-FD solver for moving-domain advection-diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, or a `.csv` file for single-table commands.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation to the final time.
    Solve(Common),
    /// Error and GMRES iterations over `xi_list` x `n_list`.
    Converge(Common),
    /// Spectrum of the discrete Laplacian under a scaling law.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Target node count.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long)]
        law: Option<ScalingLaw>,
    },
    /// Local Laplacian Lebesgue values on Halton points.
    LebesgueMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long)]
        law: Option<ScalingLaw>,
    },
    /// Preprocessing and per-step wall time over `n_list`.
    Bench(Common),
}

fn settings(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Output file for a single-table command.
fn table_path(common: &Common, cfg: &RunConfig, default: &str) -> Result<PathBuf> {
    let path = match &common.out {
        Some(p) if p.extension().is_some_and(|e| e == "csv") => p.clone(),
        Some(p) => p.join(default),
        None => cfg.out_dir.join(default),
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(path)
}

fn out_dir(common: &Common, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = common.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

#[derive(Serialize)]
struct SolutionRow {
    x: f64,
    y: f64,
    role: u8,
    c: f64,
    exact: f64,
}

#[derive(Serialize)]
struct StepRow {
    step: usize,
    t: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "N_b")]
    n_b: usize,
    #[serde(rename = "N_s")]
    n_s: usize,
    rows_copied: usize,
    rows_recomputed: usize,
    gmres_iters: usize,
    residual: f64,
    wall_ms: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    problem: &'a str,
    pe: u32,
    xi: u32,
    h: f64,
    n: usize,
    steps: usize,
    dt: f64,
    error: f64,
    mean_gmres_iters: f64,
}

fn solve(common: &Common) -> Result<()> {
    let cfg = settings(common)?;
    let problem = cfg.problem()?;
    let h = cfg.spacing()?;
    let mut sc = SolverConfig::new(cfg.xi, h, cfg.seed);
    sc.t_final = cfg.t_final;
    sc.wall_clock = cfg.wall_clock;
    let mut st = SolverState::init(problem, sc)?;
    st.run()?;
    let dir = out_dir(common, &cfg)?;

    let lv = &st.history[0];
    let mut w = csv_writer(&dir.join("solution.csv"))?;
    for (i, (&p, &c)) in lv.ext.domain_points().iter().zip(&lv.values).enumerate() {
        w.serialize(SolutionRow {
            x: p.x,
            y: p.y,
            role: lv.ext.role(i).code(),
            c,
            exact: (st.problem.exact)(p, lv.t),
        })?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("steps.csv"))?;
    for r in &st.log {
        w.serialize(StepRow {
            step: r.step,
            t: r.t,
            n: r.n,
            n_b: r.n_b,
            n_s: r.n_s,
            rows_copied: r.rows_copied,
            rows_recomputed: r.rows_recomputed,
            gmres_iters: r.gmres_iters,
            residual: r.residual,
            wall_ms: r.wall_ms,
        })?;
    }
    w.flush()?;

    let summary = Summary {
        problem: &st.problem.name,
        pe: cfg.pe,
        xi: cfg.xi,
        h,
        n: lv.ext.n(),
        steps: st.step,
        dt: st.dt,
        error: st.error()?,
        mean_gmres_iters: st.mean_iterations(),
    };
    let mut f = File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, &summary).map_err(std::io::Error::from)?;
    f.write_all(b"\n")?;
    println!("{} xi={} N={} error={:.3e} iters={:.1}", summary.problem, summary.xi, summary.n, summary.error, summary.mean_gmres_iters);
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceOut {
    #[serde(rename = "N")]
    n: usize,
    xi: u32,
    error: f64,
    iters: f64,
}

fn converge(common: &Common) -> Result<()> {
    let cfg = settings(common)?;
    let problem = cfg.problem()?;
    let hs = cfg
        .n_list
        .iter()
        .map(|&n| spacing_for_target(n, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    let rows = convergence_run(&problem, &cfg.xi_list, &hs, cfg.seed, common.jobs)?;
    let path = table_path(common, &cfg, "convergence.csv")?;
    let mut w = csv_writer(&path)?;
    for r in &rows {
        w.serialize(ConvergenceOut {
            n: r.n,
            xi: r.xi,
            error: r.error,
            iters: r.iters,
        })?;
    }
    w.flush()?;
    for &xi in &cfg.xi_list {
        if cfg.n_list.len() > 1 {
            println!("xi={xi} slope={:.2}", convergence_slope(&rows, xi));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EigRow {
    re: f64,
    im: f64,
}

fn spectrum(common: &Common, n: Option<usize>, ell: Option<u32>, law: Option<ScalingLaw>) -> Result<()> {
    let mut cfg = settings(common)?;
    cfg.n_target = n.unwrap_or(cfg.n_target);
    let ell = ell.unwrap_or(cfg.ell);
    let law = law.unwrap_or(cfg.law);
    let ext = generate_reference_nodes(cfg.spacing()?, cfg.seed)?.extended();
    let s = spectrum_study(&ext, ell, law)?;
    let path = table_path(common, &cfg, "spectrum.csv")?;
    let mut w = csv_writer(&path)?;
    for z in &s.eigenvalues {
        w.serialize(EigRow { re: z.re, im: z.im })?;
    }
    w.flush()?;
    println!("N={} ell={ell} law={law:?} max_re={:.6e}", ext.n(), s.max_re);
    Ok(())
}

#[derive(Serialize)]
struct LebesgueRow {
    x: f64,
    y: f64,
    lambda: f64,
    lambda_max: f64,
}

fn lebesgue(common: &Common, ell: Option<u32>, law: Option<ScalingLaw>) -> Result<()> {
    let cfg = settings(common)?;
    let ell = ell.unwrap_or(cfg.ell);
    let law = law.unwrap_or(cfg.law);
    let pts = halton_with_boundary(cfg.n_halton, cfg.n_edge);
    let map = lebesgue_map(&pts, ell, law)?;
    let path = table_path(common, &cfg, "lebesgue.csv")?;
    let mut w = csv_writer(&path)?;
    for ((p, &l), &m) in map.points.iter().zip(&map.at_node).zip(&map.stencil_max) {
        w.serialize(LebesgueRow {
            x: p.x,
            y: p.y,
            lambda: l,
            lambda_max: m,
        })?;
    }
    w.flush()?;
    println!(
        "ell={ell} law={law:?} median={:.4e} median_max={:.4e}",
        crate::diagnostics::median(&map.at_node),
        crate::diagnostics::median(&map.stencil_max)
    );
    Ok(())
}

#[derive(Serialize)]
struct TimingOut<'a> {
    #[serde(rename = "N")]
    n: usize,
    phase: &'a str,
    ms: f64,
}

fn bench(common: &Common) -> Result<()> {
    let cfg = settings(common)?;
    let problem = cfg.problem()?;
    let hs = cfg
        .n_list
        .iter()
        .map(|&n| spacing_for_target(n, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    let rows = timing_run(&problem, cfg.xi, &hs, cfg.seed, cfg.bench_steps)?;
    let path = table_path(common, &cfg, "timing.csv")?;
    let mut w = csv_writer(&path)?;
    for r in &rows {
        w.serialize(TimingOut {
            n: r.n,
            phase: "preprocess",
            ms: r.preprocess_ms,
        })?;
        w.serialize(TimingOut {
            n: r.n,
            phase: "step",
            ms: r.step_ms,
        })?;
    }
    w.flush()?;
    if rows.len() > 1 {
        let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let s: Vec<f64> = rows.iter().map(|r| r.step_ms).collect();
        let p: Vec<f64> = rows.iter().map(|r| r.preprocess_ms).collect();
        println!("step slope={:.2} preprocess slope={:.2}", loglog_slope(&n, &s), loglog_slope(&n, &p));
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(c) => solve(c),
        Command::Converge(c) => converge(c),
        Command::Spectrum { common, n, ell, law } => spectrum(common, *n, *ell, *law),
        Command::LebesgueMap { common, ell, law } => lebesgue(common, *ell, *law),
        Command::Bench(c) => bench(c),
    }
}

/// Parse `args`, run, and return the process exit code: 0 on success,
/// 2 for usage and configuration errors, 1 for failures during the run.
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
    match execute(&cli) {
        Ok(()) => 0,
        Err(e @ (Error::Config { .. } | Error::UnknownProblem(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_config() {
        let cfg: RunConfig = serde_json::from_str(r#"{"pe": 1, "xi": 4, "law": "classical"}"#).unwrap();
        assert_eq!(cfg.pe, 1);
        assert_eq!(cfg.xi, 4);
        assert_eq!(cfg.law, ScalingLaw::Classical);
        assert_eq!(cfg.problem, "disk2d");
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn missing_config_names_path() {
        let e = RunConfig::load(Path::new("/nonexistent/run.json")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/run.json"));
        assert_eq!(main_with_args(["meshless", "solve", "--config", "/nonexistent/run.json"]), 2);
        assert_eq!(main_with_args(["meshless", "solve", "--frobnicate"]), 2);
    }

    #[test]
    fn spectrum_out_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("spec.csv");
        let code = main_with_args([
            "meshless",
            "spectrum",
            "--n",
            "150",
            "--ell",
            "3",
            "--law",
            "classical",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("re,im\n"));
        assert!(!text.contains('\r'));
    }
}
