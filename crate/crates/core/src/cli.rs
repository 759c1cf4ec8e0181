//! Command-line front end: `verify` cross-checks one label against the matrix
//! oracle, `sweep` scans a gamma grid and reports uncertainty ratios and
//! feasibility values, `evolve` tracks a label along the exact time evolution.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_params, ModelParams, PhysicalInputs};
use crate::oracle;
use crate::qmath::{q_radius, QValue};
use crate::series::{self, Convention};
use crate::states::{self, CoherentLabel};
use crate::uncertainty::{self, FeasibilityValues, GurReport, PairTag, VarianceSet};

/// Exit code for a completed run whose checks failed (crosscheck mismatch or
/// uncertainty violation). Usage and configuration errors exit with 2.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const CSV_HEADER: &str = "q,theta,m,omega,hbar,j1,j2,gamma1,gamma2,t,\
chi1,chi2,kappa1,kappa2,\
rhs_x1x2,rhs_x1p1,rhs_x2p2,rhs_p1p2,\
ratio_x1x2,ratio_x1p1,ratio_x2p2,ratio_p1p2,\
p1,p2,p3,p4,min_ratio,violated";

#[derive(Parser, Debug)]
#[command(name = "qbc", version, about = "Two-mode q-deformed bi-coherent states: \
uncertainty products, commutator bounds, and matrix-oracle verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cross-check every closed-form identity against the truncated-matrix
    /// oracle at one coherent label.
    Verify(VerifyArgs),
    /// Scan a (gamma1, gamma2) grid, writing per-point ratios and
    /// feasibility values plus a summary.
    Sweep(SweepArgs),
    /// Follow a label along the exact evolution and record variances over
    /// time.
    Evolve(EvolveArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Deformation parameter in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Noncommutativity parameter theta (dimensionless units m = omega =
    /// hbar = 1).
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Args, Debug, Clone)]
pub struct LabelArgs {
    #[arg(long, default_value_t = 0.5)]
    pub j1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub j2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma2: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub label: LabelArgs,
    /// Basis cutoff per mode: a number, or "auto" to grow until the
    /// truncation tolerance is met.
    #[arg(long, default_value = "auto")]
    pub cutoff: String,
    #[arg(long, value_enum, default_value = "spectral-gap")]
    pub convention: CliConvention,
    /// Comparison tolerance for each cross-checked quantity.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Optional JSON-lines output path (one report per line).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// JSON configuration file; omitted fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path for the per-point table.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// Optional path for the summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Worker threads; 0 means one per logical CPU.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub label: LabelArgs,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "spectral-gap")]
    pub convention: CliConvention,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Convention as a clap value enum, mirrored onto [`Convention`].
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliConvention {
    SpectralGap,
    PaperLiteral,
}

impl From<CliConvention> for Convention {
    fn from(c: CliConvention) -> Convention {
        match c {
            CliConvention::SpectralGap => Convention::SpectralGap,
            CliConvention::PaperLiteral => Convention::PaperLiteral,
        }
    }
}

/// Uniform grid over one label angle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

fn default_one() -> f64 {
    1.0
}

fn default_gamma_grid() -> GridSpec {
    GridSpec { min: -std::f64::consts::PI, max: std::f64::consts::PI, count: 33 }
}

fn default_series_tol() -> f64 {
    series::DEFAULT_SERIES_TOL
}

fn default_gur_tol() -> f64 {
    uncertainty::DEFAULT_GUR_TOL
}

/// Sweep configuration; every field has a default so a partial JSON file (or
/// none at all) is valid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub q: f64,
    pub theta: f64,
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
    pub j1: f64,
    pub j2: f64,
    pub gamma1: GridSpec,
    pub gamma2: GridSpec,
    pub convention: Convention,
    pub series_tol: f64,
    pub gur_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            q: 1.0,
            theta: 0.0,
            m: default_one(),
            omega: default_one(),
            hbar: default_one(),
            j1: 0.5,
            j2: 0.5,
            gamma1: default_gamma_grid(),
            gamma2: default_gamma_grid(),
            convention: Convention::default(),
            series_tol: default_series_tol(),
            gur_tol: default_gur_tol(),
        }
    }
}

impl SweepConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            None => Ok(SweepConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("reading {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("parsing {}: {e}", p.display())))
            }
        }
    }
}

/// One evaluated grid point, in the column order of [`CSV_HEADER`].
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub q: f64,
    pub theta: f64,
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
    pub j1: f64,
    pub j2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub t: f64,
    pub variances: VarianceSet,
    pub rhs: [f64; 4],
    pub ratios: [f64; 4],
    pub feasibility: FeasibilityValues,
    pub min_ratio: f64,
    pub violated: bool,
}

impl SweepRow {
    fn csv_line(&self) -> String {
        let f = |x: f64| format!("{x:.16e}");
        let mut cols: Vec<String> = vec![
            f(self.q),
            f(self.theta),
            f(self.m),
            f(self.omega),
            f(self.hbar),
            f(self.j1),
            f(self.j2),
            f(self.gamma1),
            f(self.gamma2),
            f(self.t),
            f(self.variances.chi1),
            f(self.variances.chi2),
            f(self.variances.kappa1),
            f(self.variances.kappa2),
        ];
        cols.extend(self.rhs.iter().map(|&x| f(x)));
        cols.extend(self.ratios.iter().map(|&x| f(x)));
        cols.extend(
            [
                self.feasibility.p1,
                self.feasibility.p2,
                self.feasibility.p3,
                self.feasibility.p4,
                self.min_ratio,
            ]
            .iter()
            .map(|&x| f(x)),
        );
        cols.push(if self.violated { "1".into() } else { "0".into() });
        cols.join(",")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub points_evaluated: usize,
    pub points_skipped_out_of_domain: usize,
    pub violations: usize,
    pub min_ratio: f64,
    pub min_ratio_at: Option<(f64, f64)>,
    pub saturated_points: usize,
    pub violation_witnesses: Vec<(f64, f64)>,
}

/// Evaluate the sweep grid. Rows come back in row-major (gamma1 outer) order
/// regardless of thread count.
pub fn run_sweep(config: &SweepConfig) -> Result<(Vec<SweepRow>, SweepSummary)> {
    let q = QValue::new(config.q)?;
    let inputs = PhysicalInputs::new(config.m, config.omega, config.hbar, config.theta, q)?;
    let params = derive_params(inputs)?;
    let radius = q_radius(q);
    if config.j1 >= radius || config.j2 >= radius {
        return Err(Error::Domain(format!(
            "J=({}, {}) outside convergence radius {radius} for q={}",
            config.j1,
            config.j2,
            config.q
        )));
    }

    let g1s = config.gamma1.points();
    let g2s = config.gamma2.points();
    let mut grid: Vec<(usize, f64, f64)> = Vec::with_capacity(g1s.len() * g2s.len());
    for (i, &g1) in g1s.iter().enumerate() {
        for (k, &g2) in g2s.iter().enumerate() {
            grid.push((i * g2s.len() + k, g1, g2));
        }
    }

    let mut indexed: Vec<(usize, SweepRow)> = grid
        .par_iter()
        .map(|&(idx, g1, g2)| -> Result<(usize, SweepRow)> {
            let row = evaluate_point(config, &params, q, g1, g2)?;
            Ok((idx, row))
        })
        .collect::<Result<Vec<_>>>()?;
    indexed.sort_by_key(|&(idx, _)| idx);
    let rows: Vec<SweepRow> = indexed.into_iter().map(|(_, r)| r).collect();

    let mut summary = SweepSummary {
        points_evaluated: rows.len(),
        points_skipped_out_of_domain: 0,
        violations: 0,
        min_ratio: f64::INFINITY,
        min_ratio_at: None,
        saturated_points: 0,
        violation_witnesses: Vec::new(),
    };
    for row in &rows {
        if row.min_ratio < summary.min_ratio {
            summary.min_ratio = row.min_ratio;
            summary.min_ratio_at = Some((row.gamma1, row.gamma2));
        }
        if row.violated {
            summary.violations += 1;
            if summary.violation_witnesses.len() < 16 {
                summary.violation_witnesses.push((row.gamma1, row.gamma2));
            }
        }
        if (row.min_ratio - 1.0).abs() <= uncertainty::SATURATION_REL_TOL {
            summary.saturated_points += 1;
        }
    }
    Ok((rows, summary))
}

fn evaluate_point(
    config: &SweepConfig,
    params: &ModelParams,
    q: QValue,
    gamma1: f64,
    gamma2: f64,
) -> Result<SweepRow> {
    let label = CoherentLabel::new(config.j1, gamma1, config.j2, gamma2)?;
    let gb = series::g_bundle(
        config.j1,
        config.j2,
        gamma1,
        gamma2,
        q,
        config.convention,
        config.series_tol,
    )?;
    let variances = uncertainty::variances_closed_form(params, q, &gb, &label)?;
    let bounds = uncertainty::commutator_rhs(&label, params, q);
    let reports = uncertainty::gur_reports_from_parts(&variances, &bounds, config.gur_tol);
    let feasibility = uncertainty::feasibility_conditions(&label, params, &gb);

    let pick = |tag: PairTag| -> &GurReport {
        reports.iter().find(|r| r.pair == tag).expect("report present for every pair")
    };
    let ratios = [
        pick(PairTag::X1X2).ratio,
        pick(PairTag::X1P1).ratio,
        pick(PairTag::X2P2).ratio,
        pick(PairTag::P1P2).ratio,
    ];
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let violated = reports.iter().any(|r| !r.satisfied);

    Ok(SweepRow {
        q: config.q,
        theta: config.theta,
        m: config.m,
        omega: config.omega,
        hbar: config.hbar,
        j1: config.j1,
        j2: config.j2,
        gamma1,
        gamma2,
        t: 0.0,
        variances,
        rhs: [bounds.x1x2, bounds.x1p1, bounds.x2p2, bounds.p1p2],
        ratios,
        feasibility,
        min_ratio,
        violated,
    })
}

/// Serialize sweep rows as CSV with the pinned header.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Serialize sweep rows as JSON lines.
pub fn sweep_json(rows: &[SweepRow]) -> Result<String> {
    let mut out = String::new();
    for row in rows {
        out.push_str(
            &serde_json::to_string(row).map_err(|e| Error::Config(e.to_string()))?,
        );
        out.push('\n');
    }
    Ok(out)
}

fn write_or_print(path: Option<&PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| Error::Config(format!("writing {}: {e}", p.display()))),
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| Error::Config(format!("stdout: {e}")))
        }
    }
}

fn model_params(model: &ModelArgs) -> Result<(ModelParams, QValue)> {
    let q = QValue::new(model.q)?;
    let inputs = PhysicalInputs::new(model.m, model.omega, model.hbar, model.theta, q)?;
    Ok((derive_params(inputs)?, q))
}

fn run_verify(args: &VerifyArgs) -> Result<i32> {
    let (params, q) = model_params(&args.model)?;
    let label = CoherentLabel::new(
        args.label.j1,
        args.label.gamma1,
        args.label.j2,
        args.label.gamma2,
    )?;
    let n_max = match args.cutoff.as_str() {
        "auto" => 512,
        s => s
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("--cutoff must be 'auto' or a number, got '{s}'")))?,
    };
    let reports =
        oracle::crosscheck(&label, &params, q, args.convention.into(), args.tol, n_max)?;

    let mut failures = 0usize;
    let mut lines = String::new();
    for r in &reports {
        let ok = r.abs_diff <= args.tol;
        if !ok {
            failures += 1;
        }
        println!(
            "{} {:12} closed={:+.12e}{:+.12e}i matrix={:+.12e}{:+.12e}i diff={:.3e}",
            if ok { "PASS" } else { "FAIL" },
            r.quantity,
            r.closed_form.re,
            r.closed_form.im,
            r.matrix_value.re,
            r.matrix_value.im,
            r.abs_diff
        );
        lines.push_str(&serde_json::to_string(r).map_err(|e| Error::Config(e.to_string()))?);
        lines.push('\n');
    }
    if let Some(p) = &args.out {
        fs::write(p, &lines)
            .map_err(|e| Error::Config(format!("writing {}: {e}", p.display())))?;
    }
    println!(
        "verify: {}/{} identities within {:e}",
        reports.len() - failures,
        reports.len(),
        args.tol
    );
    Ok(if failures == 0 { 0 } else { EXIT_CHECK_FAILED })
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<i32> {
    let config = SweepConfig::load(args.config.as_ref())?;
    if args.workers > 0 {
        // A local pool keeps --workers from fighting any global pool set by a
        // host process.
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let (rows, summary) = pool.install(|| run_sweep(&config))?;
        emit_sweep(args, &rows, &summary)
    } else {
        let (rows, summary) = run_sweep(&config)?;
        emit_sweep(args, &rows, &summary)
    }
}

fn emit_sweep(args: &SweepArgs, rows: &[SweepRow], summary: &SweepSummary) -> Result<i32> {
    let body = match args.format {
        OutputFormat::Csv => sweep_csv(rows),
        OutputFormat::Json => sweep_json(rows)?,
    };
    write_or_print(args.out.as_ref(), &body)?;
    let summary_json =
        serde_json::to_string_pretty(summary).map_err(|e| Error::Config(e.to_string()))?;
    match &args.summary {
        Some(p) => fs::write(p, format!("{summary_json}\n"))
            .map_err(|e| Error::Config(format!("writing {}: {e}", p.display())))?,
        None => eprintln!("{summary_json}"),
    }
    Ok(if summary.violations == 0 { 0 } else { EXIT_CHECK_FAILED })
}

fn run_evolve(args: &EvolveArgs) -> Result<i32> {
    let (params, q) = model_params(&args.model)?;
    let label = CoherentLabel::new(
        args.label.j1,
        args.label.gamma1,
        args.label.j2,
        args.label.gamma2,
    )?;
    if args.steps == 0 {
        return Err(Error::Config("--steps must be positive".into()));
    }
    let conv: Convention = args.convention.into();
    let mut out = String::from("quantity,t,value\n");
    for i in 0..=args.steps {
        let t = args.t_max * i as f64 / args.steps as f64;
        let lt = states::evolve(&label, t, &params);
        let gb = series::g_bundle(
            lt.j1,
            lt.j2,
            lt.gamma1,
            lt.gamma2,
            q,
            conv,
            series::DEFAULT_SERIES_TOL,
        )?;
        let v = uncertainty::variances_closed_form(&params, q, &gb, &lt)?;
        let bounds = uncertainty::commutator_rhs(&lt, &params, q);
        let reports =
            uncertainty::gur_reports_from_parts(&v, &bounds, uncertainty::DEFAULT_GUR_TOL);
        let min_ratio = reports
            .iter()
            .filter(|r| r.rhs > 0.0)
            .map(|r| r.ratio)
            .fold(f64::INFINITY, f64::min);
        for (name, value) in [
            ("gamma1", lt.gamma1),
            ("gamma2", lt.gamma2),
            ("chi1", v.chi1),
            ("chi2", v.chi2),
            ("kappa1", v.kappa1),
            ("kappa2", v.kappa2),
            ("min_ratio", min_ratio),
        ] {
            out.push_str(&format!("{name},{t:.16e},{value:.16e}\n"));
        }
    }
    write_or_print(args.out.as_ref(), &out)?;
    Ok(0)
}

/// Dispatch a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Verify(args) => run_verify(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Evolve(args) => run_evolve(args),
    }
}
