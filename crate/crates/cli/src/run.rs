use std::path::{Path, PathBuf};
use std::time::Instant;

use netinf_core::bht::{dirichlet_experiment, example1_rho, example2_report, Example1Params};
use netinf_core::metrics::{
    auc_bound_numerical, auc_bound_shapiro, auc_bound_simple, mip_curve, roc_sweep, Algorithm, SweepPoint,
};
use netinf_core::net_bounds::{
    envelope_excess, example1_covariance_rho, roc_upper_envelope, side_info_curve, DynamicEr,
};
use netinf_core::recovery::{LassoConfig, OcseConfig};
use netinf_core::{BoundEstimate, ModelParams, PiGrid};
use serde::Serialize;
use serde_json::json;

use crate::config::{validate, Config, ConfigErrors, Experiment, Plan, Settings};
use crate::output::{ensure_dir, write_atomic, Manifest, RunOutputs, Table, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigErrors),
    #[error("{experiment}: {source}")]
    Numerical {
        experiment: Experiment,
        source: netinf_core::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io { .. } => 1,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Io { context, source }
}

/// Tables and a JSON summary produced by one experiment.
pub struct Results {
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
}

/// Runs a validated plan on the current rayon pool.
pub fn execute(plan: &Plan) -> netinf_core::Result<Results> {
    let seed = plan.seed;
    match &plan.settings {
        Settings::Example1 {
            a,
            noise_ratio,
            horizons,
        } => run_example1(*a, *noise_ratio, horizons),
        Settings::Example2 => run_example2(),
        Settings::Fig1 { dim, trials } => run_fig1(*dim, *trials, seed),
        Settings::Bound {
            model,
            pi_grid,
            trials,
            fpr_grid,
        } => run_bound(model, pi_grid, *trials, fpr_grid, seed),
        Settings::Roc {
            model,
            lambda,
            theta,
            sims,
            num_perms,
            pi_grid,
            trials,
            fpr_grid,
        } => run_roc(
            model, lambda, theta, *sims, *num_perms, pi_grid, *trials, fpr_grid, seed,
        ),
        Settings::Auc {
            rho,
            fpr_grid,
            pi_grid,
        } => run_auc(rho, fpr_grid, pi_grid),
        Settings::Mip {
            model,
            horizons,
            draws,
        } => run_mip(model, horizons, *draws, seed),
    }
}

fn run_example1(a: f64, noise_ratio: f64, horizons: &[usize]) -> netinf_core::Result<Results> {
    let mut table = Table::new("example1", &["T", "rho_closed_form", "rho_covariance_based"]);
    let mut worst: f64 = 0.0;
    for &t in horizons {
        let closed = example1_rho(&Example1Params {
            a,
            noise_ratio,
            horizon: t,
            beta: 0.5,
        })?;
        let exact = example1_covariance_rho(a, noise_ratio, t).map_err(|e| e.context(format!("T = {t}")))?;
        worst = worst.max((closed - exact).abs() / exact.abs().max(f64::MIN_POSITIVE));
        table.push(vec![t.into(), closed.into(), exact.into()]);
    }
    Ok(Results {
        tables: vec![table],
        summary: json!({ "a": a, "noise_ratio": noise_ratio, "max_rel_diff": worst }),
    })
}

fn run_example2() -> netinf_core::Result<Results> {
    let r = example2_report(0.5)?;
    Ok(Results {
        tables: Vec::new(),
        summary: json!({
            "lb_direct": r.lb_direct,
            "lb_side_info": r.lb_side_info,
            "exact_pe": r.exact_pe,
            "unsquared_direct": r.variant_direct,
            "unsquared_side_info": r.variant_side_info,
        }),
    })
}

fn run_fig1(dim: usize, trials: usize, seed: u64) -> netinf_core::Result<Results> {
    let rows = dirichlet_experiment(dim, trials, seed)?;
    let mut table = Table::new("fig1", &["trial", "lb_direct", "lb_side_info", "exact_pe"]);
    let mut direct_wins = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for r in &rows {
        if r.lb_direct > r.lb_side_info {
            direct_wins += 1;
        }
        max_excess = max_excess.max(r.lb_direct.max(r.lb_side_info) - r.exact_pe);
        table.push(vec![r.trial.into(), r.lb_direct.into(), r.lb_side_info.into(), r.exact_pe.into()]);
    }
    Ok(Results {
        tables: vec![table],
        summary: json!({
            "dim": dim,
            "trials": trials,
            "direct_wins": direct_wins,
            "direct_win_fraction": direct_wins as f64 / trials as f64,
            "max_bound_minus_exact": max_excess,
        }),
    })
}

fn bound_tables(
    name: &str,
    pi_grid: &PiGrid,
    bounds: &[BoundEstimate],
    fpr_grid: &[f64],
) -> netinf_core::Result<(Table, Table)> {
    let mut curve = Table::new(name, &["pi", "bound", "stderr"]);
    for (&pi, b) in pi_grid.values().iter().zip(bounds) {
        curve.push(vec![pi.into(), b.value.into(), b.stderr.into()]);
    }
    let values: Vec<f64> = bounds.iter().map(|b| b.value).collect();
    let mut env = Table::new(format!("{name}_envelope"), &["fpr", "tpr_upper"]);
    for p in roc_upper_envelope(pi_grid, &values, fpr_grid)? {
        env.push(vec![p.fpr.into(), p.tpr.into()]);
    }
    Ok((curve, env))
}

fn run_bound(
    model: &ModelParams,
    pi_grid: &PiGrid,
    trials: usize,
    fpr_grid: &[f64],
    seed: u64,
) -> netinf_core::Result<Results> {
    let bounds = side_info_curve(&DynamicEr::from_params(model), model, pi_grid, trials, seed)?;
    let (curve, env) = bound_tables("bound", pi_grid, &bounds, fpr_grid)?;
    let max_stderr = bounds.iter().map(|b| b.stderr).fold(0.0, f64::max);
    Ok(Results {
        tables: vec![curve, env],
        summary: json!({ "trials": trials, "max_stderr": max_stderr }),
    })
}

#[derive(Serialize)]
struct PointSummary {
    param: f64,
    fpr: f64,
    tpr: f64,
    fpr_stderr: f64,
    tpr_stderr: f64,
    excess_over_envelope: f64,
    excess_stderr: f64,
}

fn sweep_table(name: &str, points: &[SweepPoint]) -> Table {
    let mut t = Table::new(name, &["param", "fpr", "tpr"]);
    for p in points {
        t.push(vec![p.param.into(), p.point.fpr.into(), p.point.tpr.into()]);
    }
    t
}

#[allow(clippy::too_many_arguments)]
fn run_roc(
    model: &ModelParams,
    lambda: &[f64],
    theta: &[f64],
    sims: usize,
    num_perms: usize,
    pi_grid: &PiGrid,
    trials: usize,
    fpr_grid: &[f64],
    seed: u64,
) -> netinf_core::Result<Results> {
    let lasso = roc_sweep(Algorithm::Lasso(LassoConfig::default()), lambda, model, sims, seed)?;
    let ocse_cfg = OcseConfig {
        num_perms,
        ..OcseConfig::default()
    };
    let ocse = roc_sweep(Algorithm::Ocse(ocse_cfg), theta, model, sims, seed)?;
    let bounds = side_info_curve(&DynamicEr::from_params(model), model, pi_grid, trials, seed)?;
    let (curve, env) = bound_tables("roc_bound", pi_grid, &bounds, fpr_grid)?;

    let summarize = |points: &[SweepPoint]| -> Vec<PointSummary> {
        points
            .iter()
            .map(|p| {
                let (excess, se) = envelope_excess(pi_grid, &bounds, p.point, p.fpr_stderr, p.tpr_stderr);
                PointSummary {
                    param: p.param,
                    fpr: p.point.fpr,
                    tpr: p.point.tpr,
                    fpr_stderr: p.fpr_stderr,
                    tpr_stderr: p.tpr_stderr,
                    excess_over_envelope: excess,
                    excess_stderr: se,
                }
            })
            .collect()
    };
    let lasso_summary = summarize(&lasso);
    let ocse_summary = summarize(&ocse);
    let worst_z = lasso_summary
        .iter()
        .chain(&ocse_summary)
        .map(|p| {
            if p.excess_over_envelope <= 0.0 {
                0.0
            } else if p.excess_stderr > 0.0 {
                p.excess_over_envelope / p.excess_stderr
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    Ok(Results {
        tables: vec![sweep_table("roc_lasso", &lasso), sweep_table("roc_ocse", &ocse), curve, env],
        summary: json!({
            "sims": sims,
            "trials": trials,
            "lasso": lasso_summary,
            "ocse": ocse_summary,
            "max_excess_in_stderrs": worst_z,
        }),
    })
}

fn run_auc(rho: &[f64], fpr_grid: &[f64], pi_grid: &PiGrid) -> netinf_core::Result<Results> {
    let mut table = Table::new("auc", &["rho", "simple", "shapiro", "numerical"]);
    let mut min_margin = f64::INFINITY;
    for &r in rho {
        let numerical = auc_bound_numerical(r, fpr_grid, pi_grid).map_err(|e| e.context(format!("rho = {r}")))?;
        let shapiro = auc_bound_shapiro(r);
        min_margin = min_margin.min(shapiro - numerical);
        table.push(vec![r.into(), auc_bound_simple(r).into(), shapiro.into(), numerical.into()]);
    }
    Ok(Results {
        tables: vec![table],
        summary: json!({ "min_shapiro_minus_numerical": min_margin }),
    })
}

fn run_mip(model: &ModelParams, horizons: &[usize], draws: usize, seed: u64) -> netinf_core::Result<Results> {
    let curve = mip_curve(model, horizons, draws, seed)?;
    let mut table = Table::new("mip", &["T", "mean_mip", "stderr"]);
    for p in &curve {
        table.push(vec![p.horizon.into(), p.mean.into(), p.stderr.into()]);
    }
    let max_mean = curve.iter().map(|p| p.mean).fold(0.0, f64::max);
    Ok(Results {
        tables: vec![table],
        summary: json!({ "draws": draws, "max_mean_mip": max_mean }),
    })
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Parses, validates, runs, and writes one experiment.
pub fn run_from_text(
    experiment: Experiment,
    config_text: &str,
    overrides: &Overrides,
) -> Result<RunOutputs, RunError> {
    let mut config = Config::parse(config_text)?;
    if overrides.seed.is_some() {
        config.seed = overrides.seed;
    }
    if overrides.out.is_some() {
        config.output = overrides.out.clone();
    }
    let plan = validate(&config, experiment)?;
    let dir = config
        .output
        .clone()
        .unwrap_or_else(|| Path::new("out").join(experiment.name()));
    run(&plan, &config, &dir, overrides.threads)
}

/// Runs `plan` on a pool of `threads` workers (rayon's default when
/// `None`) and writes its outputs to `dir`.
pub fn run(plan: &Plan, config: &Config, dir: &Path, threads: Option<usize>) -> Result<RunOutputs, RunError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Io {
            context: "starting worker pool".into(),
            source: std::io::Error::other(e),
        })?;
    let used_threads = pool.current_num_threads();
    let results = pool.install(|| execute(plan)).map_err(|source| RunError::Numerical {
        experiment: plan.experiment,
        source,
    })?;

    ensure_dir(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    let mut files = Vec::new();
    for table in &results.tables {
        let name = format!("{}.csv", table.name);
        let bytes = table.to_bytes().map_err(io_err(format!("encoding {name}")))?;
        files.push(write_atomic(dir, &name, &bytes).map_err(io_err(format!("writing {name}")))?);
    }
    let mut summary = serde_json::to_vec_pretty(&results.summary).expect("summary is plain JSON");
    summary.push(b'\n');
    files.push(write_atomic(dir, "summary.json", &summary).map_err(io_err("writing summary.json"))?);

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION"),
        experiment: plan.experiment.name(),
        seed: plan.seed,
        threads: used_threads,
        config,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: &files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest is plain JSON");
    bytes.push(b'\n');
    write_atomic(dir, "manifest.json", &bytes).map_err(io_err("writing manifest.json"))?;
    Ok(RunOutputs {
        dir: dir.to_path_buf(),
        files,
        manifest: dir.join("manifest.json"),
    })
}
