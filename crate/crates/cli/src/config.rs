//! Experiment configuration files.
//!
//! A config is a TOML document with a few top-level keys and four optional
//! sections:
//!
//! ```toml
//! seed = 7                 # mandatory, unless passed with --seed
//! experiment = "roc"       # optional; must match the command if present
//! output = "out/roc"       # optional; --out wins
//!
//! [model]                  # n, p, r0, sigma2, nu2, horizon
//! [grids]                  # pi, pi_points, lambda, theta, rho, fpr_points, horizons
//!                          # (pi_points = k: k points evenly on [0.025, 0.975])
//! [run]                    # trials, sims, num_perms, draws, dim
//! [example1]               # a, noise_ratio
//! ```
//!
//! Unknown keys are rejected. [`validate`] checks everything an experiment
//! needs and reports every problem at once, each tagged with its key path.

use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use netinf_core::metrics::{default_auc_pi_grid, unit_grid};
use netinf_core::{ModelParams, PiGrid};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Example1,
    Example2,
    Fig1,
    Roc,
    Bound,
    Auc,
    Mip,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Example1 => "example1",
            Experiment::Example2 => "example2",
            Experiment::Fig1 => "fig1",
            Experiment::Roc => "roc",
            Experiment::Bound => "bound",
            Experiment::Auc => "auc",
            Experiment::Mip => "mip",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub r0: Option<f64>,
    pub sigma2: Option<f64>,
    pub nu2: Option<f64>,
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub pi: Option<Vec<f64>>,
    pub pi_points: Option<usize>,
    pub lambda: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
    pub fpr_points: Option<usize>,
    pub horizons: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub trials: Option<usize>,
    pub sims: Option<usize>,
    pub num_perms: Option<usize>,
    pub draws: Option<usize>,
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Section {
    pub a: Option<f64>,
    pub noise_ratio: Option<f64>,
}

/// A parsed config file, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub grids: GridSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub example1: Example1Section,
}

/// One problem with a config, located by its dotted key path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every problem found in a config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(transparent)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("model", &["n", "p", "r0", "sigma2", "nu2", "horizon"]),
    ("grids", &["pi", "pi_points", "lambda", "theta", "rho", "fpr_points", "horizons"]),
    ("run", &["trials", "sims", "num_perms", "draws", "dim"]),
    ("example1", &["a", "noise_ratio"]),
];
const TOP_LEVEL: &[&str] = &["experiment", "seed", "output"];

fn section<T: DeserializeOwned + Default>(
    table: &toml::Table,
    name: &str,
    issues: &mut Vec<ConfigIssue>,
) -> T {
    let Some(value) = table.get(name) else {
        return T::default();
    };
    match value.clone().try_into() {
        Ok(v) => v,
        Err(e) => {
            issues.push(ConfigIssue::new(name, e.message().trim().to_string()));
            T::default()
        }
    }
}

fn scalar<T: DeserializeOwned>(table: &toml::Table, name: &str, issues: &mut Vec<ConfigIssue>) -> Option<T> {
    let value = table.get(name)?;
    match value.clone().try_into() {
        Ok(v) => Some(v),
        Err(e) => {
            issues.push(ConfigIssue::new(name, e.message().trim().to_string()));
            None
        }
    }
}

impl Config {
    /// Parses TOML text, collecting syntax errors, unknown keys, and type
    /// mismatches.
    pub fn parse(text: &str) -> Result<Self, ConfigErrors> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigErrors(vec![ConfigIssue::new("<file>", e.message().trim())]))?;
        let mut issues = Vec::new();
        for (key, value) in &table {
            if TOP_LEVEL.contains(&key.as_str()) {
                continue;
            }
            match SECTIONS.iter().find(|(name, _)| name == key) {
                Some((_, fields)) => match value.as_table() {
                    Some(inner) => {
                        for field in inner.keys() {
                            if !fields.contains(&field.as_str()) {
                                issues.push(ConfigIssue::new(format!("{key}.{field}"), "unknown key"));
                            }
                        }
                    }
                    None => issues.push(ConfigIssue::new(key.as_str(), "expected a section")),
                },
                None => issues.push(ConfigIssue::new(key.as_str(), "unknown key")),
            }
        }
        if !issues.is_empty() {
            return Err(ConfigErrors(issues));
        }
        let config = Config {
            experiment: scalar(&table, "experiment", &mut issues),
            seed: scalar(&table, "seed", &mut issues),
            output: scalar(&table, "output", &mut issues),
            model: section(&table, "model", &mut issues),
            grids: section(&table, "grids", &mut issues),
            run: section(&table, "run", &mut issues),
            example1: section(&table, "example1", &mut issues),
        };
        if issues.is_empty() {
            Ok(config)
        } else {
            Err(ConfigErrors(issues))
        }
    }
}

/// Concrete settings for one experiment, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum Settings {
    Example1 {
        a: f64,
        noise_ratio: f64,
        horizons: Vec<usize>,
    },
    Example2,
    Fig1 {
        dim: usize,
        trials: usize,
    },
    Bound {
        model: ModelParams,
        pi_grid: PiGrid,
        trials: usize,
        fpr_grid: Vec<f64>,
    },
    Roc {
        model: ModelParams,
        lambda: Vec<f64>,
        theta: Vec<f64>,
        sims: usize,
        num_perms: usize,
        pi_grid: PiGrid,
        trials: usize,
        fpr_grid: Vec<f64>,
    },
    Auc {
        rho: Vec<f64>,
        fpr_grid: Vec<f64>,
        pi_grid: PiGrid,
    },
    Mip {
        model: ModelParams,
        horizons: Vec<usize>,
        draws: usize,
    },
}

/// A validated config.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub experiment: Experiment,
    pub seed: u64,
    pub settings: Settings,
}

struct Checker {
    issues: Vec<ConfigIssue>,
}

impl Checker {
    fn fail(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue::new(path, message));
    }

    fn count(&mut self, path: &str, value: Option<usize>, default: usize, min: usize) -> usize {
        let v = value.unwrap_or(default);
        if v < min {
            self.fail(path, format!("must be at least {min}, got {v}"));
        }
        v
    }

    fn real(&mut self, path: &str, value: Option<f64>, default: f64, ok: impl Fn(f64) -> bool, range: &str) -> f64 {
        let v = value.unwrap_or(default);
        if !v.is_finite() || !ok(v) {
            self.fail(path, format!("must be {range}, got {v}"));
        }
        v
    }

    fn list<T: Copy + fmt::Display>(
        &mut self,
        path: &str,
        value: &Option<Vec<T>>,
        default: impl FnOnce() -> Vec<T>,
        ok: impl Fn(T) -> bool,
        range: &str,
    ) -> Vec<T> {
        let v = value.clone().unwrap_or_else(default);
        if v.is_empty() {
            self.fail(path, "must not be empty");
        }
        for (k, &x) in v.iter().enumerate() {
            if !ok(x) {
                self.fail(&format!("{path}[{k}]"), format!("must be {range}, got {x}"));
            }
        }
        v
    }

    fn model(&mut self, m: &ModelSection, defaults: ModelParams) -> ModelParams {
        ModelParams {
            n: self.count("model.n", m.n, defaults.n, 2),
            horizon: self.count("model.horizon", m.horizon, defaults.horizon, 1),
            sigma2: self.real("model.sigma2", m.sigma2, defaults.sigma2, |v| v > 0.0, "positive"),
            nu2: self.real("model.nu2", m.nu2, defaults.nu2, |v| v >= 0.0, "nonnegative"),
            p: self.real("model.p", m.p, defaults.p, |v| (0.0..=1.0).contains(&v), "in [0, 1]"),
            r0: self.real("model.r0", m.r0, defaults.r0, |v| v > 0.0 && v < 1.0, "in (0, 1)"),
        }
    }

    fn pi_grid(&mut self, g: &GridSection, default: impl FnOnce() -> PiGrid) -> PiGrid {
        match (&g.pi, g.pi_points) {
            (Some(_), Some(_)) => {
                self.fail("grids.pi_points", "conflicts with grids.pi");
                default()
            }
            (Some(values), None) => match PiGrid::new(values.clone()) {
                Ok(grid) => grid,
                Err(e) => {
                    self.fail("grids.pi", e.to_string());
                    default()
                }
            },
            (None, Some(points)) => {
                if points < 2 {
                    self.fail("grids.pi_points", format!("must be at least 2, got {points}"));
                    return default();
                }
                PiGrid::linspace(0.025, 0.975, points).unwrap_or_else(|_| default())
            }
            (None, None) => default(),
        }
    }

    fn fpr_grid(&mut self, g: &GridSection) -> Vec<f64> {
        let points = self.count("grids.fpr_points", g.fpr_points, 201, 2);
        unit_grid(points.max(2))
    }
}

const DEFAULT_MODEL: ModelParams = ModelParams {
    n: 10,
    horizon: 20,
    sigma2: 1.0,
    nu2: 0.0,
    p: 0.2,
    r0: 0.9,
};

const MIP_MODEL: ModelParams = ModelParams {
    n: 200,
    horizon: 20,
    sigma2: 1.0,
    nu2: 0.0,
    p: 0.05,
    r0: 0.9,
};

fn default_lambda() -> Vec<f64> {
    (0..15).map(|k| 0.002 * 1.6f64.powi(k)).collect()
}

fn default_theta() -> Vec<f64> {
    vec![0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9]
}

fn default_rho() -> Vec<f64> {
    (1..20).map(|k| k as f64 * 0.05).collect()
}

/// Checks `config` for `experiment` and resolves defaults. Never draws
/// random numbers.
pub fn validate(config: &Config, experiment: Experiment) -> Result<Plan, ConfigErrors> {
    let mut c = Checker { issues: Vec::new() };
    if let Some(named) = config.experiment {
        if named != experiment {
            c.fail("experiment", format!("config is for {named}, not {experiment}"));
        }
    }
    let seed = config.seed.unwrap_or_else(|| {
        c.fail("seed", "missing mandatory key");
        0
    });
    let g = &config.grids;
    let r = &config.run;
    let settings = match experiment {
        Experiment::Example1 => Settings::Example1 {
            a: c.real("example1.a", config.example1.a, 1.0, |v| v != 0.0, "nonzero"),
            noise_ratio: c.real(
                "example1.noise_ratio",
                config.example1.noise_ratio,
                0.0,
                |v| v >= 0.0,
                "nonnegative",
            ),
            horizons: c.list("grids.horizons", &g.horizons, || (0..=10).collect(), |_| true, "any"),
        },
        Experiment::Example2 => Settings::Example2,
        Experiment::Fig1 => Settings::Fig1 {
            dim: c.count("run.dim", r.dim, 10, 2),
            trials: c.count("run.trials", r.trials, 1000, 1),
        },
        Experiment::Bound => Settings::Bound {
            model: c.model(&config.model, DEFAULT_MODEL),
            pi_grid: c.pi_grid(g, PiGrid::default),
            trials: c.count("run.trials", r.trials, 2000, 2),
            fpr_grid: c.fpr_grid(g),
        },
        Experiment::Roc => Settings::Roc {
            model: c.model(&config.model, DEFAULT_MODEL),
            lambda: c.list("grids.lambda", &g.lambda, default_lambda, |v| v >= 0.0 && v.is_finite(), ">= 0"),
            theta: c.list("grids.theta", &g.theta, default_theta, |v| v > 0.0 && v < 1.0, "in (0, 1)"),
            sims: c.count("run.sims", r.sims, 100, 1),
            num_perms: c.count("run.num_perms", r.num_perms, 100, 20),
            pi_grid: c.pi_grid(g, PiGrid::default),
            trials: c.count("run.trials", r.trials, 2000, 2),
            fpr_grid: c.fpr_grid(g),
        },
        Experiment::Auc => Settings::Auc {
            rho: c.list("grids.rho", &g.rho, default_rho, |v| (0.0..=1.0).contains(&v), "in [0, 1]"),
            fpr_grid: c.fpr_grid(g),
            pi_grid: c.pi_grid(g, default_auc_pi_grid),
        },
        Experiment::Mip => Settings::Mip {
            model: c.model(&config.model, MIP_MODEL),
            horizons: c.list(
                "grids.horizons",
                &g.horizons,
                || vec![1, 2, 3, 5, 10, 20, 50],
                |t| t >= 1,
                ">= 1",
            ),
            draws: c.count("run.draws", r.draws, 10, 1),
        },
    };
    if c.issues.is_empty() {
        Ok(Plan {
            experiment,
            seed,
            settings,
        })
    } else {
        Err(ConfigErrors(c.issues))
    }
}
