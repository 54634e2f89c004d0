//! Batch experiment runner: validated TOML configs in, deterministic CSV
//! and manifest out, plus log-log rate fitting over the emitted columns.
//!
//! A run is a grid of cells, one per `(n, estimator)` pair. Every cell gets
//! deterministic seeds derived from the master seed, cells that fail record
//! their error in the CSV's `error` column without aborting the run, and
//! rows are sorted canonically before writing so parallelism never changes
//! bytes. The output directory can be overridden with the
//! `DP_SADDLE_OUTPUT_DIR` environment variable.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithm::{DatasetMean, SaddleAlgorithm};
use crate::error::{Error, Result};
use crate::eval::{
    self, empirical_gap_of, strong_gap_of, uas_probe, weak_gap_of, GapReport,
};
use crate::privacy::PrivacyBudget;
use crate::problems::{ModeAlgorithm, PackingInstance, ProblemSpec};
use crate::seeding::child_seed;
use crate::solvers::{
    FullBatchSgda, LambdaRule, LocalDpSgdaAlgorithm, NoisySgdaAlgorithm,
    RecursiveRegularizationAlg, RegularizedErm,
};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "DP_SADDLE_OUTPUT_DIR";

/// CSV column order; stable and documented in the README.
pub const CSV_HEADER: [&str; 13] = [
    "problem",
    "algorithm",
    "n",
    "d",
    "epsilon",
    "delta",
    "kind",
    "mean",
    "std_error",
    "trials",
    "seed",
    "gradient_evaluations",
    "error",
];

/// `lambda = "auto"` or a number.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSetting {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: String,
    pub dim: Option<usize>,
    pub lipschitz: Option<f64>,
    pub diameter: Option<f64>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub set_radius: Option<f64>,
    pub num_support: Option<usize>,
    pub packing_k: Option<usize>,
    pub packing_scale: Option<f64>,
    pub packing_signs: Option<Vec<i8>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: String,
    pub lambda: Option<LambdaSetting>,
    pub modulus: Option<f64>,
    pub iterations: Option<u64>,
    pub alpha_hat: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyConfig {
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub estimators: Vec<String>,
    pub output_dir: Option<String>,
}

/// One experiment: a problem, an algorithm, an optional privacy budget, and
/// the grid to sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmConfig,
    pub privacy: Option<PrivacyConfig>,
    pub run: RunConfig,
}

impl ExperimentConfig {
    /// Parses and validates a TOML string. Unknown keys and malformed
    /// values are reported with the parser's line/column context.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.run.n_grid.is_empty() {
            return Err(Error::Config("run.n_grid must be nonempty".into()));
        }
        if self.run.n_grid.iter().any(|n| *n == 0) {
            return Err(Error::Config("run.n_grid entries must be positive".into()));
        }
        if self.run.trials == 0 {
            return Err(Error::Config("run.trials must be positive".into()));
        }
        if self.run.estimators.is_empty() {
            return Err(Error::Config("run.estimators must be nonempty".into()));
        }
        for e in &self.run.estimators {
            Estimator::parse(e)?;
        }
        if let Some(p) = &self.privacy {
            PrivacyBudget::new(p.epsilon, p.delta)
                .map_err(|e| Error::Config(format!("privacy: {e}")))?;
        }
        // Fail configuration errors before any computation: build the
        // problem and algorithm once against the first grid point.
        let problem = build_problem(&self.problem, self.run.n_grid[0])?;
        build_algorithm(&self.algorithm, self.privacy.as_ref(), &problem)?;
        Ok(())
    }

    fn budget(&self) -> Result<Option<PrivacyBudget>> {
        self.privacy
            .as_ref()
            .map(|p| PrivacyBudget::new(p.epsilon, p.delta))
            .transpose()
    }
}

/// The estimators a cell can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    StrongGap,
    WeakGap,
    EmpiricalGap,
    Stability,
    Variance,
}

impl Estimator {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "strong_gap" => Estimator::StrongGap,
            "weak_gap" => Estimator::WeakGap,
            "empirical_gap" => Estimator::EmpiricalGap,
            "stability" => Estimator::Stability,
            "variance" => Estimator::Variance,
            other => {
                return Err(Error::Config(format!(
                    "unknown estimator {other:?}; expected strong_gap, weak_gap, \
                     empirical_gap, stability, or variance"
                )))
            }
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Estimator::StrongGap => "strong_gap",
            Estimator::WeakGap => "weak_gap",
            Estimator::EmpiricalGap => "empirical_gap",
            Estimator::Stability => "stability",
            Estimator::Variance => "variance",
        }
    }

    fn needs_trial_runs(&self) -> bool {
        !matches!(self, Estimator::Stability)
    }
}

/// Builds the problem named by the config. `n` matters only for the
/// fixed-design packing family, whose dataset size is part of the instance.
pub fn build_problem(config: &ProblemConfig, n: usize) -> Result<ProblemSpec> {
    let dim = config.dim.unwrap_or(2);
    match config.kind.as_str() {
        "bilinear" => Ok(ProblemSpec::bilinear()),
        "linear_saddle" => ProblemSpec::linear_saddle(
            dim,
            config.lipschitz.unwrap_or(1.0),
            config.diameter.unwrap_or(2.0),
        ),
        "quadratic_scsc" => ProblemSpec::quadratic_scsc(
            dim,
            config.mu.unwrap_or(1.0),
            config.gamma.unwrap_or(0.5),
            config.set_radius.unwrap_or(1.0),
        ),
        "median_saddle" => ProblemSpec::median_saddle(
            dim,
            config.num_support.unwrap_or(5),
            config.set_radius.unwrap_or(1.0),
        ),
        "packing_erm" => {
            let k = config.packing_k.unwrap_or(4);
            let scale = config.packing_scale.unwrap_or(1.0);
            let signs = config
                .packing_signs
                .clone()
                .unwrap_or_else(|| vec![1; k]);
            let instance = PackingInstance::new(n, dim.max(k), signs, scale)?;
            ProblemSpec::packing(instance, config.set_radius.unwrap_or(1.0))
        }
        other => Err(Error::Config(format!(
            "unknown problem kind {other:?}; expected bilinear, linear_saddle, \
             quadratic_scsc, median_saddle, or packing_erm"
        ))),
    }
}

fn lambda_rule(
    config: &AlgorithmConfig,
    budget: Option<&PrivacyBudget>,
    private: bool,
) -> Result<LambdaRule> {
    match &config.lambda {
        Some(LambdaSetting::Value(v)) => Ok(LambdaRule::Fixed(*v)),
        Some(LambdaSetting::Keyword(k)) if k == "auto" => {
            if private {
                let budget = budget.copied().ok_or_else(|| {
                    Error::Config("auto lambda for a private algorithm needs [privacy]".into())
                })?;
                Ok(LambdaRule::AutoPrivate { budget })
            } else {
                Ok(LambdaRule::AutoNonPrivate {
                    alpha_hat: config.alpha_hat.unwrap_or(0.0),
                })
            }
        }
        Some(LambdaSetting::Keyword(k)) => Err(Error::Config(format!(
            "lambda must be a number or \"auto\", got {k:?}"
        ))),
        None => lambda_rule(
            &AlgorithmConfig {
                lambda: Some(LambdaSetting::Keyword("auto".into())),
                ..config.clone()
            },
            budget,
            private,
        ),
    }
}

/// Builds the algorithm named by the config.
pub fn build_algorithm(
    config: &AlgorithmConfig,
    privacy: Option<&PrivacyConfig>,
    _problem: &ProblemSpec,
) -> Result<Box<dyn SaddleAlgorithm>> {
    let budget = privacy
        .map(|p| PrivacyBudget::new(p.epsilon, p.delta))
        .transpose()?;
    let need_budget = || {
        budget.ok_or_else(|| {
            Error::Config(format!(
                "algorithm {:?} needs a [privacy] section",
                config.name
            ))
        })
    };
    Ok(match config.name.as_str() {
        "mode" => Box::new(ModeAlgorithm),
        "dataset_mean" => Box::new(DatasetMean),
        "sgda" => Box::new(FullBatchSgda {
            iterations: config.iterations.ok_or_else(|| {
                Error::Config("algorithm sgda needs iterations".into())
            })?,
        }),
        "regularized_erm" => Box::new(RegularizedErm {
            modulus: config.modulus.ok_or_else(|| {
                Error::Config("algorithm regularized_erm needs modulus".into())
            })?,
        }),
        "noisy_sgda" => Box::new(NoisySgdaAlgorithm {
            budget: need_budget()?,
        }),
        "local_sgda" => Box::new(LocalDpSgdaAlgorithm {
            budget: need_budget()?,
        }),
        "recursive_exact" => Box::new(RecursiveRegularizationAlg::exact(lambda_rule(
            config,
            budget.as_ref(),
            false,
        )?)),
        "recursive_noisy_sgda" => Box::new(RecursiveRegularizationAlg::with_noisy_sgda(
            lambda_rule(config, budget.as_ref(), true)?,
            need_budget()?,
        )),
        "recursive_output_perturbation" => {
            Box::new(RecursiveRegularizationAlg::with_output_perturbation(
                lambda_rule(config, budget.as_ref(), true)?,
                need_budget()?,
            ))
        }
        other => Err(Error::Config(format!(
            "unknown algorithm {other:?}; expected mode, dataset_mean, sgda, \
             regularized_erm, noisy_sgda, local_sgda, recursive_exact, \
             recursive_noisy_sgda, or recursive_output_perturbation"
        )))?,
    })
}

/// One CSV row; numeric fields are blank when the cell errored.
#[derive(Debug, Clone)]
struct Row {
    problem: String,
    algorithm: String,
    n: usize,
    d: usize,
    epsilon: Option<f64>,
    delta: Option<f64>,
    kind: &'static str,
    mean: Option<f64>,
    std_error: Option<f64>,
    trials: usize,
    seed: u64,
    gradient_evaluations: Option<f64>,
    error: String,
}

impl Row {
    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        vec![
            self.problem.clone(),
            self.algorithm.clone(),
            self.n.to_string(),
            self.d.to_string(),
            opt(self.epsilon),
            opt(self.delta),
            self.kind.to_string(),
            opt(self.mean),
            opt(self.std_error),
            self.trials.to_string(),
            self.seed.to_string(),
            opt(self.gradient_evaluations),
            self.error.clone(),
        ]
    }
}

/// Where a finished run put its artifacts.
#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: usize,
    pub errored_cells: usize,
}

fn resolve_output_dir(config: &ExperimentConfig) -> PathBuf {
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(config.run.output_dir.clone().unwrap_or_else(|| ".".into()))
}

/// Runs every `(n, estimator)` cell and writes `results.csv` plus
/// `run_manifest.json` into the output directory. Cell failures land in the
/// CSV's `error` column; the summary counts them so callers can set the
/// exit code.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let out_dir = resolve_output_dir(config);
    fs::create_dir_all(&out_dir)?;

    let estimators: Vec<Estimator> = config
        .run
        .estimators
        .iter()
        .map(|e| Estimator::parse(e))
        .collect::<Result<Vec<_>>>()?;
    let budget = config.budget()?;

    let mut rows: Vec<Row> = Vec::new();
    for &n in &config.run.n_grid {
        let seed_n = child_seed(config.run.seed, n as u64);
        let runs_seed = child_seed(seed_n, 1);
        let stability_seed = child_seed(seed_n, 2);

        let cell_template = |kind: &'static str, seed: u64| Row {
            problem: config.problem.kind.clone(),
            algorithm: config.algorithm.name.clone(),
            n,
            d: 0,
            epsilon: budget.map(|b| b.epsilon()),
            delta: budget.map(|b| b.delta()),
            kind,
            mean: None,
            std_error: None,
            trials: config.run.trials,
            seed,
            gradient_evaluations: None,
            error: String::new(),
        };

        let setup = build_problem(&config.problem, n).and_then(|problem| {
            let algorithm = build_algorithm(
                &config.algorithm,
                config.privacy.as_ref(),
                &problem,
            )?;
            Ok((problem, algorithm))
        });
        let (problem, algorithm) = match setup {
            Ok(pair) => pair,
            Err(e) => {
                // the whole n-cell is unbuildable; record every estimator
                for est in &estimators {
                    let mut row = cell_template(est.label(), seed_n);
                    row.error = e.to_string();
                    rows.push(row);
                }
                continue;
            }
        };
        let d = problem.domain().dim();

        let trial_runs = if estimators.iter().any(|e| e.needs_trial_runs()) {
            Some(eval::run_trials(
                &problem,
                algorithm.as_ref(),
                n,
                config.run.trials,
                runs_seed,
            ))
        } else {
            None
        };

        for est in &estimators {
            let mut row = cell_template(est.label(), runs_seed);
            row.d = d;
            let filled: Result<()> = (|| {
                match est {
                    Estimator::StrongGap | Estimator::WeakGap | Estimator::EmpiricalGap => {
                        let runs = trial_runs
                            .as_ref()
                            .expect("trial runs requested")
                            .as_ref()
                            .map_err(|e| Error::Config(e.to_string()))?;
                        let report: GapReport = match est {
                            Estimator::StrongGap => strong_gap_of(runs),
                            Estimator::EmpiricalGap => empirical_gap_of(runs),
                            Estimator::WeakGap => weak_gap_of(&problem, runs)?,
                            Estimator::Stability | Estimator::Variance => unreachable!(),
                        };
                        row.mean = Some(report.mean);
                        row.std_error = Some(report.std_error);
                        row.gradient_evaluations = Some(report.mean_gradient_evaluations);
                    }
                    Estimator::Variance => {
                        let runs = trial_runs
                            .as_ref()
                            .expect("trial runs requested")
                            .as_ref()
                            .map_err(|e| Error::Config(e.to_string()))?;
                        let mean_point = crate::geometry::JointPoint::mean_of(&runs.points)
                            .ok_or(Error::InsufficientData { needed: 2, got: 0 })?;
                        if runs.points.len() < 2 {
                            return Err(Error::InsufficientData {
                                needed: 2,
                                got: runs.points.len(),
                            });
                        }
                        let var = runs
                            .points
                            .iter()
                            .map(|z| z.distance_sq(&mean_point))
                            .sum::<f64>()
                            / (runs.points.len() - 1) as f64;
                        row.mean = Some(var);
                        row.std_error = Some(0.0);
                        row.gradient_evaluations = Some(runs.mean_gradient_evaluations);
                    }
                    Estimator::Stability => {
                        row.seed = stability_seed;
                        let report = uas_probe(
                            &problem,
                            algorithm.as_ref(),
                            n,
                            config.run.trials,
                            stability_seed,
                        )?;
                        row.mean = Some(report.mean_distance);
                        row.std_error = Some(report.std_error);
                    }
                }
                Ok(())
            })();
            if let Err(e) = filled {
                row.error = e.to_string();
                row.mean = None;
                row.std_error = None;
                row.gradient_evaluations = None;
            }
            rows.push(row);
        }
    }

    rows.sort_by(|a, b| {
        (a.n, a.kind, &a.problem, &a.algorithm).cmp(&(b.n, b.kind, &b.problem, &b.algorithm))
    });
    let errored_cells = rows.iter().filter(|r| !r.error.is_empty()).count();

    let csv_path = out_dir.join("results.csv");
    let mut writer = csv::Writer::from_path(&csv_path)?;
    writer.write_record(CSV_HEADER)?;
    for row in &rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;

    let manifest_path = out_dir.join("run_manifest.json");
    let manifest = serde_json::json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "rows": rows.len(),
        "errored_cells": errored_cells,
        "csv": "results.csv",
    });
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))? + "\n",
    )?;

    Ok(ExperimentSummary {
        csv_path,
        manifest_path,
        rows: rows.len(),
        errored_cells,
    })
}

/// Result of a log-log least-squares fit.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares on `(log x, log y)` over the named CSV columns.
/// Rows whose `error` column is nonempty or whose values fail to parse are
/// skipped; remaining values must be positive (logarithms) and at least
/// three rows must survive. When the responses are all equal the fit is the
/// exact constant line and `r_squared` is 1 by convention.
pub fn fit_rate(csv_path: &Path, x_col: &str, y_col: &str) -> Result<RateFit> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let xi = find(x_col)?;
    let yi = find(y_col)?;
    let error_col = headers.iter().position(|h| h == "error");

    let mut points: Vec<(f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if let Some(ei) = error_col {
            if record.get(ei).map(|e| !e.is_empty()).unwrap_or(false) {
                continue;
            }
        }
        let parse = |i: usize| record.get(i).and_then(|v| v.parse::<f64>().ok());
        let (Some(x), Some(y)) = (parse(xi), parse(yi)) else {
            continue;
        };
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "log-log fit needs positive values; got ({x}, {y})"
            )));
        }
        points.push((x.ln(), y.ln()));
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }

    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "log-log fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * k {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use std::sync::{Mutex, OnceLock};

    /// Tests that touch the process-wide output-dir variable serialize here.
    fn env_lock() -> std::sync::MutexGuard<'static, ()> {
        static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
        LOCK.get_or_init(|| Mutex::new(()))
            .lock()
            .unwrap_or_else(|e| e.into_inner())
    }

    fn write_csv(dir: &Path, rows: &[(f64, f64)]) -> PathBuf {
        let path = dir.join("fit.csv");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "n,mean,error").unwrap();
        for (x, y) in rows {
            writeln!(f, "{x},{y},").unwrap();
        }
        path
    }

    #[test]
    fn fit_recovers_exact_power_laws() {
        let dir = tempfile::tempdir().unwrap();
        // y = x^{-1/2} at x in {4, 16, 64}
        let rows: Vec<(f64, f64)> = [4.0, 16.0, 64.0f64]
            .iter()
            .map(|x| (*x, 1.0 / x.sqrt()))
            .collect();
        let fit = fit_rate(&write_csv(dir.path(), &rows), "n", "mean").unwrap();
        assert!((fit.slope - (-0.5)).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        // constant y: slope 0, r^2 = 1 by convention
        let rows = vec![(4.0, 3.0), (16.0, 3.0), (64.0, 3.0)];
        let fit = fit_rate(&write_csv(dir.path(), &rows), "n", "mean").unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![(4.0, 1.0), (16.0, 0.5)];
        let err = fit_rate(&write_csv(dir.path(), &rows), "n", "mean").unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
        let rows = vec![(4.0, 1.0), (16.0, -0.5), (64.0, 0.25)];
        let err = fit_rate(&write_csv(dir.path(), &rows), "n", "mean").unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        let rows = vec![(4.0, 1.0), (16.0, 0.5), (64.0, 0.25)];
        let err = fit_rate(&write_csv(dir.path(), &rows), "missing", "mean").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(_)));
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let base = r#"
            [problem]
            kind = "bilinear"

            [algorithm]
            name = "mode"

            [run]
            n_grid = [6]
            trials = 10
            seed = 1
            estimators = ["strong_gap"]
        "#;
        assert!(ExperimentConfig::from_toml(base).is_ok());

        let unknown_key = base.replace("kind = \"bilinear\"", "kind = \"bilinear\"\nmystery = 1");
        assert!(matches!(
            ExperimentConfig::from_toml(&unknown_key).unwrap_err(),
            Error::Config(_)
        ));

        let bad_estimator = base.replace("strong_gap", "strongest_gap");
        assert!(ExperimentConfig::from_toml(&bad_estimator).is_err());

        let bad_algorithm = base.replace("\"mode\"", "\"modal\"");
        assert!(ExperimentConfig::from_toml(&bad_algorithm).is_err());

        let zero_trials = base.replace("trials = 10", "trials = 0");
        assert!(ExperimentConfig::from_toml(&zero_trials).is_err());
    }

    #[test]
    fn lambda_setting_parses_both_forms() {
        let cfg = r#"
            [problem]
            kind = "quadratic_scsc"

            [algorithm]
            name = "recursive_exact"
            lambda = 0.25

            [run]
            n_grid = [64]
            trials = 2
            seed = 0
            estimators = ["strong_gap"]
        "#;
        let parsed = ExperimentConfig::from_toml(cfg).unwrap();
        assert!(matches!(
            parsed.algorithm.lambda,
            Some(LambdaSetting::Value(v)) if v == 0.25
        ));
        let auto = cfg.replace("lambda = 0.25", "lambda = \"auto\"");
        let parsed = ExperimentConfig::from_toml(&auto).unwrap();
        assert!(matches!(parsed.algorithm.lambda, Some(LambdaSetting::Keyword(_))));
        let bad = cfg.replace("lambda = 0.25", "lambda = \"automatic\"");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn mode_experiment_writes_deterministic_csv() {
        let cfg_text = r#"
            [problem]
            kind = "bilinear"

            [algorithm]
            name = "mode"

            [run]
            n_grid = [6, 10]
            trials = 64
            seed = 7
            estimators = ["strong_gap", "weak_gap", "variance"]
        "#;
        let config = ExperimentConfig::from_toml(cfg_text).unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();

        let _guard = env_lock();
        std::env::set_var(OUTPUT_DIR_ENV, dir_a.path());
        let a = run_experiment(&config).unwrap();
        std::env::set_var(OUTPUT_DIR_ENV, dir_b.path());
        let b = run_experiment(&config).unwrap();
        std::env::remove_var(OUTPUT_DIR_ENV);

        assert_eq!(a.errored_cells, 0);
        assert_eq!(a.rows, 6);
        let bytes_a = fs::read(&a.csv_path).unwrap();
        let bytes_b = fs::read(&b.csv_path).unwrap();
        assert_eq!(bytes_a, bytes_b, "CSV bytes must be identical across runs");

        let text = String::from_utf8(bytes_a).unwrap();
        assert!(text.starts_with("problem,algorithm,n,d,epsilon,delta,kind,"));
        // strong gap of the mode rule is exactly 2 in every trial
        let strong_line = text
            .lines()
            .find(|l| l.contains(",strong_gap,") && l.contains("bilinear,mode,6"))
            .unwrap();
        assert!(strong_line.contains(",2,0,"), "line: {strong_line}");
    }

    #[test]
    fn cell_errors_are_recorded_not_fatal() {
        // mode requires even n; n = 7 cells must error while n = 6 succeeds
        let cfg_text = r#"
            [problem]
            kind = "bilinear"

            [algorithm]
            name = "mode"

            [run]
            n_grid = [6, 7]
            trials = 8
            seed = 1
            estimators = ["strong_gap"]
        "#;
        let config = ExperimentConfig::from_toml(cfg_text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let _guard = env_lock();
        std::env::set_var(OUTPUT_DIR_ENV, dir.path());
        let summary = run_experiment(&config).unwrap();
        std::env::remove_var(OUTPUT_DIR_ENV);
        assert_eq!(summary.rows, 2);
        assert_eq!(summary.errored_cells, 1);
        let text = fs::read_to_string(summary.csv_path).unwrap();
        let bad = text.lines().find(|l| l.contains(",7,")).unwrap();
        assert!(bad.contains("even"), "error text should surface: {bad}");
    }
}
