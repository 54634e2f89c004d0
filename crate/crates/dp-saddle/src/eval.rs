//! Evaluation suite: gap notions, Monte Carlo estimators over independent
//! runs, and stability / variance probes.
//!
//! Three gaps are measured for a randomized algorithm `A` on i.i.d. data:
//!
//! * strong gap: `E[max_theta F_D(w, theta) - min_w F_D(w, theta)]`, the
//!   best responses taken against each realized output;
//! * weak gap: the expectation moves inside the max and min, so the best
//!   responses are taken against the averaged outputs;
//! * empirical gap: the strong gap of the run's own empirical objective.
//!
//! The strong gap dominates the weak gap, and the two can separate by a
//! constant: the two-sided mode rule on the bilinear family has strong gap
//! exactly 2 while its weak gap vanishes as trials accumulate.
//!
//! All estimators use exact population oracles for values and best
//! responses; Monte Carlo enters only through the independent training runs.

use rayon::prelude::*;

use crate::algorithm::SaddleAlgorithm;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, JointPoint, Vector};
use crate::loss::Regularizer;
use crate::problems::{BestResponse, Family, ProblemSpec, Side};
use crate::seeding::child_seed;

/// Which gap an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    Strong,
    Weak,
    Empirical,
}

impl GapKind {
    pub fn label(&self) -> &'static str {
        match self {
            GapKind::Strong => "strong_gap",
            GapKind::Weak => "weak_gap",
            GapKind::Empirical => "empirical_gap",
        }
    }
}

/// A Monte Carlo gap estimate. For the weak gap the standard error is
/// conditional on the fixed pair of best responses computed from the
/// averaged outputs.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub kind: GapKind,
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
    pub mean_gradient_evaluations: f64,
}

/// Population gap at a single point: dual best-response value minus primal
/// best-response value. Exact (up to float rounding), never clamped.
pub fn gap_at_point(problem: &ProblemSpec, z: &JointPoint) -> Result<f64> {
    let dual = problem.best_response(z, Side::Dual)?;
    let primal = problem.best_response(z, Side::Primal)?;
    Ok(dual.value - primal.value)
}

/// Gap of the empirical objective `F_S` at `z`, computed through the exact
/// sample-anchored view of the problem.
pub fn empirical_gap(problem: &ProblemSpec, dataset: &Dataset, z: &JointPoint) -> Result<f64> {
    gap_at_point(&problem.empirical_view(dataset)?, z)
}

/// Gap of `F_S` plus a regularizer stack at `z` (the quantity certifying
/// solver accuracy through strong convexity-concavity).
pub fn regularized_empirical_gap(
    problem: &ProblemSpec,
    dataset: &Dataset,
    regs: &[Regularizer],
    z: &JointPoint,
) -> Result<f64> {
    let view = problem.empirical_view(dataset)?;
    let dual = view.regularized_best_response(z, Side::Dual, regs)?;
    let primal = view.regularized_best_response(z, Side::Primal, regs)?;
    Ok(dual.value - primal.value)
}

/// Distance bound implied by a gap under strong convexity-concavity:
/// `|z - z*|^2 <= (2 / modulus) * gap`.
pub fn distance_from_gap(modulus: f64, gap: f64) -> Result<f64> {
    if !modulus.is_finite() || modulus <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "modulus must be finite and positive, got {modulus}"
        )));
    }
    Ok((2.0 * gap.max(0.0) / modulus).sqrt())
}

/// Sample mean and standard error of the mean (zero for a single value).
pub fn mean_and_standard_error(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

/// Outputs of `trials` independent runs: fresh dataset and algorithm seed
/// per trial, with per-trial strong and empirical gaps already evaluated.
#[derive(Debug, Clone)]
pub struct TrialOutputs {
    pub points: Vec<JointPoint>,
    pub strong_gaps: Vec<f64>,
    pub empirical_gaps: Vec<f64>,
    pub mean_gradient_evaluations: f64,
    pub seed: u64,
}

/// Runs the algorithm on `trials` independent datasets of size `n`. Trial
/// `k` uses dataset seed `child(seed, 4k)` and algorithm seed
/// `child(seed, 4k+1)`, so every estimator derived from the same `seed`
/// sees the same runs.
pub fn run_trials(
    problem: &ProblemSpec,
    algorithm: &dyn SaddleAlgorithm,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<TrialOutputs> {
    if trials == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let runs: Vec<(JointPoint, f64, f64, u64)> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<(JointPoint, f64, f64, u64)> {
            let dataset = problem.sample_dataset(n, child_seed(seed, 4 * k as u64))?;
            let out = algorithm.solve(problem, &dataset, child_seed(seed, 4 * k as u64 + 1))?;
            let strong = gap_at_point(problem, &out.point)?;
            let empirical = empirical_gap(problem, &dataset, &out.point)?;
            Ok((out.point, strong, empirical, out.gradient_evaluations))
        })
        .collect::<Result<Vec<_>>>()?;

    let mean_evals =
        runs.iter().map(|r| r.3 as f64).sum::<f64>() / trials as f64;
    Ok(TrialOutputs {
        points: runs.iter().map(|r| r.0.clone()).collect(),
        strong_gaps: runs.iter().map(|r| r.1).collect(),
        empirical_gaps: runs.iter().map(|r| r.2).collect(),
        mean_gradient_evaluations: mean_evals,
        seed,
    })
}

/// Monte Carlo strong gap over independent runs.
pub fn strong_gap_mc(
    problem: &ProblemSpec,
    algorithm: &dyn SaddleAlgorithm,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<GapReport> {
    let runs = run_trials(problem, algorithm, n, trials, seed)?;
    Ok(strong_gap_of(&runs))
}

/// Strong gap report from precomputed runs.
pub fn strong_gap_of(runs: &TrialOutputs) -> GapReport {
    let (mean, std_error) = mean_and_standard_error(&runs.strong_gaps);
    GapReport {
        kind: GapKind::Strong,
        mean,
        std_error,
        trials: runs.strong_gaps.len(),
        seed: runs.seed,
        mean_gradient_evaluations: runs.mean_gradient_evaluations,
    }
}

/// Monte Carlo empirical gap over independent runs.
pub fn empirical_gap_mc(
    problem: &ProblemSpec,
    algorithm: &dyn SaddleAlgorithm,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<GapReport> {
    let runs = run_trials(problem, algorithm, n, trials, seed)?;
    Ok(empirical_gap_of(&runs))
}

/// Empirical gap report from precomputed runs.
pub fn empirical_gap_of(runs: &TrialOutputs) -> GapReport {
    let (mean, std_error) = mean_and_standard_error(&runs.empirical_gaps);
    GapReport {
        kind: GapKind::Empirical,
        mean,
        std_error,
        trials: runs.empirical_gaps.len(),
        seed: runs.seed,
        mean_gradient_evaluations: runs.mean_gradient_evaluations,
    }
}

/// Monte Carlo weak gap over independent runs.
///
/// The dual (resp. primal) best response is taken against the average of
/// the primal (resp. dual) outputs. For every family here the per-block
/// best-response map is affine or constant in the opposing block, so the
/// response to the average is exactly the maximizer of the averaged
/// objective, and the estimate is unbiased for the weak gap at the given
/// trial count.
pub fn weak_gap_mc(
    problem: &ProblemSpec,
    algorithm: &dyn SaddleAlgorithm,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<GapReport> {
    let runs = run_trials(problem, algorithm, n, trials, seed)?;
    weak_gap_of(problem, &runs)
}

/// Weak gap report from precomputed runs.
pub fn weak_gap_of(problem: &ProblemSpec, runs: &TrialOutputs) -> Result<GapReport> {
    let avg = JointPoint::mean_of(&runs.points)
        .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let theta_star = problem.best_response(&avg, Side::Dual)?.point;
    let w_star = problem.best_response(&avg, Side::Primal)?.point;
    let per_trial: Vec<f64> = runs
        .points
        .iter()
        .map(|z| -> Result<f64> {
            let up = problem
                .population_value(&JointPoint::new(z.w.clone(), theta_star.clone()))?;
            let down =
                problem.population_value(&JointPoint::new(w_star.clone(), z.theta.clone()))?;
            Ok(up - down)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, std_error) = mean_and_standard_error(&per_trial);
    Ok(GapReport {
        kind: GapKind::Weak,
        mean,
        std_error,
        trials: per_trial.len(),
        seed: runs.seed,
        mean_gradient_evaluations: runs.mean_gradient_evaluations,
    })
}

/// Replace-one (or, for packing, sign-flip) stability probe.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Mean output distance across adjacent dataset pairs.
    pub mean_distance: f64,
    /// Standard error of the mean distance.
    pub std_error: f64,
    /// Largest observed distance (the empirical UAS proxy).
    pub max_distance: f64,
    /// Mean squared distance (for mean-square stability bounds).
    pub mean_squared_distance: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Runs the algorithm on adjacent dataset pairs and measures how far the
/// output moves. Pairs differ in exactly one sample: a uniformly chosen
/// index is replaced by an independent draw, except for the fixed-design
/// packing family, where adjacency is a single sign flip.
pub fn uas_probe(
    problem: &ProblemSpec,
    algorithm: &dyn SaddleAlgorithm,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if trials == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let distances: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let k64 = k as u64;
            let (base, adjacent) = match problem.family() {
                Family::PackingErm { instance } => {
                    let base = instance.dataset();
                    let flipped = instance.flipped(k % instance.k())?;
                    (base, flipped.dataset())
                }
                _ => {
                    let base = problem.sample_dataset(n, child_seed(seed, 4 * k64))?;
                    let mut rng = crate::seeding::rng(child_seed(seed, 4 * k64 + 2));
                    let index = rand::Rng::random_range(&mut rng, 0..n);
                    let replacement = problem.sample_point(&mut rng)?;
                    let adjacent = base.replaced(index, replacement)?;
                    (base, adjacent)
                }
            };
            let differing = base.differing_indices(&adjacent);
            if differing.len() > 1 {
                return Err(Error::InvalidParameter(format!(
                    "adjacency violated: {} entries differ",
                    differing.len()
                )));
            }
            let alg_seed = child_seed(seed, 4 * k64 + 1);
            let a = algorithm.solve(problem, &base, alg_seed)?;
            let b = algorithm.solve(problem, &adjacent, alg_seed)?;
            Ok(a.point.distance(&b.point))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mean, std_error) = mean_and_standard_error(&distances);
    let mean_sq = distances.iter().map(|d| d * d).sum::<f64>() / trials as f64;
    let max = distances.iter().cloned().fold(0.0, f64::max);
    Ok(StabilityReport {
        mean_distance: mean,
        std_error,
        max_distance: max,
        mean_squared_distance: mean_sq,
        trials,
        seed,
    })
}

/// Spread of an algorithm's output across independent runs.
#[derive(Debug, Clone)]
pub struct VarianceReport {
    /// Trace of the unbiased sample covariance of the stacked outputs,
    /// i.e. `(1/(K-1)) sum_k |z_k - mean|^2`.
    pub total_variance: f64,
    pub mean_point: JointPoint,
    pub trials: usize,
    pub seed: u64,
}

/// Estimates output variance over independent runs (same seed layout as
/// [`run_trials`]).
pub fn variance_probe(
    problem: &ProblemSpec,
    algorithm: &dyn SaddleAlgorithm,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if trials < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: trials,
        });
    }
    let runs = run_trials(problem, algorithm, n, trials, seed)?;
    let mean_point = JointPoint::mean_of(&runs.points)
        .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let total_variance = runs
        .points
        .iter()
        .map(|z| z.distance_sq(&mean_point))
        .sum::<f64>()
        / (trials - 1) as f64;
    Ok(VarianceReport {
        total_variance,
        mean_point,
        trials,
        seed,
    })
}

/// Projected subgradient best-response oracle: maximizes (dual) or
/// minimizes (primal) the population objective over one block by iterating
/// on exact population gradients and keeping the best iterate by value.
/// Slow but family-agnostic; exists to cross-check the closed forms.
pub fn numeric_best_response(
    problem: &ProblemSpec,
    z: &JointPoint,
    side: Side,
    iterations: u64,
) -> Result<BestResponse> {
    if iterations == 0 {
        return Err(Error::InvalidParameter(
            "need at least one iteration".into(),
        ));
    }
    let set: &ConstraintSet = match side {
        Side::Primal => problem.domain().primal(),
        Side::Dual => problem.domain().dual(),
    };
    let mut y = set.center();
    let radius = set.max_distance_from(&y)?.max(1e-12);
    let scale = problem.lipschitz().max(1e-12);
    let compose = |y: &Vector| match side {
        Side::Primal => JointPoint::new(y.clone(), z.theta.clone()),
        Side::Dual => JointPoint::new(z.w.clone(), y.clone()),
    };
    let value_of = |y: &Vector| problem.population_value(&compose(y));

    let mut best_y = y.clone();
    let mut best_v = value_of(&y)?;
    let d_w = z.d_w();
    for t in 0..iterations {
        let op = problem.population_operator(&compose(&y))?;
        // op = [grad_w F; -grad_theta F]: stepping along -block descends on
        // w and ascends on theta, as each side requires.
        let block = match side {
            Side::Primal => op.rows(0, d_w).into_owned(),
            Side::Dual => op.rows(d_w, z.d_theta()).into_owned(),
        };
        let eta = radius / (scale * ((t + 1) as f64).sqrt());
        y = set.project(&(&y - &(block * eta)))?;
        let v = value_of(&y)?;
        let improved = match side {
            Side::Dual => v > best_v,
            Side::Primal => v < best_v,
        };
        if improved {
            best_v = v;
            best_y = y.clone();
        }
    }
    Ok(BestResponse {
        point: best_y,
        value: best_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::ConstantOutput;
    use crate::problems::ModeAlgorithm;

    #[test]
    fn gap_vanishes_at_population_saddles() {
        let problems = vec![
            ProblemSpec::bilinear(),
            ProblemSpec::linear_saddle(3, 1.0, 2.0).unwrap(),
            ProblemSpec::quadratic_scsc(3, 1.0, 0.5, 1.0).unwrap(),
            ProblemSpec::median_saddle(3, 5, 1.0).unwrap(),
        ];
        for p in problems {
            let z = p.population_saddle().unwrap();
            let g = gap_at_point(&p, &z).unwrap();
            assert!(g.abs() < 1e-10, "{}: {g}", p.name());
            // ... and is positive away from the saddle
            let mut rng = crate::seeding::rng(5);
            let other = p.domain().sample(&mut rng);
            if other.distance(&z) > 1e-3 {
                assert!(gap_at_point(&p, &other).unwrap() > 0.0, "{}", p.name());
            }
        }
    }

    #[test]
    fn mode_rule_separates_strong_and_weak_gaps() {
        let p = ProblemSpec::bilinear();
        let alg = ModeAlgorithm;
        let runs = run_trials(&p, &alg, 6, 400, 42).unwrap();
        let strong = strong_gap_of(&runs);
        let weak = weak_gap_of(&p, &runs).unwrap();
        // every trial outputs corner points, so the strong gap is exactly 2
        assert_eq!(strong.mean, 2.0);
        assert_eq!(strong.std_error, 0.0);
        assert!(
            weak.mean < 0.25,
            "weak gap should shrink with trials, got {}",
            weak.mean
        );
        assert!(strong.mean > weak.mean + 1.0);
    }

    #[test]
    fn weak_gap_never_exceeds_strong_gap_materially() {
        let p = ProblemSpec::quadratic_scsc(2, 1.0, 0.4, 1.0).unwrap();
        let alg = crate::solvers::FullBatchSgda { iterations: 60 };
        let runs = run_trials(&p, &alg, 32, 40, 7).unwrap();
        let strong = strong_gap_of(&runs);
        let weak = weak_gap_of(&p, &runs).unwrap();
        assert!(
            weak.mean <= strong.mean + 3.0 * (strong.std_error + weak.std_error) + 1e-9,
            "weak {} vs strong {}",
            weak.mean,
            strong.mean
        );
    }

    #[test]
    fn empirical_gap_is_zero_at_the_empirical_saddle() {
        let p = ProblemSpec::quadratic_scsc(3, 1.0, 0.5, 1.0).unwrap();
        let data = p.sample_dataset(64, 3).unwrap();
        let z = p
            .empirical_view(&data)
            .unwrap()
            .population_saddle()
            .unwrap();
        let g = empirical_gap(&p, &data, &z).unwrap();
        assert!(g.abs() < 1e-10, "gap {g}");
    }

    #[test]
    fn constant_output_has_zero_variance_and_zero_stability_gap() {
        let p = ProblemSpec::linear_saddle(2, 1.0, 2.0).unwrap();
        let alg = ConstantOutput {
            point: p.domain().center(),
        };
        let var = variance_probe(&p, &alg, 16, 8, 3).unwrap();
        assert_eq!(var.total_variance, 0.0);
        let stab = uas_probe(&p, &alg, 16, 8, 3).unwrap();
        assert_eq!(stab.max_distance, 0.0);
    }

    #[test]
    fn mode_rule_variance_is_two() {
        // Each half's mode is +/-1 with mean ~0, so each block contributes
        // variance ~1 and the stacked output ~2.
        let p = ProblemSpec::bilinear();
        let var = variance_probe(&p, &ModeAlgorithm, 6, 400, 11).unwrap();
        assert!(
            (var.total_variance - 2.0).abs() < 0.25,
            "variance {}",
            var.total_variance
        );
    }

    #[test]
    fn dataset_mean_stability_obeys_the_influence_bound() {
        // Replacing one sample moves the dataset mean by at most 2 r / n,
        // and the stacked two-block output by sqrt(2) times that.
        let p = ProblemSpec::linear_saddle(2, 1.0, 8.0).unwrap();
        let n = 32;
        let r = 1.0 / (2.0 * 2f64.sqrt());
        let bound = 2f64.sqrt() * 2.0 * r / n as f64;
        let stab = uas_probe(&p, &crate::algorithm::DatasetMean, n, 64, 9).unwrap();
        assert!(
            stab.max_distance <= bound + 1e-12,
            "{} > {}",
            stab.max_distance,
            bound
        );
        assert!(stab.mean_distance > 0.05 * bound);
    }

    #[test]
    fn packing_adjacency_is_a_single_flip() {
        let inst = crate::problems::PackingInstance::new(12, 6, vec![1, 1, -1], 1.0).unwrap();
        let p = ProblemSpec::packing(inst, 1.0).unwrap();
        let alg = crate::solvers::RegularizedErm { modulus: 0.05 };
        let stab = uas_probe(&p, &alg, 12, 9, 1).unwrap();
        assert!(stab.max_distance.is_finite());
        assert!(stab.mean_distance > 0.0);
    }

    #[test]
    fn numeric_best_response_approaches_the_closed_form() {
        let problems = vec![
            ProblemSpec::linear_saddle(2, 1.0, 2.0).unwrap(),
            ProblemSpec::quadratic_scsc(2, 1.0, 0.5, 1.0).unwrap(),
        ];
        for p in problems {
            let mut rng = crate::seeding::rng(17);
            let z = p.domain().sample(&mut rng);
            for side in [Side::Dual, Side::Primal] {
                let exact = p.best_response(&z, side).unwrap();
                let numeric = numeric_best_response(&p, &z, side, 20_000).unwrap();
                assert!(
                    (exact.value - numeric.value).abs() < 2e-2,
                    "{} {:?}: exact {} numeric {}",
                    p.name(),
                    side,
                    exact.value,
                    numeric.value
                );
                // the numeric value never beats the exact optimum
                match side {
                    Side::Dual => assert!(numeric.value <= exact.value + 1e-9),
                    Side::Primal => assert!(numeric.value >= exact.value - 1e-9),
                }
            }
        }
    }

    #[test]
    fn run_trials_is_deterministic_in_seed() {
        let p = ProblemSpec::bilinear();
        let a = run_trials(&p, &ModeAlgorithm, 6, 12, 1).unwrap();
        let b = run_trials(&p, &ModeAlgorithm, 6, 12, 1).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.strong_gaps, b.strong_gaps);
    }
}
