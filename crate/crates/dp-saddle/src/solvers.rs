//! Optimization engines.
//!
//! The module is layered:
//!
//! * [`sgda`] is the shared stochastic gradient descent ascent engine
//!   (projected, averaged iterates, optional Gaussian noise on the gradient
//!   estimate). [`noisy_sgda`] is the same engine gated behind a privacy
//!   plan whose accountant preconditions must hold; [`local_dp_sgda`] is the
//!   one-pass variant that noises every per-sample gradient.
//! * [`solve_regularized_empirical`] produces the saddle point of an
//!   empirical objective plus a regularizer stack: closed form where the
//!   family allows it, otherwise deterministic gradient descent ascent with
//!   an a priori contraction count (smooth case) or a decreasing-step
//!   subgradient loop with an a priori distance bound (nonsmooth case).
//! * [`recursive_regularization`] runs the phase ladder: phase `t` adds a
//!   regularizer of coefficient `2^t lambda` centered at the previous
//!   output and solves the regularized problem on a fresh disjoint block via
//!   a pluggable [`PhaseSubroutine`] (exact, noisy SGDA, or output
//!   perturbation). Block privacy composes in parallel because the blocks
//!   are disjoint by construction.

use std::ops::Range;
use std::sync::Arc;

use rand::Rng;

use crate::algorithm::{AlgorithmOutput, SaddleAlgorithm};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{Domain, JointPoint, Vector};
use crate::loss::{LossSpec, Regularizer};
use crate::privacy::{
    calibrate_noisy_sgda, gaussian_vector, output_perturbation_sigma, PrivacyBudget,
    SgdaPrivacyPlan,
};
use crate::problems::ProblemSpec;
use crate::seeding;

/// Hyperparameters for one SGDA run.
#[derive(Debug, Clone)]
pub struct SgdaConfig {
    pub iterations: u64,
    /// Samples per gradient estimate, drawn with replacement; a batch of at
    /// least the dataset size degenerates to a deterministic full pass.
    pub batch_size: u64,
    pub step_size: f64,
    /// Standard deviation of the isotropic Gaussian added to each gradient
    /// estimate (zero for the noiseless algorithm).
    pub noise_sigma: f64,
}

impl SgdaConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter(
                "iterations and batch size must be positive".into(),
            ));
        }
        if !self.step_size.is_finite() || self.step_size <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step size must be finite and positive, got {}",
                self.step_size
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and nonnegative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    fn from_plan(plan: &SgdaPrivacyPlan) -> Self {
        Self {
            iterations: plan.iterations,
            batch_size: plan.batch_size,
            step_size: plan.step_size,
            noise_sigma: plan.noise_sigma,
        }
    }
}

/// Projected stochastic gradient descent ascent, returning the average of
/// the iterates at which gradients were evaluated (`z_0 .. z_{T-1}`).
///
/// Per iteration the randomness is consumed in a fixed order: batch indices
/// first, then (only when `noise_sigma > 0`) the Gaussian perturbation. A
/// zero-noise full-batch run is therefore bit-identical to deterministic
/// gradient descent ascent.
pub fn sgda(
    loss: &LossSpec,
    domain: &Domain,
    dataset: &Dataset,
    config: &SgdaConfig,
    start: Option<&JointPoint>,
    seed: u64,
) -> Result<AlgorithmOutput> {
    config.validate()?;
    if loss.d_w() != domain.d_w() || loss.d_theta() != domain.d_theta() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            actual: loss.dim(),
        });
    }
    let n = dataset.len();
    let full_pass = config.batch_size as usize >= n;
    let per_iter = if full_pass {
        n as u64
    } else {
        config.batch_size
    };

    let mut rng = seeding::rng(seed);
    let center = domain.center();
    let mut z = domain.project(start.unwrap_or(&center))?;
    let mut sum = Vector::zeros(domain.dim());

    for _ in 0..config.iterations {
        sum += z.stacked();
        let mut g = Vector::zeros(domain.dim());
        if full_pass {
            for x in dataset.iter() {
                g += loss.operator(&z, x)?;
            }
            g /= n as f64;
        } else {
            for _ in 0..config.batch_size {
                let i = rng.random_range(0..n);
                g += loss.operator(&z, dataset.point(i))?;
            }
            g /= config.batch_size as f64;
        }
        if config.noise_sigma > 0.0 {
            g += gaussian_vector(domain.dim(), config.noise_sigma, &mut rng)?;
        }
        z = domain.project(&z.stepped(&g, config.step_size)?)?;
    }

    let mean = sum / config.iterations as f64;
    Ok(AlgorithmOutput::new(
        domain.project(&JointPoint::from_stacked(domain.d_w(), &mean)?)?,
        config.iterations * per_iter,
    ))
}

/// Runs [`sgda`] under a calibrated privacy plan. Refuses to run when the
/// plan's accountant preconditions failed; the plan is the privacy proof,
/// and executing an unproven plan would silently void the guarantee.
pub fn noisy_sgda(
    loss: &LossSpec,
    domain: &Domain,
    dataset: &Dataset,
    plan: &SgdaPrivacyPlan,
    start: Option<&JointPoint>,
    seed: u64,
) -> Result<AlgorithmOutput> {
    if !plan.preconditions_ok() {
        return Err(Error::PrivacyPrecondition(format!(
            "refusing to run an unaccounted plan: {}",
            plan.preconditions.failures.join("; ")
        )));
    }
    sgda(
        loss,
        domain,
        dataset,
        &SgdaConfig::from_plan(plan),
        start,
        seed,
    )
}

/// Per-sample noise scale of the local-model one-pass algorithm:
/// `sigma = L sqrt(log(1/delta)) / epsilon`.
pub fn local_dp_noise_sigma(budget: &PrivacyBudget, lipschitz: f64) -> Result<f64> {
    if budget.is_vacuous() {
        return Err(Error::PrivacyPrecondition(
            "local randomization needs a concrete budget".into(),
        ));
    }
    if !lipschitz.is_finite() || lipschitz <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lipschitz constant must be finite and positive, got {lipschitz}"
        )));
    }
    Ok(lipschitz * (1.0 / budget.delta()).ln().sqrt() / budget.epsilon())
}

/// One-pass SGDA in the local model: every sample is touched exactly once,
/// in order, and its gradient is released only with `N(0, sigma^2 I)` noise
/// added, so each sample's entire contribution is privatized at the source.
///
/// The step size balances the total squared gradient scale including the
/// injected noise, `eta = R / sqrt(n (L^2 + d sigma^2))`, which yields the
/// `(d / (n eps^2))^{1/4}`-type averaged-iterate rate.
pub fn local_dp_sgda(
    loss: &LossSpec,
    domain: &Domain,
    dataset: &Dataset,
    budget: &PrivacyBudget,
    seed: u64,
) -> Result<AlgorithmOutput> {
    let n = dataset.len();
    let lipschitz = loss.base_lipschitz();
    let sigma = local_dp_noise_sigma(budget, lipschitz)?;
    let dim = domain.dim();
    let start = domain.center();
    let radius = domain.max_distance_from(&start)?;
    let second_moment = lipschitz * lipschitz + dim as f64 * sigma * sigma;
    let step = radius / (n as f64 * second_moment).sqrt();
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate local step size; check the domain and budget".into(),
        ));
    }

    let mut rng = seeding::rng(seed);
    let mut z = start;
    let mut sum = Vector::zeros(dim);
    for x in dataset.iter() {
        sum += z.stacked();
        let mut g = loss.operator(&z, x)?;
        g += gaussian_vector(dim, sigma, &mut rng)?;
        z = domain.project(&z.stepped(&g, step)?)?;
    }
    let mean = sum / n as f64;
    Ok(AlgorithmOutput::new(
        domain.project(&JointPoint::from_stacked(domain.d_w(), &mean)?)?,
        n as u64,
    ))
}

/// Result of an exact or certified regularized empirical solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub point: JointPoint,
    pub gradient_evaluations: u64,
    pub iterations: u64,
    /// Whether the family's closed form produced the point.
    pub closed_form: bool,
    /// A priori bound on the distance to the exact constrained saddle
    /// (zero for closed forms).
    pub distance_bound: f64,
}

/// Saddle point of `F_S` plus a regularizer stack, to within `distance_tol`
/// of the exact constrained solution.
///
/// Closed forms are used where the family admits them and are exact. The
/// iterative fallbacks carry a priori guarantees rather than empirical
/// stopping rules: the smooth path contracts at a known rate, the nonsmooth
/// path follows the deterministic strongly-monotone subgradient bound
/// `|z_t - z*|^2 <= max(D_0^2, 4 L^2 / mu^2) / (t + 1)`. Tolerances below
/// float resolution are clamped up to `~1e-12 B`.
pub fn solve_regularized_empirical(
    problem: &ProblemSpec,
    dataset: &Dataset,
    regs: &[Regularizer],
    distance_tol: f64,
) -> Result<SolveReport> {
    match problem.empirical_regularized_saddle(dataset, regs) {
        Ok(point) => Ok(SolveReport {
            point,
            // one pass to form the dataset mean
            gradient_evaluations: dataset.len() as u64,
            iterations: 0,
            closed_form: true,
            distance_bound: 0.0,
        }),
        Err(Error::Unsupported(_)) => {
            solve_regularized_iterative(problem, dataset, regs, distance_tol)
        }
        Err(e) => Err(e),
    }
}

/// The iterative fallback behind [`solve_regularized_empirical`], exposed so
/// closed forms can be cross-checked against it.
pub fn solve_regularized_iterative(
    problem: &ProblemSpec,
    dataset: &Dataset,
    regs: &[Regularizer],
    distance_tol: f64,
) -> Result<SolveReport> {
    if !distance_tol.is_finite() || distance_tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "distance tolerance must be finite and positive, got {distance_tol}"
        )));
    }
    let mut loss = problem.loss().clone();
    for r in regs {
        loss = loss.regularize(r.coefficient, &r.center)?;
    }
    let mu = loss.scsc_modulus();
    if mu <= 0.0 {
        return Err(Error::InvalidParameter(
            "iterative solver needs strong convexity-concavity; add a regularizer".into(),
        ));
    }
    let domain = problem.domain();
    let n = dataset.len() as u64;
    let mut z = domain.center();
    let d0 = domain.max_distance_from(&z)?;
    let tol = distance_tol.max(1e-12 * (1.0 + domain.diameter()));
    if d0 <= tol {
        return Ok(SolveReport {
            point: z,
            gradient_evaluations: 0,
            iterations: 0,
            closed_form: false,
            distance_bound: d0,
        });
    }

    let averaged_operator = |z: &JointPoint, loss: &LossSpec| -> Result<Vector> {
        let mut g = Vector::zeros(domain.dim());
        for x in dataset.iter() {
            g += loss.operator(z, x)?;
        }
        Ok(g / dataset.len() as f64)
    };

    let iterations = match loss.effective_smoothness() {
        Some(beta) => {
            // Contraction: |z+ - z*| <= q |z - z*| with
            // q^2 = 1 - 2 eta mu + eta^2 beta^2. The step is the smaller of
            // 1/(mu+beta) and mu/beta^2; the former alone loses contraction
            // once beta^2 > mu (mu + beta).
            let beta = beta.max(mu);
            let eta = (1.0 / (mu + beta)).min(mu / (beta * beta));
            let q2: f64 = 1.0 - 2.0 * eta * mu + eta * eta * beta * beta;
            let q = q2.max(0.0).sqrt();
            if q >= 1.0 {
                return Err(Error::NonConvergence {
                    residual: q,
                    iterations: 0,
                });
            }
            let needed = ((tol / d0).ln() / q.ln()).ceil().max(1.0) as u64;
            for _ in 0..needed {
                let g = averaged_operator(&z, &loss)?;
                z = domain.project(&z.stepped(&g, eta)?)?;
            }
            needed
        }
        None => {
            // Decreasing steps eta_t = 2 / (mu (t + 2)) give the
            // deterministic bound |z_t - z*|^2 <= M / (t + 1).
            let l_eff = loss.effective_lipschitz(domain)?;
            let m_bound = (d0 * d0).max(4.0 * l_eff * l_eff / (mu * mu));
            let needed_f = (m_bound / (tol * tol)).ceil();
            if needed_f > 2e8 {
                return Err(Error::ScheduleInfeasible(format!(
                    "nonsmooth fallback would need {needed_f:.1e} iterations to certify \
                     tolerance {tol:.3e}; choose a closed-form family or loosen it"
                )));
            }
            let needed = needed_f as u64;
            for t in 0..needed {
                let g = averaged_operator(&z, &loss)?;
                let eta = 2.0 / (mu * (t as f64 + 2.0));
                z = domain.project(&z.stepped(&g, eta)?)?;
            }
            needed
        }
    };

    Ok(SolveReport {
        point: z,
        gradient_evaluations: iterations * n,
        iterations,
        closed_form: false,
        distance_bound: tol,
    })
}

/// Returns `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// The phase ladder of the recursive algorithm: `ceil(log2 n)` levels fix
/// the block size `n' = floor(n / ceil(log2 n))`, and the number of phases
/// is `T = max(1, ceil(log2(L / (B lambda))))`, which is at most the level
/// count whenever `lambda >= L / (B sqrt(n))`.
#[derive(Debug, Clone)]
pub struct RecursionSchedule {
    pub n: usize,
    pub block_size: usize,
    pub phases: u32,
    pub lambda: f64,
    pub lipschitz: f64,
    pub diameter: f64,
}

impl RecursionSchedule {
    pub fn new(n: usize, lipschitz: f64, diameter: f64, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::ScheduleInfeasible(format!(
                "recursion needs at least 2 samples, got {n}"
            )));
        }
        for (label, v) in [
            ("lipschitz", lipschitz),
            ("diameter", diameter),
            ("lambda", lambda),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{label} must be finite and positive, got {v}"
                )));
            }
        }
        let lambda_min = lipschitz / (diameter * (n as f64).sqrt());
        if lambda < lambda_min * (1.0 - 1e-12) {
            return Err(Error::ScheduleInfeasible(format!(
                "lambda = {lambda:.6e} below the schedule floor L/(B sqrt(n)) = {lambda_min:.6e}"
            )));
        }
        let levels = ceil_log2(n).max(1);
        let block_size = n / levels as usize;
        if block_size == 0 {
            return Err(Error::ScheduleInfeasible(format!(
                "n = {n} leaves empty blocks across {levels} levels"
            )));
        }
        let ratio = lipschitz / (diameter * lambda);
        // The small slack absorbs float fuzz so that exact power-of-two
        // ratios do not round their phase count up.
        let phases = if ratio <= 1.0 {
            1
        } else {
            (ratio.log2() - 1e-9).ceil().max(1.0) as u32
        };
        if phases as usize * block_size > n {
            return Err(Error::ScheduleInfeasible(format!(
                "{phases} phases of {block_size} samples exceed n = {n}"
            )));
        }
        Ok(Self {
            n,
            block_size,
            phases,
            lambda,
            lipschitz,
            diameter,
        })
    }

    /// Coefficient of the regularizer added in phase `t >= 1`: `2^t lambda`.
    pub fn phase_coefficient(&self, phase: u32) -> f64 {
        2f64.powi(phase as i32) * self.lambda
    }

    /// Target accuracy radius after phase `t`: `B / 2^t` (phase 0 is the
    /// whole domain).
    pub fn phase_radius(&self, phase: u32) -> f64 {
        self.diameter / 2f64.powi(phase as i32)
    }

    /// Sample indices consumed by phase `t >= 1`; blocks are disjoint.
    pub fn block_range(&self, phase: u32) -> Range<usize> {
        let start = (phase as usize - 1) * self.block_size;
        start..start + self.block_size
    }

    /// Total samples touched across all phases (at most `n`).
    pub fn used_samples(&self) -> usize {
        self.phases as usize * self.block_size
    }
}

/// What one phase reports back to the ladder.
#[derive(Debug, Clone)]
pub struct PhaseOutcome {
    pub point: JointPoint,
    pub gradient_evaluations: u64,
    pub noise_injected: bool,
}

/// A solver for one phase's regularized block problem. `regs` carries the
/// full stack accumulated so far; the last entry is this phase's own
/// regularizer, centered at the previous phase's output.
pub trait PhaseSubroutine: Send + Sync {
    fn name(&self) -> &str;

    fn solve_phase(
        &self,
        problem: &ProblemSpec,
        block: &Dataset,
        regs: &[Regularizer],
        schedule: &RecursionSchedule,
        phase: u32,
        seed: u64,
    ) -> Result<PhaseOutcome>;
}

/// Non-private phase solver: exact (or certified far below the phase radius)
/// solution of the regularized block problem.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSubroutine;

impl PhaseSubroutine for ExactSubroutine {
    fn name(&self) -> &str {
        "exact"
    }

    fn solve_phase(
        &self,
        problem: &ProblemSpec,
        block: &Dataset,
        regs: &[Regularizer],
        schedule: &RecursionSchedule,
        phase: u32,
        _seed: u64,
    ) -> Result<PhaseOutcome> {
        let tol = schedule.phase_radius(phase) * 1e-6;
        let report = solve_regularized_empirical(problem, block, regs, tol)?;
        Ok(PhaseOutcome {
            point: report.point,
            gradient_evaluations: report.gradient_evaluations,
            noise_injected: false,
        })
    }
}

/// Gradient-Lipschitz factor assumed within a phase: warm starts keep the
/// iterates within the previous phase radius of the stack centers, where the
/// stacked regularizer gradient is at most `4 L`, for `5 L` total. This is
/// the power-of-two-ratio constant; ladders built from non-power-of-two
/// `L / (B lambda)` inflate it (strictly below `9 L`), so the private
/// subroutines are calibrated for ladders with exact ratios.
pub const PHASE_LIPSCHITZ_FACTOR: f64 = 5.0;

/// Private phase solver: noisy subsampled SGDA on the block, calibrated per
/// phase; across phases the blocks are disjoint, so the whole ladder costs
/// the single-phase budget by parallel composition.
#[derive(Debug, Clone)]
pub struct NoisySgdaSubroutine {
    pub budget: PrivacyBudget,
}

impl PhaseSubroutine for NoisySgdaSubroutine {
    fn name(&self) -> &str {
        "noisy_sgda"
    }

    fn solve_phase(
        &self,
        problem: &ProblemSpec,
        block: &Dataset,
        regs: &[Regularizer],
        schedule: &RecursionSchedule,
        phase: u32,
        seed: u64,
    ) -> Result<PhaseOutcome> {
        let mut loss = problem.loss().clone();
        for r in regs {
            loss = loss.regularize(r.coefficient, &r.center)?;
        }
        let l_eff = PHASE_LIPSCHITZ_FACTOR * schedule.lipschitz;
        let start_radius = schedule.phase_radius(phase - 1);
        let plan = calibrate_noisy_sgda(block.len(), loss.dim(), &self.budget, l_eff, start_radius)?;
        let center = &regs
            .last()
            .ok_or_else(|| Error::InvalidParameter("phase stack is empty".into()))?
            .center;
        let out = noisy_sgda(&loss, problem.domain(), block, &plan, Some(center), seed)?;
        Ok(PhaseOutcome {
            point: out.point,
            gradient_evaluations: out.gradient_evaluations,
            noise_injected: plan.noise_sigma > 0.0,
        })
    }
}

/// Private phase solver for smooth losses: solve the phase problem to the
/// tolerance the release analysis budgets for, then perturb the output with
/// phase-calibrated Gaussian noise and project.
#[derive(Debug, Clone)]
pub struct SmoothPerturbedSubroutine {
    pub budget: PrivacyBudget,
}

impl SmoothPerturbedSubroutine {
    /// Solve accuracy of phase `t`: `(delta / 5) L / (2^t lambda n')`; this
    /// keeps the approximation's privacy overhead inside the stated `delta`.
    pub fn solve_tolerance(
        &self,
        schedule: &RecursionSchedule,
        phase: u32,
    ) -> f64 {
        (self.budget.delta() / 5.0) * schedule.lipschitz
            / (2f64.powi(phase as i32) * schedule.lambda * schedule.block_size as f64)
    }
}

impl PhaseSubroutine for SmoothPerturbedSubroutine {
    fn name(&self) -> &str {
        "output_perturbation"
    }

    fn solve_phase(
        &self,
        problem: &ProblemSpec,
        block: &Dataset,
        regs: &[Regularizer],
        schedule: &RecursionSchedule,
        phase: u32,
        seed: u64,
    ) -> Result<PhaseOutcome> {
        let tol = self.solve_tolerance(schedule, phase);
        let report = solve_regularized_empirical(problem, block, regs, tol)?;
        let sigma = output_perturbation_sigma(
            phase,
            schedule.lambda,
            block.len(),
            &self.budget,
            schedule.lipschitz,
        )?;
        let mut rng = seeding::rng(seed);
        let noise = gaussian_vector(problem.domain().dim(), sigma, &mut rng)?;
        let point = problem
            .domain()
            .project(&report.point.stepped(&noise, -1.0)?)?;
        Ok(PhaseOutcome {
            point,
            gradient_evaluations: report.gradient_evaluations,
            noise_injected: true,
        })
    }
}

/// One phase of a finished ladder, for inspection and tests.
#[derive(Debug, Clone)]
pub struct PhaseRecord {
    pub phase: u32,
    pub coefficient: f64,
    /// Center the phase regularizer was anchored at (previous output).
    pub center: JointPoint,
    pub output: JointPoint,
    pub block: Range<usize>,
    pub gradient_evaluations: u64,
    pub noise_injected: bool,
}

/// Full trace of a recursive-regularization run.
#[derive(Debug, Clone)]
pub struct RecursionOutcome {
    pub point: JointPoint,
    pub schedule: RecursionSchedule,
    pub phases: Vec<PhaseRecord>,
    pub gradient_evaluations: u64,
}

/// Runs the recursive-regularization ladder: starting from the domain
/// center, phase `t` solves the block-`t` empirical problem under the
/// accumulated regularizer stack plus a fresh `2^t lambda` term centered at
/// the previous output. Each phase halves the target radius, so the final
/// output is within `~B/2^T` of the empirical optimum the ladder tracks.
pub fn recursive_regularization(
    problem: &ProblemSpec,
    dataset: &Dataset,
    lambda: f64,
    subroutine: &dyn PhaseSubroutine,
    seed: u64,
) -> Result<RecursionOutcome> {
    let schedule = RecursionSchedule::new(
        dataset.len(),
        problem.lipschitz(),
        problem.diameter(),
        lambda,
    )?;
    let mut center = problem.domain().center();
    let mut regs: Vec<Regularizer> = Vec::with_capacity(schedule.phases as usize);
    let mut records = Vec::with_capacity(schedule.phases as usize);
    let mut evals: u64 = 0;

    for phase in 1..=schedule.phases {
        let range = schedule.block_range(phase);
        let block = dataset.block(range.start, range.len())?;
        let coefficient = schedule.phase_coefficient(phase);
        regs.push(Regularizer {
            coefficient,
            center: center.clone(),
        });
        let outcome = subroutine.solve_phase(
            problem,
            &block,
            &regs,
            &schedule,
            phase,
            seeding::child_seed(seed, phase as u64),
        )?;
        records.push(PhaseRecord {
            phase,
            coefficient,
            center: center.clone(),
            output: outcome.point.clone(),
            block: range,
            gradient_evaluations: outcome.gradient_evaluations,
            noise_injected: outcome.noise_injected,
        });
        evals += outcome.gradient_evaluations;
        center = outcome.point;
    }

    Ok(RecursionOutcome {
        point: center,
        schedule,
        phases: records,
        gradient_evaluations: evals,
    })
}

/// How the ladder's base coefficient is chosen.
#[derive(Debug, Clone)]
pub enum LambdaRule {
    /// Use this value as-is (the schedule still enforces its floor).
    Fixed(f64),
    /// `(48 / B)(alpha_hat + L / sqrt(n'))` for a target excess accuracy
    /// `alpha_hat` per phase solve.
    AutoNonPrivate { alpha_hat: f64 },
    /// `(48 / B)(L / sqrt(n') + L sqrt(d log(2/delta)) / (n' eps))`,
    /// matching the private phase solvers' attainable accuracy.
    AutoPrivate { budget: PrivacyBudget },
}

impl LambdaRule {
    pub fn resolve(
        &self,
        n: usize,
        dim: usize,
        lipschitz: f64,
        diameter: f64,
    ) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let levels = ceil_log2(n).max(1);
        let n_prime = (n / levels as usize).max(1) as f64;
        match self {
            LambdaRule::Fixed(v) => {
                if !v.is_finite() || *v <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "lambda must be finite and positive, got {v}"
                    )));
                }
                Ok(*v)
            }
            LambdaRule::AutoNonPrivate { alpha_hat } => {
                if !alpha_hat.is_finite() || *alpha_hat < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "alpha_hat must be finite and nonnegative, got {alpha_hat}"
                    )));
                }
                Ok((48.0 / diameter) * (alpha_hat + lipschitz / n_prime.sqrt()))
            }
            LambdaRule::AutoPrivate { budget } => {
                if budget.is_vacuous() {
                    return Err(Error::PrivacyPrecondition(
                        "auto-private lambda needs a concrete budget".into(),
                    ));
                }
                let private_term = lipschitz
                    * (dim as f64 * (2.0 / budget.delta()).ln()).sqrt()
                    / (n_prime * budget.epsilon());
                Ok((48.0 / diameter) * (lipschitz / n_prime.sqrt() + private_term))
            }
        }
    }
}

// ---------------------------------------------------------------------
// SaddleAlgorithm wrappers
// ---------------------------------------------------------------------

/// Non-private full-batch SGDA baseline with the classic `B/(L sqrt(T))`
/// step.
#[derive(Debug, Clone, Copy)]
pub struct FullBatchSgda {
    pub iterations: u64,
}

impl SaddleAlgorithm for FullBatchSgda {
    fn name(&self) -> &str {
        "sgda"
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        seed: u64,
    ) -> Result<AlgorithmOutput> {
        let domain = problem.domain();
        let radius = domain.max_distance_from(&domain.center())?;
        let config = SgdaConfig {
            iterations: self.iterations,
            batch_size: dataset.len() as u64,
            step_size: radius / (problem.lipschitz() * (self.iterations as f64).sqrt()),
            noise_sigma: 0.0,
        };
        sgda(problem.loss(), domain, dataset, &config, None, seed)
    }
}

/// Centrally private noisy SGDA, self-calibrating from `(n, d, budget)`.
#[derive(Debug, Clone, Copy)]
pub struct NoisySgdaAlgorithm {
    pub budget: PrivacyBudget,
}

impl SaddleAlgorithm for NoisySgdaAlgorithm {
    fn name(&self) -> &str {
        "noisy_sgda"
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        seed: u64,
    ) -> Result<AlgorithmOutput> {
        let domain = problem.domain();
        let radius = domain.max_distance_from(&domain.center())?;
        let plan = calibrate_noisy_sgda(
            dataset.len(),
            domain.dim(),
            &self.budget,
            problem.lipschitz(),
            radius,
        )?;
        noisy_sgda(problem.loss(), domain, dataset, &plan, None, seed)
    }
}

/// Locally private one-pass SGDA.
#[derive(Debug, Clone, Copy)]
pub struct LocalDpSgdaAlgorithm {
    pub budget: PrivacyBudget,
}

impl SaddleAlgorithm for LocalDpSgdaAlgorithm {
    fn name(&self) -> &str {
        "local_sgda"
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        seed: u64,
    ) -> Result<AlgorithmOutput> {
        local_dp_sgda(problem.loss(), problem.domain(), dataset, &self.budget, seed)
    }
}

/// Exact (or certified) solver for the empirical problem plus a single
/// regularizer of modulus `modulus` centered at the domain center; the
/// classical uniform-stability baseline.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedErm {
    /// Resulting strong convexity-concavity of the added term (the
    /// regularizer coefficient is half this).
    pub modulus: f64,
}

impl SaddleAlgorithm for RegularizedErm {
    fn name(&self) -> &str {
        "regularized_erm"
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        _seed: u64,
    ) -> Result<AlgorithmOutput> {
        if !self.modulus.is_finite() || self.modulus <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "modulus must be finite and positive, got {}",
                self.modulus
            )));
        }
        let regs = [Regularizer {
            coefficient: self.modulus / 2.0,
            center: problem.domain().center(),
        }];
        let tol = 1e-9 * (1.0 + problem.diameter());
        let report = solve_regularized_empirical(problem, dataset, &regs, tol)?;
        Ok(AlgorithmOutput::new(
            report.point,
            report.gradient_evaluations,
        ))
    }
}

/// The recursive-regularization meta-algorithm with a pluggable phase
/// subroutine and lambda rule.
#[derive(Clone)]
pub struct RecursiveRegularizationAlg {
    label: String,
    lambda: LambdaRule,
    subroutine: Arc<dyn PhaseSubroutine>,
}

impl RecursiveRegularizationAlg {
    pub fn new(lambda: LambdaRule, subroutine: Arc<dyn PhaseSubroutine>) -> Self {
        let label = format!("recursive_{}", subroutine.name());
        Self {
            label,
            lambda,
            subroutine,
        }
    }

    pub fn exact(lambda: LambdaRule) -> Self {
        Self::new(lambda, Arc::new(ExactSubroutine))
    }

    pub fn with_noisy_sgda(lambda: LambdaRule, budget: PrivacyBudget) -> Self {
        Self::new(lambda, Arc::new(NoisySgdaSubroutine { budget }))
    }

    pub fn with_output_perturbation(lambda: LambdaRule, budget: PrivacyBudget) -> Self {
        Self::new(lambda, Arc::new(SmoothPerturbedSubroutine { budget }))
    }

    /// Runs the ladder and returns the full phase trace.
    pub fn run(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        seed: u64,
    ) -> Result<RecursionOutcome> {
        let lambda = self.lambda.resolve(
            dataset.len(),
            problem.domain().dim(),
            problem.lipschitz(),
            problem.diameter(),
        )?;
        recursive_regularization(problem, dataset, lambda, self.subroutine.as_ref(), seed)
    }
}

impl SaddleAlgorithm for RecursiveRegularizationAlg {
    fn name(&self) -> &str {
        &self.label
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        seed: u64,
    ) -> Result<AlgorithmOutput> {
        let outcome = self.run(problem, dataset, seed)?;
        Ok(AlgorithmOutput::new(
            outcome.point,
            outcome.gradient_evaluations,
        ))
    }
}
