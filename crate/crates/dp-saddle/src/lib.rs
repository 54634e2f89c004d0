//! Differentially private stochastic saddle-point optimization.
//!
//! The crate solves stochastic min-max problems `min_w max_theta E_x f(w,
//! theta; x)` over compact convex products, privately and non-privately, and
//! ships the measurement tools used to study the resulting solutions:
//!
//! * [`geometry`], [`loss`], [`data`]: joint points, projections, loss
//!   oracles with quadratic regularizer stacks, datasets.
//! * [`problems`]: synthetic problem families with exact population oracles
//!   and closed-form best responses (bilinear, linear, strongly-convex
//!   quadratic, geometric-median, and a packing ERM construction).
//! * [`privacy`]: `(epsilon, delta)` budgets, noise calibration for private
//!   stochastic gradient descent-ascent, output-perturbation scales, and
//!   parallel composition over disjoint blocks.
//! * [`solvers`]: projected (noisy) SGDA, a one-pass locally private
//!   variant, exact regularized empirical solvers, and the recursive
//!   regularization meta-algorithm that stacks geometrically growing
//!   regularizers across disjoint data blocks.
//! * [`eval`]: strong / weak / empirical gap estimators, replace-one
//!   stability probes, output-variance probes, and the strong-vs-weak
//!   separation check.
//! * [`experiment`]: a config-driven harness that sweeps sample sizes,
//!   writes deterministic CSV + manifest artifacts, and fits log-log rates.
//!
//! Every stochastic routine takes an explicit seed and is reproducible
//! bit-for-bit. The `examples/` directory demonstrates each capability
//! end-to-end; the `dp-saddle` binary exposes the harness (`run`) and the
//! rate fitter (`fit`).

pub mod algorithm;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod geometry;
pub mod loss;
pub mod privacy;
pub mod problems;
pub mod seeding;
pub mod solvers;

pub use algorithm::{AlgorithmOutput, SaddleAlgorithm};
pub use data::{DataPoint, Dataset};
pub use error::{Error, Result};
pub use geometry::{ConstraintSet, Domain, JointPoint, Vector};
pub use loss::{LossSpec, Regularizer};
pub use problems::{BestResponse, ProblemSpec, Side};
