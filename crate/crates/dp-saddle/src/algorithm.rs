//! The interface every measurable saddle-point algorithm implements, plus
//! two trivial reference algorithms used by the probes.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::geometry::JointPoint;
use crate::problems::ProblemSpec;

#[derive(Debug, Clone)]
pub struct AlgorithmOutput {
    pub point: JointPoint,
    pub gradient_evaluations: u64,
}

impl AlgorithmOutput {
    pub fn new(point: JointPoint, gradient_evaluations: u64) -> Self {
        Self {
            point,
            gradient_evaluations,
        }
    }
}

/// A map from datasets to joint points. Implementations must be
/// deterministic given `(problem, dataset, seed)`; all randomness flows
/// through the seed.
pub trait SaddleAlgorithm: Send + Sync {
    fn name(&self) -> &str;

    fn solve(&self, problem: &ProblemSpec, dataset: &Dataset, seed: u64)
        -> Result<AlgorithmOutput>;
}

/// Projects the dataset mean into both blocks. Requires
/// `d_w = d_theta = data_dim`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DatasetMean;

impl SaddleAlgorithm for DatasetMean {
    fn name(&self) -> &str {
        "dataset_mean"
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        _seed: u64,
    ) -> Result<AlgorithmOutput> {
        let domain = problem.domain();
        if dataset.data_dim() != domain.d_w() || dataset.data_dim() != domain.d_theta() {
            return Err(Error::DimensionMismatch {
                expected: domain.d_w(),
                actual: dataset.data_dim(),
            });
        }
        let mean = dataset.mean();
        let point = domain.project(&JointPoint::new(mean.clone(), mean))?;
        Ok(AlgorithmOutput::new(point, dataset.len() as u64))
    }
}

/// Ignores the data and returns a fixed point (projected into the domain).
#[derive(Debug, Clone)]
pub struct ConstantOutput {
    pub point: JointPoint,
}

impl SaddleAlgorithm for ConstantOutput {
    fn name(&self) -> &str {
        "constant"
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        _dataset: &Dataset,
        _seed: u64,
    ) -> Result<AlgorithmOutput> {
        Ok(AlgorithmOutput::new(
            problem.domain().project(&self.point)?,
            1,
        ))
    }
}
