//! Loss specifications: paired value / saddle-operator oracles plus a stack
//! of quadratic regularizers.
//!
//! The saddle operator follows the `[grad_w f, -grad_theta f]` convention, so
//! descent steps on the stacked vector move the primal block downhill and the
//! dual block uphill. A regularizer with coefficient `c` and center `(a, b)`
//! adds `c*|w - a|^2 - c*|theta - b|^2` to the value and `2c*(w - a)` /
//! `2c*(theta - b)` to the respective operator blocks; it therefore
//! contributes `2c` to the strong-convexity-strong-concavity modulus.

use std::sync::Arc;

use crate::data::DataPoint;
use crate::error::{Error, Result};
use crate::geometry::{stack, Domain, JointPoint, Vector};

pub type ValueFn = dyn Fn(&JointPoint, &DataPoint) -> f64 + Send + Sync;
pub type OperatorFn = dyn Fn(&JointPoint, &DataPoint) -> Vector + Send + Sync;

#[derive(Clone)]
pub struct Regularizer {
    pub coefficient: f64,
    pub center: JointPoint,
}

#[derive(Clone)]
pub struct LossSpec {
    value: Arc<ValueFn>,
    operator: Arc<OperatorFn>,
    d_w: usize,
    d_theta: usize,
    data_dim: usize,
    lipschitz: f64,
    smoothness: Option<f64>,
    /// Strong convexity-concavity already present in the base loss (zero for
    /// merely convex-concave families).
    base_modulus: f64,
    regularizers: Vec<Regularizer>,
}

impl std::fmt::Debug for LossSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LossSpec")
            .field("d_w", &self.d_w)
            .field("d_theta", &self.d_theta)
            .field("data_dim", &self.data_dim)
            .field("lipschitz", &self.lipschitz)
            .field("smoothness", &self.smoothness)
            .field("base_modulus", &self.base_modulus)
            .field("regularizers", &self.regularizers.len())
            .finish()
    }
}

impl LossSpec {
    /// `lipschitz` must bound the base operator norm over the intended
    /// domain and data support; `smoothness` (operator Lipschitz constant)
    /// is `None` for nonsmooth losses.
    pub fn new(
        value: Arc<ValueFn>,
        operator: Arc<OperatorFn>,
        d_w: usize,
        d_theta: usize,
        data_dim: usize,
        lipschitz: f64,
        smoothness: Option<f64>,
    ) -> Result<Self> {
        if !lipschitz.is_finite() || lipschitz <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lipschitz constant must be finite and positive, got {lipschitz}"
            )));
        }
        if let Some(beta) = smoothness {
            if !beta.is_finite() || beta < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "smoothness must be finite and nonnegative, got {beta}"
                )));
            }
        }
        if d_w == 0 || d_theta == 0 || data_dim == 0 {
            return Err(Error::InvalidParameter(
                "loss dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            value,
            operator,
            d_w,
            d_theta,
            data_dim,
            lipschitz,
            smoothness,
            base_modulus: 0.0,
            regularizers: Vec::new(),
        })
    }

    /// Declares that the base loss is already `mu`-strongly convex-concave.
    pub fn with_base_modulus(mut self, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "base modulus must be finite and nonnegative, got {mu}"
            )));
        }
        self.base_modulus = mu;
        Ok(self)
    }

    pub fn d_w(&self) -> usize {
        self.d_w
    }

    pub fn d_theta(&self) -> usize {
        self.d_theta
    }

    pub fn dim(&self) -> usize {
        self.d_w + self.d_theta
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn base_lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn base_smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    pub fn regularizers(&self) -> &[Regularizer] {
        &self.regularizers
    }

    fn check_args(&self, z: &JointPoint, x: &DataPoint) -> Result<()> {
        if z.d_w() != self.d_w || z.d_theta() != self.d_theta {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: z.dim(),
            });
        }
        if x.len() != self.data_dim {
            return Err(Error::DimensionMismatch {
                expected: self.data_dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Base value oracle, regularizers excluded.
    pub fn base_value(&self, z: &JointPoint, x: &DataPoint) -> Result<f64> {
        self.check_args(z, x)?;
        Ok((self.value)(z, x))
    }

    /// Base saddle operator, regularizers excluded.
    pub fn base_operator(&self, z: &JointPoint, x: &DataPoint) -> Result<Vector> {
        self.check_args(z, x)?;
        let g = (self.operator)(z, x);
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: g.len(),
            });
        }
        Ok(g)
    }

    /// Full value including the regularizer stack.
    pub fn value(&self, z: &JointPoint, x: &DataPoint) -> Result<f64> {
        let mut v = self.base_value(z, x)?;
        for reg in &self.regularizers {
            v += reg.coefficient
                * ((&z.w - &reg.center.w).norm_squared()
                    - (&z.theta - &reg.center.theta).norm_squared());
        }
        Ok(v)
    }

    /// Full saddle operator including the regularizer stack. Both blocks gain
    /// `+2c*(block - center_block)`: the primal from the gradient of
    /// `c*|w - a|^2`, the dual from the negated gradient of `-c*|theta - b|^2`.
    pub fn operator(&self, z: &JointPoint, x: &DataPoint) -> Result<Vector> {
        let base = self.base_operator(z, x)?;
        Ok(self.stack_contribution(z, base))
    }

    /// Regularizer-stack part of the operator added onto `base`.
    fn stack_contribution(&self, z: &JointPoint, base: Vector) -> Vector {
        if self.regularizers.is_empty() {
            return base;
        }
        let mut gw = base.rows(0, self.d_w).into_owned();
        let mut gt = base.rows(self.d_w, self.d_theta).into_owned();
        for reg in &self.regularizers {
            let s = 2.0 * reg.coefficient;
            gw += s * (&z.w - &reg.center.w);
            gt += s * (&z.theta - &reg.center.theta);
        }
        stack(&gw, &gt)
    }

    /// Pure extension of the stack; the receiver is untouched.
    pub fn regularize(&self, coefficient: f64, center: &JointPoint) -> Result<Self> {
        if !coefficient.is_finite() || coefficient < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "regularizer coefficient must be finite and nonnegative, got {coefficient}"
            )));
        }
        if center.d_w() != self.d_w || center.d_theta() != self.d_theta {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: center.dim(),
            });
        }
        let mut next = self.clone();
        next.regularizers.push(Regularizer {
            coefficient,
            center: center.clone(),
        });
        Ok(next)
    }

    /// Strong convexity-concavity modulus of the regularized loss:
    /// base modulus plus `sum_i 2 c_i`.
    pub fn scsc_modulus(&self) -> f64 {
        self.base_modulus
            + 2.0 * self.regularizers.iter().map(|r| r.coefficient).sum::<f64>()
    }

    /// Operator Lipschitz constant of the regularized loss, when the base is
    /// smooth.
    pub fn effective_smoothness(&self) -> Option<f64> {
        self.smoothness
            .map(|b| b + 2.0 * self.regularizers.iter().map(|r| r.coefficient).sum::<f64>())
    }

    /// Upper bound on the regularized operator norm over `domain`: base
    /// Lipschitz constant plus each regularizer's `2c * sup_z |z - center|`,
    /// with the supremum computed exactly from the domain factors.
    pub fn effective_lipschitz(&self, domain: &Domain) -> Result<f64> {
        let mut total = self.lipschitz;
        for reg in &self.regularizers {
            let dw = domain.primal().max_distance_from(&reg.center.w)?;
            let dt = domain.dual().max_distance_from(&reg.center.theta)?;
            total += 2.0 * reg.coefficient * (dw * dw + dt * dt).sqrt();
        }
        Ok(total)
    }
}
