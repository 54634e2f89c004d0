//! Synthetic saddle-point problem families with exact population oracles.
//!
//! Each family ships: a per-sample loss (value + saddle operator), a data
//! sampler, the exact population objective `F_D`, and closed-form best
//! responses wherever the structure allows them. The families:
//!
//! * [`ProblemSpec::bilinear`]: `f(w, theta; x) = w * theta` on
//!   `[-1,1] x [-1,1]` with Rademacher data. The losses ignore the sample,
//!   but estimators built on independent runs do not, which is what makes
//!   this the canonical strong-vs-weak gap separation instance.
//! * [`ProblemSpec::linear_saddle`]: `f = <w, x> - <theta, x>` on centered
//!   balls, data uniform in a shifted ball.
//! * [`ProblemSpec::quadratic_scsc`]: strongly convex-concave quadratic with
//!   a bilinear coupling, `f = mu/2 |w-x|^2 - mu/2 |theta-x|^2 +
//!   gamma <w, theta>`, `0 <= gamma < mu`; population and regularized
//!   saddles in closed form.
//! * [`ProblemSpec::median_saddle`]: `f = |w-x| - |theta-x|` over a finite
//!   collinear support, so the geometric-median subproblems reduce to exact
//!   one-dimensional weighted medians.
//! * [`ProblemSpec::packing`]: the fixed-design ERM family
//!   `f = <w, x>` with dataset `{L s_1 e_1, ..., L s_K e_K, 0, ...}`;
//!   adjacency flips one sign.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{DataPoint, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{stack, uniform_in_ball, ConstraintSet, Domain, JointPoint, Vector};
use crate::loss::{LossSpec, Regularizer};
use crate::seeding;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Which block a best response optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Minimize over `w` at fixed `theta`.
    Primal,
    /// Maximize over `theta` at fixed `w`.
    Dual,
}

/// An exact inner optimum: the optimizing block and the attained objective
/// value.
#[derive(Debug, Clone)]
pub struct BestResponse {
    pub point: Vector,
    pub value: f64,
}

/// Analytic structure of a problem family; everything the closed-form paths
/// need beyond the generic loss oracles.
#[derive(Debug, Clone)]
pub enum Family {
    Bilinear,
    LinearSaddle {
        mean: Vector,
        noise_radius: f64,
    },
    QuadraticScSc {
        mu: f64,
        gamma: f64,
        mean: Vector,
        noise_radius: f64,
    },
    MedianSaddle {
        support: Vec<DataPoint>,
        weights: Vec<f64>,
        /// Unit direction of the support line (all points are multiples).
        direction: Vector,
    },
    PackingErm {
        instance: PackingInstance,
    },
}

/// The sign-indexed fixed-design dataset family: `K` axis spikes of norm
/// `scale` padded with zeros to `n` points. Flipping one sign changes exactly
/// one dataset entry, which is the adjacency the stability probes use.
#[derive(Debug, Clone)]
pub struct PackingInstance {
    pub n: usize,
    pub dim: usize,
    pub signs: Vec<i8>,
    pub scale: f64,
}

impl PackingInstance {
    pub fn new(n: usize, dim: usize, signs: Vec<i8>, scale: f64) -> Result<Self> {
        let k = signs.len();
        if k == 0 || k > n.min(dim) {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= K <= min(n, d); got K={k}, n={n}, d={dim}"
            )));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale must be finite and positive, got {scale}"
            )));
        }
        Ok(Self {
            n,
            dim,
            signs,
            scale,
        })
    }

    pub fn k(&self) -> usize {
        self.signs.len()
    }

    pub fn dataset(&self) -> Dataset {
        let mut points = Vec::with_capacity(self.n);
        for (j, s) in self.signs.iter().enumerate() {
            let mut p = Vector::zeros(self.dim);
            p[j] = self.scale * *s as f64;
            points.push(p);
        }
        points.resize(self.n, Vector::zeros(self.dim));
        Dataset::new(points).expect("n >= K >= 1")
    }

    pub fn flipped(&self, j: usize) -> Result<Self> {
        if j >= self.k() {
            return Err(Error::InvalidParameter(format!(
                "flip index {j} out of range for K={}",
                self.k()
            )));
        }
        let mut signs = self.signs.clone();
        signs[j] = -signs[j];
        Self::new(self.n, self.dim, signs, self.scale)
    }

    /// The exact constrained ERM minimizer over the ball of the given
    /// radius: `-(radius / sqrt(K)) * sum_j s_j e_j`.
    pub fn optimal_w(&self, radius: f64) -> Vector {
        let mut w = Vector::zeros(self.dim);
        let c = -radius / (self.k() as f64).sqrt();
        for (j, s) in self.signs.iter().enumerate() {
            w[j] = c * *s as f64;
        }
        w
    }

    /// `F_S` at the minimizer: `-radius * scale * sqrt(K) / n`.
    pub fn optimal_value(&self, radius: f64) -> f64 {
        -radius * self.scale * (self.k() as f64).sqrt() / self.n as f64
    }
}

/// A problem: loss oracles, domain, family structure, and exact population
/// quantities.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    name: String,
    family: Family,
    loss: LossSpec,
    domain: Domain,
}

impl ProblemSpec {
    // ------------------------------------------------------------------
    // constructors
    // ------------------------------------------------------------------

    /// `f(w, theta; x) = w * theta` on `[-1, 1]^2`, `x` Rademacher.
    pub fn bilinear() -> Self {
        let value: Arc<crate::loss::ValueFn> = Arc::new(|z, _x| z.w[0] * z.theta[0]);
        let operator: Arc<crate::loss::OperatorFn> = Arc::new(|z, _x| {
            Vector::from_row_slice(&[z.theta[0], -z.w[0]])
        });
        let loss = LossSpec::new(value, operator, 1, 1, 1, SQRT2, Some(1.0)).expect("static");
        let domain = Domain::new(
            ConstraintSet::symmetric_box(1, 1.0).expect("static"),
            ConstraintSet::symmetric_box(1, 1.0).expect("static"),
        );
        Self {
            name: "bilinear".into(),
            family: Family::Bilinear,
            loss,
            domain,
        }
    }

    /// `f = <w, x> - <theta, x>` on centered balls of equal radius. The
    /// primal/dual radius is `diameter / (2 sqrt(2))` so the product set has
    /// exactly the requested diameter; the data law is uniform on a ball of
    /// radius `lipschitz / (2 sqrt(2))` centered at the same multiple of
    /// `e_1`, making the loss exactly `lipschitz`-Lipschitz over the support.
    pub fn linear_saddle(dim: usize, lipschitz: f64, diameter: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        if !lipschitz.is_finite() || lipschitz <= 0.0 || !diameter.is_finite() || diameter <= 0.0 {
            return Err(Error::InvalidParameter(
                "lipschitz and diameter must be finite and positive".into(),
            ));
        }
        let radius = diameter / (2.0 * SQRT2);
        let shift = lipschitz / (2.0 * SQRT2);
        let mut mean = Vector::zeros(dim);
        mean[0] = shift;
        let noise_radius = shift;

        let value: Arc<crate::loss::ValueFn> =
            Arc::new(|z, x| z.w.dot(x) - z.theta.dot(x));
        let operator: Arc<crate::loss::OperatorFn> = Arc::new(|_z, x| stack(x, x));
        let loss = LossSpec::new(value, operator, dim, dim, dim, lipschitz, Some(0.0))?;
        let domain = Domain::new(
            ConstraintSet::centered_ball(dim, radius)?,
            ConstraintSet::centered_ball(dim, radius)?,
        );
        Ok(Self {
            name: "linear_saddle".into(),
            family: Family::LinearSaddle { mean, noise_radius },
            loss,
            domain,
        })
    }

    /// `f = mu/2 |w-x|^2 - mu/2 |theta-x|^2 + gamma <w, theta>` on centered
    /// balls of the given radius, `0 <= gamma < mu`. Data is uniform on the
    /// ball of radius `set_radius / 5` centered at `(set_radius / 2) e_1`;
    /// the margins keep every population, empirical, and regularized saddle
    /// strictly interior, so the closed forms below are the exact
    /// constrained optima.
    pub fn quadratic_scsc(dim: usize, mu: f64, gamma: f64, set_radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mu must be finite and positive, got {mu}"
            )));
        }
        if !gamma.is_finite() || gamma < 0.0 || gamma >= mu {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= gamma < mu, got gamma={gamma}, mu={mu}"
            )));
        }
        if !set_radius.is_finite() || set_radius <= 0.0 {
            return Err(Error::InvalidParameter(
                "set_radius must be finite and positive".into(),
            ));
        }
        let mut mean = Vector::zeros(dim);
        mean[0] = set_radius / 2.0;
        let noise_radius = set_radius / 5.0;

        // Saddle map gain: anchors of norm a map to saddles of norm at most
        // a * mu (mu + gamma) / (mu^2 + gamma^2) <= 1.21 a; with anchors
        // bounded by 0.7 R every stationary point stays below 0.85 R.
        let gain = mu * (mu + gamma) / (mu * mu + gamma * gamma);
        let anchor_bound = mean.norm() + noise_radius;
        if gain * anchor_bound > 0.9 * set_radius {
            return Err(Error::InvalidParameter(
                "data support too wide for interior saddles".into(),
            ));
        }

        let (m, g) = (mu, gamma);
        let value: Arc<crate::loss::ValueFn> = Arc::new(move |z, x| {
            0.5 * m * (&z.w - x).norm_squared() - 0.5 * m * (&z.theta - x).norm_squared()
                + g * z.w.dot(&z.theta)
        });
        let operator: Arc<crate::loss::OperatorFn> = Arc::new(move |z, x| {
            let gw = m * (&z.w - x) + g * &z.theta;
            let gt = m * (&z.theta - x) - g * &z.w;
            stack(&gw, &gt)
        });
        // sup |block| <= mu (R + sup|x|) + gamma R over each block
        let sup_x = anchor_bound;
        let block = mu * (set_radius + sup_x) + gamma * set_radius;
        let lipschitz = SQRT2 * block;
        let smoothness = (mu * mu + gamma * gamma).sqrt();
        let loss = LossSpec::new(value, operator, dim, dim, dim, lipschitz, Some(smoothness))?
            .with_base_modulus(mu)?;
        let domain = Domain::new(
            ConstraintSet::centered_ball(dim, set_radius)?,
            ConstraintSet::centered_ball(dim, set_radius)?,
        );
        Ok(Self {
            name: "quadratic_scsc".into(),
            family: Family::QuadraticScSc {
                mu,
                gamma,
                mean,
                noise_radius,
            },
            loss,
            domain,
        })
    }

    /// `f = |w - x| - |theta - x|` over a finite collinear support along
    /// `e_1`: `num_support` (odd) equally weighted points at asymmetric
    /// positions inside the ball, so the weighted median is a unique support
    /// point. Subgradients at kinks are taken to be zero.
    pub fn median_saddle(dim: usize, num_support: usize, set_radius: f64) -> Result<Self> {
        if num_support == 0 || num_support % 2 == 0 {
            return Err(Error::InvalidParameter(
                "num_support must be odd and positive".into(),
            ));
        }
        // Asymmetric spread in (-0.9 R, 0.9 R); never symmetric about 0.
        let positions: Vec<f64> = (0..num_support)
            .map(|i| {
                let t = if num_support == 1 {
                    0.5
                } else {
                    i as f64 / (num_support - 1) as f64
                };
                set_radius * (-0.72 + 1.53 * t)
            })
            .collect();
        let support: Vec<DataPoint> = positions
            .iter()
            .map(|p| {
                let mut x = Vector::zeros(dim);
                x[0] = *p;
                x
            })
            .collect();
        let weights = vec![1.0 / num_support as f64; num_support];
        Self::median_saddle_custom(dim, support, weights, set_radius)
    }

    /// Median-saddle instance over an explicit collinear support.
    pub fn median_saddle_custom(
        dim: usize,
        support: Vec<DataPoint>,
        weights: Vec<f64>,
        set_radius: f64,
    ) -> Result<Self> {
        if dim == 0 || support.is_empty() || support.len() != weights.len() {
            return Err(Error::InvalidParameter(
                "support and weights must be nonempty and equally long".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidParameter(
                "weights must be nonnegative and sum to 1".into(),
            ));
        }
        if !set_radius.is_finite() || set_radius <= 0.0 {
            return Err(Error::InvalidParameter(
                "set_radius must be finite and positive".into(),
            ));
        }
        // The support must be collinear through the origin: every best
        // response then reduces to a 1-d weighted median on that line.
        let direction = support
            .iter()
            .find(|x| x.norm() > 0.0)
            .map(|x| x / x.norm())
            .unwrap_or_else(|| {
                let mut e = Vector::zeros(dim);
                e[0] = 1.0;
                e
            });
        for x in &support {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: x.len(),
                });
            }
            let residual = x - &direction * direction.dot(x);
            if residual.norm() > 1e-9 * set_radius.max(1.0) {
                return Err(Error::InvalidParameter(
                    "support points must be collinear through the origin".into(),
                ));
            }
            if x.norm() > 0.95 * set_radius {
                return Err(Error::InvalidParameter(
                    "support must lie strictly inside the constraint ball".into(),
                ));
            }
        }

        let value: Arc<crate::loss::ValueFn> =
            Arc::new(|z, x| (&z.w - x).norm() - (&z.theta - x).norm());
        let operator: Arc<crate::loss::OperatorFn> = Arc::new(|z, x| {
            let unit = |v: Vector| {
                let n = v.norm();
                if n == 0.0 {
                    v // zero subgradient at the kink
                } else {
                    v / n
                }
            };
            let gw = unit(&z.w - x);
            let gt = unit(&z.theta - x);
            stack(&gw, &gt)
        });
        let loss = LossSpec::new(value, operator, dim, dim, dim, SQRT2, None)?;
        let domain = Domain::new(
            ConstraintSet::centered_ball(dim, set_radius)?,
            ConstraintSet::centered_ball(dim, set_radius)?,
        );
        Ok(Self {
            name: "median_saddle".into(),
            family: Family::MedianSaddle {
                support,
                weights,
                direction,
            },
            loss,
            domain,
        })
    }

    /// The fixed-design packing family. `radius` is the primal ball radius
    /// (the `B` of its stability-risk product `L B^2 / n`); the dual block is
    /// a singleton so the problem is pure minimization.
    pub fn packing(instance: PackingInstance, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidParameter(
                "radius must be finite and positive".into(),
            ));
        }
        let dim = instance.dim;
        let value: Arc<crate::loss::ValueFn> = Arc::new(|z, x| z.w.dot(x));
        let operator: Arc<crate::loss::OperatorFn> =
            Arc::new(|_z, x| stack(x, &Vector::zeros(1)));
        let loss = LossSpec::new(value, operator, dim, 1, dim, instance.scale, Some(0.0))?;
        let domain = Domain::new(
            ConstraintSet::centered_ball(dim, radius)?,
            ConstraintSet::ball(Vector::zeros(1), 0.0)?,
        );
        Ok(Self {
            name: "packing_erm".into(),
            family: Family::PackingErm { instance },
            loss,
            domain,
        })
    }

    // ------------------------------------------------------------------
    // accessors
    // ------------------------------------------------------------------

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn data_dim(&self) -> usize {
        self.loss.data_dim()
    }

    /// Base Lipschitz constant `L` of the per-sample operator.
    pub fn lipschitz(&self) -> f64 {
        self.loss.base_lipschitz()
    }

    /// Domain diameter `B`.
    pub fn diameter(&self) -> f64 {
        self.domain.diameter()
    }

    // ------------------------------------------------------------------
    // sampling
    // ------------------------------------------------------------------

    /// Draws one sample. Unsupported for the fixed-design packing family.
    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Result<DataPoint> {
        match &self.family {
            Family::Bilinear => {
                let s: bool = rng.random();
                Ok(Vector::from_row_slice(&[if s { 1.0 } else { -1.0 }]))
            }
            Family::LinearSaddle { mean, noise_radius } => {
                Ok(mean + uniform_in_ball(mean.len(), *noise_radius, rng))
            }
            Family::QuadraticScSc {
                mean, noise_radius, ..
            } => Ok(mean + uniform_in_ball(mean.len(), *noise_radius, rng)),
            Family::MedianSaddle {
                support, weights, ..
            } => {
                let u: f64 = rng.random_range(0.0..1.0);
                let mut acc = 0.0;
                for (x, w) in support.iter().zip(weights.iter()) {
                    acc += w;
                    if u < acc {
                        return Ok(x.clone());
                    }
                }
                Ok(support.last().expect("nonempty").clone())
            }
            Family::PackingErm { .. } => Err(Error::Unsupported(
                "packing is a fixed-design family; use sample_dataset".into(),
            )),
        }
    }

    /// Draws an i.i.d. dataset of size `n` (deterministic in `seed`). For the
    /// packing family this returns the fixed design, and `n` must match it.
    pub fn sample_dataset(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if let Family::PackingErm { instance } = &self.family {
            if n != instance.n {
                return Err(Error::InvalidParameter(format!(
                    "packing design has fixed n = {}, requested {n}",
                    instance.n
                )));
            }
            return Ok(instance.dataset());
        }
        let mut rng = seeding::rng(seed);
        let points = (0..n)
            .map(|_| self.sample_point(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(points)
    }

    // ------------------------------------------------------------------
    // population oracles
    // ------------------------------------------------------------------

    /// Exact `F_D(z)`. For uniform-ball data the quadratic family's variance
    /// terms cancel between the two blocks, so these are closed forms, not
    /// approximations. The packing family is fixed-design: its "population"
    /// is the design itself.
    pub fn population_value(&self, z: &JointPoint) -> Result<f64> {
        self.check_point(z)?;
        Ok(match &self.family {
            Family::Bilinear => z.w[0] * z.theta[0],
            Family::LinearSaddle { mean, .. } => z.w.dot(mean) - z.theta.dot(mean),
            Family::QuadraticScSc {
                mu, gamma, mean, ..
            } => {
                0.5 * mu * (&z.w - mean).norm_squared()
                    - 0.5 * mu * (&z.theta - mean).norm_squared()
                    + gamma * z.w.dot(&z.theta)
            }
            Family::MedianSaddle {
                support, weights, ..
            } => support
                .iter()
                .zip(weights.iter())
                .map(|(x, p)| p * ((&z.w - x).norm() - (&z.theta - x).norm()))
                .sum(),
            Family::PackingErm { instance } => z.w.dot(&instance.dataset().mean()),
        })
    }

    /// Exact population saddle operator `G_D(z)`.
    pub fn population_operator(&self, z: &JointPoint) -> Result<Vector> {
        self.check_point(z)?;
        Ok(match &self.family {
            Family::Bilinear => Vector::from_row_slice(&[z.theta[0], -z.w[0]]),
            Family::LinearSaddle { mean, .. } => stack(mean, mean),
            Family::QuadraticScSc {
                mu, gamma, mean, ..
            } => {
                let gw = *mu * (&z.w - mean) + *gamma * &z.theta;
                let gt = *mu * (&z.theta - mean) - *gamma * &z.w;
                stack(&gw, &gt)
            }
            Family::MedianSaddle {
                support, weights, ..
            } => {
                let mut gw = Vector::zeros(z.d_w());
                let mut gt = Vector::zeros(z.d_theta());
                for (x, p) in support.iter().zip(weights.iter()) {
                    let dw = &z.w - x;
                    let nw = dw.norm();
                    if nw > 0.0 {
                        gw += dw * (*p / nw);
                    }
                    let dt = &z.theta - x;
                    let nt = dt.norm();
                    if nt > 0.0 {
                        gt += dt * (*p / nt);
                    }
                }
                stack(&gw, &gt)
            }
            Family::PackingErm { instance } => {
                stack(&instance.dataset().mean(), &Vector::zeros(1))
            }
        })
    }

    /// Exact population saddle point where one exists in closed form.
    pub fn population_saddle(&self) -> Option<JointPoint> {
        match &self.family {
            Family::Bilinear => Some(JointPoint::zeros(1, 1)),
            Family::LinearSaddle { mean, .. } => {
                let point = self
                    .domain
                    .primal()
                    .support_point(&(-mean))
                    .expect("dims fixed at construction");
                Some(JointPoint::new(point.clone(), point))
            }
            Family::QuadraticScSc {
                mu, gamma, mean, ..
            } => {
                let det = mu * mu + gamma * gamma;
                let w = mean * (mu * (mu - gamma) / det);
                let theta = mean * (mu * (mu + gamma) / det);
                Some(JointPoint::new(w, theta))
            }
            Family::MedianSaddle { .. } => {
                let m = self.median_point(None).ok()?;
                Some(JointPoint::new(m.clone(), m))
            }
            Family::PackingErm { instance } => {
                let radius = self.primal_radius();
                Some(JointPoint::new(
                    instance.optimal_w(radius),
                    Vector::zeros(1),
                ))
            }
        }
    }

    /// Primal-factor ball radius (panics only for box factors, which the
    /// constructors never pair with this call).
    pub fn primal_radius(&self) -> f64 {
        match self.domain.primal() {
            ConstraintSet::Ball { radius, .. } => *radius,
            ConstraintSet::Box { .. } => self.domain.primal().diameter() / 2.0,
        }
    }

    /// Exact best response against the population objective.
    pub fn best_response(&self, z: &JointPoint, side: Side) -> Result<BestResponse> {
        self.check_point(z)?;
        let point = match (&self.family, side) {
            (Family::Bilinear, Side::Dual) => self.domain.dual().support_point(&z.w)?,
            (Family::Bilinear, Side::Primal) => {
                self.domain.primal().support_point(&(-&z.theta))?
            }
            (Family::LinearSaddle { mean, .. }, Side::Dual) => {
                self.domain.dual().support_point(&(-mean))?
            }
            (Family::LinearSaddle { mean, .. }, Side::Primal) => {
                self.domain.primal().support_point(&(-mean))?
            }
            (Family::QuadraticScSc {
                mu, gamma, mean, ..
            },
            Side::Dual) => {
                let target = mean + (&z.w * (*gamma / *mu));
                self.domain.dual().project(&target)?
            }
            (Family::QuadraticScSc {
                mu, gamma, mean, ..
            },
            Side::Primal) => {
                let target = mean - (&z.theta * (*gamma / *mu));
                self.domain.primal().project(&target)?
            }
            (Family::MedianSaddle { .. }, _) => self.median_point(None)?,
            (Family::PackingErm { instance }, Side::Primal) => {
                let mean = instance.dataset().mean();
                self.domain.primal().support_point(&(-mean))?
            }
            (Family::PackingErm { .. }, Side::Dual) => Vector::zeros(1),
        };
        let value = match side {
            Side::Dual => self.population_value(&JointPoint::new(z.w.clone(), point.clone()))?,
            Side::Primal => {
                self.population_value(&JointPoint::new(point.clone(), z.theta.clone()))?
            }
        };
        Ok(BestResponse { point, value })
    }

    /// Weighted geometric median of the family support (population) or of a
    /// dataset drawn from it (empirical): exact 1-d weighted median along
    /// the support line. The lower median is returned when the minimizer is
    /// an interval.
    pub fn median_point(&self, dataset: Option<&Dataset>) -> Result<Vector> {
        let Family::MedianSaddle {
            support,
            weights,
            direction,
        } = &self.family
        else {
            return Err(Error::Unsupported(
                "median_point applies to the median family only".into(),
            ));
        };
        let (positions, masses): (Vec<f64>, Vec<f64>) = match dataset {
            None => (
                support.iter().map(|x| direction.dot(x)).collect(),
                weights.clone(),
            ),
            Some(data) => {
                let uniform = 1.0 / data.len() as f64;
                // Dataset points are support draws, hence collinear; verify.
                for x in data.iter() {
                    let residual = x - direction * direction.dot(x);
                    if residual.norm() > 1e-9 {
                        return Err(Error::InvalidParameter(
                            "median dataset must lie on the support line".into(),
                        ));
                    }
                }
                (data.iter().map(|x| direction.dot(x)).collect(), vec![
                    uniform;
                    data.len()
                ])
            }
        };
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|a, b| positions[*a].total_cmp(&positions[*b]));
        let mut acc = 0.0;
        for idx in &order {
            acc += masses[*idx];
            if acc >= 0.5 - 1e-12 {
                return Ok(direction * positions[*idx]);
            }
        }
        Ok(direction * positions[*order.last().expect("nonempty")])
    }

    /// Weighted mean distance `sum_i p_i |y - x_i|` for the median family.
    pub fn median_cost(&self, y: &Vector, dataset: Option<&Dataset>) -> Result<f64> {
        let Family::MedianSaddle {
            support, weights, ..
        } = &self.family
        else {
            return Err(Error::Unsupported(
                "median_cost applies to the median family only".into(),
            ));
        };
        Ok(match dataset {
            None => support
                .iter()
                .zip(weights.iter())
                .map(|(x, p)| p * (y - x).norm())
                .sum(),
            Some(data) => {
                data.iter().map(|x| (y - x).norm()).sum::<f64>() / data.len() as f64
            }
        })
    }

    fn check_point(&self, z: &JointPoint) -> Result<()> {
        if z.d_w() != self.domain.d_w() || z.d_theta() != self.domain.d_theta() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                actual: z.dim(),
            });
        }
        Ok(())
    }

    /// A problem whose *population* objective equals this problem's
    /// *empirical* objective `F_S` exactly, so every population oracle
    /// (value, saddle, best response) doubles as an empirical one.
    ///
    /// This is exact, not approximate: the bilinear and linear values depend
    /// on data only through the mean; the quadratic family's per-sample
    /// variance enters the two blocks with opposite signs and cancels; the
    /// median view reweights the support to the sample; packing is
    /// fixed-design to begin with.
    pub fn empirical_view(&self, dataset: &Dataset) -> Result<ProblemSpec> {
        if dataset.data_dim() != self.data_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.data_dim(),
                actual: dataset.data_dim(),
            });
        }
        let mut view = self.clone();
        view.name = format!("{}@sample", self.name);
        match (&mut view.family, &self.family) {
            (Family::Bilinear, _) => {
                for x in dataset.iter() {
                    if x[0].abs() != 1.0 {
                        return Err(Error::InvalidParameter(
                            "bilinear samples must be +/-1".into(),
                        ));
                    }
                }
            }
            (Family::LinearSaddle { mean, .. }, _) => *mean = dataset.mean(),
            (Family::QuadraticScSc { mean, .. }, _) => *mean = dataset.mean(),
            (
                Family::MedianSaddle {
                    support, weights, ..
                },
                Family::MedianSaddle {
                    direction: line, ..
                },
            ) => {
                let uniform = 1.0 / dataset.len() as f64;
                for x in dataset.iter() {
                    let residual = x - line * line.dot(x);
                    if residual.norm() > 1e-9 {
                        return Err(Error::InvalidParameter(
                            "median samples must lie on the support line".into(),
                        ));
                    }
                }
                *support = dataset.points().to_vec();
                *weights = vec![uniform; dataset.len()];
            }
            (Family::PackingErm { instance }, _) => {
                *instance = packing_instance_from(dataset, instance.scale)?;
            }
            _ => unreachable!("family of a clone matches"),
        }
        Ok(view)
    }

    /// Best response against the population objective plus a regularizer
    /// stack. For the isotropic families the regularized block problems stay
    /// isotropic quadratics, so the constrained optimum is the projected
    /// stationary point; the median family supports only an empty stack.
    pub fn regularized_best_response(
        &self,
        z: &JointPoint,
        side: Side,
        regs: &[Regularizer],
    ) -> Result<BestResponse> {
        if regs.is_empty() {
            return self.best_response(z, side);
        }
        self.check_point(z)?;
        let rho_reg: f64 = regs.iter().map(|r| 2.0 * r.coefficient).sum();
        let pulled = |pick: &dyn Fn(&Regularizer) -> &Vector, dim: usize| {
            let mut s = Vector::zeros(dim);
            for r in regs {
                s += pick(r) * (2.0 * r.coefficient);
            }
            s
        };
        // Block objectives have the isotropic form
        //   dual:   max  -(q/2)|th - m|^2 + <l, th> - sum_i c_i |th - b_i|^2
        //   primal: min   (q/2)|w  - m|^2 + <l, w>  + sum_i c_i |w  - a_i|^2
        // with family-specific (q, m, l); the solution is the projection of
        //   (q m -/+ l + sum_i 2 c_i centers) / (q + rho_reg).
        let (q, m, l) = match (&self.family, side) {
            (Family::Bilinear, Side::Dual) => (0.0, Vector::zeros(1), z.w.clone()),
            (Family::Bilinear, Side::Primal) => (0.0, Vector::zeros(1), z.theta.clone()),
            (Family::LinearSaddle { mean, .. }, Side::Dual) => {
                (0.0, Vector::zeros(mean.len()), -mean)
            }
            (Family::LinearSaddle { mean, .. }, Side::Primal) => {
                (0.0, Vector::zeros(mean.len()), mean.clone())
            }
            (Family::QuadraticScSc {
                mu, gamma, mean, ..
            },
            Side::Dual) => (*mu, mean.clone(), &z.w * *gamma),
            (Family::QuadraticScSc {
                mu, gamma, mean, ..
            },
            Side::Primal) => (*mu, mean.clone(), &z.theta * *gamma),
            (Family::PackingErm { instance }, Side::Primal) => {
                (0.0, Vector::zeros(instance.dim), instance.dataset().mean())
            }
            (Family::PackingErm { .. }, Side::Dual) => {
                let point = Vector::zeros(1);
                let value =
                    self.regularized_value(&JointPoint::new(z.w.clone(), point.clone()), regs)?;
                return Ok(BestResponse { point, value });
            }
            (Family::MedianSaddle { .. }, _) => {
                return Err(Error::Unsupported(
                    "median family has no closed-form regularized best response".into(),
                ))
            }
        };
        if q + rho_reg <= 0.0 {
            return Err(Error::InvalidParameter(
                "regularized block problem is not strongly curved".into(),
            ));
        }
        let point = match side {
            Side::Dual => {
                let target =
                    (&m * q + pulled(&|r| &r.center.theta, z.d_theta()) + l) / (q + rho_reg);
                self.domain.dual().project(&target)?
            }
            Side::Primal => {
                let target =
                    (&m * q + pulled(&|r| &r.center.w, z.d_w()) - l) / (q + rho_reg);
                self.domain.primal().project(&target)?
            }
        };
        let replaced = match side {
            Side::Dual => JointPoint::new(z.w.clone(), point.clone()),
            Side::Primal => JointPoint::new(point.clone(), z.theta.clone()),
        };
        let value = self.regularized_value(&replaced, regs)?;
        Ok(BestResponse { point, value })
    }

    /// `F_D(z)` plus the regularizer stack's contribution.
    pub fn regularized_value(&self, z: &JointPoint, regs: &[Regularizer]) -> Result<f64> {
        let mut v = self.population_value(z)?;
        for r in regs {
            v += r.coefficient
                * ((&z.w - &r.center.w).norm_squared()
                    - (&z.theta - &r.center.theta).norm_squared());
        }
        Ok(v)
    }

    // ------------------------------------------------------------------
    // closed-form regularized saddles
    // ------------------------------------------------------------------

    /// Exact saddle of the empirical objective `F_S` plus a regularizer
    /// stack, for the families whose structure admits one. Errors when the
    /// family has no closed form (median) or a coupled stationary point
    /// leaves the domain.
    pub fn empirical_regularized_saddle(
        &self,
        dataset: &Dataset,
        regs: &[Regularizer],
    ) -> Result<JointPoint> {
        self.anchored_regularized_saddle(&dataset.mean(), regs)
    }

    /// Exact saddle of the population objective `F_D` plus a regularizer
    /// stack (same structure with the population anchor).
    pub fn population_regularized_saddle(&self, regs: &[Regularizer]) -> Result<JointPoint> {
        let anchor = match &self.family {
            Family::Bilinear => Vector::zeros(1),
            Family::LinearSaddle { mean, .. } => mean.clone(),
            Family::QuadraticScSc { mean, .. } => mean.clone(),
            Family::MedianSaddle { .. } => {
                return Err(Error::Unsupported(
                    "median family has no closed-form regularized saddle".into(),
                ))
            }
            Family::PackingErm { instance } => instance.dataset().mean(),
        };
        self.anchored_regularized_saddle(&anchor, regs)
    }

    /// Shared closed form. With `rho_reg = sum_i 2 c_i`,
    /// `u0/v0` the stack pulls `sum_i 2 c_i a_i / b_i`, and `anchor` the
    /// (empirical or population) data mean, each family's stationarity
    /// system is `rho w + gamma theta = u`, `-gamma w + rho theta = v`:
    ///
    /// * linear: `rho = rho_reg`, `gamma = 0`, `u = u0 - anchor`,
    ///   `v = v0 - anchor` (the dual pays `-<theta, x>`, so its pull is
    ///   also away from the anchor); separable and isotropic, so projecting
    ///   the solution is exact even when it leaves the ball.
    /// * quadratic: `rho = mu + rho_reg`, coupling `gamma`,
    ///   `u = mu anchor + u0`, `v = mu anchor + v0`; requires the solution
    ///   interior (guaranteed by the constructor margins).
    /// * bilinear: `rho = rho_reg`, coupling `1`, `u = u0`, `v = v0`;
    ///   requires the solution inside the box.
    /// * packing: primal as linear, dual pinned to the singleton.
    fn anchored_regularized_saddle(
        &self,
        anchor: &DataPoint,
        regs: &[Regularizer],
    ) -> Result<JointPoint> {
        let d_w = self.domain.d_w();
        let d_theta = self.domain.d_theta();
        let rho_reg: f64 = regs.iter().map(|r| 2.0 * r.coefficient).sum();
        let mut u0 = Vector::zeros(d_w);
        let mut v0 = Vector::zeros(d_theta);
        for r in regs {
            u0 += &r.center.w * (2.0 * r.coefficient);
            v0 += &r.center.theta * (2.0 * r.coefficient);
        }

        match &self.family {
            Family::LinearSaddle { .. } => {
                if rho_reg <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "linear family needs a positive regularizer stack".into(),
                    ));
                }
                let w = (u0 - anchor) / rho_reg;
                let theta = (v0 - anchor) / rho_reg;
                Ok(JointPoint::new(
                    self.domain.primal().project(&w)?,
                    self.domain.dual().project(&theta)?,
                ))
            }
            Family::PackingErm { .. } => {
                if rho_reg <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "packing family needs a positive regularizer stack".into(),
                    ));
                }
                let w = (u0 - anchor) / rho_reg;
                Ok(JointPoint::new(
                    self.domain.primal().project(&w)?,
                    Vector::zeros(1),
                ))
            }
            Family::QuadraticScSc { mu, gamma, .. } => {
                let rho = mu + rho_reg;
                let u = anchor * *mu + u0;
                let v = anchor * *mu + v0;
                let z = coupled_isotropic_saddle(rho, *gamma, &u, &v);
                self.require_interior(z)
            }
            Family::Bilinear => {
                if rho_reg <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "bilinear family needs a positive regularizer stack".into(),
                    ));
                }
                let z = coupled_isotropic_saddle(rho_reg, 1.0, &u0, &v0);
                self.require_interior(z)
            }
            Family::MedianSaddle { .. } => Err(Error::Unsupported(
                "median family has no closed-form regularized saddle".into(),
            )),
        }
    }

    fn require_interior(&self, z: JointPoint) -> Result<JointPoint> {
        let tol = 1e-9 * (1.0 + self.domain.diameter());
        if !self.domain.contains(&z, tol) {
            return Err(Error::Unsupported(
                "stationary point leaves the domain; no closed form applies".into(),
            ));
        }
        self.domain.project(&z)
    }
}

/// Solves `rho w + gamma theta = u`, `-gamma w + rho theta = v`
/// (the stationarity system of an isotropic strongly convex-concave
/// objective with bilinear coupling `gamma <w, theta>`).
pub(crate) fn coupled_isotropic_saddle(rho: f64, gamma: f64, u: &Vector, v: &Vector) -> JointPoint {
    let det = rho * rho + gamma * gamma;
    JointPoint::new((u * rho - v * gamma) / det, (u * gamma + v * rho) / det)
}

/// Reconstructs a packing design from its dataset: axis spikes of magnitude
/// `scale` on leading coordinates, padded with zeros.
fn packing_instance_from(dataset: &Dataset, scale: f64) -> Result<PackingInstance> {
    let dim = dataset.data_dim();
    let mut signs = Vec::new();
    let mut in_padding = false;
    for (j, x) in dataset.iter().enumerate() {
        if x.norm() == 0.0 {
            in_padding = true;
            continue;
        }
        if in_padding || j >= dim {
            return Err(Error::InvalidParameter(
                "dataset does not have the packing spike-then-zeros shape".into(),
            ));
        }
        let s = x[j] / scale;
        let mut spike = Vector::zeros(dim);
        spike[j] = x[j];
        if (s.abs() - 1.0).abs() > 1e-12 || (x - spike).norm() > 1e-12 {
            return Err(Error::InvalidParameter(
                "dataset entries must be +/- scale on successive axes".into(),
            ));
        }
        signs.push(if s > 0.0 { 1 } else { -1 });
    }
    PackingInstance::new(dataset.len(), dim, signs, scale)
}

/// The two-sided mode rule on the bilinear family: the primal output is the
/// majority sign of the first half of the dataset, the dual output the
/// majority sign of the second half; ties break toward `+1`. Requires an
/// even number of Rademacher samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModeAlgorithm;

impl crate::algorithm::SaddleAlgorithm for ModeAlgorithm {
    fn name(&self) -> &str {
        "mode"
    }

    fn solve(
        &self,
        problem: &ProblemSpec,
        dataset: &Dataset,
        _seed: u64,
    ) -> Result<crate::algorithm::AlgorithmOutput> {
        if !matches!(problem.family(), Family::Bilinear) {
            return Err(Error::Unsupported(
                "the mode rule is defined on the bilinear family".into(),
            ));
        }
        let n = dataset.len();
        if n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "the mode rule needs an even sample count, got {n}"
            )));
        }
        let mode_of = |points: &[DataPoint]| -> Result<f64> {
            let mut plus = 0usize;
            for p in points {
                match p[0] {
                    1.0 => plus += 1,
                    -1.0 => {}
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "bilinear samples must be +/-1, got {other}"
                        )))
                    }
                }
            }
            Ok(if 2 * plus >= points.len() { 1.0 } else { -1.0 })
        };
        let half = n / 2;
        let w = mode_of(&dataset.points()[..half])?;
        let theta = mode_of(&dataset.points()[half..])?;
        Ok(crate::algorithm::AlgorithmOutput::new(
            JointPoint::new(
                Vector::from_row_slice(&[w]),
                Vector::from_row_slice(&[theta]),
            ),
            n as u64,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::SaddleAlgorithm;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn bilinear_constants() {
        let p = ProblemSpec::bilinear();
        assert!((p.lipschitz() - SQRT2).abs() < 1e-15);
        assert!((p.diameter() - 2.0 * SQRT2).abs() < 1e-15);
        assert_eq!(p.population_saddle().unwrap(), JointPoint::zeros(1, 1));
    }

    #[test]
    fn bilinear_best_responses() {
        let p = ProblemSpec::bilinear();
        let z = JointPoint::new(v(&[1.0]), v(&[1.0]));
        let dual = p.best_response(&z, Side::Dual).unwrap();
        assert_eq!(dual.point, v(&[1.0]));
        assert!((dual.value - 1.0).abs() < 1e-15);
        let primal = p.best_response(&z, Side::Primal).unwrap();
        assert_eq!(primal.point, v(&[-1.0]));
        assert!((primal.value - (-1.0)).abs() < 1e-15);

        // w = 0: the dual response value is 0 regardless of the tie-break.
        let z0 = JointPoint::new(v(&[0.0]), v(&[0.3]));
        assert!(p.best_response(&z0, Side::Dual).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn linear_saddle_lipschitz_is_exact_over_support() {
        let p = ProblemSpec::linear_saddle(3, 2.0, 4.0).unwrap();
        let mut rng = seeding::rng(5);
        let mut max_norm: f64 = 0.0;
        for _ in 0..2000 {
            let x = p.sample_point(&mut rng).unwrap();
            let z = p.domain().sample(&mut rng);
            let g = p.loss().operator(&z, &x).unwrap();
            max_norm = max_norm.max(g.norm());
        }
        assert!(max_norm <= 2.0 + 1e-12);
        assert!(max_norm > 1.5, "support should nearly reach the constant");
    }

    #[test]
    fn quadratic_population_saddle_is_stationary_and_interior() {
        let p = ProblemSpec::quadratic_scsc(4, 1.0, 0.5, 1.0).unwrap();
        let z = p.population_saddle().unwrap();
        assert!(p.domain().contains(&z, 1e-12));
        let g = p.population_operator(&z).unwrap();
        assert!(g.norm() < 1e-12, "operator at saddle: {}", g.norm());
    }

    #[test]
    fn quadratic_point_mass_saddle_is_the_projected_mass() {
        // gamma = 0 and a point mass at m: the saddle is (m, m).
        let mut p = ProblemSpec::quadratic_scsc(2, 1.0, 0.0, 1.0).unwrap();
        if let Family::QuadraticScSc { noise_radius, .. } = &mut p.family {
            *noise_radius = 0.0;
        }
        let z = p.population_saddle().unwrap();
        if let Family::QuadraticScSc { mean, .. } = p.family() {
            assert!((&z.w - mean).norm() < 1e-12);
            assert!((&z.theta - mean).norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_best_response_beats_grid() {
        // Independent oracle: dense grid search over the dual ball.
        let p = ProblemSpec::quadraticscsc_2d_for_tests();
        let z = JointPoint::new(v(&[0.3, -0.2]), v(&[0.1, 0.4]));
        let br = p.best_response(&z, Side::Dual).unwrap();
        let radius = p.primal_radius();
        let mut best = f64::NEG_INFINITY;
        let steps = 201;
        for i in 0..steps {
            for j in 0..steps {
                let a = -radius + 2.0 * radius * i as f64 / (steps - 1) as f64;
                let b = -radius + 2.0 * radius * j as f64 / (steps - 1) as f64;
                let th = v(&[a, b]);
                if th.norm() <= radius {
                    let val = p
                        .population_value(&JointPoint::new(z.w.clone(), th))
                        .unwrap();
                    best = best.max(val);
                }
            }
        }
        assert!(br.value >= best - 1e-6, "grid {best} vs closed {}", br.value);
        assert!((br.value - best).abs() < 1e-3);
    }

    #[test]
    fn median_population_saddle_has_zero_gap() {
        let p = ProblemSpec::median_saddle(3, 5, 1.0).unwrap();
        let z = p.population_saddle().unwrap();
        let dual = p.best_response(&z, Side::Dual).unwrap();
        let primal = p.best_response(&z, Side::Primal).unwrap();
        assert!((dual.value - primal.value).abs() < 1e-12);
    }

    #[test]
    fn median_point_matches_brute_force_on_line() {
        let p = ProblemSpec::median_saddle(2, 7, 1.0).unwrap();
        let m = p.median_point(None).unwrap();
        let cost_m = p.median_cost(&m, None).unwrap();
        // scan the support line densely
        let Family::MedianSaddle { direction, .. } = p.family() else {
            unreachable!()
        };
        for i in 0..4001 {
            let t = -1.0 + 2.0 * i as f64 / 4000.0;
            let y = direction * t;
            assert!(p.median_cost(&y, None).unwrap() >= cost_m - 1e-9);
        }
    }

    #[test]
    fn packing_dataset_and_optimum_match_direct_formulas() {
        let inst = PackingInstance::new(8, 6, vec![1, 1, 1, 1], 2.0).unwrap();
        let p = ProblemSpec::packing(inst.clone(), 1.5).unwrap();
        let data = p.sample_dataset(8, 0).unwrap();
        assert_eq!(data.len(), 8);
        // mean = (scale / n) sum_j s_j e_j
        let mean = data.mean();
        assert!((mean[0] - 0.25).abs() < 1e-15);
        assert!(mean[4].abs() < 1e-15);
        // optimal value -B L sqrt(K) / n = -1.5 * 2 * 2 / 8
        assert!((inst.optimal_value(1.5) - (-0.75)).abs() < 1e-15);
        let w = inst.optimal_w(1.5);
        let val = p
            .population_value(&JointPoint::new(w.clone(), Vector::zeros(1)))
            .unwrap();
        assert!((val - inst.optimal_value(1.5)).abs() < 1e-12);
        // flipping changes exactly one entry
        let flipped = inst.flipped(2).unwrap();
        let d2 = ProblemSpec::packing(flipped, 1.5)
            .unwrap()
            .sample_dataset(8, 0)
            .unwrap();
        assert_eq!(data.differing_indices(&d2), vec![2]);
    }

    #[test]
    fn packing_optimum_beats_random_feasible_points() {
        let inst = PackingInstance::new(10, 5, vec![1, -1, 1], 1.0).unwrap();
        let p = ProblemSpec::packing(inst.clone(), 1.0).unwrap();
        let best = inst.optimal_value(1.0);
        let mut rng = seeding::rng(9);
        for _ in 0..2000 {
            let z = p.domain().sample(&mut rng);
            assert!(p.population_value(&z).unwrap() >= best - 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let p = ProblemSpec::linear_saddle(2, 1.0, 2.0).unwrap();
        let a = p.sample_dataset(16, 7).unwrap();
        let b = p.sample_dataset(16, 7).unwrap();
        let c = p.sample_dataset(16, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn population_value_matches_monte_carlo() {
        // Construction-time validation: F_D equals the sampler's expectation
        // within three standard errors, for every stochastic family.
        let problems = vec![
            ProblemSpec::bilinear(),
            ProblemSpec::linear_saddle(3, 1.5, 3.0).unwrap(),
            ProblemSpec::quadratic_scsc(3, 1.0, 0.4, 1.0).unwrap(),
            ProblemSpec::median_saddle(3, 5, 1.0).unwrap(),
        ];
        for p in problems {
            let mut rng = seeding::rng(13);
            let z = p.domain().sample(&mut rng);
            let exact = p.population_value(&z).unwrap();
            let draws = 40_000;
            let vals: Vec<f64> = (0..draws)
                .map(|_| {
                    let x = p.sample_point(&mut rng).unwrap();
                    p.loss().value(&z, &x).unwrap()
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / draws as f64;
            let var =
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
            let se = (var / draws as f64).sqrt();
            assert!(
                (mean - exact).abs() <= 3.0 * se + 1e-9,
                "{}: MC {mean} vs exact {exact} (se {se})",
                p.name()
            );
        }
    }

    #[test]
    fn population_operator_matches_finite_differences() {
        // Independent oracle: central differences of F_D reproduce
        // [grad_w F, -grad_theta F] at interior points.
        let problems = vec![
            ProblemSpec::bilinear(),
            ProblemSpec::linear_saddle(2, 1.0, 2.0).unwrap(),
            ProblemSpec::quadratic_scsc(2, 1.0, 0.5, 1.0).unwrap(),
            ProblemSpec::median_saddle(2, 5, 1.0).unwrap(),
        ];
        let h = 1e-6;
        for p in problems {
            let mut rng = seeding::rng(29);
            // interior point away from median kinks with high probability
            let z = {
                let z = p.domain().sample(&mut rng);
                JointPoint::new(z.w * 0.5, z.theta * 0.5)
            };
            let g = p.population_operator(&z).unwrap();
            for i in 0..z.d_w() {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp.w[i] += h;
                zm.w[i] -= h;
                let fd = (p.population_value(&zp).unwrap() - p.population_value(&zm).unwrap())
                    / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-5, "{} w[{i}]", p.name());
            }
            for i in 0..z.d_theta() {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp.theta[i] += h;
                zm.theta[i] -= h;
                let fd = (p.population_value(&zp).unwrap() - p.population_value(&zm).unwrap())
                    / (2.0 * h);
                assert!(
                    (-fd - g[z.d_w() + i]).abs() < 1e-5,
                    "{} theta[{i}]",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn empirical_regularized_saddle_matches_spec_shortcut() {
        // Linear loss with one regularizer of coefficient lambda/2 centered
        // at c: the interior solution is w* = c_w - mean/lambda.
        let p = ProblemSpec::linear_saddle(2, 1.0, 40.0).unwrap();
        let data = p.sample_dataset(32, 3).unwrap();
        let lambda = 2.0;
        let center = JointPoint::new(v(&[0.1, 0.2]), v(&[-0.1, 0.3]));
        let regs = vec![Regularizer {
            coefficient: lambda / 2.0,
            center: center.clone(),
        }];
        let z = p.empirical_regularized_saddle(&data, &regs).unwrap();
        let expect_w = &center.w - &(data.mean() / lambda);
        // the dual also pays -<theta, x>, so it too retreats from the mean
        let expect_t = &center.theta - &(data.mean() / lambda);
        assert!((&z.w - expect_w).norm() < 1e-12);
        assert!((&z.theta - expect_t).norm() < 1e-12);

        // fixed point: each block's regularized best response at the saddle
        // (against the empirical view) returns the saddle block itself
        let view = p.empirical_view(&data).unwrap();
        let br_dual = view.regularized_best_response(&z, Side::Dual, &regs).unwrap();
        let br_primal = view.regularized_best_response(&z, Side::Primal, &regs).unwrap();
        assert!((&z.theta - &br_dual.point).norm() < 1e-10);
        assert!((&z.w - &br_primal.point).norm() < 1e-10);
    }

    #[test]
    fn quadratic_regularized_saddle_zeroes_the_stacked_operator() {
        let p = ProblemSpec::quadratic_scsc(3, 1.0, 0.5, 1.0).unwrap();
        let data = p.sample_dataset(64, 11).unwrap();
        let c1 = JointPoint::new(v(&[0.1, 0.0, -0.1]), v(&[0.0, 0.1, 0.0]));
        let c2 = JointPoint::new(v(&[-0.05, 0.2, 0.0]), v(&[0.1, 0.0, -0.2]));
        let regs = vec![
            Regularizer {
                coefficient: 0.3,
                center: c1.clone(),
            },
            Regularizer {
                coefficient: 0.7,
                center: c2.clone(),
            },
        ];
        let z = p.empirical_regularized_saddle(&data, &regs).unwrap();
        // Evaluate the full regularized empirical operator at z.
        let mut loss = p.loss().clone();
        for r in &regs {
            loss = loss.regularize(r.coefficient, &r.center).unwrap();
        }
        let mut g = Vector::zeros(6);
        for x in data.iter() {
            g += loss.operator(&z, x).unwrap();
        }
        g /= data.len() as f64;
        assert!(g.norm() < 1e-10, "stacked operator norm {}", g.norm());
    }

    #[test]
    fn empirical_view_value_equals_sample_average() {
        let problems = vec![
            ProblemSpec::bilinear(),
            ProblemSpec::linear_saddle(3, 1.0, 2.0).unwrap(),
            ProblemSpec::quadratic_scsc(3, 1.0, 0.5, 1.0).unwrap(),
            ProblemSpec::median_saddle(3, 5, 1.0).unwrap(),
        ];
        for p in problems {
            let data = p.sample_dataset(24, 41).unwrap();
            let view = p.empirical_view(&data).unwrap();
            let mut rng = seeding::rng(2);
            for _ in 0..20 {
                let z = p.domain().sample(&mut rng);
                let direct: f64 = data
                    .iter()
                    .map(|x| p.loss().value(&z, x).unwrap())
                    .sum::<f64>()
                    / data.len() as f64;
                let via_view = view.population_value(&z).unwrap();
                assert!(
                    (direct - via_view).abs() < 1e-10,
                    "{}: {direct} vs {via_view}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn empirical_view_of_packing_roundtrips_the_design() {
        let inst = PackingInstance::new(6, 4, vec![1, -1, 1], 0.5).unwrap();
        let p = ProblemSpec::packing(inst.clone(), 1.0).unwrap();
        let data = p.sample_dataset(6, 0).unwrap();
        let view = p.empirical_view(&data).unwrap();
        let Family::PackingErm { instance } = view.family() else {
            unreachable!()
        };
        assert_eq!(instance.signs, inst.signs);
        let flipped = inst.flipped(1).unwrap();
        let data2 = flipped.dataset();
        let view2 = p.empirical_view(&data2).unwrap();
        let Family::PackingErm { instance } = view2.family() else {
            unreachable!()
        };
        assert_eq!(instance.signs, vec![1, 1, 1]);
    }

    #[test]
    fn regularized_best_response_beats_grid() {
        let p = ProblemSpec::quadraticscsc_2d_for_tests();
        let regs = vec![
            Regularizer {
                coefficient: 0.4,
                center: JointPoint::new(v(&[0.2, -0.1]), v(&[0.0, 0.1])),
            },
            Regularizer {
                coefficient: 0.1,
                center: JointPoint::zeros(2, 2),
            },
        ];
        let z = JointPoint::new(v(&[0.25, -0.3]), v(&[-0.2, 0.15]));
        for side in [Side::Dual, Side::Primal] {
            let br = p.regularized_best_response(&z, side, &regs).unwrap();
            let radius = p.primal_radius();
            let steps = 161;
            let mut best = match side {
                Side::Dual => f64::NEG_INFINITY,
                Side::Primal => f64::INFINITY,
            };
            for i in 0..steps {
                for j in 0..steps {
                    let a = -radius + 2.0 * radius * i as f64 / (steps - 1) as f64;
                    let b = -radius + 2.0 * radius * j as f64 / (steps - 1) as f64;
                    let cand = v(&[a, b]);
                    if cand.norm() > radius {
                        continue;
                    }
                    let replaced = match side {
                        Side::Dual => JointPoint::new(z.w.clone(), cand),
                        Side::Primal => JointPoint::new(cand, z.theta.clone()),
                    };
                    let val = p.regularized_value(&replaced, &regs).unwrap();
                    best = match side {
                        Side::Dual => best.max(val),
                        Side::Primal => best.min(val),
                    };
                }
            }
            let gap = match side {
                Side::Dual => br.value - best,
                Side::Primal => best - br.value,
            };
            assert!(gap >= -1e-9, "closed form must dominate the grid");
            assert!(gap.abs() < 2e-3, "grid should approach the closed form");
        }
    }

    #[test]
    fn regularized_best_response_with_empty_stack_is_plain() {
        let p = ProblemSpec::linear_saddle(2, 1.0, 2.0).unwrap();
        let mut rng = seeding::rng(3);
        let z = p.domain().sample(&mut rng);
        let a = p.best_response(&z, Side::Dual).unwrap();
        let b = p.regularized_best_response(&z, Side::Dual, &[]).unwrap();
        assert_eq!(a.point, b.point);
    }

    #[test]
    fn mode_rule_matches_hand_counts() {
        let p = ProblemSpec::bilinear();
        let pts = |xs: &[f64]| {
            Dataset::new(xs.iter().map(|x| v(&[*x])).collect()).unwrap()
        };
        // first half {+1,+1,-1} -> +1; second half {-1,-1,+1} -> -1
        let data = pts(&[1.0, 1.0, -1.0, -1.0, -1.0, 1.0]);
        let out = ModeAlgorithm.solve(&p, &data, 0).unwrap();
        assert_eq!(out.point.w, v(&[1.0]));
        assert_eq!(out.point.theta, v(&[-1.0]));
        // ties break toward +1
        let data = pts(&[1.0, -1.0, -1.0, 1.0]);
        let out = ModeAlgorithm.solve(&p, &data, 0).unwrap();
        assert_eq!(out.point.w, v(&[1.0]));
        assert_eq!(out.point.theta, v(&[1.0]));
        // odd n rejected
        let data = pts(&[1.0, -1.0, 1.0]);
        assert!(ModeAlgorithm.solve(&p, &data, 0).is_err());
    }

    impl ProblemSpec {
        /// 2-d quadratic instance shared by grid-search tests.
        pub(crate) fn quadraticscsc_2d_for_tests() -> ProblemSpec {
            ProblemSpec::quadratic_scsc(2, 1.0, 0.5, 1.0).unwrap()
        }
    }
}
