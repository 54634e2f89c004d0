//! Joint primal-dual points and the compact convex sets they live in.
//!
//! Everything downstream works in the product space `W x Theta`. A
//! [`JointPoint`] keeps the two blocks separate so per-side projections and
//! best responses stay cheap; [`JointPoint::stacked`] converts to the flat
//! `[w, theta]` layout used by saddle operators.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Concatenates two blocks into the flat `[a, b]` layout.
pub fn stack(a: &Vector, b: &Vector) -> Vector {
    let mut v = Vector::zeros(a.len() + b.len());
    v.rows_mut(0, a.len()).copy_from(a);
    v.rows_mut(a.len(), b.len()).copy_from(b);
    v
}

/// A point `(w, theta)` in the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPoint {
    pub w: Vector,
    pub theta: Vector,
}

impl JointPoint {
    pub fn new(w: Vector, theta: Vector) -> Self {
        Self { w, theta }
    }

    pub fn zeros(d_w: usize, d_theta: usize) -> Self {
        Self::new(Vector::zeros(d_w), Vector::zeros(d_theta))
    }

    pub fn d_w(&self) -> usize {
        self.w.len()
    }

    pub fn d_theta(&self) -> usize {
        self.theta.len()
    }

    /// Total dimension `d_w + d_theta`.
    pub fn dim(&self) -> usize {
        self.w.len() + self.theta.len()
    }

    /// Flat `[w, theta]` vector in the order used by saddle operators.
    pub fn stacked(&self) -> Vector {
        stack(&self.w, &self.theta)
    }

    /// Splits a flat vector back into blocks. Fails if `v` is shorter than
    /// `d_w`.
    pub fn from_stacked(d_w: usize, v: &Vector) -> Result<Self> {
        if v.len() < d_w {
            return Err(Error::DimensionMismatch {
                expected: d_w,
                actual: v.len(),
            });
        }
        Ok(Self::new(
            v.rows(0, d_w).into_owned(),
            v.rows(d_w, v.len() - d_w).into_owned(),
        ))
    }

    /// Euclidean distance in the product space.
    pub fn distance(&self, other: &Self) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(&self, other: &Self) -> f64 {
        (&self.w - &other.w).norm_squared() + (&self.theta - &other.theta).norm_squared()
    }

    /// `self - eta * g` for a stacked direction `g` of dimension `dim()`.
    pub fn stepped(&self, g: &Vector, eta: f64) -> Result<Self> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: g.len(),
            });
        }
        let gw = g.rows(0, self.w.len());
        let gt = g.rows(self.w.len(), self.theta.len());
        Ok(Self::new(&self.w - eta * gw, &self.theta - eta * gt))
    }

    /// Coordinate-wise mean of a nonempty slice of points.
    pub fn mean_of(points: &[JointPoint]) -> Option<JointPoint> {
        let first = points.first()?;
        let mut acc = JointPoint::zeros(first.d_w(), first.d_theta());
        for p in points {
            acc.w += &p.w;
            acc.theta += &p.theta;
        }
        let k = points.len() as f64;
        acc.w /= k;
        acc.theta /= k;
        Some(acc)
    }
}

/// A compact convex constraint set with exact projection.
#[derive(Debug, Clone)]
pub enum ConstraintSet {
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
}

impl ConstraintSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(Vector::zeros(dim), radius)
    }

    pub fn box_bounds(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u)
            || lower.iter().any(|l| !l.is_finite())
            || upper.iter().any(|u| !u.is_finite())
        {
            return Err(Error::InvalidParameter(
                "box bounds must be finite with lower <= upper".into(),
            ));
        }
        Ok(Self::Box { lower, upper })
    }

    /// `[-h, h]^dim`.
    pub fn symmetric_box(dim: usize, half_width: f64) -> Result<Self> {
        if !half_width.is_finite() || half_width < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "box half-width must be finite and nonnegative, got {half_width}"
            )));
        }
        Self::box_bounds(
            Vector::from_element(dim, -half_width),
            Vector::from_element(dim, half_width),
        )
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lower, .. } => lower.len(),
        }
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Exact Euclidean projection. Idempotent and nonexpansive.
    pub fn project(&self, v: &Vector) -> Result<Vector> {
        self.check_dim(v)?;
        Ok(match self {
            Self::Ball { center, radius } => {
                let offset = v - center;
                let norm = offset.norm();
                if norm <= *radius {
                    v.clone()
                } else {
                    center + offset * (*radius / norm)
                }
            }
            Self::Box { lower, upper } => Vector::from_iterator(
                v.len(),
                v.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(x, (l, u))| x.max(*l).min(*u)),
            ),
        })
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        match self.project(v) {
            Ok(p) => (v - p).norm() <= tol,
            Err(_) => false,
        }
    }

    /// Exact set diameter: `2r` for balls, `|upper - lower|` for boxes.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => 2.0 * radius,
            Self::Box { lower, upper } => (upper - lower).norm(),
        }
    }

    /// Chebyshev center (ball center, box midpoint).
    pub fn center(&self) -> Vector {
        match self {
            Self::Ball { center, .. } => center.clone(),
            Self::Box { lower, upper } => (lower + upper) * 0.5,
        }
    }

    /// `sup { |v - p| : v in set }`, exact for both set kinds.
    pub fn max_distance_from(&self, p: &Vector) -> Result<f64> {
        self.check_dim(p)?;
        Ok(match self {
            Self::Ball { center, radius } => (p - center).norm() + radius,
            Self::Box { lower, upper } => p
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(x, (l, u))| (x - l).abs().max((x - u).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        })
    }

    /// `argmax { <v, direction> : v in set }`. For boxes, zero coordinates of
    /// the direction break toward the upper bound; a zero direction over a
    /// ball returns the center (every point attains the same value).
    pub fn support_point(&self, direction: &Vector) -> Result<Vector> {
        self.check_dim(direction)?;
        Ok(match self {
            Self::Ball { center, radius } => {
                let norm = direction.norm();
                if norm == 0.0 {
                    center.clone()
                } else {
                    center + direction * (*radius / norm)
                }
            }
            Self::Box { lower, upper } => Vector::from_iterator(
                direction.len(),
                direction
                    .iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(d, (l, u))| if *d >= 0.0 { *u } else { *l }),
            ),
        })
    }

    /// Draws a point uniformly from the set.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vector {
        match self {
            Self::Ball { center, radius } => {
                center + uniform_in_ball(center.len(), *radius, rng)
            }
            Self::Box { lower, upper } => Vector::from_iterator(
                lower.len(),
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| rng.random_range(*l..=*u)),
            ),
        }
    }
}

/// Uniform draw from the centered ball of the given radius.
pub fn uniform_in_ball(dim: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vector {
    if radius == 0.0 || dim == 0 {
        return Vector::zeros(dim);
    }
    let gauss: Vector = Vector::from_iterator(
        dim,
        (0..dim).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
    );
    let norm = gauss.norm();
    if norm == 0.0 {
        return Vector::zeros(dim);
    }
    let u: f64 = rng.random_range(0.0..1.0f64);
    gauss * (radius * u.powf(1.0 / dim as f64) / norm)
}

/// The product constraint set `W x Theta` with its exact diameter.
#[derive(Debug, Clone)]
pub struct Domain {
    primal: ConstraintSet,
    dual: ConstraintSet,
    diameter: f64,
}

impl Domain {
    /// The diameter is computed exactly from the factors:
    /// `sqrt(diam(W)^2 + diam(Theta)^2)`.
    pub fn new(primal: ConstraintSet, dual: ConstraintSet) -> Self {
        let diameter = (primal.diameter().powi(2) + dual.diameter().powi(2)).sqrt();
        Self {
            primal,
            dual,
            diameter,
        }
    }

    pub fn primal(&self) -> &ConstraintSet {
        &self.primal
    }

    pub fn dual(&self) -> &ConstraintSet {
        &self.dual
    }

    pub fn d_w(&self) -> usize {
        self.primal.dim()
    }

    pub fn d_theta(&self) -> usize {
        self.dual.dim()
    }

    pub fn dim(&self) -> usize {
        self.d_w() + self.d_theta()
    }

    /// Exact diameter of the product set; the `B` of every rate and
    /// regularization formula downstream.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Blockwise projection; exact because the product is separable.
    pub fn project(&self, z: &JointPoint) -> Result<JointPoint> {
        Ok(JointPoint::new(
            self.primal.project(&z.w)?,
            self.dual.project(&z.theta)?,
        ))
    }

    pub fn contains(&self, z: &JointPoint, tol: f64) -> bool {
        self.primal.contains(&z.w, tol) && self.dual.contains(&z.theta, tol)
    }

    /// Chebyshev center of the product; the canonical start point `z0`.
    pub fn center(&self) -> JointPoint {
        JointPoint::new(self.primal.center(), self.dual.center())
    }

    /// `sup { |z' - z| : z' in domain }`, exact.
    pub fn max_distance_from(&self, z: &JointPoint) -> Result<f64> {
        let a = self.primal.max_distance_from(&z.w)?;
        let b = self.dual.max_distance_from(&z.theta)?;
        Ok((a * a + b * b).sqrt())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> JointPoint {
        JointPoint::new(self.primal.sample(rng), self.dual.sample(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn projection_ball_interior_is_identity() {
        let set = ConstraintSet::centered_ball(2, 1.0).unwrap();
        let p = set.project(&v(&[0.3, -0.4])).unwrap();
        assert_eq!(p, v(&[0.3, -0.4]));
    }

    #[test]
    fn projection_ball_exterior_is_radial() {
        let set = ConstraintSet::centered_ball(2, 1.0).unwrap();
        let p = set.project(&v(&[3.0, 4.0])).unwrap();
        assert!((p - v(&[0.6, 0.8])).norm() < 1e-12);
    }

    #[test]
    fn projection_box_clamps_per_coordinate() {
        let set = ConstraintSet::symmetric_box(2, 1.0).unwrap();
        let p = set.project(&v(&[2.0, -0.5])).unwrap();
        assert_eq!(p, v(&[1.0, -0.5]));
    }

    #[test]
    fn projection_dimension_mismatch_is_error() {
        let set = ConstraintSet::centered_ball(2, 1.0).unwrap();
        assert!(set.project(&v(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn degenerate_ball_projects_to_center() {
        // Radius zero is legal; it models singleton factors.
        let set = ConstraintSet::ball(v(&[0.5]), 0.0).unwrap();
        assert_eq!(set.project(&v(&[9.0])).unwrap(), v(&[0.5]));
        assert_eq!(set.diameter(), 0.0);
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(ConstraintSet::centered_ball(2, -1.0).is_err());
    }

    #[test]
    fn inverted_box_rejected() {
        assert!(ConstraintSet::box_bounds(v(&[1.0]), v(&[0.0])).is_err());
    }

    #[test]
    fn product_diameter_is_exact() {
        // [-1,1]^2 as two 1-d factors: each factor diameter 2, product 2*sqrt(2).
        let dom = Domain::new(
            ConstraintSet::symmetric_box(1, 1.0).unwrap(),
            ConstraintSet::symmetric_box(1, 1.0).unwrap(),
        );
        assert!((dom.diameter() - 8.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn support_point_box_breaks_zero_toward_upper() {
        let set = ConstraintSet::symmetric_box(2, 1.0).unwrap();
        let s = set.support_point(&v(&[0.0, -2.0])).unwrap();
        assert_eq!(s, v(&[1.0, -1.0]));
    }

    #[test]
    fn stacked_round_trip() {
        let z = JointPoint::new(v(&[1.0, 2.0]), v(&[3.0]));
        let s = z.stacked();
        assert_eq!(s, v(&[1.0, 2.0, 3.0]));
        assert_eq!(JointPoint::from_stacked(2, &s).unwrap(), z);
    }

    #[test]
    fn stepped_moves_both_blocks() {
        let z = JointPoint::new(v(&[1.0]), v(&[1.0]));
        let g = v(&[2.0, -2.0]);
        let z2 = z.stepped(&g, 0.5).unwrap();
        assert_eq!(z2.w, v(&[0.0]));
        assert_eq!(z2.theta, v(&[2.0]));
    }

    #[test]
    fn domain_max_distance_bounds_samples() {
        let dom = Domain::new(
            ConstraintSet::centered_ball(3, 2.0).unwrap(),
            ConstraintSet::symmetric_box(2, 1.5).unwrap(),
        );
        let mut rng = seeding::rng(7);
        let z = dom.sample(&mut rng);
        let bound = dom.max_distance_from(&z).unwrap();
        for _ in 0..200 {
            let other = dom.sample(&mut rng);
            assert!(z.distance(&other) <= bound + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn prop_ball_projection_idempotent_and_nonexpansive(
            x0 in -10.0..10.0f64, x1 in -10.0..10.0f64,
            y0 in -10.0..10.0f64, y1 in -10.0..10.0f64,
            radius in 0.01..5.0f64,
        ) {
            let set = ConstraintSet::centered_ball(2, radius).unwrap();
            let a = v(&[x0, x1]);
            let b = v(&[y0, y1]);
            let pa = set.project(&a).unwrap();
            let pb = set.project(&b).unwrap();
            prop_assert!((set.project(&pa).unwrap() - &pa).norm() <= 1e-12);
            prop_assert!((pa - pb).norm() <= (a - b).norm() + 1e-12);
        }

        #[test]
        fn prop_box_projection_idempotent_and_nonexpansive(
            x0 in -10.0..10.0f64, x1 in -10.0..10.0f64,
            y0 in -10.0..10.0f64, y1 in -10.0..10.0f64,
            half in 0.01..5.0f64,
        ) {
            let set = ConstraintSet::symmetric_box(2, half).unwrap();
            let a = v(&[x0, x1]);
            let b = v(&[y0, y1]);
            let pa = set.project(&a).unwrap();
            let pb = set.project(&b).unwrap();
            prop_assert!((set.project(&pa).unwrap() - &pa).norm() <= 1e-12);
            prop_assert!((pa - pb).norm() <= (a - b).norm() + 1e-12);
        }

        #[test]
        fn prop_projection_lands_in_set(
            x0 in -10.0..10.0f64, x1 in -10.0..10.0f64,
            radius in 0.01..5.0f64,
        ) {
            let set = ConstraintSet::centered_ball(2, radius).unwrap();
            let p = set.project(&v(&[x0, x1])).unwrap();
            prop_assert!(set.contains(&p, 1e-9));
        }

        #[test]
        fn prop_support_point_maximizes(
            d0 in -3.0..3.0f64, d1 in -3.0..3.0f64,
            radius in 0.1..4.0f64, seed in 0u64..50,
        ) {
            let set = ConstraintSet::centered_ball(2, radius).unwrap();
            let dir = v(&[d0, d1]);
            let s = set.support_point(&dir).unwrap();
            let mut rng = seeding::rng(seed);
            for _ in 0..50 {
                let p = set.sample(&mut rng);
                prop_assert!(dir.dot(&p) <= dir.dot(&s) + 1e-9);
            }
        }
    }
}
