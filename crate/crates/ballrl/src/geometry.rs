//! Feature-space vectors and regular convex action sets.
//!
//! An action set here is a symmetric convex body sandwiched between an
//! inscribed ball of radius `ρ` and a circumscribed ball of radius `η`;
//! its regularity parameter is `B = η/ρ`. Support values and maximizers
//! are closed-form for every shape, never iterative.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in d-dimensional feature space.
///
/// Used for state features `φ(s)`, actions `a`, and parameter vectors alike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn zeros(d: usize) -> Self {
        FeatureVector(vec![0.0; d])
    }

    /// `scale * e_index` with `index` zero-based.
    pub fn basis(d: usize, index: usize, scale: f64) -> Self {
        let mut v = vec![0.0; d];
        v[index] = scale;
        FeatureVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &FeatureVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn scaled(&self, c: f64) -> FeatureVector {
        FeatureVector(self.0.iter().map(|x| c * x).collect())
    }

    pub fn add(&self, other: &FeatureVector) -> FeatureVector {
        FeatureVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &FeatureVector) -> FeatureVector {
        FeatureVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Geometric description of one state's action set.
///
/// All shapes are origin-symmetric and axis-aligned, so `min_a ⟨a,θ⟩ =
/// -max_a ⟨a,θ⟩` and the regularity parameter depends only on the shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ActionSet {
    /// L2 ball of the given radius.
    Ball { dim: usize, radius: f64 },
    /// Axis-aligned cube `[-half_width, half_width]^dim`.
    Box { dim: usize, half_width: f64 },
    /// Axis-aligned ellipsoid with the given semi-axes.
    Ellipsoid { semi_axes: Vec<f64> },
}

impl ActionSet {
    pub fn dim(&self) -> usize {
        match self {
            ActionSet::Ball { dim, .. } | ActionSet::Box { dim, .. } => *dim,
            ActionSet::Ellipsoid { semi_axes } => semi_axes.len(),
        }
    }

    /// Radius of the largest inscribed L2 ball.
    pub fn inner_radius(&self) -> f64 {
        match self {
            ActionSet::Ball { radius, .. } => *radius,
            ActionSet::Box { half_width, .. } => *half_width,
            ActionSet::Ellipsoid { semi_axes } => {
                semi_axes.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Radius of the smallest circumscribed L2 ball.
    pub fn outer_radius(&self) -> f64 {
        match self {
            ActionSet::Ball { radius, .. } => *radius,
            ActionSet::Box { dim, half_width } => half_width * (*dim as f64).sqrt(),
            ActionSet::Ellipsoid { semi_axes } => {
                semi_axes.iter().copied().fold(0.0, f64::max)
            }
        }
    }

    /// Regularity parameter `B = η/ρ ≥ 1`.
    pub fn regularity(&self) -> f64 {
        self.outer_radius() / self.inner_radius()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ActionSet::Ball { dim, radius } | ActionSet::Box { dim, half_width: radius } => {
                *dim >= 1 && radius.is_finite() && *radius > 0.0
            }
            ActionSet::Ellipsoid { semi_axes } => {
                !semi_axes.is_empty() && semi_axes.iter().all(|c| c.is_finite() && *c > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInstance(format!(
                "degenerate action set: {self:?}"
            )))
        }
    }

    fn check_dim(&self, v: &FeatureVector) -> Result<()> {
        if v.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            })
        }
    }

    /// Closed-set membership with exact arithmetic predicates.
    pub fn contains(&self, a: &FeatureVector) -> Result<bool> {
        self.check_dim(a)?;
        Ok(match self {
            ActionSet::Ball { radius, .. } => a.dot(a) <= radius * radius,
            ActionSet::Box { half_width, .. } => a.0.iter().all(|x| x.abs() <= *half_width),
            ActionSet::Ellipsoid { semi_axes } => {
                a.0.iter()
                    .zip(semi_axes)
                    .map(|(x, c)| (x / c) * (x / c))
                    .sum::<f64>()
                    <= 1.0
            }
        })
    }

    /// Membership up to a relative slack, for runtime guards on actions that
    /// are built from closed-form maximizers and may sit on the boundary up
    /// to floating-point rounding.
    pub fn contains_tol(&self, a: &FeatureVector, tol: f64) -> Result<bool> {
        self.check_dim(a)?;
        let s = 1.0 + tol;
        Ok(match self {
            ActionSet::Ball { radius, .. } => a.norm() <= radius * s,
            ActionSet::Box { half_width, .. } => {
                a.0.iter().all(|x| x.abs() <= half_width * s)
            }
            ActionSet::Ellipsoid { semi_axes } => {
                a.0.iter()
                    .zip(semi_axes)
                    .map(|(x, c)| (x / c) * (x / c))
                    .sum::<f64>()
                    .sqrt()
                    <= s
            }
        })
    }

    /// `max_{a ∈ set} ⟨a, θ⟩`, in closed form.
    ///
    /// Ball: `ρ‖θ‖₂`; box: `w‖θ‖₁`; ellipsoid: `√(Σ cᵢ²θᵢ²)`.
    pub fn support_value(&self, theta: &FeatureVector) -> Result<f64> {
        self.check_dim(theta)?;
        Ok(match self {
            ActionSet::Ball { radius, .. } => radius * theta.norm(),
            ActionSet::Box { half_width, .. } => half_width * theta.l1_norm(),
            ActionSet::Ellipsoid { semi_axes } => theta
                .0
                .iter()
                .zip(semi_axes)
                .map(|(t, c)| (c * t) * (c * t))
                .sum::<f64>()
                .sqrt(),
        })
    }

    /// A maximizer of `⟨a, θ⟩` over the set.
    ///
    /// Ties at `θ = 0` resolve to the zero action; a box coordinate with
    /// `θᵢ = 0` resolves to 0.
    pub fn support_argmax(&self, theta: &FeatureVector) -> Result<FeatureVector> {
        self.check_dim(theta)?;
        Ok(match self {
            ActionSet::Ball { dim, radius } => {
                let n = theta.norm();
                if n == 0.0 {
                    FeatureVector::zeros(*dim)
                } else {
                    theta.scaled(radius / n)
                }
            }
            ActionSet::Box { half_width, .. } => FeatureVector(
                theta
                    .0
                    .iter()
                    .map(|t| {
                        if *t == 0.0 {
                            0.0
                        } else {
                            half_width * t.signum()
                        }
                    })
                    .collect(),
            ),
            ActionSet::Ellipsoid { semi_axes } => {
                let s = self.support_value(theta)?;
                if s == 0.0 {
                    FeatureVector::zeros(semi_axes.len())
                } else {
                    FeatureVector(
                        theta
                            .0
                            .iter()
                            .zip(semi_axes)
                            .map(|(t, c)| c * c * t / s)
                            .collect(),
                    )
                }
            }
        })
    }

    /// Radial projection of a nonzero direction onto the boundary.
    pub fn boundary_point(&self, direction: &FeatureVector) -> Result<FeatureVector> {
        self.check_dim(direction)?;
        let t = match self {
            ActionSet::Ball { radius, .. } => {
                let n = direction.norm();
                if n == 0.0 {
                    return Ok(FeatureVector::zeros(self.dim()));
                }
                radius / n
            }
            ActionSet::Box { half_width, .. } => {
                let m = direction.0.iter().map(|x| x.abs()).fold(0.0, f64::max);
                if m == 0.0 {
                    return Ok(FeatureVector::zeros(self.dim()));
                }
                half_width / m
            }
            ActionSet::Ellipsoid { semi_axes } => {
                let q: f64 = direction
                    .0
                    .iter()
                    .zip(semi_axes)
                    .map(|(x, c)| (x / c) * (x / c))
                    .sum();
                if q == 0.0 {
                    return Ok(FeatureVector::zeros(self.dim()));
                }
                1.0 / q.sqrt()
            }
        };
        Ok(direction.scaled(t))
    }

    /// Deterministic boundary grid: `n` directions radially mapped onto the
    /// boundary. For d = 1 this degenerates to the two endpoints; for d = 2
    /// the directions are evenly spaced angles; for d ≥ 3 they come from a
    /// fixed-seed stream.
    pub fn boundary_grid(&self, n: usize) -> Vec<FeatureVector> {
        unit_directions(self.dim(), n)
            .into_iter()
            .map(|u| self.boundary_point(&u).expect("dims match"))
            .collect()
    }

    /// An interior point: boundary point along a random direction, pulled in
    /// by a random factor. Used for residual probes, not uniform sampling.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> FeatureVector {
        let d = self.dim();
        let mut u = FeatureVector(
            (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        if u.norm() == 0.0 {
            u = FeatureVector::basis(d, 0, 1.0);
        }
        let b = self.boundary_point(&u).expect("dims match");
        b.scaled(rng.random::<f64>())
    }
}

/// `n` unit directions in dimension `d`, deterministic for fixed `(d, n)`.
pub fn unit_directions(d: usize, n: usize) -> Vec<FeatureVector> {
    match d {
        0 => Vec::new(),
        1 => (0..n)
            .map(|k| FeatureVector(vec![if k % 2 == 0 { 1.0 } else { -1.0 }]))
            .collect(),
        2 => (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                FeatureVector(vec![t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
            (0..n)
                .map(|_| loop {
                    let v = FeatureVector(
                        (0..d)
                            .map(|_| rng.sample::<f64, _>(StandardNormal))
                            .collect(),
                    );
                    let norm = v.norm();
                    if norm > 1e-12 {
                        break v.scaled(1.0 / norm);
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ball(d: usize, r: f64) -> ActionSet {
        ActionSet::Ball { dim: d, radius: r }
    }

    fn cube(d: usize, w: f64) -> ActionSet {
        ActionSet::Box {
            dim: d,
            half_width: w,
        }
    }

    fn ellipsoid(axes: &[f64]) -> ActionSet {
        ActionSet::Ellipsoid {
            semi_axes: axes.to_vec(),
        }
    }

    #[test]
    fn contains_center_and_boundary() {
        let b = ball(2, 1.0);
        assert!(b.contains(&FeatureVector(vec![0.0, 0.0])).unwrap());
        // (0.6, 0.8) has norm exactly 1.
        assert!(b.contains(&FeatureVector(vec![0.6, 0.8])).unwrap());
        let c = cube(2, 1.0);
        assert!(!c.contains(&FeatureVector(vec![1.0, 1.1])).unwrap());
    }

    #[test]
    fn contains_dimension_mismatch() {
        let b = ball(2, 1.0);
        assert!(matches!(
            b.contains(&FeatureVector(vec![0.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn support_values_closed_form() {
        assert_eq!(
            ball(2, 2.0)
                .support_value(&FeatureVector(vec![3.0, 4.0]))
                .unwrap(),
            10.0
        );
        assert_eq!(
            cube(2, 1.0)
                .support_value(&FeatureVector(vec![1.0, -2.0]))
                .unwrap(),
            3.0
        );
        let s = ellipsoid(&[2.0, 1.0])
            .support_value(&FeatureVector(vec![1.0, 1.0]))
            .unwrap();
        assert!((s - 5.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn support_argmax_closed_form() {
        let a = ball(2, 2.0)
            .support_argmax(&FeatureVector(vec![3.0, 4.0]))
            .unwrap();
        assert!((a.0[0] - 1.2).abs() < 1e-12 && (a.0[1] - 1.6).abs() < 1e-12);

        for set in [ball(2, 0.7), cube(2, 0.7), ellipsoid(&[2.0, 1.0])] {
            let z = set.support_argmax(&FeatureVector(vec![0.0, 0.0])).unwrap();
            assert_eq!(z, FeatureVector::zeros(2));
        }

        let e = ellipsoid(&[2.0, 1.0])
            .support_argmax(&FeatureVector(vec![1.0, 1.0]))
            .unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!((e.0[0] - 4.0 / s5).abs() < 1e-12);
        assert!((e.0[1] - 1.0 / s5).abs() < 1e-12);

        // Box coordinate with θ_i = 0 resolves to 0.
        let bx = cube(3, 0.5)
            .support_argmax(&FeatureVector(vec![1.0, 0.0, -2.0]))
            .unwrap();
        assert_eq!(bx, FeatureVector(vec![0.5, 0.0, -0.5]));
    }

    /// Independent oracle for the ellipsoid support examples: dense sweep of
    /// the ellipse boundary.
    #[test]
    fn ellipsoid_support_matches_boundary_sweep() {
        let set = ellipsoid(&[2.0, 1.0]);
        let theta = FeatureVector(vec![1.0, 1.0]);
        let mut best = f64::NEG_INFINITY;
        let n = 100_000;
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
            let a = FeatureVector(vec![2.0 * t.cos(), t.sin()]);
            best = best.max(a.dot(&theta));
        }
        let closed = set.support_value(&theta).unwrap();
        assert!((best - closed).abs() < 1e-4, "sweep {best} vs closed {closed}");
        let am = set.support_argmax(&theta).unwrap();
        assert!((am.dot(&theta) - 5.0_f64.sqrt()).abs() < 1e-4);
    }

    /// Uniform boundary samples for the brute-force oracle: face-aligned
    /// grids (corner-inclusive) for boxes, uniform angles/directions mapped
    /// radially for balls and ellipsoids.
    fn boundary_samples(set: &ActionSet, n: usize, rng: &mut ChaCha8Rng) -> Vec<FeatureVector> {
        let d = set.dim();
        match (set, d) {
            (_, 1) => {
                let r = set.inner_radius();
                vec![FeatureVector(vec![-r]), FeatureVector(vec![r])]
            }
            (ActionSet::Box { dim, half_width }, _) => {
                // Uniform grid per face, endpoints included.
                let faces = 2 * dim;
                let per_face = n / faces;
                let side = (per_face as f64).powf(1.0 / (*dim as f64 - 1.0)).ceil() as usize;
                let mut points = Vec::new();
                for axis in 0..*dim {
                    for sign in [-1.0, 1.0] {
                        let mut idx = vec![0usize; dim - 1];
                        loop {
                            let mut coords = vec![0.0; *dim];
                            coords[axis] = sign * half_width;
                            let mut k = 0;
                            for (j, c) in coords.iter_mut().enumerate() {
                                if j != axis {
                                    let t = if side == 1 {
                                        0.0
                                    } else {
                                        -1.0 + 2.0 * idx[k] as f64 / (side - 1) as f64
                                    };
                                    *c = t * half_width;
                                    k += 1;
                                }
                            }
                            points.push(FeatureVector(coords));
                            // Odometer over the face grid.
                            let mut carry = true;
                            for slot in idx.iter_mut() {
                                if carry {
                                    *slot += 1;
                                    if *slot == side {
                                        *slot = 0;
                                    } else {
                                        carry = false;
                                    }
                                }
                            }
                            if carry {
                                break;
                            }
                        }
                    }
                }
                points
            }
            (_, 2) => (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                    set.boundary_point(&FeatureVector(vec![t.cos(), t.sin()]))
                        .unwrap()
                })
                .collect(),
            _ => (0..n)
                .map(|_| {
                    let mut u = FeatureVector(
                        (0..d)
                            .map(|_| rng.sample::<f64, _>(StandardNormal))
                            .collect(),
                    );
                    if u.norm() == 0.0 {
                        u = FeatureVector::basis(d, 0, 1.0);
                    }
                    set.boundary_point(&u).unwrap()
                })
                .collect(),
        }
    }

    /// Brute-force equivalence for all shapes in d ≤ 3: the closed-form
    /// support value agrees with maximization over 1e5 sampled boundary
    /// points.
    #[test]
    fn support_value_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in 1..=3usize {
            let sets = vec![
                ball(d, 0.6),
                cube(d, 0.5),
                ellipsoid(&(0..d).map(|i| 0.4 + 0.15 * i as f64).collect::<Vec<_>>()),
            ];
            for set in sets {
                let mut theta = FeatureVector(
                    (0..d)
                        .map(|_| rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                );
                theta = theta.scaled(1.0 / theta.norm());
                let closed = set.support_value(&theta).unwrap();
                let mut best = f64::NEG_INFINITY;
                for p in boundary_samples(&set, 100_000, &mut rng) {
                    best = best.max(p.dot(&theta));
                }
                assert!(
                    (closed - best).abs() < 1e-4,
                    "{set:?}: closed {closed} vs brute {best}"
                );
                assert!(best <= closed + 1e-12, "brute force exceeded closed form");
            }
        }
    }

    #[test]
    fn sandwich_property() {
        let sets = vec![ball(3, 0.5), cube(3, 0.5), ellipsoid(&[0.5, 0.7, 0.9])];
        for set in sets {
            let rho = set.inner_radius();
            let eta = set.outer_radius();
            for u in unit_directions(3, 10_000) {
                let s = set.support_value(&u).unwrap();
                assert!(
                    s >= rho - 1e-12 && s <= eta + 1e-12,
                    "{set:?}: support {s} outside [{rho}, {eta}]"
                );
            }
        }
    }

    #[test]
    fn regularity_parameters() {
        assert_eq!(ball(4, 0.3).regularity(), 1.0);
        assert!((cube(4, 0.3).regularity() - 2.0).abs() < 1e-12);
        assert!((ellipsoid(&[0.2, 0.6]).regularity() - 3.0).abs() < 1e-12);
    }

    proptest! {
        /// ⟨argmax, θ⟩ equals the support value and the argmax is a member.
        #[test]
        fn argmax_attains_support(
            shape in 0..3usize,
            coords in proptest::collection::vec(-3.0..3.0f64, 1..5),
        ) {
            let d = coords.len();
            let set = match shape {
                0 => ball(d, 0.5),
                1 => cube(d, 0.5),
                _ => ellipsoid(&(0..d).map(|i| 0.3 + 0.2 * i as f64).collect::<Vec<_>>()),
            };
            let theta = FeatureVector(coords);
            let a = set.support_argmax(&theta).unwrap();
            let s = set.support_value(&theta).unwrap();
            prop_assert!((a.dot(&theta) - s).abs() <= 1e-12);
            prop_assert!(set.contains_tol(&a, 1e-12).unwrap());
        }

        /// Positive scaling of θ leaves the maximizer unchanged.
        #[test]
        fn argmax_scale_invariant(
            shape in 0..3usize,
            coords in proptest::collection::vec(-3.0..3.0f64, 1..5),
            c in 1e-3..1e3f64,
        ) {
            let d = coords.len();
            let set = match shape {
                0 => ball(d, 0.5),
                1 => cube(d, 0.5),
                _ => ellipsoid(&(0..d).map(|i| 0.3 + 0.2 * i as f64).collect::<Vec<_>>()),
            };
            let theta = FeatureVector(coords);
            let a = set.support_argmax(&theta).unwrap();
            let b = set.support_argmax(&theta.scaled(c)).unwrap();
            for (x, y) in a.0.iter().zip(&b.0) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
