//! Synthetic instance generation and certification.
//!
//! The generator picks features, action sets, a transition kernel, and
//! parameters `θ*_h` freely, and lets the Bellman inversion in [`crate::mdp`]
//! supply the rewards, so linear optimal action values hold exactly by
//! construction. Feature magnitudes along each `θ*_h` follow a backward
//! value recursion that keeps every mean reward nonnegative; path reward
//! sums above 1 are removed by rescaling all `θ*_h` together, which
//! preserves linearity, equal norms, and nonnegativity.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ActionSet, FeatureVector};
use crate::mdp::{
    LinearQStarMdp, RewardNoise, SoftmaxEdge, StateRef, StateSpec, TransitionKernel,
};
use crate::oracle;
use crate::sim::RngStream;

/// Default certification tolerance.
pub const CERT_TOL: f64 = 1e-9;
/// Tolerance for the equal-parameter-norm check.
pub const NORM_TOL: f64 = 1e-12;
/// Boundary probe count for reward extrema under action-dependent kernels:
/// 64^min(d,2) directions.
fn softmax_grid_points(d: usize) -> usize {
    if d == 1 {
        64
    } else {
        4096
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSetFamily {
    Ball,
    Box,
    Ellipsoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    ActionIndependent,
    SoftmaxAffine,
}

/// How radii vary across states.
///
/// `PerStep` equalizes the action set within each step (the identical-
/// convex-sets setting); `PerState` draws one ball radius per state (the
/// varying-radius setting, which also requires equal parameter norms).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusLayout {
    PerStep,
    PerState,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub d: usize,
    pub horizon: usize,
    pub states_per_step: Vec<usize>,
    pub action_set_family: ActionSetFamily,
    /// Inner radii are drawn uniformly from this interval, which must sit
    /// inside `(0, 1/H]` so path radius sums stay in `[0, 1]`.
    pub radius_range: (f64, f64),
    pub kernel_family: KernelFamily,
    #[serde(default = "default_layout")]
    pub radius_layout: RadiusLayout,
    /// Common norm for all `θ*_h`. Required for the per-state layout.
    /// The recorded norm may end up smaller if rescaling was needed.
    #[serde(default)]
    pub theta_target: Option<f64>,
    /// Half-width of the bounded-uniform observation noise, if any.
    #[serde(default)]
    pub reward_noise_half_width: Option<f64>,
    pub rng_seed: u64,
    #[serde(default = "default_max_rejections")]
    pub max_rejections: usize,
}

fn default_layout() -> RadiusLayout {
    RadiusLayout::PerStep
}

fn default_max_rejections() -> usize {
    1000
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.d == 0 {
            return fail("d must be at least 1".into());
        }
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if self.states_per_step.len() != self.horizon {
            return fail(format!(
                "states_per_step must list {} entries, got {}",
                self.horizon,
                self.states_per_step.len()
            ));
        }
        if self.states_per_step.contains(&0) {
            return fail("states_per_step entries must be at least 1".into());
        }
        let (lo, hi) = self.radius_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return fail(format!("radius_range ({lo}, {hi}) must satisfy 0 < lo <= hi"));
        }
        let cap = 1.0 / self.horizon as f64;
        if hi > cap + 1e-15 {
            return fail(format!(
                "radius_range upper bound {hi} exceeds 1/H = {cap}; \
                 per-trajectory radius sums must stay within [0, 1]"
            ));
        }
        if let Some(theta) = self.theta_target {
            if !(theta.is_finite() && theta > 0.0 && theta <= 1.0) {
                return fail(format!("theta_target {theta} must lie in (0, 1]"));
            }
        }
        if self.radius_layout == RadiusLayout::PerState {
            if self.action_set_family != ActionSetFamily::Ball {
                return fail("per-state radii require ball action sets".into());
            }
            if self.theta_target.is_none() {
                return fail("per-state radii require theta_target (equal parameter norms)".into());
            }
        }
        if let Some(w) = self.reward_noise_half_width {
            if !(w.is_finite() && w >= 0.0) {
                return fail(format!("reward_noise_half_width {w} must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Generate a certified instance, resampling on rejection.
///
/// Pipeline per attempt: sample features/kernel/θ → backfill rewards →
/// bound path reward sums → reject if the lower bound is negative, rescale
/// all `θ*_h` if the upper bound exceeds 1 → certify.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<LinearQStarMdp> {
    cfg.validate()?;
    let root = RngStream::from_seed(cfg.rng_seed).child("generate");
    let attempts = cfg.max_rejections.max(1);
    let mut last_reason = String::from("no attempts made");
    for attempt in 0..attempts {
        match build_attempt(cfg, &root.child_index(attempt as u64)) {
            Ok(mdp) => {
                let report = verify_assumptions(&mdp, CERT_TOL);
                if report.pass() {
                    return Ok(mdp);
                }
                last_reason = report
                    .first_failure()
                    .unwrap_or_else(|| "unknown certification failure".into());
            }
            Err(reason) => last_reason = reason,
        }
    }
    Err(Error::RejectionBudgetExceeded {
        attempts,
        reason: last_reason,
    })
}

/// One sampling attempt; `Err` carries the rejection reason.
fn build_attempt(cfg: &GeneratorConfig, stream: &RngStream) -> std::result::Result<LinearQStarMdp, String> {
    let mut rng = stream.rng();
    let d = cfg.d;
    let horizon = cfg.horizon;

    // Parameter directions and norms.
    let mut thetas: Vec<FeatureVector> = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let dir = random_unit(&mut rng, d);
        let norm = match cfg.theta_target {
            Some(t) => t,
            None => 0.4 + 0.6 * rng.random::<f64>(),
        };
        thetas.push(dir.scaled(norm));
    }

    // Action sets.
    let (lo, hi) = cfg.radius_range;
    let draw_radius = |rng: &mut rand_chacha::ChaCha8Rng| lo + (hi - lo) * rng.random::<f64>();
    let mut sets: Vec<Vec<ActionSet>> = Vec::with_capacity(horizon);
    for h0 in 0..horizon {
        let n = cfg.states_per_step[h0];
        match cfg.radius_layout {
            RadiusLayout::PerStep => {
                let rho = draw_radius(&mut rng);
                let set = match cfg.action_set_family {
                    ActionSetFamily::Ball => ActionSet::Ball { dim: d, radius: rho },
                    ActionSetFamily::Box => ActionSet::Box {
                        dim: d,
                        half_width: rho,
                    },
                    ActionSetFamily::Ellipsoid => {
                        // One axis pinned at the inner radius, others up to
                        // 1.6x, so B stays moderate.
                        let pinned = rng.random_range(0..d);
                        let axes: Vec<f64> = (0..d)
                            .map(|i| {
                                if i == pinned {
                                    rho
                                } else {
                                    rho * (1.0 + 0.6 * rng.random::<f64>())
                                }
                            })
                            .collect();
                        ActionSet::Ellipsoid { semi_axes: axes }
                    }
                };
                sets.push(vec![set; n]);
            }
            RadiusLayout::PerState => {
                sets.push(
                    (0..n)
                        .map(|_| ActionSet::Ball {
                            dim: d,
                            radius: draw_radius(&mut rng),
                        })
                        .collect(),
                );
            }
        }
    }

    // Backward value recursion: pick ⟨φ(s), θ_h⟩ so every backfilled mean
    // reward is nonnegative for worst-case in-set actions and any kernel.
    let mut fvals: Vec<Vec<f64>> = vec![Vec::new(); horizon];
    let mut vmax_next = 0.0_f64;
    for h0 in (0..horizon).rev() {
        let theta = &thetas[h0];
        let svals: Vec<f64> = sets[h0]
            .iter()
            .map(|a| a.support_value(theta).expect("dims match"))
            .collect();
        let mean_sval = svals.iter().sum::<f64>() / svals.len() as f64;
        let jitter = 0.3 * mean_sval;
        let mut vmax_here = f64::NEG_INFINITY;
        let mut level = Vec::with_capacity(svals.len());
        for sval in &svals {
            let fval = sval + vmax_next + jitter * rng.random::<f64>();
            vmax_here = vmax_here.max(fval + sval);
            level.push(fval);
        }
        fvals[h0] = level;
        vmax_next = vmax_here;
    }

    // Realize features: φ(s) = (fval/‖θ‖)·û_h + perpendicular noise, within
    // the ‖φ(s)‖ + η(s) ≤ 1 budget.
    let mut states: Vec<Vec<StateSpec>> = Vec::with_capacity(horizon);
    for h0 in 0..horizon {
        let theta = &thetas[h0];
        let tnorm = theta.norm();
        let unit = theta.scaled(1.0 / tnorm);
        let mut level = Vec::with_capacity(sets[h0].len());
        for (i, set) in sets[h0].iter().enumerate() {
            let g = fvals[h0][i] / tnorm;
            let budget = 1.0 - 1e-6 - set.outer_radius();
            if g >= budget {
                return Err(format!(
                    "feature budget exceeded at step {} (needed ‖φ‖ ≥ {g:.3}, \
                     allowed {budget:.3}); radii too large for the horizon",
                    h0 + 1
                ));
            }
            let perp_cap = (budget * budget - g * g).sqrt().min(0.1);
            let noise = perp_cap * rng.random::<f64>();
            let phi = if d == 1 || noise == 0.0 {
                unit.scaled(g)
            } else {
                let raw = random_unit(&mut rng, d);
                let along = raw.dot(&unit);
                let perp = raw.sub(&unit.scaled(along));
                let pnorm = perp.norm();
                if pnorm < 1e-9 {
                    unit.scaled(g)
                } else {
                    unit.scaled(g).add(&perp.scaled(noise / pnorm))
                }
            };
            level.push(StateSpec {
                id: format!("h{}#{i}", h0 + 1),
                step: h0 + 1,
                phi,
                action_set: set.clone(),
            });
        }
        states.push(level);
    }

    // Transition kernel and initial distribution.
    let kernel = match cfg.kernel_family {
        KernelFamily::ActionIndependent => {
            let rows = (0..horizon.saturating_sub(1))
                .map(|h0| {
                    (0..cfg.states_per_step[h0])
                        .map(|_| random_simplex(&mut rng, cfg.states_per_step[h0 + 1]))
                        .collect()
                })
                .collect();
            TransitionKernel::ActionIndependent { rows }
        }
        KernelFamily::SoftmaxAffine => {
            let rows = (0..horizon.saturating_sub(1))
                .map(|h0| {
                    (0..cfg.states_per_step[h0])
                        .map(|_| {
                            (0..cfg.states_per_step[h0 + 1])
                                .map(|_| SoftmaxEdge {
                                    weight: random_unit(&mut rng, d)
                                        .scaled(1.2 * rng.random::<f64>()),
                                    bias: 2.0 * rng.random::<f64>() - 1.0,
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            TransitionKernel::SoftmaxAffine { rows }
        }
    };
    let mu = random_simplex(&mut rng, cfg.states_per_step[0]);

    let noise = match cfg.reward_noise_half_width {
        Some(w) if w > 0.0 => RewardNoise::BoundedUniform { half_width: w },
        _ => RewardNoise::None,
    };
    let identical = cfg.radius_layout == RadiusLayout::PerStep;

    let assemble = |thetas: Vec<FeatureVector>| {
        let theta_norm = cfg.theta_target.map(|_| thetas[0].norm());
        LinearQStarMdp::new(
            d,
            horizon,
            states.clone(),
            kernel.clone(),
            thetas,
            mu.clone(),
            noise,
            theta_norm,
            identical,
        )
        .map_err(|e| format!("assembly failed: {e}"))
    };

    let mdp = assemble(thetas.clone())?;
    let bounds = reward_sum_bounds(&mdp);
    if bounds.min < -1e-12 {
        return Err(format!("negative worst-case path reward sum {}", bounds.min));
    }
    if bounds.max > 1.0 {
        // Rescaling every θ*_h by the same factor keeps linearity, equal
        // norms, and the nonnegative lower bound.
        let scale = (1.0 - 1e-9) / bounds.max;
        let scaled: Vec<FeatureVector> = thetas.iter().map(|t| t.scaled(scale)).collect();
        let mdp = assemble(scaled)?;
        let bounds = reward_sum_bounds(&mdp);
        if bounds.min < -1e-12 || bounds.max > 1.0 {
            return Err(format!(
                "path reward bounds [{}, {}] remain outside [0, 1] after rescaling",
                bounds.min, bounds.max
            ));
        }
        return Ok(mdp);
    }
    Ok(mdp)
}

fn random_unit(rng: &mut rand_chacha::ChaCha8Rng, d: usize) -> FeatureVector {
    loop {
        let v = FeatureVector(
            (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        let n = v.norm();
        if n > 1e-9 {
            return v.scaled(1.0 / n);
        }
    }
}

fn random_simplex(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Extrema of the path reward sum `Σ_h r(s_h, a_h)` over reachable state
/// paths and worst-case in-set actions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardSumBounds {
    pub min: f64,
    pub max: f64,
    /// Exact for action-independent kernels (rewards are affine in the
    /// action); under softmax kernels the per-state extrema come from a
    /// deterministic boundary grid and the bounds are estimates.
    pub rigorous: bool,
}

pub fn reward_sum_bounds(mdp: &LinearQStarMdp) -> RewardSumBounds {
    let horizon = mdp.horizon();
    // With no continuation term (H = 1) rewards are affine in the action
    // for any kernel family.
    let rigorous = mdp.kernel().is_action_independent() || horizon == 1;

    // Per-state reward extrema over the action set.
    let mut lo: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    let mut hi: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    for step in 1..=horizon {
        let mut lo_level = Vec::new();
        let mut hi_level = Vec::new();
        for index in 0..mdp.states_at(step).len() {
            let r = StateRef { step, index };
            let state = mdp.state(r);
            let theta = mdp.theta(step);
            if rigorous || step == mdp.horizon() {
                // r(s,·) is affine in the action: extrema at ±support.
                let center = mdp.mean_reward(r, &FeatureVector::zeros(mdp.dim()));
                let spread = state.action_set.support_value(theta).expect("dims match");
                lo_level.push(center - spread);
                hi_level.push(center + spread);
            } else {
                let mut worst = f64::INFINITY;
                let mut best = f64::NEG_INFINITY;
                let mut probe = |a: &FeatureVector| {
                    let v = mdp.mean_reward(r, a);
                    worst = worst.min(v);
                    best = best.max(v);
                };
                probe(&FeatureVector::zeros(mdp.dim()));
                probe(&state.action_set.support_argmax(theta).expect("dims match"));
                probe(
                    &state
                        .action_set
                        .support_argmax(&theta.scaled(-1.0))
                        .expect("dims match"),
                );
                for a in state.action_set.boundary_grid(softmax_grid_points(mdp.dim())) {
                    probe(&a);
                }
                lo_level.push(worst);
                hi_level.push(best);
            }
        }
        lo.push(lo_level);
        hi.push(hi_level);
    }

    // Min/max dynamic program over reachable paths. Decoupling the action
    // used for the reward from the successor choice only widens the
    // interval, so containment in [0,1] certified here is safe.
    let mut min_next: Vec<f64> = Vec::new();
    let mut max_next: Vec<f64> = Vec::new();
    for step in (1..=horizon).rev() {
        let n = mdp.states_at(step).len();
        let mut min_level = Vec::with_capacity(n);
        let mut max_level = Vec::with_capacity(n);
        for index in 0..n {
            let r = StateRef { step, index };
            let (mut m, mut x) = (lo[step - 1][index], hi[step - 1][index]);
            if step < horizon {
                let support = mdp.successor_support(r);
                m += support
                    .iter()
                    .map(|j| min_next[*j])
                    .fold(f64::INFINITY, f64::min);
                x += support
                    .iter()
                    .map(|j| max_next[*j])
                    .fold(f64::NEG_INFINITY, f64::max);
            }
            min_level.push(m);
            max_level.push(x);
        }
        min_next = min_level;
        max_next = max_level;
    }

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (index, p) in mdp.mu().iter().enumerate() {
        if *p > 0.0 {
            min = min.min(min_next[index]);
            max = max.max(max_next[index]);
        }
    }
    RewardSumBounds { min, max, rigorous }
}

/// Extrema of `Σ_h ρ(s_h)` over reachable state paths.
pub fn radius_sum_bounds(mdp: &LinearQStarMdp) -> (f64, f64) {
    let horizon = mdp.horizon();
    let mut min_next: Vec<f64> = Vec::new();
    let mut max_next: Vec<f64> = Vec::new();
    for step in (1..=horizon).rev() {
        let n = mdp.states_at(step).len();
        let mut min_level = Vec::with_capacity(n);
        let mut max_level = Vec::with_capacity(n);
        for index in 0..n {
            let r = StateRef { step, index };
            let rho = mdp.state(r).action_set.inner_radius();
            let (mut m, mut x) = (rho, rho);
            if step < horizon {
                let support = mdp.successor_support(r);
                m += support
                    .iter()
                    .map(|j| min_next[*j])
                    .fold(f64::INFINITY, f64::min);
                x += support
                    .iter()
                    .map(|j| max_next[*j])
                    .fold(f64::NEG_INFINITY, f64::max);
            }
            min_level.push(m);
            max_level.push(x);
        }
        min_next = min_level;
        max_next = max_level;
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (index, p) in mdp.mu().iter().enumerate() {
        if *p > 0.0 {
            min = min.min(min_next[index]);
            max = max.max(max_next[index]);
        }
    }
    (min, max)
}

/// Outcome of one certification check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub applicable: bool,
    pub pass: bool,
    pub worst: f64,
    pub detail: String,
}

impl CheckResult {
    fn skipped(name: &str) -> Self {
        CheckResult {
            name: name.into(),
            applicable: false,
            pass: true,
            worst: 0.0,
            detail: "not applicable".into(),
        }
    }
}

/// Certification report: one entry per assumption-level check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub tol: f64,
    pub linear_q: CheckResult,
    pub feature_bound: CheckResult,
    pub ball_structure: CheckResult,
    pub identical_sets: CheckResult,
    pub equal_norms: CheckResult,
    pub reward_sums: CheckResult,
    pub radius_sums: CheckResult,
    pub reward_bounds: RewardSumBounds,
}

impl AssumptionReport {
    pub fn checks(&self) -> [&CheckResult; 7] {
        [
            &self.linear_q,
            &self.feature_bound,
            &self.ball_structure,
            &self.identical_sets,
            &self.equal_norms,
            &self.reward_sums,
            &self.radius_sums,
        ]
    }

    pub fn pass(&self) -> bool {
        self.checks().iter().all(|c| !c.applicable || c.pass)
    }

    pub fn worst_residual(&self) -> f64 {
        self.linear_q.worst
    }

    pub fn first_failure(&self) -> Option<String> {
        self.checks()
            .iter()
            .find(|c| c.applicable && !c.pass)
            .map(|c| format!("{}: {}", c.name, c.detail))
    }
}

impl std::fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in self.checks() {
            let status = if !c.applicable {
                "SKIP"
            } else if c.pass {
                "PASS"
            } else {
                "FAIL"
            };
            writeln!(f, "{:<16} {status}  {}", c.name, c.detail)?;
        }
        write!(
            f,
            "overall          {}",
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

/// Check the instance against its claimed assumptions.
///
/// Always checked: the linear-Q* certificate (Bellman residual on a probe
/// grid plus closed-form/DP value agreement), the feature-norm budget, and
/// the path-sum bounds. Checked when claimed: identical per-step action
/// sets; ball structure and equal parameter norms.
pub fn verify_assumptions(mdp: &LinearQStarMdp, tol: f64) -> AssumptionReport {
    // Linear Q*: residual on the probe grid and agreement of the two value
    // routes.
    let residual = oracle::bellman_residual(mdp);
    let linear_q = match oracle::optimal_values(mdp) {
        Ok(table) => CheckResult {
            name: "linear-q".into(),
            applicable: true,
            pass: residual <= tol,
            worst: residual,
            detail: format!(
                "bellman residual {residual:.3e}, value-route diff {:.3e}",
                table.max_diff
            ),
        },
        Err(e) => CheckResult {
            name: "linear-q".into(),
            applicable: true,
            pass: false,
            worst: residual,
            detail: format!("bellman residual {residual:.3e}; value routes disagree: {e}"),
        },
    };

    let mut worst_norm = f64::NEG_INFINITY;
    for r in mdp.state_refs() {
        let s = mdp.state(r);
        worst_norm = worst_norm.max(s.phi.norm() + s.action_set.outer_radius());
    }
    let feature_bound = CheckResult {
        name: "feature-bound".into(),
        applicable: true,
        pass: worst_norm <= 1.0 + tol,
        worst: worst_norm,
        detail: format!("max ‖φ(s)‖ + η(s) = {worst_norm:.6}"),
    };

    // The ball-structure claim belongs to the varying-radius setting:
    // equal norms with per-state sets. Identical-set instances may carry an
    // equal-norm certificate without claiming ball geometry.
    let ball_structure = if mdp.theta_norm().is_some() && !mdp.identical_sets() {
        let all_balls = mdp
            .state_refs()
            .all(|r| matches!(mdp.state(r).action_set, ActionSet::Ball { .. }));
        CheckResult {
            name: "ball-structure".into(),
            applicable: true,
            pass: all_balls,
            worst: if all_balls { 0.0 } else { 1.0 },
            detail: if all_balls {
                "all action sets are balls".into()
            } else {
                "a non-ball action set is present".into()
            },
        }
    } else {
        CheckResult::skipped("ball-structure")
    };

    let identical_sets = if mdp.identical_sets() {
        let mut offending = None;
        for step in 1..=mdp.horizon() {
            let level = mdp.states_at(step);
            if level.iter().any(|s| s.action_set != level[0].action_set) {
                offending = Some(step);
                break;
            }
        }
        CheckResult {
            name: "identical-sets".into(),
            applicable: true,
            pass: offending.is_none(),
            worst: offending.map_or(0.0, |s| s as f64),
            detail: match offending {
                None => "action sets identical within every step".into(),
                Some(step) => format!("step {step} has differing action sets"),
            },
        }
    } else {
        CheckResult::skipped("identical-sets")
    };

    let equal_norms = match mdp.theta_norm() {
        Some(theta) => {
            let worst = mdp
                .thetas()
                .iter()
                .map(|t| (t.norm() - theta).abs())
                .fold(0.0, f64::max);
            let in_range = theta > 0.0 && theta <= 1.0 + NORM_TOL;
            CheckResult {
                name: "equal-norms".into(),
                applicable: true,
                pass: worst <= NORM_TOL && in_range,
                worst,
                detail: format!("Θ = {theta:.6}, max |‖θ*_h‖ − Θ| = {worst:.3e}"),
            }
        }
        None => CheckResult::skipped("equal-norms"),
    };

    let bounds = reward_sum_bounds(mdp);
    let reward_sums = CheckResult {
        name: "reward-sums".into(),
        applicable: true,
        pass: bounds.min >= -tol && bounds.max <= 1.0 + tol,
        worst: (-bounds.min).max(bounds.max - 1.0).max(0.0),
        detail: format!(
            "path reward sums in [{:.6}, {:.6}] ({})",
            bounds.min,
            bounds.max,
            if bounds.rigorous {
                "rigorous"
            } else {
                "grid estimate, non-rigorous"
            }
        ),
    };

    let (rmin, rmax) = radius_sum_bounds(mdp);
    let radius_sums = CheckResult {
        name: "radius-sums".into(),
        applicable: true,
        pass: rmin >= -tol && rmax <= 1.0 + tol,
        worst: (rmax - 1.0).max(0.0),
        detail: format!("path radius sums in [{rmin:.6}, {rmax:.6}]"),
    };

    AssumptionReport {
        tol,
        linear_q,
        feature_bound,
        ball_structure,
        identical_sets,
        equal_norms,
        reward_sums,
        radius_sums,
        reward_bounds: bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Policy;
    use crate::oracle;

    pub(crate) fn base_config() -> GeneratorConfig {
        GeneratorConfig {
            d: 2,
            horizon: 2,
            states_per_step: vec![1, 2],
            action_set_family: ActionSetFamily::Ball,
            radius_range: (0.05, 0.15),
            kernel_family: KernelFamily::ActionIndependent,
            radius_layout: RadiusLayout::PerStep,
            theta_target: Some(0.8),
            reward_noise_half_width: None,
            rng_seed: 7,
            max_rejections: 1000,
        }
    }

    #[test]
    fn generated_instance_is_certified() {
        let mdp = generate_instance(&base_config()).unwrap();
        let report = verify_assumptions(&mdp, CERT_TOL);
        assert!(report.pass(), "{report}");
        assert!(report.worst_residual() <= 1e-9);
    }

    #[test]
    fn radius_range_above_one_over_h_is_rejected() {
        let mut cfg = base_config();
        cfg.radius_range = (0.1, 0.6); // 1/H = 0.5
        let err = generate_instance(&cfg).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1/H"), "{msg}");
    }

    #[test]
    fn degenerate_bandit_closed_form() {
        let cfg = GeneratorConfig {
            d: 1,
            horizon: 1,
            states_per_step: vec![1],
            radius_range: (0.2, 0.4),
            ..base_config()
        };
        let mdp = generate_instance(&cfg).unwrap();
        let s = mdp.state(StateRef { step: 1, index: 0 });
        let expected = s.phi.dot(mdp.theta(1)) + s.action_set.inner_radius() * mdp.theta(1).norm();
        let table = oracle::optimal_values(&mdp).unwrap();
        assert!((table.initial_value(&mdp) - expected).abs() < 1e-12);
    }

    #[test]
    fn backfill_matches_hand_evaluated_closed_form() {
        // Single step-2 state with φ(s') = (0.1, 0), ρ(s') = 0.2 and
        // θ*_2 = (1, 0): the continuation is 0.1 + 0.2 = 0.3 for every
        // action, so r(s_1, a) = ⟨φ(s_1)+a, θ*_1⟩ − 0.3.
        let ball = |r| ActionSet::Ball { dim: 2, radius: r };
        let mdp = LinearQStarMdp::new(
            2,
            2,
            vec![
                vec![StateSpec {
                    id: "a".into(),
                    step: 1,
                    phi: FeatureVector(vec![0.4, 0.2]),
                    action_set: ball(0.1),
                }],
                vec![StateSpec {
                    id: "b".into(),
                    step: 2,
                    phi: FeatureVector(vec![0.1, 0.0]),
                    action_set: ball(0.2),
                }],
            ],
            TransitionKernel::ActionIndependent {
                rows: vec![vec![vec![1.0]]],
            },
            vec![
                FeatureVector(vec![0.5, 0.3]),
                FeatureVector(vec![1.0, 0.0]),
            ],
            vec![1.0],
            RewardNoise::None,
            None,
            false,
        )
        .unwrap();
        let s1 = StateRef { step: 1, index: 0 };
        for a in [
            FeatureVector::zeros(2),
            FeatureVector(vec![0.1, 0.0]),
            FeatureVector(vec![0.0, -0.1]),
        ] {
            let expected = mdp.state(s1).phi.add(&a).dot(mdp.theta(1)) - 0.3;
            assert!((mdp.mean_reward(s1, &a) - expected).abs() < 1e-15);
        }
        assert!(oracle::bellman_residual(&mdp) <= 1e-12);
    }

    #[test]
    fn reward_sum_bounds_single_step() {
        // φ = 0, ρ = 0.5, θ = (1, 0): r = ⟨a, θ⟩, extrema ±0.5.
        let mdp = LinearQStarMdp::new(
            2,
            1,
            vec![vec![StateSpec {
                id: "s".into(),
                step: 1,
                phi: FeatureVector::zeros(2),
                action_set: ActionSet::Ball {
                    dim: 2,
                    radius: 0.5,
                },
            }]],
            TransitionKernel::ActionIndependent { rows: vec![] },
            vec![FeatureVector(vec![1.0, 0.0])],
            vec![1.0],
            RewardNoise::None,
            None,
            true,
        )
        .unwrap();
        let b = reward_sum_bounds(&mdp);
        assert!((b.min + 0.5).abs() < 1e-15 && (b.max - 0.5).abs() < 1e-15);
        assert!(b.rigorous);
    }

    #[test]
    fn reward_sum_bounds_contain_brute_force_samples() {
        let mut cfg = base_config();
        cfg.states_per_step = vec![2, 3];
        cfg.rng_seed = 41;
        let mdp = generate_instance(&cfg).unwrap();
        let b = reward_sum_bounds(&mdp);

        // Brute force: enumerate both steps' states over all start states
        // and successors, with actions on a dense signed grid including the
        // exact extreme directions.
        let mut worst = f64::INFINITY;
        let mut best = f64::NEG_INFINITY;
        let actions_for = |r: StateRef| {
            let set = &mdp.state(r).action_set;
            let theta = mdp.theta(r.step);
            let mut probe: Vec<FeatureVector> = vec![
                FeatureVector::zeros(2),
                set.support_argmax(theta).unwrap(),
                set.support_argmax(&theta.scaled(-1.0)).unwrap(),
            ];
            probe.extend(set.boundary_grid(64));
            probe
        };
        for i0 in 0..2 {
            if mdp.mu()[i0] == 0.0 {
                continue;
            }
            let r1 = StateRef { step: 1, index: i0 };
            for a1 in actions_for(r1) {
                let r1v = mdp.mean_reward(r1, &a1);
                for j in mdp.successor_support(r1) {
                    let r2 = StateRef { step: 2, index: j };
                    for a2 in actions_for(r2) {
                        let total = r1v + mdp.mean_reward(r2, &a2);
                        worst = worst.min(total);
                        best = best.max(total);
                    }
                }
            }
        }
        // The exact extreme actions are in the probe set, so the DP bounds
        // are attained by the brute force.
        assert!((worst - b.min).abs() < 1e-6, "{worst} vs {}", b.min);
        assert!((best - b.max).abs() < 1e-6, "{best} vs {}", b.max);
    }

    #[test]
    fn perturbed_reward_fails_certification_with_matching_residual() {
        let mdp = generate_instance(&base_config()).unwrap();
        let broken = mdp.with_reward_bias(StateRef { step: 2, index: 0 }, 1e-3);
        let report = verify_assumptions(&broken, CERT_TOL);
        assert!(!report.pass());
        assert!(!report.linear_q.pass);
        assert!((report.worst_residual() - 1e-3).abs() < 1e-6);
    }

    #[test]
    fn differing_radii_fail_identical_sets_check_naming_step() {
        let ball = |r| ActionSet::Ball { dim: 1, radius: r };
        let mk_state = |id: &str, step, rho| StateSpec {
            id: id.into(),
            step,
            phi: FeatureVector(vec![0.3]),
            action_set: ball(rho),
        };
        let mdp = LinearQStarMdp::new(
            1,
            2,
            vec![
                vec![mk_state("a", 1, 0.1)],
                vec![mk_state("b", 2, 0.1), mk_state("c", 2, 0.2)],
            ],
            TransitionKernel::ActionIndependent {
                rows: vec![vec![vec![0.5, 0.5]]],
            },
            vec![FeatureVector(vec![0.5]), FeatureVector(vec![0.5])],
            vec![1.0],
            RewardNoise::None,
            None,
            true, // claims identical sets
        )
        .unwrap();
        let report = verify_assumptions(&mdp, CERT_TOL);
        assert!(!report.identical_sets.pass);
        assert!(report.identical_sets.detail.contains("step 2"));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = base_config();
        let a = serde_json::to_string(&generate_instance(&cfg).unwrap().to_file()).unwrap();
        let b = serde_json::to_string(&generate_instance(&cfg).unwrap().to_file()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linearity_certificate_on_random_probes() {
        let mut cfg = base_config();
        cfg.d = 3;
        cfg.horizon = 3;
        cfg.states_per_step = vec![2, 2, 2];
        cfg.radius_range = (0.05, 0.1);
        cfg.rng_seed = 99;
        let mdp = generate_instance(&cfg).unwrap();
        let table = oracle::optimal_values(&mdp).unwrap();
        let mut rng = RngStream::from_seed(5).child("probes").rng();
        let mut probs = Vec::new();
        for trial in 0..100 {
            let step = 1 + trial % 3;
            let index = trial % 2;
            let r = StateRef { step, index };
            let a = mdp.state(r).action_set.sample_interior(&mut rng);
            // Q from the DP route: r(s,a) + Σ P(s'|s,a) V_dp(s').
            let mut q = mdp.mean_reward(r, &a);
            if step < 3 {
                mdp.transition_probs_into(r, &a, &mut probs);
                q += probs
                    .iter()
                    .zip(&table.dp[step])
                    .map(|(p, v)| p * v)
                    .sum::<f64>();
            }
            let linear = mdp.q_star(r, &a);
            assert!(
                (q - linear).abs() <= 1e-9,
                "probe {trial}: {q} vs {linear}"
            );
        }
    }

    #[test]
    fn rescaling_preserves_nonnegative_sums_and_equal_norms() {
        // Radii near the 1/(2H) feasibility edge with Θ = 1 force the max
        // path sum above 1, exercising the rescaling branch.
        let mut cfg = base_config();
        cfg.theta_target = Some(1.0);
        cfg.radius_range = (0.2, 0.25);
        cfg.rng_seed = 3;
        let mdp = generate_instance(&cfg).unwrap();
        let theta = mdp.theta_norm().unwrap();
        assert!(theta < 1.0, "rescaling did not trigger (Θ = {theta})");
        let b = reward_sum_bounds(&mdp);
        assert!(b.min >= -1e-12 && b.max <= 1.0);
        let report = verify_assumptions(&mdp, CERT_TOL);
        assert!(report.equal_norms.pass, "{report}");
    }

    #[test]
    fn softmax_instances_certify_with_grid_bounds() {
        let mut cfg = base_config();
        cfg.kernel_family = KernelFamily::SoftmaxAffine;
        cfg.states_per_step = vec![2, 2];
        cfg.rng_seed = 11;
        let mdp = generate_instance(&cfg).unwrap();
        let report = verify_assumptions(&mdp, CERT_TOL);
        assert!(report.pass(), "{report}");
        assert!(!report.reward_bounds.rigorous);
        assert!(report.reward_sums.detail.contains("non-rigorous"));
    }

    #[test]
    fn per_state_layout_draws_varying_radii() {
        let mut cfg = base_config();
        cfg.radius_layout = RadiusLayout::PerState;
        cfg.states_per_step = vec![3, 3];
        cfg.radius_range = (0.05, 0.2);
        cfg.rng_seed = 13;
        let mdp = generate_instance(&cfg).unwrap();
        assert!(!mdp.identical_sets());
        let radii: Vec<f64> = mdp
            .states_at(2)
            .iter()
            .map(|s| s.action_set.inner_radius())
            .collect();
        assert!(radii.windows(2).any(|w| (w[0] - w[1]).abs() > 1e-9));
        assert!(verify_assumptions(&mdp, CERT_TOL).pass());
    }

    #[test]
    fn zero_policy_rollout_consistency() {
        // The generator's certificates make the zero policy a valid probe.
        let mdp = generate_instance(&base_config()).unwrap();
        let v = oracle::policy_value(&mdp, &Policy::Zero).unwrap();
        assert!(v.is_finite());
    }
}
