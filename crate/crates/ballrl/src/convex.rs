//! Learner for identical regular-convex action sets within each step.
//!
//! The difference identity behind the estimator: subtracting the telescoped
//! Bellman equation between a probe policy and the all-zero baseline cancels
//! every policy-independent term, leaving
//!
//! ```text
//! ρ_h · θ*_{h,i} = E^{π_{h,i}}[Σ R] − E^{π_0}[Σ R],
//! ```
//!
//! where `π_{h,i}` plays `ρ_h e_i` at step `h` and zero elsewhere. Each
//! component is therefore a difference of two batch means divided by `ρ_h`,
//! and the output policy is greedy on the assembled `θ̂_h`.
//!
//! The learner sees the environment only through the trajectory interface:
//! revealed action sets and total rewards. It never reads `θ*`, features,
//! or the kernel.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ActionSet, FeatureVector};
use crate::mdp::Policy;
use crate::sim::{RngStream, TrajectoryEnv};

/// Configuration for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexBallRlConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Trajectories per policy batch (`M`).
    pub batch_size: u64,
    /// Reuse one baseline batch for all `(h, i)` probes instead of
    /// recollecting it each time. Off by default: recollection is what the
    /// sample-complexity accounting assumes.
    #[serde(default)]
    pub share_baseline: bool,
}

impl ConvexBallRlConfig {
    /// `M = ⌈8H²B²d·log(2dH/δ)/ε²⌉`, the batch size for which the output is
    /// ε-optimal with probability at least 1 − δ.
    pub fn theorem_batch_size(
        epsilon: f64,
        delta: f64,
        d: usize,
        horizon: usize,
        regularity: f64,
    ) -> u64 {
        let h = horizon as f64;
        let d = d as f64;
        let m = 8.0 * h * h * regularity * regularity * d * (2.0 * d * h / delta).ln()
            / (epsilon * epsilon);
        m.ceil() as u64
    }

    pub fn from_theorem(
        epsilon: f64,
        delta: f64,
        d: usize,
        horizon: usize,
        regularity: f64,
    ) -> Self {
        ConvexBallRlConfig {
            epsilon,
            delta,
            batch_size: Self::theorem_batch_size(epsilon, delta, d, horizon, regularity),
            share_baseline: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} must lie in (0, 1]",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta {} must lie in (0, 1)",
                self.delta
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    /// Exact trajectory count for this configuration: one bootstrap rollout
    /// plus `2MHd` (fresh baselines) or `M(Hd + 1)` (shared baseline).
    pub fn planned_trajectories(&self, d: usize, horizon: usize) -> u64 {
        let m = self.batch_size;
        let hd = (horizon * d) as u64;
        if self.share_baseline {
            m * (hd + 1) + 1
        } else {
            2 * m * hd + 1
        }
    }
}

/// Raw estimator state: per-step estimates together with the batch means
/// they came from, so `θ̂_{h,i} = (R_{h,i} − R₀)/ρ_h` is auditable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub theta_hat: Vec<FeatureVector>,
    /// Inner radii `ρ_h` of the revealed per-step action sets.
    pub radii: Vec<f64>,
    /// `R₀` used for each `(h, i)` probe (identical entries when the
    /// baseline batch is shared).
    pub baseline_means: Vec<Vec<f64>>,
    /// `R_{h,i}` for each probe.
    pub probe_means: Vec<Vec<f64>>,
}

/// Outcome statistics of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexRunStats {
    pub trajectories_used: u64,
    pub estimate: ThetaEstimate,
    pub wall_time_s: f64,
}

/// Reveal the per-step action sets with a single zero-policy rollout.
///
/// Under the identical-sets assumption any trajectory exposes every step's
/// set; the rollout is counted against the trajectory budget.
pub fn bootstrap_radii<E: TrajectoryEnv>(
    env: &E,
    stream: &RngStream,
) -> Result<(Vec<f64>, Vec<ActionSet>)> {
    let obs = env.rollout(&Policy::Zero, stream)?;
    let radii = obs.inner_radii();
    Ok((radii, obs.action_sets))
}

/// Run the learner and return the greedy output policy with run statistics.
pub fn run<E: TrajectoryEnv>(
    env: &E,
    cfg: &ConvexBallRlConfig,
    stream: &RngStream,
) -> Result<(Policy, ConvexRunStats)> {
    cfg.validate()?;
    let start = Instant::now();
    let d = env.dim();
    let horizon = env.horizon();
    let m = cfg.batch_size as usize;

    let (radii, _sets) = bootstrap_radii(env, &stream.child("bootstrap"))?;
    let mut used: u64 = 1;

    let shared_baseline = if cfg.share_baseline {
        let stats = env.batch(&Policy::Zero, m, &stream.child("baseline-shared"))?;
        used += cfg.batch_size;
        Some(stats.mean_total_reward)
    } else {
        None
    };

    let mut theta_hat: Vec<FeatureVector> = Vec::with_capacity(horizon);
    let mut baseline_means = vec![vec![0.0; d]; horizon];
    let mut probe_means = vec![vec![0.0; d]; horizon];

    for h in 1..=horizon {
        let mut components = vec![0.0; d];
        for i in 0..d {
            let flat = ((h - 1) * d + i) as u64;
            let r0 = match shared_baseline {
                Some(r0) => r0,
                None => {
                    let stats = env.batch(
                        &Policy::Zero,
                        m,
                        &stream.child("baseline").child_index(flat),
                    )?;
                    used += cfg.batch_size;
                    stats.mean_total_reward
                }
            };
            let probe = Policy::BasisDirection {
                step: h,
                index: i,
                scale: radii[h - 1],
            };
            let stats = env.batch(&probe, m, &stream.child("probe").child_index(flat))?;
            used += cfg.batch_size;
            let r_hi = stats.mean_total_reward;
            components[i] = (r_hi - r0) / radii[h - 1];
            baseline_means[h - 1][i] = r0;
            probe_means[h - 1][i] = r_hi;
        }
        theta_hat.push(FeatureVector(components));
    }

    let estimate = ThetaEstimate {
        theta_hat: theta_hat.clone(),
        radii,
        baseline_means,
        probe_means,
    };
    debug_assert_eq!(used, cfg.planned_trajectories(d, horizon));
    Ok((
        Policy::GreedyTheta { thetas: theta_hat },
        ConvexRunStats {
            trajectories_used: used,
            estimate,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    ))
}
