//! Trajectory simulation under the trajectory-learning information model.
//!
//! Learning algorithms touch an environment only through [`TrajectoryEnv`]:
//! each episode reveals the visited states' action sets and one scalar total
//! reward, nothing else. Randomness comes from named, counter-split
//! [`RngStream`]s so every batch is bit-reproducible regardless of execution
//! order or worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::ActionSet;
use crate::mdp::{LinearQStarMdp, Policy, RewardNoise, StateRef};

/// Relative slack for runtime membership guards.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A splittable random stream. Children are derived by hashing, so the tree
/// of streams is fixed by the root seed and the labels/indices alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    key: [u8; 32],
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"ballrl-stream-root");
        hasher.update(seed.to_le_bytes());
        RngStream {
            key: hasher.finalize().into(),
        }
    }

    /// Named substream.
    pub fn child(&self, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update([0x01]);
        hasher.update(label.as_bytes());
        RngStream {
            key: hasher.finalize().into(),
        }
    }

    /// Counter-indexed substream.
    pub fn child_index(&self, index: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update([0x02]);
        hasher.update(index.to_le_bytes());
        RngStream {
            key: hasher.finalize().into(),
        }
    }

    /// A generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }
}

/// The information revealed by one episode: the ordered action sets along
/// the trajectory and the total reward. State identities and per-step
/// rewards are structurally absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryObservation {
    pub action_sets: Vec<ActionSet>,
    pub total_reward: f64,
}

impl TrajectoryObservation {
    /// Inner radii `ρ(s_1..s_H)` implied by the revealed sets.
    pub fn inner_radii(&self) -> Vec<f64> {
        self.action_sets.iter().map(|a| a.inner_radius()).collect()
    }

    /// `Σ_{h=2}^{H} ρ(s_h)`.
    pub fn radius_tail_sum(&self) -> f64 {
        self.action_sets
            .iter()
            .skip(1)
            .map(|a| a.inner_radius())
            .sum()
    }
}

/// Sample means over a batch of observations, accumulated in trajectory
/// order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub mean_total_reward: f64,
    /// Sample mean of `Σ_{h=2}^{H} ρ(s_h)`.
    pub mean_radius_tail: f64,
    pub per_step_mean_radius: Vec<f64>,
    pub count: usize,
}

impl BatchStats {
    pub fn from_observations(observations: &[TrajectoryObservation]) -> Result<Self> {
        let count = observations.len();
        if count == 0 {
            return Err(Error::InvalidCall("batch size must be at least 1".into()));
        }
        let horizon = observations[0].action_sets.len();
        let mut total = 0.0;
        let mut tail = 0.0;
        let mut per_step = vec![0.0; horizon];
        for obs in observations {
            total += obs.total_reward;
            tail += obs.radius_tail_sum();
            for (acc, set) in per_step.iter_mut().zip(&obs.action_sets) {
                *acc += set.inner_radius();
            }
        }
        let m = count as f64;
        for acc in per_step.iter_mut() {
            *acc /= m;
        }
        Ok(BatchStats {
            mean_total_reward: total / m,
            mean_radius_tail: tail / m,
            per_step_mean_radius: per_step,
            count,
        })
    }
}

/// The only channel through which learners interact with an environment.
pub trait TrajectoryEnv: Sync {
    fn dim(&self) -> usize;
    fn horizon(&self) -> usize;

    /// Run one episode under `policy`, drawing from `stream`. Two calls with
    /// the same stream return identical observations.
    fn rollout(&self, policy: &Policy, stream: &RngStream) -> Result<TrajectoryObservation>;

    /// `count` independent rollouts on indexed substreams of `stream`, with
    /// a fixed-order reduction into means.
    fn batch(&self, policy: &Policy, count: usize, stream: &RngStream) -> Result<BatchStats>;
}

/// Simulator over a fully-known instance.
pub struct Simulator<'a> {
    mdp: &'a LinearQStarMdp,
}

impl<'a> Simulator<'a> {
    pub fn new(mdp: &'a LinearQStarMdp) -> Self {
        Simulator { mdp }
    }

    pub fn mdp(&self) -> &LinearQStarMdp {
        self.mdp
    }
}

impl TrajectoryEnv for Simulator<'_> {
    fn dim(&self) -> usize {
        self.mdp.dim()
    }

    fn horizon(&self) -> usize {
        self.mdp.horizon()
    }

    fn rollout(&self, policy: &Policy, stream: &RngStream) -> Result<TrajectoryObservation> {
        let mdp = self.mdp;
        let horizon = mdp.horizon();
        let mut rng = stream.rng();
        let mut action_sets = Vec::with_capacity(horizon);
        let mut total = 0.0;

        let mut index = pick_from(mdp.mu(), rng.random::<f64>());
        for step in 1..=horizon {
            let r = StateRef { step, index };
            let state = mdp.state(r);
            let action = policy.action(state)?;
            if !state.action_set.contains_tol(&action, MEMBERSHIP_TOL)? {
                return Err(Error::MembershipViolation {
                    state: state.id.clone(),
                    action: action.0.clone(),
                });
            }
            action_sets.push(state.action_set.clone());
            total += mdp.mean_reward(r, &action);
            if step < horizon {
                index = mdp.sample_next(r, &action, rng.random::<f64>());
            }
        }

        // Observation noise: symmetric uniform, half-width shrunk so the
        // observed sum stays in [0,1] without introducing bias. A single
        // draw is consumed whether or not noise applies.
        let u = rng.random::<f64>();
        if let RewardNoise::BoundedUniform { half_width } = mdp.reward_noise() {
            let effective = half_width.min(total).min(1.0 - total).max(0.0);
            total += effective * (2.0 * u - 1.0);
        }

        Ok(TrajectoryObservation {
            action_sets,
            total_reward: total,
        })
    }

    fn batch(&self, policy: &Policy, count: usize, stream: &RngStream) -> Result<BatchStats> {
        if count == 0 {
            return Err(Error::InvalidCall("batch size must be at least 1".into()));
        }
        // Workers fill a pre-indexed buffer; the reduction is sequential, so
        // the result does not depend on the degree of parallelism.
        let observations: Vec<TrajectoryObservation> = (0..count as u64)
            .into_par_iter()
            .map(|i| self.rollout(policy, &stream.child_index(i)))
            .collect::<Result<_>>()?;
        BatchStats::from_observations(&observations)
    }
}

fn pick_from(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    probs.len() - 1
}
