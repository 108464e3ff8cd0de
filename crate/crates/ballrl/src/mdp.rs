//! Finite-horizon MDP instances with linear optimal action values.
//!
//! An instance is fully specified by features, action sets, a transition
//! kernel, and per-step parameter vectors `θ*_h`; the mean reward is *derived*
//! by inverting the Bellman equation so that `Q*_h(s,a) = ⟨φ(s)+a, θ*_h⟩`
//! holds identically:
//!
//! ```text
//! r(s,a) = ⟨φ(s)+a, θ*_h⟩ − Σ_{s'} P(s'|s,a) · V*_{h+1}(s'),
//! V*_h(s) = ⟨φ(s), θ*_h⟩ + max_{a ∈ A(s)} ⟨a, θ*_h⟩.
//! ```
//!
//! Instance files never store rewards; they round-trip the generating data
//! bit-exactly and rewards are re-derived on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ActionSet, FeatureVector};

/// Position of a state: `step` is 1-based, `index` is the offset within the
/// step's state list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateRef {
    pub step: usize,
    pub index: usize,
}

impl std::fmt::Display for StateRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "h{}#{}", self.step, self.index)
    }
}

/// One state: label, step, features, and its action set.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpec {
    pub id: String,
    pub step: usize,
    pub phi: FeatureVector,
    pub action_set: ActionSet,
}

/// Per-edge parameters of a softmax-affine transition row:
/// `P(s'|s,a) ∝ exp(⟨a, weight⟩ + bias)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftmaxEdge {
    pub weight: FeatureVector,
    pub bias: f64,
}

/// Transition model. Rows are indexed `[h-1][state][next_state]` for steps
/// `1..H-1`; step `H` has no transitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TransitionKernel {
    /// Per state, a fixed distribution over next-step states.
    ActionIndependent { rows: Vec<Vec<Vec<f64>>> },
    /// Per state, softmax-affine in the action.
    SoftmaxAffine { rows: Vec<Vec<Vec<SoftmaxEdge>>> },
}

impl TransitionKernel {
    pub fn is_action_independent(&self) -> bool {
        matches!(self, TransitionKernel::ActionIndependent { .. })
    }
}

/// Observation noise on the episode's total reward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardNoise {
    None,
    /// Symmetric uniform noise; the effective half-width shrinks near the
    /// ends of `[0,1]` so the observed sum stays in range without bias.
    BoundedUniform { half_width: f64 },
}

/// Deterministic policy with structured representations.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    /// Play the zero action everywhere.
    Zero,
    /// Play `scale · e_index` at the given step (index zero-based), zero
    /// elsewhere.
    BasisDirection {
        step: usize,
        index: usize,
        scale: f64,
    },
    /// Play the support maximizer of the queried state's action set against
    /// the step's parameter estimate.
    GreedyTheta { thetas: Vec<FeatureVector> },
    /// Follow `prefix` before `cut_step`, play the tail at `cut_step`, zero
    /// afterwards.
    Hierarchical {
        prefix: Box<Policy>,
        cut_step: usize,
        tail: HierarchicalTail,
    },
}

/// Behavior of a hierarchical policy at its cut step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HierarchicalTail {
    Zero,
    /// Play `ρ(s) · e_index` where `ρ(s)` is the inner radius of the visited
    /// state's action set (index zero-based).
    Basis { index: usize },
}

impl Policy {
    /// The action this policy takes at `state`.
    pub fn action(&self, state: &StateSpec) -> Result<FeatureVector> {
        let d = state.phi.dim();
        match self {
            Policy::Zero => Ok(FeatureVector::zeros(d)),
            Policy::BasisDirection { step, index, scale } => {
                if state.step == *step {
                    Ok(FeatureVector::basis(d, *index, *scale))
                } else {
                    Ok(FeatureVector::zeros(d))
                }
            }
            Policy::GreedyTheta { thetas } => {
                let theta = thetas.get(state.step - 1).ok_or(Error::InvalidCall(format!(
                    "greedy policy has no parameter for step {}",
                    state.step
                )))?;
                state.action_set.support_argmax(theta)
            }
            Policy::Hierarchical {
                prefix,
                cut_step,
                tail,
            } => {
                if state.step < *cut_step {
                    prefix.action(state)
                } else if state.step == *cut_step {
                    match tail {
                        HierarchicalTail::Zero => Ok(FeatureVector::zeros(d)),
                        HierarchicalTail::Basis { index } => Ok(FeatureVector::basis(
                            d,
                            *index,
                            state.action_set.inner_radius(),
                        )),
                    }
                } else {
                    Ok(FeatureVector::zeros(d))
                }
            }
        }
    }
}

/// A complete environment with linear optimal action values.
#[derive(Clone, Debug)]
pub struct LinearQStarMdp {
    d: usize,
    horizon: usize,
    states: Vec<Vec<StateSpec>>,
    kernel: TransitionKernel,
    theta_star: Vec<FeatureVector>,
    mu: Vec<f64>,
    reward_noise: RewardNoise,
    theta_norm: Option<f64>,
    identical_sets: bool,
    /// Closed-form optimal values per state, `[h-1][index]`.
    vstar: Vec<Vec<f64>>,
    /// Fixed continuation `Σ_{s'} P(s'|s)·V*_{h+1}(s')` per state for
    /// action-independent kernels; zeros at step H.
    cont: Option<Vec<Vec<f64>>>,
    /// Additive mean-reward perturbation per state; zero on real instances,
    /// used by tests to inject certification faults.
    reward_bias: Vec<Vec<f64>>,
}

const PROB_TOL: f64 = 1e-12;

impl LinearQStarMdp {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        horizon: usize,
        states: Vec<Vec<StateSpec>>,
        kernel: TransitionKernel,
        theta_star: Vec<FeatureVector>,
        mu: Vec<f64>,
        reward_noise: RewardNoise,
        theta_norm: Option<f64>,
        identical_sets: bool,
    ) -> Result<Self> {
        if d == 0 || horizon == 0 {
            return Err(Error::InvalidInstance(
                "dimension and horizon must be positive".into(),
            ));
        }
        if states.len() != horizon {
            return Err(Error::InvalidInstance(format!(
                "expected {horizon} state lists, got {}",
                states.len()
            )));
        }
        for (h0, level) in states.iter().enumerate() {
            if level.is_empty() {
                return Err(Error::InvalidInstance(format!(
                    "step {} has no states",
                    h0 + 1
                )));
            }
            for s in level {
                if s.step != h0 + 1 {
                    return Err(Error::InvalidInstance(format!(
                        "state {} carries step {} but sits at step {}",
                        s.id,
                        s.step,
                        h0 + 1
                    )));
                }
                if s.phi.dim() != d || !s.phi.is_finite() {
                    return Err(Error::InvalidInstance(format!(
                        "state {} has a malformed feature vector",
                        s.id
                    )));
                }
                s.action_set.validate()?;
                if s.action_set.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: s.action_set.dim(),
                    });
                }
            }
        }
        if theta_star.len() != horizon
            || theta_star.iter().any(|t| t.dim() != d || !t.is_finite())
        {
            return Err(Error::InvalidInstance(
                "theta_star must hold one finite d-vector per step".into(),
            ));
        }
        if mu.len() != states[0].len()
            || mu.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (mu.iter().sum::<f64>() - 1.0).abs() > PROB_TOL
        {
            return Err(Error::InvalidInstance(
                "mu must be a probability vector over step-1 states".into(),
            ));
        }
        validate_kernel(&kernel, &states, d)?;
        if let RewardNoise::BoundedUniform { half_width } = reward_noise {
            if !(half_width.is_finite() && half_width >= 0.0) {
                return Err(Error::InvalidInstance(
                    "noise half-width must be finite and nonnegative".into(),
                ));
            }
        }

        // Closed-form optimal values, then fixed continuations where the
        // kernel permits.
        let vstar: Vec<Vec<f64>> = states
            .iter()
            .enumerate()
            .map(|(h0, level)| {
                level
                    .iter()
                    .map(|s| {
                        s.phi.dot(&theta_star[h0])
                            + s.action_set
                                .support_value(&theta_star[h0])
                                .expect("dims validated")
                    })
                    .collect()
            })
            .collect();
        let cont = match &kernel {
            TransitionKernel::ActionIndependent { rows } => {
                let mut table: Vec<Vec<f64>> = Vec::with_capacity(horizon);
                for h0 in 0..horizon {
                    if h0 + 1 < horizon {
                        table.push(
                            rows[h0]
                                .iter()
                                .map(|row| {
                                    row.iter()
                                        .zip(&vstar[h0 + 1])
                                        .map(|(p, v)| p * v)
                                        .sum()
                                })
                                .collect(),
                        );
                    } else {
                        table.push(vec![0.0; states[h0].len()]);
                    }
                }
                Some(table)
            }
            TransitionKernel::SoftmaxAffine { .. } => None,
        };
        let reward_bias = states.iter().map(|l| vec![0.0; l.len()]).collect();

        Ok(LinearQStarMdp {
            d,
            horizon,
            states,
            kernel,
            theta_star,
            mu,
            reward_noise,
            theta_norm,
            identical_sets,
            vstar,
            cont,
            reward_bias,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states_at(&self, step: usize) -> &[StateSpec] {
        &self.states[step - 1]
    }

    pub fn state(&self, r: StateRef) -> &StateSpec {
        &self.states[r.step - 1][r.index]
    }

    pub fn state_refs(&self) -> impl Iterator<Item = StateRef> + '_ {
        (1..=self.horizon).flat_map(move |step| {
            (0..self.states[step - 1].len()).map(move |index| StateRef { step, index })
        })
    }

    pub fn theta(&self, step: usize) -> &FeatureVector {
        &self.theta_star[step - 1]
    }

    pub fn thetas(&self) -> &[FeatureVector] {
        &self.theta_star
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn reward_noise(&self) -> RewardNoise {
        self.reward_noise
    }

    /// Common parameter norm `Θ`, when the instance claims equal norms.
    pub fn theta_norm(&self) -> Option<f64> {
        self.theta_norm
    }

    /// Whether the instance claims identical action sets within each step.
    pub fn identical_sets(&self) -> bool {
        self.identical_sets
    }

    /// Claimed optimal action value `Q*_h(s,a) = ⟨φ(s)+a, θ*_h⟩`.
    pub fn q_star(&self, r: StateRef, action: &FeatureVector) -> f64 {
        let s = self.state(r);
        let theta = &self.theta_star[r.step - 1];
        s.phi.dot(theta) + action.dot(theta)
    }

    /// Claimed optimal value `V*_h(s)` in closed form.
    pub fn closed_value(&self, r: StateRef) -> f64 {
        self.vstar[r.step - 1][r.index]
    }

    /// Backfilled mean reward `r(s,a)`.
    pub fn mean_reward(&self, r: StateRef, action: &FeatureVector) -> f64 {
        let q = self.q_star(r, action);
        let bias = self.reward_bias[r.step - 1][r.index];
        if r.step == self.horizon {
            return q + bias;
        }
        let cont = match &self.kernel {
            TransitionKernel::ActionIndependent { .. } => {
                self.cont.as_ref().expect("built for AI kernels")[r.step - 1][r.index]
            }
            TransitionKernel::SoftmaxAffine { rows } => {
                let edges = &rows[r.step - 1][r.index];
                let next_values = &self.vstar[r.step];
                let zmax = edges
                    .iter()
                    .map(|e| e.weight.dot(action) + e.bias)
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                let mut weighted = 0.0;
                for (e, v) in edges.iter().zip(next_values) {
                    let w = (e.weight.dot(action) + e.bias - zmax).exp();
                    total += w;
                    weighted += w * v;
                }
                weighted / total
            }
        };
        q - cont + bias
    }

    /// Transition distribution over next-step states, written into `buf`.
    pub fn transition_probs_into(&self, r: StateRef, action: &FeatureVector, buf: &mut Vec<f64>) {
        buf.clear();
        if r.step == self.horizon {
            return;
        }
        match &self.kernel {
            TransitionKernel::ActionIndependent { rows } => {
                buf.extend_from_slice(&rows[r.step - 1][r.index]);
            }
            TransitionKernel::SoftmaxAffine { rows } => {
                let edges = &rows[r.step - 1][r.index];
                let zmax = edges
                    .iter()
                    .map(|e| e.weight.dot(action) + e.bias)
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for e in edges {
                    let w = (e.weight.dot(action) + e.bias - zmax).exp();
                    buf.push(w);
                    total += w;
                }
                for p in buf.iter_mut() {
                    *p /= total;
                }
            }
        }
    }

    /// Next-state index sampled with the uniform draw `u ∈ [0,1)`.
    pub fn sample_next(&self, r: StateRef, action: &FeatureVector, u: f64) -> usize {
        debug_assert!(r.step < self.horizon);
        match &self.kernel {
            TransitionKernel::ActionIndependent { rows } => {
                let row = &rows[r.step - 1][r.index];
                pick_index(row.iter().copied(), u, row.len())
            }
            TransitionKernel::SoftmaxAffine { rows } => {
                let edges = &rows[r.step - 1][r.index];
                let zmax = edges
                    .iter()
                    .map(|e| e.weight.dot(action) + e.bias)
                    .fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = edges
                    .iter()
                    .map(|e| (e.weight.dot(action) + e.bias - zmax).exp())
                    .sum();
                pick_index(
                    edges
                        .iter()
                        .map(|e| (e.weight.dot(action) + e.bias - zmax).exp() / total),
                    u,
                    edges.len(),
                )
            }
        }
    }

    /// Next-step state indices reachable from `r` under some action.
    pub fn successor_support(&self, r: StateRef) -> Vec<usize> {
        if r.step == self.horizon {
            return Vec::new();
        }
        match &self.kernel {
            TransitionKernel::ActionIndependent { rows } => rows[r.step - 1][r.index]
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(j, _)| j)
                .collect(),
            // Softmax rows put positive mass on every listed successor.
            TransitionKernel::SoftmaxAffine { rows } => {
                (0..rows[r.step - 1][r.index].len()).collect()
            }
        }
    }

    /// Test hook: add `delta` to the mean reward of every action at one state,
    /// which breaks the linear-Q* certificate by exactly `|delta|`.
    pub fn with_reward_bias(mut self, r: StateRef, delta: f64) -> Self {
        self.reward_bias[r.step - 1][r.index] += delta;
        self
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            format_version: INSTANCE_FORMAT_VERSION,
            d: self.d,
            horizon: self.horizon,
            states: self
                .states
                .iter()
                .map(|level| {
                    level
                        .iter()
                        .map(|s| StateFile {
                            id: s.id.clone(),
                            phi: s.phi.clone(),
                            action_set: s.action_set.clone(),
                        })
                        .collect()
                })
                .collect(),
            kernel: self.kernel.clone(),
            theta_star: self.theta_star.clone(),
            mu: self.mu.clone(),
            reward_noise: self.reward_noise,
            theta_norm: self.theta_norm,
            identical_sets: self.identical_sets,
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        if file.format_version != INSTANCE_FORMAT_VERSION {
            return Err(Error::InvalidInstance(format!(
                "unsupported instance format version {}",
                file.format_version
            )));
        }
        let states = file
            .states
            .into_iter()
            .enumerate()
            .map(|(h0, level)| {
                level
                    .into_iter()
                    .map(|s| StateSpec {
                        id: s.id,
                        step: h0 + 1,
                        phi: s.phi,
                        action_set: s.action_set,
                    })
                    .collect()
            })
            .collect();
        LinearQStarMdp::new(
            file.d,
            file.horizon,
            states,
            file.kernel,
            file.theta_star,
            file.mu,
            file.reward_noise,
            file.theta_norm,
            file.identical_sets,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(&self.to_file()).expect("serializable");
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
            }
        }
        std::fs::write(path, body + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: InstanceFile = serde_json::from_str(&body).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        LinearQStarMdp::from_file(file)
    }
}

fn pick_index(probs: impl Iterator<Item = f64>, u: f64, len: usize) -> usize {
    let mut acc = 0.0;
    for (j, p) in probs.enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    len - 1
}

fn validate_kernel(
    kernel: &TransitionKernel,
    states: &[Vec<StateSpec>],
    d: usize,
) -> Result<()> {
    let horizon = states.len();
    let expect_rows = horizon - 1;
    match kernel {
        TransitionKernel::ActionIndependent { rows } => {
            if rows.len() != expect_rows {
                return Err(Error::InvalidInstance(format!(
                    "kernel must have {expect_rows} steps, got {}",
                    rows.len()
                )));
            }
            for (h0, step_rows) in rows.iter().enumerate() {
                if step_rows.len() != states[h0].len() {
                    return Err(Error::InvalidInstance(format!(
                        "kernel step {} has {} rows for {} states",
                        h0 + 1,
                        step_rows.len(),
                        states[h0].len()
                    )));
                }
                for (i, row) in step_rows.iter().enumerate() {
                    if row.len() != states[h0 + 1].len() {
                        return Err(Error::InvalidInstance(format!(
                            "kernel row ({}, {i}) targets {} states, expected {}",
                            h0 + 1,
                            row.len(),
                            states[h0 + 1].len()
                        )));
                    }
                    if row.iter().any(|p| !p.is_finite() || *p < 0.0)
                        || (row.iter().sum::<f64>() - 1.0).abs() > PROB_TOL
                    {
                        return Err(Error::InvalidInstance(format!(
                            "kernel row ({}, {i}) is not a probability vector",
                            h0 + 1
                        )));
                    }
                }
            }
        }
        TransitionKernel::SoftmaxAffine { rows } => {
            if rows.len() != expect_rows {
                return Err(Error::InvalidInstance(format!(
                    "kernel must have {expect_rows} steps, got {}",
                    rows.len()
                )));
            }
            for (h0, step_rows) in rows.iter().enumerate() {
                if step_rows.len() != states[h0].len() {
                    return Err(Error::InvalidInstance(format!(
                        "kernel step {} has {} rows for {} states",
                        h0 + 1,
                        step_rows.len(),
                        states[h0].len()
                    )));
                }
                for (i, edges) in step_rows.iter().enumerate() {
                    if edges.len() != states[h0 + 1].len() {
                        return Err(Error::InvalidInstance(format!(
                            "kernel row ({}, {i}) targets {} states, expected {}",
                            h0 + 1,
                            edges.len(),
                            states[h0 + 1].len()
                        )));
                    }
                    for e in edges {
                        if e.weight.dim() != d || !e.weight.is_finite() || !e.bias.is_finite() {
                            return Err(Error::InvalidInstance(format!(
                                "kernel row ({}, {i}) has a malformed edge",
                                h0 + 1
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

/// On-disk instance document. Rewards are intentionally absent: they are
/// re-derived from `(states, kernel, theta_star)` on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format_version: u32,
    pub d: usize,
    pub horizon: usize,
    pub states: Vec<Vec<StateFile>>,
    pub kernel: TransitionKernel,
    pub theta_star: Vec<FeatureVector>,
    pub mu: Vec<f64>,
    pub reward_noise: RewardNoise,
    pub theta_norm: Option<f64>,
    pub identical_sets: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub id: String,
    pub phi: FeatureVector,
    pub action_set: ActionSet,
}
