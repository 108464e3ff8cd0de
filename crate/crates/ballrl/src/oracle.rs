//! Ground-truth computations on fully-known instances.
//!
//! Everything here is exact enumeration over the finite state sets; no
//! sampling enters any expectation. The optimal values come in two
//! independent routes, the closed form and a backward-induction dynamic
//! program over probe actions, and the two must agree; otherwise the
//! instance itself is broken.

use crate::error::{Error, Result};
use crate::geometry::FeatureVector;
use crate::mdp::{LinearQStarMdp, Policy, StateRef};
use crate::sim::{RngStream, MEMBERSHIP_TOL};

/// Agreement tolerance between the closed-form and DP value routes.
pub const VALUE_AGREEMENT_TOL: f64 = 1e-9;

/// Number of random in-set probe actions per state, on top of the analytic
/// support maximizer and the zero action.
const RANDOM_PROBES: usize = 32;

/// Optimal state values along both routes: `closed[h-1][i]` is
/// `⟨φ(s),θ*_h⟩ + max_a ⟨a,θ*_h⟩`, `dp[h-1][i]` is backward induction on the
/// backfilled rewards over a probe-action grid.
#[derive(Clone, Debug)]
pub struct ValueTable {
    pub closed: Vec<Vec<f64>>,
    pub dp: Vec<Vec<f64>>,
    pub max_diff: f64,
}

impl ValueTable {
    /// `E_μ[V*_1(s_1)]` from the closed-form route.
    pub fn initial_value(&self, mdp: &LinearQStarMdp) -> f64 {
        mdp.mu()
            .iter()
            .zip(&self.closed[0])
            .map(|(p, v)| p * v)
            .sum()
    }
}

fn probe_actions(mdp: &LinearQStarMdp, r: StateRef) -> Vec<FeatureVector> {
    let state = mdp.state(r);
    let theta = mdp.theta(r.step);
    let mut probes = Vec::with_capacity(RANDOM_PROBES + 2);
    probes.push(state.action_set.support_argmax(theta).expect("dims match"));
    probes.push(FeatureVector::zeros(mdp.dim()));
    let mut rng = RngStream::from_seed(0x6f72_6163)
        .child("probes")
        .child_index(r.step as u64)
        .child_index(r.index as u64)
        .rng();
    for _ in 0..RANDOM_PROBES {
        probes.push(state.action_set.sample_interior(&mut rng));
    }
    probes
}

/// Optimal values by closed form and by an independent dynamic program.
///
/// The DP maximizes `r(s,a) + Σ_{s'} P(s'|s,a) V_{h+1}(s')` over the probe
/// actions; disagreement beyond [`VALUE_AGREEMENT_TOL`] signals a defective
/// instance (or generator bug) and is returned as an error.
pub fn optimal_values(mdp: &LinearQStarMdp) -> Result<ValueTable> {
    let horizon = mdp.horizon();
    let closed: Vec<Vec<f64>> = (1..=horizon)
        .map(|step| {
            (0..mdp.states_at(step).len())
                .map(|index| mdp.closed_value(StateRef { step, index }))
                .collect()
        })
        .collect();

    let mut dp: Vec<Vec<f64>> = vec![Vec::new(); horizon];
    let mut probs = Vec::new();
    for step in (1..=horizon).rev() {
        let n = mdp.states_at(step).len();
        let mut level = Vec::with_capacity(n);
        for index in 0..n {
            let r = StateRef { step, index };
            let mut best = f64::NEG_INFINITY;
            for action in probe_actions(mdp, r) {
                let mut q = mdp.mean_reward(r, &action);
                if step < horizon {
                    mdp.transition_probs_into(r, &action, &mut probs);
                    q += probs
                        .iter()
                        .zip(&dp[step]) // dp[step] holds step+1 values
                        .map(|(p, v)| p * v)
                        .sum::<f64>();
                }
                best = best.max(q);
            }
            level.push(best);
        }
        dp[step - 1] = level;
    }

    let mut max_diff = 0.0_f64;
    for step in 1..=horizon {
        for index in 0..mdp.states_at(step).len() {
            let c = closed[step - 1][index];
            let v = dp[step - 1][index];
            let diff = (c - v).abs();
            if diff > VALUE_AGREEMENT_TOL {
                return Err(Error::OracleDisagreement {
                    state: mdp.state(StateRef { step, index }).id.clone(),
                    closed: c,
                    dp: v,
                    diff,
                });
            }
            max_diff = max_diff.max(diff);
        }
    }
    Ok(ValueTable {
        closed,
        dp,
        max_diff,
    })
}

/// Exact `V^π` averaged over the initial distribution, by backward induction
/// at the policy's actions. Errors if the policy ever leaves an action set.
pub fn policy_value(mdp: &LinearQStarMdp, policy: &Policy) -> Result<f64> {
    let horizon = mdp.horizon();
    let mut next: Vec<f64> = Vec::new();
    let mut probs = Vec::new();
    for step in (1..=horizon).rev() {
        let n = mdp.states_at(step).len();
        let mut level = Vec::with_capacity(n);
        for index in 0..n {
            let r = StateRef { step, index };
            let state = mdp.state(r);
            let action = policy.action(state)?;
            if !state.action_set.contains_tol(&action, MEMBERSHIP_TOL)? {
                return Err(Error::MembershipViolation {
                    state: state.id.clone(),
                    action: action.0.clone(),
                });
            }
            let mut v = mdp.mean_reward(r, &action);
            if step < horizon {
                mdp.transition_probs_into(r, &action, &mut probs);
                v += probs.iter().zip(&next).map(|(p, w)| p * w).sum::<f64>();
            }
            level.push(v);
        }
        next = level;
    }
    Ok(mdp.mu().iter().zip(&next).map(|(p, v)| p * v).sum())
}

/// Exact per-policy expectations over the trajectory distribution, computed
/// by forward propagation of the state distribution.
#[derive(Clone, Debug)]
pub struct PolicyExpectations {
    /// `E_μ[V^π] = E^π[Σ_h r(s_h, a_h)]`.
    pub mean_reward_sum: f64,
    /// `E^π[⟨φ(s_1), θ*_1⟩]` (policy-independent).
    pub feature1_dot_theta: f64,
    /// `E^π[Σ_h ⟨a_h, θ*_h⟩]`.
    pub action_dot_theta_sum: f64,
    /// `E^π[Σ_{h=2}^{H} ρ(s_h)]`.
    pub radius_tail_sum: f64,
    /// `E^π[ρ(s_h)]` for each step.
    pub per_step_radius: Vec<f64>,
}

pub fn policy_expectations(mdp: &LinearQStarMdp, policy: &Policy) -> Result<PolicyExpectations> {
    let horizon = mdp.horizon();
    let mut dist: Vec<f64> = mdp.mu().to_vec();
    let mut out = PolicyExpectations {
        mean_reward_sum: 0.0,
        feature1_dot_theta: 0.0,
        action_dot_theta_sum: 0.0,
        radius_tail_sum: 0.0,
        per_step_radius: vec![0.0; horizon],
    };
    let mut probs = Vec::new();
    for step in 1..=horizon {
        let mut next = vec![0.0; if step < horizon { mdp.states_at(step + 1).len() } else { 0 }];
        for (index, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let r = StateRef { step, index };
            let state = mdp.state(r);
            let action = policy.action(state)?;
            if !state.action_set.contains_tol(&action, MEMBERSHIP_TOL)? {
                return Err(Error::MembershipViolation {
                    state: state.id.clone(),
                    action: action.0.clone(),
                });
            }
            let theta = mdp.theta(step);
            if step == 1 {
                out.feature1_dot_theta += p * state.phi.dot(theta);
            }
            out.mean_reward_sum += p * mdp.mean_reward(r, &action);
            out.action_dot_theta_sum += p * action.dot(theta);
            let rho = state.action_set.inner_radius();
            out.per_step_radius[step - 1] += p * rho;
            if step >= 2 {
                out.radius_tail_sum += p * rho;
            }
            if step < horizon {
                mdp.transition_probs_into(r, &action, &mut probs);
                for (q, np) in probs.iter().zip(next.iter_mut()) {
                    *np += p * q;
                }
            }
        }
        if step < horizon {
            dist = next;
        }
    }
    Ok(out)
}

/// Worst Bellman residual `|Q*(s,a) − r(s,a) − Σ P V*(s')|` over all states,
/// probing the analytic maximizer, the zero action, and 32 random in-set
/// actions per state.
pub fn bellman_residual(mdp: &LinearQStarMdp) -> f64 {
    let mut worst = 0.0_f64;
    let mut probs = Vec::new();
    for r in mdp.state_refs() {
        for action in probe_actions(mdp, r) {
            let mut rhs = mdp.mean_reward(r, &action);
            if r.step < mdp.horizon() {
                mdp.transition_probs_into(r, &action, &mut probs);
                rhs += probs
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        p * mdp.closed_value(StateRef {
                            step: r.step + 1,
                            index: j,
                        })
                    })
                    .sum::<f64>();
            }
            worst = worst.max((mdp.q_star(r, &action) - rhs).abs());
        }
    }
    worst
}

/// `E_μ[V*_1] − V^π(μ)`; nonnegative up to rounding for any in-set policy.
pub fn epsilon_gap(mdp: &LinearQStarMdp, policy: &Policy) -> Result<f64> {
    let vstar: f64 = mdp
        .mu()
        .iter()
        .enumerate()
        .map(|(index, p)| p * mdp.closed_value(StateRef { step: 1, index }))
        .sum();
    Ok(vstar - policy_value(mdp, policy)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ActionSet, FeatureVector};
    use crate::mdp::{RewardNoise, StateSpec, TransitionKernel};
    use crate::sim::{Simulator, TrajectoryEnv};

    fn h1_instance() -> LinearQStarMdp {
        // φ(s) = (0.1, 0.2), θ* = (0.6, 0.8), ball ρ = 0.3.
        LinearQStarMdp::new(
            2,
            1,
            vec![vec![StateSpec {
                id: "s".into(),
                step: 1,
                phi: FeatureVector(vec![0.1, 0.2]),
                action_set: ActionSet::Ball {
                    dim: 2,
                    radius: 0.3,
                },
            }]],
            TransitionKernel::ActionIndependent { rows: vec![] },
            vec![FeatureVector(vec![0.6, 0.8])],
            vec![1.0],
            RewardNoise::None,
            None,
            true,
        )
        .unwrap()
    }

    #[test]
    fn closed_form_value_single_step() {
        let mdp = h1_instance();
        let table = optimal_values(&mdp).unwrap();
        assert!((table.closed[0][0] - 0.52).abs() < 1e-12);
        assert!((table.initial_value(&mdp) - 0.52).abs() < 1e-12);
        assert!(table.max_diff <= VALUE_AGREEMENT_TOL);
    }

    #[test]
    fn zero_theta_means_zero_values() {
        let mut mdp = h1_instance();
        mdp = LinearQStarMdp::new(
            2,
            1,
            vec![mdp.states_at(1).to_vec()],
            TransitionKernel::ActionIndependent { rows: vec![] },
            vec![FeatureVector::zeros(2)],
            vec![1.0],
            RewardNoise::None,
            None,
            true,
        )
        .unwrap();
        let table = optimal_values(&mdp).unwrap();
        assert_eq!(table.closed[0][0], 0.0);
    }

    #[test]
    fn zero_policy_value_single_step() {
        let mdp = h1_instance();
        let v = policy_value(&mdp, &Policy::Zero).unwrap();
        assert!((v - 0.22).abs() < 1e-12);
    }

    #[test]
    fn greedy_on_truth_is_optimal() {
        let mdp = crate::mdp::tests::small_instance();
        let greedy = Policy::GreedyTheta {
            thetas: mdp.thetas().to_vec(),
        };
        let gap = epsilon_gap(&mdp, &greedy).unwrap();
        assert!(gap.abs() <= 1e-9, "gap {gap}");
        let table = optimal_values(&mdp).unwrap();
        let v = policy_value(&mdp, &greedy).unwrap();
        assert!((v - table.initial_value(&mdp)).abs() <= 1e-12);
    }

    #[test]
    fn zero_policy_gap_forgoes_support_value() {
        // H = 1, φ = 0, ρ = 0.3, ‖θ*‖ = 1 → gap exactly 0.3.
        let mdp = LinearQStarMdp::new(
            2,
            1,
            vec![vec![StateSpec {
                id: "s".into(),
                step: 1,
                phi: FeatureVector::zeros(2),
                action_set: ActionSet::Ball {
                    dim: 2,
                    radius: 0.3,
                },
            }]],
            TransitionKernel::ActionIndependent { rows: vec![] },
            vec![FeatureVector(vec![0.6, 0.8])],
            vec![1.0],
            RewardNoise::None,
            Some(1.0),
            true,
        )
        .unwrap();
        let gap = epsilon_gap(&mdp, &Policy::Zero).unwrap();
        assert!((gap - 0.3).abs() < 1e-12);
    }

    #[test]
    fn residual_zero_on_backfilled_instance_and_visible_after_fault() {
        let mdp = crate::mdp::tests::small_instance();
        assert!(bellman_residual(&mdp) <= 1e-12);
        let broken = mdp.with_reward_bias(StateRef { step: 1, index: 0 }, 0.01);
        let res = bellman_residual(&broken);
        assert!(res >= 0.009, "residual {res}");
    }

    #[test]
    fn expectations_match_backward_induction() {
        let mdp = crate::mdp::tests::small_instance();
        for policy in [
            Policy::Zero,
            Policy::BasisDirection {
                step: 1,
                index: 0,
                scale: 0.2,
            },
            Policy::GreedyTheta {
                thetas: mdp.thetas().to_vec(),
            },
        ] {
            let v = policy_value(&mdp, &policy).unwrap();
            let e = policy_expectations(&mdp, &policy).unwrap();
            assert!((v - e.mean_reward_sum).abs() < 1e-12, "{policy:?}");
        }
    }

    #[test]
    fn value_routes_agree_on_random_instances() {
        for seed in 0..5u64 {
            let cfg = crate::envgen::GeneratorConfig {
                d: 2,
                horizon: 3,
                states_per_step: vec![2, 3, 2],
                action_set_family: crate::envgen::ActionSetFamily::Ball,
                radius_range: (0.03, 0.1),
                kernel_family: crate::envgen::KernelFamily::ActionIndependent,
                radius_layout: crate::envgen::RadiusLayout::PerState,
                theta_target: Some(0.8),
                reward_noise_half_width: None,
                rng_seed: 600 + seed,
                max_rejections: 1000,
            };
            let mdp = crate::envgen::generate_instance(&cfg).unwrap();
            let table = optimal_values(&mdp).unwrap();
            assert!(table.max_diff <= 1e-9, "seed {seed}: {}", table.max_diff);
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact_policy_value() {
        let mdp = crate::mdp::tests::small_instance();
        let sim = Simulator::new(&mdp);
        let policy = Policy::BasisDirection {
            step: 1,
            index: 0,
            scale: 0.2,
        };
        let exact = policy_value(&mdp, &policy).unwrap();
        let m = 100_000u64;
        let stream = RngStream::from_seed(77).child("mc");
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..m {
            let obs = sim
                .rollout(&policy, &stream.child_index(i))
                .unwrap();
            sum += obs.total_reward;
            sumsq += obs.total_reward * obs.total_reward;
        }
        let mean = sum / m as f64;
        let var = (sumsq / m as f64 - mean * mean).max(0.0);
        let sigma = (var / m as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * sigma.max(1e-9),
            "mc {mean} vs exact {exact} (σ = {sigma})"
        );
    }
}
