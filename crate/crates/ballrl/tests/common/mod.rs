//! Helpers shared by the integration suites.
//!
//! Each integration test binary compiles this module separately and uses a
//! different subset of it.
#![allow(dead_code)]

use ballrl::envgen::{ActionSetFamily, GeneratorConfig, KernelFamily, RadiusLayout};
use ballrl::geometry::FeatureVector;
use ballrl::mdp::{HierarchicalTail, LinearQStarMdp, Policy};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Radius interval that keeps the feature budget comfortable for a family:
/// outer radii sum to at most ~0.4 along any path.
pub fn safe_radius_range(family: ActionSetFamily, d: usize, horizon: usize) -> (f64, f64) {
    let bfac = match family {
        ActionSetFamily::Ball => 1.0,
        ActionSetFamily::Box => (d as f64).sqrt(),
        ActionSetFamily::Ellipsoid => 1.6,
    };
    let hi = (0.4 / (horizon as f64 * bfac)).min(1.0 / horizon as f64);
    (hi / 3.0, hi)
}

#[allow(clippy::too_many_arguments)]
pub fn generator(
    d: usize,
    horizon: usize,
    states_per_step: Vec<usize>,
    family: ActionSetFamily,
    kernel: KernelFamily,
    layout: RadiusLayout,
    theta_target: Option<f64>,
    noise: Option<f64>,
    seed: u64,
) -> GeneratorConfig {
    GeneratorConfig {
        d,
        horizon,
        states_per_step,
        action_set_family: family,
        radius_range: safe_radius_range(family, d, horizon),
        kernel_family: kernel,
        radius_layout: layout,
        theta_target,
        reward_noise_half_width: noise,
        rng_seed: seed,
        max_rejections: 1000,
    }
}

/// Deterministic single-path generator: one state per step, no noise.
pub fn noiseless_single_path(d: usize, horizon: usize, seed: u64) -> GeneratorConfig {
    generator(
        d,
        horizon,
        vec![1; horizon],
        ActionSetFamily::Ball,
        KernelFamily::ActionIndependent,
        RadiusLayout::PerState,
        Some(0.8),
        None,
        seed,
    )
}

/// A greedy policy on random parameters with norms at most 1.
pub fn random_greedy(rng: &mut ChaCha8Rng, d: usize, horizon: usize) -> Policy {
    let thetas = (0..horizon)
        .map(|_| {
            let v = FeatureVector(
                (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            );
            let n = v.norm();
            let target = 0.2 + 0.8 * rng.random::<f64>();
            if n == 0.0 {
                v
            } else {
                v.scaled(target / n)
            }
        })
        .collect();
    Policy::GreedyTheta { thetas }
}

/// A policy from the {zero, basis, random-greedy, hierarchical} family.
pub fn policy_menu(rng: &mut ChaCha8Rng, mdp: &LinearQStarMdp, pick: usize) -> Policy {
    let d = mdp.dim();
    let horizon = mdp.horizon();
    match pick % 4 {
        0 => Policy::Zero,
        1 => {
            let step = 1 + rng.random_range(0..horizon);
            // Scale within the smallest inner radius at that step, so the
            // basis action is feasible at every state.
            let rho = mdp
                .states_at(step)
                .iter()
                .map(|s| s.action_set.inner_radius())
                .fold(f64::INFINITY, f64::min);
            Policy::BasisDirection {
                step,
                index: rng.random_range(0..d),
                scale: rho * rng.random::<f64>(),
            }
        }
        2 => random_greedy(rng, d, horizon),
        _ => Policy::Hierarchical {
            prefix: Box::new(random_greedy(rng, d, horizon)),
            cut_step: 1 + rng.random_range(0..horizon),
            tail: if rng.random::<f64>() < 0.5 {
                HierarchicalTail::Zero
            } else {
                HierarchicalTail::Basis {
                    index: rng.random_range(0..d),
                }
            },
        },
    }
}

/// Zero the wall-time field of every JSON-lines record, leaving everything
/// else byte-identical.
pub fn normalize_records(jsonl: &str) -> String {
    let mut out = String::new();
    for line in jsonl.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let mut v: serde_json::Value = serde_json::from_str(line).expect("record parses");
        v["wall_time_s"] = serde_json::Value::from(0.0);
        out.push_str(&serde_json::to_string(&v).expect("record serializes"));
        out.push('\n');
    }
    out
}
