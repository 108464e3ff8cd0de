//! The trajectory-learning channel: what an episode reveals, seeded
//! reproducibility, and batch means concentrating around exact policy
//! values.
//!
//! ```sh
//! cargo run --example trajectory_batches
//! ```

use ballrl::envgen::{
    self, ActionSetFamily, GeneratorConfig, KernelFamily, RadiusLayout,
};
use ballrl::mdp::Policy;
use ballrl::oracle;
use ballrl::sim::{RngStream, Simulator, TrajectoryEnv};

fn main() -> ballrl::Result<()> {
    let cfg = GeneratorConfig {
        d: 2,
        horizon: 3,
        states_per_step: vec![2, 3, 2],
        action_set_family: ActionSetFamily::Ball,
        radius_range: (0.04, 0.1),
        kernel_family: KernelFamily::ActionIndependent,
        radius_layout: RadiusLayout::PerState,
        theta_target: Some(0.75),
        reward_noise_half_width: Some(0.05),
        rng_seed: 12,
        max_rejections: 1000,
    };
    let mdp = envgen::generate_instance(&cfg)?;
    let sim = Simulator::new(&mdp);
    let stream = RngStream::from_seed(99);

    // One episode reveals the visited action sets and one total reward.
    let obs = sim.rollout(&Policy::Zero, &stream.child("demo"))?;
    println!("one zero-policy episode:");
    for (h, set) in obs.action_sets.iter().enumerate() {
        println!("  step {}: revealed {set:?}", h + 1);
    }
    println!("  total reward: {:.6}", obs.total_reward);
    let replay = sim.rollout(&Policy::Zero, &stream.child("demo"))?;
    println!("  replay on the same stream is identical: {}", obs == replay);

    // Batch means vs the exact oracle value, with the concentration
    // envelope sqrt(2 log(1/delta') / M).
    let policy = Policy::GreedyTheta {
        thetas: mdp.thetas().to_vec(),
    };
    let exact = oracle::policy_value(&mdp, &policy)?;
    let delta_prime = 0.01_f64;
    println!("\nexact V^pi = {exact:.6}; batch means and Hoeffding envelopes:");
    for m in [64usize, 512, 4096, 32_768] {
        let stats = sim.batch(&policy, m, &stream.child("batch").child_index(m as u64))?;
        let envelope = (2.0 * (1.0 / delta_prime).ln() / m as f64).sqrt();
        println!(
            "  M = {m:>6}: mean = {:.6}, |mean − V^pi| = {:.2e}, envelope = {:.2e}",
            stats.mean_total_reward,
            (stats.mean_total_reward - exact).abs(),
            envelope
        );
    }

    // Per-step mean radii drive the grid learner's estimates.
    let stats = sim.batch(&policy, 4096, &stream.child("radii"))?;
    println!(
        "\nper-step mean radii under the greedy policy: {:?}",
        stats.per_step_mean_radius
    );
    println!("mean radius tail sum: {:.6}", stats.mean_radius_tail);
    Ok(())
}
