//! The full harness pipeline in-process: experiment config → per-seed
//! records → summary → report. The `ballrl` binary drives the same
//! functions from the command line.
//!
//! ```sh
//! cargo run --release --example experiment_pipeline
//! ```

use ballrl::envgen::{
    ActionSetFamily, GeneratorConfig, KernelFamily, RadiusLayout,
};
use ballrl::harness::{
    self, AlgorithmConfig, BatchChoice, ConvexSettings, ExperimentConfig, InstanceSource,
};

fn main() -> ballrl::Result<()> {
    let cfg = ExperimentConfig {
        format_version: 1,
        instance: InstanceSource::Generate(GeneratorConfig {
            d: 2,
            horizon: 2,
            states_per_step: vec![1, 2],
            action_set_family: ActionSetFamily::Ball,
            radius_range: (0.05, 0.15),
            kernel_family: KernelFamily::ActionIndependent,
            radius_layout: RadiusLayout::PerStep,
            theta_target: Some(0.8),
            reward_noise_half_width: Some(0.05),
            rng_seed: 7,
            max_rejections: 1000,
        }),
        algorithm: AlgorithmConfig::Convex(ConvexSettings {
            epsilon: 0.2,
            delta: 0.1,
            batch_size: BatchChoice::Fixed(512),
            share_baseline: false,
        }),
        seeds: (1..=8).collect(),
        output: None,
    };

    let outcome = harness::run_experiment(&cfg)?;
    println!("instance certificate:\n{}", outcome.report);
    println!("\nrecords (JSON lines):");
    print!("{}", harness::records_to_jsonl(&outcome.records));
    println!("\nsummary CSV:");
    print!(
        "{}",
        harness::summary_csv(std::slice::from_ref(&outcome.summary))
    );

    let dir = std::env::temp_dir().join("ballrl-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let records_path = dir.join("pipeline.records.jsonl");
    harness::write_text(&records_path, &harness::records_to_jsonl(&outcome.records))?;
    let (records, warnings) = harness::read_records(&records_path)?;
    let report = harness::build_report(&records, &warnings);
    println!("\nreport:\n{}", report.text);
    println!("gap-vs-trajectories plot data:\n{}", report.gap_vs_trajectories_csv);
    Ok(())
}
