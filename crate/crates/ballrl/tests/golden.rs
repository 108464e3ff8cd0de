//! Golden-file tests: one per documented file format. Regenerate the
//! goldens with `UPDATE_GOLDENS=1 cargo test --test golden` after an
//! intentional format change.

mod common;

use std::path::{Path, PathBuf};

use ballrl::envgen;
use ballrl::harness::{self, GeneratorFile};
use ballrl::mdp::LinearQStarMdp;
use common::normalize_records;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn assert_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDENS").is_some() {
        std::fs::write(&path, actual).expect("write golden");
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden {name}; run with UPDATE_GOLDENS=1"));
    assert_eq!(actual, expected, "{name} drifted from its golden copy");
}

#[test]
fn golden_instance_file() {
    let file: GeneratorFile =
        harness::load_json(&golden_dir().join("generator.config.json")).expect("config parses");
    let mdp = envgen::generate_instance(&file.generator).expect("generation succeeds");
    let body = serde_json::to_string_pretty(&mdp.to_file()).unwrap() + "\n";
    assert_golden("instance.golden.json", &body);

    // The golden file itself loads and round-trips bit-exactly.
    let reloaded = LinearQStarMdp::load(&golden_dir().join("instance.golden.json")).unwrap();
    let round = serde_json::to_string_pretty(&reloaded.to_file()).unwrap() + "\n";
    assert_eq!(body, round);
}

#[test]
fn golden_run_records_and_summary() {
    let cfg: harness::ExperimentConfig =
        harness::load_json(&golden_dir().join("experiment.config.json")).expect("config parses");
    let outcome = harness::run_experiment(&cfg).expect("run succeeds");
    let records = normalize_records(&harness::records_to_jsonl(&outcome.records));
    assert_golden("records.golden.jsonl", &records);
    let summary = harness::summary_csv(std::slice::from_ref(&outcome.summary));
    assert_golden("summary.golden.csv", &summary);
}

#[test]
fn golden_sweep_csv() {
    let cfg: harness::SweepConfig =
        harness::load_json(&golden_dir().join("sweep.config.json")).expect("config parses");
    let rows = harness::run_sweep(&cfg).expect("sweep succeeds");
    assert_golden("sweep.golden.csv", &harness::sweep_csv(&rows));
}

#[test]
fn golden_report_csvs() {
    // Rebuild the records (deterministic, identical to the records golden)
    // so this test does not depend on test execution order.
    let cfg: harness::ExperimentConfig =
        harness::load_json(&golden_dir().join("experiment.config.json")).expect("config parses");
    let outcome = harness::run_experiment(&cfg).expect("run succeeds");
    let jsonl = normalize_records(&harness::records_to_jsonl(&outcome.records));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    std::fs::write(&path, &jsonl).unwrap();
    let (records, warnings) = harness::read_records(&path).expect("records parse");
    assert!(warnings.is_empty());
    let report = harness::build_report(&records, &warnings);
    assert_golden("report_gap.golden.csv", &report.gap_vs_trajectories_csv);
    assert_golden("report_batch.golden.csv", &report.success_vs_batch_csv);
}
