//! Command-line front end. All logic lives in the library; this binary
//! parses arguments, routes to `ballrl::harness`, and maps errors to exit
//! codes (0 ok, 1 configuration, 2 certification, 3 internal invariant).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use ballrl::envgen;
use ballrl::harness::{self, GeneratorFile};
use ballrl::mdp::LinearQStarMdp;
use ballrl::Error;

#[derive(Parser)]
#[command(name = "ballrl", version, about = "Experiment harness for ball-structured linear-Q* reinforcement learning")]
struct Cli {
    /// Worker threads for batch simulation (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a certified instance file from a generator config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Output instance path (default: <config stem>.instance.json in the
        /// output directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-certify an instance file and print the per-assumption report.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = envgen::CERT_TOL)]
        tol: f64,
    },
    /// Run an experiment: one JSON-lines record per seed plus a CSV summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Cross-product sweep over {d, horizon, epsilon, batch size}.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a records file into a table and plot-ready CSVs.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("thread pool set before first use");
    }
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn dispatch(command: Command) -> ballrl::Result<()> {
    match command {
        Command::Generate { config, out } => {
            let file: GeneratorFile = harness::load_json(&config)?;
            if file.format_version != harness::CONFIG_FORMAT_VERSION {
                return Err(Error::InvalidConfig(format!(
                    "unsupported config format version {}",
                    file.format_version
                )));
            }
            let mdp = envgen::generate_instance(&file.generator)?;
            let report = envgen::verify_assumptions(&mdp, envgen::CERT_TOL);
            if !report.pass() {
                return Err(Error::CertificationFailed(
                    report.first_failure().unwrap_or_default(),
                ));
            }
            let out = harness::resolve_output(
                out.as_deref(),
                &format!("{}.instance.json", stem_of(&config)),
            );
            mdp.save(&out)?;
            println!("{report}");
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Verify { instance, tol } => {
            let mdp = LinearQStarMdp::load(&instance)?;
            let report = envgen::verify_assumptions(&mdp, tol);
            println!("{report}");
            if report.pass() {
                Ok(())
            } else {
                Err(Error::CertificationFailed(
                    report.first_failure().unwrap_or_default(),
                ))
            }
        }
        Command::Run {
            config,
            records,
            summary,
        } => {
            let cfg: harness::ExperimentConfig = harness::load_json(&config)?;
            let outcome = harness::run_experiment(&cfg)?;
            let stem = cfg.output.clone().unwrap_or_else(|| stem_of(&config));
            let records_path = harness::resolve_output(
                records.as_deref(),
                &format!("{stem}.records.jsonl"),
            );
            let summary_path =
                harness::resolve_output(summary.as_deref(), &format!("{stem}.summary.csv"));
            harness::write_text(&records_path, &harness::records_to_jsonl(&outcome.records))?;
            harness::write_text(
                &summary_path,
                &harness::summary_csv(std::slice::from_ref(&outcome.summary)),
            )?;
            let s = &outcome.summary;
            println!(
                "config {}: {} runs, success rate {}/{} = {:.3}, mean gap {:.6}, mean trajectories {:.1}",
                outcome.config_hash,
                s.runs,
                s.successes,
                s.runs,
                s.success_rate,
                s.mean_gap,
                s.mean_trajectories
            );
            println!("wrote {}", records_path.display());
            println!("wrote {}", summary_path.display());
            Ok(())
        }
        Command::Sweep { config, out } => {
            let cfg: harness::SweepConfig = harness::load_json(&config)?;
            let rows = harness::run_sweep(&cfg)?;
            let out = harness::resolve_output(
                out.as_deref(),
                &format!("{}.sweep.csv", stem_of(&config)),
            );
            harness::write_text(&out, &harness::sweep_csv(&rows))?;
            println!("{} sweep rows", rows.len());
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Report { records, out_dir } => {
            let (parsed, warnings) = harness::read_records(&records)?;
            let report = harness::build_report(&parsed, &warnings);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let dir = harness::resolve_output(out_dir.as_deref(), "report");
            harness::write_text(&dir.join("gap_vs_trajectories.csv"), &report.gap_vs_trajectories_csv)?;
            harness::write_text(&dir.join("success_vs_batch.csv"), &report.success_vs_batch_csv)?;
            print!("{}", report.text);
            println!("wrote {}", dir.join("gap_vs_trajectories.csv").display());
            println!("wrote {}", dir.join("success_vs_batch.csv").display());
            Ok(())
        }
    }
}
