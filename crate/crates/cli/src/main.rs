use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dyad_core::config::ExperimentConfig;
use dyad_core::dyad::SnapshotPolicy;
use dyad_core::experiments::{
    compare_models, run_model, BootstrapConfig, ComparisonReport, MetricsSummary,
};
use dyad_core::output::{comparison_json, write_model, BundleWriter};
use dyad_core::validate;
use dyad_core::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 3;
const EXIT_OUTPUT: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "dyad",
    version,
    about = "Two active-inference agents on a ring, and the ensemble experiments over them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one model and write its result bundle.
    Run(Common),
    /// Simulate all four models and compare them.
    Experiment(Common),
    /// Run the built-in property and oracle checks.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the effective configuration.
    ShowConfig(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config file; omitted keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    model: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// all, none or every-<k>.
    #[arg(long)]
    snapshots: Option<SnapshotPolicy>,
    /// Worker threads for the run pool (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }

    fn output(e: Error) -> Self {
        Failure {
            code: EXIT_OUTPUT,
            message: e.to_string(),
        }
    }
}

fn effective_config(args: &Common) -> Result<ExperimentConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path).map_err(Failure::config)?,
        None => ExperimentConfig::default(),
    };
    if args.model.is_some() {
        config.model = args.model;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(epochs) = args.epochs {
        config.epochs = epochs;
    }
    if let Some(out) = &args.out {
        config.output.dir = out.clone();
    }
    if let Some(policy) = args.snapshots {
        config.output.snapshots = policy;
    }
    config.validate().map_err(Failure::config)?;
    Ok(config)
}

fn init_threads(threads: Option<usize>) -> Result<(), Failure> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure {
            code: EXIT_CONFIG,
            message: "--threads must be at least 1".into(),
        });
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure {
            code: EXIT_CONFIG,
            message: e.to_string(),
        })
}

/// Creates the output directory and checks that it takes files.
fn open_bundle(config: &ExperimentConfig) -> Result<BundleWriter, Failure> {
    let dir = &config.output.dir;
    let writer = BundleWriter::create(dir).map_err(Failure::output)?;
    let probe = dir.join(".dyad-write-probe");
    std::fs::write(&probe, b"")
        .and_then(|_| std::fs::remove_file(&probe))
        .map_err(|e| {
            Failure::output(Error::Io {
                path: probe.clone(),
                source: e,
            })
        })?;
    Ok(writer)
}

fn print_summary(s: &MetricsSummary) {
    let fe = &s.system_free_energy;
    println!(
        "{}: shared A {}/{} B {}/{}, F_system {:.4} -> {:.4}",
        s.model,
        s.agent_a.pursuit_counts.shared,
        s.runs,
        s.agent_b.pursuit_counts.shared,
        s.runs,
        fe[0],
        fe[fe.len() - 1]
    );
}

fn print_report(report: &ComparisonReport) {
    for c in &report.claims {
        println!(
            "{} {} < {}: difference {:.4} [{:.4}, {:.4}] {}",
            c.claim,
            c.lhs,
            c.rhs,
            c.difference.estimate,
            c.difference.low,
            c.difference.high,
            if c.holds { "holds" } else { "not confirmed" }
        );
    }
}

fn run(args: &Common) -> Result<(), Failure> {
    let config = effective_config(args)?;
    let model = config.model.ok_or_else(|| Failure {
        code: EXIT_CONFIG,
        message: "no model selected; pass --model or set `model` in the config".into(),
    })?;
    init_threads(args.threads)?;
    let mut writer = open_bundle(&config)?;
    let spec = config.model_spec(model).map_err(Failure::config)?;
    let (records, summary) = run_model(&spec, &config.protocol()).map_err(Failure::config)?;
    write_model(&mut writer, "", &config, &spec, &records, &summary).map_err(Failure::output)?;
    writer.finish("run", &config).map_err(Failure::output)?;
    print_summary(&summary);
    Ok(())
}

fn experiment(args: &Common) -> Result<(), Failure> {
    let config = effective_config(args)?;
    init_threads(args.threads)?;
    let mut writer = open_bundle(&config)?;
    let protocol = config.protocol();
    let mut summaries = Vec::with_capacity(4);
    for model in 1..=4 {
        let spec = config.model_spec(model).map_err(Failure::config)?;
        let (records, summary) = run_model(&spec, &protocol).map_err(Failure::config)?;
        write_model(&mut writer, &spec.name, &config, &spec, &records, &summary)
            .map_err(Failure::output)?;
        print_summary(&summary);
        summaries.push(summary);
    }
    let boot = BootstrapConfig {
        seed: config.seed,
        ..BootstrapConfig::default()
    };
    let report = compare_models(&summaries, &config.system, config.world.n_cells, &boot)
        .map_err(Failure::config)?;
    let json = comparison_json(&report).map_err(Failure::output)?;
    writer
        .write("comparison.json", json.as_bytes())
        .map_err(Failure::output)?;
    writer
        .finish("experiment", &config)
        .map_err(Failure::output)?;
    print_report(&report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Experiment(args) => experiment(args),
        Command::ShowConfig(args) => effective_config(args).map(|c| print!("{}", c.to_toml())),
        Command::Validate { seed } => {
            let checks = validate::run_all(*seed);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_CHECK_FAILED,
                    message: format!("{failed} of {} checks failed", checks.len()),
                })
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dyad: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
