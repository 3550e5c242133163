//! Pipeline command line. Each subcommand is one stage; stages read and
//! write artifacts under `--out` and skip themselves when nothing changed.
//! Exit codes: 0 success, 2 input contract violation, 3 missing upstream
//! artifact, 4 internal invariant failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use copresence::error::Error;
use copresence::eval::CvSchema;
use copresence::learn::ModelKind;
use copresence::networks::Target;
use copresence::pipeline::{
    cmd_evaluate, cmd_extract, cmd_ingest, cmd_report, cmd_select, cmd_simulate, cmd_thresholds,
    EvalSpec, FeatureMode,
};
use copresence::synth::SynthConfig;

#[derive(Parser)]
#[command(
    name = "copresence",
    about = "Pairwise co-location features from device logs, evaluated against survey ties",
    version
)]
struct Cli {
    /// Cap on worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Artifact directory; every stage reads and writes here.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort with known ground truth into <out>/data.
    Simulate {
        #[command(flatten)]
        out: OutArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Cohort size.
        #[arg(long, default_value_t = 48)]
        nodes: usize,
        /// Study length in days (waves at day 0, days/2, days).
        #[arg(long, default_value_t = 56)]
        days: i64,
        /// Strength of planted friend co-location, 0 disables the signal.
        #[arg(long, default_value_t = 0.55)]
        lift: f64,
        /// Per-wave probability that a directed tie toggles.
        #[arg(long, default_value_t = 0.13)]
        change_rate: f64,
        /// Per-device-bin probability of a missing location sample.
        #[arg(long, default_value_t = 0.25)]
        missing_rate: f64,
        /// Worst case for row-level CV: all ties mutual and stable, so both
        /// directions of a pair share one feature row and label.
        #[arg(long)]
        leakage: bool,
    },
    /// Parse raw CSV logs into per-device grids plus coverage and tie
    /// artifacts.
    Ingest {
        #[command(flatten)]
        out: OutArg,
        /// Study configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Location log: device_id,timestamp_ms,lat,lon,accuracy_m.
        #[arg(long)]
        locations: PathBuf,
        /// WiFi log: device_id,timestamp_ms,hotspot_id.
        #[arg(long)]
        wifi: PathBuf,
        /// Survey ties: wave,ego,alter,tie_type,value.
        #[arg(long)]
        surveys: PathBuf,
    },
    /// Derive the ten distance thresholds from pooled pair distances.
    Thresholds {
        #[command(flatten)]
        out: OutArg,
    },
    /// Extract the per-dyad, per-period feature matrix.
    Extract {
        #[command(flatten)]
        out: OutArg,
        /// Drop the WiFi series (emits the narrower matrix).
        #[arg(long)]
        no_wifi: bool,
    },
    /// Stability feature selection for one target.
    Select {
        #[command(flatten)]
        out: OutArg,
        #[arg(long, value_parser = Target::parse)]
        target: Target,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Keep features selected in at least this many folds.
        #[arg(long, default_value_t = 9)]
        threshold: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Cross-validated evaluation of one target under one CV schema.
    Evaluate {
        #[command(flatten)]
        out: OutArg,
        #[arg(long, value_parser = Target::parse)]
        target: Target,
        /// unrestricted, dyadic, or temporal.
        #[arg(long, value_parser = CvSchema::parse, default_value = "dyadic")]
        cv: CvSchema,
        /// Fold count (the temporal schema always uses its two periods).
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// forest, adaboost, or tree.
        #[arg(long, value_parser = ModelKind::parse, default_value = "forest")]
        model: ModelKind,
        /// `all` or `selected:<path>` from a select run.
        #[arg(long, value_parser = FeatureMode::parse, default_value = "all")]
        features: FeatureMode,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Render similarity grids, ECCDF, coverage, and tie-distance profile.
    Report {
        #[command(flatten)]
        out: OutArg,
    },
}

fn run(cli: Cli) -> copresence::Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::contract("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::contract(format!("--jobs: {e}")))?;
    }
    let done = |stage: &str, ran: bool| {
        if ran {
            println!("{stage}: done");
        } else {
            println!("{stage}: up to date");
        }
    };
    match cli.command {
        Command::Simulate {
            out,
            seed,
            nodes,
            days,
            lift,
            change_rate,
            missing_rate,
            leakage,
        } => {
            let synth = SynthConfig {
                n_nodes: nodes,
                days,
                co_location_lift: lift,
                change_rate,
                missing_rate,
                seed,
                ..SynthConfig::default()
            };
            done("simulate", cmd_simulate(&out.out, &synth, leakage)?);
        }
        Command::Ingest {
            out,
            config,
            locations,
            wifi,
            surveys,
        } => {
            done("ingest", cmd_ingest(&out.out, &config, &locations, &wifi, &surveys)?);
        }
        Command::Thresholds { out } => {
            done("thresholds", cmd_thresholds(&out.out)?);
        }
        Command::Extract { out, no_wifi } => {
            done("extract", cmd_extract(&out.out, !no_wifi)?);
        }
        Command::Select {
            out,
            target,
            folds,
            threshold,
            seed,
        } => {
            done("select", cmd_select(&out.out, target, folds, threshold, seed)?);
        }
        Command::Evaluate {
            out,
            target,
            cv,
            folds,
            model,
            features,
            seed,
        } => {
            let spec = EvalSpec {
                target,
                cv,
                folds,
                model,
                features,
                seed,
            };
            let (ran, report_path) = cmd_evaluate(&out.out, &spec)?;
            done("evaluate", ran);
            println!("report: {}", report_path.display());
        }
        Command::Report { out } => {
            done("report", cmd_report(&out.out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
