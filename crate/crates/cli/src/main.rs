//! `haarnull`: command-line front end for the codec, witness-synthesis and
//! E-set verifiers.
//!
//! Exit codes: 0 when every check passes, 1 on a verified failure or an
//! exceeded budget, 2 on usage or parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use haarnull_core::acceptance::{self, DEFAULT_SEED};
use haarnull_core::codec::{self, iota, theta};
use haarnull_core::eset::{self, build_e_prefixes, check_pairwise_gap, coinflip_bound, GraphDatum, Regime};
use haarnull_core::measure::{CylinderSet, ProductMeasure};
use haarnull_core::witness::{self, shift_to_nonpositive, synthesize_witness, verify_claim_fst, DEFAULT_BUDGET};
use haarnull_core::{rational, sampling, Error, Status, VerificationReport};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Args)]
struct RunConfig {
    /// Maximum depth of randomly generated instances.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    /// Seed for the ChaCha8 generator behind randomized suites.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of random instances.
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    instances: u64,
    /// Maximum number of brute-force evaluations.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
}

#[derive(Debug, Parser)]
#[command(name = "haarnull", version, about = "Exact verifiers for witness sequences and the theta/iota coding")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate or scan the theta/iota coding.
    #[command(subcommand)]
    Codec(CodecCommand),
    /// Witness-sequence synthesis and its checks.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Finite-depth E sets built from graph data.
    #[command(subcommand)]
    Eset(EsetCommand),
}

#[derive(Debug, Subcommand)]
enum CodecCommand {
    /// theta(n, b, z).
    Encode {
        n: u64,
        #[arg(value_parser = clap::value_parser!(u8).range(0..=1))]
        b: u8,
        #[arg(allow_hyphen_values = true)]
        z: i64,
    },
    /// iota(m).
    Decode {
        #[arg(allow_hyphen_values = true)]
        m: i64,
    },
    /// Check theta(iota(m)) = m and iota(m) < iota(m+1) for all m < max.
    Roundtrip {
        #[arg(long, default_value_t = 1_000_000)]
        max: i64,
    },
}

#[derive(Debug, Subcommand)]
enum WitnessCommand {
    /// Synthesize the witness sequence for a product measure (JSON file).
    Synth { spec: PathBuf },
    /// Check the convolution identities, on one instance or a random suite.
    VerifyClaim {
        /// Product measure JSON; with --set, checks that single instance.
        #[arg(long, requires = "set")]
        spec: Option<PathBuf>,
        /// Cylinder set JSON, in the coordinates of the shifted measure.
        #[arg(long, requires = "spec")]
        set: Option<PathBuf>,
    },
    /// Check that no translate of B has positive mu_a measure.
    CheckPrefix {
        /// JSON array of positive integers.
        a: PathBuf,
        /// Cylinder set JSON.
        b: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum EsetCommand {
    /// Print the encoded points t(a, x, g).
    Build(DatasetArgs),
    /// Pairwise gap check.
    Gap(DatasetArgs),
    /// Coin-flip translate bound.
    Coinflip(DatasetArgs),
    /// Run every acceptance criterion.
    Acceptance,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// JSON lines file, one {"a": [...], "x": [...], "g": [...]} per line.
    data: PathBuf,
    /// Accept g(k) = a(k) + 1 (negative controls).
    #[arg(long)]
    coding_regime: bool,
}

/// Why a run stopped.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Invalid(lines)) => {
            for line in lines {
                eprintln!("{line}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let cfg = &cli.config;
    match &cli.command {
        Command::Codec(cmd) => run_codec(cmd, cfg),
        Command::Witness(cmd) => run_witness(cmd, cfg),
        Command::Eset(cmd) => run_eset(cmd, cfg),
    }
}

fn emit(cfg: &RunConfig, text: impl std::fmt::Display, value: &Value) {
    match cfg.output {
        OutputFormat::Text => println!("{text}"),
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize")),
    }
}

fn emit_report(cfg: &RunConfig, report: &VerificationReport) -> Outcome {
    emit(cfg, report, &serde_json::to_value(report).expect("reports serialize"));
    Ok(report.status == Status::Pass)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn run_codec(cmd: &CodecCommand, cfg: &RunConfig) -> Outcome {
    match *cmd {
        CodecCommand::Encode { n, b, z } => {
            let value = theta(n, b == 1, z)?;
            let in_t = codec::CodedTriple::new(n, b == 1, z).in_t();
            emit(cfg, value, &json!({ "n": n, "b": b, "z": z, "theta": value, "in_t": in_t }));
            Ok(true)
        }
        CodecCommand::Decode { m } => {
            let t = iota(m)?;
            emit(cfg, t, &json!({ "m": m, "n": t.n, "b": u8::from(t.b), "z": t.z }));
            Ok(true)
        }
        CodecCommand::Roundtrip { max } => emit_report(cfg, &codec::roundtrip_scan(max)?),
    }
}

fn run_witness(cmd: &WitnessCommand, cfg: &RunConfig) -> Outcome {
    match cmd {
        WitnessCommand::Synth { spec } => {
            let spec: ProductMeasure = read_json(spec)?;
            let trace = synthesize_witness(&spec)?;
            let d = trace.depth();
            let text = format!(
                "depth {d}\nell = {:?}\nM = {:?}\nN = {:?}\na = {:?}\nlambda_{d} = {}\ndeficiency_{d} = {}",
                trace.ell,
                trace.m,
                trace.n,
                trace.a,
                rational::format(trace.lambda(d)),
                rational::format(&trace.deficiency_partial[d]),
            );
            emit(cfg, text, &serde_json::to_value(&trace).expect("traces serialize"));
            Ok(true)
        }
        WitnessCommand::VerifyClaim { spec: Some(spec), set: Some(set) } => {
            let spec: ProductMeasure = read_json(spec)?;
            let set: CylinderSet = read_json(set)?;
            let trace = synthesize_witness(&spec)?;
            let (shifted, _) = shift_to_nonpositive(&spec)?;
            emit_report(cfg, &verify_claim_fst(&shifted, &trace, &set)?)
        }
        WitnessCommand::VerifyClaim { .. } => emit_report(cfg, &claim_suite(cfg)?),
        WitnessCommand::CheckPrefix { a, b } => {
            let a: Vec<u64> = read_json(a)?;
            let b: CylinderSet = read_json(b)?;
            emit_report(cfg, &witness::is_witness_prefix(&a, &b, cfg.budget)?)
        }
    }
}

fn claim_suite(cfg: &RunConfig) -> Result<VerificationReport, Failure> {
    let mut rng = sampling::rng(cfg.seed);
    let mut passed = 0u64;
    let mut first_failure = None;
    for i in 0..cfg.instances {
        let inst = sampling::claim_instance(&mut rng, cfg.depth as usize, 3, 8);
        let report = verify_claim_fst(&inst.shifted, &inst.trace, &inst.set)?;
        if report.passed() {
            passed += 1;
        } else if first_failure.is_none() {
            first_failure = Some(json!({ "instance": i, "report": report }));
        }
    }
    let status = if passed == cfg.instances { Status::Pass } else { Status::Fail };
    let mut report = VerificationReport::new("claim-fst-suite", status, cfg.depth as usize)
        .with_sides(json!(passed), json!(cfg.instances))
        .with_parameter("seed", json!(cfg.seed))
        .with_parameter("instances", json!(cfg.instances))
        .with_parameter("max_radius", json!(3))
        .with_parameter("max_prefixes", json!(8));
    if let Some(f) = first_failure {
        report = report.with_counterexample(f);
    }
    Ok(report)
}

fn load_dataset(args: &DatasetArgs) -> Result<Vec<GraphDatum>, Failure> {
    let regime = if args.coding_regime { Regime::Coding } else { Regime::Support };
    match eset::parse_dataset(&read(&args.data)?, regime)? {
        Ok(data) => Ok(data),
        Err(violations) => Err(Failure::Invalid(
            violations
                .into_iter()
                .map(|(line, msg)| format!("{}:{line}: {msg}", args.data.display()))
                .collect(),
        )),
    }
}

fn run_eset(cmd: &EsetCommand, cfg: &RunConfig) -> Outcome {
    match cmd {
        EsetCommand::Build(args) => {
            let e = build_e_prefixes(&load_dataset(args)?)?;
            let text = e
                .points()
                .map(|p| format!("{p:?}"))
                .collect::<Vec<_>>()
                .join("\n");
            emit(cfg, text, &serde_json::to_value(&e).expect("sets serialize"));
            Ok(true)
        }
        EsetCommand::Gap(args) => {
            let e = build_e_prefixes(&load_dataset(args)?)?;
            emit_report(cfg, &check_pairwise_gap(&e)?)
        }
        EsetCommand::Coinflip(args) => {
            let e = build_e_prefixes(&load_dataset(args)?)?;
            emit_report(cfg, &coinflip_bound(&e, cfg.budget)?)
        }
        EsetCommand::Acceptance => {
            let outcomes = acceptance::run_all(cfg.seed);
            let all = outcomes.iter().all(|o| o.passed);
            let mut text: Vec<String> = outcomes.iter().map(ToString::to_string).collect();
            text.push(format!(
                "{}/{} criteria pass",
                outcomes.iter().filter(|o| o.passed).count(),
                outcomes.len()
            ));
            let value = json!({
                "seed": cfg.seed,
                "passed": all,
                "criteria": outcomes
                    .iter()
                    .map(|o| json!({ "id": o.id, "title": o.title, "passed": o.passed, "detail": o.detail }))
                    .collect::<Vec<_>>(),
            });
            emit(cfg, text.join("\n"), &value);
            Ok(all)
        }
    }
}
