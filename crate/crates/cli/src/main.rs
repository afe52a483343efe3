//! `shrinkcut`: generate instances, solve them, and run and summarize
//! approximation-ratio experiments.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shrinkcut::bench::{
    gen_erdos_renyi, gen_random_regular, read_records, run_experiment_with, solve, summarize, write_records,
    write_summaries, BenchError, ExperimentConfig, Method, SolveRequest,
};
use shrinkcut::engine::{oracle_rng, RecalcInterval};
use shrinkcut::lp::solve_odd_cycle_relaxation;
use shrinkcut::sdp::{solve_sdp, SdpConfig};
use shrinkcut::{parse_instance, write_instance, ParseError};

#[derive(Parser)]
#[command(name = "shrinkcut", version, about = "Correlation-guided recursive shrinking for MaxCut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        /// Edge probability (er).
        #[arg(long)]
        density: Option<f64>,
        /// Degree (regular).
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance and print the result as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        oracle: OracleArg,
        /// Steps per correlation set: a positive integer or `inf`.
        #[arg(long, default_value = "1")]
        recalc: RecalcInterval,
        /// QAOA depth.
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        /// Write the shrink trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the odd-cycle LP solution of the instance as JSON.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Write the SDP vectors of the instance as JSON.
        #[arg(long)]
        dump_sdp: Option<PathBuf>,
    },
    /// Run an experiment described by a JSON config; writes DIR/records.csv.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize records (a directory holding records.csv, or the file).
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Er,
    Regular,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Lp,
    Sdp,
    Gw,
    Qaoa,
    LpTree,
    GwRound,
    QaoaBare,
}

impl From<OracleArg> for Method {
    fn from(o: OracleArg) -> Method {
        match o {
            OracleArg::Lp => Method::Lp,
            OracleArg::Sdp => Method::Sdp,
            OracleArg::Gw => Method::Gw,
            OracleArg::Qaoa => Method::Qaoa,
            OracleArg::LpTree => Method::LpTree,
            OracleArg::GwRound => Method::GwRound,
            OracleArg::QaoaBare => Method::QaoaBare,
        }
    }
}

enum Failure {
    Config(String),
    Parse(String),
    Resource(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Config(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Resource(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Parse(m) | Failure::Resource(m) | Failure::Other(m) => m,
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        let msg = e.to_string();
        match e {
            _ if e.is_resource_cap() => Failure::Resource(msg),
            BenchError::Config(_) | BenchError::InvalidSpec(_) => Failure::Config(msg),
            _ => Failure::Other(msg),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Other(format!("{}: {e}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
    fs::write(path, text).map_err(io_err(path))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { family, n, density, degree, seed, out } => {
            let g = match (family, density, degree) {
                (FamilyArg::Er, Some(d), None) => gen_erdos_renyi(n, d, seed)?,
                (FamilyArg::Regular, None, Some(k)) => gen_random_regular(n, k, seed)?,
                (FamilyArg::Er, ..) => return Err(Failure::Config("er needs --density (and no --degree)".into())),
                (FamilyArg::Regular, ..) => {
                    return Err(Failure::Config("regular needs --degree (and no --density)".into()))
                }
            };
            fs::write(&out, write_instance(&g)).map_err(io_err(&out))
        }
        Command::Solve { instance, oracle, recalc, depth, seed, trace, dump_lp, dump_sdp } => {
            if depth == 0 {
                return Err(Failure::Config("--depth must be at least 1".into()));
            }
            let text = fs::read_to_string(&instance).map_err(io_err(&instance))?;
            let g = parse_instance(&text)?;
            if let Some(path) = dump_lp {
                let relax = solve_odd_cycle_relaxation(&g).map_err(BenchError::from)?;
                write_json(&path, &relax)?;
            }
            if let Some(path) = dump_sdp {
                let vs = solve_sdp(&g, &SdpConfig::default(), &mut oracle_rng(seed, 0));
                write_json(&path, &vs)?;
            }
            let method = Method::from(oracle);
            let mut req = SolveRequest::new(method, recalc, seed);
            req.depth = depth;
            let out = solve(&g, &req)?;
            if let (Some(path), Some(t)) = (&trace, &out.trace) {
                fs::write(path, t.to_jsonl()).map_err(io_err(path))?;
            }
            let assignment: Option<BTreeMap<String, i8>> = out
                .assignment
                .as_ref()
                .map(|a| a.iter().map(|(v, s)| (v.to_string(), s.as_i8())).collect());
            let report = serde_json::json!({
                "oracle": method.as_str(),
                "recalc": method.is_shrinking().then(|| recalc.to_string()),
                "depth": method.uses_depth().then_some(depth),
                "seed": seed,
                "cut_value": out.cut_value,
                "recalculations": out.recalculations,
                "assignment": assignment,
            });
            println!("{report}");
            Ok(())
        }
        Command::Experiment { config, out } => {
            let text = fs::read_to_string(&config).map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let records = run_experiment_with(&cfg, &|r| {
                eprintln!(
                    "{} {} r={} p={} rep={} ratio={:.4}{}",
                    r.instance_id,
                    r.oracle,
                    r.r.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
                    r.p.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
                    r.repetition,
                    r.ratio,
                    if r.exceeds_baseline() { "  (above heuristic baseline)" } else { "" },
                )
            })?;
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            let path = out.join("records.csv");
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            write_records(file, &records)?;
            Ok(())
        }
        Command::Report { records, out } => {
            let path = if records.is_dir() { records.join("records.csv") } else { records };
            let file = fs::File::open(&path).map_err(io_err(&path))?;
            let recs = read_records(file)?;
            let summaries = summarize(&recs)?;
            let file = fs::File::create(&out).map_err(io_err(&out))?;
            write_summaries(file, &summaries)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
