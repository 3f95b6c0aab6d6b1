use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Local certification laboratory: treedepth, kernels, FO model checking and
/// proof-labeling schemes on graphs.
///
/// Exit codes: 0 accept/true, 1 reject/false, 2 usage or input error,
/// 3 cannot certify or undecided.
#[derive(Parser, Debug)]
#[command(name = "loccert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph (and a model for `--kind td`).
    Gen(GenArgs),
    /// Compute the exact treedepth, or validate a model with `--model` and `--t`.
    Td(TdArgs),
    /// Evaluate a first-order sentence on a graph.
    Eval(EvalArgs),
    /// Decide k-round Ehrenfeucht-Fraisse equivalence of two graphs.
    Equiv(EquivArgs),
    /// Compute the k-reduced graph and print the reduction dump.
    Kernelize(KernelizeArgs),
    /// Run the honest prover and print the certificates.
    Certify(CertifyArgs),
    /// Run the local verifier at every vertex.
    Verify(VerifyArgs),
    /// Attack a no-instance with adversaries and mutated certificates.
    Fuzz(FuzzArgs),
    /// Sweep random bounded-treedepth graphs and emit certificate sizes as CSV.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Path,
    Cycle,
    Complete,
    Star,
    Random,
    Td,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: GraphKind,
    /// Number of vertices (leaves for `star`).
    #[arg(long)]
    n: usize,
    /// Height bound for `--kind td`.
    #[arg(long)]
    t: Option<usize>,
    /// Extra edge probability for `random` and `td`.
    #[arg(long)]
    extra: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TdArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, requires = "t")]
    model: Option<PathBuf>,
    #[arg(long)]
    t: Option<usize>,
    /// Write the model here instead of stdout.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    formula: String,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    #[arg(long)]
    g: PathBuf,
    #[arg(long)]
    h: PathBuf,
    #[arg(long)]
    k: usize,
    /// Maximum number of game positions to explore.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args, Debug)]
pub struct KernelizeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Write the kernel graph here.
    #[arg(long)]
    kernel_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    /// Spanning tree.
    St,
    /// Vertex count.
    Count,
    /// Existential first-order sentence.
    Efo,
    /// Sentence of quantifier depth at most 2.
    Fo2,
    /// Treedepth at most t.
    Td,
    /// k-reduction along a model of height at most t.
    Kernel,
    /// First-order sentence on treedepth at most t.
    FoTd,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    scheme: SchemeKind,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    formula: Option<String>,
    /// Expected vertex count for `count`.
    #[arg(long)]
    expected: Option<u64>,
    /// Required root for `st`.
    #[arg(long)]
    root: Option<u64>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    graph: PathBuf,
    /// Model used as a hint by the treedepth-based schemes.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Write the certificates as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    graph: PathBuf,
    /// Certificates in JSON.
    #[arg(long)]
    certs: PathBuf,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    graph: PathBuf,
    /// Extra base certificates in JSON.
    #[arg(long)]
    certs: Option<PathBuf>,
    /// Total number of mutations, split over the bases.
    #[arg(long, default_value_t = 10_000)]
    mutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long, value_enum)]
    scheme: SchemeKind,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<usize>,
    /// Kernel parameters (only `kernel` uses more than one).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,
    #[arg(long)]
    formula: Option<String>,
    /// Graphs per grid point.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Td(a) => commands::td(a),
        Command::Eval(a) => commands::eval(a),
        Command::Equiv(a) => commands::equiv(a),
        Command::Kernelize(a) => commands::kernelize(a),
        Command::Certify(a) => commands::certify(a),
        Command::Verify(a) => commands::verify(a),
        Command::Fuzz(a) => commands::fuzz(a),
        Command::Stats(a) => commands::stats(a),
    };
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.code().into()
        }
    }
}
