use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use commlab::analyzer::FunctionMatrix;
use commlab::testers::{BoolFn, RangedFn};
use commlab::{BitVector, Error, Result};
use commlab_cli::experiments::{self, Analysis, Common, F2Args, GhArgs};
use commlab_cli::report::{Format, Report};
use commlab_cli::suite::{self, SuiteConfig};
use commlab_cli::{exit_code, init_threads};

#[derive(Parser)]
#[command(name = "commlab", version, about = "Communication-complexity workbench")]
struct Cli {
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Sketch(SketchCmd),
    #[command(subcommand)]
    Protocol(ProtocolCmd),
    Analyze(AnalyzeArgs),
    #[command(subcommand)]
    Ann(AnnCmd),
    #[command(subcommand)]
    Test(TestCmd),
    /// Run an acceptance suite: lecture1, lecture3..lecture8 or all.
    Suite {
        id: String,
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct StreamArgs {
    /// Universe size.
    #[arg(long)]
    n: u64,
    /// Comma-separated items in 1..=n.
    #[arg(long, value_delimiter = ',')]
    stream: Vec<u64>,
    /// Length of a random stream when --stream is absent.
    #[arg(long)]
    length: Option<usize>,
}

#[derive(Subcommand)]
enum SketchCmd {
    F2 {
        #[command(flatten)]
        s: StreamArgs,
        /// Average over every cubic hash instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 40)]
        copies: usize,
        #[arg(long, default_value_t = 1)]
        groups: usize,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    F0 {
        #[command(flatten)]
        s: StreamArgs,
        #[arg(long, default_value_t = 48)]
        retain: usize,
    },
    Morris {
        #[arg(long)]
        count: u64,
    },
    Mg {
        #[command(flatten)]
        s: StreamArgs,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Subcommand)]
enum ProtocolCmd {
    Eq {
        #[arg(long)]
        x: BitVector,
        #[arg(long)]
        y: BitVector,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Enumerate every tape.
        #[arg(long)]
        exhaustive: bool,
    },
    Cis {
        #[arg(long)]
        n: usize,
        /// Edge bitmask over pairs (u, v), u < v, in lexicographic order.
        #[arg(long)]
        graph: u64,
        #[arg(long)]
        clique: BitVector,
        #[arg(long)]
        indep: BitVector,
    },
    Gh {
        #[arg(long)]
        x: BitVector,
        #[arg(long)]
        y: BitVector,
        #[arg(long)]
        scale: u64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Use `ceil(c eps^-2 ln(2/delta))` samples.
        #[arg(long)]
        constant: Option<f64>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AnalyzeKind {
    Cover,
    Detcc,
    Fool,
    Box,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    kind: AnalyzeKind,
    /// Matrix file; see the analyzer text format.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 1)]
    value: u8,
    /// Fooling-set pairs as row:col, comma separated.
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
}

#[derive(Args)]
struct AnnArgs {
    /// One bit string per line.
    #[arg(long)]
    points: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

#[derive(Subcommand)]
enum AnnCmd {
    Build {
        #[command(flatten)]
        a: AnnArgs,
    },
    Query {
        #[command(flatten)]
        a: AnnArgs,
        #[arg(long)]
        query: BitVector,
    },
}

#[derive(Subcommand)]
enum TestCmd {
    Blr {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// Function file (`n r` then 2^n values).
        #[arg(long)]
        function: Option<PathBuf>,
    },
    Mono {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        function: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(':').ok_or_else(|| Error::Input(format!("pair {s:?} is not row:col")))?;
    let num = |t: &str| t.trim().parse().map_err(|_| Error::Input(format!("bad index {t:?}")));
    Ok((num(a)?, num(b)?))
}

fn dispatch(cli: &Cli) -> Result<(Report, bool)> {
    let common = Common { seed: cli.seed, trials: cli.trials };
    let report = match &cli.command {
        Command::Sketch(SketchCmd::F2 { s, exhaustive, copies, groups, eps }) => experiments::sketch_f2(
            &F2Args { n: s.n, stream: &s.stream, length: s.length, exhaustive: *exhaustive, copies: *copies, groups: *groups, eps: *eps },
            &common,
        )?,
        Command::Sketch(SketchCmd::F0 { s, retain }) => experiments::sketch_f0(s.n, &s.stream, s.length, *retain, &common)?,
        Command::Sketch(SketchCmd::Morris { count }) => experiments::sketch_morris(*count, &common)?,
        Command::Sketch(SketchCmd::Mg { s, k }) => experiments::sketch_mg(*k, s.n, &s.stream, s.length, cli.seed)?,
        Command::Protocol(ProtocolCmd::Eq { x, y, reps, exhaustive }) => experiments::protocol_eq(x, y, *reps, *exhaustive, &common)?,
        Command::Protocol(ProtocolCmd::Cis { n, graph, clique, indep }) => experiments::protocol_cis(*n, *graph, clique, indep)?,
        Command::Protocol(ProtocolCmd::Gh { x, y, scale, eps, delta, constant }) => experiments::protocol_gh(
            &GhArgs { x, y, scale: *scale, eps: *eps, delta: *delta, constant: *constant },
            &common,
        )?,
        Command::Analyze(a) => {
            let m: FunctionMatrix = read(&a.matrix)?.parse()?;
            let kind = match a.kind {
                AnalyzeKind::Cover => Analysis::Cover,
                AnalyzeKind::Detcc => Analysis::DetCc,
                AnalyzeKind::Fool => Analysis::Fool,
                AnalyzeKind::Box => Analysis::Box,
            };
            let pairs = a.pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
            experiments::analyze(kind, &m, a.value != 0, &pairs)?
        }
        Command::Ann(AnnCmd::Build { a }) => {
            let points = experiments::parse_points(&read(&a.points)?)?;
            experiments::ann_build(points, a.eps, a.delta, common.seed()?)?
        }
        Command::Ann(AnnCmd::Query { a, query }) => {
            let points = experiments::parse_points(&read(&a.points)?)?;
            experiments::ann_query(points, query, a.eps, a.delta, common.seed()?)?
        }
        Command::Test(TestCmd::Blr { n, eps, function }) => {
            let f = function.as_ref().map(|p| read(p)?.parse::<BoolFn>()).transpose()?;
            experiments::test_blr(*n, *eps, f, &common)?
        }
        Command::Test(TestCmd::Mono { n, eps, function }) => {
            let f = function.as_ref().map(|p| read(p)?.parse::<RangedFn>()).transpose()?;
            experiments::test_mono(*n, *eps, f, &common)?
        }
        Command::Suite { id, quick } => {
            let ids = suite::suite_ids(id)?;
            let mut cfg = SuiteConfig { quick: *quick, ..SuiteConfig::default() };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let outcomes = suite::run(&ids, &cfg);
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            let all_pass = outcomes.iter().all(|o| o.pass);
            return Ok((suite::report(id, &cfg, &outcomes), all_pass));
        }
    };
    Ok((report, true))
}

fn emit(cli: &Cli, report: &Report) -> Result<()> {
    let text = report.render(cli.format);
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match dispatch(&cli).and_then(|(report, ok)| emit(&cli, &report).map(|_| ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
