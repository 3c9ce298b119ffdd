//! `amk`: encode at-most-k constraints to DIMACS, analyze approximate
//! model coverage and efficiency, search for the best model of a given
//! (k, n), and emit the reference experiment tables as CSV.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::Ratio;

use amk_core::{
    approx_literal_count, at_most_binomial, at_most_counter, coverage, count_accepted_bruteforce,
    count_accepted_dp, encode_approx, rank_models, Cnf, EfficiencyReport, ModelShape, ShapeBounds,
    VarRole,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_DISAGREEMENT: u8 = 3;
const EXIT_EMPTY_SEARCH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "amk",
    version,
    about = "CNF encodings of at-most-k constraints and coverage analysis of approximate tree models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a constraint to DIMACS CNF
    Encode(EncodeArgs),
    /// Report literal rate, coverage and efficiency of one model
    Analyze(AnalyzeArgs),
    /// Rank every enumerable model for (k, n) by efficiency
    Search(SearchArgs),
    /// Emit the reference experiment tables as CSV
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// Approximate model shape, e.g. "2x2,2x2;m=2;k=2;ff=0;ft=0"
    #[arg(long, conflicts_with_all = ["encoding", "n", "k"])]
    shape: Option<ModelShape>,
    /// Exact encoding to build instead of a shape
    #[arg(long, requires = "n", requires = "k")]
    encoding: Option<ExactEncoding>,
    /// Number of constrained variables (with --encoding)
    #[arg(long)]
    n: Option<usize>,
    /// Bound on the number of true variables (with --encoding)
    #[arg(long)]
    k: Option<usize>,
    /// Write the DIMACS text here instead of standard output
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExactEncoding {
    Counter,
    Binomial,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Approximate model shape to analyze
    #[arg(long)]
    shape: ModelShape,
    /// Acceptance oracle(s) to run
    #[arg(long, value_enum, default_value_t = OracleChoice::Dp)]
    oracle: OracleChoice,
    /// Also report the probability that one of this many uniform random
    /// at-most-k assignments is accepted
    #[arg(long)]
    samples: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleChoice {
    Dp,
    Brute,
    Both,
}

#[derive(Args)]
struct SearchArgs {
    /// Bound on the number of true variables
    #[arg(long)]
    k: u64,
    /// Number of constrained variables
    #[arg(long)]
    n: u64,
    /// Keep only the first RANK rows
    #[arg(long)]
    top: Option<usize>,
    #[command(flatten)]
    bounds: BoundsArgs,
    /// Write the CSV here instead of standard output
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Maximum number of internal levels
    #[arg(long, default_value_t = ShapeBounds::default().max_levels)]
    max_levels: usize,
    /// Minimum column height of internal nodes
    #[arg(long, default_value_t = ShapeBounds::default().min_h)]
    min_h: u32,
    /// Maximum column height of internal nodes
    #[arg(long, default_value_t = ShapeBounds::default().max_h)]
    max_h: u32,
    /// Maximum node width
    #[arg(long, default_value_t = ShapeBounds::default().max_w)]
    max_w: u32,
    /// Maximum leaf width multiplier
    #[arg(long, default_value_t = ShapeBounds::default().max_leaf_m)]
    max_leaf_m: u32,
}

impl From<&BoundsArgs> for ShapeBounds {
    fn from(args: &BoundsArgs) -> Self {
        ShapeBounds {
            max_levels: args.max_levels,
            min_h: args.min_h,
            max_h: args.max_h,
            max_w: args.max_w,
            max_leaf_m: args.max_leaf_m,
        }
    }
}

#[derive(Args)]
struct ReproduceArgs {
    /// Experiment table to emit
    #[arg(value_enum)]
    target: ReproduceTarget,
    /// Write the CSV here instead of standard output
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReproduceTarget {
    /// Literal counts of the 2x2-chain family vs the counter baseline
    Fig4,
    /// Best-model efficiency for every feasible k at n = 10, 20, 30
    Fig5,
    /// Statistics and coverage of the 1/2-of-16 chain model
    Sec31,
}

enum CliError {
    Validation(String),
    Disagreement,
    EmptySearch,
    Io(std::io::Error),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("AMK_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: AMK_THREADS must be a positive integer");
                return ExitCode::from(EXIT_VALIDATION);
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Search(args) => cmd_search(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(CliError::Disagreement) => {
            eprintln!("error: acceptance oracles disagree");
            ExitCode::from(EXIT_DISAGREEMENT)
        }
        Err(CliError::EmptySearch) => {
            eprintln!("error: no model exists within the given bounds");
            ExitCode::from(EXIT_EMPTY_SEARCH)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(CliError::Io),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(CliError::Io),
    }
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliError> {
    let (cnf, k, n) = match (&args.shape, args.encoding) {
        (Some(shape), None) => {
            let result = encode_approx(shape)?;
            (result.cnf, result.derived_k, result.derived_n)
        }
        (None, Some(encoding)) => {
            let (n, k) = match (args.n, args.k) {
                (Some(n), Some(k)) => (n, k),
                _ => return Err(CliError::Validation("--encoding needs --n and --k".into())),
            };
            let mut cnf = Cnf::new();
            let vars = cnf.alloc_vars(n as u32, VarRole::Target);
            match encoding {
                ExactEncoding::Counter => at_most_counter(&mut cnf, &vars, k)?,
                ExactEncoding::Binomial => at_most_binomial(&mut cnf, &vars, k, None)?,
            };
            (cnf, k as u64, n as u64)
        }
        _ => {
            return Err(CliError::Validation(
                "give exactly one of --shape or --encoding with --n/--k".into(),
            ))
        }
    };
    let stats = cnf.stats();
    emit(args.output.as_ref(), &cnf.write_dimacs())?;
    eprintln!(
        "vars={} aux={} clauses={} literals={} k={} n={}",
        stats.variables, stats.aux_variables, stats.clauses, stats.literals, k, n
    );
    Ok(())
}

/// Rounded percentage with one decimal place, e.g. "64.8%".
fn percent(ratio: &Ratio<BigUint>) -> String {
    let permille = (ratio.numer() * 2000u32 + ratio.denom()) / (ratio.denom() * 2u32);
    format!("{}.{}%", &permille / 10u32, &permille % 10u32)
}

/// Exact long-division decimal with `places` digits, for CSV output.
fn decimal(ratio: &Ratio<BigUint>, places: u32) -> String {
    let whole = ratio.numer() / ratio.denom();
    let mut rem = ratio.numer() - &whole * ratio.denom();
    let mut digits = String::new();
    for _ in 0..places {
        rem *= 10u32;
        let d = &rem / ratio.denom();
        rem -= &d * ratio.denom();
        write!(digits, "{d}").unwrap();
    }
    if rem * 2u32 >= *ratio.denom() {
        // round the final digit half-up, carrying as needed
        let scale = BigUint::from(10u32).pow(places);
        let bumped = whole * &scale + digits.parse::<BigUint>().unwrap() + 1u32;
        let whole = &bumped / &scale;
        let frac = &bumped % &scale;
        return format!("{whole}.{frac:0places$}", places = places as usize);
    }
    format!("{whole}.{digits}")
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let shape = &args.shape;
    let (k, n) = shape.derived_params()?;
    let approx_literals = approx_literal_count(shape)?;
    let counter_literals = amk_core::counter_literal_count(n as usize, k as usize)?;
    let rate = amk_core::literal_rate(approx_literals, k, n)?;

    let mut agreement = None;
    let histogram = match args.oracle {
        OracleChoice::Dp => count_accepted_dp(shape)?,
        OracleChoice::Brute => count_accepted_bruteforce(&encode_approx(shape)?)?,
        OracleChoice::Both => {
            let brute = count_accepted_bruteforce(&encode_approx(shape)?)?;
            let dp = count_accepted_dp(shape)?;
            agreement = Some(dp == brute);
            brute
        }
    };
    let cov = histogram.coverage_report(k);
    let eff = cov.overall_coverage.clone() / rate.clone();

    println!("shape={shape}");
    println!("k={k} n={n}");
    println!("approx_literals={approx_literals} counter_literals={counter_literals}");
    println!("literal_rate={}", percent(&rate));
    println!("overall_coverage={}", percent(&cov.overall_coverage));
    println!("maxcount_coverage={}", percent(&cov.maxcount_coverage));
    println!("efficiency={}", decimal(&eff, 4));
    if let Some(samples) = args.samples {
        let p = amk_core::find_probability(&cov.overall_coverage, samples);
        println!("find_probability[s={samples}]={p:.4}");
    }
    if let Some(agree) = agreement {
        println!("oracles_agree={agree}");
        if !agree {
            return Err(CliError::Disagreement);
        }
    }
    Ok(())
}

fn search_csv(reports: &[EfficiencyReport]) -> String {
    let mut out = String::from(
        "rank,shape,approx_literals,counter_literals,literal_rate,coverage,efficiency\n",
    );
    for (rank, report) in reports.iter().enumerate() {
        writeln!(
            out,
            "{},\"{}\",{},{},{},{},{}",
            rank + 1,
            report.shape,
            report.approx_literals,
            report.counter_literals,
            decimal(&report.literal_rate, 12),
            decimal(&report.coverage.overall_coverage, 12),
            decimal(&report.efficiency, 12),
        )
        .unwrap();
    }
    out
}

fn cmd_search(args: SearchArgs) -> Result<(), CliError> {
    let bounds = ShapeBounds::from(&args.bounds);
    let mut reports = rank_models(args.k, args.n, &bounds)?;
    if reports.is_empty() {
        return Err(CliError::EmptySearch);
    }
    if let Some(top) = args.top {
        reports.truncate(top);
    }
    emit(args.output.as_ref(), &search_csv(&reports))
}

/// The 2x2-chain model at-most-n/2-of-n for n a power of two >= 8.
fn chain_shape(n: u64) -> ModelShape {
    let depth = n.trailing_zeros() as usize - 2;
    ModelShape::new(vec![(2, 2); depth], 2, 2)
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<(), CliError> {
    let text = match args.target {
        ReproduceTarget::Fig4 => {
            let mut out = String::from("n,approx_literals,counter_literals,literal_rate\n");
            for n in [8u64, 16, 32, 64, 128] {
                let shape = chain_shape(n);
                let approx = approx_literal_count(&shape)?;
                let counter = amk_core::counter_literal_count(n as usize, n as usize / 2)?;
                let rate = Ratio::new(BigUint::from(approx), BigUint::from(counter));
                writeln!(out, "{n},{approx},{counter},{}", decimal(&rate, 12)).unwrap();
            }
            out
        }
        ReproduceTarget::Fig5 => {
            let bounds = ShapeBounds::default();
            let mut out = String::from(
                "n,k,shape,approx_literals,counter_literals,literal_rate,coverage,efficiency\n",
            );
            for n in [10u64, 20, 30] {
                for k in 1..n {
                    let Some(best) = amk_core::best_model(k, n, &bounds)? else {
                        continue;
                    };
                    writeln!(
                        out,
                        "{n},{k},\"{}\",{},{},{},{},{}",
                        best.shape,
                        best.approx_literals,
                        best.counter_literals,
                        decimal(&best.literal_rate, 12),
                        decimal(&best.coverage.overall_coverage, 12),
                        decimal(&best.efficiency, 12),
                    )
                    .unwrap();
                }
            }
            out
        }
        ReproduceTarget::Sec31 => {
            let shape = chain_shape(16);
            let encoding = encode_approx(&shape)?;
            let stats = encoding.cnf.stats();
            let report = coverage(&shape)?;
            let mut out = String::from(
                "shape,aux_variables,clauses,literals,overall_coverage,maxcount_coverage\n",
            );
            writeln!(
                out,
                "\"{}\",{},{},{},{},{}",
                shape,
                stats.aux_variables,
                stats.clauses,
                stats.literals,
                decimal(&report.overall_coverage, 12),
                decimal(&report.maxcount_coverage, 12),
            )
            .unwrap();
            out
        }
    };
    emit(args.output.as_ref(), &text)
}
