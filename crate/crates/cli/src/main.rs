//! `deflab`: reproducible experiments over the definability toolkit.

mod cache;
mod commands;
mod config;
mod render;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{ReportFormat, ToolkitConfig};
use definability::report::{envelope, Verdict};
use serde_json::Value;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable overriding the cache path.
pub const CACHE_ENV: &str = "DEFLAB_CACHE";
pub const DEFAULT_CACHE: &str = "deflab-cache.jsonl";

#[derive(Parser, Debug)]
#[command(name = "deflab", version, about = "Exact experiments with elliptic divisibility sequences and definability")]
pub struct Cli {
    /// JSON configuration document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Factorization cache file (overrides DEFLAB_CACHE and the config).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Factor in memory only.
    #[arg(long, global = true, conflicts_with = "cache")]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sequence records and lemma checks.
    Eds {
        #[command(subcommand)]
        cmd: EdsCmd,
    },
    /// The divisibility model and the subset system.
    Model {
        #[command(subcommand)]
        cmd: ModelCmd,
    },
    /// Formula parsing, profiles, evaluation and transforms.
    Formula {
        #[command(subcommand)]
        cmd: FormulaCmd,
    },
    /// Vertical definability checks over a quadratic field.
    Vertical {
        #[command(subcommand)]
        cmd: VerticalCmd,
    },
    /// Prime densities and the ring construction.
    Density {
        #[command(subcommand)]
        cmd: DensityCmd,
    },
    /// Inspect or compact the factorization cache.
    Cache {
        #[command(subcommand)]
        cmd: CacheCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum EdsCmd {
    /// The record of index n: x_n, d_n and its factorization.
    Compute {
        #[arg(long)]
        n: u64,
    },
    /// Checks one lemma on the sequence table.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    #[value(name = "orderchange")]
    OrderChange,
    #[value(name = "subgroup")]
    Subgroup,
    #[value(name = "strongdiv")]
    StrongDiv,
    #[value(name = "square")]
    Square,
    #[value(name = "growth")]
    Growth,
    #[value(name = "biggerS")]
    BiggerS,
    #[value(name = "m1")]
    M1,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub lemma: Lemma,
    /// Index (orderchange) or largest index (growth).
    #[arg(long)]
    pub n: Option<u64>,
    /// Prime multiplier (orderchange).
    #[arg(long)]
    pub p: Option<u64>,
    /// Prime (subgroup).
    #[arg(long)]
    pub q: Option<u64>,
    /// Exponent (subgroup).
    #[arg(long)]
    pub e: Option<u32>,
    /// Largest index examined.
    #[arg(long)]
    pub bound: Option<u64>,
    /// Candidate m1 (m1).
    #[arg(long)]
    pub m1: Option<u64>,
    /// Grid size (m1).
    #[arg(long)]
    pub grid: Option<u64>,
    /// Window start (growth).
    #[arg(long)]
    pub lo: Option<u64>,
    /// Relative spread tolerance (growth).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Use y^2 = x^3 + 2 with P = (-1, 1) instead of the configured curve (growth).
    #[arg(long)]
    pub growth_reference: bool,
}

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    /// Decides b_j | b_k in the model and compares with j | k.
    Divides {
        #[arg(long, allow_hyphen_values = true)]
        j: i64,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
    /// Builds and audits a solution of the subset system for x.
    Subset {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Replace the exponent 5crn by 1.
        #[arg(long)]
        test_mode: bool,
        /// Largest index the construction may use.
        #[arg(long)]
        max_index: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SortArg {
    Integer,
    Ring,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sweep,
    Exact,
    Truncated,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Formula text.
    #[arg(long)]
    pub text: Option<String>,
    /// File holding the formula.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum FormulaCmd {
    /// Parses and prints in normal form.
    Parse {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value = "integer")]
        sort: SortArg,
    },
    /// Quantifier counts and block pattern.
    Profile {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value = "integer")]
        sort: SortArg,
    },
    /// Evaluates over the integers in [-bound, bound].
    Eval {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 10)]
        bound: i64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Free-variable values, as NAME=VALUE.
        #[arg(long = "assign", allow_hyphen_values = true)]
        assign: Vec<String>,
    },
    /// Compares the multiplication formula with l = m n on a window.
    ValidateMult {
        #[arg(long)]
        window: Option<i64>,
    },
    /// Rewrites a ring formula with at most two universals to one universal
    /// over Q(sqrt d).
    Reduce {
        #[command(flatten)]
        src: Source,
        #[arg(long, allow_hyphen_values = true)]
        d: Option<i64>,
    },
}

#[derive(Args, Debug)]
pub struct VerticalArgs {
    /// Element a, a/b or "a,b" meaning a + b sqrt d.
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<i64>,
    #[arg(long)]
    pub depth: Option<u32>,
    /// Rational prime to work at; chosen automatically if absent.
    #[arg(long)]
    pub q: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum VerticalCmd {
    Rankonedown(VerticalArgs),
    Subfield {
        #[command(flatten)]
        args: VerticalArgs,
        #[arg(long, default_value_t = 1)]
        r: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum DensityCmd {
    /// Density of V(P) along a grid.
    V {
        /// Comma-separated bounds.
        #[arg(long, default_value = "1000,10000,100000")]
        grid: String,
        #[arg(long)]
        csv: bool,
    },
    /// Density of primes with a degree-one factor in Q(sqrt d).
    Split {
        #[arg(long, allow_hyphen_values = true)]
        d: Option<i64>,
        #[arg(long, default_value_t = 1_000_000)]
        x: u64,
    },
    /// Density of primes with a degree-one factor in the degree-p subfield
    /// of Q(zeta_q).
    Cyclic {
        #[arg(long, requires = "q")]
        p: Option<u64>,
        #[arg(long, requires = "p")]
        q: Option<u64>,
        /// Pick p, q from epsilon instead.
        #[arg(long, conflicts_with = "p")]
        epsilon: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        x: u64,
    },
    /// Builds W with density above 1 - epsilon avoiding V(P).
    BuildRing {
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, default_value = "1000,10000,100000")]
        grid: String,
        /// Primes forced into W, comma-separated.
        #[arg(long, value_delimiter = ',')]
        explicit: Vec<u64>,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum CacheCmd {
    Stats,
    /// Rewrites the file with one verified entry per value.
    Gc,
}

/// Command result before rendering.
pub struct Output {
    pub verdict: Verdict,
    pub result: Value,
    pub csv: Option<String>,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or configuration: exit 3.
    Usage(String),
    /// Budget exhausted or undecidable at this scale: exit 2.
    Inconclusive { message: String, detail: Value },
}

impl Failure {
    pub fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }

    pub fn inconclusive(e: impl std::fmt::Display) -> Self {
        Failure::Inconclusive { message: e.to_string(), detail: Value::Null }
    }
}

fn command_name(c: &Command) -> String {
    let (group, sub) = match c {
        Command::Eds { cmd } => ("eds", format!("{cmd:?}")),
        Command::Model { cmd } => ("model", format!("{cmd:?}")),
        Command::Formula { cmd } => ("formula", format!("{cmd:?}")),
        Command::Vertical { cmd } => ("vertical", format!("{cmd:?}")),
        Command::Density { cmd } => ("density", format!("{cmd:?}")),
        Command::Cache { cmd } => ("cache", format!("{cmd:?}")),
    };
    let head: String = sub.chars().take_while(|c| c.is_alphanumeric()).collect();
    let mut kebab = String::new();
    for (i, ch) in head.chars().enumerate() {
        if ch.is_uppercase() && i > 0 {
            kebab.push('-');
        }
        kebab.push(ch.to_ascii_lowercase());
    }
    format!("{group} {kebab}")
}

pub fn document(command: &str, verdict: Verdict, result: Value, error: Option<&str>) -> Value {
    let mut doc = envelope(command, result);
    let map = doc.as_object_mut().expect("envelope is an object");
    map.insert("verdict".into(), serde_json::to_value(verdict).expect("verdict serializes"));
    map.insert("pass".into(), Value::Bool(verdict == Verdict::Pass));
    if let Some(e) = error {
        map.insert("error".into(), Value::String(e.into()));
    }
    doc
}

fn print_document(doc: &Value, pretty: bool) {
    if pretty {
        print!("{}", render::table(doc));
    } else {
        println!("{}", serde_json::to_string_pretty(doc).expect("reports serialize"));
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let cfg = match &cli.config {
        Some(path) => ToolkitConfig::load(path).map_err(Failure::usage)?,
        None => ToolkitConfig::default(),
    };
    let pretty = cli.pretty || cfg.format == ReportFormat::Pretty;
    let cache_path = if cli.no_cache {
        None
    } else {
        Some(
            cli.cache
                .clone()
                .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
                .or_else(|| cfg.cache_path.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)),
        )
    };
    let name = command_name(&cli.command);
    let app = commands::App::new(cfg, cache_path);
    match commands::dispatch(&app, &cli.command) {
        Ok(out) => {
            match &out.csv {
                Some(csv) => print!("{csv}"),
                None => print_document(&document(&name, out.verdict, out.result, None), pretty),
            }
            Ok(out.verdict.exit_code())
        }
        Err(Failure::Inconclusive { message, detail }) => {
            eprintln!("deflab: {message}");
            print_document(&document(&name, Verdict::Inconclusive, detail, Some(&message)), pretty);
            Ok(Verdict::Inconclusive.exit_code())
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("deflab: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Inconclusive { message, .. }) => {
            eprintln!("deflab: {message}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn command_names_are_kebab_case() {
        let cli = Cli::try_parse_from(["deflab", "formula", "validate-mult"]).unwrap();
        assert_eq!(command_name(&cli.command), "formula validate-mult");
        let cli = Cli::try_parse_from(["deflab", "density", "build-ring", "--epsilon", "0.25"]).unwrap();
        assert_eq!(command_name(&cli.command), "density build-ring");
    }

    #[test]
    fn lemma_names_match_the_command_set() {
        let names: Vec<String> =
            Lemma::value_variants().iter().map(|l| l.to_possible_value().unwrap().get_name().to_string()).collect();
        assert_eq!(names, ["orderchange", "subgroup", "strongdiv", "square", "growth", "biggerS", "m1"]);
    }
}
