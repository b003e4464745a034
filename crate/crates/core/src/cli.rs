//! Command-line driver: grammar loading, parsing, and the generation
//! oracle, with JSON, bracketed-tree, and plain score outputs.
//!
//! Exit codes: 0 recognized, 2 not recognized, 1 error, 64 usage.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chart::{run_chartparser, ParserConfig};
use crate::formats::{load_acfg, load_mg};
use crate::grammar::GrammarContract;
use crate::oracle::oracle_generate;
use crate::semiring::{LogProb, Recognized, Semiring, ViterbiProb};

pub const EXIT_RECOGNIZED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNRECOGNIZED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "agparse",
    version,
    about = "Chart parser for abstract grammars"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse an input sentence with a grammar.
    Parse(ParseArgs),
    /// Enumerate derivable strings of a grammar with their probabilities.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum FormatKind {
    Acfg,
    Mg,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum SemiringKind {
    /// Total derivation probability (log domain).
    Inside,
    /// Best derivation probability.
    Viterbi,
    /// Boolean recognition.
    Bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum OutputKind {
    Json,
    Tree,
    Score,
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    /// Grammar file.
    #[arg(long)]
    pub grammar: PathBuf,
    /// Grammar format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatKind>,
    /// Input sentence, whitespace-tokenized.
    #[arg(long)]
    pub input: Option<String>,
    /// Read the input sentence from standard input instead.
    #[arg(long)]
    pub stdin: bool,
    #[arg(long, value_enum, default_value = "inside")]
    pub semiring: SemiringKind,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputKind,
    /// Convergence tolerance on log scores.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Abort after this many chart items.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: usize,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Grammar file (acfg format).
    #[arg(long)]
    pub grammar: PathBuf,
    /// Report every derivable string up to this length.
    #[arg(long)]
    pub max_len: usize,
    /// Stop expanding sentential forms after this many rewrite steps.
    #[arg(long, default_value_t = 60)]
    pub max_steps: usize,
    /// Residual mass below which the expansion counts as converged.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Serialize)]
struct JsonDiagnostics {
    unknown_tokens: Vec<String>,
    edges: usize,
    constituents: usize,
    dequeues: usize,
    requeues: usize,
    reactivations: usize,
}

#[derive(Serialize)]
struct JsonOutput {
    recognized: bool,
    score: f64,
    tree: Option<String>,
    diagnostics: JsonDiagnostics,
}

struct Outcome {
    recognized: bool,
    score: f64,
    tree: Option<String>,
    diagnostics: JsonDiagnostics,
}

/// Parses argv and runs; returns the process exit code.
pub fn run_from_args() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                EXIT_RECOGNIZED
            }
            _ => {
                eprint!("{e}");
                EXIT_USAGE
            }
        },
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Parse(args) => cmd_parse(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn infer_format(path: &Path, explicit: Option<FormatKind>) -> Result<FormatKind, String> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("acfg") => Ok(FormatKind::Acfg),
        Some("mg") => Ok(FormatKind::Mg),
        _ => Err("cannot infer grammar format; pass --format".into()),
    }
}

fn read_tokens(args: &ParseArgs) -> Result<Vec<String>, String> {
    let text = match (&args.input, args.stdin) {
        (Some(_), true) => return Err("--input and --stdin are mutually exclusive".into()),
        (Some(s), false) => s.clone(),
        (None, true) => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("reading stdin: {e}"))?;
            buf
        }
        (None, false) => return Err("one of --input or --stdin is required".into()),
    };
    Ok(text.split_whitespace().map(str::to_string).collect())
}

fn parse_outcome<G>(grammar: &G, tokens: &[String], args: &ParseArgs) -> Result<Outcome, String>
where
    G: GrammarContract<Terminal = String>,
{
    let config = ParserConfig {
        convergence_tol: args.tol,
        item_budget: args.budget,
    };
    fn go<G, S>(
        grammar: &G,
        tokens: &[String],
        config: &ParserConfig,
        want_tree: bool,
    ) -> Result<Outcome, String>
    where
        G: GrammarContract<Terminal = String>,
        S: Semiring,
    {
        let forest = run_chartparser::<G, S>(grammar, tokens, config).map_err(|e| e.to_string())?;
        let tree = if want_tree {
            forest.best().map(|t| t.bracketed())
        } else {
            None
        };
        Ok(Outcome {
            recognized: forest.recognized(),
            score: forest.inside().prob(),
            tree,
            diagnostics: JsonDiagnostics {
                unknown_tokens: forest.unknown_tokens.clone(),
                edges: forest.stats.edges_created,
                constituents: forest.stats.constituents_created,
                dequeues: forest.stats.dequeues,
                requeues: forest.stats.requeues,
                reactivations: forest.stats.reactivations,
            },
        })
    }
    let want_tree = matches!(args.output, OutputKind::Tree | OutputKind::Json);
    match args.semiring {
        SemiringKind::Inside => go::<G, LogProb>(grammar, tokens, &config, want_tree),
        SemiringKind::Viterbi => go::<G, ViterbiProb>(grammar, tokens, &config, want_tree),
        SemiringKind::Bool => go::<G, Recognized>(grammar, tokens, &config, want_tree),
    }
}

fn cmd_parse(args: ParseArgs) -> i32 {
    let text = match std::fs::read_to_string(&args.grammar) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.grammar.display());
            return EXIT_ERROR;
        }
    };
    let format = match infer_format(&args.grammar, args.format) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let tokens = match read_tokens(&args) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match format {
        FormatKind::Acfg => match load_acfg(&text) {
            Ok(g) => parse_outcome(&g, &tokens, &args),
            Err(e) => Err(e.to_string()),
        },
        FormatKind::Mg => match load_mg(&text) {
            Ok(g) => parse_outcome(&g, &tokens, &args),
            Err(e) => Err(e.to_string()),
        },
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    if !outcome.diagnostics.unknown_tokens.is_empty() {
        eprintln!(
            "warning: unknown tokens: {}",
            outcome.diagnostics.unknown_tokens.join(" ")
        );
    }
    match args.output {
        OutputKind::Json => {
            let json = JsonOutput {
                recognized: outcome.recognized,
                score: outcome.score,
                tree: outcome.tree,
                diagnostics: outcome.diagnostics,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&json).expect("serializable output")
            );
        }
        OutputKind::Tree => {
            println!("recognized: {}", outcome.recognized);
            println!("score: {}", outcome.score);
            match &outcome.tree {
                Some(t) => println!("{t}"),
                None => println!("(no parse)"),
            }
        }
        OutputKind::Score => {
            println!("recognized: {}", outcome.recognized);
            println!("score: {}", outcome.score);
        }
    }
    if outcome.recognized {
        EXIT_RECOGNIZED
    } else {
        EXIT_UNRECOGNIZED
    }
}

fn cmd_oracle(args: OracleArgs) -> i32 {
    let text = match std::fs::read_to_string(&args.grammar) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.grammar.display());
            return EXIT_ERROR;
        }
    };
    let grammar = match load_acfg(&text) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let report = oracle_generate(&grammar, args.max_len, args.max_steps, args.tol);
    for (tokens, mass) in &report.masses {
        println!("{} {}", tokens.join(" "), mass);
    }
    println!(
        "# residual <= {} after {} steps ({})",
        report.residual,
        report.steps_taken,
        if report.converged {
            "converged"
        } else {
            "fixpoint not reached"
        }
    );
    EXIT_RECOGNIZED
}
