//! A generic probabilistic chart-parsing engine for abstract grammars.
//!
//! Grammars whose nonterminals carry arbitrary data and whose yield is built
//! by a tuple algebra plug into a five-function interface
//! ([`grammar::GrammarContract`]); the agenda-driven engine
//! ([`chart::run_chartparser`]) then recognizes, scores, and builds parse
//! forests over any [`semiring::Semiring`]. Two frontends ship with the
//! crate: probabilistic abstract context-free grammars (with tuple-algebra
//! rules reaching into the mildly context-sensitive languages) and
//! Minimalist Grammars.
//!
//! ```
//! use agparse::chart::{run_chartparser, ParserConfig};
//! use agparse::formats::load_acfg;
//! use agparse::semiring::{LogProb, Semiring};
//!
//! let grammar = load_acfg("g: S -> S S @ 0.4\nh: S -> 'x' @ 0.6\nstart S\n").unwrap();
//! let input: Vec<String> = vec!["x".into(), "x".into()];
//! let forest = run_chartparser::<_, LogProb>(&grammar, &input, &ParserConfig::default()).unwrap();
//! assert!(forest.recognized());
//! assert!((forest.inside().prob() - 0.144).abs() < 1e-9);
//! ```

pub mod acfg;
pub mod algebra;
pub mod chart;
pub mod cli;
pub mod forest;
pub mod formats;
pub mod grammar;
pub mod minimalist;
pub mod oracle;
pub mod semiring;

pub use algebra::{CallExpr, Piece, Range, RangeTuple, TermFunction, WordTuple};
pub use chart::{run_chartparser, ParseError, ParserConfig};
pub use forest::{DerivTree, ParseForest};
pub use grammar::{CombinePolicy, CompletionRecord, GrammarContract};
pub use semiring::{LogProb, Recognized, Semiring, ViterbiProb};
