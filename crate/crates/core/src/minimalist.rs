//! Minimalist Grammar frontend: features, lexicon, merge/move structure
//! building under the Shortest Move Constraint, and the tuple operations
//! that carry the string (and range) side of each structure-building step.
//!
//! An expression is a nonempty sequence of chains; here a category is the
//! feature projection of an expression ([`CategoryTuple`]), while the string
//! parts live in word/range tuples of the same dimension. Merge checks the
//! head features of two expressions (the selector is always the first
//! argument); move checks the head licensor against the unique chain opening
//! with the matching licensee.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Arc;

use crate::algebra::{Piece, RangeTuple, TermFunction, WordTuple};
use crate::grammar::{
    ranges_disjoint, CombinePolicy, CompletionRecord, DeclaredGrammar, DeclaredLeaf, DeclaredRule,
    GrammarContract,
};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Polarity {
    /// `f` — can be selected
    Selectee,
    /// `=f` — selects an `f` to the right
    SelectRight,
    /// `f=` — selects an `f` to the left
    SelectLeft,
    /// `+f` — triggers movement
    Licensor,
    /// `-f` — undergoes movement
    Licensee,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Feature {
    pub polarity: Polarity,
    pub name: String,
}

impl Feature {
    pub fn new(polarity: Polarity, name: impl Into<String>) -> Self {
        Feature {
            polarity,
            name: name.into(),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Selectee => write!(f, "{}", self.name),
            Polarity::SelectRight => write!(f, "={}", self.name),
            Polarity::SelectLeft => write!(f, "{}=", self.name),
            Polarity::Licensor => write!(f, "+{}", self.name),
            Polarity::Licensee => write!(f, "-{}", self.name),
        }
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let starts_eq = s.starts_with('=');
        let ends_eq = s.ends_with('=');
        let (polarity, name) = if starts_eq && ends_eq {
            return Err(format!("ambiguous selector feature {s}"));
        } else if starts_eq {
            (Polarity::SelectRight, &s[1..])
        } else if ends_eq {
            (Polarity::SelectLeft, &s[..s.len() - 1])
        } else if let Some(rest) = s.strip_prefix('+') {
            (Polarity::Licensor, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Polarity::Licensee, rest)
        } else {
            (Polarity::Selectee, s)
        };
        if name.is_empty() {
            return Err(format!("feature {s} has an empty name"));
        }
        Ok(Feature::new(polarity, name))
    }
}

pub type Chain = Vec<Feature>;

/// The feature side of an expression: a nonempty sequence of nonempty
/// chains, the first being the head. Fully checked chains never appear.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CategoryTuple {
    chains: Vec<Chain>,
}

impl CategoryTuple {
    pub fn new(chains: Vec<Chain>) -> Self {
        assert!(!chains.is_empty(), "expressions have at least one chain");
        assert!(
            chains.iter().all(|c| !c.is_empty()),
            "fully checked chains are removed"
        );
        CategoryTuple { chains }
    }

    pub fn single(chain: Chain) -> Self {
        CategoryTuple::new(vec![chain])
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn dim(&self) -> usize {
        self.chains.len()
    }

    pub fn head(&self) -> &Chain {
        &self.chains[0]
    }

    pub fn feature_count(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }
}

impl fmt::Display for CategoryTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, chain) in self.chains.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, feat) in chain.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{feat}")?;
            }
            write!(f, "]")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexicalItem {
    /// At most one token; empty for phonetically silent items.
    pub phon: Vec<String>,
    pub features: Chain,
    pub score: f64,
}

impl LexicalItem {
    pub fn category(&self) -> CategoryTuple {
        CategoryTuple::single(self.features.clone())
    }

    fn function_name(&self) -> String {
        let phon = if self.phon.is_empty() {
            "ε".to_string()
        } else {
            self.phon.join(" ")
        };
        let feats = self
            .features
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        format!("{phon}::{feats}")
    }
}

/// True iff `f` checks `g`: a selector against the matching selectee, or a
/// licensor against the matching licensee.
pub fn feature_match(f: &Feature, g: &Feature) -> bool {
    if f.name != g.name {
        return false;
    }
    matches!(
        (f.polarity, g.polarity),
        (
            Polarity::SelectRight | Polarity::SelectLeft,
            Polarity::Selectee
        ) | (Polarity::Licensor, Polarity::Licensee)
    )
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MergeCase {
    R1,
    L1,
    R2,
    L2,
}

impl MergeCase {
    pub fn name(self) -> &'static str {
        match self {
            MergeCase::R1 => "merge_R1",
            MergeCase::L1 => "merge_L1",
            MergeCase::R2 => "merge_R2",
            MergeCase::L2 => "merge_L2",
        }
    }
}

impl fmt::Display for MergeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All feature-level results of merging `a` (the selector side) with `b`.
/// The head features are checked and deleted; if `b`'s head is exhausted its
/// remaining chains join the result (R1/L1), otherwise its head survives as
/// a new chain (R2/L2). A merge whose result head would be empty is a dead
/// expression and is treated as undefined.
pub fn mg_merge(a: &CategoryTuple, b: &CategoryTuple) -> Vec<(CategoryTuple, MergeCase)> {
    let fa = &a.head()[0];
    let fb = &b.head()[0];
    if !feature_match(fa, fb) {
        return Vec::new();
    }
    let gamma: Chain = a.head()[1..].to_vec();
    if gamma.is_empty() {
        return Vec::new();
    }
    let delta: Chain = b.head()[1..].to_vec();
    let case = match (fa.polarity, delta.is_empty()) {
        (Polarity::SelectRight, true) => MergeCase::R1,
        (Polarity::SelectLeft, true) => MergeCase::L1,
        (Polarity::SelectRight, false) => MergeCase::R2,
        (Polarity::SelectLeft, false) => MergeCase::L2,
        _ => return Vec::new(),
    };
    let mut chains = vec![gamma];
    chains.extend(a.chains()[1..].iter().cloned());
    if !delta.is_empty() {
        chains.push(delta);
    }
    chains.extend(b.chains()[1..].iter().cloned());
    vec![(CategoryTuple::new(chains), case)]
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MoveCase {
    /// The moved chain is exhausted and removed.
    One,
    /// The moved chain survives with its remaining features.
    Two,
}

impl MoveCase {
    pub fn name(self) -> &'static str {
        match self {
            MoveCase::One => "move_1",
            MoveCase::Two => "move_2",
        }
    }
}

/// Two chains compete for the same licensor: the Shortest Move Constraint
/// leaves move undefined, which is reported distinctly from a licensor with
/// no matching chain at all.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SmcViolation;

/// Feature-level move. Returns the applicable results (at most one, by the
/// SMC) together with the index of the moved chain.
pub fn mg_move(a: &CategoryTuple) -> Result<Vec<(CategoryTuple, MoveCase, usize)>, SmcViolation> {
    let head = &a.head()[0];
    if head.polarity != Polarity::Licensor {
        return Ok(Vec::new());
    }
    let movers: Vec<usize> = (1..a.dim())
        .filter(|&i| {
            let f = &a.chains()[i][0];
            f.polarity == Polarity::Licensee && f.name == head.name
        })
        .collect();
    match movers.len() {
        0 => Ok(Vec::new()),
        1 => {
            let i = movers[0];
            let gamma: Chain = a.head()[1..].to_vec();
            if gamma.is_empty() {
                return Ok(Vec::new());
            }
            let mover_tail: Chain = a.chains()[i][1..].to_vec();
            let mut chains = vec![gamma];
            for (j, c) in a.chains().iter().enumerate().skip(1) {
                if j == i {
                    if !mover_tail.is_empty() {
                        chains.push(mover_tail.clone());
                    }
                } else {
                    chains.push(c.clone());
                }
            }
            let case = if mover_tail.is_empty() {
                MoveCase::One
            } else {
                MoveCase::Two
            };
            Ok(vec![(CategoryTuple::new(chains), case, i)])
        }
        _ => Err(SmcViolation),
    }
}

fn arg(arg: usize, component: usize) -> Piece<String> {
    Piece::Arg { arg, component }
}

/// The tuple operation paired with a merge case for argument dimensions
/// `(m, n)` (selector first).
pub fn merge_operation(case: MergeCase, m: usize, n: usize) -> Arc<TermFunction<String>> {
    let mut comps: Vec<Vec<Piece<String>>> = Vec::new();
    match case {
        MergeCase::R1 => {
            comps.push(vec![arg(0, 0), arg(1, 0)]);
            comps.extend((1..m).map(|k| vec![arg(0, k)]));
            comps.extend((1..n).map(|k| vec![arg(1, k)]));
        }
        MergeCase::L1 => {
            comps.push(vec![arg(1, 0), arg(0, 0)]);
            comps.extend((1..m).map(|k| vec![arg(0, k)]));
            comps.extend((1..n).map(|k| vec![arg(1, k)]));
        }
        MergeCase::R2 | MergeCase::L2 => {
            comps.extend((0..m).map(|k| vec![arg(0, k)]));
            comps.extend((0..n).map(|k| vec![arg(1, k)]));
        }
    }
    Arc::new(TermFunction::compose(case.name(), vec![m, n], comps).expect("well-formed plan"))
}

/// The tuple operation paired with a move case on dimension `m`, moving
/// component `i`. The mover lands left of the head; move_2 leaves the
/// strings in place.
pub fn move_operation(case: MoveCase, m: usize, i: usize) -> Arc<TermFunction<String>> {
    let comps: Vec<Vec<Piece<String>>> = match case {
        MoveCase::One => {
            let mut comps = vec![vec![arg(0, i), arg(0, 0)]];
            comps.extend((1..m).filter(|&k| k != i).map(|k| vec![arg(0, k)]));
            comps
        }
        MoveCase::Two => (0..m).map(|k| vec![arg(0, k)]).collect(),
    };
    Arc::new(TermFunction::compose(case.name(), vec![m], comps).expect("well-formed plan"))
}

#[derive(Debug)]
pub struct MgGrammar {
    lexicon: Vec<LexicalItem>,
    starts: Vec<CategoryTuple>,
    /// Expressions can hold at most this many chains: the head plus one
    /// mover per distinct licensee name (the SMC caps the rest).
    chain_bound: usize,
    smc_blocks: AtomicUsize,
}

impl MgGrammar {
    pub fn new(
        lexicon: Vec<LexicalItem>,
        start_features: Vec<String>,
    ) -> Result<MgGrammar, Vec<String>> {
        let mut errors = Vec::new();
        let mut start_names: Vec<String> = Vec::new();
        for s in start_features {
            if !start_names.contains(&s) {
                start_names.push(s);
            }
        }
        if start_names.is_empty() {
            errors.push("no start category declared".into());
        }
        let mut seen: Vec<(&Vec<String>, &Chain)> = Vec::new();
        for item in &lexicon {
            let name = item.function_name();
            if item.phon.len() > 1 {
                errors.push(format!(
                    "lexical item {name}: multi-token phonology is not supported"
                ));
            }
            if item.features.is_empty() {
                errors.push(format!("lexical item {name}: empty feature sequence"));
            }
            if !(0.0..=1.0).contains(&item.score) || !item.score.is_finite() {
                errors.push(format!(
                    "lexical item {name}: score {} outside [0,1]",
                    item.score
                ));
            }
            if seen.contains(&(&item.phon, &item.features)) {
                errors.push(format!("duplicate lexical item {name}"));
            } else {
                seen.push((&item.phon, &item.features));
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let mut licensees: Vec<&str> = lexicon
            .iter()
            .flat_map(|i| i.features.iter())
            .filter(|f| f.polarity == Polarity::Licensee)
            .map(|f| f.name.as_str())
            .collect();
        licensees.sort_unstable();
        licensees.dedup();
        let chain_bound = 1 + licensees.len();
        let starts = start_names
            .into_iter()
            .map(|name| CategoryTuple::single(vec![Feature::new(Polarity::Selectee, name)]))
            .collect();
        Ok(MgGrammar {
            lexicon,
            starts,
            chain_bound,
            smc_blocks: AtomicUsize::new(0),
        })
    }

    pub fn lexicon(&self) -> &[LexicalItem] {
        &self.lexicon
    }

    pub fn chain_bound(&self) -> usize {
        self.chain_bound
    }

    /// How many times move was blocked by the SMC across all parses with
    /// this grammar instance.
    pub fn smc_blocks(&self) -> usize {
        self.smc_blocks.load(AtomicOrdering::Relaxed)
    }

    /// All tuple operations of the grammar: one constant per lexical item
    /// and the structure-building operations instantiated for every
    /// dimension within the chain bound.
    pub fn tuple_operations(&self) -> Vec<Arc<TermFunction<String>>> {
        let k = self.chain_bound;
        let mut ops: Vec<Arc<TermFunction<String>>> = self
            .lexicon
            .iter()
            .map(|item| {
                Arc::new(TermFunction::constant(
                    item.function_name(),
                    WordTuple::single(item.phon.clone()),
                ))
            })
            .collect();
        for m in 1..=k {
            for n in 1..=k {
                for case in [MergeCase::R1, MergeCase::L1, MergeCase::R2, MergeCase::L2] {
                    let result_dim = match case {
                        MergeCase::R1 | MergeCase::L1 => m + n - 1,
                        MergeCase::R2 | MergeCase::L2 => m + n,
                    };
                    if result_dim >= 1 && result_dim <= k {
                        ops.push(merge_operation(case, m, n));
                    }
                }
            }
        }
        for m in 2..=k {
            for i in 1..m {
                ops.push(move_operation(MoveCase::One, m, i));
                ops.push(move_operation(MoveCase::Two, m, i));
            }
        }
        ops
    }

    /// Derivable rewrites up to `depth` structure-building steps, for the
    /// conformance suite: the closure of the lexical categories under merge
    /// and move, each application recorded as a declared rule.
    pub fn enumerate_rewrites(&self, depth: usize) -> DeclaredGrammar<CategoryTuple, String> {
        let mut cats: Vec<CategoryTuple> = Vec::new();
        for item in &self.lexicon {
            let c = item.category();
            if !cats.contains(&c) {
                cats.push(c);
            }
        }
        let mut rules: Vec<DeclaredRule<CategoryTuple>> = Vec::new();
        let record =
            |rules: &mut Vec<DeclaredRule<CategoryTuple>>, lhs: CategoryTuple, f: String, rhs| {
                if !rules
                    .iter()
                    .any(|r| r.lhs == lhs && r.function == f && r.rhs == rhs)
                {
                    rules.push(DeclaredRule {
                        lhs,
                        function: f,
                        rhs,
                        prob: 1.0,
                    });
                }
            };
        for _ in 0..depth {
            let snapshot = cats.clone();
            for a in &snapshot {
                for b in &snapshot {
                    for (result, case) in mg_merge(a, b) {
                        record(
                            &mut rules,
                            result.clone(),
                            case.name().to_string(),
                            vec![a.clone(), b.clone()],
                        );
                        if !cats.contains(&result) {
                            cats.push(result);
                        }
                    }
                }
                if let Ok(results) = mg_move(a) {
                    for (result, case, _) in results {
                        record(
                            &mut rules,
                            result.clone(),
                            case.name().to_string(),
                            vec![a.clone()],
                        );
                        if !cats.contains(&result) {
                            cats.push(result);
                        }
                    }
                }
            }
            if cats.len() == snapshot.len() {
                break;
            }
        }
        let leaves = self
            .lexicon
            .iter()
            .map(|item| DeclaredLeaf {
                lhs: item.category(),
                function: item.function_name(),
                token: item.phon.first().cloned(),
                prob: item.score,
            })
            .collect();
        DeclaredGrammar {
            rules,
            leaves,
            mass_normalized: false,
        }
    }

    fn lexical_record(&self, item: &LexicalItem) -> CompletionRecord<CategoryTuple, String> {
        CompletionRecord {
            lhs: item.category(),
            function: Arc::new(TermFunction::constant(
                item.function_name(),
                WordTuple::single(item.phon.clone()),
            )),
            rhs: Vec::new(),
            prob: item.score,
        }
    }
}

/// A state of the reduction automaton: the categories consumed so far.
/// Merge rules are binary, so two categories make a state final.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MgState {
    pub categories: Vec<CategoryTuple>,
    pub isfinal: bool,
}

impl GrammarContract for MgGrammar {
    type Category = CategoryTuple;
    type Terminal = String;
    type State = MgState;

    fn start_states(&self) -> Vec<MgState> {
        vec![MgState {
            categories: Vec::new(),
            isfinal: false,
        }]
    }

    fn start_categories(&self) -> Vec<CategoryTuple> {
        self.starts.clone()
    }

    fn tran_possible(&self, state: &MgState, cat: &CategoryTuple) -> bool {
        if state.categories.is_empty() {
            return true;
        }
        if state.isfinal {
            return false;
        }
        !mg_merge(&state.categories[0], cat).is_empty()
    }

    fn tran(&self, state: &MgState, cat: &CategoryTuple) -> Option<MgState> {
        if !self.tran_possible(state, cat) {
            return None;
        }
        let mut categories = state.categories.clone();
        categories.push(cat.clone());
        let isfinal = categories.len() == 2;
        Some(MgState {
            categories,
            isfinal,
        })
    }

    fn comp(&self, state: &MgState) -> Vec<CompletionRecord<CategoryTuple, String>> {
        match state.categories.as_slice() {
            [a, b] => mg_merge(a, b)
                .into_iter()
                .map(|(result, case)| CompletionRecord {
                    lhs: result,
                    function: merge_operation(case, a.dim(), b.dim()),
                    rhs: vec![a.clone(), b.clone()],
                    prob: 1.0,
                })
                .collect(),
            [a] => match mg_move(a) {
                Ok(results) => results
                    .into_iter()
                    .map(|(result, case, i)| CompletionRecord {
                        lhs: result,
                        function: move_operation(case, a.dim(), i),
                        rhs: vec![a.clone()],
                        prob: 1.0,
                    })
                    .collect(),
                Err(SmcViolation) => {
                    self.smc_blocks.fetch_add(1, AtomicOrdering::Relaxed);
                    Vec::new()
                }
            },
            _ => Vec::new(),
        }
    }

    fn comp_terminal(&self, terminal: &String) -> Vec<CompletionRecord<CategoryTuple, String>> {
        self.lexicon
            .iter()
            .filter(|item| item.phon.len() == 1 && &item.phon[0] == terminal)
            .map(|item| self.lexical_record(item))
            .collect()
    }

    fn comp_empty(&self) -> Vec<CompletionRecord<CategoryTuple, String>> {
        self.lexicon
            .iter()
            .filter(|item| item.phon.is_empty())
            .map(|item| self.lexical_record(item))
            .collect()
    }

    fn combine_policy(&self) -> CombinePolicy {
        CombinePolicy::Anywhere
    }

    fn range_compatible(&self, edge_ranges: &[RangeTuple], cons: &RangeTuple) -> bool {
        ranges_disjoint(edge_ranges, cons)
    }
}
