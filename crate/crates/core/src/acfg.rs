//! Probabilistic abstract context-free grammar frontend.
//!
//! Rules are grouped into named partial rewrite functions: the same function
//! name may rewrite several nonterminals (sharing its probability slot in
//! each of their distributions), but at most one image per nonterminal.
//! Images are category sequences in the context-free case, or call
//! expressions over a declared operation table in the general (tuple
//! algebra) case. Either way a rule compiles down to a single composed term
//! function over the variables of its image, which is what the reduction
//! automaton sees.
//!
//! States are category sequences; the transition function is concatenation,
//! filtered to extensions that still prefix some rule's right-hand side
//! (states that cannot complete are never entered); the completion function
//! is rule lookup by right-hand side.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::algebra::{Piece, RangeTuple, TermFunction, WordTuple};
use crate::grammar::{
    ranges_disjoint, CombinePolicy, CompletionRecord, DeclaredGrammar, DeclaredLeaf, DeclaredRule,
    GrammarContract,
};

/// A category: a nonterminal name or a terminal token. Terminal categories
/// may appear in rule images; every terminal category implicitly rewrites to
/// its own token with probability 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Category {
    Nonterminal(String),
    Terminal(String),
}

impl Category {
    pub fn nt(name: impl Into<String>) -> Self {
        Category::Nonterminal(name.into())
    }

    pub fn term(tok: impl Into<String>) -> Self {
        Category::Terminal(tok.into())
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Category::Terminal(_))
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Nonterminal(n) => write!(f, "{n}"),
            Category::Terminal(t) => write!(f, "'{t}'"),
        }
    }
}

/// Surface form of a rule image.
#[derive(Clone, PartialEq, Debug)]
pub enum RuleAtom {
    Cat(Category),
    /// Application of a declared operation to sub-expressions.
    Call(String, Vec<RuleAtom>),
    /// A tuple constant: one token sequence per component.
    Tuple(Vec<Vec<String>>),
}

/// A user-level rule: `function(lhs) = body`, with `P(X_lhs = function)`.
/// A body with several atoms denotes their concatenation (all dimension 1).
#[derive(Clone, PartialEq, Debug)]
pub struct Rule {
    pub function: String,
    pub lhs: String,
    pub body: Vec<RuleAtom>,
    pub prob: f64,
}

/// A declared tuple-algebra operation: a named composition plan.
#[derive(Clone, Debug)]
pub struct OperationDecl {
    pub name: String,
    pub arg_dims: Vec<usize>,
    pub components: Vec<Vec<Piece<String>>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// A rule after compilation: either a leaf (a single-token constant image)
/// or a composed term function over the categories of its image.
#[derive(Clone, Debug)]
pub struct CompiledRule {
    pub lhs: Category,
    pub function: Arc<TermFunction<String>>,
    pub rhs: Vec<Category>,
    pub prob: f64,
    /// Set exactly for leaf rules: the single token the rule yields.
    pub leaf_token: Option<String>,
}

#[derive(Debug)]
pub struct AcfgGrammar {
    rules: Vec<Rule>,
    operations: IndexMap<String, OperationDecl>,
    dims: IndexMap<String, usize>,
    starts: Vec<String>,
    compiled: Vec<CompiledRule>,
    by_rhs: HashMap<Vec<Category>, Vec<usize>>,
    /// Every prefix of every composed right-hand side: the transition
    /// filter keeps the automaton inside states that can still complete.
    rhs_prefixes: HashSet<Vec<Category>>,
    leaf_by_token: HashMap<String, Vec<usize>>,
    terminal_cats: HashSet<String>,
    term_leaf_fns: HashMap<String, Arc<TermFunction<String>>>,
    vocabulary: HashSet<String>,
    classical: bool,
    report: ValidationReport,
}

#[derive(Default)]
pub struct AcfgBuilder {
    rules: Vec<Rule>,
    operations: Vec<OperationDecl>,
    dims: IndexMap<String, usize>,
    starts: Vec<String>,
}

impl AcfgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(
        mut self,
        function: impl Into<String>,
        lhs: impl Into<String>,
        body: Vec<RuleAtom>,
        prob: f64,
    ) -> Self {
        self.rules.push(Rule {
            function: function.into(),
            lhs: lhs.into(),
            body,
            prob,
        });
        self
    }

    /// Context-free sugar: the body is a sequence of category names;
    /// quoted-style terminals are passed as `Category::Terminal`.
    pub fn cf_rule(
        self,
        function: impl Into<String>,
        lhs: impl Into<String>,
        body: Vec<Category>,
        prob: f64,
    ) -> Self {
        self.rule(
            function,
            lhs,
            body.into_iter().map(RuleAtom::Cat).collect(),
            prob,
        )
    }

    pub fn operation(mut self, op: OperationDecl) -> Self {
        self.operations.push(op);
        self
    }

    pub fn dim(mut self, nonterminal: impl Into<String>, dim: usize) -> Self {
        self.dims.insert(nonterminal.into(), dim);
        self
    }

    pub fn start(mut self, nonterminal: impl Into<String>) -> Self {
        self.starts.push(nonterminal.into());
        self
    }

    /// Validates and compiles. Returns the grammar or the full report with
    /// at least one error.
    pub fn build(self) -> Result<AcfgGrammar, ValidationReport> {
        AcfgGrammar::from_parts(self.rules, self.operations, self.dims, self.starts)
    }
}

/// Result of flattening one rule image: the argument categories in order of
/// occurrence, and the output components as piece sequences over them.
struct Flattened {
    rhs: Vec<Category>,
    components: Vec<Vec<Piece<String>>>,
}

impl AcfgGrammar {
    pub fn builder() -> AcfgBuilder {
        AcfgBuilder::new()
    }

    fn from_parts(
        rules: Vec<Rule>,
        operations: Vec<OperationDecl>,
        dims: IndexMap<String, usize>,
        starts: Vec<String>,
    ) -> Result<AcfgGrammar, ValidationReport> {
        let mut report = ValidationReport::default();
        let mut ops: IndexMap<String, OperationDecl> = IndexMap::new();
        let mut op_fns: IndexMap<String, Arc<TermFunction<String>>> = IndexMap::new();

        for op in operations {
            if ops.contains_key(&op.name) {
                report
                    .errors
                    .push(format!("operation {} declared twice", op.name));
                continue;
            }
            if op.arg_dims.is_empty() {
                report.errors.push(format!(
                    "operation {} takes no arguments; spell constants as tuples in rule bodies",
                    op.name
                ));
                continue;
            }
            match TermFunction::compose(op.name.clone(), op.arg_dims.clone(), op.components.clone())
            {
                Ok(f) => {
                    op_fns.insert(op.name.clone(), Arc::new(f));
                    ops.insert(op.name.clone(), op);
                }
                Err(e) => report.errors.push(e.to_string()),
            }
        }

        // operation plans must use each input component at most once
        for f in op_fns.values() {
            if let Some(usage) = f.component_usage() {
                for (a, comps) in usage.iter().enumerate() {
                    for (c, n) in comps.iter().enumerate() {
                        if *n > 1 {
                            report.errors.push(format!(
                                "operation {} copies component ${}.{}",
                                f.name(),
                                a + 1,
                                c + 1
                            ));
                        }
                    }
                }
            }
        }

        let dim_of = |dims: &IndexMap<String, usize>, c: &Category| -> usize {
            match c {
                Category::Terminal(_) => 1,
                Category::Nonterminal(n) => *dims.get(n).unwrap_or(&1),
            }
        };

        // partial-function discipline: one image per (function, lhs)
        let mut seen: HashMap<(String, String), &Rule> = HashMap::new();
        for rule in &rules {
            let key = (rule.function.clone(), rule.lhs.clone());
            if let Some(prev) = seen.get(&key) {
                if prev.body == rule.body && (prev.prob - rule.prob).abs() < 1e-15 {
                    report.errors.push(format!(
                        "rule {}: {} is declared twice at {}",
                        rule.function, rule.function, rule.lhs
                    ));
                } else {
                    report.errors.push(format!(
                        "{} is not a function: two images at {}",
                        rule.function, rule.lhs
                    ));
                }
            } else {
                seen.insert(key, rule);
            }
        }

        // probabilities: range and per-nonterminal mass
        let mut mass: IndexMap<&str, f64> = IndexMap::new();
        for rule in &rules {
            if !(0.0..=1.0).contains(&rule.prob) || !rule.prob.is_finite() {
                report.errors.push(format!(
                    "rule {} at {}: probability {} outside [0,1]",
                    rule.function, rule.lhs, rule.prob
                ));
            }
            *mass.entry(rule.lhs.as_str()).or_insert(0.0) += rule.prob;
        }
        for (lhs, m) in &mass {
            if (m - 1.0).abs() > 1e-9 {
                report
                    .errors
                    .push(format!("distribution at {lhs}: mass {m} != 1"));
            }
        }

        let mut deduped: Vec<String> = Vec::new();
        for s in starts {
            if !deduped.contains(&s) {
                deduped.push(s);
            }
        }
        let starts = deduped;
        if starts.is_empty() {
            report.errors.push("no start category declared".into());
        }
        for s in &starts {
            if dim_of(&dims, &Category::nt(s.clone())) != 1 {
                report
                    .errors
                    .push(format!("start category {s} must have dimension 1"));
            }
            if !rules.iter().any(|r| &r.lhs == s) {
                report
                    .errors
                    .push(format!("start category {s} has no rules"));
            }
        }

        // compile each rule; collect further validation errors on the way
        let mut compiled = Vec::new();
        for rule in &rules {
            match compile_rule(rule, &ops, &op_fns, &dims, &dim_of) {
                Ok(c) => compiled.push(c),
                Err(msg) => report
                    .errors
                    .push(format!("rule {} at {}: {msg}", rule.function, rule.lhs)),
            }
        }

        // reachability and productivity over the compiled rules (warnings)
        let nonterminals: HashSet<&str> = rules.iter().map(|r| r.lhs.as_str()).collect();
        let mut reachable: HashSet<String> = starts.iter().cloned().collect();
        loop {
            let before = reachable.len();
            for c in &compiled {
                if let Category::Nonterminal(lhs) = &c.lhs {
                    if reachable.contains(lhs) {
                        for rc in &c.rhs {
                            if let Category::Nonterminal(n) = rc {
                                reachable.insert(n.clone());
                            }
                        }
                    }
                }
            }
            if reachable.len() == before {
                break;
            }
        }
        for nt in &nonterminals {
            if !reachable.contains(*nt) {
                report
                    .warnings
                    .push(format!("nonterminal {nt} unreachable from the start"));
            }
        }
        let mut productive: HashSet<String> = HashSet::new();
        loop {
            let before = productive.len();
            for c in &compiled {
                if let Category::Nonterminal(lhs) = &c.lhs {
                    let all = c.rhs.iter().all(|rc| match rc {
                        Category::Terminal(_) => true,
                        Category::Nonterminal(n) => productive.contains(n),
                    });
                    if all {
                        productive.insert(lhs.clone());
                    }
                }
            }
            if productive.len() == before {
                break;
            }
        }
        for nt in &nonterminals {
            if !productive.contains(*nt) {
                report
                    .warnings
                    .push(format!("nonterminal {nt} derives no terminal string"));
            }
        }

        if !report.errors.is_empty() {
            return Err(report);
        }

        // indexes
        let mut by_rhs: HashMap<Vec<Category>, Vec<usize>> = HashMap::new();
        let mut rhs_prefixes: HashSet<Vec<Category>> = HashSet::new();
        let mut leaf_by_token: HashMap<String, Vec<usize>> = HashMap::new();
        let mut terminal_cats: HashSet<String> = HashSet::new();
        let mut vocabulary: HashSet<String> = HashSet::new();
        for (i, c) in compiled.iter().enumerate() {
            if let Some(tok) = &c.leaf_token {
                leaf_by_token.entry(tok.clone()).or_default().push(i);
                vocabulary.insert(tok.clone());
            } else {
                by_rhs.entry(c.rhs.clone()).or_default().push(i);
                for k in 1..=c.rhs.len() {
                    rhs_prefixes.insert(c.rhs[..k].to_vec());
                }
                for rc in &c.rhs {
                    if let Category::Terminal(t) = rc {
                        terminal_cats.insert(t.clone());
                        vocabulary.insert(t.clone());
                    }
                }
            }
        }
        for op in ops.values() {
            for comp in &op.components {
                for piece in comp {
                    if let Piece::Lit(toks) = piece {
                        vocabulary.extend(toks.iter().cloned());
                    }
                }
            }
        }
        let term_leaf_fns = terminal_cats
            .iter()
            .map(|t| {
                (
                    t.clone(),
                    Arc::new(TermFunction::constant(
                        format!("'{t}'"),
                        WordTuple::single(vec![t.clone()]),
                    )),
                )
            })
            .collect();

        // a grammar is classical context-free when every category has
        // dimension 1 and every composed rule is a plain in-order
        // concatenation of its arguments
        let classical = dims.values().all(|d| *d == 1)
            && compiled.iter().all(|c| {
                c.leaf_token.is_some()
                    || c.function.composition().is_some_and(|comps| {
                        comps.len() == 1
                            && comps[0].len() == c.rhs.len()
                            && comps[0].iter().enumerate().all(
                                |(i, p)| matches!(p, Piece::Arg { arg, component: 0 } if *arg == i),
                            )
                    })
            });

        Ok(AcfgGrammar {
            rules,
            operations: ops,
            dims,
            starts,
            compiled,
            by_rhs,
            rhs_prefixes,
            leaf_by_token,
            terminal_cats,
            term_leaf_fns,
            vocabulary,
            classical,
            report,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn operations(&self) -> impl Iterator<Item = &OperationDecl> {
        self.operations.values()
    }

    pub fn operation_functions(&self) -> Vec<Arc<TermFunction<String>>> {
        self.operations
            .values()
            .map(|op| {
                Arc::new(
                    TermFunction::compose(
                        op.name.clone(),
                        op.arg_dims.clone(),
                        op.components.clone(),
                    )
                    .expect("validated operation"),
                )
            })
            .collect()
    }

    pub fn compiled_rules(&self) -> &[CompiledRule] {
        &self.compiled
    }

    pub fn dim_decls(&self) -> &IndexMap<String, usize> {
        &self.dims
    }

    pub fn starts(&self) -> &[String] {
        &self.starts
    }

    pub fn dimension(&self, cat: &Category) -> usize {
        match cat {
            Category::Terminal(_) => 1,
            Category::Nonterminal(n) => *self.dims.get(n).unwrap_or(&1),
        }
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_classical_cf(&self) -> bool {
        self.classical
    }

    pub(crate) fn rules_for(&self, cat: &Category) -> Vec<&CompiledRule> {
        self.compiled.iter().filter(|r| &r.lhs == cat).collect()
    }

    /// Classical rule set extraction: every `(lhs, image)` pair over all
    /// rewrite functions, with terminal leaves spelled as terminal
    /// categories.
    pub fn classical_rules(&self) -> Vec<(String, Vec<Category>)> {
        self.compiled
            .iter()
            .map(|c| {
                let lhs = match &c.lhs {
                    Category::Nonterminal(n) => n.clone(),
                    Category::Terminal(t) => t.clone(),
                };
                match &c.leaf_token {
                    Some(tok) => (lhs, vec![Category::term(tok.clone())]),
                    None => (lhs, c.rhs.clone()),
                }
            })
            .collect()
    }

    /// The frontend's declared rule set, for the conformance suite.
    pub fn declared(&self) -> DeclaredGrammar<Category, String> {
        let mut rules = Vec::new();
        let mut leaves = Vec::new();
        for c in &self.compiled {
            match &c.leaf_token {
                Some(tok) => leaves.push(DeclaredLeaf {
                    lhs: c.lhs.clone(),
                    function: c.function.name().to_string(),
                    token: Some(tok.clone()),
                    prob: c.prob,
                }),
                None => rules.push(DeclaredRule {
                    lhs: c.lhs.clone(),
                    function: c.function.name().to_string(),
                    rhs: c.rhs.clone(),
                    prob: c.prob,
                }),
            }
        }
        for t in &self.terminal_cats {
            leaves.push(DeclaredLeaf {
                lhs: Category::term(t.clone()),
                function: format!("'{t}'"),
                token: Some(t.clone()),
                prob: 1.0,
            });
        }
        DeclaredGrammar {
            rules,
            leaves,
            mass_normalized: true,
        }
    }
}

fn compile_rule(
    rule: &Rule,
    ops: &IndexMap<String, OperationDecl>,
    op_fns: &IndexMap<String, Arc<TermFunction<String>>>,
    dims: &IndexMap<String, usize>,
    dim_of: &impl Fn(&IndexMap<String, usize>, &Category) -> usize,
) -> Result<CompiledRule, String> {
    let lhs = Category::nt(rule.lhs.clone());
    let flat = flatten_body(&rule.body, ops, op_fns, dims, dim_of)?;
    let lhs_dim = dim_of(dims, &lhs);
    if flat.components.len() != lhs_dim {
        return Err(format!(
            "image has dimension {}, but {} has dimension {lhs_dim}",
            flat.components.len(),
            rule.lhs
        ));
    }

    // leaf rule: image is exactly one terminal token
    if flat.rhs.len() == 1
        && flat.rhs[0].is_terminal()
        && flat.components.len() == 1
        && flat.components[0]
            == vec![Piece::Arg {
                arg: 0,
                component: 0,
            }]
    {
        let Category::Terminal(tok) = &flat.rhs[0] else {
            unreachable!()
        };
        return Ok(CompiledRule {
            lhs,
            function: Arc::new(TermFunction::constant(
                rule.function.clone(),
                WordTuple::single(vec![tok.clone()]),
            )),
            rhs: Vec::new(),
            prob: rule.prob,
            leaf_token: Some(tok.clone()),
        });
    }

    let arg_dims: Vec<usize> = flat.rhs.iter().map(|c| dim_of(dims, c)).collect();
    let function = TermFunction::compose(rule.function.clone(), arg_dims, flat.components)
        .map_err(|e| e.to_string())?;
    // every input component must be used exactly once: copying breaks the
    // range semantics and deletion breaks the probability semantics
    if let Some(usage) = function.component_usage() {
        for (a, comps) in usage.iter().enumerate() {
            for (c, n) in comps.iter().enumerate() {
                if *n != 1 {
                    return Err(format!(
                        "component {}.{} of the image is used {n} times; each must be used exactly once",
                        a + 1,
                        c + 1
                    ));
                }
            }
        }
    }
    Ok(CompiledRule {
        lhs,
        function: Arc::new(function),
        rhs: flat.rhs,
        prob: rule.prob,
        leaf_token: None,
    })
}

fn flatten_body(
    body: &[RuleAtom],
    ops: &IndexMap<String, OperationDecl>,
    op_fns: &IndexMap<String, Arc<TermFunction<String>>>,
    dims: &IndexMap<String, usize>,
    dim_of: &impl Fn(&IndexMap<String, usize>, &Category) -> usize,
) -> Result<Flattened, String> {
    if body.is_empty() {
        return Err("empty image (erasing rules are not supported)".into());
    }
    if body.len() == 1 {
        return flatten_atom(&body[0], ops, op_fns, dims, dim_of);
    }
    // a sequence denotes concatenation of dimension-1 parts
    let mut rhs = Vec::new();
    let mut pieces = Vec::new();
    for atom in body {
        let flat = flatten_atom(atom, ops, op_fns, dims, dim_of)?;
        if flat.components.len() != 1 {
            return Err(format!(
                "sequence element of dimension {} cannot be concatenated",
                flat.components.len()
            ));
        }
        let offset = rhs.len();
        rhs.extend(flat.rhs);
        pieces.extend(shift_pieces(&flat.components[0], offset));
    }
    Ok(Flattened {
        rhs,
        components: vec![pieces],
    })
}

fn flatten_atom(
    atom: &RuleAtom,
    ops: &IndexMap<String, OperationDecl>,
    op_fns: &IndexMap<String, Arc<TermFunction<String>>>,
    dims: &IndexMap<String, usize>,
    dim_of: &impl Fn(&IndexMap<String, usize>, &Category) -> usize,
) -> Result<Flattened, String> {
    match atom {
        RuleAtom::Cat(c) => {
            let d = dim_of(dims, c);
            Ok(Flattened {
                rhs: vec![c.clone()],
                components: (0..d)
                    .map(|k| {
                        vec![Piece::Arg {
                            arg: 0,
                            component: k,
                        }]
                    })
                    .collect(),
            })
        }
        RuleAtom::Tuple(components) => {
            // every token of the constant becomes a terminal-category slot
            if components.is_empty() {
                return Err("empty tuple constant".into());
            }
            let mut rhs = Vec::new();
            let mut out = Vec::new();
            for comp in components {
                if comp.is_empty() {
                    return Err(
                        "tuple constant has an empty component (erasing rules are not supported)"
                            .into(),
                    );
                }
                let mut pieces = Vec::new();
                for tok in comp {
                    pieces.push(Piece::Arg {
                        arg: rhs.len(),
                        component: 0,
                    });
                    rhs.push(Category::term(tok.clone()));
                }
                out.push(pieces);
            }
            Ok(Flattened {
                rhs,
                components: out,
            })
        }
        RuleAtom::Call(name, args) => {
            let op = ops
                .get(name)
                .ok_or_else(|| format!("unknown operation {name}"))?;
            let f = &op_fns[name];
            if args.len() != op.arg_dims.len() {
                return Err(format!(
                    "operation {name} expects {} arguments, got {}",
                    op.arg_dims.len(),
                    args.len()
                ));
            }
            let mut rhs = Vec::new();
            let mut flats = Vec::new();
            for (i, a) in args.iter().enumerate() {
                let flat = flatten_atom(a, ops, op_fns, dims, dim_of)?;
                if flat.components.len() != op.arg_dims[i] {
                    return Err(format!(
                        "argument {} of {name} has dimension {}, expected {}",
                        i + 1,
                        flat.components.len(),
                        op.arg_dims[i]
                    ));
                }
                let offset = rhs.len();
                rhs.extend(flat.rhs.clone());
                flats.push((offset, flat));
            }
            let comps = f.composition().expect("operations are compositions");
            let mut out = Vec::new();
            for comp in comps {
                let mut pieces = Vec::new();
                for piece in comp {
                    match piece {
                        Piece::Lit(toks) => pieces.push(Piece::Lit(toks.clone())),
                        Piece::Arg { arg, component } => {
                            let (offset, flat) = &flats[*arg];
                            pieces.extend(shift_pieces(&flat.components[*component], *offset));
                        }
                    }
                }
                out.push(pieces);
            }
            Ok(Flattened {
                rhs,
                components: out,
            })
        }
    }
}

fn shift_pieces(pieces: &[Piece<String>], offset: usize) -> Vec<Piece<String>> {
    pieces
        .iter()
        .map(|p| match p {
            Piece::Lit(toks) => Piece::Lit(toks.clone()),
            Piece::Arg { arg, component } => Piece::Arg {
                arg: arg + offset,
                component: *component,
            },
        })
        .collect()
}

impl GrammarContract for AcfgGrammar {
    type Category = Category;
    type Terminal = String;
    type State = Vec<Category>;

    fn start_states(&self) -> Vec<Self::State> {
        vec![Vec::new()]
    }

    fn start_categories(&self) -> Vec<Category> {
        self.starts
            .iter()
            .map(|s| Category::nt(s.clone()))
            .collect()
    }

    fn tran_possible(&self, state: &Self::State, cat: &Category) -> bool {
        // concatenation of category sequences, filtered to states that can
        // still lead to a completion: the extension must prefix some rule's
        // right-hand side
        let mut next = state.clone();
        next.push(cat.clone());
        self.rhs_prefixes.contains(&next)
    }

    fn tran(&self, state: &Self::State, cat: &Category) -> Option<Self::State> {
        let mut next = state.clone();
        next.push(cat.clone());
        if self.rhs_prefixes.contains(&next) {
            Some(next)
        } else {
            None
        }
    }

    fn comp(&self, state: &Self::State) -> Vec<CompletionRecord<Category, String>> {
        let Some(idxs) = self.by_rhs.get(state) else {
            return Vec::new();
        };
        idxs.iter()
            .map(|&i| {
                let r = &self.compiled[i];
                CompletionRecord {
                    lhs: r.lhs.clone(),
                    function: Arc::clone(&r.function),
                    rhs: r.rhs.clone(),
                    prob: r.prob,
                }
            })
            .collect()
    }

    fn comp_terminal(&self, terminal: &String) -> Vec<CompletionRecord<Category, String>> {
        let mut out = Vec::new();
        if self.terminal_cats.contains(terminal) {
            out.push(CompletionRecord {
                lhs: Category::term(terminal.clone()),
                function: Arc::clone(&self.term_leaf_fns[terminal]),
                rhs: Vec::new(),
                prob: 1.0,
            });
        }
        if let Some(idxs) = self.leaf_by_token.get(terminal) {
            for &i in idxs {
                let r = &self.compiled[i];
                out.push(CompletionRecord {
                    lhs: r.lhs.clone(),
                    function: Arc::clone(&r.function),
                    rhs: Vec::new(),
                    prob: r.prob,
                });
            }
        }
        out
    }

    fn known_terminal(&self, terminal: &String) -> bool {
        self.vocabulary.contains(terminal)
    }

    fn combine_policy(&self) -> CombinePolicy {
        if self.classical {
            CombinePolicy::Adjacent
        } else {
            CombinePolicy::Anywhere
        }
    }

    fn range_compatible(&self, edge_ranges: &[RangeTuple], cons: &RangeTuple) -> bool {
        ranges_disjoint(edge_ranges, cons)
    }
}

/// Number of decompositions `alpha = a1 A a2` with `a1 g(A) a2 = beta`: the
/// occurrences of `A` in `alpha` at which applying `image` yields `beta`.
pub fn splits(
    image: &[Category],
    target: &Category,
    alpha: &[Category],
    beta: &[Category],
) -> usize {
    let mut count = 0;
    for (i, c) in alpha.iter().enumerate() {
        if c != target {
            continue;
        }
        if alpha.len() - 1 + image.len() != beta.len() {
            continue;
        }
        let matches = alpha[..i] == beta[..i]
            && beta[i..i + image.len()] == image[..]
            && alpha[i + 1..] == beta[i + image.len()..];
        if matches {
            count += 1;
        }
    }
    count
}
