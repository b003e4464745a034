//! The tuple algebra over a free monoid and its partial range counterpart.
//!
//! Nonterminal yields are tuples of words ([`WordTuple`]). During parsing the
//! same operations act on tuples of index spans of the input ([`RangeTuple`]);
//! the extraction map [`RangeTuple::extract`] sends a range to the substring
//! it denotes and commutes with every term function (the homomorphism the
//! whole construction rests on).
//!
//! A [`TermFunction`] is defined once, by a linear composition plan that says
//! how output components are assembled from input components and literal
//! tokens. Both the word evaluator and the range evaluator are derived from
//! the plan, so the homomorphism law holds by construction and linearity
//! (no component copied) is a syntactic check.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("function {function}: expected {expected} arguments, got {got}")]
    ArityMismatch {
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("function {function}: argument {arg} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        function: String,
        arg: usize,
        expected: usize,
        got: usize,
    },
    #[error("function {function}: {msg}")]
    IllFormed { function: String, msg: String },
    #[error("cannot evaluate an expression containing the variable {0}")]
    UnboundVariable(String),
}

/// An index span `(start, end)` over positions `1..=m+1` of an input of
/// length `m`, with `start <= end`. The empty span `(i, i)` is admitted so
/// that phonetically empty lexical items can occupy a position.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Range {
    start: usize,
    end: usize,
}

impl Range {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start >= 1, "range positions are 1-based");
        assert!(start <= end, "range start must not exceed end");
        Range { start, end }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Partial concatenation: `(i,j) . (k,l) = (i,l)` iff `j = k`.
    pub fn concat(self, other: Range) -> Option<Range> {
        if self.end == other.start {
            Some(Range::new(self.start, other.end))
        } else {
            None
        }
    }

    /// Whether the two spans share any position. Empty spans overlap nothing.
    pub fn overlaps(self, other: Range) -> bool {
        !self.is_empty() && !other.is_empty() && self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.start, self.end)
    }
}

/// A nonempty tuple of ranges; the carrier of the range algebra.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RangeTuple(Vec<Range>);

impl RangeTuple {
    pub fn new(ranges: Vec<Range>) -> Self {
        assert!(!ranges.is_empty(), "range tuples are nonempty");
        RangeTuple(ranges)
    }

    pub fn single(r: Range) -> Self {
        RangeTuple(vec![r])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn ranges(&self) -> &[Range] {
        &self.0
    }

    /// Total number of input positions covered.
    pub fn covered_len(&self) -> usize {
        self.0.iter().map(Range::len).sum()
    }

    /// The extraction homomorphism: component-wise substring of `input`.
    /// Panics if an endpoint lies beyond `input.len() + 1`.
    pub fn extract<T: Clone>(&self, input: &[T]) -> WordTuple<T> {
        let words = self
            .0
            .iter()
            .map(|r| {
                assert!(
                    r.end <= input.len() + 1,
                    "range {r} out of bounds for input of length {}",
                    input.len()
                );
                input[r.start - 1..r.end - 1].to_vec()
            })
            .collect();
        WordTuple::new(words)
    }
}

impl fmt::Display for RangeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// A nonempty tuple of words over the terminal alphabet `T`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct WordTuple<T>(Vec<Vec<T>>);

impl<T> WordTuple<T> {
    pub fn new(words: Vec<Vec<T>>) -> Self {
        assert!(!words.is_empty(), "word tuples are nonempty");
        WordTuple(words)
    }

    pub fn single(word: Vec<T>) -> Self {
        WordTuple(vec![word])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.0
    }

    pub fn total_len(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }
}

impl<T: fmt::Display> fmt::Display for WordTuple<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            for (j, t) in w.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{t}")?;
            }
        }
        write!(f, ")")
    }
}

/// Argument and result dimensions of a term function. Constants have no
/// argument dimensions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Signature {
    pub arg_dims: Vec<usize>,
    pub result_dim: usize,
}

/// One building block of an output component: either a reference to a
/// component of an argument, or a fixed sequence of terminal tokens.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Piece<T> {
    Arg { arg: usize, component: usize },
    Lit(Vec<T>),
}

/// An operation of the tuple algebra. The composition plan drives both the
/// word-level evaluator and the partial range-level evaluator.
#[derive(Debug)]
pub enum TermOp<T> {
    /// Nullary constant yielding a fixed word tuple. Constants have no range
    /// action; they enter a parse only through the axioms.
    Constant(WordTuple<T>),
    /// Each output component is a concatenation of pieces.
    Compose(Vec<Vec<Piece<T>>>),
}

#[derive(Debug)]
pub struct TermFunction<T> {
    name: String,
    signature: Signature,
    op: TermOp<T>,
}

impl<T> PartialEq for TermFunction<T> {
    // Functions are identified by name within a grammar.
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.signature == other.signature
    }
}

impl<T> Eq for TermFunction<T> {}

impl<T> Hash for TermFunction<T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

impl<T> TermFunction<T> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.op, TermOp::Constant(_))
    }

    pub fn constant_value(&self) -> Option<&WordTuple<T>> {
        match &self.op {
            TermOp::Constant(wt) => Some(wt),
            TermOp::Compose(_) => None,
        }
    }

    pub fn composition(&self) -> Option<&[Vec<Piece<T>>]> {
        match &self.op {
            TermOp::Constant(_) => None,
            TermOp::Compose(c) => Some(c),
        }
    }

    /// How many times each input component is referenced, indexed as
    /// `usage[arg][component]`. `None` for constants.
    pub fn component_usage(&self) -> Option<Vec<Vec<usize>>> {
        let comps = self.composition()?;
        let mut usage: Vec<Vec<usize>> = self
            .signature
            .arg_dims
            .iter()
            .map(|d| vec![0; *d])
            .collect();
        for comp in comps {
            for piece in comp {
                if let Piece::Arg { arg, component } = piece {
                    usage[*arg][*component] += 1;
                }
            }
        }
        Some(usage)
    }

    /// Total number of literal tokens in the plan (or in the constant).
    pub fn literal_len(&self) -> usize {
        match &self.op {
            TermOp::Constant(wt) => wt.total_len(),
            TermOp::Compose(comps) => comps
                .iter()
                .flatten()
                .map(|p| match p {
                    Piece::Lit(toks) => toks.len(),
                    Piece::Arg { .. } => 0,
                })
                .sum(),
        }
    }
}

impl<T: Clone + Eq + fmt::Debug> TermFunction<T> {
    pub fn constant(name: impl Into<String>, value: WordTuple<T>) -> Self {
        let result_dim = value.dim();
        TermFunction {
            name: name.into(),
            signature: Signature {
                arg_dims: Vec::new(),
                result_dim,
            },
            op: TermOp::Constant(value),
        }
    }

    /// Builds a composition. Every output component must contain at least
    /// one argument reference (a pure-literal component has no position in
    /// the range algebra), and every reference must be in bounds.
    pub fn compose(
        name: impl Into<String>,
        arg_dims: Vec<usize>,
        components: Vec<Vec<Piece<T>>>,
    ) -> Result<Self, AlgebraError> {
        let name = name.into();
        let ill = |msg: String| AlgebraError::IllFormed {
            function: name.clone(),
            msg,
        };
        if arg_dims.is_empty() {
            return Err(ill("compositions take at least one argument".into()));
        }
        if components.is_empty() {
            return Err(ill("result dimension must be at least 1".into()));
        }
        for (ci, comp) in components.iter().enumerate() {
            if comp.is_empty() {
                return Err(ill(format!("output component {} is empty", ci + 1)));
            }
            let mut has_arg = false;
            for piece in comp {
                match piece {
                    Piece::Arg { arg, component } => {
                        has_arg = true;
                        if *arg >= arg_dims.len() || *component >= arg_dims[*arg] {
                            return Err(ill(format!(
                                "component reference ${}.{} out of bounds",
                                arg + 1,
                                component + 1
                            )));
                        }
                    }
                    Piece::Lit(toks) => {
                        if toks.is_empty() {
                            return Err(ill("empty literal".into()));
                        }
                    }
                }
            }
            if !has_arg {
                return Err(ill(format!(
                    "output component {} references no argument",
                    ci + 1
                )));
            }
        }
        let result_dim = components.len();
        Ok(TermFunction {
            name,
            signature: Signature {
                arg_dims,
                result_dim,
            },
            op: TermOp::Compose(components),
        })
    }

    fn check_args<A>(&self, args: &[A], dim_of: impl Fn(&A) -> usize) -> Result<(), AlgebraError> {
        if args.len() != self.signature.arg_dims.len() {
            return Err(AlgebraError::ArityMismatch {
                function: self.name.clone(),
                expected: self.signature.arg_dims.len(),
                got: args.len(),
            });
        }
        for (i, a) in args.iter().enumerate() {
            if dim_of(a) != self.signature.arg_dims[i] {
                return Err(AlgebraError::DimensionMismatch {
                    function: self.name.clone(),
                    arg: i + 1,
                    expected: self.signature.arg_dims[i],
                    got: dim_of(a),
                });
            }
        }
        Ok(())
    }

    /// Applies the function to word tuples.
    pub fn evaluate(&self, args: &[WordTuple<T>]) -> Result<WordTuple<T>, AlgebraError> {
        self.check_args(args, WordTuple::dim)?;
        match &self.op {
            TermOp::Constant(wt) => Ok(wt.clone()),
            TermOp::Compose(comps) => {
                let words = comps
                    .iter()
                    .map(|comp| {
                        let mut out = Vec::new();
                        for piece in comp {
                            match piece {
                                Piece::Arg { arg, component } => {
                                    out.extend(args[*arg].components()[*component].iter().cloned())
                                }
                                Piece::Lit(toks) => out.extend(toks.iter().cloned()),
                            }
                        }
                        out
                    })
                    .collect();
                Ok(WordTuple::new(words))
            }
        }
    }

    /// Applies the function in the range algebra of `input`. Returns `None`
    /// when some embedded concatenation is undefined or a literal does not
    /// match the input at its forced position. Constants have no range
    /// action. Dimension mismatches are programming errors and panic.
    pub fn apply_ranges(&self, args: &[RangeTuple], input: &[T]) -> Option<RangeTuple> {
        let comps = match &self.op {
            TermOp::Constant(_) => return None,
            TermOp::Compose(c) => c,
        };
        self.check_args(args, RangeTuple::dim)
            .unwrap_or_else(|e| panic!("{e}"));
        let mut out = Vec::with_capacity(comps.len());
        for comp in comps {
            out.push(component_range(comp, args, input)?);
        }
        Some(RangeTuple::new(out))
    }
}

/// Chains the pieces of one output component. Argument pieces carry fixed
/// spans; literal pieces occupy the gap implied by their neighbours and must
/// match the input there. The component's start is inferred from the first
/// argument piece.
fn component_range<T: Eq>(pieces: &[Piece<T>], args: &[RangeTuple], input: &[T]) -> Option<Range> {
    let first_arg = pieces.iter().position(|p| matches!(p, Piece::Arg { .. }))?;
    let leading_lit: usize = pieces[..first_arg]
        .iter()
        .map(|p| match p {
            Piece::Lit(toks) => toks.len(),
            Piece::Arg { .. } => 0,
        })
        .sum();
    let anchor = match &pieces[first_arg] {
        Piece::Arg { arg, component } => args[*arg].ranges()[*component],
        Piece::Lit(_) => unreachable!(),
    };
    let start = anchor.start().checked_sub(leading_lit)?;
    if start < 1 {
        return None;
    }
    let mut cur = start;
    for piece in pieces {
        match piece {
            Piece::Arg { arg, component } => {
                let r = args[*arg].ranges()[*component];
                if r.start() != cur {
                    return None;
                }
                cur = r.end();
            }
            Piece::Lit(toks) => {
                let end = cur + toks.len();
                if end - 1 > input.len() {
                    return None;
                }
                if input[cur - 1..end - 1] != toks[..] {
                    return None;
                }
                cur = end;
            }
        }
    }
    Some(Range::new(start, cur))
}

/// A function call expression: a variable standing for a nonterminal, or a
/// term function applied to sub-expressions.
#[derive(Clone, Debug)]
pub enum CallExpr<C, T> {
    Var(C),
    Apply(Arc<TermFunction<T>>, Vec<CallExpr<C, T>>),
}

impl<C: PartialEq, T> PartialEq for CallExpr<C, T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (CallExpr::Var(a), CallExpr::Var(b)) => a == b,
            (CallExpr::Apply(f, xs), CallExpr::Apply(g, ys)) => f.name == g.name && xs == ys,
            _ => false,
        }
    }
}

impl<C: Eq, T> Eq for CallExpr<C, T> {}

impl<C: Hash, T> Hash for CallExpr<C, T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            CallExpr::Var(c) => {
                0u8.hash(state);
                c.hash(state);
            }
            CallExpr::Apply(f, kids) => {
                1u8.hash(state);
                f.name.hash(state);
                kids.hash(state);
            }
        }
    }
}

impl<C: Clone + fmt::Debug, T: Clone + Eq + fmt::Debug> CallExpr<C, T> {
    /// Variable occurrences in left-to-right order, with multiplicity.
    pub fn variables(&self) -> Vec<&C> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a C>) {
        match self {
            CallExpr::Var(c) => out.push(c),
            CallExpr::Apply(_, kids) => kids.iter().for_each(|k| k.collect_vars(out)),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            CallExpr::Var(_) => false,
            CallExpr::Apply(_, kids) => kids.iter().all(CallExpr::is_ground),
        }
    }

    /// Evaluates a variable-free expression by structural recursion; each
    /// leaf is visited exactly once.
    pub fn evaluate(&self) -> Result<WordTuple<T>, AlgebraError> {
        match self {
            CallExpr::Var(c) => Err(AlgebraError::UnboundVariable(format!("{c:?}"))),
            CallExpr::Apply(f, kids) => {
                let args = kids
                    .iter()
                    .map(CallExpr::evaluate)
                    .collect::<Result<Vec<_>, _>>()?;
                f.evaluate(&args)
            }
        }
    }

    /// Checks well-formedness against a dimension assignment for variables
    /// and returns the expression's dimension.
    pub fn dimension(&self, dim_of: &impl Fn(&C) -> usize) -> Result<usize, AlgebraError> {
        match self {
            CallExpr::Var(c) => Ok(dim_of(c)),
            CallExpr::Apply(f, kids) => {
                let dims = kids
                    .iter()
                    .map(|k| k.dimension(dim_of))
                    .collect::<Result<Vec<_>, _>>()?;
                if dims != f.signature().arg_dims {
                    return Err(AlgebraError::IllFormed {
                        function: f.name().to_string(),
                        msg: format!(
                            "argument dimensions {dims:?} do not match signature {:?}",
                            f.signature().arg_dims
                        ),
                    });
                }
                Ok(f.signature().result_dim)
            }
        }
    }
}

/// True when none of the constituent's spans overlaps a span already
/// consumed by the edge. Sound for grammars whose functions use every input
/// component exactly once: overlapping arguments can never chain into a
/// defined output.
pub fn ranges_disjoint(edge_ranges: &[RangeTuple], cons: &RangeTuple) -> bool {
    edge_ranges.iter().all(|rt| {
        rt.ranges()
            .iter()
            .all(|a| cons.ranges().iter().all(|b| !a.overlaps(*b)))
    })
}
