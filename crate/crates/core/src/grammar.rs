//! The abstract grammar interface every frontend implements and the chart
//! parser consumes, plus a conformance suite that checks a frontend against
//! the rules it claims to define.
//!
//! A grammar is a reduction automaton: a sequence of categories reduces to a
//! nonterminal `A` exactly when the state reached by transitioning over the
//! sequence has a completion for `A`. Transitions extend a state by a single
//! category; terminals are routed through [`GrammarContract::comp_terminal`]
//! instead of appearing in states.

use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::algebra::{RangeTuple, TermFunction};
// re-exported next to the trait because frontends reach for it when
// overriding range_compatible
pub use crate::algebra::ranges_disjoint;

/// One way to rewrite `lhs` to the completed state's category sequence:
/// the rule identity (its term function and right-hand side) together with
/// the rewrite probability `P(X_lhs = rule)`.
#[derive(Clone, Debug)]
pub struct CompletionRecord<C, T> {
    pub lhs: C,
    pub function: Arc<TermFunction<T>>,
    pub rhs: Vec<C>,
    pub prob: f64,
}

/// Positional discipline the fundamental rule may exploit. Context-free
/// frontends declare `Adjacent` (an edge only combines with a constituent
/// starting where the edge ends); everything else searches the whole chart.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CombinePolicy {
    Adjacent,
    Anywhere,
}

pub trait GrammarContract {
    type Category: Clone + Eq + Hash + fmt::Debug + fmt::Display;
    type Terminal: Clone + Eq + Hash + fmt::Debug + fmt::Display;
    type State: Clone + Eq + Hash + fmt::Debug;

    fn start_states(&self) -> Vec<Self::State>;
    fn start_categories(&self) -> Vec<Self::Category>;

    /// True exactly when `tran` is defined.
    fn tran_possible(&self, state: &Self::State, cat: &Self::Category) -> bool;

    /// Extends a state by one category; `None` where undefined.
    fn tran(&self, state: &Self::State, cat: &Self::Category) -> Option<Self::State>;

    /// All completions of a state.
    fn comp(&self, state: &Self::State) -> Vec<CompletionRecord<Self::Category, Self::Terminal>>;

    /// All lexical completions of a single input token.
    fn comp_terminal(
        &self,
        terminal: &Self::Terminal,
    ) -> Vec<CompletionRecord<Self::Category, Self::Terminal>>;

    /// Completions of the empty word; these are seeded at every input
    /// position as zero-width constituents.
    fn comp_empty(&self) -> Vec<CompletionRecord<Self::Category, Self::Terminal>> {
        Vec::new()
    }

    /// Whether a token is part of the grammar's terminal vocabulary. Used
    /// only for unknown-token diagnostics.
    fn known_terminal(&self, terminal: &Self::Terminal) -> bool {
        !self.comp_terminal(terminal).is_empty()
    }

    fn combine_policy(&self) -> CombinePolicy {
        CombinePolicy::Anywhere
    }

    /// Extra filter applied by the fundamental rule before combining an edge
    /// with a constituent. The literal deduction rule imposes nothing here,
    /// which is the default; frontends whose functions consume every input
    /// component exactly once should install [`ranges_disjoint`] to prune
    /// combinations that can never complete.
    fn range_compatible(&self, _edge_ranges: &[RangeTuple], _cons: &RangeTuple) -> bool {
        true
    }
}

/// Wrapper that disables a frontend's positional filtering, restoring the
/// literal deduction rules. Useful for differential testing.
pub struct Unfiltered<G>(pub G);

impl<G: GrammarContract> GrammarContract for Unfiltered<G> {
    type Category = G::Category;
    type Terminal = G::Terminal;
    type State = G::State;

    fn start_states(&self) -> Vec<Self::State> {
        self.0.start_states()
    }

    fn start_categories(&self) -> Vec<Self::Category> {
        self.0.start_categories()
    }

    fn tran_possible(&self, state: &Self::State, cat: &Self::Category) -> bool {
        self.0.tran_possible(state, cat)
    }

    fn tran(&self, state: &Self::State, cat: &Self::Category) -> Option<Self::State> {
        self.0.tran(state, cat)
    }

    fn comp(&self, state: &Self::State) -> Vec<CompletionRecord<Self::Category, Self::Terminal>> {
        self.0.comp(state)
    }

    fn comp_terminal(
        &self,
        terminal: &Self::Terminal,
    ) -> Vec<CompletionRecord<Self::Category, Self::Terminal>> {
        self.0.comp_terminal(terminal)
    }

    fn comp_empty(&self) -> Vec<CompletionRecord<Self::Category, Self::Terminal>> {
        self.0.comp_empty()
    }

    fn known_terminal(&self, terminal: &Self::Terminal) -> bool {
        self.0.known_terminal(terminal)
    }

    fn combine_policy(&self) -> CombinePolicy {
        CombinePolicy::Anywhere
    }

    fn range_compatible(&self, _edge_ranges: &[RangeTuple], _cons: &RangeTuple) -> bool {
        true
    }
}

/// A rule a frontend claims to define, in the form the conformance suite
/// can replay against the interface functions.
#[derive(Clone, Debug)]
pub struct DeclaredRule<C> {
    pub lhs: C,
    pub function: String,
    pub rhs: Vec<C>,
    pub prob: f64,
}

/// A leaf rule: `lhs` rewrites to a terminal token (or to the empty word).
#[derive(Clone, Debug)]
pub struct DeclaredLeaf<C, T> {
    pub lhs: C,
    pub function: String,
    pub token: Option<T>,
    pub prob: f64,
}

/// Everything a frontend declares, for conformance checking.
#[derive(Clone, Debug)]
pub struct DeclaredGrammar<C, T> {
    pub rules: Vec<DeclaredRule<C>>,
    pub leaves: Vec<DeclaredLeaf<C, T>>,
    /// Whether per-nonterminal rule probabilities are expected to sum to 1.
    pub mass_normalized: bool,
}

/// Replays a declared rule set against the grammar interface and returns
/// every violation found:
///
/// * `tran` is defined exactly where `tran_possible` says so, over all
///   states reachable by rule prefixes extended by every known category;
/// * every declared rule is recovered by `comp` after transitioning over
///   its right-hand side, with the declared probability;
/// * every completion probability lies in `[0, 1]`;
/// * if the grammar is mass-normalized, per-lhs probabilities sum to 1.
pub fn check_conformance<G: GrammarContract>(
    grammar: &G,
    declared: &DeclaredGrammar<G::Category, G::Terminal>,
) -> Vec<String> {
    let mut violations = Vec::new();

    let mut universe: Vec<G::Category> = Vec::new();
    let push_cat = |universe: &mut Vec<G::Category>, c: &G::Category| {
        if !universe.contains(c) {
            universe.push(c.clone());
        }
    };
    for rule in &declared.rules {
        push_cat(&mut universe, &rule.lhs);
        for c in &rule.rhs {
            push_cat(&mut universe, c);
        }
    }
    for leaf in &declared.leaves {
        push_cat(&mut universe, &leaf.lhs);
    }

    // states reachable by folding rule prefixes from each start state
    let mut states: Vec<G::State> = grammar.start_states();
    for rule in &declared.rules {
        for s0 in grammar.start_states() {
            let mut s = s0;
            for c in &rule.rhs {
                match grammar.tran(&s, c) {
                    Some(next) => {
                        if !states.contains(&next) {
                            states.push(next.clone());
                        }
                        s = next;
                    }
                    None => break,
                }
            }
        }
    }

    // (a) tran/tran_possible coherence
    for s in &states {
        for c in &universe {
            let possible = grammar.tran_possible(s, c);
            let defined = grammar.tran(s, c).is_some();
            if possible != defined {
                violations.push(format!(
                    "tran_possible({s:?}, {c}) = {possible} but tran defined = {defined}"
                ));
            }
        }
    }

    // (b) every declared rule is recovered through comp after its rhs
    for rule in &declared.rules {
        let mut found_any = false;
        for s0 in grammar.start_states() {
            let mut s = Some(s0);
            for c in &rule.rhs {
                s = s.and_then(|st| grammar.tran(&st, c));
            }
            let Some(s) = s else { continue };
            let records = grammar.comp(&s);
            for rec in &records {
                if rec.prob < 0.0 || rec.prob > 1.0 {
                    violations.push(format!(
                        "comp score {} of rule {} out of [0,1]",
                        rec.prob,
                        rec.function.name()
                    ));
                }
            }
            if records.iter().any(|rec| {
                rec.lhs == rule.lhs
                    && rec.function.name() == rule.function
                    && (rec.prob - rule.prob).abs() <= 1e-12
            }) {
                found_any = true;
            }
        }
        if !found_any {
            violations.push(format!(
                "rule {}({}) -> {:?} not recovered by comp over its right-hand side",
                rule.function, rule.lhs, rule.rhs
            ));
        }
    }

    // leaf rules are recovered through comp_terminal / comp_empty
    for leaf in &declared.leaves {
        let records = match &leaf.token {
            Some(t) => grammar.comp_terminal(t),
            None => grammar.comp_empty(),
        };
        for rec in &records {
            if rec.prob < 0.0 || rec.prob > 1.0 {
                violations.push(format!(
                    "lexical score {} of {} out of [0,1]",
                    rec.prob,
                    rec.function.name()
                ));
            }
        }
        if !records.iter().any(|rec| {
            rec.lhs == leaf.lhs
                && rec.function.name() == leaf.function
                && (rec.prob - leaf.prob).abs() <= 1e-12
        }) {
            violations.push(format!(
                "leaf rule {}({}) not recovered by its completion function",
                leaf.function, leaf.lhs
            ));
        }
    }

    // (d) per-nonterminal probability mass
    if declared.mass_normalized {
        for lhs in &universe {
            let mass: f64 = declared
                .rules
                .iter()
                .filter(|r| &r.lhs == lhs)
                .map(|r| r.prob)
                .chain(
                    declared
                        .leaves
                        .iter()
                        .filter(|l| &l.lhs == lhs)
                        .map(|l| l.prob),
                )
                .sum();
            if mass > 0.0 && (mass - 1.0).abs() > 1e-9 {
                violations.push(format!("probability mass at {lhs} is {mass}, expected 1"));
            }
        }
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Range;

    #[test]
    fn disjoint_ranges_ignores_empty_spans() {
        let edge = [RangeTuple::single(Range::new(2, 5))];
        assert!(ranges_disjoint(
            &edge,
            &RangeTuple::single(Range::new(3, 3))
        ));
        assert!(ranges_disjoint(
            &edge,
            &RangeTuple::single(Range::new(1, 2))
        ));
        assert!(!ranges_disjoint(
            &edge,
            &RangeTuple::single(Range::new(4, 6))
        ));
    }
}
