//! The queryable result of a parse: recognition, inside score, and best
//! derivation extraction over the packed items of the chart and logbook.

use std::collections::HashSet;
use std::fmt;

use crate::algebra::RangeTuple;
use crate::chart::{Completion, ConsId, ConsKey, Constituent, Edge, EdgeId, ItemId, ParseStats};
use crate::grammar::GrammarContract;
use crate::semiring::Semiring;

/// A derivation tree: nodes are labeled with the category, the covered
/// ranges, and the name of the rule that built them.
#[derive(Clone, Debug, PartialEq)]
pub enum DerivTree<C, T> {
    Leaf {
        category: C,
        range: RangeTuple,
        terminal: Option<T>,
        rule: String,
    },
    Node {
        category: C,
        range: RangeTuple,
        rule: String,
        children: Vec<DerivTree<C, T>>,
    },
}

impl<C: fmt::Display, T: fmt::Display> DerivTree<C, T> {
    pub fn category(&self) -> &C {
        match self {
            DerivTree::Leaf { category, .. } | DerivTree::Node { category, .. } => category,
        }
    }

    pub fn rule(&self) -> &str {
        match self {
            DerivTree::Leaf { rule, .. } | DerivTree::Node { rule, .. } => rule,
        }
    }

    pub fn children(&self) -> &[DerivTree<C, T>] {
        match self {
            DerivTree::Leaf { .. } => &[],
            DerivTree::Node { children, .. } => children,
        }
    }

    /// Bracketed rendering: `(category rule child ...)` for inner nodes and
    /// `(category 'token')` (or `(category ε)`) for leaves.
    pub fn bracketed(&self) -> String {
        let mut out = String::new();
        self.write_bracketed(&mut out);
        out
    }

    fn write_bracketed(&self, out: &mut String) {
        match self {
            DerivTree::Leaf {
                category, terminal, ..
            } => {
                out.push('(');
                out.push_str(&category.to_string());
                out.push(' ');
                match terminal {
                    Some(t) => {
                        out.push('\'');
                        out.push_str(&t.to_string());
                        out.push('\'');
                    }
                    None => out.push('ε'),
                }
                out.push(')');
            }
            DerivTree::Node {
                category,
                rule,
                children,
                ..
            } => {
                out.push('(');
                out.push_str(&category.to_string());
                out.push(' ');
                out.push_str(rule);
                for child in children {
                    out.push(' ');
                    child.write_bracketed(out);
                }
                out.push(')');
            }
        }
    }
}

pub struct ParseForest<G: GrammarContract, S: Semiring> {
    edges: Vec<Edge<G::State, S>>,
    conss: Vec<Constituent<G::Category, G::Terminal, S>>,
    input: Vec<G::Terminal>,
    goals: Vec<ConsId>,
    pub stats: ParseStats,
    /// Input tokens outside the grammar's vocabulary, in input order.
    pub unknown_tokens: Vec<G::Terminal>,
}

impl<G: GrammarContract, S: Semiring> ParseForest<G, S> {
    pub(crate) fn new(
        edges: Vec<Edge<G::State, S>>,
        conss: Vec<Constituent<G::Category, G::Terminal, S>>,
        input: Vec<G::Terminal>,
        goals: Vec<ConsId>,
        stats: ParseStats,
        unknown_tokens: Vec<G::Terminal>,
    ) -> Self {
        ParseForest {
            edges,
            conss,
            input,
            goals,
            stats,
            unknown_tokens,
        }
    }

    pub fn input(&self) -> &[G::Terminal] {
        &self.input
    }

    pub fn edges(&self) -> &[Edge<G::State, S>] {
        &self.edges
    }

    pub fn constituents(&self) -> &[Constituent<G::Category, G::Terminal, S>] {
        &self.conss
    }

    pub fn goal_ids(&self) -> &[ConsId] {
        &self.goals
    }

    /// A goal constituent exists for some start category.
    pub fn recognized(&self) -> bool {
        !self.goals.is_empty()
    }

    /// Semiring sum of the goal scores across start categories.
    pub fn inside(&self) -> S {
        self.goals
            .iter()
            .fold(S::zero(), |acc, id| acc.plus(&self.conss[id.0].score))
    }

    pub fn constituent(
        &self,
        key: &ConsKey<G::Category>,
    ) -> Option<&Constituent<G::Category, G::Terminal, S>> {
        self.conss.iter().find(|c| &c.key == key)
    }

    /// The best derivation of the best goal, reconstructed by following
    /// maximal backpointers; ties go to lexical completions and then to the
    /// lower item id. Backpointers that cycle back into the current path
    /// are skipped, which keeps the tree finite on cyclic grammars.
    pub fn best(&self) -> Option<DerivTree<G::Category, G::Terminal>> {
        let goal = self.goals.iter().copied().max_by(|a, b| {
            self.conss[a.0]
                .score
                .compare(&self.conss[b.0].score)
                .then_with(|| b.0.cmp(&a.0))
        })?;
        let mut path = HashSet::new();
        self.build_cons(goal, &mut path)
    }

    fn build_cons(
        &self,
        id: ConsId,
        path: &mut HashSet<ItemId>,
    ) -> Option<DerivTree<G::Category, G::Terminal>> {
        if !path.insert(ItemId::Cons(id)) {
            return None;
        }
        let cons = &self.conss[id.0];
        let mut order: Vec<usize> = (0..cons.completions.len()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (&cons.completions[i], &cons.completions[j]);
            b.score().compare(&a.score()).then_with(|| {
                (completion_rank(a), completion_edge(a))
                    .cmp(&(completion_rank(b), completion_edge(b)))
            })
        });
        let mut result = None;
        for idx in order {
            match &cons.completions[idx] {
                Completion::Lexical {
                    terminal, function, ..
                } => {
                    result = Some(DerivTree::Leaf {
                        category: cons.key.category.clone(),
                        range: cons.key.range.clone(),
                        terminal: terminal.clone(),
                        rule: function.name().to_string(),
                    });
                    break;
                }
                Completion::Rule { edge, function, .. } => {
                    if let Some(children) = self.build_edge(*edge, path) {
                        result = Some(DerivTree::Node {
                            category: cons.key.category.clone(),
                            range: cons.key.range.clone(),
                            rule: function.name().to_string(),
                            children,
                        });
                        break;
                    }
                }
            }
        }
        path.remove(&ItemId::Cons(id));
        result
    }

    fn build_edge(
        &self,
        id: EdgeId,
        path: &mut HashSet<ItemId>,
    ) -> Option<Vec<DerivTree<G::Category, G::Terminal>>> {
        if !path.insert(ItemId::Edge(id)) {
            return None;
        }
        let edge = &self.edges[id.0];
        let mut order: Vec<usize> = (0..edge.traversals.len()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (&edge.traversals[i], &edge.traversals[j]);
            b.score
                .compare(&a.score)
                .then_with(|| (a.pred, a.cons).cmp(&(b.pred, b.cons)))
        });
        let mut result = None;
        for idx in order {
            let trav = &edge.traversals[idx];
            let Some(child) = self.build_cons(trav.cons, path) else {
                continue;
            };
            match trav.pred {
                None => {
                    result = Some(vec![child]);
                    break;
                }
                Some(pred) => {
                    if let Some(mut kids) = self.build_edge(pred, path) {
                        kids.push(child);
                        result = Some(kids);
                        break;
                    }
                }
            }
        }
        path.remove(&ItemId::Edge(id));
        result
    }

    /// Structural invariants of a finished forest: resolvable backpointers,
    /// key uniqueness, and item scores equal to the semiring sum over their
    /// backpointers.
    pub fn check_integrity(&self) -> Result<(), String> {
        let mut edge_keys = HashSet::new();
        for (i, edge) in self.edges.iter().enumerate() {
            if !edge_keys.insert(&edge.key) {
                return Err(format!("duplicate edge key {:?}", edge.key));
            }
            if edge.traversals.is_empty() {
                return Err(format!("edge {i} has no traversals"));
            }
            let folded = edge
                .traversals
                .iter()
                .fold(S::zero(), |acc, t| acc.plus(&t.score));
            if folded != edge.score {
                return Err(format!("edge {i}: score differs from traversal sum"));
            }
            for t in &edge.traversals {
                if t.cons.0 >= self.conss.len() {
                    return Err(format!("edge {i}: dangling constituent id"));
                }
                if let Some(p) = t.pred {
                    if p.0 >= self.edges.len() {
                        return Err(format!("edge {i}: dangling predecessor id"));
                    }
                }
            }
        }
        let mut cons_keys = HashSet::new();
        for (i, cons) in self.conss.iter().enumerate() {
            if !cons_keys.insert(&cons.key) {
                return Err(format!("duplicate constituent key {:?}", cons.key));
            }
            if cons.completions.is_empty() {
                return Err(format!("constituent {i} has no completions"));
            }
            let folded = cons
                .completions
                .iter()
                .fold(S::zero(), |acc, c| acc.plus(&c.score()));
            if folded != cons.score {
                return Err(format!(
                    "constituent {i}: score differs from completion sum"
                ));
            }
            for c in &cons.completions {
                if let Completion::Rule { edge, .. } = c {
                    if edge.0 >= self.edges.len() {
                        return Err(format!("constituent {i}: dangling edge id"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn completion_rank<T, S: Semiring>(c: &Completion<T, S>) -> u8 {
    match c {
        Completion::Lexical { .. } => 0,
        Completion::Rule { .. } => 1,
    }
}

fn completion_edge<T, S: Semiring>(c: &Completion<T, S>) -> usize {
    match c {
        Completion::Lexical { .. } => 0,
        Completion::Rule { edge, .. } => edge.0,
    }
}
