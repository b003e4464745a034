//! The agenda-driven, semiring-weighted deduction engine.
//!
//! Items are edges (an automaton state plus the range tuples of the
//! categories consumed so far) and constituents (a category plus the range
//! tuple it covers). The agenda holds items whose ways of being built are
//! not all known yet; the chart holds finished items, edges indexed by the
//! end of their last range and constituents by the start of their first.
//! The logbook maps keys to items so that every key is materialized at most
//! once per parse.
//!
//! A dequeued item whose score has not noticeably changed since its last
//! dequeue moves to the chart and combines with its chart partners through
//! the fundamental rule; otherwise its inference rule fires (completion for
//! edges, edge introduction for constituents) and it re-enters the agenda.
//! An item already in the chart that later gains score is pulled back into
//! the agenda, which is what lets cyclic grammars converge to their inside
//! scores.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Range, RangeTuple, TermFunction};
use crate::forest::ParseForest;
use crate::grammar::{CombinePolicy, GrammarContract};
use crate::semiring::Semiring;

#[derive(Clone, Copy, Debug)]
pub struct ParserConfig {
    /// Absolute tolerance on log scores under which an item counts as
    /// unchanged since its last dequeue.
    pub convergence_tol: f64,
    /// Abort once this many items have been created.
    pub item_budget: usize,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            convergence_tol: 1e-12,
            item_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(
        "item budget of {budget} exceeded ({edges} edges, {constituents} constituents, {dequeues} dequeues)"
    )]
    BudgetExceeded {
        budget: usize,
        edges: usize,
        constituents: usize,
        dequeues: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub edges_created: usize,
    pub constituents_created: usize,
    pub dequeues: usize,
    /// Items sent back to the agenda because their score was still moving.
    pub requeues: usize,
    /// Chart items pulled back into the agenda by a score update.
    pub reactivations: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConsId(pub usize);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ItemId {
    Edge(EdgeId),
    Cons(ConsId),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct EdgeKey<St> {
    pub state: St,
    pub ranges: Vec<RangeTuple>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ConsKey<C> {
    pub category: C,
    pub range: RangeTuple,
}

/// One way of building an edge: a predecessor edge (absent for the seed
/// made by edge introduction) and the constituent that extended it.
#[derive(Clone, Debug)]
pub struct Traversal<S> {
    pub pred: Option<EdgeId>,
    pub cons: ConsId,
    pub score: S,
}

/// One way of building a constituent: a rule application on a finished
/// edge, or a lexical completion of an input token (`None` marks a
/// phonetically empty item).
#[derive(Clone, Debug)]
pub enum Completion<T, S> {
    Rule {
        edge: EdgeId,
        function: Arc<TermFunction<T>>,
        score: S,
    },
    Lexical {
        terminal: Option<T>,
        function: Arc<TermFunction<T>>,
        score: S,
    },
}

impl<T, S: Semiring> Completion<T, S> {
    pub fn score(&self) -> S {
        match self {
            Completion::Rule { score, .. } | Completion::Lexical { score, .. } => *score,
        }
    }

    fn same_key(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Completion::Rule {
                    edge: e1,
                    function: f1,
                    ..
                },
                Completion::Rule {
                    edge: e2,
                    function: f2,
                    ..
                },
            ) => e1 == e2 && f1.name() == f2.name(),
            (
                Completion::Lexical { function: f1, .. },
                Completion::Lexical { function: f2, .. },
            ) => f1.name() == f2.name(),
            _ => false,
        }
    }
}

#[derive(Debug)]
pub struct Edge<St, S> {
    pub key: EdgeKey<St>,
    pub score: S,
    pub traversals: Vec<Traversal<S>>,
    /// Creation order across both item kinds; the deterministic tie-breaker.
    pub seq: usize,
    pub(crate) lastpop: S,
    pub(crate) length: usize,
    pub(crate) in_chart: bool,
    pub(crate) in_agenda: bool,
    pub(crate) in_cell: bool,
}

#[derive(Debug)]
pub struct Constituent<C, T, S> {
    pub key: ConsKey<C>,
    pub score: S,
    pub completions: Vec<Completion<T, S>>,
    pub seq: usize,
    pub(crate) lastpop: S,
    pub(crate) length: usize,
    pub(crate) in_chart: bool,
    pub(crate) in_agenda: bool,
    pub(crate) in_cell: bool,
}

impl<St, S> Edge<St, S> {
    pub fn last_end(&self) -> usize {
        let rt = self
            .key
            .ranges
            .last()
            .expect("edges consume at least one range");
        rt.ranges().last().expect("range tuples are nonempty").end()
    }
}

impl<C, T, S> Constituent<C, T, S> {
    pub fn first_start(&self) -> usize {
        self.key.range.ranges()[0].start()
    }
}

/// Priority: small covered length first, edges before constituents, then
/// creation order. The ordering is total, which makes runs deterministic.
#[derive(PartialEq, Eq, PartialOrd, Ord, Debug)]
struct AgendaEntry {
    length: usize,
    kind: u8,
    seq: usize,
    item: ItemId,
}

use indexmap::IndexMap;

struct Engine<'g, G: GrammarContract, S: Semiring> {
    grammar: &'g G,
    input: Vec<G::Terminal>,
    config: ParserConfig,
    edges: Vec<Edge<G::State, S>>,
    conss: Vec<Constituent<G::Category, G::Terminal, S>>,
    edge_ids: HashMap<EdgeKey<G::State>, EdgeId>,
    cons_ids: HashMap<ConsKey<G::Category>, ConsId>,
    /// Finished edges per end position of their last range.
    cell_edges: Vec<IndexMap<G::State, Vec<EdgeId>>>,
    /// Finished constituents per start position of their first range.
    cell_conss: Vec<IndexMap<G::Category, Vec<ConsId>>>,
    agenda: BinaryHeap<Reverse<AgendaEntry>>,
    stats: ParseStats,
    unknown_tokens: Vec<G::Terminal>,
    seq: usize,
}

/// Runs the parser to convergence and returns the queryable forest.
pub fn run_chartparser<G: GrammarContract, S: Semiring>(
    grammar: &G,
    input: &[G::Terminal],
    config: &ParserConfig,
) -> Result<ParseForest<G, S>, ParseError> {
    let n = input.len();
    let mut engine = Engine {
        grammar,
        input: input.to_vec(),
        config: *config,
        edges: Vec::new(),
        conss: Vec::new(),
        edge_ids: HashMap::new(),
        cons_ids: HashMap::new(),
        cell_edges: (0..n + 2).map(|_| IndexMap::new()).collect(),
        cell_conss: (0..n + 2).map(|_| IndexMap::new()).collect(),
        agenda: BinaryHeap::new(),
        stats: ParseStats::default(),
        unknown_tokens: Vec::new(),
        seq: 0,
    };
    engine.axioms()?;
    while let Some(Reverse(entry)) = engine.agenda.pop() {
        engine.stats.dequeues += 1;
        match entry.item {
            ItemId::Edge(e) => engine.finish_edge(e)?,
            ItemId::Cons(c) => engine.finish_cons(c)?,
        }
    }
    Ok(engine.into_forest())
}

impl<'g, G: GrammarContract, S: Semiring> Engine<'g, G, S> {
    fn check_budget(&self) -> Result<(), ParseError> {
        if self.edges.len() + self.conss.len() >= self.config.item_budget {
            Err(ParseError::BudgetExceeded {
                budget: self.config.item_budget,
                edges: self.edges.len(),
                constituents: self.conss.len(),
                dequeues: self.stats.dequeues,
            })
        } else {
            Ok(())
        }
    }

    fn push_edge_agenda(&mut self, id: EdgeId) {
        let e = &mut self.edges[id.0];
        if e.in_agenda {
            return;
        }
        e.in_agenda = true;
        self.agenda.push(Reverse(AgendaEntry {
            length: e.length,
            kind: 0,
            seq: e.seq,
            item: ItemId::Edge(id),
        }));
    }

    fn push_cons_agenda(&mut self, id: ConsId) {
        let c = &mut self.conss[id.0];
        if c.in_agenda {
            return;
        }
        c.in_agenda = true;
        self.agenda.push(Reverse(AgendaEntry {
            length: c.length,
            kind: 1,
            seq: c.seq,
            item: ItemId::Cons(id),
        }));
    }

    /// Seeds one constituent per lexical completion of each input token,
    /// plus zero-width constituents for phonetically empty entries at every
    /// position. Tokens outside the vocabulary are reported, not fatal.
    fn axioms(&mut self) -> Result<(), ParseError> {
        let n = self.input.len();
        for i in 0..n {
            let tok = self.input[i].clone();
            let pos = i + 1;
            let records = self.grammar.comp_terminal(&tok);
            if records.is_empty()
                && !self.grammar.known_terminal(&tok)
                && !self.unknown_tokens.contains(&tok)
            {
                self.unknown_tokens.push(tok.clone());
            }
            for rec in records {
                let key = ConsKey {
                    category: rec.lhs,
                    range: RangeTuple::single(Range::new(pos, pos + 1)),
                };
                let completion = Completion::Lexical {
                    terminal: Some(tok.clone()),
                    function: rec.function,
                    score: S::from_prob(rec.prob),
                };
                self.add_cons(key, completion)?;
            }
        }
        let empties = self.grammar.comp_empty();
        for pos in 1..=n + 1 {
            for rec in &empties {
                let key = ConsKey {
                    category: rec.lhs.clone(),
                    range: RangeTuple::single(Range::new(pos, pos)),
                };
                let completion = Completion::Lexical {
                    terminal: None,
                    function: Arc::clone(&rec.function),
                    score: S::from_prob(rec.prob),
                };
                self.add_cons(key, completion)?;
            }
        }
        Ok(())
    }

    fn finish_edge(&mut self, id: EdgeId) -> Result<(), ParseError> {
        self.edges[id.0].in_agenda = false;
        let score = self.edges[id.0].score;
        let lastpop = self.edges[id.0].lastpop;
        if score.converged(&lastpop, self.config.convergence_tol) {
            let e = &mut self.edges[id.0];
            e.in_chart = true;
            if !e.in_cell {
                e.in_cell = true;
                let pos = e.last_end();
                let state = e.key.state.clone();
                self.cell_edges[pos].entry(state).or_default().push(id);
            }
            self.fundamental_for_edge(id)
        } else {
            self.edges[id.0].lastpop = score;
            self.complete_edge(id)?;
            self.stats.requeues += 1;
            self.push_edge_agenda(id);
            Ok(())
        }
    }

    fn finish_cons(&mut self, id: ConsId) -> Result<(), ParseError> {
        self.conss[id.0].in_agenda = false;
        let score = self.conss[id.0].score;
        let lastpop = self.conss[id.0].lastpop;
        if score.converged(&lastpop, self.config.convergence_tol) {
            let c = &mut self.conss[id.0];
            c.in_chart = true;
            if !c.in_cell {
                c.in_cell = true;
                let pos = c.first_start();
                let cat = c.key.category.clone();
                self.cell_conss[pos].entry(cat).or_default().push(id);
            }
            self.fundamental_for_cons(id)
        } else {
            self.conss[id.0].lastpop = score;
            self.introduce_edge(id)?;
            self.stats.requeues += 1;
            self.push_cons_agenda(id);
            Ok(())
        }
    }

    /// Introduce edge: a constituent opens an edge from every start state
    /// that can transition over its category.
    fn introduce_edge(&mut self, id: ConsId) -> Result<(), ParseError> {
        for s0 in self.grammar.start_states() {
            let (key, score) = {
                let cons = &self.conss[id.0];
                if !self.grammar.tran_possible(&s0, &cons.key.category) {
                    continue;
                }
                let Some(next) = self.grammar.tran(&s0, &cons.key.category) else {
                    continue;
                };
                (
                    EdgeKey {
                        state: next,
                        ranges: vec![cons.key.range.clone()],
                    },
                    cons.score,
                )
            };
            self.add_edge(
                key,
                Traversal {
                    pred: None,
                    cons: id,
                    score,
                },
            )?;
        }
        Ok(())
    }

    /// Complete edge: every completion of the edge's state whose term
    /// function is defined on the edge's ranges yields a constituent.
    fn complete_edge(&mut self, id: EdgeId) -> Result<(), ParseError> {
        let records = self.grammar.comp(&self.edges[id.0].key.state);
        for rec in records {
            let (range, score) = {
                let edge = &self.edges[id.0];
                let Some(range) = rec.function.apply_ranges(&edge.key.ranges, &self.input) else {
                    continue;
                };
                (range, S::from_prob(rec.prob).times(&edge.score))
            };
            self.add_cons(
                ConsKey {
                    category: rec.lhs,
                    range,
                },
                Completion::Rule {
                    edge: id,
                    function: rec.function,
                    score,
                },
            )?;
        }
        Ok(())
    }

    fn partner_positions(&self, anchored: usize) -> Vec<usize> {
        match self.grammar.combine_policy() {
            CombinePolicy::Adjacent => vec![anchored],
            CombinePolicy::Anywhere => (1..=self.input.len() + 1).collect(),
        }
    }

    /// Fundamental rule, triggered by a finished edge: combine with every
    /// finished constituent the grammar allows.
    fn fundamental_for_edge(&mut self, id: EdgeId) -> Result<(), ParseError> {
        let mut partners = Vec::new();
        {
            let edge = &self.edges[id.0];
            for pos in self.partner_positions(edge.last_end()) {
                for (cat, ids) in &self.cell_conss[pos] {
                    if !self.grammar.tran_possible(&edge.key.state, cat) {
                        continue;
                    }
                    for &cid in ids {
                        let cons = &self.conss[cid.0];
                        if !cons.in_chart {
                            continue;
                        }
                        if !self
                            .grammar
                            .range_compatible(&edge.key.ranges, &cons.key.range)
                        {
                            continue;
                        }
                        partners.push(cid);
                    }
                }
            }
        }
        for cid in partners {
            self.combine(id, cid)?;
        }
        Ok(())
    }

    /// Fundamental rule, triggered by a finished constituent.
    fn fundamental_for_cons(&mut self, id: ConsId) -> Result<(), ParseError> {
        let mut partners = Vec::new();
        {
            let cons = &self.conss[id.0];
            for pos in self.partner_positions(cons.first_start()) {
                for (state, ids) in &self.cell_edges[pos] {
                    if !self.grammar.tran_possible(state, &cons.key.category) {
                        continue;
                    }
                    for &eid in ids {
                        let edge = &self.edges[eid.0];
                        if !edge.in_chart {
                            continue;
                        }
                        if !self
                            .grammar
                            .range_compatible(&edge.key.ranges, &cons.key.range)
                        {
                            continue;
                        }
                        partners.push(eid);
                    }
                }
            }
        }
        for eid in partners {
            self.combine(eid, id)?;
        }
        Ok(())
    }

    fn combine(&mut self, eid: EdgeId, cid: ConsId) -> Result<(), ParseError> {
        let (key, score) = {
            let edge = &self.edges[eid.0];
            let cons = &self.conss[cid.0];
            let next = self
                .grammar
                .tran(&edge.key.state, &cons.key.category)
                .expect("tran_possible checked by the fundamental rule");
            let mut ranges = edge.key.ranges.clone();
            ranges.push(cons.key.range.clone());
            (
                EdgeKey {
                    state: next,
                    ranges,
                },
                edge.score.times(&cons.score),
            )
        };
        self.add_edge(
            key,
            Traversal {
                pred: Some(eid),
                cons: cid,
                score,
            },
        )
    }

    fn add_edge(&mut self, key: EdgeKey<G::State>, trav: Traversal<S>) -> Result<(), ParseError> {
        if let Some(&id) = self.edge_ids.get(&key) {
            let changed = {
                let edge = &mut self.edges[id.0];
                let slot = edge
                    .traversals
                    .iter_mut()
                    .find(|t| t.pred == trav.pred && t.cons == trav.cons);
                match slot {
                    Some(t) if t.score == trav.score => false,
                    Some(t) => {
                        t.score = trav.score;
                        true
                    }
                    None => {
                        edge.traversals.push(trav);
                        true
                    }
                }
            };
            if changed {
                let edge = &mut self.edges[id.0];
                let new_score = edge
                    .traversals
                    .iter()
                    .fold(S::zero(), |acc, t| acc.plus(&t.score));
                if new_score != edge.score {
                    edge.score = new_score;
                    if edge.in_chart {
                        edge.in_chart = false;
                        self.stats.reactivations += 1;
                        self.push_edge_agenda(id);
                    }
                }
            }
            Ok(())
        } else {
            self.check_budget()?;
            let id = EdgeId(self.edges.len());
            let length = key.ranges.iter().map(RangeTuple::covered_len).sum();
            let score = trav.score;
            self.edge_ids.insert(key.clone(), id);
            self.edges.push(Edge {
                key,
                score,
                traversals: vec![trav],
                seq: self.seq,
                lastpop: S::zero(),
                length,
                in_chart: false,
                in_agenda: false,
                in_cell: false,
            });
            self.seq += 1;
            self.stats.edges_created += 1;
            self.push_edge_agenda(id);
            Ok(())
        }
    }

    fn add_cons(
        &mut self,
        key: ConsKey<G::Category>,
        completion: Completion<G::Terminal, S>,
    ) -> Result<(), ParseError> {
        if let Some(&id) = self.cons_ids.get(&key) {
            let changed = {
                let cons = &mut self.conss[id.0];
                let slot = cons
                    .completions
                    .iter_mut()
                    .find(|c| c.same_key(&completion));
                match slot {
                    Some(c) if c.score() == completion.score() => false,
                    Some(c) => {
                        *c = completion;
                        true
                    }
                    None => {
                        cons.completions.push(completion);
                        true
                    }
                }
            };
            if changed {
                let cons = &mut self.conss[id.0];
                let new_score = cons
                    .completions
                    .iter()
                    .fold(S::zero(), |acc, c| acc.plus(&c.score()));
                if new_score != cons.score {
                    cons.score = new_score;
                    if cons.in_chart {
                        cons.in_chart = false;
                        self.stats.reactivations += 1;
                        self.push_cons_agenda(id);
                    }
                }
            }
            Ok(())
        } else {
            self.check_budget()?;
            let id = ConsId(self.conss.len());
            let length = key.range.covered_len();
            let score = completion.score();
            self.cons_ids.insert(key.clone(), id);
            self.conss.push(Constituent {
                key,
                score,
                completions: vec![completion],
                seq: self.seq,
                lastpop: S::zero(),
                length,
                in_chart: false,
                in_agenda: false,
                in_cell: false,
            });
            self.seq += 1;
            self.stats.constituents_created += 1;
            self.push_cons_agenda(id);
            Ok(())
        }
    }

    fn into_forest(self) -> ParseForest<G, S> {
        let n = self.input.len();
        let goal_range = RangeTuple::single(Range::new(1, n + 1));
        let mut goals: Vec<ConsId> = Vec::new();
        for cat in self.grammar.start_categories() {
            let key = ConsKey {
                category: cat,
                range: goal_range.clone(),
            };
            // repeated start categories must not double-count goal scores
            if let Some(&id) = self.cons_ids.get(&key) {
                if !goals.contains(&id) {
                    goals.push(id);
                }
            }
        }
        ParseForest::new(
            self.edges,
            self.conss,
            self.input,
            goals,
            self.stats,
            self.unknown_tokens,
        )
    }
}
