//! Brute-force generation oracle for abstract grammars.
//!
//! Expands sentential forms breadth-first, always rewriting the leftmost
//! variable occurrence, so that every derivation tree is counted through
//! exactly one canonical rewrite sequence. The mass reaching a ground form
//! is the probability of its derivations; summing over forms with the same
//! yield gives the string probability.
//!
//! A form is kept canonical: the composition plans of the applied rules are
//! fused into a single assembly plan over the remaining variables, and
//! terminal parts are folded into literal pieces. Structurally different
//! derivation prefixes with the same remainder therefore merge (in the
//! context-free case a form is literally a decorated sentential form),
//! which keeps the live-form space finite under the length bound.
//!
//! Forms whose minimum yield exceeds `max_length` are pruned, which is
//! sound for non-erasing grammars (a form can only grow). Expansion stops
//! after `max_steps` rewrite layers; the mass still sitting on live or
//! pruned forms is reported as the residual bound.

use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::acfg::{AcfgGrammar, Category, CompiledRule};
use crate::algebra::Piece;

#[derive(Clone, Debug)]
pub struct OracleReport {
    /// Exact probability per derivable string of length `<= max_length`,
    /// up to the residual bound.
    pub masses: BTreeMap<Vec<String>, f64>,
    /// Upper bound on the probability mass not yet accounted for.
    pub residual: f64,
    pub steps_taken: usize,
    /// Whether the residual fell below the requested tolerance.
    pub converged: bool,
}

impl OracleReport {
    pub fn mass_of(&self, tokens: &[String]) -> f64 {
        self.masses.get(tokens).copied().unwrap_or(0.0)
    }
}

/// A canonical sentential form: how the final yield is assembled from the
/// yields of the remaining variables and from already-fixed tokens.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Form {
    /// One piece sequence per component of the (dimension-1) result.
    components: Vec<Vec<Piece<String>>>,
    /// Remaining nonterminal occurrences, in expression order.
    vars: Vec<Category>,
}

impl Form {
    fn start(cat: Category) -> Form {
        Form {
            components: vec![vec![Piece::Arg {
                arg: 0,
                component: 0,
            }]],
            vars: vec![cat],
        }
    }

    fn is_ground(&self) -> bool {
        self.vars.is_empty()
    }

    /// Every literal token plus at least one token per variable component.
    fn min_yield(&self) -> usize {
        self.components
            .iter()
            .flatten()
            .map(|p| match p {
                Piece::Lit(toks) => toks.len(),
                Piece::Arg { .. } => 1,
            })
            .sum()
    }

    fn yield_tokens(&self) -> Vec<String> {
        debug_assert!(self.is_ground());
        debug_assert_eq!(self.components.len(), 1);
        self.components[0]
            .iter()
            .flat_map(|p| match p {
                Piece::Lit(toks) => toks.clone(),
                Piece::Arg { .. } => unreachable!("ground forms have no variables"),
            })
            .collect()
    }

    /// Rewrites the leftmost variable with `rule`, fusing the rule's plan
    /// into this form's plan and inlining terminal categories as literals.
    fn substitute(&self, rule: &CompiledRule) -> Form {
        // the rule's right-hand side, split into fresh variables and
        // inlined terminal tokens
        enum Slot {
            Var(usize),
            Tok(String),
        }
        let mut new_vars: Vec<Category> = Vec::new();
        let slots: Vec<Slot> = rule
            .rhs
            .iter()
            .map(|c| match c {
                Category::Terminal(t) => Slot::Tok(t.clone()),
                Category::Nonterminal(_) => {
                    new_vars.push(c.clone());
                    Slot::Var(new_vars.len() - 1)
                }
            })
            .collect();
        // the expansion: one piece sequence per component of the replaced
        // variable, over the fresh variables
        let expansion: Vec<Vec<Piece<String>>> = match rule.function.composition() {
            Some(comps) => comps
                .iter()
                .map(|comp| {
                    comp.iter()
                        .map(|p| match p {
                            Piece::Lit(toks) => Piece::Lit(toks.clone()),
                            Piece::Arg { arg, component } => match &slots[*arg] {
                                Slot::Tok(t) => {
                                    debug_assert_eq!(*component, 0);
                                    Piece::Lit(vec![t.clone()])
                                }
                                Slot::Var(v) => Piece::Arg {
                                    arg: *v,
                                    component: *component,
                                },
                            },
                        })
                        .collect()
                })
                .collect(),
            None => {
                // leaf rule: a single-token constant
                let word = rule
                    .function
                    .constant_value()
                    .expect("leaf rules are constants")
                    .components()[0]
                    .clone();
                vec![vec![Piece::Lit(word)]]
            }
        };
        let fresh = new_vars.len();
        let mut components = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let mut pieces: Vec<Piece<String>> = Vec::new();
            let mut push = |piece: Piece<String>| match (pieces.last_mut(), &piece) {
                (Some(Piece::Lit(acc)), Piece::Lit(toks)) => acc.extend(toks.iter().cloned()),
                _ => pieces.push(piece),
            };
            for p in comp {
                match p {
                    Piece::Lit(toks) => push(Piece::Lit(toks.clone())),
                    Piece::Arg { arg: 0, component } => {
                        for q in &expansion[*component] {
                            push(q.clone());
                        }
                    }
                    Piece::Arg { arg, component } => push(Piece::Arg {
                        arg: arg - 1 + fresh,
                        component: *component,
                    }),
                }
            }
            components.push(pieces);
        }
        new_vars.extend(self.vars[1..].iter().cloned());
        Form {
            components,
            vars: new_vars,
        }
    }
}

/// Computes `P(w)` for every derivable `w` with `|w| <= max_length`.
pub fn oracle_generate(
    grammar: &AcfgGrammar,
    max_length: usize,
    max_steps: usize,
    tolerance: f64,
) -> OracleReport {
    let mut masses: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    let mut pruned = 0.0_f64;
    let mut layer: IndexMap<Form, f64> = IndexMap::new();

    // one start form per start category, each with unit mass, mirroring the
    // parser's sum of goal scores across start categories
    for s in grammar.starts() {
        *layer
            .entry(Form::start(Category::nt(s.clone())))
            .or_insert(0.0) += 1.0;
    }

    let mut steps_taken = 0;
    for _ in 0..max_steps {
        if layer.is_empty() {
            break;
        }
        steps_taken += 1;
        let mut next: IndexMap<Form, f64> = IndexMap::new();
        for (form, mass) in layer.drain(..) {
            let var = form.vars[0].clone();
            for rule in grammar.rules_for(&var) {
                let m = mass * rule.prob;
                if m == 0.0 {
                    continue;
                }
                let new_form = form.substitute(rule);
                if new_form.min_yield() > max_length {
                    pruned += m;
                } else if new_form.is_ground() {
                    *masses.entry(new_form.yield_tokens()).or_insert(0.0) += m;
                } else {
                    *next.entry(new_form).or_insert(0.0) += m;
                }
            }
        }
        layer = next;
    }

    let alive: f64 = layer.values().sum();
    let residual = alive + pruned;
    OracleReport {
        masses,
        residual,
        steps_taken,
        converged: residual <= tolerance,
    }
}
