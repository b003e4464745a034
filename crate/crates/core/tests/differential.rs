//! Differential tests: the chart parser against the generation oracle on a
//! small grammar corpus, agreement between semirings, the context-free
//! specialization of the deduction rules, and literal (unfiltered) mode.

mod common;

use agparse::acfg::AcfgGrammar;
use agparse::chart::{run_chartparser, ParseError, ParserConfig};
use agparse::grammar::Unfiltered;
use agparse::oracle::oracle_generate;
use agparse::semiring::{LogProb, Recognized, Semiring, ViterbiProb};

fn config() -> ParserConfig {
    ParserConfig::default()
}

/// All strings over `vocab` with length <= max_len.
fn all_strings(vocab: &[&str], max_len: usize) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for t in vocab {
                let mut w2 = w.clone();
                w2.push(t.to_string());
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn check_against_oracle(name: &str, grammar: &AcfgGrammar, vocab: &[&str], max_len: usize) {
    let report = oracle_generate(grammar, max_len, 200, 1e-10);
    let tolerance = 1e-9 + report.residual;
    for w in all_strings(vocab, max_len) {
        let mass = report.mass_of(&w);
        let inside = run_chartparser::<_, LogProb>(grammar, &w, &config())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        inside.check_integrity().unwrap();
        let viterbi = run_chartparser::<_, ViterbiProb>(grammar, &w, &config()).unwrap();
        let boolean = run_chartparser::<_, Recognized>(grammar, &w, &config()).unwrap();
        let p = inside.inside().prob();
        assert!(
            (p - mass).abs() <= tolerance,
            "{name} on {w:?}: inside {p} vs oracle {mass} (residual {})",
            report.residual
        );
        // recognition agrees with positive mass and with the boolean run
        assert_eq!(boolean.recognized(), inside.recognized(), "{name} on {w:?}");
        assert_eq!(
            boolean.inside(),
            Recognized(boolean.recognized()),
            "{name} on {w:?}"
        );
        if mass > tolerance {
            assert!(inside.recognized(), "{name} on {w:?}: mass {mass}");
        }
        if !inside.recognized() {
            assert!(mass <= tolerance, "{name} on {w:?}");
        }
        // the best single derivation never outweighs the sum of all
        let v = viterbi.inside().prob();
        assert!(v <= p + 1e-9, "{name} on {w:?}: viterbi {v} > inside {p}");
        if inside.recognized() {
            assert!(v > 0.0, "{name} on {w:?}: recognized but empty viterbi");
        }
    }
}

#[test]
fn parser_matches_oracle_on_pcfg() {
    check_against_oracle("pcfg_ss", &common::pcfg_ss(), &["x"], 5);
}

#[test]
fn parser_matches_oracle_on_cyclic_grammar() {
    check_against_oracle("cyclic_unary", &common::cyclic_unary(), &["x"], 3);
}

#[test]
fn parser_matches_oracle_on_capswap() {
    check_against_oracle("capswap", &common::capswap(), &["A", "B"], 2);
}

#[test]
fn parser_matches_oracle_on_mixed_terminals() {
    check_against_oracle("mixed_cf", &common::mixed_cf(), &["a", "b", "c"], 5);
}

#[test]
fn parser_matches_oracle_on_anbncn() {
    check_against_oracle("anbncn", &common::anbncn(), &["a", "b", "c"], 4);
}

#[test]
fn parser_matches_oracle_on_random_grammars() {
    for seed in 0..20u64 {
        let g = common::random_pcfg(seed);
        check_against_oracle(&format!("random#{seed}"), &g, &["x", "y"], 4);
    }
}

#[test]
fn pinned_inside_scores() {
    let g = common::pcfg_ss();
    let one = run_chartparser::<_, LogProb>(&g, &common::toks("x"), &config()).unwrap();
    assert!((one.inside().prob() - 0.6).abs() < 1e-12);
    let two = run_chartparser::<_, LogProb>(&g, &common::toks("x x"), &config()).unwrap();
    assert!((two.inside().prob() - 0.144).abs() < 1e-12);
    let three = run_chartparser::<_, LogProb>(&g, &common::toks("x x x"), &config()).unwrap();
    assert!((three.inside().prob() - 0.06912).abs() < 1e-12);
}

/// On pure context-free grammars every edge covers one contiguous span and
/// consecutive ranges are adjacent, reproducing the indexed deduction rules.
#[test]
fn cf_specialization_holds() {
    for (name, g, w) in [
        ("pcfg_ss", common::pcfg_ss(), common::toks("x x x x")),
        ("capswap", common::capswap(), common::toks("A")),
        ("mixed_cf", common::mixed_cf(), common::toks("a a c b b")),
    ] {
        assert!(g.is_classical_cf(), "{name}");
        let forest = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
        assert!(forest.recognized(), "{name}");
        for edge in forest.edges() {
            let mut end = None;
            for rt in &edge.key.ranges {
                assert_eq!(rt.dim(), 1, "{name}: edge range tuple not singular");
                let r = rt.ranges()[0];
                if let Some(prev) = end {
                    assert_eq!(r.start(), prev, "{name}: edge spans not adjacent");
                }
                end = Some(r.end());
            }
        }
    }
}

/// The positional filters are an optimization, not a semantics change:
/// unfiltered (literal deduction) runs produce the same scores.
#[test]
fn unfiltered_mode_agrees() {
    let g = common::pcfg_ss();
    let raw = Unfiltered(common::pcfg_ss());
    for n in 1..=4 {
        let w = vec!["x".to_string(); n];
        let a = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
        let b = run_chartparser::<_, LogProb>(&raw, &w, &config()).unwrap();
        assert!((a.inside().prob() - b.inside().prob()).abs() < 1e-12);
        assert!(b.stats.edges_created >= a.stats.edges_created);
    }

    let mg = common::wh_grammar([1.0; 5]);
    let mg_raw = Unfiltered(common::wh_grammar([1.0; 5]));
    for w in [
        common::toks("what the cooks cooked"),
        common::toks("the cooks cooked what"),
    ] {
        let a = run_chartparser::<_, LogProb>(&mg, &w, &config()).unwrap();
        let b = run_chartparser::<_, LogProb>(&mg_raw, &w, &config()).unwrap();
        assert_eq!(a.recognized(), b.recognized());
        assert!((a.inside().prob() - b.inside().prob()).abs() < 1e-12);
    }
}

#[test]
fn empty_input_requires_empty_derivation() {
    let g = common::pcfg_ss();
    let forest = run_chartparser::<_, LogProb>(&g, &[], &config()).unwrap();
    assert!(!forest.recognized());

    // a lexicon whose start category is phonetically empty accepts ""
    let mg = agparse::formats::load_mg("<eps> :: c @ 1.0\nstart c\n").unwrap();
    let forest = run_chartparser::<_, LogProb>(&mg, &[], &config()).unwrap();
    assert!(forest.recognized());
    assert!((forest.inside().prob() - 1.0).abs() < 1e-12);
}

#[test]
fn unknown_tokens_are_diagnosed() {
    let g = common::pcfg_ss();
    let forest = run_chartparser::<_, LogProb>(&g, &common::toks("x y x"), &config()).unwrap();
    assert!(!forest.recognized());
    assert!(forest.best().is_none(), "no parse means no best derivation");
    assert_eq!(forest.unknown_tokens, vec!["y".to_string()]);
    // literal-only vocabulary (the 'c' of the growth rule) is known
    let forest =
        run_chartparser::<_, LogProb>(&common::anbncn(), &common::toks("a b c"), &config())
            .unwrap();
    assert!(forest.unknown_tokens.is_empty());
}

#[test]
fn budget_aborts_with_diagnostic() {
    let g = common::pcfg_ss();
    let tight = ParserConfig {
        item_budget: 5,
        ..ParserConfig::default()
    };
    match run_chartparser::<_, LogProb>(&g, &common::toks("x x x x"), &tight) {
        Err(ParseError::BudgetExceeded { budget, .. }) => assert_eq!(budget, 5),
        Ok(_) => panic!("expected a budget abort"),
    }
}

/// Parser recognition agrees with exhaustive derivation enumeration on
/// every arrangement of up to four lexicon tokens. Derivations over these
/// inputs use at most five lexical leaves (the silent item can occur at
/// most once, since nothing selects its output), so six structure-building
/// steps bound them all and the enumeration is a complete oracle.
#[test]
fn mg_recognition_matches_enumeration_on_all_arrangements() {
    let g = common::wh_grammar([1.0; 5]);
    let yields = common::mg_yields(&g, 6);
    let tokens = ["what", "the", "cooks", "cooked"];
    let mut arrangements: Vec<Vec<String>> = vec![Vec::new()];
    for len in 1..=4usize {
        let mut level: Vec<Vec<String>> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &level {
                for t in tokens {
                    if !w.iter().any(|x| x == t) {
                        let mut w2 = w.clone();
                        w2.push(t.to_string());
                        next.push(w2);
                    }
                }
            }
            level = next;
        }
        arrangements.extend(level);
    }
    for w in arrangements {
        let forest = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
        assert_eq!(
            forest.recognized(),
            yields.contains(&w),
            "parser and enumeration disagree on {w:?}"
        );
    }
}

/// Two distinct rewrite functions with the same right-hand side complete
/// the same edge separately; their masses add.
#[test]
fn parallel_rules_share_an_edge() {
    use agparse::acfg::{AcfgGrammar, Category};
    let g = AcfgGrammar::builder()
        .cf_rule("g", "S", vec![Category::nt("T"), Category::nt("T")], 0.3)
        .cf_rule("k", "S", vec![Category::nt("T"), Category::nt("T")], 0.2)
        .cf_rule("h", "S", vec![Category::term("x")], 0.5)
        .cf_rule("t", "T", vec![Category::term("y")], 1.0)
        .start("S")
        .build()
        .unwrap();
    let w = common::toks("y y");
    let forest = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
    forest.check_integrity().unwrap();
    assert!((forest.inside().prob() - 0.5).abs() < 1e-12);
    let report = oracle_generate(&g, 2, 30, 1.0);
    assert!((report.mass_of(&w) - 0.5).abs() < 1e-12);
    // the goal has two rule completions from one edge
    let goal = &forest.constituents()[forest.goal_ids()[0].0];
    assert_eq!(goal.completions.len(), 2);
}

/// An ambiguous two-word sentence: rightward and leftward selection both
/// derive the goal. Inside sums the derivations, viterbi keeps the best.
#[test]
fn mg_ambiguity_sums_and_maxes() {
    use agparse::minimalist::{LexicalItem, MgGrammar};
    let item = |fs: &str, score: f64| LexicalItem {
        phon: vec!["a".to_string()],
        features: fs.split_whitespace().map(|f| f.parse().unwrap()).collect(),
        score,
    };
    let g = MgGrammar::new(
        vec![item("=x s", 0.2), item("x= s", 0.3), item("x", 0.5)],
        vec!["s".into()],
    )
    .unwrap();
    let w = common::toks("a a");
    let inside = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
    inside.check_integrity().unwrap();
    assert!((inside.inside().prob() - 0.25).abs() < 1e-12);
    let viterbi = run_chartparser::<_, ViterbiProb>(&g, &w, &config()).unwrap();
    assert!((viterbi.inside().prob() - 0.15).abs() < 1e-12);
    // the best tree is the leftward-selection derivation
    let tree = viterbi.best().unwrap();
    assert_eq!(tree.rule(), "merge_L1");
}

/// A chain carrying two licensees moves twice: the first movement keeps
/// the string in place (non-final), the second fronts it.
#[test]
fn mg_double_movement() {
    use agparse::minimalist::{LexicalItem, MgGrammar};
    let item = |phon: &str, fs: &str| LexicalItem {
        phon: vec![phon.to_string()],
        features: fs.split_whitespace().map(|f| f.parse().unwrap()).collect(),
        score: 1.0,
    };
    let g = MgGrammar::new(
        vec![
            item("what", "d -wh -foc"),
            item("ate", "=d v"),
            item("Q", "=v +wh x"),
            item("F", "=x +foc y"),
        ],
        vec!["y".into()],
    )
    .unwrap();
    assert_eq!(g.chain_bound(), 3);
    let w = common::toks("what F Q ate");
    let forest = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
    forest.check_integrity().unwrap();
    assert!(forest.recognized());
    let tree = forest.best().unwrap();
    assert_eq!(tree.rule(), "move_1");
    let foc = &tree.children()[0];
    assert_eq!(foc.rule(), "merge_R1");
    let x = &foc.children()[1];
    assert_eq!(x.rule(), "move_2");
    // the unmoved arrangement is not derivable
    let bad = run_chartparser::<_, LogProb>(&g, &common::toks("F Q ate what"), &config()).unwrap();
    assert!(!bad.recognized());
}

#[test]
fn mg_probabilistic_scores_multiply() {
    // the grammar is unambiguous: the inside score of the sentence is the
    // product of its lexical-item scores, and equals the viterbi score
    let scores = [0.8, 0.7, 0.9, 0.5, 0.6];
    let expected: f64 = scores.iter().product();
    let g = common::wh_grammar(scores);
    let w = common::toks("what the cooks cooked");
    let inside = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
    assert!((inside.inside().prob() - expected).abs() < 1e-12);
    let viterbi = run_chartparser::<_, ViterbiProb>(&g, &w, &config()).unwrap();
    assert!((viterbi.inside().prob() - expected).abs() < 1e-12);
}

/// The silent item only ever occupies zero-width spans, and the goal always
/// covers the whole input.
#[test]
fn empty_items_stay_zero_width() {
    use agparse::algebra::{Range, RangeTuple};
    use agparse::chart::ConsKey;
    let g = common::wh_grammar([1.0; 5]);
    let w = common::toks("what the cooks cooked");
    let forest = run_chartparser::<_, LogProb>(&g, &w, &config()).unwrap();
    // the silent item is seeded at every position, e.g. position 3
    let eps_cat = agparse::minimalist::CategoryTuple::single(
        "=v +wh c"
            .split_whitespace()
            .map(|f| f.parse().unwrap())
            .collect(),
    );
    assert!(forest
        .constituent(&ConsKey {
            category: eps_cat,
            range: RangeTuple::single(Range::new(3, 3)),
        })
        .is_some());
    let tree = forest.best().unwrap();
    fn visit(t: &agparse::DerivTree<agparse::minimalist::CategoryTuple, String>) {
        match t {
            agparse::DerivTree::Leaf {
                terminal, range, ..
            } => {
                if terminal.is_none() {
                    assert!(range.ranges().iter().all(|r| r.is_empty()));
                }
            }
            agparse::DerivTree::Node { children, .. } => children.iter().for_each(visit),
        }
    }
    visit(&tree);
    match &tree {
        agparse::DerivTree::Node { range, .. } => {
            assert_eq!(range.ranges().len(), 1);
            assert_eq!(range.ranges()[0].start(), 1);
            assert_eq!(range.ranges()[0].end(), w.len() + 1);
        }
        _ => panic!("goal is not a leaf"),
    }
}

#[test]
fn requeue_counts_converge_geometrically() {
    // each refire adds one geometric term; the count stays proportional to
    // log(tol) / log(ratio)
    let g = common::cyclic_unary();
    let forest = run_chartparser::<_, LogProb>(&g, &common::toks("x"), &config()).unwrap();
    // closed form is 0.7 / (1 - 0.3) = 1; the loop stops once the log-score
    // delta drops under 1e-12, leaving a tail well inside ten times that
    assert!((forest.inside().prob() - 1.0).abs() <= 1e-11);
    assert!(forest.stats.requeues > 5);
    assert!(forest.stats.requeues < 200, "{}", forest.stats.requeues);
    assert!(forest.stats.reactivations > 0);
}

/// With exact (zero-tolerance) convergence and idempotent boolean scores
/// the item space is finite, so the agenda drains on every corpus grammar.
#[test]
fn monotone_agenda_halts_at_zero_tolerance() {
    let zero_tol = ParserConfig {
        convergence_tol: 0.0,
        ..ParserConfig::default()
    };
    let inputs = [
        common::toks("x x x"),
        common::toks("A"),
        common::toks("a a c b b"),
        common::toks("a a b b c c"),
        common::toks("what the cooks cooked"),
    ];
    let forests = [
        run_chartparser::<_, Recognized>(&common::pcfg_ss(), &inputs[0], &zero_tol),
        run_chartparser::<_, Recognized>(&common::capswap(), &inputs[1], &zero_tol),
        run_chartparser::<_, Recognized>(&common::mixed_cf(), &inputs[2], &zero_tol),
        run_chartparser::<_, Recognized>(&common::anbncn(), &inputs[3], &zero_tol),
    ];
    for f in forests {
        assert!(f.unwrap().recognized());
    }
    let mg = common::wh_grammar([1.0; 5]);
    assert!(run_chartparser::<_, Recognized>(&mg, &inputs[4], &zero_tol)
        .unwrap()
        .recognized());
}

#[test]
fn boolean_semiring_never_requeues_saturated_items() {
    // with idempotent plus, an acyclic grammar converges on second dequeue:
    // requeues equal the number of items
    let g = common::pcfg_ss();
    let w = common::toks("x x");
    let forest = run_chartparser::<_, Recognized>(&g, &w, &config()).unwrap();
    let items = forest.stats.edges_created + forest.stats.constituents_created;
    assert_eq!(forest.stats.requeues, items);
}
