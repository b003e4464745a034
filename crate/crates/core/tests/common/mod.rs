//! Shared fixtures and independent oracles for the integration tests.

#![allow(dead_code)]

use agparse::acfg::{AcfgGrammar, Category};
use agparse::algebra::{Piece, Range, RangeTuple, TermFunction, WordTuple};
use agparse::minimalist::{
    mg_merge, mg_move, CategoryTuple, LexicalItem, MergeCase, MgGrammar, MoveCase,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

// ---------------------------------------------------------------- grammars

/// S -> S S (0.4) | 'x' (0.6)
pub fn pcfg_ss() -> AcfgGrammar {
    AcfgGrammar::builder()
        .cf_rule("g", "S", vec![Category::nt("S"), Category::nt("S")], 0.4)
        .cf_rule("h", "S", vec![Category::term("x")], 0.6)
        .start("S")
        .build()
        .unwrap()
}

/// Unary cycle: S -> S (0.3) | 'x' (0.7)
pub fn cyclic_unary() -> AcfgGrammar {
    AcfgGrammar::builder()
        .cf_rule("u", "S", vec![Category::nt("S")], 0.3)
        .cf_rule("h", "S", vec![Category::term("x")], 0.7)
        .start("S")
        .build()
        .unwrap()
}

/// Capitalize/swap grammar with terminal leaves; cyclic through a <-> b.
pub fn capswap() -> AcfgGrammar {
    AcfgGrammar::builder()
        .cf_rule("g", "a", vec![Category::nt("A")], 0.7)
        .cf_rule("h", "a", vec![Category::nt("b")], 0.3)
        .cf_rule("g", "b", vec![Category::nt("B")], 0.6)
        .cf_rule("h", "b", vec![Category::nt("a")], 0.4)
        .cf_rule("t", "A", vec![Category::term("A")], 1.0)
        .cf_rule("u", "B", vec![Category::term("B")], 1.0)
        .start("a")
        .build()
        .unwrap()
}

/// Mixed-terminal rules: S -> 'a' S 'b' (0.3) | 'c' (0.7); language a^n c b^n.
pub fn mixed_cf() -> AcfgGrammar {
    AcfgGrammar::builder()
        .cf_rule(
            "wrap",
            "S",
            vec![Category::term("a"), Category::nt("S"), Category::term("b")],
            0.3,
        )
        .cf_rule("stop", "S", vec![Category::term("c")], 0.7)
        .start("S")
        .build()
        .unwrap()
}

/// The tuple-algebra grammar for { a^n b^n c^n : n >= 1 }.
pub fn anbncn() -> AcfgGrammar {
    agparse::formats::load_acfg(
        "dim A 2\n\
         op wrap (2) -> 2 = ('a' $1.1 ; 'b' $1.2 'c')\n\
         op glue (2) -> 1 = ($1.1 $1.2)\n\
         base: A -> ('a' ; 'b' 'c') @ 0.5\n\
         grow: A -> wrap[A] @ 0.5\n\
         top: S -> glue[A] @ 1.0\n\
         start S\n",
    )
    .unwrap()
}

/// The wh-question lexicon, with per-item scores.
pub fn wh_grammar(scores: [f64; 5]) -> MgGrammar {
    let mk = |phon: &str, fs: &str, score: f64| LexicalItem {
        phon: if phon.is_empty() {
            vec![]
        } else {
            vec![phon.to_string()]
        },
        features: fs.split_whitespace().map(|f| f.parse().unwrap()).collect(),
        score,
    };
    MgGrammar::new(
        vec![
            mk("cooked", "=d d= v", scores[0]),
            mk("what", "d -wh", scores[1]),
            mk("cooks", "n", scores[2]),
            mk("the", "=n d", scores[3]),
            mk("", "=v +wh c", scores[4]),
        ],
        vec!["c".into()],
    )
    .unwrap()
}

/// A random small grammar over nonterminals {S, T, U} and terminals
/// {x, y}: every nonterminal gets a leaf rule (so it is productive) plus
/// one or two random unary/binary/mixed rules, probabilities normalized.
pub fn random_pcfg(seed: u64) -> AcfgGrammar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nts = ["S", "T", "U"];
    let terms = ["x", "y"];
    let mut builder = AcfgGrammar::builder().start("S");
    for nt in nts {
        let extra = rng.gen_range(1..=2);
        let mut bodies: Vec<Vec<Category>> =
            vec![vec![Category::term(terms[rng.gen_range(0..terms.len())])]];
        for _ in 0..extra {
            let shape = rng.gen_range(0..4);
            let pick_nt = |rng: &mut ChaCha8Rng| Category::nt(nts[rng.gen_range(0..nts.len())]);
            let pick_t =
                |rng: &mut ChaCha8Rng| Category::term(terms[rng.gen_range(0..terms.len())]);
            let body = match shape {
                0 => vec![pick_nt(&mut rng)],
                1 => vec![pick_nt(&mut rng), pick_nt(&mut rng)],
                2 => vec![pick_t(&mut rng), pick_nt(&mut rng)],
                _ => vec![pick_nt(&mut rng), pick_t(&mut rng)],
            };
            if !bodies.contains(&body) {
                bodies.push(body);
            }
        }
        let weights: Vec<f64> = (0..bodies.len())
            .map(|_| rng.gen_range(0.05..1.0))
            .collect();
        let total: f64 = weights.iter().sum();
        for (i, (body, w)) in bodies.into_iter().zip(weights).enumerate() {
            builder = builder.cf_rule(format!("r_{nt}_{i}"), nt, body, w / total);
        }
    }
    builder
        .build()
        .unwrap_or_else(|e| panic!("seed {seed}: {e}"))
}

// ------------------------------------------------- membership oracles

/// Direct counting membership for { a^n b^n c^n : n >= 1 }.
pub fn is_anbncn(tokens: &[String]) -> bool {
    let n = tokens.len();
    if n == 0 || !n.is_multiple_of(3) {
        return false;
    }
    let k = n / 3;
    tokens[..k].iter().all(|t| t == "a")
        && tokens[k..2 * k].iter().all(|t| t == "b")
        && tokens[2 * k..].iter().all(|t| t == "c")
}

/// An expression of the structure-building closure: its feature side, the
/// string side (one token list per chain), and how many operations built it.
#[derive(Clone, PartialEq, Debug)]
pub struct MgExpression {
    pub cat: CategoryTuple,
    pub strings: Vec<Vec<String>>,
    pub ops: usize,
}

/// Exhaustively enumerates all expressions derivable with at most
/// `max_ops` merge/move steps, building the strings directly from the
/// schemata (selector string left for rightward selection, right for
/// leftward; movers land leftmost). Independent of the parser and of the
/// tuple-operation machinery.
pub fn enumerate_mg(grammar: &MgGrammar, max_ops: usize) -> Vec<MgExpression> {
    let mut exprs: Vec<MgExpression> = grammar
        .lexicon()
        .iter()
        .map(|item| MgExpression {
            cat: item.category(),
            strings: vec![item.phon.clone()],
            ops: 0,
        })
        .collect();
    loop {
        let mut added = Vec::new();
        for a in &exprs {
            for b in &exprs {
                if a.ops + b.ops + 1 > max_ops {
                    continue;
                }
                for (cat, case) in mg_merge(&a.cat, &b.cat) {
                    let mut strings: Vec<Vec<String>> = Vec::new();
                    match case {
                        MergeCase::R1 => {
                            let mut head = a.strings[0].clone();
                            head.extend(b.strings[0].iter().cloned());
                            strings.push(head);
                            strings.extend(a.strings[1..].iter().cloned());
                            strings.extend(b.strings[1..].iter().cloned());
                        }
                        MergeCase::L1 => {
                            let mut head = b.strings[0].clone();
                            head.extend(a.strings[0].iter().cloned());
                            strings.push(head);
                            strings.extend(a.strings[1..].iter().cloned());
                            strings.extend(b.strings[1..].iter().cloned());
                        }
                        MergeCase::R2 | MergeCase::L2 => {
                            strings.extend(a.strings.iter().cloned());
                            strings.extend(b.strings.iter().cloned());
                        }
                    }
                    let e = MgExpression {
                        cat,
                        strings,
                        ops: a.ops + b.ops + 1,
                    };
                    if !exprs.contains(&e) && !added.contains(&e) {
                        added.push(e);
                    }
                }
            }
            if a.ops < max_ops {
                if let Ok(results) = mg_move(&a.cat) {
                    for (cat, case, chain) in results {
                        let mut strings = Vec::new();
                        match case {
                            MoveCase::One => {
                                let mut head = a.strings[chain].clone();
                                head.extend(a.strings[0].iter().cloned());
                                strings.push(head);
                                for (j, s) in a.strings.iter().enumerate().skip(1) {
                                    if j != chain {
                                        strings.push(s.clone());
                                    }
                                }
                            }
                            MoveCase::Two => strings = a.strings.clone(),
                        }
                        let e = MgExpression {
                            cat,
                            strings,
                            ops: a.ops + 1,
                        };
                        if !exprs.contains(&e) && !added.contains(&e) {
                            added.push(e);
                        }
                    }
                }
            }
        }
        if added.is_empty() {
            break;
        }
        exprs.extend(added);
    }
    exprs
}

/// Complete yields of the start category derivable within `max_ops` steps.
pub fn mg_yields(grammar: &MgGrammar, max_ops: usize) -> Vec<Vec<String>> {
    use agparse::grammar::GrammarContract;
    let starts = grammar.start_categories();
    enumerate_mg(grammar, max_ops)
        .into_iter()
        .filter(|e| starts.contains(&e.cat))
        .map(|e| e.strings[0].clone())
        .collect()
}

// ------------------------------------------------ homomorphism sampling

/// Samples `samples` defined range applications of `f` together with
/// matching inputs, and checks that extraction commutes with the function:
/// extract(f_ranges(args)) == f_words(extract(args)). Panics with a
/// description on the first failure.
pub fn check_homomorphism(f: &TermFunction<String>, samples: usize, seed: u64) {
    let comps = f
        .composition()
        .expect("homomorphism sampling applies to compositions");
    let arg_dims = f.signature().arg_dims.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = ["a", "b", "c", "d"];
    let input_len = 10usize;
    let mut done = 0;
    let mut attempts = 0;
    while done < samples {
        attempts += 1;
        assert!(
            attempts < samples * 100,
            "sampler failed to build defined applications for {}",
            f.name()
        );
        let mut assigned: Vec<Vec<Option<Range>>> =
            arg_dims.iter().map(|d| vec![None; *d]).collect();
        let mut forced: Vec<Option<String>> = vec![None; input_len + 2];
        let mut ok = true;
        for comp in comps {
            let lens: Vec<usize> = comp
                .iter()
                .map(|p| match p {
                    Piece::Arg { .. } => rng.gen_range(0..=2),
                    Piece::Lit(toks) => toks.len(),
                })
                .collect();
            let total: usize = lens.iter().sum();
            if total > input_len {
                ok = false;
                break;
            }
            let start = rng.gen_range(1..=input_len + 1 - total);
            let mut cur = start;
            for (piece, len) in comp.iter().zip(&lens) {
                match piece {
                    Piece::Arg { arg, component } => {
                        assigned[*arg][*component] = Some(Range::new(cur, cur + len));
                    }
                    Piece::Lit(toks) => {
                        for (k, t) in toks.iter().enumerate() {
                            let slot = &mut forced[cur + k];
                            match slot {
                                Some(prev) if prev != t => {
                                    ok = false;
                                }
                                _ => *slot = Some(t.clone()),
                            }
                        }
                    }
                }
                cur += len;
            }
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        let args: Vec<RangeTuple> = assigned
            .into_iter()
            .map(|comps| {
                RangeTuple::new(
                    comps
                        .into_iter()
                        .map(|r| r.expect("plan references every component"))
                        .collect(),
                )
            })
            .collect();
        let input: Vec<String> = (1..=input_len)
            .map(|pos| {
                forced[pos]
                    .clone()
                    .unwrap_or_else(|| alphabet[rng.gen_range(0..alphabet.len())].to_string())
            })
            .collect();
        let out_ranges = f
            .apply_ranges(&args, &input)
            .expect("constructed application is defined");
        let word_args: Vec<WordTuple<String>> = args.iter().map(|rt| rt.extract(&input)).collect();
        let direct = f.evaluate(&word_args).expect("evaluation is total");
        let via_ranges = out_ranges.extract(&input);
        assert_eq!(
            via_ranges,
            direct,
            "homomorphism violated for {} on {:?} over {:?}",
            f.name(),
            args,
            input
        );
        done += 1;
    }
}
