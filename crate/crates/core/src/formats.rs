//! Text formats for grammar files.
//!
//! The `acfg` format declares probabilistic rewrite rules, one per line:
//!
//! ```text
//! # rules:  FUNC ':' LHS '->' BODY '@' PROB
//! g: S -> S S @ 0.4
//! h: S -> 'x' @ 0.6
//! start S
//! ```
//!
//! Categories are bare tokens, terminals are quoted. Reusing a function
//! name on several lines makes those rules one partial rewrite function
//! (one image per left-hand side). Beyond the context-free core, a grammar
//! may declare category dimensions and tuple operations, and use call
//! expressions and tuple constants in rule bodies:
//!
//! ```text
//! dim A 2
//! op wrap (2) -> 2 = ('a' $1.1 ; 'b' $1.2 'c')
//! op glue (2) -> 1 = ($1.1 $1.2)
//! base: A -> ('a' ; 'b' 'c') @ 0.5
//! grow: A -> wrap[A] @ 0.5
//! top:  S -> glue[A] @ 1.0
//! ```
//!
//! The `mg` format is a lexicon, one item per line, with `<eps>` for empty
//! phonology and features spelled `=f`, `f=`, `+f`, `-f`, `f`:
//!
//! ```text
//! the :: =n d @ 1.0
//! <eps> :: =v +wh c @ 1.0
//! start c
//! ```

use thiserror::Error;

use crate::acfg::{AcfgGrammar, Category, OperationDecl, RuleAtom};
use crate::algebra::Piece;
use crate::grammar::GrammarContract;
use crate::minimalist::{LexicalItem, MgGrammar};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid grammar:\n{0}")]
    Invalid(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> LoadError {
    LoadError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Strips a `#` comment, respecting quoted terminals.
fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '\'' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Quoted(String),
    ArgRef(usize, usize),
    Colon,
    Arrow,
    At,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Semi,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Quoted(s) => write!(f, "'{s}'"),
            Tok::ArgRef(a, c) => write!(f, "${a}.{c}"),
            Tok::Colon => write!(f, ":"),
            Tok::Arrow => write!(f, "->"),
            Tok::At => write!(f, "@"),
            Tok::LBrack => write!(f, "["),
            Tok::RBrack => write!(f, "]"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Comma => write!(f, ","),
            Tok::Semi => write!(f, ";"),
        }
    }
}

fn tokenize(line_no: usize, text: &str) -> Result<Vec<Tok>, LoadError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '@' => {
                toks.push(Tok::At);
                i += 1;
            }
            '[' => {
                toks.push(Tok::LBrack);
                i += 1;
            }
            ']' => {
                toks.push(Tok::RBrack);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            ';' => {
                toks.push(Tok::Semi);
                i += 1;
            }
            '-' if i + 1 < chars.len() && chars[i + 1] == '>' => {
                toks.push(Tok::Arrow);
                i += 2;
            }
            '\'' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j] != '\'' {
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(parse_err(line_no, "unterminated quoted terminal"));
                }
                toks.push(Tok::Quoted(chars[start..j].iter().collect()));
                i = j + 1;
            }
            '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                let body: String = chars[i + 1..j].iter().collect();
                let (a, c) = match body.split_once('.') {
                    Some((a, c)) => (a.parse::<usize>(), c.parse::<usize>()),
                    None => (body.parse::<usize>(), Ok(1)),
                };
                match (a, c) {
                    (Ok(a), Ok(c)) if a >= 1 && c >= 1 => toks.push(Tok::ArgRef(a, c)),
                    _ => {
                        return Err(parse_err(
                            line_no,
                            format!("malformed argument reference ${body}"),
                        ))
                    }
                }
                i = j;
            }
            _ => {
                let start = i;
                while i < chars.len() {
                    let c = chars[i];
                    if c.is_whitespace()
                        || ":@[](),;'$".contains(c)
                        || (c == '-' && i + 1 < chars.len() && chars[i + 1] == '>')
                    {
                        break;
                    }
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
        }
    }
    Ok(toks)
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<&'a Tok, LoadError> {
        let t = self
            .toks
            .get(self.pos)
            .ok_or_else(|| parse_err(self.line, "unexpected end of line"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &Tok) -> Result<(), LoadError> {
        let t = self.next()?;
        if t == want {
            Ok(())
        } else {
            Err(parse_err(self.line, format!("expected {want}, found {t}")))
        }
    }

    fn ident(&mut self) -> Result<String, LoadError> {
        match self.next()? {
            Tok::Ident(s) => Ok(s.clone()),
            t => Err(parse_err(self.line, format!("expected a name, found {t}"))),
        }
    }

    fn number(&mut self) -> Result<f64, LoadError> {
        let line = self.line;
        match self.next()? {
            Tok::Ident(s) => s
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("expected a number, found {s}"))),
            t => Err(parse_err(line, format!("expected a number, found {t}"))),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn parse_atom(cur: &mut Cursor) -> Result<RuleAtom, LoadError> {
    match cur.next()? {
        Tok::Quoted(t) => Ok(RuleAtom::Cat(Category::term(t.clone()))),
        Tok::Ident(name) => {
            if cur.peek() == Some(&Tok::LBrack) {
                cur.expect(&Tok::LBrack)?;
                let mut args = vec![parse_atom(cur)?];
                while cur.peek() == Some(&Tok::Comma) {
                    cur.expect(&Tok::Comma)?;
                    args.push(parse_atom(cur)?);
                }
                cur.expect(&Tok::RBrack)?;
                Ok(RuleAtom::Call(name.clone(), args))
            } else {
                Ok(RuleAtom::Cat(Category::nt(name.clone())))
            }
        }
        Tok::LParen => {
            let mut comps = Vec::new();
            let mut comp = Vec::new();
            loop {
                match cur.next()? {
                    Tok::Quoted(t) => comp.push(t.clone()),
                    Tok::Semi => {
                        comps.push(std::mem::take(&mut comp));
                    }
                    Tok::RParen => {
                        comps.push(comp);
                        break;
                    }
                    t => {
                        return Err(parse_err(
                            cur.line,
                            format!("expected a quoted terminal in tuple constant, found {t}"),
                        ))
                    }
                }
            }
            Ok(RuleAtom::Tuple(comps))
        }
        t => Err(parse_err(cur.line, format!("unexpected {t} in rule body"))),
    }
}

fn parse_op_line(line_no: usize, toks: &[Tok]) -> Result<OperationDecl, LoadError> {
    let mut cur = Cursor {
        toks,
        pos: 0,
        line: line_no,
    };
    let name = cur.ident()?;
    cur.expect(&Tok::LParen)?;
    let mut arg_dims = Vec::new();
    loop {
        let d = cur.number()?;
        if d < 1.0 || d.fract() != 0.0 {
            return Err(parse_err(line_no, "dimensions are positive integers"));
        }
        arg_dims.push(d as usize);
        match cur.next()? {
            Tok::Comma => continue,
            Tok::RParen => break,
            t => return Err(parse_err(line_no, format!("expected , or ), found {t}"))),
        }
    }
    cur.expect(&Tok::Arrow)?;
    let result_dim = cur.number()?;
    if result_dim < 1.0 || result_dim.fract() != 0.0 {
        return Err(parse_err(line_no, "dimensions are positive integers"));
    }
    // '=' is not a tokenizer special; it arrives as an ident
    match cur.next()? {
        Tok::Ident(s) if s == "=" => {}
        t => return Err(parse_err(line_no, format!("expected =, found {t}"))),
    }
    cur.expect(&Tok::LParen)?;
    let mut components: Vec<Vec<Piece<String>>> = Vec::new();
    let mut comp: Vec<Piece<String>> = Vec::new();
    loop {
        match cur.next()? {
            Tok::Quoted(t) => comp.push(Piece::Lit(vec![t.clone()])),
            Tok::ArgRef(a, c) => comp.push(Piece::Arg {
                arg: a - 1,
                component: c - 1,
            }),
            Tok::Semi => components.push(std::mem::take(&mut comp)),
            Tok::RParen => {
                components.push(comp);
                break;
            }
            t => {
                return Err(parse_err(
                    line_no,
                    format!("expected a component piece, found {t}"),
                ))
            }
        }
    }
    if !cur.done() {
        return Err(parse_err(line_no, "trailing tokens after operation"));
    }
    if components.len() != result_dim as usize {
        return Err(parse_err(
            line_no,
            format!(
                "operation {name} declares result dimension {result_dim} but {} components",
                components.len()
            ),
        ));
    }
    Ok(OperationDecl {
        name,
        arg_dims,
        components,
    })
}

/// Loads and validates a grammar in the `acfg` format.
pub fn load_acfg(text: &str) -> Result<AcfgGrammar, LoadError> {
    let mut builder = AcfgGrammar::builder();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("start") => {
                let name = words
                    .next()
                    .ok_or_else(|| parse_err(line_no, "start needs a category"))?;
                if words.next().is_some() {
                    return Err(parse_err(line_no, "trailing tokens after start"));
                }
                builder = builder.start(name);
            }
            Some("dim") => {
                let name = words
                    .next()
                    .ok_or_else(|| parse_err(line_no, "dim needs a category"))?;
                let d: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .filter(|d| *d >= 1)
                    .ok_or_else(|| parse_err(line_no, "dim needs a positive integer"))?;
                if words.next().is_some() {
                    return Err(parse_err(line_no, "trailing tokens after dim"));
                }
                builder = builder.dim(name, d);
            }
            Some("op") => {
                let rest = line.trim_start_matches("op").trim_start();
                let toks = tokenize(line_no, rest)?;
                builder = builder.operation(parse_op_line(line_no, &toks)?);
            }
            _ => {
                let toks = tokenize(line_no, line)?;
                let mut cur = Cursor {
                    toks: &toks,
                    pos: 0,
                    line: line_no,
                };
                let function = cur.ident()?;
                cur.expect(&Tok::Colon)?;
                let lhs = cur.ident()?;
                cur.expect(&Tok::Arrow)?;
                let mut body = Vec::new();
                while cur.peek() != Some(&Tok::At) {
                    body.push(parse_atom(&mut cur)?);
                }
                cur.expect(&Tok::At)?;
                let prob = cur.number()?;
                if !cur.done() {
                    return Err(parse_err(line_no, "trailing tokens after probability"));
                }
                builder = builder.rule(function, lhs, body, prob);
            }
        }
    }
    builder
        .build()
        .map_err(|report| LoadError::Invalid(report.to_string().trim_end().to_string()))
}

fn render_atom(atom: &RuleAtom) -> String {
    match atom {
        RuleAtom::Cat(Category::Nonterminal(n)) => n.clone(),
        RuleAtom::Cat(Category::Terminal(t)) => format!("'{t}'"),
        RuleAtom::Call(name, args) => {
            let args: Vec<String> = args.iter().map(render_atom).collect();
            format!("{name}[{}]", args.join(", "))
        }
        RuleAtom::Tuple(comps) => {
            let comps: Vec<String> = comps
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|t| format!("'{t}'"))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            format!("({})", comps.join(" ; "))
        }
    }
}

/// Canonical text for an `acfg` grammar; loading it back yields an
/// identical grammar.
pub fn serialize_acfg(grammar: &AcfgGrammar) -> String {
    let mut out = String::new();
    for s in grammar.starts() {
        out.push_str(&format!("start {s}\n"));
    }
    for (name, d) in grammar.dim_decls() {
        out.push_str(&format!("dim {name} {d}\n"));
    }
    for op in grammar.operations() {
        let dims: Vec<String> = op.arg_dims.iter().map(|d| d.to_string()).collect();
        let comps: Vec<String> = op
            .components
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|p| match p {
                        Piece::Lit(toks) => toks
                            .iter()
                            .map(|t| format!("'{t}'"))
                            .collect::<Vec<_>>()
                            .join(" "),
                        Piece::Arg { arg, component } => format!("${}.{}", arg + 1, component + 1),
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        out.push_str(&format!(
            "op {} ({}) -> {} = ({})\n",
            op.name,
            dims.join(", "),
            op.components.len(),
            comps.join(" ; ")
        ));
    }
    for rule in grammar.rules() {
        let body: Vec<String> = rule.body.iter().map(render_atom).collect();
        out.push_str(&format!(
            "{}: {} -> {} @ {}\n",
            rule.function,
            rule.lhs,
            body.join(" "),
            rule.prob
        ));
    }
    out
}

/// Loads and validates a lexicon in the `mg` format.
pub fn load_mg(text: &str) -> Result<MgGrammar, LoadError> {
    let mut lexicon = Vec::new();
    let mut starts = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let first = words.next().expect("nonempty line");
        if first == "start" {
            let name = words
                .next()
                .ok_or_else(|| parse_err(line_no, "start needs a category"))?;
            if words.next().is_some() {
                return Err(parse_err(line_no, "trailing tokens after start"));
            }
            starts.push(name.to_string());
            continue;
        }
        let phon = if first == "<eps>" {
            Vec::new()
        } else {
            vec![first.to_string()]
        };
        match words.next() {
            Some("::") => {}
            other => {
                return Err(parse_err(
                    line_no,
                    format!("expected ::, found {}", other.unwrap_or("end of line")),
                ))
            }
        }
        let mut features = Vec::new();
        let mut score = None;
        for w in words.by_ref() {
            if w == "@" {
                break;
            }
            features.push(w.parse().map_err(|e: String| parse_err(line_no, e))?);
        }
        if let Some(w) = words.next() {
            score = Some(
                w.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("expected a score, found {w}")))?,
            );
        }
        if words.next().is_some() {
            return Err(parse_err(line_no, "trailing tokens after score"));
        }
        let score = score.ok_or_else(|| parse_err(line_no, "missing @ SCORE"))?;
        lexicon.push(LexicalItem {
            phon,
            features,
            score,
        });
    }
    MgGrammar::new(lexicon, starts).map_err(|errors| LoadError::Invalid(errors.join("\n")))
}

/// Canonical text for an `mg` lexicon.
pub fn serialize_mg(grammar: &MgGrammar) -> String {
    let mut out = String::new();
    for item in grammar.lexicon() {
        let phon = if item.phon.is_empty() {
            "<eps>".to_string()
        } else {
            item.phon.join(" ")
        };
        let feats: Vec<String> = item.features.iter().map(|f| f.to_string()).collect();
        out.push_str(&format!("{phon} :: {} @ {}\n", feats.join(" "), item.score));
    }
    for cat in grammar.start_categories() {
        let head = &cat.chains()[0][0];
        out.push_str(&format!("start {}\n", head.name));
    }
    out
}
