//! Line-based text formats.
//!
//! Instances:
//! ```text
//! bcsp 1
//! var 0 1 2 3
//! var 1 1 2 3
//! con 0 1 forbid (1,1) (2,2) (3,3)
//! ```
//! Patterns:
//! ```text
//! pat 1
//! var x a b
//! var y c
//! pos x.a y.c
//! neg x.b y.c
//! ```
//! `#` starts a comment. Several `con` lines for the same pair intersect.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Instance, ModelError, Pattern, PointRef, Sign, Value, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing header `{0}`")]
    MissingHeader(&'static str),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate variable {0}")]
    DuplicateVariable(String),
    #[error("variable ids must be consecutive from 0: expected {expected}, found {found}")]
    VariableOrder { expected: usize, found: usize },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    err(line, ParseErrorKind::Syntax(msg.into()))
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn expect_header<'a, I>(lines: &mut I, header: &'static str) -> Result<(), ParseError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(header.split_whitespace()) => Ok(()),
        Some((n, _)) => Err(err(n, ParseErrorKind::MissingHeader(header))),
        None => Err(err(1, ParseErrorKind::MissingHeader(header))),
    }
}

fn parse_int<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T, ParseError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("expected integer, found `{tok}`")))
}

/// Parse `(a,b) (c,d) ...`, whitespace-insensitive.
fn parse_pairs(line: usize, text: &str) -> Result<Vec<(Value, Value)>, ParseError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut rest = compact.as_str();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| syntax(line, format!("expected `(` at `{rest}`")))?;
        let close = body
            .find(')')
            .ok_or_else(|| syntax(line, "unclosed `(`"))?;
        let (a, b) = body[..close]
            .split_once(',')
            .ok_or_else(|| syntax(line, format!("expected `a,b` in `({})`", &body[..close])))?;
        out.push((parse_int(line, a)?, parse_int(line, b)?));
        rest = &body[close + 1..];
    }
    Ok(out)
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = significant_lines(text);
    expect_header(&mut lines, "bcsp 1")?;
    let mut domains: Vec<BTreeSet<Value>> = Vec::new();
    let mut cons = Vec::new();
    for (n, l) in lines {
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("var") => {
                let id_tok = toks.next().ok_or_else(|| syntax(n, "missing variable id"))?;
                let id: usize = parse_int(n, id_tok)?;
                if id < domains.len() {
                    return Err(err(n, ParseErrorKind::DuplicateVariable(id_tok.to_string())));
                }
                if id != domains.len() {
                    return Err(err(
                        n,
                        ParseErrorKind::VariableOrder { expected: domains.len(), found: id },
                    ));
                }
                let dom = toks
                    .map(|t| parse_int(n, t))
                    .collect::<Result<BTreeSet<Value>, _>>()?;
                domains.push(dom);
            }
            Some("con") => {
                let x: Var = parse_int(n, toks.next().ok_or_else(|| syntax(n, "missing variable"))?)?;
                let y: Var = parse_int(n, toks.next().ok_or_else(|| syntax(n, "missing variable"))?)?;
                let forbid = match toks.next() {
                    Some("forbid") => true,
                    Some("allow") => false,
                    other => {
                        return Err(syntax(
                            n,
                            format!("expected `forbid` or `allow`, found `{}`", other.unwrap_or("")),
                        ))
                    }
                };
                let rest: Vec<&str> = toks.collect();
                let pairs = parse_pairs(n, &rest.join(" "))?;
                cons.push((n, x, y, forbid, pairs));
            }
            Some(other) => return Err(syntax(n, format!("unknown directive `{other}`"))),
            None => unreachable!("significant lines are non-empty"),
        }
    }
    let mut inst = Instance::new(domains);
    for (n, x, y, forbid, pairs) in cons {
        if x == y {
            return Err(err(n, ModelError::SelfLoop(x).into()));
        }
        for v in [x, y] {
            if v >= inst.num_vars() {
                return Err(err(n, ParseErrorKind::UnknownVariable(v.to_string())));
            }
        }
        let res = if forbid {
            inst.forbid(x, y, pairs)
        } else {
            inst.restrict(x, y, pairs)
        };
        res.map_err(|e| err(n, e.into()))?;
    }
    Ok(inst)
}

/// Canonical text: variables in index order, constraints in lexicographic
/// pair order as sorted `forbid` lists.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::from("bcsp 1\n");
    for x in inst.vars() {
        out.push_str("var ");
        out.push_str(&x.to_string());
        for v in inst.domain(x) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    for (x, y) in inst.constrained_pairs() {
        let allowed = inst.allowed_pairs(x, y);
        let _ = write!(out, "con {x} {y} forbid");
        for &a in inst.domain(x) {
            for &b in inst.domain(y) {
                if !allowed.contains(&(a, b)) {
                    let _ = write!(out, " ({a},{b})");
                }
            }
        }
        out.push('\n');
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub fn parse_pattern(text: &str) -> Result<Pattern, ParseError> {
    let mut lines = significant_lines(text);
    expect_header(&mut lines, "pat 1")?;
    let mut pat = Pattern::new();
    for (n, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks[0] {
            "var" => {
                let name = *toks.get(1).ok_or_else(|| syntax(n, "missing variable name"))?;
                for t in &toks[1..] {
                    if !is_ident(t) {
                        return Err(syntax(n, format!("bad identifier `{t}`")));
                    }
                }
                if pat.var_index(name).is_some() {
                    return Err(err(n, ParseErrorKind::DuplicateVariable(name.to_string())));
                }
                pat.add_var(name, toks[2..].iter().copied())
                    .map_err(|e| err(n, e.into()))?;
            }
            kw @ ("pos" | "neg") => {
                if toks.len() != 3 {
                    return Err(syntax(n, format!("`{kw}` takes two points")));
                }
                let resolve = |t: &str| -> Result<PointRef, ParseError> {
                    pat.point(t)
                        .ok_or_else(|| err(n, ModelError::UnknownPoint(t.to_string()).into()))
                };
                let p = resolve(toks[1])?;
                let q = resolve(toks[2])?;
                let sign = if kw == "pos" { Sign::Positive } else { Sign::Negative };
                pat.set_edge(p, q, sign).map_err(|e| err(n, e.into()))?;
            }
            other => return Err(syntax(n, format!("unknown directive `{other}`"))),
        }
    }
    Ok(pat)
}

pub fn serialize_pattern(pat: &Pattern) -> String {
    let mut out = String::from("pat 1\n");
    for v in pat.vars() {
        out.push_str("var ");
        out.push_str(&v.name);
        for p in &v.points {
            out.push(' ');
            out.push_str(p);
        }
        out.push('\n');
    }
    for (p, q, s) in pat.edges() {
        let kw = match s {
            Sign::Positive => "pos",
            Sign::Negative => "neg",
        };
        let _ = writeln!(out, "{kw} {} {}", pat.point_name(p), pat.point_name(q));
    }
    out
}
