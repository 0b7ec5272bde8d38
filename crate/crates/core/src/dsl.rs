//! The line-oriented model format: charts, frames, strata, points and Lie
//! algebra tables.
//!
//! Sections:
//!   chart <n>
//!   field <name> = <expr over x1..xn and d1..dn>
//!   point <name> = <x coords> [; <p coords>]
//!   stratum <name> dim <d> ... end      (maps into T*M coordinates)
//!   basestratum <name> dim <d> ... end  (maps into base coordinates)
//!   liealg <n> ... end                  (c i j k = a/b, v / vspan lines)
//! Rational literals are written a/b; floating literals are rejected.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::algebra::{LinearSubspace, MultiPoly, Rat};
use crate::symplectic::{cotangent_names, VectorField};

/// Position of a token in the source text.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub byte: usize,
    pub len: usize,
}

/// A parse diagnostic with the offending span.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}",
            self.span.line, self.span.column, self.message
        )
    }
}

impl std::error::Error for Diagnostic {}

/// A named point literal: base point or full cotangent point.
#[derive(Clone, PartialEq, Debug)]
pub enum PointLit {
    Base(Vec<Rat>),
    Cotangent(Vec<Rat>, Vec<Rat>),
}

/// A declared stratum chart into the cotangent chart.
#[derive(Clone, PartialEq, Debug)]
pub struct StratumDecl {
    pub name: String,
    pub domain_dim: usize,
    /// 2n components in the chart-domain variables u1..ud.
    pub phi: Vec<MultiPoly>,
    /// Optional defining equations on T*M for cross-validation.
    pub eqs: Vec<MultiPoly>,
    /// Chart-domain sample points.
    pub samples: Vec<Vec<Rat>>,
}

/// A declared stratum chart into the base manifold.
#[derive(Clone, PartialEq, Debug)]
pub struct BaseStratumDecl {
    pub name: String,
    pub domain_dim: usize,
    /// n components in the chart-domain variables u1..ud.
    pub psi: Vec<MultiPoly>,
    pub samples: Vec<Vec<Rat>>,
}

/// A structure-constant table with a distinguished subspace.
#[derive(Clone, PartialEq, Debug)]
pub struct LieAlgDecl {
    pub dim: usize,
    /// Nonzero constants c^k_{ij} for i < j (1-based indices in the key).
    pub constants: BTreeMap<(usize, usize, usize), Rat>,
    pub v: LinearSubspace,
}

/// The parsed model.
#[derive(Clone, PartialEq, Debug)]
pub struct ModelSpec {
    pub chart_dim: Option<usize>,
    pub fields: Vec<(String, VectorField)>,
    pub points: Vec<(String, PointLit)>,
    pub strata: Vec<StratumDecl>,
    pub base_strata: Vec<BaseStratumDecl>,
    pub liealg: Option<LieAlgDecl>,
}

impl ModelSpec {
    pub fn empty() -> Self {
        ModelSpec {
            chart_dim: None,
            fields: Vec::new(),
            points: Vec::new(),
            strata: Vec::new(),
            base_strata: Vec::new(),
            liealg: None,
        }
    }

    pub fn stratum(&self, name: &str) -> Option<&StratumDecl> {
        self.strata.iter().find(|s| s.name == name)
    }

    pub fn base_stratum(&self, name: &str) -> Option<&BaseStratumDecl> {
        self.base_strata.iter().find(|s| s.name == name)
    }

    pub fn point(&self, name: &str) -> Option<&PointLit> {
        self.points.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

// ---------------------------------------------------------------------------
// expression scanning and parsing

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn scan_expr(text: &str, line: usize, col0: usize, byte0: usize) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let span = |i: usize, len: usize| SourceSpan {
            line,
            column: col0 + i,
            byte: byte0 + i,
            len,
        };
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '+' => {
                out.push(Token {
                    tok: Tok::Plus,
                    span: span(i, 1),
                });
                i += 1;
            }
            '-' => {
                out.push(Token {
                    tok: Tok::Minus,
                    span: span(i, 1),
                });
                i += 1;
            }
            '*' => {
                out.push(Token {
                    tok: Tok::Star,
                    span: span(i, 1),
                });
                i += 1;
            }
            '^' => {
                out.push(Token {
                    tok: Tok::Caret,
                    span: span(i, 1),
                });
                i += 1;
            }
            '/' => {
                out.push(Token {
                    tok: Tok::Slash,
                    span: span(i, 1),
                });
                i += 1;
            }
            '(' => {
                out.push(Token {
                    tok: Tok::LParen,
                    span: span(i, 1),
                });
                i += 1;
            }
            ')' => {
                out.push(Token {
                    tok: Tok::RParen,
                    span: span(i, 1),
                });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    return Err(Diagnostic {
                        span: span(start, i - start + 1),
                        message: "floating literals are not accepted; write a/b".into(),
                    });
                }
                out.push(Token {
                    tok: Tok::Int(text[start..i].to_string()),
                    span: span(start, i - start),
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    span: span(start, i - start),
                });
            }
            _ => {
                return Err(Diagnostic {
                    span: span(i, 1),
                    message: format!("unexpected character '{c}'"),
                });
            }
        }
    }
    Ok(out)
}

/// Resolves a variable name to an index in the active variable set.
struct VarSet<'a> {
    num_vars: usize,
    resolve: Box<dyn Fn(&str) -> VarLookup + 'a>,
}

enum VarLookup {
    Found(usize),
    OutOfRange(String),
    Unknown,
}

/// Variables x1..xn plus d1..dn (field expressions); d_i maps to n + i - 1.
fn field_vars(n: usize) -> VarSet<'static> {
    VarSet {
        num_vars: 2 * n,
        resolve: Box::new(move |name| indexed_var(name, &[('x', 0, n), ('d', n, n)])),
    }
}

/// Variables x1..xn, p1..pn (equations on the cotangent chart).
fn cotangent_vars(n: usize) -> VarSet<'static> {
    VarSet {
        num_vars: 2 * n,
        resolve: Box::new(move |name| indexed_var(name, &[('x', 0, n), ('p', n, n)])),
    }
}

/// Variables u1..ud (chart-domain expressions).
fn domain_vars(d: usize) -> VarSet<'static> {
    VarSet {
        num_vars: d,
        resolve: Box::new(move |name| indexed_var(name, &[('u', 0, d)])),
    }
}

fn indexed_var(name: &str, groups: &[(char, usize, usize)]) -> VarLookup {
    let mut chars = name.chars();
    let head = chars.next().unwrap_or(' ');
    let rest: String = chars.collect();
    for &(prefix, base, count) in groups {
        if head == prefix {
            if let Ok(i) = rest.parse::<usize>() {
                if i >= 1 && i <= count {
                    return VarLookup::Found(base + i - 1);
                }
                return VarLookup::OutOfRange(format!(
                    "{name} is out of range for this chart (valid: {prefix}1..{prefix}{count})"
                ));
            }
        }
    }
    VarLookup::Unknown
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    vars: &'a VarSet<'a>,
    end_span: SourceSpan,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or(self.end_span)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_expr(&mut self) -> Result<MultiPoly, Diagnostic> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                -&self.parse_term()?
            }
            _ => self.parse_term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.parse_term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.parse_term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<MultiPoly, Diagnostic> {
        let mut acc = self.parse_factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            acc = &acc * &self.parse_factor()?;
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<MultiPoly, Diagnostic> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let span = self.span();
            match self.bump().map(|t| t.tok.clone()) {
                Some(Tok::Int(s)) => {
                    let e: u32 = s.parse().map_err(|_| Diagnostic {
                        span,
                        message: "exponent too large".into(),
                    })?;
                    return Ok(base.pow(e));
                }
                _ => {
                    return Err(Diagnostic {
                        span,
                        message: "expected integer exponent after '^'".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<MultiPoly, Diagnostic> {
        let span = self.span();
        match self.bump().map(|t| t.tok.clone()) {
            Some(Tok::Int(num)) => {
                // rational literal: int or int/int
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.bump();
                    let dspan = self.span();
                    match self.bump().map(|t| t.tok.clone()) {
                        Some(Tok::Int(den)) => {
                            let d: num::BigInt = den.parse().unwrap();
                            if d.is_zero() {
                                return Err(Diagnostic {
                                    span: dspan,
                                    message: "zero denominator".into(),
                                });
                            }
                            Ok(MultiPoly::constant(
                                self.vars.num_vars,
                                Rat::new(num.parse().unwrap(), d),
                            ))
                        }
                        _ => Err(Diagnostic {
                            span: dspan,
                            message: "expected integer denominator".into(),
                        }),
                    }
                } else {
                    Ok(MultiPoly::constant(
                        self.vars.num_vars,
                        Rat::from_integer(num.parse().unwrap()),
                    ))
                }
            }
            Some(Tok::Ident(name)) => match (self.vars.resolve)(&name) {
                VarLookup::Found(i) => Ok(MultiPoly::var(self.vars.num_vars, i)),
                VarLookup::OutOfRange(msg) => Err(Diagnostic { span, message: msg }),
                VarLookup::Unknown => Err(Diagnostic {
                    span,
                    message: format!("unknown variable '{name}'"),
                }),
            },
            Some(Tok::Minus) => Ok(-&self.parse_factor()?),
            Some(Tok::LParen) => {
                let e = self.parse_expr()?;
                let span = self.span();
                match self.bump().map(|t| t.tok.clone()) {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(Diagnostic {
                        span,
                        message: "expected ')'".into(),
                    }),
                }
            }
            _ => Err(Diagnostic {
                span,
                message: "expected a term".into(),
            }),
        }
    }
}

fn parse_polynomial(
    text: &str,
    vars: &VarSet,
    line: usize,
    col0: usize,
    byte0: usize,
) -> Result<MultiPoly, Diagnostic> {
    let toks = scan_expr(text, line, col0, byte0)?;
    let end_span = SourceSpan {
        line,
        column: col0 + text.len(),
        byte: byte0 + text.len(),
        len: 0,
    };
    let mut p = ExprParser {
        toks: &toks,
        pos: 0,
        vars,
        end_span,
    };
    let poly = p.parse_expr()?;
    if p.pos != toks.len() {
        return Err(Diagnostic {
            span: p.span(),
            message: "trailing input after expression".into(),
        });
    }
    Ok(poly)
}

fn parse_rat_token(word: &str, span: SourceSpan) -> Result<Rat, Diagnostic> {
    let (neg, body) = match word.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, word),
    };
    let parts: Vec<&str> = body.split('/').collect();
    let bad = || Diagnostic {
        span,
        message: format!("expected rational literal, got '{word}'"),
    };
    let r = match parts.as_slice() {
        [n] => Rat::from_integer(n.parse().map_err(|_| bad())?),
        [n, d] => {
            let den: num::BigInt = d.parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Diagnostic {
                    span,
                    message: "zero denominator".into(),
                });
            }
            Rat::new(n.parse().map_err(|_| bad())?, den)
        }
        _ => return Err(bad()),
    };
    Ok(if neg { -r } else { r })
}

// ---------------------------------------------------------------------------
// line-oriented model parsing

struct Line<'a> {
    num: usize,
    byte: usize,
    text: &'a str,
}

fn word_span(line: &Line, start_col: usize, word: &str) -> SourceSpan {
    SourceSpan {
        line: line.num,
        column: start_col,
        byte: line.byte + start_col,
        len: word.len(),
    }
}

/// Split a line into whitespace-separated words with their column offsets.
fn words<'a>(line: &Line<'a>) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let mut col = 0;
    for part in line.text.split_inclusive(char::is_whitespace) {
        let w = part.trim_end_matches(char::is_whitespace);
        if !w.is_empty() {
            out.push((col, w));
        }
        col += part.len();
    }
    out
}

pub fn parse_model(text: &str) -> Result<ModelSpec, Diagnostic> {
    let mut spec = ModelSpec::empty();
    let mut lines = Vec::new();
    let mut byte = 0;
    for (i, raw) in text.split('\n').enumerate() {
        lines.push(Line {
            num: i + 1,
            byte,
            text: raw,
        });
        byte += raw.len() + 1;
    }

    let mut idx = 0;
    while idx < lines.len() {
        let line = &lines[idx];
        let content = match line.text.find('#') {
            Some(h) => &line.text[..h],
            None => line.text,
        };
        let ws = words(&Line {
            num: line.num,
            byte: line.byte,
            text: content,
        });
        if ws.is_empty() {
            idx += 1;
            continue;
        }
        let (kw_col, kw) = ws[0];
        match kw {
            "chart" => {
                let (c, w) = ws.get(1).copied().ok_or_else(|| Diagnostic {
                    span: word_span(line, kw_col, kw),
                    message: "chart needs a dimension".into(),
                })?;
                let n: usize = w.parse().map_err(|_| Diagnostic {
                    span: word_span(line, c, w),
                    message: "chart dimension must be a positive integer".into(),
                })?;
                if n == 0 {
                    return Err(Diagnostic {
                        span: word_span(line, c, w),
                        message: "chart dimension must be positive".into(),
                    });
                }
                spec.chart_dim = Some(n);
                idx += 1;
            }
            "field" => {
                let n = spec.chart_dim.ok_or_else(|| Diagnostic {
                    span: word_span(line, kw_col, kw),
                    message: "field before chart declaration".into(),
                })?;
                let (name, expr_col) = field_header(line, &ws)?;
                if spec.fields.iter().any(|(f, _)| *f == name) {
                    return Err(Diagnostic {
                        span: word_span(line, ws[1].0, ws[1].1),
                        message: format!("duplicate field name '{name}'"),
                    });
                }
                let expr_text = &content[expr_col..];
                let vars = field_vars(n);
                let poly =
                    parse_polynomial(expr_text, &vars, line.num, expr_col, line.byte + expr_col)?;
                let vf = decompose_field(&poly, n).map_err(|msg| Diagnostic {
                    span: SourceSpan {
                        line: line.num,
                        column: expr_col,
                        byte: line.byte + expr_col,
                        len: expr_text.trim_end().len(),
                    },
                    message: msg,
                })?;
                spec.fields.push((name, vf));
                idx += 1;
            }
            "point" => {
                let n = spec.chart_dim.ok_or_else(|| Diagnostic {
                    span: word_span(line, kw_col, kw),
                    message: "point before chart declaration".into(),
                })?;
                let (name, rest_col) = field_header(line, &ws)?;
                if spec.points.iter().any(|(p, _)| *p == name) {
                    return Err(Diagnostic {
                        span: word_span(line, ws[1].0, ws[1].1),
                        message: format!("duplicate point name '{name}'"),
                    });
                }
                let rest = &content[rest_col..];
                let parts: Vec<&str> = rest.split(';').collect();
                let read_coords = |s: &str, off: usize| -> Result<Vec<Rat>, Diagnostic> {
                    let sub = Line {
                        num: line.num,
                        byte: line.byte,
                        text: s,
                    };
                    words(&sub)
                        .into_iter()
                        .map(|(c, w)| parse_rat_token(w, word_span(line, off + c, w)))
                        .collect()
                };
                let x = read_coords(parts[0], rest_col)?;
                if x.len() != n {
                    return Err(Diagnostic {
                        span: word_span(line, rest_col, rest.trim_end()),
                        message: format!("expected {n} base coordinates, got {}", x.len()),
                    });
                }
                let lit = if parts.len() > 1 {
                    let p = read_coords(parts[1], rest_col + parts[0].len() + 1)?;
                    if p.len() != n {
                        return Err(Diagnostic {
                            span: word_span(line, rest_col, rest.trim_end()),
                            message: format!("expected {n} covector coordinates, got {}", p.len()),
                        });
                    }
                    PointLit::Cotangent(x, p)
                } else {
                    PointLit::Base(x)
                };
                spec.points.push((name, lit));
                idx += 1;
            }
            "stratum" | "basestratum" => {
                let n = spec.chart_dim.ok_or_else(|| Diagnostic {
                    span: word_span(line, kw_col, kw),
                    message: "stratum before chart declaration".into(),
                })?;
                let (name, d) = stratum_header(line, &ws)?;
                let dup = if kw == "stratum" {
                    spec.strata.iter().any(|s| s.name == name)
                } else {
                    spec.base_strata.iter().any(|s| s.name == name)
                };
                if dup {
                    return Err(Diagnostic {
                        span: word_span(line, ws[1].0, ws[1].1),
                        message: format!("duplicate stratum name '{name}'"),
                    });
                }
                let target = if kw == "stratum" { 2 * n } else { n };
                let (phi, eqs, samples, next) =
                    parse_stratum_body(&lines, idx + 1, n, d, target, kw == "stratum")?;
                if kw == "stratum" {
                    spec.strata.push(StratumDecl {
                        name,
                        domain_dim: d,
                        phi,
                        eqs,
                        samples,
                    });
                } else {
                    spec.base_strata.push(BaseStratumDecl {
                        name,
                        domain_dim: d,
                        psi: phi,
                        samples,
                    });
                }
                idx = next;
            }
            "liealg" => {
                if spec.liealg.is_some() {
                    return Err(Diagnostic {
                        span: word_span(line, kw_col, kw),
                        message: "duplicate liealg section".into(),
                    });
                }
                let (c, w) = ws.get(1).copied().ok_or_else(|| Diagnostic {
                    span: word_span(line, kw_col, kw),
                    message: "liealg needs a dimension".into(),
                })?;
                let dim: usize = w.parse().map_err(|_| Diagnostic {
                    span: word_span(line, c, w),
                    message: "liealg dimension must be a positive integer".into(),
                })?;
                let (decl, next) = parse_liealg_body(&lines, idx + 1, dim)?;
                spec.liealg = Some(decl);
                idx = next;
            }
            _ => {
                return Err(Diagnostic {
                    span: word_span(line, kw_col, kw),
                    message: format!("unknown directive '{kw}'"),
                });
            }
        }
    }
    Ok(spec)
}

/// Parse `<kw> <name> = ...`, returning the name and the column where the
/// right-hand side starts.
fn field_header(line: &Line, ws: &[(usize, &str)]) -> Result<(String, usize), Diagnostic> {
    let (ncol, name) = ws.get(1).copied().ok_or_else(|| Diagnostic {
        span: word_span(line, ws[0].0, ws[0].1),
        message: "expected a name".into(),
    })?;
    let (ecol, eq) = ws.get(2).copied().ok_or_else(|| Diagnostic {
        span: word_span(line, ncol, name),
        message: "expected '='".into(),
    })?;
    if eq != "=" {
        return Err(Diagnostic {
            span: word_span(line, ecol, eq),
            message: "expected '='".into(),
        });
    }
    Ok((name.to_string(), ecol + 1))
}

fn stratum_header(line: &Line, ws: &[(usize, &str)]) -> Result<(String, usize), Diagnostic> {
    let (_, name) = ws.get(1).copied().ok_or_else(|| Diagnostic {
        span: word_span(line, ws[0].0, ws[0].1),
        message: "expected a stratum name".into(),
    })?;
    let ok = ws.len() == 4 && ws[2].1 == "dim";
    let d: Option<usize> = if ok { ws[3].1.parse().ok() } else { None };
    match d {
        Some(d) if d > 0 => Ok((name.to_string(), d)),
        _ => Err(Diagnostic {
            span: word_span(line, ws[0].0, ws[0].1),
            message: "expected 'stratum <name> dim <d>'".into(),
        }),
    }
}

type StratumBody = (Vec<MultiPoly>, Vec<MultiPoly>, Vec<Vec<Rat>>, usize);

fn parse_stratum_body(
    lines: &[Line],
    mut idx: usize,
    n: usize,
    d: usize,
    target_dim: usize,
    cotangent: bool,
) -> Result<StratumBody, Diagnostic> {
    let mut phi = vec![MultiPoly::zero(d); target_dim];
    let mut seen = vec![false; target_dim];
    let mut eqs = Vec::new();
    let mut samples = Vec::new();
    let dvars = domain_vars(d);
    while idx < lines.len() {
        let line = &lines[idx];
        let content = match line.text.find('#') {
            Some(h) => &line.text[..h],
            None => line.text,
        };
        let ws = words(&Line {
            num: line.num,
            byte: line.byte,
            text: content,
        });
        if ws.is_empty() {
            idx += 1;
            continue;
        }
        match ws[0].1 {
            "end" => return Ok((phi, eqs, samples, idx + 1)),
            "map" => {
                let (coord_name, expr_col) = field_header(line, &ws)?;
                let groups: &[(char, usize, usize)] = if cotangent {
                    &[('x', 0, n), ('p', n, n)]
                } else {
                    &[('x', 0, n)]
                };
                let target = match indexed_var(&coord_name, groups) {
                    VarLookup::Found(i) => i,
                    VarLookup::OutOfRange(m) => {
                        return Err(Diagnostic {
                            span: word_span(line, ws[1].0, ws[1].1),
                            message: m,
                        })
                    }
                    VarLookup::Unknown => {
                        return Err(Diagnostic {
                            span: word_span(line, ws[1].0, ws[1].1),
                            message: format!("unknown coordinate '{coord_name}'"),
                        })
                    }
                };
                if seen[target] {
                    return Err(Diagnostic {
                        span: word_span(line, ws[1].0, ws[1].1),
                        message: format!("duplicate map for '{coord_name}'"),
                    });
                }
                seen[target] = true;
                phi[target] = parse_polynomial(
                    &content[expr_col..],
                    &dvars,
                    line.num,
                    expr_col,
                    line.byte + expr_col,
                )?;
                idx += 1;
            }
            "eq" if cotangent => {
                let start = ws[0].0 + ws[0].1.len();
                let vars = cotangent_vars(n);
                eqs.push(parse_polynomial(
                    &content[start..],
                    &vars,
                    line.num,
                    start,
                    line.byte + start,
                )?);
                idx += 1;
            }
            "sample" => {
                let coords: Result<Vec<Rat>, Diagnostic> = ws[1..]
                    .iter()
                    .map(|&(c, w)| parse_rat_token(w, word_span(line, c, w)))
                    .collect();
                let coords = coords?;
                if coords.len() != d {
                    return Err(Diagnostic {
                        span: word_span(line, ws[0].0, ws[0].1),
                        message: format!("sample needs {d} coordinates, got {}", coords.len()),
                    });
                }
                samples.push(coords);
                idx += 1;
            }
            other => {
                return Err(Diagnostic {
                    span: word_span(line, ws[0].0, ws[0].1),
                    message: format!("unknown stratum directive '{other}'"),
                });
            }
        }
    }
    Err(Diagnostic {
        span: SourceSpan {
            line: lines.len(),
            column: 0,
            byte: lines.last().map(|l| l.byte).unwrap_or(0),
            len: 0,
        },
        message: "unterminated stratum block (missing 'end')".into(),
    })
}

fn parse_liealg_body(
    lines: &[Line],
    mut idx: usize,
    dim: usize,
) -> Result<(LieAlgDecl, usize), Diagnostic> {
    let mut constants = BTreeMap::new();
    let mut v_rows: Vec<Vec<Rat>> = Vec::new();
    while idx < lines.len() {
        let line = &lines[idx];
        let content = match line.text.find('#') {
            Some(h) => &line.text[..h],
            None => line.text,
        };
        let ws = words(&Line {
            num: line.num,
            byte: line.byte,
            text: content,
        });
        if ws.is_empty() {
            idx += 1;
            continue;
        }
        match ws[0].1 {
            "end" => {
                let v = LinearSubspace::from_rows(dim, v_rows);
                return Ok((LieAlgDecl { dim, constants, v }, idx + 1));
            }
            "c" => {
                // c i j k = a/b
                if ws.len() != 6 || ws[4].1 != "=" {
                    return Err(Diagnostic {
                        span: word_span(line, ws[0].0, ws[0].1),
                        message: "expected 'c i j k = a/b'".into(),
                    });
                }
                let read_idx = |pos: usize| -> Result<usize, Diagnostic> {
                    let (c, w) = ws[pos];
                    let i: usize = w.parse().map_err(|_| Diagnostic {
                        span: word_span(line, c, w),
                        message: "expected a basis index".into(),
                    })?;
                    if i < 1 || i > dim {
                        return Err(Diagnostic {
                            span: word_span(line, c, w),
                            message: format!("basis index {i} out of range 1..{dim}"),
                        });
                    }
                    Ok(i)
                };
                let i = read_idx(1)?;
                let j = read_idx(2)?;
                let k = read_idx(3)?;
                if i == j {
                    return Err(Diagnostic {
                        span: word_span(line, ws[1].0, ws[1].1),
                        message: "structure constant with i = j is identically zero".into(),
                    });
                }
                let val = parse_rat_token(ws[5].1, word_span(line, ws[5].0, ws[5].1))?;
                let (key, val) = if i < j {
                    ((i, j, k), val)
                } else {
                    ((j, i, k), -val)
                };
                if constants.contains_key(&key) {
                    return Err(Diagnostic {
                        span: word_span(line, ws[1].0, ws[1].1),
                        message: format!("duplicate structure constant for ({i},{j},{k})"),
                    });
                }
                if !val.is_zero() {
                    constants.insert(key, val);
                }
                idx += 1;
            }
            "v" => {
                for &(c, w) in &ws[1..] {
                    let i: usize = w.parse().map_err(|_| Diagnostic {
                        span: word_span(line, c, w),
                        message: "expected a basis index".into(),
                    })?;
                    if i < 1 || i > dim {
                        return Err(Diagnostic {
                            span: word_span(line, c, w),
                            message: format!("basis index {i} out of range 1..{dim}"),
                        });
                    }
                    let mut row = vec![Rat::zero(); dim];
                    row[i - 1] = Rat::one();
                    v_rows.push(row);
                }
                idx += 1;
            }
            "vspan" => {
                let coords: Result<Vec<Rat>, Diagnostic> = ws[1..]
                    .iter()
                    .map(|&(c, w)| parse_rat_token(w, word_span(line, c, w)))
                    .collect();
                let coords = coords?;
                if coords.len() != dim {
                    return Err(Diagnostic {
                        span: word_span(line, ws[0].0, ws[0].1),
                        message: format!("vspan needs {dim} coordinates, got {}", coords.len()),
                    });
                }
                v_rows.push(coords);
                idx += 1;
            }
            other => {
                return Err(Diagnostic {
                    span: word_span(line, ws[0].0, ws[0].1),
                    message: format!("unknown liealg directive '{other}'"),
                });
            }
        }
    }
    Err(Diagnostic {
        span: SourceSpan {
            line: lines.len(),
            column: 0,
            byte: lines.last().map(|l| l.byte).unwrap_or(0),
            len: 0,
        },
        message: "unterminated liealg block (missing 'end')".into(),
    })
}

/// Split a polynomial in (x1..xn, d1..dn) into vector-field components;
/// every term must be linear and homogeneous in the d-symbols.
fn decompose_field(poly: &MultiPoly, n: usize) -> Result<VectorField, String> {
    let mut comps: Vec<Vec<(Vec<u32>, Rat)>> = vec![Vec::new(); n];
    for (exps, coeff) in poly.terms() {
        let mut d_slot = None;
        for (i, &e) in exps[n..].iter().enumerate() {
            if e == 0 {
                continue;
            }
            if e > 1 || d_slot.is_some() {
                return Err("vector field expression must be linear in d-symbols".into());
            }
            d_slot = Some(i);
        }
        let Some(i) = d_slot else {
            return Err("every term of a vector field needs exactly one d-symbol".into());
        };
        comps[i].push((exps[..n].to_vec(), coeff.clone()));
    }
    Ok(VectorField::new(
        comps
            .into_iter()
            .map(|terms| MultiPoly::from_terms(n, terms))
            .collect(),
    ))
}

// ---------------------------------------------------------------------------
// canonical printing

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn field_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("d{i}")));
    names
}

fn domain_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("u{i}")).collect()
}

/// Render a vector field as an expression in x- and d-symbols.
pub fn render_vector_field(vf: &VectorField) -> String {
    let n = vf.chart_dim();
    let mut poly = MultiPoly::zero(2 * n);
    for (i, comp) in vf.components().iter().enumerate() {
        let d = MultiPoly::var(2 * n, n + i);
        poly = &poly + &(&comp.extend_vars(2 * n) * &d);
    }
    poly.render(&field_names(n))
}

/// Canonical text form; parsing it back yields a structurally equal model.
pub fn format_model(spec: &ModelSpec) -> String {
    let mut out = String::new();
    if let Some(n) = spec.chart_dim {
        out.push_str(&format!("chart {n}\n"));
        for (name, vf) in &spec.fields {
            out.push_str(&format!("field {name} = {}\n", render_vector_field(vf)));
        }
        for (name, lit) in &spec.points {
            match lit {
                PointLit::Base(x) => {
                    let xs: Vec<String> = x.iter().map(fmt_rat).collect();
                    out.push_str(&format!("point {name} = {}\n", xs.join(" ")));
                }
                PointLit::Cotangent(x, p) => {
                    let xs: Vec<String> = x.iter().map(fmt_rat).collect();
                    let ps: Vec<String> = p.iter().map(fmt_rat).collect();
                    out.push_str(&format!(
                        "point {name} = {} ; {}\n",
                        xs.join(" "),
                        ps.join(" ")
                    ));
                }
            }
        }
        let cnames = cotangent_names(n);
        for s in &spec.strata {
            out.push_str(&format!("stratum {} dim {}\n", s.name, s.domain_dim));
            let dnames = domain_names(s.domain_dim);
            for (i, comp) in s.phi.iter().enumerate() {
                if comp.is_zero() {
                    continue;
                }
                out.push_str(&format!("map {} = {}\n", cnames[i], comp.render(&dnames)));
            }
            for eq in &s.eqs {
                out.push_str(&format!("eq {}\n", eq.render(&cnames)));
            }
            for sample in &s.samples {
                let cs: Vec<String> = sample.iter().map(fmt_rat).collect();
                out.push_str(&format!("sample {}\n", cs.join(" ")));
            }
            out.push_str("end\n");
        }
        for s in &spec.base_strata {
            out.push_str(&format!("basestratum {} dim {}\n", s.name, s.domain_dim));
            let dnames = domain_names(s.domain_dim);
            for (i, comp) in s.psi.iter().enumerate() {
                if comp.is_zero() {
                    continue;
                }
                out.push_str(&format!("map x{} = {}\n", i + 1, comp.render(&dnames)));
            }
            for sample in &s.samples {
                let cs: Vec<String> = sample.iter().map(fmt_rat).collect();
                out.push_str(&format!("sample {}\n", cs.join(" ")));
            }
            out.push_str("end\n");
        }
    }
    if let Some(alg) = &spec.liealg {
        out.push_str(&format!("liealg {}\n", alg.dim));
        for (&(i, j, k), val) in &alg.constants {
            out.push_str(&format!("c {i} {j} {k} = {}\n", fmt_rat(val)));
        }
        for row in alg.v.basis_rows() {
            let cs: Vec<String> = row.iter().map(fmt_rat).collect();
            out.push_str(&format!("vspan {}\n", cs.join(" ")));
        }
        out.push_str("end\n");
    }
    out
}
