//! Text formats for matrices and vector lists.
//!
//! Matrix: first line `n kind` with kind one of `general`, `symmetric`,
//! `skew`; then `n` lines of `n` whitespace-separated entries. Vector list:
//! first line `n d`; then `n` lines of `d` entries. An entry is a decimal
//! literal or an exact `p/q`. Any `p/q` puts the whole input in exact mode,
//! in which decimals are converted exactly (`0.1` is `1/10`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gram::GramFactor;
use crate::matrix::{Kind, SquareMatrix};
use crate::scalar::{parse_rational, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            _ => Err(Error::invalid(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyMatrix {
    Exact(SquareMatrix<Rational>),
    Float(SquareMatrix<f64>),
}

impl AnyMatrix {
    pub fn n(&self) -> usize {
        match self {
            AnyMatrix::Exact(m) => m.n(),
            AnyMatrix::Float(m) => m.n(),
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            AnyMatrix::Exact(m) => m.kind(),
            AnyMatrix::Float(m) => m.kind(),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            AnyMatrix::Exact(_) => Mode::Exact,
            AnyMatrix::Float(_) => Mode::Float,
        }
    }

    pub fn to_f64(&self) -> SquareMatrix<f64> {
        match self {
            AnyMatrix::Exact(m) => m.to_f64(),
            AnyMatrix::Float(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyVectors {
    Exact(GramFactor<Rational>),
    Float(GramFactor<f64>),
}

impl AnyVectors {
    pub fn to_f64(&self) -> GramFactor<f64> {
        match self {
            AnyVectors::Exact(g) => g.to_f64(),
            AnyVectors::Float(g) => g.clone(),
        }
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn tokens(line_no: usize, line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line
        .char_indices()
        .chain(std::iter::once((line.len(), ' ')))
    {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    line: line_no,
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

/// Header tokens plus `rows` lines of exactly `width` entries each.
/// Blank lines are skipped.
fn read_body<'a>(
    text: &'a str,
    header_len: usize,
    shape: impl Fn(&[Token<'a>]) -> Result<(usize, usize)>,
) -> Result<(Vec<Token<'a>>, usize, usize, Vec<Token<'a>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((hl, header)) = lines.next() else {
        return Err(parse_error(1, 1, "empty input"));
    };
    let head = tokens(hl, header);
    if head.len() != header_len {
        return Err(parse_error(
            hl,
            1,
            format!("header needs {header_len} fields"),
        ));
    }
    let (rows, width) = shape(&head)?;
    let mut entries = Vec::with_capacity(rows * width);
    let mut last_line = hl;
    for _ in 0..rows {
        let Some((ln, l)) = lines.next() else {
            return Err(parse_error(
                last_line + 1,
                1,
                format!("expected {rows} rows"),
            ));
        };
        let row = tokens(ln, l);
        if row.len() != width {
            let col = row.get(width).map_or(l.chars().count() + 1, |t| t.column);
            return Err(parse_error(
                ln,
                col,
                format!("expected {width} entries, found {}", row.len()),
            ));
        }
        entries.extend(row);
        last_line = ln;
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_error(ln, 1, "unexpected trailing line"));
    }
    Ok((head, rows, width, entries))
}

fn parse_usize(t: &Token<'_>) -> Result<usize> {
    t.text.parse().map_err(|_| {
        parse_error(
            t.line,
            t.column,
            format!("expected a size, found {:?}", t.text),
        )
    })
}

/// Converts entries in the selected (or inferred) mode.
fn convert(entries: &[Token<'_>], mode: Option<Mode>) -> Result<Result<Vec<Rational>, Vec<f64>>> {
    let mode = mode.unwrap_or(if entries.iter().any(|t| t.text.contains('/')) {
        Mode::Exact
    } else {
        Mode::Float
    });
    let bad = |t: &Token<'_>| parse_error(t.line, t.column, format!("bad number {:?}", t.text));
    match mode {
        Mode::Exact => entries
            .iter()
            .map(|t| parse_rational(t.text).ok_or_else(|| bad(t)))
            .collect::<Result<Vec<_>>>()
            .map(Ok),
        Mode::Float => entries
            .iter()
            .map(|t| {
                if t.text.contains('/') {
                    parse_rational(t.text)
                        .map(|r| r.to_f64())
                        .ok_or_else(|| bad(t))
                } else {
                    t.text
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| bad(t))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Err),
    }
}

/// Parses the matrix format. `mode = None` infers the mode from the entries.
pub fn parse_matrix(text: &str, mode: Option<Mode>) -> Result<AnyMatrix> {
    let (head, n, _, entries) = read_body(text, 2, |h| {
        let n = parse_usize(&h[0])?;
        Ok((n, n))
    })?;
    let kind: Kind = head[1].text.parse().map_err(|_| {
        parse_error(
            head[1].line,
            head[1].column,
            format!("unknown kind {:?}", head[1].text),
        )
    })?;
    let locate = |e: Error| match e {
        Error::KindViolation { expected, row, col } => {
            let t = &entries[row * n + col];
            parse_error(t.line, t.column, format!("matrix is not {expected}"))
        }
        e => e,
    };
    Ok(match convert(&entries, mode)? {
        Ok(q) => AnyMatrix::Exact(SquareMatrix::new(n, q, kind).map_err(locate)?),
        Err(f) => AnyMatrix::Float(SquareMatrix::new(n, f, kind).map_err(locate)?),
    })
}

/// Parses the vector-list format.
pub fn parse_vectors(text: &str, mode: Option<Mode>) -> Result<AnyVectors> {
    let (_, n, d, entries) =
        read_body(text, 2, |h| Ok((parse_usize(&h[0])?, parse_usize(&h[1])?)))?;
    fn chunk<T: Clone>(v: Vec<T>, d: usize, n: usize) -> Vec<Vec<T>> {
        if d == 0 {
            return vec![Vec::new(); n];
        }
        v.chunks(d).map(<[T]>::to_vec).collect()
    }
    Ok(match convert(&entries, mode)? {
        Ok(q) => AnyVectors::Exact(GramFactor::new(d, chunk(q, d, n))?),
        Err(f) => AnyVectors::Float(GramFactor::new(d, chunk(f, d, n))?),
    })
}

/// Writes a vector list in the text format.
pub fn format_vectors<T: Scalar>(g: &GramFactor<T>) -> String {
    let mut s = format!("{} {}\n", g.len(), g.dim());
    for v in g.vectors() {
        let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
