//! Line-oriented text format for channel descriptions.
//!
//! A document holds one channel with its costs and constraint levels:
//!
//! ```text
//! # comments start with '#', blank lines are ignored
//! name: two-user adder        (optional)
//! sizes: [2, 2, 2, 4]         (|X1|, |X2|, |S|, |Y|)
//! W:
//! 1 0 0 0                     (one probability row per line, in
//! 0 1 0 0                      (x1, x2, s) row-major order, |Y| numbers each)
//! ...
//! g1: [0, 1]
//! g2: [0, 1]
//! l: [0, 1]
//! gamma1: 1
//! gamma2: 1
//! lambda: 0.5
//! ```
//!
//! `sizes` must precede `W`. Numbers are serialized with Rust's shortest
//! round-trip formatting, and rows already summing to 1 within
//! [`crate::RENORM_TOL`] are not renormalized on load, so
//! `parse(serialize(doc))` reproduces the tensor bit for bit.

use crate::{ChannelSpec, ConstraintSpec, CoreError, CostModel};
use std::fmt::Write as _;
use thiserror::Error;

/// A channel together with its costs and constraint levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDocument {
    pub spec: ChannelSpec,
    pub costs: CostModel,
    pub constraints: ConstraintSpec,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number the problem was detected on.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected `key: value`")]
    MissingColon,
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("`sizes` must appear before `W`")]
    SizesBeforeTensor,
    #[error("`sizes` needs exactly four entries, got {0}")]
    WrongSizesLen(usize),
    #[error("cannot parse `{0}` as an integer")]
    BadInteger(String),
    #[error("cannot parse `{0}` as a finite number")]
    BadNumber(String),
    #[error("expected a `[...]` list, got `{0}`")]
    BadList(String),
    #[error("row has {got} entries, expected {expected}")]
    WrongRowLength { expected: usize, got: usize },
    #[error("tensor ends after {got} of {expected} rows")]
    MissingRows { expected: usize, got: usize },
    #[error("list `{which}` has {got} entries, expected {expected}")]
    WrongListLen {
        which: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    Channel(CoreError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses a document. Errors carry the 1-based line they were detected on.
pub fn parse(input: &str) -> Result<ChannelDocument, ParseError> {
    let mut name: Option<String> = None;
    let mut sizes: Option<([usize; 4], usize)> = None;
    let mut w_rows: Option<(Vec<f64>, Vec<usize>, usize)> = None;
    let mut lists: [Option<(Vec<f64>, usize)>; 3] = [None, None, None];
    let mut scalars: [Option<(f64, usize)>; 3] = [None, None, None];

    let mut lines = input.lines().enumerate().peekable();
    while let Some((idx, raw)) = lines.next() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| err(lineno, ParseErrorKind::MissingColon))?;
        let key = key.trim();
        let rest = rest.trim();
        match key {
            "name" => {
                if name.replace(rest.to_string()).is_some() {
                    return Err(err(lineno, ParseErrorKind::DuplicateKey("name".into())));
                }
            }
            "sizes" => {
                if sizes.is_some() {
                    return Err(err(lineno, ParseErrorKind::DuplicateKey("sizes".into())));
                }
                let parts = split_list(rest, lineno)?;
                if parts.len() != 4 {
                    return Err(err(lineno, ParseErrorKind::WrongSizesLen(parts.len())));
                }
                let mut out = [0usize; 4];
                for (slot, p) in out.iter_mut().zip(&parts) {
                    *slot = p
                        .parse()
                        .map_err(|_| err(lineno, ParseErrorKind::BadInteger(p.to_string())))?;
                }
                sizes = Some((out, lineno));
            }
            "W" => {
                if w_rows.is_some() {
                    return Err(err(lineno, ParseErrorKind::DuplicateKey("W".into())));
                }
                let ([n1, n2, ns, ny], _) =
                    sizes.ok_or_else(|| err(lineno, ParseErrorKind::SizesBeforeTensor))?;
                let rows_expected = n1 * n2 * ns;
                let mut flat = Vec::with_capacity(rows_expected * ny);
                let mut row_lines = Vec::with_capacity(rows_expected);
                while row_lines.len() < rows_expected {
                    let Some(&(ridx, rraw)) = lines.peek() else {
                        return Err(err(
                            lineno,
                            ParseErrorKind::MissingRows {
                                expected: rows_expected,
                                got: row_lines.len(),
                            },
                        ));
                    };
                    let rline = rraw.trim();
                    lines.next();
                    if rline.is_empty() || rline.starts_with('#') {
                        continue;
                    }
                    let rlineno = ridx + 1;
                    let mut count = 0;
                    for tok in rline.split_whitespace() {
                        flat.push(parse_number(tok, rlineno)?);
                        count += 1;
                    }
                    if count != ny {
                        return Err(err(
                            rlineno,
                            ParseErrorKind::WrongRowLength {
                                expected: ny,
                                got: count,
                            },
                        ));
                    }
                    row_lines.push(rlineno);
                }
                w_rows = Some((flat, row_lines, lineno));
            }
            "g1" | "g2" | "l" => {
                let slot = match key {
                    "g1" => 0,
                    "g2" => 1,
                    _ => 2,
                };
                if lists[slot].is_some() {
                    return Err(err(lineno, ParseErrorKind::DuplicateKey(key.into())));
                }
                let parts = split_list(rest, lineno)?;
                let mut v = Vec::with_capacity(parts.len());
                for p in &parts {
                    v.push(parse_number(p, lineno)?);
                }
                lists[slot] = Some((v, lineno));
            }
            "gamma1" | "gamma2" | "lambda" => {
                let slot = match key {
                    "gamma1" => 0,
                    "gamma2" => 1,
                    _ => 2,
                };
                if scalars[slot].is_some() {
                    return Err(err(lineno, ParseErrorKind::DuplicateKey(key.into())));
                }
                scalars[slot] = Some((parse_number(rest, lineno)?, lineno));
            }
            other => {
                return Err(err(lineno, ParseErrorKind::UnknownKey(other.to_string())));
            }
        }
    }

    let last = input.lines().count().max(1);
    let ([n1, n2, ns, ny], sizes_line) =
        sizes.ok_or_else(|| err(last, ParseErrorKind::MissingKey("sizes")))?;
    let (flat, row_lines, _) =
        w_rows.ok_or_else(|| err(last, ParseErrorKind::MissingKey("W")))?;
    let [g1, g2, l] = {
        let names: [&'static str; 3] = ["g1", "g2", "l"];
        let mut out: [Vec<f64>; 3] = Default::default();
        for (slot, name) in names.iter().enumerate() {
            let (v, line) = lists[slot]
                .take()
                .ok_or_else(|| err(last, ParseErrorKind::MissingKey(name)))?;
            let expected = [n1, n2, ns][slot];
            if v.len() != expected {
                return Err(err(
                    line,
                    ParseErrorKind::WrongListLen {
                        which: name,
                        expected,
                        got: v.len(),
                    },
                ));
            }
            out[slot] = v;
        }
        out
    };
    let scalar_names: [&'static str; 3] = ["gamma1", "gamma2", "lambda"];
    let mut levels = [0.0; 3];
    for (slot, name) in scalar_names.iter().enumerate() {
        levels[slot] = scalars[slot]
            .ok_or_else(|| err(last, ParseErrorKind::MissingKey(name)))?
            .0;
    }

    let spec = ChannelSpec::new(n1, n2, ns, ny, flat, name).map_err(|e| match &e {
        CoreError::BadRow { x1, x2, s, .. } => {
            let row = (x1 * n2 + x2) * ns + s;
            err(row_lines[row], ParseErrorKind::Channel(e.clone()))
        }
        _ => err(sizes_line, ParseErrorKind::Channel(e)),
    })?;

    Ok(ChannelDocument {
        spec,
        costs: CostModel::new(g1, g2, l),
        constraints: ConstraintSpec::new(levels[0], levels[1], levels[2]),
    })
}

fn split_list(rest: &str, lineno: usize) -> Result<Vec<String>, ParseError> {
    let inner = rest
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| err(lineno, ParseErrorKind::BadList(rest.to_string())))?;
    Ok(inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect())
}

fn parse_number(tok: &str, lineno: usize) -> Result<f64, ParseError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| err(lineno, ParseErrorKind::BadNumber(tok.to_string())))?;
    if !v.is_finite() {
        return Err(err(lineno, ParseErrorKind::BadNumber(tok.to_string())));
    }
    Ok(v)
}

/// Renders a document in canonical key order.
pub fn serialize(doc: &ChannelDocument) -> String {
    let mut out = String::new();
    if let Some(name) = &doc.spec.name {
        writeln!(out, "name: {name}").unwrap();
    }
    let (n1, n2, ns, ny) = doc.spec.sizes();
    writeln!(out, "sizes: [{n1}, {n2}, {ns}, {ny}]").unwrap();
    writeln!(out, "W:").unwrap();
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            for s in 0..ns {
                let row = doc.spec.row(x1, x2, s);
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                writeln!(out, "{}", cells.join(" ")).unwrap();
            }
        }
    }
    write_list(&mut out, "g1", &doc.costs.g1);
    write_list(&mut out, "g2", &doc.costs.g2);
    write_list(&mut out, "l", &doc.costs.l);
    writeln!(out, "gamma1: {}", doc.constraints.gamma1).unwrap();
    writeln!(out, "gamma2: {}", doc.constraints.gamma2).unwrap();
    writeln!(out, "lambda: {}", doc.constraints.lambda).unwrap();
    out
}

fn write_list(out: &mut String, key: &str, v: &[f64]) {
    let cells: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    writeln!(out, "{key}: [{}]", cells.join(", ")).unwrap();
}
