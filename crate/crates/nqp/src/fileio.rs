//! Line-oriented instance file format.
//!
//! ```text
//! NQP 1
//! DOMAIN int            # or: real
//! PSD declared          # or: unknown
//! N 2
//! S 3 : 0 1 2           # count, colon, ascending values
//! Q
//! 2 -1
//! -1 2
//! C
//! 0 0
//! ```
//!
//! `#` begins a comment anywhere on a line; blank lines are ignored. Integer
//! instances round-trip bit-exactly; real instances use the shortest decimal
//! representation that reparses to the same value.

use crate::error::{Error, Result};
use crate::instance::{Domain, QpInstance, Scalar};
use crate::level_set::LevelSet;
use crate::reduction::ReductionCertificate;
use std::fmt::Write as _;

/// A parsed instance of either coefficient domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Int(QpInstance<i128>),
    Real(QpInstance<f64>),
}

impl Instance {
    pub fn domain(&self) -> Domain {
        match self {
            Instance::Int(_) => Domain::Int,
            Instance::Real(_) => Domain::Real,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Instance::Int(inst) => inst.n(),
            Instance::Real(inst) => inst.n(),
        }
    }

    pub fn levels(&self) -> &LevelSet {
        match self {
            Instance::Int(inst) => inst.levels(),
            Instance::Real(inst) => inst.levels(),
        }
    }

    pub fn validate(&self) -> crate::instance::ValidationReport {
        match self {
            Instance::Int(inst) => inst.validate(),
            Instance::Real(inst) => inst.validate(),
        }
    }
}

struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
        }
    }

    /// Next line with comments stripped and content present; 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.lines.by_ref() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if !content.is_empty() {
                return Some((idx + 1, content));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_content().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse the canonical text format into an instance, reporting the offending
/// line on failure. Symmetry of `Q` and strict ordering of `S` are enforced
/// here so a file that parses is structurally sound.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut cursor = Cursor::new(text);

    let (line, magic) = cursor.expect("'NQP 1'")?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["NQP", "1"] {
        return Err(parse_err(line, "expected format header 'NQP 1'"));
    }

    let (line, domain_line) = cursor.expect("'DOMAIN int' or 'DOMAIN real'")?;
    let domain = match domain_line.split_whitespace().collect::<Vec<_>>()[..] {
        ["DOMAIN", "int"] => Domain::Int,
        ["DOMAIN", "real"] => Domain::Real,
        _ => return Err(parse_err(line, "expected 'DOMAIN int' or 'DOMAIN real'")),
    };

    let (line, psd_line) = cursor.expect("'PSD declared' or 'PSD unknown'")?;
    let psd_declared = match psd_line.split_whitespace().collect::<Vec<_>>()[..] {
        ["PSD", "declared"] => true,
        ["PSD", "unknown"] => false,
        _ => return Err(parse_err(line, "expected 'PSD declared' or 'PSD unknown'")),
    };

    let (line, n_line) = cursor.expect("'N <dimension>'")?;
    let n: usize = match n_line.split_whitespace().collect::<Vec<_>>()[..] {
        ["N", value] => value
            .parse()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| parse_err(line, "N must be a positive integer"))?,
        _ => return Err(parse_err(line, "expected 'N <dimension>'")),
    };

    let (line, s_line) = cursor.expect("'S <count> : <values>'")?;
    let levels = parse_level_line(line, s_line)?;

    match domain {
        Domain::Int => Ok(Instance::Int(parse_body::<i128>(
            &mut cursor,
            n,
            levels,
            psd_declared,
        )?)),
        Domain::Real => Ok(Instance::Real(parse_body::<f64>(
            &mut cursor,
            n,
            levels,
            psd_declared,
        )?)),
    }
}

fn parse_level_line(line: usize, content: &str) -> Result<LevelSet> {
    let tokens: Vec<&str> = content.split_whitespace().collect();
    if tokens.len() < 3 || tokens[0] != "S" || tokens[2] != ":" {
        return Err(parse_err(line, "expected 'S <count> : <values>'"));
    }
    let count: usize = tokens[1]
        .parse()
        .map_err(|_| parse_err(line, "level count must be an integer"))?;
    let values: Vec<i64> = tokens[3..]
        .iter()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(line, format!("level value '{t}' is not an integer")))
        })
        .collect::<Result<_>>()?;
    if values.len() != count {
        return Err(parse_err(
            line,
            format!("declared {count} levels but listed {}", values.len()),
        ));
    }
    if count < 2 {
        return Err(parse_err(line, "level set needs at least 2 values"));
    }
    let set = LevelSet::new_unchecked(values);
    if set.first_order_violation().is_some() {
        return Err(parse_err(line, "level values must be strictly increasing"));
    }
    Ok(set)
}

fn parse_row<T: Scalar>(line: usize, content: &str, expected: usize) -> Result<Vec<T>> {
    let entries: Vec<T> = content
        .split_whitespace()
        .map(|t| {
            T::parse(t).ok_or_else(|| {
                parse_err(
                    line,
                    format!("entry '{t}' is not a finite {} value", T::domain()),
                )
            })
        })
        .collect::<Result<_>>()?;
    if entries.len() != expected {
        return Err(parse_err(
            line,
            format!("expected {expected} entries, found {}", entries.len()),
        ));
    }
    Ok(entries)
}

fn parse_body<T: Scalar>(
    cursor: &mut Cursor<'_>,
    n: usize,
    levels: LevelSet,
    psd_declared: bool,
) -> Result<QpInstance<T>> {
    let (line, q_marker) = cursor.expect("'Q'")?;
    if q_marker != "Q" {
        return Err(parse_err(line, "expected 'Q'"));
    }
    let mut q = Vec::with_capacity(n * n);
    let mut row_lines = Vec::with_capacity(n);
    for row in 0..n {
        let (line, content) = cursor.expect(&format!("row {} of Q", row + 1))?;
        row_lines.push(line);
        q.extend(parse_row::<T>(line, content, n)?);
    }

    let (line, c_marker) = cursor.expect("'C'")?;
    if c_marker != "C" {
        return Err(parse_err(line, "expected 'C'"));
    }
    let (line, c_content) = cursor.expect("the row of C")?;
    let c = parse_row::<T>(line, c_content, n)?;

    if let Some((line, content)) = cursor.next_content() {
        return Err(parse_err(
            line,
            format!("unexpected trailing content '{content}'"),
        ));
    }

    for i in 0..n {
        for j in (i + 1)..n {
            if q[i * n + j] != q[j * n + i] {
                return Err(parse_err(
                    row_lines[j],
                    format!("Q is asymmetric at ({i}, {j})"),
                ));
            }
        }
    }

    QpInstance::new(n, q, c, levels, psd_declared)
}

/// Emit the canonical format, deterministically. Certificate quantities, when
/// given, are appended as `#` comment lines and ignored on re-parse.
pub fn serialize_instance<T: Scalar>(
    inst: &QpInstance<T>,
    certificate: Option<&ReductionCertificate>,
) -> String {
    let mut out = String::new();
    let n = inst.n();
    writeln!(out, "NQP 1").unwrap();
    writeln!(out, "DOMAIN {}", T::domain()).unwrap();
    writeln!(
        out,
        "PSD {}",
        if inst.psd_declared() {
            "declared"
        } else {
            "unknown"
        }
    )
    .unwrap();
    writeln!(out, "N {n}").unwrap();
    write!(out, "S {} :", inst.levels().len()).unwrap();
    for v in inst.levels().values() {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
    writeln!(out, "Q").unwrap();
    for i in 0..n {
        let row = inst.q_row(i);
        for (j, value) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{value}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "C").unwrap();
    for (j, value) in inst.c().iter().enumerate() {
        if j > 0 {
            out.push(' ');
        }
        write!(out, "{value}").unwrap();
    }
    out.push('\n');

    if let Some(cert) = certificate {
        for line in cert.to_string().lines() {
            writeln!(out, "# {line}").unwrap();
        }
    }
    out
}
