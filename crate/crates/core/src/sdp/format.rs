//! Plain-text problem format in the spirit of SDPA sparse files.
//!
//! ```text
//! *sense: max
//! 2            number of constraints
//! 1            number of blocks
//! 3            block sizes
//! 1.0 0.0      right-hand sides
//! 0 1 1 2 0.5  constraint block row col value (constraint 0 is C)
//! ```
//!
//! Blocks, rows and columns are 1-based; only `row <= col` is written.
//! Lines starting with `*` or `"` are comments, except the sense directive.
//! Values are written in shortest round-trip form, so reading back a
//! written problem reproduces it exactly.

use std::fmt::Write as _;

use super::problem::{SdpProblem, Sense, SparseBlockMatrix};
use crate::error::{Error, Result};

pub fn write_problem(p: &SdpProblem) -> String {
    let mut out = String::new();
    let sense = match p.sense {
        Sense::Min => "min",
        Sense::Max => "max",
    };
    let _ = writeln!(out, "*sense: {sense}");
    let _ = writeln!(out, "{}", p.num_constraints());
    let _ = writeln!(out, "{}", p.block_sizes.len());
    let sizes: Vec<String> = p.block_sizes.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.rhs.iter().map(|b| format!("{b:?}")).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    let mats = std::iter::once(&p.objective).chain(&p.constraints);
    for (k, m) in mats.enumerate() {
        for (b, r, c, v) in m.entries() {
            let _ = writeln!(out, "{k} {} {} {} {v:?}", b + 1, r + 1, c + 1);
        }
    }
    out
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

pub fn read_problem(text: &str) -> Result<SdpProblem> {
    let mut sense = Sense::Min;
    let mut tokens: Vec<(usize, String)> = Vec::new();
    let mut header_lines: Vec<(usize, Vec<String>)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("*sense:") {
            sense = match rest.trim() {
                "min" => Sense::Min,
                "max" => Sense::Max,
                other => return Err(parse_err(ln, format!("unknown sense '{other}'"))),
            };
            continue;
        }
        if line.is_empty() || line.starts_with('*') || line.starts_with('"') {
            continue;
        }
        // Strip separators that SDPA files commonly carry.
        let cleaned: String = line
            .chars()
            .map(|c| {
                if matches!(c, ',' | '{' | '}' | '(' | ')') {
                    ' '
                } else {
                    c
                }
            })
            .collect();
        let words: Vec<String> = cleaned.split_whitespace().map(str::to_string).collect();
        if header_lines.len() < 4 {
            header_lines.push((ln, words));
        } else {
            tokens.extend(words.into_iter().map(|w| (ln, w)));
        }
    }
    if header_lines.len() < 3 {
        return Err(Error::Parse("truncated header".into()));
    }
    let first = |i: usize| -> Result<(usize, usize)> {
        let (ln, w) = &header_lines[i];
        let v = w
            .first()
            .ok_or_else(|| parse_err(*ln, "empty line"))?
            .parse::<usize>()
            .map_err(|e| parse_err(*ln, e))?;
        Ok((*ln, v))
    };
    let (_, m) = first(0)?;
    let (_, nblocks) = first(1)?;
    let (ln, size_words) = &header_lines[2];
    let block_sizes: Vec<usize> = size_words
        .iter()
        .map(|w| {
            w.parse::<i64>()
                .map_err(|e| parse_err(*ln, e))
                .map(|v| v.unsigned_abs() as usize)
        })
        .collect::<Result<_>>()?;
    if block_sizes.len() != nblocks {
        return Err(parse_err(*ln, format!("expected {nblocks} block sizes")));
    }
    let rhs: Vec<f64> = if m == 0 {
        if header_lines.len() == 4 {
            let (ln, w) = header_lines.pop().unwrap();
            tokens.splice(0..0, w.into_iter().map(|t| (ln, t)));
        }
        Vec::new()
    } else {
        let (ln, w) = header_lines
            .get(3)
            .ok_or_else(|| Error::Parse("missing right-hand sides".into()))?;
        if w.len() != m {
            return Err(parse_err(*ln, format!("expected {m} right-hand sides")));
        }
        w.iter()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(*ln, e)))
            .collect::<Result<_>>()?
    };

    let mut p = SdpProblem::new(block_sizes, sense);
    let mut mats = vec![SparseBlockMatrix::new(); m];
    if !tokens.len().is_multiple_of(5) {
        return Err(Error::Parse("entry lines must have five fields".into()));
    }
    for chunk in tokens.chunks(5) {
        let ln = chunk[0].0;
        let idx = |i: usize| -> Result<usize> {
            chunk[i].1.parse::<usize>().map_err(|e| parse_err(ln, e))
        };
        let k = idx(0)?;
        let (b, r, c) = (idx(1)?, idx(2)?, idx(3)?);
        let v: f64 = chunk[4].1.parse().map_err(|e| parse_err(ln, e))?;
        if b == 0 || r == 0 || c == 0 || b > p.block_sizes.len() {
            return Err(parse_err(
                ln,
                "indices are 1-based and must name an existing block",
            ));
        }
        if r.max(c) > p.block_sizes[b - 1] {
            return Err(parse_err(ln, "row/col outside block"));
        }
        if k > m {
            return Err(parse_err(ln, format!("constraint index {k} exceeds {m}")));
        }
        let target = if k == 0 {
            &mut p.objective
        } else {
            &mut mats[k - 1]
        };
        target.add(b - 1, r - 1, c - 1, v);
    }
    for (a, b) in mats.into_iter().zip(rhs) {
        p.add_constraint(a, b);
    }
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut p = SdpProblem::new(vec![2, 1], Sense::Max);
        p.objective.add(0, 0, 1, 0.1);
        p.objective.add(1, 0, 0, -1.0 / 3.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        a.add(1, 0, 0, std::f64::consts::PI);
        p.add_constraint(a, 2.0 / 7.0);
        let text = write_problem(&p);
        assert_eq!(read_problem(&text).unwrap(), p);
    }

    #[test]
    fn comments_and_lower_triangle_entries() {
        let text = "\"example\n* comment\n1\n1\n2\n1.5\n0 1 1 1 1.0\n0 1 2 2 1.0\n1 1 2 1 0.5\n";
        let p = read_problem(text).unwrap();
        assert_eq!(p.sense, Sense::Min);
        assert_eq!(p.constraints[0].get(0, 0, 1), 0.5);
        assert_eq!(p.rhs, vec![1.5]);
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(read_problem("1\n1\n2\n1.0\n1 1 3 1 1.0\n").is_err());
        assert!(read_problem("1\n1\n2\n1.0\n2 1 1 1 1.0\n").is_err());
        assert!(read_problem("1\n1\n2\n").is_err());
    }
}
