//! Line-oriented text formats.
//!
//! Digraphs:
//!
//! ```text
//! digraph 2
//! 0 0
//! 0 1   # comment
//! 1 1
//! ```
//!
//! Algebras, tables in lexicographic argument order, values split across
//! lines freely:
//!
//! ```text
//! algebra 2
//! op meet 2
//! 0 0
//! 0 1
//! ```
//!
//! Vertex labels are not part of the digraph format; serialization drops them.

use std::fmt::Write as _;

use crate::algebra::{FiniteAlgebra, Operation};
use crate::error::sat_pow;
use crate::{Digraph, Error, Result};

/// Largest vertex count accepted in a digraph header.
pub const MAX_PARSED_VERTICES: usize = 1 << 15;

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn number(line: usize, token: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, found `{token}`")))
}

fn header(
    lines: &mut impl Iterator<Item = (usize, Vec<String>)>,
    keyword: &str,
) -> Result<usize> {
    let Some((line, tokens)) = lines.next() else {
        return Err(Error::parse(1, format!("missing `{keyword} <n>` header")));
    };
    match tokens.as_slice() {
        [k, n] if k == keyword => number(line, n),
        _ => Err(Error::parse(line, format!("expected `{keyword} <n>`"))),
    }
}

fn owned(text: &str) -> impl Iterator<Item = (usize, Vec<String>)> + '_ {
    content_lines(text).map(|(l, t)| (l, t.into_iter().map(String::from).collect()))
}

pub fn parse_digraph(text: &str) -> Result<Digraph> {
    let mut lines = owned(text);
    let n = header(&mut lines, "digraph")?;
    if n > MAX_PARSED_VERTICES {
        return Err(Error::parse(
            1,
            format!("{n} vertices exceeds the limit of {MAX_PARSED_VERTICES}"),
        ));
    }
    let mut d = Digraph::empty(n);
    for (line, tokens) in lines {
        let [u, v] = tokens.as_slice() else {
            return Err(Error::parse(line, "expected `u v`"));
        };
        let (u, v) = (number(line, u)?, number(line, v)?);
        if u >= n || v >= n {
            return Err(Error::parse(
                line,
                format!("edge ({u},{v}) has a vertex outside 0..{n}"),
            ));
        }
        d.set_edge(u, v);
    }
    Ok(d)
}

pub fn serialize_digraph(d: &Digraph) -> String {
    let mut out = format!("digraph {}\n", d.len());
    for (u, v) in d.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_algebra(text: &str) -> Result<FiniteAlgebra> {
    let mut lines = owned(text).peekable();
    let n = header(&mut lines, "algebra")?;
    let mut ops: Vec<Operation> = Vec::new();
    let mut op_lines: Vec<usize> = Vec::new();
    while let Some((line, tokens)) = lines.next() {
        let [kw, symbol, arity] = tokens.as_slice() else {
            return Err(Error::parse(line, "expected `op <symbol> <arity>`"));
        };
        if kw != "op" {
            return Err(Error::parse(line, "expected `op <symbol> <arity>`"));
        }
        if ops.iter().any(|o| &o.symbol == symbol) {
            return Err(Error::parse(line, format!("duplicate symbol `{symbol}`")));
        }
        let arity = number(line, arity)?;
        let expected = sat_pow(n, arity);
        let mut table = Vec::new();
        while let Some((vline, values)) = lines.next_if(|(_, t)| t[0] != "op") {
            for v in &values {
                let v = number(vline, v)?;
                if v >= n {
                    return Err(Error::parse(vline, format!("value {v} outside 0..{n}")));
                }
                if table.len() as u128 >= expected {
                    return Err(Error::parse(
                        vline,
                        format!("operation `{symbol}` has more than {expected} entries"),
                    ));
                }
                table.push(v);
            }
        }
        if table.len() as u128 != expected {
            return Err(Error::parse(
                line,
                format!(
                    "operation `{symbol}` needs {expected} entries, got {}",
                    table.len()
                ),
            ));
        }
        ops.push(Operation {
            symbol: symbol.clone(),
            arity,
            table,
        });
        op_lines.push(line);
    }
    FiniteAlgebra::new(n, ops).map_err(|e| Error::parse(op_lines.first().copied().unwrap_or(1), e.to_string()))
}

/// One table row per line: each row varies the last argument.
pub fn serialize_algebra(alg: &FiniteAlgebra) -> String {
    let n = alg.size();
    let mut out = format!("algebra {n}\n");
    for op in alg.ops() {
        let _ = writeln!(out, "op {} {}", op.symbol, op.arity);
        let width = if op.arity == 0 { 1 } else { n.max(1) };
        for row in op.table.chunks(width) {
            let row: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_chain2() {
        let d = parse_digraph("digraph 2\n0 0\n1 1\n0 1\n").unwrap();
        assert_eq!(d, Digraph::from_edges(2, &[(0, 0), (1, 1), (0, 1)]).unwrap());
        assert_eq!(serialize_digraph(&d), "digraph 2\n0 0\n0 1\n1 1\n");
    }

    #[test]
    fn comments_and_blanks() {
        let d = parse_digraph("# header next\n\ndigraph 3 # three\n\n2 0  # edge\n").unwrap();
        assert_eq!(d.edges().collect::<Vec<_>>(), vec![(2, 0)]);
    }

    #[test]
    fn digraph_errors_carry_lines() {
        let err = |t: &str| match parse_digraph(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(err("digraph 2\n0 5\n"), 2);
        assert_eq!(err("graph 2\n"), 1);
        assert_eq!(err(""), 1);
        assert_eq!(err("digraph 2\n0 0\n\nx 1\n"), 4);
        assert_eq!(err("digraph 2\n0 0 1\n"), 2);
        assert_eq!(err("digraph -1\n"), 1);
        assert_eq!(err("digraph 99999999\n"), 1);
    }

    #[test]
    fn algebra_round_trip() {
        let text = "algebra 2\nop meet 2\n0 0\n0 1\nop c 0\n1\nop neg 1\n1 0\n";
        let alg = parse_algebra(text).unwrap();
        assert_eq!(alg.ops().len(), 3);
        assert_eq!(alg.apply(0, &[1, 1]), 1);
        assert_eq!(alg.apply(1, &[]), 1);
        assert_eq!(serialize_algebra(&alg), text);
        assert_eq!(parse_algebra(&serialize_algebra(&alg)).unwrap(), alg);
        // values may be split any way
        let alt = parse_algebra("algebra 2\nop meet 2 # x\n0\n0 0 1\nop c 0 1\n").err();
        assert!(alt.is_some());
    }

    #[test]
    fn algebra_errors() {
        let line = |t: &str| match parse_algebra(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("algebra 2\nop f 1\n0\n"), 2);
        assert_eq!(line("algebra 2\nop f 1\n0 2\n"), 3);
        assert_eq!(line("algebra 2\nop f 1\n0 1\nop f 1\n1 0\n"), 4);
        assert_eq!(line("algebra 2\nop f 1\n0 1 1\n"), 3);
        assert_eq!(line("algebra 2\nfoo\n"), 2);
        assert_eq!(line("alg 2\n"), 1);
    }
}
