//! Plain-text file formats.
//!
//! * Transition matrix: a line holding `M`, then `M` lines of `M`
//!   whitespace-separated decimals.
//! * Edge list: header `M <m> <directed|undirected>`, then one `i j` pair per
//!   line, 1-indexed.
//! * Observations: CSV with `M` rows and `N` columns, no header. The optional
//!   truth sidecar holds one 1-indexed state per line.
//!
//! Writers print floats with 17 significant digits so values survive a round
//! trip exactly.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graphs::Graph;

/// 17 significant digits, scientific notation, `.` as decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("not a number: {tok:?}")))
}

fn content_lines(reader: impl BufRead) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
}

pub fn read_matrix(reader: impl BufRead) -> Result<Vec<Vec<f64>>> {
    let mut lines = content_lines(reader);
    let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let header = header?;
    let m: usize = header
        .trim()
        .parse()
        .map_err(|_| Error::parse(ln, format!("expected state count, got {:?}", header.trim())))?;
    if m == 0 {
        return Err(Error::parse(ln, "state count must be positive"));
    }
    let mut rows = Vec::with_capacity(m);
    for (ln, line) in lines {
        let line = line?;
        if rows.len() == m {
            return Err(Error::parse(ln, "more rows than declared"));
        }
        let row = line
            .split_whitespace()
            .map(|t| parse_f64(t, ln))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != m {
            return Err(Error::parse(ln, format!("expected {m} entries, got {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != m {
        return Err(Error::parse(0, format!("expected {m} rows, got {}", rows.len())));
    }
    Ok(rows)
}

pub fn write_matrix(mut w: impl Write, p: &[Vec<f64>]) -> Result<()> {
    writeln!(w, "{}", p.len())?;
    for row in p {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_edge_list(reader: impl BufRead) -> Result<Graph> {
    let mut lines = content_lines(reader);
    let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty edge list"))?;
    let header = header?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (m, directed) = match toks.as_slice() {
        ["M", m, kind] => {
            let m: usize = m
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad node count {m:?}")))?;
            let directed = match *kind {
                "directed" => true,
                "undirected" => false,
                other => return Err(Error::parse(ln, format!("unknown graph kind {other:?}"))),
            };
            (m, directed)
        }
        _ => return Err(Error::parse(ln, "expected header `M <m> <directed|undirected>`")),
    };
    let mut g = Graph::new(m, directed);
    for (ln, line) in lines {
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = toks.as_slice() else {
            return Err(Error::parse(ln, "expected `i j`"));
        };
        let idx = |s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad node index {s:?}")))?;
            if v == 0 || v > m {
                return Err(Error::parse(ln, format!("node {v} out of range 1..={m}")));
            }
            Ok(v - 1)
        };
        g.add_edge(idx(a)?, idx(b)?)?;
    }
    Ok(g)
}

/// Undirected graphs list each edge once (`i ≤ j`).
pub fn write_edge_list(mut w: impl Write, g: &Graph) -> Result<()> {
    let kind = if g.is_directed() { "directed" } else { "undirected" };
    writeln!(w, "M {} {kind}", g.num_nodes())?;
    for (i, j) in g.edges() {
        if g.is_directed() || i <= j {
            writeln!(w, "{} {}", i + 1, j + 1)?;
        }
    }
    Ok(())
}

/// Writes a header line and rows of numbers.
pub fn write_csv(mut w: impl Write, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads a headerless numeric CSV into rows.
pub fn read_numeric_csv(reader: impl BufRead) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (ln, line) in content_lines(reader) {
        let line = line?;
        let row = line
            .split(',')
            .map(|t| parse_f64(t.trim(), ln))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// One 1-indexed state per line, returned 0-indexed.
pub fn read_states(reader: impl BufRead) -> Result<Vec<usize>> {
    content_lines(reader)
        .map(|(ln, line)| {
            let line = line?;
            let v: usize = line
                .trim()
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad state {:?}", line.trim())))?;
            v.checked_sub(1)
                .ok_or_else(|| Error::parse(ln, "states are 1-indexed"))
        })
        .collect()
}

pub fn write_states(mut w: impl Write, states: &[usize]) -> Result<()> {
    for s in states {
        writeln!(w, "{}", s + 1)?;
    }
    Ok(())
}
