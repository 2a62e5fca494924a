//! Table, fiber, matrix and graph file formats.
//!
//! Tables are JSON objects `{"n": 3, "r": 2, "rows": [[...], ...]}` or CSV
//! with one table row per line. Fibers stream as JSON lines or CSV with a
//! vertex id column. Graphs export as an edge list (`u v` per line, 0-based
//! canonical ids) with a JSON sidecar listing every vertex's table, or as
//! DOT for graphs of at most [`DOT_VERTEX_LIMIT`] vertices.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use fibergraph_core::enumerate::{Fiber, GeneralFiber};
use fibergraph_core::graph::{FiberGraph, OrientedFiberGraph};
use fibergraph_core::ContingencyTable;
use serde::Deserialize;
use serde_json::Value;

use crate::{CliError, Result};

pub const DOT_VERTEX_LIMIT: usize = 500;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableJson {
    n: usize,
    r: u32,
    rows: Vec<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    rows: Vec<Vec<i64>>,
}

fn parse_error(source_name: &str, message: impl Into<String>) -> CliError {
    CliError::Parse { source_name: source_name.to_owned(), message: message.into() }
}

fn json_error(source_name: &str, e: &serde_json::Error) -> CliError {
    parse_error(source_name, format!("line {}, column {}: {e}", e.line(), e.column()))
}

/// Parses a table object; `n` and `r` must agree with the rows.
pub fn parse_table_json(text: &str, source_name: &str) -> Result<ContingencyTable> {
    let t: TableJson = serde_json::from_str(text).map_err(|e| json_error(source_name, &e))?;
    ContingencyTable::validate(t.n, t.r, &t.rows).map_err(|e| parse_error(source_name, e.to_string()))
}

/// Parses comma-separated rows; blank lines are ignored, `n` and `r` are
/// inferred from the shape and the first row sum.
pub fn parse_table_csv(text: &str, source_name: &str) -> Result<ContingencyTable> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(k, field)| {
                field.trim().parse::<i64>().map_err(|e| {
                    parse_error(source_name, format!("line {}, field {}: `{}`: {e}", lineno + 1, k + 1, field.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    ContingencyTable::infer(&rows).map_err(|e| parse_error(source_name, e.to_string()))
}

/// Reads a table, choosing the parser by extension (`.json`, `.csv`) and
/// otherwise by whether the content starts with `{`.
pub fn read_table(path: &Path) -> Result<ContingencyTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let name = path.display().to_string();
    let json = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => true,
        Some(ext) if ext.eq_ignore_ascii_case("csv") => false,
        _ => text.trim_start().starts_with('{'),
    };
    if json {
        parse_table_json(&text, &name)
    } else {
        parse_table_csv(&text, &name)
    }
}

pub fn table_json(t: &ContingencyTable) -> Value {
    serde_json::json!({ "n": t.n(), "r": t.r(), "rows": t.to_rows() })
}

/// Constraint matrix `{"rows": [[...], ...]}` for general fibers.
pub fn parse_matrix_json(text: &str, source_name: &str) -> Result<Vec<Vec<i64>>> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| json_error(source_name, &e))?;
    let width = m.rows.first().map_or(0, Vec::len);
    if width == 0 {
        return Err(parse_error(source_name, "matrix has no columns"));
    }
    if let Some(k) = m.rows.iter().position(|row| row.len() != width) {
        return Err(parse_error(source_name, format!("row {} has {} entries, expected {width}", k + 1, m.rows[k].len())));
    }
    Ok(m.rows)
}

/// Comma-separated integers, e.g. a right-hand side `0,0,1`.
pub fn parse_int_list(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .enumerate()
        .map(|(k, f)| {
            f.trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("entry {} of `{text}`: {e}", k + 1)))
        })
        .collect()
}

/// 1-based `[[i, j], ...]` positions, given inline or as a file path.
pub fn parse_positions(arg: &str, n: usize) -> Result<Vec<(usize, usize)>> {
    let (text, name) = if arg.trim_start().starts_with('[') {
        (arg.to_owned(), "--constraints".to_owned())
    } else {
        (fs::read_to_string(arg).map_err(|e| CliError::io(arg, e))?, arg.to_owned())
    };
    let pairs: Vec<(i64, i64)> = serde_json::from_str(&text).map_err(|e| json_error(&name, &e))?;
    pairs
        .into_iter()
        .enumerate()
        .map(|(k, (i, j))| {
            let ok = |x: i64| x >= 1 && x <= n as i64;
            if ok(i) && ok(j) {
                Ok((i as usize - 1, j as usize - 1))
            } else {
                Err(parse_error(&name, format!("position {}: ({i}, {j}) is outside a {n}x{n} table", k + 1)))
            }
        })
        .collect()
}

/// One table object per line, in canonical order.
pub fn write_fiber_jsonl(fiber: &Fiber, w: &mut dyn Write) -> io::Result<()> {
    for t in fiber.tables() {
        serde_json::to_writer(&mut *w, &table_json(&t))?;
        writeln!(w)?;
    }
    Ok(())
}

/// Header `id,e11,e12,...` then one row-major line per table.
pub fn write_fiber_csv(fiber: &Fiber, w: &mut dyn Write) -> io::Result<()> {
    let n = fiber.n();
    let header: Vec<String> = (1..=n).flat_map(|i| (1..=n).map(move |j| format!("e{i}{j}"))).collect();
    writeln!(w, "id,{}", header.join(","))?;
    for id in 0..fiber.len() {
        let cells: Vec<String> = fiber.entries(id).iter().map(u32::to_string).collect();
        writeln!(w, "{id},{}", cells.join(","))?;
    }
    Ok(())
}

/// One solution vector per line as a JSON array.
pub fn write_general_fiber_jsonl(fiber: &GeneralFiber, w: &mut dyn Write) -> io::Result<()> {
    for p in &fiber.points {
        serde_json::to_writer(&mut *w, p)?;
        writeln!(w)?;
    }
    Ok(())
}

/// `u v` per edge with `u < v`, sorted. Edges carrying more than one move
/// get a third column with the multiplicity.
pub fn write_edge_list(fg: &FiberGraph, w: &mut dyn Write) -> io::Result<()> {
    for u in 0..fg.vertex_count() {
        for e in fg.edges_of(u).iter().filter(|e| e.target > u) {
            if e.multiplicity > 1 {
                writeln!(w, "{u} {} {}", e.target, e.multiplicity)?;
            } else {
                writeln!(w, "{u} {}", e.target)?;
            }
        }
    }
    Ok(())
}

/// `from to` per arc, each pointing toward the lower weight.
pub fn write_arc_list(og: &OrientedFiberGraph, w: &mut dyn Write) -> io::Result<()> {
    for (u, v) in og.arcs() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

/// `{"n", "r", "vertices": [{"id", "rows"}, ...]}` for an edge list.
pub fn vertex_sidecar(fg: &FiberGraph) -> Value {
    let fiber = fg.fiber();
    let vertices: Vec<Value> = (0..fiber.len())
        .map(|id| serde_json::json!({ "id": id, "rows": fiber.table(id).to_rows() }))
        .collect();
    serde_json::json!({ "n": fiber.n(), "r": fiber.r(), "vertices": vertices })
}

fn dot_guard(vertices: usize) -> Result<()> {
    if vertices > DOT_VERTEX_LIMIT {
        return Err(CliError::ResourceGuard(format!(
            "DOT export is limited to {DOT_VERTEX_LIMIT} vertices, graph has {vertices}; use the edge-list format"
        )));
    }
    Ok(())
}

fn dot_nodes(fg: &FiberGraph, w: &mut dyn Write) -> io::Result<()> {
    for v in 0..fg.vertex_count() {
        writeln!(w, "  {v} [label=\"{}\"];", fg.table(v))?;
    }
    Ok(())
}

/// Undirected DOT with each node labelled by its table.
pub fn write_dot(fg: &FiberGraph, w: &mut dyn Write) -> Result<()> {
    dot_guard(fg.vertex_count())?;
    let fiber = fg.fiber();
    let mut body = || -> io::Result<()> {
        writeln!(w, "graph \"G({},{})\" {{", fiber.n(), fiber.r())?;
        dot_nodes(fg, w)?;
        for (u, v) in fg.graph().edges() {
            writeln!(w, "  {u} -- {v};")?;
        }
        writeln!(w, "}}")
    };
    body().map_err(|e| CliError::io("<output>", e))
}

/// Directed DOT of the weight orientation.
pub fn write_oriented_dot(og: &OrientedFiberGraph, w: &mut dyn Write) -> Result<()> {
    let fg = og.base();
    dot_guard(fg.vertex_count())?;
    let fiber = fg.fiber();
    let mut body = || -> io::Result<()> {
        writeln!(w, "digraph \"G({},{})\" {{", fiber.n(), fiber.r())?;
        dot_nodes(fg, w)?;
        for (u, v) in og.arcs() {
            writeln!(w, "  {u} -> {v};")?;
        }
        writeln!(w, "}}")
    };
    body().map_err(|e| CliError::io("<output>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fibergraph_core::enumerate::enumerate_fiber;
    use fibergraph_core::graph::build_graph;

    fn render(f: impl FnOnce(&mut Vec<u8>)) -> String {
        let mut buf = Vec::new();
        f(&mut buf);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn table_json_round_trip() {
        let t = parse_table_json(r#"{"n": 2, "r": 2, "rows": [[1, 1], [1, 1]]}"#, "t").unwrap();
        assert_eq!(t, ContingencyTable::uniform(2, 2).unwrap());
        let again = parse_table_json(&table_json(&t).to_string(), "t").unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn json_errors_are_positional() {
        let err = parse_table_json("{\"n\": 2,\n \"r\": }", "t.json").unwrap_err().to_string();
        assert!(err.starts_with("t.json: line 2, column"), "{err}");
        let err = parse_table_json(r#"{"n": 2, "r": 2, "rows": [[1, 1], [2, 0]]}"#, "t.json").unwrap_err().to_string();
        assert!(err.contains("column 1 sums to 3"), "{err}");
        let err = parse_table_json(r#"{"n": 2, "r": 3, "rows": [[1, 1], [1, 1]]}"#, "t.json").unwrap_err().to_string();
        assert!(err.contains("row 1 sums to 2, expected 3"), "{err}");
    }

    #[test]
    fn csv_tables() {
        let t = parse_table_csv("2, 0, 0\n0,1,1\n0,1,1\n\n", "t.csv").unwrap();
        assert_eq!((t.n(), t.r()), (3, 2));
        let err = parse_table_csv("1,1\n1,x\n", "t.csv").unwrap_err().to_string();
        assert_eq!(err, "t.csv: line 2, field 2: `x`: invalid digit found in string");
        let err = parse_table_csv("1,-1\n-1,1\n", "t.csv").unwrap_err().to_string();
        assert!(err.contains("negative entry -1 at row 1, column 2"), "{err}");
        assert!(parse_table_csv("1,1\n1\n", "t.csv").is_err());
    }

    #[test]
    fn positions() {
        assert_eq!(parse_positions("[[1, 2], [2, 2]]", 2).unwrap(), vec![(0, 1), (1, 1)]);
        assert!(parse_positions("[[0, 1]]", 2).is_err());
        assert!(parse_positions("[[3, 1]]", 2).is_err());
    }

    #[test]
    fn matrices() {
        assert_eq!(parse_matrix_json(r#"{"rows": [[1, 1]]}"#, "a").unwrap(), vec![vec![1, 1]]);
        assert!(parse_matrix_json(r#"{"rows": [[1, 1], [1]]}"#, "a").is_err());
        assert_eq!(parse_int_list("2, 2,2").unwrap(), vec![2, 2, 2]);
    }

    #[test]
    fn g22_edge_list_and_dot() {
        let fg = build_graph(enumerate_fiber(2, 2).unwrap());
        assert_eq!(render(|b| write_edge_list(&fg, b).unwrap()), "0 1\n1 2\n");
        let sidecar = vertex_sidecar(&fg);
        assert_eq!(sidecar["vertices"][0]["rows"], serde_json::json!([[0, 2], [2, 0]]));
        let dot = render(|b| write_dot(&fg, b).unwrap());
        assert_eq!(dot.matches("label=").count(), 3);
        assert_eq!(dot.matches(" -- ").count(), 2);
        assert!(dot.contains("1 [label=\"[[1,1],[1,1]]\"]"), "{dot}");
    }

    #[test]
    fn dot_is_guarded() {
        let fg = build_graph(enumerate_fiber(4, 3).unwrap());
        let err = write_dot(&fg, &mut Vec::new()).unwrap_err();
        assert!(matches!(err, CliError::ResourceGuard(_)));
        assert_eq!(err.exit_code(), crate::exit::RESOURCE_GUARD);
    }

    #[test]
    fn fiber_exports() {
        let fiber = enumerate_fiber(2, 1).unwrap();
        assert_eq!(
            render(|b| write_fiber_jsonl(&fiber, b).unwrap()),
            "{\"n\":2,\"r\":1,\"rows\":[[0,1],[1,0]]}\n{\"n\":2,\"r\":1,\"rows\":[[1,0],[0,1]]}\n"
        );
        assert_eq!(render(|b| write_fiber_csv(&fiber, b).unwrap()), "id,e11,e12,e21,e22\n0,0,1,1,0\n1,1,0,0,1\n");
    }
}
