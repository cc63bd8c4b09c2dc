//! Plain-text interchange formats.
//!
//! * graph: header `n s t`, then one `u v len` line per edge (`len` decimal or
//!   `p/q`);
//! * layer sidecar: one `v layer base_vertex` line per vertex (`-` for
//!   endpoints), then one `u v class` line per edge;
//! * group action: one permutation per line, space-separated images;
//! * point configuration: header `n dim p`, then one line of coordinates per
//!   vertex.
//!
//! Blank lines and lines starting with `#` are ignored by every reader.

use std::io::{BufRead, Write};

use crate::base_graphs::GroupAction;
use crate::embedding::PointConfig;
use crate::error::{Error, Result};
use crate::layered::{EdgeClass, LayeredGraph};
use crate::metric_graph::{MetricGraph, STGraph};
use crate::scalar::{Length, Real};

fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

pub fn write_graph<T: Length, W: Write>(g: &STGraph<T>, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", g.vertex_count(), g.s, g.t)?;
    for e in g.edges() {
        writeln!(w, "{} {} {}", e.u, e.v, e.len)?;
    }
    Ok(())
}

pub fn graph_to_string<T: Length>(g: &STGraph<T>) -> String {
    let mut buf = Vec::new();
    write_graph(g, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_graph<T: Length, R: BufRead>(r: R) -> Result<STGraph<T>> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `n s t`"))??;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(parse_err(hl, "header must be `n s t`"));
    }
    let n = parse_usize(toks[0], hl, "vertex count")?;
    let s = parse_usize(toks[1], hl, "s")?;
    let t = parse_usize(toks[2], hl, "t")?;
    let mut edges = Vec::new();
    for item in lines {
        let (ln, line) = item?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(ln, "edge line must be `u v len`"));
        }
        let u = parse_usize(toks[0], ln, "vertex")?;
        let v = parse_usize(toks[1], ln, "vertex")?;
        let len = T::parse_length(toks[2]).ok_or_else(|| parse_err(ln, format!("invalid length `{}`", toks[2])))?;
        for x in [u, v] {
            if x >= n {
                return Err(parse_err(ln, format!("vertex {x} out of range (n = {n})")));
            }
        }
        if u == v {
            return Err(parse_err(ln, "self-loop"));
        }
        if len <= T::zero() {
            return Err(parse_err(ln, "edge length must be positive"));
        }
        edges.push((u, v, len));
    }
    let base = MetricGraph::new(n, edges).map_err(|e| parse_err(hl, e.to_string()))?;
    STGraph::new(base, s, t).map_err(|e| parse_err(hl, e.to_string()))
}

pub fn write_layers<T: Length, W: Write>(lg: &LayeredGraph<T>, mut w: W) -> Result<()> {
    for v in 0..lg.st.vertex_count() {
        match lg.base_vertex_of[v] {
            Some(b) => writeln!(w, "{v} {} {b}", lg.layer_of[v])?,
            None => writeln!(w, "{v} {} -", lg.layer_of[v])?,
        }
    }
    for (e, class) in lg.st.edges().iter().zip(&lg.edge_class) {
        writeln!(w, "{} {} {}", e.u, e.v, class.as_str())?;
    }
    Ok(())
}

/// Parsed layer sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSidecar {
    /// `(layer, base_vertex)` per vertex.
    pub vertices: Vec<(usize, Option<usize>)>,
    pub edges: Vec<(usize, usize, EdgeClass)>,
}

pub fn read_layers<R: BufRead>(r: R) -> Result<LayerSidecar> {
    let mut out = LayerSidecar { vertices: Vec::new(), edges: Vec::new() };
    for item in content_lines(r) {
        let (ln, line) = item?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(ln, "expected three fields"));
        }
        match toks[2] {
            "vertical" | "horizontal" => {
                let class = if toks[2] == "vertical" { EdgeClass::Vertical } else { EdgeClass::Horizontal };
                out.edges.push((parse_usize(toks[0], ln, "vertex")?, parse_usize(toks[1], ln, "vertex")?, class));
            }
            base => {
                if !out.edges.is_empty() {
                    return Err(parse_err(ln, "vertex line after edge lines"));
                }
                let v = parse_usize(toks[0], ln, "vertex")?;
                if v != out.vertices.len() {
                    return Err(parse_err(ln, format!("expected vertex {}", out.vertices.len())));
                }
                let layer = parse_usize(toks[1], ln, "layer")?;
                let b = if base == "-" { None } else { Some(parse_usize(base, ln, "base vertex")?) };
                out.vertices.push((layer, b));
            }
        }
    }
    Ok(out)
}

pub fn write_action<W: Write>(a: &GroupAction, mut w: W) -> Result<()> {
    for p in &a.perms {
        let line: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_action<R: BufRead>(r: R) -> Result<GroupAction> {
    let mut perms = Vec::new();
    let mut first_line = 1;
    for item in content_lines(r) {
        let (ln, line) = item?;
        if perms.is_empty() {
            first_line = ln;
        }
        let p = line
            .split_whitespace()
            .map(|t| parse_usize(t, ln, "image"))
            .collect::<Result<Vec<_>>>()?;
        perms.push(p);
    }
    GroupAction::new(perms).map_err(|e| parse_err(first_line, e.to_string()))
}

pub fn write_points<F: Real, W: Write>(f: &PointConfig<F>, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", f.len(), f.dim(), f.p)?;
    for x in f.points() {
        let line: Vec<String> = x.iter().map(|c| format!("{c:e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_points<F: Real + std::str::FromStr, R: BufRead>(r: R) -> Result<PointConfig<F>> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `n dim p`"))??;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(parse_err(hl, "header must be `n dim p`"));
    }
    let n = parse_usize(toks[0], hl, "point count")?;
    let dim = parse_usize(toks[1], hl, "dimension")?;
    let p: F = toks[2].parse().map_err(|_| parse_err(hl, "invalid exponent"))?;
    let mut pts = Vec::with_capacity(n);
    for item in lines {
        let (ln, line) = item?;
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<F>().map_err(|_| parse_err(ln, format!("invalid coordinate `{t}`"))))
            .collect::<Result<Vec<F>>>()?;
        if row.len() != dim {
            return Err(parse_err(ln, format!("expected {dim} coordinates, found {}", row.len())));
        }
        pts.push(row);
    }
    if pts.len() != n {
        return Err(parse_err(hl, format!("header promises {n} points, found {}", pts.len())));
    }
    PointConfig::new(pts, p).map_err(|e| parse_err(hl, e.to_string()))
}
