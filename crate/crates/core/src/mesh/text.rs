//! Line-oriented polygon mesh format:
//!
//! ```text
//! polymesh 2d
//! vertices N
//! x y            (N lines)
//! cells M
//! k i1 i2 ... ik (M lines, counter-clockwise, 0-based)
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, Point, PrimalMesh};

fn perr(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PrimalMesh, MeshError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_mesh(&text)
}

pub fn parse_mesh(text: &str) -> Result<PrimalMesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (n, header) = lines.next().ok_or_else(|| perr(1, "empty mesh file"))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["polymesh", "2d"] {
        return Err(perr(n, format!("expected header `polymesh 2d`, found `{header}`")));
    }

    let mut count = |keyword: &str| -> Result<usize, MeshError> {
        let (n, l) = lines
            .next()
            .ok_or_else(|| perr(0, format!("missing `{keyword}` line")))?;
        let mut it = l.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(perr(n, format!("expected `{keyword} <count>`")));
        }
        let c = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| perr(n, format!("bad {keyword} count")))?;
        if it.next().is_some() {
            return Err(perr(n, "trailing tokens"));
        }
        Ok(c)
    };
    let nv = count("vertices")?;
    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    let mut cells = Vec::new();
    let mut cell_lines = Vec::new();
    {
        let lines = lines.by_ref();
        for _ in 0..nv {
            let (n, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("expected {nv} vertex lines")))?;
            let coords: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| perr(n, format!("bad coordinate `{t}`"))))
                .collect::<Result<_, _>>()?;
            if coords.len() != 2 || coords.iter().any(|c| !c.is_finite()) {
                return Err(perr(n, "vertex line must hold two finite coordinates"));
            }
            vertices.push([coords[0], coords[1]]);
        }
        let (n, l) = lines.next().ok_or_else(|| perr(0, "missing `cells` line"))?;
        let mut it = l.split_whitespace();
        if it.next() != Some("cells") {
            return Err(perr(n, "expected `cells <count>`"));
        }
        let nc: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| perr(n, "bad cells count"))?;
        for _ in 0..nc {
            let (n, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("expected {nc} cell lines")))?;
            let ids: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| perr(n, format!("bad index `{t}`"))))
                .collect::<Result<_, _>>()?;
            let Some((&k, rest)) = ids.split_first() else {
                return Err(perr(n, "empty cell line"));
            };
            if rest.len() != k {
                return Err(perr(n, format!("cell declares {k} vertices but lists {}", rest.len())));
            }
            cells.push(rest.to_vec());
            cell_lines.push(n);
        }
        if let Some((n, _)) = lines.next() {
            return Err(perr(n, "unexpected content after cell list"));
        }
    }
    PrimalMesh::from_polygons(vertices, cells)
}

/// Serializes the vertex and cell lists; `parse_mesh` reads it back exactly.
pub fn write_mesh_text(mesh: &PrimalMesh) -> String {
    let mut s = String::from("polymesh 2d\n");
    let _ = writeln!(s, "vertices {}", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
    }
    let _ = writeln!(s, "cells {}", mesh.num_cells());
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.vertices.len());
        for i in &c.vertices {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    s
}
