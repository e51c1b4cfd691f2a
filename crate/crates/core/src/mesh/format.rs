use std::fmt::Write as _;
use std::path::Path;

use super::{conformity_check, ConformityReport, Mesh};
use crate::{Error, Result};

/// A mesh read from text together with its conformity report. Reading does
/// not reject nonconforming meshes; callers decide.
#[derive(Clone, Debug)]
pub struct LoadedMesh {
    pub mesh: Mesh,
    pub conformity: ConformityReport,
}

/// The `anisomesh` text of a mesh. Coordinates carry 17 significant digits
/// so that parsing restores them exactly.
pub fn render_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    writeln!(out, "anisomesh {}", mesh.dim()).unwrap();
    writeln!(out, "vertices {}", mesh.n_vertices()).unwrap();
    for v in mesh.vertices() {
        let coords: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", coords.join(" ")).unwrap();
    }
    writeln!(out, "cells {}", mesh.n_cells()).unwrap();
    for c in mesh.cells() {
        let idx: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{}", idx.join(" ")).unwrap();
    }
    out
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_mesh(mesh))?;
    Ok(())
}

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedMesh { line, message: message.into() }
}

fn section(lines: &mut impl Iterator<Item = (usize, String)>, name: &str, last: usize) -> Result<(usize, usize)> {
    let (no, line) = lines.next().ok_or_else(|| malformed(last + 1, format!("missing '{name}' header")))?;
    let mut words = line.split_whitespace();
    if words.next() != Some(name) {
        return Err(malformed(no, format!("expected '{name} <count>'")));
    }
    let count = words
        .next()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| malformed(no, format!("expected '{name} <count>'")))?;
    if words.next().is_some() {
        return Err(malformed(no, "trailing tokens"));
    }
    Ok((no, count))
}

fn row<T: std::str::FromStr>(line: &str, no: usize, width: usize, what: &str) -> Result<Vec<T>> {
    let values = line
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| malformed(no, format!("bad {what} '{w}'"))))
        .collect::<Result<Vec<T>>>()?;
    if values.len() != width {
        return Err(malformed(no, format!("expected {width} {what}s, found {}", values.len())));
    }
    Ok(values)
}

pub fn parse_mesh(text: &str) -> Result<LoadedMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (no, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    let dim: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["anisomesh", d] => d.parse().map_err(|_| malformed(no, "bad dimension"))?,
        _ => return Err(malformed(no, "expected 'anisomesh <dim>'")),
    };
    if !(2..=3).contains(&dim) {
        return Err(malformed(no, format!("dimension {dim} not supported")));
    }
    let (mut last, n) = section(&mut lines, "vertices", no)?;
    let mut vertices = Vec::with_capacity(n);
    for _ in 0..n {
        let (no, line) = lines.next().ok_or_else(|| malformed(last + 1, "missing vertex line"))?;
        vertices.push(row::<f64>(&line, no, dim, "coordinate")?);
        last = no;
    }
    let (mut last, m) = section(&mut lines, "cells", last)?;
    let mut cells = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, line) = lines.next().ok_or_else(|| malformed(last + 1, "missing cell line"))?;
        cells.push(row::<usize>(&line, no, dim + 1, "index")?);
        last = no;
    }
    if let Some((no, _)) = lines.next() {
        return Err(malformed(no, "unexpected content after cells"));
    }
    let mesh = Mesh::new(dim, vertices, cells)?;
    let conformity = conformity_check(&mesh);
    if !conformity.conforming {
        log::warn!("nonconforming mesh: {conformity}");
    }
    Ok(LoadedMesh { mesh, conformity })
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<LoadedMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}
