//! Plain-text mesh, MatrixMarket and vector files.
//!
//! Mesh files start with a header `d nv nc`, followed by `nv` coordinate
//! lines and `nc` lines of 0-based vertex ids.

use std::fmt::Write as _;
use std::path::Path;

use super::mesh::SimplicialMesh;
use super::sparse::CsrMatrix;
use crate::{Error, Result};

fn parse<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse '{tok}'")))
}

/// Meaningful lines with their 1-based numbers; blank lines and `#`/`%`
/// comments are skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'))
}

pub fn parse_mesh(text: &str) -> Result<SimplicialMesh> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| Error::Format("empty mesh file".into()))?;
    let h: Vec<usize> = header
        .split_whitespace()
        .map(|t| parse(t, hl))
        .collect::<Result<_>>()?;
    let [d, nv, nc] = h[..] else {
        return Err(Error::Format(format!("line {hl}: header must be 'd nv nc'")));
    };
    let mut coordinates = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::Format(format!("expected {nv} vertex lines")))?;
        let x: Vec<f64> = l.split_whitespace().map(|t| parse(t, ln)).collect::<Result<_>>()?;
        if x.len() != d {
            return Err(Error::Format(format!("line {ln}: expected {d} coordinates")));
        }
        coordinates.push(x);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::Format(format!("expected {nc} cell lines")))?;
        let c: Vec<usize> = l.split_whitespace().map(|t| parse(t, ln)).collect::<Result<_>>()?;
        if c.len() != d + 1 {
            return Err(Error::Format(format!("line {ln}: expected {} vertex ids", d + 1)));
        }
        cells.push(c);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Format(format!("line {ln}: trailing content")));
    }
    SimplicialMesh::new(coordinates, cells)
}

pub fn format_mesh(mesh: &SimplicialMesh) -> String {
    let mut s = format!("{} {} {}\n", mesh.dim(), mesh.num_vertices(), mesh.num_cells());
    for x in mesh.coordinates() {
        let parts: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&parts.join(" "));
        s.push('\n');
    }
    for c in mesh.cells() {
        let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        s.push_str(&parts.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<SimplicialMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &SimplicialMesh) -> Result<()> {
    Ok(std::fs::write(path, format_mesh(mesh))?)
}

/// MatrixMarket coordinate format, 1-based, full precision.
pub fn format_matrix_market(a: &CsrMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows, a.ncols, a.nnz());
    for i in 0..a.nrows {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let _ = writeln!(s, "{} {} {v:?}", i + 1, j + 1);
        }
    }
    s
}

pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let first = text.lines().next().unwrap_or_default();
    if !first.starts_with("%%MatrixMarket matrix coordinate real") {
        return Err(Error::Format("expected a real coordinate MatrixMarket header".into()));
    }
    let symmetric = first.contains("symmetric");
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| Error::Format("missing size line".into()))?;
    let h: Vec<usize> = header
        .split_whitespace()
        .map(|t| parse(t, hl))
        .collect::<Result<_>>()?;
    let [nrows, ncols, nnz] = h[..] else {
        return Err(Error::Format(format!("line {hl}: expected 'rows cols nnz'")));
    };
    let mut triplets = Vec::with_capacity(nnz);
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::Format(format!("line {ln}: expected 'i j value'")));
        }
        let i: usize = parse(t[0], ln)?;
        let j: usize = parse(t[1], ln)?;
        let v: f64 = parse(t[2], ln)?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(Error::Format(format!("line {ln}: index out of range")));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    Ok(CsrMatrix::from_triplets(nrows, ncols, &triplets))
}

pub fn write_matrix_market(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    Ok(std::fs::write(path, format_matrix_market(a))?)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// One value per line.
pub fn format_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}\n")).collect()
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    content_lines(text).map(|(ln, l)| parse(l, ln)).collect()
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    Ok(std::fs::write(path, format_vector(v))?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}
