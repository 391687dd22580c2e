//! TetGen `.node` / `.ele` reader.
//!
//! Node numbering may start at 0 or 1; the first index in the `.node` file
//! decides, and element indices are shifted to match. `#` starts a comment.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vofl_core::discretize::TetMesh;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("mesh rejected: {0}")]
    Invalid(#[from] vofl_core::error::Error),
}

/// Non-empty, comment-stripped lines with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let fields: Vec<&str> = l.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn read(path: &Path) -> Result<String, MeshError> {
    fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn number<T: std::str::FromStr>(path: &Path, line: usize, s: &str) -> Result<T, MeshError> {
    s.parse().map_err(|_| MeshError::Format {
        path: path.to_path_buf(),
        line,
        message: format!("cannot parse `{s}`"),
    })
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Node coordinates and the index base found in the file.
pub fn parse_nodes(path: &Path, text: &str) -> Result<(Vec<[f64; 3]>, usize), MeshError> {
    let mut rec = records(text);
    let (hl, header) = rec.next().ok_or_else(|| format_err(path, 1, "empty node file"))?;
    let count: usize = number(path, hl, header[0])?;
    if let Some(dim) = header.get(1) {
        let dim: usize = number(path, hl, dim)?;
        if dim != 3 {
            return Err(format_err(path, hl, format!("expected 3 dimensions, got {dim}")));
        }
    }
    let mut nodes = Vec::with_capacity(count);
    let mut base = None;
    for (line, f) in rec.take(count) {
        if f.len() < 4 {
            return Err(format_err(path, line, "a node needs an index and three coordinates"));
        }
        let idx: usize = number(path, line, f[0])?;
        let b = *base.get_or_insert(idx);
        if b > 1 {
            return Err(format_err(path, line, format!("node numbering must start at 0 or 1, got {idx}")));
        }
        if idx != b + nodes.len() {
            return Err(format_err(path, line, format!("expected node {}, got {idx}", b + nodes.len())));
        }
        nodes.push([number(path, line, f[1])?, number(path, line, f[2])?, number(path, line, f[3])?]);
    }
    if nodes.len() != count {
        return Err(format_err(path, hl, format!("header promises {count} nodes, found {}", nodes.len())));
    }
    Ok((nodes, base.unwrap_or(0)))
}

/// Zero-based tetrahedra; only the four corner nodes of each element are read.
pub fn parse_elements(path: &Path, text: &str, base: usize, n_nodes: usize) -> Result<Vec<[usize; 4]>, MeshError> {
    let mut rec = records(text);
    let (hl, header) = rec.next().ok_or_else(|| format_err(path, 1, "empty element file"))?;
    let count: usize = number(path, hl, header[0])?;
    let per: usize = header.get(1).map_or(Ok(4), |s| number(path, hl, s))?;
    if per != 4 && per != 10 {
        return Err(format_err(path, hl, format!("unsupported nodes per element: {per}")));
    }
    let mut elements = Vec::with_capacity(count);
    for (line, f) in rec.take(count) {
        if f.len() < 1 + per {
            return Err(format_err(path, line, format!("an element needs an index and {per} nodes")));
        }
        let mut tet = [0usize; 4];
        for (k, t) in tet.iter_mut().enumerate() {
            let i: usize = number(path, line, f[1 + k])?;
            if i < base || i - base >= n_nodes {
                return Err(format_err(path, line, format!("node {i} is out of range")));
            }
            *t = i - base;
        }
        elements.push(tet);
    }
    if elements.len() != count {
        return Err(format_err(path, hl, format!("header promises {count} elements, found {}", elements.len())));
    }
    Ok(elements)
}

/// Reads a mesh and multiplies every coordinate by `scale`.
pub fn read_tetgen(nodes: &Path, elements: &Path, scale: f64) -> Result<TetMesh, MeshError> {
    let (pts, base) = parse_nodes(nodes, &read(nodes)?)?;
    let tets = parse_elements(elements, &read(elements)?, base, pts.len())?;
    Ok(TetMesh::new(pts, tets)?.scaled(scale))
}
