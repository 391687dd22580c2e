//! Snapshot files.
//!
//! 1D: one `#` header line naming the columns, then one row per node, every
//! number in 9-significant-digit scientific notation. 3D: legacy VTK ASCII
//! unstructured grid with the potential as point data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vofl_core::discretize::TetMesh;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("column `{name}` has {got} values for {expected} nodes")]
    Length { name: String, expected: usize, got: usize },
}

/// Column-oriented table of nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub time: f64,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(time: f64) -> Self {
        Self {
            time,
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Self {
        self.names.push(name.to_string());
        self.columns.push(values);
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }
}

fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn format_table(t: &Table) -> Result<String, SnapshotError> {
    let n = t.rows();
    for (name, c) in t.names.iter().zip(&t.columns) {
        if c.len() != n {
            return Err(SnapshotError::Length {
                name: name.clone(),
                expected: n,
                got: c.len(),
            });
        }
    }
    let mut s = format!("# t={} {}\n", sci(t.time), t.names.join(" "));
    for i in 0..n {
        let row: Vec<String> = t.columns.iter().map(|c| sci(c[i])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<(), SnapshotError> {
    fs::write(path, text).map_err(|source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_snapshot_1d(t: &Table, path: &Path) -> Result<(), SnapshotError> {
    write(path, &format_table(t)?)
}

pub fn parse_table(path: &Path, text: &str) -> Result<Table, SnapshotError> {
    let bad = |line: usize, message: &str| SnapshotError::Format {
        path: path.to_path_buf(),
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let mut fields = header.strip_prefix('#').ok_or_else(|| bad(1, "missing header"))?.split_whitespace();
    let time = fields
        .next()
        .and_then(|f| f.strip_prefix("t="))
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| bad(1, "header must start with t=<time>"))?;
    let names: Vec<String> = fields.map(str::to_string).collect();
    let mut columns = vec![Vec::new(); names.len()];
    for (i, line) in lines.enumerate() {
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != names.len() {
            return Err(bad(i + 2, "wrong number of columns"));
        }
        for (c, v) in columns.iter_mut().zip(values) {
            c.push(v.parse().map_err(|_| bad(i + 2, "not a number"))?);
        }
    }
    Ok(Table { time, names, columns })
}

pub fn read_snapshot_1d(path: &Path) -> Result<Table, SnapshotError> {
    let text = fs::read_to_string(path).map_err(|source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_table(path, &text)
}

pub fn format_vtk(mesh: &TetMesh, time: f64, name: &str, values: &[f64]) -> Result<String, SnapshotError> {
    let n = mesh.n_nodes();
    if values.len() != n {
        return Err(SnapshotError::Length {
            name: name.to_string(),
            expected: n,
            got: values.len(),
        });
    }
    let m = mesh.elements().len();
    let mut s = String::with_capacity(64 * (n + m));
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "vofl snapshot t={}", sci(time));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in mesh.nodes() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "CELLS {m} {}", 5 * m);
    for e in mesh.elements() {
        let _ = writeln!(s, "4 {} {} {} {}", e[0], e[1], e[2], e[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        s.push_str("10\n");
    }
    let _ = writeln!(s, "POINT_DATA {n}\nSCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        s.push_str(&sci(*v));
        s.push('\n');
    }
    Ok(s)
}

pub fn write_snapshot_3d(mesh: &TetMesh, time: f64, name: &str, values: &[f64], path: &Path) -> Result<(), SnapshotError> {
    write(path, &format_vtk(mesh, time, name, values)?)
}
