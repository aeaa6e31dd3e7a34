//! Matrix Market reading and writing.
//!
//! Both layouts (`coordinate`, `array`) are supported with `real`, `integer`, `complex` and
//! `pattern` fields and every symmetry qualifier. Values are written in shortest round-trip
//! form, so an array file read back reproduces the matrix bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use thiserror::Error;

use inr_opt_core::linalg::CsrMatrix;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct MtxError {
    pub line: usize,
    pub message: String,
}

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, MtxError> {
    Err(MtxError {
        line,
        message: message.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// A parsed file with symmetry expanded; entry indices are zero-based.
#[derive(Clone, Debug, PartialEq)]
pub struct MtxMatrix {
    pub rows: usize,
    pub cols: usize,
    pub layout: Layout,
    pub field: Field,
    pub symmetry: Symmetry,
    pub entries: Vec<(usize, usize, C64)>,
}

impl MtxMatrix {
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// Square sparse form; duplicate coordinates are summed.
    pub fn to_csr(&self) -> Option<CsrMatrix> {
        if !self.is_square() {
            return None;
        }
        CsrMatrix::from_triplets(self.rows, &self.entries).ok()
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<(Layout, Field, Symmetry), MtxError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return fail(lineno, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'");
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return fail(lineno, format!("unknown layout {other:?}")),
    };
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return fail(lineno, format!("unknown field {other:?}")),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return fail(lineno, format!("unknown symmetry {other:?}")),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return fail(lineno, "pattern matrices must use the coordinate layout");
    }
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return fail(lineno, "hermitian symmetry needs a complex field");
    }
    Ok((layout, field, symmetry))
}

fn number(tok: &str, lineno: usize) -> Result<f64, MtxError> {
    tok.parse()
        .or_else(|_| fail(lineno, format!("invalid number {tok:?}")))
}

fn index(tok: &str, bound: usize, lineno: usize) -> Result<usize, MtxError> {
    let k: usize = tok
        .parse()
        .or_else(|_| fail(lineno, format!("invalid index {tok:?}")))?;
    if k == 0 || k > bound {
        return fail(lineno, format!("index {k} outside 1..={bound}"));
    }
    Ok(k - 1)
}

fn value(toks: &[&str], field: Field, lineno: usize) -> Result<C64, MtxError> {
    let want = match field {
        Field::Pattern => 0,
        Field::Complex => 2,
        _ => 1,
    };
    if toks.len() != want {
        return fail(lineno, format!("expected {want} value field(s), found {}", toks.len()));
    }
    Ok(match field {
        Field::Pattern => C64::new(1.0, 0.0),
        Field::Complex => C64::new(number(toks[0], lineno)?, number(toks[1], lineno)?),
        _ => C64::new(number(toks[0], lineno)?, 0.0),
    })
}

fn push_with_mirror(entries: &mut Vec<(usize, usize, C64)>, sym: Symmetry, i: usize, j: usize, v: C64) {
    entries.push((i, j, v));
    if i != j {
        match sym {
            Symmetry::General => {}
            Symmetry::Symmetric => entries.push((j, i, v)),
            Symmetry::SkewSymmetric => entries.push((j, i, -v)),
            Symmetry::Hermitian => entries.push((j, i, v.conj())),
        }
    }
}

pub fn parse(text: &str) -> Result<MtxMatrix, MtxError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let Some((first_no, first)) = lines.next() else {
        return fail(1, "empty file");
    };
    let (layout, field, symmetry) = parse_header(first, first_no)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let Some((size_no, size_line)) = body.next() else {
        return fail(first_no, "missing size line");
    };
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().or_else(|_| fail(size_no, format!("invalid size {t:?}"))))
        .collect::<Result<_, _>>()?;
    let (rows, cols, declared) = match (layout, dims.as_slice()) {
        (Layout::Coordinate, &[r, c, nnz]) => (r, c, nnz),
        (Layout::Array, &[r, c]) => (r, c, 0),
        _ => return fail(size_no, "malformed size line"),
    };
    if symmetry != Symmetry::General && rows != cols {
        return fail(size_no, "a symmetric qualifier needs a square matrix");
    }

    let mut entries = Vec::new();
    match layout {
        Layout::Coordinate => {
            let mut count = 0;
            for (no, line) in body {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() < 2 {
                    return fail(no, "expected row and column indices");
                }
                let i = index(toks[0], rows, no)?;
                let j = index(toks[1], cols, no)?;
                if symmetry != Symmetry::General && i < j {
                    return fail(no, "entries of a symmetric file must lie on or below the diagonal");
                }
                let v = value(&toks[2..], field, no)?;
                if symmetry == Symmetry::Hermitian && i == j && v.im != 0.0 {
                    return fail(no, "diagonal of a hermitian matrix must be real");
                }
                push_with_mirror(&mut entries, symmetry, i, j, v);
                count += 1;
            }
            if count != declared {
                return fail(size_no, format!("declared {declared} entries, found {count}"));
            }
        }
        Layout::Array => {
            // Column-major; symmetric variants list the lower triangle only.
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::SkewSymmetric => j + 1,
                        _ => j,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut next = slots.iter();
            let mut last_no = size_no;
            for (no, line) in body {
                last_no = no;
                let toks: Vec<&str> = line.split_whitespace().collect();
                let Some(&(i, j)) = next.next() else {
                    return fail(no, "more values than the matrix holds");
                };
                push_with_mirror(&mut entries, symmetry, i, j, value(&toks, field, no)?);
            }
            if next.next().is_some() {
                return fail(last_no, format!("expected {} values", slots.len()));
            }
        }
    }
    Ok(MtxMatrix {
        rows,
        cols,
        layout,
        field,
        symmetry,
        entries,
    })
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: MtxError },
}

pub fn read(path: &Path) -> Result<MtxMatrix, ReadError> {
    let text = fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text).map_err(|source| ReadError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn is_real(values: impl IntoIterator<Item = C64>) -> bool {
    values.into_iter().all(|v| v.im == 0.0)
}

fn push_value(out: &mut String, v: C64, complex: bool) {
    if complex {
        let _ = writeln!(out, "{:e} {:e}", v.re, v.im);
    } else {
        let _ = writeln!(out, "{:e}", v.re);
    }
}

/// Dense matrix in the array layout.
pub fn format_dense(m: MatRef<'_, C64>) -> String {
    let complex = !is_real((0..m.ncols()).flat_map(|j| (0..m.nrows()).map(move |i| m[(i, j)])));
    let mut out = format!(
        "%%MatrixMarket matrix array {} general\n{} {}\n",
        if complex { "complex" } else { "real" },
        m.nrows(),
        m.ncols()
    );
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            push_value(&mut out, m[(i, j)], complex);
        }
    }
    out
}

/// Sparse matrix in the coordinate layout, explicit zeros dropped.
pub fn format_sparse(m: &CsrMatrix) -> String {
    let entries: Vec<_> = m.triplets().filter(|t| t.2 != C64::new(0.0, 0.0)).collect();
    let complex = !is_real(entries.iter().map(|t| t.2));
    let mut out = format!(
        "%%MatrixMarket matrix coordinate {} general\n{} {} {}\n",
        if complex { "complex" } else { "real" },
        m.dim(),
        m.dim(),
        entries.len()
    );
    for (i, j, v) in entries {
        let _ = write!(out, "{} {} ", i + 1, j + 1);
        push_value(&mut out, v, complex);
    }
    out
}
