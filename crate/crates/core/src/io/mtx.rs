//! Matrix Market coordinate files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::CsrMatrix;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

pub fn load_matrix_market(path: &Path) -> Result<CsrMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_market(&text, path)
}

/// Parses coordinate-format text. `path` only labels errors.
pub fn parse_matrix_market(text: &str, path: &Path) -> Result<CsrMatrix> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let words: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" {
        return Err(err(1, format!("bad header {header:?}")));
    }
    if words[1] != "matrix" || words[2] != "coordinate" {
        return Err(err(
            1,
            format!(
                "only `matrix coordinate` is supported, got {} {}",
                words[1], words[2]
            ),
        ));
    }
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(err(1, format!("unsupported field type `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut body = lines.filter(|(_, l)| !l.starts_with('%') && !l.trim().is_empty());
    let (size_line, size) = body
        .next()
        .ok_or_else(|| err(1, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| err(size_line, format!("bad size token `{t}`")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(err(size_line, "size line needs `rows cols entries`".into()));
    };
    if rows != cols {
        return Err(err(
            size_line,
            format!("matrix is {rows}x{cols}, only square matrices are supported"),
        ));
    }

    let arity = if field == Field::Pattern { 2 } else { 3 };
    let mut entries = Vec::with_capacity(nnz);
    let mut count = 0;
    for (ln, line) in body {
        count += 1;
        if count > nnz {
            return Err(err(ln, format!("more than the declared {nnz} entries")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != arity {
            return Err(err(
                ln,
                format!("expected {arity} tokens, got {}", toks.len()),
            ));
        }
        let index = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(i) if (1..=rows).contains(&i) => Ok(i - 1),
                _ => Err(err(ln, format!("index `{t}` outside 1..={rows}"))),
            }
        };
        let (i, j) = (index(toks[0])?, index(toks[1])?);
        let v = match field {
            Field::Pattern => 1.0,
            Field::Integer => toks[2]
                .parse::<i64>()
                .map(|x| x as f64)
                .map_err(|_| err(ln, format!("bad integer `{}`", toks[2])))?,
            Field::Real => toks[2]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(ln, format!("bad real `{}`", toks[2])))?,
        };
        match symmetry {
            Symmetry::General => entries.push((i, j, v)),
            _ if i < j => {
                return Err(err(
                    ln,
                    "symmetric files store the lower triangle only".into(),
                ))
            }
            Symmetry::SkewSymmetric if i == j => {
                return Err(err(ln, "skew-symmetric diagonal must be empty".into()))
            }
            Symmetry::Symmetric => {
                entries.push((i, j, v));
                if i != j {
                    entries.push((j, i, v));
                }
            }
            Symmetry::SkewSymmetric => {
                entries.push((i, j, v));
                entries.push((j, i, -v));
            }
        }
    }
    if count != nnz {
        return Err(err(
            text.lines().count(),
            format!("declared {nnz} entries, found {count}"),
        ));
    }
    CsrMatrix::from_triplets(rows, entries).map_err(|e| err(0, e.to_string()))
}

/// `general real` coordinate text; values print in shortest round-trip form.
pub fn write_matrix_market(a: &CsrMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.n(), a.n(), a.nnz());
    for (i, j, v) in a.entries() {
        let _ = writeln!(s, "{} {} {v:?}", i + 1, j + 1);
    }
    s
}
