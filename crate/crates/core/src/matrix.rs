//! Dense sample matrices and their on-disk formats.
//!
//! Two formats are supported:
//!
//! - CSV: comma separated, `\n` line ends, decimal floats, no header unless
//!   [`LoadOptions::header`] is set. Blank lines and lines starting with `#`
//!   are ignored.
//! - SPMX binary: `53 50 4D 58` magic, version byte (1), dtype byte
//!   (0 = f32, 1 = f64), rows and cols as little-endian `u64`, then the
//!   values little-endian in row-major order.
//!
//! Values are always held as `f64`; `f32` inputs are widened on load and the
//! original dtype is remembered so a binary save reproduces the file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub const SPMX_MAGIC: [u8; 4] = *b"SPMX";
pub const SPMX_VERSION: u8 = 1;
const SPMX_HEADER_LEN: usize = 22;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty matrix input")]
    Empty,
    #[error("ragged row at line {line}: expected {expected} columns, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric token {token:?} at line {line}, column {column}")]
    NonNumeric {
        line: usize,
        column: usize,
        token: String,
    },
    #[error("non-finite value at line {line}, column {column}")]
    NonFiniteCell { line: usize, column: usize },
    #[error("non-finite value at row {row}, col {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("invalid SPMX header: {0}")]
    BadHeader(String),
    #[error("SPMX payload has {found} bytes, expected {expected}")]
    Truncated { expected: usize, found: usize },
    #[error("shape mismatch: {rows}x{cols} needs {expected} values, got {found}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },
    #[error("input is not valid UTF-8 text")]
    NotText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
    /// Binary when the file starts with the SPMX magic, CSV otherwise.
    Auto,
}

impl FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "binary" | "spmx" => Ok(MatrixFormat::Binary),
            "auto" => Ok(MatrixFormat::Auto),
            other => Err(format!("unknown matrix format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Skip the first non-comment CSV line.
    pub header: bool,
}

/// Row-major matrix of samples; one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    dtype: Dtype,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        Self::with_dtype(rows, cols, data, Dtype::F64)
    }

    pub fn with_dtype(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        dtype: Dtype,
    ) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::Shape {
                rows,
                cols,
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(MatrixError::NonFiniteValue {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            dtype,
        })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(MatrixError::RaggedRow {
                    line: i + 1,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dtype(&self) -> Dtype {
        self.dtype
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Result<Self, MatrixError> {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        Self::with_dtype(keep.len(), self.cols, data, self.dtype)
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<DenseMatrix, MatrixError> {
    load_matrix_with(path, format, LoadOptions::default())
}

pub fn load_matrix_with(
    path: impl AsRef<Path>,
    format: MatrixFormat,
    options: LoadOptions,
) -> Result<DenseMatrix, MatrixError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| MatrixError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let binary = match format {
        MatrixFormat::Binary => true,
        MatrixFormat::Csv => false,
        MatrixFormat::Auto => bytes.starts_with(&SPMX_MAGIC),
    };
    if binary {
        decode_spmx(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| MatrixError::NotText)?;
        parse_csv(text, options)
    }
}

/// Writes `m`; `Auto` is treated as CSV.
pub fn save_matrix(m: &DenseMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<(), MatrixError> {
    let path = path.as_ref();
    let bytes = match format {
        MatrixFormat::Binary => encode_spmx(m),
        MatrixFormat::Csv | MatrixFormat::Auto => format_csv(m).into_bytes(),
    };
    fs::write(path, bytes).map_err(|source| MatrixError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_csv(text: &str, options: LoadOptions) -> Result<DenseMatrix, MatrixError> {
    let mut data = Vec::new();
    let mut cols = 0usize;
    let mut rows = 0usize;
    let mut skip_header = options.header;
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if skip_header {
            skip_header = false;
            continue;
        }
        let start = data.len();
        for (c, token) in line.split(',').enumerate() {
            let token = token.trim();
            let value: f64 = token.parse().map_err(|_| MatrixError::NonNumeric {
                line: line_no,
                column: c + 1,
                token: token.to_string(),
            })?;
            if !value.is_finite() {
                return Err(MatrixError::NonFiniteCell {
                    line: line_no,
                    column: c + 1,
                });
            }
            data.push(value);
        }
        let found = data.len() - start;
        if rows == 0 {
            cols = found;
        } else if found != cols {
            return Err(MatrixError::RaggedRow {
                line: line_no,
                expected: cols,
                found,
            });
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(MatrixError::Empty);
    }
    DenseMatrix::new(rows, cols, data)
}

/// Shortest round-trip decimal rendering, so CSV reload is exact.
pub fn format_csv(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(m.data.len() * 20);
    for i in 0..m.rows {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn encode_spmx(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(SPMX_HEADER_LEN + m.data.len() * m.dtype.width());
    out.extend_from_slice(&SPMX_MAGIC);
    out.push(SPMX_VERSION);
    out.push(m.dtype.code());
    out.extend_from_slice(&(m.rows as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols as u64).to_le_bytes());
    match m.dtype {
        Dtype::F32 => m
            .data
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
        Dtype::F64 => m
            .data
            .iter()
            .for_each(|&v| out.extend_from_slice(&v.to_le_bytes())),
    }
    out
}

pub fn decode_spmx(bytes: &[u8]) -> Result<DenseMatrix, MatrixError> {
    if bytes.is_empty() {
        return Err(MatrixError::Empty);
    }
    if bytes.len() < SPMX_HEADER_LEN {
        return Err(MatrixError::BadHeader(format!(
            "{} bytes is shorter than the {SPMX_HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if bytes[0..4] != SPMX_MAGIC {
        return Err(MatrixError::BadHeader("missing SPMX magic".into()));
    }
    if bytes[4] != SPMX_VERSION {
        return Err(MatrixError::BadHeader(format!("unsupported version {}", bytes[4])));
    }
    let dtype = match bytes[5] {
        0 => Dtype::F32,
        1 => Dtype::F64,
        other => return Err(MatrixError::BadHeader(format!("unknown dtype code {other}"))),
    };
    let rows = u64::from_le_bytes(bytes[6..14].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[14..22].try_into().unwrap());
    if rows == 0 || cols == 0 {
        return Err(MatrixError::Empty);
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| MatrixError::BadHeader(format!("shape {rows}x{cols} overflows")))?;
    let payload = &bytes[SPMX_HEADER_LEN..];
    let expected = count
        .checked_mul(dtype.width())
        .ok_or_else(|| MatrixError::BadHeader(format!("shape {rows}x{cols} overflows")))?;
    if payload.len() != expected {
        return Err(MatrixError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    let data: Vec<f64> = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    DenseMatrix::with_dtype(rows as usize, cols as usize, data, dtype)
}
