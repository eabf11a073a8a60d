//! Plain-text matrix files.
//!
//! ```text
//! # optional comment lines
//! 2,3,real
//! 1.0,2.5,-3e-7
//! 0.0,1.0,4.0
//! ```
//!
//! The first record is `rows,cols,field` with `field` one of `real` or
//! `complex`. Values use the shortest decimal that round-trips; complex
//! entries are written `re+imj`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use pegi_core::{FieldKind, Scalar};

use crate::error::{CliError, CliResult};

/// Scalars that can be written to and read from a matrix file.
pub trait CsvScalar: Scalar {
    fn format_cell(self) -> String;
    fn parse_cell(cell: &str) -> Option<Self>;
}

impl CsvScalar for f64 {
    fn format_cell(self) -> String {
        format!("{self:?}")
    }

    fn parse_cell(cell: &str) -> Option<Self> {
        cell.parse().ok()
    }
}

impl CsvScalar for Complex<f64> {
    fn format_cell(self) -> String {
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        format!("{:?}{sign}{:?}j", self.re, self.im.abs())
    }

    fn parse_cell(cell: &str) -> Option<Self> {
        let body = cell.strip_suffix('j')?;
        let bytes = body.as_bytes();
        // The imaginary sign is the last +/- that does not open the string
        // or follow an exponent marker.
        let split = (1..bytes.len())
            .rev()
            .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
        let re: f64 = body[..split].parse().ok()?;
        let im: f64 = body[split..].parse().ok()?;
        Some(Complex::new(re, im))
    }
}

/// A matrix of either field, as found in a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex<f64>>),
}

impl AnyMatrix {
    pub fn field(&self) -> FieldKind {
        match self {
            AnyMatrix::Real(_) => FieldKind::Real,
            AnyMatrix::Complex(_) => FieldKind::Complex,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Real(m) => m.shape(),
            AnyMatrix::Complex(m) => m.shape(),
        }
    }
}

pub fn format_matrix<T: CsvScalar>(m: &DMatrix<T>) -> String {
    let mut out = Vec::new();
    write_to(&mut out, m).expect("writing to memory cannot fail");
    String::from_utf8(out).expect("cells are ASCII")
}

pub fn write_matrix<T: CsvScalar>(path: &Path, m: &DMatrix<T>) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_to(&mut out, m)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

fn write_to<T: CsvScalar>(out: &mut impl Write, m: &DMatrix<T>) -> std::io::Result<()> {
    writeln!(out, "{},{},{}", m.nrows(), m.ncols(), T::FIELD)?;
    for row in m.row_iter() {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.write_all(b",")?;
            }
            out.write_all(x.format_cell().as_bytes())?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_matrix(path: &Path) -> CliResult<AnyMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, &path.display().to_string())
}

/// Reads a matrix and requires it to be over `T`'s field.
pub fn read_matrix_as<T: CsvScalar>(path: &Path) -> CliResult<DMatrix<T>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix_as(&text, &path.display().to_string())
}

pub fn parse_matrix(text: &str, label: &str) -> CliResult<AnyMatrix> {
    let mut reader = reader(text);
    let (_, header) = header(&mut reader, label)?;
    match header.get(2) {
        Some("complex") => Ok(AnyMatrix::Complex(parse_matrix_as(text, label)?)),
        _ => Ok(AnyMatrix::Real(parse_matrix_as(text, label)?)),
    }
}

pub fn parse_matrix_as<T: CsvScalar>(text: &str, label: &str) -> CliResult<DMatrix<T>> {
    let at = |line: u64, column: usize, message: String| CliError::ParseAt {
        path: label.into(),
        line,
        column,
        message,
    };
    let mut reader = reader(text);
    let (hline, header) = header(&mut reader, label)?;
    if header.len() != 3 {
        return Err(at(hline, 1, format!("header must be rows,cols,field; got {} fields", header.len())));
    }
    let dim = |i: usize| -> CliResult<usize> {
        header[i]
            .parse()
            .map_err(|_| at(hline, i + 1, format!("invalid dimension {:?}", &header[i])))
    };
    let (rows, cols) = (dim(0)?, dim(1)?);
    let field: FieldKind = header[2]
        .parse()
        .map_err(|_| at(hline, 3, format!("unknown field {:?}", &header[2])))?;
    if field != T::FIELD {
        return Err(at(hline, 3, format!("expected a {} matrix, found {field}", T::FIELD)));
    }
    if rows == 0 || cols == 0 {
        return Err(at(hline, 1, format!("empty matrix ({rows}x{cols})")));
    }
    let mut data = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 28));
    let mut record = csv::StringRecord::new();
    let mut r = 0;
    while next_record(&mut reader, &mut record, label)? {
        let line = record.position().map_or(0, |p| p.line());
        if r == rows {
            return Err(at(line, 1, format!("header declares {rows} rows but more follow")));
        }
        if record.len() != cols {
            return Err(at(line, record.len().min(cols) + 1, format!("row {r} has {} values, expected {cols}", record.len())));
        }
        for (c, cell) in record.iter().enumerate() {
            let v = T::parse_cell(cell)
                .ok_or_else(|| at(line, c + 1, format!("row {r}: {cell:?} is not a {} number", T::FIELD)))?;
            data.push(v);
        }
        r += 1;
    }
    if r != rows {
        return Err(CliError::Parse {
            path: label.into(),
            message: format!("header declares {rows} rows but {r} follow"),
        });
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

/// Advances to the next non-blank record.
fn next_record(reader: &mut csv::Reader<&[u8]>, record: &mut csv::StringRecord, label: &str) -> CliResult<bool> {
    loop {
        let more = reader.read_record(record).map_err(|e| CliError::Parse {
            path: label.into(),
            message: e.to_string(),
        })?;
        if !more {
            return Ok(false);
        }
        if !(record.len() == 1 && record[0].is_empty()) {
            return Ok(true);
        }
    }
}

fn header(reader: &mut csv::Reader<&[u8]>, label: &str) -> CliResult<(u64, csv::StringRecord)> {
    let mut record = csv::StringRecord::new();
    if !next_record(reader, &mut record, label)? {
        return Err(CliError::Parse {
            path: label.into(),
            message: "empty matrix file: no header record".into(),
        });
    }
    Ok((record.position().map_or(0, |p| p.line()), record))
}
