//! Numeric CSV input and output. Lines starting with `#` are comments.

use std::io::{Read, Write};
use std::path::Path;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Reads a numeric table, one observation per row.
pub fn read_matrix<R: Read>(input: R, has_header: bool) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let width = *cols.get_or_insert(rec.len());
        if rec.len() != width {
            return Err(Error::Dimension(format!(
                "row {} has {} fields, expected {width}",
                i + 1,
                rec.len()
            )));
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::InvalidInput(format!("row {}, column {}: `{field}` is not a number", i + 1, j + 1))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::InvalidInput("no data rows".into()))?;
    DataMatrix::new(values, rows, cols)
}

pub fn read_matrix_file(path: &Path, has_header: bool) -> Result<DataMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(std::io::BufReader::new(file), has_header).map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::InvalidInput(format!("{}: {other}", path.display())),
    })
}

/// Writes a table, preceded by `comment` as its own line when given.
pub fn write_matrix<W: Write>(mut out: W, comment: Option<&str>, m: &DataMatrix) -> Result<()> {
    if let Some(c) = comment {
        writeln!(out, "{c}").map_err(|e| Error::io("<output>", e))?;
    }
    let mut w = csv::Writer::from_writer(out);
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// `observation,density` rows.
pub fn write_densities<W: Write>(out: W, observations: &[f64], densities: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["observation", "density"])?;
    for (x, d) in observations.iter().zip(densities) {
        w.write_record([x.to_string(), d.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_with_comments_and_header() {
        let text = "# kind=normal\nx,y\n1,2\n 3 , 4\n";
        let m = read_matrix(text.as_bytes(), true).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn rejects_text_and_ragged_rows() {
        assert!(read_matrix("1,2\n3,x\n".as_bytes(), false).is_err());
        assert!(read_matrix("1,2\n3\n".as_bytes(), false).is_err());
        assert!(read_matrix("# only a comment\n".as_bytes(), false).is_err());
    }

    #[test]
    fn write_then_read_is_lossless() {
        let m = DataMatrix::from_rows(&[vec![0.1, 1.0 / 3.0], vec![-2.5e-300, 7.0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, Some("# meta"), &m).unwrap();
        assert!(buf.starts_with(b"# meta\n"));
        assert_eq!(read_matrix(buf.as_slice(), false).unwrap(), m);
    }
}
