//! `.fvecs` / `.bvecs` containers: each record is a little-endian 32-bit
//! dimension followed by that many components (f32 or u8).

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DataSource, DatasetMeta};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Fvecs,
    Bvecs,
}

impl Format {
    fn component_size(self) -> usize {
        match self {
            Format::Fvecs => 4,
            Format::Bvecs => 1,
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "fvecs" => Some(Format::Fvecs),
            "bvecs" => Some(Format::Bvecs),
            _ => None,
        }
    }
}

fn parse(bytes: &[u8], format: Format, name: &str) -> Result<(DatasetMeta, Matrix)> {
    if bytes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = format.component_size();
    let mut offset = 0usize;
    let mut dim = 0usize;
    let mut values = Vec::new();
    let mut record = 0usize;
    while offset < bytes.len() {
        let Some(header) = bytes.get(offset..offset + 4) else {
            return Err(Error::CorruptFile {
                offset: offset as u64,
                reason: "truncated dimension header".into(),
            });
        };
        let d = u32::from_le_bytes(header.try_into().unwrap()) as usize;
        if d == 0 || d > i32::MAX as usize {
            return Err(Error::CorruptFile {
                offset: offset as u64,
                reason: format!("invalid dimension {d}"),
            });
        }
        if record == 0 {
            dim = d;
        } else if d != dim {
            return Err(Error::DimensionVaries { record_index: record });
        }
        let body_start = offset + 4;
        let Some(body) = bytes.get(body_start..body_start + d * width) else {
            return Err(Error::CorruptFile {
                offset: offset as u64,
                reason: format!("record {record} truncated"),
            });
        };
        match format {
            Format::Fvecs => {
                for (col, chunk) in body.chunks_exact(4).enumerate() {
                    let v = f32::from_le_bytes(chunk.try_into().unwrap());
                    if !v.is_finite() {
                        return Err(Error::InvalidData { row: record, col });
                    }
                    values.push(v as f64);
                }
            }
            Format::Bvecs => values.extend(body.iter().map(|&b| b as f64)),
        }
        offset = body_start + d * width;
        record += 1;
    }
    let data = Matrix::from_vec(record, dim, values)?;
    let meta = DatasetMeta::describe(name, DataSource::File, &data);
    Ok((meta, data))
}

pub fn parse_fvecs(bytes: &[u8], name: &str) -> Result<(DatasetMeta, Matrix)> {
    parse(bytes, Format::Fvecs, name)
}

pub fn parse_bvecs(bytes: &[u8], name: &str) -> Result<(DatasetMeta, Matrix)> {
    parse(bytes, Format::Bvecs, name)
}

fn file_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn read_fvecs(path: impl AsRef<Path>) -> Result<(DatasetMeta, Matrix)> {
    let path = path.as_ref();
    parse_fvecs(&fs::read(path)?, &file_name(path))
}

pub fn read_bvecs(path: impl AsRef<Path>) -> Result<(DatasetMeta, Matrix)> {
    let path = path.as_ref();
    parse_bvecs(&fs::read(path)?, &file_name(path))
}

/// Writes rows as f32 records. Values are narrowed to f32, so only
/// f32-representable data round-trips exactly.
pub fn write_fvecs<W: Write>(mut out: W, data: &Matrix) -> Result<()> {
    if let Some((row, col)) = data.find_non_finite() {
        return Err(Error::InvalidData { row, col });
    }
    let mut buf = Vec::with_capacity(4 + 4 * data.cols());
    for r in data.iter_rows() {
        buf.clear();
        buf.extend_from_slice(&(data.cols() as u32).to_le_bytes());
        for &v in r {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes rows as u8 records; every value must be an integer in `[0, 255]`.
pub fn write_bvecs<W: Write>(mut out: W, data: &Matrix) -> Result<()> {
    let mut buf = Vec::with_capacity(4 + data.cols());
    for (row, r) in data.iter_rows().enumerate() {
        buf.clear();
        buf.extend_from_slice(&(data.cols() as u32).to_le_bytes());
        for (col, &v) in r.iter().enumerate() {
            if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
                return Err(Error::InvalidData { row, col });
            }
            buf.push(v as u8);
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record_f(values: &[f32]) -> Vec<u8> {
        let mut b = (values.len() as u32).to_le_bytes().to_vec();
        for v in values {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    #[test]
    fn single_fvecs_record() {
        let (meta, m) = parse_fvecs(&record_f(&[1.0, 2.0]), "x").unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 2));
        assert_eq!(m.row(0), &[1.0, 2.0]);
        assert_eq!(meta.value_range, (1.0, 2.0));
        assert_eq!(meta.source, DataSource::File);
    }

    #[test]
    fn single_bvecs_record() {
        let mut b = 2u32.to_le_bytes().to_vec();
        b.extend_from_slice(&[0, 255]);
        let (_, m) = parse_bvecs(&b, "x").unwrap();
        assert_eq!(m.row(0), &[0.0, 255.0]);
    }

    #[test]
    fn empty_file() {
        assert!(matches!(parse_fvecs(&[], "x"), Err(Error::EmptyDataset)));
        assert!(matches!(parse_bvecs(&[], "x"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn truncated_record_reports_offset() {
        let mut b = record_f(&[1.0, 2.0]);
        b.extend_from_slice(&record_f(&[3.0, 4.0])[..7]);
        match parse_fvecs(&b, "x") {
            Err(Error::CorruptFile { offset, .. }) => assert_eq!(offset, 12),
            other => panic!("unexpected {other:?}"),
        }
        let b = [2u8, 0];
        assert!(matches!(parse_fvecs(&b, "x"), Err(Error::CorruptFile { offset: 0, .. })));
    }

    #[test]
    fn inconsistent_dimension() {
        let mut b = record_f(&[1.0, 2.0]);
        b.extend_from_slice(&record_f(&[1.0, 2.0]));
        b.extend_from_slice(&record_f(&[3.0]));
        assert!(matches!(
            parse_fvecs(&b, "x"),
            Err(Error::DimensionVaries { record_index: 2 })
        ));
    }

    #[test]
    fn rejects_non_finite_components() {
        let mut b = record_f(&[1.0, 2.0]);
        b.extend_from_slice(&record_f(&[f32::NAN, 2.0]));
        assert!(matches!(parse_fvecs(&b, "x"), Err(Error::InvalidData { row: 1, col: 0 })));
        let m = Matrix::from_rows(&[[f64::INFINITY]]).unwrap();
        assert!(write_fvecs(Vec::new(), &m).is_err());
    }

    #[test]
    fn bvecs_writer_rejects_out_of_range() {
        let m = Matrix::from_rows(&[[0.0, 256.0]]).unwrap();
        assert!(matches!(write_bvecs(Vec::new(), &m), Err(Error::InvalidData { row: 0, col: 1 })));
        let m = Matrix::from_rows(&[[1.5]]).unwrap();
        assert!(write_bvecs(Vec::new(), &m).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.fvecs");
        let m = Matrix::from_rows(&[[0.5, -1.25, 3.0], [7.0, 8.0, 9.0]]).unwrap();
        write_fvecs(std::fs::File::create(&path).unwrap(), &m).unwrap();
        let (meta, back) = read_fvecs(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta.name, "tiny");
        assert_eq!(Format::from_path(&path), Some(Format::Fvecs));
    }
}
