//! Dataset and array file formats.
//!
//! Tabular data is CSV with a header row; `__group__` and `__label__` are
//! reserved column names. Image datasets and saliency maps are NPY v1.0
//! arrays of little-endian float64 in C order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use npyz::{DType, Order, WriterBuilder};

use crate::data::{validate_dataset, Dataset, Instance, Shape};
use crate::error::{Error, Result};

pub const GROUP_COLUMN: &str = "__group__";
pub const LABEL_COLUMN: &str = "__label__";

/// Parses a tabular dataset from CSV text.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut feature_cols = Vec::new();
    let mut group_col = None;
    let mut label_col = None;
    for (i, name) in headers.iter().enumerate() {
        match name {
            GROUP_COLUMN => group_col = Some(i),
            LABEL_COLUMN => label_col = Some(i),
            _ => feature_cols.push(i),
        }
    }
    if feature_cols.is_empty() {
        return Err(Error::InvalidData("CSV has no feature columns".into()));
    }
    let feature_names: Vec<String> =
        feature_cols.iter().map(|&i| headers[i].to_string()).collect();

    let mut instances = Vec::new();
    let mut groups = group_col.map(|_| Vec::new());
    let mut labels = label_col.map(|_| Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let values = feature_cols
            .iter()
            .map(|&i| {
                let cell = record[i].trim();
                cell.parse::<f64>().map_err(|_| {
                    Error::InvalidData(format!(
                        "row {row}, column `{}`: cannot parse `{cell}` as a number",
                        headers[i].trim()
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        instances.push(Instance::new(row, values));
        if let (Some(col), Some(groups)) = (group_col, groups.as_mut()) {
            groups.push(record[col].to_string());
        }
        if let (Some(col), Some(labels)) = (label_col, labels.as_mut()) {
            let cell = record[col].trim();
            let label = cell.parse::<usize>().map_err(|_| {
                Error::InvalidData(format!("row {row}: label `{cell}` is not a non-negative integer"))
            })?;
            labels.push(label);
        }
    }
    validate_dataset(Dataset {
        shape: Shape::Tabular { features: feature_cols.len() },
        instances,
        groups,
        labels,
        feature_names: Some(feature_names),
    })
}

pub fn read_csv_file(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_csv(BufReader::new(file))
}

/// Writes a tabular dataset as CSV. Values use the shortest round-trip
/// decimal representation, so output bytes are deterministic.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    if !matches!(dataset.shape, Shape::Tabular { .. }) {
        return Err(Error::InvalidData("only tabular datasets can be written as CSV".into()));
    }
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = dataset.feature_names();
    if dataset.groups.is_some() {
        header.push(GROUP_COLUMN.into());
    }
    if dataset.labels.is_some() {
        header.push(LABEL_COLUMN.into());
    }
    wtr.write_record(&header)?;
    for (pos, inst) in dataset.instances.iter().enumerate() {
        let mut record: Vec<String> = inst.values.iter().map(|v| v.to_string()).collect();
        if let Some(groups) = &dataset.groups {
            record.push(groups[pos].clone());
        }
        if let Some(labels) = &dataset.labels {
            record.push(labels[pos].to_string());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("csv", e))?;
    Ok(())
}

pub fn write_csv_file(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut out = BufWriter::new(file);
    write_csv(dataset, &mut out)?;
    let file = out.into_inner().map_err(|e| Error::io(path.display().to_string(), e.into_error()))?;
    file.sync_all().map_err(|e| Error::io(path.display().to_string(), e))
}

/// A dense float64 array in C order.
#[derive(Debug, Clone, PartialEq)]
pub struct NdArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl NdArray {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "array of shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(NdArray { shape, data })
    }

    /// Splits along the leading axis.
    pub fn outer(&self) -> impl Iterator<Item = &[f64]> {
        let stride = self.shape.iter().skip(1).product::<usize>().max(1);
        self.data.chunks(stride)
    }
}

pub fn read_npy<R: Read>(reader: R) -> Result<NdArray> {
    let npy = npyz::NpyFile::new(reader).map_err(|e| Error::io("npy header", e))?;
    match npy.dtype() {
        DType::Plain(ty) if ty.to_string() == "<f8" => {}
        other => {
            return Err(Error::InvalidData(format!(
                "expected little-endian float64 array, found dtype {}",
                other.descr()
            )))
        }
    }
    if npy.order() != Order::C {
        return Err(Error::InvalidData("expected C-order array".into()));
    }
    let shape: Vec<usize> = npy.shape().iter().map(|&s| s as usize).collect();
    let data: Vec<f64> = npy.into_vec().map_err(|e| Error::io("npy data", e))?;
    NdArray::new(shape, data)
}

pub fn read_npy_file(path: &Path) -> Result<NdArray> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_npy(BufReader::new(file))
}

pub fn write_npy<W: Write>(array: &NdArray, writer: W) -> Result<()> {
    let shape: Vec<u64> = array.shape.iter().map(|&s| s as u64).collect();
    let mut w = npyz::WriteOptions::<f64>::new()
        .default_dtype()
        .shape(&shape)
        .writer(writer)
        .begin_nd()
        .map_err(|e| Error::io("npy", e))?;
    w.extend(array.data.iter().copied()).map_err(|e| Error::io("npy", e))?;
    w.finish().map_err(|e| Error::io("npy", e))
}

pub fn write_npy_file(array: &NdArray, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut out = BufWriter::new(file);
    write_npy(array, &mut out)?;
    let file = out.into_inner().map_err(|e| Error::io(path.display().to_string(), e.into_error()))?;
    file.sync_all().map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads an `(N, H, W)` array as an image dataset.
pub fn read_image_dataset(path: &Path) -> Result<Dataset> {
    let array = read_npy_file(path)?;
    image_dataset_from_array(&array)
}

pub fn image_dataset_from_array(array: &NdArray) -> Result<Dataset> {
    let [_, height, width] = array.shape[..] else {
        return Err(Error::ShapeMismatch(format!(
            "image dataset must have shape (N,H,W), got {:?}",
            array.shape
        )));
    };
    Dataset::images(height, width, array.outer().map(<[f64]>::to_vec).collect())
}

pub fn image_dataset_to_array(dataset: &Dataset) -> Result<NdArray> {
    let Shape::Image { height, width } = dataset.shape else {
        return Err(Error::InvalidData("not an image dataset".into()));
    };
    let data = dataset.instances.iter().flat_map(|i| i.values.iter().copied()).collect();
    NdArray::new(vec![dataset.len(), height, width], data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_reserved_columns() {
        let text = "a,b,__group__,__label__\n1,2,x,0\n3.5,-4,y,1\n";
        let ds = read_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.instances[1].values, vec![3.5, -4.0]);
        assert_eq!(ds.groups.as_deref(), Some(&["x".to_string(), "y".to_string()][..]));
        assert_eq!(ds.labels, Some(vec![0, 1]));
        assert_eq!(ds.feature_names(), vec!["a", "b"]);
    }

    #[test]
    fn csv_nan_is_an_error() {
        let err = read_csv("a,b\n1,2\n3,NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { instance: 1, index: 1 }));
    }

    #[test]
    fn csv_bad_label() {
        let err = read_csv("a,__label__\n1,-1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidData(_)));
    }

    #[test]
    fn csv_missing_cell_rejected() {
        assert!(read_csv("a,b\n1,\n".as_bytes()).is_err());
    }

    #[test]
    fn npy_is_v1_little_endian_f64() {
        let arr = NdArray::new(vec![2, 1, 3], (0..6).map(f64::from).collect()).unwrap();
        let mut buf = Vec::new();
        write_npy(&arr, &mut buf).unwrap();
        assert_eq!(&buf[..6], b"\x93NUMPY");
        assert_eq!(&buf[6..8], &[1, 0]);
        let header = String::from_utf8_lossy(&buf[10..]);
        assert!(header.contains("'<f8'"));
        assert!(header.contains("'fortran_order': False"));
        assert_eq!(read_npy(buf.as_slice()).unwrap(), arr);
    }

    #[test]
    fn npy_rejects_other_dtypes() {
        let mut buf = Vec::new();
        let mut w = npyz::WriteOptions::<i32>::new()
            .default_dtype()
            .shape(&[2])
            .writer(&mut buf)
            .begin_nd()
            .unwrap();
        w.extend([1, 2]).unwrap();
        w.finish().unwrap();
        assert!(matches!(read_npy(buf.as_slice()), Err(Error::InvalidData(_))));
    }
}
