//! Dataset ingestion: RFC-4180-style CSV with a declared schema, and the
//! big-endian IDX image/label format.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// How one CSV feature column is encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    /// Parsed as f64, then min-max scaled to [0, 1] over the loaded file
    /// (the file is treated as the training split for scaling purposes).
    Numeric,
    /// One-hot encoded; values outside `levels` are a parse error.
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvColumn {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

/// Declares which CSV columns become features and how labels are encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    /// Class names in index order; the label cell must match one of these.
    pub label_levels: Vec<String>,
    pub columns: Vec<CsvColumn>,
}

impl CsvSchema {
    /// Feature width after one-hot expansion.
    pub fn feature_dim(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.kind {
                ColumnKind::Numeric => 1,
                ColumnKind::Categorical { levels } => levels.len(),
            })
            .sum()
    }
}

/// Loads a header-first CSV into a [`Dataset`] per the schema.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let display = path.display().to_string();
    if schema.label_levels.len() < 2 {
        return Err(Error::config("label_levels must name at least two classes"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::parse(&display, "open", e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(&display, "header", e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(Error::parse(&display, "header", "empty file"));
    }
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(&display, "header", format!("missing column '{name}'")))
    };
    let label_idx = col_index(&schema.label_column)?;
    let feature_idx: Vec<usize> = schema
        .columns
        .iter()
        .map(|c| col_index(&c.name))
        .collect::<Result<_>>()?;

    let fdim = schema.feature_dim();
    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut numeric_slots: Vec<usize> = Vec::new();

    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 2; // header is line 1
        let record = record.map_err(|e| Error::parse(&display, format!("line {line}"), e.to_string()))?;
        let row_base = features.len();
        for (col, idx) in schema.columns.iter().zip(&feature_idx) {
            let cell = record.get(*idx).ok_or_else(|| {
                Error::parse(&display, format!("line {line}"), format!("missing field '{}'", col.name))
            })?;
            match &col.kind {
                ColumnKind::Numeric => {
                    let v: f64 = cell.trim().parse().map_err(|_| {
                        Error::parse(
                            &display,
                            format!("line {line}"),
                            format!("column '{}': '{cell}' is not numeric", col.name),
                        )
                    })?;
                    if row_no == 0 {
                        numeric_slots.push(features.len() - row_base);
                    }
                    features.push(v);
                }
                ColumnKind::Categorical { levels } => {
                    let pos = levels.iter().position(|l| l == cell.trim()).ok_or_else(|| {
                        Error::parse(
                            &display,
                            format!("line {line}"),
                            format!("column '{}': unknown category '{cell}'", col.name),
                        )
                    })?;
                    for k in 0..levels.len() {
                        features.push(if k == pos { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        let label_cell = record.get(label_idx).ok_or_else(|| {
            Error::parse(&display, format!("line {line}"), "missing label field")
        })?;
        let label = schema
            .label_levels
            .iter()
            .position(|l| l == label_cell.trim())
            .ok_or_else(|| {
                Error::parse(
                    &display,
                    format!("line {line}"),
                    format!("unknown label '{label_cell}'"),
                )
            })?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::parse(&display, "body", "empty file"));
    }

    min_max_scale(&mut features, fdim, &numeric_slots);
    Dataset::new(features, fdim, labels, schema.label_levels.len())
}

/// Scales the listed feature slots to [0, 1] in place. Constant columns
/// collapse to 0.
fn min_max_scale(features: &mut [f64], fdim: usize, slots: &[usize]) {
    let rows = features.len() / fdim;
    for &slot in slots {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..rows {
            let v = features[r * fdim + slot];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = hi - lo;
        for r in 0..rows {
            let v = &mut features[r * fdim + slot];
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32_be(reader: &mut impl Read, path: &str, offset: &mut usize) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|e| Error::parse(path, format!("offset {offset}"), e.to_string()))?;
    *offset += 4;
    Ok(u32::from_be_bytes(buf))
}

/// Loads an IDX image/label pair (the MNIST container format). Pixels are
/// scaled to [0, 1]; the class count is the largest label plus one.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let img_display = images_path.display().to_string();
    let lbl_display = labels_path.display().to_string();

    let mut img = BufReader::new(File::open(images_path)?);
    let mut offset = 0usize;
    let magic = read_u32_be(&mut img, &img_display, &mut offset)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::parse(
            &img_display,
            "offset 0",
            format!("bad image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"),
        ));
    }
    let count = read_u32_be(&mut img, &img_display, &mut offset)? as usize;
    let rows = read_u32_be(&mut img, &img_display, &mut offset)? as usize;
    let cols = read_u32_be(&mut img, &img_display, &mut offset)? as usize;
    let fdim = rows * cols;
    if fdim == 0 || count == 0 {
        return Err(Error::parse(&img_display, "header", "zero-sized image file"));
    }
    let mut pixels = vec![0u8; count * fdim];
    img.read_exact(&mut pixels)
        .map_err(|e| Error::parse(&img_display, format!("offset {offset}"), e.to_string()))?;

    let mut lbl = BufReader::new(File::open(labels_path)?);
    let mut loffset = 0usize;
    let magic = read_u32_be(&mut lbl, &lbl_display, &mut loffset)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::parse(
            &lbl_display,
            "offset 0",
            format!("bad label magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"),
        ));
    }
    let lcount = read_u32_be(&mut lbl, &lbl_display, &mut loffset)? as usize;
    if lcount != count {
        return Err(Error::parse(
            &lbl_display,
            "header",
            format!("{lcount} labels for {count} images"),
        ));
    }
    let mut raw_labels = vec![0u8; lcount];
    lbl.read_exact(&mut raw_labels)
        .map_err(|e| Error::parse(&lbl_display, format!("offset {loffset}"), e.to_string()))?;

    let features: Vec<f64> = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&l| l as usize).collect();
    let num_classes = labels.iter().max().copied().unwrap_or(0) + 1;
    Dataset::new(features, fdim, labels, num_classes)
}
