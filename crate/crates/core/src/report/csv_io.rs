use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::ReportError;
use crate::types::{LabeledDataset, Matrix, PairedSamples};

struct Table {
    header: Option<Vec<String>>,
    rows: Vec<StringRecord>,
}

fn read_table(path: &Path, has_header: bool) -> Result<Table, ReportError> {
    let file = std::fs::File::open(path).map_err(|e| ReportError::io(path, e))?;
    let mut rdr = ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let csv_err = |e: csv::Error| ReportError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let header = if has_header {
        Some(rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect())
    } else {
        None
    };
    let rows = rdr
        .records()
        .filter(|r| !matches!(r, Ok(rec) if rec.len() == 1 && rec[0].is_empty()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(csv_err)?;
    if rows.is_empty() {
        return Err(ReportError::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    Ok(Table { header, rows })
}

fn parse_cell(path: &Path, cell: &str, row: usize, column: &str) -> Result<f64, ReportError> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| ReportError::NonNumericCell {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        value: cell.to_string(),
    })
}

fn check_width(path: &Path, rec: &StringRecord, row: usize, expected: usize) -> Result<(), ReportError> {
    if rec.len() != expected {
        return Err(ReportError::RaggedRow {
            path: path.to_path_buf(),
            row,
            expected,
            found: rec.len(),
        });
    }
    Ok(())
}

/// Reads a labelled dataset. The header must contain a `label` column; every
/// other column is a real feature, kept in header order. Row numbers in
/// errors count data rows from 1.
pub fn load_labeled_csv(path: &Path) -> Result<LabeledDataset, ReportError> {
    let t = read_table(path, true)?;
    let header = t.header.expect("read with header");
    let label_col = header.iter().position(|h| h == "label").ok_or_else(|| ReportError::MissingLabelColumn {
        path: path.to_path_buf(),
    })?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != label_col)
        .map(|(_, h)| h.clone())
        .collect();
    let mut labels = Vec::with_capacity(t.rows.len());
    let mut rows = Vec::with_capacity(t.rows.len());
    for (i, rec) in t.rows.iter().enumerate() {
        let row = i + 1;
        check_width(path, rec, row, header.len())?;
        labels.push(rec[label_col].to_string());
        let mut feats = Vec::with_capacity(names.len());
        for (j, cell) in rec.iter().enumerate() {
            if j != label_col {
                feats.push(parse_cell(path, cell, row, &header[j])?);
            }
        }
        rows.push(feats);
    }
    Ok(LabeledDataset::from_labels(&labels, Matrix::from_rows(&rows)?, names)?)
}

fn load_numeric_with_header(path: &Path) -> Result<Vec<Vec<f64>>, ReportError> {
    let t = read_table(path, true)?;
    let header = t.header.expect("read with header");
    t.rows
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            check_width(path, rec, i + 1, header.len())?;
            rec.iter()
                .enumerate()
                .map(|(j, c)| parse_cell(path, c, i + 1, &header[j]))
                .collect()
        })
        .collect()
}

/// Reads `X` and `Y` from two headed numeric CSV files with equal row counts.
pub fn load_paired_csv(path_x: &Path, path_y: &Path) -> Result<PairedSamples, ReportError> {
    let x = load_numeric_with_header(path_x)?;
    let y = load_numeric_with_header(path_y)?;
    if x.len() != y.len() {
        return Err(ReportError::RowCountMismatch { x: x.len(), y: y.len() });
    }
    Ok(PairedSamples::from_rows(&x, &y)?)
}

/// Reads a headerless numeric matrix (e.g. subcarriers × time).
pub fn load_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>, ReportError> {
    let t = read_table(path, false)?;
    let width = t.rows[0].len();
    t.rows
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            check_width(path, rec, i + 1, width)?;
            rec.iter()
                .enumerate()
                .map(|(j, c)| parse_cell(path, c, i + 1, &(j + 1).to_string()))
                .collect()
        })
        .collect()
}

/// Reads one numeric column, with or without a header line.
pub fn load_series_csv(path: &Path) -> Result<Vec<f64>, ReportError> {
    let t = read_table(path, false)?;
    let skip = usize::from(t.rows[0].get(0).is_some_and(|c| c.parse::<f64>().is_err()));
    let name = if skip == 1 { t.rows[0][0].to_string() } else { "1".to_string() };
    let out: Vec<f64> = t.rows[skip..]
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            check_width(path, rec, i + 1, 1)?;
            parse_cell(path, &rec[0], i + 1, &name)
        })
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(ReportError::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    Ok(out)
}

/// Writes a dataset in the format read by [`load_labeled_csv`].
pub fn write_labeled_csv(dataset: &LabeledDataset, path: &Path) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| ReportError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let wrap = |e: csv::Error| ReportError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut header = vec!["label".to_string()];
    header.extend(dataset.feature_names().iter().cloned());
    w.write_record(&header).map_err(wrap)?;
    for (l, row) in dataset.labels().iter().zip(dataset.features().iter_rows()) {
        let mut rec = vec![dataset.space().labels()[*l].clone()];
        rec.extend(row.iter().map(|v| format!("{v:e}")));
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| ReportError::io(path, e))
}
