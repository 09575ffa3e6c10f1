use std::io::Write;
use std::path::Path;

use super::{LabeledDataset, Normalization, RowMerger};
use crate::error::{Error, Result};

/// Column layout of a dataset CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvSchema {
    pub label_column: usize,
    /// Feature columns; `None` means every column except the label.
    pub feature_columns: Option<Vec<usize>>,
    pub has_header: bool,
}

/// Reads a numeric CSV: one row per sample, an integer label column and
/// real-valued features. Every row gets mass `1/rows`; exact duplicate
/// `(x, y)` rows are merged into one vertex with the summed mass.
pub fn load_csv(path: &Path, schema: &CsvSchema, normalization: Normalization) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let mut merger = RowMerger::new();
    let mut width = None;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    line,
                    format!("ragged row: {} fields, expected {w}", record.len()),
                ));
            }
            _ => {}
        }
        let label_field = record
            .get(schema.label_column)
            .ok_or_else(|| parse_err(line, "missing label column".into()))?;
        let label: i64 = label_field
            .parse()
            .map_err(|_| parse_err(line, format!("label {label_field:?} is not an integer")))?;
        let columns: Vec<usize> = match &schema.feature_columns {
            Some(cols) => cols.clone(),
            None => (0..record.len()).filter(|&c| c != schema.label_column).collect(),
        };
        if columns.is_empty() {
            return Err(parse_err(line, "no feature columns".into()));
        }
        let mut row = Vec::with_capacity(columns.len());
        for c in columns {
            let field = record
                .get(c)
                .ok_or_else(|| parse_err(line, format!("missing column {c}")))?;
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("field {field:?} is not numeric")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value {field:?}")));
            }
            row.push(v);
        }
        if !merger.push(label, row) {
            return Err(parse_err(line, "feature count differs from previous rows".into()));
        }
    }
    merger.finish(normalization, &format!("csv {}", path.display()))
}

/// Writes one row per vertex: class name, then features. Class names must
/// be integers for the file to load back with [`load_csv`].
pub fn write_csv(dataset: &LabeledDataset, out: &mut impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..dataset.len() {
        let mut rec = Vec::with_capacity(dataset.dim() + 1);
        rec.push(dataset.class_names()[dataset.label(i)].clone());
        rec.extend(dataset.point(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn duplicates_are_merged() {
        let f = write_tmp("0,1.0,2.0\n1,3.0,4.0\n0,1.0,2.0\n");
        let d = load_csv(f.path(), &CsvSchema::default(), Normalization::None).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.mass(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.mass(1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn same_point_different_labels_stay_distinct() {
        let f = write_tmp("0,1.0,2.0\n1,1.0,2.0\n");
        let d = load_csv(f.path(), &CsvSchema::default(), Normalization::None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.point(0), d.point(1));
        assert_ne!(d.label(0), d.label(1));
    }

    #[test]
    fn errors_on_ragged_non_numeric_and_empty() {
        let f = write_tmp("0,1.0,2.0\n1,3.0\n");
        assert!(matches!(
            load_csv(f.path(), &CsvSchema::default(), Normalization::None),
            Err(Error::Parse { line: 2, .. })
        ));
        let f = write_tmp("0,1.0,abc\n");
        assert!(matches!(
            load_csv(f.path(), &CsvSchema::default(), Normalization::None),
            Err(Error::Parse { .. })
        ));
        let f = write_tmp("");
        assert!(matches!(
            load_csv(f.path(), &CsvSchema::default(), Normalization::None),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn header_and_normalization() {
        let f = write_tmp("label,a,b\n7,255,0\n3,51,102\n");
        let schema = CsvSchema {
            has_header: true,
            ..CsvSchema::default()
        };
        let d = load_csv(f.path(), &schema, Normalization::DivideBy255).unwrap();
        assert_eq!(d.class_names(), &["3".to_string(), "7".to_string()]);
        assert_eq!(d.label(0), 1);
        assert_eq!(d.point(0), &[1.0, 0.0]);
        assert!((d.point(1)[0] - 0.2).abs() < 1e-15);
        assert!(d.provenance().contains("raw"));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-7, 7.0], vec![1e10, -0.0]];
        let d = LabeledDataset::uniform(rows, vec![0, 1, 1]).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let f = write_tmp(std::str::from_utf8(&buf).unwrap());
        let back = load_csv(f.path(), &CsvSchema::default(), Normalization::None).unwrap();
        assert_eq!(back.labels(), d.labels());
        assert_eq!(back.masses(), d.masses());
        for i in 0..d.len() {
            assert_eq!(back.point(i), d.point(i));
        }
    }
}
