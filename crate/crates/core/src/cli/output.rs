//! Report serialization and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::{BoundReport, ClassDistance, PairwiseLossMatrix, HISTOGRAM_BINS, REPORT_SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Column order of the bound CSV. Changing it requires bumping
/// [`REPORT_SCHEMA_VERSION`].
pub const BOUND_CSV_HEADER: [&str; 7] = [
    "schema_version",
    "epsilon",
    "bound",
    "value",
    "runtime_seconds",
    "edge_counts",
    "boundary_tight",
];

pub const HISTOGRAM_CSV_HEADER: [&str; 6] = ["schema_version", "epsilon", "m", "bin_lower", "bin_upper", "count"];

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn edge_count_field(r: &BoundReport) -> String {
    r.edge_counts
        .iter()
        .map(|(k, n)| format!("{k}:{n}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Rows of the bound CSV for one report, in a fixed order: `l_star_m` for
/// each m, then `class_only_2`, `caro_wei`, `hard_bruteforce`.
pub fn bound_rows(r: &BoundReport) -> Vec<[String; 7]> {
    let edges = edge_count_field(r);
    let rt = |key: &str| r.runtimes.get(key).map_or(String::new(), |s| s.to_string());
    let row = |name: String, value: f64, runtime: String| {
        [
            REPORT_SCHEMA_VERSION.to_string(),
            r.epsilon.to_string(),
            name,
            value.to_string(),
            runtime,
            edges.clone(),
            r.boundary_tight.to_string(),
        ]
    };
    let mut rows: Vec<[String; 7]> = r
        .l_star
        .iter()
        .map(|(m, &l)| row(format!("l_star_{m}"), l, rt(&format!("lp_m{m}"))))
        .collect();
    rows.push(row("class_only_2".into(), r.class_only_2, rt("class_only")));
    rows.push(row("caro_wei".into(), r.caro_wei, rt("caro_wei")));
    if let Some(h) = r.hard_bruteforce {
        rows.push(row("hard_bruteforce".into(), h, rt("hard_bruteforce")));
    }
    rows
}

pub fn bound_csv(reports: &[BoundReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BOUND_CSV_HEADER)?;
    for r in reports {
        for row in bound_rows(r) {
            w.write_record(&row)?;
        }
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn histogram_csv(reports: &[BoundReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HISTOGRAM_CSV_HEADER)?;
    let width = 1.0 / HISTOGRAM_BINS as f64;
    for r in reports {
        for (m, s) in &r.solves {
            for (b, count) in s.q_histogram.iter().enumerate() {
                w.write_record([
                    REPORT_SCHEMA_VERSION.to_string(),
                    r.epsilon.to_string(),
                    m.to_string(),
                    (b as f64 * width).to_string(),
                    ((b + 1) as f64 * width).to_string(),
                    count.to_string(),
                ])?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Heat-map layout: header `class,<names…>`, one row per class.
pub fn pairwise_csv(a: &PairwiseLossMatrix) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["class".to_string()];
    header.extend(a.class_names.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in a.class_names.iter().zip(&a.a) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn stats_csv(stats: &[ClassDistance]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["class", "name", "support_points", "mean_nearest_other"])?;
    for s in stats {
        w.write_record([
            s.class.to_string(),
            s.name.clone(),
            s.support_points.to_string(),
            s.mean_nearest_other.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// `vertex,label,mass,q` for every vertex.
pub fn q_csv(labels: &[usize], masses: &[f64], q: &[f64]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["vertex", "label", "mass", "q"])?;
    for (v, ((l, m), x)) in labels.iter().zip(masses).zip(q).enumerate() {
        w.write_record([v.to_string(), l.to_string(), m.to_string(), x.to_string()])?;
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))
}
