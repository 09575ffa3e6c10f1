//! Finite-support labeled distributions and the loaders that build them.

mod csv_io;
mod gaussian;
mod idx;

pub use csv_io::{load_csv, write_csv, CsvSchema};
pub use gaussian::{gen_gaussian, GaussianConfig};
pub use idx::{load_idx, read_idx_images, read_idx_labels, IdxImages};

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature scaling applied by the loaders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    DivideBy255,
}

impl Normalization {
    fn factor(self) -> f64 {
        match self {
            Normalization::None => 1.0,
            Normalization::DivideBy255 => 1.0 / 255.0,
        }
    }
}

/// A distribution with finite support: `n` points in `R^d`, each with a
/// class label in `[0, K)` and a positive probability mass.
///
/// Points are stored row-major. Vertex order is the order of first
/// appearance in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    points: Vec<f64>,
    labels: Vec<usize>,
    masses: Vec<f64>,
    class_names: Vec<String>,
    provenance: String,
}

const MASS_TOLERANCE: f64 = 1e-9;

impl LabeledDataset {
    /// Builds a dataset from rows, labels and masses. Zero-mass rows are
    /// dropped; masses must otherwise be positive and sum to 1.
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        masses: Vec<f64>,
        class_names: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != masses.len() {
            return Err(Error::InvalidDataset(format!(
                "{} rows, {} labels, {} masses",
                rows.len(),
                labels.len(),
                masses.len()
            )));
        }
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptyDataset)?;
        let mut points = Vec::with_capacity(rows.len() * dim);
        let mut kept_labels = Vec::with_capacity(rows.len());
        let mut kept_masses = Vec::with_capacity(rows.len());
        for (i, ((row, label), mass)) in rows.into_iter().zip(labels).zip(masses).enumerate() {
            if !(mass >= 0.0) || !mass.is_finite() {
                return Err(Error::InvalidDataset(format!("row {i}: invalid mass {mass}")));
            }
            if mass == 0.0 {
                continue;
            }
            if row.len() != dim {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            points.extend(row);
            kept_labels.push(label);
            kept_masses.push(mass);
        }
        Self::from_flat(dim, points, kept_labels, kept_masses, class_names, provenance.into())
    }

    /// Uniform masses `1/n`, class names `"0".."K-1"`.
    pub fn uniform(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let n = rows.len();
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let names = (0..k).map(|c| c.to_string()).collect();
        Self::new(rows, labels, vec![1.0 / n.max(1) as f64; n], names, "in-memory")
    }

    fn from_flat(
        dim: usize,
        points: Vec<f64>,
        labels: Vec<usize>,
        masses: Vec<f64>,
        class_names: Vec<String>,
        provenance: String,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 {
            return Err(Error::InvalidDataset("points must have at least one feature".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite coordinate".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} outside [0, {})",
                class_names.len()
            )));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDataset(format!("masses sum to {total}, expected 1")));
        }
        Ok(LabeledDataset {
            dim,
            points,
            labels,
            masses,
            class_names,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Total mass of each class.
    pub fn class_priors(&self) -> Vec<f64> {
        let mut priors = vec![0.0; self.num_classes()];
        for (&l, &m) in self.labels.iter().zip(&self.masses) {
            priors[l] += m;
        }
        priors
    }

    /// Looks up a class id by name.
    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    /// Restricts to `classes` (by name, new ids in the given order), keeping
    /// the first `per_class_cap` vertices of each class in vertex order.
    /// Masses are renormalized to sum to 1.
    pub fn subset(&self, classes: &[&str], per_class_cap: Option<usize>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidArgument("empty class list".into()));
        }
        let mut remap = HashMap::new();
        for (new_id, name) in classes.iter().enumerate() {
            let old = self
                .class_id(name)
                .ok_or_else(|| Error::ClassAbsent(name.to_string()))?;
            if remap.insert(old, new_id).is_some() {
                return Err(Error::InvalidArgument(format!("class {name} listed twice")));
            }
        }
        let mut taken = vec![0usize; classes.len()];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut masses = Vec::new();
        for i in 0..self.len() {
            let Some(&new) = remap.get(&self.labels[i]) else {
                continue;
            };
            if per_class_cap.is_some_and(|cap| taken[new] >= cap) {
                continue;
            }
            taken[new] += 1;
            rows.push(self.point(i).to_vec());
            labels.push(new);
            masses.push(self.masses[i]);
        }
        if let Some(cap) = per_class_cap {
            for (name, &count) in classes.iter().zip(&taken) {
                if count < cap {
                    log::warn!("class {name}: requested {cap} samples, only {count} available");
                }
            }
        }
        let total: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= total);
        let names = classes.iter().map(|c| c.to_string()).collect();
        let prov = format!(
            "{}; subset classes [{}] cap {}",
            self.provenance,
            classes.join(","),
            per_class_cap.map_or("none".to_string(), |c| c.to_string())
        );
        Self::new(rows, labels, masses, names, prov)
    }

    /// Vertices of the given classes with masses of the conditional
    /// distribution `P | Y ∈ classes`, plus the original indices.
    pub fn conditional_on(&self, classes: &[usize]) -> Option<(Self, Vec<usize>)> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| classes.contains(&self.labels[i])).collect();
        if keep.is_empty() {
            return None;
        }
        let total: f64 = keep.iter().map(|&i| self.masses[i]).sum();
        let mut points = Vec::with_capacity(keep.len() * self.dim);
        for &i in &keep {
            points.extend_from_slice(self.point(i));
        }
        let labels = keep.iter().map(|&i| self.labels[i]).collect();
        let masses = keep.iter().map(|&i| self.masses[i] / total).collect();
        let ds = Self::from_flat(
            self.dim,
            points,
            labels,
            masses,
            self.class_names.clone(),
            self.provenance.clone(),
        )
        .ok()?;
        Some((ds, keep))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DatasetJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DatasetJson = serde_json::from_str(text)?;
        let rows = doc.points;
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidDataset("ragged point rows".into()));
        }
        let points = rows.into_iter().flatten().collect();
        Self::from_flat(dim, points, doc.labels, doc.masses, doc.class_names, doc.provenance)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    masses: Vec<f64>,
    class_names: Vec<String>,
    provenance: String,
}

impl From<&LabeledDataset> for DatasetJson {
    fn from(d: &LabeledDataset) -> Self {
        DatasetJson {
            points: d.points().map(<[f64]>::to_vec).collect(),
            labels: d.labels.clone(),
            masses: d.masses.clone(),
            class_names: d.class_names.clone(),
            provenance: d.provenance.clone(),
        }
    }
}

/// Accumulates raw rows, merging exact duplicate `(x, y)` pairs into one
/// vertex whose mass is the duplicate count.
pub(crate) struct RowMerger {
    dim: Option<usize>,
    index: HashMap<(i64, Vec<u64>), usize>,
    rows: Vec<Vec<f64>>,
    raw_labels: Vec<i64>,
    counts: Vec<usize>,
    total: usize,
    max_abs: f64,
}

impl RowMerger {
    pub(crate) fn new() -> Self {
        RowMerger {
            dim: None,
            index: HashMap::new(),
            rows: Vec::new(),
            raw_labels: Vec::new(),
            counts: Vec::new(),
            total: 0,
            max_abs: 0.0,
        }
    }

    /// Returns `false` on a width mismatch.
    pub(crate) fn push(&mut self, label: i64, row: Vec<f64>) -> bool {
        match self.dim {
            None => self.dim = Some(row.len()),
            Some(d) if d != row.len() => return false,
            _ => {}
        }
        self.total += 1;
        for v in &row {
            self.max_abs = self.max_abs.max(v.abs());
        }
        // +0.0 and -0.0 are the same point.
        let key_bits = row.iter().map(|v| (v + 0.0).to_bits()).collect();
        let next = self.rows.len();
        let slot = *self.index.entry((label, key_bits)).or_insert(next);
        if slot == next {
            self.rows.push(row);
            self.raw_labels.push(label);
            self.counts.push(1);
        } else {
            self.counts[slot] += 1;
        }
        true
    }

    pub(crate) fn finish(self, normalization: Normalization, source: &str) -> Result<LabeledDataset> {
        if self.total == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut distinct: Vec<i64> = self.raw_labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let ids: HashMap<i64, usize> = distinct.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let labels = self.raw_labels.iter().map(|l| ids[l]).collect();
        let names = distinct.iter().map(|l| l.to_string()).collect();
        let n = self.total as f64;
        let masses = self.counts.iter().map(|&c| c as f64 / n).collect();
        let factor = normalization.factor();
        let rows = if factor == 1.0 {
            self.rows
        } else {
            self.rows
                .into_iter()
                .map(|r| r.into_iter().map(|v| v * factor).collect())
                .collect()
        };
        let scale = if self.max_abs > 1.0 {
            "raw (max |x| > 1)"
        } else {
            "unit (max |x| <= 1)"
        };
        let provenance = format!(
            "{source}; {} rows, {} distinct vertices; source scale {scale} (max {}); normalization {:?}",
            self.total,
            self.counts.len(),
            self.max_abs,
            normalization
        );
        LabeledDataset::new(rows, labels, masses, names, provenance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LabeledDataset {
        LabeledDataset::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]],
            vec![0, 1, 0, 2],
            vec![0.25; 4],
            vec!["a".into(), "b".into(), "c".into()],
            "test",
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_masses_and_labels() {
        let r = LabeledDataset::new(vec![vec![0.0]], vec![0], vec![0.5], vec!["x".into()], "t");
        assert!(matches!(r, Err(Error::InvalidDataset(_))));
        let r = LabeledDataset::new(vec![vec![0.0]], vec![1], vec![1.0], vec!["x".into()], "t");
        assert!(matches!(r, Err(Error::InvalidDataset(_))));
        let r = LabeledDataset::new(vec![], vec![], vec![], vec![], "t");
        assert!(matches!(r, Err(Error::EmptyDataset)));
    }

    #[test]
    fn zero_mass_rows_are_dropped() {
        let d = LabeledDataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0, 0, 1],
            vec![0.5, 0.0, 0.5],
            vec!["a".into(), "b".into()],
            "t",
        )
        .unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.point(1), &[2.0]);
    }

    #[test]
    fn subset_caps_and_renormalizes() {
        let d = tiny();
        let s = d.subset(&["c", "a"], Some(1)).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.class_names(), &["c".to_string(), "a".to_string()]);
        assert_eq!(s.labels(), &[1, 0]);
        assert_eq!(s.point(0), &[0.0, 0.0]);
        assert!(s.masses().iter().all(|&m| (m - 0.5).abs() < 1e-15));

        // Cap above class size: whole class is kept.
        let s = d.subset(&["a"], Some(10)).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn subset_errors() {
        let d = tiny();
        assert!(matches!(d.subset(&[], None), Err(Error::InvalidArgument(_))));
        assert!(matches!(d.subset(&["zzz"], None), Err(Error::ClassAbsent(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rows = Vec::new();
        for i in 0..7 {
            rows.push(vec![(i as f64).sqrt() * 0.1, 1.0 / (i as f64 + 3.0), -1e-300]);
        }
        let labels = vec![0, 1, 2, 0, 1, 2, 0];
        let d = LabeledDataset::new(
            rows,
            labels,
            vec![1.0 / 7.0; 7],
            vec!["x".into(), "y".into(), "z".into()],
            "t",
        )
        .unwrap();
        let back = LabeledDataset::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn conditional_renormalizes_pair() {
        let d = tiny();
        let (c, idx) = d.conditional_on(&[0, 2]).unwrap();
        assert_eq!(idx, vec![0, 2, 3]);
        assert!(c.masses().iter().all(|&m| (m - 1.0 / 3.0).abs() < 1e-15));
        assert!(d.conditional_on(&[5]).is_none());
    }
}
