use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::geometry::squared_distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistance {
    pub class: usize,
    pub name: String,
    pub support_points: usize,
    /// Mass-weighted mean distance from a class point to the nearest point
    /// of any other class.
    pub mean_nearest_other: f64,
}

/// Per-class mean ℓ2 distance to the nearest point of another class.
pub fn class_distance_stats(dataset: &LabeledDataset) -> Result<Vec<ClassDistance>> {
    let k = dataset.num_classes();
    if k < 2 {
        return Err(Error::InvalidArgument(
            "distance statistics need at least two classes".into(),
        ));
    }
    let nearest: Vec<f64> = (0..dataset.len())
        .into_par_iter()
        .map(|v| {
            let x = dataset.point(v);
            let y = dataset.label(v);
            (0..dataset.len())
                .filter(|&u| dataset.label(u) != y)
                .map(|u| squared_distance(x, dataset.point(u)))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    let mut sum = vec![0.0; k];
    let mut mass = vec![0.0; k];
    let mut count = vec![0; k];
    for v in 0..dataset.len() {
        let y = dataset.label(v);
        sum[y] += dataset.mass(v) * nearest[v];
        mass[y] += dataset.mass(v);
        count[y] += 1;
    }
    Ok((0..k)
        .map(|c| ClassDistance {
            class: c,
            name: dataset.class_names()[c].clone(),
            support_points: count[c],
            mean_nearest_other: if mass[c] > 0.0 { sum[c] / mass[c] } else { f64::NAN },
        })
        .collect())
}
