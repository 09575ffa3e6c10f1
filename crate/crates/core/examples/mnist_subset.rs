//! Optimal loss on an MNIST class subset.
//!
//!     cargo run --release --example mnist_subset -- /path/to/mnist 3.0
//!
//! The directory must hold `train-images-idx3-ubyte` and
//! `train-labels-idx1-ubyte`. Pixels are divided by 255.

use std::path::PathBuf;

use optloss::bounds::{class_distance_stats, optimal_loss};
use optloss::data::{load_idx, Normalization};

fn main() {
    let mut args = std::env::args().skip(1);
    let Some(dir) = args.next().map(PathBuf::from) else {
        eprintln!("usage: mnist_subset <mnist-dir> [eps]");
        return;
    };
    let eps: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3.0);
    let images = dir.join("train-images-idx3-ubyte");
    if !images.exists() {
        eprintln!("{} not found, nothing to do", images.display());
        return;
    }
    let all = load_idx(
        &images,
        &dir.join("train-labels-idx1-ubyte"),
        Normalization::DivideBy255,
    )
    .unwrap();
    let sub = all.subset(&["1", "4", "7"], Some(1000)).unwrap();
    for s in class_distance_stats(&sub).unwrap() {
        println!(
            "class {} mean distance to nearest other class {:.3}",
            s.name, s.mean_nearest_other
        );
    }
    let r = optimal_loss(&sub, eps, 3).unwrap();
    println!("eps {eps}: edges {:?}, L*(3) = {:.4}", r.graph.edge_counts(), r.loss);
}
