// Three points of different classes at the corners of an equilateral
// triangle. With side 1.9 and ε = 1 every pair conflicts but the three
// ε-balls have no common point; with side 1.5 they do, and the adversary
// can confuse all three at once.

use optloss::bounds::optimal_loss;
use optloss::data::LabeledDataset;

fn triangle(side: f64, masses: [f64; 3]) -> LabeledDataset {
    let h = side * 3f64.sqrt() / 2.0;
    LabeledDataset::new(
        vec![vec![0.0, 0.0], vec![side, 0.0], vec![side / 2.0, h]],
        vec![0, 1, 2],
        masses.to_vec(),
        vec!["u".into(), "v".into(), "w".into()],
        "triangle",
    )
    .unwrap()
}

fn main() {
    let eps = 1.0;
    println!(
        "{:<8} {:<16} {:>10} {:>10} {:>10}",
        "config", "masses", "edges", "correct", "loss"
    );
    for (name, side) in [("pairs", 1.9), ("triple", 1.5)] {
        for masses in [[1.0 / 3.0; 3], [0.6, 0.2, 0.2], [0.45, 0.35, 0.2]] {
            let r = optimal_loss(&triangle(side, masses), eps, 3).unwrap();
            let counts: Vec<String> = r.graph.edge_counts().iter().map(|(k, n)| format!("{k}:{n}")).collect();
            println!(
                "{name:<8} {:<16} {:>10} {:>10.4} {:>10.4}",
                format!("{:.2}/{:.2}/{:.2}", masses[0], masses[1], masses[2]),
                counts.join(","),
                r.solution.objective,
                r.loss
            );
            println!("         q = {:.3?}", r.solution.q);
        }
    }
}
