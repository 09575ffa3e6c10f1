// The Caro-Wei estimate against the exact hard-classifier loss, and the
// empirical mean of the randomized rounding behind the estimate.

use optloss::bounds::{caro_wei_bound, hard_loss_bruteforce, optimal_loss, randomized_independent_set};
use optloss::data::{gen_gaussian, GaussianConfig};

fn main() {
    let data = gen_gaussian(&GaussianConfig {
        num_classes: 2,
        per_class: 12,
        variance: 0.8,
        seed: 5,
        ..GaussianConfig::default()
    })
    .unwrap();
    let eps = 2.6;
    let r = optimal_loss(&data, eps, 2).unwrap();
    let g = &r.graph;
    let masses = g.masses();
    let hard = hard_loss_bruteforce(g, &masses, 30).unwrap();
    println!("L*(2) = {:.4}  L_hard = {:.4}", r.loss, hard.loss);

    for (name, w) in [
        ("ones", vec![1.0; g.num_vertices()]),
        ("q of L*(2)", r.solution.q.clone()),
    ] {
        let bound = caro_wei_bound(g, &w).unwrap();
        let draws = 5000;
        let mean: f64 = (0..draws)
            .map(|seed| {
                let set = randomized_independent_set(g, &w, seed).unwrap();
                1.0 - set.iter().map(|&v| masses[v]).sum::<f64>()
            })
            .sum::<f64>()
            / draws as f64;
        println!("weights {name:<11} L_CW = {bound:.4}  rounding mean loss = {mean:.4}");
    }
}
