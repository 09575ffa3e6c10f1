//! Reads the optimal adversary and a matching soft classifier off one LP
//! solve, then checks that they meet at the optimal loss.

use optloss::bounds::{
    build_hypergraph, extract_strategy, solve_graph, strategy_loss, SoftClassifierTable, SolveOptions,
};
use optloss::data::{gen_gaussian, GaussianConfig};

fn main() {
    let data = gen_gaussian(&GaussianConfig {
        per_class: 15,
        variance: 0.4,
        seed: 3,
        ..GaussianConfig::default()
    })
    .unwrap();
    let eps = 2.2;
    let graph = build_hypergraph(&data, eps, 3).unwrap();
    let opts = SolveOptions::default();
    let (lp, sol) = solve_graph(&graph, &opts).unwrap();
    let strategy = extract_strategy(&lp, &sol, &data, opts.tolerances.feasibility_abs).unwrap();
    let table = SoftClassifierTable::new(data.clone(), sol.q.clone(), eps).unwrap();

    println!("edges by degree: {:?}", graph.edge_counts());
    println!("optimal loss      {:.6}", sol.loss());
    println!("strategy achieves {:.6}", strategy_loss(&strategy, &table).unwrap());
    println!("over-covered vertices: {}", strategy.num_over_covered());

    for vs in strategy.vertices.iter().filter(|v| v.moves.len() > 1).take(3) {
        println!("vertex {} (class {}, q = {:.3})", vs.vertex, vs.label, vs.q);
        for m in vs.moves.iter().filter(|m| m.probability > 1e-9) {
            let h = table.evaluate(&m.witness, None).unwrap();
            println!(
                "  p = {:.3} move to {:.3?} with {:?}; classifier there {:.3?}",
                m.probability, m.witness, m.members, h
            );
        }
    }
}
