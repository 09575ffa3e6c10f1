// One-versus-one losses on a five-class mixture, ranked, and the
// class-only lower bound obtained by coupling them.

use optloss::bounds::{class_only_bound, optimal_loss, pairwise_binary_losses};
use optloss::data::{gen_gaussian, GaussianConfig};
use optloss::lp::Tolerances;

fn main() {
    let data = gen_gaussian(&GaussianConfig {
        num_classes: 5,
        per_class: 40,
        variance: 0.3,
        seed: 11,
        ..GaussianConfig::default()
    })
    .unwrap();
    let eps = 1.0;
    let a = pairwise_binary_losses(&data, eps, &Tolerances::default()).unwrap();
    println!("pairwise losses at eps = {eps}");
    for row in &a.a {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.3}")).collect();
        println!("  {}", cells.join("  "));
    }
    println!("most confused pairs:");
    for (i, j, l) in a.ranked_pairs().into_iter().take(3) {
        println!("  {}-{}: {l:.4}", a.class_names[i], a.class_names[j]);
    }
    let co = class_only_bound(&a, &data.class_priors()).unwrap();
    let l2 = optimal_loss(&data, eps, 2).unwrap().loss;
    println!("L_co(2) = {co:.4} <= L*(2) = {l2:.4}");
}
