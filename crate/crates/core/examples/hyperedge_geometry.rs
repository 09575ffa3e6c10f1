//! Minimum enclosing balls decide which groups of points an ℓ2 adversary
//! can merge. Prints the ball of a few point sets and whether the
//! ε-neighbourhoods intersect.

use optloss::geometry::{min_enclosing_ball, neighborhoods_intersect};

fn main() {
    let sets: Vec<(&str, Vec<Vec<f64>>)> = vec![
        ("segment", vec![vec![0.0, 0.0], vec![2.0, 0.0]]),
        ("right triangle", vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]),
        ("obtuse triangle", vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]]),
        (
            "simplex in R^4",
            vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ],
        ),
    ];
    let eps = 1.2;
    for (name, pts) in &sets {
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let ball = min_enclosing_ball(&refs).unwrap();
        let test = neighborhoods_intersect(&refs, eps).unwrap();
        println!("{name}");
        println!("  center {:.4?}  radius {:.6}", ball.center, ball.radius);
        println!("  support weights {:.3?}", ball.support_weights);
        match test.witness() {
            Some(w) => println!("  eps = {eps}: common point {w:.4?}"),
            None => println!("  eps = {eps}: no common point"),
        }
    }
}
