//! Exact Euclidean primitives for deciding whether closed ε-balls around a
//! set of points share a common point.
//!
//! The balls `B(x_1, ε), …, B(x_n, ε)` intersect iff the minimum enclosing
//! ball of `x_1, …, x_n` has radius at most ε; its center is then a point in
//! every ball. The primary route works purely on the squared-distance
//! matrix `D`: the circumcenter of the points inside their affine hull has
//! affine weights `α = D⁻¹1 / (1ᵀD⁻¹1)` and radius `1/√(2·1ᵀD⁻¹1)`. When some
//! weight is negative the circumsphere of the positively weighted points is
//! tried instead. Anything that route cannot settle (singular `D`, or a
//! candidate that fails to enclose every point) goes through a move-to-front
//! Welzl search.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative slack applied when comparing a radius against ε.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

/// Distance matrices with a larger 2-norm condition number are treated as
/// singular.
pub const CONDITION_LIMIT: f64 = 1e12;

const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no points given")]
    Empty,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("points must have dimension at least 1")]
    ZeroDimension,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("squared-distance matrix is singular or ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("epsilon must be finite and non-negative, got {0}")]
    InvalidEpsilon(f64),
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

/// Closed-ball test for a pair: `‖x_u − x_v‖ ≤ 2ε` with the module tolerance.
pub fn pair_within(squared_dist: f64, epsilon: f64) -> bool {
    let reach = 2.0 * epsilon * (1.0 + RELATIVE_TOLERANCE);
    squared_dist <= reach * reach
}

/// `radius ≤ ε` with the module tolerance.
pub fn radius_within(radius: f64, epsilon: f64) -> bool {
    radius <= epsilon * (1.0 + RELATIVE_TOLERANCE)
}

/// Symmetric, zero-diagonal matrix of pairwise squared distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix(DMatrix<f64>);

impl SquaredDistanceMatrix {
    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Principal submatrix on `rows` (in the given order).
    pub fn select(&self, rows: &[usize]) -> SquaredDistanceMatrix {
        let n = rows.len();
        SquaredDistanceMatrix(DMatrix::from_fn(n, n, |i, j| self.0[(rows[i], rows[j])]))
    }
}

fn validate(points: &[&[f64]]) -> Result<usize, GeometryError> {
    let first = points.first().ok_or(GeometryError::Empty)?;
    let dim = first.len();
    if dim == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch {
                index,
                expected: dim,
                found: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
    }
    Ok(dim)
}

pub fn squared_distance_matrix(points: &[&[f64]]) -> Result<SquaredDistanceMatrix, GeometryError> {
    validate(points)?;
    Ok(distance_matrix_unchecked(points))
}

fn distance_matrix_unchecked(points: &[&[f64]]) -> SquaredDistanceMatrix {
    let n = points.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = squared_distance(points[i], points[j]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    SquaredDistanceMatrix(d)
}

/// Circumsphere of a point set within its affine hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Circumsphere {
    pub radius: f64,
    /// Affine weights of the circumcenter; they sum to 1.
    pub alpha: Vec<f64>,
}

/// Circumradius `1/√(2·1ᵀD⁻¹1)` and circumcenter weights `α ∝ D⁻¹1`.
///
/// Fails with [`GeometryError::IllConditioned`] when `D` is singular or its
/// condition number exceeds [`CONDITION_LIMIT`]; callers fall back to
/// [`min_enclosing_ball`] in that case.
pub fn circumradius(d: &SquaredDistanceMatrix) -> Result<Circumsphere, GeometryError> {
    let n = d.len();
    if n == 0 {
        return Err(GeometryError::Empty);
    }
    let svd = d.0.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    let condition = if min_sv > 0.0 { max_sv / min_sv } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(GeometryError::IllConditioned { condition });
    }
    let ones = DVector::from_element(n, 1.0);
    let u = svd
        .solve(&ones, 0.0)
        .map_err(|_| GeometryError::IllConditioned { condition })?;
    let total: f64 = u.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(GeometryError::IllConditioned { condition });
    }
    Ok(Circumsphere {
        radius: (1.0 / (2.0 * total)).sqrt(),
        alpha: u.iter().map(|v| v / total).collect(),
    })
}

/// Smallest closed ball containing a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct BallWitness {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Convex weights over the input points; `center = Σ_i w_i x_i`, with
    /// non-zero entries only on points lying on the boundary sphere.
    pub support_weights: Vec<f64>,
}

fn combine(points: &[&[f64]], idx: &[usize], weights: &[f64]) -> Vec<f64> {
    let dim = points[idx[0]].len();
    let mut c = vec![0.0; dim];
    for (&i, &w) in idx.iter().zip(weights) {
        for (ck, xk) in c.iter_mut().zip(points[i]) {
            *ck += w * xk;
        }
    }
    c
}

fn max_distance(points: &[&[f64]], idx: &[usize], center: &[f64]) -> f64 {
    idx.iter()
        .map(|&i| squared_distance(points[i], center))
        .fold(0.0, f64::max)
        .sqrt()
}

/// Indices of the first occurrence of each distinct point.
fn distinct_indices(points: &[&[f64]]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if !out.iter().any(|&j| points[j] == *p) {
            out.push(i);
        }
    }
    out
}

pub fn min_enclosing_ball(points: &[&[f64]]) -> Result<BallWitness, GeometryError> {
    validate(points)?;
    let n = points.len();
    let unique = distinct_indices(points);
    let ball = if unique.len() == 1 {
        let mut w = vec![0.0; n];
        w[unique[0]] = 1.0;
        BallWitness {
            center: points[unique[0]].to_vec(),
            radius: 0.0,
            support_weights: w,
        }
    } else if unique.len() == 2 {
        let (a, b) = (unique[0], unique[1]);
        let mut w = vec![0.0; n];
        w[a] = 0.5;
        w[b] = 0.5;
        let center = combine(points, &[a, b], &[0.5, 0.5]);
        let radius = max_distance(points, &unique, &center);
        BallWitness {
            center,
            radius,
            support_weights: w,
        }
    } else {
        match positive_support_ball(points, &unique) {
            Some(ball) => ball,
            None => welzl_ball(points, &unique),
        }
    };
    Ok(ball)
}

/// Circumsphere of the positively weighted subset, repeated until all
/// weights are non-negative. Returns `None` when `D` is ill-conditioned or
/// the resulting ball misses one of the points.
fn positive_support_ball(points: &[&[f64]], unique: &[usize]) -> Option<BallWitness> {
    let sub: Vec<&[f64]> = unique.iter().map(|&i| points[i]).collect();
    let full = distance_matrix_unchecked(&sub);
    let mut support: Vec<usize> = (0..unique.len()).collect();
    loop {
        if support.len() == 1 {
            return None;
        }
        let sphere = circumradius(&full.select(&support)).ok()?;
        if sphere.alpha.iter().all(|&a| a >= -WEIGHT_TOLERANCE) {
            let weights: Vec<f64> = sphere.alpha.iter().map(|a| a.max(0.0)).collect();
            let total: f64 = weights.iter().sum();
            let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let orig: Vec<usize> = support.iter().map(|&s| unique[s]).collect();
            let center = combine(points, &orig, &weights);
            let support_radius = max_distance(points, &orig, &center);
            let radius = max_distance(points, unique, &center);
            if radius > support_radius * (1.0 + 1e-10) + f64::MIN_POSITIVE {
                return None;
            }
            let mut w = vec![0.0; points.len()];
            for (&i, &a) in orig.iter().zip(&weights) {
                w[i] = a;
            }
            return Some(BallWitness {
                center,
                radius,
                support_weights: w,
            });
        }
        support = support
            .iter()
            .zip(&sphere.alpha)
            .filter(|(_, &a)| a > 0.0)
            .map(|(&s, _)| s)
            .collect();
    }
}

struct Ball {
    center: Vec<f64>,
    radius_sq: f64,
}

impl Ball {
    fn contains(&self, p: &[f64]) -> bool {
        self.radius_sq >= 0.0 && squared_distance(p, &self.center) <= self.radius_sq * (1.0 + 1e-10) + 1e-300
    }
}

/// Affine weights of the circumcenter of `idx` from the bordered system
/// `[D 1; 1ᵀ 0][α; λ] = [0; 1]`, solved in the least-squares sense so that
/// affinely dependent (but cospherical) boundary sets still resolve.
fn bordered_weights(points: &[&[f64]], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    let sub: Vec<&[f64]> = idx.iter().map(|&i| points[i]).collect();
    let d = distance_matrix_unchecked(&sub);
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = d.0[(i, j)];
        }
        m[(i, k)] = 1.0;
        m[(k, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let svd = m.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-13;
    match svd.solve(&rhs, cutoff) {
        Ok(sol) => sol.iter().take(k).copied().collect(),
        Err(_) => vec![1.0 / k as f64; k],
    }
}

fn ball_from_boundary(points: &[&[f64]], boundary: &[usize]) -> Ball {
    match boundary.len() {
        0 => Ball {
            center: Vec::new(),
            radius_sq: -1.0,
        },
        1 => Ball {
            center: points[boundary[0]].to_vec(),
            radius_sq: 0.0,
        },
        _ => {
            let alpha = bordered_weights(points, boundary);
            let center = combine(points, boundary, &alpha);
            let radius_sq = boundary
                .iter()
                .map(|&i| squared_distance(points[i], &center))
                .fold(0.0, f64::max);
            Ball { center, radius_sq }
        }
    }
}

fn welzl_recurse(points: &[&[f64]], order: &mut [usize], n: usize, boundary: &mut Vec<usize>) -> Ball {
    let mut ball = ball_from_boundary(points, boundary);
    for i in 0..n {
        let p = order[i];
        if !ball.contains(points[p]) {
            boundary.push(p);
            ball = welzl_recurse(points, order, i, boundary);
            boundary.pop();
            order[..=i].rotate_right(1);
        }
    }
    ball
}

fn welzl_ball(points: &[&[f64]], unique: &[usize]) -> BallWitness {
    let mut order = unique.to_vec();
    let mut boundary = Vec::new();
    let len = order.len();
    let ball = welzl_recurse(points, &mut order, len, &mut boundary);
    let radius = ball.radius_sq.max(0.0).sqrt();

    // Express the center as a convex combination of boundary points.
    let tol = radius * 1e-7 + 1e-12;
    let on_sphere: Vec<usize> = unique
        .iter()
        .copied()
        .filter(|&i| squared_distance(points[i], &ball.center).sqrt() >= radius - tol)
        .collect();
    let (idx, weights) = convex_support(points, &on_sphere, &ball.center, radius)
        .unwrap_or_else(|| (on_sphere.clone(), vec![1.0 / on_sphere.len() as f64; on_sphere.len()]));
    let (center, weights) = {
        let c = combine(points, &idx, &weights);
        if squared_distance(&c, &ball.center).sqrt() <= radius * 1e-9 + 1e-12 {
            (c, weights)
        } else {
            // Numerical corner: keep the Welzl center, report the best weights found.
            (ball.center.clone(), weights)
        }
    };
    let radius = max_distance(points, unique, &center);
    let mut w = vec![0.0; points.len()];
    for (&i, &a) in idx.iter().zip(&weights) {
        w[i] = a;
    }
    BallWitness {
        center,
        radius,
        support_weights: w,
    }
}

/// Smallest subset of `candidates` whose circumcenter matches `center` with
/// non-negative weights.
fn convex_support(
    points: &[&[f64]],
    candidates: &[usize],
    center: &[f64],
    radius: f64,
) -> Option<(Vec<usize>, Vec<f64>)> {
    let k = candidates.len();
    if k == 0 || k > 16 {
        return None;
    }
    let mut masks: Vec<u32> = (1..(1u32 << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let idx: Vec<usize> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| candidates[b]).collect();
        let alpha = if idx.len() == 1 {
            vec![1.0]
        } else {
            bordered_weights(points, &idx)
        };
        if alpha.iter().any(|&a| a < -WEIGHT_TOLERANCE) {
            continue;
        }
        let alpha: Vec<f64> = alpha.iter().map(|a| a.max(0.0)).collect();
        let total: f64 = alpha.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        let alpha: Vec<f64> = alpha.iter().map(|a| a / total).collect();
        let c = combine(points, &idx, &alpha);
        if squared_distance(&c, center).sqrt() <= radius * 1e-9 + 1e-12 {
            return Some((idx, alpha));
        }
    }
    None
}

/// Outcome of the common-point test for a set of ε-balls.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodTest {
    pub intersects: bool,
    pub ball: BallWitness,
    /// Radius within the tolerance band around ε, where closed and open
    /// balls would disagree.
    pub boundary_tight: bool,
}

impl NeighborhoodTest {
    /// A point inside every ball, when one exists.
    pub fn witness(&self) -> Option<&[f64]> {
        self.intersects.then_some(self.ball.center.as_slice())
    }
}

/// Do the closed balls `{x' : ‖x' − x_i‖ ≤ ε}` share a common point?
pub fn neighborhoods_intersect(points: &[&[f64]], epsilon: f64) -> Result<NeighborhoodTest, GeometryError> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(GeometryError::InvalidEpsilon(epsilon));
    }
    let ball = min_enclosing_ball(points)?;
    let intersects = radius_within(ball.radius, epsilon);
    let boundary_tight = ball.radius > 0.0 && (ball.radius - epsilon).abs() <= epsilon * RELATIVE_TOLERANCE;
    Ok(NeighborhoodTest {
        intersects,
        ball,
        boundary_tight,
    })
}
