//! Shared helpers for the integration suites: seeded random instances, an
//! independent convex-hull oracle, and deterministic decision enumeration.

#![allow(dead_code)] // not every suite uses every helper

use ips_lab_core::ips::Point;
use ips_lab_core::problem::{AtomDecision, ScoreDistribution};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution with `n` atoms, scores separated by at least 1e-3
/// and kept strictly inside (0, 1), masses bounded away from zero.
pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> ScoreDistribution<f64> {
    loop {
        let mut scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..0.98)).collect();
        scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if scores.windows(2).any(|w| w[1] - w[0] < 1e-3) {
            continue;
        }
        let pairs: Vec<(f64, f64)> = scores
            .into_iter()
            .map(|s| (s, rng.gen_range(0.2..1.0)))
            .collect();
        return ScoreDistribution::new(pairs).unwrap();
    }
}

pub fn random_decision(rng: &mut ChaCha8Rng, n: usize) -> AtomDecision<f64> {
    AtomDecision::new((0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()).unwrap()
}

/// All 2^n deterministic operating points of a distribution.
pub fn deterministic_points(dist: &ScoreDistribution<f64>) -> Vec<Point<f64>> {
    let n = dist.len();
    assert!(n <= 16, "too many atoms for exhaustive enumeration");
    let mut points = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let lambdas: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { 1.0 } else { 0.0 })
            .collect();
        let decision = AtomDecision::new(lambdas).unwrap();
        let (tnr, tpr) = dist.operating_point(&decision).unwrap();
        points.push(Point::new(tnr, tpr));
    }
    points
}

/// Convex hull by monotone chain; returns hull vertices counterclockwise
/// without collinear interior points.
pub fn convex_hull(points: &[Point<f64>]) -> Vec<Point<f64>> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.tnr, p.tpr)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() <= 2 {
        return pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| Point::new(x, y)).collect()
}

/// Symmetric vertex-set match within `tol` (both directions).
pub fn same_point_set(a: &[Point<f64>], b: &[Point<f64>], tol: f64) -> bool {
    let close = |p: &Point<f64>, q: &Point<f64>| {
        (p.tnr - q.tnr).abs() <= tol && (p.tpr - q.tpr).abs() <= tol
    };
    a.iter().all(|p| b.iter().any(|q| close(p, q)))
        && b.iter().all(|q| a.iter().any(|p| close(p, q)))
}
