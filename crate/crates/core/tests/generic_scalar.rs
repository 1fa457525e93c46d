//! The whole pipeline is generic over the scalar; run it at `f32` with the
//! epsilon-scaled tolerances to make sure nothing silently assumes `f64`.

use ips_lab_core::ips::{threshold_operating_point, IpsGeometry, Point};
use ips_lab_core::metrics::{fairness_measure, FairnessId, GroupStats, MetricId};
use ips_lab_core::problem::{Group, GroupedProblem, ScoreDistribution};
use ips_lab_core::scalar::Real;
use ips_lab_core::solver::{solve_grid, FairnessProblemSpec};
use std::collections::BTreeMap;

fn close(a: f32, b: f32, tol: f32) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn single_precision_geometry() {
    let dist = ScoreDistribution::<f32>::new([(0.3, 0.5), (0.9, 0.5)]).unwrap();
    let (p0, p1) = dist.base_rates();
    assert!(close(p0, 0.4, 1e-6));
    assert!(close(p1, 0.6, 1e-6));

    let ips = IpsGeometry::from_distribution(&dist);
    assert!(close(ips.area(), 0.15, 1e-6));
    assert!(close(ips.area_between_frontiers(), 0.15, 1e-5));
    assert!(ips.contains(Point::new(0.2, 0.3), f32::tol(1e-9)));
    assert!(!ips.contains(Point::new(0.2, 0.52), f32::tol(1e-9)));

    let (tnr, tpr) = threshold_operating_point(&dist, 0.5, 0.0).unwrap();
    assert!(close(tnr, 0.35, 1e-6));
    assert!(close(tpr, 0.45, 1e-6));
}

#[test]
fn single_precision_metrics_and_solve() {
    let dist = ScoreDistribution::<f32>::new([(0.3, 0.5), (0.9, 0.5)]).unwrap();
    let stats = GroupStats::<f32>::new(0.4, 0.6, 0.5).unwrap();
    let v = fairness_measure(
        FairnessId::Eo,
        Point::new(0.35, 0.45),
        stats,
        Point::new(0.0, 0.6),
        stats,
    )
    .unwrap();
    assert!(close(v, 0.25, 1e-6));

    let mut groups = BTreeMap::new();
    groups.insert("a".to_string(), Group { prior: 0.5f32, dist: dist.clone() });
    groups.insert("b".to_string(), Group { prior: 0.5f32, dist });
    let problem = GroupedProblem::new(groups).unwrap();
    let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 4.0f32).unwrap();
    let result = solve_grid(&problem, &spec, 1.0 / 64.0, 1e-4).unwrap();
    assert!(close(result.best_value, 0.8, 1e-5));
    assert!(result.minmax_frontier_dist <= f32::tol(1e-9));
}
