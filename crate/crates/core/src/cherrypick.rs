//! Cherry-picking detection and the two headline experiments.
//!
//! A decision pair cherry-picks when some group's operating point sits off
//! that group's Pareto frontier: within the group, a lower-score individual
//! is favored over a higher-score one. The battery experiment checks that
//! the three difference measures always admit a clean (frontier-only)
//! near-optimum; the search experiment hunts for saturating-metric /
//! predictive-parity cells where *every* near-optimal pair cherry-picks.

use crate::error::{Error, Result};
use crate::generators::{generate, DensityId, GeneratorConfig, GeneratorKind};
use crate::ips::IpsGeometry;
use crate::metrics::{FairnessId, MetricId};
use crate::problem::GroupedProblem;
use crate::scalar::Real;
use crate::solver::{
    brute_force_oracle, objective_lipschitz_bound, FairnessProblemSpec, OperatingPointPair,
    SolveResult, Workspace,
};

/// One listed optimum with its classification.
#[derive(Debug, Clone, Copy)]
pub struct ClassifiedOptimum<R> {
    pub pair: OperatingPointPair<R>,
    pub frontier_dist0: R,
    pub frontier_dist1: R,
    pub cherry_picks: bool,
}

/// Classification of a solve result's near-optimal set.
#[derive(Debug, Clone)]
pub struct CherryReport<R> {
    pub per_optimum: Vec<ClassifiedOptimum<R>>,
    /// Some near-optimal pair keeps both groups within `cp_tol` of their
    /// frontiers. Computed from the exact aggregate over the full set, not
    /// just the listed sample.
    pub exists_clean: bool,
    /// Every near-optimal pair pushes some group more than `cp_tol` off its
    /// frontier.
    pub all_cherry_pick: bool,
    pub cp_tol: R,
    pub minmax_frontier_dist: R,
}

/// Classify a solve result: a pair cherry-picks when either group's
/// frontier distance exceeds `cp_tol`. `cp_tol` should dominate the grid
/// slack (the default elsewhere is `4h`).
pub fn detect<R: Real>(
    problem: &GroupedProblem<R>,
    result: &SolveResult<R>,
    cp_tol: R,
) -> Result<CherryReport<R>> {
    if result.total_optima == 0 {
        return Err(Error::EmptyOptima);
    }
    let [(_, g0), (_, g1)] = problem.pair()?;
    let ips = [
        IpsGeometry::from_distribution(&g0.dist),
        IpsGeometry::from_distribution(&g1.dist),
    ];
    let mut per_optimum = Vec::with_capacity(result.optima.len());
    for pair in &result.optima {
        let d0 = ips[0].frontier_distance(pair.group0)?;
        let d1 = ips[1].frontier_distance(pair.group1)?;
        per_optimum.push(ClassifiedOptimum {
            pair: *pair,
            frontier_dist0: d0,
            frontier_dist1: d1,
            cherry_picks: d0.max(d1) > cp_tol,
        });
    }
    let exists_clean = result.minmax_frontier_dist <= cp_tol;
    Ok(CherryReport {
        per_optimum,
        exists_clean,
        all_cherry_pick: !exists_clean,
        cp_tol,
        minmax_frontier_dist: result.minmax_frontier_dist,
    })
}

/// Outcome of the two-route clean-optimum check on one problem/spec cell.
#[derive(Debug, Clone)]
pub struct CleanCheck<R> {
    pub grid: SolveResult<R>,
    /// Best value over the dense frontier-only sweep.
    pub frontier_best: R,
    /// Optimality slack granted to frontier pairs.
    pub slack: R,
    pub cp_tol: R,
    pub exists_clean: bool,
    pub all_cherry_pick: bool,
}

/// A cell admits a clean optimum when either the grid's near-optimal set
/// already contains a pair within `cp_tol` of both frontiers, or a
/// frontier-only pair scores within `slack` of the grid best. With
/// `opt_tol = None` the slack is the documented grid bound `2hK`, using the
/// best pair's selection rate as the local margin for precision-based
/// terms; passing `Some` declares the slack outright.
pub fn check_clean_optimum<R: Real>(
    problem: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
    h: R,
    cp_tol: R,
    opt_tol: Option<R>,
) -> Result<CleanCheck<R>> {
    spec.validate()?;
    let ws = Workspace::build(problem, spec.fairness, h)?;
    check_clean_on(&ws, problem, spec, cp_tol, opt_tol)
}

pub(crate) fn check_clean_on<R: Real>(
    ws: &Workspace<R>,
    problem: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
    cp_tol: R,
    opt_tol: Option<R>,
) -> Result<CleanCheck<R>> {
    let scan_tol = opt_tol.unwrap_or_else(|| R::tol(1e-9));
    let grid = ws.solve_grid(spec, scan_tol);
    let frontier = ws.solve_frontier(spec);
    let slack = match opt_tol {
        Some(t) => t,
        None => {
            // Local margin: the selection rate of the best pair's global
            // point, floored away from the degenerate corner.
            let margin = grid.optima.first().map(|top| {
                let w0 = ws.prep.stats[0].prior;
                let w1 = ws.prep.stats[1].prior;
                let tnr_g = w0 * top.group0.tnr + w1 * top.group1.tnr;
                let tpr_g = w0 * top.group0.tpr + w1 * top.group1.tpr;
                tpr_g + ws.prep.global.p0 - tnr_g
            });
            let k = objective_lipschitz_bound(problem, spec, margin)?;
            R::c(2.0) * ws.h * k
        }
    };
    let exists_clean = grid.minmax_frontier_dist <= cp_tol
        || frontier.best_value >= grid.best_value - slack;
    Ok(CleanCheck {
        frontier_best: frontier.best_value,
        slack,
        cp_tol,
        exists_clean,
        all_cherry_pick: !exists_clean,
        grid,
    })
}

/// One cell of the battery experiment.
#[derive(Debug, Clone)]
pub struct BatteryCell<R> {
    pub instance: String,
    pub metric: MetricId<R>,
    pub c: R,
    pub fairness: FairnessId,
    pub exists_clean: bool,
    pub grid_best: R,
    pub frontier_best: R,
    pub slack: R,
    pub minmax_frontier_dist: R,
}

#[derive(Debug, Clone)]
pub struct BatterySummary<R> {
    pub cells: Vec<BatteryCell<R>>,
    pub all_clean: bool,
}

/// Run every `(instance, metric, c, fairness in {dp, eo, er})` cell and
/// record whether a clean near-optimum exists. Any false cell is a finding
/// carried in the summary with its full parameters.
pub fn clean_optimum_battery<R: Real>(
    battery: &[(String, GroupedProblem<R>)],
    metrics: &[MetricId<R>],
    cs: &[R],
    h: R,
    cp_tol: R,
) -> Result<BatterySummary<R>> {
    if battery.is_empty() {
        return Err(Error::NoData);
    }
    let fairness_ids = [FairnessId::Dp, FairnessId::Eo, FairnessId::Er];
    let mut cells = Vec::with_capacity(battery.len() * metrics.len() * cs.len() * 3);
    let mut all_clean = true;
    for (name, problem) in battery {
        let workspaces: Vec<(FairnessId, Workspace<R>)> = fairness_ids
            .iter()
            .map(|&f| Workspace::build(problem, f, h).map(|w| (f, w)))
            .collect::<Result<_>>()?;
        for &metric in metrics {
            for &c in cs {
                for (fairness, ws) in &workspaces {
                    let spec = FairnessProblemSpec::new(metric, *fairness, c)?;
                    let check = check_clean_on(ws, problem, &spec, cp_tol, None)?;
                    all_clean &= check.exists_clean;
                    cells.push(BatteryCell {
                        instance: name.clone(),
                        metric,
                        c,
                        fairness: *fairness,
                        exists_clean: check.exists_clean,
                        grid_best: check.grid.best_value,
                        frontier_best: check.frontier_best,
                        slack: check.slack,
                        minmax_frontier_dist: check.grid.minmax_frontier_dist,
                    });
                }
            }
        }
    }
    Ok(BatterySummary { cells, all_clean })
}

/// Sweep configuration for the forced-cherry-picking search.
#[derive(Debug, Clone)]
pub struct SearchConfig<R> {
    pub base_bins: usize,
    pub density: DensityId,
    pub coarse_bins: usize,
    pub gammas: Vec<R>,
    pub eps_primes: Vec<R>,
    /// Metric multipliers (the objective is `c * metric - fairness`).
    pub cs: Vec<R>,
    pub caps_grid: usize,
    pub h: R,
    pub cp_tol: R,
    /// Findings must keep every near-optimal pair at least this far off
    /// some frontier.
    pub min_distance: R,
    /// Confirmation floor for the reduced-instance oracle's distance.
    pub oracle_floor: R,
}

impl<R: Real> SearchConfig<R> {
    /// The standard sweep: uniform-8 base, two contraction factors, three
    /// minority shares, four multipliers, an 8x8 caps grid at `h = 1/256`.
    pub fn standard() -> Self {
        let h = R::c(1.0 / 256.0);
        Self {
            base_bins: 8,
            density: DensityId::Uniform,
            coarse_bins: 2,
            gammas: vec![R::c(0.25), R::c(0.5)],
            eps_primes: vec![R::c(0.05), R::c(0.1), R::c(0.2)],
            cs: vec![R::c(2.0), R::c(8.0), R::c(32.0), R::c(128.0)],
            caps_grid: 8,
            h,
            cp_tol: R::c(4.0) * h,
            min_distance: R::c(0.01),
            oracle_floor: R::c(0.005),
        }
    }
}

/// One scanned cell of the search sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepCellLog<R> {
    pub gamma: R,
    pub eps_prime: R,
    pub c: R,
    pub cap_tnr: R,
    pub cap_tpr: R,
    pub grid_best: R,
    pub frontier_best: R,
    pub minmax_frontier_dist: R,
    pub all_cherry_pick: bool,
}

/// A verified cell where every near-optimal pair cherry-picks.
#[derive(Debug, Clone)]
pub struct Finding<R> {
    pub gamma: R,
    pub eps_prime: R,
    pub c: R,
    pub cap_tnr: R,
    pub cap_tpr: R,
    pub check: CleanCheck<R>,
    /// The same cell re-solved at half the pitch.
    pub refined: CleanCheck<R>,
    /// Exhaustive oracle on the four-atom reduction of the same cell.
    pub oracle_minmax: R,
    pub confirmed: bool,
}

/// Search outcome: the first verified finding in sweep order, or the full
/// log. Not finding a cell is a reportable outcome, not an error.
#[derive(Debug, Clone)]
pub struct SearchOutcome<R> {
    pub finding: Option<Finding<R>>,
    pub log: Vec<SweepCellLog<R>>,
    pub cells_scanned: usize,
}

/// Declared optimality slack for search cells: a quarter pitch, scaled with
/// the metric multiplier so claims stay comparable across `c`.
fn search_opt_tol<R: Real>(h: R, c: R) -> R {
    h * R::c(0.25) * c.max(R::one())
}

/// Sweep adversarial instances, metric multipliers, and saturating caps
/// under predictive parity; return the first cell whose near-optimal set
/// cherry-picks entirely, verified by pitch refinement and the reduced
/// brute-force oracle.
pub fn forced_cherrypick_search<R: Real>(config: &SearchConfig<R>) -> Result<SearchOutcome<R>> {
    let mut log = Vec::new();
    let mut scanned = 0usize;
    for &gamma in &config.gammas {
        for &eps in &config.eps_primes {
            let instance = generate(&GeneratorConfig::new(GeneratorKind::AdversarialPair {
                base: Box::new(GeneratorKind::BinnedDensity {
                    bins: config.base_bins,
                    density: config.density,
                }),
                coarse_bins: config.coarse_bins,
                gamma,
                eps_prime: eps,
            }))?;
            let ws = Workspace::build(&instance, FairnessId::PredictiveParity, config.h)?;
            let (p0g, p1g) = (ws.prep.global.p0, ws.prep.global.p1);
            let denom = R::from_usize(config.caps_grid + 1).unwrap();
            for &c in &config.cs {
                for i in 0..config.caps_grid {
                    for j in 0..config.caps_grid {
                        let cap_tnr = p0g * R::from_usize(i + 1).unwrap() / denom;
                        let cap_tpr = p1g * R::from_usize(j + 1).unwrap() / denom;
                        let metric = MetricId::SaturatingLinear {
                            a: R::one(),
                            b: R::one(),
                            cap_tnr,
                            cap_tpr,
                        };
                        let spec =
                            FairnessProblemSpec::new(metric, FairnessId::PredictiveParity, R::one())?
                                .with_metric_scale(c);
                        let opt_tol = search_opt_tol(config.h, c);
                        let check =
                            check_clean_on(&ws, &instance, &spec, config.cp_tol, Some(opt_tol))?;
                        scanned += 1;
                        log.push(SweepCellLog {
                            gamma,
                            eps_prime: eps,
                            c,
                            cap_tnr,
                            cap_tpr,
                            grid_best: check.grid.best_value,
                            frontier_best: check.frontier_best,
                            minmax_frontier_dist: check.grid.minmax_frontier_dist,
                            all_cherry_pick: check.all_cherry_pick,
                        });
                        if !(check.all_cherry_pick
                            && check.grid.minmax_frontier_dist >= config.min_distance)
                        {
                            continue;
                        }
                        if let Some(finding) = verify_finding(
                            config, &instance, &spec, gamma, eps, c, cap_tnr, cap_tpr, check,
                        )? {
                            return Ok(SearchOutcome {
                                finding: Some(finding),
                                log,
                                cells_scanned: scanned,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(SearchOutcome {
        finding: None,
        log,
        cells_scanned: scanned,
    })
}

#[allow(clippy::too_many_arguments)]
fn verify_finding<R: Real>(
    config: &SearchConfig<R>,
    instance: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
    gamma: R,
    eps: R,
    c: R,
    cap_tnr: R,
    cap_tpr: R,
    check: CleanCheck<R>,
) -> Result<Option<Finding<R>>> {
    // Pitch refinement: the cell must stay all-cherry-picking at h/2 with
    // the correspondingly tighter tolerances.
    let half = config.h * R::c(0.5);
    let ws_half = Workspace::build(instance, FairnessId::PredictiveParity, half)?;
    let refined = check_clean_on(
        &ws_half,
        instance,
        spec,
        config.cp_tol * R::c(0.5),
        Some(search_opt_tol(half, c)),
    )?;
    if !(refined.all_cherry_pick
        && refined.grid.minmax_frontier_dist >= config.min_distance)
    {
        return Ok(None);
    }
    // Four-atom reduction of the same cell, scored exhaustively.
    let reduced = generate(&GeneratorConfig::new(GeneratorKind::AdversarialPair {
        base: Box::new(GeneratorKind::BinnedDensity {
            bins: 2,
            density: config.density,
        }),
        coarse_bins: 1,
        gamma,
        eps_prime: eps,
    }))?;
    let oracle = brute_force_oracle(&reduced, spec, 4)?;
    let oracle_minmax = oracle.minmax_frontier_dist;
    let confirmed = oracle_minmax >= config.oracle_floor;
    if !confirmed {
        return Ok(None);
    }
    Ok(Some(Finding {
        gamma,
        eps_prime: eps,
        c,
        cap_tnr,
        cap_tpr,
        check,
        refined,
        oracle_minmax,
        confirmed,
    }))
}

/// One point of the penalty trade-off curve.
#[derive(Debug, Clone, Copy)]
pub struct TradeoffPoint<R> {
    pub c: R,
    pub best_value: R,
    /// Best metric value among the exactly-optimal pairs.
    pub best_metric: R,
    /// Smallest fairness penalty among the exactly-optimal pairs.
    pub fairness_at_opt: R,
    pub exists_clean: bool,
}

/// Solve the same problem across ascending penalty weights and record the
/// metric/fairness values at the optimum.
pub fn tradeoff_sweep<R: Real>(
    problem: &GroupedProblem<R>,
    metric: MetricId<R>,
    fairness: FairnessId,
    cs: &[R],
    h: R,
) -> Result<Vec<TradeoffPoint<R>>> {
    if cs.is_empty() {
        return Err(Error::NoData);
    }
    if cs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig(
            "penalty weights must be ascending".into(),
        ));
    }
    let ws = Workspace::build(problem, fairness, h)?;
    let cp_tol = R::c(4.0) * h;
    let mut curve = Vec::with_capacity(cs.len());
    for &c in cs {
        let spec = FairnessProblemSpec::new(metric, fairness, c)?;
        let check = check_clean_on(&ws, problem, &spec, cp_tol, None)?;
        curve.push(TradeoffPoint {
            c,
            best_value: check.grid.best_value,
            best_metric: check.grid.max_metric,
            fairness_at_opt: check.grid.min_fairness,
            exists_clean: check.exists_clean,
        });
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Group, ScoreDistribution};
    use crate::solver::solve_grid;
    use std::collections::BTreeMap;

    fn fig2_pair() -> GroupedProblem<f64> {
        let dist = ScoreDistribution::new([(0.3, 0.5), (0.9, 0.5)]).unwrap();
        let mut groups = BTreeMap::new();
        groups.insert("a".to_string(), Group { prior: 0.5, dist: dist.clone() });
        groups.insert("b".to_string(), Group { prior: 0.5, dist });
        GroupedProblem::new(groups).unwrap()
    }

    #[test]
    fn detect_classifies_frontier_optima_clean() {
        let problem = fig2_pair();
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 5.0).unwrap();
        let result = solve_grid(&problem, &spec, 1.0 / 64.0, 1e-9).unwrap();
        let report = detect(&problem, &result, 4.0 / 64.0).unwrap();
        assert!(report.exists_clean);
        assert!(!report.all_cherry_pick);
        assert!(report.per_optimum.iter().any(|o| !o.cherry_picks));
    }

    #[test]
    fn detect_flags_interior_pairs() {
        let problem = fig2_pair();
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 5.0).unwrap();
        let mut result = solve_grid(&problem, &spec, 1.0 / 64.0, 1e-9).unwrap();
        // Rewrite the aggregate as if every optimum were interior.
        result.minmax_frontier_dist = 0.15;
        for o in &mut result.optima {
            o.group0 = crate::ips::Point::new(0.35, 0.30);
            o.frontier_dist0 = 0.15;
        }
        let report = detect(&problem, &result, 0.05).unwrap();
        assert!(!report.exists_clean);
        assert!(report.all_cherry_pick);
        assert!(report.per_optimum.iter().all(|o| o.cherry_picks));
        assert!((report.per_optimum[0].frontier_dist0 - 0.15).abs() < 1e-12);
    }

    #[test]
    fn detect_requires_optima() {
        let problem = fig2_pair();
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 5.0).unwrap();
        let mut result = solve_grid(&problem, &spec, 1.0 / 64.0, 1e-9).unwrap();
        result.total_optima = 0;
        result.optima.clear();
        assert!(matches!(
            detect(&problem, &result, 0.05),
            Err(Error::EmptyOptima)
        ));
    }

    #[test]
    fn identical_groups_cell_is_clean() {
        let problem = fig2_pair();
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 5.0).unwrap();
        let check = check_clean_optimum(&problem, &spec, 1.0 / 128.0, 4.0 / 128.0, None).unwrap();
        assert!(check.exists_clean);
    }

    #[test]
    fn all_positive_pair_keeps_eo_clean() {
        let problem = fig2_pair();
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Eo, 1e6).unwrap();
        let check = check_clean_optimum(&problem, &spec, 1.0 / 128.0, 4.0 / 128.0, None).unwrap();
        assert!(check.exists_clean);
    }

    #[test]
    fn tradeoff_curve_is_flat_for_identical_groups() {
        let problem = fig2_pair();
        let cs = [0.0, 1.0, 4.0];
        let curve = tradeoff_sweep(&problem, MetricId::Accuracy, FairnessId::Dp, &cs, 1.0 / 64.0)
            .unwrap();
        assert_eq!(curve.len(), 3);
        for point in &curve {
            assert!((point.best_value - 0.8).abs() < 1e-9);
            assert!(point.fairness_at_opt < 1e-9);
            assert!(point.exists_clean);
        }
    }

    #[test]
    fn tradeoff_requires_sorted_weights() {
        let problem = fig2_pair();
        assert!(tradeoff_sweep(
            &problem,
            MetricId::Accuracy,
            FairnessId::Dp,
            &[2.0, 1.0],
            1.0 / 64.0
        )
        .is_err());
    }

    #[test]
    fn search_control_cells_stay_clean() {
        use crate::generators::{generate, DensityId, GeneratorConfig, GeneratorKind};
        let instance: GroupedProblem<f64> =
            generate(&GeneratorConfig::new(GeneratorKind::AdversarialPair {
                base: Box::new(GeneratorKind::BinnedDensity {
                    bins: 8,
                    density: DensityId::Uniform,
                }),
                coarse_bins: 2,
                gamma: 0.25,
                eps_prime: 0.05,
            }))
            .unwrap();
        let h = 1.0 / 128.0;
        let caps = MetricId::SaturatingLinear {
            a: 1.0,
            b: 1.0,
            cap_tnr: 0.2,
            cap_tpr: 0.1,
        };

        // Zero metric weight: the all-negative corner pair is parity-exact
        // and frontier-only, so the penalty alone never forces
        // cherry-picking.
        let spec = FairnessProblemSpec::new(caps, FairnessId::PredictiveParity, 1.0)
            .unwrap()
            .with_metric_scale(0.0);
        let check = check_clean_optimum(&instance, &spec, h, 4.0 * h, Some(h / 4.0)).unwrap();
        assert!(check.exists_clean);

        // Inactive caps with a difference measure: a clean near-optimum
        // exists.
        let wide = MetricId::SaturatingLinear {
            a: 1.0,
            b: 1.0,
            cap_tnr: 1.0,
            cap_tpr: 1.0,
        };
        let spec = FairnessProblemSpec::new(wide, FairnessId::Dp, 1.0)
            .unwrap()
            .with_metric_scale(2.0);
        let check = check_clean_optimum(&instance, &spec, h, 4.0 * h, None).unwrap();
        assert!(check.exists_clean);
    }

    #[test]
    fn search_reports_absence_with_full_log() {
        // Zero metric weight never forces cherry-picking, so a sweep over
        // such cells completes with no finding and a complete log.
        let config = SearchConfig::<f64> {
            base_bins: 4,
            density: crate::generators::DensityId::Uniform,
            coarse_bins: 2,
            gammas: vec![0.5],
            eps_primes: vec![0.2],
            cs: vec![0.0],
            caps_grid: 2,
            h: 1.0 / 32.0,
            cp_tol: 4.0 / 32.0,
            min_distance: 0.01,
            oracle_floor: 0.005,
        };
        let outcome = forced_cherrypick_search(&config).unwrap();
        assert!(outcome.finding.is_none());
        assert_eq!(outcome.cells_scanned, 4);
        assert_eq!(outcome.log.len(), 4);
        assert!(outcome.log.iter().all(|cell| !cell.all_cherry_pick));
    }

    #[test]
    fn single_cell_battery_is_clean() {
        let battery = vec![("fig2".to_string(), fig2_pair())];
        let summary = clean_optimum_battery(
            &battery,
            &[MetricId::Accuracy],
            &[5.0],
            1.0 / 128.0,
            4.0 / 128.0,
        )
        .unwrap();
        assert_eq!(summary.cells.len(), 3);
        assert!(summary.all_clean);
    }
}
