//! Grid solver for the penalized fairness problem
//! `max metric_scale * L(global point) - c * U(x0, x1)`
//! over the product of the two groups' achievable sets.
//!
//! The search space is per-group: a dyadic lattice of pitch `h` intersected
//! with the achievable polygon, plus the exact frontier heights at every
//! lattice column and every frontier vertex. Lattices at pitch `h/2` contain
//! the pitch-`h` points, so the best value is non-decreasing under
//! refinement.
//!
//! Because every fairness measure is an absolute difference of a per-group
//! scalar `phi`, candidates sharing the same `phi` value contribute
//! identically to the penalty, and for `dp`/`eo`/`er` each `phi` level set
//! is totally ordered componentwise (a diagonal, horizontal, or vertical
//! line). Keeping only the componentwise-largest candidate per exact `phi`
//! level therefore preserves the exact maximum, the optimal value of every
//! near-optimal level, and the minimal frontier distances — while shrinking
//! the search from quadratic in the point count to roughly linear. Precision
//! level sets are not componentwise ordered, so predictive parity runs over
//! the full candidate sets.

use crate::error::{Error, Result};
use crate::ips::{IpsGeometry, Point};
use crate::metrics::{scalar_statistic, FairnessId, GroupStats, MetricId};
use crate::problem::{GroupedProblem, ScoreDistribution};
use crate::scalar::Real;
use rayon::prelude::*;

/// Cap on the number of optima materialized in a [`SolveResult`]; the
/// aggregate statistics always cover the full optimal set.
pub const MAX_OPTIMA: usize = 1024;

/// Denominator floor used when documenting precision's Lipschitz constant.
pub const PRECISION_MARGIN: f64 = 1e-3;

/// Specification of one penalized fairness problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessProblemSpec<R> {
    pub metric: MetricId<R>,
    pub fairness: FairnessId,
    /// Penalty weight `c` on the fairness measure.
    pub penalty_weight: R,
    /// Scale on the metric term.
    pub metric_scale: R,
}

impl<R: Real> FairnessProblemSpec<R> {
    pub fn new(metric: MetricId<R>, fairness: FairnessId, penalty_weight: R) -> Result<Self> {
        let spec = Self {
            metric,
            fairness,
            penalty_weight,
            metric_scale: R::one(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_metric_scale(mut self, scale: R) -> Self {
        self.metric_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.metric.validate()?;
        if self.penalty_weight < R::zero() || !self.penalty_weight.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "penalty weight {}",
                self.penalty_weight.as_f64()
            )));
        }
        if self.metric_scale < R::zero() || !self.metric_scale.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "metric scale {}",
                self.metric_scale.as_f64()
            )));
        }
        Ok(())
    }
}

/// One pair of per-group operating points with its objective breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPointPair<R> {
    pub group0: Point<R>,
    pub group1: Point<R>,
    pub objective: R,
    pub fairness: R,
    pub frontier_dist0: R,
    pub frontier_dist1: R,
}

/// Result of one solve: the best value and the near-optimal set.
#[derive(Debug, Clone)]
pub struct SolveResult<R> {
    pub best_value: R,
    /// Near-optimal pairs (within `opt_tol` of the best), lexicographic in
    /// candidate order, truncated to [`MAX_OPTIMA`].
    pub optima: Vec<OperatingPointPair<R>>,
    /// Lattice pitch used (zero for frontier sweeps and the oracle).
    pub grid_pitch: R,
    pub opt_tol: R,
    /// Exact `min` over the full near-optimal set of
    /// `max(frontier_dist0, frontier_dist1)`.
    pub minmax_frontier_dist: R,
    /// Exact `min` of the fairness penalty over the full near-optimal set.
    pub min_fairness: R,
    /// Exact `max` of the unscaled metric term over the full near-optimal
    /// set.
    pub max_metric: R,
    /// Size of the full near-optimal set before truncation.
    pub total_optima: usize,
    pub optima_truncated: bool,
    /// Number of candidate pairs evaluated.
    pub evaluated: usize,
}

/// Per-group candidate points in deterministic lexicographic order, stored
/// column-wise for the scan kernels.
#[derive(Debug, Clone)]
pub(crate) struct Candidates<R> {
    pub tnr: Vec<R>,
    pub tpr: Vec<R>,
    pub phi: Vec<R>,
    pub fdist: Vec<R>,
}

impl<R: Real> Candidates<R> {
    pub fn len(&self) -> usize {
        self.tnr.len()
    }

    fn from_points(
        mut pts: Vec<Point<R>>,
        ips: &IpsGeometry<R>,
        stats: GroupStats<R>,
        fairness: FairnessId,
    ) -> Result<Self> {
        pts.sort_by(|a, b| (a.tnr, a.tpr).partial_cmp(&(b.tnr, b.tpr)).unwrap());
        pts.dedup_by(|a, b| a.tnr == b.tnr && a.tpr == b.tpr);
        let mut out = Candidates {
            tnr: Vec::with_capacity(pts.len()),
            tpr: Vec::with_capacity(pts.len()),
            phi: Vec::with_capacity(pts.len()),
            fdist: Vec::with_capacity(pts.len()),
        };
        for p in pts {
            out.tnr.push(p.tnr);
            out.tpr.push(p.tpr);
            out.phi.push(scalar_statistic(fairness, p, stats)?);
            out.fdist.push((ips.upper_at(p.tnr) - p.tpr).max(R::zero()));
        }
        Ok(out)
    }

    /// Keep one componentwise-maximal candidate per exact `phi` value.
    /// Sound only when each level set is componentwise totally ordered,
    /// which holds for the difference statistics of `dp`, `eo`, and `er`.
    /// Distinct points whose statistics collapse to the same float land in
    /// one level; the resulting slack is below every tolerance in use.
    fn reduce_by_level(&self) -> Self {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            (self.phi[a], self.tnr[a], self.tpr[a])
                .partial_cmp(&(self.phi[b], self.tnr[b], self.tpr[b]))
                .unwrap()
        });
        let mut keep: Vec<usize> = Vec::new();
        for (k, &idx) in order.iter().enumerate() {
            let last_of_level =
                k + 1 == n || self.phi[order[k + 1]] != self.phi[idx];
            if last_of_level {
                keep.push(idx);
            }
        }
        keep.sort_by(|&a, &b| {
            (self.tnr[a], self.tpr[a])
                .partial_cmp(&(self.tnr[b], self.tpr[b]))
                .unwrap()
        });
        Candidates {
            tnr: keep.iter().map(|&i| self.tnr[i]).collect(),
            tpr: keep.iter().map(|&i| self.tpr[i]).collect(),
            phi: keep.iter().map(|&i| self.phi[i]).collect(),
            fdist: keep.iter().map(|&i| self.fdist[i]).collect(),
        }
    }
}

/// Lattice-plus-frontier candidate set of one group at pitch `h`.
pub(crate) fn build_candidates<R: Real>(
    ips: &IpsGeometry<R>,
    stats: GroupStats<R>,
    fairness: FairnessId,
    h: R,
) -> Result<Candidates<R>> {
    let (p0, _) = ips.base_rates();
    let feas_tol = R::tol(1e-9);
    let mut pts: Vec<Point<R>> = Vec::new();
    let columns = (p0 / h).floor().to_usize().unwrap_or(0);
    for j in 0..=columns {
        let tnr = h * R::from_usize(j).unwrap();
        if tnr > p0 {
            break;
        }
        let lo = ips.lower_at(tnr);
        let hi = ips.upper_at(tnr);
        // Interior lattice points.
        let k_min = (lo / h).ceil().to_isize().unwrap_or(0).max(0) as usize;
        let k_max = (hi / h).floor().to_isize().unwrap_or(-1);
        if k_max >= 0 {
            for k in k_min..=(k_max as usize) {
                let tpr = h * R::from_usize(k).unwrap();
                if tpr >= lo - feas_tol && tpr <= hi + feas_tol {
                    pts.push(Point::new(tnr, tpr));
                }
            }
        }
        // Exact frontier heights on this column.
        pts.push(Point::new(tnr, hi));
        pts.push(Point::new(tnr, lo));
    }
    for v in ips.upper().iter().chain(ips.lower()) {
        pts.push(*v);
    }
    Candidates::from_points(pts, ips, stats, fairness)
}

/// Frontier-only candidate set: every upper-frontier vertex plus `steps`
/// interior subdivision points per segment.
pub(crate) fn frontier_candidates<R: Real>(
    ips: &IpsGeometry<R>,
    stats: GroupStats<R>,
    fairness: FairnessId,
    steps: usize,
) -> Result<Candidates<R>> {
    let mut pts: Vec<Point<R>> = ips.upper().to_vec();
    let denom = R::from_usize(steps + 1).unwrap();
    for w in ips.upper().windows(2) {
        for k in 1..=steps {
            let t = R::from_usize(k).unwrap() / denom;
            pts.push(Point::new(
                w[0].tnr + t * (w[1].tnr - w[0].tnr),
                w[0].tpr + t * (w[1].tpr - w[0].tpr),
            ));
        }
    }
    Candidates::from_points(pts, ips, stats, fairness)
}

/// Subdivisions per segment that make the frontier sample `pitch`-dense in
/// the max-norm.
pub fn frontier_steps_for_pitch<R: Real>(ips: &IpsGeometry<R>, pitch: R) -> usize {
    let mut steps = 0usize;
    for w in ips.upper().windows(2) {
        let len = (w[1].tnr - w[0].tnr).abs().max((w[1].tpr - w[0].tpr).abs());
        let need = (len / pitch).ceil().to_usize().unwrap_or(0);
        steps = steps.max(need.saturating_sub(1));
    }
    steps
}

struct SolveInputs<'a, R> {
    c0: &'a Candidates<R>,
    c1: &'a Candidates<R>,
    w0: R,
    w1: R,
    metric_scale: R,
    penalty: R,
}

fn scan<R: Real, F>(inp: &SolveInputs<'_, R>, metric: &F, opt_tol: R) -> SolveResult<R>
where
    F: Fn(R, R) -> R + Sync,
{
    let n0 = inp.c0.len();
    let n1 = inp.c1.len();
    let value = |i: usize, j: usize| -> R {
        let tnr_g = inp.w0 * inp.c0.tnr[i] + inp.w1 * inp.c1.tnr[j];
        let tpr_g = inp.w0 * inp.c0.tpr[i] + inp.w1 * inp.c1.tpr[j];
        inp.metric_scale * metric(tnr_g, tpr_g)
            - inp.penalty * (inp.c1.phi[j] - inp.c0.phi[i]).abs()
    };

    // Pass 1: the maximum, with lexicographically-first tie-breaking.
    let neg_inf = R::neg_infinity();
    let best = (0..n0)
        .into_par_iter()
        .fold(
            || (neg_inf, usize::MAX, usize::MAX),
            |mut acc, i| {
                for j in 0..n1 {
                    let v = value(i, j);
                    if v > acc.0 {
                        acc = (v, i, j);
                    }
                }
                acc
            },
        )
        .reduce(
            || (neg_inf, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    let best_value = best.0;

    // Pass 2: stream the near-optimal set for aggregates and a bounded
    // sample of representatives.
    let cutoff = best_value - opt_tol;
    struct Acc<R> {
        pairs: Vec<(usize, usize)>,
        total: usize,
        minmax_dist: R,
        min_fairness: R,
        max_metric: R,
    }
    let empty = || Acc {
        pairs: Vec::new(),
        total: 0,
        minmax_dist: R::infinity(),
        min_fairness: R::infinity(),
        max_metric: R::neg_infinity(),
    };
    let acc = (0..n0)
        .into_par_iter()
        .fold(empty, |mut acc: Acc<R>, i| {
            for j in 0..n1 {
                if value(i, j) >= cutoff {
                    acc.total += 1;
                    let d = inp.c0.fdist[i].max(inp.c1.fdist[j]);
                    acc.minmax_dist = acc.minmax_dist.min(d);
                    let u = (inp.c1.phi[j] - inp.c0.phi[i]).abs();
                    acc.min_fairness = acc.min_fairness.min(u);
                    let m = metric(
                        inp.w0 * inp.c0.tnr[i] + inp.w1 * inp.c1.tnr[j],
                        inp.w0 * inp.c0.tpr[i] + inp.w1 * inp.c1.tpr[j],
                    );
                    acc.max_metric = acc.max_metric.max(m);
                    if acc.pairs.len() < MAX_OPTIMA {
                        acc.pairs.push((i, j));
                    }
                }
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            a.total += b.total;
            a.minmax_dist = a.minmax_dist.min(b.minmax_dist);
            a.min_fairness = a.min_fairness.min(b.min_fairness);
            a.max_metric = a.max_metric.max(b.max_metric);
            let room = MAX_OPTIMA.saturating_sub(a.pairs.len());
            a.pairs.extend(b.pairs.into_iter().take(room));
            a
        });

    let optima: Vec<OperatingPointPair<R>> = acc
        .pairs
        .iter()
        .map(|&(i, j)| OperatingPointPair {
            group0: Point::new(inp.c0.tnr[i], inp.c0.tpr[i]),
            group1: Point::new(inp.c1.tnr[j], inp.c1.tpr[j]),
            objective: value(i, j),
            fairness: (inp.c1.phi[j] - inp.c0.phi[i]).abs(),
            frontier_dist0: inp.c0.fdist[i],
            frontier_dist1: inp.c1.fdist[j],
        })
        .collect();

    SolveResult {
        best_value,
        optima_truncated: acc.total > optima.len(),
        optima,
        grid_pitch: R::zero(),
        opt_tol,
        minmax_frontier_dist: acc.minmax_dist,
        min_fairness: acc.min_fairness,
        max_metric: acc.max_metric,
        total_optima: acc.total,
        evaluated: n0 * n1,
    }
}

fn run_with_metric<R: Real>(
    inp: &SolveInputs<'_, R>,
    metric: MetricId<R>,
    global: GroupStats<R>,
    opt_tol: R,
) -> SolveResult<R> {
    match metric {
        MetricId::Accuracy => scan(inp, &|tnr, tpr| tnr + tpr, opt_tol),
        MetricId::ImmediateUtility(t) => scan(
            inp,
            &move |tnr, tpr| (R::one() - t) * tpr + t * (tnr - global.p0),
            opt_tol,
        ),
        MetricId::Precision => scan(
            inp,
            &move |tnr, tpr| crate::metrics::precision(tnr, tpr, global),
            opt_tol,
        ),
        MetricId::SaturatingLinear { a, b, cap_tnr, cap_tpr } => scan(
            inp,
            &move |tnr, tpr| a * tnr.min(cap_tnr) + b * tpr.min(cap_tpr),
            opt_tol,
        ),
    }
}

pub(crate) struct Prepared<R> {
    pub stats: [GroupStats<R>; 2],
    pub ips: [IpsGeometry<R>; 2],
    pub global: GroupStats<R>,
}

pub(crate) fn prepare<R: Real>(
    problem: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
) -> Result<Prepared<R>> {
    spec.validate()?;
    let [(_, g0), (_, g1)] = problem.pair()?;
    Ok(Prepared {
        stats: [GroupStats::of_group(g0), GroupStats::of_group(g1)],
        ips: [
            IpsGeometry::from_distribution(&g0.dist),
            IpsGeometry::from_distribution(&g1.dist),
        ],
        global: GroupStats::global(problem),
    })
}

/// Precomputed candidate sets for one instance and fairness measure, so a
/// parameter sweep can rescan without rebuilding geometry.
pub(crate) struct Workspace<R> {
    pub prep: Prepared<R>,
    pub grid: [Candidates<R>; 2],
    pub frontier: [Candidates<R>; 2],
    pub h: R,
}

impl<R: Real> Workspace<R> {
    pub fn build(
        problem: &GroupedProblem<R>,
        fairness: FairnessId,
        h: R,
    ) -> Result<Self> {
        if !(h > R::zero() && h <= R::c(0.1)) {
            return Err(Error::InvalidGridPitch(h.as_f64()));
        }
        let probe = FairnessProblemSpec::new(MetricId::Accuracy, fairness, R::zero())?;
        let prep = prepare(problem, &probe)?;
        let mut grid = [
            build_candidates(&prep.ips[0], prep.stats[0], fairness, h)?,
            build_candidates(&prep.ips[1], prep.stats[1], fairness, h)?,
        ];
        if grid[0].len() == 0 || grid[1].len() == 0 {
            return Err(Error::EmptyGrid);
        }
        if fairness != FairnessId::PredictiveParity {
            grid = [grid[0].reduce_by_level(), grid[1].reduce_by_level()];
        }
        let steps = frontier_steps_for_pitch(&prep.ips[0], h)
            .max(frontier_steps_for_pitch(&prep.ips[1], h));
        let frontier = [
            frontier_candidates(&prep.ips[0], prep.stats[0], fairness, steps)?,
            frontier_candidates(&prep.ips[1], prep.stats[1], fairness, steps)?,
        ];
        Ok(Self {
            prep,
            grid,
            frontier,
            h,
        })
    }

    fn run(&self, cands: &[Candidates<R>; 2], spec: &FairnessProblemSpec<R>, opt_tol: R) -> SolveResult<R> {
        let inp = SolveInputs {
            c0: &cands[0],
            c1: &cands[1],
            w0: self.prep.stats[0].prior,
            w1: self.prep.stats[1].prior,
            metric_scale: spec.metric_scale,
            penalty: spec.penalty_weight,
        };
        run_with_metric(&inp, spec.metric, self.prep.global, opt_tol)
    }

    pub fn solve_grid(&self, spec: &FairnessProblemSpec<R>, opt_tol: R) -> SolveResult<R> {
        let mut result = self.run(&self.grid, spec, opt_tol);
        result.grid_pitch = self.h;
        result
    }

    pub fn solve_frontier(&self, spec: &FairnessProblemSpec<R>) -> SolveResult<R> {
        self.run(&self.frontier, spec, R::tol(1e-9))
    }
}

/// Maximize the penalized objective over lattice-plus-frontier candidate
/// pairs at pitch `h`. Groups are taken in lexicographic id order.
pub fn solve_grid<R: Real>(
    problem: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
    h: R,
    opt_tol: R,
) -> Result<SolveResult<R>> {
    if opt_tol < R::zero() {
        return Err(Error::InvalidConfig("negative opt_tol".into()));
    }
    spec.validate()?;
    let ws = Workspace::build(problem, spec.fairness, h)?;
    Ok(ws.solve_grid(spec, opt_tol))
}

/// Maximize the penalized objective over frontier-only pairs: every
/// frontier vertex plus `steps` subdivisions per segment. Every returned
/// pair has zero frontier distance in both groups.
pub fn solve_thresholds<R: Real>(
    problem: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
    steps: usize,
) -> Result<SolveResult<R>> {
    let prep = prepare(problem, spec)?;
    let cands = [
        frontier_candidates(&prep.ips[0], prep.stats[0], spec.fairness, steps)?,
        frontier_candidates(&prep.ips[1], prep.stats[1], spec.fairness, steps)?,
    ];
    let inp = SolveInputs {
        c0: &cands[0],
        c1: &cands[1],
        w0: prep.stats[0].prior,
        w1: prep.stats[1].prior,
        metric_scale: spec.metric_scale,
        penalty: spec.penalty_weight,
    };
    Ok(run_with_metric(&inp, spec.metric, prep.global, R::tol(1e-9)))
}

fn enumerate_lambda_points<R: Real>(
    dist: &ScoreDistribution<R>,
    lambda_steps: usize,
) -> Vec<Point<R>> {
    let levels: Vec<R> = (0..=lambda_steps)
        .map(|k| R::from_usize(k).unwrap() / R::from_usize(lambda_steps).unwrap())
        .collect();
    let n = dist.len();
    let mut points = Vec::with_capacity(levels.len().pow(n as u32));
    let mut lambda = vec![R::zero(); n];
    // Odometer over lambda levels, last atom fastest.
    let mut idx = vec![0usize; n];
    loop {
        for (a, &i) in idx.iter().enumerate() {
            lambda[a] = levels[i];
        }
        let mut tnr = R::zero();
        let mut tpr = R::zero();
        for (atom, &l) in dist.atoms().iter().zip(&lambda) {
            tnr += (R::one() - l) * atom.mass * (R::one() - atom.score);
            tpr += l * atom.mass * atom.score;
        }
        points.push(Point::new(tnr, tpr));
        let mut pos = n;
        loop {
            if pos == 0 {
                return points;
            }
            pos -= 1;
            if idx[pos] < lambda_steps {
                idx[pos] += 1;
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Exhaustive decision-space oracle: enumerates per-atom positive-label
/// probabilities on the `{0, 1/steps, ..., 1}` ladder for both groups and
/// scores every pair exactly. Independent of the lattice search path.
pub fn brute_force_oracle<R: Real>(
    problem: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
    lambda_steps: usize,
) -> Result<SolveResult<R>> {
    let prep = prepare(problem, spec)?;
    let [(_, g0), (_, g1)] = problem.pair()?;
    let total_atoms = g0.dist.len() + g1.dist.len();
    if total_atoms > 12 {
        return Err(Error::OracleScale(format!("{total_atoms} atoms > 12")));
    }
    if lambda_steps == 0 || lambda_steps > 4 {
        return Err(Error::OracleScale(format!(
            "lambda_steps {lambda_steps} outside 1..=4"
        )));
    }
    let combos0 = (lambda_steps + 1).pow(g0.dist.len() as u32);
    let combos1 = (lambda_steps + 1).pow(g1.dist.len() as u32);
    if combos0.saturating_mul(combos1) > 200_000_000 {
        return Err(Error::OracleScale(format!(
            "{combos0} x {combos1} decision pairs"
        )));
    }
    let pts0 = enumerate_lambda_points(&g0.dist, lambda_steps);
    let pts1 = enumerate_lambda_points(&g1.dist, lambda_steps);
    let make = |pts: Vec<Point<R>>, ips: &IpsGeometry<R>, stats: GroupStats<R>| -> Result<Candidates<R>> {
        let mut c = Candidates {
            tnr: Vec::with_capacity(pts.len()),
            tpr: Vec::with_capacity(pts.len()),
            phi: Vec::with_capacity(pts.len()),
            fdist: Vec::with_capacity(pts.len()),
        };
        for p in pts {
            c.tnr.push(p.tnr);
            c.tpr.push(p.tpr);
            c.phi.push(scalar_statistic(spec.fairness, p, stats)?);
            c.fdist.push((ips.upper_at(p.tnr) - p.tpr).max(R::zero()));
        }
        Ok(c)
    };
    // Decision enumeration order is the deterministic candidate order here.
    let c0 = make(pts0, &prep.ips[0], prep.stats[0])?;
    let c1 = make(pts1, &prep.ips[1], prep.stats[1])?;
    let inp = SolveInputs {
        c0: &c0,
        c1: &c1,
        w0: prep.stats[0].prior,
        w1: prep.stats[1].prior,
        metric_scale: spec.metric_scale,
        penalty: spec.penalty_weight,
    };
    Ok(run_with_metric(&inp, spec.metric, prep.global, R::tol(1e-9)))
}

/// A documented Lipschitz bound `K` for the objective with respect to
/// max-norm perturbations of either group's operating point:
/// `K = metric_scale * K_metric + c * (K_phi0 + K_phi1)`.
///
/// Per-metric constants: accuracy and immediate utility are 2; the
/// saturating metric is `a + b`; precision is `2 / margin` where `margin`
/// is a selection-rate floor (callers pass the local rate near the optimum,
/// or fall back to [`PRECISION_MARGIN`]). Per-measure constants: `dp` is 2
/// per group, `eo` is `1/p1_A`, `er` is `1/p0_A`, predictive parity is
/// `2 / margin` per group.
pub fn objective_lipschitz_bound<R: Real>(
    problem: &GroupedProblem<R>,
    spec: &FairnessProblemSpec<R>,
    margin: Option<R>,
) -> Result<R> {
    let [(_, g0), (_, g1)] = problem.pair()?;
    let s = [GroupStats::of_group(g0), GroupStats::of_group(g1)];
    let margin = margin
        .unwrap_or_else(|| R::c(PRECISION_MARGIN))
        .max(R::c(PRECISION_MARGIN));
    let k_metric = match spec.metric {
        MetricId::Accuracy | MetricId::ImmediateUtility(_) => R::c(2.0),
        MetricId::SaturatingLinear { a, b, .. } => a + b,
        MetricId::Precision => R::c(2.0) / margin,
    };
    let k_phi = |stats: GroupStats<R>| -> Result<R> {
        Ok(match spec.fairness {
            FairnessId::Dp => R::c(2.0),
            FairnessId::Eo => {
                if stats.p1 <= R::tol(1e-12) {
                    return Err(Error::DegenerateRate("positive base rate is zero"));
                }
                R::one() / stats.p1
            }
            FairnessId::Er => {
                if stats.p0 <= R::tol(1e-12) {
                    return Err(Error::DegenerateRate("negative base rate is zero"));
                }
                R::one() / stats.p0
            }
            FairnessId::PredictiveParity => R::c(2.0) / margin,
        })
    };
    Ok(spec.metric_scale * k_metric + spec.penalty_weight * (k_phi(s[0])? + k_phi(s[1])?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Group;
    use std::collections::BTreeMap;

    fn two_group(d0: ScoreDistribution<f64>, d1: ScoreDistribution<f64>) -> GroupedProblem<f64> {
        let mut groups = BTreeMap::new();
        groups.insert("a".to_string(), Group { prior: 0.5, dist: d0 });
        groups.insert("b".to_string(), Group { prior: 0.5, dist: d1 });
        GroupedProblem::new(groups).unwrap()
    }

    fn fig2() -> ScoreDistribution<f64> {
        ScoreDistribution::new([(0.3, 0.5), (0.9, 0.5)]).unwrap()
    }

    fn fig2_pair() -> GroupedProblem<f64> {
        two_group(fig2(), fig2())
    }

    #[test]
    fn identical_groups_symmetric_optimum() {
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 10.0).unwrap();
        let result = solve_grid(&fig2_pair(), &spec, 1.0 / 128.0, 1e-6).unwrap();
        assert!((result.best_value - 0.8).abs() < 1e-12);
        let symmetric = result.optima.iter().any(|o| {
            (o.group0.tnr - 0.35).abs() < 1e-12
                && (o.group0.tpr - 0.45).abs() < 1e-12
                && o.group0 == o.group1
        });
        assert!(symmetric);
    }

    #[test]
    fn zero_penalty_hits_unconstrained_accuracy_max() {
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 0.0).unwrap();
        let result = solve_grid(&fig2_pair(), &spec, 1.0 / 64.0, 1e-9).unwrap();
        assert!((result.best_value - 0.8).abs() < 1e-12);
        assert!(result.minmax_frontier_dist < 1e-12);
    }

    #[test]
    fn zero_metric_scale_gives_zero_best() {
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 3.0)
            .unwrap()
            .with_metric_scale(0.0);
        let result = solve_grid(&fig2_pair(), &spec, 1.0 / 64.0, 1e-9).unwrap();
        assert!(result.best_value.abs() < 1e-12);
    }

    #[test]
    fn refinement_is_monotone() {
        let d1 = ScoreDistribution::new([(0.2, 0.3), (0.55, 0.4), (0.85, 0.3)]).unwrap();
        let spec = FairnessProblemSpec::new(MetricId::ImmediateUtility(0.3), FairnessId::Eo, 2.0)
            .unwrap();
        let problem = two_group(fig2(), d1);
        let mut prev = f64::NEG_INFINITY;
        for k in [4, 5, 6, 7] {
            let h = (2.0_f64).powi(-k);
            let best = solve_grid(&problem, &spec, h, 1e-9).unwrap().best_value;
            assert!(best >= prev, "refinement lost value: {prev} -> {best}");
            prev = best;
        }
    }

    #[test]
    fn reduction_matches_full_scan() {
        // The per-level reduction must reproduce the unreduced maximum and
        // min-max frontier distance for every difference measure.
        let d1 = ScoreDistribution::new([(0.25, 0.5), (0.7, 0.5)]).unwrap();
        let problem = two_group(fig2(), d1);
        let h = 1.0 / 32.0;
        for fairness in [FairnessId::Dp, FairnessId::Eo, FairnessId::Er] {
            let spec = FairnessProblemSpec::new(MetricId::Accuracy, fairness, 2.5).unwrap();
            let result = solve_grid(&problem, &spec, h, 1e-9).unwrap();

            let prep = prepare(&problem, &spec).unwrap();
            let c0 = build_candidates(&prep.ips[0], prep.stats[0], fairness, h).unwrap();
            let c1 = build_candidates(&prep.ips[1], prep.stats[1], fairness, h).unwrap();
            let value = |i: usize, j: usize| {
                let tnr = 0.5 * (c0.tnr[i] + c1.tnr[j]);
                let tpr = 0.5 * (c0.tpr[i] + c1.tpr[j]);
                tnr + tpr - 2.5 * (c1.phi[j] - c0.phi[i]).abs()
            };
            let mut best = f64::NEG_INFINITY;
            for i in 0..c0.len() {
                for j in 0..c1.len() {
                    best = best.max(value(i, j));
                }
            }
            let mut minmax = f64::INFINITY;
            for i in 0..c0.len() {
                for j in 0..c1.len() {
                    if value(i, j) >= best - 1e-9 {
                        minmax = minmax.min(c0.fdist[i].max(c1.fdist[j]));
                    }
                }
            }
            assert!((result.best_value - best).abs() < 1e-13, "{fairness}");
            assert!(
                (result.minmax_frontier_dist - minmax).abs() < 1e-13,
                "{fairness}"
            );
        }
    }

    #[test]
    fn thresholds_match_example() {
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 0.0).unwrap();
        let result = solve_thresholds(&fig2_pair(), &spec, 8).unwrap();
        assert!((result.best_value - 0.8).abs() < 1e-12);
        let top = &result.optima[0];
        assert!((top.group0.tnr - 0.35).abs() < 1e-12);
        assert!((top.group1.tpr - 0.45).abs() < 1e-12);
        assert!(result.minmax_frontier_dist < 1e-12);
    }

    #[test]
    fn thresholds_search_space_monotone_in_steps() {
        let d1 = ScoreDistribution::new([(0.2, 0.3), (0.55, 0.4), (0.85, 0.3)]).unwrap();
        let problem = two_group(fig2(), d1);
        let spec =
            FairnessProblemSpec::new(MetricId::ImmediateUtility(0.4), FairnessId::Dp, 4.0).unwrap();
        let v0 = solve_thresholds(&problem, &spec, 0).unwrap().best_value;
        let v64 = solve_thresholds(&problem, &spec, 64).unwrap().best_value;
        assert!(v0 <= v64 + 1e-15);
    }

    #[test]
    fn thresholds_close_to_grid_for_identical_groups() {
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Eo, 50.0).unwrap();
        let problem = fig2_pair();
        let h = 1.0 / 128.0;
        let grid = solve_grid(&problem, &spec, h, 1e-9).unwrap().best_value;
        let steps = frontier_steps_for_pitch(
            &IpsGeometry::from_distribution(&fig2()),
            h,
        );
        let thresh = solve_thresholds(&problem, &spec, steps).unwrap().best_value;
        let k = objective_lipschitz_bound(&problem, &spec, None).unwrap();
        assert!(thresh >= grid - 2.0 * h * k);
        assert!(thresh <= grid + 1e-12);
    }

    #[test]
    fn oracle_counts_decisions() {
        let d = ScoreDistribution::new([(0.3, 0.5), (0.9, 0.5)]).unwrap();
        let problem = two_group(d.clone(), d);
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 1.0).unwrap();
        let result = brute_force_oracle(&problem, &spec, 2).unwrap();
        assert_eq!(result.evaluated, 81);
    }

    #[test]
    fn oracle_with_zero_penalty_matches_deterministic_max() {
        let d0 = ScoreDistribution::new([(0.3, 0.5), (0.9, 0.5)]).unwrap();
        let d1 = ScoreDistribution::new([(0.2, 0.4), (0.7, 0.6)]).unwrap();
        let problem = two_group(d0.clone(), d1.clone());
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 0.0).unwrap();
        let fine = brute_force_oracle(&problem, &spec, 4).unwrap().best_value;
        let coarse = brute_force_oracle(&problem, &spec, 1).unwrap().best_value;
        assert!((fine - coarse).abs() < 1e-12);
    }

    #[test]
    fn oracle_scale_guard() {
        let atoms: Vec<(f64, f64)> = (0..7).map(|i| (0.1 + 0.1 * i as f64, 1.0)).collect();
        let d = ScoreDistribution::new(atoms).unwrap();
        let problem = two_group(d.clone(), d);
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 1.0).unwrap();
        assert!(matches!(
            brute_force_oracle(&problem, &spec, 2),
            Err(Error::OracleScale(_))
        ));
    }

    #[test]
    fn metric_scale_rescales_linearly() {
        let d1 = ScoreDistribution::new([(0.25, 0.5), (0.7, 0.5)]).unwrap();
        let problem = two_group(fig2(), d1);
        let h = 1.0 / 64.0;
        for &c in &[0.0, 1.5] {
            let base = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Er, c).unwrap();
            let doubled = base.with_metric_scale(2.0);
            let r1 = solve_grid(&problem, &base, h, 1e-9).unwrap();
            let r2 = solve_grid(&problem, &doubled, h, 1e-9).unwrap();
            let top1 = r1.optima[0];
            // Rescaling the metric part of the best pair's value must be
            // exact: v2 = 2 L - cU = 2(v1 + cU) - cU.
            let l_part = top1.objective + c * top1.fairness;
            let expect = 2.0 * l_part - c * top1.fairness;
            let found = r2.optima.iter().any(|o| {
                o.group0 == top1.group0 && o.group1 == top1.group1
            });
            if found {
                let v2 = r2
                    .optima
                    .iter()
                    .find(|o| o.group0 == top1.group0 && o.group1 == top1.group1)
                    .unwrap()
                    .objective;
                assert!((v2 - expect).abs() < 1e-12);
            }
            assert!(r2.best_value >= expect - 1e-12);
        }
    }

    #[test]
    fn group_count_enforced() {
        let problem = GroupedProblem::single("g", fig2());
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 1.0).unwrap();
        assert!(matches!(
            solve_grid(&problem, &spec, 1.0 / 32.0, 1e-9),
            Err(Error::GroupCount(1))
        ));
    }

    #[test]
    fn pitch_validated() {
        let spec = FairnessProblemSpec::new(MetricId::Accuracy, FairnessId::Dp, 1.0).unwrap();
        assert!(matches!(
            solve_grid(&fig2_pair(), &spec, 0.25, 1e-9),
            Err(Error::InvalidGridPitch(_))
        ));
    }

    #[test]
    fn optima_are_feasible() {
        let d1 = ScoreDistribution::new([(0.15, 0.25), (0.5, 0.5), (0.9, 0.25)]).unwrap();
        let problem = two_group(fig2(), d1.clone());
        let spec =
            FairnessProblemSpec::new(MetricId::Precision, FairnessId::PredictiveParity, 2.0)
                .unwrap();
        let result = solve_grid(&problem, &spec, 1.0 / 32.0, 1e-6).unwrap();
        let ips0 = IpsGeometry::from_distribution(&fig2());
        let ips1 = IpsGeometry::from_distribution(&d1);
        for o in &result.optima {
            assert!(ips0.contains(o.group0, 1e-9));
            assert!(ips1.contains(o.group1, 1e-9));
        }
    }
}
