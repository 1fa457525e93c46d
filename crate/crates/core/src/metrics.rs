//! Evaluation metrics and group-fairness measures as closed-form functions
//! of operating points and group base rates.
//!
//! Every fairness measure here is the absolute difference of one scalar
//! statistic evaluated per group ([`scalar_statistic`]); the solver exploits
//! that shape. Rates are group-conditional throughout: an operating point
//! `(tnr, tpr)` for group `A` means `P(N̂,N|A)` and `P(P̂,P|A)`.

use crate::error::{Error, Result};
use crate::ips::{IpsGeometry, Point};
use crate::problem::GroupedProblem;
use crate::scalar::Real;
use std::fmt;
use std::str::FromStr;

/// An evaluation metric: non-decreasing in both `tnr` and `tpr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricId<R> {
    /// `tnr + tpr` (one minus the expected 0-1 loss).
    Accuracy,
    /// `(1-t)*tpr + t*(tnr - p0)` for a cost parameter `t` in `[0, 1]`.
    ImmediateUtility(R),
    /// `tpr / (tpr + p0 - tnr)`, extended with the value `p1` at the
    /// all-negative corner where the denominator vanishes.
    Precision,
    /// `a*min(tnr, cap_tnr) + b*min(tpr, cap_tpr)`: monotone with a plateau
    /// once both caps are active.
    SaturatingLinear { a: R, b: R, cap_tnr: R, cap_tpr: R },
}

impl<R: Real> MetricId<R> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MetricId::Accuracy | MetricId::Precision => true,
            MetricId::ImmediateUtility(t) => (R::zero()..=R::one()).contains(&t),
            MetricId::SaturatingLinear { a, b, .. } => a >= R::zero() && b >= R::zero(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("metric parameters: {self}")))
        }
    }
}

/// A two-group fairness measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairnessId {
    /// Demographic parity: absolute selection-rate difference.
    Dp,
    /// Equal opportunity: absolute difference of `tpr / p1`.
    Eo,
    /// Equal risk: absolute difference of `tnr / p0`.
    Er,
    /// Predictive parity: absolute precision difference.
    PredictiveParity,
}

impl FairnessId {
    pub const ALL: [FairnessId; 4] = [
        FairnessId::Dp,
        FairnessId::Eo,
        FairnessId::Er,
        FairnessId::PredictiveParity,
    ];
}

/// Group-conditional base rates plus the group's share of the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats<R> {
    pub p0: R,
    pub p1: R,
    pub prior: R,
}

impl<R: Real> GroupStats<R> {
    pub fn new(p0: R, p1: R, prior: R) -> Result<Self> {
        if (p0 + p1 - R::one()).abs() > R::tol(1e-12) {
            return Err(Error::InvalidConfig(format!(
                "base rates sum to {}",
                (p0 + p1).as_f64()
            )));
        }
        Ok(Self { p0, p1, prior })
    }

    pub fn of_group(group: &crate::problem::Group<R>) -> Self {
        let (p0, p1) = group.dist.base_rates();
        Self {
            p0,
            p1,
            prior: group.prior,
        }
    }

    /// Population-level stats of a grouped problem (prior-weighted mixture).
    pub fn global(problem: &GroupedProblem<R>) -> Self {
        let mut p1 = R::zero();
        for (_, g) in problem.groups() {
            let (_, g1) = g.dist.base_rates();
            p1 += g.prior * g1;
        }
        Self {
            p0: R::one() - p1,
            p1,
            prior: R::one(),
        }
    }

    fn check_feasible(&self, tnr: R, tpr: R) -> Result<()> {
        let tol = R::tol(1e-9);
        if tnr < -tol || tnr > self.p0 + tol || tpr < -tol || tpr > self.p1 + tol {
            return Err(Error::InfeasiblePoint {
                tnr: tnr.as_f64(),
                tpr: tpr.as_f64(),
            });
        }
        Ok(())
    }
}

/// Evaluate a metric at an operating point feasible for `stats`.
pub fn eval_metric<R: Real>(id: MetricId<R>, tnr: R, tpr: R, stats: GroupStats<R>) -> Result<R> {
    stats.check_feasible(tnr, tpr)?;
    Ok(eval_metric_unchecked(id, tnr, tpr, stats))
}

pub(crate) fn eval_metric_unchecked<R: Real>(
    id: MetricId<R>,
    tnr: R,
    tpr: R,
    stats: GroupStats<R>,
) -> R {
    match id {
        MetricId::Accuracy => tnr + tpr,
        MetricId::ImmediateUtility(t) => (R::one() - t) * tpr + t * (tnr - stats.p0),
        MetricId::Precision => precision(tnr, tpr, stats),
        MetricId::SaturatingLinear { a, b, cap_tnr, cap_tpr } => {
            a * tnr.min(cap_tnr) + b * tpr.min(cap_tpr)
        }
    }
}

/// `tpr / (tpr + p0 - tnr)` with the all-negative corner defined as `p1`
/// (the limit along the diagonal of randomized trivial decisions, which
/// keeps the function total and continuous along that approach).
pub fn precision<R: Real>(tnr: R, tpr: R, stats: GroupStats<R>) -> R {
    let den = tpr + stats.p0 - tnr;
    if den <= R::tol(1e-12) {
        stats.p1
    } else {
        tpr.max(R::zero()) / den
    }
}

/// The per-group scalar whose absolute between-group difference defines each
/// fairness measure.
pub fn scalar_statistic<R: Real>(id: FairnessId, x: Point<R>, s: GroupStats<R>) -> Result<R> {
    let tiny = R::tol(1e-12);
    Ok(match id {
        FairnessId::Dp => x.tpr - x.tnr + s.p0,
        FairnessId::Eo => {
            if s.p1 <= tiny {
                return Err(Error::DegenerateRate("positive base rate is zero"));
            }
            x.tpr / s.p1
        }
        FairnessId::Er => {
            if s.p0 <= tiny {
                return Err(Error::DegenerateRate("negative base rate is zero"));
            }
            x.tnr / s.p0
        }
        FairnessId::PredictiveParity => precision(x.tnr, x.tpr, s),
    })
}

/// Fairness measure between two per-group operating points.
pub fn fairness_measure<R: Real>(
    id: FairnessId,
    x0: Point<R>,
    s0: GroupStats<R>,
    x1: Point<R>,
    s1: GroupStats<R>,
) -> Result<R> {
    s0.check_feasible(x0.tnr, x0.tpr)?;
    s1.check_feasible(x1.tnr, x1.tpr)?;
    Ok((scalar_statistic(id, x1, s1)? - scalar_statistic(id, x0, s0)?).abs())
}

/// Squared fairness measure: smooth where the raw measure has an absolute
/// value kink.
pub fn fairness_measure_squared<R: Real>(
    id: FairnessId,
    x0: Point<R>,
    s0: GroupStats<R>,
    x1: Point<R>,
    s1: GroupStats<R>,
) -> Result<R> {
    let f = fairness_measure(id, x0, s0, x1, s1)?;
    Ok(f * f)
}

/// Report of the first-quadrant partial-derivative check.
#[derive(Debug, Clone)]
pub struct FqcReport<R> {
    pub passes: bool,
    pub witness: Option<FqcWitness<R>>,
    pub grid_n: usize,
    pub cells_checked: usize,
}

/// A grid cell where both finite-difference partials of the squared measure
/// are strictly positive.
#[derive(Debug, Clone)]
pub struct FqcWitness<R> {
    /// Id of the group whose coordinates were varied.
    pub group: String,
    pub point: Point<R>,
    pub other_point: Point<R>,
    pub d_tnr: R,
    pub d_tpr: R,
}

/// Scan finite-difference partials of the squared measure over feasible
/// grids of both groups.
///
/// For each group `A`, the partials are taken with respect to `(tnr_A,
/// tpr_A)` on a `grid_n x grid_n` grid of `A`'s achievable set while the
/// other group's point ranges over its own grid. Central differences with
/// step `1e-5`, one-sided where the step leaves the feasible box. The check
/// passes when `min(d/d_tnr, d/d_tpr) <= 1e-7` everywhere; the witness is
/// the first violating cell in scan order (group, varied point, fixed
/// point).
pub fn check_first_quadrant_condition<R: Real>(
    id: FairnessId,
    problem: &GroupedProblem<R>,
    grid_n: usize,
) -> Result<FqcReport<R>> {
    if grid_n < 8 {
        return Err(Error::InvalidConfig(format!("grid_n {grid_n} < 8")));
    }
    let [(id_a, group_a), (id_b, group_b)] = problem.pair()?;
    let stats = [GroupStats::of_group(group_a), GroupStats::of_group(group_b)];
    let names = [id_a, id_b];
    let grids = [
        feasible_grid(&IpsGeometry::from_distribution(&group_a.dist), grid_n),
        feasible_grid(&IpsGeometry::from_distribution(&group_b.dist), grid_n),
    ];

    let step = R::c(1e-5);
    let threshold = R::c(1e-7);
    let mut cells = 0usize;
    for varied in 0..2 {
        let fixed = 1 - varied;
        for &point in &grids[varied] {
            for &other in &grids[fixed] {
                cells += 1;
                let squared = |p: Point<R>| -> Result<R> {
                    let (x0, x1) = if varied == 0 { (p, other) } else { (other, p) };
                    let d = scalar_statistic(id, x1, stats[1])?
                        - scalar_statistic(id, x0, stats[0])?;
                    Ok(d * d)
                };
                let d_tnr = partial(
                    |v| squared(Point::new(v, point.tpr)),
                    point.tnr,
                    step,
                    R::zero(),
                    stats[varied].p0,
                )?;
                let d_tpr = partial(
                    |v| squared(Point::new(point.tnr, v)),
                    point.tpr,
                    step,
                    R::zero(),
                    stats[varied].p1,
                )?;
                if d_tnr.min(d_tpr) > threshold {
                    return Ok(FqcReport {
                        passes: false,
                        witness: Some(FqcWitness {
                            group: names[varied].to_string(),
                            point,
                            other_point: other,
                            d_tnr,
                            d_tpr,
                        }),
                        grid_n,
                        cells_checked: cells,
                    });
                }
            }
        }
    }
    Ok(FqcReport {
        passes: true,
        witness: None,
        grid_n,
        cells_checked: cells,
    })
}

/// Finite difference of `f` at `x`, clipped to `[lo, hi]`.
fn partial<R: Real>(f: impl Fn(R) -> Result<R>, x: R, step: R, lo: R, hi: R) -> Result<R> {
    let above = (x + step).min(hi);
    let below = (x - step).max(lo);
    if above <= below {
        return Ok(R::zero());
    }
    Ok((f(above)? - f(below)?) / (above - below))
}

/// `grid_n x grid_n` points spread over the achievable set: `grid_n` columns
/// in `tnr`, each holding `grid_n` points between the lower and upper
/// frontier.
pub fn feasible_grid<R: Real>(ips: &IpsGeometry<R>, grid_n: usize) -> Vec<Point<R>> {
    let (p0, _) = ips.base_rates();
    let denom = R::from_usize(grid_n - 1).unwrap();
    let mut points = Vec::with_capacity(grid_n * grid_n);
    for i in 0..grid_n {
        let tnr = p0 * R::from_usize(i).unwrap() / denom;
        let lo = ips.lower_at(tnr);
        let hi = ips.upper_at(tnr);
        for j in 0..grid_n {
            let tpr = lo + (hi - lo) * R::from_usize(j).unwrap() / denom;
            points.push(Point::new(tnr, tpr));
        }
    }
    points
}

impl<R: Real> fmt::Display for MetricId<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricId::Accuracy => write!(f, "accuracy"),
            MetricId::ImmediateUtility(t) => write!(f, "immediate_utility:{t}"),
            MetricId::Precision => write!(f, "precision"),
            MetricId::SaturatingLinear { a, b, cap_tnr, cap_tpr } => {
                write!(f, "saturating:{a},{b},{cap_tnr},{cap_tpr}")
            }
        }
    }
}

impl<R: Real> FromStr for MetricId<R> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_real = |text: &str| -> Result<R> {
            text.trim()
                .parse::<f64>()
                .map(R::c)
                .map_err(|_| Error::Parse(format!("bad number `{text}`")))
        };
        let id = match s {
            "accuracy" => MetricId::Accuracy,
            "precision" => MetricId::Precision,
            other => {
                if let Some(arg) = other.strip_prefix("immediate_utility:") {
                    MetricId::ImmediateUtility(parse_real(arg)?)
                } else if let Some(args) = other.strip_prefix("saturating:") {
                    let parts: Vec<&str> = args.split(',').collect();
                    if parts.len() != 4 {
                        return Err(Error::Parse(format!(
                            "saturating takes a,b,cap_tnr,cap_tpr: `{s}`"
                        )));
                    }
                    MetricId::SaturatingLinear {
                        a: parse_real(parts[0])?,
                        b: parse_real(parts[1])?,
                        cap_tnr: parse_real(parts[2])?,
                        cap_tpr: parse_real(parts[3])?,
                    }
                } else {
                    return Err(Error::Parse(format!("unknown metric `{s}`")));
                }
            }
        };
        id.validate()?;
        Ok(id)
    }
}

impl fmt::Display for FairnessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FairnessId::Dp => "dp",
            FairnessId::Eo => "eo",
            FairnessId::Er => "er",
            FairnessId::PredictiveParity => "predictive_parity",
        };
        write!(f, "{name}")
    }
}

impl FromStr for FairnessId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(FairnessId::Dp),
            "eo" => Ok(FairnessId::Eo),
            "er" => Ok(FairnessId::Er),
            "predictive_parity" => Ok(FairnessId::PredictiveParity),
            _ => Err(Error::Parse(format!("unknown fairness measure `{s}`"))),
        }
    }
}
