//! Exact geometry of the achievable `(tnr, tpr)` set of one score
//! distribution.
//!
//! The set is a centrally symmetric convex polygon (a zonotope whose
//! generators are the per-atom displacements `(-m(1-s), m*s)`), represented
//! by its upper and lower frontier polylines between the shared endpoints
//! `(p0, 0)` and `(0, p1)`.

use crate::error::{Error, Result};
use crate::problem::{AtomDecision, ScoreDistribution};
use crate::scalar::Real;

/// A point in `(tnr, tpr)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<R> {
    pub tnr: R,
    pub tpr: R,
}

impl<R: Real> Point<R> {
    pub fn new(tnr: R, tpr: R) -> Self {
        Self { tnr, tpr }
    }
}

/// Upper and lower frontier polylines of one group's achievable set.
#[derive(Debug, Clone, PartialEq)]
pub struct IpsGeometry<R> {
    /// Concave polyline from `(p0, 0)` to `(0, p1)`: the Pareto frontier.
    upper: Vec<Point<R>>,
    /// Convex polyline from `(p0, 0)` to `(0, p1)`.
    lower: Vec<Point<R>>,
    p0: R,
    p1: R,
}

fn sweep<R: Real>(start: Point<R>, generators: &[(R, R)]) -> Vec<Point<R>> {
    let slope_tol = R::tol(1e-12);
    // Merge consecutive generators of equal slope so frontiers are minimal.
    let mut merged: Vec<(R, R)> = Vec::with_capacity(generators.len());
    for &(dx, dy) in generators {
        let mergeable = merged.last().is_some_and(|&(px, py)| {
            let both_vertical = px == R::zero() && dx == R::zero();
            let same_slope = px != R::zero()
                && dx != R::zero()
                && (py / px - dy / dx).abs() <= slope_tol;
            both_vertical || same_slope
        });
        if mergeable {
            let last = merged.last_mut().unwrap();
            last.0 += dx;
            last.1 += dy;
        } else {
            merged.push((dx, dy));
        }
    }
    let mut vertices = Vec::with_capacity(merged.len() + 1);
    vertices.push(start);
    let mut cursor = start;
    for (dx, dy) in merged {
        cursor = Point::new(cursor.tnr + dx, cursor.tpr + dy);
        vertices.push(cursor);
    }
    vertices
}

impl<R: Real> IpsGeometry<R> {
    /// Sweep construction: the upper frontier assigns the positive label to
    /// atoms in descending score order, the lower frontier in ascending
    /// order. Each atom contributes the displacement `(-m(1-s), m*s)`.
    pub fn from_distribution(dist: &ScoreDistribution<R>) -> Self {
        let (p0, p1) = dist.base_rates();
        let start = Point::new(p0, R::zero());
        let gens: Vec<(R, R)> = dist
            .atoms()
            .iter()
            .map(|a| (-a.mass * (R::one() - a.score), a.mass * a.score))
            .collect();
        let desc: Vec<(R, R)> = gens.iter().rev().copied().collect();
        let mut upper = sweep(start, &desc);
        let mut lower = sweep(start, &gens);
        // Both sweeps end at (0, p1) exactly in exact arithmetic; snap the
        // summed endpoint so the polylines share it bit-for-bit.
        let end = Point::new(R::zero(), p1);
        *upper.last_mut().unwrap() = end;
        *lower.last_mut().unwrap() = end;
        Self {
            upper,
            lower,
            p0,
            p1,
        }
    }

    /// Rebuild a geometry from a previously computed upper frontier. The
    /// lower frontier is the central reflection of the upper one.
    pub fn from_upper_frontier(upper: &[Point<R>], p1: R) -> Result<Self> {
        let dist = frontier_to_distribution(upper, p1)?;
        Ok(Self::from_distribution(&dist))
    }

    pub fn upper(&self) -> &[Point<R>] {
        &self.upper
    }

    pub fn lower(&self) -> &[Point<R>] {
        &self.lower
    }

    pub fn base_rates(&self) -> (R, R) {
        (self.p0, self.p1)
    }

    /// Vertices of the polygon walked counterclockwise without repeating the
    /// shared endpoints.
    pub fn polygon_vertices(&self) -> Vec<Point<R>> {
        let mut v: Vec<Point<R>> = self.lower.clone();
        v.extend(self.upper.iter().rev().skip(1).take(self.upper.len().saturating_sub(2)));
        v
    }

    /// Height of the upper frontier at `tnr` (clamped to `[0, p0]`).
    pub fn upper_at(&self, tnr: R) -> R {
        eval_frontier(&self.upper, tnr, true)
    }

    /// Height of the lower frontier at `tnr` (clamped to `[0, p0]`).
    pub fn lower_at(&self, tnr: R) -> R {
        eval_frontier(&self.lower, tnr, false)
    }

    /// Membership with slack `tol` on every bounding inequality.
    pub fn contains(&self, point: Point<R>, tol: R) -> bool {
        if point.tnr < -tol || point.tnr > self.p0 + tol {
            return false;
        }
        let x = clamp(point.tnr, R::zero(), self.p0);
        point.tpr >= self.lower_at(x) - tol && point.tpr <= self.upper_at(x) + tol
    }

    /// Vertical gap from a feasible point up to the Pareto frontier; zero for
    /// frontier points.
    pub fn frontier_distance(&self, point: Point<R>) -> Result<R> {
        if !self.contains(point, R::tol(1e-9)) {
            return Err(Error::InfeasiblePoint {
                tnr: point.tnr.as_f64(),
                tpr: point.tpr.as_f64(),
            });
        }
        let x = clamp(point.tnr, R::zero(), self.p0);
        Ok((self.upper_at(x) - point.tpr).max(R::zero()))
    }

    /// Polygon area via the pairwise cross products of the upper-frontier
    /// segment vectors (the zonotope generators).
    pub fn area(&self) -> R {
        // Σ_{i<j} |d_i × d_j| with all crosses of one sign for a concave
        // sweep, so prefix sums give it in linear time.
        let mut acc = R::zero();
        let mut sum_dx = R::zero();
        let mut sum_dy = R::zero();
        for w in self.upper.windows(2) {
            let dx = w[1].tnr - w[0].tnr;
            let dy = w[1].tpr - w[0].tpr;
            acc += sum_dx * dy - sum_dy * dx;
            sum_dx += dx;
            sum_dy += dy;
        }
        acc.abs()
    }

    /// Polygon area as the integral of `upper - lower` over `tnr`; agrees
    /// with [`Self::area`] to 1e-12 (cross-checked by the test suite).
    pub fn area_between_frontiers(&self) -> R {
        (integral(&self.lower) - integral(&self.upper)).abs()
    }

    /// Largest `e >= 0` such that `point + (e, e)` stays feasible. Zero for
    /// points on the upper-right boundary.
    pub fn diagonal_slack(&self, point: Point<R>) -> R {
        if !self.contains(point, R::tol(1e-9)) {
            return R::zero();
        }
        let budget_tnr = self.p0 - point.tnr;
        if budget_tnr <= R::zero() {
            return R::zero();
        }
        // phi(e) = upper(tnr + e) - (tpr + e) is strictly decreasing, so walk
        // the frontier segments left of p0 until it changes sign.
        let mut best = budget_tnr;
        let mut prev_x = point.tnr;
        let mut prev_phi = self.upper_at(point.tnr) - point.tpr;
        if prev_phi < R::zero() {
            return R::zero();
        }
        for v in self.upper.iter().rev() {
            if v.tnr <= prev_x {
                continue;
            }
            let x = v.tnr.min(self.p0);
            let e = x - point.tnr;
            let phi = self.upper_at(x) - point.tpr - e;
            if phi < R::zero() {
                // Root inside (prev_x, x): linear interpolation is exact on a
                // single segment.
                let t = prev_phi / (prev_phi - phi);
                let root = (prev_x - point.tnr) + t * (x - prev_x);
                best = best.min(root);
                return best.max(R::zero());
            }
            prev_x = x;
            prev_phi = phi;
            if x >= self.p0 {
                break;
            }
        }
        best.max(R::zero())
    }
}

fn clamp<R: Real>(x: R, lo: R, hi: R) -> R {
    x.max(lo).min(hi)
}

/// Interpolate a frontier polyline (stored with non-increasing `tnr`) at
/// abscissa `x`, clamped to the polyline's range. Vertical wall segments
/// (atoms with boundary score) resolve to the max height for the upper
/// frontier and the min height for the lower one.
fn eval_frontier<R: Real>(poly: &[Point<R>], x: R, upper: bool) -> R {
    let first = poly[0];
    let last = poly[poly.len() - 1];
    if x >= first.tnr {
        // Walk the leading wall at tnr = p0, if any.
        let mut y = first.tpr;
        for v in poly.iter().take_while(|v| v.tnr == first.tnr) {
            y = if upper { y.max(v.tpr) } else { y.min(v.tpr) };
        }
        return y;
    }
    if x <= last.tnr {
        let mut y = last.tpr;
        for v in poly.iter().rev().take_while(|v| v.tnr == last.tnr) {
            y = if upper { y.max(v.tpr) } else { y.min(v.tpr) };
        }
        return y;
    }
    // Binary search for the segment with v[i].tnr >= x >= v[i+1].tnr.
    let mut lo = 0;
    let mut hi = poly.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if poly[mid].tnr >= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = poly[lo];
    let b = poly[hi];
    if a.tnr == b.tnr {
        return if upper { a.tpr.max(b.tpr) } else { a.tpr.min(b.tpr) };
    }
    let t = (x - a.tnr) / (b.tnr - a.tnr);
    a.tpr + t * (b.tpr - a.tpr)
}

fn integral<R: Real>(poly: &[Point<R>]) -> R {
    let mut acc = R::zero();
    for w in poly.windows(2) {
        acc += (w[1].tnr - w[0].tnr) * (w[0].tpr + w[1].tpr) * R::c(0.5);
    }
    acc
}

/// Area of the symmetric difference of two achievable sets, by exact
/// strip-wise integration over `tnr`.
///
/// Strips are cut at every frontier vertex of either geometry and at every
/// crossing of the four frontier pairs, so the slice symmetric-difference
/// length is linear on each strip and the trapezoid rule is exact.
pub fn symmetric_difference_area<R: Real>(a: &IpsGeometry<R>, b: &IpsGeometry<R>) -> R {
    let (p0a, _) = a.base_rates();
    let (p0b, _) = b.base_rates();
    let mut xs: Vec<R> = Vec::new();
    xs.push(R::zero());
    xs.push(p0a);
    xs.push(p0b);
    for v in a
        .upper()
        .iter()
        .chain(a.lower())
        .chain(b.upper())
        .chain(b.lower())
    {
        xs.push(v.tnr);
    }
    xs.retain(|&x| x >= R::zero());
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();

    let slice = |g: &IpsGeometry<R>, p0: R, x: R| -> Option<(R, R)> {
        if x > p0 {
            None
        } else {
            Some((g.lower_at(x), g.upper_at(x)))
        }
    };

    let mut total = R::zero();
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 - x0 <= R::zero() {
            continue;
        }
        // Refine at crossings of upper/upper and lower/lower, then at
        // overlap sign changes; all are linear inside the strip.
        let mut cuts = vec![x0, x1];
        let sa0 = slice(a, p0a, x0);
        let sb0 = slice(b, p0b, x0);
        let sa1 = slice(a, p0a, x1);
        let sb1 = slice(b, p0b, x1);
        if let (Some(a0), Some(b0), Some(a1), Some(b1)) = (sa0, sb0, sa1, sb1) {
            for (f0, f1) in [
                (a0.1 - b0.1, a1.1 - b1.1), // upper vs upper
                (a0.0 - b0.0, a1.0 - b1.0), // lower vs lower
                (a0.1 - b0.0, a1.1 - b1.0), // a's upper vs b's lower
                (b0.1 - a0.0, b1.1 - a1.0), // b's upper vs a's lower
            ] {
                if (f0 < R::zero()) != (f1 < R::zero()) && f0 != f1 {
                    let t = f0 / (f0 - f1);
                    cuts.push(x0 + t * (x1 - x0));
                }
            }
        }
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        cuts.dedup();
        let sym_len = |x: R| -> R {
            let sa = slice(a, p0a, x);
            let sb = slice(b, p0b, x);
            match (sa, sb) {
                (None, None) => R::zero(),
                (Some((lo, up)), None) | (None, Some((lo, up))) => up - lo,
                (Some((la, ua)), Some((lb, ub))) => {
                    let overlap = (ua.min(ub) - la.max(lb)).max(R::zero());
                    (ua - la) + (ub - lb) - R::c(2.0) * overlap
                }
            }
        };
        for c in cuts.windows(2) {
            let (u0, u1) = (c[0], c[1]);
            if u1 - u0 <= R::zero() {
                continue;
            }
            total += (u1 - u0) * (sym_len(u0) + sym_len(u1)) * R::c(0.5);
        }
    }
    total.max(R::zero())
}

/// Invert a Pareto frontier back into its score distribution: a segment with
/// displacement `(Δtnr, Δtpr)` encodes one atom with score
/// `Δtpr / (Δtpr - Δtnr)` and mass `Δtpr - Δtnr`.
pub fn frontier_to_distribution<R: Real>(
    upper: &[Point<R>],
    p1: R,
) -> Result<ScoreDistribution<R>> {
    if upper.len() < 2 {
        return Err(Error::NotAFrontier {
            reason: "fewer than two vertices".into(),
        });
    }
    let p0 = R::one() - p1;
    let tol = R::tol(1e-9);
    let first = upper[0];
    let last = upper[upper.len() - 1];
    if (first.tnr - p0).abs() > tol || first.tpr.abs() > tol {
        return Err(Error::NotAFrontier {
            reason: format!("must start at (1 - p1, 0), got ({}, {})", first.tnr, first.tpr),
        });
    }
    if last.tnr.abs() > tol || (last.tpr - p1).abs() > tol {
        return Err(Error::NotAFrontier {
            reason: format!("must end at (0, p1), got ({}, {})", last.tnr, last.tpr),
        });
    }
    let mut atoms: Vec<(R, R)> = Vec::with_capacity(upper.len() - 1);
    let mut prev_score: Option<R> = None;
    for w in upper.windows(2) {
        let d_tnr = w[1].tnr - w[0].tnr;
        let d_tpr = w[1].tpr - w[0].tpr;
        let mass = d_tpr - d_tnr;
        if mass <= R::zero() {
            if d_tnr.abs() <= R::tol(1e-15) && d_tpr.abs() <= R::tol(1e-15) {
                continue; // zero-length segment
            }
            return Err(Error::NotAFrontier {
                reason: "not monotone up-left".into(),
            });
        }
        if d_tnr > R::zero() || d_tpr < R::zero() {
            return Err(Error::NotAFrontier {
                reason: "not monotone up-left".into(),
            });
        }
        let score = d_tpr / mass;
        if let Some(prev) = prev_score {
            if score > prev + R::tol(1e-12) {
                return Err(Error::NotAFrontier {
                    reason: "not concave: segment scores must decrease".into(),
                });
            }
        }
        prev_score = Some(score);
        atoms.push((score, mass));
    }
    ScoreDistribution::new(atoms)
}

/// Mirror-and-rescale view of the Pareto frontier as a ROC curve:
/// `(tnr, tpr) -> ((p0 - tnr)/p0, tpr/p1)`, concave from `(0,0)` to `(1,1)`.
pub fn frontier_to_roc<R: Real>(ips: &IpsGeometry<R>) -> Result<Vec<(R, R)>> {
    let (p0, p1) = ips.base_rates();
    if p0 <= R::zero() || p1 <= R::zero() {
        return Err(Error::DegenerateBaseRate);
    }
    Ok(ips
        .upper()
        .iter()
        .map(|v| ((p0 - v.tnr) / p0, v.tpr / p1))
        .collect())
}

/// Operating point of the threshold decision: predict positive above `t`,
/// negative below, and with probability `q` on the boundary set `{s = t}`.
/// The result always lies on the upper frontier.
pub fn threshold_operating_point<R: Real>(
    dist: &ScoreDistribution<R>,
    t: R,
    q: R,
) -> Result<(R, R)> {
    let tol = R::tol(1e-12);
    let lambdas: Vec<R> = dist
        .atoms()
        .iter()
        .map(|a| {
            if (a.score - t).abs() <= tol {
                q
            } else if a.score > t {
                R::one()
            } else {
                R::zero()
            }
        })
        .collect();
    dist.operating_point(&AtomDecision::new(lambdas)?)
}
