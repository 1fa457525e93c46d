//! Grouped binary classification problems as score distributions.
//!
//! A problem is stored directly as, per sensitive group, a finite weighted
//! set of score atoms on `[0, 1]` (the score of an atom is its conditional
//! probability of the positive label). Probabilistic decisions assign each
//! atom a probability of receiving the positive label; the auxiliary
//! `[0, 1)` coordinate of [`Slicing`] realizes the same decision as a
//! deterministic partition.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::collections::BTreeMap;

/// One weighted score atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<R> {
    pub score: R,
    pub mass: R,
}

/// A normalized score distribution: atoms sorted by ascending score, equal
/// scores merged, masses summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution<R> {
    atoms: Vec<Atom<R>>,
    positive_rate: R,
}

impl<R: Real> ScoreDistribution<R> {
    /// Build from raw `(score, mass)` pairs. Masses are normalized to sum to
    /// one; scores within `1e-12` of each other are merged.
    pub fn new(pairs: impl IntoIterator<Item = (R, R)>) -> Result<Self> {
        let mut raw: Vec<Atom<R>> = Vec::new();
        for (score, mass) in pairs {
            if score < R::zero() || score > R::one() || !score.is_finite() {
                return Err(Error::InvalidScore {
                    value: score.as_f64(),
                });
            }
            if mass <= R::zero() || !mass.is_finite() {
                return Err(Error::NonPositiveMass {
                    value: mass.as_f64(),
                });
            }
            raw.push(Atom { score, mass });
        }
        if raw.is_empty() {
            return Err(Error::NoData);
        }
        raw.sort_by(|a, b| a.score.partial_cmp(&b.score).unwrap());

        let merge_tol = R::tol(1e-12);
        let mut atoms: Vec<Atom<R>> = Vec::with_capacity(raw.len());
        for atom in raw {
            match atoms.last_mut() {
                Some(last) if atom.score - last.score <= merge_tol => {
                    // Mass-weighted score keeps the merged atom's first
                    // moment exact.
                    let total = last.mass + atom.mass;
                    last.score = (last.score * last.mass + atom.score * atom.mass) / total;
                    last.mass = total;
                }
                _ => atoms.push(atom),
            }
        }

        let total: R = atoms.iter().map(|a| a.mass).sum();
        for atom in &mut atoms {
            atom.mass /= total;
        }
        let positive_rate = atoms.iter().map(|a| a.mass * a.score).sum();
        Ok(Self {
            atoms,
            positive_rate,
        })
    }

    pub fn atoms(&self) -> &[Atom<R>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(P(Y=0), P(Y=1))` for this distribution.
    pub fn base_rates(&self) -> (R, R) {
        (R::one() - self.positive_rate, self.positive_rate)
    }

    /// True when some atom has score exactly 0 or 1. Such atoms are legal but
    /// put part of the frontier on the bounding box, so interior-slack
    /// arguments do not apply to them.
    pub fn has_boundary_scores(&self) -> bool {
        self.atoms
            .iter()
            .any(|a| a.score == R::zero() || a.score == R::one())
    }

    /// True when at least two distinct scores are present.
    pub fn is_nondegenerate(&self) -> bool {
        self.atoms.len() >= 2
    }

    /// Joint true-negative/true-positive probabilities of a decision.
    ///
    /// `tnr = Σ (1-λ_i) m_i (1-s_i)` and `tpr = Σ λ_i m_i s_i`.
    pub fn operating_point(&self, decision: &AtomDecision<R>) -> Result<(R, R)> {
        decision.check_matches(self)?;
        let mut tnr = R::zero();
        let mut tpr = R::zero();
        for (atom, &lambda) in self.atoms.iter().zip(decision.lambdas()) {
            tnr += (R::one() - lambda) * atom.mass * (R::one() - atom.score);
            tpr += lambda * atom.mass * atom.score;
        }
        Ok((tnr, tpr))
    }

    /// Realize a probabilistic decision as a deterministic partition of the
    /// auxiliary `[0, 1)` coordinate: per atom, label 0 owns `[0, 1-λ)` and
    /// label 1 owns `[1-λ, 1)`.
    pub fn lift_to_slicing(&self, decision: &AtomDecision<R>) -> Result<Slicing<R>> {
        decision.check_matches(self)?;
        let per_atom = decision
            .lambdas()
            .iter()
            .map(|&lambda| {
                let split = R::one() - lambda;
                let mut parts: [Vec<(R, R)>; 2] = [Vec::new(), Vec::new()];
                if split > R::zero() {
                    parts[0].push((R::zero(), split));
                }
                if lambda > R::zero() {
                    parts[1].push((split, R::one()));
                }
                parts
            })
            .collect();
        Ok(Slicing { per_atom })
    }
}

/// Probability of predicting the positive label, one entry per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDecision<R> {
    lambdas: Vec<R>,
}

impl<R: Real> AtomDecision<R> {
    pub fn new(lambdas: Vec<R>) -> Result<Self> {
        for &l in &lambdas {
            if !(R::zero()..=R::one()).contains(&l) || !l.is_finite() {
                return Err(Error::InvalidLambda { value: l.as_f64() });
            }
        }
        Ok(Self { lambdas })
    }

    /// All-zero (always negative) decision for `dist`.
    pub fn all_negative(dist: &ScoreDistribution<R>) -> Self {
        Self {
            lambdas: vec![R::zero(); dist.len()],
        }
    }

    /// All-one (always positive) decision for `dist`.
    pub fn all_positive(dist: &ScoreDistribution<R>) -> Self {
        Self {
            lambdas: vec![R::one(); dist.len()],
        }
    }

    pub fn lambdas(&self) -> &[R] {
        &self.lambdas
    }

    fn check_matches(&self, dist: &ScoreDistribution<R>) -> Result<()> {
        if self.lambdas.len() != dist.len() {
            return Err(Error::LengthMismatch {
                decision: self.lambdas.len(),
                atoms: dist.len(),
            });
        }
        Ok(())
    }
}

/// Deterministic partition of `atom × [0, 1)` into per-label interval unions.
#[derive(Debug, Clone)]
pub struct Slicing<R> {
    /// Per atom: half-open intervals owned by label 0 and label 1.
    pub per_atom: Vec<[Vec<(R, R)>; 2]>,
}

impl<R: Real> Slicing<R> {
    /// The 2x2 measure matrix `M[i][j] = P(predicted j, actual i)` obtained
    /// by integrating interval lengths against atom masses and scores.
    pub fn measure_matrix(&self, dist: &ScoreDistribution<R>) -> Result<[[R; 2]; 2]> {
        if self.per_atom.len() != dist.len() {
            return Err(Error::LengthMismatch {
                decision: self.per_atom.len(),
                atoms: dist.len(),
            });
        }
        let mut m = [[R::zero(); 2]; 2];
        for (atom, parts) in dist.atoms().iter().zip(&self.per_atom) {
            for (label, intervals) in parts.iter().enumerate() {
                let length: R = intervals.iter().map(|&(a, b)| b - a).sum();
                m[0][label] += atom.mass * (R::one() - atom.score) * length;
                m[1][label] += atom.mass * atom.score * length;
            }
        }
        Ok(m)
    }

    /// `(tnr, tpr)`: the diagonal of [`Self::measure_matrix`].
    pub fn operating_point(&self, dist: &ScoreDistribution<R>) -> Result<(R, R)> {
        let m = self.measure_matrix(dist)?;
        Ok((m[0][0], m[1][1]))
    }
}

/// One sensitive group: its share of the population and its score
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Group<R> {
    pub prior: R,
    pub dist: ScoreDistribution<R>,
}

/// A named family of sensitive groups with priors summing to one.
///
/// Groups iterate in lexicographic id order, which fixes the meaning of
/// "group 0" and "group 1" everywhere downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedProblem<R> {
    groups: BTreeMap<String, Group<R>>,
}

impl<R: Real> GroupedProblem<R> {
    pub fn new(groups: BTreeMap<String, Group<R>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::NoData);
        }
        for group in groups.values() {
            let p = group.prior;
            if !(p > R::zero() && p <= R::one()) {
                return Err(Error::InvalidPrior { value: p.as_f64() });
            }
        }
        let sum: R = groups.values().map(|g| g.prior).sum();
        if (sum - R::one()).abs() > R::tol(1e-12) {
            return Err(Error::PriorSum { sum: sum.as_f64() });
        }
        Ok(Self { groups })
    }

    /// Single unnamed-group problem with prior one.
    pub fn single(id: &str, dist: ScoreDistribution<R>) -> Self {
        let mut groups = BTreeMap::new();
        groups.insert(
            id.to_string(),
            Group {
                prior: R::one(),
                dist,
            },
        );
        Self { groups }
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &Group<R>)> {
        self.groups.iter().map(|(id, g)| (id.as_str(), g))
    }

    pub fn group(&self, id: &str) -> Option<&Group<R>> {
        self.groups.get(id)
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// The two groups of a binary-group problem, in id order.
    pub fn pair(&self) -> Result<[(&str, &Group<R>); 2]> {
        if self.groups.len() != 2 {
            return Err(Error::GroupCount(self.groups.len()));
        }
        let mut it = self.groups.iter();
        let a = it.next().unwrap();
        let b = it.next().unwrap();
        Ok([(a.0.as_str(), a.1), (b.0.as_str(), b.1)])
    }
}

/// Build a grouped problem from raw records `(score, weight, group id)`.
///
/// Group priors are proportional to total group weight; zero-weight records
/// are dropped after validation.
pub fn pushforward_from_dataset<R: Real>(
    records: &[(R, R, &str)],
) -> Result<GroupedProblem<R>> {
    if records.is_empty() {
        return Err(Error::NoData);
    }
    let mut by_group: BTreeMap<String, Vec<(R, R)>> = BTreeMap::new();
    let mut group_weight: BTreeMap<String, R> = BTreeMap::new();
    let mut total = R::zero();
    for &(score, weight, id) in records {
        if score < R::zero() || score > R::one() || !score.is_finite() {
            return Err(Error::InvalidScore {
                value: score.as_f64(),
            });
        }
        if weight < R::zero() || !weight.is_finite() {
            return Err(Error::NegativeWeight {
                value: weight.as_f64(),
            });
        }
        let entry = group_weight.entry(id.to_string()).or_insert_with(R::zero);
        *entry += weight;
        total += weight;
        if weight > R::zero() {
            by_group.entry(id.to_string()).or_default().push((score, weight));
        }
    }
    if total <= R::zero() {
        return Err(Error::NoData);
    }
    let mut groups = BTreeMap::new();
    for (id, weight) in group_weight {
        let Some(pairs) = by_group.remove(&id) else {
            return Err(Error::NoDataForGroup(id));
        };
        groups.insert(
            id,
            Group {
                prior: weight / total,
                dist: ScoreDistribution::new(pairs)?,
            },
        );
    }
    GroupedProblem::new(groups)
}
