//! Synthetic instance builders.
//!
//! The adversarial pair is the workhorse: it splits a base population into a
//! majority carrying the base distribution and a minority whose scores are
//! contracted toward per-bin means. The contraction preserves each bin's
//! first moment, so the two groups share base rates exactly and their
//! achievable sets are nested with both endpoints shared. Away from
//! coarse-bin boundaries the minority frontier drops strictly inside; at a
//! bin boundary the cumulative bin totals coincide, so multi-bin
//! contractions touch the outer frontier there (single-bin contraction is
//! strictly interior at every interior vertex).

use crate::error::{Error, Result};
use crate::ips::{symmetric_difference_area, IpsGeometry};
use crate::problem::{Group, GroupedProblem, ScoreDistribution};
use crate::scalar::Real;
use std::collections::BTreeMap;

/// Fixed density menu for binned score distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityId {
    /// Constant density.
    Uniform,
    /// `1 - 2|x - 1/2|`: peaked at one half.
    Tent,
    /// `1/sqrt(x(1-x))`: the arcsine density, piled at both ends.
    UShape,
}

impl DensityId {
    fn eval<R: Real>(self, x: R) -> R {
        match self {
            DensityId::Uniform => R::one(),
            DensityId::Tent => R::one() - R::c(2.0) * (x - R::c(0.5)).abs(),
            DensityId::UShape => R::one() / (x * (R::one() - x)).sqrt(),
        }
    }
}

/// What to generate.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind<R> {
    /// Single group, atoms `[(0.3, 0.5), (0.9, 0.5)]`.
    TwoPoint,
    /// Single group, `bins` atoms at bin midpoints weighted by `density`.
    BinnedDensity { bins: usize, density: DensityId },
    /// Two groups with equal base rates: majority = `base`, minority =
    /// per-coarse-bin mean-preserving contraction of `base` by factor
    /// `gamma`.
    AdversarialPair {
        base: Box<GeneratorKind<R>>,
        coarse_bins: usize,
        gamma: R,
        eps_prime: R,
    },
    /// Adversarial pair in the full-collapse limit: each coarse bin of the
    /// minority contracts to its mean.
    LemmaPartition {
        base: Box<GeneratorKind<R>>,
        coarse_bins: usize,
        eps_prime: R,
    },
}

/// A generator kind plus a seed. All current kinds are deterministic; the
/// seed is carried into run manifests so future randomized kinds reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig<R> {
    pub kind: GeneratorKind<R>,
    pub seed: u64,
}

impl<R: Real> GeneratorConfig<R> {
    pub fn new(kind: GeneratorKind<R>) -> Self {
        Self { kind, seed: 0 }
    }
}

fn base_distribution<R: Real>(kind: &GeneratorKind<R>) -> Result<ScoreDistribution<R>> {
    match kind {
        GeneratorKind::TwoPoint => {
            ScoreDistribution::new([(R::c(0.3), R::c(0.5)), (R::c(0.9), R::c(0.5))])
        }
        GeneratorKind::BinnedDensity { bins, density } => {
            if *bins < 1 {
                return Err(Error::InvalidConfig("bins must be >= 1".into()));
            }
            let b = R::from_usize(*bins).unwrap();
            let pairs: Vec<(R, R)> = (0..*bins)
                .map(|k| {
                    let mid = (R::from_usize(2 * k + 1).unwrap()) / (R::c(2.0) * b);
                    (mid, density.eval(mid))
                })
                .collect();
            ScoreDistribution::new(pairs)
        }
        _ => Err(Error::InvalidConfig(
            "base of a pair generator must be single-group".into(),
        )),
    }
}

/// Contract each coarse bin's scores toward the bin's mass-weighted mean:
/// `s -> mean + gamma * (s - mean)`. Masses are untouched, so each bin's
/// first moment — and hence the base rate — is preserved exactly.
fn contract_bins<R: Real>(
    dist: &ScoreDistribution<R>,
    coarse_bins: usize,
    gamma: R,
) -> Result<ScoreDistribution<R>> {
    if coarse_bins < 1 {
        return Err(Error::InvalidConfig("coarse_bins must be >= 1".into()));
    }
    let cb = R::from_usize(coarse_bins).unwrap();
    let bin_of = |score: R| -> usize {
        let idx = (score * cb).floor().to_usize().unwrap_or(0);
        idx.min(coarse_bins - 1)
    };
    let mut bin_mass = vec![R::zero(); coarse_bins];
    let mut bin_moment = vec![R::zero(); coarse_bins];
    for atom in dist.atoms() {
        let b = bin_of(atom.score);
        bin_mass[b] += atom.mass;
        bin_moment[b] += atom.mass * atom.score;
    }
    for b in 0..coarse_bins {
        if bin_mass[b] > R::zero() {
            let mean = bin_moment[b] / bin_mass[b];
            let has_spread = dist
                .atoms()
                .iter()
                .any(|a| bin_of(a.score) == b && (a.score - mean).abs() > R::tol(1e-12));
            if !has_spread {
                return Err(Error::InvalidConfig(format!(
                    "coarse bin {b} has no score variance"
                )));
            }
        }
    }
    let pairs: Vec<(R, R)> = dist
        .atoms()
        .iter()
        .map(|atom| {
            let b = bin_of(atom.score);
            let mean = bin_moment[b] / bin_mass[b];
            (mean + gamma * (atom.score - mean), atom.mass)
        })
        .collect();
    ScoreDistribution::new(pairs)
}

/// Materialize a config into a grouped problem. Pair kinds name the minority
/// `a0` and the majority `a1`.
pub fn generate<R: Real>(config: &GeneratorConfig<R>) -> Result<GroupedProblem<R>> {
    match &config.kind {
        GeneratorKind::TwoPoint | GeneratorKind::BinnedDensity { .. } => {
            let dist = base_distribution(&config.kind)?;
            Ok(GroupedProblem::single("g", dist))
        }
        GeneratorKind::AdversarialPair {
            base,
            coarse_bins,
            gamma,
            eps_prime,
        } => {
            if !(*gamma > R::zero() && *gamma < R::one()) {
                return Err(Error::InvalidConfig(format!(
                    "gamma {} outside (0, 1)",
                    gamma.as_f64()
                )));
            }
            build_pair(base, *coarse_bins, *gamma, *eps_prime)
        }
        GeneratorKind::LemmaPartition {
            base,
            coarse_bins,
            eps_prime,
        } => {
            if *coarse_bins < 2 {
                return Err(Error::InvalidConfig(
                    "the collapse limit needs at least 2 coarse bins".into(),
                ));
            }
            build_pair(base, *coarse_bins, R::zero(), *eps_prime)
        }
    }
}

fn build_pair<R: Real>(
    base: &GeneratorKind<R>,
    coarse_bins: usize,
    gamma: R,
    eps_prime: R,
) -> Result<GroupedProblem<R>> {
    if !(eps_prime > R::zero() && eps_prime < R::one()) {
        return Err(Error::InvalidConfig(format!(
            "eps_prime {} outside (0, 1)",
            eps_prime.as_f64()
        )));
    }
    let majority = base_distribution(base)?;
    if !majority.is_nondegenerate() {
        return Err(Error::DegenerateGroup("a1".into()));
    }
    let minority = contract_bins(&majority, coarse_bins, gamma)?;
    if !minority.is_nondegenerate() {
        return Err(Error::DegenerateGroup("a0".into()));
    }
    let mut groups = BTreeMap::new();
    groups.insert(
        "a0".to_string(),
        Group {
            prior: eps_prime,
            dist: minority,
        },
    );
    groups.insert(
        "a1".to_string(),
        Group {
            prior: R::one() - eps_prime,
            dist: majority,
        },
    );
    GroupedProblem::new(groups)
}

/// Measured adversarial-pair guarantees. The first group in id order is the
/// expected inner (minority) one.
#[derive(Debug, Clone, Copy)]
pub struct AdversarialReport<R> {
    /// Base rates agree to 1e-12.
    pub equal_base_rates: bool,
    /// Every non-endpoint frontier vertex of the first group lies strictly
    /// inside the second group's achievable set.
    pub strict_containment: bool,
    /// Symmetric difference of the two achievable sets is below `eps`.
    pub small_symmetric_difference: bool,
    pub base_rate_gap: R,
    pub min_frontier_gap: R,
    pub symmetric_difference: R,
}

impl<R: Real> AdversarialReport<R> {
    pub fn all_hold(&self) -> bool {
        self.equal_base_rates && self.strict_containment && self.small_symmetric_difference
    }
}

/// Check the three adversarial-pair guarantees on any two-group problem.
pub fn verify_adversarial<R: Real>(
    problem: &GroupedProblem<R>,
    eps: R,
) -> Result<AdversarialReport<R>> {
    let [(_, inner), (_, outer)] = problem.pair()?;
    let (_, p1_inner) = inner.dist.base_rates();
    let (_, p1_outer) = outer.dist.base_rates();
    let base_rate_gap = (p1_inner - p1_outer).abs();

    let ips_inner = IpsGeometry::from_distribution(&inner.dist);
    let ips_outer = IpsGeometry::from_distribution(&outer.dist);
    let mut min_gap = R::infinity();
    let vertex_count = ips_inner.upper().len();
    for (k, v) in ips_inner
        .upper()
        .iter()
        .chain(ips_inner.lower())
        .enumerate()
    {
        let endpoint = k == 0
            || k == vertex_count - 1
            || k == vertex_count
            || k == vertex_count + ips_inner.lower().len() - 1;
        if endpoint {
            continue;
        }
        let above = ips_outer.upper_at(v.tnr) - v.tpr;
        let below = v.tpr - ips_outer.lower_at(v.tnr);
        min_gap = min_gap.min(above).min(below);
    }
    let symmetric_difference = symmetric_difference_area(&ips_inner, &ips_outer);
    Ok(AdversarialReport {
        equal_base_rates: base_rate_gap <= R::tol(1e-12),
        strict_containment: min_gap.is_finite() && min_gap > R::zero(),
        small_symmetric_difference: symmetric_difference < eps,
        base_rate_gap,
        min_frontier_gap: min_gap,
        symmetric_difference,
    })
}

/// The reproducible 20-instance two-group battery used by the experiment
/// commands: adversarial pairs over five base shapes, two contraction
/// factors, and two minority shares.
pub fn standard_battery<R: Real>() -> Vec<(String, GroupedProblem<R>)> {
    let bases: [(&str, GeneratorKind<R>); 5] = [
        (
            "uniform8",
            GeneratorKind::BinnedDensity {
                bins: 8,
                density: DensityId::Uniform,
            },
        ),
        (
            "tent8",
            GeneratorKind::BinnedDensity {
                bins: 8,
                density: DensityId::Tent,
            },
        ),
        (
            "ushape8",
            GeneratorKind::BinnedDensity {
                bins: 8,
                density: DensityId::UShape,
            },
        ),
        (
            "uniform6",
            GeneratorKind::BinnedDensity {
                bins: 6,
                density: DensityId::Uniform,
            },
        ),
        (
            "tent10",
            GeneratorKind::BinnedDensity {
                bins: 10,
                density: DensityId::Tent,
            },
        ),
    ];
    let mut battery = Vec::with_capacity(20);
    for (name, base) in bases {
        for (gtag, gamma) in [("g25", 0.25), ("g50", 0.5)] {
            for (etag, eps) in [("e20", 0.2), ("e50", 0.5)] {
                let config = GeneratorConfig::new(GeneratorKind::AdversarialPair {
                    base: Box::new(base.clone()),
                    coarse_bins: 2,
                    gamma: R::c(gamma),
                    eps_prime: R::c(eps),
                });
                let problem = generate(&config).expect("battery configs are valid");
                battery.push((format!("adv_{name}_{gtag}_{etag}"), problem));
            }
        }
    }
    battery
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_base_rates() {
        let p: GroupedProblem<f64> = generate(&GeneratorConfig::new(GeneratorKind::TwoPoint)).unwrap();
        let (p0, p1) = p.group("g").unwrap().dist.base_rates();
        assert!((p0 - 0.4).abs() < 1e-15);
        assert!((p1 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn adversarial_contraction_hand_values() {
        let config = GeneratorConfig::new(GeneratorKind::AdversarialPair {
            base: Box::new(GeneratorKind::TwoPoint),
            coarse_bins: 1,
            gamma: 0.5,
            eps_prime: 0.25,
        });
        let p: GroupedProblem<f64> = generate(&config).unwrap();
        let a0 = p.group("a0").unwrap();
        let a1 = p.group("a1").unwrap();
        assert!((a0.prior - 0.25).abs() < 1e-15);
        assert!((a1.prior - 0.75).abs() < 1e-15);
        assert!((a0.dist.atoms()[0].score - 0.45).abs() < 1e-15);
        assert!((a0.dist.atoms()[1].score - 0.75).abs() < 1e-15);
        let (_, p1_a0) = a0.dist.base_rates();
        assert!((p1_a0 - 0.6).abs() < 1e-14);

        // The minority's interior frontier vertex sits strictly inside the
        // majority's set: upper_a1(0.275) ≈ 0.4821 > 0.375.
        let ips1 = IpsGeometry::from_distribution(&a1.dist);
        let v = IpsGeometry::from_distribution(&a0.dist).upper()[1];
        assert!((v.tnr - 0.275).abs() < 1e-15);
        assert!((v.tpr - 0.375).abs() < 1e-15);
        assert!((ips1.upper_at(0.275) - 0.48214285714285715).abs() < 1e-12);
    }

    #[test]
    fn verify_adversarial_example() {
        let config = GeneratorConfig::new(GeneratorKind::AdversarialPair {
            base: Box::new(GeneratorKind::TwoPoint),
            coarse_bins: 1,
            gamma: 0.5,
            eps_prime: 0.25,
        });
        let p: GroupedProblem<f64> = generate(&config).unwrap();
        let report = verify_adversarial(&p, 0.1).unwrap();
        assert!(report.all_hold());
        assert!((report.symmetric_difference - 0.075).abs() < 1e-12);

        // Tighter eps flips only the area check.
        let tight = verify_adversarial(&p, 0.05).unwrap();
        assert!(tight.equal_base_rates && tight.strict_containment);
        assert!(!tight.small_symmetric_difference);
    }

    #[test]
    fn identical_groups_fail_strictness() {
        let dist = ScoreDistribution::new([(0.3, 0.5), (0.9, 0.5)]).unwrap();
        let mut groups = BTreeMap::new();
        groups.insert("a0".to_string(), Group { prior: 0.5, dist: dist.clone() });
        groups.insert("a1".to_string(), Group { prior: 0.5, dist });
        let p = GroupedProblem::new(groups).unwrap();
        let report = verify_adversarial(&p, 0.1).unwrap();
        assert!(report.equal_base_rates);
        assert!(!report.strict_containment);
        assert!(report.small_symmetric_difference);
    }

    #[test]
    fn collapse_limit_requires_spread_bins() {
        let config = GeneratorConfig::new(GeneratorKind::LemmaPartition {
            base: Box::new(GeneratorKind::TwoPoint),
            coarse_bins: 1,
            eps_prime: 0.5,
        });
        assert!(generate::<f64>(&config).is_err());

        let ok = GeneratorConfig::new(GeneratorKind::LemmaPartition {
            base: Box::new(GeneratorKind::BinnedDensity {
                bins: 8,
                density: DensityId::Uniform,
            }),
            coarse_bins: 2,
            eps_prime: 0.5,
        });
        let p: GroupedProblem<f64> = generate(&ok).unwrap();
        assert_eq!(p.group("a0").unwrap().dist.atoms().len(), 2);
        let report = verify_adversarial(&p, 1.0).unwrap();
        assert!(report.equal_base_rates);
        // In the full-collapse limit the minority's interior vertex is the
        // majority's whole-bin operating point, which lies on the majority
        // frontier: containment holds but is not strict there.
        assert!(!report.strict_containment);
        assert!(report.min_frontier_gap.abs() < 1e-12);
        assert!(report.small_symmetric_difference);
    }

    #[test]
    fn bin_mean_preserved_exactly() {
        let base = GeneratorKind::BinnedDensity {
            bins: 8,
            density: DensityId::Tent,
        };
        let majority: ScoreDistribution<f64> = base_distribution(&base).unwrap();
        for gamma in [0.25, 0.5, 0.75] {
            let contracted = contract_bins(&majority, 2, gamma).unwrap();
            let (_, p1_base) = majority.base_rates();
            let (_, p1_contr) = contracted.base_rates();
            assert!((p1_base - p1_contr).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_nesting_is_monotone() {
        let base = GeneratorKind::BinnedDensity {
            bins: 8,
            density: DensityId::Uniform,
        };
        let majority: ScoreDistribution<f64> = base_distribution(&base).unwrap();
        let inner = IpsGeometry::from_distribution(&contract_bins(&majority, 2, 0.25).unwrap());
        let mid = IpsGeometry::from_distribution(&contract_bins(&majority, 2, 0.5).unwrap());
        let outer = IpsGeometry::from_distribution(&majority);
        let (p0, _) = outer.base_rates();
        for k in 0..=64 {
            let tnr = p0 * k as f64 / 64.0;
            assert!(inner.upper_at(tnr) <= mid.upper_at(tnr) + 1e-12);
            assert!(mid.upper_at(tnr) <= outer.upper_at(tnr) + 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let config = GeneratorConfig::new(GeneratorKind::AdversarialPair {
            base: Box::new(GeneratorKind::BinnedDensity {
                bins: 8,
                density: DensityId::UShape,
            }),
            coarse_bins: 2,
            gamma: 0.5,
            eps_prime: 0.1,
        });
        let a: GroupedProblem<f64> = generate(&config).unwrap();
        let b: GroupedProblem<f64> = generate(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn standard_battery_has_twenty_equal_rate_pairs() {
        let battery: Vec<(String, GroupedProblem<f64>)> = standard_battery();
        assert_eq!(battery.len(), 20);
        for (name, problem) in &battery {
            let [(_, g0), (_, g1)] = problem.pair().unwrap();
            let (_, r0) = g0.dist.base_rates();
            let (_, r1) = g1.dist.base_rates();
            assert!((r0 - r1).abs() <= 1e-12, "{name}");
            assert!(g0.dist.is_nondegenerate() && g1.dist.is_nondegenerate());
        }
    }
}
