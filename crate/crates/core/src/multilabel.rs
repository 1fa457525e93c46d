//! n-label confusion matrices, their two pre-orders, and weighted-argmax
//! partitions of the probability simplex.
//!
//! The prediction pre-order compares diagonals; the error pre-order compares
//! off-diagonals with the opposite sense (fewer errors is better). For two
//! labels the orders coincide; for three or more only
//! error-better implies prediction-better.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of comparing two matrices under a pre-order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    Equivalent,
    Incomparable,
}

/// Joint confusion matrix: entry `(i, j)` is `P(predicted = y_j, actual = y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix<R> {
    n: usize,
    entries: Vec<R>,
}

impl<R: Real> ConfusionMatrix<R> {
    /// Build from row-major entries; they must be non-negative and sum to 1.
    pub fn new(n: usize, entries: Vec<R>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {n}x{n} entries, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|&e| e < R::zero() || !e.is_finite()) {
            return Err(Error::InvalidMatrix("negative entry".into()));
        }
        let total: R = entries.iter().copied().sum();
        if (total - R::one()).abs() > R::tol(1e-12) {
            return Err(Error::InvalidMatrix(format!(
                "entries sum to {}",
                total.as_f64()
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.entries[i * self.n + j]
    }

    pub fn diagonal(&self) -> Vec<R> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

fn classify(strictly_less: bool, strictly_greater: bool) -> Comparison {
    match (strictly_less, strictly_greater) {
        (true, true) => Comparison::Incomparable,
        (true, false) => Comparison::Less,
        (false, true) => Comparison::Greater,
        (false, false) => Comparison::Equivalent,
    }
}

/// Compare prediction probabilities (diagonals) componentwise.
pub fn pareto_compare<R: Real>(
    a: &ConfusionMatrix<R>,
    b: &ConfusionMatrix<R>,
) -> Result<Comparison> {
    if a.n != b.n {
        return Err(Error::SizeMismatch { a: a.n, b: b.n });
    }
    let tol = R::tol(1e-12);
    let mut less = false;
    let mut greater = false;
    for i in 0..a.n {
        let d = b.get(i, i) - a.get(i, i);
        if d > tol {
            less = true;
        } else if d < -tol {
            greater = true;
        }
    }
    Ok(classify(less, greater))
}

/// Compare error probabilities (off-diagonals) componentwise; having more
/// error everywhere means comparing lower.
pub fn error_compare<R: Real>(
    a: &ConfusionMatrix<R>,
    b: &ConfusionMatrix<R>,
) -> Result<Comparison> {
    if a.n != b.n {
        return Err(Error::SizeMismatch { a: a.n, b: b.n });
    }
    let tol = R::tol(1e-12);
    let mut less = false;
    let mut greater = false;
    for i in 0..a.n {
        for j in 0..a.n {
            if i == j {
                continue;
            }
            let d = a.get(i, j) - b.get(i, j);
            if d > tol {
                less = true;
            } else if d < -tol {
                greater = true;
            }
        }
    }
    Ok(classify(less, greater))
}

/// Matrix of pairwise weight-ratio limits, entry `(i, j)` in `[0, +inf]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitRatioMatrix<R> {
    n: usize,
    entries: Vec<R>,
}

impl<R: Real> LimitRatioMatrix<R> {
    /// Validate unit diagonal, reciprocal pairs (`0` pairing with `inf`),
    /// and multiplicative consistency on finite nonzero triples.
    pub fn new(n: usize, entries: Vec<R>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InconsistentRatios(format!(
                "expected {n}x{n} entries, got {}",
                entries.len()
            )));
        }
        let m = Self { n, entries };
        let tol = R::tol(1e-9);
        for i in 0..n {
            if (m.get(i, i) - R::one()).abs() > tol {
                return Err(Error::InconsistentRatios(format!("entry ({i},{i}) != 1")));
            }
            for j in 0..n {
                let rij = m.get(i, j);
                let rji = m.get(j, i);
                if rij < R::zero() || rij.is_nan() {
                    return Err(Error::InconsistentRatios(format!(
                        "entry ({i},{j}) must be in [0, inf]"
                    )));
                }
                let fine = if rij == R::zero() {
                    rji == R::infinity()
                } else if rij == R::infinity() {
                    rji == R::zero()
                } else {
                    (rij * rji - R::one()).abs() <= tol * rij.max(R::one())
                };
                if !fine {
                    return Err(Error::InconsistentRatios(format!(
                        "entries ({i},{j}) and ({j},{i}) are not reciprocal"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (rij, rjk, rik) = (m.get(i, j), m.get(j, k), m.get(i, k));
                    let all_finite_nonzero = [rij, rjk, rik]
                        .iter()
                        .all(|&r| r > R::zero() && r.is_finite());
                    if all_finite_nonzero
                        && (rij * rjk - rik).abs() > tol * rik.max(R::one())
                    {
                        return Err(Error::InconsistentRatios(format!(
                            "({i},{j})*({j},{k}) != ({i},{k})"
                        )));
                    }
                }
            }
        }
        Ok(m)
    }

    /// Ratios of a fixed interior weight vector: entry `(i, j) = w_i / w_j`.
    pub fn from_weights(weights: &[R]) -> Result<Self> {
        check_interior_weights(weights)?;
        let n = weights.len();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(weights[i] / weights[j]);
            }
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.entries[i * self.n + j]
    }
}

fn check_interior_weights<R: Real>(weights: &[R]) -> Result<()> {
    if weights.len() < 2 || weights.iter().any(|&w| w <= R::zero() || !w.is_finite()) {
        return Err(Error::InvalidWeights);
    }
    let sum: R = weights.iter().copied().sum();
    if (sum - R::one()).abs() > R::tol(1e-12) {
        return Err(Error::InvalidWeights);
    }
    Ok(())
}

/// One labeled cell of a simplex grid: integer barycentrics `coords`
/// (summing to the grid size) and the allowed label indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexCell {
    pub coords: Vec<usize>,
    pub labels: Vec<usize>,
}

/// Labeling of the barycentric grid of the `(n-1)`-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexLabeling {
    pub n: usize,
    pub grid: usize,
    pub cells: Vec<SimplexCell>,
    /// Cells whose allowed-label set came out empty (never expected for
    /// consistent inputs; reported rather than asserted).
    pub empty_cells: usize,
}

fn enumerate_grid(n: usize, grid: usize, mut visit: impl FnMut(&[usize])) {
    let mut coords = vec![0usize; n];
    fn rec(coords: &mut Vec<usize>, pos: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
        if pos + 1 == coords.len() {
            coords[pos] = left;
            visit(coords);
            return;
        }
        for k in 0..=left {
            coords[pos] = k;
            rec(coords, pos + 1, left - k, visit);
        }
    }
    rec(&mut coords, 0, grid, &mut visit);
}

/// Label every grid point of the simplex with the labels maximizing
/// `t_i / w_i` (ties, within 1e-12 on the ratios, produce multi-label
/// boundary cells).
pub fn weller_partition<R: Real>(weights: &[R], grid: usize) -> Result<SimplexLabeling> {
    check_interior_weights(weights)?;
    if grid < 2 {
        return Err(Error::InvalidConfig("grid must be >= 2".into()));
    }
    let n = weights.len();
    let g = R::from_usize(grid).unwrap();
    let tie = R::tol(1e-12);
    let mut cells = Vec::new();
    enumerate_grid(n, grid, |coords| {
        let ratios: Vec<R> = coords
            .iter()
            .zip(weights)
            .map(|(&k, &w)| R::from_usize(k).unwrap() / g / w)
            .collect();
        let best = ratios.iter().copied().fold(R::neg_infinity(), R::max);
        let labels: Vec<usize> = (0..n).filter(|&i| ratios[i] >= best - tie).collect();
        cells.push(SimplexCell {
            coords: coords.to_vec(),
            labels,
        });
    });
    Ok(SimplexLabeling {
        n,
        grid,
        cells,
        empty_cells: 0,
    })
}

/// Label every grid point under the limit-ratio rule: label `i` is allowed
/// at `t` iff `t_i > 0` and, for every `j`, `t_i / t_j >= R_ij` — where a
/// zero `t_j` satisfies any bound and an infinite `R_ij` can only be met by
/// `t_j = 0`.
pub fn weller_limit_partition<R: Real>(
    ratios: &LimitRatioMatrix<R>,
    grid: usize,
) -> Result<SimplexLabeling> {
    if grid < 2 {
        return Err(Error::InvalidConfig("grid must be >= 2".into()));
    }
    let n = ratios.n();
    let g = R::from_usize(grid).unwrap();
    let tie = R::tol(1e-12);
    let mut cells = Vec::new();
    let mut empty = 0usize;
    enumerate_grid(n, grid, |coords| {
        let t: Vec<R> = coords
            .iter()
            .map(|&k| R::from_usize(k).unwrap() / g)
            .collect();
        let mut labels = Vec::new();
        'label: for i in 0..n {
            if t[i] == R::zero() {
                continue;
            }
            for j in 0..n {
                if j == i || t[j] == R::zero() {
                    continue;
                }
                let bound = ratios.get(i, j);
                if bound == R::infinity() || t[i] / t[j] < bound - tie {
                    continue 'label;
                }
            }
            labels.push(i);
        }
        if labels.is_empty() {
            empty += 1;
        }
        cells.push(SimplexCell {
            coords: coords.to_vec(),
            labels,
        });
    });
    Ok(SimplexLabeling {
        n,
        grid,
        cells,
        empty_cells: empty,
    })
}
