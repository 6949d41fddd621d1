//! Bottleneck and p-Wasserstein distances between persistence diagrams.
//!
//! Ground cost between diagram points is L∞; a point `(b, d)` sent to the
//! diagonal costs `(d - b) / 2`. Essential classes are matched among
//! themselves by birth (cost `|b1 - b2|`); if the two diagrams carry
//! different numbers of them the distance is `f64::INFINITY`.

use crate::assignment::min_cost_assignment;
use crate::error::{Error, Result};
use crate::matching::BipartiteGraph;
use crate::persistence::PersistenceDiagram;

/// Largest number of finite points (both sides together) the brute-force
/// oracles accept.
pub const BRUTE_FORCE_LIMIT: usize = 12;

pub fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

pub fn diagonal_cost(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

/// Augmented square cost matrix for the finite parts of two diagrams.
///
/// Rows are the points of `D1` followed by one diagonal slot per point of
/// `D2`; columns are the points of `D2` followed by one diagonal slot per
/// point of `D1`. Diagonal slots are interchangeable, so a slot may take any
/// point of the other diagram at that point's diagonal cost, and two slots
/// match each other at cost 0.
#[derive(Debug, Clone)]
pub struct MatchingProblem {
    left: Vec<(f64, f64)>,
    right: Vec<(f64, f64)>,
    cost: Vec<Vec<f64>>,
}

impl MatchingProblem {
    pub fn new(left: Vec<(f64, f64)>, right: Vec<(f64, f64)>) -> Self {
        let (n1, n2) = (left.len(), right.len());
        let size = n1 + n2;
        let mut cost = vec![vec![0.0; size]; size];
        for (i, row) in cost.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = match (i < n1, j < n2) {
                    (true, true) => linf(left[i], right[j]),
                    (true, false) => diagonal_cost(left[i]),
                    (false, true) => diagonal_cost(right[j]),
                    (false, false) => 0.0,
                };
            }
        }
        MatchingProblem { left, right, cost }
    }

    pub fn from_diagrams(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Self {
        MatchingProblem::new(d1.finite_pairs().collect(), d2.finite_pairs().collect())
    }

    /// `|D1| + |D2|` finite points, the side length of the square problem.
    pub fn size(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn cost(&self, row: usize, col: usize) -> f64 {
        self.cost[row][col]
    }

    /// Smallest threshold admitting a perfect matching among edges of cost at
    /// most that threshold. Binary search over the sorted distinct costs.
    pub fn bottleneck(&self) -> f64 {
        let size = self.size();
        if size == 0 {
            return 0.0;
        }
        let mut candidates: Vec<f64> = self.cost.iter().flatten().copied().collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let feasible = |t: f64| {
            let mut g = BipartiteGraph::new(size, size);
            for (i, row) in self.cost.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    if c <= t {
                        g.add_edge(i, j);
                    }
                }
            }
            g.has_perfect_matching()
        };

        // the largest candidate always admits the complete graph
        let (mut lo, mut hi) = (0, candidates.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if feasible(candidates[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        candidates[lo]
    }

    /// Minimum over perfect matchings of the sum of `cost^p`.
    pub fn min_power_sum(&self, p: f64) -> f64 {
        let powered: Vec<Vec<f64>> = self
            .cost
            .iter()
            .map(|row| row.iter().map(|c| c.powf(p)).collect())
            .collect();
        min_cost_assignment(&powered).0
    }
}

fn check_dims(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    if d1.hom_dim != d2.hom_dim {
        return Err(Error::HomDimMismatch {
            left: d1.hom_dim,
            right: d2.hom_dim,
        });
    }
    Ok(())
}

/// Sorted essential births, or `None` when the counts differ.
fn essential_pairs(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Option<Vec<(f64, f64)>> {
    let mut a: Vec<f64> = d1.essential_births().collect();
    let mut b: Vec<f64> = d2.essential_births().collect();
    if a.len() != b.len() {
        return None;
    }
    // on the line, the monotone matching is optimal for every p ≥ 1 and for p = ∞
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(a.into_iter().zip(b).collect())
}

pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    check_dims(d1, d2)?;
    let Some(essential) = essential_pairs(d1, d2) else {
        return Ok(f64::INFINITY);
    };
    let essential_cost = essential.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(MatchingProblem::from_diagrams(d1, d2).bottleneck().max(essential_cost))
}

pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::param("p", format!("must be a finite real ≥ 1, got {p}")));
    }
    check_dims(d1, d2)?;
    let Some(essential) = essential_pairs(d1, d2) else {
        return Ok(f64::INFINITY);
    };
    let essential_sum: f64 = essential.iter().map(|(a, b)| (a - b).abs().powf(p)).sum();
    let total = MatchingProblem::from_diagrams(d1, d2).min_power_sum(p) + essential_sum;
    Ok(total.powf(1.0 / p))
}

/// Every partial injection of `D1`'s finite points into `D2`'s; unmatched
/// points on either side go to the diagonal. Each call to `visit` receives
/// the list of edge costs of one such bijection.
fn enumerate_finite_matchings(left: &[(f64, f64)], right: &[(f64, f64)], visit: &mut dyn FnMut(&[f64])) {
    fn go(
        i: usize,
        left: &[(f64, f64)],
        right: &[(f64, f64)],
        used: &mut Vec<bool>,
        costs: &mut Vec<f64>,
        visit: &mut dyn FnMut(&[f64]),
    ) {
        if i == left.len() {
            let before = costs.len();
            for (j, &q) in right.iter().enumerate() {
                if !used[j] {
                    costs.push((q.1 - q.0) / 2.0);
                }
            }
            visit(costs);
            costs.truncate(before);
            return;
        }
        let x = left[i];
        costs.push((x.1 - x.0) / 2.0);
        go(i + 1, left, right, used, costs, visit);
        costs.pop();
        for j in 0..right.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            let y = right[j];
            costs.push((x.0 - y.0).abs().max((x.1 - y.1).abs()));
            go(i + 1, left, right, used, costs, visit);
            costs.pop();
            used[j] = false;
        }
    }
    go(0, left, right, &mut vec![false; right.len()], &mut Vec::new(), visit);
}

/// Every bijection between two equal-size lists of essential births.
fn enumerate_permutations(a: &[f64], b: &[f64], visit: &mut dyn FnMut(&[f64])) {
    fn go(i: usize, a: &[f64], b: &[f64], used: &mut Vec<bool>, costs: &mut Vec<f64>, visit: &mut dyn FnMut(&[f64])) {
        if i == a.len() {
            visit(costs);
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                costs.push((a[i] - b[j]).abs());
                go(i + 1, a, b, used, costs, visit);
                costs.pop();
                used[j] = false;
            }
        }
    }
    go(0, a, b, &mut vec![false; b.len()], &mut Vec::new(), visit);
}

struct Enumerated {
    finite: Vec<Vec<f64>>,
    essential: Vec<Vec<f64>>,
}

fn enumerate_all(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<Option<Enumerated>> {
    check_dims(d1, d2)?;
    let left: Vec<(f64, f64)> = d1.finite_pairs().collect();
    let right: Vec<(f64, f64)> = d2.finite_pairs().collect();
    if left.len() + right.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleTooLarge {
            limit: BRUTE_FORCE_LIMIT,
            got: left.len() + right.len(),
        });
    }
    let ea: Vec<f64> = d1.essential_births().collect();
    let eb: Vec<f64> = d2.essential_births().collect();
    if ea.len() != eb.len() {
        return Ok(None);
    }
    let mut finite = Vec::new();
    enumerate_finite_matchings(&left, &right, &mut |c| finite.push(c.to_vec()));
    let mut essential = Vec::new();
    enumerate_permutations(&ea, &eb, &mut |c| essential.push(c.to_vec()));
    Ok(Some(Enumerated { finite, essential }))
}

/// Exhaustive bottleneck distance; the literal definition, for small inputs.
pub fn bottleneck_bruteforce(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    let Some(all) = enumerate_all(d1, d2)? else {
        return Ok(f64::INFINITY);
    };
    let best = |sets: &[Vec<f64>]| {
        sets.iter()
            .map(|c| c.iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    };
    Ok(best(&all.finite).max(best(&all.essential)))
}

/// Exhaustive p-Wasserstein distance for small inputs.
pub fn wasserstein_bruteforce(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::param("p", format!("must be a finite real ≥ 1, got {p}")));
    }
    let Some(all) = enumerate_all(d1, d2)? else {
        return Ok(f64::INFINITY);
    };
    let best = |sets: &[Vec<f64>]| {
        sets.iter()
            .map(|c| c.iter().map(|x| x.powf(p)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    };
    Ok((best(&all.finite) + best(&all.essential)).powf(1.0 / p))
}
