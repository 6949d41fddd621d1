//! Vietoris-Rips filtered complexes.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{diameter, DistanceMatrix};

/// A simplex with strictly increasing vertex indices and its Rips value
/// (largest pairwise distance among its vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Faces of codimension one, in the order obtained by dropping vertex 0, 1, ...
    pub fn facets(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.vertices.len())
            .filter(|_| self.vertices.len() > 1)
            .map(move |skip| {
                self.vertices
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect()
            })
    }
}

/// Filtration order: value, then dimension, then vertex list.
pub fn filtration_order(a: &Simplex, b: &Simplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

#[derive(Debug, Clone)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    max_dim: usize,
    eps_cap: f64,
    vertex_count: usize,
}

impl FilteredComplex {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Requested maximum simplex dimension (before clamping to `size - 1`).
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn eps_cap(&self) -> f64 {
        self.eps_cap
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// One `value<TAB>v0,v1,...` line per simplex in filtration order.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let verts: Vec<String> = s.vertices.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{:?}\t{}", s.value, verts.join(","));
        }
        out
    }
}

/// Default scale cap: just above the diameter so the complex is complete.
pub fn default_eps_cap(d: &DistanceMatrix) -> f64 {
    let diam = diameter(d);
    if diam > 0.0 {
        diam * (1.0 + 1e-9)
    } else {
        1.0
    }
}

/// Builds every simplex on at most `max_dim + 1` vertices whose diameter does
/// not exceed `eps_cap`. `max_dim` larger than `size - 1` is clamped when
/// enumerating; the complex still reports the requested value.
pub fn build_rips(d: &DistanceMatrix, max_dim: usize, eps_cap: f64) -> Result<FilteredComplex> {
    if eps_cap.is_nan() || eps_cap <= 0.0 {
        return Err(Error::param("eps_cap", format!("must be positive, got {eps_cap}")));
    }
    let n = d.size();
    let top = max_dim.min(n.saturating_sub(1));

    // upper neighbours in the ε-graph
    let mut adjacent = vec![false; n * n];
    let mut upper: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, dist) in d.pairs() {
        if dist <= eps_cap {
            adjacent[i * n + j] = true;
            adjacent[j * n + i] = true;
            upper[i].push(j);
        }
    }

    let mut simplices = Vec::new();
    let mut current = Vec::with_capacity(top + 1);
    for (v, candidates) in upper.iter().enumerate() {
        current.push(v);
        expand(d, &adjacent, candidates, top, 0.0, &mut current, &mut simplices);
        current.pop();
    }
    simplices.sort_by(filtration_order);

    Ok(FilteredComplex {
        simplices,
        max_dim,
        eps_cap,
        vertex_count: n,
    })
}

fn expand(
    d: &DistanceMatrix,
    adjacent: &[bool],
    candidates: &[usize],
    top: usize,
    value: f64,
    current: &mut Vec<usize>,
    out: &mut Vec<Simplex>,
) {
    out.push(Simplex {
        vertices: current.clone(),
        value,
    });
    if current.len() > top {
        return;
    }
    let n = d.size();
    for (pos, &u) in candidates.iter().enumerate() {
        let grown = current.iter().map(|&w| d.get(w, u)).fold(value, f64::max);
        let next: Vec<usize> = candidates[pos + 1..]
            .iter()
            .copied()
            .filter(|&w| adjacent[u * n + w])
            .collect();
        current.push(u);
        expand(d, adjacent, &next, top, grown, current, out);
        current.pop();
    }
}

pub fn simplex_count(fc: &FilteredComplex, dimension: usize) -> usize {
    fc.simplices.iter().filter(|s| s.dim() == dimension).count()
}
