//! Persistence diagrams by boundary-matrix reduction over Z/2.

use std::collections::HashMap;
use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rips::FilteredComplex;
use crate::serde_float::parse_length;

/// Death time of a feature; essential classes never die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Death {
    Finite(f64),
    Infinite,
}

impl Death {
    pub fn is_finite(self) -> bool {
        matches!(self, Death::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Death::Finite(v) => Some(v),
            Death::Infinite => None,
        }
    }

    /// `value < self`, treating `Infinite` as larger than every real.
    pub fn exceeds(self, value: f64) -> bool {
        match self {
            Death::Finite(d) => value < d,
            Death::Infinite => true,
        }
    }
}

impl fmt::Display for Death {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Death::Finite(v) => write!(f, "{v:?}"),
            Death::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: Death,
}

impl PersistencePair {
    pub fn finite(birth: f64, death: f64) -> Self {
        PersistencePair {
            birth,
            death: Death::Finite(death),
        }
    }

    pub fn essential(birth: f64) -> Self {
        PersistencePair {
            birth,
            death: Death::Infinite,
        }
    }

    pub fn is_alive_at(&self, eps: f64) -> bool {
        self.birth <= eps && self.death.exceeds(eps)
    }

    /// Canonical order: birth, then death with `Infinite` last.
    fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |p: &Self| match p.death {
            Death::Finite(d) => (0u8, d),
            Death::Infinite => (1u8, 0.0),
        };
        self.birth.total_cmp(&other.birth).then_with(|| {
            let (a, b) = (key(self), key(other));
            a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))
        })
    }
}

impl Serialize for PersistencePair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.birth)?;
        match self.death {
            Death::Finite(d) => t.serialize_element(&d)?,
            Death::Infinite => t.serialize_element("inf")?,
        }
        t.end()
    }
}

impl<'de> Deserialize<'de> for PersistencePair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PairVisitor;
        impl<'de> Visitor<'de> for PairVisitor {
            type Value = PersistencePair;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("[birth, death | \"inf\"]")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let birth: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let death: LengthOrInf = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let death = if death.0.is_infinite() && death.0 > 0.0 {
                    Death::Infinite
                } else {
                    Death::Finite(death.0)
                };
                Ok(PersistencePair { birth, death })
            }
        }
        d.deserialize_tuple(2, PairVisitor)
    }
}

struct LengthOrInf(f64);

impl<'de> Deserialize<'de> for LengthOrInf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        crate::serde_float::deserialize(d).map(LengthOrInf)
    }
}

/// Multiset of pairs in one homology dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub hom_dim: usize,
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(hom_dim: usize, pairs: Vec<PersistencePair>) -> Self {
        PersistenceDiagram { hom_dim, pairs }
    }

    pub fn empty(hom_dim: usize) -> Self {
        PersistenceDiagram::new(hom_dim, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn finite_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pairs.iter().filter_map(|p| p.death.finite().map(|d| (p.birth, d)))
    }

    /// Births of the essential (never-dying) classes.
    pub fn essential_births(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().filter(|p| !p.death.is_finite()).map(|p| p.birth)
    }

    pub fn alive_at(&self, eps: f64) -> usize {
        self.pairs.iter().filter(|p| p.is_alive_at(eps)).count()
    }

    /// Pairs sorted by birth then death.
    pub fn sorted(&self) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.sort_by(PersistencePair::canonical_cmp);
        PersistenceDiagram::new(self.hom_dim, pairs)
    }

    /// Multiset equality up to `tol` on every coordinate, after sorting.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.hom_dim != other.hom_dim || self.len() != other.len() {
            return false;
        }
        let (a, b) = (self.sorted(), other.sorted());
        a.pairs.iter().zip(&b.pairs).all(|(x, y)| {
            (x.birth - y.birth).abs() <= tol
                && match (x.death, y.death) {
                    (Death::Finite(p), Death::Finite(q)) => (p - q).abs() <= tol,
                    (Death::Infinite, Death::Infinite) => true,
                    _ => false,
                }
        })
    }
}

/// Reduces the boundary matrix of `fc` and reads off diagrams for
/// homology dimensions `0..fc.max_dim()`.
///
/// Zero-persistence pairs are dropped. Classes in dimension `max_dim` are not
/// reported because their deaths would be truncation artefacts.
pub fn compute_persistence(fc: &FilteredComplex) -> Vec<PersistenceDiagram> {
    let simplices = fc.simplices();
    let index: HashMap<&[usize], usize> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices.as_slice(), i))
        .collect();

    // columns hold sorted row indices; the pivot is the last entry
    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            let mut col: Vec<usize> = s.facets().map(|f| index[f.as_slice()]).collect();
            col.sort_unstable();
            col
        })
        .collect();

    let mut pivot_owner: Vec<Option<usize>> = vec![None; simplices.len()];
    let mut is_pivot = vec![false; simplices.len()];
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match pivot_owner[low] {
                Some(k) => {
                    let reduced = symmetric_difference(&columns[j], &columns[k]);
                    columns[j] = reduced;
                }
                None => {
                    pivot_owner[low] = Some(j);
                    is_pivot[low] = true;
                    break;
                }
            }
        }
    }

    let max_dim = fc.max_dim();
    let mut diagrams: Vec<PersistenceDiagram> = (0..max_dim).map(PersistenceDiagram::empty).collect();
    for (i, s) in simplices.iter().enumerate() {
        let dim = s.dim();
        if dim >= max_dim {
            continue;
        }
        if let Some(killer) = pivot_owner[i] {
            let death = simplices[killer].value;
            if death > s.value {
                diagrams[dim].pairs.push(PersistencePair::finite(s.value, death));
            }
        } else if columns[i].is_empty() {
            diagrams[dim].pairs.push(PersistencePair::essential(s.value));
        }
    }
    diagrams
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Betti number of the sub-complex `{σ : value(σ) ≤ eps}` in `dimension`,
/// from ranks of the boundary maps over Z/2.
pub fn betti_at(fc: &FilteredComplex, eps: f64, dimension: usize) -> Result<usize> {
    if dimension >= fc.max_dim() {
        return Err(Error::param(
            "dimension",
            format!("must be below max_dim = {}, got {dimension}", fc.max_dim()),
        ));
    }
    let alive: Vec<&[usize]> = fc
        .simplices()
        .iter()
        .filter(|s| s.value <= eps)
        .map(|s| s.vertices.as_slice())
        .collect();
    let of_dim = |k: usize| -> Vec<&[usize]> { alive.iter().copied().filter(|v| v.len() == k + 1).collect() };

    let k_simplices = of_dim(dimension);
    let rank_k = if dimension == 0 {
        0
    } else {
        boundary_rank(&of_dim(dimension - 1), &k_simplices)
    };
    let rank_k1 = boundary_rank(&k_simplices, &of_dim(dimension + 1));
    Ok(k_simplices.len() - rank_k - rank_k1)
}

/// Rank over Z/2 of the boundary map from `cells` onto `faces`.
fn boundary_rank(faces: &[&[usize]], cells: &[&[usize]]) -> usize {
    if faces.is_empty() || cells.is_empty() {
        return 0;
    }
    let row_of: HashMap<&[usize], usize> = faces.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let words = faces.len().div_ceil(64);
    let mut rows: Vec<Vec<u64>> = cells
        .iter()
        .map(|cell| {
            let mut bits = vec![0u64; words];
            for skip in 0..cell.len() {
                let face: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let r = row_of[face.as_slice()];
                bits[r / 64] ^= 1 << (r % 64);
            }
            bits
        })
        .collect();

    // Gaussian elimination on the transposed matrix (one bitset per cell)
    let mut rank = 0;
    for bit in 0..faces.len() {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & mask != 0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Multiplies every birth and finite death by `c > 0`.
pub fn scale_diagram(diagram: &PersistenceDiagram, c: f64) -> Result<PersistenceDiagram> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param("c", format!("must be positive, got {c}")));
    }
    let pairs = diagram
        .pairs
        .iter()
        .map(|p| PersistencePair {
            birth: p.birth * c,
            death: match p.death {
                Death::Finite(d) => Death::Finite(d * c),
                Death::Infinite => Death::Infinite,
            },
        })
        .collect();
    Ok(PersistenceDiagram::new(diagram.hom_dim, pairs))
}

/// `hom_dim,birth,death` rows with a header line; essential deaths print as `inf`.
pub fn diagrams_to_csv(diagrams: &[PersistenceDiagram]) -> String {
    let mut out = String::from("hom_dim,birth,death\n");
    for dgm in diagrams {
        for p in &dgm.pairs {
            out.push_str(&format!("{},{:?},{}\n", dgm.hom_dim, p.birth, p.death));
        }
    }
    out
}

/// Parses the CSV written by [`diagrams_to_csv`]. Diagrams are returned for
/// every dimension from 0 to the largest one mentioned.
pub fn diagrams_from_csv(text: &str) -> Result<Vec<PersistenceDiagram>> {
    let mut diagrams: Vec<PersistenceDiagram> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("hom_dim") {
            continue;
        }
        let bad = || Error::Parse(format!("line {}: expected hom_dim,birth,death", lineno + 1));
        let mut fields = line.split(',');
        let (Some(k), Some(b), Some(d), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
            return Err(bad());
        };
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        let birth = parse_length(b).filter(|v| v.is_finite()).ok_or_else(bad)?;
        let death = match parse_length(d).ok_or_else(bad)? {
            v if v == f64::INFINITY => Death::Infinite,
            v if v.is_finite() => Death::Finite(v),
            _ => return Err(bad()),
        };
        while diagrams.len() <= k {
            diagrams.push(PersistenceDiagram::empty(diagrams.len()));
        }
        diagrams[k].pairs.push(PersistencePair { birth, death });
    }
    Ok(diagrams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_matrix, generate_hypercube, generate_random_cloud, DistanceMatrix, PointCloud};
    use crate::rips::{build_rips, default_eps_cap};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn square_diagrams() -> (FilteredComplex, Vec<PersistenceDiagram>) {
        let fc = build_rips(&distance_matrix(&generate_hypercube(2).unwrap()), 2, 2.0).unwrap();
        let dgms = compute_persistence(&fc);
        (fc, dgms)
    }

    #[test]
    fn equilateral_triangle() {
        let d = DistanceMatrix::from_fn(3, |_, _| 1.0).unwrap();
        let dgms = compute_persistence(&build_rips(&d, 2, 2.0).unwrap());
        assert_eq!(dgms.len(), 2);
        let expected = PersistenceDiagram::new(
            0,
            vec![
                PersistencePair::finite(0.0, 1.0),
                PersistencePair::finite(0.0, 1.0),
                PersistencePair::essential(0.0),
            ],
        );
        assert!(dgms[0].approx_eq(&expected, 0.0));
        assert!(dgms[1].is_empty());
    }

    #[test]
    fn unit_square() {
        let (_, dgms) = square_diagrams();
        let h0 = PersistenceDiagram::new(
            0,
            vec![
                PersistencePair::finite(0.0, 1.0),
                PersistencePair::finite(0.0, 1.0),
                PersistencePair::finite(0.0, 1.0),
                PersistencePair::essential(0.0),
            ],
        );
        let h1 = PersistenceDiagram::new(1, vec![PersistencePair::finite(1.0, SQRT2)]);
        assert!(dgms[0].approx_eq(&h0, 1e-12));
        assert!(dgms[1].approx_eq(&h1, 1e-12));
    }

    #[test]
    fn single_point() {
        let cloud = PointCloud::from_rows(vec![vec![0.5, 0.5]]).unwrap();
        let d = distance_matrix(&cloud);
        let dgms = compute_persistence(&build_rips(&d, 2, default_eps_cap(&d)).unwrap());
        assert_eq!(dgms[0].pairs, vec![PersistencePair::essential(0.0)]);
        assert!(dgms[1].is_empty());
    }

    #[test]
    fn betti_examples() {
        let (fc, _) = square_diagrams();
        assert_eq!(betti_at(&fc, 1.2, 1).unwrap(), 1);
        assert_eq!(betti_at(&fc, 1.5, 1).unwrap(), 0);
        assert_eq!(betti_at(&fc, 0.0, 0).unwrap(), 4);
        assert_eq!(betti_at(&fc, 1.0, 0).unwrap(), 1);
        assert!(betti_at(&fc, 1.0, 2).is_err());
    }

    #[test]
    fn scaling_examples() {
        let d = PersistenceDiagram::new(1, vec![PersistencePair::finite(1.0, SQRT2)]);
        let scaled = scale_diagram(&d, 2.0).unwrap();
        assert_eq!(scaled.pairs, vec![PersistencePair::finite(2.0, 2.0 * SQRT2)]);
        assert!(scale_diagram(&PersistenceDiagram::empty(0), 3.0).unwrap().is_empty());
        assert_eq!(scale_diagram(&d, 1.0).unwrap(), d);
        assert!(scale_diagram(&d, 0.0).is_err());
        assert!(scale_diagram(&d, -1.0).is_err());
        let ess = PersistenceDiagram::new(0, vec![PersistencePair::essential(0.0)]);
        assert_eq!(scale_diagram(&ess, 5.0).unwrap(), ess);
    }

    #[test]
    fn alive_counts_match_betti_numbers() {
        for seed in 0..20 {
            let cloud = generate_random_cloud(7, 3, 1000 + seed).unwrap();
            let d = distance_matrix(&cloud);
            let fc = build_rips(&d, 3, default_eps_cap(&d)).unwrap();
            let dgms = compute_persistence(&fc);
            let mut values: Vec<f64> = fc.simplices().iter().map(|s| s.value).collect();
            values.dedup();
            let mut probes: Vec<f64> = values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            probes.push(values[values.len() - 1] + 1.0);
            for eps in probes {
                for (k, dgm) in dgms.iter().enumerate() {
                    assert_eq!(
                        dgm.alive_at(eps),
                        betti_at(&fc, eps, k).unwrap(),
                        "seed {seed} eps {eps} k {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn duplicate_points_merge_with_zero_persistence() {
        let cloud =
            PointCloud::from_rows(vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0]]).unwrap();
        let d = distance_matrix(&cloud);
        let dgms = compute_persistence(&build_rips(&d, 1, default_eps_cap(&d)).unwrap());
        let zero_length_edges = d.pairs().filter(|&(_, _, v)| v == 0.0).count();
        assert_eq!(dgms[0].len(), cloud.len() - zero_length_edges);
        assert_eq!(dgms[0].essential_births().count(), 1);
        assert!(dgms[0].finite_pairs().all(|(b, d)| d > b));
    }

    #[test]
    fn one_essential_class_per_component() {
        let cloud = PointCloud::from_rows(vec![vec![0.0], vec![0.1], vec![10.0], vec![10.2], vec![20.0]]).unwrap();
        let d = distance_matrix(&cloud);
        let dgms = compute_persistence(&build_rips(&d, 1, 1.0).unwrap());
        assert_eq!(dgms[0].essential_births().count(), 3);
    }

    #[test]
    fn json_and_csv_formats() {
        let (_, dgms) = square_diagrams();
        let json = serde_json::to_string(&dgms[0]).unwrap();
        assert!(json.starts_with(r#"{"hom_dim":0,"pairs":[["#));
        assert_eq!(json.matches("[0.0,1.0]").count(), 3);
        assert!(json.contains(r#"[0.0,"inf"]"#));
        let back: PersistenceDiagram = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dgms[0]);

        let csv = diagrams_to_csv(&dgms);
        assert!(csv.starts_with("hom_dim,birth,death\n"));
        assert!(csv.contains("0,0.0,inf\n"));
        assert_eq!(diagrams_from_csv(&csv).unwrap(), dgms);
        assert!(diagrams_from_csv("0,1.0\n").is_err());
    }
}
