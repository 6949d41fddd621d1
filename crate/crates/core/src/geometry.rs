//! Point clouds, per-axis scaling, Euclidean distance matrices and the
//! deterministic generators used by the case studies.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest hypercube dimension the generator accepts (2^16 vertices).
pub const MAX_HYPERCUBE_DIM: usize = 16;

/// A finite, non-empty list of points in `R^dim` with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCloud")]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawCloud> for PointCloud {
    type Error = Error;

    fn try_from(raw: RawCloud) -> Result<Self> {
        PointCloud::new(raw.dim, raw.points)
    }
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCloud("dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidCloud("a cloud needs at least one point".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidCloud(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidCloud(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(PointCloud { dim, points })
    }

    /// Builds a cloud whose dimension is taken from the first row.
    pub fn from_rows(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        PointCloud::new(dim, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Reads a CSV (`.csv`, `.txt`) or JSON (`.json`) cloud file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
        } else {
            PointCloud::from_csv(&text)
        }
    }

    /// Parses one point per row. An optional `# dim=<n>` header pins the
    /// dimension; other `#` lines and blank lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("dim=") {
                    let dim = value
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("line {}: bad dim header `{line}`", lineno + 1)))?;
                    declared = Some(dim);
                }
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad coordinate `{}`", lineno + 1, tok.trim())))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        match declared {
            Some(dim) => PointCloud::new(dim, rows),
            None => PointCloud::from_rows(rows),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# dim={}\n", self.dim);
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Positive per-coordinate factors `(s_1, ..., s_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScalingTransform {
    factors: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ScalingTransform {
    type Error = Error;

    fn try_from(factors: Vec<f64>) -> Result<Self> {
        ScalingTransform::new(factors)
    }
}

impl From<ScalingTransform> for Vec<f64> {
    fn from(s: ScalingTransform) -> Self {
        s.factors
    }
}

impl ScalingTransform {
    pub fn new(factors: Vec<f64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::param("factors", "at least one factor is required"));
        }
        if let Some(bad) = factors.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::param("factors", format!("{bad} is not a positive finite real")));
        }
        Ok(ScalingTransform { factors })
    }

    pub fn uniform(c: f64, dim: usize) -> Result<Self> {
        ScalingTransform::new(vec![c; dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        ScalingTransform::uniform(1.0, dim)
    }

    /// Factors drawn independently from `Uniform(a, b)`.
    pub fn random_uniform(a: f64, b: f64, dim: usize, seed: u64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b) {
            return Err(Error::param("a,b", format!("need 0 < a < b, got a={a}, b={b}")));
        }
        let mut rng = rng::seeded(seed);
        ScalingTransform::new((0..dim).map(|_| rng.gen_range(a..b)).collect())
    }

    /// Weighted scaling: factor `i` is `weights[i] * base[i]`.
    pub fn weighted(weights: &[f64], base: &[f64]) -> Result<Self> {
        if weights.len() != base.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                got: weights.len(),
            });
        }
        ScalingTransform::new(weights.iter().zip(base).map(|(w, s)| w * s).collect())
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn min(&self) -> f64 {
        self.factors.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.factors.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn apply_scaling(cloud: &PointCloud, s: &ScalingTransform) -> Result<PointCloud> {
    if s.dim() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            got: s.dim(),
        });
    }
    let points = cloud
        .points()
        .iter()
        .map(|p| p.iter().zip(s.factors()).map(|(x, f)| x * f).collect())
        .collect();
    PointCloud::new(cloud.dim(), points)
}

/// Componentwise product of a sequence of transforms.
pub fn compose_scalings(sequence: &[ScalingTransform]) -> Result<ScalingTransform> {
    let first = sequence
        .first()
        .ok_or_else(|| Error::param("sequence", "cannot compose an empty sequence"))?;
    let mut factors = first.factors().to_vec();
    for step in &sequence[1..] {
        if step.dim() != factors.len() {
            return Err(Error::DimensionMismatch {
                expected: factors.len(),
                got: step.dim(),
            });
        }
        for (acc, f) in factors.iter_mut().zip(step.factors()) {
            *acc *= f;
        }
    }
    ScalingTransform::new(factors)
}

/// Symmetric matrix of pairwise lengths with zero diagonal, stored as the
/// strict upper triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    upper: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut upper = Vec::with_capacity(size * size.saturating_sub(1) / 2);
        for i in 0..size {
            for j in i + 1..size {
                let v = f(i, j);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Invariant(format!(
                        "distance ({i},{j}) = {v} is not a finite nonnegative length"
                    )));
                }
                upper.push(v);
            }
        }
        Ok(DistanceMatrix { size, upper })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        // row i starts after sum_{r<i} (size - 1 - r) entries
        i * (2 * self.size - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[self.offset(i, j)],
            std::cmp::Ordering::Greater => self.upper[self.offset(j, i)],
        }
    }

    /// Off-diagonal entries `(i, j, d)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.size)
            .flat_map(move |i| (i + 1..self.size).map(move |j| (i, j)))
            .zip(self.upper.iter())
            .map(|((i, j), &d)| (i, j, d))
    }

    /// Every entry multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param("c", format!("{c} is not a positive finite real")));
        }
        Ok(DistanceMatrix {
            size: self.size,
            upper: self.upper.iter().map(|d| d * c).collect(),
        })
    }
}

pub fn distance_matrix(cloud: &PointCloud) -> DistanceMatrix {
    let pts = cloud.points();
    DistanceMatrix::from_fn(cloud.len(), |i, j| {
        pts[i]
            .iter()
            .zip(&pts[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
    .expect("finite coordinates give finite distances")
}

pub fn diameter(d: &DistanceMatrix) -> f64 {
    d.upper.iter().copied().fold(0.0, f64::max)
}

/// Largest pairwise distance found inside any `(k+1)`-point subset.
///
/// For `k = 0` a single vertex has no internal distance, so 0-simplices are
/// compared pairwise instead (the distance between 0-simplices). Subsets are
/// enumerated in lexicographic order and the scan stops as soon as one reaches
/// the global diameter, which no subset can exceed.
pub fn k_diameter(d: &DistanceMatrix, k: usize) -> Result<f64> {
    let n = d.size();
    if n < k + 1 {
        return Err(Error::param(
            "k",
            format!("need at least {} points for k = {k}, have {n}", k + 1),
        ));
    }
    let subset_size = (k + 1).max(2);
    if n < subset_size {
        return Ok(0.0);
    }
    let target = diameter(d);
    let mut best = 0.0_f64;
    let mut idx: Vec<usize> = (0..subset_size).collect();
    loop {
        let mut local = 0.0_f64;
        for a in 0..subset_size {
            for b in a + 1..subset_size {
                local = local.max(d.get(idx[a], idx[b]));
            }
        }
        best = best.max(local);
        if best >= target {
            return Ok(best);
        }
        if !next_combination(&mut idx, n) {
            return Ok(best);
        }
    }
}

/// Advances `idx` to the next lexicographic combination of `0..n`.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let r = idx.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if idx[i] < n - r + i {
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Sup-norm gap `max |d1(i,j) - d2(i,j)|` between two metrics on the same index set.
pub fn metric_perturbation(d1: &DistanceMatrix, d2: &DistanceMatrix) -> Result<f64> {
    if d1.size() != d2.size() {
        return Err(Error::SizeMismatch {
            left: d1.size(),
            right: d2.size(),
        });
    }
    Ok(d1
        .upper
        .iter()
        .zip(&d2.upper)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `m` equally spaced samples `(cos 2πi/m, sin 2πi/m)` of the unit circle.
pub fn generate_circle(m: usize) -> Result<PointCloud> {
    if m < 3 {
        return Err(Error::param("m", format!("circle needs at least 3 samples, got {m}")));
    }
    let points = (0..m)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / m as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    PointCloud::new(2, points)
}

/// All `2^n` vertices of the unit cube in lexicographic order.
pub fn generate_hypercube(n: usize) -> Result<PointCloud> {
    if n == 0 || n > MAX_HYPERCUBE_DIM {
        return Err(Error::param(
            "n",
            format!("hypercube dimension must be in 1..={MAX_HYPERCUBE_DIM}, got {n}"),
        ));
    }
    let points = (0..1usize << n)
        .map(|code| (0..n).map(|bit| ((code >> (n - 1 - bit)) & 1) as f64).collect())
        .collect();
    PointCloud::new(n, points)
}

/// `count` points uniform in `[0, 1)^dim`, determined by `seed`.
pub fn generate_random_cloud(count: usize, dim: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return Err(Error::param("count", "need at least one point"));
    }
    if dim == 0 {
        return Err(Error::param("dim", "dimension must be positive"));
    }
    let mut rng = rng::seeded(seed);
    let points = (0..count)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    PointCloud::new(dim, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> PointCloud {
        generate_hypercube(2).unwrap()
    }

    fn rel_close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_scaling_is_noop() {
        let sq = square();
        let out = apply_scaling(&sq, &ScalingTransform::identity(2).unwrap()).unwrap();
        assert_eq!(out, sq);
    }

    #[test]
    fn scaling_is_componentwise() {
        let cloud = PointCloud::from_rows(vec![vec![1.0, 1.0]]).unwrap();
        let s = ScalingTransform::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(apply_scaling(&cloud, &s).unwrap().point(0), &[2.0, 3.0]);
    }

    #[test]
    fn circle_stretches_to_ellipse() {
        let k = 2.5;
        let ellipse = apply_scaling(
            &generate_circle(36).unwrap(),
            &ScalingTransform::new(vec![1.0, k]).unwrap(),
        )
        .unwrap();
        for p in ellipse.points() {
            let r = p[0] * p[0] + (p[1] / k) * (p[1] / k);
            assert!((r - 1.0).abs() < 1e-12);
        }
        let d = distance_matrix(&ellipse);
        assert!((diameter(&d) - 2.0 * k).abs() < 1e-12);
    }

    #[test]
    fn scaling_rejects_dimension_mismatch() {
        let err = apply_scaling(&square(), &ScalingTransform::new(vec![1.0; 3]).unwrap());
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 2, got: 3 })));
    }

    #[test]
    fn transform_rejects_nonpositive() {
        assert!(ScalingTransform::new(vec![1.0, 0.0]).is_err());
        assert!(ScalingTransform::new(vec![-1.0]).is_err());
        assert!(ScalingTransform::new(vec![f64::INFINITY]).is_err());
        assert!(ScalingTransform::new(vec![]).is_err());
    }

    #[test]
    fn composition_examples() {
        let t = |v: Vec<f64>| ScalingTransform::new(v).unwrap();
        assert_eq!(compose_scalings(&[t(vec![2.0, 1.0])]).unwrap().factors(), &[2.0, 1.0]);
        assert_eq!(
            compose_scalings(&[t(vec![2.0, 1.0]), t(vec![1.0, 3.0])])
                .unwrap()
                .factors(),
            &[2.0, 3.0]
        );
        assert_eq!(
            compose_scalings(&[t(vec![2.0, 2.0]), t(vec![0.5, 0.5])])
                .unwrap()
                .factors(),
            &[1.0, 1.0]
        );
        assert!(compose_scalings(&[]).is_err());
        assert!(compose_scalings(&[t(vec![1.0]), t(vec![1.0, 2.0])]).is_err());
    }

    #[test]
    fn distance_examples() {
        let two = PointCloud::from_rows(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(distance_matrix(&two).get(0, 1), 5.0);
        assert_eq!(distance_matrix(&two).get(1, 0), 5.0);

        let mut entries: Vec<f64> = distance_matrix(&square()).pairs().map(|(_, _, d)| d).collect();
        entries.sort_by(f64::total_cmp);
        let expected = [1.0, 1.0, 1.0, 1.0, 2f64.sqrt(), 2f64.sqrt()];
        for (a, b) in entries.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }

        let cube4 = distance_matrix(&generate_hypercube(4).unwrap());
        assert!((diameter(&cube4) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn diameter_examples() {
        let one = PointCloud::from_rows(vec![vec![0.3, 0.1]]).unwrap();
        assert_eq!(diameter(&distance_matrix(&one)), 0.0);
        assert!((diameter(&distance_matrix(&generate_circle(200).unwrap())) - 2.0).abs() < 1e-12);

        let s = ScalingTransform::new(vec![0.5, 1.5, 2.0]).unwrap();
        let cube = apply_scaling(&generate_hypercube(3).unwrap(), &s).unwrap();
        let expected = (0.25f64 + 2.25 + 4.0).sqrt();
        assert!((diameter(&distance_matrix(&cube)) - expected).abs() < 1e-12);
    }

    #[test]
    fn k_diameter_examples() {
        let d = distance_matrix(&square());
        assert!((k_diameter(&d, 1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((k_diameter(&d, 2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let two = PointCloud::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(k_diameter(&distance_matrix(&two), 2).is_err());
        let one = PointCloud::from_rows(vec![vec![0.0]]).unwrap();
        assert_eq!(k_diameter(&distance_matrix(&one), 0).unwrap(), 0.0);
    }

    #[test]
    fn perturbation_examples() {
        let d = distance_matrix(&square());
        assert_eq!(metric_perturbation(&d, &d).unwrap(), 0.0);
        let stretched = apply_scaling(&square(), &ScalingTransform::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert!((metric_perturbation(&d, &distance_matrix(&stretched)).unwrap() - 1.0).abs() < 1e-15);
        let doubled = d.scaled(2.0).unwrap();
        assert_eq!(metric_perturbation(&d, &doubled).unwrap(), diameter(&d));
        let other = distance_matrix(&generate_hypercube(3).unwrap());
        assert!(metric_perturbation(&d, &other).is_err());
    }

    #[test]
    fn generators() {
        let c4 = generate_circle(4).unwrap();
        assert_eq!(c4.len(), 4);
        assert!((diameter(&distance_matrix(&c4)) - 2.0).abs() < 1e-15);
        assert!(generate_circle(2).is_err());

        let sq = square();
        assert_eq!(
            sq.points(),
            &[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
        assert!(generate_hypercube(0).is_err());
        assert!(generate_hypercube(17).is_err());

        assert_eq!(
            generate_random_cloud(5, 3, 42).unwrap(),
            generate_random_cloud(5, 3, 42).unwrap()
        );
        assert_ne!(
            generate_random_cloud(5, 3, 42).unwrap(),
            generate_random_cloud(5, 3, 43).unwrap()
        );
        assert!(generate_random_cloud(0, 3, 1).is_err());
    }

    #[test]
    fn cloud_validation() {
        assert!(PointCloud::new(2, vec![]).is_err());
        assert!(PointCloud::new(2, vec![vec![1.0]]).is_err());
        assert!(PointCloud::new(1, vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn csv_and_json_formats() {
        let cloud = generate_random_cloud(4, 3, 9).unwrap();
        assert_eq!(PointCloud::from_csv(&cloud.to_csv()).unwrap(), cloud);

        let parsed = PointCloud::from_csv("0.5, 1\n2,3\n").unwrap();
        assert_eq!(parsed.dim(), 2);
        assert!(PointCloud::from_csv("# dim=3\n1,2\n").is_err());
        assert!(PointCloud::from_csv("1,abc\n").is_err());

        let json: PointCloud = serde_json::from_str(r#"{"dim": 2, "points": [[0,0],[1,2]]}"#).unwrap();
        assert_eq!(json.point(1), &[1.0, 2.0]);
        assert!(serde_json::from_str::<PointCloud>(r#"{"dim": 3, "points": [[0,0]]}"#).is_err());
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut idx = vec![0, 1, 2];
        let mut count = 1;
        while next_combination(&mut idx, 6) {
            count += 1;
        }
        assert_eq!(count, 20);
    }

    fn cloud_and_transform() -> impl Strategy<Value = (PointCloud, ScalingTransform)> {
        (1usize..5, 2usize..9).prop_flat_map(|(dim, count)| {
            (
                prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), count),
                prop::collection::vec(0.05f64..20.0, dim),
            )
                .prop_map(move |(pts, s)| (PointCloud::new(dim, pts).unwrap(), ScalingTransform::new(s).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn sandwich_inequality((cloud, s) in cloud_and_transform()) {
            let dx = distance_matrix(&cloud);
            let ds = distance_matrix(&apply_scaling(&cloud, &s).unwrap());
            for (i, j, d) in dx.pairs() {
                let scaled = ds.get(i, j);
                prop_assert!(s.min() * d <= scaled * (1.0 + 1e-12));
                prop_assert!(scaled <= s.max() * d * (1.0 + 1e-12));
            }
        }

        #[test]
        fn uniform_scaling_is_exact_multiple(
            (cloud, _) in cloud_and_transform(),
            c in 0.01f64..100.0,
        ) {
            let dx = distance_matrix(&cloud);
            let s = ScalingTransform::uniform(c, cloud.dim()).unwrap();
            let ds = distance_matrix(&apply_scaling(&cloud, &s).unwrap());
            for (i, j, d) in dx.pairs() {
                prop_assert!(rel_close(ds.get(i, j), c * d, 1e-12));
            }
        }

        #[test]
        fn composition_matches_sequential_application(
            (cloud, s1) in cloud_and_transform(),
            seed in any::<u64>(),
        ) {
            let s2 = ScalingTransform::random_uniform(0.1, 5.0, cloud.dim(), seed).unwrap();
            let composed = compose_scalings(&[s1.clone(), s2.clone()]).unwrap();
            let once = distance_matrix(&apply_scaling(&cloud, &composed).unwrap());
            let twice = distance_matrix(
                &apply_scaling(&apply_scaling(&cloud, &s1).unwrap(), &s2).unwrap(),
            );
            for (i, j, d) in once.pairs() {
                prop_assert!((d - twice.get(i, j)).abs() <= 1e-12 * d.max(1.0));
            }
        }

        #[test]
        fn diameters_agree_with_brute_force((cloud, _) in cloud_and_transform()) {
            let d = distance_matrix(&cloud);
            let n = d.size();
            let mut brute = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    brute = brute.max(d.get(i, j));
                }
            }
            prop_assert_eq!(diameter(&d), brute);
            for k in 0..n.min(4) {
                prop_assert_eq!(k_diameter(&d, k).unwrap(), diameter(&d));
            }
        }

        #[test]
        fn perturbation_bounded_by_extreme_factor((cloud, s) in cloud_and_transform()) {
            let dx = distance_matrix(&cloud);
            let ds = distance_matrix(&apply_scaling(&cloud, &s).unwrap());
            let gap = metric_perturbation(&dx, &ds).unwrap();
            let bound = (s.max() - 1.0).max(1.0 - s.min()) * diameter(&dx);
            prop_assert!(gap <= bound + 1e-12 * bound.max(1.0));
        }
    }
}
