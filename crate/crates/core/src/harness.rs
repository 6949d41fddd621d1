//! Scenarios, end-to-end pipelines, Monte Carlo estimation and audits of the
//! scaling inequalities.
//!
//! Two kinds of checks live here. The sup-norm (classical) stability bound is
//! a theorem, so a violation is a bug and is surfaced as such. Every other
//! inequality is *audited*: it is evaluated and recorded as PASS / FAIL /
//! VACUOUS, and a FAIL is a legitimate finding.

use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{expected_bound_thm35, BoundSet, ExpectationMode, ExpectedBound};
use crate::error::{Error, Result};
use crate::geometry::{
    apply_scaling, compose_scalings, diameter, distance_matrix, generate_circle, generate_hypercube,
    generate_random_cloud, k_diameter, DistanceMatrix, PointCloud, ScalingTransform, MAX_HYPERCUBE_DIM,
};
use crate::metrics::{bottleneck, wasserstein};
use crate::persistence::{compute_persistence, PersistenceDiagram};
use crate::rips::build_rips;
use crate::rng::derive_seed;
use crate::AUDIT_TOLERANCE;

const MAX_SCENARIO_DIM: usize = 3;
const CLOUD_STREAM: u64 = 0;
const TRANSFORM_STREAM: u64 = 1;

fn default_max_dim() -> usize {
    2
}

/// Where the original point cloud comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CloudSpec {
    Circle {
        m: usize,
    },
    Hypercube {
        n: usize,
    },
    /// Uniform in `[0, 1)^dim`, seeded from the scenario seed.
    Random {
        count: usize,
        dim: usize,
    },
    File {
        path: PathBuf,
    },
    Points {
        points: Vec<Vec<f64>>,
    },
}

impl CloudSpec {
    /// Cheap parameter checks, run before any computation.
    pub fn validate(&self) -> Result<()> {
        match self {
            CloudSpec::Circle { m } if *m < 3 => Err(Error::param("m", format!("circle needs m ≥ 3, got {m}"))),
            CloudSpec::Hypercube { n } if *n == 0 || *n > MAX_HYPERCUBE_DIM => Err(Error::param(
                "n",
                format!("hypercube dimension must be in 1..={MAX_HYPERCUBE_DIM}, got {n}"),
            )),
            CloudSpec::Random { count, dim } if *count == 0 || *dim == 0 => {
                Err(Error::param("count,dim", "random clouds need count ≥ 1 and dim ≥ 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn resolve(&self, seed: u64) -> Result<PointCloud> {
        self.validate()?;
        match self {
            CloudSpec::Circle { m } => generate_circle(*m),
            CloudSpec::Hypercube { n } => generate_hypercube(*n),
            CloudSpec::Random { count, dim } => generate_random_cloud(*count, *dim, derive_seed(seed, CLOUD_STREAM)),
            CloudSpec::File { path } => PointCloud::load(path),
            CloudSpec::Points { points } => PointCloud::from_rows(points.clone()),
        }
    }
}

/// How the scaling is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    Single {
        factors: Vec<f64>,
    },
    Sequence {
        steps: Vec<Vec<f64>>,
    },
    /// Independent Uniform(a, b) factors, seeded from the scenario seed.
    Random {
        a: f64,
        b: f64,
    },
    /// Factor `i` is `weights[i] * base[i]`.
    Weighted {
        weights: Vec<f64>,
        base: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub cloud: CloudSpec,
    pub transform: TransformSpec,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// `None` selects `max(diam X, diam S(X)) · (1 + 1e-9)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_cap: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// A scenario with its cloud and transforms materialised.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub cloud: PointCloud,
    pub effective: ScalingTransform,
    /// The individual steps of a `sequence` transform.
    pub steps: Option<Vec<ScalingTransform>>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_SCENARIO_DIM).contains(&self.max_dim) {
            return Err(Error::param(
                "max_dim",
                format!("must be in 1..={MAX_SCENARIO_DIM}, got {}", self.max_dim),
            ));
        }
        if let Some(cap) = self.eps_cap {
            if cap.is_nan() || cap <= 0.0 {
                return Err(Error::param("eps_cap", format!("must be positive, got {cap}")));
            }
        }
        if let TransformSpec::Random { a, b } = self.transform {
            if !(a > 0.0 && a < b && b.is_finite()) {
                return Err(Error::param("a,b", format!("need 0 < a < b, got a={a}, b={b}")));
            }
        }
        self.cloud.validate()
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        self.validate()?;
        let cloud = self.cloud.resolve(self.seed)?;
        let dim = cloud.dim();
        let (effective, steps) = match &self.transform {
            TransformSpec::Single { factors } => (ScalingTransform::new(factors.clone())?, None),
            TransformSpec::Sequence { steps } => {
                let steps = steps
                    .iter()
                    .map(|s| ScalingTransform::new(s.clone()))
                    .collect::<Result<Vec<_>>>()?;
                (compose_scalings(&steps)?, Some(steps))
            }
            TransformSpec::Random { a, b } => (
                ScalingTransform::random_uniform(*a, *b, dim, derive_seed(self.seed, TRANSFORM_STREAM))?,
                None,
            ),
            TransformSpec::Weighted { weights, base } => (ScalingTransform::weighted(weights, base)?, None),
        };
        if effective.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: effective.dim(),
            });
        }
        Ok(ResolvedScenario {
            cloud,
            effective,
            steps,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    Thm31Upper,
    LemmaRefinedLower,
    Thm32Dim,
    Thm33Iterative,
    Thm34WassersteinVsBound,
    Thm34WpLeDb,
    Thm35Expected,
}

impl ClaimId {
    pub const ALL: [ClaimId; 7] = [
        ClaimId::Thm31Upper,
        ClaimId::LemmaRefinedLower,
        ClaimId::Thm32Dim,
        ClaimId::Thm33Iterative,
        ClaimId::Thm34WassersteinVsBound,
        ClaimId::Thm34WpLeDb,
        ClaimId::Thm35Expected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::Thm31Upper => "thm31_upper",
            ClaimId::LemmaRefinedLower => "lemma_refined_lower",
            ClaimId::Thm32Dim => "thm32_dim",
            ClaimId::Thm33Iterative => "thm33_iterative",
            ClaimId::Thm34WassersteinVsBound => "thm34_wasserstein_vs_bound",
            ClaimId::Thm34WpLeDb => "thm34_wp_le_db",
            ClaimId::Thm35Expected => "thm35_expected",
        }
    }

    /// The refined lower bound is the only claim asserting `measured ≥ bound`.
    pub fn is_lower_bound(self) -> bool {
        self == ClaimId::LemmaRefinedLower
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
        })
    }
}

/// One claimed inequality evaluated on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub claim_id: ClaimId,
    /// `None` for the maximum over all reported homology dimensions.
    pub hom_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(with = "crate::serde_float::option")]
    pub bound_value: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub measured_value: Option<f64>,
    /// `measured − bound`
    #[serde(with = "crate::serde_float::option")]
    pub margin: Option<f64>,
    pub verdict: Verdict,
}

impl AuditVerdict {
    /// Judges `measured` against `bound` in the direction of `claim`. Missing
    /// values give VACUOUS.
    pub fn judge(claim_id: ClaimId, hom_dim: Option<usize>, bound: Option<f64>, measured: Option<f64>) -> Self {
        let (margin, verdict) = match (bound, measured) {
            (Some(b), Some(m)) => {
                let margin = m - b;
                let ok = if claim_id.is_lower_bound() {
                    m >= b - AUDIT_TOLERANCE
                } else {
                    m <= b + AUDIT_TOLERANCE
                };
                (Some(margin), if ok { Verdict::Pass } else { Verdict::Fail })
            }
            _ => (None, Verdict::Vacuous),
        };
        AuditVerdict {
            claim_id,
            hom_dim,
            variant: None,
            bound_value: bound,
            measured_value: measured,
            margin,
            verdict,
        }
    }

    pub fn with_variant(mut self, variant: impl Into<String>) -> Self {
        self.variant = Some(variant.into());
        self
    }

    /// How far past the bound a FAIL went (positive), 0 otherwise.
    pub fn violation(&self) -> f64 {
        match (self.verdict, self.margin) {
            (Verdict::Fail, Some(m)) if self.claim_id.is_lower_bound() => -m,
            (Verdict::Fail, Some(m)) => m,
            _ => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match &self.variant {
            Some(v) => format!("{}:{v}", self.claim_id),
            None => self.claim_id.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionDistances {
    pub hom_dim: usize,
    #[serde(with = "crate::serde_float")]
    pub bottleneck: f64,
    #[serde(with = "crate::serde_float")]
    pub wasserstein_1: f64,
    #[serde(with = "crate::serde_float")]
    pub wasserstein_2: f64,
}

/// The sup-norm stability check; `holds` is `None` when an explicit scale
/// cap truncates the filtrations and the theorem does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCheck {
    pub bound: f64,
    #[serde(with = "crate::serde_float")]
    pub max_bottleneck: f64,
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub seed: u64,
    pub max_dim: usize,
    pub point_count: usize,
    pub ambient_dim: usize,
    pub factors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<Vec<f64>>>,
    pub diam_original: f64,
    pub diam_scaled: f64,
    pub eps_cap: f64,
    pub diagrams_original: Vec<PersistenceDiagram>,
    pub diagrams_scaled: Vec<PersistenceDiagram>,
    pub distances: Vec<DimensionDistances>,
    #[serde(with = "crate::serde_float")]
    pub max_bottleneck: f64,
    pub bounds: BoundSet,
    pub classical: ClassicalCheck,
    pub verdicts: Vec<AuditVerdict>,
}

impl ScenarioResult {
    pub fn verdict(&self, claim: ClaimId, hom_dim: Option<usize>) -> Option<&AuditVerdict> {
        self.verdicts
            .iter()
            .find(|v| v.claim_id == claim && v.hom_dim == hom_dim)
    }

    pub fn classical_violated(&self) -> bool {
        self.classical.holds == Some(false)
    }
}

/// Diagrams of a cloud for homology dimensions `0..max_dim`.
pub fn diagrams_for(d: &DistanceMatrix, max_dim: usize, eps_cap: f64) -> Result<Vec<PersistenceDiagram>> {
    Ok(compute_persistence(&build_rips(d, max_dim, eps_cap)?))
}

fn auto_eps_cap(diam_a: f64, diam_b: f64) -> f64 {
    let diam = diam_a.max(diam_b);
    if diam > 0.0 {
        diam * (1.0 + 1e-9)
    } else {
        1.0
    }
}

fn per_dimension_distances(
    original: &[PersistenceDiagram],
    scaled: &[PersistenceDiagram],
) -> Result<Vec<DimensionDistances>> {
    original
        .iter()
        .zip(scaled)
        .map(|(a, b)| {
            Ok(DimensionDistances {
                hom_dim: a.hom_dim,
                bottleneck: bottleneck(a, b)?,
                wasserstein_1: wasserstein(a, b, 1.0)?,
                wasserstein_2: wasserstein(a, b, 2.0)?,
            })
        })
        .collect()
}

/// Generate → distances → Rips → persistence → metrics → bounds → verdicts.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioResult> {
    let resolved = sc.resolve()?;
    let cloud = &resolved.cloud;
    let scaled = apply_scaling(cloud, &resolved.effective)?;

    let d_original = distance_matrix(cloud);
    let d_scaled = distance_matrix(&scaled);
    let diam_original = diameter(&d_original);
    let diam_scaled = diameter(&d_scaled);
    let eps_cap = sc.eps_cap.unwrap_or_else(|| auto_eps_cap(diam_original, diam_scaled));

    let diagrams_original = diagrams_for(&d_original, sc.max_dim, eps_cap)?;
    let diagrams_scaled = diagrams_for(&d_scaled, sc.max_dim, eps_cap)?;
    let distances = per_dimension_distances(&diagrams_original, &diagrams_scaled)?;
    let max_bottleneck = distances.iter().map(|d| d.bottleneck).fold(0.0, f64::max);

    let k_diameters: Vec<Option<f64>> = (0..sc.max_dim).map(|k| k_diameter(&d_original, k).ok()).collect();
    let bounds = BoundSet::evaluate(
        &resolved.effective,
        resolved.steps.as_deref(),
        diam_original,
        &k_diameters,
        &d_original,
        &d_scaled,
    )?;

    let classical = ClassicalCheck {
        bound: bounds.classical,
        max_bottleneck,
        holds: sc
            .eps_cap
            .is_none()
            .then_some(max_bottleneck <= bounds.classical + AUDIT_TOLERANCE),
    };

    let verdicts = scenario_verdicts(&bounds, &distances, &diagrams_original, &diagrams_scaled);

    Ok(ScenarioResult {
        name: sc.name.clone(),
        seed: sc.seed,
        max_dim: sc.max_dim,
        point_count: cloud.len(),
        ambient_dim: cloud.dim(),
        factors: resolved.effective.factors().to_vec(),
        steps: resolved
            .steps
            .as_ref()
            .map(|s| s.iter().map(|t| t.factors().to_vec()).collect()),
        diam_original,
        diam_scaled,
        eps_cap,
        diagrams_original,
        diagrams_scaled,
        distances,
        max_bottleneck,
        bounds,
        classical,
        verdicts,
    })
}

fn scenario_verdicts(
    bounds: &BoundSet,
    distances: &[DimensionDistances],
    original: &[PersistenceDiagram],
    scaled: &[PersistenceDiagram],
) -> Vec<AuditVerdict> {
    let mut out = Vec::new();
    let defined: Vec<bool> = original
        .iter()
        .zip(scaled)
        .map(|(a, b)| !(a.is_empty() && b.is_empty()))
        .collect();

    let push_claims = |out: &mut Vec<AuditVerdict>,
                       hom_dim: Option<usize>,
                       db: Option<f64>,
                       wp: Option<f64>,
                       dim_bound: Option<Option<f64>>| {
        out.push(AuditVerdict::judge(
            ClaimId::Thm31Upper,
            hom_dim,
            Some(bounds.upper_thm31),
            db,
        ));
        out.push(AuditVerdict::judge(
            ClaimId::LemmaRefinedLower,
            hom_dim,
            Some(bounds.lower_refined),
            db,
        ));
        if let Some(bound) = dim_bound {
            out.push(AuditVerdict::judge(ClaimId::Thm32Dim, hom_dim, bound, db));
        }
        if let Some(iterative) = bounds.iterative {
            out.push(AuditVerdict::judge(
                ClaimId::Thm33Iterative,
                hom_dim,
                Some(iterative),
                db,
            ));
        }
        out.push(AuditVerdict::judge(
            ClaimId::Thm34WassersteinVsBound,
            hom_dim,
            Some(bounds.wasserstein_bound),
            wp,
        ));
        out.push(AuditVerdict::judge(ClaimId::Thm34WpLeDb, hom_dim, db, wp));
    };

    for (k, dist) in distances.iter().enumerate() {
        let (db, wp) = if defined[k] {
            (Some(dist.bottleneck), Some(dist.wasserstein_1.max(dist.wasserstein_2)))
        } else {
            (None, None)
        };
        let dim_bound = bounds.dim_bound.get(k).copied().flatten();
        push_claims(&mut out, Some(k), db, wp, Some(dim_bound));
    }

    let any_defined = defined.iter().any(|&d| d);
    let (db, wp) = if any_defined {
        let db = distances.iter().map(|d| d.bottleneck).fold(0.0, f64::max);
        let wp = distances
            .iter()
            .map(|d| d.wasserstein_1.max(d.wasserstein_2))
            .fold(0.0, f64::max);
        (Some(db), Some(wp))
    } else {
        (None, None)
    };
    push_claims(&mut out, None, db, wp, None);
    out
}

/// A batch of randomly generated anisotropic scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomScenarios {
    pub count: usize,
    pub points: usize,
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomScenarios>,
}

impl SuiteSpec {
    /// Declared scenarios followed by the generated random ones.
    pub fn expand(&self) -> Vec<Scenario> {
        let mut all = self.scenarios.clone();
        if let Some(r) = &self.random {
            for i in 0..r.count {
                all.push(Scenario {
                    name: format!("random-{i:03}"),
                    cloud: CloudSpec::Random {
                        count: r.points,
                        dim: r.dim,
                    },
                    transform: TransformSpec::Random { a: r.a, b: r.b },
                    max_dim: r.max_dim,
                    eps_cap: None,
                    seed: derive_seed(self.seed, 1000 + i as u64),
                });
            }
        }
        all
    }

    /// The case studies plus a batch of random anisotropic scalings.
    pub fn case_studies(seed: u64) -> Self {
        let sc = |name: &str, cloud, transform, max_dim| Scenario {
            name: name.to_string(),
            cloud,
            transform,
            max_dim,
            eps_cap: None,
            seed,
        };
        let single = |f: &[f64]| TransformSpec::Single { factors: f.to_vec() };
        SuiteSpec {
            name: "case-studies".into(),
            seed,
            scenarios: vec![
                sc("ellipse-k1.5", CloudSpec::Circle { m: 24 }, single(&[1.0, 1.5]), 2),
                sc("ellipse-k2", CloudSpec::Circle { m: 24 }, single(&[1.0, 2.0]), 2),
                sc("square-identity", CloudSpec::Hypercube { n: 2 }, single(&[1.0, 1.0]), 2),
                sc(
                    "square-uniform-doubling",
                    CloudSpec::Hypercube { n: 2 },
                    single(&[2.0, 2.0]),
                    2,
                ),
                sc(
                    "hypercube-3",
                    CloudSpec::Hypercube { n: 3 },
                    single(&[1.0, 1.5, 2.0]),
                    2,
                ),
                sc(
                    "hypercube-4",
                    CloudSpec::Hypercube { n: 4 },
                    single(&[0.8, 1.0, 1.2, 1.6]),
                    2,
                ),
                sc(
                    "iterative-random-cloud",
                    CloudSpec::Random { count: 10, dim: 3 },
                    TransformSpec::Sequence {
                        steps: vec![vec![1.0, 1.5, 1.2], vec![1.3, 0.9, 1.0]],
                    },
                    2,
                ),
                sc(
                    "probabilistic-random-cloud",
                    CloudSpec::Random { count: 10, dim: 3 },
                    TransformSpec::Random { a: 1.0, b: 2.0 },
                    2,
                ),
                sc(
                    "weighted-random-cloud",
                    CloudSpec::Random { count: 10, dim: 3 },
                    TransformSpec::Weighted {
                        weights: vec![1.0, 0.5, 2.0],
                        base: vec![1.2, 1.0, 0.9],
                    },
                    2,
                ),
            ],
            random: Some(RandomScenarios {
                count: 20,
                points: 8,
                dim: 3,
                a: 0.5,
                b: 2.0,
                max_dim: 2,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimSummary {
    pub claim_id: ClaimId,
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
    /// Largest amount by which a FAIL overshot its bound.
    #[serde(with = "crate::serde_float")]
    pub max_violation: f64,
}

pub fn summarize<'a>(verdicts: impl IntoIterator<Item = &'a AuditVerdict>) -> Vec<ClaimSummary> {
    let mut rows: Vec<ClaimSummary> = ClaimId::ALL
        .iter()
        .map(|&claim_id| ClaimSummary {
            claim_id,
            pass: 0,
            fail: 0,
            vacuous: 0,
            max_violation: 0.0,
        })
        .collect();
    for v in verdicts {
        let row = &mut rows[ClaimId::ALL.iter().position(|c| *c == v.claim_id).unwrap()];
        match v.verdict {
            Verdict::Pass => row.pass += 1,
            Verdict::Fail => row.fail += 1,
            Verdict::Vacuous => row.vacuous += 1,
        }
        row.max_violation = row.max_violation.max(v.violation());
    }
    rows.retain(|r| r.pass + r.fail + r.vacuous > 0);
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub suite: String,
    pub seed: u64,
    pub scenarios: Vec<ScenarioResult>,
    pub summary: Vec<ClaimSummary>,
    /// Scenarios where `d_B` exceeded the sup-norm perturbation.
    pub classical_violations: Vec<String>,
}

/// Runs every scenario of the suite and tallies verdicts per claim.
pub fn run_audit(suite: &SuiteSpec) -> Result<AuditReport> {
    let scenarios = suite.expand();
    for sc in &scenarios {
        sc.validate()?;
    }
    let results = scenarios.par_iter().map(run_scenario).collect::<Result<Vec<_>>>()?;
    let summary = summarize(results.iter().flat_map(|r| &r.verdicts));
    let classical_violations = results
        .iter()
        .filter(|r| r.classical_violated())
        .map(|r| r.name.clone())
        .collect();
    Ok(AuditReport {
        suite: suite.name.clone(),
        seed: suite.seed,
        scenarios: results,
        summary,
        classical_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub cloud: CloudSpec,
    pub a: f64,
    pub b: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub factors: Vec<f64>,
    #[serde(with = "vec_length")]
    pub bottleneck: Vec<f64>,
    #[serde(with = "crate::serde_float")]
    pub max_bottleneck: f64,
    pub classical_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: MonteCarloConfig,
    pub point_count: usize,
    pub ambient_dim: usize,
    pub diam: f64,
    pub trials: usize,
    /// Mean over trials of the max-over-dimensions bottleneck distance.
    #[serde(with = "crate::serde_float")]
    pub mean_db: f64,
    #[serde(with = "crate::serde_float")]
    pub stderr: f64,
    pub bound_paper_mode: f64,
    pub bound_orderstat_mode: f64,
    pub expectations: Vec<ExpectedBound>,
    pub verdicts: Vec<AuditVerdict>,
    pub classical_violations: usize,
    pub records: Vec<TrialRecord>,
}

/// Estimates `E[d_B]` under Uniform(a, b) factors and compares it with both
/// expected-value bounds. Trials run in parallel; each writes only its own
/// slot, so the report does not depend on scheduling.
pub fn run_montecarlo(config: &MonteCarloConfig) -> Result<MonteCarloReport> {
    let (a, b) = (config.a, config.b);
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::param("a,b", format!("need 0 < a < b, got a={a}, b={b}")));
    }
    if config.trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    if !(1..=MAX_SCENARIO_DIM).contains(&config.max_dim) {
        return Err(Error::param(
            "max_dim",
            format!("must be in 1..={MAX_SCENARIO_DIM}, got {}", config.max_dim),
        ));
    }
    let cloud = config.cloud.resolve(config.seed)?;
    let d_original = distance_matrix(&cloud);
    let diam = diameter(&d_original);

    let records = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialRecord> {
            let seed = derive_seed(config.seed, TRANSFORM_STREAM + 1 + trial as u64);
            let s = ScalingTransform::random_uniform(a, b, cloud.dim(), seed)?;
            let d_scaled = distance_matrix(&apply_scaling(&cloud, &s)?);
            let cap = auto_eps_cap(diam, diameter(&d_scaled));
            let original = diagrams_for(&d_original, config.max_dim, cap)?;
            let scaled = diagrams_for(&d_scaled, config.max_dim, cap)?;
            let bottleneck = original
                .iter()
                .zip(&scaled)
                .map(|(x, y)| crate::metrics::bottleneck(x, y))
                .collect::<Result<Vec<f64>>>()?;
            Ok(TrialRecord {
                trial,
                seed,
                factors: s.factors().to_vec(),
                max_bottleneck: bottleneck.iter().copied().fold(0.0, f64::max),
                bottleneck,
                classical_bound: crate::geometry::metric_perturbation(&d_original, &d_scaled)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (mean_db, stderr) = mean_and_stderr(records.iter().map(|r| r.max_bottleneck));
    let endpoints = expected_bound_thm35(a, b, cloud.dim(), ExpectationMode::Endpoints, diam)?;
    let order = expected_bound_thm35(a, b, cloud.dim(), ExpectationMode::OrderStatistics, diam)?;
    let verdicts = vec![
        AuditVerdict::judge(ClaimId::Thm35Expected, None, Some(endpoints.bound), Some(mean_db))
            .with_variant("endpoints"),
        AuditVerdict::judge(ClaimId::Thm35Expected, None, Some(order.bound), Some(mean_db))
            .with_variant("order_statistics"),
    ];
    let classical_violations = records
        .iter()
        .filter(|r| r.max_bottleneck > r.classical_bound + AUDIT_TOLERANCE)
        .count();

    Ok(MonteCarloReport {
        config: config.clone(),
        point_count: cloud.len(),
        ambient_dim: cloud.dim(),
        diam,
        trials: config.trials,
        mean_db,
        stderr,
        bound_paper_mode: endpoints.bound,
        bound_orderstat_mode: order.bound,
        expectations: vec![endpoints, order],
        verdicts,
        classical_violations,
        records,
    })
}

/// Sample mean and standard error of the mean (0 for a single sample).
pub fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.collect();
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

mod vec_length {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    struct Length(#[serde(with = "crate::serde_float")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        struct Elem(f64);
        impl serde::Serialize for Elem {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                crate::serde_float::serialize(&self.0, s)
            }
        }
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Elem(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Length>::deserialize(d)?.into_iter().map(|l| l.0).collect())
    }
}
