//! Closed-form scaling-stability bounds.
//!
//! Every function here is plain arithmetic on nonnegative reals. Whether a
//! bound actually holds for a measured distance is decided by the harness,
//! not here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compose_scalings, metric_perturbation, DistanceMatrix, ScalingTransform};

/// Extreme and root-mean-square factors of a transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingStats {
    pub s_min: f64,
    pub s_max: f64,
    /// `sqrt(mean(s_i^2))`
    pub s_avg: f64,
}

pub fn scaling_stats(s: &ScalingTransform) -> ScalingStats {
    let f = s.factors();
    let mean_sq = f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64;
    let (s_min, s_max) = (s.min(), s.max());
    // clamp so rounding in the mean cannot push s_avg outside [s_min, s_max]
    ScalingStats {
        s_min,
        s_max,
        s_avg: mean_sq.sqrt().clamp(s_min, s_max),
    }
}

/// `½ (s_max − s_min) · diam`
pub fn upper_bound_thm31(stats: &ScalingStats, diam: f64) -> f64 {
    0.5 * (stats.s_max - stats.s_min) * diam
}

/// `½ (s_avg − s_min) · diam`
pub fn refined_lower_bound(stats: &ScalingStats, diam: f64) -> f64 {
    0.5 * (stats.s_avg - stats.s_min) * diam
}

/// Per-homology-dimension bound `½ (s_max − s_min) · diam_k`.
pub fn dimension_bound_thm32(stats: &ScalingStats, k_diam: f64) -> f64 {
    0.5 * (stats.s_max - stats.s_min) * k_diam
}

/// `½ (∏ max_j − ∏ min_j) · diam` from each step's own extremes.
///
/// This can exceed [`upper_bound_thm31`] of the composed transform, whose
/// extremes are taken after multiplying coordinate by coordinate.
pub fn iterative_bound_thm33(sequence: &[ScalingTransform], diam: f64) -> Result<f64> {
    compose_scalings(sequence)?;
    let max_product: f64 = sequence.iter().map(ScalingTransform::max).product();
    let min_product: f64 = sequence.iter().map(ScalingTransform::min).product();
    Ok(0.5 * (max_product - min_product) * diam)
}

/// Same arithmetic as [`upper_bound_thm31`]; kept separate so verdicts cite
/// the Wasserstein claim.
pub fn wasserstein_bound_thm34(stats: &ScalingStats, diam: f64) -> f64 {
    0.5 * (stats.s_max - stats.s_min) * diam
}

/// How `E[s_max]` and `E[s_min]` are obtained for `n` Uniform(a, b) factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationMode {
    /// `E[s_max] = b`, `E[s_min] = a`.
    Endpoints,
    /// Exact means of the extreme order statistics of `n` independent draws.
    OrderStatistics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedBound {
    pub mode: ExpectationMode,
    pub expected_max: f64,
    pub expected_min: f64,
    /// `½ (E[s_max] − E[s_min])`, the bound per unit diameter.
    pub coefficient: f64,
    pub bound: f64,
}

/// Means of the largest and smallest of `n` independent Uniform(a, b)
/// draws: `a + (b − a)·n/(n+1)` and `a + (b − a)/(n+1)`.
pub fn uniform_extreme_means(a: f64, b: f64, n: usize) -> Result<(f64, f64)> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::param("a,b", format!("need finite a < b, got a={a}, b={b}")));
    }
    if n == 0 {
        return Err(Error::param("n", "need at least one draw"));
    }
    let width = b - a;
    let n1 = (n + 1) as f64;
    Ok((a + width * n as f64 / n1, a + width / n1))
}

pub fn expected_bound_thm35(a: f64, b: f64, n: usize, mode: ExpectationMode, diam: f64) -> Result<ExpectedBound> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::param("a,b", format!("need 0 < a < b, got a={a}, b={b}")));
    }
    let (expected_max, expected_min) = match mode {
        ExpectationMode::Endpoints => {
            if n == 0 {
                return Err(Error::param("n", "need at least one coordinate"));
            }
            (b, a)
        }
        ExpectationMode::OrderStatistics => uniform_extreme_means(a, b, n)?,
    };
    let coefficient = 0.5 * (expected_max - expected_min);
    Ok(ExpectedBound {
        mode,
        expected_max,
        expected_min,
        coefficient,
        bound: coefficient * diam,
    })
}

/// Sup-norm metric perturbation; the textbook Rips stability bound on `d_B`.
pub fn classical_stability_bound(d_original: &DistanceMatrix, d_scaled: &DistanceMatrix) -> Result<f64> {
    metric_perturbation(d_original, d_scaled)
}

/// Right-hand sides of every scaling inequality for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub stats: ScalingStats,
    pub upper_thm31: f64,
    pub lower_refined: f64,
    /// Indexed by homology dimension; `None` where the cloud has too few
    /// points for a simplex of that dimension.
    pub dim_bound: Vec<Option<f64>>,
    /// Literal per-step bound, present only for transform sequences.
    #[serde(default, with = "crate::serde_float::option")]
    pub iterative: Option<f64>,
    pub wasserstein_bound: f64,
    pub classical: f64,
}

impl BoundSet {
    /// Evaluates every bound. `k_diameters[k]` is the k-diameter of the
    /// original cloud (or `None`); `steps` is the transform sequence when the
    /// scenario applies several scalings in turn.
    pub fn evaluate(
        effective: &ScalingTransform,
        steps: Option<&[ScalingTransform]>,
        diam: f64,
        k_diameters: &[Option<f64>],
        d_original: &DistanceMatrix,
        d_scaled: &DistanceMatrix,
    ) -> Result<Self> {
        let stats = scaling_stats(effective);
        Ok(BoundSet {
            stats,
            upper_thm31: upper_bound_thm31(&stats, diam),
            lower_refined: refined_lower_bound(&stats, diam),
            dim_bound: k_diameters
                .iter()
                .map(|kd| kd.map(|kd| dimension_bound_thm32(&stats, kd)))
                .collect(),
            iterative: steps.map(|s| iterative_bound_thm33(s, diam)).transpose()?,
            wasserstein_bound: wasserstein_bound_thm34(&stats, diam),
            classical: classical_stability_bound(d_original, d_scaled)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_scaling, distance_matrix, generate_hypercube, k_diameter};
    use proptest::prelude::*;
    use rand::Rng;

    fn t(v: &[f64]) -> ScalingTransform {
        ScalingTransform::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn stats_examples() {
        let s = scaling_stats(&t(&[1.0, 2.0]));
        assert_eq!((s.s_min, s.s_max), (1.0, 2.0));
        assert!(close(s.s_avg, 2.5f64.sqrt()));
        assert!((s.s_avg - 1.58114).abs() < 1e-5);

        let u = scaling_stats(&t(&[0.7; 5]));
        assert_eq!((u.s_min, u.s_max, u.s_avg), (0.7, 0.7, 0.7));

        let s = scaling_stats(&t(&[1.0, 1.0, 4.0]));
        assert_eq!((s.s_min, s.s_max), (1.0, 4.0));
        assert!(close(s.s_avg, 6f64.sqrt()));
    }

    #[test]
    fn upper_bound_examples() {
        for k in [1.5, 2.0, 3.0] {
            assert!(close(upper_bound_thm31(&scaling_stats(&t(&[1.0, k])), 2.0), k - 1.0));
        }
        assert_eq!(upper_bound_thm31(&scaling_stats(&t(&[3.0, 3.0])), 5.0), 0.0);
        let s = t(&[0.5, 1.0, 2.5, 1.5]);
        let diam = crate::geometry::diameter(&distance_matrix(&generate_hypercube(4).unwrap()));
        assert!(close(upper_bound_thm31(&scaling_stats(&s), diam), 0.5 * 2.0 * 2.0));
    }

    #[test]
    fn lower_bound_examples() {
        let v = refined_lower_bound(&scaling_stats(&t(&[1.0, 2.0])), 2f64.sqrt());
        assert!(close(v, 0.5 * (2.5f64.sqrt() - 1.0) * 2f64.sqrt()));
        assert!((v - 0.41089).abs() < 1e-4);
        assert_eq!(refined_lower_bound(&scaling_stats(&t(&[2.0, 2.0])), 1.0), 0.0);
        assert!(close(
            refined_lower_bound(&scaling_stats(&t(&[1.0, 1.0, 4.0])), 2.0),
            6f64.sqrt() - 1.0
        ));
    }

    #[test]
    fn dimension_bound_examples() {
        let d = distance_matrix(&generate_hypercube(2).unwrap());
        let kd = k_diameter(&d, 1).unwrap();
        let v = dimension_bound_thm32(&scaling_stats(&t(&[1.0, 2.0])), kd);
        assert!(close(v, 0.5 * 2f64.sqrt()));
        assert_eq!(dimension_bound_thm32(&scaling_stats(&t(&[2.0, 2.0])), kd), 0.0);
        assert_eq!(dimension_bound_thm32(&scaling_stats(&t(&[1.0, 2.0])), 0.0), 0.0);
    }

    #[test]
    fn iterative_bound_examples() {
        assert!(close(
            iterative_bound_thm33(&[t(&[1.0, 2.0]), t(&[1.0, 3.0])], 1.0).unwrap(),
            2.5
        ));
        assert_eq!(
            iterative_bound_thm33(&[t(&[2.0, 2.0]), t(&[0.5, 0.5])], 3.0).unwrap(),
            0.0
        );
        let single = t(&[0.8, 1.7]);
        assert_eq!(
            iterative_bound_thm33(std::slice::from_ref(&single), 2.0).unwrap(),
            upper_bound_thm31(&scaling_stats(&single), 2.0)
        );
        assert!(iterative_bound_thm33(&[], 1.0).is_err());
        assert!(iterative_bound_thm33(&[t(&[1.0]), t(&[1.0, 2.0])], 1.0).is_err());

        // anisotropic steps that cancel: literal bound exceeds the composed one
        let steps = [t(&[1.0, 2.0]), t(&[2.0, 1.0])];
        let composed = compose_scalings(&steps).unwrap();
        assert!(iterative_bound_thm33(&steps, 1.0).unwrap() > upper_bound_thm31(&scaling_stats(&composed), 1.0));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn wasserstein_bound_mirrors_upper() {
        for (s, diam) in [
            (t(&[1.0, 2.0]), 2.0),
            (t(&[1.0, 2.0]), 2f64.sqrt()),
            (t(&[4.0, 4.0]), 1.0),
        ] {
            let st = scaling_stats(&s);
            assert_eq!(wasserstein_bound_thm34(&st, diam), upper_bound_thm31(&st, diam));
        }
        assert!((wasserstein_bound_thm34(&scaling_stats(&t(&[1.0, 2.0])), 2f64.sqrt()) - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn expected_bound_examples() {
        let endpoints = expected_bound_thm35(1.0, 2.0, 3, ExpectationMode::Endpoints, 3f64.sqrt()).unwrap();
        assert!(close(endpoints.bound, 0.5 * 3f64.sqrt()));
        assert!((endpoints.bound - 0.86603).abs() < 1e-5);

        let (emax, emin) = uniform_extreme_means(0.0, 1.0, 3).unwrap();
        assert!(close(emax, 0.75) && close(emin, 0.25));
        assert!(close(0.5 * (emax - emin), 0.25));

        let p1 = expected_bound_thm35(1.0, 2.0, 1, ExpectationMode::Endpoints, 1.0).unwrap();
        let o1 = expected_bound_thm35(1.0, 2.0, 1, ExpectationMode::OrderStatistics, 1.0).unwrap();
        assert!(close(p1.expected_max - p1.expected_min, 1.0));
        assert!(close(o1.expected_max - o1.expected_min, 0.0));

        assert!(expected_bound_thm35(0.0, 1.0, 3, ExpectationMode::Endpoints, 1.0).is_err());
        assert!(expected_bound_thm35(2.0, 1.0, 3, ExpectationMode::OrderStatistics, 1.0).is_err());
        assert!(expected_bound_thm35(1.0, 1.0, 3, ExpectationMode::Endpoints, 1.0).is_err());
    }

    #[test]
    fn order_statistic_means_match_simulation() {
        let mut rng = crate::rng::seeded(2024);
        let draws = 1_000_000;
        let (mut max_sum, mut min_sum) = (0.0, 0.0);
        for _ in 0..draws {
            let v: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            max_sum += v.iter().copied().fold(f64::MIN, f64::max);
            min_sum += v.iter().copied().fold(f64::MAX, f64::min);
        }
        let (emax, emin) = uniform_extreme_means(0.0, 1.0, 3).unwrap();
        // standard error is about 2e-4 per mean
        assert!((max_sum / draws as f64 - emax).abs() < 2e-3);
        assert!((min_sum / draws as f64 - emin).abs() < 2e-3);
    }

    #[test]
    fn classical_examples() {
        let sq = generate_hypercube(2).unwrap();
        let d = distance_matrix(&sq);
        assert_eq!(classical_stability_bound(&d, &d).unwrap(), 0.0);
        let stretched = distance_matrix(&apply_scaling(&sq, &t(&[1.0, 2.0])).unwrap());
        assert!(close(classical_stability_bound(&d, &stretched).unwrap(), 1.0));
        let doubled = distance_matrix(&apply_scaling(&sq, &t(&[2.0, 2.0])).unwrap());
        assert!(close(classical_stability_bound(&d, &doubled).unwrap(), 2f64.sqrt()));
    }

    #[test]
    fn refined_below_upper_on_random_transforms() {
        let mut rng = crate::rng::seeded(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..8);
            let s = ScalingTransform::new((0..n).map(|_| rng.gen_range(0.01..50.0)).collect()).unwrap();
            let st = scaling_stats(&s);
            assert!(st.s_min <= st.s_avg && st.s_avg <= st.s_max);
            let diam = rng.gen_range(0.0..10.0);
            assert!(refined_lower_bound(&st, diam) <= upper_bound_thm31(&st, diam));
        }
    }

    #[test]
    fn order_statistics_never_exceed_endpoint_mode() {
        for a in [0.1, 0.5, 1.0, 3.0] {
            for width in [1e-6, 0.5, 1.0, 10.0] {
                for n in 1..=12 {
                    let b = a + width;
                    let endpoints = expected_bound_thm35(a, b, n, ExpectationMode::Endpoints, 1.0).unwrap();
                    let order = expected_bound_thm35(a, b, n, ExpectationMode::OrderStatistics, 1.0).unwrap();
                    assert!(order.coefficient <= endpoints.coefficient);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn upper_zero_iff_uniform(factors in prop::collection::vec(0.1f64..10.0, 1..6), diam in 0.1f64..10.0) {
            let st = scaling_stats(&t(&factors));
            let zero = upper_bound_thm31(&st, diam).abs() <= 1e-15;
            prop_assert_eq!(zero, st.s_max == st.s_min);
        }
    }
}
