//! Estimators and comparison statistics over simulation output.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::engine::MatrixTrajectory;
use crate::error::{Error, Result};

/// Monte Carlo mean with a normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub point: f64,
    pub half_width: f64,
    pub level: f64,
    pub n: usize,
    pub master_seed: u64,
    pub std_error: f64,
}

impl EstimateWithCI {
    pub fn lower(&self) -> f64 {
        self.point - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.point + self.half_width
    }

    pub fn covers(&self, value: f64) -> bool {
        (self.lower()..=self.upper()).contains(&value)
    }

    /// Distance to `value` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.point == value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.point - value).abs() / self.std_error
        }
    }
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Mean and `level` confidence interval of `samples`.
pub fn estimate_mean(samples: &[f64], level: f64, master_seed: u64) -> Result<EstimateWithCI> {
    if samples.len() < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: samples.len() });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level must lie in (0,1), got {level}")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    Ok(EstimateWithCI {
        point: mean,
        half_width: normal_quantile(level) * se,
        level,
        n: samples.len(),
        master_seed,
        std_error: se,
    })
}

/// Sample standard deviation (denominator `n − 1`).
pub fn sample_sd(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Normalizes counts into an empirical distribution.
pub fn empirical_distribution(counts: &[u64]) -> Vec<f64> {
    let total = counts.iter().sum::<u64>() as f64;
    counts.iter().map(|&c| c as f64 / total).collect()
}

/// Total-variation distance `½·Σ|a − b|`.
pub fn empirical_tv(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SupportMismatch { left: a.len(), right: b.len() });
    }
    Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Pearson goodness-of-fit test of `observed` against `expected` masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square test with `observed` weights (counts or durations scaled so
/// that their total is the effective sample size) against probabilities
/// `expected`. Cells with zero expected mass are skipped.
pub fn chi_square(observed: &[f64], expected: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != expected.len() {
        return Err(Error::SupportMismatch { left: observed.len(), right: expected.len() });
    }
    let total: f64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (o, e) in observed.iter().zip(expected) {
        if *e <= 0.0 {
            continue;
        }
        let exp = e * total;
        stat += (o - exp) * (o - exp) / exp;
        cells += 1;
    }
    if cells < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: cells });
    }
    let dof = cells - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ChiSquareTest { statistic: stat, dof, p_value: 1.0 - dist.cdf(stat) })
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Location and spread of the first-full-column time across replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionWindow {
    /// 5% quantile of the per-replicate transition times.
    pub t_lo: f64,
    /// 95% quantile.
    pub t_hi: f64,
    pub median: f64,
    /// `(t_hi − t_lo) / median`.
    pub relative_width: f64,
    pub n_detected: usize,
    /// Replicates without a transition inside their horizon.
    pub n_excluded: usize,
}

/// Time at which the all-ones column count of `traj` first reaches
/// `max(1, ⌈threshold_fraction · steady_count⌉)`.
///
/// With `threshold_fraction = 0` this is the first time some column is all
/// ones. Needs a trajectory recorded with its series, except in that case,
/// where the recorded first hit is used.
pub fn transition_time(traj: &MatrixTrajectory, threshold_fraction: f64, steady_count: f64) -> Option<f64> {
    let target = ((threshold_fraction * steady_count).ceil() as usize).max(1);
    if target == 1 && traj.series.is_empty() {
        return traj.first_hit;
    }
    traj.series.iter().find(|&&(_, c)| c >= target).map(|&(t, _)| t)
}

/// Summarizes transition times over replicates with the empirical
/// [5%, 95%] window.
pub fn detect_transition(
    trajectories: &[MatrixTrajectory],
    threshold_fraction: f64,
    steady_count: f64,
) -> Result<TransitionWindow> {
    let times: Vec<Option<f64>> =
        trajectories.iter().map(|t| transition_time(t, threshold_fraction, steady_count)).collect();
    transition_window(&times)
}

/// [`detect_transition`] on precomputed per-replicate times.
pub fn transition_window(times: &[Option<f64>]) -> Result<TransitionWindow> {
    let mut hits: Vec<f64> = times.iter().flatten().copied().collect();
    let n_excluded = times.len() - hits.len();
    if hits.is_empty() {
        return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
    }
    hits.sort_by(f64::total_cmp);
    let t_lo = quantile_sorted(&hits, 0.05);
    let t_hi = quantile_sorted(&hits, 0.95);
    let median = quantile_sorted(&hits, 0.5);
    Ok(TransitionWindow {
        t_lo,
        t_hi,
        median,
        relative_width: (t_hi - t_lo) / median,
        n_detected: hits.len(),
        n_excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{hitting_time_batch, simulate_matrix, SimulationConfig};
    use crate::model::{MatrixParams, MatrixState, SingleColumnParams};

    #[test]
    fn constant_samples_have_zero_width() {
        let e = estimate_mean(&[3.0; 10], 0.95, 0).unwrap();
        assert_eq!(e.point, 3.0);
        assert_eq!(e.half_width, 0.0);
        assert!(e.covers(3.0));
    }

    #[test]
    fn too_few_samples() {
        assert!(estimate_mean(&[1.0], 0.95, 0).is_err());
        assert!(estimate_mean(&[1.0, 2.0], 1.5, 0).is_err());
    }

    #[test]
    fn quantile_of_standard_normal() {
        assert!((normal_quantile(0.95) - 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn ci_covers_exact_mean_and_disjoint_seeds_overlap() {
        let params = SingleColumnParams::new(1, 1.0, 0.5).unwrap();
        let a = estimate_mean(&hitting_time_batch(&params, 100_000, 1).unwrap(), 0.95, 1).unwrap();
        let b = estimate_mean(&hitting_time_batch(&params, 100_000, 2).unwrap(), 0.95, 2).unwrap();
        assert!(a.covers(2.0) || a.z_score(2.0) < 3.0);
        assert!(a.lower() <= b.upper() && b.lower() <= a.upper());
    }

    #[test]
    fn tv_edge_cases() {
        assert_eq!(empirical_tv(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(empirical_tv(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(empirical_tv(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn chi_square_accepts_exact_counts() {
        let t = chi_square(&[250.0, 250.0, 500.0], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 2);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let t = chi_square(&[400.0, 100.0, 500.0], &[0.25, 0.25, 0.5]).unwrap();
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 0.25), 2.0);
        assert_eq!(quantile_sorted(&xs, 0.1), 1.4);
    }

    #[test]
    fn window_counts_exclusions() {
        let w = transition_window(&[Some(1.0), None, Some(3.0), Some(2.0)]).unwrap();
        assert_eq!(w.n_detected, 3);
        assert_eq!(w.n_excluded, 1);
        assert_eq!(w.median, 2.0);
        assert!(w.t_lo <= w.t_hi);
        assert!(transition_window(&[None, None]).is_err());
    }

    #[test]
    fn detect_uses_series_threshold() {
        let params = MatrixParams::new(6, 8, 0.2, 0.0).unwrap();
        let trajs: Vec<_> = (0..20)
            .map(|r| {
                let cfg = SimulationConfig::until_time(4, r, 400.0).with_series();
                simulate_matrix(&params, &cfg, MatrixState::for_params(&params)).unwrap()
            })
            .collect();
        let first = detect_transition(&trajs, 0.0, 4.0).unwrap();
        let half = detect_transition(&trajs, 0.5, 4.0).unwrap();
        assert!(first.median <= half.median);
        for t in &trajs {
            assert_eq!(transition_time(t, 0.0, 4.0), t.first_hit);
        }
    }
}
