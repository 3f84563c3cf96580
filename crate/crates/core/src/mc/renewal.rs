//! Renewal-theoretic statistics of the zero set: the idle/busy
//! decomposition of the inter-catastrophe interval, the backward
//! recurrence time and the thinned size-biased excursion law.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::stationary::c2_value;
use crate::util::mean_and_stderr;

use super::dt::QCache;
use super::rng::{stream_rng, uniform_pos};
use super::RunConfig;

/// Estimates of the idle/busy decomposition `Delta = tau^0 + tau^+`:
/// the geometric count of trivial excursions plus one true excursion.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalDeltaStats {
    pub cycles: u64,
    pub idle_mean: f64,
    pub idle_se: f64,
    pub busy_mean: f64,
    pub busy_se: f64,
    pub delta_mean: f64,
    pub delta_se: f64,
    /// Sample correlation between idle and busy components (None when the
    /// idle period is degenerate at 0, i.e. q0 = 0).
    pub idle_busy_correlation: Option<f64>,
}

/// Closed-form mean of the idle period: geometric on {0,1,...} with
/// success p0, so `q0/p0`.
pub fn idle_mean_closed(spec: &ModelSpec) -> f64 {
    spec.q0() / spec.p0()
}

/// Closed-form mean of a true excursion length, `1 + C2/p0` (finite in
/// the positive recurrent case).
pub fn busy_mean_closed(spec: &ModelSpec) -> f64 {
    if spec.beta() < 1.0 || (spec.beta() == 1.0 && spec.alpha() > 1.0) {
        1.0 + c2_value(spec) / spec.p0()
    } else {
        f64::INFINITY
    }
}

/// Simulate complete idle+busy cycles and estimate the component means
/// and their independence (positive recurrent chains only).
pub fn renewal_delta_stats(spec: &ModelSpec, config: &RunConfig) -> Result<RenewalDeltaStats> {
    if !(spec.beta() < 1.0 || (spec.beta() == 1.0 && spec.alpha() > 1.0)) {
        return Err(Error::Undefined(
            "the Delta decomposition needs a positive recurrent chain".into(),
        ));
    }
    let cycles_wanted = config.steps().max(1);
    let mut rng = stream_rng(config.seed, 0);
    let mut qc = QCache::new(spec);
    let mut idle = Vec::with_capacity(cycles_wanted as usize);
    let mut busy = Vec::with_capacity(cycles_wanted as usize);
    let mut idle_run = 0u64;
    let mut x = 0u64;
    let mut since_zero = 0u64;
    while (busy.len() as u64) < cycles_wanted {
        let q = qc.q(x);
        let u: f64 = rng.random();
        if u > q {
            x += 1;
            since_zero += 1;
        } else if x == 0 {
            // trivial excursion 0 -> 0
            idle_run += 1;
        } else {
            idle.push(idle_run as f64);
            busy.push((since_zero + 1) as f64);
            idle_run = 0;
            x = 0;
            since_zero = 0;
        }
    }
    let (idle_mean, idle_se) = mean_and_stderr(&idle);
    let (busy_mean, busy_se) = mean_and_stderr(&busy);
    let delta: Vec<f64> = idle.iter().zip(&busy).map(|(a, b)| a + b).collect();
    let (delta_mean, delta_se) = mean_and_stderr(&delta);
    let idle_busy_correlation = if spec.q0() == 0.0 {
        None
    } else {
        let n = idle.len() as f64;
        let cov: f64 = idle
            .iter()
            .zip(&busy)
            .map(|(a, b)| (a - idle_mean) * (b - busy_mean))
            .sum::<f64>()
            / (n - 1.0);
        let sd_i = (idle.iter().map(|a| (a - idle_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let sd_b = (busy.iter().map(|b| (b - busy_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        Some(cov / (sd_i * sd_b))
    };
    Ok(RenewalDeltaStats {
        cycles: busy.len() as u64,
        idle_mean,
        idle_se,
        busy_mean,
        busy_se,
        delta_mean,
        delta_se,
        idle_busy_correlation,
    })
}

/// Empirical law of the backward recurrence time (steps since the last
/// visit to 0) over a long run, tabulated on `{0..cap}` with the excess
/// mass lumped at the end. Returns `(pmf, lump)`.
pub fn backward_recurrence_law(
    spec: &ModelSpec,
    config: &RunConfig,
    cap: u64,
) -> Result<(Vec<f64>, f64)> {
    if !(spec.beta() < 1.0 || (spec.beta() == 1.0 && spec.alpha() > 1.0)) {
        return Err(Error::Undefined(
            "the backward recurrence time has a limit law only when positive recurrent".into(),
        ));
    }
    let steps = config.steps();
    let mut rng = stream_rng(config.seed, 0);
    let mut qc = QCache::new(spec);
    let mut counts = vec![0u64; cap as usize + 1];
    let mut lump = 0u64;
    let mut x = 0u64;
    let mut since_zero = 0u64;
    for _ in 0..steps {
        let q = qc.q(x);
        let u: f64 = rng.random();
        if u > q {
            x += 1;
            since_zero += 1;
        } else {
            x = 0;
            since_zero = 0;
        }
        // Backward recurrence time after this step (0 when at the origin).
        if since_zero <= cap {
            counts[since_zero as usize] += 1;
        } else {
            lump += 1;
        }
    }
    let n = steps as f64;
    Ok((counts.iter().map(|&c| c as f64 / n).collect(), lump as f64 / n))
}

/// Empirical law of `U o (tau_inf - 1)`: the uniform binomial thinning of
/// the size-biased excursion length, which renewal theory identifies with
/// the stationary law. Size-biased sampling picks the excursion covering a
/// uniform time point of a long run. Returns `(pmf on {0..cap}, lump)`.
pub fn thinned_size_biased_law(
    spec: &ModelSpec,
    config: &RunConfig,
    samples: u64,
    cap: u64,
) -> Result<(Vec<f64>, f64)> {
    if !(spec.beta() < 1.0 || (spec.beta() == 1.0 && spec.alpha() > 1.0)) {
        return Err(Error::Undefined(
            "size-biased excursions need a positive recurrent chain".into(),
        ));
    }
    let steps = config.steps();
    // Pass 1: excursion lengths over the run.
    let mut rng = stream_rng(config.seed, 0);
    let mut qc = QCache::new(spec);
    let mut lengths = Vec::new();
    let mut x = 0u64;
    let mut since_zero = 0u64;
    for _ in 0..steps {
        let q = qc.q(x);
        let u: f64 = rng.random();
        if u > q {
            x += 1;
            since_zero += 1;
        } else {
            lengths.push(since_zero + 1);
            x = 0;
            since_zero = 0;
        }
    }
    if lengths.is_empty() {
        return Err(Error::Domain("no completed excursions within the horizon".into()));
    }
    let prefix: Vec<u64> = lengths
        .iter()
        .scan(0u64, |acc, &l| {
            *acc += l;
            Some(*acc)
        })
        .collect();
    let covered = *prefix.last().unwrap();
    // Pass 2: pick excursions covering uniform time points (size-biased),
    // thin with a fresh uniform level per sample.
    let mut rng = stream_rng(config.seed, 1);
    let mut counts = vec![0u64; cap as usize + 1];
    let mut lump = 0u64;
    for _ in 0..samples {
        let t = (rng.random::<f64>() * covered as f64) as u64;
        let idx = prefix.partition_point(|&p| p <= t);
        let tau = lengths[idx.min(lengths.len() - 1)];
        let level = uniform_pos(&mut rng);
        let mut thinned = 0u64;
        for _ in 0..(tau - 1) {
            if rng.random::<f64>() < level {
                thinned += 1;
            }
        }
        if thinned <= cap {
            counts[thinned as usize] += 1;
        } else {
            lump += 1;
        }
    }
    let n = samples as f64;
    Ok((counts.iter().map(|&c| c as f64 / n).collect(), lump as f64 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{Horizon, RunConfig};
    use crate::stationary::invariant_dt;

    #[test]
    fn delta_decomposition_matches_closed_forms() {
        // Model A, beta=1, alpha=2, nu=1: busy mean = 1 + nu/(alpha-1) = 2.
        let spec = ModelSpec::model_a(2.0, 1.0, 1.0, 0.7).unwrap();
        let cfg = RunConfig::new(9).with_horizon(Horizon::Steps(200_000));
        let s = renewal_delta_stats(&spec, &cfg).unwrap();
        assert!((s.busy_mean - 2.0).abs() <= 3.0 * s.busy_se, "busy {}", s.busy_mean);
        let want_idle = idle_mean_closed(&spec);
        assert!((s.idle_mean - want_idle).abs() <= 3.0 * s.idle_se);
        assert!(
            (s.delta_mean - (want_idle + 2.0)).abs() <= 3.0 * s.delta_se,
            "delta {}",
            s.delta_mean
        );
        // Components are independent: correlation compatible with 0.
        let corr = s.idle_busy_correlation.unwrap();
        assert!(corr.abs() < 4.0 / (s.cycles as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn delta_degenerates_without_holding() {
        // q0 = 0: Delta = tau^+ exactly.
        let spec = ModelSpec::model_b(2.0, 1.0, 1.0).unwrap();
        let cfg = RunConfig::new(4).with_horizon(Horizon::Steps(50_000));
        let s = renewal_delta_stats(&spec, &cfg).unwrap();
        assert_eq!(s.idle_mean, 0.0);
        assert!(s.idle_busy_correlation.is_none());
        assert_eq!(s.delta_mean, s.busy_mean);
        let want = busy_mean_closed(&spec);
        assert!((s.busy_mean - want).abs() <= 3.0 * s.busy_se);
    }

    #[test]
    fn backward_recurrence_time_matches_stationary_law() {
        let spec = ModelSpec::model_b(2.5, 1.0, 0.8).unwrap();
        let cfg = RunConfig::new(17).with_horizon(Horizon::Steps(2_000_000));
        let cap = 200u64;
        let (emp, lump) = backward_recurrence_law(&spec, &cfg, cap).unwrap();
        let pi = invariant_dt(&spec, cap).unwrap();
        let mut tv = 0.0;
        for x in 0..=cap {
            tv += (emp[x as usize] - pi.mass(x)).abs();
        }
        tv += (lump - pi.tail_mass_bound).abs();
        tv *= 0.5;
        assert!(tv <= 0.01, "TV distance {tv}");
    }

    #[test]
    fn thinning_identity_recovers_stationary_law() {
        let spec = ModelSpec::model_b(2.5, 1.0, 0.8).unwrap();
        let cfg = RunConfig::new(23).with_horizon(Horizon::Steps(1_000_000));
        let cap = 200u64;
        let (emp, lump) = thinned_size_biased_law(&spec, &cfg, 400_000, cap).unwrap();
        let pi = invariant_dt(&spec, cap).unwrap();
        let mut tv = 0.0;
        for x in 0..=cap {
            tv += (emp[x as usize] - pi.mass(x)).abs();
        }
        tv += (lump - pi.tail_mass_bound).abs();
        tv *= 0.5;
        assert!(tv <= 0.01, "TV distance {tv}");
    }
}
