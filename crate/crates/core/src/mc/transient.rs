//! Transient-regime statistics: the time of the last visit to the origin
//! and the geometric number of pre-drift excursions.
//!
//! Between collapses the path climbs deterministically (+1 per step), so
//! the run is simulated by drawing the next collapse state directly by
//! inverse cdf from the tabulated survival products: one uniform per
//! collapse event instead of one per step. A run ends when a climb passes
//! the drift threshold T, chosen so the remaining collapse hazard
//! `sum_{y>=T} q_y` is below 1e-7 (the union bound caps the truncation
//! bias of every estimate at that level, far inside Monte Carlo noise).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::tails::disaster_tail;
use crate::util::NeumaierSum;

use super::rng::{stream_rng, uniform_pos};
use super::RunConfig;

/// Per-run outcomes of the drift-time experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftTimeStats {
    pub start_x: u64,
    /// Drift threshold T with `sum_{y>=T} q_y < 1e-7`.
    pub threshold: u64,
    /// Last-visit-to-0 times (DT steps) for runs that reached 0 at all.
    pub drift_times: Vec<u64>,
    /// Completed 0 -> 0 excursions per run that reached 0.
    pub excursion_counts: Vec<u64>,
    /// Fraction of runs that ever hit 0 (estimates `phi_{start_x}`).
    pub hit_zero_fraction: f64,
    pub runs: u64,
}

// Smallest power-of-two threshold with hazard tail below eps.
fn drift_threshold(spec: &ModelSpec, eps: f64) -> Result<u64> {
    let mut t = 1u64 << 12;
    while disaster_tail(spec, t)? >= eps {
        t *= 2;
        if t > 1 << 34 {
            return Err(Error::Domain("could not certify a drift threshold".into()));
        }
    }
    Ok(t)
}

// ls[x] = ln prod_{y<x} p_y for x <= t (survival of the climbing phase).
fn log_survival_table(spec: &ModelSpec, t: u64) -> Vec<f64> {
    let mut ls = Vec::with_capacity(t as usize + 1);
    let mut acc = NeumaierSum::new();
    ls.push(0.0);
    for y in 0..t {
        acc.add(spec.log_growth_prob(y));
        ls.push(acc.value());
    }
    ls
}

// Next collapse state >= x, or None if the climb passes the end of the
// table first: Y is the unique y with S(y) > U >= S(y+1), where
// S(y) = exp(ls[y] - ls[x]) is the probability of surviving states
// x..y-1.
#[inline]
fn sample_collapse_state(ls: &[f64], x: u64, u: f64) -> Option<u64> {
    let lu = u.ln() + ls[x as usize];
    let end = ls.len() - 1;
    if ls[end] > lu {
        return None; // survives past the threshold: drifts forever
    }
    // Binary search: largest y with ls[y] > lu.
    let (mut lo, mut hi) = (x as usize, end);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if ls[mid] > lu {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Some(lo as u64)
}

/// Simulate `config.replications` transient runs from `start_x`.
pub fn drift_time_transient(
    spec: &ModelSpec,
    config: &RunConfig,
    start_x: u64,
) -> Result<DriftTimeStats> {
    if spec.is_recurrent() {
        return Err(Error::Undefined(
            "drift times are a transient-regime notion (beta > 1)".into(),
        ));
    }
    let threshold = drift_threshold(spec, 1e-7)?.max(2 * start_x.max(1));
    let ls = log_survival_table(spec, threshold);
    let runs = config.replications.max(1) as u64;
    let results: Vec<(Option<u64>, Option<u64>)> = (0..runs)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(config.seed, rep);
            let mut x = start_x;
            let mut steps = 0u64;
            let mut last_zero: Option<u64> = None;
            let mut n_excursions = 0u64;
            let mut events = 0u64;
            loop {
                let u = uniform_pos(&mut rng);
                match sample_collapse_state(&ls, x, u) {
                    Some(y) => {
                        // climb x -> y, then the collapse step y -> 0
                        steps += (y - x) + 1;
                        if last_zero.is_some() {
                            n_excursions += 1;
                        }
                        last_zero = Some(steps);
                        x = 0;
                        events += 1;
                        if events >= config.max_events {
                            break;
                        }
                    }
                    None => break, // drifted past the threshold
                }
            }
            match last_zero {
                Some(t) => (Some(t), Some(n_excursions)),
                None => (None, None),
            }
        })
        .collect();
    let mut drift_times = Vec::new();
    let mut excursion_counts = Vec::new();
    let mut hits = 0u64;
    for (t, k) in results {
        if let (Some(t), Some(k)) = (t, k) {
            hits += 1;
            drift_times.push(t);
            excursion_counts.push(k);
        }
    }
    Ok(DriftTimeStats {
        start_x,
        threshold,
        drift_times,
        excursion_counts,
        hit_zero_fraction: hits as f64 / runs as f64,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hitting::{extinction_prob, return_time_pgf};
    use crate::mc::RunConfig;

    fn spec() -> ModelSpec {
        ModelSpec::model_a(0.5, 2.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn recurrent_spec_rejected() {
        let s = ModelSpec::model_b(2.0, 1.0, 1.0).unwrap();
        let cfg = RunConfig::new(1);
        assert!(drift_time_transient(&s, &cfg, 1).is_err());
    }

    #[test]
    fn skip_ahead_matches_stepwise_simulation() {
        // The inverse-cdf collapse sampler must agree with the one-uniform-
        // per-step engine in distribution: compare first-collapse-state
        // frequencies from state 1.
        let s = spec();
        let t = drift_threshold(&s, 1e-7).unwrap();
        let ls = log_survival_table(&s, t);
        let n = 200_000u64;
        let mut skip_counts = std::collections::HashMap::new();
        let mut rng = stream_rng(99, 0);
        for _ in 0..n {
            let u = uniform_pos(&mut rng);
            let y = sample_collapse_state(&ls, 1, u);
            *skip_counts.entry(y).or_insert(0u64) += 1;
        }
        // Stepwise reference.
        use rand::Rng;
        let mut step_counts = std::collections::HashMap::new();
        let mut rng = stream_rng(100, 0);
        for _ in 0..n {
            let mut x = 1u64;
            let mut out = None;
            while x < 5_000 {
                if rng.random::<f64>() < s.disaster_prob(x) {
                    out = Some(x);
                    break;
                }
                x += 1;
            }
            *step_counts.entry(out).or_insert(0u64) += 1;
        }
        for y in [Some(1u64), Some(2), Some(3), Some(5), Some(10), None] {
            let a = *skip_counts.get(&y).unwrap_or(&0) as f64 / n as f64;
            let b = *step_counts.get(&y).unwrap_or(&0) as f64 / n as f64;
            let se = ((a * (1.0 - a) + b * (1.0 - b)) / n as f64).sqrt();
            assert!(
                (a - b).abs() <= 4.0 * se.max(1e-4),
                "collapse state {y:?}: skip {a} vs step {b}"
            );
        }
    }

    #[test]
    fn hit_fraction_matches_extinction_probability() {
        let s = spec();
        for x in [1u64, 5, 20] {
            let cfg = RunConfig::new(100 + x).with_replications(200_000);
            let stats = drift_time_transient(&s, &cfg, x).unwrap();
            let phi = extinction_prob(&s, x);
            let se = (phi * (1.0 - phi) / stats.runs as f64).sqrt();
            assert!(
                (stats.hit_zero_fraction - phi).abs() <= 3.5 * se,
                "x={x}: {} vs {phi}",
                stats.hit_zero_fraction
            );
        }
    }

    #[test]
    fn excursion_count_is_geometric_with_return_ratio() {
        // P(N_e = k) = (1 - phi00) phi00^k given the walker reached 0.
        let s = spec();
        let cfg = RunConfig::new(5).with_replications(300_000);
        let stats = drift_time_transient(&s, &cfg, 1).unwrap();
        let phi00 = return_time_pgf(&s, 1.0).unwrap().value;
        let n = stats.excursion_counts.len() as f64;
        // Chi-square against the geometric pmf on {0..6, 7+}.
        let mut observed = [0.0f64; 8];
        for &k in &stats.excursion_counts {
            observed[(k as usize).min(7)] += 1.0;
        }
        let mut expected = [0.0f64; 8];
        let mut rest = 1.0;
        for k in 0..7 {
            expected[k] = (1.0 - phi00) * phi00.powi(k as i32);
            rest -= expected[k];
        }
        expected[7] = rest;
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - n * e).powi(2) / (n * e))
            .sum();
        // 7 dof, p > 0.01 <=> chi2 < 18.48.
        assert!(chi2 < 18.48, "chi2 = {chi2}");
        // Mean of the geometric: phi/(1-phi).
        let mean = stats.excursion_counts.iter().sum::<u64>() as f64 / n;
        let want = phi00 / (1.0 - phi00);
        assert!((mean - want).abs() < 0.05 * want.max(0.1), "mean {mean} vs {want}");
    }
}
