//! Discrete-time trajectory simulation: one uniform per step,
//! `X_{n+1} = (X_n + 1) 1(U_{n+1} > q_{X_n})`.

use rayon::prelude::*;

use crate::model::ModelSpec;

use super::rng::{stream_rng, SimRng};
use super::{ExcursionSample, RunConfig};

/// Lazily extended cache of the disaster probabilities, so the hot loop
/// never recomputes a power.
pub(crate) struct QCache<'a> {
    spec: &'a ModelSpec,
    q: Vec<f64>,
}

impl<'a> QCache<'a> {
    pub(crate) fn new(spec: &'a ModelSpec) -> Self {
        QCache { spec, q: Vec::with_capacity(1024) }
    }

    #[inline]
    pub(crate) fn q(&mut self, x: u64) -> f64 {
        let xi = x as usize;
        while self.q.len() <= xi {
            self.q.push(self.spec.disaster_prob(self.q.len() as u64));
        }
        self.q[xi]
    }
}

/// One simulated discrete-time trajectory started at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DtTrajectory {
    pub excursions: Vec<ExcursionSample>,
    /// Steps since the last visit to 0 when the horizon cut a final
    /// partial excursion (equals the final state).
    pub partial_excursion_steps: Option<u64>,
    pub steps: u64,
    pub final_state: u64,
    /// Visits to each state over the whole run (index = state).
    pub visit_counts: Vec<u64>,
}

/// All replications of a discrete-time run.
#[derive(Debug, Clone, PartialEq)]
pub struct DtRun {
    pub trajectories: Vec<DtTrajectory>,
}

impl DtRun {
    /// Excursions across replications, in replication order.
    pub fn excursions(&self) -> impl Iterator<Item = &ExcursionSample> {
        self.trajectories.iter().flat_map(|t| t.excursions.iter())
    }
}

fn run_one(spec: &ModelSpec, steps: u64, mut rng: SimRng) -> DtTrajectory {
    use rand::Rng;
    let mut qc = QCache::new(spec);
    let mut x = 0u64;
    let mut visit_counts: Vec<u64> = vec![1]; // X_0 = 0 counts as a visit
    let mut excursions = Vec::new();
    let mut since_zero = 0u64;
    let mut height = 0u64;
    for _ in 0..steps {
        let q = qc.q(x);
        let u: f64 = rng.random();
        if u > q {
            x += 1;
            height = height.max(x);
            since_zero += 1;
        } else {
            excursions.push(ExcursionSample {
                height,
                dt_length: since_zero + 1,
                ct_length: None,
            });
            x = 0;
            since_zero = 0;
            height = 0;
        }
        if visit_counts.len() <= x as usize {
            visit_counts.resize(x as usize + 1, 0);
        }
        visit_counts[x as usize] += 1;
    }
    DtTrajectory {
        excursions,
        partial_excursion_steps: if since_zero > 0 { Some(since_zero) } else { None },
        steps,
        final_state: x,
        visit_counts,
    }
}

/// Simulate `config.replications` independent trajectories of
/// `config.horizon` steps each, one per RNG stream.
pub fn simulate_dt(spec: &ModelSpec, config: &RunConfig) -> DtRun {
    let steps = config.steps();
    let trajectories: Vec<DtTrajectory> = (0..config.replications as u64)
        .into_par_iter()
        .map(|rep| run_one(spec, steps, stream_rng(config.seed, rep)))
        .collect();
    DtRun { trajectories }
}

/// Exactly `count` completed excursions, drawn across parallel streams
/// (a fixed number of excursions per stream keeps the output independent
/// of scheduling).
pub fn sample_excursions_dt(spec: &ModelSpec, seed: u64, count: u64) -> Vec<ExcursionSample> {
    let chunk = 8192u64;
    let chunks = count.div_ceil(chunk);
    let mut nested: Vec<Vec<ExcursionSample>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c);
            let want = chunk.min(count - c * chunk);
            let mut out = Vec::with_capacity(want as usize);
            let mut qc = QCache::new(spec);
            let mut x = 0u64;
            let mut since_zero = 0u64;
            let mut height = 0u64;
            use rand::Rng;
            while out.len() < want as usize {
                let q = qc.q(x);
                let u: f64 = rng.random();
                if u > q {
                    x += 1;
                    height = height.max(x);
                    since_zero += 1;
                } else {
                    out.push(ExcursionSample {
                        height,
                        dt_length: since_zero + 1,
                        ct_length: None,
                    });
                    x = 0;
                    since_zero = 0;
                    height = 0;
                }
            }
            out
        })
        .collect();
    let mut out = Vec::with_capacity(count as usize);
    for v in nested.iter_mut() {
        out.append(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Horizon;
    use crate::model::ModelSpec;

    #[test]
    fn pure_reflection_first_step() {
        // p0 = 1: from 0 the first step is always to 1.
        let spec = ModelSpec::model_b(2.0, 1.0, 1.0).unwrap();
        let run = simulate_dt(&spec, &RunConfig::new(3).with_horizon(Horizon::Steps(10_000)));
        for e in run.excursions() {
            assert!(e.height >= 1, "no trivial excursions when q0 = 0");
            assert_eq!(e.dt_length, e.height + 1);
        }
    }

    #[test]
    fn excursion_length_is_height_plus_one() {
        let spec = ModelSpec::model_a(1.2, 1.0, 1.0, 0.6).unwrap();
        let run = simulate_dt(&spec, &RunConfig::new(9).with_horizon(Horizon::Steps(20_000)));
        for e in run.excursions() {
            assert_eq!(e.dt_length, e.height + 1);
        }
    }

    #[test]
    fn mean_return_time_against_closed_form() {
        // Model B critical, alpha = 2: mu = 1 + zeta(2), 3-sigma check.
        let spec = ModelSpec::model_b(2.0, 1.0, 1.0).unwrap();
        let ex = sample_excursions_dt(&spec, 12345, 200_000);
        let lens: Vec<f64> = ex.iter().map(|e| e.dt_length as f64).collect();
        let (mean, se) = crate::util::mean_and_stderr(&lens);
        let mu = 1.0 + std::f64::consts::PI.powi(2) / 6.0;
        assert!(
            (mean - mu).abs() <= 3.0 * se,
            "mean {mean} vs {mu} (se {se})"
        );
    }

    #[test]
    fn height_tail_matches_product() {
        // P(H >= 32) = prod_{y<32} p_y, exact tail oracle.
        let spec = ModelSpec::model_b(1.5, 1.0, 1.0).unwrap();
        let n = 400_000u64;
        let ex = sample_excursions_dt(&spec, 777, n);
        let hits = ex.iter().filter(|e| e.height >= 32).count() as f64;
        let phat = hits / n as f64;
        let mut want = 1.0f64;
        for y in 0..32 {
            want *= spec.growth_prob(y);
        }
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!(
            (phat - want).abs() <= 4.0 * se,
            "tail {phat} vs {want} (se {se})"
        );
    }
}
