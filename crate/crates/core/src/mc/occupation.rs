//! Occupation statistics of recurrent chains: visit-count ratios against
//! the invariant measure (ratio ergodic theorem) and per-excursion visit
//! counts.

use crate::error::{Error, Result};
use crate::model::ModelSpec;

use super::{simulate_dt, RunConfig};

/// Visit statistics over a long run.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationStats {
    pub steps: u64,
    /// Total visits per state (index = state).
    pub visit_counts: Vec<u64>,
    /// Completed excursions in the run.
    pub excursions: u64,
    /// Per-excursion mean visits to each requested state, with standard
    /// errors: estimates of `E(N_{0,x}) = prod_{y<x} p_y`.
    pub per_excursion: Vec<(u64, f64, f64)>,
}

impl OccupationStats {
    /// Visit-frequency ratio estimate of `pi_y / pi_x`.
    pub fn visit_ratio(&self, y: u64, x: u64) -> f64 {
        let vy = self.visit_counts.get(y as usize).copied().unwrap_or(0);
        let vx = self.visit_counts.get(x as usize).copied().unwrap_or(0);
        vy as f64 / vx as f64
    }
}

/// Run the chain and gather occupation statistics (recurrent specs only).
pub fn occupation_and_recurrence_stats(
    spec: &ModelSpec,
    config: &RunConfig,
    states: &[u64],
) -> Result<OccupationStats> {
    if !spec.is_recurrent() {
        return Err(Error::Undefined(
            "occupation ratios apply to recurrent chains".into(),
        ));
    }
    let run = simulate_dt(spec, config);
    let mut visit_counts: Vec<u64> = Vec::new();
    let mut excursions = 0u64;
    for t in &run.trajectories {
        excursions += t.excursions.len() as u64;
        if t.visit_counts.len() > visit_counts.len() {
            visit_counts.resize(t.visit_counts.len(), 0);
        }
        for (s, &c) in t.visit_counts.iter().enumerate() {
            visit_counts[s] += c;
        }
    }
    // Per-excursion visits to state x: an excursion of height h visits
    // every state 1..=h exactly once (and state 0 exactly once, at its
    // start). Count over completed excursions.
    let mut per_excursion = Vec::with_capacity(states.len());
    for &s in states {
        let mut hits = 0u64;
        for t in &run.trajectories {
            for e in &t.excursions {
                if s == 0 || e.height >= s {
                    hits += 1;
                }
            }
        }
        let n = excursions as f64;
        let p = hits as f64 / n;
        // visits are 0/1 per excursion for s >= 1 (skip-free up moves).
        let se = (p * (1.0 - p) / n).sqrt();
        per_excursion.push((s, p, se));
    }
    Ok(OccupationStats {
        steps: run.trajectories.iter().map(|t| t.steps).sum(),
        visit_counts,
        excursions,
        per_excursion,
    })
}
