//! Generators of the two limit-law constructions: compound-Poisson decay
//! balanced by immigration (infinitely divisible limit) and pure-death
//! branching with immigration (self-decomposable limit), with their
//! analytic limiting pgfs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

use super::rng::{binomial_draw, categorical_from_one, poisson_draw, stream_rng};
use super::RunConfig;

/// Empirical pmf over {0, 1, ...} accumulated from replications.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPmf {
    pub counts: Vec<u64>,
    pub n: u64,
}

impl EmpiricalPmf {
    fn from_values(values: impl IntoIterator<Item = u64>, n: u64) -> Self {
        let mut counts = Vec::new();
        for v in values {
            let vi = v as usize;
            if counts.len() <= vi {
                counts.resize(vi + 1, 0);
            }
            counts[vi] += 1;
        }
        EmpiricalPmf { counts, n }
    }

    /// Empirical pgf `mean(z^X)` with its standard error.
    pub fn pgf_at(&self, z: f64) -> (f64, f64) {
        let n = self.n as f64;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (k, &c) in self.counts.iter().enumerate() {
            let zk = z.powi(k as i32);
            m1 += c as f64 * zk;
            m2 += c as f64 * zk * zk;
        }
        m1 /= n;
        m2 /= n;
        let var = (m2 - m1 * m1).max(0.0);
        (m1, (var / n).sqrt())
    }

    pub fn mass(&self, k: usize) -> f64 {
        self.counts.get(k).copied().unwrap_or(0) as f64 / self.n as f64
    }
}

fn check_jump_pmf(jump_pmf: &[f64]) -> Result<()> {
    if jump_pmf.is_empty() || jump_pmf.iter().any(|&p| p < 0.0) {
        return Err(Error::Domain("jump pmf must be non-empty and non-negative".into()));
    }
    let total: f64 = jump_pmf.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("jump pmf must sum to 1, got {total}")));
    }
    Ok(())
}

// h(z) = sum_i jump_pmf[i] z^{i+1} (jumps are positive).
fn jump_pgf(jump_pmf: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    let mut zp = 1.0;
    for &p in jump_pmf {
        zp *= z;
        acc += p * zp;
    }
    acc
}

/// Compound-Poisson construction: `X_t = sum_{k<=P(R_t)} Delta_k` with
/// intensity `R_t = r (1 - e^{-t})`; for `t >> 1` the law is the ID limit
/// with pgf `exp(-r (1 - h(z)))`.
pub fn limit_law_id_generator(
    r: f64,
    jump_pmf: &[f64],
    t: f64,
    config: &RunConfig,
) -> Result<EmpiricalPmf> {
    check_jump_pmf(jump_pmf)?;
    if !(r > 0.0) || !(t > 0.0) {
        return Err(Error::Domain("need r > 0 and t > 0".into()));
    }
    let intensity = r * (-f64::exp_m1(-t));
    let n = config.replications.max(1) as u64;
    let chunk = 8192u64;
    let chunks = n.div_ceil(chunk);
    let values: Vec<u64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(config.seed, c);
            let want = chunk.min(n - c * chunk);
            (0..want)
                .map(|_| {
                    let k = poisson_draw(&mut rng, intensity);
                    (0..k).map(|_| categorical_from_one(&mut rng, jump_pmf)).sum()
                })
                .collect::<Vec<u64>>()
        })
        .collect();
    Ok(EmpiricalPmf::from_values(values, n))
}

/// Pure-death branching with immigration: batches of sizes drawn from the
/// jump law immigrate at Poisson(rt) times, each individual carrying an
/// Exp(1) lifetime. For `t >> 1` the population size follows the SD limit
/// law with pgf `exp(-r int_z^1 (1-h(w))/(1-w) dw)`.
pub fn limit_law_sd_generator(
    r: f64,
    jump_pmf: &[f64],
    t: f64,
    config: &RunConfig,
) -> Result<EmpiricalPmf> {
    check_jump_pmf(jump_pmf)?;
    if !(r > 0.0) || !(t > 0.0) {
        return Err(Error::Domain("need r > 0 and t > 0".into()));
    }
    let n = config.replications.max(1) as u64;
    let chunk = 8192u64;
    let chunks = n.div_ceil(chunk);
    let values: Vec<u64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(config.seed, c);
            let want = chunk.min(n - c * chunk);
            (0..want)
                .map(|_| {
                    use rand::Rng;
                    let k = poisson_draw(&mut rng, r * t);
                    let mut alive = 0u64;
                    for _ in 0..k {
                        let arrival: f64 = rng.random::<f64>() * t;
                        let batch = categorical_from_one(&mut rng, jump_pmf);
                        let survive_p = (-(t - arrival)).exp();
                        alive += binomial_draw(&mut rng, batch, survive_p);
                    }
                    alive
                })
                .collect::<Vec<u64>>()
        })
        .collect();
    Ok(EmpiricalPmf::from_values(values, n))
}

/// Analytic ID limit pgf `exp(-r (1 - h(z)))`.
pub fn id_limit_pgf(r: f64, jump_pmf: &[f64], z: f64) -> Result<f64> {
    check_jump_pmf(jump_pmf)?;
    Ok((-r * (1.0 - jump_pgf(jump_pmf, z))).exp())
}

/// Analytic SD limit pgf `exp(-r int_z^1 (1-h(w))/(1-w) dw)`, with the
/// integral evaluated by adaptive quadrature (removable singularity at
/// w = 1 handled by its limit `h'(1)`).
pub fn sd_limit_pgf(r: f64, jump_pmf: &[f64], z: f64) -> Result<f64> {
    check_jump_pmf(jump_pmf)?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("pgf argument must lie in [0,1], got {z}")));
    }
    if z == 1.0 {
        return Ok(1.0);
    }
    let mean_jump: f64 = jump_pmf
        .iter()
        .enumerate()
        .map(|(i, &p)| (i + 1) as f64 * p)
        .sum();
    let integrand = |w: f64| {
        if (1.0 - w).abs() < 1e-12 {
            mean_jump
        } else {
            (1.0 - jump_pgf(jump_pmf, w)) / (1.0 - w)
        }
    };
    let integral = adaptive_simpson(&integrand, z, 1.0, 1e-12);
    Ok((-r * integral).exp())
}
