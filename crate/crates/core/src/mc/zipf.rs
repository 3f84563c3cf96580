//! Zipf samplers: the Euler-product representation over primes with
//! independent geometric exponents, and a plain inverse-cdf sampler used
//! as its cross-check on the smooth-number event.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::zeta;

use super::rng::{geometric_draw, stream_rng, uniform_pos};
use super::RunConfig;

fn primes_up_to(n: u64) -> Vec<u64> {
    let mut sieve = vec![true; (n + 1) as usize];
    let mut out = Vec::new();
    for p in 2..=n {
        if sieve[p as usize] {
            out.push(p);
            let mut m = p * p;
            while m <= n {
                sieve[m as usize] = false;
                m += p;
            }
        }
    }
    out
}

/// Samples of `Y = prod_p p^{G(p^-alpha)}` over the primes `p <= p_max`.
/// This is the Zipf(alpha-1) stationary variable conditioned on being
/// p_max-smooth; the conditioning probability is reported.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfPrimeSamples {
    pub samples: Vec<u64>,
    pub p_max: u64,
    /// `prod_{p > p_max} (1 - p^-alpha)`, the probability that an
    /// unconditioned draw is p_max-smooth (computed over primes up to 1e6;
    /// the neglected remainder is below the power tail past 1e6).
    pub conditioning_probability: f64,
    /// Draws whose product overflowed u64 (recorded, saturated to MAX).
    pub overflows: u64,
}

/// Euler-product sampler: independent `Geometric(p^-alpha)` exponents per
/// prime.
pub fn zipf_prime_sampler(
    alpha: f64,
    config: &RunConfig,
    p_max: u64,
) -> Result<ZipfPrimeSamples> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!(
            "the prime-product sampler needs alpha > 1, got {alpha}"
        )));
    }
    let primes = primes_up_to(p_max.max(2));
    let qs: Vec<f64> = primes.iter().map(|&p| (p as f64).powf(-alpha)).collect();
    let n = config.steps().max(1);
    let chunk = 8192u64;
    let chunks = n.div_ceil(chunk);
    let nested: Vec<(Vec<u64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(config.seed, c);
            let want = chunk.min(n - c * chunk) as usize;
            let mut out = Vec::with_capacity(want);
            let mut overflows = 0u64;
            for _ in 0..want {
                let mut y: u64 = 1;
                let mut overflowed = false;
                for (&p, &q) in primes.iter().zip(&qs) {
                    let g = geometric_draw(&mut rng, q);
                    for _ in 0..g {
                        match y.checked_mul(p) {
                            Some(v) => y = v,
                            None => {
                                overflowed = true;
                                y = u64::MAX;
                                break;
                            }
                        }
                    }
                    if overflowed {
                        break;
                    }
                }
                if overflowed {
                    overflows += 1;
                }
                out.push(y);
            }
            (out, overflows)
        })
        .collect();
    let mut samples = Vec::with_capacity(n as usize);
    let mut overflows = 0;
    for (v, o) in nested {
        samples.extend(v);
        overflows += o;
    }
    // Conditioning probability over the remaining primes.
    let mut log_cond = 0.0f64;
    for p in primes_up_to(1_000_000).into_iter().filter(|&p| p > p_max) {
        log_cond += f64::ln_1p(-(p as f64).powf(-alpha));
    }
    Ok(ZipfPrimeSamples {
        samples,
        p_max,
        conditioning_probability: log_cond.exp(),
        overflows,
    })
}

/// Inverse-cdf sampler of the Zipf law `P(Y = x) = x^-alpha / zeta(alpha)`
/// on `{1, 2, ...}` (tabulated cdf with an exact zeta normalizer; the far
/// tail beyond the table is resolved by restarting, which biases events of
/// probability below the table tail mass ~ 1e-10 at the default size).
pub fn zipf_inverse_sampler(alpha: f64, config: &RunConfig) -> Result<Vec<u64>> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!(
            "the Zipf law needs alpha > 1, got {alpha}"
        )));
    }
    let z = zeta(alpha)?;
    let table_len = 4_000_000usize;
    let mut cdf = Vec::with_capacity(table_len);
    let mut acc = 0.0f64;
    for x in 1..=table_len as u64 {
        acc += (x as f64).powf(-alpha) / z;
        cdf.push(acc);
    }
    let n = config.steps().max(1);
    let chunk = 8192u64;
    let chunks = n.div_ceil(chunk);
    let nested: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(config.seed, c);
            let want = chunk.min(n - c * chunk) as usize;
            let mut out = Vec::with_capacity(want);
            while out.len() < want {
                let u = uniform_pos(&mut rng);
                if u > *cdf.last().unwrap() {
                    continue; // beyond the table: redraw
                }
                let idx = cdf.partition_point(|&p| p < u);
                out.push(idx as u64 + 1);
            }
            out
        })
        .collect();
    Ok(nested.into_iter().flatten().collect())
}
