//! Random number streams.
//!
//! ChaCha8 is a counter-based generator: the keystream is a function of
//! (key, stream, block counter), so a (seed, stream) pair names a
//! reproducible sequence independent of thread scheduling. Replication `i`
//! always draws from stream `i`; statistics aggregated over replications
//! are therefore bit-stable under any parallel schedule.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the simulators.
pub type SimRng = ChaCha8Rng;

/// RNG for one replication: seed selects the key, `stream` the ChaCha
/// stream counter.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on (0, 1]; never returns exactly 0 so logs stay finite.
#[inline]
pub fn uniform_pos(rng: &mut SimRng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Exponential draw with the given rate.
#[inline]
pub fn exp_draw(rng: &mut SimRng, rate: f64) -> f64 {
    -uniform_pos(rng).ln() / rate
}

/// Geometric draw on {0, 1, ...} with failure probability `q`:
/// `P(K = k) = (1-q) q^k`.
#[inline]
pub fn geometric_draw(rng: &mut SimRng, q: f64) -> u64 {
    if q <= 0.0 {
        return 0;
    }
    (uniform_pos(rng).ln() / q.ln()) as u64
}

/// Poisson draw by exponential waiting times (suited to modest means).
pub fn poisson_draw(rng: &mut SimRng, mean: f64) -> u64 {
    let limit = (-mean).exp();
    let mut k = 0u64;
    let mut prod = uniform_pos(rng);
    while prod > limit {
        k += 1;
        prod *= uniform_pos(rng);
    }
    k
}

/// Binomial draw by Bernoulli trials (small n only).
pub fn binomial_draw(rng: &mut SimRng, n: u64, p: f64) -> u64 {
    let mut k = 0;
    for _ in 0..n {
        if rng.random::<f64>() < p {
            k += 1;
        }
    }
    k
}

/// Standard normal draw (Box-Muller, one value per call).
pub fn normal_draw(rng: &mut SimRng) -> f64 {
    let u1 = uniform_pos(rng);
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Draw from a finite pmf over values `1..=len` by inverse cdf.
pub fn categorical_from_one(rng: &mut SimRng, pmf: &[f64]) -> u64 {
    let mut u = rng.random::<f64>();
    for (i, &m) in pmf.iter().enumerate() {
        if u < m {
            return i as u64 + 1;
        }
        u -= m;
    }
    pmf.len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let mut a = stream_rng(5, 0);
        let mut b = stream_rng(5, 1);
        let mut a2 = stream_rng(5, 0);
        let xs: Vec<f64> = (0..8).map(|_| a.random::<f64>()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.random::<f64>()).collect();
        let xs2: Vec<f64> = (0..8).map(|_| a2.random::<f64>()).collect();
        assert_eq!(xs, xs2);
        assert_ne!(xs, ys);
    }

    #[test]
    fn samplers_have_right_means() {
        let mut rng = stream_rng(11, 0);
        let n = 200_000;
        let mut acc = [0.0f64; 3];
        for _ in 0..n {
            acc[0] += exp_draw(&mut rng, 2.0);
            acc[1] += geometric_draw(&mut rng, 0.3) as f64;
            acc[2] += poisson_draw(&mut rng, 2.5) as f64;
        }
        assert!((acc[0] / n as f64 - 0.5).abs() < 0.01);
        assert!((acc[1] / n as f64 - 0.3 / 0.7).abs() < 0.01);
        assert!((acc[2] / n as f64 - 2.5).abs() < 0.02);
    }
}
