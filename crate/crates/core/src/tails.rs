//! Tail sums of slowly decaying series by Euler-Maclaurin corrections and
//! asymptotic expansions of the transition probabilities.
//!
//! These kernels let the transient-case products `prod_{y>=x} p_y` and
//! disaster-probability tails `sum_{y>Y} q_y` be evaluated to near machine
//! precision without summing billions of terms.

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec};
use crate::util::NeumaierSum;

/// `sum_{y > n} y^{-s}` for `s > 1`, via Euler-Maclaurin at `a = n + 1`:
/// `f(a)/2 + int_a^inf f - f'(a)/12 + f'''(a)/720 - f^(5)(a)/30240`.
/// For `a >= 100` the truncation error is far below 1e-16 relative.
pub fn power_tail_sum(s: f64, n: u64) -> f64 {
    let a = (n + 1) as f64;
    let am = a.powf(-s);
    let integral = a * am / (s - 1.0);
    let em1 = 0.5 * am;
    let em2 = s * am / (12.0 * a);
    let em3 = -s * (s + 1.0) * (s + 2.0) * am / (720.0 * a * a * a);
    let em4 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * am / (30240.0 * a.powi(5));
    integral + em1 + em2 + em3 + em4
}

// Coefficients c_m of the expansion f(y) = sum_m c_m y^{-beta m} valid for
// large y, for f = ln p_y and f = q_y of either model.
fn log_growth_coeffs(spec: &ModelSpec, orders: usize) -> Vec<f64> {
    let alpha = spec.alpha();
    match spec.kind() {
        // ln p_y = -sum_k (alpha^k / k) (nu + y^beta)^-k expanded in t = y^-beta:
        // c_m = -sum_{k=1..m} (alpha^k/k) binom(m-1, k-1) (-nu)^{m-k}.
        ModelKind::A => {
            let nu = spec.nu();
            let mut coeffs = vec![0.0; orders + 1];
            for m in 1..=orders {
                let mut c = NeumaierSum::new();
                // binom(m-1, k-1) built incrementally over k.
                let mut binom = 1.0;
                let mut alpha_k = 1.0;
                for k in 1..=m {
                    alpha_k *= alpha;
                    let term = alpha_k / k as f64 * binom * (-nu).powi((m - k) as i32);
                    c.add(term);
                    binom *= (m - k) as f64 / k as f64; // binom(m-1,k) from binom(m-1,k-1)
                }
                coeffs[m] = -c.value();
            }
            coeffs
        }
        // ln p_y = -alpha ln(1 + y^-beta): c_m = alpha (-1)^m / m.
        ModelKind::B => (0..=orders)
            .map(|m| {
                if m == 0 {
                    0.0
                } else if m % 2 == 0 {
                    alpha / m as f64
                } else {
                    -alpha / m as f64
                }
            })
            .collect(),
    }
}

fn disaster_coeffs(spec: &ModelSpec, orders: usize) -> Vec<f64> {
    let alpha = spec.alpha();
    match spec.kind() {
        // q_y = alpha t/(1 + nu t): c_m = alpha (-nu)^{m-1}.
        ModelKind::A => {
            let nu = spec.nu();
            let mut coeffs = vec![0.0; orders + 1];
            let mut pw = alpha;
            for m in 1..=orders {
                coeffs[m] = pw;
                pw *= -nu;
            }
            coeffs
        }
        // q_y = 1 - (1+t)^-alpha: c_m = (-1)^{m+1} alpha (alpha+1)...(alpha+m-1)/m!.
        ModelKind::B => {
            let mut coeffs = vec![0.0; orders + 1];
            let mut mag = 1.0;
            for m in 1..=orders {
                mag *= (alpha + (m - 1) as f64) / m as f64;
                coeffs[m] = if m % 2 == 1 { mag } else { -mag };
            }
            coeffs
        }
    }
}

// sum_{y > from} f(y) where f(y) = sum_m c_m y^{-beta m}; requires
// beta > 1 so every retained order converges.
fn expansion_tail(coeffs: &[f64], beta: f64, from: u64) -> f64 {
    let mut acc = NeumaierSum::new();
    for (m, &c) in coeffs.iter().enumerate().skip(1) {
        if c == 0.0 {
            continue;
        }
        let term = c * power_tail_sum(beta * m as f64, from);
        acc.add(term);
        if term.abs() < 1e-40 {
            break;
        }
    }
    acc.value()
}

const DIRECT_TERMS: u64 = 200_000;
const EXPANSION_ORDERS: usize = 40;

/// `sum_{y >= from} ln p_y` for a transient spec (`beta > 1`). This is the
/// log of the never-collapse probability `P(tau_{from,0} = infinity)`.
pub fn log_growth_tail(spec: &ModelSpec, from: u64) -> Result<f64> {
    if spec.beta() <= 1.0 {
        return Err(Error::Divergent(
            "prod_{y>=x} p_y vanishes for beta <= 1 (recurrent chain)".into(),
        ));
    }
    let switch = from.max(DIRECT_TERMS);
    let mut acc = NeumaierSum::new();
    for y in from..=switch {
        acc.add(spec.log_growth_prob(y));
    }
    acc.add(expansion_tail(
        &log_growth_coeffs(spec, EXPANSION_ORDERS),
        spec.beta(),
        switch,
    ));
    Ok(acc.value())
}

/// `sum_{y > from} q_y` for `beta > 1` (the tail of the C1 series).
pub fn disaster_tail(spec: &ModelSpec, from: u64) -> Result<f64> {
    if spec.beta() <= 1.0 {
        return Err(Error::Divergent("sum q_y diverges for beta <= 1".into()));
    }
    let switch = from.max(DIRECT_TERMS);
    let mut acc = NeumaierSum::new();
    for y in (from + 1)..=switch {
        acc.add(spec.disaster_prob(y));
    }
    acc.add(expansion_tail(
        &disaster_coeffs(spec, EXPANSION_ORDERS),
        spec.beta(),
        switch,
    ));
    Ok(acc.value())
}
