//! Invariant measures of the discrete- and continuous-time chains,
//! existence/integrability criteria, stationary pgfs and moments.
//!
//! The formal invariant measure is `pi_x = pi_0 prod_{y<x} p_y`; it exists
//! iff `C1 = sum q_y` diverges and is normalizable iff
//! `C2 = sum_x prod_{y<x} p_y` converges. The continuous-time layer divides
//! the weights by the jump rates, moving the critical integrability index
//! from `alpha` to `alpha + lambda`.

use crate::error::{Error, Result};
use crate::model::{CumLogGrowth, ModelKind, ModelSpec, Recurrence};
use crate::special::{gauss_2f1, lgamma, polylog, zeta};
use crate::tails::power_tail_sum;
use crate::util::NeumaierSum;

/// Where the numbers in a [`PmfTable`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Simulated,
}

/// A truncated probability mass function.
///
/// `masses[i]` is the mass at state `support_start + i`. For a normalized
/// table the tabulated mass, the tail bound and the defect add up to 1
/// within 1e-9. `defect` is mass escaping to infinity (defective laws of
/// transient chains); `tail_mass_bound` covers finite states beyond the
/// truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    pub support_start: u64,
    pub masses: Vec<f64>,
    pub normalized: bool,
    pub tail_mass_bound: f64,
    pub defect: f64,
    pub provenance: Provenance,
}

impl PmfTable {
    /// Mass at absolute state `x` (zero outside the tabulated window).
    pub fn mass(&self, x: u64) -> f64 {
        if x < self.support_start {
            return 0.0;
        }
        self.masses.get((x - self.support_start) as usize).copied().unwrap_or(0.0)
    }

    /// Sum of the tabulated masses.
    pub fn total_tabulated(&self) -> f64 {
        crate::util::compensated_sum(self.masses.iter().copied())
    }

    /// Largest tabulated state.
    pub fn support_end(&self) -> u64 {
        self.support_start + self.masses.len() as u64 - 1
    }
}

/// Finiteness report for the existence (C1) and integrability (C2, CT
/// variant) series. A proper invariant probability law needs `C1`
/// divergent and `C2` finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionReport {
    pub c1_finite: bool,
    pub c2_finite: bool,
    pub c2_value: Option<f64>,
    pub ct_c2_finite: Option<bool>,
}

/// Decide finiteness of the criteria series from `(beta, alpha, lambda)`
/// and evaluate `C2` when finite (closed forms in the critical case,
/// truncated products below it).
pub fn criteria(spec: &ModelSpec) -> CriterionReport {
    let beta = spec.beta();
    let alpha = spec.alpha();
    let c1_finite = beta > 1.0;
    let c2_finite = beta < 1.0 || (beta == 1.0 && alpha > 1.0);
    let c2_value = if c2_finite { Some(c2_value(spec)) } else { None };
    let ct_c2_finite = spec.ct().map(|ct| {
        beta < 1.0 || (beta == 1.0 && alpha + ct.lambda > 1.0) || (beta > 1.0 && ct.lambda > 1.0)
    });
    CriterionReport { c1_finite, c2_finite, c2_value, ct_c2_finite }
}

/// `C2 = sum_{x>=1} prod_{y<x} p_y`, assumed finite.
pub(crate) fn c2_value(spec: &ModelSpec) -> f64 {
    let alpha = spec.alpha();
    if spec.beta() == 1.0 {
        // Critical case closed forms.
        return match spec.kind() {
            ModelKind::A => spec.p0() * spec.nu() / (alpha - 1.0),
            ModelKind::B => spec.p0() * zeta(alpha).expect("alpha > 1 in critical case"),
        };
    }
    // Stretched-exponential regime: direct product summation converges
    // quickly for all parameter ranges of practical size.
    let mut log_prod = spec.p0().ln();
    let mut acc = NeumaierSum::new();
    acc.add(spec.p0());
    let mut x = 1u64;
    const CAP: u64 = 4_000_000;
    while x < CAP {
        log_prod += spec.log_growth_prob(x);
        let term = log_prod.exp();
        acc.add(term);
        if term < 1e-18 * acc.value() {
            break;
        }
        x += 1;
    }
    acc.value()
}

/// Discrete-time invariant measure on `{0..xmax}`.
///
/// Positive recurrent: normalized with `pi_0 = 1/(1 + C2)`. Null
/// recurrent: un-normalized with `pi_0 = 1` (ratios stay well defined).
/// TransientChains have no non-trivial invariant measure.
pub fn invariant_dt(spec: &ModelSpec, xmax: u64) -> Result<PmfTable> {
    let xmax = xmax.max(1);
    let class = spec.classify();
    if class.recurrence == Recurrence::Transient {
        return Err(Error::NoInvariantMeasure(
            "transient chain (beta > 1) has no non-trivial invariant measure".into(),
        ));
    }
    let logs = CumLogGrowth::new(spec, xmax);
    // With a CT layer present classify() reports the CT phase; the DT
    // measure is normalizable iff the DT chain itself is positive
    // recurrent (beta < 1, or beta = 1 with alpha > 1).
    let dt_positive = spec.beta() < 1.0 || (spec.beta() == 1.0 && spec.alpha() > 1.0);
    if dt_positive {
        let pi0 = 1.0 / (1.0 + c2_value(spec));
        let masses: Vec<f64> = (0..=xmax).map(|x| pi0 * logs.product(x)).collect();
        let tail = dt_tail_mass(spec, &logs, xmax, pi0);
        Ok(PmfTable {
            support_start: 0,
            masses,
            normalized: true,
            tail_mass_bound: tail,
            defect: 0.0,
            provenance: Provenance::Analytic,
        })
    } else {
        let masses: Vec<f64> = (0..=xmax).map(|x| logs.product(x)).collect();
        Ok(PmfTable {
            support_start: 0,
            masses,
            normalized: false,
            tail_mass_bound: f64::INFINITY,
            defect: 0.0,
            provenance: Provenance::Analytic,
        })
    }
}

// Mass of the normalized DT measure beyond xmax.
fn dt_tail_mass(spec: &ModelSpec, logs: &CumLogGrowth, xmax: u64, pi0: f64) -> f64 {
    let alpha = spec.alpha();
    if spec.beta() == 1.0 {
        match spec.kind() {
            // Exact telescoping tail: sum_{x>X} G(nu+x-alpha)/G(nu+x) =
            // G(nu+X+1-alpha) / ((alpha-1) G(nu+X)).
            ModelKind::A => {
                let nu = spec.nu();
                if alpha == nu + 1.0 {
                    return 0.0; // p_1 = 0: no mass beyond state 1
                }
                let lg = lgamma(nu + 1.0) - lgamma(nu + 1.0 - alpha)
                    + lgamma(nu + xmax as f64 + 1.0 - alpha)
                    - lgamma(nu + xmax as f64);
                pi0 * spec.p0() * lg.exp() / (alpha - 1.0)
            }
            // pi_x = pi0 p0 x^-alpha: exact zeta tail.
            ModelKind::B => pi0 * spec.p0() * power_tail_sum(alpha, xmax),
        }
    } else {
        // Stretched-exponential regime: continue the product numerically.
        let mut log_prod = logs.log_product(xmax);
        let mut acc = NeumaierSum::new();
        let mut x = xmax;
        const CAP: u64 = 8_000_000;
        while x < CAP {
            log_prod += spec.log_growth_prob(x);
            let term = log_prod.exp();
            acc.add(term);
            if term < 1e-18 * (acc.value() + pi0) {
                break;
            }
            x += 1;
        }
        pi0 * acc.value()
    }
}

// Two-point power fit tail: assumes T_x ~ c x^-s (1 + d/x) with T known
// at X/2 and X, and returns sum_{x > X} of the fitted form.
fn power_fit_tail(t_half: f64, t_full: f64, xhalf: u64, xfull: u64, s: f64) -> f64 {
    if t_full == 0.0 {
        return 0.0;
    }
    let a1 = t_full * (xfull as f64).powf(s);
    let a2 = t_half * (xhalf as f64).powf(s);
    let c = 2.0 * a1 - a2;
    let cd = xfull as f64 * (a2 - a1);
    c * power_tail_sum(s, xfull) + cd * power_tail_sum(s + 1.0, xfull)
}

/// Continuous-time invariant measure `pi_x ∝ prod_{y<x} p_y / (x+1)^lambda`
/// on `{0..xmax}`; normalized iff the CT chain is positive recurrent.
pub fn invariant_ct(spec: &ModelSpec, xmax: u64) -> Result<PmfTable> {
    let ct = spec.ct().ok_or(Error::MissingCtLayer)?;
    if spec.classify().recurrence == Recurrence::Transient {
        return Err(Error::NoInvariantMeasure(
            "transient chain (beta > 1) has no non-trivial invariant measure".into(),
        ));
    }
    if ct.lambda == 0.0 {
        // Identical weights: reduces exactly to the DT measure.
        return invariant_dt(spec, xmax);
    }
    let xmax = xmax.max(1);
    let lambda = ct.lambda;
    let beta = spec.beta();
    let alpha = spec.alpha();
    let ct_positive = beta < 1.0 || (beta == 1.0 && alpha + lambda > 1.0);
    let weight_log = |logs: &CumLogGrowth, x: u64| {
        logs.log_product(x) - lambda * ((x + 1) as f64).ln()
    };
    if !ct_positive {
        let logs = CumLogGrowth::new(spec, xmax);
        let masses: Vec<f64> = (0..=xmax).map(|x| weight_log(&logs, x).exp()).collect();
        return Ok(PmfTable {
            support_start: 0,
            masses,
            normalized: false,
            tail_mass_bound: f64::INFINITY,
            defect: 0.0,
            provenance: Provenance::Analytic,
        });
    }
    // Normalizer: direct sum of weights to a large cutoff plus a fitted
    // power tail (exact exponent alpha + lambda in the critical case).
    let xbig = (4 * xmax).max(1_000_000);
    let logs = CumLogGrowth::new(spec, xbig);
    let mut acc = NeumaierSum::new();
    let mut truncated_at = xbig;
    for x in 0..=xbig {
        let term = weight_log(&logs, x).exp();
        acc.add(term);
        if term < 1e-19 * acc.value() {
            truncated_at = x;
            break;
        }
    }
    let mut norm = acc.value();
    if truncated_at == xbig && beta == 1.0 {
        let s = alpha + lambda;
        norm += power_fit_tail(
            weight_log(&logs, xbig / 2).exp(),
            weight_log(&logs, xbig).exp(),
            xbig / 2,
            xbig,
            s,
        );
    }
    let pi0 = 1.0 / norm;
    let masses: Vec<f64> = (0..=xmax).map(|x| pi0 * weight_log(&logs, x).exp()).collect();
    let tail = if beta == 1.0 {
        pi0 * power_fit_tail(
            weight_log(&logs, xmax / 2).exp(),
            weight_log(&logs, xmax).exp(),
            (xmax / 2).max(1),
            xmax,
            alpha + lambda,
        )
    } else {
        // Stretched exponential: sum the remaining weights directly.
        let mut t = NeumaierSum::new();
        for x in (xmax + 1)..=truncated_at {
            t.add(weight_log(&logs, x).exp());
        }
        pi0 * t.value()
    };
    Ok(PmfTable {
        support_start: 0,
        masses,
        normalized: true,
        tail_mass_bound: tail.max(0.0),
        defect: 0.0,
        provenance: Provenance::Analytic,
    })
}

/// Stationary pgf `E(z^{X_inf})` of the discrete-time chain in the
/// critical positive recurrent case (`beta = 1`, `alpha > 1`).
///
/// Model A: `pi_0 + (1-pi_0) (alpha-1) z / nu * 2F1(1, nu+1-alpha; nu+1; z)`.
/// Model B: `(1 + p0 Li_alpha(z)) / (1 + p0 zeta(alpha))`.
pub fn stationary_pgf(spec: &ModelSpec, z: f64) -> Result<f64> {
    if spec.beta() != 1.0 {
        return Err(Error::Undefined(
            "closed-form stationary pgf exists only in the critical case beta = 1".into(),
        ));
    }
    if spec.alpha() <= 1.0 {
        return Err(Error::Undefined(
            "stationary pgf requires positive recurrence (alpha > 1 at beta = 1)".into(),
        ));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("pgf argument must lie in [0,1], got {z}")));
    }
    if z == 1.0 {
        return Ok(1.0);
    }
    let alpha = spec.alpha();
    let pi0 = 1.0 / (1.0 + c2_value(spec));
    match spec.kind() {
        ModelKind::A => {
            let nu = spec.nu();
            let f = gauss_2f1(1.0, nu + 1.0 - alpha, nu + 1.0, z)?.value;
            let psi_inf = (alpha - 1.0) * z / nu * f;
            Ok(pi0 + (1.0 - pi0) * psi_inf)
        }
        ModelKind::B => {
            let li = polylog(alpha, z)?.value;
            Ok((1.0 + spec.p0() * li) / (1.0 + spec.p0() * zeta(alpha)?))
        }
    }
}

/// Moments of the Zipf stationary law: `E(Y_inf^q) = zeta(alpha-q)/zeta(alpha)`
/// for `0 <= q < alpha - 1`.
pub fn zipf_moment(alpha: f64, q: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("zipf_moment requires alpha > 1, got {alpha}")));
    }
    if !(0.0..alpha - 1.0).contains(&q) {
        return Err(Error::Domain(format!(
            "zipf_moment requires 0 <= q < alpha - 1, got q={q}"
        )));
    }
    Ok(zeta(alpha - q)? / zeta(alpha)?)
}
