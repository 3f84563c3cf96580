//! Infinite-divisibility and discrete self-decomposability diagnostics:
//! canonical-sequence extraction, ID/SD classification, complete
//! monotonicity, binomial-thinning decompositions and the closed-form
//! thinned-Sibuya special case.
//!
//! The canonical sequence `r_x` of a law `pi` on {0,1,...} with pgf `phi`
//! is defined by `R(z) = (log phi(z))'`; the two sequences satisfy the
//! convolution identity `(x+1) pi_{x+1} = sum_{y<=x} pi_y r_{x-y}` (in
//! particular `r_0 = pi_1/pi_0`). Non-negativity of `r` is equivalent to
//! infinite divisibility, monotone non-increase to self-decomposability.

use crate::error::{Error, Result};
use crate::series::PowerSeries;
use crate::stationary::{PmfTable, Provenance};

/// Canonical sequence of a pmf, with the table it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSequence {
    pub r: Vec<f64>,
    pub derived_from: PmfTable,
}

impl CanonicalSequence {
    /// Rebuild the pmf from the canonical sequence through the same
    /// convolution identity (round-trip check).
    pub fn reconvolve(&self) -> Vec<f64> {
        let n = self.r.len();
        let mut pi = vec![0.0; n + 1];
        pi[0] = self.derived_from.mass(0);
        for x in 0..n {
            let mut acc = 0.0;
            for y in 0..=x {
                acc += pi[y] * self.r[x - y];
            }
            pi[x + 1] = acc / (x + 1) as f64;
        }
        pi
    }
}

/// Solve the convolution identity for `r_0..r_{n-1}`. Requires a pmf
/// supported from 0 with `pi_0 > 0` (a law with no mass at 0 cannot be
/// compound Poisson).
pub fn canonical_sequence(pmf: &PmfTable, n: usize) -> Result<CanonicalSequence> {
    if pmf.support_start != 0 {
        return Err(Error::NotApplicable(
            "canonical sequence needs support starting at 0".into(),
        ));
    }
    let pi0 = pmf.mass(0);
    if pi0 <= 0.0 {
        return Err(Error::NotApplicable(
            "a law with probability mass 0 at the origin cannot be infinitely divisible".into(),
        ));
    }
    if pmf.masses.len() < n + 1 {
        return Err(Error::Domain(format!(
            "need masses up to index {n}, table has {}",
            pmf.masses.len()
        )));
    }
    let mut r = vec![0.0; n];
    for x in 0..n {
        let mut acc = (x + 1) as f64 * pmf.mass(x as u64 + 1);
        for y in 1..=x {
            acc -= pmf.mass(y as u64) * r[x - y];
        }
        r[x] = acc / pi0;
    }
    Ok(CanonicalSequence { r, derived_from: pmf.clone() })
}

/// ID/SD verdict with the margins that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisibilityVerdict {
    pub id: bool,
    pub sd: bool,
    /// Index of the first violated constraint: the first negative `r_x`
    /// when `id` fails, else the first increase when `sd` fails.
    pub first_violation_index: Option<usize>,
    pub tolerance_used: f64,
    /// Smallest `r_x` (distance of the ID test from its boundary).
    pub min_r: f64,
    /// Largest increase `r_{x+1} - r_x` (distance of the SD test from its
    /// boundary). Verdicts with margins inside the tolerance are boundary
    /// cases decided by the sign convention, not by the data.
    pub max_increase: f64,
}

/// Classify infinite divisibility (`r_x >= -tol`) and discrete
/// self-decomposability (additionally `r_{x+1} <= r_x + tol`) from the
/// first `n` canonical terms. `tol = None` uses `1e-9 * max(1, max|r|)`.
pub fn classify_divisibility(
    pmf: &PmfTable,
    n: usize,
    tol: Option<f64>,
) -> Result<DivisibilityVerdict> {
    let canon = canonical_sequence(pmf, n)?;
    let r = &canon.r;
    let max_abs = r.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tolerance_used = tol.unwrap_or(1e-9 * max_abs.max(1.0));
    let mut id = true;
    let mut first_violation_index = None;
    let mut min_r = f64::INFINITY;
    for (x, &v) in r.iter().enumerate() {
        min_r = min_r.min(v);
        if v < -tolerance_used && id {
            id = false;
            first_violation_index = Some(x);
        }
    }
    let mut sd = id;
    let mut max_increase = f64::NEG_INFINITY;
    for x in 0..r.len().saturating_sub(1) {
        let inc = r[x + 1] - r[x];
        max_increase = max_increase.max(inc);
        if sd && inc > tolerance_used {
            sd = false;
            if first_violation_index.is_none() {
                first_violation_index = Some(x + 1);
            }
        }
    }
    Ok(DivisibilityVerdict {
        id,
        sd,
        first_violation_index,
        tolerance_used,
        min_r,
        max_increase,
    })
}

/// Result of the alternating-finite-difference complete monotonicity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompleteMonotonicityReport {
    pub passes: bool,
    /// `(order, index)` of the first sign violation.
    pub first_violation: Option<(usize, usize)>,
}

const CM_TOL: f64 = 1e-12;

/// Check `(-1)^k Delta^k F(x) >= 0` for `k <= kmax` over the available
/// range of a tabulated non-increasing tail sequence, with tolerance
/// 1e-12 per difference.
pub fn complete_monotonicity_check(tail: &[f64], kmax: usize) -> CompleteMonotonicityReport {
    let mut diff: Vec<f64> = tail.to_vec();
    for k in 0..=kmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (x, &d) in diff.iter().enumerate() {
            if sign * d < -CM_TOL {
                return CompleteMonotonicityReport {
                    passes: false,
                    first_violation: Some((k, x)),
                };
            }
        }
        // next difference order
        for x in 0..diff.len().saturating_sub(1) {
            diff[x] = diff[x + 1] - diff[x];
        }
        diff.pop();
        if diff.is_empty() {
            break;
        }
    }
    CompleteMonotonicityReport { passes: true, first_violation: None }
}

/// Coefficients of the thinning remainder `phi(z) / phi(1 - u(1-z))` to
/// order `n`. All coefficients non-negative (within roundoff) iff the
/// self-decomposition at this thinning level is a valid pgf.
pub fn thinning_remainder(pmf: &PmfTable, u: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0 < u && u < 1.0) {
        return Err(Error::Domain(format!("thinning level must be in (0,1), got {u}")));
    }
    if pmf.support_start != 0 || pmf.mass(0) <= 0.0 {
        return Err(Error::NotApplicable(
            "thinning decomposition needs a law charging the origin".into(),
        ));
    }
    let phi = PowerSeries::new(pmf.masses.clone(), "pgf, radius >= 1");
    let inner = phi.affine_compose(1.0 - u, u, n);
    Ok(phi.div(&inner, n).coeffs)
}

/// The closed-form stationary law of the critical Model A chain at
/// `nu = 1`, `alpha in (1,2)`: a thinned Sibuya law with pgf
/// `1 - (1-pi0)(1-z)^{alpha-1}`, together with the exact ID/SD thresholds
/// in `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SibuyaSpecialCase {
    pub alpha: f64,
    pub p0: f64,
    pub pi0: f64,
    /// `p0 <= 2 - alpha`.
    pub id: bool,
    /// `p0 <= 1 - alpha/2`.
    pub sd: bool,
}

impl SibuyaSpecialCase {
    /// The stationary pgf `1 - (1-pi0)(1-z)^{alpha-1}`.
    pub fn pgf(&self, z: f64) -> f64 {
        1.0 - (1.0 - self.pi0) * (1.0 - z).powf(self.alpha - 1.0)
    }

    /// Closed-form pmf table on `{0..n}` with the exact Sibuya survival
    /// tail `prod_{j<=n} (1 - (alpha-1)/j)`.
    pub fn pmf_table(&self, n: usize) -> PmfTable {
        let a = self.alpha - 1.0; // Sibuya index of X | X >= 1
        let c = 1.0 - self.pi0;
        let mut masses = Vec::with_capacity(n + 1);
        masses.push(self.pi0);
        let mut s = a; // s_1
        let mut survival = 1.0f64;
        for x in 1..=n {
            masses.push(c * s);
            survival *= 1.0 - a / x as f64;
            s *= (x as f64 - a) / (x as f64 + 1.0);
        }
        PmfTable {
            support_start: 0,
            masses,
            normalized: true,
            tail_mass_bound: c * survival,
            defect: 0.0,
            provenance: Provenance::Analytic,
        }
    }
}

/// Thresholds of the `nu = 1` example: `X_inf` is ID iff `p0 <= 2-alpha`
/// and discrete-SD iff `p0 <= 1 - alpha/2`.
pub fn sibuya_stationary_special_case(alpha: f64, p0: f64) -> Result<SibuyaSpecialCase> {
    if !(1.0 < alpha && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "the closed-form special case needs alpha in (1,2), got {alpha}"
        )));
    }
    if !(0.0 < p0 && p0 <= 1.0) {
        return Err(Error::Domain(format!("p0 must lie in (0,1], got {p0}")));
    }
    let pi0 = 1.0 - p0 / (alpha - 1.0 + p0);
    Ok(SibuyaSpecialCase {
        alpha,
        p0,
        pi0,
        id: p0 <= 2.0 - alpha,
        sd: p0 <= 1.0 - alpha / 2.0,
    })
}
