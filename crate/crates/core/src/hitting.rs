//! First-passage machinery: return-time law and pgf, scale function,
//! excursion heights, extinction probabilities, Green kernels, first-return
//! pgfs at arbitrary states and the contact-probability sequence with its
//! three critical-case regimes.
//!
//! Everything rests on the product `prod_{y<x} p_y`, which is
//! simultaneously `P(tau_00 > x)`, the excursion-height survival
//! `P(H >= x)`, the reciprocal scale function and `pi_x / pi_0`. Products
//! are accumulated in log space; in the stretched-exponential regime they
//! underflow linear f64 arithmetic near x ~ 1e4.

use crate::error::{Error, Result};
use crate::model::{CumLogGrowth, ModelKind, ModelSpec};
use crate::series::PowerSeries;
use crate::special::{gamma, gauss_2f1, polylog, DEFAULT_TOL, MAX_TERMS};
use crate::stationary::{c2_value, PmfTable, Provenance};
use crate::tails::log_growth_tail;
use crate::util::NeumaierSum;

/// Law of the first return time to the origin, `P(tau_00 = k)` for
/// `k = 1..=xmax+1` (`support_start = 1`). Transient chains yield a
/// defective law; the defect `P(tau_00 = infinity)` is reported.
pub fn return_time_pmf(spec: &ModelSpec, xmax: u64) -> PmfTable {
    let logs = CumLogGrowth::new(spec, xmax + 1);
    let masses: Vec<f64> = (0..=xmax)
        .map(|x| spec.disaster_prob(x) * logs.product(x))
        .collect();
    let defect = if spec.beta() > 1.0 {
        log_growth_tail(spec, 0).map(f64::exp).unwrap_or(0.0)
    } else {
        0.0
    };
    let tail = (logs.product(xmax + 1) - defect).max(0.0);
    PmfTable {
        support_start: 1,
        masses,
        normalized: defect == 0.0,
        tail_mass_bound: tail,
        defect,
        provenance: Provenance::Analytic,
    }
}

/// Value of the return-time pgf together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnTimePgf {
    pub value: f64,
    /// True when the critical-case closed form was used; false for the
    /// truncated-series fallback (`beta != 1`).
    pub closed_form: bool,
    pub tail_bound: f64,
}

/// `psi_0(z) = sum_{x>=1} q_x z^x prod_{y=1}^{x-1} p_y`, the pgf of the
/// height of a true excursion, in the critical case `beta = 1`.
///
/// Model A: extended Sibuya pgf `alpha z/(nu+1) 2F1(1, nu+1-alpha; nu+2; z)`.
/// Model B: discrete Pareto pgf `1 - (1-z) Li_alpha(z) / z`.
pub fn psi0_critical(spec: &ModelSpec, z: f64) -> Result<f64> {
    if spec.beta() != 1.0 {
        return Err(Error::Undefined("psi_0 closed form needs beta = 1".into()));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("pgf argument must lie in [0,1], got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == 1.0 {
        return Ok(1.0); // recurrent at beta = 1
    }
    let alpha = spec.alpha();
    match spec.kind() {
        ModelKind::A => {
            let nu = spec.nu();
            let f = gauss_2f1(1.0, nu + 1.0 - alpha, nu + 2.0, z)?.value;
            Ok(alpha * z / (nu + 1.0) * f)
        }
        ModelKind::B => {
            let li = polylog(alpha, z)?.value;
            Ok(1.0 - (1.0 - z) * li / z)
        }
    }
}

/// Pgf of `tau_00`. In the critical case this is the closed form
/// `z (q_0 + p_0 psi_0(z))`; off the critical line it falls back to a
/// truncated series with a geometric tail bound (flagged `closed_form =
/// false`).
pub fn return_time_pgf(spec: &ModelSpec, z: f64) -> Result<ReturnTimePgf> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("pgf argument must lie in [0,1], got {z}")));
    }
    if spec.beta() == 1.0 {
        let psi0 = psi0_critical(spec, z)?;
        return Ok(ReturnTimePgf {
            value: z * (spec.q0() + spec.p0() * psi0),
            closed_form: true,
            tail_bound: 0.0,
        });
    }
    if z == 1.0 {
        // phi_00(1) = P(tau_00 < infinity).
        let value = if spec.beta() < 1.0 {
            1.0
        } else {
            1.0 - log_growth_tail(spec, 0)?.exp()
        };
        return Ok(ReturnTimePgf { value, closed_form: false, tail_bound: 0.0 });
    }
    // sum_x q_x z^{x+1} prod_{y<x} p_y; the term ratio is below z.
    let mut acc = NeumaierSum::new();
    let mut log_prod = 0.0f64;
    let mut zx = z;
    for x in 0..MAX_TERMS as u64 {
        let term = spec.disaster_prob(x) * zx * log_prod.exp();
        acc.add(term);
        let bound = term * z / (1.0 - z);
        if bound <= DEFAULT_TOL || term == 0.0 {
            return Ok(ReturnTimePgf {
                value: acc.value(),
                closed_form: false,
                tail_bound: bound,
            });
        }
        log_prod += spec.log_growth_prob(x);
        zx *= z;
    }
    Err(Error::Divergent("return-time pgf series did not converge".into()))
}

/// Mean return time to the origin: `+inf` unless positive recurrent, the
/// closed form `1 + C2` otherwise.
pub fn mean_return_time(spec: &ModelSpec) -> f64 {
    let dt_positive = spec.beta() < 1.0 || (spec.beta() == 1.0 && spec.alpha() > 1.0);
    if dt_positive {
        1.0 + c2_value(spec)
    } else {
        f64::INFINITY
    }
}

/// Extended Sibuya(alpha, nu) pmf on `{1, 2, ...}` via the stable ratio
/// recurrence `s_{x+1}/s_x = (nu - alpha + x)/(nu + x + 1)`,
/// `s_1 = alpha/(nu+1)`.
pub fn sibuya_pmf(alpha: f64, nu: f64, x: u64) -> Result<f64> {
    if !(nu > -1.0) || !(alpha > 0.0 && alpha <= nu + 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sibuya pmf requires nu > -1 and 0 < alpha <= nu + 1, got alpha={alpha}, nu={nu}"
        )));
    }
    if x == 0 {
        return Err(Error::Domain("sibuya law is supported on x >= 1".into()));
    }
    let mut s = alpha / (nu + 1.0);
    for y in 1..x {
        s *= (nu - alpha + y as f64) / (nu + y as f64 + 1.0);
    }
    Ok(s)
}

/// Discrete Pareto(alpha) pmf on `{1, 2, ...}` by tail differencing:
/// `P(P > x) = (x+1)^-alpha`.
pub fn pareto_pmf(alpha: f64, x: u64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pareto pmf requires alpha > 0, got {alpha}"
        )));
    }
    if x == 0 {
        return Err(Error::Domain("pareto law is supported on x >= 1".into()));
    }
    // x^-alpha - (x+1)^-alpha, stable for large x.
    let xf = x as f64;
    Ok(xf.powf(-alpha) * (-f64::exp_m1(-alpha * f64::ln_1p(1.0 / xf))))
}

/// Scale (harmonic) function: `phi(0) = 0`,
/// `phi(x) = 1 / prod_{y=0}^{x-1} p_y`, computed in log space.
pub fn scale_function(spec: &ModelSpec, x: u64) -> f64 {
    if x == 0 {
        return 0.0;
    }
    let mut acc = NeumaierSum::new();
    for y in 0..x {
        acc.add(spec.log_growth_prob(y));
    }
    (-acc.value()).exp()
}

/// Law of the excursion height `H`: an atom `q_0` at zero plus masses on
/// `h >= 1` evaluated from the scale function,
/// `P(H=h) = p_0 (phi(1)/phi(h)) (1 - phi(h)/phi(h+1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightLaw {
    pub atom_at_zero: f64,
    pub masses: PmfTable,
    log_survival: Vec<f64>,
}

impl HeightLaw {
    /// `P(H >= h)` for `h >= 1` (exactly `1/phi(h)` by telescoping).
    pub fn survival(&self, h: u64) -> f64 {
        self.log_survival(h).exp()
    }

    /// `ln P(H >= h)`, the negative log scale function.
    pub fn log_survival(&self, h: u64) -> f64 {
        assert!(h >= 1);
        self.log_survival[(h - 1) as usize]
    }

    /// Largest height carried by the table.
    pub fn hmax(&self) -> u64 {
        self.log_survival.len() as u64
    }
}

/// Excursion-height law up to `hmax`. For a transient spec the law is
/// defective and the defect `P(H = infinity)` is reported on the table.
pub fn height_law(spec: &ModelSpec, hmax: u64) -> HeightLaw {
    let logs = CumLogGrowth::new(spec, hmax + 1);
    let log_phi1 = -logs.log_product(1);
    let mut masses = Vec::with_capacity(hmax as usize);
    let mut log_survival = Vec::with_capacity(hmax as usize);
    for h in 1..=hmax {
        let log_phi_h = -logs.log_product(h);
        let log_phi_h1 = -logs.log_product(h + 1);
        let m = spec.p0() * (log_phi1 - log_phi_h).exp() * (1.0 - (log_phi_h - log_phi_h1).exp());
        masses.push(m);
        log_survival.push(logs.log_product(h));
    }
    let defect = if spec.beta() > 1.0 {
        log_growth_tail(spec, 0).map(f64::exp).unwrap_or(0.0)
    } else {
        0.0
    };
    let tail = (logs.product(hmax + 1) - defect).max(0.0);
    HeightLaw {
        atom_at_zero: spec.q0(),
        masses: PmfTable {
            support_start: 1,
            masses,
            normalized: defect == 0.0,
            tail_mass_bound: tail,
            defect,
            provenance: Provenance::Analytic,
        },
        log_survival,
    }
}

/// Probability that the absorbed-at-0 chain started at `x` ever reaches 0:
/// 1 when recurrent, `1 - prod_{y>=x} p_y` when transient. Decreasing in x.
pub fn extinction_prob(spec: &ModelSpec, x: u64) -> f64 {
    if spec.beta() <= 1.0 {
        return 1.0;
    }
    let log_tail = log_growth_tail(spec, x).expect("beta > 1 checked");
    -f64::exp_m1(log_tail)
}

/// Law of the first collapse time `tau_{x,0}` from `x >= 1`:
/// `P(tau_{x,0} = k) = q_{k+x-1} prod_{y=x}^{k+x-2} p_y`, `k = 1..=kmax`.
/// The total mass converges to the extinction probability `phi_x`.
pub fn first_passage_down_pmf(spec: &ModelSpec, x: u64, kmax: u64) -> Result<PmfTable> {
    if x == 0 {
        return Err(Error::Domain(
            "first passage down starts from x >= 1; use return_time_pmf at the origin".into(),
        ));
    }
    let logs = CumLogGrowth::new(spec, x + kmax);
    let base = logs.log_product(x);
    let masses: Vec<f64> = (1..=kmax)
        .map(|k| spec.disaster_prob(x + k - 1) * (logs.log_product(x + k - 1) - base).exp())
        .collect();
    let defect = if spec.beta() > 1.0 {
        log_growth_tail(spec, x).map(f64::exp).unwrap_or(0.0)
    } else {
        0.0
    };
    let tail = ((logs.log_product(x + kmax) - base).exp() - defect).max(0.0);
    Ok(PmfTable {
        support_start: 1,
        masses,
        normalized: defect == 0.0,
        tail_mass_bound: tail,
        defect,
        provenance: Provenance::Analytic,
    })
}

/// Whether `E(tau_{x,0})` is finite: positive recurrence of the reflected
/// chain (`beta < 1`, or `beta = 1` with `alpha > 1`).
pub fn first_passage_mean_finite(spec: &ModelSpec) -> bool {
    spec.beta() < 1.0 || (spec.beta() == 1.0 && spec.alpha() > 1.0)
}

// Coefficients f_k = P(tau_00 = k) for k = 0..=order (f_0 = 0).
fn return_pmf_coeffs(spec: &ModelSpec, order: usize) -> Vec<f64> {
    let logs = CumLogGrowth::new(spec, order as u64);
    let mut f = vec![0.0; order + 1];
    for k in 1..=order as u64 {
        f[k as usize] = spec.disaster_prob(k - 1) * logs.product(k - 1);
    }
    f
}

/// Green function at the diagonal, `g_{x,x}(z) = N_x(z) / (1 - phi_00(z))`
/// as a power series to `order`: coefficient n is `P^n(x, x)`.
///
/// The numerator is the partial sum `N_x(z) = 1 - sum_{k<=x} f_k z^k` with
/// `f_k = q_{k-1} prod_{y=0}^{k-2} p_y`, i.e. products including `p_0`;
/// a 60-state matrix-power oracle arbitrates this convention (the
/// alternative `prod_{y>=1}` breaks `P^n(x,x) = 0` for `n <= x`).
pub fn green_diag(spec: &ModelSpec, x: u64, order: usize) -> PowerSeries {
    let f = return_pmf_coeffs(spec, order);
    let mut denom = vec![0.0; order + 1];
    denom[0] = 1.0;
    for k in 1..=order {
        denom[k] = -f[k];
    }
    let mut numer = vec![0.0; order + 1];
    numer[0] = 1.0;
    for k in 1..=(x as usize).min(order) {
        numer[k] = -f[k];
    }
    let numer = PowerSeries::new(numer, "radius 1; coefficients are n-step return probabilities");
    let denom = PowerSeries::new(denom, "");
    let mut g = numer.div(&denom, order);
    g.radius_note = "radius >= 1; coefficient n is P^n(x,x)".into();
    g
}

/// Off-diagonal Green kernel `g_{x,y}(z)`: coefficient n is `P^n(x, y)`.
///
/// `g_{x,y} = g_{x,x} z^{y-x} prod_{y'=x}^{y-1} p_{y'}` for `y >= x` and
/// `(g_{x,x} - 1) z^{y-x} / prod_{y'=y}^{x-1} p_{y'}` for `y < x`.
pub fn green_kernel(spec: &ModelSpec, x: u64, y: u64, order: usize) -> PowerSeries {
    if y >= x {
        let shift = (y - x) as usize;
        let logs = CumLogGrowth::new(spec, y.max(1));
        let factor = (logs.log_product(y) - logs.log_product(x)).exp();
        let g = green_diag(spec, x, order.saturating_sub(shift));
        let mut out = g.scale(factor).shift_up(shift);
        out.coeffs.resize(order + 1, 0.0);
        out.truncation_order = order;
        out.radius_note = "radius >= 1; coefficient n is P^n(x,y)".into();
        out
    } else {
        let shift = (x - y) as usize;
        let logs = CumLogGrowth::new(spec, x);
        let factor = (logs.log_product(x) - logs.log_product(y)).exp(); // prod_{y'=y}^{x-1}
        let g = green_diag(spec, x, order + shift);
        let mut gm1 = g;
        gm1.coeffs[0] -= 1.0;
        let mut out = gm1.shift_down(shift).scale(1.0 / factor);
        out.coeffs.resize(order + 1, 0.0);
        out.truncation_order = order;
        out.radius_note = "radius >= 1; coefficient n is P^n(x,y)".into();
        out
    }
}

/// Pgf of the first return time to state `x`:
/// `phi_{x,x}(z) = sum_{x'>=x} t_{x'}(z) / (1 - sum_{x'<x} t_{x'}(z))`
/// with `t_{x'}(z) = q_{x'} z^{x'+1} prod_{y=0}^{x'-1} p_y`. At z = 1 this
/// is `alpha_x = P(tau_{x,x} < infinity)`.
pub fn first_return_pgf_at(spec: &ModelSpec, x: u64, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("pgf argument must lie in [0,1], got {z}")));
    }
    let logs = CumLogGrowth::new(spec, x.max(1));
    // Finite lower sum.
    let mut lower = NeumaierSum::new();
    for xp in 0..x {
        lower.add(spec.disaster_prob(xp) * z.powi(xp as i32 + 1) * logs.product(xp));
    }
    let upper = if z == 1.0 {
        let defect = if spec.beta() > 1.0 {
            log_growth_tail(spec, 0)?.exp()
        } else {
            0.0
        };
        logs.product(x) - defect
    } else {
        let mut acc = NeumaierSum::new();
        let mut log_prod = logs.log_product(x);
        let mut zx = z.powi(x as i32 + 1);
        let mut xp = x;
        loop {
            let term = spec.disaster_prob(xp) * zx * log_prod.exp();
            acc.add(term);
            if term * z / (1.0 - z) <= DEFAULT_TOL || term == 0.0 || xp > x + MAX_TERMS as u64 {
                break;
            }
            log_prod += spec.log_growth_prob(xp);
            zx *= z;
            xp += 1;
        }
        acc.value()
    };
    Ok(upper / (1.0 - lower.value()))
}

/// Contact probabilities `u_n = P_0(X_n = 0)` for `n = 0..=nmax`, via the
/// renewal recursion `u_n = sum_{k=1..n} f_k u_{n-k}`.
pub fn contact_probability(spec: &ModelSpec, nmax: usize) -> Vec<f64> {
    let f = return_pmf_coeffs(spec, nmax);
    let mut u = vec![0.0; nmax + 1];
    u[0] = 1.0;
    for n in 1..=nmax {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += f[k] * u[n - k];
        }
        u[n] = acc;
    }
    u
}

/// How a power-law constant in [`ContactAsymptote`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantSource {
    /// Closed form from singularity analysis.
    ClosedForm,
    /// Richardson-extrapolated estimate from the renewal recursion. Used
    /// for Model B with alpha < 1, where the closed-form constant
    /// `1/(p0 Gamma(1-alpha))` disagrees with the series by the factor
    /// Gamma(alpha) present in the Model A constant; the series value is
    /// reported instead of asserting either form.
    SeriesEstimate,
}

/// Large-n regime of the contact probability in the critical case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactAsymptote {
    /// `u_n ~ constant * n^{-exponent}` (null recurrent, alpha < 1).
    PowerLaw { exponent: f64, constant: f64, source: ConstantSource },
    /// `u_n ~ constant / ln n` (null recurrent boundary, alpha = 1).
    Logarithmic { constant: f64 },
    /// `u_n -> pi_0` (positive recurrent, alpha > 1). For Model A at the
    /// degenerate boundary `alpha = nu + 1` with `p0 = 1` the chain is
    /// 2-periodic and only the time-averaged contact frequency converges.
    ConstantLimit { pi0: f64 },
}

/// Asymptotic contact-probability regime (`beta = 1` only).
pub fn contact_asymptote(spec: &ModelSpec) -> Result<ContactAsymptote> {
    if spec.beta() != 1.0 {
        return Err(Error::Undefined(
            "contact asymptotics are classified in the critical case beta = 1".into(),
        ));
    }
    let alpha = spec.alpha();
    let p0 = spec.p0();
    if alpha > 1.0 {
        Ok(ContactAsymptote::ConstantLimit { pi0: 1.0 / (1.0 + c2_value(spec)) })
    } else if alpha == 1.0 {
        let constant = match spec.kind() {
            ModelKind::A => 1.0 / (p0 * spec.nu()),
            ModelKind::B => 1.0 / p0,
        };
        Ok(ContactAsymptote::Logarithmic { constant })
    } else {
        match spec.kind() {
            ModelKind::A => {
                let nu = spec.nu();
                let constant = gamma(nu + 1.0 - alpha)
                    / (p0 * gamma(nu + 1.0) * gamma(1.0 - alpha) * gamma(alpha));
                Ok(ContactAsymptote::PowerLaw {
                    exponent: 1.0 - alpha,
                    constant,
                    source: ConstantSource::ClosedForm,
                })
            }
            ModelKind::B => {
                // Richardson-extrapolate c_n = u_n n^{1-alpha}, whose error
                // decays like n^{-alpha}.
                let n = 4000usize;
                let u = contact_probability(spec, 2 * n);
                let c1 = u[n] * (n as f64).powf(1.0 - alpha);
                let c2 = u[2 * n] * (2.0 * n as f64).powf(1.0 - alpha);
                let w = 2f64.powf(alpha);
                let constant = (w * c2 - c1) / (w - 1.0);
                Ok(ContactAsymptote::PowerLaw {
                    exponent: 1.0 - alpha,
                    constant,
                    source: ConstantSource::SeriesEstimate,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::l_nu;
    use crate::stationary::invariant_dt;

    const PI: f64 = std::f64::consts::PI;

    fn a(alpha: f64, beta: f64, nu: f64, p0: f64) -> ModelSpec {
        ModelSpec::model_a(alpha, beta, nu, p0).unwrap()
    }
    fn b(alpha: f64, beta: f64, p0: f64) -> ModelSpec {
        ModelSpec::model_b(alpha, beta, p0).unwrap()
    }

    #[test]
    fn return_time_pmf_basics() {
        let spec = a(1.2, 1.0, 1.0, 0.7);
        let t = return_time_pmf(&spec, 200);
        assert!((t.mass(1) - 0.3).abs() < 1e-15); // q0
        // Model B, p0 = 1: P(tau > x) = x^-alpha for x >= 1.
        let spec = b(1.5, 1.0, 1.0);
        let t = return_time_pmf(&spec, 500);
        for x in [1u64, 3, 50] {
            // P(tau > x) = 1 - sum_{k<=x} P(tau = k)
            let partial: f64 = (1..=x).map(|k| t.mass(k)).sum();
            let want = (x as f64).powf(-1.5);
            assert!((1.0 - partial - want).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn return_time_telescoping_identity() {
        for spec in [a(1.5, 1.0, 1.0, 0.8), b(0.7, 0.5, 0.5), a(0.5, 2.0, 0.5, 1.0)] {
            let t = return_time_pmf(&spec, 300);
            let mut prod = 1.0f64;
            let mut partial = 0.0f64;
            for x in 0..=300u64 {
                partial += t.mass(x + 1);
                prod *= spec.growth_prob(x);
                assert!(
                    (partial - (1.0 - prod)).abs() < 1e-13,
                    "telescoping at x={x}"
                );
            }
        }
    }

    #[test]
    fn return_time_defect_transient() {
        let spec = a(0.5, 2.0, 0.5, 1.0);
        let t = return_time_pmf(&spec, 400);
        // Oracle: long direct product.
        let mut prod = 1.0f64;
        for y in 0..3_000_000u64 {
            prod *= spec.growth_prob(y);
        }
        assert!(t.defect > 0.0);
        assert!((t.defect - prod).abs() < 1e-7, "{} vs {}", t.defect, prod);
        let total = t.total_tabulated() + t.tail_mass_bound + t.defect;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn return_pgf_closed_vs_series() {
        for spec in [a(1.5, 1.0, 1.0, 0.8), a(0.5, 1.0, 0.7, 1.0), b(2.0, 1.0, 0.6), b(0.8, 1.0, 1.0)] {
            for z in [0.2, 0.5, 0.9] {
                let closed = return_time_pgf(&spec, z).unwrap();
                assert!(closed.closed_form);
                // Direct series oracle.
                let mut acc = 0.0f64;
                let mut prod = 1.0f64;
                for x in 0..20_000u64 {
                    acc += spec.disaster_prob(x) * z.powi(x as i32 + 1) * prod;
                    prod *= spec.growth_prob(x);
                }
                assert!(
                    (closed.value - acc).abs() < 1e-8,
                    "z={z}: closed {} vs series {acc}",
                    closed.value
                );
            }
            assert_eq!(return_time_pgf(&spec, 1.0).unwrap().value, 1.0);
        }
    }

    #[test]
    fn return_pgf_model_a_alpha_one_l_nu_form() {
        // psi_0(z) = z - nu L_nu(z)(1-z) at alpha = 1.
        let spec = a(1.0, 1.0, 1.3, 0.9);
        for z in [0.1, 0.4, 0.8] {
            let psi = psi0_critical(&spec, z).unwrap();
            let want = z - 1.3 * l_nu(1.3, z).unwrap().value * (1.0 - z);
            assert!((psi - want).abs() < 1e-10);
        }
    }

    #[test]
    fn return_pgf_model_b_alpha_one_log_form() {
        // psi_0(z) = 1 + (1-z) log(1-z) / z at alpha = 1.
        let spec = b(1.0, 1.0, 0.8);
        for z in [0.2, 0.5, 0.9] {
            let psi = psi0_critical(&spec, z).unwrap();
            let want = 1.0 + (1.0 - z) * f64::ln_1p(-z) / z;
            assert!((psi - want).abs() < 1e-10);
        }
    }

    #[test]
    fn return_pgf_fallback_off_critical() {
        let spec = b(0.7, 0.5, 0.9);
        let got = return_time_pgf(&spec, 0.6).unwrap();
        assert!(!got.closed_form);
        assert!(got.tail_bound <= DEFAULT_TOL);
        let mut acc = 0.0f64;
        let mut prod = 1.0f64;
        for x in 0..2_000u64 {
            acc += spec.disaster_prob(x) * 0.6f64.powi(x as i32 + 1) * prod;
            prod *= spec.growth_prob(x);
        }
        assert!((got.value - acc).abs() < 1e-10);
    }

    #[test]
    fn mean_return_time_examples() {
        assert!((mean_return_time(&a(2.0, 1.0, 1.0, 1.0)) - 2.0).abs() < 1e-12);
        assert!((mean_return_time(&b(2.0, 1.0, 1.0)) - (1.0 + PI * PI / 6.0)).abs() < 1e-12);
        assert_eq!(mean_return_time(&a(1.0, 1.0, 1.0, 1.0)), f64::INFINITY);
        assert_eq!(mean_return_time(&b(0.5, 2.0, 1.0)), f64::INFINITY);
    }

    #[test]
    fn sibuya_and_pareto_pmfs() {
        assert!((sibuya_pmf(1.5, 1.0, 1).unwrap() - 0.75).abs() < 1e-15); // alpha/(nu+1)
        assert!((pareto_pmf(1.5, 1).unwrap() - (1.0 - 2f64.powf(-1.5))).abs() < 1e-15);
        // Monotone decreasing mass, mode at 1.
        let mut prev = sibuya_pmf(1.5, 1.0, 1).unwrap();
        for x in 2..50 {
            let cur = sibuya_pmf(1.5, 1.0, x).unwrap();
            assert!(cur < prev);
            prev = cur;
        }
        // Tail-integral oracle: sum_{x<=1e6} s_x >= 1 - 2e-9-ish for
        // alpha=1.5, nu=1 (tail ~ x^-alpha).
        let (alpha, nu) = (1.5, 1.0);
        let mut s = alpha / (nu + 1.0);
        let mut total = s;
        for x in 1..1_000_000u64 {
            s *= (nu - alpha + x as f64) / (nu + x as f64 + 1.0);
            total += s;
        }
        assert!(total >= 1.0 - 2.0 * 1e6f64.powf(-alpha), "total {total}");
        // Pareto mass sums to 1 - (X+1)^-alpha.
        let total: f64 = (1..=10_000u64).map(|x| pareto_pmf(2.0, x).unwrap()).sum();
        assert!((total - (1.0 - 10_001f64.powf(-2.0))).abs() < 1e-12);
    }

    #[test]
    fn scale_function_values() {
        let spec = a(1.5, 1.0, 1.0, 0.8);
        assert_eq!(scale_function(&spec, 0), 0.0);
        assert!((scale_function(&spec, 1) - 1.25).abs() < 1e-14);
        let spec = b(1.5, 1.0, 1.0);
        for x in [1u64, 2, 10, 100] {
            let want = (x as f64).powf(1.5);
            assert!((scale_function(&spec, x) - want).abs() < 1e-11 * want);
        }
    }

    #[test]
    fn height_law_identities() {
        for spec in [a(1.5, 1.0, 1.0, 0.8), b(2.0, 1.0, 0.6)] {
            let law = height_law(&spec, 1000);
            assert!((law.atom_at_zero - spec.q0()).abs() < 1e-15);
            let pmf = return_time_pmf(&spec, 1001);
            // H = tau_00 - 1 in distribution.
            assert!((law.atom_at_zero - pmf.mass(1)).abs() < 1e-15);
            for h in [1u64, 7, 100, 999] {
                assert!(
                    (law.masses.mass(h) - pmf.mass(h + 1)).abs() < 1e-14,
                    "H mass vs tau mass at h={h}"
                );
                // Eq for P(H=h) equals q_h prod_{y<h} p_y to 1e-12.
                let mut prod = 1.0f64;
                for y in 0..h {
                    prod *= spec.growth_prob(y);
                }
                let direct = spec.disaster_prob(h) * prod;
                assert!((law.masses.mass(h) - direct).abs() < 1e-12);
                // Scale/height duality in log space.
                let lhs = law.log_survival(h) + scale_function(&spec, h).ln();
                assert!(lhs.abs() < 1e-12, "duality at h={h}: {lhs}");
            }
        }
    }

    #[test]
    fn extinction_dual_formula_oracle() {
        let spec = a(0.5, 2.0, 0.5, 1.0);
        // Resolvent-series oracle: phi_x = sum_{y>=x} q_y prod_{y'=x}^{y-1} p_{y'},
        // summed directly to Y with a bracketed remainder.
        let y_cut = 1_000_000u64;
        for x in [1u64, 5, 20, 50] {
            let mut acc = NeumaierSum::new();
            let mut prod = 1.0f64;
            for y in x..=y_cut {
                acc.add(spec.disaster_prob(y) * prod);
                prod *= spec.growth_prob(y);
            }
            let qtail = crate::tails::disaster_tail(&spec, y_cut).unwrap();
            // remainder in [prod * qtail * (1 - qtail), prod * qtail]
            let oracle = acc.value() + prod * qtail * (1.0 - 0.5 * qtail);
            let got = extinction_prob(&spec, x);
            assert!(
                (got - oracle).abs() < 1e-10,
                "x={x}: {got} vs oracle {oracle}"
            );
        }
        // Monotone decreasing.
        let mut prev = extinction_prob(&spec, 1);
        for x in 2..40 {
            let cur = extinction_prob(&spec, x);
            assert!(cur < prev);
            prev = cur;
        }
        // Recurrent chains go extinct almost surely.
        assert_eq!(extinction_prob(&a(1.0, 1.0, 1.0, 0.5), 7), 1.0);
    }

    #[test]
    fn first_passage_down_examples() {
        let spec = b(2.0, 1.0, 1.0);
        let t = first_passage_down_pmf(&spec, 3, 100_000).unwrap();
        assert!((t.mass(1) - spec.disaster_prob(3)).abs() < 1e-15);
        let total = t.total_tabulated();
        let phi = extinction_prob(&spec, 3);
        assert!((total - phi).abs() < 1e-8, "mass {total} vs phi {phi}");
        assert!(first_passage_down_pmf(&spec, 0, 10).is_err());
        assert!(first_passage_mean_finite(&spec));
        assert!(!first_passage_mean_finite(&b(0.9, 1.0, 1.0)));
        assert!(!first_passage_mean_finite(&b(0.9, 2.0, 1.0)));
    }

    #[test]
    fn first_passage_pgf_recurrence() {
        // 1 - phi_{x+1,0}(z) = (z-1)/(p_x z) + (1 - phi_{x,0}(z))/(p_x z).
        let spec = a(1.5, 1.0, 1.0, 0.8);
        let z = 0.5f64;
        let pgf_at = |x: u64| {
            let t = first_passage_down_pmf(&spec, x, 4000).unwrap();
            (1..=4000u64).map(|k| t.mass(k) * z.powi(k as i32)).sum::<f64>()
        };
        for x in [1u64, 2, 5] {
            let lhs = 1.0 - pgf_at(x + 1);
            let px = spec.growth_prob(x);
            let rhs = (z - 1.0) / (px * z) + (1.0 - pgf_at(x)) / (px * z);
            assert!((lhs - rhs).abs() < 1e-10, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn green_diag_basics() {
        let spec = b(1.5, 1.0, 0.7);
        let g = green_diag(&spec, 0, 50);
        assert_eq!(g.coeff(0), 1.0);
        // g_00 = 1/(1 - phi_00): coefficients are the contact probabilities.
        let u = contact_probability(&spec, 50);
        for n in 0..=50 {
            assert!((g.coeff(n) - u[n]).abs() < 1e-12);
        }
        // P^n(x,x) = 0 for 1 <= n <= x.
        let g = green_diag(&spec, 4, 30);
        assert_eq!(g.coeff(0), 1.0);
        for n in 1..=4 {
            assert_eq!(g.coeff(n), 0.0, "P^{n}(4,4) must vanish");
        }
    }

    #[test]
    fn green_kernel_matrix_power_oracle() {
        // 60-state truncation is exact for P^n(x,y), n <= 25, x,y <= 5.
        for spec in [a(1.5, 1.0, 1.0, 0.8), b(1.5, 1.0, 0.8)] {
            let n_states = 60usize;
            let order = 25usize;
            for x in 0..=5u64 {
                // Row vector e_x P^n accumulated iteratively.
                let mut v = vec![0.0f64; n_states];
                v[x as usize] = 1.0;
                let mut powers: Vec<Vec<f64>> = vec![v.clone()];
                for _ in 0..order {
                    let mut next = vec![0.0f64; n_states];
                    for (s, &mass) in v.iter().enumerate() {
                        if mass == 0.0 {
                            continue;
                        }
                        let q = spec.disaster_prob(s as u64);
                        next[0] += mass * q;
                        if s + 1 < n_states {
                            next[s + 1] += mass * (1.0 - q);
                        }
                    }
                    v = next;
                    powers.push(v.clone());
                }
                for y in 0..=5u64 {
                    let g = green_kernel(&spec, x, y, order);
                    for (n, p) in powers.iter().enumerate() {
                        let want = p[y as usize];
                        assert!(
                            (g.coeff(n) - want).abs() <= 1e-10,
                            "kind={:?} x={x} y={y} n={n}: {} vs {}",
                            spec.kind(),
                            g.coeff(n),
                            want
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn green_first_passage_factorization() {
        // phi_{x,0}(z) g_{0,0}(z) = g_{x,0}(z): the left factor comes from
        // the direct pmf formula, the right from series division.
        let spec = a(1.5, 1.0, 1.0, 0.8);
        let order = 40usize;
        for x in [1u64, 3, 5] {
            let fp = first_passage_down_pmf(&spec, x, order as u64).unwrap();
            let mut phi = vec![0.0; order + 1];
            for k in 1..=order as u64 {
                phi[k as usize] = fp.mass(k);
            }
            let phi = PowerSeries::new(phi, "");
            let g00 = green_diag(&spec, 0, order);
            let lhs = phi.mul(&g00, order);
            let rhs = green_kernel(&spec, x, 0, order);
            for n in 0..=order {
                assert!(
                    (lhs.coeff(n) - rhs.coeff(n)).abs() < 1e-12,
                    "x={x} n={n}"
                );
            }
        }
    }

    #[test]
    fn first_return_pgf_at_origin_matches_return_pgf() {
        let spec = b(1.5, 1.0, 0.7);
        for z in [0.3, 0.8, 1.0] {
            let got = first_return_pgf_at(&spec, 0, z).unwrap();
            let want = return_time_pgf(&spec, z).unwrap().value;
            assert!((got - want).abs() < 1e-10, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn first_return_mean_is_inverse_stationary_mass() {
        // d/dz phi_{x,x}(1) = 1/pi_x, via a one-sided difference quotient.
        let spec = b(2.5, 1.0, 0.8);
        let t = invariant_dt(&spec, 50).unwrap();
        for x in [0u64, 1, 4] {
            let h = 1e-6;
            let d = (first_return_pgf_at(&spec, x, 1.0).unwrap()
                - first_return_pgf_at(&spec, x, 1.0 - h).unwrap())
                / h;
            let want = 1.0 / t.mass(x);
            assert!(
                (d - want).abs() / want < 1e-4,
                "x={x}: derivative {d} vs 1/pi {want}"
            );
        }
    }

    #[test]
    fn first_return_alpha_x_less_than_one_when_transient() {
        let spec = a(0.5, 2.0, 0.5, 1.0);
        for x in [0u64, 2, 6] {
            let ax = first_return_pgf_at(&spec, x, 1.0).unwrap();
            assert!(ax < 1.0 && ax > 0.0, "alpha_{x} = {ax}");
        }
    }

    #[test]
    fn contact_probability_regimes() {
        // n = 0 gives 1.
        let spec = b(2.0, 1.0, 1.0);
        let u = contact_probability(&spec, 10_000);
        assert_eq!(u[0], 1.0);
        // alpha > 1: convergence to pi_0 = 1/(1 + zeta(2)).
        let pi0 = 1.0 / (1.0 + PI * PI / 6.0);
        assert!((u[10_000] - pi0).abs() < 1e-3);
        // Renewal convolution identity holds to 1e-12 (recomputed direct).
        let f = return_pmf_coeffs(&spec, 400);
        for n in [1usize, 17, 400] {
            let conv: f64 = (1..=n).map(|k| f[k] * u[n - k]).sum();
            assert!((conv - u[n]).abs() < 1e-12);
        }
        // alpha < 1: log-log slope close to -(1-alpha).
        let spec = b(0.5, 1.0, 1.0);
        let u = contact_probability(&spec, 10_000);
        let ns: Vec<usize> = (1000..=10_000).step_by(450).collect();
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = ns.iter().map(|&n| u[n].ln()).collect();
        let slope = crate::util::ls_slope(&xs, &ys);
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn contact_asymptote_constants() {
        // Model A closed-form constant at alpha=0.5, nu=1, p0=1:
        // Gamma(1.5)/(Gamma(2) Gamma(0.5) Gamma(0.5)) = 0.5/sqrt(pi)/...
        let spec = a(0.5, 1.0, 1.0, 1.0);
        match contact_asymptote(&spec).unwrap() {
            ContactAsymptote::PowerLaw { exponent, constant, source } => {
                assert_eq!(source, ConstantSource::ClosedForm);
                assert!((exponent - 0.5).abs() < 1e-15);
                let want = gamma(1.5) / (gamma(2.0) * gamma(0.5) * gamma(0.5));
                assert!((constant - want).abs() < 1e-12);
                // The series agrees with the closed form.
                let u = contact_probability(&spec, 8000);
                let est = u[8000] * (8000f64).sqrt();
                assert!((est - constant).abs() / constant < 0.02, "{est} vs {constant}");
            }
            other => panic!("wrong regime: {other:?}"),
        }
        // Model B series-estimated constant: 1/(p0 G(1-a) G(a)) = 1/pi at
        // alpha = 0.5 (the closed display without G(alpha) gives 1/G(0.5)
        // = 0.564, clearly rejected by the series).
        let spec = b(0.5, 1.0, 1.0);
        match contact_asymptote(&spec).unwrap() {
            ContactAsymptote::PowerLaw { constant, source, .. } => {
                assert_eq!(source, ConstantSource::SeriesEstimate);
                let with_gamma_alpha = 1.0 / (gamma(0.5) * gamma(0.5));
                assert!(
                    (constant - with_gamma_alpha).abs() / with_gamma_alpha < 0.02,
                    "estimate {constant} vs 1/pi {with_gamma_alpha}"
                );
            }
            other => panic!("wrong regime: {other:?}"),
        }
        // Logarithmic and constant regimes.
        match contact_asymptote(&a(1.0, 1.0, 2.0, 0.5)).unwrap() {
            ContactAsymptote::Logarithmic { constant } => {
                assert!((constant - 1.0).abs() < 1e-15)
            }
            other => panic!("wrong regime: {other:?}"),
        }
        match contact_asymptote(&b(2.0, 1.0, 1.0)).unwrap() {
            ContactAsymptote::ConstantLimit { pi0 } => {
                assert!((pi0 - 1.0 / (1.0 + PI * PI / 6.0)).abs() < 1e-12)
            }
            other => panic!("wrong regime: {other:?}"),
        }
    }

    #[test]
    fn size_biased_return_law_is_proper() {
        // x P(tau=x)/mu sums to 1 when mu < infinity.
        let spec = b(2.5, 1.0, 0.9);
        let mu = mean_return_time(&spec);
        let t = return_time_pmf(&spec, 200_000);
        let total: f64 = (1..=200_000u64).map(|x| x as f64 * t.mass(x) / mu).sum();
        assert!((total - 1.0).abs() < 1e-4, "size-biased mass {total}");
    }
}
