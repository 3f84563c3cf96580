//! The two disaster chain models, their transition probabilities, jump
//! rates, drift/variance diagnostics and the recurrence/transience
//! classification.
//!
//! Both chains live on the non-negative integers and move `x -> x+1` with
//! probability `p_x` or collapse `x -> 0` with probability `q_x = 1 - p_x`.
//! At the origin the walker reflects with probability `p_0` and holds with
//! probability `q_0 = 1 - p_0`.
//!
//! * Model A: `q_x = alpha / (nu + x^beta)` for `x >= 1`.
//! * Model B: `p_x = (1 + x^-beta)^-alpha` for `x >= 1`.
//!
//! The optional continuous-time layer attaches exponential holding times
//! with algebraic rates `r_x = r0 * (x+1)^lambda`.

use crate::error::{Error, Result};
use crate::util::NeumaierSum;

/// Which of the two disaster chains is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `q_x = alpha / (nu + x^beta)`.
    A,
    /// `p_x = (1 + x^-beta)^-alpha`.
    B,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::A => write!(f, "A"),
            ModelKind::B => write!(f, "B"),
        }
    }
}

/// Continuous-time layer: jump rates `r_x = r0 * (x+1)^lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtLayer {
    pub lambda: f64,
    pub r0: f64,
}

/// A fully validated parameter set for one of the two chains.
///
/// Model A carries `nu`; for Model B the field is a fixed placeholder (1.0)
/// and cannot be set. `beta = 0` (homogeneous transition probabilities) is
/// accepted for Model A only.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    alpha: f64,
    beta: f64,
    nu: f64,
    p0: f64,
    ct: Option<CtLayer>,
}

impl ModelSpec {
    /// Model A with parameters `alpha`, `beta`, `nu` and reflection
    /// probability `p0` at the origin.
    ///
    /// Requires `beta >= 0`, `nu > -1`, `0 < alpha <= nu + 1` and
    /// `p0 in (0, 1]`. The closed boundary `alpha = nu + 1` makes `q_1 = 1`
    /// (the chain then never exceeds state 1); all closed forms degenerate
    /// continuously there.
    pub fn model_a(alpha: f64, beta: f64, nu: f64, p0: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "model A requires beta >= 0, got {beta}"
            )));
        }
        if !(nu > -1.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "model A requires nu > -1, got {nu}"
            )));
        }
        if !(alpha > 0.0 && alpha <= nu + 1.0) {
            return Err(Error::InvalidParameter(format!(
                "model A requires 0 < alpha <= nu + 1, got alpha={alpha}, nu={nu}"
            )));
        }
        Self::check_p0(p0)?;
        Ok(ModelSpec { kind: ModelKind::A, alpha, beta, nu, p0, ct: None })
    }

    /// Model B with parameters `alpha`, `beta` and reflection probability
    /// `p0`. Requires `alpha > 0`, `beta > 0` and `p0 in (0, 1]`.
    pub fn model_b(alpha: f64, beta: f64, p0: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "model B requires alpha > 0, got {alpha}"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "model B requires beta > 0, got {beta}"
            )));
        }
        Self::check_p0(p0)?;
        // nu is a meaningless placeholder for model B.
        Ok(ModelSpec { kind: ModelKind::B, alpha, beta, nu: 1.0, p0, ct: None })
    }

    fn check_p0(p0: f64) -> Result<()> {
        if !(p0 > 0.0 && p0 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p0 must lie in (0, 1], got {p0}"
            )));
        }
        Ok(())
    }

    /// Attach a continuous-time layer with rates `r_x = r0 * (x+1)^lambda`.
    pub fn with_ct(mut self, lambda: f64, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ct layer requires finite lambda and r0 > 0, got lambda={lambda}, r0={r0}"
            )));
        }
        self.ct = Some(CtLayer { lambda, r0 });
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// `nu` for model A; a fixed placeholder (1.0) for model B.
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn q0(&self) -> f64 {
        1.0 - self.p0
    }
    pub fn ct(&self) -> Option<CtLayer> {
        self.ct
    }

    /// `x^-beta` evaluated as `exp(-beta ln x)` so huge `x` never overflows.
    fn x_neg_beta(&self, x: u64) -> f64 {
        debug_assert!(x >= 1);
        (-self.beta * (x as f64).ln()).exp()
    }

    /// Probability of the growth move `x -> x+1`.
    pub fn growth_prob(&self, x: u64) -> f64 {
        if x == 0 {
            return self.p0;
        }
        1.0 - self.disaster_prob(x)
    }

    /// Probability of the total disaster `x -> 0` (holding probability at
    /// the origin). Complements `growth_prob` exactly.
    pub fn disaster_prob(&self, x: u64) -> f64 {
        if x == 0 {
            return 1.0 - self.p0;
        }
        let t = self.x_neg_beta(x);
        match self.kind {
            // alpha / (nu + x^beta) = alpha t / (1 + nu t), overflow-free.
            ModelKind::A => self.alpha * t / (1.0 + self.nu * t),
            // 1 - (1 + x^-beta)^-alpha.
            ModelKind::B => -f64::exp_m1(-self.alpha * f64::ln_1p(t)),
        }
    }

    /// `ln p_x`, computed without forming `p_x` first (accurate when
    /// `q_x` is tiny).
    pub fn log_growth_prob(&self, x: u64) -> f64 {
        if x == 0 {
            return self.p0.ln();
        }
        let t = self.x_neg_beta(x);
        match self.kind {
            ModelKind::A => f64::ln_1p(-self.alpha * t / (1.0 + self.nu * t)),
            ModelKind::B => -self.alpha * f64::ln_1p(t),
        }
    }

    /// Jump rate `r_x = r0 * (x+1)^lambda` of the continuous-time layer.
    pub fn jump_rate(&self, x: u64) -> Result<f64> {
        let ct = self.ct.ok_or(Error::MissingCtLayer)?;
        Ok(ct.r0 * ((x + 1) as f64).powf(ct.lambda))
    }

    /// Local drift `f(x) = p_x - x q_x` and variance
    /// `sigma^2(x) = p_x + x^2 q_x` of the one-step increment, `x >= 1`.
    pub fn drift_and_variance(&self, x: u64) -> Result<(f64, f64)> {
        if x == 0 {
            return Err(Error::Domain(
                "drift and variance are defined for x >= 1".into(),
            ));
        }
        let q = self.disaster_prob(x);
        let p = 1.0 - q;
        let xf = x as f64;
        Ok((p - xf * q, p + xf * xf * q))
    }

    /// Recurrence/transience phase of the chain, with the explosion flag
    /// when a continuous-time layer is present.
    ///
    /// Discrete time: `beta > 1` transient, `beta < 1` positive recurrent,
    /// `beta = 1` positive recurrent iff `alpha > 1`. The time change to
    /// continuous time leaves recurrence untouched but moves the critical
    /// positive-recurrence boundary to `alpha + lambda > 1`; the chain
    /// explodes iff it is transient and `lambda > 1`.
    pub fn classify(&self) -> ChainClassification {
        let beta = self.beta;
        let recurrence = if beta > 1.0 {
            Recurrence::Transient
        } else if beta < 1.0 {
            Recurrence::PositiveRecurrent
        } else {
            let critical = match self.ct {
                Some(ct) => self.alpha + ct.lambda,
                None => self.alpha,
            };
            if critical > 1.0 {
                Recurrence::PositiveRecurrent
            } else {
                Recurrence::NullRecurrent
            }
        };
        let ct_explosive = self
            .ct
            .map(|ct| recurrence == Recurrence::Transient && ct.lambda > 1.0);
        ChainClassification { recurrence, ct_explosive }
    }

    /// Shorthand: true unless the chain is transient.
    pub fn is_recurrent(&self) -> bool {
        self.classify().recurrence != Recurrence::Transient
    }
}

/// Recurrence phase of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    Transient,
    NullRecurrent,
    PositiveRecurrent,
}

impl std::fmt::Display for Recurrence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Recurrence::Transient => write!(f, "Transient"),
            Recurrence::NullRecurrent => write!(f, "NullRecurrent"),
            Recurrence::PositiveRecurrent => write!(f, "PositiveRecurrent"),
        }
    }
}

/// Result of [`ModelSpec::classify`]. `ct_explosive` is present iff the
/// spec has a continuous-time layer and can be true only for a transient
/// chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainClassification {
    pub recurrence: Recurrence,
    pub ct_explosive: Option<bool>,
}

/// Cumulative log-products of the growth probabilities.
///
/// `value(x) = sum_{y=0}^{x-1} ln p_y = ln P(tau_00 > x) = ln pi_x/pi_0`,
/// accumulated with compensated summation. Entry 0 is zero (empty product).
#[derive(Debug, Clone)]
pub struct CumLogGrowth {
    table: Vec<f64>,
}

impl CumLogGrowth {
    pub fn new(spec: &ModelSpec, xmax: u64) -> Self {
        let mut table = Vec::with_capacity(xmax as usize + 1);
        let mut acc = NeumaierSum::new();
        table.push(0.0);
        for y in 0..xmax {
            acc.add(spec.log_growth_prob(y));
            table.push(acc.value());
        }
        CumLogGrowth { table }
    }

    /// `sum_{y=0}^{x-1} ln p_y`; panics if `x` exceeds the table.
    pub fn log_product(&self, x: u64) -> f64 {
        self.table[x as usize]
    }

    /// `prod_{y=0}^{x-1} p_y`.
    pub fn product(&self, x: u64) -> f64 {
        self.log_product(x).exp()
    }

    pub fn xmax(&self) -> u64 {
        (self.table.len() - 1) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(alpha: f64, beta: f64, nu: f64, p0: f64) -> ModelSpec {
        ModelSpec::model_a(alpha, beta, nu, p0).unwrap()
    }
    fn b(alpha: f64, beta: f64, p0: f64) -> ModelSpec {
        ModelSpec::model_b(alpha, beta, p0).unwrap()
    }

    #[test]
    fn growth_prob_direct_substitution() {
        assert_eq!(a(1.0, 1.0, 1.0, 1.0).growth_prob(1), 0.5);
        assert_eq!(b(1.0, 1.0, 1.0).growth_prob(1), 0.5);
        assert_eq!(a(1.0, 1.0, 1.0, 0.7).growth_prob(0), 0.7);
    }

    #[test]
    fn disaster_prob_examples() {
        let s = a(0.5, 1.0, 0.5, 1.0);
        assert!((s.disaster_prob(2) - 0.2).abs() < 1e-15);
        let s = b(2.0, 1.0, 1.0);
        assert!((s.disaster_prob(1) - 0.75).abs() < 1e-15);
        assert_eq!(a(1.0, 1.0, 1.0, 1.0).disaster_prob(0), 0.0);
    }

    #[test]
    fn jump_rate_examples() {
        let s = a(1.0, 1.0, 1.0, 1.0).with_ct(0.0, 1.0).unwrap();
        assert_eq!(s.jump_rate(9).unwrap(), 1.0);
        let s = a(1.0, 1.0, 1.0, 1.0).with_ct(1.0, 2.0).unwrap();
        assert_eq!(s.jump_rate(3).unwrap(), 8.0);
        let s = a(1.0, 1.0, 1.0, 1.0).with_ct(-1.0, 1.0).unwrap();
        assert_eq!(s.jump_rate(1).unwrap(), 0.5);
        assert_eq!(a(1.0, 1.0, 1.0, 1.0).jump_rate(1), Err(Error::MissingCtLayer));
    }

    #[test]
    fn drift_and_variance_examples() {
        let (f, v) = a(1.0, 1.0, 1.0, 1.0).drift_and_variance(1).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(v, 1.0);
        // Model A, beta = 1: f(x) = 1 - alpha (1+x)/(nu+x) -> 1 - alpha.
        let s = a(1.0, 1.0, 1.0, 1.0);
        let (f, _) = s.drift_and_variance(1_000_000_000).unwrap();
        assert!(f.abs() < 1e-8, "f large-x limit should be 1-alpha=0, got {f}");
        // Model B alpha=1 beta=1 x=3: p=0.75, q=0.25 -> f = 0.75 - 0.75 = 0.
        let (f, _) = b(1.0, 1.0, 1.0).drift_and_variance(3).unwrap();
        assert!(f.abs() < 1e-15);
        assert!(a(1.0, 1.0, 1.0, 1.0).drift_and_variance(0).is_err());
    }

    #[test]
    fn probabilities_complement_exactly() {
        for spec in [a(1.5, 1.0, 1.0, 0.6), b(0.7, 2.0, 0.3), a(0.5, 0.0, 0.2, 1.0)] {
            for x in [0u64, 1, 2, 10, 1000, 1_000_000_000_000] {
                let p = spec.growth_prob(x);
                let q = spec.disaster_prob(x);
                assert_eq!(p + q, 1.0, "p+q must be exactly 1 at x={x}");
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn stochastic_monotonicity() {
        for spec in [a(1.5, 1.0, 1.0, 1.0), a(0.5, 2.0, 0.5, 1.0), b(2.0, 0.5, 1.0)] {
            let mut prev = spec.disaster_prob(1);
            for x in 2..200 {
                let cur = spec.disaster_prob(x);
                assert!(cur < prev, "q_x must strictly decrease on x >= 1");
                prev = cur;
            }
        }
    }

    #[test]
    fn asymptotic_agreement_of_models_at_critical_beta() {
        // beta = 1: x * q_x -> alpha for both models, within 1% at x = 1e6.
        let alpha = 1.3;
        let sa = a(alpha, 1.0, 1.0, 1.0);
        let sb = b(alpha, 1.0, 1.0);
        let x = 1_000_000u64;
        for s in [sa, sb] {
            let v = s.disaster_prob(x) * x as f64;
            assert!((v - alpha).abs() / alpha < 0.01, "x q_x = {v}, want ~{alpha}");
        }
    }

    #[test]
    fn classify_phase_diagram() {
        let c = a(1.0, 2.0, 1.0, 1.0).with_ct(1.5, 1.0).unwrap().classify();
        assert_eq!(c.recurrence, Recurrence::Transient);
        assert_eq!(c.ct_explosive, Some(true));

        let c = a(1.5, 1.0, 1.0, 1.0).classify();
        assert_eq!(c.recurrence, Recurrence::PositiveRecurrent);
        assert_eq!(c.ct_explosive, None);

        let c = b(0.5, 1.0, 1.0).with_ct(0.8, 1.0).unwrap().classify();
        assert_eq!(c.recurrence, Recurrence::PositiveRecurrent);
        assert_eq!(c.ct_explosive, Some(false));

        // Classification ignores r0, and lambda when beta != 1.
        for (lam, r0) in [(0.0, 1.0), (3.0, 0.1), (-2.0, 10.0)] {
            let c = a(0.5, 0.5, 1.0, 1.0).with_ct(lam, r0).unwrap().classify();
            assert_eq!(c.recurrence, Recurrence::PositiveRecurrent);
        }
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(ModelSpec::model_a(2.5, 1.0, 1.0, 1.0).is_err()); // alpha > nu+1
        assert!(ModelSpec::model_a(1.0, -0.5, 1.0, 1.0).is_err());
        assert!(ModelSpec::model_a(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(ModelSpec::model_a(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModelSpec::model_b(0.0, 1.0, 1.0).is_err());
        assert!(ModelSpec::model_b(1.0, 0.0, 1.0).is_err());
        assert!(ModelSpec::model_b(1.0, 1.0, 1.2).is_err());
        assert!(a(1.0, 1.0, 1.0, 1.0).with_ct(0.0, 0.0).is_err());
        // Closed boundary alpha = nu + 1 is accepted (q_1 = 1).
        let s = ModelSpec::model_a(2.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(s.growth_prob(1), 0.0);
    }

    #[test]
    fn cum_log_growth_matches_direct_product() {
        let s = b(2.0, 1.0, 1.0);
        let c = CumLogGrowth::new(&s, 100);
        // prod_{y=0}^{x-1} p_y = x^-alpha for model B at beta=1, p0=1.
        for x in [1u64, 2, 5, 50, 100] {
            let want = (x as f64).powf(-2.0);
            assert!((c.product(x) - want).abs() < 1e-14 * want.max(1.0));
        }
    }
}
