//! Continuous-time layer analytics: the hypoexponential law of an
//! excursion length given its height, the CT excursion tail exponent,
//! and explosion diagnostics with the post-drift Yule phase.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Recurrence};
use crate::tails::power_tail_sum;
use crate::util::NeumaierSum;

/// Hypoexponential mixture representation of `P(tau_00 > t | H = h)`:
/// weights `c_{h,x} = prod_{y != x} r_y / (r_y - r_x)` over the stage
/// rates `r_0..r_h`. Weights alternate in sign and blow up for large `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoexpLaw {
    pub rates: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HypoexpLaw {
    /// Build the closed-form weights for stages `0..=h`. Requires pairwise
    /// distinct rates (`lambda != 0`).
    pub fn new(spec: &ModelSpec, h: u64) -> Result<Self> {
        let ct = spec.ct().ok_or(Error::MissingCtLayer)?;
        if ct.lambda == 0.0 {
            return Err(Error::Domain(
                "equal rates (lambda = 0) have no partial-fraction form; use the Erlang branch"
                    .into(),
            ));
        }
        let rates: Vec<f64> = (0..=h).map(|x| spec.jump_rate(x).unwrap()).collect();
        let mut weights = Vec::with_capacity(rates.len());
        for x in 0..rates.len() {
            // Accumulate in log space with a sign to survive h ~ 40.
            let mut log_abs = 0.0f64;
            let mut sign = 1.0f64;
            for y in 0..rates.len() {
                if y == x {
                    continue;
                }
                let d = rates[y] - rates[x];
                log_abs += (rates[y] / d.abs()).ln();
                if d < 0.0 {
                    sign = -sign;
                }
            }
            weights.push(sign * log_abs.exp());
        }
        Ok(HypoexpLaw { rates, weights })
    }

    /// Compensated `sum_x c_{h,x} e^{-r_x t}`; at t = 0 this is the weight
    /// identity `sum c = 1`.
    pub fn survival(&self, t: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for (c, r) in self.weights.iter().zip(&self.rates) {
            acc.add(c * (-r * t).exp());
        }
        acc.value()
    }

    /// Compensated weight sum; 1 up to cancellation error.
    pub fn weight_sum(&self) -> f64 {
        crate::util::compensated_sum(self.weights.iter().copied())
    }
}

// Erlang(h+1, r) survival: sum_{j<=h} (rt)^j e^{-rt} / j!.
fn erlang_survival(stages: u64, rate: f64, t: f64) -> f64 {
    let rt = rate * t;
    let mut term = (-rt).exp();
    let mut acc = term;
    for j in 1..stages {
        term *= rt / j as f64;
        acc += term;
    }
    acc.min(1.0)
}

// Survival of sum of independent exponentials by uniformization of the
// pure-birth phase chain: stable (all terms non-negative) for any rate
// spread, cost O(max_rate * t + h).
fn uniformized_survival(rates: &[f64], t: f64) -> f64 {
    let lam = rates.iter().cloned().fold(f64::MIN, f64::max) * 1.05;
    let lt = lam * t;
    // Poisson(lt) weights summed over the jump-count distribution of the
    // uniformized chain; absorbed mass after k steps of the discrete
    // skeleton.
    let kmax = (lt + 12.0 * lt.sqrt() + 30.0) as usize;
    // Discrete skeleton: from stage i move to i+1 w.p. r_i/lam else hold.
    let n = rates.len();
    let mut state = vec![0.0f64; n + 1]; // n = absorbed
    state[0] = 1.0;
    // Poisson weights by stable upward recursion from the mode.
    let mut survival = 0.0f64;
    let mut log_w = -lt; // log Poisson(0)
    let mut k = 0usize;
    loop {
        let w = log_w.exp();
        let alive: f64 = state[..n].iter().sum();
        survival += w * alive;
        k += 1;
        if k > kmax {
            break;
        }
        log_w += (lt / k as f64).ln();
        // one skeleton step
        let mut next = vec![0.0f64; n + 1];
        for i in 0..n {
            let p = rates[i] / lam;
            next[i + 1] += state[i] * p;
            next[i] += state[i] * (1.0 - p);
        }
        next[n] += state[n];
        state = next;
    }
    survival.clamp(0.0, 1.0)
}

/// `P(tau_00 > t | H = h)` for the CT chain: partial-fraction closed form
/// for distinct rates, Erlang for `lambda = 0`, and a uniformization
/// fallback when `h > 40` or the closed-form weights have lost more than
/// 1e-6 of mass to cancellation.
pub fn excursion_survival_given_height(spec: &ModelSpec, h: u64, t: f64) -> Result<f64> {
    let ct = spec.ct().ok_or(Error::MissingCtLayer)?;
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if h == 0 {
        return Ok((-spec.jump_rate(0)? * t).exp());
    }
    if ct.lambda == 0.0 {
        return Ok(erlang_survival(h + 1, ct.r0, t));
    }
    if h <= 40 {
        let law = HypoexpLaw::new(spec, h)?;
        if (law.weight_sum() - 1.0).abs() <= 1e-6 {
            return Ok(law.survival(t).clamp(0.0, 1.0));
        }
    }
    let rates: Vec<f64> = (0..=h).map(|x| spec.jump_rate(x).unwrap()).collect();
    Ok(uniformized_survival(&rates, t))
}

/// Tail behaviour of the CT excursion length in the critical case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CtExcursionTail {
    /// `P(tau_00 > t) ~ t^-exponent` with `exponent = alpha/(1-lambda)`
    /// (`lambda < 1`).
    PowerLaw { exponent: f64 },
    /// For `lambda > 1` the excursion length has bounded conditional means
    /// `mu_h -> 1/(r0 (lambda-1))` and an exponential tail bound
    /// `P(tau > t | H=h) <= e exp(-t/mu_h)`.
    Exponential { mean_bound: f64 },
}

/// Classify the CT excursion-length tail (`beta = 1` required; the paper
/// leaves `lambda = 1` open and so do we).
pub fn ct_excursion_tail_exponent(spec: &ModelSpec) -> Result<CtExcursionTail> {
    let ct = spec.ct().ok_or(Error::MissingCtLayer)?;
    if spec.beta() != 1.0 {
        return Err(Error::Undefined(
            "the CT excursion tail exponent applies to the critical case beta = 1".into(),
        ));
    }
    if ct.lambda < 1.0 {
        Ok(CtExcursionTail::PowerLaw { exponent: spec.alpha() / (1.0 - ct.lambda) })
    } else if ct.lambda > 1.0 {
        Ok(CtExcursionTail::Exponential {
            mean_bound: 1.0 / (ct.r0 * (ct.lambda - 1.0)),
        })
    } else {
        Err(Error::Undefined(
            "lambda = 1 excursion tail is not characterized; use simulation".into(),
        ))
    }
}

/// Explosion diagnostics for the CT chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplosionReport {
    /// True iff `beta > 1` and `lambda > 1`.
    pub explosive: bool,
    /// Partial sums `sum_{x<=N} 1/r_x` on a doubling grid of N.
    pub rate_sum_partials: Vec<(u64, f64)>,
    /// Whether `sum 1/r_x` converges (`lambda > 1`), the Yule explosion
    /// criterion for the post-drift phase.
    pub rate_sum_converges: bool,
    /// Limit of the partial sums when convergent.
    pub rate_sum_limit: Option<f64>,
    /// Geometric law of the number of completed pre-drift excursions in
    /// the transient case: `P(N_e = k) = (1 - phi) phi^k` with
    /// `phi = phi_00(1) < 1`.
    pub pre_drift_excursions: Option<GeometricLaw>,
    /// What the path does after its last visit to 0.
    pub post_drift: PostDriftPhase,
}

/// Geometric law `P(N = k) = (1 - ratio) ratio^k`, `k >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricLaw {
    pub ratio: f64,
}

/// Behaviour after the transient chain leaves 0 for the last time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostDriftPhase {
    /// Recurrent chain: there is no final excursion.
    NoDrift,
    /// Pure-birth Yule phase at rates `r_x`, drifting to infinity in
    /// infinite time (`lambda <= 1`).
    YuleDriftWithoutExplosion,
    /// Pure-birth Yule phase accumulating infinitely many jumps in finite
    /// time `sum E_x` (`lambda > 1`).
    YuleExplosion,
}

/// Assemble the explosion report for a CT spec.
pub fn explosion_report(spec: &ModelSpec) -> Result<ExplosionReport> {
    let ct = spec.ct().ok_or(Error::MissingCtLayer)?;
    let class = spec.classify();
    let transient = class.recurrence == Recurrence::Transient;
    let explosive = transient && ct.lambda > 1.0;
    let mut rate_sum_partials = Vec::new();
    let mut acc = NeumaierSum::new();
    let mut next_mark = 16u64;
    for x in 0..=65_536u64 {
        acc.add(1.0 / spec.jump_rate(x)?);
        if x + 1 == next_mark {
            rate_sum_partials.push((x, acc.value()));
            next_mark *= 4;
        }
    }
    let rate_sum_converges = ct.lambda > 1.0;
    let rate_sum_limit = if rate_sum_converges {
        // sum_{x>=0} (x+1)^-lambda / r0 = zeta(lambda)/r0 via the tail helper.
        Some(acc.value() + power_tail_sum(ct.lambda, 65_537) / ct.r0)
    } else {
        None
    };
    let pre_drift_excursions = if transient {
        let phi = crate::hitting::return_time_pgf(spec, 1.0)?.value;
        Some(GeometricLaw { ratio: phi })
    } else {
        None
    };
    let post_drift = if !transient {
        PostDriftPhase::NoDrift
    } else if explosive {
        PostDriftPhase::YuleExplosion
    } else {
        PostDriftPhase::YuleDriftWithoutExplosion
    };
    Ok(ExplosionReport {
        explosive,
        rate_sum_partials,
        rate_sum_converges,
        rate_sum_limit,
        pre_drift_excursions,
        post_drift,
    })
}
