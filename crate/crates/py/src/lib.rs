//! Python bindings: the `disaster_py` extension module exposes the chain
//! models, their closed-form laws and the seed-deterministic simulators.
//!
//! Usage from Python:
//!
//!     import disaster_py as dp
//!     spec = dp.ModelSpec("B", alpha=2.0, beta=1.0, p0=1.0)
//!     spec.classify()              # "PositiveRecurrent"
//!     spec.mean_return_time()      # 1 + zeta(2)
//!     pi = spec.invariant_dt(100)  # list of stationary masses
//!     run = spec.simulate_dt(seed=7, steps=100000)

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use disaster_core::ctmc;
use disaster_core::divisibility;
use disaster_core::hitting;
use disaster_core::mc;
use disaster_core::model;
use disaster_core::special;
use disaster_core::stationary;

fn err<T>(r: disaster_core::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(e.to_string()))
}

fn pmf_to_dict<'py>(
    py: Python<'py>,
    t: &stationary::PmfTable,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("support_start", t.support_start)?;
    d.set_item("masses", t.masses.clone())?;
    d.set_item("normalized", t.normalized)?;
    d.set_item("tail_mass_bound", t.tail_mass_bound)?;
    d.set_item("defect", t.defect)?;
    Ok(d)
}

/// A validated parameter set for one of the two disaster chains.
#[pyclass(name = "ModelSpec")]
#[derive(Clone)]
struct PyModelSpec {
    inner: model::ModelSpec,
}

#[pymethods]
impl PyModelSpec {
    /// ModelSpec(kind, alpha, beta, nu=None, p0=1.0, lambda_=None, r0=None)
    #[new]
    #[pyo3(signature = (kind, alpha, beta, nu=None, p0=1.0, lambda_=None, r0=None))]
    fn new(
        kind: &str,
        alpha: f64,
        beta: f64,
        nu: Option<f64>,
        p0: f64,
        lambda_: Option<f64>,
        r0: Option<f64>,
    ) -> PyResult<Self> {
        let spec = match kind {
            "A" | "a" => {
                let nu = nu.ok_or_else(|| PyValueError::new_err("model A requires nu"))?;
                err(model::ModelSpec::model_a(alpha, beta, nu, p0))?
            }
            "B" | "b" => {
                if nu.is_some() {
                    return Err(PyValueError::new_err("model B does not take nu"));
                }
                err(model::ModelSpec::model_b(alpha, beta, p0))?
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown model kind {other}; expected 'A' or 'B'"
                )))
            }
        };
        let spec = match (lambda_, r0) {
            (Some(l), Some(r)) => err(spec.with_ct(l, r))?,
            (None, None) => spec,
            _ => {
                return Err(PyValueError::new_err(
                    "the CT layer needs both lambda_ and r0",
                ))
            }
        };
        Ok(PyModelSpec { inner: spec })
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        let ct = match s.ct() {
            Some(ct) => format!(", lambda={}, r0={}", ct.lambda, ct.r0),
            None => String::new(),
        };
        match s.kind() {
            model::ModelKind::A => format!(
                "ModelSpec('A', alpha={}, beta={}, nu={}, p0={}{ct})",
                s.alpha(),
                s.beta(),
                s.nu(),
                s.p0()
            ),
            model::ModelKind::B => format!(
                "ModelSpec('B', alpha={}, beta={}, p0={}{ct})",
                s.alpha(),
                s.beta(),
                s.p0()
            ),
        }
    }

    /// Probability of the growth move x -> x+1.
    fn growth_prob(&self, x: u64) -> f64 {
        self.inner.growth_prob(x)
    }

    /// Probability of the total disaster x -> 0.
    fn disaster_prob(&self, x: u64) -> f64 {
        self.inner.disaster_prob(x)
    }

    /// Jump rate r0 (x+1)^lambda of the CT layer.
    fn jump_rate(&self, x: u64) -> PyResult<f64> {
        err(self.inner.jump_rate(x))
    }

    /// Local drift and variance (f(x), sigma^2(x)) for x >= 1.
    fn drift_and_variance(&self, x: u64) -> PyResult<(f64, f64)> {
        err(self.inner.drift_and_variance(x))
    }

    /// "Transient" | "NullRecurrent" | "PositiveRecurrent".
    fn classify(&self) -> String {
        self.inner.classify().recurrence.to_string()
    }

    /// None without a CT layer, else the explosion flag.
    fn ct_explosive(&self) -> Option<bool> {
        self.inner.classify().ct_explosive
    }

    /// Existence/integrability criteria as a dict.
    fn criteria<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = stationary::criteria(&self.inner);
        let d = PyDict::new(py);
        d.set_item("c1_finite", c.c1_finite)?;
        d.set_item("c2_finite", c.c2_finite)?;
        d.set_item("c2_value", c.c2_value)?;
        d.set_item("ct_c2_finite", c.ct_c2_finite)?;
        Ok(d)
    }

    /// Discrete-time invariant measure on {0..xmax}.
    fn invariant_dt<'py>(&self, py: Python<'py>, xmax: u64) -> PyResult<Bound<'py, PyDict>> {
        pmf_to_dict(py, &err(stationary::invariant_dt(&self.inner, xmax))?)
    }

    /// Continuous-time invariant measure on {0..xmax}.
    fn invariant_ct<'py>(&self, py: Python<'py>, xmax: u64) -> PyResult<Bound<'py, PyDict>> {
        pmf_to_dict(py, &err(stationary::invariant_ct(&self.inner, xmax))?)
    }

    /// Stationary pgf E(z^X_inf) in the critical positive recurrent case.
    fn stationary_pgf(&self, z: f64) -> PyResult<f64> {
        err(stationary::stationary_pgf(&self.inner, z))
    }

    /// Law of the first return time to 0: P(tau = k), k = 1..=xmax+1.
    fn return_time_pmf<'py>(&self, py: Python<'py>, xmax: u64) -> PyResult<Bound<'py, PyDict>> {
        pmf_to_dict(py, &hitting::return_time_pmf(&self.inner, xmax))
    }

    /// Pgf of tau_00 (closed form in the critical case).
    fn return_time_pgf(&self, z: f64) -> PyResult<f64> {
        Ok(err(hitting::return_time_pgf(&self.inner, z))?.value)
    }

    /// E(tau_00): the closed form 1 + C2, or +inf.
    fn mean_return_time(&self) -> f64 {
        hitting::mean_return_time(&self.inner)
    }

    /// Scale (harmonic) function phi(x).
    fn scale_function(&self, x: u64) -> f64 {
        hitting::scale_function(&self.inner, x)
    }

    /// Excursion-height law: atom at 0 plus masses on {1..hmax}.
    fn height_law<'py>(&self, py: Python<'py>, hmax: u64) -> PyResult<Bound<'py, PyDict>> {
        let law = hitting::height_law(&self.inner, hmax);
        let d = PyDict::new(py);
        d.set_item("atom_at_zero", law.atom_at_zero)?;
        d.set_item("masses", pmf_to_dict(py, &law.masses)?)?;
        Ok(d)
    }

    /// P(ever hit 0 | start at x): 1 when recurrent.
    fn extinction_prob(&self, x: u64) -> f64 {
        hitting::extinction_prob(&self.inner, x)
    }

    /// Law of tau_{x,0} from x >= 1: P = q_{k+x-1} prod p, k = 1..=kmax.
    fn first_passage_down_pmf<'py>(
        &self,
        py: Python<'py>,
        x: u64,
        kmax: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        pmf_to_dict(py, &err(hitting::first_passage_down_pmf(&self.inner, x, kmax))?)
    }

    /// Coefficients of the Green kernel g_{x,y}(z): entry n is P^n(x,y).
    fn green_kernel(&self, x: u64, y: u64, order: usize) -> Vec<f64> {
        hitting::green_kernel(&self.inner, x, y, order).coeffs
    }

    /// Pgf of the first return time to state x.
    fn first_return_pgf_at(&self, x: u64, z: f64) -> PyResult<f64> {
        err(hitting::first_return_pgf_at(&self.inner, x, z))
    }

    /// Contact probabilities P_0(X_n = 0), n = 0..=nmax.
    fn contact_probability(&self, nmax: usize) -> Vec<f64> {
        hitting::contact_probability(&self.inner, nmax)
    }

    /// Asymptotic contact regime in the critical case, as a dict.
    fn contact_asymptote<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        match err(hitting::contact_asymptote(&self.inner))? {
            hitting::ContactAsymptote::PowerLaw { exponent, constant, source } => {
                d.set_item("regime", "power-law")?;
                d.set_item("exponent", exponent)?;
                d.set_item("constant", constant)?;
                d.set_item(
                    "constant_source",
                    match source {
                        hitting::ConstantSource::ClosedForm => "closed-form",
                        hitting::ConstantSource::SeriesEstimate => "series-estimate",
                    },
                )?;
            }
            hitting::ContactAsymptote::Logarithmic { constant } => {
                d.set_item("regime", "logarithmic")?;
                d.set_item("constant", constant)?;
            }
            hitting::ContactAsymptote::ConstantLimit { pi0 } => {
                d.set_item("regime", "constant")?;
                d.set_item("pi0", pi0)?;
            }
        }
        Ok(d)
    }

    /// P(tau_00 > t | H = h) for the CT chain.
    fn excursion_survival_given_height(&self, h: u64, t: f64) -> PyResult<f64> {
        err(ctmc::excursion_survival_given_height(&self.inner, h, t))
    }

    /// CT excursion tail: {"power_law": exponent} or
    /// {"exponential": mean_bound}.
    fn ct_excursion_tail<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        match err(ctmc::ct_excursion_tail_exponent(&self.inner))? {
            ctmc::CtExcursionTail::PowerLaw { exponent } => {
                d.set_item("power_law", exponent)?
            }
            ctmc::CtExcursionTail::Exponential { mean_bound } => {
                d.set_item("exponential", mean_bound)?
            }
        }
        Ok(d)
    }

    /// Explosion diagnostics for the CT chain.
    fn explosion_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = err(ctmc::explosion_report(&self.inner))?;
        let d = PyDict::new(py);
        d.set_item("explosive", r.explosive)?;
        d.set_item("rate_sum_converges", r.rate_sum_converges)?;
        d.set_item("rate_sum_limit", r.rate_sum_limit)?;
        d.set_item("rate_sum_partials", r.rate_sum_partials)?;
        d.set_item(
            "pre_drift_excursion_ratio",
            r.pre_drift_excursions.map(|g| g.ratio),
        )?;
        Ok(d)
    }

    /// Simulate `steps` discrete steps; returns a summary dict.
    #[pyo3(signature = (seed, steps, replications=1))]
    fn simulate_dt<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        steps: u64,
        replications: u32,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = mc::RunConfig::new(seed)
            .with_horizon(mc::Horizon::Steps(steps))
            .with_replications(replications);
        let run = mc::simulate_dt(&self.inner, &cfg);
        let heights: Vec<u64> = run.excursions().map(|e| e.height).collect();
        let lengths: Vec<u64> = run.excursions().map(|e| e.dt_length).collect();
        let d = PyDict::new(py);
        d.set_item("excursions", heights.len())?;
        d.set_item("heights", heights)?;
        d.set_item("dt_lengths", lengths)?;
        Ok(d)
    }

    /// Event-driven CT simulation up to `time` (with an event cap).
    #[pyo3(signature = (seed, time, max_events=10_000_000))]
    fn simulate_ct<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        time: f64,
        max_events: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = mc::RunConfig::new(seed)
            .with_horizon(mc::Horizon::Time(time))
            .with_max_events(max_events);
        let run = err(mc::simulate_ct(&self.inner, &cfg))?;
        let d = PyDict::new(py);
        d.set_item("elapsed", run.elapsed)?;
        d.set_item("events", run.events)?;
        d.set_item("final_state", run.final_state)?;
        d.set_item("stopped_by_event_cap", run.stop == mc::StopReason::MaxEventsReached)?;
        d.set_item("max_events_anomaly", run.max_events_anomaly)?;
        d.set_item(
            "ct_lengths",
            run.excursions.iter().map(|e| e.ct_length.unwrap()).collect::<Vec<f64>>(),
        )?;
        d.set_item(
            "heights",
            run.excursions.iter().map(|e| e.height).collect::<Vec<u64>>(),
        )?;
        Ok(d)
    }
}

/// Gauss hypergeometric 2F1(a,b;c;z) on [0,1].
#[pyfunction]
fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> PyResult<f64> {
    Ok(err(special::gauss_2f1(a, b, c, z))?.value)
}

/// Gauss summation 2F1(a,b;c;1) (requires c-a-b > 0).
#[pyfunction]
fn gauss_2f1_at_one(a: f64, b: f64, c: f64) -> PyResult<f64> {
    err(special::gauss_2f1_at_one(a, b, c))
}

/// Polylogarithm Li_alpha(z) on [0,1].
#[pyfunction]
fn polylog(alpha: f64, z: f64) -> PyResult<f64> {
    Ok(err(special::polylog(alpha, z))?.value)
}

/// Riemann zeta for alpha > 1.
#[pyfunction]
fn zeta(alpha: f64) -> PyResult<f64> {
    err(special::zeta(alpha))
}

/// L_nu(z) = sum_{n>=1} z^n/(nu+n).
#[pyfunction]
fn l_nu(nu: f64, z: f64) -> PyResult<f64> {
    Ok(err(special::l_nu(nu, z))?.value)
}

/// Extended Sibuya(alpha, nu) pmf at x >= 1.
#[pyfunction]
fn sibuya_pmf(alpha: f64, nu: f64, x: u64) -> PyResult<f64> {
    err(hitting::sibuya_pmf(alpha, nu, x))
}

/// Discrete Pareto(alpha) pmf at x >= 1.
#[pyfunction]
fn pareto_pmf(alpha: f64, x: u64) -> PyResult<f64> {
    err(hitting::pareto_pmf(alpha, x))
}

/// Zipf stationary moment E(Y^q) = zeta(alpha-q)/zeta(alpha).
#[pyfunction]
fn zipf_moment(alpha: f64, q: f64) -> PyResult<f64> {
    err(stationary::zipf_moment(alpha, q))
}

/// ID/SD classification of a pmf given as a list of masses from 0.
#[pyfunction]
#[pyo3(signature = (masses, n, tol=None))]
fn classify_divisibility<'py>(
    py: Python<'py>,
    masses: Vec<f64>,
    n: usize,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let table = stationary::PmfTable {
        support_start: 0,
        masses,
        normalized: true,
        tail_mass_bound: 0.0,
        defect: 0.0,
        provenance: stationary::Provenance::Analytic,
    };
    let v = err(divisibility::classify_divisibility(&table, n, tol))?;
    let d = PyDict::new(py);
    d.set_item("id", v.id)?;
    d.set_item("sd", v.sd)?;
    d.set_item("first_violation_index", v.first_violation_index)?;
    d.set_item("tolerance_used", v.tolerance_used)?;
    d.set_item("min_r", v.min_r)?;
    d.set_item("max_increase", v.max_increase)?;
    Ok(d)
}

/// Canonical sequence r_0..r_{n-1} of a pmf given as masses from 0.
#[pyfunction]
fn canonical_sequence(masses: Vec<f64>, n: usize) -> PyResult<Vec<f64>> {
    let table = stationary::PmfTable {
        support_start: 0,
        masses,
        normalized: true,
        tail_mass_bound: 0.0,
        defect: 0.0,
        provenance: stationary::Provenance::Analytic,
    };
    Ok(err(divisibility::canonical_sequence(&table, n))?.r)
}

/// Alternating-finite-difference complete monotonicity check of a tail.
#[pyfunction]
fn complete_monotonicity_check(tail: Vec<f64>, kmax: usize) -> (bool, Option<(usize, usize)>) {
    let r = divisibility::complete_monotonicity_check(&tail, kmax);
    (r.passes, r.first_violation)
}

/// Thinning remainder coefficients of phi(z)/phi(1-u(1-z)).
#[pyfunction]
fn thinning_remainder(masses: Vec<f64>, u: f64, n: usize) -> PyResult<Vec<f64>> {
    let table = stationary::PmfTable {
        support_start: 0,
        masses,
        normalized: true,
        tail_mass_bound: 0.0,
        defect: 0.0,
        provenance: stationary::Provenance::Analytic,
    };
    err(divisibility::thinning_remainder(&table, u, n))
}

/// Closed-form nu=1 special case: (pi0, id, sd) for alpha in (1,2).
#[pyfunction]
fn sibuya_special_case(alpha: f64, p0: f64) -> PyResult<(f64, bool, bool)> {
    let s = err(divisibility::sibuya_stationary_special_case(alpha, p0))?;
    Ok((s.pi0, s.id, s.sd))
}

#[pymodule]
fn disaster_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelSpec>()?;
    m.add_function(wrap_pyfunction!(gauss_2f1, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_2f1_at_one, m)?)?;
    m.add_function(wrap_pyfunction!(polylog, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(l_nu, m)?)?;
    m.add_function(wrap_pyfunction!(sibuya_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(zipf_moment, m)?)?;
    m.add_function(wrap_pyfunction!(classify_divisibility, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(complete_monotonicity_check, m)?)?;
    m.add_function(wrap_pyfunction!(thinning_remainder, m)?)?;
    m.add_function(wrap_pyfunction!(sibuya_special_case, m)?)?;
    Ok(())
}
