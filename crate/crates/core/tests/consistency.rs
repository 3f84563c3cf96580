//! Cross-module consistency checks and property tests for the spec-level
//! invariants that tie the analytic machinery together.

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use disaster_core::hitting::{height_law, mean_return_time, return_time_pmf, scale_function};
use disaster_core::mc::{
    sample_excursions_dt, simulate_ct, simulate_dt, Horizon, RunConfig,
};
use disaster_core::model::ModelSpec;
use disaster_core::stationary::invariant_dt;

#[test]
fn renewal_identity_pi_equals_return_tail_over_mu() {
    for spec in [
        ModelSpec::model_a(1.7, 1.0, 1.2, 0.9).unwrap(),
        ModelSpec::model_b(2.2, 1.0, 0.6).unwrap(),
        ModelSpec::model_a(0.8, 0.5, 0.3, 0.7).unwrap(),
    ] {
        let mu = mean_return_time(&spec);
        let pi = invariant_dt(&spec, 500).unwrap();
        let pmf = return_time_pmf(&spec, 501);
        let mut survival = 1.0;
        for x in 0..=500u64 {
            if x > 0 {
                survival -= pmf.mass(x);
            }
            assert!(
                (pi.mass(x) - survival / mu).abs() < 1e-10,
                "x={x}: {} vs {}",
                pi.mass(x),
                survival / mu
            );
        }
    }
}

#[test]
fn time_reversal_has_leslie_structure() {
    // The reversed kernel P~ = D_pi^-1 P' D_pi has first row
    // P~(0,x) = q_x prod_{y<x} p_y (the excursion height law, shifted) and
    // ones on the subdiagonal.
    let spec = ModelSpec::model_b(2.0, 1.0, 0.7).unwrap();
    let n = 120usize;
    let pi = invariant_dt(&spec, n as u64 + 1).unwrap();
    let law = height_law(&spec, n as u64);
    // P'(x, y) pi_y / pi_x with P(y, x) entries of the forward chain.
    for x in 0..n {
        // Row x of the reversed chain: P~(x, y) = P(y, x) pi_y / pi_x.
        for y in 0..n {
            let forward = if x == 0 {
                spec.disaster_prob(y as u64) // P(y, 0) = q_y
            } else if y + 1 == x {
                spec.growth_prob(y as u64) // P(y, y+1) = p_y
            } else {
                0.0
            };
            let reversed = forward * pi.mass(y as u64) / pi.mass(x as u64);
            if x == 0 {
                // First row: q_y pi_y / pi_0 = q_y prod_{j<y} p_j = P(H=y).
                let want = if y == 0 { law.atom_at_zero } else { law.masses.mass(y as u64) };
                assert!(
                    (reversed - want).abs() < 1e-12,
                    "reversed(0,{y}) = {reversed} vs height mass {want}"
                );
            } else if y + 1 == x {
                assert!(
                    (reversed - 1.0).abs() < 1e-12,
                    "reversed({x},{y}) = {reversed}, want 1"
                );
            } else {
                assert_eq!(reversed, 0.0);
            }
        }
    }
}

#[test]
fn ct_and_dt_excursion_heights_agree_in_distribution() {
    // Two-sample chi-square on height histograms; the time substitution
    // leaves the height law unchanged. Not rejected at the 1% level.
    let spec = ModelSpec::model_a(1.6, 1.0, 1.0, 0.8).unwrap();
    let spec_ct = spec.clone().with_ct(0.7, 1.3).unwrap();
    let ct = simulate_ct(
        &spec_ct,
        &RunConfig::new(41).with_horizon(Horizon::Time(400_000.0)),
    )
    .unwrap();
    let heights_ct: Vec<u64> = ct.excursions.iter().map(|e| e.height).collect();
    let dt = sample_excursions_dt(&spec, 42, heights_ct.len() as u64);
    let heights_dt: Vec<u64> = dt.iter().map(|e| e.height).collect();
    // Bins 0..=8 and 9+.
    let bins = 10usize;
    let mut o1 = vec![0.0f64; bins];
    let mut o2 = vec![0.0f64; bins];
    for &h in &heights_ct {
        o1[(h as usize).min(bins - 1)] += 1.0;
    }
    for &h in &heights_dt {
        o2[(h as usize).min(bins - 1)] += 1.0;
    }
    let (n1, n2) = (heights_ct.len() as f64, heights_dt.len() as f64);
    let mut chi2 = 0.0;
    let mut dof = 0;
    for b in 0..bins {
        let tot = o1[b] + o2[b];
        if tot < 10.0 {
            continue;
        }
        let e1 = tot * n1 / (n1 + n2);
        let e2 = tot * n2 / (n1 + n2);
        chi2 += (o1[b] - e1).powi(2) / e1 + (o2[b] - e2).powi(2) / e2;
        dof += 1;
    }
    let dist = ChiSquared::new((dof - 1) as f64).unwrap();
    let p = 1.0 - dist.cdf(chi2);
    assert!(p > 0.01, "two-sample chi2 = {chi2} (dof {dof}), p = {p}");
}

#[test]
fn simulated_visits_match_green_kernel_coefficients() {
    // P^n(0, y) from the Green kernel equals the empirical law of X_n.
    let spec = ModelSpec::model_b(1.5, 1.0, 0.8).unwrap();
    let n_step = 7usize;
    let reps = 200_000u32;
    let run = simulate_dt(
        &spec,
        &RunConfig::new(4242)
            .with_horizon(Horizon::Steps(n_step as u64))
            .with_replications(reps),
    );
    let mut counts = vec![0.0f64; n_step + 2];
    for t in &run.trajectories {
        counts[t.final_state as usize] += 1.0;
    }
    for y in 0..=n_step as u64 {
        let want = disaster_core::hitting::green_kernel(&spec, 0, y, n_step).coeff(n_step);
        let got = counts[y as usize] / reps as f64;
        let se = (want * (1.0 - want) / reps as f64).sqrt();
        assert!(
            (got - want).abs() <= 4.0 * se.max(1e-5),
            "P^{n_step}(0,{y}): {got} vs {want}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_complement_and_monotone(
        alpha in 0.1f64..2.0,
        beta in 0.1f64..3.0,
        nu_extra in 0.0f64..2.0,
        p0 in 0.05f64..1.0,
        x in 1u64..10_000,
    ) {
        // Model A requires alpha <= nu + 1.
        let nu = (alpha - 1.0).max(-0.9) + nu_extra + 1e-6;
        let a = ModelSpec::model_a(alpha, beta, nu, p0).unwrap();
        let b = ModelSpec::model_b(alpha, beta, p0).unwrap();
        for spec in [a, b] {
            prop_assert_eq!(spec.growth_prob(x) + spec.disaster_prob(x), 1.0);
            prop_assert!(spec.disaster_prob(x + 1) < spec.disaster_prob(x));
        }
    }

    #[test]
    fn telescoping_and_duality(
        alpha in 0.2f64..1.9,
        p0 in 0.1f64..1.0,
        hmax in 2u64..200,
    ) {
        let spec = ModelSpec::model_b(alpha, 1.0, p0).unwrap();
        let pmf = return_time_pmf(&spec, hmax);
        let mut partial = 0.0f64;
        let mut prod = 1.0f64;
        for x in 0..=hmax {
            partial += pmf.mass(x + 1);
            prod *= spec.growth_prob(x);
            prop_assert!((partial - (1.0 - prod)).abs() < 1e-12);
        }
        let law = height_law(&spec, hmax);
        for h in 1..=hmax {
            let resid = law.log_survival(h) + scale_function(&spec, h).ln();
            prop_assert!(resid.abs() < 1e-12);
        }
    }

    #[test]
    fn classification_ignores_time_scale(
        beta in 0.2f64..2.5,
        alpha in 0.2f64..1.9,
        r0 in 0.01f64..50.0,
        lambda in -2.0f64..3.0,
    ) {
        let base = ModelSpec::model_b(alpha, beta, 1.0).unwrap();
        let scaled = base.clone().with_ct(lambda, r0).unwrap();
        let also = base.clone().with_ct(lambda, r0 * 17.0).unwrap();
        // r0 never matters.
        prop_assert_eq!(scaled.classify(), also.classify());
        if (beta - 1.0).abs() > 1e-9 {
            // lambda matters only on the critical line.
            let other = base.clone().with_ct(lambda - 1.5, r0).unwrap();
            prop_assert_eq!(scaled.classify().recurrence, other.classify().recurrence);
        }
    }

    #[test]
    fn pmf_tables_are_nonnegative_and_account_mass(
        alpha in 1.1f64..2.5,
        p0 in 0.2f64..1.0,
    ) {
        let spec = ModelSpec::model_b(alpha, 1.0, p0).unwrap();
        let t = invariant_dt(&spec, 300).unwrap();
        prop_assert!(t.masses.iter().all(|&m| m >= 0.0));
        let total = t.total_tabulated() + t.tail_mass_bound + t.defect;
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
        let r = return_time_pmf(&spec, 300);
        let total = r.total_tabulated() + r.tail_mass_bound + r.defect;
        prop_assert!((total - 1.0).abs() < 1e-9, "return total {}", total);
    }
}
