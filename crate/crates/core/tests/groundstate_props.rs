use std::f64::consts::PI;

use nlslab::groundstate::{
    a_zero, f_aux, gn_constant_estimate, gn_quotient, minimize_local, rho_max, EnergyFunctional, InequalityConstants,
    OptimizerSettings,
};
use nlslab::{GridSpec, PotentialSpec, SpectralField};
use proptest::prelude::*;

/// Quotient of the one-dimensional quartic extremal `sqrt(2) sech x`:
/// `||Q||_4^4 = 16/3`, `||Q||_2^2 = 4`, `||Q'||_2^2 = 4/3`, with `beta = 1/4`.
fn sech_quotient() -> f64 {
    (16.0f64 / 3.0).powf(0.25) / ((4.0f64 / 3.0).powf(0.125) * 4.0f64.powf(0.375))
}

#[test]
fn one_dimensional_quartic_constant() {
    let g = GridSpec::new(1, 512, 16.0 * PI).unwrap();
    let exact = sech_quotient();
    let sampled = SpectralField::from_real_fn(g, |x| 2f64.sqrt() / x[0].cosh());
    assert!((gn_quotient(&sampled, 4.0).unwrap() - exact).abs() < 1e-10);
    let est = gn_constant_estimate(1, 4.0, &g).unwrap();
    assert!(est.converged && !est.diverged);
    assert!((est.lower_bound - exact).abs() < 1e-4 * exact, "{} vs {exact}", est.lower_bound);
    assert!(est.lower_bound <= exact * (1.0 + 1e-9));
}

fn constants() -> InequalityConstants {
    InequalityConstants::new(3, 2.5, 7.25, 0.70).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_max_is_stationary(log_a in -6.0..6.0f64, vneg in 0.0..2.0f64) {
        let c = constants();
        let a = 10f64.powf(log_a);
        let r = rho_max(a, &c);
        let h = 1e-4 * r;
        let (lo, mid, hi) = (f_aux(a, r - h, &c, vneg), f_aux(a, r, &c, vneg), f_aux(a, r + h, &c, vneg));
        let slope = (hi - lo) / (2.0 * h);
        let curvature = (hi - 2.0 * mid + lo) / (h * h);
        prop_assert!(slope.abs() * r <= 1e-6 * (mid.abs() + 1.0), "slope {slope}");
        prop_assert!(curvature < 0.0);
    }

    #[test]
    fn a_zero_is_the_root(vneg in 0.0..3.0f64) {
        let c = constants();
        let g = a_zero(&c, vneg);
        prop_assume!(g.a0 > 0.0);
        let top = |a: f64| f_aux(a, rho_max(a, &c), &c, vneg);
        prop_assert!(top(g.a0).abs() < 1e-12);
        prop_assert!(top(0.99 * g.a0) > 0.0 && top(1.01 * g.a0) < 0.0);
    }
}

#[test]
fn accepted_steps_never_raise_the_energy() {
    let g = GridSpec::new(3, 16, 6.0).unwrap();
    let v = PotentialSpec::default_well(3);
    let opts = OptimizerSettings { log_every: 1, tol: 1e-8, ..OptimizerSettings::default() };
    let res = minimize_local(0.5, &constants(), &v, &g, &opts, 3).unwrap();
    assert!(res.converged);
    for w in res.energy_log.windows(2) {
        let scale = w[0].1.abs().max(1.0);
        assert!(w[1].1 <= w[0].1 + 1e-12 * scale, "energy rose from {} to {} at {}", w[0].1, w[1].1, w[1].0);
    }
    let func = EnergyFunctional::new(&v, &g, 2.5, true).unwrap();
    assert!((func.energy(&res.u_a) - res.m_a).abs() <= 1e-12 * res.m_a.abs());
    assert!((res.u_a.mass() - 0.5).abs() <= 1e-10);
}
