use std::f64::consts::PI;

use nlslab::evolution::{free_trajectory, linear_propagate};
use nlslab::potential::{admissibility, kato_norm, lhalf_norm};
use nlslab::randomization::randomize;
use nlslab::spacetime::{lateral_norm, x_norm, y_norm, NormConfig};
use nlslab::spectral::cutoff::CutoffProfile;
use nlslab::spectral::{directional_identity_residual, fattened_project, lebesgue_norm, lp_project};
use nlslab::{Complex64, GridSpec, PotentialSpec, RandomSeedPlan, SpectralField};
use proptest::prelude::*;

fn smooth_field(g: GridSpec, coeffs: &[(f64, f64)]) -> SpectralField {
    let modes = (0..g.len())
        .map(|j| {
            let xi = g.wavevector(j);
            let w = 1.0 / (1.0 + xi.iter().map(|x| x * x).sum::<f64>());
            let (re, im) = coeffs[j % coeffs.len()];
            Complex64::new(re, im) * w
        })
        .collect();
    SpectralField::from_modes(g, modes).unwrap()
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn grid2() -> GridSpec {
    GridSpec::new(2, 16, PI).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_on_round_trip(c in coeffs(256)) {
        let f = smooth_field(grid2(), &c);
        let modal: f64 = f.modes().iter().map(|z| z.norm_sqr()).sum::<f64>() * f.grid().cell_volume();
        prop_assert!(rel(modal, f.mass()) < 1e-12);
        let back = SpectralField::from_modes(*f.grid(), f.modes().to_vec()).unwrap();
        prop_assert!(back.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn unit_bumps_partition_unity(xi in prop::collection::vec(-20.0..20.0f64, 3)) {
        let c = CutoffProfile;
        let base: Vec<i64> = xi.iter().map(|x| x.round() as i64).collect();
        let mut sum = 0.0;
        for a in -2..=2 {
            for b in -2..=2 {
                for e in -2..=2 {
                    let k = [base[0] + a, base[1] + b, base[2] + e];
                    let shifted: Vec<f64> = xi.iter().zip(k).map(|(x, k)| x - k as f64).collect();
                    sum += c.psi(&shifted);
                }
            }
        }
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dyadic_pieces_partition_unity(log_r in -3.0..10.0f64) {
        let c = CutoffProfile;
        let r = 2f64.powf(log_r);
        let sum: f64 = (-6..=12).map(|j| c.lp_multiplier(r, 2f64.powi(j))).sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fattening_leaves_projection_fixed(c in coeffs(64), j in 0i32..3) {
        let f = smooth_field(grid2(), &c);
        let n = 2f64.powi(j);
        let p = lp_project(&f, n).into_field();
        let pp = lp_project(&fattened_project(&f, n), n).into_field();
        prop_assert!(pp.sub(&p).unwrap().l2_norm() <= 1e-10 * f.l2_norm().max(1e-300));
    }

    #[test]
    fn directional_identity(c in coeffs(64), j in 0i32..3) {
        let f = smooth_field(grid2(), &c);
        let r = directional_identity_residual(&f, 2f64.powi(j));
        prop_assert!(r.l2_norm() <= 1e-10 * f.l2_norm().max(1e-300));
    }

    #[test]
    fn randomization_is_linear(c1 in coeffs(64), c2 in coeffs(64), seed in any::<u64>()) {
        let g = grid2();
        let (f, h) = (smooth_field(g, &c1), smooth_field(g, &c2));
        let plan = RandomSeedPlan::gaussian(seed);
        let lhs = randomize(&f.add(&h).unwrap(), &plan);
        let rhs = randomize(&f, &plan).add(&randomize(&h, &plan)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-12 * (lhs.l2_norm() + 1.0));
        prop_assert_eq!(randomize(&f, &plan).into_values(), randomize(&f, &plan).into_values());
    }

    #[test]
    fn linear_flow_is_unitary(c in coeffs(64), steps in 0usize..200) {
        let f = smooth_field(grid2(), &c);
        let t = steps as f64 * 1e-2;
        let u = linear_propagate(&f, t, &PotentialSpec::default_well(2), 1e-2).unwrap();
        prop_assert!(rel(u.mass(), f.mass()) <= 1e-10 * t.max(1.0));
    }

    #[test]
    fn space_time_norms_are_subadditive(c1 in coeffs(32), c2 in coeffs(32)) {
        let g = grid2();
        let v = PotentialSpec::Zero;
        let a = free_trajectory(&smooth_field(g, &c1), &v, 1.0 / 16.0, 0.5).unwrap();
        let b = free_trajectory(&smooth_field(g, &c2), &v, 1.0 / 16.0, 0.5).unwrap();
        let s = a.add(&b).unwrap();
        let cfg = NormConfig::default();
        let slack = 1.0 + 1e-12;
        prop_assert!(x_norm(&s, &cfg).unwrap().total <= slack * (x_norm(&a, &cfg).unwrap().total + x_norm(&b, &cfg).unwrap().total));
        prop_assert!(y_norm(&s, &cfg).unwrap().total <= slack * (y_norm(&a, &cfg).unwrap().total + y_norm(&b, &cfg).unwrap().total));
        for (p, q, grad) in [(4.0, 2.0, false), (2.0, 4.0, true)] {
            let n = |t| lateral_norm(t, p, q, 1, grad).unwrap();
            prop_assert!(n(&s) <= slack * (n(&a) + n(&b)));
        }
    }

    #[test]
    fn potential_norms_homogeneous_and_subadditive(
        c1 in prop::collection::vec(-1.0..1.0f64, 64),
        c2 in prop::collection::vec(-1.0..1.0f64, 64),
        lambda in -3.0..3.0f64,
    ) {
        let g = GridSpec::new(3, 8, PI).unwrap();
        let tab = |c: &[f64]| {
            let vals: Vec<f64> = (0..g.len()).map(|j| c[j % c.len()]).collect();
            PotentialSpec::tabulated(SpectralField::from_real(g, &vals).unwrap()).unwrap()
        };
        let (v, w) = (tab(&c1), tab(&c2));
        let sum: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
        let scaled: Vec<f64> = c1.iter().map(|a| lambda * a).collect();
        let k = |p: &PotentialSpec| kato_norm(p, &g).unwrap();
        let l = |p: &PotentialSpec| lhalf_norm(p, &g).unwrap().full;
        prop_assert!(rel(k(&tab(&scaled)), lambda.abs() * k(&v)) < 1e-10 || lambda == 0.0);
        prop_assert!(rel(l(&tab(&scaled)), lambda.abs() * l(&v)) < 1e-10 || lambda == 0.0);
        prop_assert!(k(&tab(&sum)) <= (1.0 + 1e-12) * (k(&v) + k(&w)));
        prop_assert!(l(&tab(&sum)) <= (1.0 + 1e-12) * (l(&v) + l(&w)));
    }

    #[test]
    fn shrinking_the_negative_part_keeps_admissibility(
        c in prop::collection::vec(-1.0..0.2f64, 64),
        depth in 0.0..3.0f64,
        shrink in 0.0..1.0f64,
    ) {
        let g = GridSpec::new(3, 8, PI).unwrap();
        let tab = |s: f64| {
            let vals: Vec<f64> = (0..g.len()).map(|j| { let x = depth * c[j % c.len()]; if x < 0.0 { s * x } else { x } }).collect();
            PotentialSpec::tabulated(SpectralField::from_real(g, &vals).unwrap()).unwrap()
        };
        let before = admissibility(&tab(1.0), &g).unwrap().admissible;
        let after = admissibility(&tab(shrink), &g).unwrap().admissible;
        prop_assert!(!before || after);
    }
}

fn bernstein_slope(f: &SpectralField, r1: f64, r2: f64) -> (f64, f64) {
    let d = f.grid().dim() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 0..8 {
        let n = 2f64.powi(j);
        let p = lp_project(f, n);
        assert!(p.in_band);
        let p = p.into_field();
        let ratio = lebesgue_norm(&p, r2).unwrap() / (n.powf(d / r1 - d / r2) * lebesgue_norm(&p, r1).unwrap());
        xs.push(n.ln());
        ys.push(ratio.ln());
    }
    let (slope, _) = nlslab::randomization::linear_fit(&xs, &ys).unwrap();
    (slope, ys.iter().cloned().fold(f64::MIN, f64::max).exp())
}

#[test]
fn bernstein_exponent_across_two_decades() {
    let g = GridSpec::new(2, 512, PI).unwrap();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let noise = SpectralField::from_modes(g, (0..g.len()).map(|_| Complex64::new(next(), next())).collect()).unwrap();
    let delta = SpectralField::from_modes(g, vec![Complex64::new(1.0, 0.0); g.len()]).unwrap();
    for (r1, r2) in [(2.0, 4.0), (1.5, 6.0)] {
        // Concentrated data saturates the bound.
        let (slope, c_delta) = bernstein_slope(&delta, r1, r2);
        assert!(slope.abs() < 0.1, "delta slope {slope} for ({r1}, {r2})");
        // Spread-out data stays below it.
        let (slope, c_noise) = bernstein_slope(&noise, r1, r2);
        assert!(slope < 0.1 && c_noise <= c_delta, "noise slope {slope}, C {c_noise} > {c_delta}");
    }
}

#[test]
fn variance_identity_within_three_sigma() {
    let g = GridSpec::new(2, 32, 2.0 * PI).unwrap();
    let f = SpectralField::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 0.5).exp());
    let expected: f64 = nlslab::spectral::unit_lattice(&g).iter().map(|k| nlslab::spectral::unit_project(&f, &k[..2]).field.mass()).sum();
    let plan = RandomSeedPlan::gaussian(99);
    let n = 400;
    let samples: Vec<f64> = (0..n).map(|i| randomize(&f, &plan.sample(i)).mass()).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sigma = (var / n as f64).sqrt();
    assert!((mean - expected).abs() <= 3.0 * sigma, "mean {mean}, expected {expected}, sigma {sigma}");
}

#[test]
fn x_norm_nondecreasing_in_time() {
    let g = grid2();
    let f = smooth_field(g, &[(0.3, -0.2), (0.1, 0.5), (-0.4, 0.2)]);
    let tr = free_trajectory(&f, &PotentialSpec::default_well(2), 1.0 / 32.0, 1.0).unwrap();
    let cfg = NormConfig::default();
    let mut prev = 0.0;
    for j in 1..tr.len() {
        let x = x_norm(&tr.window(0, j).unwrap(), &cfg).unwrap().total;
        assert!(x >= prev * (1.0 - 1e-12), "X decreased at node {j}: {x} < {prev}");
        assert!(4 * j < tr.len() || x - prev <= 0.1 * x, "jump at node {j}: {prev} -> {x}");
        prev = x;
    }
}
