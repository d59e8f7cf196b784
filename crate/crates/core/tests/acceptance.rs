//! Acceptance suite: one line per criterion, nonzero exit status on any failure.
//!
//! Run a subset with `cargo test -p nlslab-core --test acceptance -- 3 5`.

use std::f64::consts::PI;
use std::time::Instant;

use nlslab::evolution::{energy, free_trajectory, mass, nls_final, Scheme};
use nlslab::groundstate::{
    a_zero, f_aux, gn_constant_estimate, gn_quotient, lower_bound_gap, minimize_local, rho_max,
    sobolev_constant_estimate, sobolev_quotient, vneg_norm, EnergyFunctional, GroundStateResult,
    InequalityConstants, OptimizerSettings,
};
use nlslab::picard::{picard_solve, smallness_gate, PicardConfig};
use nlslab::randomization::{moment_estimate, randomize, tail_report, tail_samples};
use nlslab::spacetime::{
    lateral_norm, mixed_strichartz_norm, trilinear_ratio, x_norm, y_norm, NormConfig, TrilinearBands,
};
use nlslab::spectral::{directional_identity_residual, lp_project, unit_lattice, unit_project};
use nlslab::stability::{stability_experiment, standing_wave_trace, PerturbationSpec, StabilitySettings};
use nlslab::{Complex64, EvolveConfig, GridSpec, PotentialSpec, RandomSeedPlan, SpectralField, TrajectorySeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

fn gaussian(g: GridSpec, width: f64) -> SpectralField {
    SpectralField::from_real_fn(g, |x| (-x.iter().map(|t| t * t).sum::<f64>() / (2.0 * width * width)).exp())
}

fn random_band_limited(g: GridSpec, kmax: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let modes = (0..g.len())
        .map(|j| {
            let xi = g.wavevector(j);
            let r = xi.iter().map(|t| t * t).sum::<f64>().sqrt();
            let idx = g.unflatten(j);
            if r <= kmax && !(0..g.dim()).any(|a| g.is_nyquist_index(idx[a])) {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    SpectralField::from_modes(g, modes).unwrap()
}

fn criterion_1() -> Outcome {
    let g = GridSpec::new(2, 32, PI).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_band_limited(g, 10.0, &mut rng);
    let mode_mass: f64 = f.modes().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell_volume();
    let parseval = (mode_mass - f.mass()).abs() / f.mass();
    let back = SpectralField::from_modes(g, f.modes().to_vec()).unwrap();
    let round_trip = rel_diff(&back, &f);

    let mut acc = SpectralField::zeros(g);
    for k in unit_lattice(&g) {
        acc = acc.add(&unit_project(&f, &k).field).unwrap();
    }
    let unit_sum = acc.sub(&f).unwrap().max_abs() / f.max_abs();

    let f0 = f.apply_multiplier(|xi| if xi.iter().all(|&x| x == 0.0) { 0.0 } else { 1.0 });
    let mut acc = SpectralField::zeros(g);
    for n in g.dyadic_band() {
        acc = acc.add(&lp_project(&f0, n).field).unwrap();
    }
    let dyadic_sum = acc.sub(&f0).unwrap().max_abs() / f0.max_abs();

    let directional = g
        .dyadic_band()
        .into_iter()
        .map(|n| directional_identity_residual(&f, n).max_abs() / f.max_abs())
        .fold(0.0, f64::max);
    let pass = parseval <= 1e-12 && round_trip <= 1e-12 && unit_sum <= 1e-10 && dyadic_sum <= 1e-10 && directional <= 1e-10;
    Ok((
        pass,
        format!(
            "parseval {parseval:.1e}, round trip {round_trip:.1e}, sum P_k {unit_sum:.1e}, sum P_N {dyadic_sum:.1e}, directional {directional:.1e}"
        ),
    ))
}

fn criterion_2() -> Outcome {
    let g = GridSpec::new(2, 64, 8.0).map_err(|e| e.to_string())?;
    let v = PotentialSpec::default_well(2);
    let u0 = SpectralField::from_fn(g, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        Complex64::from_polar(0.5 * (-r2 / 2.0).exp(), 0.5 * x[0])
    });
    let cfg = EvolveConfig::cubic(1e-3);
    let u1 = nls_final(&u0, &cfg, &v, 1.0).map_err(|e| e.to_string())?;
    let m_drift = (mass(&u1) - mass(&u0)).abs() / mass(&u0);
    let e0 = energy(&u0, &cfg, &v).map_err(|e| e.to_string())?;
    let e1 = energy(&u1, &cfg, &v).map_err(|e| e.to_string())?;
    let e_drift = (e1 - e0).abs() / e0.abs();
    let half = nls_final(&u0, &EvolveConfig::cubic(5e-4), &v, 1.0).map_err(|e| e.to_string())?;
    let quarter = nls_final(&u0, &EvolveConfig::cubic(2.5e-4), &v, 1.0).map_err(|e| e.to_string())?;
    let ratio = u1.sub(&half).unwrap().l2_norm() / half.sub(&quarter).unwrap().l2_norm();
    let pass = m_drift <= 1e-8 && e_drift <= 1e-6 && (3.5..=4.5).contains(&ratio);
    Ok((pass, format!("mass drift {m_drift:.1e}, energy drift {e_drift:.1e}, order ratio {ratio:.3}")))
}

struct VariationalSetup {
    grid: GridSpec,
    v: PotentialSpec,
    consts: InequalityConstants,
    vneg: f64,
    a0: f64,
    rho0: f64,
}

fn variational_setup() -> Result<VariationalSetup, String> {
    let grid = GridSpec::new(3, 48, 8.0 * PI).map_err(|e| e.to_string())?;
    let gn = gn_constant_estimate(3, 2.5, &grid).map_err(|e| e.to_string())?;
    let sob = sobolev_constant_estimate(3, &grid).map_err(|e| e.to_string())?;
    let consts = InequalityConstants::from_estimates(&gn, &sob).map_err(|e| e.to_string())?;
    let v = PotentialSpec::default_well(3);
    let vneg = vneg_norm(&v, &grid).map_err(|e| e.to_string())?;
    let z = a_zero(&consts, vneg);
    println!(
        "  constants: GN {:.6} (raw {:.6}), Sobolev {:.6} (raw {:.6}), |V_-| {:.4}, K {:.6}, a0 {:.4}, rho0 {:.4}",
        consts.gn_c, gn.lower_bound, consts.sobolev_s, sob.value, vneg, z.k, z.a0, z.rho0
    );
    Ok(VariationalSetup { grid, v, consts, vneg, a0: z.a0, rho0: z.rho0 })
}

fn brute_max(a: f64, s: &VariationalSetup) -> (f64, f64) {
    let n = 200_000;
    (0..=n)
        .map(|i| {
            let rho = 10f64.powf(-8.0 + 16.0 * i as f64 / n as f64);
            (rho, f_aux(a, rho, &s.consts, s.vneg))
        })
        .fold((0.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
}

fn criterion_3(s: &VariationalSetup) -> Outcome {
    let mut worst_rho = 0.0f64;
    for a in [0.1 * s.a0, 0.5 * s.a0, s.a0, 3.0 * s.a0] {
        let (rho_b, _) = brute_max(a, s);
        worst_rho = worst_rho.max((rho_b - rho_max(a, &s.consts)).abs() / rho_max(a, &s.consts));
    }
    let at_root = f_aux(s.a0, rho_max(s.a0, &s.consts), &s.consts, s.vneg);
    let below = brute_max(0.5 * s.a0, s).1;
    let at = brute_max(s.a0, s).1;
    let above = brute_max(2.0 * s.a0, s).1;
    let pass = worst_rho <= 1e-3 && at_root.abs() <= 1e-8 && below > 0.0 && at.abs() <= 1e-8 && above < 0.0;
    Ok((
        pass,
        format!(
            "rho_a rel err {worst_rho:.1e}, f(a0, rho0) {at_root:.1e}, max f at a0/2 {below:.4}, a0 {at:.1e}, 2a0 {above:.4}"
        ),
    ))
}

fn inequality_corpus_field(g: GridSpec, rng: &mut ChaCha8Rng) -> SpectralField {
    let width = rng.random_range(1.5..4.0);
    let amp = 10f64.powf(rng.random_range(-1.5..0.5));
    let centre: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
    let waves: Vec<([f64; 3], f64, f64)> = (0..3)
        .map(|_| {
            let k = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            (k, rng.random_range(-0.5..0.5), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    let drift = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    SpectralField::from_fn(g, |x| {
        let r2: f64 = (0..3).map(|a| (x[a] - centre[a]).powi(2)).sum();
        let modulation: f64 =
            1.0 + waves.iter().map(|(k, b, ph)| b * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos()).sum::<f64>();
        let phase = drift[0] * x[0] + drift[1] * x[1] + drift[2] * x[2];
        Complex64::from_polar(amp * (-r2 / (2.0 * width * width)).exp() * modulation, phase)
    })
}

fn criterion_4(s: &VariationalSetup) -> Outcome {
    let func = EnergyFunctional::new(&s.v, &s.grid, s.consts.q, true).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut gn_bad, mut sob_bad, mut l83_bad) = (0, 0, 0);
    let (mut gn_max, mut sob_min, mut gap_min) = (0.0f64, f64::INFINITY, f64::INFINITY);
    for _ in 0..1000 {
        let u = inequality_corpus_field(s.grid, &mut rng);
        let gq = gn_quotient(&u, s.consts.q).map_err(|e| e.to_string())?;
        let sq = sobolev_quotient(&u).map_err(|e| e.to_string())?;
        let gap = lower_bound_gap(&func, &u, &s.consts, s.vneg);
        gn_max = gn_max.max(gq);
        sob_min = sob_min.min(sq);
        gap_min = gap_min.min(gap);
        gn_bad += usize::from(gq > s.consts.gn_c);
        sob_bad += usize::from(sq < s.consts.sobolev_s);
        l83_bad += usize::from(gap < 0.0);
    }
    Ok((
        gn_bad + sob_bad + l83_bad == 0,
        format!(
            "violations GN {gn_bad}, Sobolev {sob_bad}, lower bound {l83_bad}; max GN quotient {gn_max:.4}, min Sobolev quotient {sob_min:.4}, min gap {gap_min:.2e}"
        ),
    ))
}

fn criterion_5(s: &VariationalSetup) -> Result<((bool, String), GroundStateResult), String> {
    let a = s.a0 / 4.0;
    let opts = OptimizerSettings::default();
    let runs: Vec<GroundStateResult> = [1u64, 2, 3]
        .iter()
        .map(|&seed| minimize_local(a, &s.consts, &s.v, &s.grid, &opts, seed))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let best = runs.iter().min_by(|x, y| x.m_a.total_cmp(&y.m_a)).unwrap().clone();
    let spread = runs.iter().map(|r| r.m_a).fold(f64::NEG_INFINITY, f64::max) - best.m_a;
    let worst_res = runs.iter().map(|r| r.residual).fold(0.0, f64::max);
    let all_conv = runs.iter().all(|r| r.converged);
    let half = minimize_local(a / 2.0, &s.consts, &s.v, &s.grid, &opts, 1).map_err(|e| e.to_string())?;
    let sub = best.m_a - 2.0 * half.m_a;
    let mass_err = (best.u_a.mass() - a).abs() / a;
    let pass = all_conv
        && worst_res <= 1e-6
        && best.m_a < 0.0
        && best.lambda < 0.0
        && best.grad_norm_sq < s.rho0
        && spread <= 1e-4
        && sub <= 2.0 * opts.tol
        && mass_err <= 1e-10
        && half.converged;
    Ok((
        (
            pass,
            format!(
                "a {a:.4}, m {:.8}, lambda {:.6}, |grad u|^2 {:.4} < rho0 {:.4}, residual {worst_res:.1e}, spread {spread:.1e}, m(a) - 2m(a/2) {sub:.4}",
                best.m_a, best.lambda, best.grad_norm_sq, s.rho0
            ),
        ),
        best,
    ))
}

fn criterion_6(s: &VariationalSetup, gs: &GroundStateResult) -> Outcome {
    let cfg = EvolveConfig::mixed(0.025, s.consts.q, true).with_scheme(Scheme::Yoshida4).with_snapshot_every(8);
    let standing = standing_wave_trace(gs, 10.0, &cfg, &s.v, 1e-6).map_err(|e| e.to_string())?;
    let delta = 1e-3;
    let settings = StabilitySettings::default();
    let mut worst = 0.0f64;
    let mut within = 0;
    for i in 0..20u64 {
        let tr = stability_experiment(gs, &PerturbationSpec::deterministic_h1(i, delta), 10.0, &cfg, &s.v, &settings)
            .map_err(|e| e.to_string())?;
        worst = worst.max(tr.max_dist());
        within += usize::from(tr.stayed_within());
    }
    let pass = within == 20 && standing.max_dist() <= 1e-6;
    Ok((
        pass,
        format!(
            "{within}/20 within budget {:.0e}, worst orbit distance {worst:.2e}, standing wave drift {:.2e}",
            delta * settings.budget_factor,
            standing.max_dist()
        ),
    ))
}

fn criterion_7() -> Outcome {
    let g = GridSpec::new(4, 16, 2.0 * PI).map_err(|e| e.to_string())?;
    let cfg = PicardConfig { tol: 1e-14, ..PicardConfig::default() };
    let ncfg = NormConfig::default();
    let v = PotentialSpec::default_well(4);
    let rough = randomize(&gaussian(g, 0.6), &RandomSeedPlan::gaussian(7));
    let smooth = gaussian(g, 1.0);
    let unit_forcing = free_trajectory(&rough, &v, cfg.dt, cfg.horizon).map_err(|e| e.to_string())?;
    let unit_gate = smallness_gate(&smooth, &unit_forcing, &v, &cfg, &ncfg).map_err(|e| e.to_string())?;
    let scale = 0.9 * cfg.delta / 10.0 / unit_gate.sum();
    let f_omega = rough.scale_real(scale);
    let v0 = smooth.scale_real(scale);
    let forcing = unit_forcing.scale_real(scale);
    let res = picard_solve(&v0, &forcing, &v, &cfg, Some(&ncfg)).map_err(|e| e.to_string())?;
    let gate = res.gate.expect("gate requested").sum();
    let oracle_cfg = EvolveConfig::cubic(cfg.dt / 8.0).with_scheme(Scheme::Yoshida4).with_sign(cfg.sign);
    let oracle = nls_final(&f_omega.add(&v0).unwrap(), &oracle_cfg, &v, cfg.horizon).map_err(|e| e.to_string())?;
    let err = rel_diff(res.u.last(), &oracle);
    let max_factor = res.contraction_factors.iter().copied().fold(0.0, f64::max);
    let pass = res.converged && gate <= cfg.delta / 10.0 && max_factor <= 0.5 && res.residual <= 2.0 * cfg.tol && err <= 1e-4;
    Ok((
        pass,
        format!(
            "gate {gate:.2e}, iterations {}, max contraction {max_factor:.1e}, residual {:.1e}, oracle rel L2 {err:.1e}",
            res.increments.len(),
            res.residual
        ),
    ))
}

fn criterion_8() -> Outcome {
    let coeffs: Vec<Complex64> = (0..64).map(|n| Complex64::new(1.0 / (1.0 + n as f64), 0.3 / (2.0 + n as f64))).collect();
    let plan = RandomSeedPlan::gaussian(8);
    let mut ratios = Vec::new();
    for p in [2.0, 4.0, 8.0, 16.0] {
        ratios.push(moment_estimate(&coeffs, p, 10_000, &plan).map_err(|e| e.to_string())?.ratio);
    }
    let bound = 1.0;
    let moments_ok = ratios.iter().all(|&r| r > 0.0 && r <= bound);

    let g = GridSpec::new(2, 32, 2.0 * PI).map_err(|e| e.to_string())?;
    let ncfg = NormConfig::default();
    let base = gaussian(g, 0.5);
    let samples = tail_samples(
        &base,
        |f| Ok(y_norm(&free_trajectory(f, &PotentialSpec::Zero, 1.0 / 64.0, 0.5)?, &ncfg)?.total),
        500,
        &RandomSeedPlan::gaussian(80),
    )
    .map_err(|e| e.to_string())?;
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
    let lambdas: Vec<f64> = (0..8).map(|i| q(0.5 + 0.45 * i as f64 / 7.0)).collect();
    let tail = tail_report(&samples, &lambdas);
    let pass = moments_ok && !tail.degenerate && tail.fitted_slope < 0.0 && tail.r_squared >= 0.9;
    Ok((
        pass,
        format!(
            "moment ratios {:?} <= {bound}, tail slope {:.3e}, R^2 {:.4}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            tail.fitted_slope,
            tail.r_squared
        ),
    ))
}

fn random_trajectory(g: GridSpec, seed: u64, dt: f64) -> nlslab::Result<TrajectorySeries> {
    let f = randomize(&gaussian(g, 0.3), &RandomSeedPlan::gaussian(seed));
    free_trajectory(&f, &PotentialSpec::default_well(2), dt, 0.5)
}

fn aggregate(parts: &[f64], r: f64) -> f64 {
    let m = parts.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * parts.iter().map(|p| (p / m).powf(r)).sum::<f64>().powf(1.0 / r)
}

fn criterion_9() -> Outcome {
    let g = GridSpec::new(2, 32, 2.0 * PI).map_err(|e| e.to_string())?;
    let ncfg = NormConfig::default();
    let e = |x: nlslab::NlsError| x.to_string();
    let tr = random_trajectory(g, 91, 1.0 / 64.0).map_err(e)?;
    let mut fubini = 0.0f64;
    for p in [2.0, 3.0, 4.0, 6.0] {
        let a = lateral_norm(&tr, p, p, 1, false).map_err(e)?;
        let b = mixed_strichartz_norm(&tr, p, p).map_err(e)?;
        fubini = fubini.max((a - b).abs() / b);
    }

    let mut divisible = true;
    let mut margin = f64::INFINITY;
    for seed in [92u64, 93, 94] {
        let tr = random_trajectory(g, seed, 1.0 / 64.0).map_err(e)?;
        let parts = tr.split(4).map_err(e)?;
        let mut check = |whole: f64, pieces: Vec<f64>, r: f64| {
            let agg = aggregate(&pieces, r);
            margin = margin.min(whole / agg);
            divisible &= agg <= whole * (1.0 + 1e-12);
        };
        let r = 4.0 / ncfg.eps;
        check(
            x_norm(&tr, &ncfg).map_err(e)?.total,
            parts.iter().map(|p| x_norm(p, &ncfg).map(|n| n.total)).collect::<Result<_, _>>().map_err(e)?,
            r,
        );
        check(
            y_norm(&tr, &ncfg).map_err(e)?.total,
            parts.iter().map(|p| y_norm(p, &ncfg).map(|n| n.total)).collect::<Result<_, _>>().map_err(e)?,
            r,
        );
        for (p, q) in [(4.0, 2.0), (2.0, 4.0), (3.0, 6.0)] {
            for grad in [false, true] {
                check(
                    lateral_norm(&tr, p, q, 1, grad).map_err(e)?,
                    parts.iter().map(|s| lateral_norm(s, p, q, 1, grad)).collect::<Result<_, _>>().map_err(e)?,
                    f64::max(p, q),
                );
            }
        }
    }

    let bands = TrilinearBands { n: 4.0, n1: 8.0, n2: 4.0, n3: 2.0 };
    let mut worst_change = 0.0f64;
    let mut finite = true;
    let mut ratios = Vec::new();
    for case in 1..=8u8 {
        let mut pair = Vec::new();
        for dt in [1.0 / 64.0, 1.0 / 128.0] {
            let a = random_trajectory(g, 95, dt).map_err(e)?;
            let b = random_trajectory(g, 96, dt).map_err(e)?;
            let c = random_trajectory(g, 97, dt).map_err(e)?;
            let out = trilinear_ratio(&a, &b, &c, bands, case, 1, &ncfg).map_err(e)?;
            let r = out.ratio.unwrap_or(f64::NAN);
            finite &= r.is_finite() && r > 0.0;
            pair.push(r);
        }
        worst_change = worst_change.max((pair[1] / pair[0] - 1.0).abs());
        ratios.push(pair[1]);
    }
    let pass = fubini <= 1e-10 && divisible && finite && worst_change <= 0.2;
    Ok((
        pass,
        format!(
            "Fubini {fubini:.1e}, divisibility {} (min whole/aggregate {margin:.4}), trilinear ratios {:?}, max change under dt-halving {:.1}%",
            if divisible { "holds" } else { "fails" },
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            100.0 * worst_change
        ),
    ))
}

fn report(id: usize, title: &str, started: Instant, outcome: Outcome) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok((pass, detail)) => {
            println!("criterion {id} [{title}]: {} ({secs:.1}s) {detail}", if pass { "PASS" } else { "FAIL" });
            pass
        }
        Err(msg) => {
            println!("criterion {id} [{title}]: FAIL ({secs:.1}s) error: {msg}");
            false
        }
    }
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |i: usize| selected.is_empty() || selected.contains(&i);
    let mut all = true;

    if want(1) {
        all &= report(1, "spectral identities", Instant::now(), criterion_1());
    }
    if want(2) {
        all &= report(2, "conservation", Instant::now(), criterion_2());
    }
    if [3, 4, 5, 6].iter().any(|&i| want(i)) {
        let t = Instant::now();
        match variational_setup() {
            Ok(setup) => {
                if want(3) {
                    all &= report(3, "variational constants", Instant::now(), criterion_3(&setup));
                }
                if want(4) {
                    all &= report(4, "inequality suite", Instant::now(), criterion_4(&setup));
                }
                if want(5) || want(6) {
                    let t5 = Instant::now();
                    match criterion_5(&setup) {
                        Ok((out, gs)) => {
                            if want(5) {
                                all &= report(5, "ground state", t5, Ok(out));
                            }
                            if want(6) {
                                all &= report(6, "orbital stability", Instant::now(), criterion_6(&setup, &gs));
                            }
                        }
                        Err(msg) => {
                            for id in [5, 6].into_iter().filter(|&i| want(i)) {
                                all &= report(id, "ground state", t5, Err(msg.clone()));
                            }
                        }
                    }
                }
            }
            Err(msg) => {
                for id in [3, 4, 5, 6].into_iter().filter(|&i| want(i)) {
                    all &= report(id, "variational setup", t, Err(msg.clone()));
                }
            }
        }
    }
    if want(7) {
        all &= report(7, "Picard solver", Instant::now(), criterion_7());
    }
    if want(8) {
        all &= report(8, "randomization statistics", Instant::now(), criterion_8());
    }
    if want(9) {
        all &= report(9, "norm framework", Instant::now(), criterion_9());
    }
    println!("acceptance: {}", if all { "all selected criteria pass" } else { "FAILURES" });
    if !all {
        std::process::exit(1);
    }
}
