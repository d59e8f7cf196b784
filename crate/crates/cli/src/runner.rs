//! Command execution. Each command writes its artifacts into the output directory and the
//! caller records them in the manifest.

use std::time::Instant;

use nlslab::evolution::{energy_with_samples, evolve_observed, free_trajectory};
use nlslab::groundstate::{
    a_zero, gn_constant_estimate, m_curve, minimize_local, sobolev_constant_estimate, vneg_norm, GnEstimate,
    GroundStateConstants, GroundStateResult, GroundStateSummary, InequalityConstants, SobolevEstimate,
};
use nlslab::picard::{continuation_scan, picard_solve, smallness_gate, PicardSummary, ScanEntry};
use nlslab::randomization::{
    derive_seed, derive_seed_str, moment_estimate, randomize, tail_report, tail_samples, MomentEstimate,
};
use nlslab::spacetime::{g_norm_upper, trilinear_ratio, x_norm, y_norm, NormReport, TrilinearOutcome};
use nlslab::spectral::{lebesgue_norm, sobolev_norm};
use nlslab::stability::{
    almost_sure_stability_experiment, perturbation_compare, stability_experiment, standing_wave_trace,
    PerturbationComparison, PerturbationSpec, StabilitySettings, StabilityTrace, Verdict,
};
use nlslab::{Complex64, GridSpec, RandomSeedPlan, SpectralField, TailReport, TrajectorySeries};
use serde::Serialize;

use crate::config::{Command, RunConfig, TailNorm};
use crate::error::{CliError, CliResult};
use crate::manifest::{versions, Manifest, MANIFEST_NAME};
use crate::output::OutputDir;
use crate::report;

fn gaussian(g: GridSpec, width: f64) -> SpectralField {
    SpectralField::from_real_fn(g, |x| (-x.iter().map(|t| t * t).sum::<f64>() / (2.0 * width * width)).exp())
}

fn positive(name: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {x}")))
    }
}

/// Runs `command` and writes `manifest.json`; the manifest is returned on success and
/// failure alike, with the error recorded in it.
pub fn run(command: Command, config: RunConfig, manifests: &[std::path::PathBuf]) -> (Manifest, Option<CliError>) {
    let config = config.materialize(command);
    let started = Instant::now();
    let mut out = match OutputDir::create(&config.output_dir) {
        Ok(o) => o,
        Err(e) => {
            let m = manifest(command, &config, started, &[], Some(&e));
            return (m, Some(e));
        }
    };
    let result = dispatch(command, &config, &mut out, manifests);
    let err = result.err();
    let m = manifest(command, &config, started, out.artifacts(), err.as_ref());
    if let Err(e) = out.write_json(MANIFEST_NAME, &m) {
        return (m, Some(err.unwrap_or(e)));
    }
    (m, err)
}

fn manifest(
    command: Command,
    config: &RunConfig,
    started: Instant,
    artifacts: &[crate::output::ArtifactRecord],
    err: Option<&CliError>,
) -> Manifest {
    Manifest {
        command: command.name().into(),
        status: if err.is_none() { "ok".into() } else { "failed".into() },
        exit_code: err.map_or(0, |e| e.exit_code()),
        error: err.map(|e| e.to_string()),
        partial: err.is_some() && !artifacts.is_empty(),
        seed: config.seed,
        versions: versions(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        artifacts: artifacts.to_vec(),
        config: config.clone(),
    }
}

fn dispatch(command: Command, cfg: &RunConfig, out: &mut OutputDir, manifests: &[std::path::PathBuf]) -> CliResult<()> {
    cfg.norms.validate()?;
    match command {
        Command::Randomize => randomize_cmd(cfg, out),
        Command::Taildiag => taildiag_cmd(cfg, out),
        Command::Evolve => evolve_cmd(cfg, out),
        Command::Norms => norms_cmd(cfg, out),
        Command::Trilinear => trilinear_cmd(cfg, out),
        Command::Picard => picard_cmd(cfg, out),
        Command::Groundstate => groundstate_cmd(cfg, out),
        Command::Mcurve => mcurve_cmd(cfg, out),
        Command::Stability => stability_cmd(cfg, out),
        Command::Asstability => asstability_cmd(cfg, out),
        Command::Perturb => perturb_cmd(cfg, out),
        Command::Report => report::report_cmd(manifests, out),
    }
}

fn seeded_datum(cfg: &RunConfig, label: &str, width: f64) -> SpectralField {
    randomize(&gaussian(cfg.grid(), width), &RandomSeedPlan::gaussian(derive_seed_str(cfg.seed, label)))
}

#[derive(Serialize)]
struct RandomizeSummary {
    seed: u64,
    mass: f64,
    sobolev_norms: Vec<(f64, f64)>,
    l4_norm: f64,
    max_abs: f64,
}

fn randomize_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = &cfg.randomize;
    positive("randomize.width", b.width)?;
    let f = seeded_datum(cfg, "randomize", b.width).scale_real(b.amplitude);
    let sobolev_norms = b.sobolev_indices.iter().map(|&s| Ok((s, sobolev_norm(&f, s)?))).collect::<CliResult<_>>()?;
    out.write_field("randomized.nlsf", &f, 0.0)?;
    out.write_json(
        "randomize.json",
        &RandomizeSummary {
            seed: derive_seed_str(cfg.seed, "randomize"),
            mass: f.mass(),
            sobolev_norms,
            l4_norm: lebesgue_norm(&f, 4.0)?,
            max_abs: f.max_abs(),
        },
    )
}

#[derive(Serialize)]
struct TailSummary {
    norm: TailNorm,
    tail: TailReport,
    moments: Vec<MomentEstimate>,
    moment_ratio_max: f64,
}

#[derive(Serialize)]
struct TailRow {
    lambda: f64,
    lambda_sq: f64,
    probability: f64,
}

fn taildiag_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = &cfg.taildiag;
    let (lo, hi) = b.quantile_range;
    if !(0.0 <= lo && lo < hi && hi < 1.0 && b.thresholds >= 2) {
        return Err(CliError::Validation("taildiag quantile range must satisfy 0 <= lo < hi < 1 with >= 2 thresholds".into()));
    }
    let v = cfg.potential_spec()?;
    let ncfg = &cfg.norms;
    let norm = b.norm;
    let base = gaussian(cfg.grid(), b.width);
    let eval = |f: &SpectralField| -> nlslab::Result<f64> {
        let tr = free_trajectory(f, &v, b.dt, b.horizon)?;
        Ok(match norm {
            TailNorm::X => x_norm(&tr, ncfg)?.total,
            TailNorm::Y => y_norm(&tr, ncfg)?.total,
        })
    };
    let samples = tail_samples(&base, eval, b.samples, &RandomSeedPlan::gaussian(derive_seed_str(cfg.seed, "taildiag")))?;
    if samples.is_empty() {
        return Err(CliError::Validation("taildiag needs at least one sample".into()));
    }
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let quantile = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
    let lambdas: Vec<f64> =
        (0..b.thresholds).map(|i| quantile(lo + (hi - lo) * i as f64 / (b.thresholds - 1) as f64)).collect();
    let tail = tail_report(&samples, &lambdas);
    let coeffs: Vec<Complex64> = (0..b.moment_terms).map(|n| Complex64::new(1.0 / (1.0 + n as f64), 0.0)).collect();
    let plan = RandomSeedPlan::gaussian(derive_seed_str(cfg.seed, "moments"));
    let moments = b
        .moment_exponents
        .iter()
        .map(|&p| moment_estimate(&coeffs, p, b.moment_samples, &plan))
        .collect::<nlslab::Result<Vec<_>>>()?;
    let rows: Vec<TailRow> = tail
        .lambdas
        .iter()
        .zip(&tail.empirical_prob)
        .map(|(&l, &p)| TailRow { lambda: l, lambda_sq: l * l, probability: p })
        .collect();
    out.write_csv("taildiag.csv", &rows)?;
    let moment_ratio_max = moments.iter().map(|m| m.ratio).fold(0.0, f64::max);
    out.write_json("taildiag.json", &TailSummary { norm, tail, moments, moment_ratio_max })
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    mass: f64,
    energy: f64,
    mass_drift: f64,
    energy_drift: f64,
}

#[derive(Serialize)]
struct EvolveSummary {
    steps: usize,
    final_time: f64,
    blowup_suspect: bool,
    max_mass_drift: f64,
    max_energy_drift: f64,
}

fn evolve_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = cfg.evolution;
    positive("evolution.width", b.width)?;
    let ecfg = cfg.evolve.ok_or_else(|| CliError::Validation("evolve block missing".into()))?;
    let v = cfg.potential_spec()?;
    let samples = v.sample(&cfg.grid())?;
    let u0 = SpectralField::from_fn(cfg.grid(), |x| {
        let r2: f64 = x.iter().map(|t| t * t).sum();
        Complex64::from_polar(b.amplitude * (-r2 / (2.0 * b.width * b.width)).exp(), b.velocity * x[0])
    });
    let m0 = u0.mass();
    let e0 = energy_with_samples(&u0, &ecfg, &samples);
    let mut rows = Vec::new();
    let mut last = u0.clone();
    let status = evolve_observed(&u0, &ecfg, &v, b.horizon, |t, u| {
        let m = u.mass();
        let e = energy_with_samples(u, &ecfg, &samples);
        rows.push(EvolveRow {
            t,
            mass: m,
            energy: e,
            mass_drift: (m - m0).abs() / m0.max(f64::MIN_POSITIVE),
            energy_drift: (e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE),
        });
        last = u.clone();
        Ok(true)
    })?;
    out.write_csv("evolve.csv", &rows)?;
    out.write_field("final.nlsf", &last, status.final_time)?;
    out.write_json(
        "evolve.json",
        &EvolveSummary {
            steps: status.steps_taken,
            final_time: status.final_time,
            blowup_suspect: status.blowup_suspect,
            max_mass_drift: rows.iter().map(|r| r.mass_drift).fold(0.0, f64::max),
            max_energy_drift: rows.iter().map(|r| r.energy_drift).fold(0.0, f64::max),
        },
    )?;
    if status.blowup_suspect {
        return Err(CliError::Numerical(format!("blowup suspected at t = {}", status.final_time)));
    }
    Ok(())
}

fn trajectory(cfg: &RunConfig, label: &str) -> CliResult<TrajectorySeries> {
    let b = cfg.trajectory;
    positive("trajectory.width", b.width)?;
    let f = seeded_datum(cfg, label, b.width);
    Ok(free_trajectory(&f, &cfg.potential_spec()?, b.dt, b.horizon)?)
}

#[derive(Serialize)]
struct NormsSummary {
    x: NormReport,
    y: NormReport,
    g_upper: NormReport,
}

fn norms_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let tr = trajectory(cfg, "norms")?;
    let n = &cfg.norms;
    out.write_json("norms.json", &NormsSummary { x: x_norm(&tr, n)?, y: y_norm(&tr, n)?, g_upper: g_norm_upper(&tr, n)? })
}

#[derive(Serialize)]
struct TrilinearRow {
    case: u8,
    lhs: f64,
    rhs: f64,
    ratio: Option<f64>,
}

fn trilinear_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = &cfg.trilinear;
    let mk = |label: &str| -> CliResult<TrajectorySeries> {
        let f = seeded_datum(cfg, label, b.width);
        Ok(free_trajectory(&f, &cfg.potential_spec()?, b.dt, b.horizon)?)
    };
    let (a, bb, c) = (mk("trilinear-a")?, mk("trilinear-b")?, mk("trilinear-c")?);
    let outcomes = b
        .cases
        .iter()
        .map(|&case| trilinear_ratio(&a, &bb, &c, b.bands, case, b.ell, &cfg.norms))
        .collect::<nlslab::Result<Vec<TrilinearOutcome>>>()?;
    let rows: Vec<TrilinearRow> =
        outcomes.iter().map(|o| TrilinearRow { case: o.case, lhs: o.lhs, rhs: o.rhs, ratio: o.ratio }).collect();
    out.write_csv("trilinear.csv", &rows)?;
    out.write_json("trilinear.json", &outcomes)
}

#[derive(Serialize)]
struct PicardReport {
    datum_scale: f64,
    forcing_scale: f64,
    summary: PicardSummary,
    scan: Option<Vec<ScanEntry>>,
}

#[derive(Serialize)]
struct PicardRow {
    iteration: usize,
    increment: f64,
    contraction: Option<f64>,
}

fn picard_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = cfg.picard_run;
    let p = &cfg.picard;
    p.validate()?;
    positive("picard_run.datum_width", b.datum_width)?;
    positive("picard_run.forcing_width", b.forcing_width)?;
    let v = cfg.potential_spec()?;
    let rough = seeded_datum(cfg, "picard", b.forcing_width);
    let smooth = gaussian(cfg.grid(), b.datum_width);
    let unit_forcing = free_trajectory(&rough, &v, p.dt, p.horizon)?;
    let (ds, fs) = match b.gate_fraction {
        Some(frac) => {
            positive("picard_run.gate_fraction", frac)?;
            let g = smallness_gate(&smooth, &unit_forcing, &v, p, &cfg.norms)?;
            let s = frac * p.delta / g.sum();
            (s, s)
        }
        None => (b.datum_scale, b.forcing_scale),
    };
    let v0 = smooth.scale_real(ds);
    let forcing = unit_forcing.scale_real(fs);
    let res = picard_solve(&v0, &forcing, &v, p, Some(&cfg.norms))?;
    let summary = res.summary();
    let rows: Vec<PicardRow> = summary
        .increments
        .iter()
        .enumerate()
        .map(|(i, &inc)| PicardRow {
            iteration: i + 1,
            increment: inc,
            contraction: (i > 0).then(|| summary.contraction_factors.get(i - 1).copied()).flatten(),
        })
        .collect();
    out.write_csv("picard.csv", &rows)?;
    out.write_field("picard_final.nlsf", res.u.last(), p.horizon)?;
    let scan = if b.scan {
        Some(continuation_scan(&rough.scale_real(fs), &v, p, &cfg.norms, &b.scan_settings)?)
    } else {
        None
    };
    out.write_json("picard.json", &PicardReport { datum_scale: ds, forcing_scale: fs, summary, scan })?;
    if res.aborted {
        return Err(CliError::Numerical("Picard iterates became non-finite".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub gn: Option<GnEstimate>,
    pub sobolev: Option<SobolevEstimate>,
    pub used: InequalityConstants,
    pub ground: GroundStateConstants,
}

fn variational_constants(cfg: &RunConfig) -> CliResult<ConstantsReport> {
    let b = &cfg.groundstate;
    let g = cfg.grid();
    let v = cfg.potential_spec()?;
    let (gn, sobolev, used) = match b.constants {
        Some(c) => (None, None, InequalityConstants::new(g.dim(), b.q, c.sobolev_s, c.gn_c)?),
        None => {
            let gn = gn_constant_estimate(g.dim(), b.q, &g)?;
            let sob = sobolev_constant_estimate(g.dim(), &g)?;
            let used = InequalityConstants::from_estimates(&gn, &sob)?;
            (Some(gn), Some(sob), used)
        }
    };
    let ground = a_zero(&used, vneg_norm(&v, &g)?);
    if ground.a0 <= 0.0 {
        return Err(CliError::Validation("no admissible mass: the potential exhausts the Sobolev headroom".into()));
    }
    Ok(ConstantsReport { gn, sobolev, used, ground })
}

fn ground_state(cfg: &RunConfig, consts: &ConstantsReport) -> CliResult<GroundStateResult> {
    let b = &cfg.groundstate;
    let a = b.mass.unwrap_or(b.mass_fraction * consts.ground.a0);
    let v = cfg.potential_spec()?;
    let mut opts = b.optimizer;
    opts.include_critical = b.include_critical;
    let base = derive_seed_str(cfg.seed, "groundstate");
    let runs = (0..b.starts.max(1) as u64)
        .map(|i| minimize_local(a, &consts.used, &v, &cfg.grid(), &opts, derive_seed(base, i)))
        .collect::<nlslab::Result<Vec<_>>>()?;
    let spread = runs.iter().map(|r| r.m_a).fold(f64::NEG_INFINITY, f64::max)
        - runs.iter().map(|r| r.m_a).fold(f64::INFINITY, f64::min);
    if spread > 1e-4 {
        log::warn!("multi-start energies disagree by {spread:e}");
    }
    Ok(runs.into_iter().min_by(|x, y| x.m_a.total_cmp(&y.m_a)).expect("at least one start"))
}

#[derive(Serialize)]
struct GroundStateReport {
    constants: ConstantsReport,
    result: GroundStateSummary,
}

fn groundstate_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let consts = variational_constants(cfg)?;
    let gs = ground_state(cfg, &consts)?;
    out.write_field("ground_state.nlsf", &gs.u_a, 0.0)?;
    out.write_json("groundstate.json", &GroundStateReport { constants: consts, result: gs.summary() })?;
    if !gs.converged {
        return Err(CliError::Numerical(format!("optimizer stopped at residual {:e}", gs.residual)));
    }
    Ok(())
}

#[derive(Serialize)]
struct MCurveRow {
    a: f64,
    m: f64,
    lambda: f64,
    gradnormsq: f64,
    converged: bool,
}

#[derive(Serialize)]
struct MCurveReport {
    constants: ConstantsReport,
    curve: nlslab::groundstate::MCurve,
}

fn mcurve_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let consts = variational_constants(cfg)?;
    let b = &cfg.mcurve;
    if b.fractions.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
        return Err(CliError::Validation("mcurve fractions must lie in (0, 1)".into()));
    }
    let masses: Vec<f64> = b.fractions.iter().map(|f| f * consts.ground.a0).collect();
    let base = derive_seed_str(cfg.seed, "mcurve");
    let seeds: Vec<u64> = (0..b.starts.max(1) as u64).map(|i| derive_seed(base, i)).collect();
    let mut opts = cfg.groundstate.optimizer;
    opts.include_critical = cfg.groundstate.include_critical;
    let curve = m_curve(&masses, &consts.used, &cfg.potential_spec()?, &cfg.grid(), &opts, &seeds)?;
    let rows: Vec<MCurveRow> = curve
        .points
        .iter()
        .map(|p| MCurveRow { a: p.a, m: p.m, lambda: p.lambda, gradnormsq: p.grad_norm_sq, converged: p.converged })
        .collect();
    out.write_csv("mcurve.csv", &rows)?;
    out.write_json("mcurve.json", &MCurveReport { constants: consts, curve })
}

#[derive(Serialize)]
struct TraceRow {
    sample: String,
    max_dist: f64,
    verdict: String,
}

fn verdict_label(v: &Verdict) -> String {
    match v {
        Verdict::StayedWithin => "stayed_within".into(),
        Verdict::Exited { t_exit } => format!("exited({t_exit})"),
        Verdict::Aborted { t_abort } => format!("aborted({t_abort})"),
    }
}

#[derive(Serialize)]
struct StabilityReport {
    ground_state: GroundStateSummary,
    standing_wave: Option<StabilityTrace>,
    traces: Vec<StabilityTrace>,
    within: usize,
}

fn stability_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = cfg.stability;
    positive("stability.delta", b.delta)?;
    let ecfg = cfg.evolve.ok_or_else(|| CliError::Validation("evolve block missing".into()))?;
    let consts = variational_constants(cfg)?;
    let gs = ground_state(cfg, &consts)?;
    let v = cfg.potential_spec()?;
    let settings = StabilitySettings { budget_factor: b.budget_factor, stop_on_exit: b.stop_on_exit };
    let standing = if b.standing_wave {
        Some(standing_wave_trace(&gs, b.horizon, &ecfg, &v, b.delta * b.budget_factor)?)
    } else {
        None
    };
    let base = derive_seed_str(cfg.seed, "stability");
    let traces = (0..b.samples as u64)
        .map(|i| stability_experiment(&gs, &PerturbationSpec::deterministic_h1(derive_seed(base, i), b.delta), b.horizon, &ecfg, &v, &settings))
        .collect::<nlslab::Result<Vec<_>>>()?;
    let mut rows: Vec<TraceRow> = traces
        .iter()
        .enumerate()
        .map(|(i, t)| TraceRow { sample: i.to_string(), max_dist: t.max_dist(), verdict: verdict_label(&t.verdict) })
        .collect();
    if let Some(s) = &standing {
        rows.push(TraceRow { sample: "standing".into(), max_dist: s.max_dist(), verdict: verdict_label(&s.verdict) });
    }
    out.write_csv("stability.csv", &rows)?;
    let within = traces.iter().filter(|t| t.stayed_within()).count();
    out.write_json("stability.json", &StabilityReport { ground_state: gs.summary(), standing_wave: standing, traces, within })
}

fn asstability_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = cfg.asstability;
    positive("asstability.delta", b.delta)?;
    let ecfg = cfg.evolve.ok_or_else(|| CliError::Validation("evolve block missing".into()))?;
    let consts = variational_constants(cfg)?;
    let gs = ground_state(cfg, &consts)?;
    let settings = StabilitySettings { budget_factor: b.budget_factor, stop_on_exit: b.stop_on_exit };
    let rep = almost_sure_stability_experiment(
        &gs,
        b.s,
        b.delta,
        b.samples,
        derive_seed_str(cfg.seed, "asstability"),
        b.horizon,
        &ecfg,
        &cfg.potential_spec()?,
        &settings,
    )?;
    let rows: Vec<TraceRow> = rep
        .traces
        .iter()
        .enumerate()
        .map(|(i, t)| TraceRow { sample: i.to_string(), max_dist: t.max_dist(), verdict: verdict_label(&t.verdict) })
        .collect();
    out.write_csv("asstability.csv", &rows)?;
    out.write_json("asstability.json", &rep)
}

#[derive(Serialize)]
struct PerturbRow {
    forcing_scale: f64,
    h1_difference: f64,
    x_difference: f64,
    gate: Option<f64>,
    converged: bool,
}

fn perturb_cmd(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let b = cfg.perturb;
    let p = &cfg.picard;
    p.validate()?;
    positive("perturb.datum_width", b.datum_width)?;
    positive("perturb.forcing_width", b.forcing_width)?;
    let v = cfg.potential_spec()?;
    let u0 = gaussian(cfg.grid(), b.datum_width).scale_real(b.datum_scale);
    let rough = seeded_datum(cfg, "perturb", b.forcing_width);
    let unit = free_trajectory(&rough, &v, p.dt, p.horizon)?;
    let mut rows = Vec::new();
    let mut comparisons: Vec<(f64, PerturbationComparison)> = Vec::new();
    for k in 0..=b.halvings {
        let s = b.forcing_scale / 2f64.powi(k as i32);
        let c = perturbation_compare(&u0, &unit.scale_real(s), &v, p, &cfg.norms)?;
        rows.push(PerturbRow {
            forcing_scale: s,
            h1_difference: c.h1_difference,
            x_difference: c.x_difference,
            gate: c.gate.map(|g| g.sum()),
            converged: c.converged,
        });
        comparisons.push((s, c));
    }
    out.write_csv("perturb.csv", &rows)?;
    out.write_json("perturb.json", &comparisons)
}
