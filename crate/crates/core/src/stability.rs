//! Distance to the phase/translation orbit of a ground state, and perturbation
//! experiments around it.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, NlsError, Result};
use crate::evolution::{energy_with_samples, evolve_observed, EvolveConfig, Nonlinearity};
use crate::groundstate::GroundStateResult;
use crate::picard::{picard_solve, sup_h1_distance, GateValues, PicardConfig};
use crate::potential::PotentialSpec;
use crate::randomization::{derive_seed, randomize, RandomSeedPlan};
use crate::spacetime::{x_norm, NormConfig};
use crate::spectral::{sobolev_norm, GridSpec, SpectralField};
use crate::evolution::TrajectorySeries;

pub fn h1_norm(f: &SpectralField) -> f64 {
    (f.mass() + f.grad_norm_sq()).sqrt()
}

fn h1_inner(u: &SpectralField, a: &SpectralField) -> Complex64 {
    let g = u.grid();
    let (um, am) = (u.modes(), a.modes());
    let s = crate::spectral::block_reduce(
        um.len(),
        Complex64::new(0.0, 0.0),
        |j| {
            let xi = g.wavevector(j);
            um[j] * am[j].conj() * (1.0 + xi.iter().map(|t| t * t).sum::<f64>())
        },
        |x, y| x + y,
    );
    s * g.cell_volume()
}

/// Best phase/translation match of `u_a` to `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitMatch {
    pub distance: f64,
    pub theta: f64,
    pub shift: [f64; 4],
}

fn residual_at(u: &SpectralField, u_a: &SpectralField, y: &[f64]) -> OrbitMatch {
    let moved = u_a.translate(y);
    let c = h1_inner(u, &moved);
    let theta = c.arg();
    let diff = u.axpy(-Complex64::from_polar(1.0, theta), &moved).expect("same grid");
    let mut shift = [0.0; 4];
    shift[..y.len()].copy_from_slice(y);
    OrbitMatch { distance: h1_norm(&diff), theta, shift }
}

/// `inf_{theta, y} ||u - e^{i theta} u_a(. - y)||_{H^1}`: lattice search by cross-correlation,
/// then a parabolic refinement of the shift on each axis.
pub fn orbit_match(u: &SpectralField, u_a: &SpectralField) -> Result<OrbitMatch> {
    u.grid().check_same(u_a.grid())?;
    let g = *u.grid();
    let d = g.dim();
    let m = g.points();
    let h = g.spacing();
    let weights: Vec<Complex64> = u
        .modes()
        .par_iter()
        .zip(u_a.modes())
        .enumerate()
        .map(|(j, (x, y))| {
            let xi = g.wavevector(j);
            x * y.conj() * (1.0 + xi.iter().map(|t| t * t).sum::<f64>())
        })
        .collect();
    let corr = SpectralField::from_modes(g, weights)?;
    let mags: Vec<f64> = corr.values().iter().map(|z| z.norm()).collect();
    let best = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let idx = g.unflatten(best);
    let signed = |i: usize| if i > m / 2 { i as f64 - m as f64 } else { i as f64 };
    let lattice: Vec<f64> = (0..d).map(|a| signed(idx[a]) * h).collect();
    let mut refined = lattice.clone();
    for a in 0..d {
        let neighbour = |off: isize| {
            let mut k = idx;
            k[a] = ((k[a] as isize + off).rem_euclid(m as isize)) as usize;
            mags[g.flatten(&k[..d])]
        };
        let (l, c, r) = (neighbour(-1), mags[best], neighbour(1));
        let den = l - 2.0 * c + r;
        if den < 0.0 {
            refined[a] += (0.5 * (l - r) / den).clamp(-0.5, 0.5) * h;
        }
    }
    let at_lattice = residual_at(u, u_a, &lattice);
    if refined == lattice {
        return Ok(at_lattice);
    }
    let at_refined = residual_at(u, u_a, &refined);
    Ok(if at_refined.distance < at_lattice.distance { at_refined } else { at_lattice })
}

pub fn orbit_distance(u: &SpectralField, u_a: &SpectralField) -> Result<f64> {
    Ok(orbit_match(u, u_a)?.distance)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    /// Smooth random direction normalized in `H^1`.
    DeterministicH1 { direction_seed: u64 },
    /// Wiener-randomized `H^s` profile normalized in `H^s`.
    RandomRough { s: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    #[serde(flatten)]
    pub kind: PerturbationKind,
    pub size: f64,
}

/// A perturbation together with its `H^s` and `H^1` sizes.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub field: SpectralField,
    pub hs_norm: f64,
    pub h1_norm: f64,
}

impl PerturbationSpec {
    pub fn deterministic_h1(direction_seed: u64, size: f64) -> Self {
        PerturbationSpec { kind: PerturbationKind::DeterministicH1 { direction_seed }, size }
    }

    pub fn random_rough(s: f64, seed: u64, size: f64) -> Self {
        PerturbationSpec { kind: PerturbationKind::RandomRough { s, seed }, size }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.size > 0.0 && self.size.is_finite()) {
            return invalid("perturbation size must be positive");
        }
        if let PerturbationKind::RandomRough { s, .. } = self.kind {
            if !(0.0..1.0).contains(&s) {
                return invalid(format!("rough perturbation needs 0 <= s < 1, got {s}"));
            }
        }
        Ok(())
    }

    pub fn build(&self, grid: &GridSpec) -> Result<Perturbation> {
        self.validate()?;
        let d = grid.dim() as f64;
        match self.kind {
            PerturbationKind::DeterministicH1 { direction_seed } => {
                let plan = RandomSeedPlan::gaussian(derive_seed(direction_seed, 0x7031));
                let profile = SpectralField::from_real_fn(*grid, |x| {
                    (-x.iter().map(|t| t * t).sum::<f64>() / 8.0).exp()
                });
                let f = randomize(&profile, &plan);
                let f = f.scale_real(self.size / h1_norm(&f));
                Ok(Perturbation { hs_norm: self.size, h1_norm: h1_norm(&f), field: f })
            }
            PerturbationKind::RandomRough { s, seed } => {
                let decay = d / 2.0 + 0.5 * (s + 1.0);
                let profile = SpectralField::from_modes(
                    *grid,
                    (0..grid.len())
                        .map(|j| {
                            let xi = grid.wavevector(j);
                            Complex64::new((1.0 + xi.iter().map(|t| t * t).sum::<f64>()).powf(-decay / 2.0), 0.0)
                        })
                        .collect(),
                )?;
                let f = randomize(&profile, &RandomSeedPlan::gaussian(derive_seed(seed, 0x7032)));
                let target = self.size * (1.0 - 1e-3);
                let f = f.scale_real(target / sobolev_norm(&f, s)?);
                Ok(Perturbation { hs_norm: sobolev_norm(&f, s)?, h1_norm: h1_norm(&f), field: f })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    StayedWithin,
    Exited { t_exit: f64 },
    Aborted { t_abort: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTrace {
    pub times: Vec<f64>,
    pub orbit_dist: Vec<f64>,
    pub mass_drift: Vec<f64>,
    pub energy_drift: Vec<f64>,
    pub epsilon_budget: f64,
    pub perturbation_hs: f64,
    pub perturbation_h1: f64,
    pub verdict: Verdict,
}

impl StabilityTrace {
    pub fn max_dist(&self) -> f64 {
        self.orbit_dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn stayed_within(&self) -> bool {
        self.verdict == Verdict::StayedWithin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySettings {
    /// `epsilon_budget = budget_factor * size`.
    pub budget_factor: f64,
    pub stop_on_exit: bool,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        StabilitySettings { budget_factor: 10.0, stop_on_exit: true }
    }
}

fn check_gs(gs: &GroundStateResult, cfg: &EvolveConfig) -> Result<()> {
    if !gs.converged {
        return invalid("ground state did not converge");
    }
    if !matches!(cfg.nonlinearity, Nonlinearity::Mixed { .. }) {
        log::warn!("stability run with a nonlinearity other than the mixed-power one");
    }
    Ok(())
}

/// Evolves `u_a + perturbation` and records the orbit distance at every snapshot.
pub fn stability_experiment(
    gs: &GroundStateResult,
    pert: &PerturbationSpec,
    horizon: f64,
    cfg: &EvolveConfig,
    v: &PotentialSpec,
    settings: &StabilitySettings,
) -> Result<StabilityTrace> {
    check_gs(gs, cfg)?;
    let grid = *gs.u_a.grid();
    let p = pert.build(&grid)?;
    let u0 = gs.u_a.add(&p.field)?;
    run_trace(&gs.u_a, &u0, pert.size * settings.budget_factor, horizon, cfg, v, settings, p.hs_norm, p.h1_norm)
}

/// Same as [`stability_experiment`] with no perturbation.
pub fn standing_wave_trace(
    gs: &GroundStateResult,
    horizon: f64,
    cfg: &EvolveConfig,
    v: &PotentialSpec,
    budget: f64,
) -> Result<StabilityTrace> {
    check_gs(gs, cfg)?;
    run_trace(&gs.u_a, &gs.u_a, budget, horizon, cfg, v, &StabilitySettings { budget_factor: 1.0, stop_on_exit: false }, 0.0, 0.0)
}

#[allow(clippy::too_many_arguments)]
fn run_trace(
    u_a: &SpectralField,
    u0: &SpectralField,
    budget: f64,
    horizon: f64,
    cfg: &EvolveConfig,
    v: &PotentialSpec,
    settings: &StabilitySettings,
    hs: f64,
    h1: f64,
) -> Result<StabilityTrace> {
    if !(horizon > 0.0) {
        return invalid("horizon must be positive");
    }
    let samples = v.sample(u0.grid())?;
    let m0 = u0.mass();
    let e0 = energy_with_samples(u0, cfg, &samples);
    let mut trace = StabilityTrace {
        times: Vec::new(),
        orbit_dist: Vec::new(),
        mass_drift: Vec::new(),
        energy_drift: Vec::new(),
        epsilon_budget: budget,
        perturbation_hs: hs,
        perturbation_h1: h1,
        verdict: Verdict::StayedWithin,
    };
    let status = evolve_observed(u0, cfg, v, horizon, |t, u| {
        let dist = orbit_distance(u, u_a)?;
        trace.times.push(t);
        trace.orbit_dist.push(dist);
        trace.mass_drift.push((u.mass() - m0).abs() / m0.max(f64::MIN_POSITIVE));
        trace.energy_drift.push((energy_with_samples(u, cfg, &samples) - e0).abs() / e0.abs().max(f64::MIN_POSITIVE));
        if dist > budget && trace.verdict == Verdict::StayedWithin {
            trace.verdict = Verdict::Exited { t_exit: t };
            return Ok(!settings.stop_on_exit);
        }
        Ok(true)
    })?;
    if status.blowup_suspect {
        trace.verdict = Verdict::Aborted { t_abort: status.final_time };
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostSureReport {
    pub traces: Vec<StabilityTrace>,
    pub within: usize,
    pub fraction_within: f64,
    /// Wilson 95% interval for the fraction.
    pub wilson: (f64, f64),
}

pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let den = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / den;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / den;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Rough randomized perturbations of size `delta` in `H^s`, one per derived seed.
#[allow(clippy::too_many_arguments)]
pub fn almost_sure_stability_experiment(
    gs: &GroundStateResult,
    s: f64,
    delta: f64,
    n: usize,
    seed: u64,
    horizon: f64,
    cfg: &EvolveConfig,
    v: &PotentialSpec,
    settings: &StabilitySettings,
) -> Result<AlmostSureReport> {
    if n == 0 {
        return invalid("need at least one sample");
    }
    if !(0.5 < s && s < 1.0) {
        log::warn!("regularity s = {s} outside (1/2, 1)");
    }
    let traces: Vec<StabilityTrace> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let spec = PerturbationSpec::random_rough(s, derive_seed(seed, i), delta);
            match stability_experiment(gs, &spec, horizon, cfg, v, settings) {
                Err(e) if e.is_numerical() => Ok(StabilityTrace {
                    times: vec![],
                    orbit_dist: vec![],
                    mass_drift: vec![],
                    energy_drift: vec![],
                    epsilon_budget: delta * settings.budget_factor,
                    perturbation_hs: f64::NAN,
                    perturbation_h1: f64::NAN,
                    verdict: Verdict::Aborted { t_abort: 0.0 },
                }),
                r => r,
            }
        })
        .collect::<Result<_>>()?;
    let within = traces.iter().filter(|t| t.stayed_within()).count();
    Ok(AlmostSureReport { within, fraction_within: within as f64 / n as f64, wilson: wilson_interval(within, n, 1.96), traces })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationComparison {
    pub h1_difference: f64,
    pub x_difference: f64,
    pub gate: Option<GateValues>,
    pub converged: bool,
}

/// Solves from `u0` with and without the forcing `forcing` and compares the solutions.
pub fn perturbation_compare(
    u0: &SpectralField,
    forcing: &TrajectorySeries,
    v_pot: &PotentialSpec,
    cfg: &PicardConfig,
    ncfg: &NormConfig,
) -> Result<PerturbationComparison> {
    let zero = TrajectorySeries::new(
        forcing.times().to_vec(),
        vec![SpectralField::zeros(*u0.grid()); forcing.len()],
    )?;
    let forced = picard_solve(u0, forcing, v_pot, cfg, Some(ncfg))?;
    let free = picard_solve(u0, &zero, v_pot, cfg, None)?;
    if forced.aborted || free.aborted {
        return Err(NlsError::Numerical("Picard iteration aborted".into()));
    }
    let diff = forced.u.sub(&free.u)?;
    Ok(PerturbationComparison {
        h1_difference: sup_h1_distance(&forced.u, &free.u)?,
        x_difference: x_norm(&diff, ncfg)?.total,
        gate: forced.gate,
        converged: forced.converged && free.converged,
    })
}
