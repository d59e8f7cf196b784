//! Constrained ground states of the mixed-power energy
//! `I(u) = 1/2 ||grad u||^2 + 1/2 int V u^2 - 1/q ||u||_q^q - 1/2* ||u||_{2*}^{2*}`
//! on `S(a) = { ||u||_2^2 = a }` intersected with the ball `||grad u||_2^2 < rho_0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, NlsError, Result};
use crate::evolution::critical_exponent;
use crate::potential::PotentialSpec;
use crate::spectral::norms::weighted_lp;
use crate::spectral::{lebesgue_norm, GridSpec, SpectralField};

/// Relative safety margins applied to the estimated constants.
pub const SOBOLEV_DEFLATION: f64 = 0.99;
pub const GN_INFLATION: f64 = 1.01;

/// `beta = d (1/2 - 1/q)`.
pub fn gn_beta(d: usize, q: f64) -> f64 {
    d as f64 * (0.5 - 1.0 / q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnEstimate {
    pub d: usize,
    pub q: f64,
    /// Quotient of the computed profile; a lower bound on the optimal constant.
    pub lower_bound: f64,
    /// `lower_bound * GN_INFLATION`.
    pub inflated: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
}

/// The quotient `||u||_q / (||grad u||^beta ||u||^(1 - beta))`.
pub fn gn_quotient(u: &SpectralField, q: f64) -> Result<f64> {
    let beta = gn_beta(u.grid().dim(), q);
    let lq = lebesgue_norm(u, q)?;
    let g = u.grad_norm_sq().sqrt();
    let l2 = u.l2_norm();
    Ok(lq / (g.powf(beta) * l2.powf(1.0 - beta)))
}

/// `(shift - Delta)^{-1} f`.
fn precondition(f: &SpectralField, shift: f64) -> SpectralField {
    f.apply_multiplier(|xi| 1.0 / (shift + xi.iter().map(|x| x * x).sum::<f64>()))
}

fn neg_laplacian(f: &SpectralField) -> SpectralField {
    f.apply_multiplier(|xi| xi.iter().map(|x| x * x).sum::<f64>())
}

fn real_inner(a: &SpectralField, b: &SpectralField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x.re * y.re + x.im * y.im).sum::<f64>() * a.grid().cell_volume()
}

fn gaussian_seed(grid: &GridSpec, width: f64) -> SpectralField {
    SpectralField::from_real_fn(*grid, |x| (-x.iter().map(|t| t * t).sum::<f64>() / (2.0 * width * width)).exp())
}

/// Estimates the optimal Gagliardo-Nirenberg constant as the quotient of the ground state of
/// `-Delta Q + Q = |Q|^(q-2) Q`, computed by Petviashvili iteration from a Gaussian.
pub fn gn_constant_estimate(d: usize, q: f64, grid: &GridSpec) -> Result<GnEstimate> {
    if d != grid.dim() {
        return invalid("dimension does not match the grid");
    }
    let upper = if d > 2 { critical_exponent(d) } else { f64::INFINITY };
    if !(q >= 2.0 && q < upper) {
        return invalid(format!("q = {q} outside [2, 2d/(d-2))"));
    }
    if q == 2.0 {
        return Ok(GnEstimate { d, q, lower_bound: 1.0, inflated: 1.0, iterations: 0, converged: true, diverged: false });
    }
    let gamma = (q - 1.0) / (q - 2.0);
    let mut u = gaussian_seed(grid, 1.0);
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    for it in 0..2000 {
        iterations = it + 1;
        let nl = u.map_values(|z| z * z.norm().powf(q - 2.0));
        let den = real_inner(&nl, &u);
        let m = (u.mass() + u.grad_norm_sq()) / den;
        let next = precondition(&nl, 1.0).scale_real(m.powf(gamma));
        if !(m.is_finite() && next.is_finite()) || next.max_abs() < 1e-150 {
            diverged = true;
            break;
        }
        let change = next.sub(&u)?.l2_norm() / next.l2_norm();
        u = next;
        if change < 1e-13 {
            converged = true;
            break;
        }
    }
    let lower_bound = if diverged { 0.0 } else { gn_quotient(&u, q)? };
    Ok(GnEstimate { d, q, lower_bound, inflated: lower_bound * GN_INFLATION, iterations, converged, diverged })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevEstimate {
    pub d: usize,
    /// Smallest quotient `||grad u||^2 / ||u||_{2*}^2` over the sweep.
    pub value: f64,
    /// Best bubble width, in units of the box half-length.
    pub best_sigma: f64,
    pub sweep: Vec<(f64, f64)>,
}

/// Bubble widths swept by [`sobolev_constant_estimate`], relative to the half-length.
pub const SOBOLEV_SIGMAS: [f64; 7] = [0.05, 0.06, 0.08, 0.1, 0.12, 0.15, 0.2];

/// Truncated bubble `(1 + |x/sigma|^2)^{-(d-2)/2}` times a smooth radial window that is
/// one inside `r = L/2` and zero beyond `r = 0.9 L`.
pub fn truncated_bubble(grid: &GridSpec, sigma: f64) -> SpectralField {
    let d = grid.dim() as f64;
    let l = grid.half_len();
    SpectralField::from_real_fn(*grid, |x| {
        let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        let window = crate::spectral::smooth_step((0.9 * l - r) / (0.4 * l));
        (1.0 + (r / sigma).powi(2)).powf(-(d - 2.0) / 2.0) * window
    })
}

pub fn sobolev_quotient(u: &SpectralField) -> Result<f64> {
    let p = critical_exponent(u.grid().dim());
    Ok(u.grad_norm_sq() / lebesgue_norm(u, p)?.powi(2))
}

pub fn sobolev_constant_estimate(d: usize, grid: &GridSpec) -> Result<SobolevEstimate> {
    if d != grid.dim() {
        return invalid("dimension does not match the grid");
    }
    if d < 3 {
        return invalid("Sobolev constant needs d >= 3");
    }
    let sweep: Vec<(f64, f64)> = SOBOLEV_SIGMAS
        .iter()
        .map(|&s| Ok((s, sobolev_quotient(&truncated_bubble(grid, s * grid.half_len()))?)))
        .collect::<Result<_>>()?;
    let (best_sigma, value) = sweep.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty sweep");
    Ok(SobolevEstimate { d, value, best_sigma, sweep })
}

/// Constants entering the variational estimates; `sobolev_s` and `gn_c` carry the safety margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityConstants {
    pub d: usize,
    pub q: f64,
    pub sobolev_s: f64,
    pub gn_c: f64,
    pub beta: f64,
}

impl InequalityConstants {
    pub fn new(d: usize, q: f64, sobolev_s: f64, gn_c: f64) -> Result<Self> {
        if d < 3 {
            return invalid("variational constants need d >= 3");
        }
        if !(q > 2.0 && q < 2.0 + 4.0 / d as f64) {
            return invalid(format!("q = {q} outside (2, 2 + 4/d)"));
        }
        if !(sobolev_s > 0.0 && gn_c > 0.0) {
            return invalid("constants must be positive");
        }
        Ok(InequalityConstants { d, q, sobolev_s, gn_c, beta: gn_beta(d, q) })
    }

    /// Applies the safety margins to raw estimates.
    pub fn from_estimates(gn: &GnEstimate, sob: &SobolevEstimate) -> Result<Self> {
        if gn.d != sob.d {
            return invalid("estimates for different dimensions");
        }
        Self::new(gn.d, gn.q, sob.value * SOBOLEV_DEFLATION, gn.inflated)
    }

    fn crit(&self) -> f64 {
        critical_exponent(self.d)
    }

    /// `1/2 (1 - vneg / S)`.
    pub fn headroom(&self, vneg: f64) -> f64 {
        0.5 * (1.0 - vneg / self.sobolev_s)
    }

    fn base(&self) -> f64 {
        let (d, q) = (self.d as f64, self.q);
        d * (4.0 - d * (q - 2.0)) * self.gn_c.powf(q) * self.sobolev_s.powf(self.crit() / 2.0) / (4.0 * q)
    }

    fn denom(&self) -> f64 {
        2.0 * self.crit() - self.d as f64 * (self.q - 2.0)
    }

    /// The two-term constant `K` with `max_rho f(a, rho) = headroom - K a^{2/d}`.
    pub fn k(&self) -> f64 {
        let (d, q) = (self.d as f64, self.q);
        let s = self.crit();
        let b = self.base();
        self.gn_c.powf(q) / q * b.powf((d * (q - 2.0) - 4.0) / self.denom())
            + b.powf(2.0 * (s - 2.0) / self.denom()) / (s * self.sobolev_s.powf(s / 2.0))
    }
}

/// `f(a, rho)`.
pub fn f_aux(a: f64, rho: f64, c: &InequalityConstants, vneg: f64) -> f64 {
    let (d, q) = (c.d as f64, c.q);
    let s = c.crit();
    c.headroom(vneg)
        - c.gn_c.powf(q) / q * a.powf((2.0 * q - d * (q - 2.0)) / 4.0) * rho.powf((d * (q - 2.0) - 4.0) / 4.0)
        - rho.powf((s - 2.0) / 2.0) / (s * c.sobolev_s.powf(s / 2.0))
}

/// Maximizer `rho_a` of `f(a, .)`.
pub fn rho_max(a: f64, c: &InequalityConstants) -> f64 {
    let (d, q) = (c.d as f64, c.q);
    c.base().powf(4.0 / c.denom()) * a.powf((2.0 * q - d * (q - 2.0)) / c.denom())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateConstants {
    pub k: f64,
    pub a0: f64,
    pub rho0: f64,
    pub vneg_lhalf: f64,
    pub headroom: f64,
    pub warning: Option<&'static str>,
}

impl GroundStateConstants {
    pub fn rho_a(&self, a: f64, c: &InequalityConstants) -> f64 {
        rho_max(a, c)
    }
}

/// `K` and the critical mass `a0`, the root of `max_rho f(a, rho) = 0`.
pub fn a_zero(c: &InequalityConstants, vneg: f64) -> GroundStateConstants {
    let k = c.k();
    let headroom = c.headroom(vneg);
    if headroom <= 0.0 {
        log::warn!("no headroom: ||V_-|| >= S");
        return GroundStateConstants { k, a0: 0.0, rho0: 0.0, vneg_lhalf: vneg, headroom, warning: Some("nonpositive headroom") };
    }
    let a0 = (headroom / k).powf(c.d as f64 / 2.0);
    GroundStateConstants { k, a0, rho0: rho_max(a0, c), vneg_lhalf: vneg, headroom, warning: None }
}

/// Energy pieces of a real field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub potential: f64,
    pub subcritical: f64,
    pub critical: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential - self.subcritical - self.critical
    }
    fn scale(&self) -> f64 {
        self.kinetic.abs() + self.potential.abs() + self.subcritical.abs() + self.critical.abs()
    }
}

/// Evaluates `I(u)` with cached potential samples.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    pub q: f64,
    pub include_critical: bool,
    v: Vec<f64>,
}

impl EnergyFunctional {
    pub fn new(v: &PotentialSpec, grid: &GridSpec, q: f64, include_critical: bool) -> Result<Self> {
        if include_critical && grid.dim() < 3 {
            return invalid("critical term needs d >= 3");
        }
        Ok(EnergyFunctional { q, include_critical, v: v.sample(grid)? })
    }

    pub fn parts(&self, u: &SpectralField) -> EnergyParts {
        let g = u.grid();
        let cv = g.cell_volume();
        let s = critical_exponent(g.dim());
        let q = self.q;
        let crit = self.include_critical;
        let vals = u.values();
        let (pot, sub, cr) = crate::spectral::block_reduce(
            vals.len(),
            (0.0, 0.0, 0.0),
            |j| {
                let a = vals[j].norm();
                (self.v[j] * a * a, a.powf(q), if crit { a.powf(s) } else { 0.0 })
            },
            |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2),
        );
        EnergyParts {
            kinetic: 0.5 * u.grad_norm_sq(),
            potential: 0.5 * pot * cv,
            subcritical: sub * cv / q,
            critical: if crit { cr * cv / s } else { 0.0 },
        }
    }

    pub fn energy(&self, u: &SpectralField) -> f64 {
        self.parts(u).total()
    }

    /// `L^2` gradient `-Delta u + V u - |u|^{q-2} u - |u|^{2*-2} u`.
    pub fn gradient(&self, u: &SpectralField) -> SpectralField {
        let g = u.grid();
        let s = critical_exponent(g.dim());
        let q = self.q;
        let crit = self.include_critical;
        let lap = neg_laplacian(u);
        let vals = u
            .values()
            .par_iter()
            .zip(&self.v)
            .zip(lap.values())
            .map(|((z, &vv), l)| {
                let a = z.norm();
                let mut gain = a.powf(q - 2.0);
                if crit {
                    gain += a.powf(s - 2.0);
                }
                l + z * (vv - gain)
            })
            .collect();
        SpectralField::from_values(*g, vals).expect("same grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    /// Target for the relative stationarity residual.
    pub tol: f64,
    pub max_iter: usize,
    pub tau: f64,
    /// Shift `c` of the preconditioner `(c - Delta)^{-1}`.
    pub precond_shift: f64,
    /// Nominal Gaussian seed width; each start perturbs it by its seed.
    pub seed_width: f64,
    pub include_critical: bool,
    pub log_every: usize,
    /// Iterations allowed without a 10% improvement of the best residual.
    pub stagnation: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            tol: 1e-10,
            max_iter: 20000,
            tau: 0.5,
            precond_shift: 0.1,
            seed_width: 3.0,
            include_critical: true,
            log_every: 50,
            stagnation: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub u_a: SpectralField,
    pub a: f64,
    pub m_a: f64,
    pub lambda: f64,
    pub grad_norm_sq: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary_stall: bool,
    pub rho0: f64,
    pub seed: u64,
    pub seed_width: f64,
    /// `(iteration, I(u))` samples.
    pub energy_log: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub a: f64,
    pub m_a: f64,
    pub lambda: f64,
    pub grad_norm_sq: f64,
    pub mass: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary_stall: bool,
    pub rho0: f64,
    pub seed: u64,
    pub seed_width: f64,
    pub energy_log: Vec<(usize, f64)>,
}

impl GroundStateResult {
    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            a: self.a,
            m_a: self.m_a,
            lambda: self.lambda,
            grad_norm_sq: self.grad_norm_sq,
            mass: self.u_a.mass(),
            residual: self.residual,
            iterations: self.iterations,
            converged: self.converged,
            boundary_stall: self.boundary_stall,
            rho0: self.rho0,
            seed: self.seed,
            seed_width: self.seed_width,
            energy_log: self.energy_log.clone(),
        }
    }
}

fn with_mass(u: &SpectralField, a: f64) -> SpectralField {
    u.scale_real((a / u.mass()).sqrt())
}

/// Stationarity data at `u`: multiplier and relative residual.
pub fn stationarity(func: &EnergyFunctional, u: &SpectralField) -> (f64, f64, SpectralField) {
    let g = func.gradient(u);
    let lambda = real_inner(&g, u) / real_inner(u, u);
    let r = g.axpy(Complex64::new(-lambda, 0.0), u).expect("same grid");
    let h1 = (u.mass() + u.grad_norm_sq()).sqrt();
    (lambda, r.l2_norm() / h1, g)
}

/// Local minimization of `I` on `S(a)` within `||grad u||^2 < rho0`, by a preconditioned
/// projected gradient flow from a centered Gaussian.
pub fn minimize_local(
    a: f64,
    c: &InequalityConstants,
    v: &PotentialSpec,
    grid: &GridSpec,
    opts: &OptimizerSettings,
    seed: u64,
) -> Result<GroundStateResult> {
    if grid.dim() != c.d {
        return invalid("constants computed for another dimension");
    }
    if !(a > 0.0) {
        return invalid("mass must be positive");
    }
    let vneg = crate::potential::lhalf_norm(v, grid)?.negative;
    let consts = a_zero(c, vneg);
    if !(a < consts.a0) {
        return invalid(format!("mass {a} not below a0 = {}", consts.a0));
    }
    let rho0 = consts.rho0;
    let func = EnergyFunctional::new(v, grid, c.q, opts.include_critical)?;
    let mut rng = ChaCha8Rng::seed_from_u64(crate::randomization::derive_seed(seed, 0x6753));
    let seed_width = opts.seed_width * rng.random_range(0.8..1.25);
    let mut u = with_mass(&gaussian_seed(grid, seed_width), a);
    if u.grad_norm_sq() >= rho0 {
        return Err(NlsError::Numerical("seed lies outside the gradient ball".into()));
    }
    let mut parts = func.parts(&u);
    let mut tau = opts.tau;
    let mut energy_log = vec![(0, parts.total())];
    let mut converged = false;
    let mut boundary_stall = false;
    let mut iterations = 0;
    let (mut lambda, mut residual, mut grad) = stationarity(&func, &u);
    let mut best_res = residual;
    let mut best_at = 0;
    while iterations < opts.max_iter {
        if residual < opts.tol {
            converged = true;
            break;
        }
        if residual < 0.9 * best_res {
            best_res = residual;
            best_at = iterations;
        } else if iterations - best_at > opts.stagnation {
            log::warn!("residual stagnated at {residual:e}");
            break;
        }
        iterations += 1;
        let pg = precondition(&grad, opts.precond_shift);
        let pu = precondition(&u, opts.precond_shift);
        let mu = real_inner(&pg, &u) / real_inner(&pu, &u);
        let dir = pg.axpy(Complex64::new(-mu, 0.0), &pu)?;
        let mut accepted = false;
        let mut hit_boundary = false;
        while tau > 1e-12 {
            let trial = with_mass(&u.axpy(Complex64::new(-tau, 0.0), &dir)?, a);
            if trial.grad_norm_sq() >= rho0 {
                hit_boundary = true;
                tau *= 0.5;
                continue;
            }
            let tp = func.parts(&trial);
            let slack = 256.0 * f64::EPSILON * parts.scale();
            let change = tp.total() - parts.total();
            if change <= slack {
                (lambda, residual, grad) = stationarity(&func, &trial);
                u = trial;
                parts = tp;
                accepted = true;
                tau = (tau * 2.0).min(opts.tau);
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            boundary_stall = hit_boundary;
            break;
        }
        if opts.log_every > 0 && iterations % opts.log_every == 0 {
            energy_log.push((iterations, parts.total()));
        }
    }
    if energy_log.last().map(|e| e.0) != Some(iterations) {
        energy_log.push((iterations, parts.total()));
    }
    let u_a = with_mass(&u, a).map_values(|z| Complex64::new(z.re, 0.0));
    let u_a = with_mass(&u_a, a);
    Ok(GroundStateResult {
        m_a: func.energy(&u_a),
        grad_norm_sq: u_a.grad_norm_sq(),
        u_a,
        a,
        lambda,
        residual,
        iterations,
        converged,
        boundary_stall,
        rho0,
        seed,
        seed_width,
        energy_log,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCurvePoint {
    pub a: f64,
    pub m: f64,
    pub lambda: f64,
    pub grad_norm_sq: f64,
    pub converged: bool,
    /// Largest minus smallest energy across the starts.
    pub spread: f64,
    pub best_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCurve {
    pub points: Vec<MCurvePoint>,
    /// Set when some start failed to converge.
    pub refinement_flag: bool,
}

/// `m(a)` at each mass, keeping the lowest energy over the given seeds.
pub fn m_curve(
    a_list: &[f64],
    c: &InequalityConstants,
    v: &PotentialSpec,
    grid: &GridSpec,
    opts: &OptimizerSettings,
    seeds: &[u64],
) -> Result<MCurve> {
    if seeds.is_empty() {
        return invalid("at least one seed");
    }
    let mut points = Vec::new();
    let mut refinement_flag = false;
    for &a in a_list {
        let runs: Vec<GroundStateResult> =
            seeds.par_iter().map(|&s| minimize_local(a, c, v, grid, opts, s)).collect::<Result<_>>()?;
        refinement_flag |= runs.iter().any(|r| !r.converged);
        let best = runs.iter().min_by(|x, y| x.m_a.total_cmp(&y.m_a)).expect("nonempty");
        let hi = runs.iter().map(|r| r.m_a).fold(f64::NEG_INFINITY, f64::max);
        points.push(MCurvePoint {
            a,
            m: best.m_a,
            lambda: best.lambda,
            grad_norm_sq: best.grad_norm_sq,
            converged: best.converged,
            spread: hi - best.m_a,
            best_seed: best.seed,
        });
    }
    Ok(MCurve { points, refinement_flag })
}

/// `I(u) - ||grad u||^2 f(a, ||grad u||^2)` with `a = ||u||^2`; nonnegative when the
/// constants are valid for `u`.
pub fn lower_bound_gap(func: &EnergyFunctional, u: &SpectralField, c: &InequalityConstants, vneg: f64) -> f64 {
    let rho = u.grad_norm_sq();
    func.energy(u) - rho * f_aux(u.mass(), rho, c, vneg)
}

/// `L^{d/2}` norm of `V_-` sampled on the grid.
pub fn vneg_norm(v: &PotentialSpec, grid: &GridSpec) -> Result<f64> {
    let s = v.negative_part(grid)?;
    Ok(weighted_lp(s.into_iter(), grid.cell_volume(), grid.dim() as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> InequalityConstants {
        InequalityConstants::new(3, 2.5, 7.25, 0.70).unwrap()
    }

    #[test]
    fn q_two_is_exactly_one() {
        let g = GridSpec::new(3, 8, 4.0).unwrap();
        let e = gn_constant_estimate(3, 2.0, &g).unwrap();
        assert_eq!(e.lower_bound, 1.0);
        assert!(gn_constant_estimate(3, 6.0, &g).is_err());
    }

    #[test]
    fn f_aux_limits() {
        let c = consts();
        assert!(f_aux(1.0, 1e-12, &c, 0.0) < -1e3);
        assert!(f_aux(1.0, 1e12, &c, 0.0) < -1e3);
    }

    #[test]
    fn maximum_value_formula() {
        let c = consts();
        let vneg = 2.0;
        let h = c.headroom(vneg);
        for a in [0.1, 1.0, 5.0] {
            let r = rho_max(a, &c);
            let expect = h - c.k() * a.powf(2.0 / 3.0);
            assert!((f_aux(a, r, &c, vneg) - expect).abs() < 1e-10);
        }
        assert!(rho_max(2.0, &c) > rho_max(1.0, &c));
    }

    #[test]
    fn zero_headroom() {
        let c = consts();
        let z = a_zero(&c, c.sobolev_s);
        assert_eq!(z.a0, 0.0);
        assert!(z.warning.is_some());
    }

    #[test]
    fn constants_validation() {
        assert!(InequalityConstants::new(3, 3.5, 1.0, 1.0).is_err());
        assert!(InequalityConstants::new(2, 2.5, 1.0, 1.0).is_err());
        assert!(InequalityConstants::new(3, 2.5, -1.0, 1.0).is_err());
    }
}
