//! Split-step Fourier integration of `i u_t + H u + sigma g(|u|) u = 0` with `H = Delta - V`.
//!
//! The linear group is `e^{itH}`: a mode `e^{i xi.x}` picks up the phase `e^{-it|xi|^2}`.
//! `sigma = +1` is focusing.

mod trajectory;

pub use trajectory::TrajectorySeries;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, NlsError, Result};
use crate::potential::PotentialSpec;
use crate::spectral::{fft, GridSpec, SpectralField};

/// Amplitude above which a focusing run is declared blowup-suspect.
pub const BLOWUP_AMPLITUDE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `|u|^2 u`.
    Cubic,
    /// `|u|^{q-2} u`, plus `|u|^{2*-2} u` with `2* = 2d/(d-2)` when `include_critical`.
    Mixed { q: f64, include_critical: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[default]
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn sigma(self) -> f64 {
        match self {
            Sign::Focusing => 1.0,
            Sign::Defocusing => -1.0,
        }
    }
}

/// Critical Sobolev exponent `2d/(d-2)`.
pub fn critical_exponent(d: usize) -> f64 {
    2.0 * d as f64 / (d as f64 - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub sign: Sign,
    /// Steps between stored snapshots.
    #[serde(default = "one")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

/// Time-stepping scheme of the nonlinear flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Second-order symmetric split step.
    #[default]
    Strang,
    /// Triple-jump composition of split steps, fourth order.
    Yoshida4,
}

impl Scheme {
    /// Substep fractions of one full step.
    pub fn weights(self) -> Vec<f64> {
        match self {
            Scheme::Strang => vec![1.0],
            Scheme::Yoshida4 => {
                let c = 2f64.powf(1.0 / 3.0);
                let w1 = 1.0 / (2.0 - c);
                vec![w1, -c * w1, w1]
            }
        }
    }
}

fn one() -> usize {
    1
}

impl EvolveConfig {
    pub fn cubic(dt: f64) -> Self {
        EvolveConfig { dt, nonlinearity: Nonlinearity::Cubic, sign: Sign::Focusing, snapshot_every: 1, scheme: Scheme::Strang }
    }

    pub fn mixed(dt: f64, q: f64, include_critical: bool) -> Self {
        EvolveConfig {
            dt,
            nonlinearity: Nonlinearity::Mixed { q, include_critical },
            sign: Sign::Focusing,
            snapshot_every: 1,
            scheme: Scheme::Strang,
        }
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_snapshot_every(mut self, k: usize) -> Self {
        self.snapshot_every = k;
        self
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return invalid(format!("time step {} must be positive", self.dt));
        }
        if self.snapshot_every == 0 {
            return invalid("snapshot cadence must be at least 1");
        }
        if let Nonlinearity::Mixed { q, include_critical } = self.nonlinearity {
            let d = grid.dim() as f64;
            if !(q > 2.0 && q < 2.0 + 4.0 / d) {
                return invalid(format!("q = {q} outside (2, 2 + 4/d)"));
            }
            if include_critical && grid.dim() < 3 {
                return invalid("critical term needs d >= 3");
            }
        }
        Ok(())
    }

    /// Pointwise `g(|u|)` so that the nonlinearity is `g(|u|) u`.
    fn gain(&self, d: usize) -> impl Fn(f64) -> f64 {
        let (q, crit) = match self.nonlinearity {
            Nonlinearity::Cubic => (4.0, None),
            Nonlinearity::Mixed { q, include_critical } => {
                (q, include_critical.then(|| critical_exponent(d)))
            }
        };
        move |a: f64| {
            let mut g = if q == 4.0 { a * a } else { a.powf(q - 2.0) };
            if let Some(c) = crit {
                g += a.powf(c - 2.0);
            }
            g
        }
    }

    /// Pointwise nonlinear potential density `G(|u|)` with `G' = g(|u|)|u|`.
    fn density(&self, d: usize) -> impl Fn(f64) -> f64 {
        let (q, crit) = match self.nonlinearity {
            Nonlinearity::Cubic => (4.0, None),
            Nonlinearity::Mixed { q, include_critical } => {
                (q, include_critical.then(|| critical_exponent(d)))
            }
        };
        move |a: f64| {
            let mut s = a.powf(q) / q;
            if let Some(c) = crit {
                s += a.powf(c) / c;
            }
            s
        }
    }
}

/// `||u||_2^2`.
pub fn mass(u: &SpectralField) -> f64 {
    u.mass()
}

/// `1/2 ||grad u||^2 + 1/2 int V|u|^2 - sigma int G(|u|)`, the conserved energy.
pub fn energy(u: &SpectralField, cfg: &EvolveConfig, v: &PotentialSpec) -> Result<f64> {
    let vs = v.sample(u.grid())?;
    Ok(energy_with_samples(u, cfg, &vs))
}

pub fn energy_with_samples(u: &SpectralField, cfg: &EvolveConfig, vs: &[f64]) -> f64 {
    let g = u.grid();
    let dens = cfg.density(g.dim());
    let vals = u.values();
    let (pot, nl) = crate::spectral::block_reduce(
        vals.len(),
        (0.0, 0.0),
        |j| {
            let a = vals[j].norm();
            (vs[j] * a * a, dens(a))
        },
        |x, y| (x.0 + y.0, x.1 + y.1),
    );
    let cv = g.cell_volume();
    0.5 * u.grad_norm_sq() + 0.5 * pot * cv - cfg.sign.sigma() * nl * cv
}

/// One step of the linear flow `e^{i dt H}`, Strang-split between `V` and `Delta`.
#[derive(Debug, Clone)]
pub struct LinearStepper {
    grid: GridSpec,
    kinetic: Vec<Complex64>,
    half_potential: Option<Vec<Complex64>>,
}

impl LinearStepper {
    /// `dt` may be negative for backward steps.
    pub fn new(grid: GridSpec, v: &PotentialSpec, dt: f64) -> Result<Self> {
        let kinetic = grid.freq_sq_table().into_iter().map(|k2| Complex64::from_polar(1.0, -dt * k2)).collect();
        let half_potential = if v.is_zero() {
            None
        } else {
            Some(v.sample(&grid)?.into_iter().map(|vv| Complex64::from_polar(1.0, -0.5 * dt * vv)).collect())
        };
        Ok(LinearStepper { grid, kinetic, half_potential })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Kinetic substep on physical values.
    pub(crate) fn kinetic_step(&self, buf: &mut [Complex64]) {
        fft::forward(&self.grid, buf);
        buf.par_iter_mut().zip(&self.kinetic).for_each(|(z, k)| *z *= k);
        fft::inverse(&self.grid, buf);
    }

    /// Advances physical values by one step in place.
    pub fn step(&self, buf: &mut [Complex64]) {
        if let Some(p) = &self.half_potential {
            buf.par_iter_mut().zip(p).for_each(|(z, w)| *z *= w);
        }
        self.kinetic_step(buf);
        if let Some(p) = &self.half_potential {
            buf.par_iter_mut().zip(p).for_each(|(z, w)| *z *= w);
        }
    }

    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        let mut buf = f.values().to_vec();
        self.step(&mut buf);
        SpectralField::from_values(self.grid, buf).expect("same grid")
    }
}

fn step_count(t: f64, dt: f64) -> Result<i64> {
    if !(dt.is_finite() && dt > 0.0) {
        return invalid(format!("time step {dt} must be positive"));
    }
    let n = (t / dt).round();
    if (n * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
        return invalid(format!("time step {dt} does not divide {t}"));
    }
    Ok(n as i64)
}

/// `e^{itH} f`, exact in Fourier space when `V = 0`, Strang-split otherwise.
pub fn linear_propagate(f: &SpectralField, t: f64, v: &PotentialSpec, dt: f64) -> Result<SpectralField> {
    let n = step_count(t, dt)?;
    if n == 0 {
        return Ok(f.clone());
    }
    if v.is_zero() {
        let table: Vec<Complex64> =
            f.grid().freq_sq_table().into_iter().map(|k2| Complex64::from_polar(1.0, -t * k2)).collect();
        return f.apply_mode_table(&table);
    }
    let stepper = LinearStepper::new(*f.grid(), v, dt * n.signum() as f64)?;
    let mut buf = f.values().to_vec();
    for _ in 0..n.abs() {
        stepper.step(&mut buf);
    }
    SpectralField::from_values(*f.grid(), buf)
}

/// Samples `e^{itH} f` at `t = 0, dt, ..., horizon`.
pub fn free_trajectory(f: &SpectralField, v: &PotentialSpec, dt: f64, horizon: f64) -> Result<TrajectorySeries> {
    let n = step_count(horizon, dt)?;
    if n <= 0 {
        return invalid("free trajectory needs a positive horizon");
    }
    let stepper = LinearStepper::new(*f.grid(), v, dt)?;
    let mut times = Vec::with_capacity(n as usize + 1);
    let mut fields = Vec::with_capacity(n as usize + 1);
    let mut buf = f.values().to_vec();
    times.push(0.0);
    fields.push(f.clone());
    for i in 1..=n {
        stepper.step(&mut buf);
        times.push(if i == n { horizon } else { dt * i as f64 });
        fields.push(SpectralField::from_values(*f.grid(), buf.clone())?);
    }
    TrajectorySeries::new(times, fields)
}

/// How an observed evolution ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveStatus {
    pub steps_taken: usize,
    pub final_time: f64,
    pub blowup_suspect: bool,
    pub stopped_by_observer: bool,
}

/// Full-nonlinear integrator with pointwise phase substeps.
pub struct NlsStepper {
    substeps: Vec<(LinearStepper, f64)>,
    cfg: EvolveConfig,
    potential: Vec<f64>,
}

impl NlsStepper {
    /// `dt` carries the direction of time.
    pub fn new(grid: GridSpec, cfg: &EvolveConfig, v: &PotentialSpec, dt: f64) -> Result<Self> {
        cfg.validate(&grid)?;
        let substeps = cfg
            .scheme
            .weights()
            .into_iter()
            .map(|w| Ok((LinearStepper::new(grid, &PotentialSpec::Zero, w * dt)?, w * dt)))
            .collect::<Result<_>>()?;
        Ok(NlsStepper { substeps, cfg: *cfg, potential: v.sample(&grid)? })
    }

    fn phase(&self, buf: &mut [Complex64], dt: f64) {
        let gain = self.cfg.gain(self.substeps[0].0.grid().dim());
        let sigma = self.cfg.sign.sigma();
        let h = 0.5 * dt;
        buf.par_iter_mut().zip(&self.potential).for_each(|(z, &vv)| {
            let theta = h * (sigma * gain(z.norm()) - vv);
            *z *= Complex64::from_polar(1.0, theta);
        });
    }

    pub fn step(&self, buf: &mut [Complex64]) {
        for (linear, dt) in &self.substeps {
            self.phase(buf, *dt);
            linear.kinetic_step(buf);
            self.phase(buf, *dt);
        }
    }
}

fn blown_up(buf: &[Complex64]) -> bool {
    buf.iter().any(|z| !(z.norm() <= BLOWUP_AMPLITUDE))
}

/// Integrates from `u0` over `[0, horizon]` (backward when `horizon < 0`), calling
/// `observe(t, u)` at `t = 0`, every `snapshot_every` steps, and at the end. The observer
/// returns `false` to stop early.
pub fn evolve_observed(
    u0: &SpectralField,
    cfg: &EvolveConfig,
    v: &PotentialSpec,
    horizon: f64,
    mut observe: impl FnMut(f64, &SpectralField) -> Result<bool>,
) -> Result<EvolveStatus> {
    cfg.validate(u0.grid())?;
    let n = step_count(horizon, cfg.dt)?;
    let dir = if n < 0 { -1.0 } else { 1.0 };
    let stepper = NlsStepper::new(*u0.grid(), cfg, v, dir * cfg.dt)?;
    let mut status = EvolveStatus { steps_taken: 0, final_time: 0.0, blowup_suspect: false, stopped_by_observer: false };
    if !observe(0.0, u0)? {
        status.stopped_by_observer = true;
        return Ok(status);
    }
    let mut buf = u0.values().to_vec();
    let total = n.unsigned_abs() as usize;
    for i in 1..=total {
        stepper.step(&mut buf);
        status.steps_taken = i;
        status.final_time = if i == total { horizon } else { dir * cfg.dt * i as f64 };
        if blown_up(&buf) {
            status.blowup_suspect = true;
            log::warn!("amplitude check failed at t = {}", status.final_time);
            return Ok(status);
        }
        if i % cfg.snapshot_every == 0 || i == total {
            let f = SpectralField::from_values(*u0.grid(), buf.clone())?;
            if !observe(status.final_time, &f)? {
                status.stopped_by_observer = true;
                return Ok(status);
            }
        }
    }
    Ok(status)
}

/// Stored snapshots of the nonlinear flow. A negative horizon integrates backward; the
/// series is then listed in increasing time, ending at `t = 0`.
pub fn nls_evolve(u0: &SpectralField, cfg: &EvolveConfig, v: &PotentialSpec, horizon: f64) -> Result<TrajectorySeries> {
    let mut times = Vec::new();
    let mut fields = Vec::new();
    let status = evolve_observed(u0, cfg, v, horizon, |t, f| {
        times.push(t);
        fields.push(f.clone());
        Ok(true)
    })?;
    if horizon < 0.0 {
        times.reverse();
        fields.reverse();
    }
    let mut series = TrajectorySeries::new(times, fields)?;
    series.blowup_suspect = status.blowup_suspect;
    Ok(series)
}

/// Final state of the nonlinear flow at `horizon`.
pub fn nls_final(u0: &SpectralField, cfg: &EvolveConfig, v: &PotentialSpec, horizon: f64) -> Result<SpectralField> {
    let c = cfg.with_snapshot_every(usize::MAX);
    let mut last = None;
    let status = evolve_observed(u0, &c, v, horizon, |_, f| {
        last = Some(f.clone());
        Ok(true)
    })?;
    if status.blowup_suspect {
        return Err(NlsError::Numerical(format!("blowup suspected at t = {}", status.final_time)));
    }
    Ok(last.expect("initial state observed"))
}
