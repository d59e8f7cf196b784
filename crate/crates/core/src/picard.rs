//! Picard iteration for the forced cubic equation
//! `i v_t + H v + sigma |F + v|^2 (F + v) = 0`, `v(0) = v0`, where `F = e^{itH} f`.
//!
//! The map is `Phi(v)(t) = e^{itH} v0 + i sigma int_0^t e^{i(t-s)H} |F+v|^2 (F+v)(s) ds`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, NlsError, Result};
use crate::evolution::{free_trajectory, LinearStepper, Sign, TrajectorySeries};
use crate::potential::PotentialSpec;
use crate::spacetime::{x_norm, y_norm, NormConfig};
use crate::spectral::{sobolev_norm, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    pub delta: f64,
    pub max_iter: usize,
    /// Tolerance on the sup-in-time `H^1` increment.
    pub tol: f64,
    pub horizon: f64,
    pub dt: f64,
    pub sign: Sign,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { delta: 0.05, max_iter: 50, tol: 1e-8, horizon: 0.25, dt: 1.0 / 128.0, sign: Sign::Focusing }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !(self.tol > 0.0) {
            return invalid("delta and tol must be positive");
        }
        if !(self.dt > 0.0 && self.horizon > 0.0) {
            return invalid("dt and horizon must be positive");
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be at least 1");
        }
        let n = (self.horizon / self.dt).round();
        if (n * self.dt - self.horizon).abs() > 1e-9 * self.horizon.max(1.0) {
            return invalid("dt must divide the horizon");
        }
        Ok(())
    }
}

/// Values entering the smallness condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateValues {
    pub x_free: f64,
    pub y_forcing: f64,
    pub passes: bool,
}

impl GateValues {
    pub fn sum(&self) -> f64 {
        self.x_free + self.y_forcing
    }
}

/// `||e^{itH} v0||_X + ||F||_Y` over the interval of `forcing`, compared with `delta`.
pub fn smallness_gate(
    v0: &SpectralField,
    forcing: &TrajectorySeries,
    v_pot: &PotentialSpec,
    cfg: &PicardConfig,
    ncfg: &NormConfig,
) -> Result<GateValues> {
    let dt = forcing.uniform_dt().ok_or_else(|| NlsError::InvalidParameter("forcing must be uniformly sampled".into()))?;
    let (t0, t1) = forcing.interval();
    let free = free_trajectory(v0, v_pot, dt, t1 - t0)?;
    let x_free = x_norm(&free, ncfg)?.total;
    let y_forcing = y_norm(forcing, ncfg)?.total;
    Ok(GateValues { x_free, y_forcing, passes: x_free + y_forcing <= cfg.delta })
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub v: TrajectorySeries,
    /// `F + v`.
    pub u: TrajectorySeries,
    pub increments: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
    /// Sup-in-time `H^1` size of `Phi(v) - v` at the returned `v`.
    pub residual: f64,
    pub aborted: bool,
    pub gate: Option<GateValues>,
}

/// Serializable part of a [`PicardResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSummary {
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
    pub residual: f64,
    pub aborted: bool,
    pub gate: Option<GateValues>,
    pub interval: (f64, f64),
    pub final_v_h1: f64,
    pub final_u_l2: f64,
}

impl PicardResult {
    pub fn summary(&self) -> PicardSummary {
        PicardSummary {
            iterations: self.increments.len(),
            increments: self.increments.clone(),
            contraction_factors: self.contraction_factors.clone(),
            converged: self.converged,
            residual: self.residual,
            aborted: self.aborted,
            gate: self.gate,
            interval: self.v.interval(),
            final_v_h1: sobolev_norm(self.v.last(), 1.0).unwrap_or(f64::NAN),
            final_u_l2: self.u.last().l2_norm(),
        }
    }
}

/// Sup over nodes of the `H^1` distance between two aligned trajectories.
pub fn sup_h1_distance(a: &TrajectorySeries, b: &TrajectorySeries) -> Result<f64> {
    let diff = a.sub(b)?;
    let vals: Vec<f64> = diff.fields().par_iter().map(|f| sobolev_norm(f, 1.0)).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

struct Duhamel<'a> {
    stepper: LinearStepper,
    forcing: &'a TrajectorySeries,
    free: TrajectorySeries,
    dt: f64,
    sigma: f64,
}

impl Duhamel<'_> {
    fn nonlinearity(&self, n: usize, v: &SpectralField) -> Vec<Complex64> {
        self.forcing.fields()[n]
            .values()
            .par_iter()
            .zip(v.values())
            .map(|(f, w)| {
                let u = f + w;
                u * u.norm_sqr()
            })
            .collect()
    }

    /// One application of `Phi`.
    fn apply(&self, v: &TrajectorySeries) -> Result<TrajectorySeries> {
        let grid = *v.grid();
        let nodes = v.len();
        let h = 0.5 * self.dt;
        let coef = Complex64::new(0.0, self.sigma);
        let mut out = Vec::with_capacity(nodes);
        out.push(self.free.fields()[0].clone());
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut nl_prev = self.nonlinearity(0, &v.fields()[0]);
        for n in 1..nodes {
            acc.par_iter_mut().zip(&nl_prev).for_each(|(a, b)| *a += b * h);
            self.stepper.step(&mut acc);
            let nl = self.nonlinearity(n, &v.fields()[n]);
            acc.par_iter_mut().zip(&nl).for_each(|(a, b)| *a += b * h);
            let vals = self.free.fields()[n].values().par_iter().zip(&acc).map(|(f, a)| f + coef * a).collect();
            out.push(SpectralField::from_values(grid, vals)?);
            nl_prev = nl;
        }
        TrajectorySeries::new(v.times().to_vec(), out)
    }
}

fn finite(tr: &TrajectorySeries) -> bool {
    tr.fields().iter().all(|f| f.is_finite())
}

/// Iterates `Phi` from the free evolution of `v0` until the increment falls below `tol`.
///
/// With `ncfg`, the smallness gate is evaluated and stored in the result.
pub fn picard_solve(
    v0: &SpectralField,
    forcing: &TrajectorySeries,
    v_pot: &PotentialSpec,
    cfg: &PicardConfig,
    ncfg: Option<&NormConfig>,
) -> Result<PicardResult> {
    cfg.validate()?;
    v0.grid().check_same(forcing.grid())?;
    let dt = forcing.uniform_dt().ok_or_else(|| NlsError::InvalidParameter("forcing must be uniformly sampled".into()))?;
    if (dt - cfg.dt).abs() > 1e-12 * cfg.dt || (forcing.interval().1 - forcing.interval().0 - cfg.horizon).abs() > 1e-9 {
        return invalid("forcing sampling does not match the Picard step and horizon");
    }
    if forcing.interval().0 != 0.0 {
        return invalid("forcing must start at t = 0");
    }
    let free = free_trajectory(v0, v_pot, dt, cfg.horizon)?;
    let gate = match ncfg {
        Some(n) => {
            let g = GateValues {
                x_free: x_norm(&free, n)?.total,
                y_forcing: y_norm(forcing, n)?.total,
                passes: false,
            };
            let g = GateValues { passes: g.sum() <= cfg.delta, ..g };
            if !g.passes {
                log::warn!("smallness gate fails: {} > {}", g.sum(), cfg.delta);
            }
            Some(g)
        }
        None => None,
    };
    let op = Duhamel {
        stepper: LinearStepper::new(*v0.grid(), v_pot, dt)?,
        forcing,
        free: free.clone(),
        dt,
        sigma: cfg.sign.sigma(),
    };
    let mut v = free;
    let mut increments = Vec::new();
    let mut converged = false;
    let mut aborted = false;
    for _ in 0..cfg.max_iter {
        let next = op.apply(&v)?;
        if !finite(&next) {
            aborted = true;
            break;
        }
        let inc = sup_h1_distance(&next, &v)?;
        increments.push(inc);
        v = next;
        if inc < cfg.tol {
            converged = true;
            break;
        }
    }
    let contraction_factors = increments
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let residual = if aborted {
        f64::NAN
    } else {
        let again = op.apply(&v)?;
        sup_h1_distance(&again, &v)?
    };
    let u = forcing.add(&v)?;
    Ok(PicardResult { v, u, increments, contraction_factors, converged, residual, aborted, gate })
}

/// Search controls for [`continuation_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    pub max_doublings: usize,
    pub horizon_tol: f64,
    pub max_bisections: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { max_doublings: 4, horizon_tol: 1e-2, max_bisections: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub horizon: f64,
    pub gate: GateValues,
    pub converged: bool,
    pub iterations: usize,
    pub max_contraction: Option<f64>,
}

/// Doubles, then bisects, the horizon to bracket the longest interval on which the gate
/// passes for `F = e^{itH} f_omega` and `v0 = 0`. Entries are listed in evaluation order.
pub fn continuation_scan(
    f_omega: &SpectralField,
    v_pot: &PotentialSpec,
    cfg: &PicardConfig,
    ncfg: &NormConfig,
    scan: &ScanSettings,
) -> Result<Vec<ScanEntry>> {
    cfg.validate()?;
    let zero = SpectralField::zeros(*f_omega.grid());
    let eval = |t: f64| -> Result<ScanEntry> {
        let forcing = free_trajectory(f_omega, v_pot, cfg.dt, t)?;
        let c = PicardConfig { horizon: t, ..*cfg };
        let res = picard_solve(&zero, &forcing, v_pot, &c, Some(ncfg))?;
        Ok(ScanEntry {
            horizon: t,
            gate: res.gate.expect("gate requested"),
            converged: res.converged,
            iterations: res.increments.len(),
            max_contraction: res.contraction_factors.iter().copied().reduce(f64::max),
        })
    };
    let mut entries = Vec::new();
    let mut lo = 0.0;
    let mut hi = None;
    for k in 0..=scan.max_doublings {
        let t = cfg.horizon * 2f64.powi(k as i32);
        let e = eval(t)?;
        entries.push(e);
        if e.gate.passes {
            lo = t;
        } else {
            hi = Some(t);
            break;
        }
    }
    let Some(mut hi) = hi else { return Ok(entries) };
    for _ in 0..scan.max_bisections {
        if hi - lo <= scan.horizon_tol {
            break;
        }
        let mid = (((lo + hi) / 2.0) / cfg.dt).round() * cfg.dt;
        if mid <= lo || mid >= hi {
            break;
        }
        let e = eval(mid)?;
        entries.push(e);
        if e.gate.passes {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_converges_immediately() {
        let g = GridSpec::new(2, 16, PI).unwrap();
        let cfg = PicardConfig { horizon: 0.125, dt: 1.0 / 32.0, ..Default::default() };
        let z = SpectralField::zeros(g);
        let forcing = free_trajectory(&z, &PotentialSpec::Zero, cfg.dt, cfg.horizon).unwrap();
        let ncfg = NormConfig::default();
        let r = picard_solve(&z, &forcing, &PotentialSpec::Zero, &cfg, Some(&ncfg)).unwrap();
        assert!(r.converged);
        assert_eq!(r.increments.len(), 1);
        assert_eq!(r.v.last().max_abs(), 0.0);
        let gate = r.gate.unwrap();
        assert_eq!((gate.x_free, gate.y_forcing, gate.passes), (0.0, 0.0, true));
        let gv = smallness_gate(&z, &forcing, &PotentialSpec::Zero, &cfg, &ncfg).unwrap();
        assert_eq!(gv, gate);
    }

    #[test]
    fn rejects_mismatched_sampling() {
        let g = GridSpec::new(1, 16, PI).unwrap();
        let z = SpectralField::zeros(g);
        let forcing = free_trajectory(&z, &PotentialSpec::Zero, 0.1, 0.5).unwrap();
        let cfg = PicardConfig { horizon: 0.5, dt: 0.05, ..Default::default() };
        assert!(picard_solve(&z, &forcing, &PotentialSpec::Zero, &cfg, None).is_err());
        assert!(PicardConfig { tol: 0.0, ..Default::default() }.validate().is_err());
    }
}
