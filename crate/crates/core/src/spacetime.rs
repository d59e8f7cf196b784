//! Space-time norms on trajectories: mixed Strichartz norms, lateral norms along a
//! coordinate direction, the dyadic `X`, `Y`, `G` families and trilinear ratio experiments.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolution::TrajectorySeries;
use crate::spectral::cutoff::CutoffProfile;
use crate::spectral::norms::{weighted_lp, weighted_lp_pairs};
use crate::spectral::{fft, GridSpec, SpectralField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub eps: f64,
    pub s_target: f64,
    /// Dyadic scales to sum over; `None` uses every scale the grid resolves.
    pub dyadic_band: Option<Vec<f64>>,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig { eps: 0.01, s_target: 0.5, dyadic_band: None }
    }
}

impl NormConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 0.05) {
            return invalid(format!("eps = {} outside (0, 0.05]", self.eps));
        }
        if 1.0 / 3.0 + 3.0 * self.eps > self.s_target + 1e-15 {
            return invalid(format!("s = {} below 1/3 + 3 eps", self.s_target));
        }
        if let Some(b) = &self.dyadic_band {
            if b.iter().any(|&n| !(n > 0.0) || (n.log2() - n.log2().round()).abs() > 1e-12) {
                return invalid("dyadic band entries must be powers of two");
            }
        }
        Ok(())
    }

    pub fn band(&self, grid: &GridSpec) -> Vec<f64> {
        self.dyadic_band.clone().unwrap_or_else(|| grid.dyadic_band())
    }
}

fn japanese(n: f64) -> f64 {
    (1.0 + n * n).sqrt()
}

/// Per-snapshot moduli of a field family, with the trapezoid weights of the trajectory.
struct Slab<'a> {
    grid: &'a GridSpec,
    weights: Vec<f64>,
    mags: Vec<Vec<f64>>,
}

fn check_len(tr: &TrajectorySeries) -> Result<()> {
    if tr.len() < 2 {
        return invalid("space-time norms need at least two snapshots");
    }
    Ok(())
}

fn raw_slab(tr: &TrajectorySeries) -> Slab<'_> {
    Slab { grid: tr.grid(), weights: tr.time_weights(), mags: tr.fields().iter().map(|f| f.abs_values()).collect() }
}

fn grad_slab(tr: &TrajectorySeries) -> Vec<Vec<f64>> {
    tr.fields().par_iter().map(|f| f.gradient_magnitude()).collect()
}

/// `L^q_t L^r_x` of the moduli.
fn mixed_of(slab: &Slab, q: f64, r: f64) -> f64 {
    let cell = slab.grid.cell_volume();
    let pairs: Vec<(f64, f64)> = slab
        .mags
        .par_iter()
        .zip(&slab.weights)
        .map(|(m, &w)| (w, weighted_lp(m.iter().copied(), cell, r)))
        .collect();
    weighted_lp_pairs(&pairs, q)
}

/// Outer `L^p` over `x_axis` of inner `L^q` over `(t, x')`; with `grads`, the inner integrand
/// is `|h|^q + |grad h|^q`.
fn lateral_of(slab: &Slab, grads: Option<&[Vec<f64>]>, p: f64, q: f64, axis: usize) -> f64 {
    let g = slab.grid;
    let m = g.points();
    let d = g.dim();
    let stride = m.pow((d - 1 - axis) as u32);
    let h = g.spacing();
    let transverse = h.powi(d as i32 - 1);
    let slice = |j: usize| (j / stride) % m;
    let active: Vec<usize> = (0..slab.mags.len()).filter(|&t| slab.weights[t] > 0.0).collect();
    let peak_of = |t: usize| {
        let mut pk = vec![0.0f64; m];
        for (j, &a) in slab.mags[t].iter().enumerate() {
            let s = slice(j);
            let mut v = a;
            if let Some(gr) = grads {
                v = v.max(gr[t][j]);
            }
            if v > pk[s] {
                pk[s] = v;
            }
        }
        pk
    };
    let per_t: Vec<Vec<f64>> = active.par_iter().map(|&t| peak_of(t)).collect();
    let mut peak = vec![0.0f64; m];
    for pk in &per_t {
        for (a, b) in peak.iter_mut().zip(pk) {
            *a = a.max(*b);
        }
    }
    let inner: Vec<f64> = if q.is_infinite() {
        peak.clone()
    } else {
        let sums: Vec<Vec<f64>> = active
            .par_iter()
            .map(|&t| {
                let mut s = vec![0.0f64; m];
                let w = slab.weights[t] * transverse;
                for (j, &a) in slab.mags[t].iter().enumerate() {
                    let i = slice(j);
                    if peak[i] == 0.0 {
                        continue;
                    }
                    let mut term = (a / peak[i]).powf(q);
                    if let Some(gr) = grads {
                        term += (gr[t][j] / peak[i]).powf(q);
                    }
                    s[i] += w * term;
                }
                s
            })
            .collect();
        let mut total = vec![0.0f64; m];
        for s in &sums {
            for (a, b) in total.iter_mut().zip(s) {
                *a += b;
            }
        }
        peak.iter().zip(&total).map(|(&pk, &s)| if pk == 0.0 { 0.0 } else { pk * s.powf(1.0 / q) }).collect()
    };
    weighted_lp(inner.into_iter(), h, p)
}

/// `||u||_{L^q_t L^r_x}` with trapezoid weights in time.
pub fn mixed_strichartz_norm(tr: &TrajectorySeries, q: f64, r: f64) -> Result<f64> {
    check_len(tr)?;
    if !(q >= 1.0 && r >= 1.0) {
        return invalid("exponents must be at least 1");
    }
    Ok(mixed_of(&raw_slab(tr), q, r))
}

/// Lateral norm `L^{p,q}_{e_ell}` (or `W^{p,q}_{e_ell}` with `with_gradient`); `ell` is 1-based.
pub fn lateral_norm(tr: &TrajectorySeries, p: f64, q: f64, ell: usize, with_gradient: bool) -> Result<f64> {
    check_len(tr)?;
    let axis = tr.grid().check_axis(ell)?;
    if !(p >= 1.0 && q >= 1.0) {
        return invalid("exponents must be at least 1");
    }
    let slab = raw_slab(tr);
    let grads = with_gradient.then(|| grad_slab(tr));
    Ok(lateral_of(&slab, grads.as_deref(), p, q, axis))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    X,
    Y,
    GUpper,
}

/// One weighted piece of a dyadic norm: `value = weight * raw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormComponent {
    pub name: String,
    pub weight: f64,
    pub raw: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicNorm {
    pub n: f64,
    pub components: Vec<NormComponent>,
    pub total: f64,
}

impl DyadicNorm {
    fn sum(n: f64, components: Vec<NormComponent>) -> Self {
        let total = components.iter().map(|c| c.value).sum();
        DyadicNorm { n, components, total }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub per_dyadic: Vec<DyadicNorm>,
    pub total: f64,
    pub interval: (f64, f64),
    /// True when `total` is only an upper bound for the quantity named by `kind`.
    pub upper_bound: bool,
}

fn component(name: impl Into<String>, weight: f64, raw: f64) -> NormComponent {
    NormComponent { name: name.into(), weight, raw, value: weight * raw }
}

/// Moduli of `P_N f`, its gradient, and optionally `P_{N,e_l} P_N f` for each axis.
struct BandData {
    mags: Vec<Vec<f64>>,
    grads: Option<Vec<Vec<f64>>>,
    directional: Vec<Vec<Vec<f64>>>,
}

fn band_data(tr: &TrajectorySeries, n: f64, want_grad: bool, want_dir: bool) -> BandData {
    let g = *tr.grid();
    let c = CutoffProfile;
    let xis: Vec<[f64; 4]> = (0..g.len()).map(|j| g.wavevector(j)).collect();
    let table: Vec<f64> = xis
        .iter()
        .map(|xi| c.lp_multiplier(xi.iter().map(|x| x * x).sum::<f64>().sqrt(), n))
        .collect();
    let d = g.dim();
    let per: Vec<(Vec<f64>, Option<Vec<f64>>, Vec<Vec<f64>>)> = tr
        .fields()
        .par_iter()
        .map(|f| {
            let base: Vec<Complex64> = f.modes().iter().zip(&table).map(|(z, &w)| z * w).collect();
            let inv = |mut buf: Vec<Complex64>| {
                fft::inverse(&g, &mut buf);
                buf
            };
            let mags = inv(base.clone()).iter().map(|z| z.norm()).collect();
            let grads = want_grad.then(|| {
                let mut acc = vec![0.0; g.len()];
                for a in 0..d {
                    let buf: Vec<Complex64> = base
                        .iter()
                        .enumerate()
                        .map(|(j, z)| {
                            let idx = g.unflatten(j)[a];
                            if g.is_nyquist_index(idx) {
                                Complex64::new(0.0, 0.0)
                            } else {
                                z * Complex64::new(0.0, xis[j][a])
                            }
                        })
                        .collect();
                    for (s, z) in acc.iter_mut().zip(inv(buf)) {
                        *s += z.norm_sqr();
                    }
                }
                acc.iter().map(|s| s.sqrt()).collect()
            });
            let directional = if want_dir {
                (0..d)
                    .map(|a| {
                        let buf = base.iter().zip(&xis).map(|(z, xi)| z * c.phi_dir(xi[a].abs() / n)).collect();
                        inv(buf).iter().map(|z| z.norm()).collect()
                    })
                    .collect()
            } else {
                Vec::new()
            };
            (mags, grads, directional)
        })
        .collect();
    let mut out = BandData { mags: Vec::new(), grads: want_grad.then(Vec::new), directional: vec![Vec::new(); if want_dir { d } else { 0 }] };
    for (m, gr, dir) in per {
        out.mags.push(m);
        if let (Some(v), Some(x)) = (out.grads.as_mut(), gr) {
            v.push(x);
        }
        for (a, x) in dir.into_iter().enumerate() {
            out.directional[a].push(x);
        }
    }
    out
}

/// The `X_N` pieces of a trajectory at scale `N`.
pub fn x_dyadic(tr: &TrajectorySeries, n: f64, cfg: &NormConfig) -> Result<DyadicNorm> {
    check_len(tr)?;
    cfg.validate()?;
    let e = cfg.eps;
    let data = band_data(tr, n, true, false);
    let slab = Slab { grid: tr.grid(), weights: tr.time_weights(), mags: data.mags };
    let mut comps = vec![
        component("L2L4", n, mixed_of(&slab, 2.0, 4.0)),
        component("L3L3", n, mixed_of(&slab, 3.0, 3.0)),
        component("L6L12/5", n, mixed_of(&slab, 6.0, 2.4)),
    ];
    for a in 0..tr.grid().dim() {
        let raw = lateral_of(&slab, data.grads.as_deref(), 4.0 / (2.0 - e), 4.0 / e, a);
        comps.push(component(format!("W_e{}", a + 1), n.powf(-0.5 + e), raw));
    }
    Ok(DyadicNorm::sum(n, comps))
}

/// The `Y_N` pieces of a trajectory at scale `N`.
pub fn y_dyadic(tr: &TrajectorySeries, n: f64, cfg: &NormConfig) -> Result<DyadicNorm> {
    check_len(tr)?;
    cfg.validate()?;
    let e = cfg.eps;
    let data = band_data(tr, n, true, true);
    let weights = tr.time_weights();
    let slab = Slab { grid: tr.grid(), weights: weights.clone(), mags: data.mags };
    let jn = japanese(n).powf(1.0 / 3.0 + 3.0 * e);
    let mut comps = vec![
        component("L3L6", jn, mixed_of(&slab, 3.0, 6.0)),
        component("L6L6", 1.0, mixed_of(&slab, 6.0, 6.0)),
    ];
    for a in 0..tr.grid().dim() {
        let raw = lateral_of(&slab, data.grads.as_deref(), 4.0 / (2.0 - e), 4.0 / e, a);
        comps.push(component(format!("W_e{}", a + 1), n.powf(-1.0 / 6.0), raw));
    }
    for (a, dir) in data.directional.into_iter().enumerate() {
        let ds = Slab { grid: tr.grid(), weights: weights.clone(), mags: dir };
        let raw = lateral_of(&ds, None, 4.0 / e, 4.0 / (2.0 - e), a);
        comps.push(component(format!("Ldir_e{}", a + 1), jn * n.powf(0.5 - e), raw));
    }
    Ok(DyadicNorm::sum(n, comps))
}

/// Upper bound for `G_N`: the smaller of the two pure splittings.
pub fn g_dyadic_upper(tr: &TrajectorySeries, n: f64, cfg: &NormConfig) -> Result<DyadicNorm> {
    check_len(tr)?;
    cfg.validate()?;
    let e = cfg.eps;
    let data = band_data(tr, n, false, false);
    let slab = Slab { grid: tr.grid(), weights: tr.time_weights(), mags: data.mags };
    let l1l2 = component("L1L2", n, mixed_of(&slab, 1.0, 2.0));
    let mut lateral_sum = 0.0;
    let mut lateral = Vec::new();
    for a in 0..tr.grid().dim() {
        let raw = lateral_of(&slab, None, 4.0 / (4.0 - e), 4.0 / (2.0 + e), a);
        let c = component(format!("L_e{}", a + 1), n.powf(0.5 + e), raw);
        lateral_sum += c.value;
        lateral.push(c);
    }
    // report only the branch realizing the minimum so that components sum to the total
    let comps = if l1l2.value <= lateral_sum { vec![l1l2] } else { lateral };
    Ok(DyadicNorm::sum(n, comps))
}

fn aggregate(
    tr: &TrajectorySeries,
    cfg: &NormConfig,
    kind: NormKind,
    f: fn(&TrajectorySeries, f64, &NormConfig) -> Result<DyadicNorm>,
) -> Result<NormReport> {
    check_len(tr)?;
    cfg.validate()?;
    let per_dyadic = cfg.band(tr.grid()).into_iter().map(|n| f(tr, n, cfg)).collect::<Result<Vec<_>>>()?;
    let total = per_dyadic.iter().map(|p| p.total * p.total).sum::<f64>().sqrt();
    Ok(NormReport { kind, per_dyadic, total, interval: tr.interval(), upper_bound: kind == NormKind::GUpper })
}

pub fn x_norm(tr: &TrajectorySeries, cfg: &NormConfig) -> Result<NormReport> {
    aggregate(tr, cfg, NormKind::X, x_dyadic)
}

pub fn y_norm(tr: &TrajectorySeries, cfg: &NormConfig) -> Result<NormReport> {
    aggregate(tr, cfg, NormKind::Y, y_dyadic)
}

pub fn g_norm_upper(tr: &TrajectorySeries, cfg: &NormConfig) -> Result<NormReport> {
    aggregate(tr, cfg, NormKind::GUpper, g_dyadic_upper)
}

/// Dyadic scales `(N, N1, N2, N3)` of a trilinear experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearBands {
    pub n: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearOutcome {
    pub case: u8,
    pub bands: TrilinearBands,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when the right-hand side vanishes but the left does not.
    pub ratio: Option<f64>,
}

/// Which inputs carry the `Y` norm (forcing) rather than `X`, per case.
pub fn trilinear_roles(case: u8) -> Option<[bool; 3]> {
    Some(match case {
        1 => [false, false, false],
        2 => [false, true, false],
        3 => [false, false, true],
        4 => [false, true, true],
        5 => [true, true, true],
        6 => [true, false, false],
        7 => [true, true, false],
        8 => [true, false, true],
        _ => return None,
    })
}

/// Frequency-factor bracket on the right-hand side, including the leading `N` for cases 1-4.
pub fn trilinear_bracket(case: u8, b: &TrilinearBands, eps: f64) -> f64 {
    let TrilinearBands { n, n1, n2, n3 } = *b;
    let r32 = n3 / n2;
    let r31 = n3 / n1;
    let r21 = n2 / n1;
    let t = 1.0 / 3.0;
    match case {
        1 => n * (r32.powf(2.0 * t) / n1 + r32.powf(t) + r31.powf(t) + r21.powf(t)),
        2 => n * (r32.powf(t) / n1 + r32.powf(t) + r21.powf(2.0 * t) + r21.powf(t)),
        3 => n * (r32.powf(2.0 * t) / n1 + r32.powf(2.0 * t) + r21.powf(2.0 * t) + r32),
        4 => n * (r32.powf(t) / n1 + r32.powf(t) + r21.powf(2.0 * t) + r32),
        5 => (n / n1).powf(0.5 + eps) * r31.powf(1.0 / 6.0),
        6 => (n / n2).powf(0.5 + eps) * r32.powf(0.5 - eps),
        7 => (n / n3).powf(0.5 + eps) * r21.powf(1.0 / 6.0),
        8 => (n / n2).powf(0.5 + eps) * r32.powf(1.0 / 6.0),
        _ => f64::NAN,
    }
}

fn project_band(tr: &TrajectorySeries, n: f64) -> TrajectorySeries {
    tr.map(|f| crate::spectral::lp_project(f, n).field)
}

/// Ratio of the measured left-hand side of a trilinear estimate to its right-hand side.
///
/// Inputs are `(a, b, c)` in the order of the product; `case` selects the estimate. The
/// lateral output norm of cases 5-8 is taken along axis `ell` (1-based).
pub fn trilinear_ratio(
    a: &TrajectorySeries,
    b: &TrajectorySeries,
    c: &TrajectorySeries,
    bands: TrilinearBands,
    case: u8,
    ell: usize,
    cfg: &NormConfig,
) -> Result<TrilinearOutcome> {
    cfg.validate()?;
    let roles = trilinear_roles(case).ok_or_else(|| crate::error::NlsError::InvalidParameter(format!("case {case} outside 1..=8")))?;
    let TrilinearBands { n, n1, n2, n3 } = bands;
    if !(n > 0.0 && n1 >= n2 && n2 >= n3 && n3 > 0.0) {
        return invalid("trilinear bands need N1 >= N2 >= N3 > 0 and N > 0");
    }
    let axis = a.grid().check_axis(ell)?;
    let pa = project_band(a, n1);
    let pb = project_band(b, n2);
    let pc = project_band(c, n3);
    let product = TrajectorySeries::new(
        pa.times().to_vec(),
        pa.fields()
            .iter()
            .zip(pb.fields())
            .zip(pc.fields())
            .map(|((x, y), z)| {
                let v = x.values().iter().zip(y.values()).zip(z.values()).map(|((p, q), r)| p * q * r).collect();
                SpectralField::from_values(*x.grid(), v)
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    b.grid().check_same(a.grid())?;
    c.grid().check_same(a.grid())?;
    let out = project_band(&product, n);
    let lhs = if case <= 4 {
        let pairs: Vec<(f64, f64)> = out
            .fields()
            .iter()
            .zip(out.time_weights())
            .map(|(f, w)| (w, (f.mass() + f.grad_norm_sq()).sqrt()))
            .collect();
        n * pairs.iter().map(|(w, x)| w * x).sum::<f64>()
    } else {
        let e = cfg.eps;
        let slab = raw_slab(&out);
        let grads = grad_slab(&out);
        n.powf(0.5 + e) * lateral_of(&slab, Some(&grads), 4.0 / (4.0 - e), 4.0 / (2.0 + e), axis)
    };
    let norm_of = |tr: &TrajectorySeries, scale: f64, forcing: bool| -> Result<f64> {
        Ok(if forcing { y_dyadic(tr, scale, cfg)?.total } else { x_dyadic(tr, scale, cfg)?.total })
    };
    let rhs = trilinear_bracket(case, &bands, cfg.eps)
        * norm_of(&pa, n1, roles[0])?
        * norm_of(&pb, n2, roles[1])?
        * norm_of(&pc, n3, roles[2])?;
    let ratio = if lhs == 0.0 {
        Some(0.0)
    } else if rhs > 0.0 && rhs.is_finite() {
        Some(lhs / rhs)
    } else {
        None
    };
    Ok(TrilinearOutcome { case, bands, lhs, rhs, ratio })
}
