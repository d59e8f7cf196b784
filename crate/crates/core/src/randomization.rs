//! Wiener randomization `f^w = sum_k g_k P_k f` and Monte Carlo tail/moment diagnostics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::cutoff::{CutoffProfile, UNIT_SUPPORT};
use crate::spectral::{unit_lattice, unit_project, SpectralField, MAX_DIM};

/// Law of the coefficients `g_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// Independent complex Gaussians with `E|g|^2 = 1`.
    #[default]
    Gaussian,
    /// Every `g_k = 1`.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSeedPlan {
    pub seed: u64,
    #[serde(default)]
    pub law: Law,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit seed from `seed` and a label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix(splitmix(seed) ^ splitmix(label.wrapping_mul(0xD6E8_FEB8_6659_FD93)))
}

/// Derives a seed from a textual label.
pub fn derive_seed_str(seed: u64, label: &str) -> u64 {
    label.bytes().fold(derive_seed(seed, 0x4C_4142_454C), |acc, b| derive_seed(acc, b as u64))
}

impl RandomSeedPlan {
    pub fn gaussian(seed: u64) -> Self {
        RandomSeedPlan { seed, law: Law::Gaussian }
    }

    pub fn deterministic() -> Self {
        RandomSeedPlan { seed: 0, law: Law::Deterministic }
    }

    /// Plan for the `i`-th Monte Carlo sample.
    pub fn sample(&self, i: u64) -> Self {
        RandomSeedPlan { seed: derive_seed(self.seed, i), law: self.law }
    }

    /// The coefficient `g_k`; a pure function of the seed and `k`.
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        match self.law {
            Law::Deterministic => Complex64::new(1.0, 0.0),
            Law::Gaussian => {
                let mut h = splitmix(self.seed);
                for &kj in k.iter().take(MAX_DIM) {
                    h = splitmix(h ^ (kj as u64));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(h);
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }

    /// Lattice points with `P_k f` nonzero.
    pub fn band(&self, f: &SpectralField) -> Vec<[i64; MAX_DIM]> {
        let tol = 1e-14 * f.l2_norm().max(f64::MIN_POSITIVE);
        unit_lattice(f.grid())
            .into_iter()
            .filter(|k| unit_project(f, k).field.l2_norm() > tol)
            .collect()
    }
}

/// Wiener randomization of `f` under `plan`.
pub fn randomize(f: &SpectralField, plan: &RandomSeedPlan) -> SpectralField {
    let g = *f.grid();
    let d = g.dim();
    let c = CutoffProfile;
    let kmax = (g.nyquist() + UNIT_SUPPORT).floor() as i64;
    let side = (2 * kmax + 1) as usize;
    let coeffs: Vec<Complex64> = (0..side.pow(d as u32))
        .into_par_iter()
        .map(|mut j| {
            let mut k = [0i64; MAX_DIM];
            for a in (0..d).rev() {
                k[a] = (j % side) as i64 - kmax;
                j /= side;
            }
            plan.coefficient(&k[..d])
        })
        .collect();
    let modes = f
        .modes()
        .par_iter()
        .enumerate()
        .map(|(j, fm)| {
            let xi = g.wavevector(j);
            // each axis meets at most two unit bumps
            let mut cand = [[(0i64, 0.0f64); 2]; MAX_DIM];
            for a in 0..d {
                let base = xi[a].floor() as i64;
                cand[a] = [
                    (base, c.unit_bump_1d(xi[a] - base as f64)),
                    (base + 1, c.unit_bump_1d(xi[a] - (base + 1) as f64)),
                ];
            }
            let mut mult = Complex64::new(0.0, 0.0);
            for combo in 0..(1usize << d) {
                let mut w = 1.0;
                let mut flat = 0usize;
                for a in 0..d {
                    let (k, b) = cand[a][(combo >> a) & 1];
                    w *= b;
                    if w == 0.0 {
                        break;
                    }
                    flat = flat * side + (k + kmax) as usize;
                }
                if w != 0.0 {
                    mult += coeffs[flat] * w;
                }
            }
            fm * mult
        })
        .collect();
    SpectralField::from_modes(g, modes).expect("same grid")
}

/// Result of a Monte Carlo moment estimate of `sum_n c_n g_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub samples: usize,
    /// Empirical `L^p_w` norm.
    pub lp_norm: f64,
    pub coeff_l2: f64,
    /// `lp_norm / (sqrt(p) * coeff_l2)`.
    pub ratio: f64,
}

pub fn moment_estimate(coeffs: &[Complex64], p: f64, n: usize, plan: &RandomSeedPlan) -> Result<MomentEstimate> {
    if !(p >= 2.0) {
        return invalid(format!("moment exponent {p} below 2"));
    }
    if n < 100 {
        return invalid(format!("{n} samples; need at least 100"));
    }
    let draws: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let sp = plan.sample(i);
            coeffs
                .iter()
                .enumerate()
                .map(|(idx, c)| c * sp.coefficient(&[idx as i64]))
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    let lp_norm = crate::spectral::norms::weighted_lp(draws.iter().copied(), 1.0 / n as f64, p);
    let coeff_l2 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let ratio = if coeff_l2 > 0.0 { lp_norm / (p.sqrt() * coeff_l2) } else { 0.0 };
    Ok(MomentEstimate { p, samples: n, lp_norm, coeff_l2, ratio })
}

/// Empirical exceedance probabilities of a random norm and a Gaussian-tail fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub lambdas: Vec<f64>,
    pub empirical_prob: Vec<f64>,
    /// Slope of `log p` against `lambda^2`.
    pub fitted_slope: f64,
    pub r_squared: f64,
    pub n_samples: usize,
    pub degenerate: bool,
}

/// Least-squares line `y = a + b x`; returns `(b, r^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some((slope, r2))
}

/// Builds a [`TailReport`] from precomputed samples.
pub fn tail_report(samples: &[f64], lambdas: &[f64]) -> TailReport {
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(f64::total_cmp);
    let n = samples.len();
    let empirical_prob: Vec<f64> = lambdas
        .iter()
        .map(|&l| samples.iter().filter(|&&s| s > l).count() as f64 / n.max(1) as f64)
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&empirical_prob)
        .filter(|(_, &p)| p > 0.0)
        .map(|(l, p)| (l * l, p.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys);
    TailReport {
        degenerate: fit.is_none(),
        fitted_slope: fit.map_or(0.0, |f| f.0),
        r_squared: fit.map_or(0.0, |f| f.1),
        lambdas,
        empirical_prob,
        n_samples: n,
    }
}

/// Samples `norm_eval(randomize(f))` over `n` derived seeds and fits the tail.
pub fn tail_diagnostic<E>(
    f: &SpectralField,
    norm_eval: E,
    lambdas: &[f64],
    n: usize,
    plan: &RandomSeedPlan,
) -> Result<TailReport>
where
    E: Fn(&SpectralField) -> Result<f64> + Sync,
{
    if n < 200 {
        return invalid(format!("{n} samples; need at least 200"));
    }
    let samples = tail_samples(f, norm_eval, n, plan)?;
    Ok(tail_report(&samples, lambdas))
}

/// Values of `norm_eval` on `n` independent randomizations, in sample order.
pub fn tail_samples<E>(f: &SpectralField, norm_eval: E, n: usize, plan: &RandomSeedPlan) -> Result<Vec<f64>>
where
    E: Fn(&SpectralField) -> Result<f64> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| norm_eval(&randomize(f, &plan.sample(i))))
        .collect()
}
