//! External potentials `V`, their Kato and `L^{d/2}` norms, and the admissibility check.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, NlsError, Result};
use crate::spectral::{fft, GridSpec, SpectralField};

/// A real potential on the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `V(x) = -depth * exp(-|x|^2 / (2 width^2))`.
    GaussianWell { depth: f64, width: f64 },
    /// `V(x) = -strength * max(|x|, cutoff)^(-exponent)`.
    TruncatedInversePower { strength: f64, exponent: f64, cutoff: f64 },
    /// Grid samples; imaginary parts must vanish.
    Tabulated(SpectralField),
}

/// Volume of the unit ball in dimension `d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => f64::NAN,
    }
}

/// Admissibility threshold `d (d-2) alpha(d)` for the Kato norm of `V_-`.
pub fn kato_threshold(d: usize) -> f64 {
    (d * (d.saturating_sub(2))) as f64 * unit_ball_volume(d)
}

impl PotentialSpec {
    /// The default well, with Kato norm of `V_-` at the origin equal to half the threshold.
    ///
    /// Dimensions below three reuse the three-dimensional parameters.
    pub fn default_well(d: usize) -> Self {
        if d >= 4 {
            PotentialSpec::GaussianWell { depth: 1.0 / (PI / 2.0).sqrt(), width: 1.0 }
        } else {
            PotentialSpec::GaussianWell { depth: 0.5, width: 1.0 }
        }
    }

    pub fn tabulated(field: SpectralField) -> Result<Self> {
        if field.values().iter().any(|z| z.im.abs() > 1e-12 * (1.0 + z.re.abs())) {
            return invalid("tabulated potential must be real");
        }
        Ok(PotentialSpec::Tabulated(field))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PotentialSpec::Zero)
    }

    /// Multiplies the potential by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::GaussianWell { depth, width } => {
                PotentialSpec::GaussianWell { depth: depth * c, width: *width }
            }
            PotentialSpec::TruncatedInversePower { strength, exponent, cutoff } => {
                PotentialSpec::TruncatedInversePower { strength: strength * c, exponent: *exponent, cutoff: *cutoff }
            }
            PotentialSpec::Tabulated(f) => PotentialSpec::Tabulated(f.scale_real(c)),
        }
    }

    fn check_params(&self) -> Result<()> {
        match *self {
            PotentialSpec::GaussianWell { depth, width } => {
                if !(depth.is_finite() && width.is_finite() && width > 0.0) {
                    return invalid("gaussian well needs finite depth and positive width");
                }
            }
            PotentialSpec::TruncatedInversePower { strength, exponent, cutoff }
                if !(strength.is_finite() && exponent > 0.0 && cutoff > 0.0) => {
                    return invalid("inverse power needs positive exponent and cutoff");
                }
            _ => {}
        }
        Ok(())
    }

    /// Samples `V` at every grid point.
    pub fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        self.check_params()?;
        let radius = |j: usize| grid.position(j).iter().map(|x| x * x).sum::<f64>().sqrt();
        let n = grid.len();
        Ok(match self {
            PotentialSpec::Zero => vec![0.0; n],
            PotentialSpec::GaussianWell { depth, width } => (0..n)
                .map(|j| -depth * (-radius(j).powi(2) / (2.0 * width * width)).exp())
                .collect(),
            PotentialSpec::TruncatedInversePower { strength, exponent, cutoff } => (0..n)
                .map(|j| -strength * radius(j).max(*cutoff).powf(-exponent))
                .collect(),
            PotentialSpec::Tabulated(f) => {
                grid.check_same(f.grid())?;
                f.real_parts()
            }
        })
    }

    /// Negative part `V_- = min(V, 0)` on the grid.
    pub fn negative_part(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        Ok(self.sample(grid)?.into_iter().map(|v| v.min(0.0)).collect())
    }
}

fn require_dim3(grid: &GridSpec) -> Result<()> {
    if grid.dim() < 3 {
        return invalid(format!("dimension {} < 3 has no Kato class here", grid.dim()));
    }
    Ok(())
}

/// Kato quantity `sup_x int |w(y)| / |x - y| dy` of grid samples `w`.
///
/// The periodic minimum-image kernel is used off the diagonal; the self-cell takes the exact
/// kernel integral over a ball with the cell's volume.
pub fn kato_norm_of_samples(w: &[f64], grid: &GridSpec) -> Result<f64> {
    require_dim3(grid)?;
    if w.len() != grid.len() {
        return Err(NlsError::GridMismatch("sample length".into()));
    }
    if w.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let d = grid.dim();
    let h = grid.spacing();
    let m = grid.points();
    let cell = grid.cell_volume();
    let alpha = unit_ball_volume(d);
    let rho = (cell / alpha).powf(1.0 / d as f64);
    let self_cell = d as f64 * alpha * rho.powi(d as i32 - 1) / (d as f64 - 1.0);
    let mut kernel: Vec<Complex64> = (0..grid.len())
        .map(|j| {
            if j == 0 {
                return Complex64::new(self_cell / cell, 0.0);
            }
            let idx = grid.unflatten(j);
            let r2: f64 = (0..d)
                .map(|a| {
                    let k = if idx[a] <= m / 2 { idx[a] as f64 } else { idx[a] as f64 - m as f64 };
                    (k * h).powi(2)
                })
                .sum();
            Complex64::new(1.0 / r2.sqrt(), 0.0)
        })
        .collect();
    let mut src: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x.abs(), 0.0)).collect();
    fft::forward(grid, &mut kernel);
    fft::forward(grid, &mut src);
    let scale = (grid.len() as f64).sqrt() * cell;
    for (s, k) in src.iter_mut().zip(&kernel) {
        *s = *s * k * scale;
    }
    fft::inverse(grid, &mut src);
    Ok(src.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Kato norm of `V` on the grid.
pub fn kato_norm(v: &PotentialSpec, grid: &GridSpec) -> Result<f64> {
    require_dim3(grid)?;
    kato_norm_of_samples(&v.sample(grid)?, grid)
}

/// `L^{d/2}` norms of `|V|` and of `V_-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhalfNorms {
    pub full: f64,
    pub negative: f64,
}

pub fn lhalf_norm(v: &PotentialSpec, grid: &GridSpec) -> Result<LhalfNorms> {
    require_dim3(grid)?;
    let s = v.sample(grid)?;
    let r = grid.dim() as f64 / 2.0;
    let cell = grid.cell_volume();
    let full = crate::spectral::norms::weighted_lp(s.iter().copied(), cell, r);
    let negative = crate::spectral::norms::weighted_lp(s.iter().map(|x| x.min(0.0)), cell, r);
    Ok(LhalfNorms { full, negative })
}

/// Kato and `L^{d/2}` diagnostics of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub kato_norm: f64,
    pub kato_norm_neg: f64,
    pub lhalf_norm: f64,
    pub lhalf_norm_neg: f64,
    pub threshold: f64,
    pub admissible: bool,
    pub alpha_d: f64,
}

pub fn admissibility(v: &PotentialSpec, grid: &GridSpec) -> Result<AdmissibilityReport> {
    require_dim3(grid)?;
    let s = v.sample(grid)?;
    let neg: Vec<f64> = s.iter().map(|x| x.min(0.0)).collect();
    let kato = kato_norm_of_samples(&s, grid)?;
    let kato_neg = kato_norm_of_samples(&neg, grid)?;
    let lh = lhalf_norm(v, grid)?;
    let threshold = kato_threshold(grid.dim());
    Ok(AdmissibilityReport {
        kato_norm: kato,
        kato_norm_neg: kato_neg,
        lhalf_norm: lh.full,
        lhalf_norm_neg: lh.negative,
        threshold,
        admissible: kato.is_finite() && lh.full.is_finite() && kato_neg < threshold,
        alpha_d: unit_ball_volume(grid.dim()),
    })
}
