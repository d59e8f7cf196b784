//! Frequency projections: unit-scale `P_k`, dyadic `P_N` and directional `P_{N,e_l}`.

use super::cutoff::{CutoffProfile, UNIT_SUPPORT};
use super::field::SpectralField;
use super::grid::{GridSpec, MAX_DIM};
use crate::error::Result;

/// A projected field together with whether the requested scale meets the grid spectrum.
#[derive(Debug, Clone)]
pub struct Projected {
    pub field: SpectralField,
    pub in_band: bool,
}

impl Projected {
    pub fn into_field(self) -> SpectralField {
        self.field
    }
}

fn radius(xi: &[f64; MAX_DIM]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Littlewood-Paley projection `P_N`. Scales outside [`GridSpec::dyadic_band`] give the zero field.
pub fn lp_project(f: &SpectralField, n: f64) -> Projected {
    let in_band = n > 0.0 && f.grid().resolves_scale(n);
    if !in_band {
        return Projected { field: SpectralField::zeros(*f.grid()), in_band };
    }
    let c = CutoffProfile;
    Projected { field: f.apply_multiplier(|xi| c.lp_multiplier(radius(xi), n)), in_band }
}

/// Fattened projection with multiplier equal to one on the support of `P_N`.
pub fn fattened_project(f: &SpectralField, n: f64) -> SpectralField {
    let c = CutoffProfile;
    f.apply_multiplier(|xi| c.fattened_multiplier(radius(xi), n))
}

/// Low-frequency projection `P_{<=N}` with multiplier `varphi(|xi|/N)`.
pub fn low_pass(f: &SpectralField, n: f64) -> SpectralField {
    let c = CutoffProfile;
    f.apply_multiplier(|xi| c.varphi(radius(xi) / n))
}

/// Largest lattice coordinate whose unit bump can meet the grid spectrum.
fn unit_lattice_extent(grid: &GridSpec) -> i64 {
    (grid.nyquist() + UNIT_SUPPORT).floor() as i64
}

/// All lattice points `k` whose bump `psi(. - k)` meets the grid's frequency box.
pub fn unit_lattice(grid: &GridSpec) -> Vec<[i64; MAX_DIM]> {
    let kmax = unit_lattice_extent(grid);
    let side = (2 * kmax + 1) as usize;
    let count = side.pow(grid.dim() as u32);
    (0..count)
        .map(|mut j| {
            let mut k = [0i64; MAX_DIM];
            for a in (0..grid.dim()).rev() {
                k[a] = (j % side) as i64 - kmax;
                j /= side;
            }
            k
        })
        .collect()
}

/// Unit-scale projection `P_k` with multiplier `psi(xi - k)`.
pub fn unit_project(f: &SpectralField, k: &[i64]) -> Projected {
    let g = *f.grid();
    let c = CutoffProfile;
    let d = g.dim();
    let kmax = unit_lattice_extent(&g);
    let in_band = k.len() >= d && k[..d].iter().all(|&kj| kj.abs() <= kmax);
    if !in_band {
        return Projected { field: SpectralField::zeros(g), in_band };
    }
    let field = f.apply_multiplier(|xi| {
        let mut s = 1.0;
        for a in 0..d {
            s *= c.unit_bump_1d(xi[a] - k[a] as f64);
            if s == 0.0 {
                break;
            }
        }
        s
    });
    Projected { field, in_band }
}

/// Directional projection `P_{N,e_l}` with multiplier `phi_dir(|xi . e_l| / N)`; `ell` is 1-based.
pub fn directional_project(f: &SpectralField, n: f64, ell: usize) -> Result<SpectralField> {
    let a = f.grid().check_axis(ell)?;
    let c = CutoffProfile;
    Ok(f.apply_multiplier(|xi| c.phi_dir(xi[a].abs() / n)))
}

/// Residual field `(1 - P_{N,e_1}) ... (1 - P_{N,e_d}) P_N f`.
pub fn directional_identity_residual(f: &SpectralField, n: f64) -> SpectralField {
    let c = CutoffProfile;
    let d = f.grid().dim();
    f.apply_multiplier(|xi| {
        let mut w = c.lp_multiplier(radius(xi), n);
        for a in 0..d {
            w *= 1.0 - c.phi_dir(xi[a].abs() / n);
        }
        w
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    fn sample(g: GridSpec) -> SpectralField {
        SpectralField::from_fn(g, |x| {
            Complex64::new(
                (x[0] * 1.3).sin() * (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp(),
                (x[1] * 0.7 + x[0]).cos() * (-(x[0] * x[0] + x[1] * x[1]) / 3.0).exp(),
            )
        })
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn unit_pieces_sum_to_field() {
        let g = GridSpec::new(2, 16, 2.0 * PI).unwrap();
        let f = sample(g);
        let mut acc = SpectralField::zeros(g);
        for k in unit_lattice(&g) {
            acc = acc.add(&unit_project(&f, &k).field).unwrap();
        }
        assert!(max_diff(&acc, &f) < 1e-10);
    }

    #[test]
    fn dyadic_pieces_sum_to_nonzero_modes() {
        let g = GridSpec::new(2, 32, PI).unwrap();
        let f0 = sample(g);
        let mean = f0.modes()[0];
        let f = f0.apply_multiplier(|xi| if xi.iter().all(|&x| x == 0.0) { 0.0 } else { 1.0 });
        assert!(mean.norm() > 0.0);
        let mut acc = SpectralField::zeros(g);
        for n in g.dyadic_band() {
            acc = acc.add(&lp_project(&f, n).field).unwrap();
        }
        assert!(max_diff(&acc, &f) < 1e-10);
    }

    #[test]
    fn out_of_band_is_flagged_zero() {
        let g = GridSpec::new(1, 16, PI).unwrap();
        let f = sample(g);
        let p = lp_project(&f, 1024.0);
        assert!(!p.in_band);
        assert_eq!(p.field.max_abs(), 0.0);
        let q = unit_project(&f, &[100]);
        assert!(!q.in_band && q.field.max_abs() == 0.0);
    }

    #[test]
    fn plane_wave_near_lattice_point_is_kept() {
        let g = GridSpec::new(1, 16, PI).unwrap();
        let f = SpectralField::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        assert!(max_diff(&unit_project(&f, &[3]).field, &f) < 1e-14);
        assert!(unit_project(&f, &[2]).field.max_abs() < 1e-14);
    }

    #[test]
    fn directional_behaviour() {
        let g = GridSpec::new(2, 16, PI).unwrap();
        let on_axis = SpectralField::from_fn(g, |x| Complex64::from_polar(1.0, 4.0 * x[0]));
        let p = directional_project(&on_axis, 4.0, 1).unwrap();
        assert!(max_diff(&p, &on_axis) < 1e-14);
        let q = directional_project(&on_axis, 4.0, 2).unwrap();
        assert!(q.max_abs() < 1e-14);
        assert!(directional_project(&on_axis, 4.0, 3).is_err());
        assert!(directional_project(&on_axis, 4.0, 0).is_err());
    }

    #[test]
    fn directional_identity_vanishes() {
        let g = GridSpec::new(2, 32, PI).unwrap();
        let f = sample(g);
        for n in g.dyadic_band() {
            assert!(directional_identity_residual(&f, n).max_abs() < 1e-12);
        }
    }
}
