//! Lebesgue and Sobolev norms of fields on the grid.

use super::field::SpectralField;
use crate::error::{invalid, Result};

/// `(weight * sum |x_i|^r)^{1/r}` evaluated with max-scaling, so large `r` neither
/// overflows nor underflows. `r = inf` returns the max.
pub fn weighted_lp(values: impl Iterator<Item = f64> + Clone, weight: f64, r: f64) -> f64 {
    let peak = values.clone().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 || !peak.is_finite() {
        return peak;
    }
    if r.is_infinite() {
        return peak;
    }
    let s: f64 = values.map(|x| (x.abs() / peak).powf(r)).sum();
    peak * (weight * s).powf(1.0 / r)
}

/// Weighted `l^r` norm with per-entry weights, max-scaled.
pub fn weighted_lp_pairs(pairs: &[(f64, f64)], r: f64) -> f64 {
    let peak = pairs.iter().filter(|p| p.0 > 0.0).fold(0.0f64, |m, p| m.max(p.1.abs()));
    if peak == 0.0 || !peak.is_finite() || r.is_infinite() {
        return peak;
    }
    let s: f64 = pairs.iter().map(|&(w, x)| w * (x.abs() / peak).powf(r)).sum();
    peak * s.powf(1.0 / r)
}

/// `||f||_{L^r}` by cell-volume quadrature; `r = f64::INFINITY` gives the grid max.
pub fn lebesgue_norm(f: &SpectralField, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return invalid(format!("Lebesgue exponent {r} below 1"));
    }
    Ok(weighted_lp(f.values().iter().map(|z| z.norm()), f.grid().cell_volume(), r))
}

/// `||<xi>^s f_hat||_{l^2}` scaled by the cell volume.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&s) {
        return invalid(format!("Sobolev index {s} outside [-2, 2]"));
    }
    let g = f.grid();
    let total: f64 = f
        .modes()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let xi = g.wavevector(j);
            let bracket = 1.0 + xi.iter().map(|x| x * x).sum::<f64>();
            bracket.powf(s) * c.norm_sqr()
        })
        .sum();
    Ok((total * g.cell_volume()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::GridSpec;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_l2() {
        let g = GridSpec::new(2, 8, 1.5).unwrap();
        let f = SpectralField::from_fn(g, |_| Complex64::new(0.0, 2.0));
        let n = lebesgue_norm(&f, 2.0).unwrap();
        assert!((n - 2.0 * g.volume().sqrt()).abs() < 1e-12);
        assert_eq!(lebesgue_norm(&f, f64::INFINITY).unwrap(), 2.0);
        assert!(lebesgue_norm(&f, 0.5).is_err());
    }

    #[test]
    fn huge_exponent_is_finite() {
        let g = GridSpec::new(1, 16, PI).unwrap();
        let f = SpectralField::from_real_fn(g, |x| 1e-5 * (1.0 + x[0].cos()));
        let n = lebesgue_norm(&f, 400.0).unwrap();
        assert!(n.is_finite() && n > 0.0);
        assert!(n <= 2e-5 * (g.volume()).powf(1.0 / 400.0) + 1e-18);
    }

    #[test]
    fn sobolev_single_mode() {
        let g = GridSpec::new(1, 16, PI).unwrap();
        let f = SpectralField::from_fn(g, |x| Complex64::from_polar(1.0 / g.volume().sqrt(), 3.0 * x[0]));
        assert!((sobolev_norm(&f, 1.0).unwrap() - 10f64.sqrt()).abs() < 1e-12);
        assert!((sobolev_norm(&f, 0.0).unwrap() - f.l2_norm()).abs() < 1e-12);
        assert!(sobolev_norm(&f, 3.0).is_err());
    }

    #[test]
    fn h1_matches_gradient() {
        let g = GridSpec::new(2, 48, 4.0).unwrap();
        let f = SpectralField::from_real_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * (1.0 + x[0]));
        let h1 = sobolev_norm(&f, 1.0).unwrap().powi(2);
        let grad: f64 = (0..2).map(|a| f.partial(a).mass()).sum();
        assert!((h1 - f.mass() - grad).abs() < 1e-10 * h1);
    }
}
