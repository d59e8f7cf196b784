//! Smooth cutoff functions used by the frequency projections.

/// Smooth monotone step: 0 for `x <= 0`, 1 for `x >= 1`, with `S(x) + S(1 - x) = 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Half-width of the plateau where the unit bump equals one along each axis.
pub const UNIT_PLATEAU: f64 = 0.1;
/// Half-width of the support of the unit bump along each axis.
pub const UNIT_SUPPORT: f64 = 0.9;

/// The family of cutoffs `psi`, `varphi` and `phi_dir`.
///
/// `psi` is a tensor product of one-dimensional bumps whose integer translates sum to one
/// exactly, so `sum_k psi(xi - k) = 1` holds without renormalization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CutoffProfile;

impl CutoffProfile {
    /// One-dimensional factor of `psi`.
    pub fn unit_bump_1d(&self, t: f64) -> f64 {
        smooth_step((UNIT_SUPPORT - t.abs()) / (UNIT_SUPPORT - UNIT_PLATEAU))
    }

    /// Unit-scale bump `psi(xi)`, even and supported in `[-0.9, 0.9]^d`.
    pub fn psi(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&t| self.unit_bump_1d(t)).product()
    }

    /// Radial cutoff: 1 on `r <= 1`, 0 on `r >= 2`.
    pub fn varphi(&self, r: f64) -> f64 {
        smooth_step(2.0 - r)
    }

    /// Littlewood-Paley multiplier `varphi(r/N) - varphi(2r/N)`, supported in `N/2 <= r <= 2N`.
    pub fn lp_multiplier(&self, r: f64, n: f64) -> f64 {
        self.varphi(r / n) - self.varphi(2.0 * r / n)
    }

    /// Fattened multiplier `varphi(r/(8N)) - varphi(8r/N)`, equal to 1 on the support of `P_N`.
    pub fn fattened_multiplier(&self, r: f64, n: f64) -> f64 {
        self.varphi(r / (8.0 * n)) - self.varphi(8.0 * r / n)
    }

    /// Directional bump: 1 on `[1/4, 2]`, 0 outside `(1/8, 4)`.
    pub fn phi_dir(&self, t: f64) -> f64 {
        let t = t.abs();
        if t <= 0.125 || t >= 4.0 {
            0.0
        } else if t < 0.25 {
            smooth_step((t - 0.125) / 0.125)
        } else if t <= 2.0 {
            1.0
        } else {
            smooth_step((4.0 - t) / 2.0)
        }
    }
}
