//! Backward-Euler solvers for the two limiting models of the transport
//! system: gray radiation diffusion (equilibrium, thick) and
//! frequency-dependent diffusion (scattering dominated). Both live on the
//! same cell-centred grid as the transport solver so results compare
//! without interpolation.

mod fddl;
mod gray;

pub use fddl::{fddl_run, FddlConfig, FddlSolver, FddlState};
pub use gray::{gray_diffusion_run, CoefficientLag, GrayDiffusionConfig, GrayDiffusionSolver, GrayDiffusionState};

use crate::linalg::LinalgError;
use crate::physics::{
    integrate_spectrum, planck_derivative, FrequencyGrid, OpacityModel, PhysicsError,
};
use crate::scaling::Scaling;
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error)]
pub enum LimitError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("linear solve failed: {0}")]
    Linear(#[from] LinalgError),
    #[error("iteration failed at t={time:.6e} after {iterations} iterations (last change {residual:.3e})")]
    NonConvergence { time: f64, iterations: usize, residual: f64 },
}

/// End condition of a limit model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitBoundary {
    ZeroFlux,
    /// Equilibrium at the given temperature half a cell outside the wall.
    Dirichlet(f64),
}

/// Mean opacity σ of the gray diffusion coefficient,
/// 1/σ = 𝒞 ∫ 4π ∂B/∂T / (𝓛_aσ_a + 𝓛_sσ_s) dν / (4 a_r c T³).
///
/// With `grid = None` the integral runs over the whole spectrum; with a
/// grid it runs over the group range only, each group by the same
/// quadrature the group coefficients use.
pub fn gray_sigma(
    t: f64,
    x: f64,
    opacity: &OpacityModel,
    scaling: &Scaling,
    grid: Option<&FrequencyGrid>,
) -> Result<f64, PhysicsError> {
    if !(t > 0.0) {
        return Err(PhysicsError::NonPositiveTemperature(t));
    }
    let total = |nu: f64| scaling.l_a * opacity.sigma_a(x, nu, t) + scaling.l_s * opacity.sigma_s(x, nu, t);
    let integrand = |nu: f64| {
        let db = planck_derivative(nu, t, scaling.planck_norm).unwrap_or(0.0);
        if db == 0.0 {
            0.0
        } else {
            db / total(nu)
        }
    };
    let integral = match grid {
        None => integrate_spectrum(t, integrand),
        Some(grid) => {
            let rule = crate::gauss::GaussRule::new(20);
            (0..grid.groups())
                .map(|g| {
                    let (lo, hi) = grid.bounds(g);
                    let panels = ((hi / lo).ln().ceil() as usize).clamp(1, 64);
                    rule.integrate_composite(lo.ln(), hi.ln(), panels, |u| {
                        let nu = u.exp();
                        nu * integrand(nu)
                    })
                })
                .sum()
        }
    };
    let inv = scaling.light * 4.0 * PI * integral / (4.0 * scaling.planck_norm * t * t * t);
    Ok(1.0 / inv)
}

fn cell_centers(length: f64, cells: usize) -> Result<(f64, Vec<f64>), LimitError> {
    if cells < 3 {
        return Err(LimitError::Config(format!("need at least 3 cells, got {cells}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(LimitError::Config(format!("length must be positive, got {length}")));
    }
    let dx = length / cells as f64;
    let nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * dx).collect();
    Ok((dx, (0..cells).map(|j| 0.5 * (nodes[j] + nodes[j + 1])).collect()))
}

fn check_time(dt: f64, t_end: f64, tol: f64, max_iterations: usize) -> Result<(), LimitError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LimitError::Config(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= dt) {
        return Err(LimitError::Config(format!("t_end {t_end} must be at least dt {dt}")));
    }
    if !(tol > 0.0) || max_iterations == 0 {
        return Err(LimitError::Config("tolerance and iteration limit must be positive".into()));
    }
    Ok(())
}

/// Step sizes that march from 0 to t_end, the last one shortened.
fn step_sizes(dt: f64, t_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    while t_end - t > 1e-9 * dt {
        let h = if t_end - t < dt * (1.0 + 1e-9) { t_end - t } else { dt };
        out.push(h);
        t += h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{PhysicalConstants, SpectralLaw};

    #[test]
    fn constant_opacity_collapse() {
        let s = Scaling::nondimensional(1.0, 1.0, 1.0).unwrap();
        let op = OpacityModel::uniform(3.0, 3.0, SpectralLaw::Constant);
        let sigma = gray_sigma(1.3, 0.0, &op, &s, None).unwrap();
        assert!((sigma - 6.0).abs() < 1e-9 * 6.0, "{sigma}");
        // Dimensional: 𝒞 = c stays in the coefficient.
        let c = PhysicalConstants::default();
        let d = Scaling::dimensional(&c);
        let sigma = gray_sigma(0.7, 0.0, &op, &d, None).unwrap();
        assert!((sigma - 6.0 / c.c).abs() < 1e-9 * 6.0 / c.c);
    }

    #[test]
    fn transparent_window_opens_with_temperature() {
        let s = Scaling::nondimensional(1.0, 1.0, 1.0).unwrap();
        let op = OpacityModel::uniform(1.0, 1.0, SpectralLaw::InverseCube);
        let (s1, s2) = (
            gray_sigma(1.0, 0.0, &op, &s, None).unwrap(),
            gray_sigma(2.0, 0.0, &op, &s, None).unwrap(),
        );
        assert!(1.0 / s2 > 1.0 / s1);
        let ratio = s1 / s2;
        assert!((ratio - 8.0).abs() < 8e-3, "{ratio}");
    }

    #[test]
    fn grid_form_converges_to_full_line() {
        let s = Scaling::nondimensional(1.0, 1.0, 1.0).unwrap();
        let op = OpacityModel::uniform(1.0, 0.5, SpectralLaw::InverseCube);
        let full = gray_sigma(1.0, 0.0, &op, &s, None).unwrap();
        let wide = FrequencyGrid::logarithmic(1e-5, 200.0, 40).unwrap();
        let grid = gray_sigma(1.0, 0.0, &op, &s, Some(&wide)).unwrap();
        assert!((grid - full).abs() < 1e-8 * full, "{grid} {full}");
    }

    #[test]
    fn rejects_cold_material() {
        let s = Scaling::nondimensional(1.0, 1.0, 1.0).unwrap();
        let op = OpacityModel::uniform(1.0, 1.0, SpectralLaw::Constant);
        assert!(gray_sigma(0.0, 0.0, &op, &s, None).is_err());
    }

    #[test]
    fn step_sizes_land_on_end() {
        let h = step_sizes(0.1, 0.35);
        assert_eq!(h.len(), 4);
        assert!((h.iter().sum::<f64>() - 0.35).abs() < 1e-15);
        assert_eq!(step_sizes(0.1, 0.1).len(), 1);
    }
}
