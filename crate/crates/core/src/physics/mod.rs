//! Planck function, opacity laws, group-averaged coefficients and the
//! mean-opacity comparison toolkit.

mod coefficients;
mod grid;
mod mean_opacity;
mod opacity;
mod planck;

pub use coefficients::{
    fddl_coefficients, group_coefficients, CoefficientEvaluator, FddlCoefficients,
    FluxTemperature, GroupCoefficients, WeightOptions, WeightScheme,
};
pub use grid::{FrequencyGrid, GridSpacing};
pub(crate) use planck::group_planck_into;
#[doc(hidden)]
pub use coefficients::weight_shape;
pub use mean_opacity::{mean_opacity_table, MeanOpacityReport, MeanOpacityRow};
pub use opacity::{OpacityModel, PiecewiseConstant, SpectralLaw};
pub use planck::{
    group_planck, integrate_spectrum, planck_derivative, planck_intensity, planck_integral,
    planck_integral_derivative, GroupPlanck, PLANCK_PREFACTOR,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("photon energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("negative total radiation energy {0}")]
    NegativeEnergy(f64),
    #[error("invalid frequency grid: {0}")]
    Grid(String),
    #[error("invalid opacity model: {0}")]
    Opacity(String),
    #[error("invalid physical constant {name} = {value}")]
    Constant { name: &'static str, value: f64 },
}

/// Light speed (cm/ns), radiation constant and specific heat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub c: f64,
    pub a_r: f64,
    pub c_v: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            c: 29.98,
            a_r: 0.01372,
            c_v: 0.1,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        for (name, value) in [("c", self.c), ("a_r", self.a_r), ("c_v", self.c_v)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PhysicsError::Constant { name, value });
            }
        }
        Ok(())
    }
}

/// T_r = (4π Σ ρ_g / norm)^{1/4}, where `planck_norm` is a_r c (dimensional) or 1.
pub fn radiation_temperature(rho: &[f64], planck_norm: f64) -> Result<f64, PhysicsError> {
    let total: f64 = rho.iter().sum();
    if total < 0.0 || total.is_nan() {
        return Err(PhysicsError::NegativeEnergy(total));
    }
    Ok((4.0 * std::f64::consts::PI * total / planck_norm).powf(0.25))
}
