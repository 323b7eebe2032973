//! Regime selection: dimensional units or an ε-scaled asymptotic regime.

use crate::physics::PhysicalConstants;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("{name} must be strictly positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitMode {
    Dimensional,
    Nondimensional,
}

/// Light-speed factor 𝒞, material factor 𝒫₀ and the opacity scalings 𝓛_a, 𝓛_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub mode: UnitMode,
    pub epsilon: f64,
    pub light: f64,
    pub p0: f64,
    pub l_a: f64,
    pub l_s: f64,
    /// a_r·c in dimensional mode, 1 otherwise.
    pub planck_norm: f64,
}

impl Scaling {
    /// Physical units: 𝒞 = c, 𝓛 = 1, and 𝒞𝒫₀ = 1 so the material equation
    /// reads C_v ∂T/∂t = 4π Σ σ(ρ − B).
    pub fn dimensional(consts: &PhysicalConstants) -> Self {
        Self {
            mode: UnitMode::Dimensional,
            epsilon: 1.0,
            light: consts.c,
            p0: 1.0 / consts.c,
            l_a: 1.0,
            l_s: 1.0,
            planck_norm: consts.a_r * consts.c,
        }
    }

    /// ε-scaled regime with 𝒞 = 1/ε, 𝒫₀ = 1 and a_r c → 1.
    pub fn nondimensional(epsilon: f64, l_a: f64, l_s: f64) -> Result<Self, ScalingError> {
        let s = Self {
            mode: UnitMode::Nondimensional,
            epsilon,
            light: 1.0 / epsilon,
            p0: 1.0,
            l_a,
            l_s,
            planck_norm: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScalingError> {
        for (name, value) in [
            ("epsilon", self.epsilon),
            ("light", self.light),
            ("p0", self.p0),
            ("l_a", self.l_a),
            ("l_s", self.l_s),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ScalingError::NotPositive { name, value });
            }
        }
        Ok(())
    }

    /// Factor C_v/(𝒞𝒫₀) multiplying ∂T/∂t in the material equation.
    pub fn heat_factor(&self, c_v: f64) -> f64 {
        c_v / (self.light * self.p0)
    }
}

/// The three named powers of ε a scaling factor can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Power {
    Eps,
    One,
    InvEps,
}

impl Power {
    pub fn value(self, epsilon: f64) -> f64 {
        match self {
            Power::Eps => epsilon,
            Power::One => 1.0,
            Power::InvEps => 1.0 / epsilon,
        }
    }
}
