use super::SolverError;
use crate::physics::{FrequencyGrid, OpacityModel, PhysicalConstants, WeightOptions};
use crate::scaling::Scaling;

/// Incoming radiation at one end of the slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Isotropic Planckian inflow at temperature T_b.
    Planckian(f64),
    /// No incoming radiation.
    Vacuum,
    /// Mirror: I(Ω) = I(−Ω) at the wall.
    Reflective,
}

impl Boundary {
    pub fn is_closed(self) -> bool {
        matches!(self, Boundary::Reflective)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub left: Boundary,
    pub right: Boundary,
}

impl BoundarySpec {
    pub fn closed() -> Self {
        Self { left: Boundary::Reflective, right: Boundary::Reflective }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        for (side, b) in [("left", self.left), ("right", self.right)] {
            if let Boundary::Planckian(t) = b {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(SolverError::Config(format!(
                        "{side} boundary temperature must be positive, got {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Spatial temperature profile (keV) evaluated at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub enum TemperatureProfile {
    Uniform(f64),
    /// max{peak − curvature·(x − center)², floor}.
    Parabola { center: f64, curvature: f64, peak: f64, floor: f64 },
    /// mean + amplitude·cos(π·x/length).
    Cosine { mean: f64, amplitude: f64, length: f64 },
    /// One value per cell.
    Cells(Vec<f64>),
}

impl TemperatureProfile {
    pub fn evaluate(&self, centers: &[f64]) -> Result<Vec<f64>, SolverError> {
        let values: Vec<f64> = match self {
            TemperatureProfile::Uniform(t) => vec![*t; centers.len()],
            TemperatureProfile::Parabola { center, curvature, peak, floor } => centers
                .iter()
                .map(|x| (peak - curvature * (x - center) * (x - center)).max(*floor))
                .collect(),
            TemperatureProfile::Cosine { mean, amplitude, length } => centers
                .iter()
                .map(|x| mean + amplitude * (std::f64::consts::PI * x / length).cos())
                .collect(),
            TemperatureProfile::Cells(v) => {
                if v.len() != centers.len() {
                    return Err(SolverError::Config(format!(
                        "{} cell temperatures for {} cells",
                        v.len(),
                        centers.len()
                    )));
                }
                v.clone()
            }
        };
        if let Some(bad) = values.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(SolverError::Config(format!("initial temperature {bad} is not positive")));
        }
        Ok(values)
    }
}

/// Newton controls for the coupled moment-temperature solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearOptions {
    /// Absolute tolerance on the temperature update (keV).
    pub tol_t: f64,
    /// Relative tolerance on the density update.
    pub tol_rho: f64,
    pub max_iterations: usize,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self { tol_t: 1e-10, tol_rho: 1e-10, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub length: f64,
    pub cells: usize,
    pub grid: FrequencyGrid,
    pub ordinates: usize,
    pub constants: PhysicalConstants,
    pub scaling: Scaling,
    pub opacity: OpacityModel,
    pub weights: WeightOptions,
    pub boundary: BoundarySpec,
    pub initial_temperature: TemperatureProfile,
    /// Radiation starts Planckian at this profile instead of the material one.
    pub initial_radiation: Option<TemperatureProfile>,
    pub dt: f64,
    pub t_end: f64,
    pub nonlinear: NonlinearOptions,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::Config(m));
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length must be positive, got {}", self.length));
        }
        if self.cells < 3 {
            return bad(format!("need at least 3 cells, got {}", self.cells));
        }
        if self.ordinates == 0 {
            return bad("quadrature order must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) {
            return bad(format!("t_end {} must be at least dt {}", self.t_end, self.dt));
        }
        if !(self.nonlinear.tol_t > 0.0) || !(self.nonlinear.tol_rho > 0.0) {
            return bad("nonlinear tolerances must be positive".into());
        }
        if self.nonlinear.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        self.constants.validate().map_err(|e| SolverError::Config(e.to_string()))?;
        self.scaling.validate().map_err(|e| SolverError::Config(e.to_string()))?;
        self.boundary.validate()
    }
}
