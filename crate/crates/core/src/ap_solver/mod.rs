//! Asymptotic-preserving multi-group solver on a staggered even-odd mesh.
//!
//! The intensity of each group is split as I = ρ + Ω·R + Q. One step
//! first solves the implicit moment-temperature system for (ρ, R, T),
//! then one small banded system per (group, ordinate) for Q.

mod config;
mod field;
mod macro_step;
mod mesh;
mod micro_step;
mod state;

pub use config::{
    Boundary, BoundarySpec, NonlinearOptions, SolverConfig, TemperatureProfile,
};
pub use field::CoefficientField;
pub use macro_step::MacroUpdate;
pub use mesh::StaggeredMesh;
pub use micro_step::project_q_moments;
pub use state::RadiationState;

pub use crate::scaling::Scaling;

use crate::linalg::{BlockLu, LinalgError};
use crate::physics::{group_planck, CoefficientEvaluator, PhysicsError};
use crate::quadrature::{build_half_range_quadrature, AngularQuadrature};
use std::f64::consts::PI;
use std::sync::Mutex;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("linear solve failed ({context}): {source}")]
    Linear { context: String, source: LinalgError },
    #[error("nonlinear iteration failed at t={time:.6e} after {iterations} iterations (last update {residual:.3e})")]
    NonConvergence { time: f64, iterations: usize, residual: f64 },
}

/// Diagnostics of one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub macro_iterations: usize,
    pub factorizations: usize,
    /// Radiation energy that entered through the boundaries during the step.
    pub inflow: f64,
    pub energy_residual: f64,
}

/// Observer-facing copy of the macroscopic fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub t: Vec<f64>,
    pub t_r: Vec<f64>,
    /// `[g*N + j]`
    pub rho: Vec<f64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub snapshots: Vec<Snapshot>,
    pub reports: Vec<StepReport>,
    pub final_state: RadiationState,
    /// Set when a step failed; snapshots up to the failing time are kept.
    pub failure: Option<(f64, SolverError)>,
}

pub struct ApSolver {
    pub config: SolverConfig,
    pub mesh: StaggeredMesh,
    pub quad: AngularQuadrature,
    eval: CoefficientEvaluator,
    centers: Vec<f64>,
    inflow_left: Vec<f64>,
    inflow_right: Vec<f64>,
    /// Factorised moment Jacobian of the last converged step and its Δt.
    jacobian: Mutex<Option<(f64, BlockLu)>>,
}

impl ApSolver {
    pub fn new(config: SolverConfig) -> Result<Self, SolverError> {
        config.validate()?;
        let mesh = StaggeredMesh::new(config.length, config.cells)?;
        let quad = build_half_range_quadrature(config.ordinates)
            .map_err(|e| SolverError::Config(e.to_string()))?;
        let eval = CoefficientEvaluator::new(&config.grid, config.opacity.law);
        let inflow = |b: Boundary| match b {
            Boundary::Planckian(tb) => group_planck(tb, &config.grid, config.scaling.planck_norm).b,
            _ => vec![0.0; config.grid.groups()],
        };
        let inflow_left = inflow(config.boundary.left);
        let inflow_right = inflow(config.boundary.right);
        let centers = mesh.centers();
        Ok(Self {
            config,
            mesh,
            quad,
            eval,
            centers,
            inflow_left,
            inflow_right,
            jacobian: Mutex::new(None),
        })
    }

    pub fn groups(&self) -> usize {
        self.config.grid.groups()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Planckian radiation at the initial temperature (or at the separate
    /// radiation profile when one is configured), R = 0, Q = 0.
    pub fn initialize(&self) -> Result<RadiationState, SolverError> {
        let (gn, n) = (self.groups(), self.mesh.cells);
        let mut s = RadiationState::zeros(gn, n, self.quad.len());
        s.t = self.config.initial_temperature.evaluate(&self.centers)?;
        let t_rad = match &self.config.initial_radiation {
            Some(p) => p.evaluate(&self.centers)?,
            None => s.t.clone(),
        };
        for (j, &tr) in t_rad.iter().enumerate() {
            let b = group_planck(tr, &self.config.grid, self.config.scaling.planck_norm).b;
            for g in 0..gn {
                s.rho[g * n + j] = b[g];
            }
        }
        Ok(s)
    }

    /// Coefficients frozen at (Tⁿ, T_rⁿ); T_r falls back to T where the
    /// radiation energy vanishes.
    pub fn coefficients(&self, state: &RadiationState) -> CoefficientField {
        let t_r: Vec<f64> = state
            .radiation_temperature(self.config.scaling.planck_norm)
            .into_iter()
            .zip(&state.t)
            .map(|(tr, &t)| if tr > 0.0 { tr } else { t })
            .collect();
        let s = &self.config.scaling;
        CoefficientField::build(
            &self.eval,
            &self.config.opacity,
            &self.config.weights,
            s.l_a,
            s.l_s,
            &state.t,
            &t_r,
            &self.centers,
        )
    }

    /// Δx Σ_j [(4π/𝒞) Σ_g ρ_g + C_v T/(𝒞𝒫₀)].
    pub fn total_energy(&self, state: &RadiationState) -> f64 {
        let s = &self.config.scaling;
        let h = s.heat_factor(self.config.constants.c_v);
        let rad: f64 = state.rho.iter().sum::<f64>() * 4.0 * PI / s.light;
        let mat: f64 = state.t.iter().sum::<f64>() * h;
        self.mesh.dx * (rad + mat)
    }

    /// Energy entering through both walls over a step of length dt, from
    /// the end-of-step R.
    pub fn boundary_inflow(&self, state: &RadiationState, dt: f64) -> f64 {
        let n = state.cells;
        let net: f64 = (0..state.groups).map(|g| state.r(g)[0] - state.r(g)[n]).sum();
        dt * 4.0 * PI / 3.0 * net
    }

    /// |ΔE − inflow| relative to the larger of the two total energies.
    pub fn energy_balance(&self, before: &RadiationState, after: &RadiationState, inflow: f64) -> f64 {
        let (e0, e1) = (self.total_energy(before), self.total_energy(after));
        let scale = e0.abs().max(e1.abs());
        if scale == 0.0 {
            return 0.0;
        }
        (e1 - e0 - inflow).abs() / scale
    }

    pub fn step(&self, state: &RadiationState) -> Result<(RadiationState, StepReport), SolverError> {
        self.step_with(state, self.config.dt)
    }

    pub fn step_with(
        &self,
        state: &RadiationState,
        dt: f64,
    ) -> Result<(RadiationState, StepReport), SolverError> {
        let coeffs = self.coefficients(state);
        let update = self.macro_step(state, &coeffs, dt)?;
        let (eq, oq) = self.micro_step(state, &update, &coeffs, dt)?;
        let next = RadiationState {
            groups: state.groups,
            cells: state.cells,
            ordinates: state.ordinates,
            rho: update.rho,
            r: update.r,
            eq,
            oq,
            t: update.t,
            time: state.time + dt,
        };
        let inflow = self.boundary_inflow(&next, dt);
        let report = StepReport {
            dt,
            macro_iterations: update.iterations,
            factorizations: update.factorizations,
            inflow,
            energy_residual: self.energy_balance(state, &next, inflow),
        };
        Ok((next, report))
    }

    pub fn snapshot(&self, state: &RadiationState) -> Snapshot {
        Snapshot {
            time: state.time,
            t: state.t.clone(),
            t_r: state.radiation_temperature(self.config.scaling.planck_norm),
            rho: state.rho.clone(),
        }
    }

    /// Steps from the initial state to t_end, snapshotting every `stride`
    /// steps and always at the end. The last step is shortened so the run
    /// lands on t_end.
    pub fn run(&self, stride: usize) -> Result<RunOutcome, SolverError> {
        let state = self.initialize()?;
        Ok(self.run_from(state, stride))
    }

    pub fn run_from(&self, mut state: RadiationState, stride: usize) -> RunOutcome {
        let stride = stride.max(1);
        let t_end = self.config.t_end;
        let dt = self.config.dt;
        let mut snapshots = vec![self.snapshot(&state)];
        let mut reports = Vec::new();
        let mut count = 0usize;
        loop {
            let remaining = t_end - state.time;
            if remaining <= 1e-9 * dt {
                break;
            }
            let h = if remaining < dt * (1.0 + 1e-9) { remaining } else { dt };
            match self.step_with(&state, h) {
                Ok((next, report)) => {
                    state = next;
                    reports.push(report);
                    count += 1;
                }
                Err(e) => {
                    let time = state.time;
                    if snapshots.last().map(|s| s.time) != Some(time) {
                        snapshots.push(self.snapshot(&state));
                    }
                    return RunOutcome { snapshots, reports, final_state: state, failure: Some((time, e)) };
                }
            }
            if count % stride == 0 {
                snapshots.push(self.snapshot(&state));
            }
        }
        if snapshots.last().map(|s| s.time) != Some(state.time) {
            snapshots.push(self.snapshot(&state));
        }
        RunOutcome { snapshots, reports, final_state: state, failure: None }
    }
}

#[cfg(test)]
mod tests;
