//! Gray radiation diffusion
//! ∂ₜ[E_r(T) + (C_v/𝒫₀)T] = ∂ₓ(D(T) ∂ₓE_r(T)), E_r = 4π Σ_g B_g(T).

use super::{cell_centers, check_time, step_sizes, LimitBoundary, LimitError};
use crate::ap_solver::TemperatureProfile;
use crate::linalg::solve_tridiagonal;
use crate::physics::{
    group_planck, CoefficientEvaluator, FluxTemperature, FrequencyGrid, GroupCoefficients,
    OpacityModel, PhysicalConstants, WeightOptions,
};
use crate::scaling::Scaling;
use std::f64::consts::PI;

/// When the diffusion coefficient is evaluated inside a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientLag {
    /// At the new temperature, by Picard iteration.
    #[default]
    Implicit,
    /// At the start-of-step temperature.
    Previous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrayDiffusionConfig {
    pub length: f64,
    pub cells: usize,
    pub grid: FrequencyGrid,
    pub constants: PhysicalConstants,
    pub scaling: Scaling,
    pub opacity: OpacityModel,
    pub left: LimitBoundary,
    pub right: LimitBoundary,
    pub initial_temperature: TemperatureProfile,
    pub dt: f64,
    pub t_end: f64,
    pub lag: CoefficientLag,
    pub tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrayDiffusionState {
    pub t: Vec<f64>,
    pub time: f64,
}

pub struct GrayDiffusionSolver {
    pub config: GrayDiffusionConfig,
    pub dx: f64,
    pub centers: Vec<f64>,
    eval: CoefficientEvaluator,
}

impl GrayDiffusionSolver {
    pub fn new(config: GrayDiffusionConfig) -> Result<Self, LimitError> {
        let (dx, centers) = cell_centers(config.length, config.cells)?;
        check_time(config.dt, config.t_end, config.tol, config.max_iterations)?;
        config.scaling.validate().map_err(|e| LimitError::Config(e.to_string()))?;
        config.constants.validate()?;
        for b in [config.left, config.right] {
            if let LimitBoundary::Dirichlet(t) = b {
                if !(t > 0.0) {
                    return Err(LimitError::Config(format!("boundary temperature {t} is not positive")));
                }
            }
        }
        let eval = CoefficientEvaluator::new(&config.grid, config.opacity.law);
        Ok(Self { config, dx, centers, eval })
    }

    pub fn initialize(&self) -> Result<GrayDiffusionState, LimitError> {
        let t = self
            .config
            .initial_temperature
            .evaluate(&self.centers)
            .map_err(|e| LimitError::Config(e.to_string()))?;
        Ok(GrayDiffusionState { t, time: 0.0 })
    }

    /// (E_r, dE_r/dT) summed over the groups.
    pub fn radiation_energy(&self, t: f64) -> (f64, f64) {
        let p = group_planck(t, &self.config.grid, self.config.scaling.planck_norm);
        (4.0 * PI * p.b.iter().sum::<f64>(), 4.0 * PI * p.db.iter().sum::<f64>())
    }

    fn heat(&self) -> f64 {
        self.config.constants.c_v / self.config.scaling.p0
    }

    /// D = 𝒞 Σ_g ∂B_g/∂T / ((𝓛_a+𝓛_s)σ_t,g) / (3 Σ_g ∂B_g/∂T) at one cell.
    pub fn diffusivity(&self, t: f64, x: f64) -> f64 {
        let s = &self.config.scaling;
        let mut c = GroupCoefficients::zeros(self.eval.groups());
        let opts = WeightOptions { flux_temperature: FluxTemperature::Material, ..Default::default() };
        self.eval.evaluate_into(&self.config.opacity, &opts, s.l_a, s.l_s, t, t, x, &mut c);
        let p = group_planck(t, &self.config.grid, s.planck_norm);
        let (mut num, mut den) = (0.0, 0.0);
        for g in 0..self.eval.groups() {
            let tot = (s.l_a + s.l_s) * c.sigma_t[g];
            if tot > 0.0 {
                num += p.db[g] / tot;
            }
            den += p.db[g];
        }
        if den > 0.0 {
            s.light * num / (3.0 * den)
        } else {
            0.0
        }
    }

    /// Δx Σ_j [E_r(T_j) + (C_v/𝒫₀)T_j].
    pub fn total_energy(&self, state: &GrayDiffusionState) -> f64 {
        let h = self.heat();
        self.dx * state.t.iter().map(|&t| self.radiation_energy(t).0 + h * t).sum::<f64>()
    }

    pub fn step(&self, state: &GrayDiffusionState, dt: f64) -> Result<(GrayDiffusionState, usize), LimitError> {
        let cfg = &self.config;
        let mut t = state.t.clone();
        let mut newton_total = 0;
        let mut last_change = f64::INFINITY;
        let outer_max = match cfg.lag {
            CoefficientLag::Implicit => cfg.max_iterations,
            CoefficientLag::Previous => 1,
        };
        for _outer in 0..outer_max {
            let d: Vec<f64> = t.iter().zip(&self.centers).map(|(&tj, &x)| self.diffusivity(tj, x)).collect();
            let before = t.clone();
            newton_total += self.newton(state, &d, dt, &mut t)?;
            last_change = t.iter().zip(&before).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if cfg.lag == CoefficientLag::Previous || last_change <= cfg.tol {
                return Ok((GrayDiffusionState { t, time: state.time + dt }, newton_total));
            }
        }
        Err(LimitError::NonConvergence { time: state.time, iterations: outer_max, residual: last_change })
    }

    /// Solves the implicit step for fixed cell diffusivities `d`.
    fn newton(&self, state: &GrayDiffusionState, d: &[f64], dt: f64, t: &mut [f64]) -> Result<usize, LimitError> {
        let cfg = &self.config;
        let n = cfg.cells;
        let h = self.heat();
        let inv_dx2 = 1.0 / (self.dx * self.dx);
        let face: Vec<f64> = (1..n).map(|i| 0.5 * (d[i - 1] + d[i])).collect();
        let e_old: Vec<f64> = state.t.iter().map(|&tj| self.radiation_energy(tj).0 + h * tj).collect();
        let wall = |b: LimitBoundary| match b {
            LimitBoundary::ZeroFlux => None,
            LimitBoundary::Dirichlet(tb) => Some(self.radiation_energy(tb).0),
        };
        let (wl, wr) = (wall(cfg.left), wall(cfg.right));
        for it in 1..=cfg.max_iterations {
            let (er, der): (Vec<f64>, Vec<f64>) = t.iter().map(|&tj| self.radiation_energy(tj)).unzip();
            let mut lower = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut upper = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for j in 0..n {
                let mut f = (er[j] + h * t[j] - e_old[j]) / dt;
                diag[j] = (der[j] + h) / dt;
                if j > 0 {
                    f -= face[j - 1] * (er[j - 1] - er[j]) * inv_dx2;
                    diag[j] += face[j - 1] * der[j] * inv_dx2;
                    lower[j] = -face[j - 1] * der[j - 1] * inv_dx2;
                } else if let Some(eb) = wl {
                    f -= 2.0 * d[0] * (eb - er[0]) * inv_dx2;
                    diag[j] += 2.0 * d[0] * der[0] * inv_dx2;
                }
                if j + 1 < n {
                    f -= face[j] * (er[j + 1] - er[j]) * inv_dx2;
                    diag[j] += face[j] * der[j] * inv_dx2;
                    upper[j] = -face[j] * der[j + 1] * inv_dx2;
                } else if let Some(eb) = wr {
                    f -= 2.0 * d[n - 1] * (eb - er[n - 1]) * inv_dx2;
                    diag[j] += 2.0 * d[n - 1] * der[n - 1] * inv_dx2;
                }
                rhs[j] = -f;
            }
            let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
            let mut change = 0.0f64;
            for j in 0..n {
                let next = t[j] + delta[j];
                t[j] = if next > 0.5 * t[j] { next } else { 0.5 * t[j] };
                change = change.max(delta[j].abs());
            }
            if !change.is_finite() {
                break;
            }
            if change <= cfg.tol {
                return Ok(it);
            }
        }
        Err(LimitError::NonConvergence { time: state.time, iterations: cfg.max_iterations, residual: f64::NAN })
    }
}

/// Runs to t_end; returns the initial state, every `stride`-th state and
/// the final one.
pub fn gray_diffusion_run(config: GrayDiffusionConfig, stride: usize) -> Result<Vec<GrayDiffusionState>, LimitError> {
    let solver = GrayDiffusionSolver::new(config)?;
    let mut state = solver.initialize()?;
    let mut out = vec![state.clone()];
    let steps = step_sizes(solver.config.dt, solver.config.t_end);
    let stride = stride.max(1);
    for (k, &h) in steps.iter().enumerate() {
        state = solver.step(&state, h)?.0;
        if (k + 1) % stride == 0 || k + 1 == steps.len() {
            out.push(state.clone());
        }
    }
    Ok(out)
}
