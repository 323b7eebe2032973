//! Frequency-dependent diffusion with absorption-emission coupling:
//!
//! (1/(𝒞𝓛_a)) ∂ₜρ_g = (1/(3𝓛_a𝓛_s)) ∂ₓ(∂ₓρ_g/σ'_s,g) + σ²_g B_g(T) − σ¹_g ρ_g,
//! (C_v/(𝒞𝒫₀𝓛_a)) ∂ₜT = 4π Σ_g (σ¹_g ρ_g − σ²_g B_g(T)).
//!
//! Coefficients are frozen at the start of each step.

use super::{cell_centers, check_time, step_sizes, LimitBoundary, LimitError};
use crate::ap_solver::TemperatureProfile;
use crate::linalg::{solve_tridiagonal, BlockTridiagonal};
use crate::physics::{
    group_planck, radiation_temperature, CoefficientEvaluator, FrequencyGrid,
    GroupCoefficients, OpacityModel, PhysicalConstants, WeightOptions,
};
use crate::scaling::Scaling;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct FddlConfig {
    pub length: f64,
    pub cells: usize,
    pub grid: FrequencyGrid,
    pub constants: PhysicalConstants,
    pub scaling: Scaling,
    pub opacity: OpacityModel,
    pub weights: WeightOptions,
    pub left: LimitBoundary,
    pub right: LimitBoundary,
    pub initial_temperature: TemperatureProfile,
    pub initial_radiation: Option<TemperatureProfile>,
    pub dt: f64,
    pub t_end: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FddlState {
    /// `[g*N + j]`
    pub rho: Vec<f64>,
    pub t: Vec<f64>,
    pub time: f64,
}

/// Frozen per-step coefficients, `[g*N + j]`.
struct Frozen {
    sigma1: Vec<f64>,
    sigma2: Vec<f64>,
    /// Face values of 1/σ'_s, `[g*(N+1) + i]`; wall faces use the cell value.
    inv_s: Vec<f64>,
}

pub struct FddlSolver {
    pub config: FddlConfig,
    pub dx: f64,
    pub centers: Vec<f64>,
    eval: CoefficientEvaluator,
    wall_left: Option<Vec<f64>>,
    wall_right: Option<Vec<f64>>,
}

impl FddlSolver {
    pub fn new(config: FddlConfig) -> Result<Self, LimitError> {
        let (dx, centers) = cell_centers(config.length, config.cells)?;
        check_time(config.dt, config.t_end, config.tol, config.max_iterations)?;
        config.scaling.validate().map_err(|e| LimitError::Config(e.to_string()))?;
        config.constants.validate()?;
        let wall = |b: LimitBoundary| -> Result<Option<Vec<f64>>, LimitError> {
            match b {
                LimitBoundary::ZeroFlux => Ok(None),
                LimitBoundary::Dirichlet(t) if t > 0.0 => {
                    Ok(Some(group_planck(t, &config.grid, config.scaling.planck_norm).b))
                }
                LimitBoundary::Dirichlet(t) => {
                    Err(LimitError::Config(format!("boundary temperature {t} is not positive")))
                }
            }
        };
        let wall_left = wall(config.left)?;
        let wall_right = wall(config.right)?;
        let eval = CoefficientEvaluator::new(&config.grid, config.opacity.law);
        Ok(Self { config, dx, centers, eval, wall_left, wall_right })
    }

    fn groups(&self) -> usize {
        self.config.grid.groups()
    }

    pub fn initialize(&self) -> Result<FddlState, LimitError> {
        let (n, gn) = (self.config.cells, self.groups());
        let cfgerr = |e: crate::ap_solver::SolverError| LimitError::Config(e.to_string());
        let t = self.config.initial_temperature.evaluate(&self.centers).map_err(cfgerr)?;
        let t_rad = match &self.config.initial_radiation {
            Some(p) => p.evaluate(&self.centers).map_err(cfgerr)?,
            None => t.clone(),
        };
        let mut rho = vec![0.0; gn * n];
        for j in 0..n {
            let b = group_planck(t_rad[j], &self.config.grid, self.config.scaling.planck_norm).b;
            for g in 0..gn {
                rho[g * n + j] = b[g];
            }
        }
        Ok(FddlState { rho, t, time: 0.0 })
    }

    fn factors(&self) -> (f64, f64, f64) {
        let s = &self.config.scaling;
        let time = 1.0 / (s.light * s.l_a);
        let diff = 1.0 / (3.0 * s.l_a * s.l_s);
        let heat = self.config.constants.c_v / (s.light * s.p0 * s.l_a);
        (time, diff, heat)
    }

    /// Δx Σ_j [4π κ_t Σ_g ρ_g + κ_T T], conserved under zero-flux ends.
    pub fn total_energy(&self, state: &FddlState) -> f64 {
        let (kt, _, kh) = self.factors();
        let rad: f64 = state.rho.iter().sum::<f64>() * 4.0 * PI * kt;
        let mat: f64 = state.t.iter().sum::<f64>() * kh;
        self.dx * (rad + mat)
    }

    fn freeze(&self, state: &FddlState) -> Frozen {
        let (n, gn) = (self.config.cells, self.groups());
        let norm = self.config.scaling.planck_norm;
        let mut f = Frozen {
            sigma1: vec![0.0; gn * n],
            sigma2: vec![0.0; gn * n],
            inv_s: vec![0.0; gn * (n + 1)],
        };
        let mut c = GroupCoefficients::zeros(gn);
        let mut cs = GroupCoefficients::zeros(gn);
        let mut cell_inv = vec![0.0; gn * n];
        let diffusion_opts = WeightOptions { flux_temperature: self.config.weights.flux_temperature, ..Default::default() };
        for j in 0..n {
            let rho: Vec<f64> = (0..gn).map(|g| state.rho[g * n + j].max(0.0)).collect();
            let tr = radiation_temperature(&rho, norm).unwrap_or(0.0);
            let t = state.t[j];
            let tr = if tr > 0.0 { tr } else { t };
            let x = self.centers[j];
            self.eval.evaluate_into(&self.config.opacity, &self.config.weights, 1.0, 1.0, t, tr, x, &mut c);
            // Scattering alone: σ_t becomes σ'_s.
            self.eval.evaluate_into(&self.config.opacity, &diffusion_opts, 0.0, 1.0, t, tr, x, &mut cs);
            for g in 0..gn {
                f.sigma1[g * n + j] = c.sigma1[g];
                f.sigma2[g * n + j] = c.sigma2[g];
                cell_inv[g * n + j] = if cs.sigma_t[g] > 0.0 { 1.0 / cs.sigma_t[g] } else { 0.0 };
            }
        }
        for g in 0..gn {
            let cell = |j: usize| cell_inv[g * n + j];
            f.inv_s[g * (n + 1)] = cell(0);
            f.inv_s[g * (n + 1) + n] = cell(n - 1);
            for i in 1..n {
                f.inv_s[g * (n + 1) + i] = 0.5 * (cell(i - 1) + cell(i));
            }
        }
        f
    }

    /// Per-group tridiagonal operator in ρ, and the wall sources.
    fn density_bands(&self, fz: &Frozen, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let (n, gn) = (self.config.cells, self.groups());
        let (kt, kd, _) = self.factors();
        let c = kd / (self.dx * self.dx);
        let (mut lo, mut di, mut up, mut src) =
            (vec![0.0; gn * n], vec![0.0; gn * n], vec![0.0; gn * n], vec![0.0; gn * n]);
        for g in 0..gn {
            for j in 0..n {
                let k = g * n + j;
                di[k] = kt / dt + fz.sigma1[k];
                if j > 0 {
                    let d = c * fz.inv_s[g * (n + 1) + j];
                    di[k] += d;
                    lo[k] = -d;
                } else if let Some(w) = &self.wall_left {
                    let d = 2.0 * c * fz.inv_s[g * (n + 1)];
                    di[k] += d;
                    src[k] += d * w[g];
                }
                if j + 1 < n {
                    let d = c * fz.inv_s[g * (n + 1) + j + 1];
                    di[k] += d;
                    up[k] = -d;
                } else if let Some(w) = &self.wall_right {
                    let d = 2.0 * c * fz.inv_s[g * (n + 1) + n];
                    di[k] += d;
                    src[k] += d * w[g];
                }
            }
        }
        (lo, di, up, src)
    }

    /// One backward-Euler step. Each iterate solves the linear group
    /// equations for ρ at the current T, then corrects T by a Newton step
    /// of the full coupled Jacobian.
    pub fn step(&self, state: &FddlState, dt: f64) -> Result<(FddlState, usize), LimitError> {
        let (n, gn) = (self.config.cells, self.groups());
        let bs = gn + 1;
        let norm = self.config.scaling.planck_norm;
        let (kt, _, kh) = self.factors();
        let fz = self.freeze(state);
        let (lo, di, up, src) = self.density_bands(&fz, dt);
        let mut t = state.t.clone();
        let (mut b, mut db) = (vec![0.0; gn * n], vec![0.0; gn * n]);
        let planck = |t: &[f64], b: &mut [f64], db: &mut [f64]| {
            for j in 0..n {
                let p = group_planck(t[j], &self.config.grid, norm);
                for g in 0..gn {
                    b[g * n + j] = p.b[g];
                    db[g * n + j] = p.db[g];
                }
            }
        };
        let densities = |b: &[f64]| -> Result<Vec<f64>, LimitError> {
            let mut rho = Vec::with_capacity(gn * n);
            for g in 0..gn {
                let sl = g * n..(g + 1) * n;
                let rhs: Vec<f64> = sl
                    .clone()
                    .map(|k| kt / dt * state.rho[k] + fz.sigma2[k] * b[k] + src[k])
                    .collect();
                rho.extend(solve_tridiagonal(&lo[sl.clone()], &di[sl.clone()], &up[sl], &rhs)?);
            }
            Ok(rho)
        };
        planck(&t, &mut b, &mut db);
        let mut rho = densities(&b)?;
        let mut jac = BlockTridiagonal::zeros(n, bs);
        let mut last = f64::INFINITY;
        for it in 1..=self.config.max_iterations {
            jac.clear();
            let mut rhs = vec![0.0; n * bs];
            for j in 0..n {
                let mut tt = kh / dt;
                let mut exchange = 0.0;
                for g in 0..gn {
                    let k = g * n + j;
                    *jac.diag_mut(j, g, g) = di[k];
                    *jac.lower_mut(j, g) = lo[k];
                    *jac.upper_mut(j, g) = up[k];
                    *jac.diag_mut(j, g, gn) = -fz.sigma2[k] * db[k];
                    *jac.diag_mut(j, gn, g) = -4.0 * PI * fz.sigma1[k];
                    tt += 4.0 * PI * fz.sigma2[k] * db[k];
                    exchange += fz.sigma1[k] * rho[k] - fz.sigma2[k] * b[k];
                }
                *jac.diag_mut(j, gn, gn) = tt;
                // The group rows hold exactly; only the material row is off.
                rhs[j * bs + gn] = -(kh * (t[j] - state.t[j]) / dt - 4.0 * PI * exchange);
            }
            let delta = jac.factor()?.solve(&rhs)?;
            let mut change = 0.0f64;
            for j in 0..n {
                let d = delta[j * bs + gn];
                let next = t[j] + d;
                t[j] = if next > 0.5 * t[j] { next } else { 0.5 * t[j] };
                change = change.max(d.abs());
            }
            planck(&t, &mut b, &mut db);
            let next = densities(&b)?;
            let drho = next.iter().zip(&rho).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            rho = next;
            if !change.is_finite() {
                break;
            }
            last = change;
            let rho_scale = rho.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            if change <= self.config.tol && drho <= self.config.tol * rho_scale {
                return Ok((FddlState { rho, t, time: state.time + dt }, it));
            }
        }
        Err(LimitError::NonConvergence { time: state.time, iterations: self.config.max_iterations, residual: last })
    }
}

/// Runs to t_end; returns the initial state, every `stride`-th state and
/// the final one.
pub fn fddl_run(config: FddlConfig, stride: usize) -> Result<Vec<FddlState>, LimitError> {
    let solver = FddlSolver::new(config)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseLu;
    use crate::physics::SpectralLaw;

    fn config() -> FddlConfig {
        FddlConfig {
            length: 1.0,
            cells: 12,
            grid: FrequencyGrid::logarithmic(1e-2, 30.0, 5).unwrap(),
            constants: PhysicalConstants { c_v: 1.0, ..Default::default() },
            scaling: Scaling::nondimensional(1e-6, 1e-6, 1e6).unwrap(),
            opacity: OpacityModel::uniform(1.0, 10.0, SpectralLaw::InverseCube),
            weights: WeightOptions::default(),
            left: LimitBoundary::ZeroFlux,
            right: LimitBoundary::ZeroFlux,
            initial_temperature: TemperatureProfile::Cosine { mean: 1.0, amplitude: 0.3, length: 1.0 },
            initial_radiation: Some(TemperatureProfile::Cosine { mean: 1.0, amplitude: -0.3, length: 1.0 }),
            dt: 0.02,
            t_end: 0.1,
            tol: 1e-11,
            max_iterations: 100,
        }
    }

    #[test]
    fn equilibrium_is_fixed() {
        let mut cfg = config();
        cfg.initial_temperature = TemperatureProfile::Uniform(0.7);
        cfg.initial_radiation = None;
        let s = FddlSolver::new(cfg).unwrap();
        let s0 = s.initialize().unwrap();
        let mut st = s0.clone();
        for _ in 0..20 {
            st = s.step(&st, 0.05).unwrap().0;
        }
        let dt = st.t.iter().zip(&s0.t).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dr = st.rho.iter().zip(&s0.rho).fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / b.abs().max(1e-300)));
        assert!(dt <= 1e-12 && dr <= 1e-12, "{dt} {dr}");
    }

    #[test]
    fn closed_slab_conserves_energy() {
        let s = FddlSolver::new(config()).unwrap();
        let mut st = s.initialize().unwrap();
        for _ in 0..5 {
            let next = s.step(&st, 0.02).unwrap().0;
            let (e0, e1) = (s.total_energy(&st), s.total_energy(&next));
            assert!((e1 - e0).abs() <= 1e-10 * e0, "{}", (e1 - e0).abs() / e0);
            st = next;
        }
    }

    #[test]
    fn strong_absorption_pulls_temperatures_together() {
        let gap = |a0: f64| {
            let mut cfg = config();
            cfg.opacity = OpacityModel::uniform(a0, 10.0, SpectralLaw::InverseCube);
            let out = fddl_run(cfg, 1000).unwrap();
            let last = out.last().unwrap();
            let n = last.t.len();
            (0..n)
                .map(|j| {
                    let rho: Vec<f64> = (0..5).map(|g| last.rho[g * n + j]).collect();
                    (radiation_temperature(&rho, 1.0).unwrap() - last.t[j]).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let (weak, strong) = (gap(1.0), gap(1e6));
        assert!(strong < 1e-3 * weak.max(1e-3), "{weak} {strong}");
    }

    #[test]
    fn matches_dense_newton_on_single_group() {
        // Same discrete equations, assembled densely and solved by Newton
        // with a finite-difference Jacobian.
        let mut cfg = config();
        cfg.cells = 8;
        cfg.grid = FrequencyGrid::logarithmic(0.1, 10.0, 1).unwrap();
        cfg.opacity = OpacityModel::uniform(2.0, 3.0, SpectralLaw::Constant);
        cfg.left = LimitBoundary::Dirichlet(1.2);
        cfg.initial_radiation = None;
        let s = FddlSolver::new(cfg.clone()).unwrap();
        let st = s.initialize().unwrap();
        let dt = 0.05;
        let got = s.step(&st, dt).unwrap().0;

        let n = cfg.cells;
        let dx = 1.0 / n as f64;
        let (sa, ss) = (2.0, 3.0);
        let scale = Scaling::nondimensional(1e-6, 1e-6, 1e6).unwrap();
        let (kt, kd, kh) = (1.0 / (scale.light * scale.l_a), 1.0 / (3.0 * scale.l_a * scale.l_s), 1.0 / (scale.light * scale.p0 * scale.l_a));
        let bg = |t: f64| group_planck(t, &cfg.grid, 1.0).b[0];
        let bwall = bg(1.2);
        let resid = |u: &[f64]| -> Vec<f64> {
            let (rho, t) = u.split_at(n);
            let mut f = vec![0.0; 2 * n];
            for j in 0..n {
                let mut flux = 0.0;
                if j > 0 {
                    flux += (rho[j - 1] - rho[j]) / ss;
                } else {
                    flux += 2.0 * (bwall - rho[0]) / ss;
                }
                if j + 1 < n {
                    flux += (rho[j + 1] - rho[j]) / ss;
                }
                let ex = sa * bg(t[j]) - sa * rho[j];
                f[j] = kt * (rho[j] - st.rho[j]) / dt - kd * flux / (dx * dx) - ex;
                f[n + j] = kh * (t[j] - st.t[j]) / dt + 4.0 * PI * ex;
            }
            f
        };
        let mut u: Vec<f64> = st.rho.iter().chain(&st.t).cloned().collect();
        for _ in 0..30 {
            let f0 = resid(&u);
            let mut jac = vec![0.0; 4 * n * n];
            for c in 0..2 * n {
                let h = 1e-7 * u[c].abs().max(1e-3);
                let mut up = u.clone();
                up[c] += h;
                let mut dn = u.clone();
                dn[c] -= h;
                let (fp, fm) = (resid(&up), resid(&dn));
                for r in 0..2 * n {
                    jac[r * 2 * n + c] = (fp[r] - fm[r]) / (2.0 * h);
                }
            }
            let delta = DenseLu::new(2 * n, jac).unwrap().solve(&f0);
            for (x, d) in u.iter_mut().zip(&delta) {
                *x -= d;
            }
        }
        for j in 0..n {
            assert!((u[j] - got.rho[j]).abs() <= 1e-10 * got.rho[j], "rho {j}: {} {}", u[j], got.rho[j]);
            assert!((u[n + j] - got.t[j]).abs() <= 1e-10, "T {j}");
        }
    }
}
