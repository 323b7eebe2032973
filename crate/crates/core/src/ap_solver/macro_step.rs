//! Implicit solve of the moment system (ρ_g, R_g) coupled to T.
//!
//! R is eliminated node by node, leaving one block row per cell in the
//! unknowns (ρ_1..ρ_G, T). The system is solved by Newton's method; only
//! B_g(T) is nonlinear, and the factorised Jacobian is reused, within a
//! step and across steps of equal Δt, while the iteration contracts
//! quickly, with a backtracking line search on the energy residual when a
//! full step does not reduce it.

use super::{ApSolver, Boundary, CoefficientField, RadiationState, SolverError};
use crate::linalg::{solve_tridiagonal_in_place, BlockLu, BlockTridiagonal};
use crate::physics::group_planck_into;
use std::f64::consts::PI;

/// R at one node as an affine function of at most two cell densities.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct AffineR {
    pub constant: f64,
    pub terms: [(usize, f64); 2],
}

impl AffineR {
    #[inline]
    fn eval(&self, rho: &[f64]) -> f64 {
        self.constant + self.terms[0].1 * rho[self.terms[0].0] + self.terms[1].1 * rho[self.terms[1].0]
    }
}

/// Tridiagonal operator of the group equations in ρ for fixed T.
struct DensityBands {
    n: usize,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    constant: Vec<f64>,
}

impl DensityBands {
    fn build(affine: &[AffineR], coeffs: &CoefficientField, a: f64, la: f64, dx: f64) -> Self {
        let (n, gn) = (coeffs.cells, coeffs.groups);
        let mut m = Self {
            n,
            lower: vec![0.0; gn * n],
            diag: vec![0.0; gn * n],
            upper: vec![0.0; gn * n],
            constant: vec![0.0; gn * n],
        };
        for g in 0..gn {
            for j in 0..n {
                let k = g * n + j;
                m.diag[k] = a + la * coeffs.sigma1[k];
                for (node, sign) in [(j + 1, 1.0), (j, -1.0)] {
                    let af = affine[g * (n + 1) + node];
                    m.constant[k] += sign * af.constant / (3.0 * dx);
                    for (cell, c) in af.terms {
                        let v = sign * c / (3.0 * dx);
                        if cell == j {
                            m.diag[k] += v;
                        } else if cell + 1 == j {
                            m.lower[k] += v;
                        } else if cell == j + 1 {
                            m.upper[k] += v;
                        }
                    }
                }
            }
        }
        m
    }

    /// ρ for the given B, written to `rho`; `scratch` has length N.
    #[allow(clippy::too_many_arguments)]
    fn solve_into(
        &self,
        state: &RadiationState,
        b: &[f64],
        a: f64,
        la: f64,
        coeffs: &CoefficientField,
        rho: &mut [f64],
        scratch: &mut [f64],
    ) -> Result<(), SolverError> {
        let n = self.n;
        for g in 0..coeffs.groups {
            let sl = g * n..(g + 1) * n;
            for k in sl.clone() {
                rho[k] = a * state.rho[k] + la * coeffs.sigma2[k] * b[k] - self.constant[k];
            }
            solve_tridiagonal_in_place(
                &self.lower[sl.clone()],
                &self.diag[sl.clone()],
                &self.upper[sl.clone()],
                &mut rho[sl],
                scratch,
            )
            .map_err(|e| SolverError::Linear { context: format!("density solve, group {g}"), source: e })?;
        }
        Ok(())
    }
}

/// New macroscopic unknowns after one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroUpdate {
    pub rho: Vec<f64>,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    pub iterations: usize,
    pub factorizations: usize,
}

impl ApSolver {
    /// Σ_m w Ω² E_Q per (g, j).
    pub(crate) fn q_second_moment(&self, state: &RadiationState) -> Vec<f64> {
        let (n, gn, mq) = (state.cells, state.groups, state.ordinates);
        let (w, om) = (self.quad.weights(), self.quad.nodes());
        let mut k = vec![0.0; gn * n];
        for g in 0..gn {
            for m in 0..mq {
                let c = w[m] * om[m] * om[m];
                let eq = state.eq(g, m);
                for j in 0..n {
                    k[g * n + j] += c * eq[j];
                }
            }
        }
        k
    }

    /// Moments Σ w Ω E_Q at a cell and Σ w Ω O_Q at a node, per group.
    fn q_first_moments(&self, state: &RadiationState, g: usize, cell: usize, node: usize) -> (f64, f64) {
        let (w, om) = (self.quad.weights(), self.quad.nodes());
        let (mut e, mut o) = (0.0, 0.0);
        for m in 0..state.ordinates {
            e += w[m] * om[m] * state.eq(g, m)[cell];
            o += w[m] * om[m] * state.oq(g, m)[node];
        }
        (e, o)
    }

    /// Boundary-node values of R from the first angular moment of the
    /// inflow condition, given the adjacent cell density and interior R.
    ///
    /// Returns (R_left, R_right); reflective walls give zero.
    pub fn boundary_closure_r(
        &self,
        state: &RadiationState,
        g: usize,
        rho_new: &[f64],
        r_interior: (f64, f64),
    ) -> (f64, f64) {
        let n = state.cells;
        let m1 = self.quad.moment(1);
        let m2 = self.quad.moment(2);
        let left = match self.config.boundary.left {
            Boundary::Reflective => 0.0,
            _ => {
                let (e, o) = self.q_first_moments(state, g, 0, 1);
                (6.0 * m1 * (self.inflow_left[g] - rho_new[0]) - 6.0 * e - 3.0 * o) / (3.0 * m2)
                    - r_interior.0
            }
        };
        let right = match self.config.boundary.right {
            Boundary::Reflective => 0.0,
            _ => {
                let (e, o) = self.q_first_moments(state, g, n - 1, n - 1);
                (6.0 * m1 * (rho_new[n - 1] - self.inflow_right[g]) + 6.0 * e - 3.0 * o) / (3.0 * m2)
                    - r_interior.1
            }
        };
        (left, right)
    }

    /// Affine R_i(ρ) for every (g, i), layout `[g*(N+1) + i]`.
    pub(crate) fn affine_r(
        &self,
        state: &RadiationState,
        coeffs: &CoefficientField,
        dt: f64,
    ) -> Vec<AffineR> {
        let (n, gn) = (state.cells, state.groups);
        let dx = self.mesh.dx;
        let a = 1.0 / (self.config.scaling.light * dt);
        let kq = self.q_second_moment(state);
        let m1 = self.quad.moment(1);
        let m2 = self.quad.moment(2);
        let mut out = vec![AffineR::default(); gn * (n + 1)];
        for g in 0..gn {
            let base = g * (n + 1);
            let rn = state.r(g);
            for i in 1..n {
                let alpha = 1.0 / (a + coeffs.node_total[base + i]);
                let dk = kq[g * n + i] - kq[g * n + i - 1];
                out[base + i] = AffineR {
                    constant: alpha * (a * rn[i] - 3.0 * dk / dx),
                    terms: [(i - 1, alpha / dx), (i, -alpha / dx)],
                };
            }
            let first = out[base + 1];
            let last = out[base + n - 1];
            out[base] = match self.config.boundary.left {
                Boundary::Reflective => AffineR { constant: 0.0, terms: [(0, 0.0), (1, 0.0)] },
                _ => {
                    let (e, o) = self.q_first_moments(state, g, 0, 1);
                    let s = (6.0 * m1 * self.inflow_left[g] - 6.0 * e - 3.0 * o) / (3.0 * m2);
                    let c = 6.0 * m1 / (3.0 * m2);
                    AffineR {
                        constant: s - first.constant,
                        terms: [(0, -c - first.terms[0].1), (1, -first.terms[1].1)],
                    }
                }
            };
            out[base + n] = match self.config.boundary.right {
                Boundary::Reflective => AffineR { constant: 0.0, terms: [(n - 2, 0.0), (n - 1, 0.0)] },
                _ => {
                    let (e, o) = self.q_first_moments(state, g, n - 1, n - 1);
                    let s = (-6.0 * m1 * self.inflow_right[g] + 6.0 * e - 3.0 * o) / (3.0 * m2);
                    let c = 6.0 * m1 / (3.0 * m2);
                    AffineR {
                        constant: s - last.constant,
                        terms: [(n - 2, -last.terms[0].1), (n - 1, c - last.terms[1].1)],
                    }
                }
            };
        }
        out
    }

    /// Solves the coupled system for one step. Each iterate first solves
    /// the (linear) group equations exactly for ρ given B_g(T), then takes
    /// a Newton step in T from the full block Jacobian. Eliminating ρ this
    /// way keeps the Wien-tail groups, where B_g is exponentially sensitive
    /// to T, from wrecking the linearisation.
    pub fn macro_step(
        &self,
        state: &RadiationState,
        coeffs: &CoefficientField,
        dt: f64,
    ) -> Result<MacroUpdate, SolverError> {
        let (n, gn) = (state.cells, state.groups);
        let bs = gn + 1;
        let dx = self.mesh.dx;
        let scaling = &self.config.scaling;
        let a = 1.0 / (scaling.light * dt);
        let h = scaling.heat_factor(self.config.constants.c_v) / dt;
        let la = scaling.l_a;
        let opts = self.config.nonlinear;
        let affine = self.affine_r(state, coeffs, dt);
        let bands = DensityBands::build(&affine, coeffs, a, la, dx);

        let mut t = state.t.clone();
        let (mut b, mut db) = (vec![0.0; gn * n], vec![0.0; gn * n]);
        self.planck_fields(&t, &mut b, &mut db);
        let mut scratch = vec![0.0; n];
        let mut rho = vec![0.0; gn * n];
        bands.solve_into(state, &b, a, la, coeffs, &mut rho, &mut scratch)?;
        let mut next_rho = vec![0.0; gn * n];
        let mut f = vec![0.0; n * bs];
        let mut lu: Option<BlockLu> = match self.jacobian.lock().expect("jacobian cache").take() {
            Some((cached_dt, cached)) if cached_dt == dt => Some(cached),
            _ => None,
        };
        let mut jac: Option<BlockTridiagonal> = None;
        let mut refactor = lu.is_none();
        let mut prev_dt = f64::INFINITY;
        let mut factorizations = 0;

        let energy_norm = |f: &[f64]| (0..n).map(|j| f[j * bs + gn].powi(2)).sum::<f64>().sqrt();
        self.residual(state, coeffs, &affine, &rho, &t, &b, a, h, &mut f);
        let mut norm = energy_norm(&f);
        let mut trial_t = vec![0.0; n];
        let mut trial_f = vec![0.0; n * bs];

        for iteration in 1..=opts.max_iterations {
            if refactor || lu.is_none() {
                let jac = jac.get_or_insert_with(|| BlockTridiagonal::zeros(n, bs));
                self.assemble_jacobian(jac, coeffs, &affine, &db, a, h, dx);
                lu = Some(jac.factor().map_err(|e| SolverError::Linear {
                    context: format!("moment Jacobian at t={:.6e}", state.time),
                    source: e,
                })?);
                factorizations += 1;
            }
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let delta = lu
                .as_ref()
                .expect("factorised above")
                .solve(&rhs)
                .map_err(|e| SolverError::Linear { context: "moment solve".into(), source: e })?;
            let full = (0..n).fold(0.0f64, |m, j| m.max(delta[j * bs + gn].abs()));
            if !full.is_finite() {
                return Err(SolverError::NonConvergence {
                    time: state.time,
                    iterations: iteration,
                    residual: f64::NAN,
                });
            }
            // Backtrack on the energy residual unless the step is already
            // at round-off size, where the norm no longer decreases reliably.
            let mut lambda = 1.0;
            let (mut max_dt, mut clamped);
            loop {
                max_dt = 0.0f64;
                clamped = false;
                for j in 0..n {
                    let d = lambda * delta[j * bs + gn];
                    let next = t[j] + d;
                    trial_t[j] = if next >= 0.5 * t[j] {
                        next
                    } else {
                        clamped = true;
                        0.5 * t[j]
                    };
                    max_dt = max_dt.max((trial_t[j] - t[j]).abs());
                }
                self.planck_fields(&trial_t, &mut b, &mut db);
                bands.solve_into(state, &b, a, la, coeffs, &mut next_rho, &mut scratch)?;
                self.residual(state, coeffs, &affine, &next_rho, &trial_t, &b, a, h, &mut trial_f);
                let trial_norm = energy_norm(&trial_f);
                if full <= 1e3 * opts.tol_t || trial_norm <= (1.0 - 1e-4 * lambda) * norm || lambda < 1.0 / 64.0 {
                    norm = trial_norm;
                    break;
                }
                lambda *= 0.5;
            }
            std::mem::swap(&mut t, &mut trial_t);
            std::mem::swap(&mut f, &mut trial_f);
            let max_drho = next_rho.iter().zip(&rho).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            std::mem::swap(&mut rho, &mut next_rho);
            let rho_scale = rho.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
            if !clamped && lambda == 1.0 && max_dt <= opts.tol_t && max_drho <= opts.tol_rho * rho_scale {
                let r = (0..gn)
                    .flat_map(|g| {
                        let rg = &rho[g * n..(g + 1) * n];
                        affine[g * (n + 1)..(g + 1) * (n + 1)].iter().map(move |af| af.eval(rg))
                    })
                    .collect();
                if let Some(lu) = lu {
                    *self.jacobian.lock().expect("jacobian cache") = Some((dt, lu));
                }
                return Ok(MacroUpdate { rho, r, t, iterations: iteration, factorizations });
            }
            refactor = clamped || lambda < 1.0 || max_dt > 0.25 * prev_dt;
            prev_dt = max_dt;
        }
        Err(SolverError::NonConvergence {
            time: state.time,
            iterations: opts.max_iterations,
            residual: prev_dt,
        })
    }

    fn planck_fields(&self, t: &[f64], b: &mut [f64], db: &mut [f64]) {
        let (n, gn) = (t.len(), self.groups());
        let mut bc = vec![0.0; gn];
        let mut dbc = vec![0.0; gn];
        for (j, &tj) in t.iter().enumerate() {
            group_planck_into(tj, self.config.grid.edges(), self.config.scaling.planck_norm, &mut bc, &mut dbc);
            for g in 0..gn {
                b[g * n + j] = bc[g];
                db[g * n + j] = dbc[g];
            }
        }
    }

    /// Cell residuals in block order [F_1..F_G, F_E] per cell. The last
    /// entry is the total energy balance (temperature row plus 4π times
    /// every group row), which carries no emission or absorption terms and
    /// so stays well scaled when 𝓛_aσ ∂B/∂T is huge.
    #[allow(clippy::too_many_arguments)]
    fn residual(
        &self,
        state: &RadiationState,
        coeffs: &CoefficientField,
        affine: &[AffineR],
        rho: &[f64],
        t: &[f64],
        b: &[f64],
        a: f64,
        h: f64,
        f: &mut [f64],
    ) {
        let (n, gn) = (state.cells, state.groups);
        let bs = gn + 1;
        let dx = self.mesh.dx;
        let la = self.config.scaling.l_a;
        for j in 0..n {
            let mut stored = 0.0;
            for g in 0..gn {
                let k = g * n + j;
                let rg = &rho[g * n..(g + 1) * n];
                let (rl, rr) = (affine[g * (n + 1) + j].eval(rg), affine[g * (n + 1) + j + 1].eval(rg));
                let ex = la * (coeffs.sigma2[k] * b[k] - coeffs.sigma1[k] * rho[k]);
                let transport = a * (rho[k] - state.rho[k]) + (rr - rl) / (3.0 * dx);
                f[j * bs + g] = transport - ex;
                stored += transport;
            }
            f[j * bs + gn] = h * (t[j] - state.t[j]) + 4.0 * PI * stored;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble_jacobian(
        &self,
        jac: &mut BlockTridiagonal,
        coeffs: &CoefficientField,
        affine: &[AffineR],
        db: &[f64],
        a: f64,
        h: f64,
        dx: f64,
    ) {
        let (n, gn) = (coeffs.cells, coeffs.groups);
        let la = self.config.scaling.l_a;
        jac.clear();
        let w = 4.0 * PI;
        for j in 0..n {
            for g in 0..gn {
                let k = g * n + j;
                let mut d = a;
                for (node, sign) in [(j + 1, 1.0), (j, -1.0)] {
                    let af = affine[g * (n + 1) + node];
                    for (cell, c) in af.terms {
                        let v = sign * c / (3.0 * dx);
                        if cell == j {
                            d += v;
                        } else if cell + 1 == j {
                            *jac.lower_mut(j, g) += v;
                            *jac.lower_last_row(j, g) += w * v;
                        } else if cell == j + 1 {
                            *jac.upper_mut(j, g) += v;
                            *jac.upper_last_row(j, g) += w * v;
                        }
                    }
                }
                *jac.diag_mut(j, g, g) = d + la * coeffs.sigma1[k];
                *jac.diag_mut(j, g, gn) = -la * coeffs.sigma2[k] * db[k];
                *jac.diag_mut(j, gn, g) = w * d;
            }
            *jac.diag_mut(j, gn, gn) = h;
        }
    }
}

