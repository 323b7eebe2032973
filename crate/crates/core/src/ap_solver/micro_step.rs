//! Implicit update of the Q-part, one banded system per (group, ordinate).
//!
//! Unknowns are interleaved as [O_0, E_0, O_1, E_1, …, O_N]. Interior rows
//! are then tridiagonal, d + ω/Δx·(skew part), so elimination without
//! pivoting is stable; the two three-point inflow rows are reduced to
//! tridiagonal form with their neighbour first.

use super::{ApSolver, Boundary, CoefficientField, MacroUpdate, RadiationState, SolverError};
use crate::linalg::solve_tridiagonal_in_place;
use crate::quadrature::AngularQuadrature;

impl ApSolver {
    /// New (E_Q, O_Q) in the layouts of [`RadiationState`], already
    /// projected onto zero discrete moments.
    ///
    /// The sources use the converged moment equations, so the right-hand
    /// sides only carry the explicit ⟨Ω²E_Q⟩ flux and the anisotropic part
    /// of the R gradient instead of differences of nearly equal terms.
    pub fn micro_step(
        &self,
        state: &RadiationState,
        update: &MacroUpdate,
        coeffs: &CoefficientField,
        dt: f64,
    ) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
        let (n, gn, mq) = (state.cells, state.groups, state.ordinates);
        let dx = self.mesh.dx;
        let a = 1.0 / (self.config.scaling.light * dt);
        let kq = self.q_second_moment(state);
        let len = 2 * n + 1;
        let mut eq = vec![0.0; state.eq.len()];
        let mut oq = vec![0.0; state.oq.len()];
        let mut rhs = vec![0.0; len];
        let (left, right) = (self.config.boundary.left, self.config.boundary.right);
        let (mut lower, mut diag, mut upper) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        let mut scratch = vec![0.0; len];

        for g in 0..gn {
            let rho = &update.rho[g * n..(g + 1) * n];
            let r = &update.r[g * (n + 1)..(g + 1) * (n + 1)];
            let k = &kq[g * n..(g + 1) * n];
            let sig_cell = &coeffs.sigbar[g * n..(g + 1) * n];
            let sig_node = &coeffs.node_sigbar[g * (n + 1)..(g + 1) * (n + 1)];
            for m in 0..mq {
                let om = self.quad.nodes()[m];
                let c = om / dx;
                let eqn = state.eq(g, m);
                let oqn = state.oq(g, m);
                for i in 1..n {
                    let row = 2 * i;
                    lower[row] = -c;
                    diag[row] = a + sig_node[i];
                    upper[row] = c;
                    rhs[row] = a * oqn[i] + 3.0 * om * (k[i] - k[i - 1]) / dx;
                }
                for j in 0..n {
                    let row = 2 * j + 1;
                    lower[row] = -c;
                    diag[row] = a + sig_cell[j];
                    upper[row] = c;
                    rhs[row] = a * eqn[j] - (om * om - 1.0 / 3.0) * (r[j + 1] - r[j]) / dx;
                }
                lower[0] = 0.0;
                match left {
                    Boundary::Reflective => {
                        diag[0] = 1.0;
                        upper[0] = 0.0;
                        rhs[0] = -om * r[0];
                    }
                    _ => {
                        // O_0 + 2E_0 + O_1 minus row 1 over ω/Δx.
                        diag[0] = 2.0;
                        upper[0] = 2.0 - diag[1] / c;
                        rhs[0] = 2.0 * (self.inflow_left[g] - rho[0]) - om * (r[1] + r[0]) - rhs[1] / c;
                    }
                }
                let last = 2 * n;
                upper[last] = 0.0;
                match right {
                    Boundary::Reflective => {
                        diag[last] = 1.0;
                        lower[last] = 0.0;
                        rhs[last] = -om * r[n];
                    }
                    _ => {
                        // O_{N-1} − 2E_{N-1} + O_N plus row 2N−1 over ω/Δx.
                        diag[last] = 2.0;
                        lower[last] = -2.0 + diag[last - 1] / c;
                        rhs[last] = 2.0 * (rho[n - 1] - self.inflow_right[g]) - om * (r[n - 1] + r[n])
                            + rhs[last - 1] / c;
                    }
                }
                solve_tridiagonal_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch).map_err(|e| {
                    SolverError::Linear {
                        context: format!("Q system for group {g}, ordinate {m}, dt={dt:.6e}"),
                        source: e,
                    }
                })?;
                let kk = g * mq + m;
                for j in 0..n {
                    eq[kk * n + j] = rhs[2 * j + 1];
                }
                for i in 0..=n {
                    oq[kk * (n + 1) + i] = rhs[2 * i];
                }
            }
        }
        project_slices(&mut eq, &mut oq, gn, n, &self.quad);
        Ok((eq, oq))
    }
}

/// Removes the discrete moments Σ w E_Q and Σ w Ω O_Q at every location.
pub fn project_q_moments(state: &mut RadiationState, quad: &AngularQuadrature) {
    let (gn, n) = (state.groups, state.cells);
    project_slices(&mut state.eq, &mut state.oq, gn, n, quad);
}

fn project_slices(eq: &mut [f64], oq: &mut [f64], gn: usize, n: usize, quad: &AngularQuadrature) {
    let mq = quad.len();
    let (w, om) = (quad.weights(), quad.nodes());
    let m2 = quad.moment(2);
    for g in 0..gn {
        for j in 0..n {
            let s: f64 = (0..mq).map(|m| w[m] * eq[(g * mq + m) * n + j]).sum();
            for m in 0..mq {
                eq[(g * mq + m) * n + j] -= s;
            }
        }
        for i in 0..=n {
            let s: f64 = (0..mq).map(|m| w[m] * om[m] * oq[(g * mq + m) * (n + 1) + i]).sum();
            for m in 0..mq {
                oq[(g * mq + m) * (n + 1) + i] -= om[m] * s / m2;
            }
        }
    }
}
