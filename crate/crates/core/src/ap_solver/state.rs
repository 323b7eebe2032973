use crate::physics::radiation_temperature;
use crate::quadrature::AngularQuadrature;

/// Solver unknowns at one time level.
///
/// Layouts: `rho[g*N + j]`, `r[g*(N+1) + i]`, `eq[(g*M + m)*N + j]`,
/// `oq[(g*M + m)*(N+1) + i]`, `t[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationState {
    pub groups: usize,
    pub cells: usize,
    pub ordinates: usize,
    pub rho: Vec<f64>,
    pub r: Vec<f64>,
    pub eq: Vec<f64>,
    pub oq: Vec<f64>,
    pub t: Vec<f64>,
    pub time: f64,
}

impl RadiationState {
    pub fn zeros(groups: usize, cells: usize, ordinates: usize) -> Self {
        Self {
            groups,
            cells,
            ordinates,
            rho: vec![0.0; groups * cells],
            r: vec![0.0; groups * (cells + 1)],
            eq: vec![0.0; groups * ordinates * cells],
            oq: vec![0.0; groups * ordinates * (cells + 1)],
            t: vec![0.0; cells],
            time: 0.0,
        }
    }

    pub fn rho(&self, g: usize) -> &[f64] {
        &self.rho[g * self.cells..(g + 1) * self.cells]
    }

    pub fn r(&self, g: usize) -> &[f64] {
        let n = self.cells + 1;
        &self.r[g * n..(g + 1) * n]
    }

    pub fn eq(&self, g: usize, m: usize) -> &[f64] {
        let k = g * self.ordinates + m;
        &self.eq[k * self.cells..(k + 1) * self.cells]
    }

    pub fn oq(&self, g: usize, m: usize) -> &[f64] {
        let k = g * self.ordinates + m;
        let n = self.cells + 1;
        &self.oq[k * n..(k + 1) * n]
    }

    /// Group densities of cell j.
    pub fn cell_rho(&self, j: usize) -> Vec<f64> {
        (0..self.groups).map(|g| self.rho[g * self.cells + j]).collect()
    }

    /// T_r per cell (negative energy clipped to zero).
    pub fn radiation_temperature(&self, planck_norm: f64) -> Vec<f64> {
        (0..self.cells)
            .map(|j| {
                let rho: Vec<f64> = self.cell_rho(j).into_iter().map(|v| v.max(0.0)).collect();
                radiation_temperature(&rho, planck_norm).unwrap_or(0.0)
            })
            .collect()
    }

    /// Full even and odd parts E = ρ + E_Q (cells) and O = ΩR + O_Q (nodes).
    pub fn recombine(&self, g: usize, m: usize, quad: &AngularQuadrature) -> (Vec<f64>, Vec<f64>) {
        let om = quad.nodes()[m];
        let e = self.rho(g).iter().zip(self.eq(g, m)).map(|(r, q)| r + q).collect();
        let o = self.r(g).iter().zip(self.oq(g, m)).map(|(r, q)| om * r + q).collect();
        (e, o)
    }

    /// Largest |Σ w E_Q| over (g, j) and |Σ w Ω O_Q| over (g, i).
    pub fn q_moment_defect(&self, quad: &AngularQuadrature) -> f64 {
        let (w, om) = (quad.weights(), quad.nodes());
        let mut worst = 0.0f64;
        for g in 0..self.groups {
            for j in 0..self.cells {
                let s: f64 = (0..self.ordinates).map(|m| w[m] * self.eq(g, m)[j]).sum();
                worst = worst.max(s.abs());
            }
            for i in 0..=self.cells {
                let s: f64 = (0..self.ordinates).map(|m| w[m] * om[m] * self.oq(g, m)[i]).sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    pub fn max_abs_q(&self) -> f64 {
        self.eq.iter().chain(&self.oq).fold(0.0f64, |a, v| a.max(v.abs()))
    }
}
