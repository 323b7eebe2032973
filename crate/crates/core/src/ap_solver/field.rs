//! Group coefficients frozen at (Tⁿ, T_rⁿ) on cells and nodes.

use crate::physics::{CoefficientEvaluator, GroupCoefficients, OpacityModel, WeightOptions};

/// Layouts follow [`super::RadiationState`]: `[g*N + j]` on cells,
/// `[g*(N+1) + i]` on nodes.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub groups: usize,
    pub cells: usize,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    /// 𝓛_aσ_a + 𝓛_sσ_s on cells.
    pub sigbar: Vec<f64>,
    /// (𝓛_a + 𝓛_s)σ_t on cells.
    pub total: Vec<f64>,
    /// (𝓛_a + 𝓛_s)σ_t on nodes (harmonic mean of neighbours).
    pub node_total: Vec<f64>,
    /// 𝓛_aσ_a + 𝓛_sσ_s on nodes (arithmetic mean of neighbours).
    pub node_sigbar: Vec<f64>,
}

impl CoefficientField {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        eval: &CoefficientEvaluator,
        opacity: &OpacityModel,
        weights: &WeightOptions,
        l_a: f64,
        l_s: f64,
        t: &[f64],
        t_r: &[f64],
        centers: &[f64],
    ) -> Self {
        let gn = eval.groups();
        let n = t.len();
        let mut f = Self {
            groups: gn,
            cells: n,
            sigma1: vec![0.0; gn * n],
            sigma2: vec![0.0; gn * n],
            sigbar: vec![0.0; gn * n],
            total: vec![0.0; gn * n],
            node_total: vec![0.0; gn * (n + 1)],
            node_sigbar: vec![0.0; gn * (n + 1)],
        };
        let mut c = GroupCoefficients::zeros(gn);
        for j in 0..n {
            eval.evaluate_into(opacity, weights, l_a, l_s, t[j], t_r[j], centers[j], &mut c);
            for g in 0..gn {
                let k = g * n + j;
                f.sigma1[k] = c.sigma1[g];
                f.sigma2[k] = c.sigma2[g];
                f.sigbar[k] = l_a * c.sigma_a[g] + l_s * c.sigma_s[g];
                f.total[k] = (l_a + l_s) * c.sigma_t[g];
            }
        }
        for g in 0..gn {
            let cell = |j: usize| g * n + j;
            let node = |i: usize| g * (n + 1) + i;
            f.node_total[node(0)] = f.total[cell(0)];
            f.node_sigbar[node(0)] = f.sigbar[cell(0)];
            f.node_total[node(n)] = f.total[cell(n - 1)];
            f.node_sigbar[node(n)] = f.sigbar[cell(n - 1)];
            for i in 1..n {
                let (a, b) = (f.total[cell(i - 1)], f.total[cell(i)]);
                f.node_total[node(i)] = if a > 0.0 && b > 0.0 { 2.0 * a * b / (a + b) } else { 0.0 };
                f.node_sigbar[node(i)] = 0.5 * (f.sigbar[cell(i - 1)] + f.sigbar[cell(i)]);
            }
        }
        f
    }
}
