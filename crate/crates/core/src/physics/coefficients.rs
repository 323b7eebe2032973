//! Group-averaged opacities for the decomposed multi-group equations.

use super::planck::{group_derivative_mean_cube, PLANCK_PREFACTOR};
use super::{FrequencyGrid, OpacityModel, PhysicsError, SpectralLaw};
use crate::gauss::GaussRule;

/// Weight pair (ω₁, ω₂) used for the two group absorption coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScheme {
    /// ω₁ = ω₂ = 1.
    #[default]
    Constant,
    /// ω ∝ ∂B/∂T, at T_r for ω₁ and at T for ω₂.
    Rosseland,
    /// ω ∝ B, at T_r for ω₁ and at T for ω₂.
    Planck,
}

/// Temperature at which ∂B/∂T weights the total (flux) opacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxTemperature {
    Material,
    #[default]
    Radiation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WeightOptions {
    pub scheme: WeightScheme,
    pub flux_temperature: FluxTemperature,
}

/// σ¹, σ², σ_a, σ_s, σ_t for every group at one spatial location.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupCoefficients {
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub sigma_a: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub sigma_t: Vec<f64>,
}

impl GroupCoefficients {
    pub fn zeros(groups: usize) -> Self {
        Self {
            sigma1: vec![0.0; groups],
            sigma2: vec![0.0; groups],
            sigma_a: vec![0.0; groups],
            sigma_s: vec![0.0; groups],
            sigma_t: vec![0.0; groups],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weight {
    Planck,
    Derivative,
}

/// Weighted group means ⟨s⟩_w and ⟨1/s⟩_w of the spectral shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Moments {
    pub mean: f64,
    pub mean_inverse: f64,
    /// ∫_g w dν without the Planck prefactor (and without 1/T for ∂B/∂T).
    pub total: f64,
}

const X_NEGLIGIBLE: f64 = 200.0;
const X_BEYOND_PEAK: f64 = 60.0;
const X_PER_PANEL: f64 = 8.0;
const MAX_PANELS: usize = 64;

/// Precomputed group quadrature for one frequency grid and spectral law.
#[derive(Debug, Clone)]
pub struct CoefficientEvaluator {
    grid: FrequencyGrid,
    law: SpectralLaw,
    rule: GaussRule,
    plain: Vec<f64>,
}

impl CoefficientEvaluator {
    pub fn new(grid: &FrequencyGrid, law: SpectralLaw) -> Self {
        let plain = (0..grid.groups())
            .map(|g| {
                let (lo, hi) = grid.bounds(g);
                law.group_mean(lo, hi)
            })
            .collect();
        Self { grid: grid.clone(), law, rule: GaussRule::new(20), plain }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn groups(&self) -> usize {
        self.grid.groups()
    }

    /// Plain group mean of the spectral shape s(ν).
    pub fn plain_mean(&self, g: usize) -> f64 {
        self.plain[g]
    }

    /// ∫_g f(ν) w(ν) dν with w = ν³/(e^{ν/T}−1) or its T-derivative shape,
    /// summed in log ν. Returns None when the weight carries no mass.
    pub(crate) fn weighted_moments(&self, g: usize, temp: f64, kind: Weight) -> Option<Moments> {
        if !(temp > 0.0) {
            return None;
        }
        let (lo, hi) = self.grid.bounds(g);
        let x_lo = lo / temp;
        if x_lo >= X_NEGLIGIBLE {
            return None;
        }
        let hi = hi.min(temp * (x_lo + X_BEYOND_PEAK));
        let x_hi = hi / temp;
        let span = (hi / lo).ln();
        let mut panels = span.ceil().max(1.0);
        if x_hi > X_PER_PANEL {
            let per = -(1.0 - X_PER_PANEL / x_hi).ln();
            panels = panels.max((span / per).ceil());
        }
        let panels = (panels as usize).min(MAX_PANELS);
        let h = span / panels as f64;
        let u0 = lo.ln();
        let (mut sw, mut ssw, mut siw) = (0.0, 0.0, 0.0);
        for p in 0..panels {
            let a = u0 + h * p as f64;
            for (u, w) in self.rule.mapped(a, a + h) {
                let nu = u.exp();
                let x = nu / temp;
                let shape = match kind {
                    Weight::Planck => nu * nu * nu / x.exp_m1(),
                    Weight::Derivative => {
                        let em = (-x).exp();
                        let d = if x < 0.5 { -(-x).exp_m1() } else { 1.0 - em };
                        nu * nu * nu * x * em / (d * d)
                    }
                };
                let weight = w * nu * shape;
                let s = self.law.spectral(nu);
                sw += weight;
                ssw += weight * s;
                siw += weight / s;
            }
        }
        if !(sw > 0.0) || !sw.is_finite() {
            return None;
        }
        Some(Moments { mean: ssw / sw, mean_inverse: siw / sw, total: sw })
    }

    /// Evaluates all group coefficients at material temperature `t`,
    /// radiation temperature `t_r` and position `x`.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate_into(
        &self,
        opacity: &OpacityModel,
        opts: &WeightOptions,
        l_a: f64,
        l_s: f64,
        t: f64,
        t_r: f64,
        x: f64,
        out: &mut GroupCoefficients,
    ) {
        let gn = self.groups();
        for v in [
            &mut out.sigma1,
            &mut out.sigma2,
            &mut out.sigma_a,
            &mut out.sigma_s,
            &mut out.sigma_t,
        ] {
            v.resize(gn, 0.0);
        }
        let tau = self.law.thermal(t);
        let a0 = opacity.sigma_a0.value(x) * tau;
        let s0 = opacity.sigma_s0.value(x) * tau;
        let combined = l_a * a0 + l_s * s0;
        let t_w = match opts.flux_temperature {
            FluxTemperature::Material => t,
            FluxTemperature::Radiation if t_r > 0.0 => t_r,
            FluxTemperature::Radiation => t,
        };
        let cube_means = match self.law {
            SpectralLaw::InverseCube | SpectralLaw::InverseCubeSqrtT => {
                let mut m = vec![f64::NAN; gn];
                group_derivative_mean_cube(t_w, self.grid.edges(), &mut m);
                Some(m)
            }
            SpectralLaw::Constant => None,
        };
        for g in 0..gn {
            let plain = self.plain[g];
            out.sigma_a[g] = a0 * plain;
            out.sigma_s[g] = s0 * plain;
            let (s1, s2) = match opts.scheme {
                WeightScheme::Constant => (plain, plain),
                WeightScheme::Rosseland => (
                    self.mean_or(g, t_r, Weight::Derivative, plain),
                    self.mean_or(g, t, Weight::Derivative, plain),
                ),
                WeightScheme::Planck => (
                    self.mean_or(g, t_r, Weight::Planck, plain),
                    self.mean_or(g, t, Weight::Planck, plain),
                ),
            };
            out.sigma1[g] = a0 * s1;
            out.sigma2[g] = a0 * s2;
            let inv = match &cube_means {
                Some(m) if self.grid.bounds(g).0 / t_w < X_NEGLIGIBLE && m[g].is_finite() => m[g],
                Some(_) => 1.0 / plain,
                None => match self.weighted_moments(g, t_w, Weight::Derivative) {
                    Some(m) => m.mean_inverse,
                    None => 1.0 / plain,
                },
            };
            out.sigma_t[g] = combined / (inv * (l_a + l_s));
        }
    }

    fn mean_or(&self, g: usize, temp: f64, kind: Weight, fallback: f64) -> f64 {
        self.weighted_moments(g, temp, kind).map_or(fallback, |m| m.mean)
    }
}

/// Group coefficients at a single location.
#[allow(clippy::too_many_arguments)]
pub fn group_coefficients(
    t: f64,
    t_r: f64,
    grid: &FrequencyGrid,
    opacity: &OpacityModel,
    opts: &WeightOptions,
    l_a: f64,
    l_s: f64,
    x: f64,
) -> Result<GroupCoefficients, PhysicsError> {
    if !(t > 0.0) {
        return Err(PhysicsError::NonPositiveTemperature(t));
    }
    if !(t_r > 0.0) {
        return Err(PhysicsError::NonPositiveTemperature(t_r));
    }
    let eval = CoefficientEvaluator::new(grid, opacity.law);
    let mut out = GroupCoefficients::zeros(grid.groups());
    eval.evaluate_into(opacity, opts, l_a, l_s, t, t_r, x, &mut out);
    Ok(out)
}

/// Per-group absorption and diffusion coefficients of the classical
/// frequency-dependent diffusion discretisations.
#[derive(Debug, Clone, PartialEq)]
pub struct FddlCoefficients {
    /// Plain group mean of σ_a.
    pub sigma_c: Vec<f64>,
    /// Rosseland-type mean of σ_a (σ_a/σ_s weighting with ∂B/∂T at T).
    pub sigma_r: Vec<f64>,
    /// B(T)-weighted mean of σ_a.
    pub sigma_e: Vec<f64>,
    /// B(T_r)-weighted mean of σ_a.
    pub sigma_p: Vec<f64>,
    /// 1 / (plain group mean of σ_s).
    pub inv_sigma_s_c: Vec<f64>,
    /// ∂B/∂T(T)-weighted mean of 1/σ_s.
    pub inv_sigma_s_r: Vec<f64>,
    /// ∂B/∂T(T_r)-weighted mean of 1/σ_s.
    pub inv_sigma_s_r_rad: Vec<f64>,
}

pub fn fddl_coefficients(
    t: f64,
    t_r: f64,
    grid: &FrequencyGrid,
    opacity: &OpacityModel,
    x: f64,
) -> Result<FddlCoefficients, PhysicsError> {
    if !(t > 0.0) {
        return Err(PhysicsError::NonPositiveTemperature(t));
    }
    if !(t_r > 0.0) {
        return Err(PhysicsError::NonPositiveTemperature(t_r));
    }
    let eval = CoefficientEvaluator::new(grid, opacity.law);
    let tau = opacity.law.thermal(t);
    let a0 = opacity.sigma_a0.value(x) * tau;
    let s0 = opacity.sigma_s0.value(x) * tau;
    let gn = grid.groups();
    let mut out = FddlCoefficients {
        sigma_c: vec![0.0; gn],
        sigma_r: vec![0.0; gn],
        sigma_e: vec![0.0; gn],
        sigma_p: vec![0.0; gn],
        inv_sigma_s_c: vec![0.0; gn],
        inv_sigma_s_r: vec![0.0; gn],
        inv_sigma_s_r_rad: vec![0.0; gn],
    };
    for g in 0..gn {
        let plain = eval.plain_mean(g);
        let inv_t = eval
            .weighted_moments(g, t, Weight::Derivative)
            .map_or(1.0 / plain, |m| m.mean_inverse);
        let inv_tr = eval
            .weighted_moments(g, t_r, Weight::Derivative)
            .map_or(1.0 / plain, |m| m.mean_inverse);
        out.sigma_c[g] = a0 * plain;
        out.sigma_r[g] = a0 / inv_t;
        out.sigma_e[g] = a0 * eval.mean_or(g, t, Weight::Planck, plain);
        out.sigma_p[g] = a0 * eval.mean_or(g, t_r, Weight::Planck, plain);
        out.inv_sigma_s_c[g] = 1.0 / (s0 * plain);
        out.inv_sigma_s_r[g] = inv_t / s0;
        out.inv_sigma_s_r_rad[g] = inv_tr / s0;
    }
    Ok(out)
}

/// Unnormalised Planck weight shapes, exposed for cross-checks.
#[doc(hidden)]
pub fn weight_shape(nu: f64, temp: f64, derivative: bool) -> f64 {
    let x = nu / temp;
    let v = if derivative {
        let em = (-x).exp();
        let d = -(-x).exp_m1();
        nu * nu * nu * x * em / (d * d) / temp
    } else {
        nu * nu * nu / x.exp_m1()
    };
    PLANCK_PREFACTOR * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_cube_mean_matches_quadrature() {
        for grid in [FrequencyGrid::default_experiment(), FrequencyGrid::logarithmic(1e-4, 100.0, 600).unwrap()] {
            let eval = CoefficientEvaluator::new(&grid, SpectralLaw::InverseCube);
            let mut closed = vec![0.0; grid.groups()];
            for t in [1e-3, 3.7e-3, 0.02, 0.1, 0.5, 1.0, 2.0, 16.0, 100.0, 1e3] {
                group_derivative_mean_cube(t, grid.edges(), &mut closed);
                for g in 0..grid.groups() {
                    let Some(m) = eval.weighted_moments(g, t, Weight::Derivative) else { continue };
                    let rel = (closed[g] - m.mean_inverse).abs() / m.mean_inverse;
                    assert!(rel < 1e-11, "T={t} g={g}: {} vs {} ({rel:e})", closed[g], m.mean_inverse);
                }
            }
        }
    }

    fn fine_mean(lo: f64, hi: f64, f: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64) -> f64 {
        // 10⁴-point composite midpoint rule in log ν.
        let n = 10_000;
        let (a, b) = (lo.ln(), hi.ln());
        let h = (b - a) / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..n {
            let nu = (a + (k as f64 + 0.5) * h).exp();
            num += f(nu) * w(nu) * nu;
            den += w(nu) * nu;
        }
        num / den
    }

    fn single_group(lo: f64, hi: f64) -> FrequencyGrid {
        FrequencyGrid::new(vec![lo, hi]).unwrap()
    }

    #[test]
    fn constant_opacity_collapse() {
        let grid = FrequencyGrid::default_experiment();
        let op = OpacityModel::uniform(2.5, 2.5, SpectralLaw::Constant);
        for scheme in [WeightScheme::Constant, WeightScheme::Rosseland, WeightScheme::Planck] {
            let opts = WeightOptions { scheme, ..Default::default() };
            let c = group_coefficients(1.0, 0.7, &grid, &op, &opts, 1.0, 1.0, 0.0).unwrap();
            for g in 0..grid.groups() {
                for v in [c.sigma1[g], c.sigma2[g], c.sigma_a[g], c.sigma_s[g], c.sigma_t[g]] {
                    assert!((v - 2.5).abs() < 1e-13, "{scheme:?} g={g} {v}");
                }
            }
        }
    }

    #[test]
    fn constant_scheme_closed_form() {
        let grid = FrequencyGrid::default_experiment();
        let op = OpacityModel::uniform(1.0, 1.0, SpectralLaw::InverseCube);
        let c = group_coefficients(1.0, 1.0, &grid, &op, &WeightOptions::default(), 1.0, 1.0, 0.0)
            .unwrap();
        for g in 0..grid.groups() {
            let (lo, hi) = grid.bounds(g);
            let expect = (lo.powi(-2) - hi.powi(-2)) / (2.0 * (hi - lo));
            assert!((c.sigma1[g] / expect - 1.0).abs() < 1e-13);
            assert_eq!(c.sigma1[g], c.sigma2[g]);
        }
    }

    #[test]
    fn rosseland_scheme_matches_fine_quadrature() {
        let grid = single_group(1.0, 2.0);
        let op = OpacityModel::uniform(1.0, 1.0, SpectralLaw::InverseCube);
        let opts = WeightOptions { scheme: WeightScheme::Rosseland, ..Default::default() };
        let c = group_coefficients(1.0, 1.0, &grid, &op, &opts, 1.0, 1.0, 0.0).unwrap();
        let expect = fine_mean(1.0, 2.0, |nu| nu.powi(-3), |nu| weight_shape(nu, 1.0, true));
        assert!((c.sigma1[0] / expect - 1.0).abs() < 1e-8);
        assert!((c.sigma2[0] / expect - 1.0).abs() < 1e-8);
    }

    #[test]
    fn planck_scheme_matches_fine_quadrature() {
        let grid = single_group(0.5, 3.0);
        let op = OpacityModel::uniform(1.0, 0.0, SpectralLaw::InverseCube);
        let opts = WeightOptions { scheme: WeightScheme::Planck, ..Default::default() };
        let c = group_coefficients(2.0, 0.5, &grid, &op, &opts, 1.0, 1.0, 0.0).unwrap();
        let e2 = fine_mean(0.5, 3.0, |nu| nu.powi(-3), |nu| weight_shape(nu, 2.0, false));
        let e1 = fine_mean(0.5, 3.0, |nu| nu.powi(-3), |nu| weight_shape(nu, 0.5, false));
        assert!((c.sigma2[0] / e2 - 1.0).abs() < 1e-8);
        assert!((c.sigma1[0] / e1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn total_opacity_matches_fine_quadrature() {
        let grid = single_group(1.0, 2.0);
        let op = OpacityModel::uniform(3.0, 5.0, SpectralLaw::InverseCubeSqrtT);
        let (la, ls) = (1e3, 1e-3);
        let opts = WeightOptions { flux_temperature: FluxTemperature::Material, ..Default::default() };
        let c = group_coefficients(1.5, 1.0, &grid, &op, &opts, la, ls, 0.0).unwrap();
        let t = 1.5f64;
        let inv = fine_mean(
            1.0,
            2.0,
            |nu| 1.0 / (la * 3.0 + ls * 5.0) * nu.powi(3) * t.sqrt(),
            |nu| weight_shape(nu, t, true),
        );
        let expect = 1.0 / ((la + ls) * inv);
        assert!((c.sigma_t[0] / expect - 1.0).abs() < 1e-8);
    }

    #[test]
    fn underflow_falls_back_to_plain_mean() {
        let grid = single_group(50.0, 100.0);
        let op = OpacityModel::uniform(1.0, 2.0, SpectralLaw::InverseCube);
        let opts = WeightOptions { scheme: WeightScheme::Rosseland, ..Default::default() };
        let c = group_coefficients(0.01, 0.01, &grid, &op, &opts, 1.0, 1.0, 0.0).unwrap();
        let plain = SpectralLaw::InverseCube.group_mean(50.0, 100.0);
        assert!((c.sigma_t[0] - 1.5 * plain).abs() < 1e-15);
        assert!((c.sigma1[0] - plain).abs() < 1e-15);
        assert!(c.sigma_t[0].is_finite());
    }

    #[test]
    fn fddl_variants_equal_for_constant_opacity() {
        let grid = FrequencyGrid::default_experiment();
        let op = OpacityModel::uniform(4.0, 2.0, SpectralLaw::Constant);
        let f = fddl_coefficients(1.0, 2.0, &grid, &op, 0.0).unwrap();
        for g in 0..grid.groups() {
            for v in [f.sigma_c[g], f.sigma_r[g], f.sigma_e[g], f.sigma_p[g]] {
                assert!((v - 4.0).abs() < 1e-12);
            }
            assert!((f.inv_sigma_s_r[g] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn fddl_scattering_matches_fine_quadrature() {
        let grid = single_group(1.0, 2.0);
        let op = OpacityModel::uniform(1.0, 1.0, SpectralLaw::InverseCube);
        let f = fddl_coefficients(1.0, 1.0, &grid, &op, 0.0).unwrap();
        let expect = fine_mean(1.0, 2.0, |nu| nu.powi(3), |nu| weight_shape(nu, 1.0, true));
        assert!((f.inv_sigma_s_r[0] / expect - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fddl_variants_bracketed() {
        let grid = FrequencyGrid::default_experiment();
        let op = OpacityModel::uniform(1.0, 1.0, SpectralLaw::InverseCube);
        for &(t, tr) in &[(1.0, 1.0), (16.0, 4.0), (0.05, 0.1)] {
            let f = fddl_coefficients(t, tr, &grid, &op, 0.0).unwrap();
            for g in 0..grid.groups() {
                let (lo, hi) = grid.bounds(g);
                let (smin, smax) = (hi.powi(-3), lo.powi(-3));
                for v in [f.sigma_c[g], f.sigma_r[g], f.sigma_e[g], f.sigma_p[g]] {
                    assert!(v >= smin * (1.0 - 1e-12) && v <= smax * (1.0 + 1e-12), "g={g}");
                }
            }
        }
    }

    #[test]
    fn weights_have_unit_group_mean() {
        // (1/Δν)∫ω dν = ∫w dν / W_g with W_g the closed-form group integral.
        let grid = FrequencyGrid::default_experiment();
        let eval = CoefficientEvaluator::new(&grid, SpectralLaw::InverseCube);
        for &t in &[0.01, 0.3, 1.0, 16.0] {
            let gp = super::super::group_planck(t, &grid, 1.0);
            for g in 0..grid.groups() {
                if let Some(m) = eval.weighted_moments(g, t, Weight::Planck) {
                    let ratio = PLANCK_PREFACTOR * m.total / gp.b[g];
                    assert!((ratio - 1.0).abs() < 1e-10, "B T={t} g={g} {ratio}");
                }
                if let Some(m) = eval.weighted_moments(g, t, Weight::Derivative) {
                    let ratio = PLANCK_PREFACTOR * m.total / t / gp.db[g];
                    assert!((ratio - 1.0).abs() < 1e-10, "dB T={t} g={g} {ratio}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn coefficients_bracketed_and_finite(
            t in 0.005f64..20.0,
            tr in 0.005f64..20.0,
            scheme in prop_oneof![
                Just(WeightScheme::Constant),
                Just(WeightScheme::Rosseland),
                Just(WeightScheme::Planck)
            ],
        ) {
            let grid = FrequencyGrid::default_experiment();
            let op = OpacityModel::uniform(1.0, 1.0, SpectralLaw::InverseCube);
            let opts = WeightOptions { scheme, ..Default::default() };
            let c = group_coefficients(t, tr, &grid, &op, &opts, 1.0, 1.0, 0.0).unwrap();
            for g in 0..grid.groups() {
                let (lo, hi) = grid.bounds(g);
                let (smin, smax) = (hi.powi(-3) * (1.0 - 1e-12), lo.powi(-3) * (1.0 + 1e-12));
                for v in [c.sigma1[g], c.sigma2[g], c.sigma_a[g], c.sigma_t[g]] {
                    prop_assert!(v.is_finite() && v >= smin && v <= smax);
                }
            }
        }
    }
}
