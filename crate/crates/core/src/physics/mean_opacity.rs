//! Gray-limit mean free path 1/σ under piecewise-constant and Rosseland
//! group averaging, compared with a fine-grid reference.

use super::coefficients::{CoefficientEvaluator, Weight};
use super::planck::{group_planck_into, PLANCK_PREFACTOR};
use super::{FrequencyGrid, OpacityModel, PhysicsError};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct MeanOpacityRow {
    pub t: f64,
    pub reference: f64,
    pub rosseland: f64,
    pub rel_err_rosseland: f64,
    pub constant: f64,
    pub rel_err_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanOpacityReport {
    pub rows: Vec<MeanOpacityRow>,
}

/// (1/4T³) Σ_g 4π/(plain mean of σ_a+σ_s) · dB_g/dT.
fn piecewise_constant(t: f64, eval: &CoefficientEvaluator, opacity: &OpacityModel) -> f64 {
    let grid = eval.grid();
    let gn = grid.groups();
    let (mut b, mut db) = (vec![0.0; gn], vec![0.0; gn]);
    group_planck_into(t, grid.edges(), 1.0, &mut b, &mut db);
    let k = (opacity.sigma_a0.value(0.0) + opacity.sigma_s0.value(0.0)) * opacity.law.thermal(t);
    let sum: f64 = (0..gn).map(|g| 4.0 * PI * db[g] / (k * eval.plain_mean(g))).sum();
    sum / (4.0 * t * t * t)
}

/// (1/4T³) Σ_g ∫_g 4π/(σ_a+σ_s) ∂B/∂T dν.
fn rosseland(t: f64, eval: &CoefficientEvaluator, opacity: &OpacityModel) -> f64 {
    let grid = eval.grid();
    let k = (opacity.sigma_a0.value(0.0) + opacity.sigma_s0.value(0.0)) * opacity.law.thermal(t);
    let sum: f64 = (0..grid.groups())
        .filter_map(|g| eval.weighted_moments(g, t, Weight::Derivative))
        .map(|m| 4.0 * PI * PLANCK_PREFACTOR * m.total / t * m.mean_inverse / k)
        .sum();
    sum / (4.0 * t * t * t)
}

pub fn mean_opacity_table(
    temperatures: &[f64],
    coarse: &FrequencyGrid,
    fine: &FrequencyGrid,
    opacity: &OpacityModel,
) -> Result<MeanOpacityReport, PhysicsError> {
    let ce = CoefficientEvaluator::new(coarse, opacity.law);
    let fe = CoefficientEvaluator::new(fine, opacity.law);
    let mut rows = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        if !(t > 0.0) {
            return Err(PhysicsError::NonPositiveTemperature(t));
        }
        let reference = rosseland(t, &fe, opacity);
        let r = rosseland(t, &ce, opacity);
        let c = piecewise_constant(t, &ce, opacity);
        rows.push(MeanOpacityRow {
            t,
            reference,
            rosseland: r,
            rel_err_rosseland: (r - reference).abs() / reference,
            constant: c,
            rel_err_constant: (c - reference).abs() / reference,
        });
    }
    Ok(MeanOpacityReport { rows })
}
