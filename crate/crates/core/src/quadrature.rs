//! Half-range angular quadrature and discrete moments for the even-odd unknowns.

use crate::gauss::gauss_legendre;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature order must be at least 1")]
    ZeroOrder,
    #[error("moment arrays have length {got}, quadrature has {expected} ordinates")]
    Length { expected: usize, got: usize },
}

/// Gauss–Legendre ordinates Ω_m ∈ (0, 1) with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub fn build_half_range_quadrature(m: usize) -> Result<AngularQuadrature, QuadratureError> {
    if m == 0 {
        return Err(QuadratureError::ZeroOrder);
    }
    let (x, w) = gauss_legendre(m);
    let nodes: Vec<f64> = x.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let total: f64 = w.iter().sum();
    let weights = w.iter().map(|w| w / total).collect();
    Ok(AngularQuadrature { nodes, weights })
}

impl AngularQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ w_m Ω_m^k.
    pub fn moment(&self, k: i32) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(o, w)| w * o.powi(k)).sum()
    }
}

/// (ρ, R, K) = (Σ w E, 3 Σ w Ω O, Σ w Ω² E).
pub fn angular_moments(
    e: &[f64],
    o: &[f64],
    quad: &AngularQuadrature,
) -> Result<(f64, f64, f64), QuadratureError> {
    let m = quad.len();
    for len in [e.len(), o.len()] {
        if len != m {
            return Err(QuadratureError::Length { expected: m, got: len });
        }
    }
    let (mut rho, mut r, mut k) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let (om, w) = (quad.nodes[i], quad.weights[i]);
        rho += w * e[i];
        r += w * om * o[i];
        k += w * om * om * e[i];
    }
    Ok((rho, 3.0 * r, k))
}
