//! Reference values computed without the solver's quadrature: composite
//! Simpson rules on dense grids, applied to the closed-form integrands.

use std::f64::consts::PI;

const PREFACTOR: f64 = 15.0 / (4.0 * PI * PI * PI * PI * PI);

/// Composite Simpson on [a, b] with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
    assert!(n >= 2 && n % 2 == 0, "simpson needs an even interval count");
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// ν³/(e^{ν/T} − 1) without the prefactor.
fn planck_shape(nu: f64, t: f64) -> f64 {
    let x = nu / t;
    if x > 700.0 { 0.0 } else { nu * nu * nu / x.exp_m1() }
}

/// ∂/∂T of [`planck_shape`].
fn planck_shape_dt(nu: f64, t: f64) -> f64 {
    let x = nu / t;
    if x > 700.0 {
        return 0.0;
    }
    // eˣ/(eˣ−1)² written with e^{−x} so it neither overflows nor cancels.
    let m = (-x).exp_m1();
    nu * nu * nu * x * (-x).exp() / (m * m * t)
}

/// 4π∫₀^∞ B dν and 4π∫₀^∞ ∂B/∂T dν for B = norm · 15/(4π⁵) ν³/(e^{ν/T}−1):
/// Simpson in x = ν/T on (0, 200].
pub fn planck_totals(t: f64, norm: f64) -> (f64, f64) {
    let n = 400_000;
    let b = simpson(0.0, 200.0, n, |x| if x == 0.0 { 0.0 } else { planck_shape(x * t, t) }) * t;
    let db = simpson(0.0, 200.0, n, |x| if x == 0.0 { 0.0 } else { planck_shape_dt(x * t, t) }) * t;
    (4.0 * PI * norm * PREFACTOR * b, 4.0 * PI * norm * PREFACTOR * db)
}

/// Rosseland-type mean free path (1/4T³) ∫ 4π/σ_t ∂B/∂T dν over [lo, hi]
/// for σ_t = k ν⁻³ and unit Planck norm, by Simpson in ln ν.
pub fn mean_free_path_inverse_cube(t: f64, k: f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let integral = simpson(a, b, 400_000, |u| {
        let nu = u.exp();
        4.0 * PI * nu * nu * nu / k * PREFACTOR * planck_shape_dt(nu, t) * nu
    });
    integral / (4.0 * t * t * t)
}
