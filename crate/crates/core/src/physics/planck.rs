//! Planck spectrum B(ν, T) = norm · 15/(4π⁵) · ν³/(e^{ν/T} − 1), ν and T in keV.
//!
//! Group integrals use the Planck integral P(x) = ∫₀ˣ t³/(eᵗ−1) dt and its
//! temperature counterpart D(x) = ∫₀ˣ t⁴eᵗ/(eᵗ−1)² dt, so that
//! ∫_g B dν = norm·15/(4π⁵)·T⁴·[P]_g and ∫_g ∂B/∂T dν = norm·15/(4π⁵)·T³·[D]_g.

use super::{FrequencyGrid, PhysicsError};
use crate::gauss::GaussRule;
use std::f64::consts::PI;

/// 15/(4π⁵).
pub const PLANCK_PREFACTOR: f64 = 15.0 / (4.0 * PI * PI * PI * PI * PI);

const X_UNDERFLOW: f64 = 700.0;
const SERIES_LIMIT: f64 = 2.0;
const P_TOTAL: f64 = PI * PI * PI * PI / 15.0;
const D_TOTAL: f64 = 4.0 * P_TOTAL;

/// b_n = B_n/n! for even n (B_1 = −1/2 handled separately).
const BERNOULLI_OVER_FACTORIAL: [f64; 21] = [
    1.0,
    0.083333333333333333333,
    -0.0013888888888888888889,
    0.000033068783068783068783,
    -8.2671957671957671958e-7,
    2.0876756987868098979e-8,
    -5.2841901386874931848e-10,
    1.3382536530684678833e-11,
    -3.3896802963225828668e-13,
    8.5860620562778445641e-15,
    -2.174868698558061873e-16,
    5.5090028283602295152e-18,
    -1.3954464685812523341e-19,
    3.5347070396294674717e-21,
    -8.9535174270375468504e-23,
    2.2679524523376830603e-24,
    -5.7447906688722024453e-26,
    1.4551724756148649019e-27,
    -3.6859949406653101782e-29,
    9.336734257095044672e-31,
    -2.3650224157006299346e-32,
];

pub fn planck_intensity(eps: f64, t: f64, norm: f64) -> Result<f64, PhysicsError> {
    if !(eps > 0.0) {
        return Err(PhysicsError::NonPositiveEnergy(eps));
    }
    if t < 0.0 || t.is_nan() {
        return Err(PhysicsError::NonPositiveTemperature(t));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(norm * intensity_unchecked(eps, t))
}

pub fn planck_derivative(eps: f64, t: f64, norm: f64) -> Result<f64, PhysicsError> {
    if !(eps > 0.0) {
        return Err(PhysicsError::NonPositiveEnergy(eps));
    }
    if !(t > 0.0) {
        return Err(PhysicsError::NonPositiveTemperature(t));
    }
    Ok(norm * derivative_unchecked(eps, t))
}

/// B(ν, T) with norm = 1, for ν, T > 0.
#[inline]
pub(crate) fn intensity_unchecked(eps: f64, t: f64) -> f64 {
    let x = eps / t;
    if x > X_UNDERFLOW {
        return 0.0;
    }
    PLANCK_PREFACTOR * eps * eps * eps / x.exp_m1()
}

/// ∂B/∂T with norm = 1, for ν, T > 0.
#[inline]
pub(crate) fn derivative_unchecked(eps: f64, t: f64) -> f64 {
    let x = eps / t;
    if x > X_UNDERFLOW {
        return 0.0;
    }
    let em = (-x).exp();
    let d = -(-x).exp_m1();
    PLANCK_PREFACTOR * eps * eps * eps * (x / t) * em / (d * d)
}

/// P(x) = ∫₀ˣ t³/(eᵗ−1) dt.
pub fn planck_integral(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < SERIES_LIMIT {
        p_series(x)
    } else {
        P_TOTAL - p_tail(x)
    }
}

/// D(x) = ∫₀ˣ t⁴eᵗ/(eᵗ−1)² dt.
pub fn planck_integral_derivative(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < SERIES_LIMIT {
        d_series(x)
    } else {
        D_TOTAL - d_tail(x)
    }
}

fn p_series(x: f64) -> f64 {
    // Σ b_n x^{n+3}/(n+3), b_1 = −1/2.
    let x2 = x * x;
    let mut s = x * x2 / 3.0 - 0.5 * x2 * x2 / 4.0;
    let mut pow = x * x2;
    for (k, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate().skip(1) {
        pow *= x2;
        let n = 2 * k;
        s += b * pow / (n as f64 + 3.0);
    }
    s
}

fn d_series(x: f64) -> f64 {
    // Σ b_n x^{n+3}(1−n)/(n+3); the n = 1 term vanishes.
    let x2 = x * x;
    let mut s = x * x2 / 3.0;
    let mut pow = x * x2;
    for (k, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate().skip(1) {
        pow *= x2;
        let n = (2 * k) as f64;
        s += b * pow * (1.0 - n) / (n + 3.0);
    }
    s
}

/// P(∞) − P(x) = Σ_k e^{−kx}(x³/k + 3x²/k² + 6x/k³ + 6/k⁴).
fn p_tail(x: f64) -> f64 {
    if x > X_UNDERFLOW {
        return 0.0;
    }
    let e = (-x).exp();
    let mut ek = 1.0;
    let mut s = 0.0;
    for k in 1..=64 {
        ek *= e;
        let kf = k as f64;
        let term = ek * (x * x * x / kf + 3.0 * x * x / (kf * kf) + 6.0 * x / (kf * kf * kf)
            + 6.0 / (kf * kf * kf * kf));
        s += term;
        if term < 1e-18 * s {
            break;
        }
    }
    s
}

/// D(∞) − D(x) = 4(P(∞) − P(x)) + x⁴/(eˣ − 1).
fn d_tail(x: f64) -> f64 {
    if x > X_UNDERFLOW {
        return 0.0;
    }
    4.0 * p_tail(x) + x * x * x * x / x.exp_m1()
}

/// Both the value below x and above x, each computed without cancellation.
#[derive(Clone, Copy)]
struct Split {
    below: f64,
    above: f64,
    large: bool,
}

/// Splits of P and D at x; the tails share one exponential series.
fn split_pd(x: f64) -> (Split, Split) {
    if x < SERIES_LIMIT {
        let x = x.max(0.0);
        let (p, d) = (p_series(x), d_series(x));
        (Split { below: p, above: P_TOTAL - p, large: false }, Split { below: d, above: D_TOTAL - d, large: false })
    } else if x > X_UNDERFLOW {
        (Split { below: P_TOTAL, above: 0.0, large: true }, Split { below: D_TOTAL, above: 0.0, large: true })
    } else {
        let p = p_tail(x);
        let d = 4.0 * p + x * x * x * x / x.exp_m1();
        (Split { below: P_TOTAL - p, above: p, large: true }, Split { below: D_TOTAL - d, above: d, large: true })
    }
}

fn difference(lo: Split, hi: Split) -> f64 {
    if lo.large {
        (lo.above - hi.above).max(0.0)
    } else {
        (hi.below - lo.below).max(0.0)
    }
}

/// ∫₀ˣ tᵐ/(eᵗ−1) dt for x < SERIES_LIMIT, m ≥ 1.
fn bose_series(m: i32, x: f64) -> f64 {
    let mf = m as f64;
    let x2 = x * x;
    let mut pow = x.powi(m);
    let mut s = pow / mf - 0.5 * pow * x / (mf + 1.0);
    for (k, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate().skip(1) {
        pow *= x2;
        s += b * pow / (mf + (2 * k) as f64);
    }
    s
}

/// ∫ₓ^∞ tᵐ/(eᵗ−1) dt = Σ_k e^{−kx} Σ_{i≤m} m!/i! · xⁱ/k^{m−i+1}.
fn bose_tail(m: i32, x: f64) -> f64 {
    if x > X_UNDERFLOW {
        return 0.0;
    }
    let e = (-x).exp();
    let mut ek = 1.0;
    let mut s = 0.0;
    for k in 1..=64 {
        ek *= e;
        let inv_k = 1.0 / k as f64;
        // Horner from i = m down, c_m = 1/k and c_i = c_{i+1}(i+1)/k.
        let mut c = inv_k;
        let mut poly = c;
        for i in (0..m).rev() {
            c *= (i + 1) as f64 * inv_k;
            poly = poly * x + c;
        }
        let term = ek * poly;
        s += term;
        if term < 1e-18 * s {
            break;
        }
    }
    s
}

/// ∫ tⁿeᵗ/(eᵗ−1)² dt below and above x, by parts from the Bose integrals:
/// below = n·∫₀ˣ tⁿ⁻¹/(eᵗ−1) − xⁿ/(eˣ−1), above = n·∫ₓ^∞ tⁿ⁻¹/(eᵗ−1) + xⁿ/(eˣ−1).
fn split_dn(n: i32, total: f64, x: f64) -> Split {
    let nf = n as f64;
    if x < SERIES_LIMIT {
        let x = x.max(0.0);
        let edge = if x > 0.0 { x.powi(n) / x.exp_m1() } else { 0.0 };
        let b = nf * bose_series(n - 1, x) - edge;
        Split { below: b, above: total - b, large: false }
    } else {
        let edge = if x > X_UNDERFLOW { 0.0 } else { x.powi(n) / x.exp_m1() };
        let a = nf * bose_tail(n - 1, x) + edge;
        Split { below: total - a, above: a, large: true }
    }
}

/// 7!·ζ(7) = ∫₀^∞ t⁷eᵗ/(eᵗ−1)² dt.
const D7_TOTAL: f64 = 5040.0 * 1.008_349_277_381_922_8;

/// ∂B/∂T-weighted group means of ν³, T³·[D₇]_g/[D₄]_g, written to `out`
/// (NaN where the weight carries no mass in double precision).
pub(crate) fn group_derivative_mean_cube(t: f64, edges: &[f64], out: &mut [f64]) {
    let t3 = t * t * t;
    let x0 = edges[0] / t;
    let mut prev4 = split_dn(4, D_TOTAL, x0);
    let mut prev7 = split_dn(7, D7_TOTAL, x0);
    for (k, nu_hi) in edges.iter().skip(1).enumerate() {
        let x = nu_hi / t;
        let d4 = split_dn(4, D_TOTAL, x);
        let d7 = split_dn(7, D7_TOTAL, x);
        let w = difference(prev4, d4);
        out[k] = if w > 0.0 { t3 * difference(prev7, d7) / w } else { f64::NAN };
        prev4 = d4;
        prev7 = d7;
    }
}

/// Group-integrated Planck function and its temperature derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPlanck {
    pub b: Vec<f64>,
    pub db: Vec<f64>,
}

/// B_g = ∫_g B dν and dB_g/dT for every group.
pub fn group_planck(t: f64, grid: &FrequencyGrid, norm: f64) -> GroupPlanck {
    let g = grid.groups();
    let mut out = GroupPlanck { b: vec![0.0; g], db: vec![0.0; g] };
    group_planck_into(t, grid.edges(), norm, &mut out.b, &mut out.db);
    out
}

/// Allocation-free form of [`group_planck`]; `b` and `db` have one entry per group.
pub(crate) fn group_planck_into(t: f64, edges: &[f64], norm: f64, b: &mut [f64], db: &mut [f64]) {
    if !(t > 0.0) {
        b.iter_mut().for_each(|v| *v = 0.0);
        db.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let cb = norm * PLANCK_PREFACTOR * t * t * t * t;
    let cd = norm * PLANCK_PREFACTOR * t * t * t;
    let x0 = edges[0] / t;
    let (mut prev_p, mut prev_d) = split_pd(x0);
    for (k, nu_hi) in edges.iter().skip(1).enumerate() {
        let x = nu_hi / t;
        if prev_p.large && prev_p.above == 0.0 {
            b[k] = 0.0;
            db[k] = 0.0;
            continue;
        }
        let (p, d) = split_pd(x);
        b[k] = cb * difference(prev_p, p);
        db[k] = cd * difference(prev_d, d);
        prev_p = p;
        prev_d = d;
    }
}

/// ∫₀^∞ f(ν) dν for spectra that decay like e^{−ν/T}, by substituting x = ν/T
/// on (0, 700] with composite Gauss panels.
pub fn integrate_spectrum<F: FnMut(f64) -> f64>(t: f64, mut f: F) -> f64 {
    let rule = GaussRule::new(20);
    let near = rule.integrate_composite(0.0, 60.0, 60, |x| f(x * t));
    let far = rule.integrate_composite(60.0, X_UNDERFLOW, 32, |x| f(x * t));
    (near + far) * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_temperature_is_zero() {
        assert_eq!(planck_intensity(1.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_value() {
        let e = std::f64::consts::E;
        let expect = 15.0 / (4.0 * PI.powi(5) * (e - 1.0));
        let got = planck_intensity(1.0, 1.0, 1.0).unwrap();
        assert!((got - expect).abs() < 1e-15 * expect);
        assert!((got - 7.1316e-3).abs() < 1e-7);
    }

    #[test]
    fn domain_errors() {
        assert!(planck_intensity(0.0, 1.0, 1.0).is_err());
        assert!(planck_intensity(1.0, -1.0, 1.0).is_err());
        assert!(planck_derivative(1.0, 0.0, 1.0).is_err());
        assert!(planck_derivative(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn far_wien_tail_is_finite_zero() {
        assert_eq!(planck_intensity(1e4, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(planck_derivative(1e4, 1.0, 1.0).unwrap(), 0.0);
        let v = planck_derivative(500.0, 1.0, 1.0).unwrap();
        assert!(v.is_finite() && v >= 0.0);
    }

    #[test]
    fn normalization_identities() {
        let norm = 0.01372 * 29.98;
        for &t in &[0.01, 0.1, 1.0, 2.0, 10.0, 20.0] {
            let total = 4.0 * PI * integrate_spectrum(t, |nu| planck_intensity(nu, t, norm).unwrap());
            let expect = norm * t.powi(4);
            assert!((total / expect - 1.0).abs() < 1e-8, "T={t}");
            let dtotal = 4.0 * PI * integrate_spectrum(t, |nu| planck_derivative(nu, t, norm).unwrap());
            let dexpect = 4.0 * norm * t.powi(3);
            assert!((dtotal / dexpect - 1.0).abs() < 1e-8, "T={t}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &(eps, t) in &[(1.0, 1.0), (0.01, 0.3), (20.0, 2.0), (3.0, 0.5)] {
            let h = 1e-5 * t;
            let fd = (planck_intensity(eps, t + h, 1.0).unwrap()
                - planck_intensity(eps, t - h, 1.0).unwrap())
                / (2.0 * h);
            let an = planck_derivative(eps, t, 1.0).unwrap();
            assert!((fd / an - 1.0).abs() < 1e-6, "eps={eps} T={t}");
        }
    }

    #[test]
    fn integral_series_and_tail_agree_at_switch() {
        let x = SERIES_LIMIT;
        let a = p_series(x);
        let b = P_TOTAL - p_tail(x);
        assert!((a - b).abs() < 1e-14);
        let c = d_series(x);
        let d = D_TOTAL - d_tail(x);
        assert!((c - d).abs() < 1e-13);
    }

    #[test]
    fn higher_moment_integrals() {
        // By parts, the n = 4 case reproduces D on both branches.
        for x in [0.3, 1.99, 2.01, 9.0] {
            let a = split_dn(4, D_TOTAL, x);
            let b = split_pd(x).1;
            assert!((a.below - b.below).abs() < 1e-13 * D_TOTAL, "{x}");
        }
        let lo = split_dn(7, D7_TOTAL, SERIES_LIMIT * (1.0 - 1e-12));
        let hi = split_dn(7, D7_TOTAL, SERIES_LIMIT);
        assert!((lo.below - hi.below).abs() < 1e-12 * D7_TOTAL);
        let rule = GaussRule::new(30);
        for x in [0.01, 1.0, 4.0, 25.0] {
            let f = |t: f64| if t > 0.0 { t.powi(7) * (-t).exp() / ((-t).exp_m1() * (-t).exp_m1()) } else { 0.0 };
            let q = rule.integrate_composite(0.0, x, 40, f);
            let s = split_dn(7, D7_TOTAL, x).below;
            assert!((s - q).abs() <= 1e-12 * q.max(1e-300) + 1e-300, "x={x}: {s} vs {q}");
        }
        let total = rule.integrate_composite(0.0, 200.0, 400, |t| {
            if t > 0.0 { t.powi(7) * (-t).exp() / ((-t).exp_m1() * (-t).exp_m1()) } else { 0.0 }
        });
        assert!((total - D7_TOTAL).abs() < 1e-12 * D7_TOTAL);
    }

    #[test]
    fn integrals_match_quadrature() {
        let rule = GaussRule::new(30);
        for &x in &[0.001, 0.5, 1.9, 2.1, 5.0, 30.0] {
            let p = rule.integrate_composite(0.0, x, 40, |t| if t > 0.0 { t * t * t / t.exp_m1() } else { 0.0 });
            let d = rule.integrate_composite(0.0, x, 40, |t| {
                if t > 0.0 {
                    let em = (-t).exp();
                    t.powi(4) * em / (1.0 - em).powi(2)
                } else {
                    0.0
                }
            });
            assert!((planck_integral(x) - p).abs() < 1e-13 * p.max(1e-300) + 1e-300, "P x={x}");
            assert!((planck_integral_derivative(x) - d).abs() < 1e-12 * d, "D x={x}");
        }
    }

    #[test]
    fn group_values_match_gauss() {
        let grid = FrequencyGrid::logarithmic(1e-4, 100.0, 30).unwrap();
        let rule = GaussRule::new(20);
        for &t in &[0.01, 1.0, 16.0] {
            let gp = group_planck(t, &grid, 1.0);
            for g in 0..grid.groups() {
                let (lo, hi) = grid.bounds(g);
                let (ul, uh) = (lo.ln(), hi.ln());
                let q: f64 = rule.integrate_composite(ul, uh, 16, |u| {
                    let nu = u.exp();
                    nu * intensity_unchecked(nu, t)
                });
                let dq: f64 = rule.integrate_composite(ul, uh, 16, |u| {
                    let nu = u.exp();
                    nu * derivative_unchecked(nu, t)
                });
                assert!(gp.b[g] >= 0.0 && gp.db[g] >= 0.0);
                assert!((gp.b[g] - q).abs() <= 1e-10 * q + 1e-300, "T={t} g={g} {} {}", gp.b[g], q);
                assert!((gp.db[g] - dq).abs() <= 1e-10 * dq + 1e-300, "T={t} g={g}");
            }
        }
    }

    #[test]
    fn near_total_coverage() {
        let grid = FrequencyGrid::new(vec![1e-6, 1e4]).unwrap();
        let norm = 0.01372 * 29.98;
        let gp = group_planck(1.0, &grid, norm);
        assert!((4.0 * PI * gp.b[0] / norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn telescoping_between_grids() {
        let coarse = FrequencyGrid::logarithmic(1e-4, 100.0, 30).unwrap();
        let fine = FrequencyGrid::logarithmic(1e-4, 100.0, 600).unwrap();
        for &t in &[0.01, 1.0, 16.0] {
            let a = group_planck(t, &coarse, 1.0);
            let b = group_planck(t, &fine, 1.0);
            let sa: f64 = a.b.iter().sum();
            let sb: f64 = b.b.iter().sum();
            assert!((sa / sb - 1.0).abs() < 1e-10);
            let da: f64 = a.db.iter().sum();
            let dbs: f64 = b.db.iter().sum();
            assert!((da / dbs - 1.0).abs() < 1e-10);
            assert!(4.0 * PI * sa <= t.powi(4) * (1.0 + 1e-14));
        }
    }
}
