use super::PhysicsError;

/// A function of x that is constant between break points (right-continuous).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn constant(v: f64) -> Self {
        Self { breaks: Vec::new(), values: vec![v] }
    }

    /// `values[k]` applies on [breaks[k-1], breaks[k]).
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self, PhysicsError> {
        if values.len() != breaks.len() + 1 {
            return Err(PhysicsError::Opacity(format!(
                "{} breaks need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(PhysicsError::Opacity("break points must increase".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(PhysicsError::Opacity("coefficients must be finite and >= 0".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn value(&self, x: f64) -> f64 {
        let k = self.breaks.partition_point(|b| *b <= x);
        self.values[k]
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// ν- and T-dependence shared by σ_a and σ_s: σ = σ₀(x)·s(ν)·τ(T).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralLaw {
    /// σ₀/(ν³√T).
    InverseCubeSqrtT,
    /// σ₀/ν³.
    InverseCube,
    /// σ₀.
    Constant,
}

impl SpectralLaw {
    #[inline]
    pub fn spectral(self, eps: f64) -> f64 {
        match self {
            SpectralLaw::InverseCubeSqrtT | SpectralLaw::InverseCube => 1.0 / (eps * eps * eps),
            SpectralLaw::Constant => 1.0,
        }
    }

    #[inline]
    pub fn thermal(self, t: f64) -> f64 {
        match self {
            SpectralLaw::InverseCubeSqrtT => 1.0 / t.sqrt(),
            _ => 1.0,
        }
    }

    /// Group mean of s(ν) over [lo, hi], in closed form.
    pub fn group_mean(self, lo: f64, hi: f64) -> f64 {
        match self {
            SpectralLaw::InverseCubeSqrtT | SpectralLaw::InverseCube => {
                (1.0 / (lo * lo) - 1.0 / (hi * hi)) / (2.0 * (hi - lo))
            }
            SpectralLaw::Constant => 1.0,
        }
    }

    /// Group mean of 1/s(ν) over [lo, hi], in closed form.
    pub fn group_mean_inverse(self, lo: f64, hi: f64) -> f64 {
        match self {
            SpectralLaw::InverseCubeSqrtT | SpectralLaw::InverseCube => {
                (hi * hi * hi * hi - lo * lo * lo * lo) / (4.0 * (hi - lo))
            }
            SpectralLaw::Constant => 1.0,
        }
    }
}

/// Absorption and scattering opacities σ_{a,s}(x, ν, T) = σ₀_{a,s}(x)·s(ν)·τ(T).
#[derive(Debug, Clone, PartialEq)]
pub struct OpacityModel {
    pub sigma_a0: PiecewiseConstant,
    pub sigma_s0: PiecewiseConstant,
    pub law: SpectralLaw,
}

impl OpacityModel {
    pub fn uniform(sigma_a0: f64, sigma_s0: f64, law: SpectralLaw) -> Self {
        Self {
            sigma_a0: PiecewiseConstant::constant(sigma_a0),
            sigma_s0: PiecewiseConstant::constant(sigma_s0),
            law,
        }
    }

    pub fn sigma_a(&self, x: f64, eps: f64, t: f64) -> f64 {
        self.sigma_a0.value(x) * self.law.spectral(eps) * self.law.thermal(t)
    }

    pub fn sigma_s(&self, x: f64, eps: f64, t: f64) -> f64 {
        self.sigma_s0.value(x) * self.law.spectral(eps) * self.law.thermal(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_lookup() {
        let p = PiecewiseConstant::new(vec![2.0], vec![10.0, 1000.0]).unwrap();
        assert_eq!(p.value(1.99), 10.0);
        assert_eq!(p.value(2.0), 1000.0);
        assert_eq!(p.value(2.5), 1000.0);
        assert!(PiecewiseConstant::new(vec![1.0], vec![1.0]).is_err());
        assert!(PiecewiseConstant::new(vec![], vec![-1.0]).is_err());
    }

    #[test]
    fn law_values() {
        let m = OpacityModel::uniform(1000.0, 1.0, SpectralLaw::InverseCubeSqrtT);
        assert!((m.sigma_a(0.0, 2.0, 4.0) - 1000.0 / 16.0).abs() < 1e-12);
        assert!((m.sigma_s(0.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
        let c = OpacityModel::uniform(3.0, 4.0, SpectralLaw::Constant);
        assert_eq!(c.sigma_a(0.0, 17.0, 0.2), 3.0);
    }

    #[test]
    fn closed_form_group_means() {
        let law = SpectralLaw::InverseCube;
        let (lo, hi) = (1.0, 2.0);
        let n = 100_000;
        let h = (hi - lo) / n as f64;
        let mut s = 0.0;
        let mut si = 0.0;
        for k in 0..n {
            let nu = lo + (k as f64 + 0.5) * h;
            s += law.spectral(nu) * h;
            si += h / law.spectral(nu);
        }
        assert!((law.group_mean(lo, hi) - s).abs() < 1e-9);
        assert!((law.group_mean_inverse(lo, hi) - si).abs() < 1e-8);
    }
}
