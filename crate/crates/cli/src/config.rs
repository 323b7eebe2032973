//! Run configuration: a TOML file flattened to dotted keys.
//!
//! Every key is looked up in [`KEYS`]; anything else is rejected so a typo
//! never silently falls back to a default. See `docs/config.md` for the
//! grammar and the meaning of each key.

use frte_core::ap_solver::{
    Boundary, BoundarySpec, NonlinearOptions, SolverConfig, TemperatureProfile,
};
use frte_core::physics::{
    FluxTemperature, FrequencyGrid, OpacityModel, PhysicalConstants, PiecewiseConstant, SpectralLaw,
    WeightOptions, WeightScheme,
};
use frte_core::scaling::Scaling;
use std::collections::BTreeMap;
use std::path::Path;
use toml::Value;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown key \"{0}\"")]
    UnknownKey(String),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("syntax error: {0}")]
    Syntax(String),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("mesh.length", "slab thickness L (cm)"),
    ("mesh.cells", "number of cells N_x"),
    ("mesh.dx", "cell size (cm); alternative to mesh.cells"),
    ("frequency.groups", "number of logarithmic groups (default 30)"),
    ("frequency.min", "lowest group edge, keV (default 1e-4)"),
    ("frequency.max", "highest group edge, keV (default 100)"),
    ("angles.ordinates", "half-range Gauss-Legendre order M (default 16)"),
    ("time.dt", "time step (ns)"),
    ("time.t_end", "final time (ns)"),
    ("scaling.mode", "\"dimensional\" (default) or \"nondimensional\""),
    ("scaling.epsilon", "ε of the nondimensional model (default 1)"),
    ("scaling.l_a", "absorption scale 𝓛_a (default 1)"),
    ("scaling.l_s", "scattering scale 𝓛_s (default 1)"),
    ("constants.c", "speed of light (default 29.98 cm/ns)"),
    ("constants.a_r", "radiation constant (default 0.01372)"),
    ("constants.c_v", "specific heat (default 0.1)"),
    ("opacity.law", "\"inverse-cube-sqrt-t\" (default), \"inverse-cube\" or \"constant\""),
    ("opacity.breaks", "break points (cm) of piecewise σ₀; default none"),
    ("opacity.sigma_a0", "absorption coefficient σ_a0, scalar or one value per region"),
    ("opacity.sigma_s0", "scattering coefficient σ_s0, scalar or one value per region"),
    ("weights.scheme", "\"constant\" (default), \"rosseland\" or \"planck\""),
    ("weights.flux_temperature", "\"radiation\" (default) or \"material\""),
    ("boundary.left", "\"vacuum\", \"reflective\" or \"planckian\""),
    ("boundary.left_temperature", "inflow temperature (keV) for a planckian left end"),
    ("boundary.right", "\"vacuum\", \"reflective\" or \"planckian\""),
    ("boundary.right_temperature", "inflow temperature (keV) for a planckian right end"),
    ("initial.profile", "\"uniform\", \"parabola\" or \"cosine\""),
    ("initial.temperature", "uniform temperature (keV)"),
    ("initial.center", "parabola centre (cm)"),
    ("initial.curvature", "parabola curvature (keV/cm²)"),
    ("initial.peak", "parabola peak (keV)"),
    ("initial.floor", "parabola floor (keV)"),
    ("initial.mean", "cosine mean (keV)"),
    ("initial.amplitude", "cosine amplitude (keV)"),
    ("radiation.profile", "\"material\" (default) or a profile as for initial.profile"),
    ("radiation.temperature", "as initial.temperature"),
    ("radiation.center", "as initial.center"),
    ("radiation.curvature", "as initial.curvature"),
    ("radiation.peak", "as initial.peak"),
    ("radiation.floor", "as initial.floor"),
    ("radiation.mean", "as initial.mean"),
    ("radiation.amplitude", "as initial.amplitude"),
    ("solver.tol_t", "Newton tolerance on T (keV, default 1e-10)"),
    ("solver.tol_rho", "relative Newton tolerance on ρ (default 1e-10)"),
    ("solver.max_iterations", "Newton iteration limit (default 200)"),
    ("output.tag", "file name prefix (default: experiment tag or config file stem)"),
    ("output.stride", "write a profile every N steps (default: final only)"),
    ("convergence.levels", "number of error levels (default 2)"),
    ("convergence.dx", "coarsest cell size (cm, default 0.02)"),
    ("convergence.dt_over_dx", "Δt/Δx on every level (default 1)"),
    ("convergence.t_end", "comparison time (ns, default 1)"),
    ("table.temperatures", "temperatures (keV) of the mean-opacity table"),
    ("table.reference_groups", "group count of the fine reference grid (default 600)"),
    ("coeffs.temperatures", "temperatures (keV) of the coefficient comparison"),
];

/// Keys that may appear under `sweep.`, one list entry per case.
const SWEEPABLE: &[&str] = &[
    "opacity.sigma_a0",
    "opacity.sigma_s0",
    "scaling.l_a",
    "scaling.l_s",
    "scaling.epsilon",
    "time.dt",
    "boundary.left_temperature",
];

/// Flat dotted-key view of a configuration document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn known(key: &str) -> bool {
    if let Some(rest) = key.strip_prefix("sweep.") {
        return SWEEPABLE.contains(&rest);
    }
    KEYS.iter().any(|(k, _)| *k == key)
}

impl RawConfig {
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        let raw = Self { values };
        raw.check_keys()?;
        Ok(raw)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse_str(&text)
    }

    fn check_keys(&self) -> Result<(), ConfigError> {
        match self.values.keys().find(|k| !known(k)) {
            Some(k) => Err(ConfigError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    /// Applies `key=value`; the value is read as a TOML value, or as a bare
    /// string when it does not parse as one.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, text) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax(format!("override \"{assignment}\" is not key=value")))?;
        let key = key.trim();
        if !known(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        let text = text.trim();
        let value = format!("v = {text}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(text.to_string()));
        self.set(key, value);
        Ok(())
    }

    /// Sets a key. Assigning a swept key directly drops its sweep.
    pub fn set(&mut self, key: &str, value: Value) {
        if !key.starts_with("sweep.") {
            self.values.remove(&format!("sweep.{key}"));
        }
        self.values.insert(key.to_string(), value);
    }

    /// Layers `other` on top of `self`.
    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.values {
            self.set(k, v.clone());
        }
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(invalid(key, format!("expected a number, got {other}"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_req(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64_opt(key)?.ok_or_else(|| invalid(key, "required"))
    }

    fn positive(&self, key: &str, value: f64) -> Result<f64, ConfigError> {
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(invalid(key, format!("must be positive, got {value}")))
        }
    }

    pub fn positive_req(&self, key: &str) -> Result<f64, ConfigError> {
        self.positive(key, self.f64_req(key)?)
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.positive(key, self.f64_or(key, default)?)
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if *v >= 1 => Ok(Some(*v as usize)),
            Some(other) => Err(invalid(key, format!("expected a positive integer, got {other}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    pub fn str_opt(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(invalid(key, format!("expected a string, got {other}"))),
        }
    }

    /// A scalar or an array of numbers.
    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let num = |v: &Value| match v {
            Value::Float(x) => Ok(*x),
            Value::Integer(x) => Ok(*x as f64),
            other => Err(invalid(key, format!("expected numbers, got {other}"))),
        };
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(num).collect::<Result<Vec<_>, _>>().map(Some),
            Some(v) => Ok(Some(vec![num(v)?])),
        }
    }

    /// The sweep cases: each entry is a complete configuration with the
    /// swept keys replaced. No sweep gives the configuration itself.
    pub fn cases(&self) -> Result<Vec<RawConfig>, ConfigError> {
        let sweeps: Vec<(&str, &Vec<Value>)> = self
            .values
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("sweep.").map(|rest| (rest, v)))
            .map(|(k, v)| match v {
                Value::Array(items) if !items.is_empty() => Ok((k, items)),
                _ => Err(invalid(&format!("sweep.{k}"), "expected a non-empty array")),
            })
            .collect::<Result<_, _>>()?;
        let mut base = self.clone();
        base.values.retain(|k, _| !k.starts_with("sweep."));
        let Some(count) = sweeps.first().map(|(_, v)| v.len()) else {
            return Ok(vec![base]);
        };
        if let Some((k, _)) = sweeps.iter().find(|(_, v)| v.len() != count) {
            return Err(invalid(&format!("sweep.{k}"), format!("all sweeps must have {count} entries")));
        }
        Ok((0..count)
            .map(|i| {
                let mut case = base.clone();
                for (k, v) in &sweeps {
                    case.values.insert(k.to_string(), v[i].clone());
                }
                case
            })
            .collect())
    }
}

fn profile(raw: &RawConfig, section: &str, length: f64) -> Result<Option<TemperatureProfile>, ConfigError> {
    let key = |name: &str| format!("{section}.{name}");
    let kind = raw.str_opt(&key("profile"))?;
    let p = match kind {
        None if section == "radiation" => return Ok(None),
        Some("material") if section == "radiation" => return Ok(None),
        None => return Err(invalid(&key("profile"), "required")),
        Some("uniform") => TemperatureProfile::Uniform(raw.positive_req(&key("temperature"))?),
        Some("parabola") => TemperatureProfile::Parabola {
            center: raw.f64_req(&key("center"))?,
            curvature: raw.f64_req(&key("curvature"))?,
            peak: raw.positive_req(&key("peak"))?,
            floor: raw.positive_req(&key("floor"))?,
        },
        Some("cosine") => {
            let mean = raw.positive_req(&key("mean"))?;
            let amplitude = raw.f64_req(&key("amplitude"))?;
            if !(amplitude.abs() < mean) {
                return Err(invalid(&key("amplitude"), "must be smaller than the mean in magnitude"));
            }
            TemperatureProfile::Cosine { mean, amplitude, length }
        }
        Some(other) => return Err(invalid(&key("profile"), format!("unknown profile \"{other}\""))),
    };
    Ok(Some(p))
}

fn boundary(raw: &RawConfig, side: &str) -> Result<Boundary, ConfigError> {
    let key = format!("boundary.{side}");
    match raw.str_opt(&key)? {
        Some("vacuum") => Ok(Boundary::Vacuum),
        Some("reflective") => Ok(Boundary::Reflective),
        Some("planckian") => Ok(Boundary::Planckian(raw.positive_req(&format!("boundary.{side}_temperature"))?)),
        Some(other) => Err(invalid(&key, format!("unknown boundary \"{other}\""))),
        None => Err(invalid(&key, "required")),
    }
}

fn regions(raw: &RawConfig, key: &str, breaks: &[f64]) -> Result<PiecewiseConstant, ConfigError> {
    let values = raw.f64_list(key)?.ok_or_else(|| invalid(key, "required"))?;
    let values = if values.len() == 1 { vec![values[0]; breaks.len() + 1] } else { values };
    PiecewiseConstant::new(breaks.to_vec(), values).map_err(|e| invalid(key, e.to_string()))
}

/// The logarithmic group grid; `groups` replaces `frequency.groups`.
pub fn frequency_grid(raw: &RawConfig, groups: Option<usize>) -> Result<FrequencyGrid, ConfigError> {
    let groups = match groups {
        Some(g) => g,
        None => raw.usize_or("frequency.groups", 30)?,
    };
    let lo = raw.positive_or("frequency.min", 1e-4)?;
    let hi = raw.positive_or("frequency.max", 100.0)?;
    FrequencyGrid::logarithmic(lo, hi, groups).map_err(|e| invalid("frequency.max", e.to_string()))
}

/// Opacity regions on a slab of the given length.
pub fn opacity_model(raw: &RawConfig, length: f64) -> Result<OpacityModel, ConfigError> {
    let law = match raw.str_opt("opacity.law")?.unwrap_or("inverse-cube-sqrt-t") {
        "inverse-cube-sqrt-t" => SpectralLaw::InverseCubeSqrtT,
        "inverse-cube" => SpectralLaw::InverseCube,
        "constant" => SpectralLaw::Constant,
        other => return Err(invalid("opacity.law", format!("unknown law \"{other}\""))),
    };
    let breaks = raw.f64_list("opacity.breaks")?.unwrap_or_default();
    if breaks.iter().any(|b| !(*b > 0.0 && *b < length)) {
        return Err(invalid("opacity.breaks", "break points must lie inside the slab"));
    }
    let opacity = OpacityModel {
        sigma_a0: regions(raw, "opacity.sigma_a0", &breaks)?,
        sigma_s0: regions(raw, "opacity.sigma_s0", &breaks)?,
        law,
    };
    for (key, p) in [("opacity.sigma_a0", &opacity.sigma_a0), ("opacity.sigma_s0", &opacity.sigma_s0)] {
        if p.values().iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid(key, "must be non-negative"));
        }
    }
    Ok(opacity)
}

/// Positive numbers from a list key, or the default.
pub fn temperatures(raw: &RawConfig, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
    let list = raw.f64_list(key)?.unwrap_or_else(|| default.to_vec());
    if list.is_empty() || list.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid(key, "expected positive temperatures"));
    }
    Ok(list)
}

/// Builds and validates the solver configuration.
pub fn solver_config(raw: &RawConfig) -> Result<SolverConfig, ConfigError> {
    let length = raw.positive_req("mesh.length")?;
    let cells = match (raw.usize_opt("mesh.cells")?, raw.f64_opt("mesh.dx")?) {
        (Some(_), Some(_)) => return Err(invalid("mesh.dx", "give either mesh.cells or mesh.dx, not both")),
        (Some(n), None) => n,
        (None, Some(dx)) => {
            let dx = raw.positive("mesh.dx", dx)?;
            let n = (length / dx).round();
            if !((n * dx - length).abs() <= 1e-9 * length) {
                return Err(invalid("mesh.dx", format!("{dx} does not divide the length {length}")));
            }
            n as usize
        }
        (None, None) => return Err(invalid("mesh.cells", "required (or mesh.dx)")),
    };
    if cells < 3 {
        return Err(invalid("mesh.cells", format!("need at least 3 cells, got {cells}")));
    }
    let grid = frequency_grid(raw, None)?;
    let ordinates = raw.usize_or("angles.ordinates", 16)?;
    let dt = raw.positive_req("time.dt")?;
    let t_end = raw.positive_req("time.t_end")?;
    if t_end < dt {
        return Err(invalid("time.t_end", format!("must be at least time.dt = {dt}, got {t_end}")));
    }
    let constants = PhysicalConstants {
        c: raw.positive_or("constants.c", 29.98)?,
        a_r: raw.positive_or("constants.a_r", 0.01372)?,
        c_v: raw.positive_or("constants.c_v", 0.1)?,
    };
    let scaling = match raw.str_opt("scaling.mode")?.unwrap_or("dimensional") {
        "dimensional" => {
            for k in ["scaling.epsilon", "scaling.l_a", "scaling.l_s"] {
                if raw.contains(k) {
                    return Err(invalid(k, "only used with scaling.mode = \"nondimensional\""));
                }
            }
            Scaling::dimensional(&constants)
        }
        "nondimensional" => Scaling::nondimensional(
            raw.positive_or("scaling.epsilon", 1.0)?,
            raw.positive_or("scaling.l_a", 1.0)?,
            raw.positive_or("scaling.l_s", 1.0)?,
        )
        .map_err(|e| invalid("scaling.epsilon", e.to_string()))?,
        other => return Err(invalid("scaling.mode", format!("unknown mode \"{other}\""))),
    };
    let opacity = opacity_model(raw, length)?;
    let weights = WeightOptions {
        scheme: match raw.str_opt("weights.scheme")?.unwrap_or("constant") {
            "constant" => WeightScheme::Constant,
            "rosseland" => WeightScheme::Rosseland,
            "planck" => WeightScheme::Planck,
            other => return Err(invalid("weights.scheme", format!("unknown scheme \"{other}\""))),
        },
        flux_temperature: match raw.str_opt("weights.flux_temperature")?.unwrap_or("radiation") {
            "radiation" => FluxTemperature::Radiation,
            "material" => FluxTemperature::Material,
            other => return Err(invalid("weights.flux_temperature", format!("unknown option \"{other}\""))),
        },
    };
    let boundary = BoundarySpec { left: boundary(raw, "left")?, right: boundary(raw, "right")? };
    let initial_temperature = profile(raw, "initial", length)?.expect("material profile is required");
    let initial_radiation = profile(raw, "radiation", length)?;
    let nonlinear = NonlinearOptions {
        tol_t: raw.positive_or("solver.tol_t", 1e-10)?,
        tol_rho: raw.positive_or("solver.tol_rho", 1e-10)?,
        max_iterations: raw.usize_or("solver.max_iterations", 200)?,
    };
    let cfg = SolverConfig {
        length,
        cells,
        grid,
        ordinates,
        constants,
        scaling,
        opacity,
        weights,
        boundary,
        initial_temperature,
        initial_radiation,
        dt,
        t_end,
        nonlinear,
    };
    cfg.validate().map_err(|e| invalid("config", e.to_string()))?;
    Ok(cfg)
}

/// Reads a configuration file; a shorthand for [`RawConfig::read`] plus
/// [`solver_config`] on a file without sweeps.
pub fn parse_config(path: &Path) -> Result<SolverConfig, ConfigError> {
    let raw = RawConfig::read(path)?;
    let cases = raw.cases()?;
    if cases.len() != 1 {
        return Err(invalid("sweep", "file defines several cases; run it through an experiment"));
    }
    solver_config(&cases[0])
}
