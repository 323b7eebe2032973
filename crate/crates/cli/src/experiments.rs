//! Experiment drivers: a preset (or file) plus overrides becomes one or
//! more solver runs, each leaving CSV files in the output directory.

use crate::config::{self, ConfigError, RawConfig};
use crate::output::{self, profile_path, profile_table, OutputError, Table};
use crate::presets;
use frte_core::ap_solver::{ApSolver, Boundary, RunOutcome, Snapshot, SolverConfig, SolverError};
use frte_core::limit_solvers::{
    fddl_run, gray_diffusion_run, CoefficientLag, FddlConfig, GrayDiffusionConfig, LimitBoundary, LimitError,
};
use frte_core::physics::{fddl_coefficients, group_planck, mean_opacity_table, radiation_temperature};
use std::path::{Path, PathBuf};
use toml::Value;

/// Time step of the fine-in-time reference solutions.
pub const REFERENCE_DT: f64 = 1e-5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("I/O error: {0}")]
    Io(#[from] OutputError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn from_solver(tag: &str, e: SolverError) -> CliError {
    match e {
        SolverError::Config(m) => CliError::Config(ConfigError::Invalid { key: tag.to_string(), message: m }),
        other => CliError::Solver(format!("{tag}: {other}")),
    }
}

fn from_limit(tag: &str, e: LimitError) -> CliError {
    match e {
        LimitError::Config(m) => CliError::Config(ConfigError::Invalid { key: tag.to_string(), message: m }),
        other => CliError::Solver(format!("{tag} oracle: {other}")),
    }
}

/// Command-line options shared by every experiment.
#[derive(Debug, Clone)]
pub struct Options {
    pub out_dir: PathBuf,
    pub stride: Option<usize>,
    /// Rerun with the fine reference time step.
    pub reference: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("."), stride: None, reference: false }
    }
}

/// One fully resolved solver run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: SolverConfig,
    pub out_dir: PathBuf,
    pub stride: usize,
    pub tag: String,
}

impl RunManifest {
    pub fn new(config: SolverConfig, out_dir: &Path, stride: Option<usize>, tag: &str) -> Result<Self, CliError> {
        let steps = (config.t_end / config.dt).ceil().max(1.0) as usize;
        let stride = match stride {
            Some(0) => {
                return Err(ConfigError::Invalid { key: "output.stride".into(), message: "must be at least 1".into() }.into())
            }
            Some(s) => s,
            None => steps,
        };
        ensure_dir(out_dir)?;
        Ok(Self { config, out_dir: out_dir.to_path_buf(), stride, tag: tag.to_string() })
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| OutputError { path: dir.to_path_buf(), message: e.to_string() })?;
    let meta = std::fs::metadata(dir).map_err(|e| OutputError { path: dir.to_path_buf(), message: e.to_string() })?;
    if meta.permissions().readonly() {
        return Err(OutputError { path: dir.to_path_buf(), message: "directory is not writable".into() }.into());
    }
    Ok(())
}

/// Files written and named scalar results of one experiment.
#[derive(Debug, Default, Clone)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub metrics: Vec<(String, f64)>,
}

impl Report {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    fn push(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }
}

/// Preset for `tag` (or the file alone for `run`), then the file, then
/// the `key=value` overrides.
pub fn load(tag: &str, config_path: Option<&Path>, overrides: &[String]) -> Result<RawConfig, CliError> {
    let mut raw = match (tag, config_path) {
        ("run", None) => {
            return Err(ConfigError::Syntax("the run command needs a config file".into()).into())
        }
        ("run", Some(_)) => RawConfig::default(),
        _ => {
            let text = presets::preset(tag)
                .ok_or_else(|| ConfigError::Syntax(format!("unknown experiment \"{tag}\"")))?;
            RawConfig::parse_str(text)?
        }
    };
    if let Some(path) = config_path {
        raw.merge(&RawConfig::read(path)?);
        if tag == "run" && !raw.contains("output.tag") {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
            raw.set("output.tag", Value::String(stem.to_string()));
        }
    }
    for o in overrides {
        raw.apply_override(o)?;
    }
    Ok(raw)
}

pub fn run_experiment(tag: &str, raw: &RawConfig, opts: &Options) -> Result<Report, CliError> {
    let mut raw = raw.clone();
    if opts.reference {
        raw.set("time.dt", Value::Float(REFERENCE_DT));
    }
    let name = raw.str_opt("output.tag")?.unwrap_or(tag).to_string();
    let stride = match opts.stride {
        Some(s) => Some(s),
        None => raw.usize_opt("output.stride")?,
    };
    ensure_dir(&opts.out_dir)?;
    match tag {
        "run" | "ex1" | "ex2" | "ex3" => profiles(&name, &raw, &opts.out_dir, stride),
        "table1" => table1(&name, &raw, &opts.out_dir),
        "coeffs" => coeffs(&name, &raw, &opts.out_dir),
        "converge" => converge(&name, &raw, &opts.out_dir),
        "ap-gray" => ap_limit(&name, &raw, &opts.out_dir, Limit::Gray),
        "ap-fddl" => ap_limit(&name, &raw, &opts.out_dir, Limit::Fddl),
        other => Err(ConfigError::Syntax(format!("unknown experiment \"{other}\"")).into()),
    }
}

fn case_tag(tag: &str, k: usize, count: usize) -> String {
    if count > 1 { format!("{tag}_case{}", k + 1) } else { tag.to_string() }
}

fn metric_prefix(k: usize, count: usize) -> String {
    if count > 1 { format!("case{}.", k + 1) } else { String::new() }
}

/// Runs one manifest and writes a profile per snapshot. Profiles written
/// before a failure are kept.
pub fn run_case(manifest: &RunManifest, report: &mut Report) -> Result<(ApSolver, RunOutcome), CliError> {
    let solver = ApSolver::new(manifest.config.clone()).map_err(|e| from_solver(&manifest.tag, e))?;
    let outcome = solver.run(manifest.stride).map_err(|e| from_solver(&manifest.tag, e))?;
    for snap in &outcome.snapshots {
        let path = profile_path(&manifest.out_dir, &manifest.tag, snap.time);
        output::write_csv(&profile_table(solver.centers(), snap), &path)?;
        report.files.push(path);
    }
    if let Some((_, e)) = &outcome.failure {
        return Err(CliError::Solver(format!("{}: {e}", manifest.tag)));
    }
    Ok((solver, outcome))
}

/// Centre of the last cell at or above `level` (0 when no cell is).
pub fn front_position(centers: &[f64], t: &[f64], level: f64) -> f64 {
    t.iter().rposition(|v| *v >= level).map_or(0.0, |j| centers[j])
}

/// Half-maximum front and leading edge of the heated region, at 0.5 and
/// 0.1 of the wall temperature.
pub const FRONT_LEVEL: f64 = 0.5;
pub const PENETRATION_LEVEL: f64 = 0.1;

/// Face between the two neighbouring cells with the largest temperature drop.
pub fn steepest_face(centers: &[f64], t: &[f64]) -> f64 {
    let j = (0..t.len() - 1)
        .max_by(|&a, &b| (t[a] - t[a + 1]).total_cmp(&(t[b] - t[b + 1])))
        .unwrap_or(0);
    0.5 * (centers[j] + centers[j + 1])
}

fn profiles(tag: &str, raw: &RawConfig, dir: &Path, stride: Option<usize>) -> Result<Report, CliError> {
    let cases = raw.cases()?;
    let mut report = Report::default();
    for (k, case) in cases.iter().enumerate() {
        let cfg = config::solver_config(case)?;
        let manifest = RunManifest::new(cfg, dir, stride, &case_tag(tag, k, cases.len()))?;
        let (solver, outcome) = run_case(&manifest, &mut report)?;
        let last = outcome.snapshots.last().expect("final snapshot");
        let p = metric_prefix(k, cases.len());
        let t = &last.t;
        report.push(format!("{p}T_min"), t.iter().copied().fold(f64::INFINITY, f64::min));
        report.push(format!("{p}T_max"), t.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        if let Boundary::Planckian(wall) = manifest.config.boundary.left {
            report.push(format!("{p}front"), front_position(solver.centers(), t, FRONT_LEVEL * wall));
            report.push(format!("{p}penetration"), front_position(solver.centers(), t, PENETRATION_LEVEL * wall));
            report.push(format!("{p}steepest"), steepest_face(solver.centers(), t));
        }
    }
    Ok(report)
}

fn table1(tag: &str, raw: &RawConfig, dir: &Path) -> Result<Report, CliError> {
    let coarse = config::frequency_grid(raw, None)?;
    let fine = config::frequency_grid(raw, Some(raw.usize_or("table.reference_groups", 600)?))?;
    let opacity = config::opacity_model(raw, f64::INFINITY)?;
    let temps = config::temperatures(raw, "table.temperatures", &[1.0, 2.0, 4.0, 8.0, 16.0])?;
    let table = mean_opacity_table(&temps, &coarse, &fine, &opacity).map_err(|e| from_solver(tag, e.into()))?;
    let mut csv = Table::new(["T", "ref", "rosseland", "rel_err_r", "constant", "rel_err_c"]);
    let mut report = Report::default();
    for row in &table.rows {
        csv.push(vec![
            row.t.into(),
            row.reference.into(),
            row.rosseland.into(),
            row.rel_err_rosseland.into(),
            row.constant.into(),
            row.rel_err_constant.into(),
        ]);
        report.push(format!("T{}.ref", row.t), row.reference);
        report.push(format!("T{}.rel_err_r", row.t), row.rel_err_rosseland);
        report.push(format!("T{}.rel_err_c", row.t), row.rel_err_constant);
    }
    let path = dir.join(format!("{tag}.csv"));
    output::write_csv(&csv, &path)?;
    report.files.push(path);
    Ok(report)
}

fn coeffs(tag: &str, raw: &RawConfig, dir: &Path) -> Result<Report, CliError> {
    let grid = config::frequency_grid(raw, None)?;
    let opacity = config::opacity_model(raw, f64::INFINITY)?;
    let temps = config::temperatures(raw, "coeffs.temperatures", &[1.0, 16.0])?;
    let mut csv = Table::new([
        "group",
        "center_eps",
        "T",
        "sigma_c",
        "sigma_r",
        "sigma_e",
        "sigma_p",
        "inv_sigma_s_c",
        "inv_sigma_s_r",
    ]);
    for &t in &temps {
        let c = fddl_coefficients(t, t, &grid, &opacity, 0.0).map_err(|e| from_solver(tag, e.into()))?;
        for g in 0..grid.groups() {
            csv.push(vec![
                (g + 1).into(),
                grid.center(g).into(),
                t.into(),
                c.sigma_c[g].into(),
                c.sigma_r[g].into(),
                c.sigma_e[g].into(),
                c.sigma_p[g].into(),
                c.inv_sigma_s_c[g].into(),
                c.inv_sigma_s_r[g].into(),
            ]);
        }
    }
    let path = dir.join(format!("{tag}.csv"));
    output::write_csv(&csv, &path)?;
    Ok(Report { files: vec![path], metrics: Vec::new() })
}

/// Averages pairs of fine cells onto the coarse mesh.
fn restrict(fine: &[f64]) -> Vec<f64> {
    fine.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Discrete l1 norm Σ|a−b|Δx.
fn l1(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx
}

/// One row of a self-convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub level: usize,
    pub dx: f64,
    pub dt: f64,
    pub error_t: f64,
    pub observed_order: Option<f64>,
}

/// Errors between successive halvings of (Δx, Δt); `levels` errors need
/// `levels + 1` solutions.
pub fn self_convergence(case: &RawConfig, levels: usize, dx0: f64, ratio: f64, t_end: f64) -> Result<Vec<ErrorRow>, CliError> {
    let mut finals = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let dx = dx0 / 2f64.powi(l as i32);
        let mut level = case.clone();
        level.remove("mesh.cells");
        level.set("mesh.dx", Value::Float(dx));
        level.set("time.dt", Value::Float(ratio * dx));
        level.set("time.t_end", Value::Float(t_end));
        let cfg = config::solver_config(&level)?;
        let solver = ApSolver::new(cfg).map_err(|e| from_solver("converge", e))?;
        let outcome = solver.run(usize::MAX).map_err(|e| from_solver("converge", e))?;
        if let Some((time, e)) = outcome.failure {
            return Err(CliError::Solver(format!("converge level {} (dx = {dx}) at t = {time}: {e}", l + 1)));
        }
        finals.push((dx, ratio * dx, outcome.final_state.t));
    }
    let mut rows: Vec<ErrorRow> = Vec::with_capacity(levels);
    for l in 0..levels {
        let (dx, dt, coarse) = &finals[l];
        let error_t = l1(coarse, &restrict(&finals[l + 1].2), *dx);
        let observed_order = rows.last().map(|prev| (prev.error_t / error_t).log2());
        rows.push(ErrorRow { level: l + 1, dx: *dx, dt: *dt, error_t, observed_order });
    }
    Ok(rows)
}

pub fn error_table(rows: &[ErrorRow]) -> Table {
    let mut csv = Table::new(["level", "dx", "dt", "error_T", "observed_order"]);
    for r in rows {
        csv.push(vec![r.level.into(), r.dx.into(), r.dt.into(), r.error_t.into(), r.observed_order.into()]);
    }
    csv
}

fn converge(tag: &str, raw: &RawConfig, dir: &Path) -> Result<Report, CliError> {
    let levels = raw.usize_or("convergence.levels", 2)?;
    let dx0 = raw.positive_or("convergence.dx", 0.02)?;
    let ratio = raw.positive_or("convergence.dt_over_dx", 1.0)?;
    let t_end = raw.positive_or("convergence.t_end", 1.0)?;
    let cases = raw.cases()?;
    let mut report = Report::default();
    for (k, case) in cases.iter().enumerate() {
        let rows = self_convergence(case, levels, dx0, ratio, t_end)?;
        let path = dir.join(format!("{}_errors.csv", case_tag(tag, k, cases.len())));
        output::write_csv(&error_table(&rows), &path)?;
        report.files.push(path);
        let p = metric_prefix(k, cases.len());
        for r in &rows {
            report.push(format!("{p}error{}", r.level), r.error_t);
            if let Some(o) = r.observed_order {
                report.push(format!("{p}order{}", r.level), o);
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Limit {
    Gray,
    Fddl,
}

/// Largest |a−b| over max|b|.
pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn limit_boundary(cfg: &SolverConfig, tag: &str) -> Result<LimitBoundary, CliError> {
    for (side, b) in [("left", cfg.boundary.left), ("right", cfg.boundary.right)] {
        if b != Boundary::Reflective {
            return Err(ConfigError::Invalid {
                key: format!("boundary.{side}"),
                message: format!("{tag} compares closed slabs; use \"reflective\""),
            }
            .into());
        }
    }
    Ok(LimitBoundary::ZeroFlux)
}

/// Transport run against the matching limit solver on the same mesh.
fn ap_limit(tag: &str, raw: &RawConfig, dir: &Path, limit: Limit) -> Result<Report, CliError> {
    let cases = raw.cases()?;
    let mut report = Report::default();
    for (k, case) in cases.iter().enumerate() {
        let cfg = config::solver_config(case)?;
        let wall = limit_boundary(&cfg, tag)?;
        let name = case_tag(tag, k, cases.len());
        let manifest = RunManifest::new(cfg.clone(), dir, None, &name)?;
        let (solver, outcome) = run_case(&manifest, &mut report)?;
        let transport = outcome.snapshots.last().expect("final snapshot");
        let n = cfg.cells;
        let gn = cfg.grid.groups();
        let norm = cfg.scaling.planck_norm;
        let oracle = match limit {
            Limit::Gray => {
                let states = gray_diffusion_run(
                    GrayDiffusionConfig {
                        length: cfg.length,
                        cells: n,
                        grid: cfg.grid.clone(),
                        constants: cfg.constants,
                        scaling: cfg.scaling,
                        opacity: cfg.opacity.clone(),
                        left: wall,
                        right: wall,
                        initial_temperature: cfg.initial_temperature.clone(),
                        dt: cfg.dt,
                        t_end: cfg.t_end,
                        lag: CoefficientLag::Previous,
                        tol: cfg.nonlinear.tol_t,
                        max_iterations: cfg.nonlinear.max_iterations,
                    },
                    usize::MAX,
                )
                .map_err(|e| from_limit(&name, e))?;
                let last = states.last().expect("final state");
                let mut rho = vec![0.0; gn * n];
                for (j, &t) in last.t.iter().enumerate() {
                    let b = group_planck(t, &cfg.grid, norm).b;
                    for g in 0..gn {
                        rho[g * n + j] = b[g];
                    }
                }
                Snapshot { time: last.time, t: last.t.clone(), t_r: last.t.clone(), rho }
            }
            Limit::Fddl => {
                let states = fddl_run(
                    FddlConfig {
                        length: cfg.length,
                        cells: n,
                        grid: cfg.grid.clone(),
                        constants: cfg.constants,
                        scaling: cfg.scaling,
                        opacity: cfg.opacity.clone(),
                        weights: cfg.weights,
                        left: wall,
                        right: wall,
                        initial_temperature: cfg.initial_temperature.clone(),
                        initial_radiation: cfg.initial_radiation.clone(),
                        dt: cfg.dt,
                        t_end: cfg.t_end,
                        tol: cfg.nonlinear.tol_t,
                        max_iterations: cfg.nonlinear.max_iterations,
                    },
                    usize::MAX,
                )
                .map_err(|e| from_limit(&name, e))?;
                let last = states.last().expect("final state");
                let t_r = (0..n)
                    .map(|j| {
                        let column: Vec<f64> = (0..gn).map(|g| last.rho[g * n + j]).collect();
                        radiation_temperature(&column, norm).map_err(|e| from_solver(&name, e.into()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Snapshot { time: last.time, t: last.t.clone(), t_r, rho: last.rho.clone() }
            }
        };
        let path = profile_path(dir, &format!("{name}_oracle"), oracle.time);
        output::write_csv(&profile_table(solver.centers(), &oracle), &path)?;
        report.files.push(path);
        let p = metric_prefix(k, cases.len());
        report.push(format!("{p}max_rel_T"), max_rel(&transport.t, &oracle.t));
        if limit == Limit::Fddl {
            let worst = (0..gn)
                .map(|g| max_rel(&transport.rho[g * n..(g + 1) * n], &oracle.rho[g * n..(g + 1) * n]))
                .fold(0.0f64, f64::max);
            report.push(format!("{p}max_rel_rho"), worst);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_ex1(levels: usize) -> RawConfig {
        let mut raw = load("converge", None, &[]).unwrap();
        raw.apply_override("sweep.opacity.sigma_a0=[1.0]").unwrap();
        raw.apply_override("sweep.opacity.sigma_s0=[1.0]").unwrap();
        raw.apply_override(&format!("convergence.levels={levels}")).unwrap();
        raw.apply_override("convergence.dx=0.2").unwrap();
        raw.apply_override("convergence.t_end=0.2").unwrap();
        raw.apply_override("frequency.groups=4").unwrap();
        raw.apply_override("angles.ordinates=2").unwrap();
        raw
    }

    #[test]
    fn two_levels_give_two_rows_and_one_order() {
        let dir = tempfile::tempdir().unwrap();
        let opts = Options { out_dir: dir.path().to_path_buf(), ..Options::default() };
        let report = run_experiment("converge", &small_ex1(2), &opts).unwrap();
        assert_eq!(report.files.len(), 1);
        let (header, rows) = output::read_csv(&report.files[0]).unwrap();
        assert_eq!(header, ["level", "dx", "dt", "error_T", "observed_order"]);
        assert_eq!(rows.len(), 2);
        assert!(rows[0][4].is_nan());
        assert!(rows[1][4].is_finite());
        assert_eq!(report.metrics.iter().filter(|(k, _)| k.starts_with("order")).count(), 1);
    }

    #[test]
    fn ex3_final_profile_has_150_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut raw = load("ex3", None, &["time.t_end=0.02".into(), "frequency.groups=4".into()]).unwrap();
        raw.apply_override("angles.ordinates=2").unwrap();
        let opts = Options { out_dir: dir.path().to_path_buf(), ..Options::default() };
        let report = run_experiment("ex3", &raw, &opts).unwrap();
        let last = report.files.last().unwrap();
        assert!(last.ends_with("ex3_profile_t0.02.csv"), "{last:?}");
        let text = std::fs::read_to_string(last).unwrap();
        assert_eq!(text.lines().count(), 151);
        assert_eq!(text.lines().next().unwrap(), "x,T,T_r,rho_g1,rho_g2,rho_g3,rho_g4");
    }

    #[test]
    fn run_needs_a_file() {
        let err = load("run", None, &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(load("ex9", None, &[]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn zero_stride_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let opts = Options { out_dir: dir.path().to_path_buf(), stride: Some(0), reference: false };
        let err = run_experiment("ex3", &load("ex3", None, &[]).unwrap(), &opts).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn front_and_steepest_face() {
        let x = [0.5, 1.5, 2.5, 3.5];
        let t = [1.0, 0.9, 0.2, 0.1];
        assert_eq!(front_position(&x, &t, 0.5), 1.5);
        assert_eq!(front_position(&x, &t, 0.1), 3.5);
        assert_eq!(steepest_face(&x, &t), 2.0);
        assert_eq!(front_position(&x, &[0.1; 4], 0.5), 0.0);
    }

    #[test]
    fn restriction_and_norm() {
        assert_eq!(restrict(&[1.0, 3.0, 5.0, 7.0]), [2.0, 6.0]);
        assert_eq!(l1(&[1.0, 2.0], &[0.0, 4.0], 0.5), 1.5);
    }
}
