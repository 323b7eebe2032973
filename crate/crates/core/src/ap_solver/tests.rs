use super::*;
use crate::physics::{FrequencyGrid, OpacityModel, PhysicalConstants, SpectralLaw, WeightOptions};
use proptest::prelude::*;

fn base_config(boundary: BoundarySpec, t0: TemperatureProfile) -> SolverConfig {
    let constants = PhysicalConstants::default();
    SolverConfig {
        length: 1.0,
        cells: 12,
        grid: FrequencyGrid::logarithmic(1e-3, 20.0, 5).unwrap(),
        ordinates: 6,
        constants,
        scaling: Scaling::dimensional(&constants),
        opacity: OpacityModel::uniform(5.0, 2.0, SpectralLaw::InverseCubeSqrtT),
        weights: WeightOptions::default(),
        boundary,
        initial_temperature: t0,
        initial_radiation: None,
        dt: 0.01,
        t_end: 0.05,
        nonlinear: NonlinearOptions::default(),
    }
}

fn hot_spot() -> TemperatureProfile {
    TemperatureProfile::Parabola { center: 0.5, curvature: 8.0, peak: 0.8, floor: 0.05 }
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[test]
fn initial_state_is_planckian() {
    let s = ApSolver::new(base_config(BoundarySpec::closed(), hot_spot())).unwrap();
    let st = s.initialize().unwrap();
    let n = st.cells;
    for j in 0..n {
        let b = group_planck(st.t[j], &s.config.grid, s.config.scaling.planck_norm).b;
        for g in 0..st.groups {
            assert_eq!(st.rho[g * n + j], b[g]);
        }
    }
    assert!(st.r.iter().chain(&st.eq).chain(&st.oq).all(|v| *v == 0.0));
}

#[test]
fn equilibrium_is_a_fixed_point() {
    for boundary in [
        BoundarySpec::closed(),
        BoundarySpec { left: Boundary::Planckian(0.4), right: Boundary::Planckian(0.4) },
        BoundarySpec { left: Boundary::Reflective, right: Boundary::Planckian(0.4) },
    ] {
        let mut cfg = base_config(boundary, TemperatureProfile::Uniform(0.4));
        cfg.dt = 0.05;
        let s = ApSolver::new(cfg).unwrap();
        let s0 = s.initialize().unwrap();
        let mut st = s0.clone();
        for _ in 0..100 {
            st = s.step(&st).unwrap().0;
            assert!(max_rel_diff(&st.t, &s0.t) <= 1e-12, "{boundary:?}");
            assert!(max_rel_diff(&st.rho, &s0.rho) <= 1e-12, "{boundary:?}");
            assert!(st.max_abs_q() <= 1e-12 * s0.rho.iter().cloned().fold(0.0, f64::max));
        }
    }
}

#[test]
fn closed_system_conserves_energy() {
    let s = ApSolver::new(base_config(BoundarySpec::closed(), hot_spot())).unwrap();
    let mut st = s.initialize().unwrap();
    for _ in 0..10 {
        let (next, rep) = s.step(&st).unwrap();
        assert_eq!(rep.inflow, 0.0);
        assert!(rep.energy_residual <= 1e-10, "{}", rep.energy_residual);
        st = next;
    }
}

#[test]
fn open_boundaries_balance_energy_with_flux() {
    let bcs = [
        BoundarySpec { left: Boundary::Vacuum, right: Boundary::Vacuum },
        BoundarySpec { left: Boundary::Planckian(1.0), right: Boundary::Reflective },
    ];
    for bc in bcs {
        let s = ApSolver::new(base_config(bc, hot_spot())).unwrap();
        let mut st = s.initialize().unwrap();
        let mut total_flux = 0.0;
        for _ in 0..10 {
            let (next, rep) = s.step(&st).unwrap();
            assert!(rep.energy_residual <= 1e-9, "{bc:?}: {}", rep.energy_residual);
            total_flux += rep.inflow;
            st = next;
        }
        match bc.left {
            Boundary::Vacuum => assert!(total_flux < 0.0),
            _ => assert!(total_flux > 0.0),
        }
    }
}

#[test]
fn zero_state_has_zero_residual() {
    let s = ApSolver::new(base_config(BoundarySpec::closed(), hot_spot())).unwrap();
    let z = RadiationState::zeros(s.groups(), s.mesh.cells, s.quad.len());
    assert_eq!(s.energy_balance(&z, &z, 0.0), 0.0);
    assert_eq!(s.total_energy(&z), 0.0);
}

#[test]
fn boundary_closure_cases() {
    let vac = BoundarySpec { left: Boundary::Vacuum, right: Boundary::Vacuum };
    let s = ApSolver::new(base_config(vac, TemperatureProfile::Uniform(0.3))).unwrap();
    let z = RadiationState::zeros(s.groups(), s.mesh.cells, s.quad.len());
    let zero_rho = vec![0.0; s.mesh.cells];
    assert_eq!(s.boundary_closure_r(&z, 0, &zero_rho, (0.0, 0.0)), (0.0, 0.0));

    // Planckian inflow onto an equilibrium at the same temperature.
    let bc = BoundarySpec { left: Boundary::Planckian(1.0), right: Boundary::Planckian(1.0) };
    let s = ApSolver::new(base_config(bc, TemperatureProfile::Uniform(1.0))).unwrap();
    let st = s.initialize().unwrap();
    for g in 0..s.groups() {
        let (l, r) = s.boundary_closure_r(&st, g, st.rho(g), (0.0, 0.0));
        let scale = st.rho(g)[0];
        assert!(l.abs() <= 1e-12 * scale && r.abs() <= 1e-12 * scale, "{g}: {l} {r}");
    }

    // Hot inflow onto a cold slab: R_0 is the inward flux, and equals the
    // closure formula evaluated by hand.
    let bc = BoundarySpec { left: Boundary::Planckian(1.0), right: Boundary::Vacuum };
    let s = ApSolver::new(base_config(bc, TemperatureProfile::Uniform(0.01))).unwrap();
    let st = s.initialize().unwrap();
    let b = group_planck(1.0, &s.config.grid, s.config.scaling.planck_norm).b;
    for g in 0..s.groups() {
        let (l, _) = s.boundary_closure_r(&st, g, st.rho(g), (0.0, 0.0));
        let by_hand = 3.0 * b[g] - 3.0 * st.rho(g)[0];
        assert!(l > 0.0);
        assert!((l - by_hand).abs() <= 1e-12 * by_hand);
    }
}

#[test]
fn q_moments_vanish_after_every_step() {
    let bc = BoundarySpec { left: Boundary::Planckian(1.0), right: Boundary::Vacuum };
    let s = ApSolver::new(base_config(bc, hot_spot())).unwrap();
    let mut st = s.initialize().unwrap();
    for _ in 0..5 {
        st = s.step(&st).unwrap().0;
        let scale = st.max_abs_q().max(1e-300);
        assert!(st.q_moment_defect(&s.quad) <= 1e-12 * scale.max(1.0));
        assert!(st.max_abs_q() > 0.0);
    }
}

fn stiff_config(eps: f64) -> SolverConfig {
    let mut cfg = base_config(BoundarySpec::closed(), TemperatureProfile::Cosine {
        mean: 1.0,
        amplitude: 0.3,
        length: 1.0,
    });
    cfg.scaling = Scaling::nondimensional(eps, 1.0 / eps, 1.0 / eps).unwrap();
    cfg.opacity = OpacityModel::uniform(1.0, 1.0, SpectralLaw::InverseCube);
    cfg.grid = FrequencyGrid::logarithmic(1e-2, 30.0, 4).unwrap();
    cfg.dt = 0.05;
    cfg.t_end = 0.05;
    cfg
}

#[test]
fn q_part_is_order_epsilon_in_the_thick_limit() {
    let mut sizes = Vec::new();
    for eps in [1e-4, 1e-6] {
        let s = ApSolver::new(stiff_config(eps)).unwrap();
        let st = s.step(&s.initialize().unwrap()).unwrap().0;
        let rho_max = st.rho.iter().cloned().fold(0.0, f64::max);
        sizes.push(st.max_abs_q() / rho_max);
    }
    assert!(sizes[1] <= 1e-4, "{sizes:?}");
    // Shrinks roughly in proportion to ε.
    assert!(sizes[1] <= sizes[0] * 1e-1, "{sizes:?}");
}

#[test]
fn angular_refinement_changes_moments_little() {
    let mk = |m: usize| {
        let mut cfg = base_config(BoundarySpec::closed(), hot_spot());
        cfg.scaling = Scaling::nondimensional(1.0, 1.0, 1.0).unwrap();
        cfg.opacity = OpacityModel::uniform(2.0, 1.0, SpectralLaw::Constant);
        cfg.constants.c_v = 1.0;
        cfg.ordinates = m;
        cfg.dt = 0.02;
        cfg.t_end = 0.1;
        let s = ApSolver::new(cfg).unwrap();
        s.run(100).unwrap().final_state
    };
    let (a, b) = (mk(16), mk(32));
    let rho_scale = b.rho.iter().cloned().fold(0.0, f64::max);
    let r_diff = a.r.iter().zip(&b.r).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(max_rel_diff(&a.rho, &b.rho) <= 1e-6, "{}", max_rel_diff(&a.rho, &b.rho));
    assert!(r_diff <= 1e-6 * rho_scale, "{r_diff}");
}

#[test]
fn run_counts_snapshots() {
    let mut cfg = base_config(BoundarySpec::closed(), hot_spot());
    cfg.t_end = cfg.dt;
    let s = ApSolver::new(cfg.clone()).unwrap();
    let out = s.run(1).unwrap();
    assert_eq!(out.reports.len(), 1);
    assert_eq!(out.snapshots.len(), 2);

    cfg.t_end = 20.0 * cfg.dt;
    let s = ApSolver::new(cfg.clone()).unwrap();
    let a = s.run(2).unwrap().snapshots.len();
    let b = s.run(4).unwrap().snapshots.len();
    assert!(((a - 1) as i64 - 2 * (b - 1) as i64).abs() <= 1, "{a} {b}");

    // A t_end that is not a whole number of steps lands exactly.
    cfg.t_end = 2.5 * cfg.dt;
    let out = ApSolver::new(cfg.clone()).unwrap().run(1).unwrap();
    assert_eq!(out.reports.len(), 3);
    assert!((out.final_state.time - cfg.t_end).abs() <= 1e-15);
}

#[test]
fn projection_constants() {
    let s = ApSolver::new(base_config(BoundarySpec::closed(), hot_spot())).unwrap();
    let mut st = RadiationState::zeros(s.groups(), s.mesh.cells, s.quad.len());
    st.eq.iter_mut().for_each(|v| *v = 2.5);
    let om = s.quad.nodes().to_vec();
    let np1 = st.cells + 1;
    for (k, v) in st.oq.iter_mut().enumerate() {
        *v = om[(k / np1) % om.len()];
    }
    project_q_moments(&mut st, &s.quad);
    assert!(st.max_abs_q() <= 1e-14);
}

proptest! {
    #[test]
    fn projection_is_idempotent(seed in proptest::collection::vec(-1.0f64..1.0, 5 * 6 * 13)) {
        let s = ApSolver::new(base_config(BoundarySpec::closed(), hot_spot())).unwrap();
        let mut st = RadiationState::zeros(s.groups(), s.mesh.cells, s.quad.len());
        for (k, v) in st.eq.iter_mut().enumerate() {
            *v = seed[k % seed.len()] * 3.0;
        }
        for (k, v) in st.oq.iter_mut().enumerate() {
            *v = seed[(7 * k + 3) % seed.len()];
        }
        project_q_moments(&mut st, &s.quad);
        prop_assert!(st.q_moment_defect(&s.quad) <= 1e-13);
        let once = st.clone();
        project_q_moments(&mut st, &s.quad);
        let d = st.eq.iter().chain(&st.oq).zip(once.eq.iter().chain(&once.oq))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(d <= 1e-14);
    }
}
