//! Full fine-time-step reruns. Hours of CPU time each, so ignored by
//! default: `cargo test -p frte-validation --test reference -- --ignored`.

use frte_cli::config;
use frte_cli::experiments::{max_rel, REFERENCE_DT};
use frte_cli::load;
use frte_core::ap_solver::ApSolver;

fn final_t(raw: &frte_cli::RawConfig) -> Vec<f64> {
    let solver = ApSolver::new(config::solver_config(raw).unwrap()).unwrap();
    let outcome = solver.run(usize::MAX).unwrap();
    assert!(outcome.failure.is_none(), "{:?}", outcome.failure);
    outcome.final_state.t
}

#[test]
#[ignore]
fn example2_against_the_fine_reference() {
    let raw = load("ex2", None, &[]).unwrap();
    for case in raw.cases().unwrap() {
        let coarse = final_t(&case);
        let mut fine = case.clone();
        fine.apply_override(&format!("time.dt={REFERENCE_DT:e}")).unwrap();
        let d = max_rel(&coarse, &final_t(&fine));
        println!("sigma_a0 = {}: {d:.3e}", case.f64_req("opacity.sigma_a0").unwrap());
        assert!(d <= 0.03);
    }
}

#[test]
#[ignore]
fn example3_against_the_fine_reference() {
    let raw = load("ex3", None, &[]).unwrap();
    let coarse = final_t(&raw);
    let mut fine = raw.clone();
    fine.apply_override(&format!("time.dt={REFERENCE_DT:e}")).unwrap();
    let d = max_rel(&coarse, &final_t(&fine));
    println!("{d:.3e}");
    assert!(d <= 0.03);
}
