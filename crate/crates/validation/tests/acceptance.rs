//! Prints one PASS/FAIL line per acceptance criterion, with the measured
//! values and the wall time against the criterion's budget. Exits nonzero
//! if any criterion fails.

use frte_validation::{self as v, Outcome};
use std::time::Instant;

fn check(id: &str, title: &str, budget_s: Option<f64>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let secs = start.elapsed().as_secs_f64();
    let in_time = budget_s.map_or(true, |b| secs <= b);
    let (pass, detail) = match outcome {
        Ok(verdict) => (verdict.pass && in_time, verdict.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let timing = match budget_s {
        None => format!("{secs:.1} s"),
        Some(b) if in_time => format!("{secs:.1} s of {b} s"),
        Some(b) => format!("{secs:.1} s, over the {b} s budget"),
    };
    println!("{} {id} {title}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() {
    let dir = tempfile::tempdir().expect("scratch directory");
    let out = dir.path();
    let mut results = vec![
        check("1", "mean free path relative errors", Some(10.0), || v::table_relative_errors(out)),
        check("2", "T^3 scaling of the reference", None, || v::reference_scaling(out)),
        check("3", "Planck identities", Some(1.0), v::planck_identities),
        check("4", "Example 1 self-convergence order", Some(600.0), v::example1_order),
        check("5", "Example 1 stability at dt = 8 dx", Some(120.0), v::large_step_stability),
    ];
    for (k, (l_a, l_s)) in [(1e6, 1e6), (1e6, 1e-6), (1.0, 1e6)].into_iter().enumerate() {
        let id = format!("6.{}", k + 1);
        let title = format!("gray limit, l_a = {l_a:e}, l_s = {l_s:e}");
        results.push(check(&id, &title, Some(120.0), || v::gray_limit(out, l_a, l_s)));
    }
    results.push(check("7", "frequency-dependent diffusion limit", Some(180.0), || v::fddl_limit(out)));
    results.push(check("8", "invariant suite", Some(60.0), v::invariants));
    results.push(check("9", "Examples 2 and 3 against dt/10 self-references", Some(600.0), v::examples_2_and_3));
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
