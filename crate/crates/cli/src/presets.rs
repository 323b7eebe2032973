//! Built-in experiment presets, embedded from `presets/*.toml`.

pub const TAGS: &[&str] = &["ex1", "ex2", "ex3", "table1", "coeffs", "converge", "ap-gray", "ap-fddl"];

/// Preset text for an experiment tag. `converge` runs on the Example 1 cases.
pub fn preset(tag: &str) -> Option<&'static str> {
    Some(match tag {
        "ex1" | "converge" => include_str!("../../../presets/ex1.toml"),
        "ex2" => include_str!("../../../presets/ex2.toml"),
        "ex3" => include_str!("../../../presets/ex3.toml"),
        "table1" => include_str!("../../../presets/table1.toml"),
        "coeffs" => include_str!("../../../presets/coeffs.toml"),
        "ap-gray" => include_str!("../../../presets/ap-gray.toml"),
        "ap-fddl" => include_str!("../../../presets/ap-fddl.toml"),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{solver_config, RawConfig};
    use frte_core::ap_solver::Boundary;

    #[test]
    fn every_tag_has_a_parsable_preset() {
        for tag in TAGS {
            let raw = RawConfig::parse_str(preset(tag).unwrap()).unwrap();
            assert!(!raw.cases().unwrap().is_empty(), "{tag}");
        }
        assert!(preset("ex4").is_none());
    }

    #[test]
    fn example_parameters() {
        let cases = RawConfig::parse_str(preset("ex1").unwrap()).unwrap().cases().unwrap();
        let pairs: Vec<(f64, f64)> = cases
            .iter()
            .map(|c| {
                let cfg = solver_config(c).unwrap();
                (cfg.opacity.sigma_a0.value(0.0), cfg.opacity.sigma_s0.value(0.0))
            })
            .collect();
        assert_eq!(pairs, [(1.0, 1000.0), (1000.0, 1.0), (1000.0, 1000.0), (1.0, 1.0)]);
        let ex1 = solver_config(&cases[0]).unwrap();
        assert_eq!((ex1.length, ex1.cells, ex1.dt, ex1.t_end), (2.0, 200, 0.04, 2.0));

        let cases = RawConfig::parse_str(preset("ex2").unwrap()).unwrap().cases().unwrap();
        assert_eq!(cases.len(), 3);
        let ex2 = solver_config(&cases[0]).unwrap();
        assert_eq!((ex2.length, ex2.cells, ex2.dt, ex2.t_end), (5.0, 1000, 0.005, 1.0));
        assert_eq!(ex2.opacity.sigma_s0.value(1.0), 0.0);
        assert_eq!(ex2.boundary.left, Boundary::Planckian(1.0));
        assert_eq!(ex2.boundary.right, Boundary::Reflective);

        let ex3 = solver_config(&RawConfig::parse_str(preset("ex3").unwrap()).unwrap()).unwrap();
        assert_eq!((ex3.length, ex3.cells, ex3.dt), (3.0, 150, 0.02));
        assert_eq!(ex3.opacity.sigma_a0.value(1.9), 10.0);
        assert_eq!(ex3.opacity.sigma_a0.value(2.1), 1000.0);
        assert_eq!(ex3.boundary.right, Boundary::Vacuum);
    }
}
