use std::path::PathBuf;

use baga::colony::{run, ColonyConfig, HaltReason, Protocol};
use baga::config::RunConfig;
use baga::problems::ProblemKind;

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

const FILES: [(&str, ProblemKind, Protocol); 5] = [
    ("sine_ratio_sp.toml", ProblemKind::SineRatio, Protocol::SP),
    ("booth_sp.toml", ProblemKind::Booth, Protocol::SP),
    ("knapsack_standard.toml", ProblemKind::KnapsackStandard, Protocol::SP),
    ("knapsack_improved.toml", ProblemKind::KnapsackImproved, Protocol::SP),
    ("hamiltonian3.toml", ProblemKind::Hamiltonian3, Protocol::P),
];

#[test]
fn bundled_configs_encode_the_reference_parameters() {
    for (file, kind, protocol) in FILES {
        let rc = RunConfig::load(&bundled(file)).unwrap();
        let cfg = rc.to_colony().unwrap();
        assert_eq!(cfg, ColonyConfig::preset(kind, protocol, 1), "{file}");
    }
}

#[test]
fn bundled_configs_round_trip() {
    for (file, ..) in FILES {
        let rc = RunConfig::load(&bundled(file)).unwrap();
        let text = rc.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), rc, "{file}");
    }
}

#[test]
fn bundled_configs_run_to_completion() {
    for (file, ..) in FILES {
        let cfg = RunConfig::load(&bundled(file)).unwrap().to_colony().unwrap();
        let rec = run(&cfg).unwrap();
        assert!(
            matches!(rec.halt, HaltReason::Capacity | HaltReason::TimeLimit),
            "{file}"
        );
        assert!(!rec.occurrences.is_empty(), "{file}: no optimum found");
        let counts: Vec<usize> = rec.census.iter().map(|s| s.optimal_count).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{file}: census not monotone");
    }
}

#[test]
fn eugenic_override_needs_threshold_in_file() {
    let rc = RunConfig::load(&bundled("sine_ratio_sp.toml"))
        .unwrap()
        .with_overrides(None, Some(Protocol::PE));
    assert!(rc.to_colony().is_err());
}
