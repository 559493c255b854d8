//! Full-size scenarios. Each needs several GB of memory and hours on one
//! core, so they only run with `cargo test --release -- --ignored`.

use std::path::Path;

use holodof::runner::{eigenvalues_csv, load_config, run_scenario_on};

fn check(name: &str) {
    let config = load_config(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("scenarios")
            .join(format!("{name}.toml")),
    )
    .unwrap();
    let one = run_scenario_on(&config, 1).unwrap();
    let many = run_scenario_on(&config, 8).unwrap();
    assert_eq!(eigenvalues_csv(one.eigenvalues()), eigenvalues_csv(many.eigenvalues()));
    assert_eq!(one.deterministic_json(), many.deterministic_json());
    assert_eq!(one.grid.samples, 4096);
    println!(
        "{name}: eta_theory {:.2}, effective {:?}",
        one.eta_theory, one.field.eta_effective
    );
}

#[test]
#[ignore]
fn fig3_full_size_is_deterministic() {
    check("fig3");
}

#[test]
#[ignore]
fn fig4_full_size_is_deterministic() {
    check("fig4");
}
