use std::path::Path;

use chp::conic::SolverSettings;
use chp::hull::{solve_chp, BuildOptions, HullMode};
use chp::instance::load_instance;

fn example(name: &str) -> chp::instance::Instance {
    load_instance(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)).unwrap()
}

#[test]
fn example1_hull_price() {
    let inst = example("ex1.json");
    let s = solve_chp(&inst, HullMode::Exact, BuildOptions::default(), &SolverSettings::default()).unwrap();
    assert!((s.prices.lambda[0] - 12.0).abs() < 1e-6, "{:?}", s.prices.lambda);
    assert!((s.objective - 420.0).abs() < 1e-5, "{}", s.objective);
    let q = solve_chp(&inst, HullMode::Exact, BuildOptions { qualified: true }, &SolverSettings::default()).unwrap();
    assert!((q.prices.lambda[0] - 52.0).abs() < 1e-6, "{:?}", q.prices.lambda);
}

#[test]
fn example2_achp1_prices() {
    let inst = example("ex2.json");
    let s = solve_chp(&inst, HullMode::Achp1, BuildOptions::default(), &SolverSettings::default()).unwrap();
    for (got, want) in s.prices.lambda.iter().zip([60.0, 60.0, 64.0]) {
        assert!((got - want).abs() < 1e-6, "{:?}", s.prices.lambda);
    }
    assert!((s.objective - 20560.0).abs() < 1e-4, "{}", s.objective);
}
