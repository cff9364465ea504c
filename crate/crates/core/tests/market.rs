use std::path::Path;

use chp::conic::SolverSettings;
use chp::instance::{load_instance, synth_instance, Instance, SynthOptions};
use chp::market::{chp_report, comparison_table, lmp, single_period_chp, solve_uced, PricingMode, UcedOptions};
use chp::oracle::brute_force_uced;

fn example(name: &str) -> Instance {
    load_instance(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)).unwrap()
}

#[test]
fn example1_reports() {
    let inst = example("ex1.json");
    let s = SolverSettings::default();
    let uc = solve_uced(&inst, UcedOptions::default(), &s).unwrap();
    let sched = &uc.schedule;
    let reps = vec![
        lmp(&inst, sched, &s).unwrap(),
        chp_report(&inst, PricingMode::Exact, false, sched, &s).unwrap(),
        chp_report(&inst, PricingMode::Exact, true, sched, &s).unwrap(),
        single_period_chp(&inst, sched, &s).unwrap(),
    ];
    println!("{}", comparison_table(&reps));
    assert!((uc.cost - 1850.0).abs() < 1e-8 * 1850.0, "{}", uc.cost);
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;
    assert!(close(reps[0].prices[0][0], 50.0, 1e-4));
    assert!(close(reps[0].per_unit[0].uplift.unwrap(), 100.0, 1e-2) && close(reps[0].per_unit[1].uplift.unwrap(), 1900.0, 1e-2));
    assert!(close(reps[1].prices[0][0], 12.0, 1e-4));
    assert!(close(reps[1].per_unit[0].uplift.unwrap(), 1430.0, 1e-2) && close(reps[1].per_unit[1].uplift.unwrap(), 0.0, 1e-2));
    assert!(close(reps[2].prices[0][0], 52.0, 1e-4) && close(reps[2].per_unit[0].uplift.unwrap(), 30.0, 1e-2));
    assert!(reps[2].per_unit[1].uplift.is_none());
    assert!(close(reps[3].prices[0][0], 12.0, 1e-4));
}

#[test]
fn example2_reports() {
    let inst = example("ex2.json");
    let s = SolverSettings::default();
    let uc = solve_uced(&inst, UcedOptions::default(), &s).unwrap();
    let sched = &uc.schedule;
    let reps = vec![
        lmp(&inst, sched, &s).unwrap(),
        chp_report(&inst, PricingMode::Achp1, false, sched, &s).unwrap(),
        chp_report(&inst, PricingMode::Extended, false, sched, &s).unwrap(),
        single_period_chp(&inst, sched, &s).unwrap(),
    ];
    println!("{}", comparison_table(&reps));
    let p1 = [70.0, 40.0, 70.0];
    let p2 = [0.0, 60.0, 100.0];
    for t in 0..3 {
        assert!((sched.units[0].p[t] - p1[t]).abs() < 1e-3 && (sched.units[1].p[t] - p2[t]).abs() < 1e-3);
    }
    let want = [([60.0, 60.0, 60.0], [0.0, 560.0]), ([60.0, 60.0, 64.0], [120.0, 160.0]), ([60.0, 60.0, 65.6], [168.0, 0.0])];
    for (r, (pi, up)) in reps.iter().zip(want) {
        for t in 0..3 {
            assert!((r.prices[t][0] - pi[t]).abs() < 0.05, "{} {:?}", r.scheme, r.prices);
        }
        for g in 0..2 {
            assert!((r.per_unit[g].uplift.unwrap() - up[g]).abs() < 0.5, "{} {:?}", r.scheme, r.per_unit);
        }
    }
    // the time-decoupled baseline cannot beat the hull
    assert!(reps[3].totals.total_uplift >= reps[2].totals.total_uplift - 0.5);
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let s = SolverSettings::default();
    for seed in 1..=12 {
        let opts = SynthOptions { ramping: seed % 2 == 0, ..Default::default() };
        let inst = synth_instance(seed, 4, 3, opts);
        let bf = brute_force_uced(&inst, &s).unwrap();
        let bb = solve_uced(&inst, UcedOptions { mipgap: 0.0, ..Default::default() }, &s).unwrap();
        assert!((bf.cost - bb.cost).abs() <= 1e-6 * bf.cost.abs().max(1.0), "seed {seed}: {} vs {}", bf.cost, bb.cost);
        assert!(bb.bound <= bb.cost + 1e-9);
    }
}
