use proptest::prelude::*;

use chp::conic::{self, ModelBuild, SolverSettings, Status};
use chp::hull::{add_unit_system, envelope_epigraph, perspective_cost, solve_chp, BuildOptions, HullMode, Prices};
use chp::instance::{parse_instance, print_instance, synth_instance, Instance, PriceAnchor, SynthOptions, UnitSpec};
use chp::market::{price_anchor, uplift};
use chp::oracle::{brute_force_uced, dual_function_q, dual_value, extended_chp};

fn small(seed: u64, t: usize, n: usize, ramping: bool, pwl: bool) -> Instance {
    synth_instance(seed, t, n, SynthOptions { ramping, pwl, network: false })
}

fn prices(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0..120.0f64, len)
}

fn scale(v: f64) -> f64 {
    v.abs().max(1.0)
}

/// Minimized envelope epigraph at a fixed point `(p, x)` with no start-up.
fn envelope_by_cone(unit: &UnitSpec, p: f64, x: f64) -> f64 {
    let mut build = ModelBuild::new();
    let vars = add_unit_system(&mut build, unit, 0, 1, &envelope_epigraph(unit, 1));
    build.set_bounds(vars.p[0], p, p);
    build.set_bounds(vars.x[0], x, x);
    build.set_bounds(vars.u[0], 0.0, 0.0);
    let (_, sol) = conic::solve_build(&build, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    sol.objective
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn documents_round_trip(seed in 0u64..1000, t in 2usize..6, n in 1usize..5, ramping: bool, pwl: bool, network: bool) {
        let inst = synth_instance(seed, t, n, SynthOptions { ramping, pwl, network });
        let back = parse_instance(&print_instance(&inst)).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn synthetic_instances_are_feasible(seed in 0u64..1000, t in 1usize..5, n in 1usize..4, ramping: bool) {
        let inst = small(seed, t, n, ramping, false);
        let uc = brute_force_uced(&inst, &SolverSettings::default()).unwrap();
        prop_assert!(uc.schedule.check(&inst, 1e-6).is_ok());
    }

    #[test]
    fn q_is_concave_with_valid_supergradients(seed in 0u64..1000, t in 1usize..4, ramping: bool, a in prices(3), b in prices(3)) {
        let inst = small(seed, t, 3, ramping, seed % 3 == 0);
        let s = SolverSettings::default();
        let (a, b) = (a[..t].to_vec(), b[..t].to_vec());
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let pa = dual_function_q(&inst, &Prices::uniform(a.clone()), |_| true, &s).unwrap();
        let qb = dual_value(&inst, &Prices::uniform(b.clone()), &s).unwrap();
        let qm = dual_value(&inst, &Prices::uniform(mid), &s).unwrap();
        prop_assert!(qm >= 0.5 * (pa.q + qb) - 1e-9 * scale(qm), "midpoint {} vs {} {}", qm, pa.q, qb);
        let lin: f64 = pa.balance_gap.iter().zip(b.iter().zip(&a)).map(|(g, (y, x))| g * (y - x)).sum();
        prop_assert!(qb <= pa.q + lin + 1e-7 * scale(qb), "q(b) {} above the supergradient bound {}", qb, pa.q + lin);
    }

    #[test]
    fn uplifts_are_nonnegative(seed in 0u64..1000, t in 1usize..4, ramping: bool, pi in prices(3)) {
        let inst = small(seed, t, 3, ramping, false);
        let s = SolverSettings::default();
        let uc = brute_force_uced(&inst, &s).unwrap();
        let u = uplift(&inst, &Prices::uniform(pi[..t].to_vec()), &uc.schedule, None, &s).unwrap();
        for unit in &u.per_unit {
            prop_assert!(unit.uplift.unwrap() >= -1e-6, "{:?}", unit);
        }
        prop_assert!(uc.cost - u.dual_obj >= -1e-6 * scale(uc.cost));
    }

    #[test]
    fn envelope_is_tight_on_integral_points(seed in 0u64..1000, pwl: bool, frac in 0.0..=1.0f64) {
        let inst = small(seed, 2, 1, false, pwl);
        let unit = &inst.units[0];
        let p = unit.p_min + frac * (unit.p_max - unit.p_min);
        let want = unit.period_cost(p);
        prop_assert!((perspective_cost(unit, p, 1.0, 0.0) - want).abs() <= 1e-9 * scale(want));
        let cone = envelope_by_cone(unit, p, 1.0);
        prop_assert!((cone - want).abs() <= 1e-6 * scale(want), "cone {} vs cost {}", cone, want);
    }

    #[test]
    fn envelope_under_estimates_mixtures(seed in 0u64..1000, pwl: bool, f1 in 0.0..=1.0f64, f2 in 0.0..=1.0f64, w in prop::collection::vec(0.01..1.0f64, 3)) {
        let inst = small(seed, 2, 1, false, pwl);
        let unit = &inst.units[0];
        let total: f64 = w.iter().sum();
        let (l1, l2) = (w[0] / total, w[1] / total);
        let p1 = unit.p_min + f1 * (unit.p_max - unit.p_min);
        let p2 = unit.p_min + f2 * (unit.p_max - unit.p_min);
        // the third weight sits on the off point
        let (p, x) = (l1 * p1 + l2 * p2, l1 + l2);
        let mix = l1 * unit.period_cost(p1) + l2 * unit.period_cost(p2);
        prop_assert!(perspective_cost(unit, p, x, 0.0) <= mix + 1e-9 * scale(mix));
        prop_assert!(envelope_by_cone(unit, p, x) <= mix + 1e-6 * scale(mix));
    }

    #[test]
    fn ramping_hulls_are_ordered(seed in 0u64..1000, t in 2usize..4) {
        let inst = small(seed, t, 3, true, false);
        let s = SolverSettings::default();
        let ext = extended_chp(&inst, &s).unwrap().objective;
        let approx = solve_chp(&inst, HullMode::Achp1, BuildOptions::default(), &s).unwrap().objective;
        let v = brute_force_uced(&inst, &s).unwrap().cost;
        prop_assert!(ext >= approx - 1e-6 * scale(ext), "extended {} below aCHP1 {}", ext, approx);
        prop_assert!(ext <= v + 1e-6 * scale(v) && approx <= v + 1e-6 * scale(v));
    }

    #[test]
    fn hull_prices_support_the_cost_envelope(seed in 0u64..1000, t in 1usize..4, shifts in prop::collection::vec(-0.1..0.1f64, 3)) {
        let inst = small(seed, t, 3, false, false);
        let s = SolverSettings::default();
        let chp = solve_chp(&inst, HullMode::Exact, BuildOptions::default(), &s).unwrap();
        let mut moved = inst.clone();
        for (tt, row) in moved.demand.iter_mut().enumerate() {
            row.iter_mut().for_each(|d| *d *= 1.0 + shifts[tt]);
        }
        let v = match brute_force_uced(&moved, &s) {
            Ok(v) => v.cost,
            Err(_) => return Ok(()),
        };
        let slope: f64 = (0..t).map(|tt| chp.prices.lambda[tt] * (moved.total_demand(tt) - inst.total_demand(tt))).sum();
        prop_assert!(v >= chp.objective + slope - 1e-6 * scale(v), "v(d') {} below {}", v, chp.objective + slope);
    }

    #[test]
    fn anchors_pin_past_prices(seed in 0u64..1000, price in 0.0..150.0f64) {
        let inst = small(seed, 3, 3, false, false);
        let s = SolverSettings::default();
        let anchor = PriceAnchor { period: 0, price, congested_line_duals: Vec::new() };
        let anchored = price_anchor(&inst, &[anchor], 1).unwrap();
        let chp = solve_chp(&anchored, HullMode::Exact, BuildOptions::default(), &s).unwrap();
        prop_assert!((chp.prices.lambda[0] - price).abs() <= 1e-4, "{} vs {}", chp.prices.lambda[0], price);
        prop_assert_eq!(price_anchor(&inst, &[], 1).unwrap(), inst.clone());
        let live = PriceAnchor { period: 1, price, congested_line_duals: Vec::new() };
        prop_assert!(price_anchor(&inst, &[live], 1).is_err());
    }
}

#[test]
fn solves_are_deterministic() {
    let inst = small(5, 4, 3, false, false);
    let s = SolverSettings::default();
    let a = solve_chp(&inst, HullMode::Exact, BuildOptions::default(), &s).unwrap();
    let b = solve_chp(&inst, HullMode::Exact, BuildOptions::default(), &s).unwrap();
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.prices, b.prices);
    assert_eq!(a.iterations, b.iterations);
}
