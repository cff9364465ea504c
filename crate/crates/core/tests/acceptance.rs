//! Acceptance gate: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chp::conic::{self, LinExpr, ModelBuild, Sense, SolverSettings, Status};
use chp::hull::{add_unit_system, envelope_epigraph, solve_chp, BuildOptions, HullMode, Prices};
use chp::instance::{load_instance, parse_instance, replicate, synth_instance, Instance, SynthOptions};
use chp::market::{chp_report, lmp, single_period_prices, solve_uced, uplift, PricingMode, StartupAllocation, UcedOptions, UcedStatus};
use chp::oracle::{
    brute_force_uced, dual_value, extended_chp, negative_control_check, subgradient_solve, vertex_integrality_check, StepRule,
};

type Outcome = Result<String, String>;

fn example(name: &str) -> Instance {
    load_instance(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)).expect("example instance")
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: chp::Error) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// 1, 2: worked examples

fn example1() -> Outcome {
    let start = Instant::now();
    let inst = example("ex1.json");
    let s = SolverSettings::default();
    let uc = solve_uced(&inst, UcedOptions::default(), &s).map_err(err)?;
    let l = lmp(&inst, &uc.schedule, &s).map_err(err)?;
    let c = chp_report(&inst, PricingMode::Exact, false, &uc.schedule, &s).map_err(err)?;
    let q = chp_report(&inst, PricingMode::Exact, true, &uc.schedule, &s).map_err(err)?;
    let elapsed = start.elapsed().as_secs_f64();
    let up = |r: &chp::market::PriceReport, g: usize| r.per_unit[g].uplift.unwrap_or(f64::NAN);
    ensure(close(l.prices[0][0], 50.0, 1e-4), || format!("LMP {}", l.prices[0][0]))?;
    ensure(close(up(&l, 0), 100.0, 1e-2) && close(up(&l, 1), 1900.0, 1e-2), || format!("LMP uplift {:?}", l.per_unit))?;
    ensure(close(c.prices[0][0], 12.0, 1e-4), || format!("CHP {}", c.prices[0][0]))?;
    ensure(close(up(&c, 0), 1430.0, 1e-2) && close(up(&c, 1), 0.0, 1e-2), || format!("CHP uplift {:?}", c.per_unit))?;
    ensure(close(q.prices[0][0], 52.0, 1e-4), || format!("CHPq {}", q.prices[0][0]))?;
    ensure(close(up(&q, 0), 30.0, 1e-2), || format!("CHPq uplift {:?}", q.per_unit))?;
    ensure(elapsed < 1.0, || format!("runtime {elapsed:.2} s"))?;
    Ok(format!(
        "LMP {:.4} U=({:.2}, {:.2}); CHP {:.4} U=({:.2}, {:.2}); CHPq {:.4} U1={:.2}; {elapsed:.3} s",
        l.prices[0][0],
        up(&l, 0),
        up(&l, 1),
        c.prices[0][0],
        up(&c, 0),
        up(&c, 1),
        q.prices[0][0],
        up(&q, 0)
    ))
}

fn example2() -> Outcome {
    let start = Instant::now();
    let inst = example("ex2.json");
    let s = SolverSettings::default();
    let uc = solve_uced(&inst, UcedOptions::default(), &s).map_err(err)?;
    let sched = &uc.schedule;
    let reports = [
        lmp(&inst, sched, &s).map_err(err)?,
        chp_report(&inst, PricingMode::Achp1, false, sched, &s).map_err(err)?,
        chp_report(&inst, PricingMode::Extended, false, sched, &s).map_err(err)?,
    ];
    let elapsed = start.elapsed().as_secs_f64();
    let p1 = [70.0, 40.0, 70.0];
    let p2 = [0.0, 60.0, 100.0];
    for t in 0..3 {
        ensure(close(sched.units[0].p[t], p1[t], 1e-3) && close(sched.units[1].p[t], p2[t], 1e-3), || {
            format!("schedule {:?} / {:?}", sched.units[0].p, sched.units[1].p)
        })?;
    }
    let want = [([60.0, 60.0, 60.0], [0.0, 560.0]), ([60.0, 60.0, 64.0], [120.0, 160.0]), ([60.0, 60.0, 65.6], [168.0, 0.0])];
    let mut detail = Vec::new();
    for (r, (pi, up)) in reports.iter().zip(want) {
        let got: Vec<f64> = r.prices.iter().map(|row| row[0]).collect();
        let u: Vec<f64> = r.per_unit.iter().map(|x| x.uplift.unwrap_or(f64::NAN)).collect();
        ensure((0..3).all(|t| close(got[t], pi[t], 0.05)), || format!("{} prices {got:?}", r.scheme))?;
        ensure((0..2).all(|g| close(u[g], up[g], 0.5)), || format!("{} uplifts {u:?}", r.scheme))?;
        detail.push(format!("{} ({:.2}, {:.2}, {:.2}) U=({:.2}, {:.2})", r.scheme, got[0], got[1], got[2], u[0], u[1]));
    }
    ensure(elapsed < 5.0, || format!("runtime {elapsed:.2} s"))?;
    Ok(format!("schedule matches; {}; {elapsed:.3} s", detail.join("; ")))
}

// ---------------------------------------------------------------------------
// 3: properties on seeded instances

/// Seeded small instances: every fourth one has ramp limits (horizon 3 for
/// every twelfth, else 2); the rest span horizons 1 to 4. Every fifth uses
/// piecewise-linear costs.
fn seeded() -> Vec<(u64, Instance)> {
    (1..=100u64)
        .map(|k| {
            let ramping = k % 4 == 0;
            let t = if ramping { 2 + (k % 12 == 0) as usize } else { 1 + (k % 4) as usize };
            let n = if k % 7 == 0 { 2 } else { 3 };
            (k, synth_instance(k, t, n, SynthOptions { ramping, pwl: k % 5 == 0, network: false }))
        })
        .collect()
}

/// Maximum of `q` over uniform prices by successive grid refinement: the
/// stencil `{-h, 0, h}^T` plus random directions around the incumbent,
/// shrinking `h` after repeated failures and widening it after a gain.
/// Starts at zero prices and never looks at a pricing model.
fn grid_max_q(inst: &Instance, seed: u64, s: &SolverSettings) -> Result<(f64, usize), String> {
    let t_len = inst.horizon;
    let q = |l: &[f64]| dual_value(inst, &Prices::uniform(l.to_vec()), s).map_err(err);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stencil: Vec<Vec<f64>> = (0..3usize.pow(t_len as u32))
        .map(|mut i| {
            (0..t_len)
                .map(|_| {
                    let d = (i % 3) as f64 - 1.0;
                    i /= 3;
                    d
                })
                .collect::<Vec<f64>>()
        })
        .filter(|d| d.iter().any(|v| *v != 0.0))
        .collect();
    let random_dirs = if inst.has_ramping() { 6 * t_len } else { 32 * t_len };
    let mut z = vec![0.0; t_len];
    let mut best = q(&z)?;
    let mut evals = 1;
    let mut h = 64.0;
    let mut fails = 0;
    let mut momentum: Option<Vec<f64>> = None;
    while h > 1e-5 {
        let mut cands: Vec<Vec<f64>> = stencil.iter().map(|d| z.iter().zip(d).map(|(a, d)| a + h * d).collect()).collect();
        for _ in 0..random_dirs {
            cands.push(z.iter().map(|a| a + h * rng.random_range(-1.0..1.0)).collect());
        }
        if let Some(m) = &momentum {
            cands.push(z.iter().zip(m).map(|(a, d)| a + 2.0 * d).collect());
        }
        let mut top: Option<(f64, usize)> = None;
        for (i, c) in cands.iter().enumerate() {
            let v = q(c)?;
            if top.is_none_or(|(b, _)| v > b) {
                top = Some((v, i));
            }
        }
        evals += cands.len();
        let (v, i) = top.expect("candidates");
        if v > best + 1e-12 * best.abs().max(1.0) {
            momentum = Some(cands[i].iter().zip(&z).map(|(a, b)| a - b).collect());
            best = v;
            z = cands[i].clone();
            h *= 1.5;
            fails = 0;
        } else {
            momentum = None;
            fails += 1;
            if fails >= 3 {
                fails = 0;
                h /= 2.0;
            }
        }
    }
    Ok((best, evals))
}

fn oracle_equivalence(set: &[(u64, Instance)]) -> Outcome {
    let s = SolverSettings::default();
    let (mut worst_exact, mut worst_grid) = (0.0f64, 0.0f64);
    let (mut plain, mut ramped, mut achp1_below, mut evals) = (0, 0, 0, 0);
    for (k, inst) in set {
        let ext = extended_chp(inst, &s).map_err(err)?;
        let obj = ext.objective;
        if inst.has_ramping() {
            ramped += 1;
            let a = solve_chp(inst, HullMode::Achp1, BuildOptions::default(), &s).map_err(err)?;
            ensure(a.objective <= obj + 1e-6 * obj.abs().max(1.0), || format!("seed {k}: aCHP1 {} above extended {obj}", a.objective))?;
            if a.objective < obj - 1e-6 * obj.abs().max(1.0) {
                achp1_below += 1;
            }
        } else {
            plain += 1;
            let h = solve_chp(inst, HullMode::Exact, BuildOptions::default(), &s).map_err(err)?;
            let d = (h.objective - obj).abs() / obj.abs().max(1.0);
            worst_exact = worst_exact.max(d);
            ensure(d <= 1e-6, || format!("seed {k}: hull {} vs extended {obj}", h.objective))?;
        }
        let (g, n) = grid_max_q(inst, *k, &s)?;
        evals += n;
        // weak duality puts every grid value below the hull objective
        ensure(g <= obj + 1e-6 * obj.abs().max(1.0), || format!("seed {k}: grid q {g} above the objective {obj}"))?;
        let d = (obj - g) / obj.abs().max(1.0);
        worst_grid = worst_grid.max(d);
        ensure(d <= 1e-4, || format!("seed {k}: grid max {g} vs objective {obj} (rel {d:.2e})"))?;
    }
    Ok(format!(
        "{plain} without ramping (hull vs extended worst {worst_exact:.1e}), {ramped} with ramping (aCHP1 strictly below the hull on {achp1_below}); grid max within {worst_grid:.1e} over {evals} q evaluations"
    ))
}

fn strong_duality(set: &[(u64, Instance)]) -> Outcome {
    let s = SolverSettings::default();
    let mut all: Vec<(u64, Instance)> = set.to_vec();
    for k in 101..=110u64 {
        all.push((k, synth_instance(k, 3, 3, SynthOptions { network: true, pwl: k % 2 == 0, ramping: false })));
    }
    let mut worst = 0.0f64;
    for (k, inst) in &all {
        let (obj, prices) = if inst.has_ramping() {
            let e = extended_chp(inst, &s).map_err(err)?;
            (e.objective, e.prices)
        } else {
            let h = solve_chp(inst, HullMode::Exact, BuildOptions::default(), &s).map_err(err)?;
            (h.objective, h.prices)
        };
        let q = dual_value(inst, &prices, &s).map_err(err)?;
        let d = (obj - q).abs() / obj.abs().max(1.0);
        worst = worst.max(d);
        ensure(d <= 1e-6, || format!("seed {k}: objective {obj} vs q {q}"))?;
    }
    Ok(format!("{} instances ({} with a network), worst rel {worst:.1e}", all.len(), 10))
}

fn uplift_identity(set: &[(u64, Instance)]) -> Outcome {
    let s = SolverSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut worst) = (0, 0.0f64);
    for (k, inst) in set.iter().filter(|(_, i)| i.is_balance_only()) {
        let uc = brute_force_uced(inst, &s).map_err(err)?;
        let v = uc.cost;
        let hull = if inst.has_ramping() { extended_chp(inst, &s).map_err(err)?.prices } else {
            solve_chp(inst, HullMode::Exact, BuildOptions::default(), &s).map_err(err)?.prices
        };
        let x: Vec<Vec<bool>> = uc.schedule.units.iter().map(|u| u.x.clone()).collect();
        let lmp_prices = chp::hull::solve_fixed_commitment(inst, &x, &s)
            .map_err(err)?
            .ok_or_else(|| format!("seed {k}: no dispatch for the optimal commitment"))?
            .prices;
        let mut total_at = |p: &Prices| -> Result<f64, String> {
            let u = uplift(inst, p, &uc.schedule, None, &s).map_err(err)?;
            let d = (v - u.dual_obj - u.total_uplift).abs() / v.abs().max(1.0);
            worst = worst.max(d);
            ensure(d <= 1e-6, || format!("seed {k}: v - q = {} but uplift {}", v - u.dual_obj, u.total_uplift))?;
            Ok(u.total_uplift)
        };
        let at_chp = total_at(&hull)?;
        let tol = 1e-6 * v.abs().max(1.0);
        let at_lmp = total_at(&lmp_prices)?;
        ensure(at_chp <= at_lmp + tol, || format!("seed {k}: uplift {at_chp} at CHP above {at_lmp} at LMP"))?;
        let sp = single_period_prices(inst, &uc.schedule, StartupAllocation::default(), &s).map_err(err)?;
        let at_sp = total_at(&sp)?;
        ensure(at_chp <= at_sp + tol, || format!("seed {k}: uplift {at_chp} at CHP above {at_sp} single-period"))?;
        for _ in 0..20 {
            let lambda: Vec<f64> = hull.lambda.iter().map(|l| l + rng.random_range(-5.0..5.0)).collect();
            let at_p = total_at(&Prices::uniform(lambda))?;
            ensure(at_chp <= at_p + tol, || format!("seed {k}: uplift {at_chp} at CHP above {at_p} at a perturbed price"))?;
        }
        checked += 1;
    }
    Ok(format!("{checked} balance-only instances, LMP, single-period and 20 perturbed prices each; identity worst rel {worst:.1e}"))
}

fn vertex_sweep() -> Outcome {
    let start = Instant::now();
    let mut polytopes = 0;
    for t in 3..=6 {
        for l_up in 1..t {
            for l_dn in 1..t {
                let r = vertex_integrality_check(l_up, l_dn, t).map_err(err)?;
                ensure(r.integral, || format!("fractional vertex at L={l_up} l={l_dn} T={t}: {:?}", r.witness))?;
                polytopes += 1;
            }
        }
    }
    let control = negative_control_check(3).map_err(err)?;
    let w = control.witness.ok_or("the negative control has no fractional vertex")?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 60.0, || format!("runtime {elapsed:.1} s"))?;
    Ok(format!("{polytopes} polytopes integral; control witness x={:?} u={:?}; {elapsed:.2} s", w.x, w.u))
}

fn subgradient_dominance() -> Outcome {
    let s = SolverSettings::default();
    let inst = synth_instance(1, 24, 12, SynthOptions::default());
    let start = Instant::now();
    let chp = solve_chp(&inst, HullMode::Exact, BuildOptions::default(), &s).map_err(err)?;
    let solve_time = start.elapsed().as_secs_f64();
    let uc = solve_uced(&inst, UcedOptions { node_limit: 1, ..Default::default() }, &s).map_err(err)?;
    let run = subgradient_solve(&inst, 500, StepRule::new(uc.cost), &s).map_err(err)?;
    ensure(run.best_q <= chp.objective + 1e-6 * chp.objective.abs(), || {
        format!("subgradient q {} above the hull objective {}", run.best_q, chp.objective)
    })?;
    ensure(solve_time < 2.0, || format!("hull solve took {solve_time:.2} s"))?;
    Ok(format!(
        "best q {:.2} (iteration {}) <= hull {:.2}, ratio {:.6}; hull solve {solve_time:.3} s",
        run.best_q,
        run.best_iteration,
        chp.objective,
        run.best_q / chp.objective
    ))
}

fn gap_at(inst: &Instance, opts: UcedOptions) -> Result<(f64, UcedStatus), String> {
    let s = SolverSettings::default();
    let uc = solve_uced(inst, opts, &s).map_err(err)?;
    let r = chp_report(inst, PricingMode::Exact, false, &uc.schedule, &s).map_err(err)?;
    Ok((r.totals.gap_rel, uc.status))
}

fn gap_shrink() -> Outcome {
    let base = synth_instance(1, 12, 6, SynthOptions::default());
    let (g1, st1) = gap_at(&base, UcedOptions::default())?;
    ensure(st1 == UcedStatus::Optimal, || "replicate(1) did not reach the mip gap".into())?;
    // an incumbent cost only overstates the gap of the optimal schedule
    let (g8, st8) = gap_at(&replicate(&base, 8), UcedOptions { node_limit: 50, ..Default::default() })?;
    ensure(g8 <= g1, || format!("gap {g8:.6} at replicate(8) above {g1:.6} at replicate(1)"))?;
    Ok(format!("rel gap {g1:.6} at replicate(1), {g8:.6} at replicate(8) ({st8:?})"))
}

// ---------------------------------------------------------------------------
// 4: solver unit suite

/// Minimum of `c x` over `{A x <= b}` by enumerating every basis.
fn vertex_enumeration(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let n = c.len();
    let m = a.len();
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn next(pick: &mut [usize], m: usize) -> bool {
        let n = pick.len();
        for i in (0..n).rev() {
            if pick[i] < m - n + i {
                pick[i] += 1;
                for j in i + 1..n {
                    pick[j] = pick[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, p) in pick.iter_mut().enumerate() {
        *p = i;
    }
    loop {
        // Gaussian elimination on the chosen rows
        let mut mat: Vec<Vec<f64>> = pick.iter().map(|&r| a[r].iter().copied().chain([b[r]]).collect()).collect();
        let mut singular = false;
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs())).unwrap();
            if mat[piv][col].abs() < 1e-10 {
                singular = true;
                break;
            }
            mat.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let f = mat[r][col] / mat[col][col];
                    for k in col..=n {
                        mat[r][k] -= f * mat[col][k];
                    }
                }
            }
        }
        if !singular {
            let x: Vec<f64> = (0..n).map(|i| mat[i][n] / mat[i][i]).collect();
            let feasible = (0..m).all(|r| a[r].iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= b[r] + 1e-9 * (1.0 + b[r].abs()));
            if feasible {
                let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
        if !next(&mut pick, m) {
            return best;
        }
    }
}

fn random_lps() -> Outcome {
    let s = SolverSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = rng.random_range(2..=4usize);
        let m = rng.random_range(1..=4usize);
        let ub: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        // every row holds at x0, so the LP is feasible
        let x0: Vec<f64> = ub.iter().map(|u| rng.random_range(0.0..*u)).collect();
        let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
        for _ in 0..m {
            let coef: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let at: f64 = coef.iter().zip(&x0).map(|(p, q)| p * q).sum();
            if rng.random_bool(0.3) {
                rows.push((coef, Sense::Ge, at - rng.random_range(0.0..2.0)));
            } else {
                rows.push((coef, Sense::Le, at + rng.random_range(0.0..2.0)));
            }
        }
        let mut build = ModelBuild::new();
        let vars: Vec<_> = (0..n).map(|j| build.add_var(format!("x{j}"), 0.0, ub[j])).collect();
        let g = build.add_group("rows");
        for (coef, sense, rhs) in &rows {
            let mut e = LinExpr::new();
            for (v, k) in vars.iter().zip(coef) {
                e.add_term(*v, *k);
            }
            build.add_row(g, e, *sense, *rhs);
        }
        let mut obj = LinExpr::new();
        for (v, k) in vars.iter().zip(&c) {
            obj.add_term(*v, *k);
        }
        build.add_objective(&obj);
        let (_, sol) = conic::solve_build(&build, &s).map_err(err)?;
        let mut a: Vec<Vec<f64>> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        for (coef, sense, rhs) in &rows {
            match sense {
                Sense::Ge => {
                    a.push(coef.iter().map(|v| -v).collect());
                    b.push(-rhs);
                }
                _ => {
                    a.push(coef.clone());
                    b.push(*rhs);
                }
            }
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            a.push(e.clone());
            b.push(ub[j]);
            e[j] = -1.0;
            a.push(e);
            b.push(0.0);
        }
        let want = vertex_enumeration(&a, &b, &c).ok_or_else(|| format!("case {case}: enumeration found no vertex"))?;
        ensure(sol.status == Status::Optimal, || format!("case {case}: status {:?}", sol.status))?;
        let d = (sol.objective - want).abs();
        worst = worst.max(d);
        ensure(d <= 1e-6 * want.abs().max(1.0), || format!("case {case}: ipm {} vs vertices {want}", sol.objective))?;
    }
    Ok(format!("50 LPs, worst abs difference {worst:.1e}"))
}

fn soc_envelope() -> Outcome {
    let doc = r#"{"T": 1, "demand": [1], "units": [{"id": "g", "p_min": 1, "p_max": 5,
        "startup_cost": 0, "no_load_cost": 4, "cost": {"type": "quadratic", "a": 0.2, "b": 1}}]}"#;
    let inst = parse_instance(doc).map_err(err)?;
    let unit = &inst.units[0];
    let s = SolverSettings::with_tol(1e-10);
    let mut points = vec![(2.5, 0.5)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    while points.len() < 10 {
        let x: f64 = rng.random_range(0.05..1.0);
        points.push((x * rng.random_range(1.0..5.0), x));
    }
    let mut worst = 0.0f64;
    for &(p, x) in &points {
        let sys = envelope_epigraph(unit, 1);
        let mut build = ModelBuild::new();
        let vars = add_unit_system(&mut build, unit, 0, 1, &sys);
        build.set_bounds(vars.p[0], p, p);
        build.set_bounds(vars.x[0], x, x);
        build.set_bounds(vars.u[0], 0.0, 0.0);
        let (_, sol) = conic::solve_build(&build, &s).map_err(err)?;
        ensure(sol.status == Status::Optimal, || format!("({p}, {x}): status {:?}", sol.status))?;
        // the mixture of the origin and the on-point p / x
        let on = p / x;
        let want = x * (0.2 * on * on + on + 4.0);
        let d = (sol.objective - want).abs();
        worst = worst.max(d);
        ensure(d <= 1e-8, || format!("({p:.4}, {x:.4}): cone {} vs envelope {want}", sol.objective))?;
    }
    Ok(format!("10 points incl. (2.5, 0.5) -> 7.0, worst abs difference {worst:.1e}"))
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let set = seeded();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1  example 1 golden values", Box::new(example1)),
        ("2  example 2 golden values", Box::new(example2)),
        ("3a oracle equivalence and grid sandwich", Box::new(|| oracle_equivalence(&set))),
        ("3b strong duality", Box::new(|| strong_duality(&set))),
        ("3c uplift identity and optimality", Box::new(|| uplift_identity(&set))),
        ("3d min up/down vertex integrality", Box::new(vertex_sweep)),
        ("3e subgradient baseline dominance", Box::new(subgradient_dominance)),
        ("3f gap shrinks with replication", Box::new(gap_shrink)),
        ("4a random LPs against vertex enumeration", Box::new(random_lps)),
        ("4b cone envelope values", Box::new(soc_envelope)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
