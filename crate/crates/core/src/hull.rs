//! The primal convex-hull pricing model: per-unit hull constraints,
//! convex-envelope epigraphs and the system coupling rows, plus price
//! extraction from the solved model.

use serde::{Deserialize, Serialize};

use crate::conic::{self, dual_of, ConicProgram, ConicSolution, LinExpr, ModelBuild, Sense, SolverSettings, Status, Var};
use crate::error::{Error, Result};
use crate::instance::{CostCurve, Instance, UnitSpec};
use crate::schedule::{startups, Schedule, UnitSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullMode {
    /// Exact hull for units without ramp limits.
    Exact,
    /// Hull constraints plus the plain ramping rows.
    Achp1,
    /// Disjunctive formulation over enumerated schedules, see
    /// [`crate::oracle::extended_chp`].
    Extended,
}

/// Per-unit symbol: the variable kind and its 0-based period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    P(usize),
    X(usize),
    U(usize),
    R(usize),
    S(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Transition,
    MinUp,
    MinDown,
    DispatchMax,
    DispatchMin,
    Headroom,
    ReserveMax,
    ReserveMin,
    RampUp,
    RampDown,
    Segment,
}

/// `sum coef * sym  (sense)  rhs` in period `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymRow {
    pub kind: RowKind,
    pub t: usize,
    pub terms: Vec<(Sym, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl SymRow {
    fn new(kind: RowKind, t: usize, terms: Vec<(Sym, f64)>, sense: Sense, rhs: f64) -> Self {
        SymRow { kind, t, terms, sense, rhs }
    }

    /// Whether the row holds at `value(sym)` within `tol`.
    pub fn holds(&self, value: impl Fn(Sym) -> f64, tol: f64) -> bool {
        let lhs: f64 = self.terms.iter().map(|&(s, c)| c * value(s)).sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Rows, bounds, cone memberships and objective terms over one unit's
/// symbols.
#[derive(Debug, Clone, Default)]
pub struct UnitSystem {
    pub rows: Vec<SymRow>,
    pub bounds: Vec<(Sym, f64, f64)>,
    /// Each entry `[t, z..]` as affine symbol expressions `(terms, constant)`.
    pub cones: Vec<Vec<(Vec<(Sym, f64)>, f64)>>,
    pub objective: Vec<(Sym, f64)>,
}

impl UnitSystem {
    pub fn extend(&mut self, other: UnitSystem) {
        self.rows.extend(other.rows);
        self.bounds.extend(other.bounds);
        self.cones.extend(other.cones);
        self.objective.extend(other.objective);
    }
}

/// Convex hull description of one unit's commitment and dispatch set with
/// `x` and `u` relaxed to continuous values.
///
/// Without an initial status the start-up variable of the first period is
/// fixed at zero and window rows only cover periods whose window lies inside
/// the horizon. With an initial status every window is completed with the
/// pre-horizon history, and periods forced by residual minimum times are
/// fixed through bounds as well.
pub fn hull_constraints(unit: &UnitSpec, horizon: usize, mode: HullMode, with_reserve: bool) -> Result<UnitSystem> {
    if mode == HullMode::Exact && unit.has_ramping() {
        return Err(Error::Unsupported(format!(
            "unit {} has ramp limits; the exact hull mode covers units without ramping",
            unit.id
        )));
    }
    let t_len = horizon;
    let (l_up, l_dn) = (unit.min_up as i64, unit.min_down as i64);
    let init = unit.initial;
    let mut sys = UnitSystem::default();
    let rows = &mut sys.rows;

    for t in 0..t_len {
        let ti = t as i64;
        // state transition
        if t >= 1 {
            rows.push(SymRow::new(
                RowKind::Transition,
                t,
                vec![(Sym::U(t), 1.0), (Sym::X(t), -1.0), (Sym::X(t - 1), 1.0)],
                Sense::Ge,
                0.0,
            ));
        } else if let Some(h) = init {
            rows.push(SymRow::new(RowKind::Transition, 0, vec![(Sym::U(0), 1.0), (Sym::X(0), -1.0)], Sense::Ge, -h.x_hist(0)));
        }

        // minimum up time: sum_{i=t-L+1..t} u_i <= x_t
        let start = ti - l_up + 1;
        if start >= 1 || init.is_some() {
            let mut terms: Vec<(Sym, f64)> = (start.max(0)..=ti).map(|i| (Sym::U(i as usize), 1.0)).collect();
            let hist: f64 = init.map_or(0.0, |h| (start..0).map(|i| h.u_hist(i + 1)).sum());
            terms.push((Sym::X(t), -1.0));
            rows.push(SymRow::new(RowKind::MinUp, t, terms, Sense::Le, -hist));
        }

        // minimum down time: sum_{i=t-l+1..t} u_i <= 1 - x_{t-l}
        let start = ti - l_dn + 1;
        let back = ti - l_dn;
        if start >= 1 || init.is_some() {
            let mut terms: Vec<(Sym, f64)> = (start.max(0)..=ti).map(|i| (Sym::U(i as usize), 1.0)).collect();
            let mut rhs = 1.0;
            if let Some(h) = init {
                rhs -= (start..0).map(|i| h.u_hist(i + 1)).sum::<f64>();
            }
            if back >= 0 {
                terms.push((Sym::X(back as usize), 1.0));
            } else if let Some(h) = init {
                rhs -= h.x_hist(back + 1);
            }
            rows.push(SymRow::new(RowKind::MinDown, t, terms, Sense::Le, rhs));
        }

        // dispatch limits
        if unit.p_min == unit.p_max {
            rows.push(SymRow::new(RowKind::DispatchMax, t, vec![(Sym::P(t), 1.0), (Sym::X(t), -unit.p_max)], Sense::Eq, 0.0));
        } else {
            rows.push(SymRow::new(RowKind::DispatchMax, t, vec![(Sym::P(t), 1.0), (Sym::X(t), -unit.p_max)], Sense::Le, 0.0));
            if unit.p_min > 0.0 {
                rows.push(SymRow::new(RowKind::DispatchMin, t, vec![(Sym::P(t), 1.0), (Sym::X(t), -unit.p_min)], Sense::Ge, 0.0));
            }
        }

        if with_reserve {
            if let Some(r) = unit.reserve {
                rows.push(SymRow::new(RowKind::ReserveMax, t, vec![(Sym::R(t), 1.0), (Sym::X(t), -r.max)], Sense::Le, 0.0));
                if r.min > 0.0 {
                    rows.push(SymRow::new(RowKind::ReserveMin, t, vec![(Sym::R(t), 1.0), (Sym::X(t), -r.min)], Sense::Ge, 0.0));
                }
                rows.push(SymRow::new(
                    RowKind::Headroom,
                    t,
                    vec![(Sym::P(t), 1.0), (Sym::R(t), 1.0), (Sym::X(t), -unit.p_max)],
                    Sense::Le,
                    0.0,
                ));
            }
        }

        if mode == HullMode::Achp1 {
            if let Some((v, vb)) = unit.ramp_limits() {
                if t >= 1 {
                    // p_t - p_{t-1} <= v x_{t-1} + vb (1 - x_{t-1})
                    rows.push(SymRow::new(
                        RowKind::RampUp,
                        t,
                        vec![(Sym::P(t), 1.0), (Sym::P(t - 1), -1.0), (Sym::X(t - 1), vb - v)],
                        Sense::Le,
                        vb,
                    ));
                    // p_{t-1} - p_t <= v x_t + vb (1 - x_t)
                    rows.push(SymRow::new(
                        RowKind::RampDown,
                        t,
                        vec![(Sym::P(t - 1), 1.0), (Sym::P(t), -1.0), (Sym::X(t), vb - v)],
                        Sense::Le,
                        vb,
                    ));
                } else if let Some(p0) = init.and_then(|h| h.p_prev()) {
                    let x0 = init.map_or(0.0, |h| h.x_hist(0));
                    rows.push(SymRow::new(RowKind::RampUp, 0, vec![(Sym::P(0), 1.0)], Sense::Le, p0 + v * x0 + vb * (1.0 - x0)));
                    rows.push(SymRow::new(RowKind::RampDown, 0, vec![(Sym::P(0), -1.0), (Sym::X(0), vb - v)], Sense::Le, vb - p0));
                }
            }
        }
    }

    for t in 0..t_len {
        let (mut lo, mut hi) = (0.0, 1.0);
        if let Some(h) = init {
            let d = h.duration as i64;
            let ti = t as i64;
            if h.on && ti < l_up - d {
                lo = 1.0;
            }
            if !h.on && ti < l_dn - d {
                hi = 0.0;
            }
        }
        sys.bounds.push((Sym::X(t), lo, hi));
        let u_hi = if t == 0 && init.is_none() { 0.0 } else { f64::INFINITY };
        sys.bounds.push((Sym::U(t), 0.0, u_hi));
        sys.bounds.push((Sym::P(t), 0.0, f64::INFINITY));
        if with_reserve && unit.reserve.is_some() {
            sys.bounds.push((Sym::R(t), 0.0, f64::INFINITY));
        }
    }
    Ok(sys)
}

/// Objective terms and epigraph constraints of the convex envelope of the
/// unit's cost over all periods.
pub fn envelope_epigraph(unit: &UnitSpec, horizon: usize) -> UnitSystem {
    let mut sys = UnitSystem::default();
    for t in 0..horizon {
        sys.objective.push((Sym::X(t), unit.no_load_cost));
        sys.objective.push((Sym::U(t), unit.startup_cost));
        match &unit.cost {
            CostCurve::Quadratic { a, b } => {
                sys.objective.push((Sym::P(t), *b));
                if *a > 0.0 {
                    // s x >= a p^2  <=>  ||(2 sqrt(a) p, x - s)|| <= x + s
                    sys.objective.push((Sym::S(t), 1.0));
                    sys.bounds.push((Sym::S(t), 0.0, f64::INFINITY));
                    sys.cones.push(vec![
                        (vec![(Sym::X(t), 1.0), (Sym::S(t), 1.0)], 0.0),
                        (vec![(Sym::P(t), 2.0 * a.sqrt())], 0.0),
                        (vec![(Sym::X(t), 1.0), (Sym::S(t), -1.0)], 0.0),
                    ]);
                }
            }
            CostCurve::PiecewiseLinear { segments } => {
                sys.objective.push((Sym::S(t), 1.0));
                sys.bounds.push((Sym::S(t), pwl_floor(unit), f64::INFINITY));
                for &(ak, bk) in segments {
                    sys.rows.push(SymRow::new(
                        RowKind::Segment,
                        t,
                        vec![(Sym::S(t), 1.0), (Sym::P(t), -ak), (Sym::X(t), -bk)],
                        Sense::Ge,
                        0.0,
                    ));
                }
            }
        }
    }
    sys
}

/// A lower bound on the epigraph variable of a piecewise-linear cost, valid
/// for every `(p, x)` in the dispatch box; standard form needs one.
fn pwl_floor(unit: &UnitSpec) -> f64 {
    match &unit.cost {
        CostCurve::PiecewiseLinear { segments } => {
            let (a, b) = segments[0];
            (a * unit.p_max).min(0.0) + b.min(0.0)
        }
        CostCurve::Quadratic { .. } => 0.0,
    }
}

/// Closed-form convex envelope of one period's cost at a relaxed point.
pub fn perspective_cost(unit: &UnitSpec, p: f64, x: f64, u: f64) -> f64 {
    let fixed = unit.no_load_cost * x + unit.startup_cost * u;
    match &unit.cost {
        CostCurve::Quadratic { a, b } => {
            let quad = if x > 0.0 { a * p * p / x } else { 0.0 };
            quad + b * p + fixed
        }
        CostCurve::PiecewiseLinear { segments } => {
            if x <= 0.0 {
                return fixed;
            }
            segments.iter().map(|(ak, bk)| ak * p + bk * x).fold(f64::NEG_INFINITY, f64::max) + fixed
        }
    }
}

/// Cost of an integral schedule: per period no-load, energy and start-up
/// costs.
pub fn schedule_cost(unit: &UnitSpec, p: &[f64], x: &[f64], u: &[f64]) -> f64 {
    (0..p.len())
        .map(|t| {
            let on = if x[t] > 0.5 { unit.period_cost(p[t]) } else { 0.0 };
            on + unit.startup_cost * u[t]
        })
        .sum()
}

// ---------------------------------------------------------------------------
// system rows

pub const BALANCE: &str = "balance";
pub const LINE_PLUS: &str = "line+";
pub const LINE_MINUS: &str = "line-";
pub const RESERVE: &str = "reserve";

/// Per-unit contribution to the coupling rows.
pub struct UnitOutput {
    pub unit: usize,
    /// Output expression per period.
    pub p: Vec<LinExpr>,
    /// Reserve expression per period, when the unit offers reserve.
    pub r: Option<Vec<LinExpr>>,
}

#[derive(Debug, Clone)]
pub struct AnchorVars {
    pub period: usize,
    pub source: Var,
    pub sink: Var,
}

/// Names and layout of the coupling groups.
#[derive(Debug, Clone)]
pub struct SystemHandles {
    pub horizon: usize,
    pub n_lines: usize,
    /// `(line, period)` pairs of the rows in the two line groups, in order.
    pub line_rows: Vec<(usize, usize)>,
    pub has_reserve: bool,
    pub anchors: Vec<AnchorVars>,
}

/// Adds balance, transmission, reserve and anchoring rows over the given
/// per-unit outputs.
pub fn add_system_rows(build: &mut ModelBuild, inst: &Instance, outputs: &[UnitOutput], use_anchors: bool) -> SystemHandles {
    let t_len = inst.horizon;
    let bus_of = inst.unit_bus_indices();
    let cap = 10.0 * inst.total_demand_vec().iter().sum::<f64>().max(1.0);

    let mut anchors = Vec::new();
    if use_anchors {
        for a in &inst.anchors {
            let source = build.add_var(format!("anchor_src[{}]", a.period), 0.0, cap);
            let sink = build.add_var(format!("anchor_sink[{}]", a.period), 0.0, cap);
            build.add_objective(&LinExpr::new().term(source, a.price).term(sink, -a.price));
            anchors.push(AnchorVars { period: a.period, source, sink });
        }
    }
    let anchor_at = |t: usize| anchors.iter().find(|a| a.period == t);

    let g = build.add_group(BALANCE);
    for t in 0..t_len {
        let mut e = LinExpr::new();
        for o in outputs {
            e.add_expr(&o.p[t], 1.0);
        }
        if let Some(a) = anchor_at(t) {
            e.add_term(a.source, 1.0);
            e.add_term(a.sink, -1.0);
        }
        build.add_row(g, e, Sense::Eq, inst.total_demand(t));
    }

    let mut line_rows = Vec::new();
    let mut n_lines = 0;
    if let Some(net) = &inst.network {
        n_lines = net.lines.len();
        let gp = build.add_group(LINE_PLUS);
        let gm = build.add_group(LINE_MINUS);
        for (l, line) in net.lines.iter().enumerate() {
            let sf = &net.shift_factors[l];
            for t in 0..t_len {
                // flow = sum_n sf_n (generation_n - demand_n)
                let mut flow = LinExpr::new();
                for o in outputs {
                    let k = sf[bus_of[o.unit]];
                    if k != 0.0 {
                        flow.add_expr(&o.p[t], k);
                    }
                }
                let mut anchored_dual = None;
                if let Some(a) = anchor_at(t) {
                    flow.add_term(a.source, sf[0]);
                    flow.add_term(a.sink, -sf[0]);
                    let spec = inst.anchors.iter().find(|x| x.period == t).expect("anchor data");
                    anchored_dual = spec.congested_line_duals.iter().find(|(id, _)| *id == line.id).map(|&(_, v)| v);
                }
                let dflow: f64 = (0..inst.buses.len()).map(|n| sf[n] * inst.demand[t][n]).sum();
                if let Some(mu) = anchored_dual {
                    // realized congestion price enters the objective instead of the limit
                    build.add_objective(&flow.scaled(mu));
                    continue;
                }
                build.add_row(gp, flow.clone(), Sense::Le, line.limit + dflow);
                build.add_row(gm, flow.scaled(-1.0), Sense::Le, line.limit - dflow);
                line_rows.push((l, t));
            }
        }
    }

    let mut has_reserve = false;
    if let Some(req) = &inst.reserve {
        has_reserve = true;
        let gr = build.add_group(RESERVE);
        for (t, &rt) in req.iter().enumerate() {
            let mut e = LinExpr::new();
            for o in outputs {
                if let Some(r) = &o.r {
                    e.add_expr(&r[t], 1.0);
                }
            }
            build.add_row(gr, e, Sense::Ge, rt);
        }
    }
    SystemHandles { horizon: t_len, n_lines, line_rows, has_reserve, anchors }
}

// ---------------------------------------------------------------------------
// the full model

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Restrict the model to the qualified units.
    pub qualified: bool,
}

/// Model variables of one unit.
#[derive(Debug, Clone)]
pub struct UnitVars {
    pub p: Vec<Var>,
    pub x: Vec<Var>,
    pub u: Vec<Var>,
    pub r: Option<Vec<Var>>,
    pub s: Vec<Option<Var>>,
}

impl UnitVars {
    pub fn var(&self, s: Sym) -> Var {
        match s {
            Sym::P(t) => self.p[t],
            Sym::X(t) => self.x[t],
            Sym::U(t) => self.u[t],
            Sym::R(t) => self.r.as_ref().expect("reserve variables")[t],
            Sym::S(t) => self.s[t].expect("epigraph variable"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelHandles {
    pub system: SystemHandles,
    /// `None` for units left out of the model.
    pub units: Vec<Option<UnitVars>>,
}

/// Adds one unit's symbols, rows, cones and objective to `build`.
pub fn add_unit_system(build: &mut ModelBuild, unit: &UnitSpec, g: usize, horizon: usize, sys: &UnitSystem) -> UnitVars {
    let with_r = sys.bounds.iter().any(|(s, _, _)| matches!(s, Sym::R(_)));
    let has_s = |t: usize| sys.bounds.iter().any(|(s, _, _)| *s == Sym::S(t));
    let mut vars = UnitVars {
        p: (0..horizon).map(|t| build.add_var(format!("p[{g},{t}]"), 0.0, f64::INFINITY)).collect(),
        x: (0..horizon).map(|t| build.add_var(format!("x[{g},{t}]"), 0.0, 1.0)).collect(),
        u: (0..horizon).map(|t| build.add_var(format!("u[{g},{t}]"), 0.0, f64::INFINITY)).collect(),
        r: None,
        s: vec![None; horizon],
    };
    if with_r {
        vars.r = Some((0..horizon).map(|t| build.add_var(format!("r[{g},{t}]"), 0.0, f64::INFINITY)).collect());
    }
    for t in 0..horizon {
        if has_s(t) {
            vars.s[t] = Some(build.add_var(format!("s[{g},{t}]"), 0.0, f64::INFINITY));
        }
    }
    for &(s, lo, hi) in &sys.bounds {
        build.set_bounds(vars.var(s), lo, hi);
    }
    let expr = |terms: &[(Sym, f64)], constant: f64| -> LinExpr {
        let mut e = LinExpr::constant(constant);
        for &(s, c) in terms {
            e.add_term(vars.var(s), c);
        }
        e
    };
    let group = build.group(&format!("unit[{}]", unit.id));
    for r in &sys.rows {
        build.add_row(group, expr(&r.terms, 0.0), r.sense, r.rhs);
    }
    for c in &sys.cones {
        build.add_soc(c.iter().map(|(t, k)| expr(t, *k)).collect());
    }
    build.add_objective(&expr(&sys.objective, 0.0));
    vars
}

/// Builds the primal pricing model of `inst`.
pub fn build_chp_primal(inst: &Instance, mode: HullMode, opts: BuildOptions) -> Result<(ModelBuild, ModelHandles)> {
    if mode == HullMode::Extended {
        return Err(Error::Unsupported("the extended formulation is built by oracle::extended_chp".into()));
    }
    let t_len = inst.horizon;
    let with_reserve = inst.reserve.is_some();
    let mut build = ModelBuild::new();
    let mut units = Vec::with_capacity(inst.units.len());
    let mut outputs = Vec::new();
    for (g, unit) in inst.units.iter().enumerate() {
        if opts.qualified && !inst.is_qualified(g) {
            units.push(None);
            continue;
        }
        let mut sys = hull_constraints(unit, t_len, mode, with_reserve)?;
        sys.extend(envelope_epigraph(unit, t_len));
        let vars = add_unit_system(&mut build, unit, g, t_len, &sys);
        outputs.push(UnitOutput {
            unit: g,
            p: vars.p.iter().map(|&v| LinExpr::var(v)).collect(),
            r: vars.r.as_ref().map(|r| r.iter().map(|&v| LinExpr::var(v)).collect()),
        });
        units.push(Some(vars));
    }
    if outputs.is_empty() {
        return Err(Error::Model("no units left in the pricing model".into()));
    }
    let system = add_system_rows(&mut build, inst, &outputs, true);
    Ok((build, ModelHandles { system, units }))
}

/// Prices read from a solved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prices {
    /// `energy[t][bus]`
    pub energy: Vec<Vec<f64>>,
    /// Balance duals per period.
    pub lambda: Vec<f64>,
    /// `[line][period]` duals of the upper and lower flow limits.
    pub mu_plus: Vec<Vec<f64>>,
    pub mu_minus: Vec<Vec<f64>>,
    pub reserve: Option<Vec<f64>>,
}

impl Prices {
    /// Price seen by a unit at bus `bus` in period `t`.
    pub fn at(&self, t: usize, bus: usize) -> f64 {
        self.energy[t][bus]
    }

    /// Uniform prices on a single-bus system.
    pub fn uniform(lambda: Vec<f64>) -> Self {
        Prices {
            energy: lambda.iter().map(|&l| vec![l]).collect(),
            lambda,
            mu_plus: Vec::new(),
            mu_minus: Vec::new(),
            reserve: None,
        }
    }
}

/// Extracts bus prices `lambda - sum_l sf[l][n] (mu+ - mu-)` and the raw
/// duals.
pub fn chp_prices(sol: &ConicSolution, prog: &ConicProgram, system: &SystemHandles, inst: &Instance) -> Result<Prices> {
    let lambda = dual_of(sol, prog, BALANCE)?;
    let t_len = system.horizon;
    let nb = inst.buses.len();
    let mut mu_plus = vec![vec![0.0; t_len]; system.n_lines];
    let mut mu_minus = vec![vec![0.0; t_len]; system.n_lines];
    let mut energy: Vec<Vec<f64>> = lambda.iter().map(|&l| vec![l; nb]).collect();
    if let Some(net) = &inst.network {
        let plus = dual_of(sol, prog, LINE_PLUS)?;
        let minus = dual_of(sol, prog, LINE_MINUS)?;
        for (k, &(l, t)) in system.line_rows.iter().enumerate() {
            mu_plus[l][t] = plus[k];
            mu_minus[l][t] = minus[k];
        }
        for a in &inst.anchors {
            for (id, mu) in &a.congested_line_duals {
                if let Some(l) = net.lines.iter().position(|x| &x.id == id) {
                    if *mu >= 0.0 {
                        mu_plus[l][a.period] = *mu;
                    } else {
                        mu_minus[l][a.period] = -*mu;
                    }
                }
            }
        }
        for t in 0..t_len {
            for n in 0..nb {
                let cong: f64 = (0..system.n_lines).map(|l| net.shift_factors[l][n] * (mu_plus[l][t] - mu_minus[l][t])).sum();
                energy[t][n] = lambda[t] - cong;
            }
        }
    }
    let reserve = if system.has_reserve { Some(dual_of(sol, prog, RESERVE)?) } else { None };
    Ok(Prices { energy, lambda, mu_plus, mu_minus, reserve })
}

/// Relaxed per-unit decisions of a solved pricing model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedUnit {
    pub p: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

/// A solved pricing model.
#[derive(Debug, Clone)]
pub struct ChpSolution {
    pub objective: f64,
    pub prices: Prices,
    /// `None` for units outside the model.
    pub units: Vec<Option<RelaxedUnit>>,
    pub iterations: usize,
}

pub(crate) fn require_optimal(sol: &ConicSolution) -> Result<()> {
    match sol.status {
        Status::Optimal => Ok(()),
        Status::Infeasible => Err(Error::Infeasible("the pricing model has no feasible point".into())),
        status => Err(Error::Solver { status }),
    }
}

/// Builds, solves and prices the primal model in the exact or aCHP1 mode.
pub fn solve_chp(inst: &Instance, mode: HullMode, opts: BuildOptions, settings: &SolverSettings) -> Result<ChpSolution> {
    let (build, handles) = build_chp_primal(inst, mode, opts)?;
    let (prog, sol) = conic::solve_build(&build, settings)?;
    require_optimal(&sol)?;
    let prices = chp_prices(&sol, &prog, &handles.system, inst)?;
    let vals = prog.values(&sol.x);
    let units = handles
        .units
        .iter()
        .map(|uv| {
            uv.as_ref().map(|v| RelaxedUnit {
                p: v.p.iter().map(|x| vals[x.0]).collect(),
                x: v.x.iter().map(|x| vals[x.0]).collect(),
                u: v.u.iter().map(|x| vals[x.0]).collect(),
            })
        })
        .collect();
    Ok(ChpSolution { objective: sol.objective, prices, units, iterations: sol.iterations })
}

/// Optimal dispatch of a fixed commitment.
#[derive(Debug, Clone)]
pub struct FixedDispatch {
    pub objective: f64,
    pub schedule: Schedule,
    /// Duals of the coupling rows with the commitment held fixed.
    pub prices: Prices,
}

/// Solves the dispatch of the commitment `x[g][t]`, with start-ups implied
/// by `x`. Returns `None` when the commitment admits no dispatch. Price
/// anchors are not part of the dispatch problem and are ignored.
pub fn solve_fixed_commitment(inst: &Instance, x: &[Vec<bool>], settings: &SolverSettings) -> Result<Option<FixedDispatch>> {
    let plain;
    let inst = if inst.anchors.is_empty() {
        inst
    } else {
        plain = Instance { anchors: Vec::new(), ..inst.clone() };
        &plain
    };
    let mode = if inst.has_ramping() { HullMode::Achp1 } else { HullMode::Exact };
    let (mut build, handles) = build_chp_primal(inst, mode, BuildOptions::default())?;
    let mut starts = Vec::with_capacity(inst.units.len());
    for (g, unit) in inst.units.iter().enumerate() {
        let vars = handles.units[g].as_ref().expect("all units are modelled");
        let u = startups(unit, &x[g]);
        for t in 0..inst.horizon {
            let (xv, uv) = (x[g][t] as u8 as f64, u[t] as u8 as f64);
            for (var, v) in [(vars.x[t], xv), (vars.u[t], uv)] {
                let (lo, hi) = build.bounds(var);
                if v < lo || v > hi {
                    return Ok(None);
                }
                build.set_bounds(var, v, v);
            }
            if !x[g][t] {
                build.set_bounds(vars.p[t], 0.0, 0.0);
                if let Some(r) = &vars.r {
                    build.set_bounds(r[t], 0.0, 0.0);
                }
                if let Some(s) = vars.s[t] {
                    build.set_bounds(s, 0.0, 0.0);
                }
            }
        }
        starts.push(u);
    }
    let (prog, sol) = conic::solve_build(&build, settings)?;
    if sol.status == Status::Infeasible {
        return Ok(None);
    }
    require_optimal(&sol)?;
    let prices = chp_prices(&sol, &prog, &handles.system, inst)?;
    let vals = prog.values(&sol.x);
    let units = inst
        .units
        .iter()
        .enumerate()
        .zip(starts)
        .map(|((g, _), u)| {
            let v = handles.units[g].as_ref().expect("all units are modelled");
            UnitSchedule {
                x: x[g].clone(),
                u,
                p: v.p.iter().map(|p| vals[p.0].max(0.0)).collect(),
                r: v.r.as_ref().map(|r| r.iter().map(|r| vals[r.0].max(0.0)).collect()),
            }
        })
        .collect();
    Ok(Some(FixedDispatch { objective: sol.objective, schedule: Schedule { units }, prices }))
}
