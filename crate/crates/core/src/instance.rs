//! Market instances: units, demand, optional network, reserve, qualification
//! and anchoring data. Documents are JSON; periods are 1-based in documents
//! and 0-based everywhere in code.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostCurve {
    /// `a p^2 + b p` while committed.
    Quadratic { a: f64, b: f64 },
    /// `max_k (a_k p + b_k)` while committed, segments as `[a_k, b_k]`.
    #[serde(alias = "pwl")]
    PiecewiseLinear { segments: Vec<(f64, f64)> },
}

impl CostCurve {
    /// Energy cost of a committed unit at output `p` (no-load cost excluded).
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            CostCurve::Quadratic { a, b } => a * p * p + b * p,
            CostCurve::PiecewiseLinear { segments } => {
                segments.iter().map(|(a, b)| a * p + b).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Output in `[lo, hi]` maximizing `price * p - eval(p)`, ties to the
    /// lowest output.
    pub fn best_response(&self, price: f64, lo: f64, hi: f64) -> f64 {
        match self {
            CostCurve::Quadratic { a, b } => {
                if *a > 0.0 {
                    ((price - b) / (2.0 * a)).clamp(lo, hi)
                } else if price > *b {
                    hi
                } else {
                    lo
                }
            }
            CostCurve::PiecewiseLinear { segments } => {
                // concave profit: the optimum sits at an end or a breakpoint
                let mut cands = vec![lo, hi];
                for w in segments.windows(2) {
                    let (a1, b1) = w[0];
                    let (a2, b2) = w[1];
                    let x = (b1 - b2) / (a2 - a1);
                    if x > lo && x < hi {
                        cands.push(x);
                    }
                }
                cands.sort_by(f64::total_cmp);
                let mut best = lo;
                let mut best_val = price * lo - self.eval(lo);
                for &x in &cands {
                    let v = price * x - self.eval(x);
                    if v > best_val + 1e-12 * (1.0 + best_val.abs()) {
                        best = x;
                        best_val = v;
                    }
                }
                best
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReserveLimits {
    pub min: f64,
    pub max: f64,
}

/// State of a unit before the first period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStatus {
    pub on: bool,
    /// Periods already spent in the current state.
    pub duration: u32,
    /// Output in the period before the horizon, used by ramp limits. An
    /// offline unit is at zero output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl InitialStatus {
    /// Commitment in pre-horizon period `t <= 0` (0 is the last one).
    pub fn x_hist(&self, t: i64) -> f64 {
        let inside = t > -(self.duration as i64);
        match (self.on, inside) {
            (true, true) | (false, false) => 1.0,
            _ => 0.0,
        }
    }

    /// Start-up indicator in pre-horizon period `t <= 0`.
    pub fn u_hist(&self, t: i64) -> f64 {
        if self.on && t == 1 - self.duration as i64 {
            1.0
        } else {
            0.0
        }
    }

    /// Output in period 0, when known.
    pub fn p_prev(&self) -> Option<f64> {
        if self.on {
            self.p
        } else {
            Some(0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSpec {
    pub id: String,
    pub bus: String,
    pub p_min: f64,
    pub p_max: f64,
    pub min_up: usize,
    pub min_down: usize,
    pub ramp: Option<f64>,
    pub startup_ramp: Option<f64>,
    pub startup_cost: f64,
    pub no_load_cost: f64,
    pub cost: CostCurve,
    pub reserve: Option<ReserveLimits>,
    pub initial: Option<InitialStatus>,
}

impl UnitSpec {
    pub fn has_ramping(&self) -> bool {
        self.ramp.is_some()
    }

    /// `(v, v_bar)` when ramp-limited.
    pub fn ramp_limits(&self) -> Option<(f64, f64)> {
        self.ramp.map(|v| (v, self.startup_ramp.unwrap_or(v)))
    }

    /// Cost of one committed period at output `p`.
    pub fn period_cost(&self, p: f64) -> f64 {
        self.no_load_cost + self.cost.eval(p)
    }

    /// Fast-start units have one-period minimum up and down times.
    pub fn is_fast_start(&self) -> bool {
        self.min_up == 1 && self.min_down == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: String,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<String>,
    pub lines: Vec<Line>,
    /// `shift_factors[line][bus]`
    pub shift_factors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceAnchor {
    /// 0-based period.
    pub period: usize,
    /// Realized price at the slack bus.
    pub price: f64,
    /// Realized duals of lines that were congested, `(line id, $/MWh)`.
    pub congested_line_duals: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub horizon: usize,
    pub units: Vec<UnitSpec>,
    /// Bus ids; a single implicit bus when there is no network.
    pub buses: Vec<String>,
    /// `demand[t][bus]`
    pub demand: Vec<Vec<f64>>,
    pub network: Option<Network>,
    pub reserve: Option<Vec<f64>>,
    /// Ids of the units that take part in qualified pricing.
    pub qualified: BTreeSet<String>,
    pub anchors: Vec<PriceAnchor>,
}

impl Instance {
    pub fn total_demand(&self, t: usize) -> f64 {
        self.demand[t].iter().sum()
    }

    pub fn total_demand_vec(&self) -> Vec<f64> {
        (0..self.horizon).map(|t| self.total_demand(t)).collect()
    }

    pub fn has_ramping(&self) -> bool {
        self.units.iter().any(UnitSpec::has_ramping)
    }

    pub fn bus_index(&self, bus: &str) -> usize {
        if self.network.is_none() {
            return 0;
        }
        self.buses.iter().position(|b| b == bus).expect("validated bus")
    }

    pub fn unit_bus_indices(&self) -> Vec<usize> {
        self.units.iter().map(|u| self.bus_index(&u.bus)).collect()
    }

    pub fn is_qualified(&self, g: usize) -> bool {
        self.qualified.contains(&self.units[g].id)
    }

    /// True when the only coupling rows are the energy balances.
    pub fn is_balance_only(&self) -> bool {
        self.network.is_none() && self.reserve.is_none() && self.anchors.is_empty()
    }
}

// ---------------------------------------------------------------------------
// documents

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum IdDoc {
    Num(u64),
    Str(String),
}

impl IdDoc {
    fn into_string(self) -> String {
        match self {
            IdDoc::Num(n) => n.to_string(),
            IdDoc::Str(s) => s,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitDoc {
    id: IdDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bus: Option<IdDoc>,
    p_min: f64,
    p_max: f64,
    #[serde(default = "one")]
    min_up: usize,
    #[serde(default = "one")]
    min_down: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ramp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    startup_ramp: Option<f64>,
    #[serde(default)]
    startup_cost: f64,
    #[serde(default)]
    no_load_cost: f64,
    cost: CostCurve,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reserve: Option<ReserveLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<InitialStatus>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SharesDoc {
    Uniform(Vec<f64>),
    PerPeriod(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    buses: Vec<IdDoc>,
    lines: Vec<LineDoc>,
    shift_factors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bus_demand_share: Option<SharesDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDoc {
    id: IdDoc,
    limit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum DemandDoc {
    Total(Vec<f64>),
    PerBus(BTreeMap<String, Vec<f64>>),
    Csv(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorDoc {
    period: usize,
    price: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    congested_line_duals: Vec<(IdDoc, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(rename = "T")]
    horizon: usize,
    demand: DemandDoc,
    units: Vec<UnitDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    network: Option<NetworkDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reserve: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qualified: Option<Vec<IdDoc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    anchors: Vec<AnchorDoc>,
}

const DEFAULT_BUS: &str = "1";

/// Parses and validates an instance document. A CSV demand path is resolved
/// relative to the working directory.
pub fn parse_instance(doc: &str) -> Result<Instance> {
    parse_instance_in(doc, None)
}

/// Reads an instance file; a CSV demand path inside it is resolved relative
/// to the file's directory.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_instance_in(&text, path.parent())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorFileDoc {
    first_live: usize,
    anchors: Vec<AnchorDoc>,
}

/// Parses an anchor document `{"first_live": k, "anchors": [...]}` with
/// 1-based periods. Returns the 0-based first live period and the anchors.
pub fn parse_anchors(doc: &str) -> Result<(usize, Vec<PriceAnchor>)> {
    let d: AnchorFileDoc = serde_json::from_str(doc)
        .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    if d.first_live == 0 || d.anchors.iter().any(|a| a.period == 0) {
        return Err(Error::invariant("anchors", "periods are 1-based"));
    }
    let anchors = d
        .anchors
        .into_iter()
        .map(|a| PriceAnchor {
            period: a.period - 1,
            price: a.price,
            congested_line_duals: a.congested_line_duals.into_iter().map(|(l, v)| (l.into_string(), v)).collect(),
        })
        .collect();
    Ok((d.first_live - 1, anchors))
}

fn parse_instance_in(doc: &str, base: Option<&Path>) -> Result<Instance> {
    let d: InstanceDoc = serde_json::from_str(doc).map_err(|e| {
        Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    from_doc(d, base)
}

fn from_doc(d: InstanceDoc, base: Option<&Path>) -> Result<Instance> {
    let t_len = d.horizon;
    if t_len == 0 {
        return Err(Error::invariant("T", "horizon must be at least one period"));
    }
    if d.units.is_empty() {
        return Err(Error::invariant("units", "no units"));
    }
    let network = d.network.map(|n| {
        let buses: Vec<String> = n.buses.into_iter().map(IdDoc::into_string).collect();
        let lines = n.lines.into_iter().map(|l| Line { id: l.id.into_string(), limit: l.limit }).collect();
        (Network { buses, lines, shift_factors: n.shift_factors }, n.bus_demand_share)
    });
    let buses: Vec<String> = match &network {
        Some((n, _)) => n.buses.clone(),
        None => vec![DEFAULT_BUS.to_string()],
    };

    let units: Vec<UnitSpec> = d
        .units
        .into_iter()
        .map(|u| UnitSpec {
            id: u.id.into_string(),
            bus: u.bus.map(IdDoc::into_string).unwrap_or_else(|| buses[0].clone()),
            p_min: u.p_min,
            p_max: u.p_max,
            min_up: u.min_up,
            min_down: u.min_down,
            ramp: u.ramp,
            startup_ramp: u.startup_ramp,
            startup_cost: u.startup_cost,
            no_load_cost: u.no_load_cost,
            cost: u.cost,
            reserve: u.reserve,
            initial: u.initial,
        })
        .collect();

    let nb = buses.len();
    let bus_pos: HashMap<&str, usize> = buses.iter().enumerate().map(|(i, b)| (b.as_str(), i)).collect();
    let demand: Vec<Vec<f64>> = match d.demand {
        DemandDoc::Total(v) => {
            if v.len() != t_len {
                return Err(Error::invariant("demand", format!("expected {t_len} periods, got {}", v.len())));
            }
            let shares: Vec<Vec<f64>> = match network.as_ref().and_then(|(_, s)| s.clone()) {
                None => vec![vec![1.0 / nb as f64; nb]; t_len],
                Some(SharesDoc::Uniform(s)) => vec![s; t_len],
                Some(SharesDoc::PerPeriod(s)) => s,
            };
            if shares.len() != t_len || shares.iter().any(|s| s.len() != nb) {
                return Err(Error::invariant("network.bus_demand_share", "expected one share per bus and period"));
            }
            for (t, s) in shares.iter().enumerate() {
                let sum: f64 = s.iter().sum();
                if (sum - 1.0).abs() > 1e-9 || s.iter().any(|&x| x < 0.0) {
                    return Err(Error::invariant(
                        "network.bus_demand_share",
                        format!("shares of period {} must be nonnegative and sum to 1 (sum {sum})", t + 1),
                    ));
                }
            }
            v.iter().zip(&shares).map(|(&dt, s)| s.iter().map(|f| f * dt).collect()).collect()
        }
        DemandDoc::PerBus(map) => {
            let mut out = vec![vec![0.0; nb]; t_len];
            for (bus, v) in map {
                let b = resolve_bus(&bus_pos, &bus, network.is_some())?;
                if v.len() != t_len {
                    return Err(Error::invariant(format!("demand.{bus}"), format!("expected {t_len} periods")));
                }
                for t in 0..t_len {
                    out[t][b] += v[t];
                }
            }
            out
        }
        DemandDoc::Csv(path) => {
            let full = match base {
                Some(dir) => dir.join(&path),
                None => Path::new(&path).to_path_buf(),
            };
            read_demand_csv(&full, t_len, &bus_pos, network.is_some())?
        }
    };

    let qualified: BTreeSet<String> = match d.qualified {
        None => units.iter().map(|u| u.id.clone()).collect(),
        Some(q) => q.into_iter().map(IdDoc::into_string).collect(),
    };
    let mut anchors = Vec::with_capacity(d.anchors.len());
    for a in d.anchors {
        if a.period == 0 {
            return Err(Error::invariant("anchors", "periods are 1-based"));
        }
        anchors.push(PriceAnchor {
            period: a.period - 1,
            price: a.price,
            congested_line_duals: a.congested_line_duals.into_iter().map(|(l, v)| (l.into_string(), v)).collect(),
        });
    }

    let mut inst = Instance {
        horizon: t_len,
        units,
        buses,
        demand,
        network: network.map(|(n, _)| n),
        reserve: d.reserve,
        qualified,
        anchors,
    };
    validate(&mut inst)?;
    Ok(inst)
}

fn resolve_bus(bus_pos: &HashMap<&str, usize>, bus: &str, has_network: bool) -> Result<usize> {
    if !has_network {
        // every bus collapses onto the single system bus
        return Ok(0);
    }
    bus_pos.get(bus).copied().ok_or_else(|| Error::invariant("demand", format!("unknown bus '{bus}'")))
}

fn read_demand_csv(path: &Path, t_len: usize, bus_pos: &HashMap<&str, usize>, has_network: bool) -> Result<Vec<Vec<f64>>> {
    #[derive(Deserialize)]
    struct Rec {
        period: usize,
        bus: String,
        mw: f64,
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = vec![vec![0.0; bus_pos.len().max(1)]; t_len];
    for (i, rec) in rdr.deserialize::<Rec>().enumerate() {
        let rec = rec.map_err(|e| Error::schema(format!("{} record {}", path.display(), i + 1), e.to_string()))?;
        if rec.period == 0 || rec.period > t_len {
            return Err(Error::invariant("demand", format!("period {} outside 1..={t_len}", rec.period)));
        }
        let b = resolve_bus(bus_pos, &rec.bus, has_network)?;
        out[rec.period - 1][b] += rec.mw;
    }
    Ok(out)
}

/// Checks every instance invariant and clamps minimum up/down times that
/// exceed the horizon.
pub fn validate(inst: &mut Instance) -> Result<()> {
    let t_len = inst.horizon;
    if inst.units.is_empty() {
        return Err(Error::invariant("units", "no units"));
    }
    let clamp = t_len.saturating_sub(1).max(1);
    let mut ids = BTreeSet::new();
    for u in &mut inst.units {
        let who = format!("unit {}", u.id);
        if !ids.insert(u.id.clone()) {
            return Err(Error::invariant(who, "duplicate unit id"));
        }
        if !(u.p_min >= 0.0 && u.p_min <= u.p_max && u.p_max.is_finite()) {
            return Err(Error::invariant(who, format!("requires 0 <= p_min <= p_max (got {} > {})", u.p_min, u.p_max)));
        }
        if u.min_up < 1 || u.min_down < 1 {
            return Err(Error::invariant(who, "min_up and min_down must be at least 1"));
        }
        if !(u.startup_cost >= 0.0) || !(u.no_load_cost >= 0.0) {
            return Err(Error::invariant(who, "startup_cost and no_load_cost must be nonnegative"));
        }
        if u.startup_ramp.is_some() && u.ramp.is_none() {
            return Err(Error::invariant(who, "startup_ramp requires ramp"));
        }
        if let Some((v, vb)) = u.ramp_limits() {
            if !(v > 0.0 && vb > 0.0) {
                return Err(Error::invariant(who, "ramp and startup_ramp must be positive"));
            }
        }
        if let Some(r) = u.reserve {
            if !(0.0 <= r.min && r.min <= r.max && r.max <= u.p_max - u.p_min) {
                return Err(Error::invariant(who, "reserve limits require 0 <= min <= max <= p_max - p_min"));
            }
        }
        match &u.cost {
            CostCurve::Quadratic { a, b } => {
                if !(*a >= 0.0) || !b.is_finite() || !a.is_finite() {
                    return Err(Error::invariant(who, "quadratic cost requires finite a >= 0"));
                }
            }
            CostCurve::PiecewiseLinear { segments } => {
                if segments.is_empty() {
                    return Err(Error::invariant(who, "piecewise-linear cost needs at least one segment"));
                }
                if segments.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
                    return Err(Error::invariant(who, "non-finite cost segment"));
                }
                if segments.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::invariant(who, "segment slopes must be strictly increasing"));
                }
            }
        }
        if let Some(init) = &u.initial {
            if init.duration < 1 {
                return Err(Error::invariant(who, "initial duration must be at least 1"));
            }
            if let Some(p) = init.p {
                let ok = if init.on { p >= u.p_min && p <= u.p_max } else { p == 0.0 };
                if !ok {
                    return Err(Error::invariant(who, "initial output inconsistent with initial state"));
                }
            }
        }
        for (name, val) in [("min_up", &mut u.min_up), ("min_down", &mut u.min_down)] {
            if *val > clamp {
                log::warn!("unit {}: {name} {} clamped to {clamp}", u.id, *val);
                *val = clamp;
            }
        }
    }

    if inst.demand.len() != t_len {
        return Err(Error::invariant("demand", format!("expected {t_len} periods")));
    }
    let nb = inst.buses.len();
    for (t, row) in inst.demand.iter().enumerate() {
        if row.len() != nb || row.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::invariant("demand", format!("period {} must be finite and nonnegative per bus", t + 1)));
        }
    }
    if let Some(net) = &inst.network {
        if net.buses.is_empty() {
            return Err(Error::invariant("network", "no buses"));
        }
        let set: BTreeSet<&String> = net.buses.iter().collect();
        if set.len() != net.buses.len() {
            return Err(Error::invariant("network", "duplicate bus id"));
        }
        if net.shift_factors.len() != net.lines.len() {
            return Err(Error::invariant("network", "shift_factors needs one row per line"));
        }
        if net.shift_factors.iter().any(|r| r.len() != net.buses.len() || r.iter().any(|v| !v.is_finite())) {
            return Err(Error::invariant("network", "shift_factors needs one finite column per bus"));
        }
        let mut lids = BTreeSet::new();
        for l in &net.lines {
            if !(l.limit > 0.0) {
                return Err(Error::invariant(format!("line {}", l.id), "limit must be positive"));
            }
            if !lids.insert(&l.id) {
                return Err(Error::invariant(format!("line {}", l.id), "duplicate line id"));
            }
        }
        for u in &inst.units {
            if !set.contains(&u.bus) {
                return Err(Error::invariant(format!("unit {}", u.id), format!("bus '{}' not in network", u.bus)));
            }
        }
    }
    if let Some(r) = &inst.reserve {
        if r.len() != t_len || r.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invariant("reserve", format!("expected {t_len} nonnegative values")));
        }
    }
    for q in &inst.qualified {
        if !ids.contains(q) {
            return Err(Error::invariant("qualified", format!("unknown unit '{q}'")));
        }
    }
    for a in &inst.anchors {
        if a.period >= t_len {
            return Err(Error::invariant("anchors", format!("period {} outside the horizon", a.period + 1)));
        }
        if !a.price.is_finite() || a.congested_line_duals.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::invariant("anchors", "prices must be finite"));
        }
        for (l, _) in &a.congested_line_duals {
            let known = inst.network.as_ref().is_some_and(|n| n.lines.iter().any(|x| &x.id == l));
            if !known {
                return Err(Error::invariant("anchors", format!("unknown line '{l}'")));
            }
        }
    }
    Ok(())
}

fn to_doc(inst: &Instance) -> InstanceDoc {
    let units = inst
        .units
        .iter()
        .map(|u| UnitDoc {
            id: IdDoc::Str(u.id.clone()),
            bus: Some(IdDoc::Str(u.bus.clone())),
            p_min: u.p_min,
            p_max: u.p_max,
            min_up: u.min_up,
            min_down: u.min_down,
            ramp: u.ramp,
            startup_ramp: u.startup_ramp,
            startup_cost: u.startup_cost,
            no_load_cost: u.no_load_cost,
            cost: u.cost.clone(),
            reserve: u.reserve,
            initial: u.initial,
        })
        .collect();
    let demand = match &inst.network {
        None => DemandDoc::Total(inst.demand.iter().map(|r| r[0]).collect()),
        Some(_) => DemandDoc::PerBus(
            inst.buses
                .iter()
                .enumerate()
                .map(|(b, id)| (id.clone(), inst.demand.iter().map(|r| r[b]).collect()))
                .collect(),
        ),
    };
    InstanceDoc {
        horizon: inst.horizon,
        demand,
        units,
        network: inst.network.as_ref().map(|n| NetworkDoc {
            buses: n.buses.iter().cloned().map(IdDoc::Str).collect(),
            lines: n.lines.iter().map(|l| LineDoc { id: IdDoc::Str(l.id.clone()), limit: l.limit }).collect(),
            shift_factors: n.shift_factors.clone(),
            bus_demand_share: None,
        }),
        reserve: inst.reserve.clone(),
        qualified: Some(inst.qualified.iter().cloned().map(IdDoc::Str).collect()),
        anchors: inst
            .anchors
            .iter()
            .map(|a| AnchorDoc {
                period: a.period + 1,
                price: a.price,
                congested_line_duals: a.congested_line_duals.iter().map(|(l, v)| (IdDoc::Str(l.clone()), *v)).collect(),
            })
            .collect(),
    }
}

/// Serializes an instance to a document that [`parse_instance`] reads back
/// to an equal instance.
pub fn print_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(&to_doc(inst)).expect("instance documents always serialize")
}

/// Options for [`synth_instance`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SynthOptions {
    pub ramping: bool,
    pub network: bool,
    pub pwl: bool,
}

/// Deterministic random instance. A random feasible schedule and dispatch are
/// drawn first and demand (and line limits, ramp rates) are set from them, so
/// the instance is feasible by construction. All units start offline.
pub fn synth_instance(seed: u64, horizon: usize, n_units: usize, opts: SynthOptions) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_len = horizon.max(1);
    let n = n_units.max(1);
    let n_bus = if opts.network { 3 } else { 1 };
    let buses: Vec<String> = (1..=n_bus).map(|b| b.to_string()).collect();
    let mut units = Vec::with_capacity(n);
    let mut dispatch = vec![vec![0.0; t_len]; n];
    for (g, disp) in dispatch.iter_mut().enumerate() {
        let p_min = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(5..=40) as f64 };
        let p_max = p_min + rng.random_range(10..=100) as f64;
        let min_up = rng.random_range(1..=3usize).min(t_len.saturating_sub(1).max(1));
        let min_down = rng.random_range(1..=3usize).min(t_len.saturating_sub(1).max(1));
        let b = rng.random_range(10..=60) as f64;
        let cost = if opts.pwl {
            let k = rng.random_range(1..=3usize);
            let mut segs = Vec::with_capacity(k);
            let mut slope = b;
            let mut intercept = rng.random_range(0..=50) as f64;
            segs.push((slope, intercept));
            for j in 1..k {
                // continuous at an interior breakpoint
                let bp = p_min + (p_max - p_min) * j as f64 / k as f64;
                let next = slope + rng.random_range(2..=15) as f64;
                intercept += (slope - next) * bp;
                slope = next;
                segs.push((slope, intercept));
            }
            CostCurve::PiecewiseLinear { segments: segs }
        } else {
            let a = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(1..=50) as f64 / 1000.0 };
            CostCurve::Quadratic { a, b }
        };
        let no_load_cost = rng.random_range(0..=30) as f64 * 10.0;
        let startup_cost = rng.random_range(0..=40) as f64 * 25.0;

        // random commitment walk from a long offline history
        let mut on = false;
        let mut run = 1000usize;
        let mut x = vec![false; t_len];
        for xt in x.iter_mut() {
            let can_switch = if on { run >= min_up } else { run >= min_down };
            if can_switch && rng.random_bool(0.35) {
                on = !on;
                run = 0;
            }
            run += 1;
            *xt = on;
        }
        for t in 0..t_len {
            if x[t] {
                disp[t] = p_min + (p_max - p_min) * rng.random_range(0..=20) as f64 / 20.0;
            }
        }
        let (ramp, startup_ramp) = if opts.ramping {
            let mut need_v: f64 = 1.0;
            let mut need_vb = p_min.max(1.0);
            let mut prev_on = false;
            let mut prev_p = 0.0;
            for t in 0..t_len {
                match (prev_on, x[t]) {
                    (true, true) => need_v = need_v.max((disp[t] - prev_p).abs()),
                    (false, true) => need_vb = need_vb.max(disp[t]),
                    (true, false) => need_vb = need_vb.max(prev_p),
                    _ => {}
                }
                prev_on = x[t];
                prev_p = disp[t];
            }
            let v = need_v.max(rng.random_range(5..=60) as f64);
            let vb = need_vb.max(v).max(rng.random_range(20..=80) as f64);
            (Some(v), Some(vb))
        } else {
            (None, None)
        };
        units.push(UnitSpec {
            id: format!("G{}", g + 1),
            bus: buses[rng.random_range(0..n_bus)].clone(),
            p_min,
            p_max,
            min_up,
            min_down,
            ramp,
            startup_ramp,
            startup_cost,
            no_load_cost,
            cost,
            reserve: None,
            initial: Some(InitialStatus { on: false, duration: 1000, p: None }),
        });
    }
    let totals: Vec<f64> = (0..t_len).map(|t| dispatch.iter().map(|d| d[t]).sum()).collect();
    let mut demand = vec![vec![0.0; n_bus]; t_len];
    for t in 0..t_len {
        let w: Vec<f64> = (0..n_bus).map(|_| rng.random_range(1..=10) as f64).collect();
        let sw: f64 = w.iter().sum();
        for b in 0..n_bus {
            demand[t][b] = totals[t] * w[b] / sw;
        }
    }
    let network = opts.network.then(|| {
        let n_lines = 2;
        let sf: Vec<Vec<f64>> = (0..n_lines)
            .map(|_| (0..n_bus).map(|b| if b == 0 { 0.0 } else { rng.random_range(-8..=8) as f64 / 16.0 }).collect())
            .collect();
        let bus_of: Vec<usize> = units.iter().map(|u| buses.iter().position(|b| *b == u.bus).unwrap()).collect();
        let lines = (0..n_lines)
            .map(|l| {
                let mut worst: f64 = 0.0;
                for t in 0..t_len {
                    let mut inj = demand[t].iter().map(|d| -d).collect::<Vec<_>>();
                    for g in 0..n {
                        inj[bus_of[g]] += dispatch[g][t];
                    }
                    let flow: f64 = (0..n_bus).map(|b| sf[l][b] * inj[b]).sum();
                    worst = worst.max(flow.abs());
                }
                let factor = 1.0 + rng.random_range(0..=10) as f64 / 20.0;
                Line { id: format!("L{}", l + 1), limit: (worst * factor).max(1.0) }
            })
            .collect();
        Network { buses: buses.clone(), lines, shift_factors: sf }
    });
    let qualified = units.iter().map(|u| u.id.clone()).collect();
    Instance { horizon: t_len, units, buses, demand, network, reserve: None, qualified, anchors: Vec::new() }
}

/// `k` copies of every unit with demand and line limits scaled by `k`.
pub fn replicate(inst: &Instance, k: usize) -> Instance {
    assert!(k >= 1, "replication factor must be positive");
    if k == 1 {
        return inst.clone();
    }
    let kf = k as f64;
    let mut units = Vec::with_capacity(inst.units.len() * k);
    let mut qualified = BTreeSet::new();
    for j in 1..=k {
        for u in &inst.units {
            let mut c = u.clone();
            c.id = format!("{}#{j}", u.id);
            if inst.qualified.contains(&u.id) {
                qualified.insert(c.id.clone());
            }
            units.push(c);
        }
    }
    let mut out = inst.clone();
    out.units = units;
    out.qualified = qualified;
    out.demand = inst.demand.iter().map(|r| r.iter().map(|d| d * kf).collect()).collect();
    if let Some(net) = &mut out.network {
        net.lines.iter_mut().for_each(|l| l.limit *= kf);
    }
    if let Some(r) = &mut out.reserve {
        r.iter_mut().for_each(|v| *v *= kf);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{
        "T": 1, "demand": [35],
        "units": [
          {"id": 1, "p_min": 10, "p_max": 50, "startup_cost": 100,
           "cost": {"type": "quadratic", "a": 0, "b": 50}, "initial": {"on": false, "duration": 100}},
          {"id": 2, "p_min": 50, "p_max": 50, "startup_cost": 100,
           "cost": {"type": "quadratic", "a": 0, "b": 10}, "initial": {"on": false, "duration": 100}}
        ]}"#;

    #[test]
    fn parses_two_unit_document() {
        let inst = parse_instance(EX1).unwrap();
        assert_eq!(inst.units.len(), 2);
        assert_eq!(inst.units[0].id, "1");
        assert_eq!(inst.units[1].p_min, 50.0);
        assert_eq!(inst.total_demand(0), 35.0);
        assert_eq!(inst.qualified.len(), 2);
    }

    #[test]
    fn rejects_empty_units_and_bad_limits() {
        let err = parse_instance(r#"{"T": 2, "demand": [1, 1], "units": []}"#).unwrap_err();
        assert!(err.to_string().contains("no units"));
        let bad = EX1.replace(r#""p_min": 10, "p_max": 50"#, r#""p_min": 60, "p_max": 50"#);
        let err = parse_instance(&bad).unwrap_err();
        assert!(matches!(&err, Error::Invariant { subject, .. } if subject == "unit 1"), "{err}");
    }

    #[test]
    fn schema_errors_carry_a_location() {
        let err = parse_instance(r#"{"T": 2, "demand": [1, 1], "units": [{"id": 1}]}"#).unwrap_err();
        match err {
            Error::Schema { location, message } => {
                assert!(location.starts_with("line"));
                assert!(message.contains("p_min"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn min_up_is_clamped() {
        let doc = EX1.replace(r#""T": 1, "demand": [35]"#, r#""T": 3, "demand": [35, 35, 35]"#).replacen(
            r#""startup_cost": 100,"#,
            r#""startup_cost": 100, "min_up": 7,"#,
            1,
        );
        let inst = parse_instance(&doc).unwrap();
        assert_eq!(inst.units[0].min_up, 2);
    }

    #[test]
    fn round_trip_and_determinism() {
        for opts in [
            SynthOptions::default(),
            SynthOptions { ramping: true, network: true, pwl: true },
        ] {
            let a = synth_instance(7, 4, 3, opts);
            assert_eq!(a, synth_instance(7, 4, 3, opts));
            assert_ne!(a, synth_instance(8, 4, 3, opts));
            assert_eq!(parse_instance(&print_instance(&a)).unwrap(), a);
        }
    }

    #[test]
    fn replicate_scales_demand() {
        let inst = parse_instance(EX1).unwrap();
        assert_eq!(replicate(&inst, 1), inst);
        let r = replicate(&inst, 2);
        assert_eq!(r.units.len(), 4);
        assert_eq!(r.total_demand(0), 70.0);
    }

    #[test]
    fn per_bus_demand_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("d.csv"), "period,bus,mw\n1,A,10\n1,B,5\n2,B,7\n").unwrap();
        let doc = r#"{"T": 2, "demand": "d.csv",
          "network": {"buses": ["A", "B"], "lines": [{"id": "L", "limit": 10}], "shift_factors": [[0, 0.5]]},
          "units": [{"id": "g", "bus": "A", "p_min": 0, "p_max": 50, "cost": {"type": "quadratic", "a": 0, "b": 1}}]}"#;
        let path = dir.path().join("inst.json");
        std::fs::write(&path, doc).unwrap();
        let inst = load_instance(&path).unwrap();
        assert_eq!(inst.demand, vec![vec![10.0, 5.0], vec![0.0, 7.0]]);
        assert_eq!(parse_instance(&print_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn history_constants() {
        let on = InitialStatus { on: true, duration: 2, p: Some(5.0) };
        assert_eq!((on.x_hist(0), on.x_hist(-1), on.x_hist(-2)), (1.0, 1.0, 0.0));
        assert_eq!((on.u_hist(-1), on.u_hist(0)), (1.0, 0.0));
        let off = InitialStatus { on: false, duration: 1, p: None };
        assert_eq!((off.x_hist(0), off.x_hist(-1)), (0.0, 1.0));
        assert_eq!(off.p_prev(), Some(0.0));
    }
}
