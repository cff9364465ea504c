//! Command-line front end.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::conic::SolverSettings;
use crate::error::{Error, Result};
use crate::hull::{solve_chp, BuildOptions, HullMode};
use crate::instance::{load_instance, parse_anchors, print_instance, synth_instance, Instance, SynthOptions};
use crate::market::{
    chp_report, comparison_table, lmp, price_anchor, prices_csv, single_period_chp, solve_uced, PriceReport, PricingMode, UcedOptions,
};
use crate::oracle::{brute_force_uced, dual_value, extended_chp, negative_control_check, vertex_integrality_check, VERTEX_CAP};

#[derive(Debug, Parser)]
#[command(name = "chp", version, about = "Convex hull pricing for unit commitment markets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for per-unit computations (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Commit, price and settle one scheme.
    Price(RunArgs),
    /// Compare LMP, hull prices and the single-period baseline.
    Compare(RunArgs),
    /// Run the property battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Achp1,
    Extended,
    SinglePeriod,
}

impl From<ModeArg> for PricingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => PricingMode::Exact,
            ModeArg::Achp1 => PricingMode::Achp1,
            ModeArg::Extended => PricingMode::Extended,
            ModeArg::SinglePeriod => PricingMode::SinglePeriod,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Instance document; a seeded synthetic instance is used when absent.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Hull pricing mode; defaults to exact without ramp limits and aCHP1
    /// with them.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 1e-4)]
    pub mipgap: f64,
    /// Solver feasibility and gap tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Pay uplift to qualified units only, optionally overriding the
    /// instance's set with comma-separated unit ids.
    #[arg(long, num_args = 0..=1, default_missing_value = "", value_name = "IDS")]
    pub qualified: Option<String>,
    /// Anchor document `{"first_live": k, "anchors": [...]}`.
    #[arg(long)]
    pub anchors: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Seed of the synthetic instance.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Horizon of the synthetic instance.
    #[arg(long = "T", default_value_t = 12)]
    pub horizon: usize,
    /// Units of the synthetic instance.
    #[arg(long, default_value_t = 6)]
    pub units: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Largest horizon of the sweeps.
    #[arg(long = "T", default_value_t = 6)]
    pub horizon: usize,
    /// First seed of the synthetic sweeps.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of synthetic instances per sweep.
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    /// Also enumerate a polytope with a planted fractional vertex.
    #[arg(long)]
    pub negative_control: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

/// Exit status of a failed command.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Solver { .. } => 3,
        _ => 2,
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let mut out = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Price(a) => cmd_price(a, &mut out).map(|_| 0),
        Command::Compare(a) => cmd_compare(a, &mut out).map(|_| 0),
        Command::Verify(a) => cmd_verify(a, &mut out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load(a: &RunArgs) -> Result<Instance> {
    let mut inst = match &a.instance {
        Some(p) => {
            if !p.exists() {
                return Err(Error::Io {
                    path: p.display().to_string(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                });
            }
            load_instance(p)?
        }
        None => synth_instance(a.seed, a.horizon, a.units, SynthOptions::default()),
    };
    if let Some(ids) = a.qualified.as_deref().filter(|s| !s.is_empty()) {
        let set: BTreeSet<String> = ids.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if let Some(bad) = set.iter().find(|id| !inst.units.iter().any(|u| &u.id == *id)) {
            return Err(Error::invariant("qualified", format!("unknown unit '{bad}'")));
        }
        inst.qualified = set;
    }
    if let Some(path) = &a.anchors {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let (first_live, anchors) = parse_anchors(&text)?;
        inst = price_anchor(&inst, &anchors, first_live)?;
    }
    Ok(inst)
}

fn settings(tol: f64) -> SolverSettings {
    SolverSettings::with_tol(tol)
}

fn default_mode(inst: &Instance, mode: Option<ModeArg>) -> PricingMode {
    match mode {
        Some(m) => m.into(),
        None if inst.has_ramping() => PricingMode::Achp1,
        None => PricingMode::Exact,
    }
}

fn write_outputs<T: Serialize>(a: &RunArgs, json: &T, csv_of: Option<&PriceReport>) -> Result<()> {
    fn io(p: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Io { path: p.display().to_string(), source }
    }
    if let Some(p) = &a.out_json {
        let text = serde_json::to_string_pretty(json).map_err(|e| Error::Model(format!("json output: {e}")))?;
        std::fs::write(p, text + "\n").map_err(io(p))?;
    }
    if let (Some(p), Some(r)) = (&a.out_csv, csv_of) {
        std::fs::write(p, prices_csv(r)?).map_err(io(p))?;
    }
    Ok(())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "stdout".into(), source })
}

pub fn cmd_price(a: &RunArgs, out: &mut dyn Write) -> Result<PriceReport> {
    let inst = load(a)?;
    let s = settings(a.tol);
    let mode = default_mode(&inst, a.mode);
    let uc = solve_uced(&inst, UcedOptions { mipgap: a.mipgap, ..Default::default() }, &s)?;
    let report = chp_report(&inst, mode, a.qualified.is_some(), &uc.schedule, &s)?;
    emit(out, &comparison_table(std::slice::from_ref(&report)))?;
    write_outputs(a, &report, Some(&report))?;
    Ok(report)
}

pub fn cmd_compare(a: &RunArgs, out: &mut dyn Write) -> Result<Vec<PriceReport>> {
    let inst = load(a)?;
    let s = settings(a.tol);
    let uc = solve_uced(&inst, UcedOptions { mipgap: a.mipgap, ..Default::default() }, &s)?;
    let sched = &uc.schedule;
    let mut reports = vec![lmp(&inst, sched, &s)?];
    let modes: Vec<PricingMode> = match a.mode {
        Some(m) => vec![m.into()],
        None if inst.has_ramping() => vec![PricingMode::Achp1, PricingMode::Extended],
        None => vec![PricingMode::Exact],
    };
    for &m in &modes {
        if m != PricingMode::SinglePeriod {
            reports.push(chp_report(&inst, m, false, sched, &s)?);
        }
    }
    let partial = inst.qualified.len() < inst.units.len();
    if a.qualified.is_some() || partial {
        reports.push(chp_report(&inst, modes[0], true, sched, &s)?);
    }
    reports.push(single_period_chp(&inst, sched, &s)?);
    emit(out, &comparison_table(&reports))?;
    write_outputs(a, &reports, reports.get(1))?;
    Ok(reports)
}

/// Outcome of one property of the battery.
#[derive(Debug, Clone, Serialize)]
pub struct Property {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<serde_json::Value>,
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn instance_witness(inst: &Instance, extra: serde_json::Value) -> serde_json::Value {
    let doc: serde_json::Value = serde_json::from_str(&print_instance(inst)).unwrap_or(serde_json::Value::Null);
    serde_json::json!({ "instance": doc, "values": extra })
}

/// Every `(L, l)` in `[1, T-1]^2` for horizons `2..=max_t`.
pub fn vertex_property(max_t: usize) -> Result<Property> {
    let top = max_t.clamp(2, VERTEX_CAP);
    let mut checked = 0;
    for t in 2..=top {
        for l_up in 1..t {
            for l_dn in 1..t {
                let r = vertex_integrality_check(l_up, l_dn, t)?;
                checked += 1;
                if !r.integral {
                    return Ok(Property {
                        name: "vertex integrality".into(),
                        passed: false,
                        detail: format!("fractional vertex at L={l_up} l={l_dn} T={t}"),
                        witness: serde_json::to_value(&r).ok(),
                    });
                }
            }
        }
    }
    Ok(Property {
        name: "vertex integrality".into(),
        passed: true,
        detail: format!("{checked} polytopes, T = 2..{top}"),
        witness: None,
    })
}

pub fn negative_control_property(max_t: usize) -> Result<Property> {
    let t = max_t.clamp(3, VERTEX_CAP);
    let r = negative_control_check(t)?;
    let found = r.witness.is_some();
    let detail = match &r.witness {
        Some(w) => format!("planted fractional vertex found at T={t}: x = {:?}, u = {:?}", w.x, w.u),
        None => format!("no fractional vertex at T={t}"),
    };
    Ok(Property { name: "negative control".into(), passed: found, detail, witness: serde_json::to_value(&r).ok() })
}

fn sweep_instances(seed: u64, count: u64, max_t: usize) -> Vec<(u64, Instance)> {
    let t = max_t.clamp(1, 4);
    (seed..seed + count)
        .map(|k| {
            let opts = SynthOptions { ramping: k % 2 == 0, pwl: k % 3 == 0, network: false };
            (k, synth_instance(k, t, 3, opts))
        })
        .collect()
}

/// The hull, extended and enumeration oracles agree.
pub fn equivalence_property(seed: u64, count: u64, max_t: usize, s: &SolverSettings) -> Result<Property> {
    let name = "oracle equivalence".to_string();
    for (k, inst) in sweep_instances(seed, count, max_t) {
        let ext = extended_chp(&inst, s)?;
        let mode = if inst.has_ramping() { HullMode::Achp1 } else { HullMode::Exact };
        let hull = solve_chp(&inst, mode, BuildOptions::default(), s)?;
        let bf = brute_force_uced(&inst, s)?;
        let bb = solve_uced(&inst, UcedOptions { mipgap: 0.0, ..Default::default() }, s)?;
        let hull_ok = if inst.has_ramping() {
            ext.objective >= hull.objective - 1e-6 * hull.objective.abs().max(1.0)
        } else {
            rel_close(ext.objective, hull.objective, 1e-6)
        };
        let ok = hull_ok && ext.objective <= bf.cost * (1.0 + 1e-7) + 1e-7 && rel_close(bb.cost, bf.cost, 1e-6);
        if !ok {
            return Ok(Property {
                name,
                passed: false,
                detail: format!("seed {k}"),
                witness: Some(instance_witness(
                    &inst,
                    serde_json::json!({"hull": hull.objective, "extended": ext.objective, "brute_force": bf.cost, "branch_and_bound": bb.cost}),
                )),
            });
        }
    }
    Ok(Property { name, passed: true, detail: format!("{count} seeded instances"), witness: None })
}

/// The pricing objective equals the dual function at its prices.
pub fn duality_property(seed: u64, count: u64, max_t: usize, s: &SolverSettings) -> Result<Property> {
    let name = "strong duality".to_string();
    for (k, inst) in sweep_instances(seed, count, max_t) {
        let (obj, prices) = if inst.has_ramping() {
            let e = extended_chp(&inst, s)?;
            (e.objective, e.prices)
        } else {
            let h = solve_chp(&inst, HullMode::Exact, BuildOptions::default(), s)?;
            (h.objective, h.prices)
        };
        let q = dual_value(&inst, &prices, s)?;
        if !rel_close(q, obj, 1e-6) {
            return Ok(Property {
                name,
                passed: false,
                detail: format!("seed {k}: objective {obj} vs q {q}"),
                witness: Some(instance_witness(&inst, serde_json::json!({"objective": obj, "q": q, "prices": prices}))),
            });
        }
    }
    Ok(Property { name, passed: true, detail: format!("{count} seeded instances"), witness: None })
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<u8> {
    let s = settings(a.tol);
    let mut props = vec![vertex_property(a.horizon)?];
    if a.negative_control {
        props.push(negative_control_property(a.horizon)?);
    }
    props.push(equivalence_property(a.seed, a.count, a.horizon, &s)?);
    props.push(duality_property(a.seed, a.count, a.horizon, &s)?);
    let mut failed = false;
    for p in &props {
        emit(out, &format!("{} {}: {}\n", if p.passed { "PASS" } else { "FAIL" }, p.name, p.detail))?;
        if !p.passed {
            failed = true;
            if let Some(w) = &p.witness {
                emit(out, &format!("{}\n", serde_json::to_string_pretty(w).unwrap_or_default()))?;
            }
        }
    }
    Ok(if failed { 1 } else { 0 })
}
