//! Primal-dual interior-point method on the homogeneous self-dual embedding
//!
//! ```text
//!   A x - b tau = 0,   A'y + s - c tau = 0,   b'y - c'x - kappa = 0,
//!   (x, tau) in K x R+,   (s, kappa) in K* x R+
//! ```
//!
//! with Nesterov-Todd scaling and Mehrotra predictor-corrector steps. Each
//! Newton system is solved in its regularized quasi-definite augmented form
//! with the fixed-pattern sparse LDL' from [`super::ldl`], refined against the
//! unregularized system.

use serde::{Deserialize, Serialize};

use super::ldl::{Factor, Symbolic};
use super::cones::{self, Cone, NtScaling};
use super::model::ConicProgram;
use super::sparse::{dot, norm_inf, CscMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    /// When progress stalls, the best iterate is accepted as optimal if its
    /// residuals are within this looser tolerance.
    pub stall_tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
    pub equilibrate: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-8, stall_tol: 1e-6, max_iter: 200, step_fraction: 0.99, equilibrate: true }
    }
}

impl SolverSettings {
    pub fn with_tol(tol: f64) -> Self {
        SolverSettings { tol, stall_tol: tol.max(1e-6), ..Self::default() }
    }
}

/// Relative residuals of the returned iterate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal_feas: f64,
    pub dual_feas: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal_feas.max(self.dual_feas).max(self.gap)
    }
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: Status,
    /// Standard-form primal vector.
    pub x: Vec<f64>,
    /// One dual per standard-form equality row.
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// Primal objective including the constant offset.
    pub objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

/// Ruiz-equilibrated copy of the program data.
struct Scaled {
    a: CscMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    cost_scale: f64,
    rhs_scale: f64,
}

fn equilibrate(prog: &ConicProgram, enabled: bool) -> Scaled {
    let (m, n) = (prog.nrows(), prog.ncols());
    let mut a = prog.a.clone();
    let mut dr = vec![1.0; m];
    let mut dc = vec![1.0; n];
    if enabled {
        for _ in 0..15 {
            let mut rn = vec![0.0f64; m];
            let mut cn = vec![0.0f64; n];
            for j in 0..n {
                for (i, v) in a.col(j) {
                    rn[i] = rn[i].max(v.abs());
                    cn[j] = cn[j].max(v.abs());
                }
            }
            for (c, off) in cones::blocks(&prog.cones) {
                if let Cone::Soc(d) = c {
                    let mx = cn[off..off + d].iter().copied().fold(0.0, f64::max);
                    cn[off..off + d].iter_mut().for_each(|v| *v = mx);
                }
            }
            let fr: Vec<f64> = rn.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
            let fc: Vec<f64> = cn.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
            for j in 0..n {
                for p in a.colptr[j]..a.colptr[j + 1] {
                    a.vals[p] *= fr[a.rowidx[p]] * fc[j];
                }
            }
            for i in 0..m {
                dr[i] *= fr[i];
            }
            for j in 0..n {
                dc[j] *= fc[j];
            }
        }
    }
    let mut c: Vec<f64> = prog.c.iter().zip(&dc).map(|(c, d)| c * d).collect();
    let mut b: Vec<f64> = prog.b.iter().zip(&dr).map(|(b, d)| b * d).collect();
    let cost_scale = if enabled { 1.0 / norm_inf(&c).max(1.0) } else { 1.0 };
    let rhs_scale = if enabled { 1.0 / norm_inf(&b).max(1.0) } else { 1.0 };
    c.iter_mut().for_each(|v| *v *= cost_scale);
    b.iter_mut().for_each(|v| *v *= rhs_scale);
    Scaled { a, b, c, row_scale: dr, col_scale: dc, cost_scale, rhs_scale }
}

/// Assembly plan and factorization of the regularized augmented system
///
/// ```text
///   [ -W^2 - dp I   A'    ] [dx]   [rx]
///   [  A            dd I  ] [dy] = [ry]
/// ```
///
/// with `W^2` block diagonal. Unknowns `0..n` are `dx`, `n..n+m` are `dy`.
struct Kkt {
    sym: Symbolic,
    factor: Factor,
    signs: Vec<f64>,
    /// `(position in factor, index into the flat W^2 values)`
    plan: Vec<(usize, usize)>,
    x_diag: Vec<usize>,
    y_diag: Vec<usize>,
    /// Offsets of each SOC block's dense `d x d` entries in the flat values.
    soc_offsets: Vec<usize>,
    wvals: Vec<f64>,
}

impl Kkt {
    fn new(a: &CscMatrix, layout: &[Cone]) -> Self {
        let (m, n) = (a.nrows, a.ncols);
        let mut pairs = Vec::new();
        for j in 0..n {
            for (i, _) in a.col(j) {
                pairs.push((n + i, j));
            }
        }
        for (c, off) in cones::blocks(layout) {
            if let Cone::Soc(d) = c {
                for p in off..off + d {
                    for q in off..p {
                        pairs.push((p, q));
                    }
                }
            }
        }
        let sym = Symbolic::analyse(n + m, pairs);
        let factor = Factor::new(&sym);
        let mut plan = Vec::new();
        let mut soc_offsets = Vec::new();
        let mut wlen = n; // orthant diagonal entries indexed by column
        for (c, off) in cones::blocks(layout) {
            match c {
                Cone::Orthant(d) => {
                    for j in off..off + d {
                        plan.push((sym.position(j, j), j));
                    }
                }
                Cone::Soc(d) => {
                    soc_offsets.push(wlen);
                    for p in 0..d {
                        for q in 0..=p {
                            plan.push((sym.position(off + p, off + q), wlen + p * d + q));
                        }
                    }
                    wlen += d * d;
                }
            }
        }
        let signs = (0..n + m).map(|k| if k < n { -1.0 } else { 1.0 }).collect();
        Kkt {
            x_diag: (0..n).map(|j| sym.position(j, j)).collect(),
            y_diag: (0..m).map(|i| sym.position(n + i, n + i)).collect(),
            sym,
            factor,
            signs,
            plan,
            soc_offsets,
            wvals: vec![0.0; wlen],
        }
    }

    fn assemble_and_factor(&mut self, a: &CscMatrix, layout: &[Cone], w: &NtScaling, reg: f64) {
        let n = a.ncols;
        let mut soc_block = 0usize;
        for (bi, (c, off)) in cones::blocks(layout).enumerate() {
            match c {
                Cone::Orthant(d) => {
                    for j in off..off + d {
                        self.wvals[j] = w.orthant_sq(j);
                    }
                }
                Cone::Soc(d) => {
                    let dense = w.soc_sq_block(layout, bi, false);
                    let base = self.soc_offsets[soc_block];
                    self.wvals[base..base + d * d].copy_from_slice(&dense);
                    soc_block += 1;
                }
            }
        }
        // escalate the regularization until every pivot has its expected sign
        let mut reg = reg;
        for attempt in 0..5 {
            let vals = self.factor.values_mut();
            vals.iter_mut().for_each(|v| *v = 0.0);
            for &(pos, wi) in &self.plan {
                vals[pos] -= self.wvals[wi];
            }
            for j in 0..n {
                for (i, v) in a.col(j) {
                    vals[self.sym.position(n + i, j)] += v;
                }
            }
            for &p in &self.x_diag {
                vals[p] -= reg;
            }
            for &p in &self.y_diag {
                vals[p] += reg;
            }
            self.factor.factorize(&self.sym, &self.signs, 1e-14, reg);
            if self.factor.bad_pivots == 0 || attempt == 4 {
                break;
            }
            log::trace!("{} pivots replaced at regularization {reg:.0e}", self.factor.bad_pivots);
            reg *= 100.0;
        }
    }
}

/// `out = W^2 v`
fn apply_sq(layout: &[Cone], w: &NtScaling, v: &[f64], tmp: &mut [f64], out: &mut [f64]) {
    w.apply(layout, v, tmp, false);
    w.apply(layout, tmp, out, false);
}

struct Workspace<'a> {
    a: &'a CscMatrix,
    layout: &'a [Cone],
    kkt: Kkt,
    tmp: Vec<f64>,
}

impl Workspace<'_> {
    /// Solves the unregularized augmented system
    /// `-W^2 dx + A' dy = rx,  A dx = ry` by iterative refinement on the
    /// regularized factor.
    fn kkt_solve(&mut self, w: &NtScaling, rx: &[f64], ry: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (m, n) = (self.a.nrows, self.a.ncols);
        let rhs: Vec<f64> = rx.iter().chain(ry).copied().collect();
        let scale = 1.0 + norm_inf(&rhs);
        let mut sol = rhs.clone();
        self.kkt.factor.solve(&self.kkt.sym, &mut sol);
        let mut res = self.kkt_residual(w, &sol, rx, ry);
        let mut r = norm_inf(&res);
        for _ in 0..REFINE_STEPS {
            if r <= 1e-14 * scale {
                break;
            }
            let mut delta = res.clone();
            self.kkt.factor.solve(&self.kkt.sym, &mut delta);
            let trial: Vec<f64> = sol.iter().zip(&delta).map(|(a, b)| a + b).collect();
            let trial_res = self.kkt_residual(w, &trial, rx, ry);
            let tr = norm_inf(&trial_res);
            if !(tr < r) {
                break;
            }
            let converging = tr < 0.5 * r;
            (sol, res, r) = (trial, trial_res, tr);
            if !converging {
                break;
            }
        }
        let dy = sol.split_off(n);
        debug_assert_eq!(dy.len(), m);
        (sol, dy)
    }

    /// `[rx; ry] - K [dx; dy]` with the unregularized operator.
    fn kkt_residual(&mut self, w: &NtScaling, sol: &[f64], rx: &[f64], ry: &[f64]) -> Vec<f64> {
        let n = self.a.ncols;
        let (dx, dy) = sol.split_at(n);
        let mut w2 = vec![0.0; n];
        apply_sq(self.layout, w, dx, &mut self.tmp, &mut w2);
        let mut res = Vec::with_capacity(sol.len());
        res.extend((0..n).map(|j| rx[j] + w2[j]));
        self.a.gemv_t(-1.0, dy, &mut res[..n]);
        res.extend_from_slice(ry);
        self.a.gemv(-1.0, dx, &mut res[n..]);
        res
    }
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Static regularization of the augmented system (scaled data).
const KKT_REG: f64 = 1e-8;
const REFINE_STEPS: usize = 10;

/// Solves the standardized program. An equilibrated run that stalls is
/// retried on the unscaled data, which copes better with near-zero
/// objectives.
pub fn solve(prog: &ConicProgram, settings: &SolverSettings) -> ConicSolution {
    let sol = solve_once(prog, settings);
    if settings.equilibrate && matches!(sol.status, Status::Numerical | Status::MaxIter) {
        log::debug!("retrying without equilibration after {:?}", sol.status);
        let retry = solve_once(prog, &SolverSettings { equilibrate: false, ..*settings });
        if retry.status != Status::Numerical && retry.status != Status::MaxIter || retry.residuals.max() < sol.residuals.max() {
            return retry;
        }
    }
    sol
}

fn solve_once(prog: &ConicProgram, settings: &SolverSettings) -> ConicSolution {
    let (m, n) = (prog.nrows(), prog.ncols());
    if let Some(row) = &prog.trivially_infeasible {
        log::debug!("fixed row {row} violated; infeasible without solving");
        return ConicSolution {
            status: Status::Infeasible,
            x: vec![0.0; n],
            y: vec![0.0; m],
            s: vec![0.0; n],
            objective: f64::NAN,
            dual_objective: f64::NAN,
            residuals: Residuals::default(),
            iterations: 0,
        };
    }
    let sc = equilibrate(prog, settings.equilibrate);
    let layout = &prog.cones;
    let nu = cones::degree(layout) as f64;
    let mut ws = Workspace { a: &sc.a, layout, kkt: Kkt::new(&sc.a, layout), tmp: vec![0.0; n] };
    let mut w = NtScaling::new(layout);

    // Initial point from least-squares estimates shifted into the cone.
    let mut x;
    let mut s = vec![0.0; n];
    let mut y;
    {
        set_identity_scaling(layout, &mut w, n);
        ws.kkt.assemble_and_factor(&sc.a, layout, &w, 1e-8);
        // min ||x|| s.t. Ax = b, and the least-squares dual estimate
        let zeros_n = vec![0.0; n];
        let zeros_m = vec![0.0; m];
        x = ws.kkt_solve(&w, &zeros_n, &sc.b).0;
        y = ws.kkt_solve(&w, &sc.c, &zeros_m).1;
        s.copy_from_slice(&sc.c);
        sc.a.gemv_t(-1.0, &y, &mut s);
        let mut e = vec![0.0; n];
        cones::set_identity(layout, &mut e);
        for v in [&mut x, &mut s] {
            let shift = 1.0 + (-cones::min_eig(layout, v)).max(0.0);
            for i in 0..n {
                v[i] += shift * e[i];
            }
        }
    }
    let mut tau = 1.0f64;
    let mut kappa = 1.0f64;

    let mut e = vec![0.0; n];
    cones::set_identity(layout, &mut e);
    let mut lambda = vec![0.0; n];
    let mut status = Status::MaxIter;
    let mut iterations = 0;
    let mut residuals = Residuals::default();
    let mut stalls = 0;

    let unscaled = |x: &[f64], y: &[f64], s: &[f64], tau: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let xu: Vec<f64> = (0..n).map(|j| sc.col_scale[j] * x[j] / (sc.rhs_scale * tau)).collect();
        let yu: Vec<f64> = (0..m).map(|i| sc.row_scale[i] * y[i] / (sc.cost_scale * tau)).collect();
        let su: Vec<f64> = (0..n).map(|j| s[j] / (sc.col_scale[j] * sc.cost_scale * tau)).collect();
        (xu, yu, su)
    };
    let bnorm = norm_inf(&prog.b);
    let cnorm = norm_inf(&prog.c);

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, Residuals)> = None;

    for iter in 0..=settings.max_iter {
        iterations = iter;
        // termination on the original problem data
        let (xu, yu, su) = unscaled(&x, &y, &s, tau);
        let mut rp = prog.b.clone();
        prog.a.gemv(-1.0, &xu, &mut rp);
        let mut rd: Vec<f64> = prog.c.iter().zip(&su).map(|(c, s)| s - c).collect();
        prog.a.gemv_t(1.0, &yu, &mut rd);
        let pobj = dot(&prog.c, &xu);
        let dobj = dot(&prog.b, &yu);
        residuals = Residuals {
            primal_feas: norm_inf(&rp) / (1.0 + bnorm),
            dual_feas: norm_inf(&rd) / (1.0 + cnorm),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        };
        log::trace!(
            "iter {iter}: pobj {pobj:.9e} dobj {dobj:.9e} pres {:.2e} dres {:.2e} gap {:.2e} tau {tau:.2e} kappa {kappa:.2e}",
            residuals.primal_feas,
            residuals.dual_feas,
            residuals.gap
        );
        if best.as_ref().is_none_or(|b| residuals.max() < b.4.max()) {
            best = Some((tau, x.clone(), y.clone(), s.clone(), residuals));
        }
        if residuals.max() <= settings.tol {
            status = Status::Optimal;
            break;
        }
        if tau < 1e-2 * kappa {
            let yr: Vec<f64> = (0..m).map(|i| sc.row_scale[i] * y[i]).collect();
            let sr: Vec<f64> = (0..n).map(|j| s[j] / sc.col_scale[j]).collect();
            let by = dot(&prog.b, &yr);
            if by > 0.0 {
                let mut r = sr.clone();
                prog.a.gemv_t(1.0, &yr, &mut r);
                if norm_inf(&r) <= settings.tol * by {
                    status = Status::Infeasible;
                    break;
                }
            }
            let xr: Vec<f64> = (0..n).map(|j| sc.col_scale[j] * x[j]).collect();
            let cx = dot(&prog.c, &xr);
            if cx < 0.0 {
                let ax = prog.a.mul(&xr);
                if norm_inf(&ax) <= settings.tol * -cx {
                    status = Status::Unbounded;
                    break;
                }
            }
        }
        if iter == settings.max_iter {
            break;
        }

        // scaled residuals of the embedding
        let mut rp = sc.b.iter().map(|b| b * tau).collect::<Vec<_>>();
        sc.a.gemv(-1.0, &x, &mut rp);
        let mut rd: Vec<f64> = (0..n).map(|j| sc.c[j] * tau - s[j]).collect();
        sc.a.gemv_t(-1.0, &y, &mut rd);
        let rg = kappa + dot(&sc.c, &x) - dot(&sc.b, &y);
        let mu = (dot(&x, &s) + tau * kappa) / (nu + 1.0);

        w.update(layout, &x, &s);
        w.apply(layout, &x, &mut lambda, false);
        ws.kkt.assemble_and_factor(&sc.a, layout, &w, KKT_REG);

        // the tau-column of the reduced system
        let (dx2, dy2) = ws.kkt_solve(&w, &sc.c, &sc.b);
        let denom = -dot(&sc.c, &dx2) + dot(&sc.b, &dy2);

        let direction = |eta: f64, xi: &[f64], zeta: f64, ws: &mut Workspace| -> Direction {
            // rx = eta rd - W xi,  ry = eta rp
            let mut rx = vec![0.0; n];
            w.apply(layout, xi, &mut rx, false);
            for j in 0..n {
                rx[j] = eta * rd[j] - rx[j];
            }
            let ry: Vec<f64> = rp.iter().map(|v| eta * v).collect();
            let (dx1, dy1) = ws.kkt_solve(&w, &rx, &ry);
            let dtau = (eta * rg + zeta / tau + dot(&sc.c, &dx1) - dot(&sc.b, &dy1)) / (denom + kappa / tau);
            let dx: Vec<f64> = (0..n).map(|j| dx1[j] + dtau * dx2[j]).collect();
            let dy: Vec<f64> = (0..m).map(|i| dy1[i] + dtau * dy2[i]).collect();
            let mut ds: Vec<f64> = (0..n).map(|j| eta * rd[j] + sc.c[j] * dtau).collect();
            sc.a.gemv_t(-1.0, &dy, &mut ds);
            let dkappa = (zeta - kappa * dtau) / tau;
            Direction { dx, dy, ds, dtau, dkappa }
        };
        let step = |d: &Direction, cap: f64| -> f64 {
            let mut a = cones::max_step(layout, &x, &d.dx, cap);
            a = a.min(cones::max_step(layout, &s, &d.ds, cap));
            if d.dtau < 0.0 {
                a = a.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-kappa / d.dkappa);
            }
            a
        };

        // predictor
        let xi_aff: Vec<f64> = lambda.iter().map(|v| -v).collect();
        let aff = direction(1.0, &xi_aff, -tau * kappa, &mut ws);
        let alpha_aff = step(&aff, 1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // corrector
        let mut wdx = vec![0.0; n];
        let mut winv_ds = vec![0.0; n];
        w.apply(layout, &aff.dx, &mut wdx, false);
        w.apply(layout, &aff.ds, &mut winv_ds, true);
        let mut corr = vec![0.0; n];
        cones::jordan(layout, &winv_ds, &wdx, &mut corr);
        let mut ll = vec![0.0; n];
        cones::jordan(layout, &lambda, &lambda, &mut ll);
        let target: Vec<f64> = (0..n).map(|j| sigma * mu * e[j] - ll[j] - corr[j]).collect();
        let mut xi = vec![0.0; n];
        cones::jordan_div(layout, &lambda, &target, &mut xi);
        let zeta = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
        let dir = direction(1.0 - sigma, &xi, zeta, &mut ws);
        let alpha = (settings.step_fraction * step(&dir, f64::INFINITY)).min(1.0);
        if log::log_enabled!(log::Level::Trace) {
            let mut chk: Vec<f64> = sc.b.iter().map(|b| -b * dir.dtau).collect();
            sc.a.gemv(1.0, &dir.dx, &mut chk);
            for i in 0..m {
                chk[i] -= (1.0 - sigma) * rp[i];
            }
            log::trace!("newton residual {:.2e} (rp {:.2e}) alpha {alpha:.3} sigma {sigma:.2e}", norm_inf(&chk), norm_inf(&rp));
        }

        if !(alpha > 1e-12) || dir.dx.iter().any(|v| !v.is_finite()) {
            stalls += 1;
            if stalls > 3 || dir.dx.iter().any(|v| !v.is_finite()) {
                status = Status::Numerical;
                break;
            }
        }
        for j in 0..n {
            x[j] += alpha * dir.dx[j];
            s[j] += alpha * dir.ds[j];
        }
        for i in 0..m {
            y[i] += alpha * dir.dy[i];
        }
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        // rescale the embedding to keep tau and kappa in a sane range
        let norm = tau.max(kappa);
        if !(1e-6..=1e6).contains(&norm) {
            x.iter_mut().for_each(|v| *v /= norm);
            s.iter_mut().for_each(|v| *v /= norm);
            y.iter_mut().for_each(|v| *v /= norm);
            tau /= norm;
            kappa /= norm;
        }
    }

    if matches!(status, Status::Numerical | Status::MaxIter) {
        if let Some((bt, bx, by, bs, br)) = best {
            if br.max() <= settings.stall_tol {
                log::debug!("stalled; accepting the best iterate with residual {:.2e}", br.max());
                (tau, x, y, s, residuals) = (bt, bx, by, bs, br);
                status = Status::Optimal;
            }
        }
    }
    let (xu, yu, su) = match status {
        Status::Infeasible | Status::Unbounded => unscaled(&x, &y, &s, 1.0),
        _ => unscaled(&x, &y, &s, tau),
    };
    let objective = dot(&prog.c, &xu) + prog.obj_offset;
    let dual_objective = dot(&prog.b, &yu) + prog.obj_offset;
    ConicSolution { status, x: xu, y: yu, s: su, objective, dual_objective, residuals, iterations }
}

fn set_identity_scaling(layout: &[Cone], w: &mut NtScaling, n: usize) {
    let e = {
        let mut e = vec![0.0; n];
        cones::set_identity(layout, &mut e);
        e
    };
    w.update(layout, &e, &e);
}
