//! Exact vertex enumeration of the relaxed commitment polytope in `(x, u)`.
//!
//! The polytope is homogenized into the cone `{(z, w) : A z <= b w, w >= 0}`
//! whose extreme rays with `w > 0` are the vertices. Rays come from the
//! double description method in exact integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::conic::Sense;
use crate::error::{Error, Result};
use crate::hull::{hull_constraints, HullMode, RowKind, Sym};
use crate::instance::{CostCurve, UnitSpec};

/// Largest horizon accepted by the check.
pub const VERTEX_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexReport {
    pub min_up: usize,
    pub min_down: usize,
    pub horizon: usize,
    pub integral: bool,
    pub vertices: usize,
    /// A fractional vertex, when one exists.
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    /// `u[0]` is fixed at zero.
    pub u: Vec<f64>,
}

/// Enumerates every vertex of the continuous relaxation of the minimum
/// up/down time polytope (no initial status) and reports whether all of them
/// are binary.
pub fn vertex_integrality_check(l_up: usize, l_dn: usize, horizon: usize) -> Result<VertexReport> {
    check(l_up, l_dn, horizon, false)
}

/// The same enumeration on a polytope whose minimum down time rows are
/// replaced by `x_t + x_{t+1} <= 1` and `x_t + x_{t+2} <= 1`. The odd cycles
/// these rows form leave a vertex at one half.
pub fn negative_control_check(horizon: usize) -> Result<VertexReport> {
    check(1, 1, horizon, true)
}

fn check(l_up: usize, l_dn: usize, horizon: usize, control: bool) -> Result<VertexReport> {
    if horizon == 0 || horizon > VERTEX_CAP {
        return Err(Error::Unsupported(format!("vertex enumeration needs 1 <= T <= {VERTEX_CAP}, got {horizon}")));
    }
    if l_up == 0 || l_dn == 0 {
        return Err(Error::invariant("vertex check", "minimum up and down times must be at least 1"));
    }
    let unit = UnitSpec {
        id: "g".into(),
        bus: String::new(),
        p_min: 0.0,
        p_max: 1.0,
        min_up: l_up,
        min_down: l_dn,
        ramp: None,
        startup_ramp: None,
        startup_cost: 0.0,
        no_load_cost: 0.0,
        cost: CostCurve::Quadratic { a: 0.0, b: 0.0 },
        reserve: None,
        initial: None,
    };
    let sys = hull_constraints(&unit, horizon, HullMode::Exact, false)?;
    let t_len = horizon;
    // z = (x_0..x_{T-1}, u_1..u_{T-1}), then w
    let dim = 2 * t_len;
    let col = |s: Sym| -> Option<usize> {
        match s {
            Sym::X(t) => Some(t),
            Sym::U(0) => None,
            Sym::U(t) => Some(t_len + t - 1),
            _ => None,
        }
    };
    let int = |v: f64| -> i128 {
        debug_assert_eq!(v, v.round());
        v.round() as i128
    };
    let mut rows: Vec<Vec<i128>> = Vec::new();
    // `sum c s (sense) rhs` as rows `a . (z, w) >= 0`
    let mut push = |terms: &[(Sym, f64)], sense: Sense, rhs: f64| {
        let mut a = vec![0i128; dim];
        for &(s, c) in terms {
            if let Some(j) = col(s) {
                a[j] += int(c);
            }
        }
        a[dim - 1] -= int(rhs);
        let neg: Vec<i128> = a.iter().map(|v| -v).collect();
        match sense {
            Sense::Ge => rows.push(a),
            Sense::Le => rows.push(neg),
            Sense::Eq => {
                rows.push(a);
                rows.push(neg);
            }
        }
    };
    for r in &sys.rows {
        let keep = match r.kind {
            RowKind::Transition | RowKind::MinUp => true,
            RowKind::MinDown => !control,
            _ => false,
        };
        if keep {
            push(&r.terms, r.sense, r.rhs);
        }
    }
    if control {
        for t in 0..t_len {
            for k in [1, 2] {
                if t + k < t_len {
                    push(&[(Sym::X(t), 1.0), (Sym::X(t + k), 1.0)], Sense::Le, 1.0);
                }
            }
        }
    }
    for &(s, lo, hi) in &sys.bounds {
        if col(s).is_none() {
            continue;
        }
        if lo.is_finite() {
            push(&[(s, 1.0)], Sense::Ge, lo);
        }
        if hi.is_finite() {
            push(&[(s, 1.0)], Sense::Le, hi);
        }
    }
    let mut w = vec![0i128; dim];
    w[dim - 1] = 1;
    rows.push(w);

    let rays = extreme_rays(&rows)?;
    let mut vertices = 0;
    let mut witness = None;
    for r in &rays {
        let w = r[dim - 1];
        if w <= 0 {
            continue;
        }
        vertices += 1;
        let binary = r[..dim - 1].iter().all(|&z| z == 0 || z == w);
        if !binary && witness.is_none() {
            let val = |j: usize| r[j] as f64 / w as f64;
            let mut u = vec![0.0; t_len];
            for (t, slot) in u.iter_mut().enumerate().skip(1) {
                *slot = val(t_len + t - 1);
            }
            witness = Some(Witness { x: (0..t_len).map(val).collect(), u });
        }
    }
    Ok(VertexReport { min_up: l_up, min_down: l_dn, horizon, integral: witness.is_none(), vertices, witness })
}

fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn normalize(v: &mut [i128]) {
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

/// Bareiss determinant of a square integer matrix.
fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else { return 0 };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Rank of an integer matrix by fraction-free elimination.
fn rank(rows: &[&Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| (*r).clone()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                for j in 0..cols {
                    m[i][j] = m[i][j] * a - m[r][j] * b;
                }
                normalize(&mut m[i]);
            }
        }
        r += 1;
    }
    r
}

/// Generator of the one-dimensional kernel of a `(d-1) x d` matrix of full
/// row rank, by signed maximal minors.
fn kernel_vector(m: &[&Vec<i128>], d: usize) -> Vec<i128> {
    let mut v: Vec<i128> = (0..d)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect())
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * det(minor)
        })
        .collect();
    normalize(&mut v);
    v
}

type Bits = u128;

/// Extreme rays of the pointed cone `{y : a_i . y >= 0}`.
pub fn extreme_rays(rows: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    if rows.len() > Bits::BITS as usize {
        return Err(Error::Unsupported(format!("{} inequalities exceed the enumeration limit", rows.len())));
    }
    let d = rows.first().map_or(0, |r| r.len());
    // initial simplicial cone from the first independent rows
    let mut basis: Vec<usize> = Vec::with_capacity(d);
    for i in 0..rows.len() {
        let mut trial: Vec<&Vec<i128>> = basis.iter().map(|&b| &rows[b]).collect();
        trial.push(&rows[i]);
        if rank(&trial) == trial.len() {
            basis.push(i);
            if basis.len() == d {
                break;
            }
        }
    }
    if basis.len() < d {
        return Err(Error::Model("the cone has a lineality space".into()));
    }
    let mut rays: Vec<(Vec<i128>, Bits)> = Vec::with_capacity(d);
    for (k, &i) in basis.iter().enumerate() {
        let others: Vec<&Vec<i128>> = basis.iter().filter(|&&b| b != i).map(|&b| &rows[b]).collect();
        let mut r = kernel_vector(&others, d);
        if dot(&rows[i], &r) < 0 {
            r.iter_mut().for_each(|x| *x = -*x);
        }
        let zeros = basis.iter().enumerate().filter(|&(j, _)| j != k).fold(0, |z, (_, &b)| z | (1 << b));
        rays.push((r, zeros));
    }

    for (i, a) in rows.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        let vals: Vec<i128> = rays.iter().map(|(r, _)| dot(a, r)).collect();
        let mut next: Vec<(Vec<i128>, Bits)> = Vec::with_capacity(rays.len());
        for (k, (r, z)) in rays.iter().enumerate() {
            if vals[k] > 0 {
                next.push((r.clone(), *z));
            } else if vals[k] == 0 {
                next.push((r.clone(), *z | (1 << i)));
            }
        }
        for p in (0..rays.len()).filter(|&k| vals[k] > 0) {
            for n in (0..rays.len()).filter(|&k| vals[k] < 0) {
                let common = rays[p].1 & rays[n].1;
                if (common.count_ones() as usize) + 2 < d {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, (_, z))| k == p || k == n || z & common != common);
                if !adjacent {
                    continue;
                }
                let mut r: Vec<i128> = rays[n].0.iter().zip(&rays[p].0).map(|(&rn, &rp)| vals[p] * rn - vals[n] * rp).collect();
                normalize(&mut r);
                next.push((r, common | (1 << i)));
            }
        }
        rays = next;
    }
    Ok(rays.into_iter().map(|(r, _)| r).collect())
}
