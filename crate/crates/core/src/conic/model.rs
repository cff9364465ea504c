//! Named modelling layer and its reduction to standard conic form
//! `min c'z  s.t.  A z = b,  z in K`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::cones::Cone;
use super::sparse::CscMatrix;
use crate::error::{Error, Result};

/// Handle to a declared model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

/// Handle to a named constraint group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Affine expression `sum coef * var + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn var(v: Var) -> Self {
        LinExpr { terms: vec![(v, 1.0)], constant: 0.0 }
    }

    pub fn term(mut self, v: Var, coef: f64) -> Self {
        self.terms.push((v, coef));
        self
    }

    pub fn add_term(&mut self, v: Var, coef: f64) {
        self.terms.push((v, coef));
    }

    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) {
        self.terms.extend(other.terms.iter().map(|&(v, c)| (v, c * scale)));
        self.constant += other.constant * scale;
    }

    pub fn scaled(&self, s: f64) -> LinExpr {
        LinExpr { terms: self.terms.iter().map(|&(v, c)| (v, c * s)).collect(), constant: self.constant * s }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct Group {
    pub name: String,
    pub rows: Vec<Row>,
}

/// A model under construction: named variables with bounds, named
/// constraint groups, second-order-cone memberships and a linear objective
/// to minimize.
#[derive(Debug, Clone, Default)]
pub struct ModelBuild {
    pub vars: Vec<VarDecl>,
    pub groups: Vec<Group>,
    /// Each entry `[t, z1, .., zk]` requires `||(z1..zk)|| <= t`.
    pub cones: Vec<Vec<LinExpr>>,
    pub objective: LinExpr,
}

impl ModelBuild {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Var {
        self.vars.push(VarDecl { name: name.into(), lb, ub });
        Var(self.vars.len() - 1)
    }

    pub fn set_bounds(&mut self, v: Var, lb: f64, ub: f64) {
        self.vars[v.0].lb = lb;
        self.vars[v.0].ub = ub;
    }

    pub fn bounds(&self, v: Var) -> (f64, f64) {
        (self.vars[v.0].lb, self.vars[v.0].ub)
    }

    /// Declares a new group. Duplicated names are rejected by
    /// [`standardize`], not here.
    pub fn add_group(&mut self, name: impl Into<String>) -> GroupId {
        self.groups.push(Group { name: name.into(), rows: Vec::new() });
        GroupId(self.groups.len() - 1)
    }

    /// Finds the group with `name`, creating it when absent.
    pub fn group(&mut self, name: &str) -> GroupId {
        match self.groups.iter().position(|g| g.name == name) {
            Some(i) => GroupId(i),
            None => self.add_group(name),
        }
    }

    pub fn add_row(&mut self, g: GroupId, expr: LinExpr, sense: Sense, rhs: f64) -> usize {
        let rows = &mut self.groups[g.0].rows;
        rows.push(Row { expr, sense, rhs });
        rows.len() - 1
    }

    pub fn add_soc(&mut self, members: Vec<LinExpr>) {
        self.cones.push(members);
    }

    pub fn add_objective(&mut self, expr: &LinExpr) {
        self.objective.add_expr(expr, 1.0);
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }
}

/// How a model variable is recovered from the standard-form vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarMap {
    Fixed(f64),
    /// `value = offset + sign * z[col]`
    Std { col: usize, offset: f64, sign: f64 },
}

/// Where a model row landed in the standard form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowMap {
    Std { row: usize, sense: Sense },
    /// All terms were fixed; the row carries no dual information.
    Trivial,
}

/// Standard-form program `min c'z + offset  s.t.  A z = b,  z in K`.
#[derive(Debug, Clone)]
pub struct ConicProgram {
    pub c: Vec<f64>,
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
    pub obj_offset: f64,
    pub var_map: Vec<VarMap>,
    pub var_names: Vec<String>,
    pub groups: Vec<(String, Vec<RowMap>)>,
    group_index: HashMap<String, usize>,
    /// Set when a fully fixed row is violated; the program is infeasible
    /// without solving.
    pub trivially_infeasible: Option<String>,
}

impl ConicProgram {
    pub fn nrows(&self) -> usize {
        self.a.nrows
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols
    }

    pub fn group_rows(&self, name: &str) -> Option<&[RowMap]> {
        self.group_index.get(name).map(|&i| self.groups[i].1.as_slice())
    }

    /// Value of model variable `v` given the standard-form primal `z`.
    pub fn value(&self, z: &[f64], v: Var) -> f64 {
        match self.var_map[v.0] {
            VarMap::Fixed(x) => x,
            VarMap::Std { col, offset, sign } => offset + sign * z[col],
        }
    }

    pub fn values(&self, z: &[f64]) -> Vec<f64> {
        (0..self.var_map.len()).map(|i| self.value(z, Var(i))).collect()
    }

    /// Plain-text dump: `rows cols nnz`, then `i j v` triplets, then the cone
    /// layout (`cones k` followed by `l d` / `q d` lines), then `c j v` and
    /// `b i v` lines for the nonzero objective and right-hand side entries.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.nrows(), self.ncols(), self.a.nnz());
        for (i, j, v) in self.a.triplets() {
            let _ = writeln!(out, "{i} {j} {v:e}");
        }
        let _ = writeln!(out, "cones {}", self.cones.len());
        for c in &self.cones {
            match c {
                Cone::Orthant(d) => {
                    let _ = writeln!(out, "l {d}");
                }
                Cone::Soc(d) => {
                    let _ = writeln!(out, "q {d}");
                }
            }
        }
        for (j, v) in self.c.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            let _ = writeln!(out, "c {j} {v:e}");
        }
        for (i, v) in self.b.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            let _ = writeln!(out, "b {i} {v:e}");
        }
        out
    }
}

/// Lowers a [`ModelBuild`] to a [`ConicProgram`].
///
/// Variables with `lb == ub` are substituted out. Finite lower bounds are
/// shifted to zero, upper-only bounds are mirrored, and two-sided bounds add
/// a slack row. Inequalities receive nonnegative slacks. Every cone
/// membership becomes its own SOC block tied to the expressions by
/// equality rows.
pub fn standardize(build: &ModelBuild) -> Result<ConicProgram> {
    if build.vars.is_empty() {
        return Err(Error::Model("empty model".into()));
    }
    let mut seen = HashMap::new();
    for (gi, g) in build.groups.iter().enumerate() {
        if seen.insert(g.name.clone(), gi).is_some() {
            return Err(Error::Model(format!("duplicate constraint group '{}'", g.name)));
        }
    }
    for (ci, cone) in build.cones.iter().enumerate() {
        if cone.len() < 2 {
            return Err(Error::Model(format!("cone {ci} has dimension {} < 2", cone.len())));
        }
    }
    let nv = build.vars.len();
    let check = |e: &LinExpr| -> Result<()> {
        match e.terms.iter().find(|(v, _)| v.0 >= nv) {
            Some((v, _)) => Err(Error::Model(format!("expression references undeclared variable {}", v.0))),
            None => Ok(()),
        }
    };
    check(&build.objective)?;
    for g in &build.groups {
        for r in &g.rows {
            check(&r.expr)?;
        }
    }
    for cone in &build.cones {
        for e in cone {
            check(e)?;
        }
    }

    // Orthant columns first, SOC blocks appended after.
    let mut var_map = Vec::with_capacity(nv);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new(); // (col, ub - lb)
    for decl in &build.vars {
        let (lb, ub) = (decl.lb, decl.ub);
        if lb.is_nan() || ub.is_nan() || lb > ub {
            return Err(Error::Model(format!("variable '{}' has invalid bounds [{lb}, {ub}]", decl.name)));
        }
        if lb == ub {
            var_map.push(VarMap::Fixed(lb));
        } else if lb.is_finite() {
            var_map.push(VarMap::Std { col: ncols, offset: lb, sign: 1.0 });
            if ub.is_finite() {
                bound_rows.push((ncols, ub - lb));
            }
            ncols += 1;
        } else if ub.is_finite() {
            var_map.push(VarMap::Std { col: ncols, offset: ub, sign: -1.0 });
            ncols += 1;
        } else {
            return Err(Error::Model(format!("free variable '{}' has no representable bound", decl.name)));
        }
    }

    // Substitutes an expression into standard columns: returns (terms, constant).
    let lower = |e: &LinExpr| -> (Vec<(usize, f64)>, f64) {
        let mut constant = e.constant;
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(e.terms.len());
        for &(v, coef) in &e.terms {
            match var_map[v.0] {
                VarMap::Fixed(x) => constant += coef * x,
                VarMap::Std { col, offset, sign } => {
                    constant += coef * offset;
                    terms.push((col, coef * sign));
                }
            }
        }
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        (merged, constant)
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut trivially_infeasible = None;

    for &(col, width) in &bound_rows {
        let row = b.len();
        triplets.push((row, col, 1.0));
        triplets.push((row, ncols, 1.0));
        ncols += 1;
        b.push(width);
    }

    let mut groups = Vec::with_capacity(build.groups.len());
    for g in &build.groups {
        let mut maps = Vec::with_capacity(g.rows.len());
        for (ri, r) in g.rows.iter().enumerate() {
            let (terms, constant) = lower(&r.expr);
            let rhs = r.rhs - constant;
            if terms.is_empty() {
                let ok = match r.sense {
                    Sense::Eq => rhs.abs() <= 1e-9 * (1.0 + r.rhs.abs()),
                    Sense::Le => rhs >= -1e-9 * (1.0 + r.rhs.abs()),
                    Sense::Ge => rhs <= 1e-9 * (1.0 + r.rhs.abs()),
                };
                if !ok && trivially_infeasible.is_none() {
                    trivially_infeasible = Some(format!("{}[{ri}]", g.name));
                }
                maps.push(RowMap::Trivial);
                continue;
            }
            let row = b.len();
            for (c, v) in terms {
                triplets.push((row, c, v));
            }
            match r.sense {
                Sense::Eq => {}
                Sense::Le => {
                    triplets.push((row, ncols, 1.0));
                    ncols += 1;
                }
                Sense::Ge => {
                    triplets.push((row, ncols, -1.0));
                    ncols += 1;
                }
            }
            b.push(rhs);
            maps.push(RowMap::Std { row, sense: r.sense });
        }
        groups.push((g.name.clone(), maps));
    }

    let orthant_dim = ncols;
    let mut cones = Vec::new();
    if orthant_dim > 0 {
        cones.push(Cone::Orthant(orthant_dim));
    }
    for members in &build.cones {
        let dim = members.len();
        let lowered: Vec<_> = members.iter().map(&lower).collect();
        if lowered.iter().all(|(t, _)| t.is_empty()) {
            // a fixed point has no interior; check it here instead
            let head = lowered[0].1;
            let tail = lowered[1..].iter().map(|(_, k)| k * k).sum::<f64>().sqrt();
            if head < tail - 1e-9 * (1.0 + tail) && trivially_infeasible.is_none() {
                trivially_infeasible = Some("fixed cone".into());
            }
            continue;
        }
        for e in members {
            let (terms, constant) = lower(e);
            let row = b.len();
            // w_k - expr = constant
            triplets.push((row, ncols, 1.0));
            for (c, v) in terms {
                triplets.push((row, c, -v));
            }
            b.push(constant);
            ncols += 1;
        }
        cones.push(Cone::Soc(dim));
    }

    let (obj_terms, obj_offset) = lower(&build.objective);
    let mut c = vec![0.0; ncols];
    for (col, v) in obj_terms {
        c[col] += v;
    }
    let a = CscMatrix::from_triplets(b.len(), ncols, &triplets);
    let group_index = groups.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
    Ok(ConicProgram {
        c,
        a,
        b,
        cones,
        obj_offset,
        var_map,
        var_names: build.vars.iter().map(|v| v.name.clone()).collect(),
        groups,
        group_index,
        trivially_infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_is_shifted_to_the_orthant() {
        let mut m = ModelBuild::new();
        let x = m.add_var("x", 1.0, f64::INFINITY);
        m.add_objective(&LinExpr::var(x));
        let p = standardize(&m).unwrap();
        assert_eq!(p.cones, vec![Cone::Orthant(1)]);
        assert_eq!(p.ncols(), 1);
        assert_eq!(p.obj_offset, 1.0);
        assert_eq!(p.value(&[0.0], x), 1.0);
    }

    #[test]
    fn perspective_constraint_becomes_one_soc_block() {
        // ||(2 sqrt(a) p, x - s)|| <= x + s with a = 0.2
        let a: f64 = 0.2;
        let mut m = ModelBuild::new();
        let p = m.add_var("p", 0.0, f64::INFINITY);
        let x = m.add_var("x", 0.0, 1.0);
        let s = m.add_var("s", 0.0, f64::INFINITY);
        m.add_soc(vec![
            LinExpr::var(x).term(s, 1.0),
            LinExpr::new().term(p, 2.0 * a.sqrt()),
            LinExpr::var(x).term(s, -1.0),
        ]);
        let prog = standardize(&m).unwrap();
        let socs: Vec<_> = prog.cones.iter().filter(|c| matches!(c, Cone::Soc(_))).collect();
        assert_eq!(socs, vec![&Cone::Soc(3)]);
    }

    #[test]
    fn duplicate_group_names_are_rejected() {
        let mut m = ModelBuild::new();
        let x = m.add_var("x", 0.0, 1.0);
        let g1 = m.add_group("balance");
        let g2 = m.add_group("balance");
        m.add_row(g1, LinExpr::var(x), Sense::Le, 1.0);
        m.add_row(g2, LinExpr::var(x), Sense::Ge, 0.0);
        assert!(matches!(standardize(&m), Err(Error::Model(_))));
    }

    #[test]
    fn free_variable_is_an_error() {
        let mut m = ModelBuild::new();
        m.add_var("y", f64::NEG_INFINITY, f64::INFINITY);
        assert!(standardize(&m).is_err());
        assert!(standardize(&ModelBuild::new()).is_err());
    }

    #[test]
    fn fixed_rows_are_checked() {
        let mut m = ModelBuild::new();
        let x = m.add_var("x", 2.0, 2.0);
        let g = m.add_group("g");
        m.add_row(g, LinExpr::var(x), Sense::Le, 1.0);
        let p = standardize(&m).unwrap();
        assert!(p.trivially_infeasible.is_some());
    }

    #[test]
    fn dump_lists_header_and_cones() {
        let mut m = ModelBuild::new();
        let x = m.add_var("x", 0.0, 3.0);
        m.add_objective(&LinExpr::var(x));
        let text = standardize(&m).unwrap().dump();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("1 2 2"));
        assert!(text.contains("cones 1\nl 2\n"));
    }
}
