//! Cone algebra for the nonnegative orthant and second-order cones:
//! Jordan products, Nesterov-Todd scaling and step-length computation.

use serde::{Deserialize, Serialize};

/// One block of the cone layout of a standardized program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    /// `dim` independent nonnegative coordinates.
    Orthant(usize),
    /// `{ (t, z) : t >= ||z|| }` of total dimension `dim`.
    Soc(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Orthant(d) | Cone::Soc(d) => d,
        }
    }

    /// Barrier degree contributed by the block.
    pub fn degree(&self) -> usize {
        match *self {
            Cone::Orthant(d) => d,
            Cone::Soc(_) => 1,
        }
    }
}

/// Iterates `(cone, offset)` over a layout.
pub fn blocks(layout: &[Cone]) -> impl Iterator<Item = (Cone, usize)> + '_ {
    layout.iter().scan(0usize, |off, &c| {
        let start = *off;
        *off += c.dim();
        Some((c, start))
    })
}

pub fn degree(layout: &[Cone]) -> usize {
    layout.iter().map(Cone::degree).sum()
}

/// Writes the identity element of the cone product into `v`.
pub fn set_identity(layout: &[Cone], v: &mut [f64]) {
    for (c, off) in blocks(layout) {
        match c {
            Cone::Orthant(d) => v[off..off + d].iter_mut().for_each(|x| *x = 1.0),
            Cone::Soc(d) => {
                v[off] = 1.0;
                v[off + 1..off + d].iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
}

fn soc_det(v: &[f64]) -> f64 {
    let tail: f64 = v[1..].iter().map(|x| x * x).sum();
    (v[0] - tail.sqrt()) * (v[0] + tail.sqrt())
}

/// Smallest "eigenvalue" of `v` with respect to the cone product: the point
/// lies in the interior iff the result is positive.
pub fn min_eig(layout: &[Cone], v: &[f64]) -> f64 {
    let mut m = f64::INFINITY;
    for (c, off) in blocks(layout) {
        match c {
            Cone::Orthant(d) => {
                for &x in &v[off..off + d] {
                    m = m.min(x);
                }
            }
            Cone::Soc(d) => {
                let tail: f64 = v[off + 1..off + d].iter().map(|x| x * x).sum::<f64>().sqrt();
                m = m.min(v[off] - tail);
            }
        }
    }
    m
}

/// Jordan product `out = a ∘ b`.
pub fn jordan(layout: &[Cone], a: &[f64], b: &[f64], out: &mut [f64]) {
    for (c, off) in blocks(layout) {
        match c {
            Cone::Orthant(d) => {
                for i in off..off + d {
                    out[i] = a[i] * b[i];
                }
            }
            Cone::Soc(d) => {
                let dotab: f64 = (off..off + d).map(|i| a[i] * b[i]).sum();
                for i in off + 1..off + d {
                    out[i] = a[off] * b[i] + b[off] * a[i];
                }
                out[off] = dotab;
            }
        }
    }
}

/// Solves `lambda ∘ out = v` for `out`.
pub fn jordan_div(layout: &[Cone], lambda: &[f64], v: &[f64], out: &mut [f64]) {
    for (c, off) in blocks(layout) {
        match c {
            Cone::Orthant(d) => {
                for i in off..off + d {
                    out[i] = v[i] / lambda[i];
                }
            }
            Cone::Soc(d) => {
                let l0 = lambda[off];
                let rho = soc_det(&lambda[off..off + d]);
                let l1v1: f64 = (off + 1..off + d).map(|i| lambda[i] * v[i]).sum();
                let u0 = (l0 * v[off] - l1v1) / rho;
                for i in off + 1..off + d {
                    out[i] = (v[i] - u0 * lambda[i]) / l0;
                }
                out[off] = u0;
            }
        }
    }
}

/// Largest `alpha <= cap` keeping `v + alpha * dv` inside the cone product.
pub fn max_step(layout: &[Cone], v: &[f64], dv: &[f64], cap: f64) -> f64 {
    let mut alpha = cap;
    for (c, off) in blocks(layout) {
        match c {
            Cone::Orthant(d) => {
                for i in off..off + d {
                    if dv[i] < 0.0 {
                        alpha = alpha.min(-v[i] / dv[i]);
                    }
                }
            }
            Cone::Soc(d) => {
                alpha = alpha.min(soc_step(&v[off..off + d], &dv[off..off + d]));
            }
        }
    }
    alpha.max(0.0)
}

fn soc_step(x: &[f64], d: &[f64]) -> f64 {
    // f(a) = (x0 + a d0)^2 - ||x1 + a d1||^2 = qa a^2 + 2 qb a + qc
    let qa = d[0] * d[0] - d[1..].iter().map(|v| v * v).sum::<f64>();
    let qb = x[0] * d[0] - x[1..].iter().zip(&d[1..]).map(|(a, b)| a * b).sum::<f64>();
    let qc = soc_det(x).max(0.0);
    let mut alpha = f64::INFINITY;
    if d[0] < 0.0 {
        alpha = -x[0] / d[0];
    }
    if qa.abs() < 1e-300 {
        if qb < 0.0 {
            alpha = alpha.min(-qc / (2.0 * qb));
        }
    } else {
        let disc = qb * qb - qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable roots
            let q = -(qb + qb.signum() * sq);
            let r1 = q / qa;
            let r2 = if q != 0.0 { qc / q } else { f64::INFINITY };
            for r in [r1, r2] {
                if r > 0.0 {
                    alpha = alpha.min(r);
                }
            }
        }
    }
    alpha
}

/// Nesterov-Todd scaling `W` with `W x = W^{-1} s = lambda`, stored per block.
#[derive(Debug, Clone)]
pub struct NtScaling {
    /// Orthant blocks: `sqrt(s / x)`; SOC blocks: the normalized scaling
    /// point `w̄` (det 1).
    w: Vec<f64>,
    /// SOC scale factor `eta` per block (1.0 for orthant blocks).
    eta: Vec<f64>,
}

impl NtScaling {
    pub fn new(layout: &[Cone]) -> Self {
        let n: usize = layout.iter().map(Cone::dim).sum();
        NtScaling { w: vec![1.0; n], eta: vec![1.0; layout.len()] }
    }

    /// Recomputes the scaling at the strictly interior pair `(x, s)`.
    pub fn update(&mut self, layout: &[Cone], x: &[f64], s: &[f64]) {
        for (bi, (c, off)) in blocks(layout).enumerate() {
            match c {
                Cone::Orthant(d) => {
                    for i in off..off + d {
                        self.w[i] = (s[i] / x[i]).sqrt();
                    }
                }
                Cone::Soc(d) => {
                    let xb = &x[off..off + d];
                    let sb = &s[off..off + d];
                    let dx = soc_det(xb).max(1e-300).sqrt();
                    let ds = soc_det(sb).max(1e-300).sqrt();
                    let xs: f64 = xb.iter().zip(sb).map(|(a, b)| a * b).sum::<f64>() / (dx * ds);
                    let gamma = ((1.0 + xs) / 2.0).sqrt();
                    // w̄ = (s̄ + J x̄) / (2 gamma)
                    self.w[off] = (sb[0] / ds + xb[0] / dx) / (2.0 * gamma);
                    for i in 1..d {
                        self.w[off + i] = (sb[i] / ds - xb[i] / dx) / (2.0 * gamma);
                    }
                    self.eta[bi] = (ds / dx).sqrt();
                }
            }
        }
    }

    /// `out = W v` (or `W^{-1} v` when `inverse`).
    pub fn apply(&self, layout: &[Cone], v: &[f64], out: &mut [f64], inverse: bool) {
        for (bi, (c, off)) in blocks(layout).enumerate() {
            match c {
                Cone::Orthant(d) => {
                    for i in off..off + d {
                        out[i] = if inverse { v[i] / self.w[i] } else { v[i] * self.w[i] };
                    }
                }
                Cone::Soc(d) => {
                    let w = &self.w[off..off + d];
                    let vb = &v[off..off + d];
                    let sign = if inverse { -1.0 } else { 1.0 };
                    let scale = if inverse { 1.0 / self.eta[bi] } else { self.eta[bi] };
                    let w1v1: f64 = (1..d).map(|i| w[i] * vb[i]).sum();
                    let head = w[0] * vb[0] + sign * w1v1;
                    let coef = sign * vb[0] + w1v1 / (1.0 + w[0]);
                    for i in 1..d {
                        out[off + i] = scale * (vb[i] + coef * w[i]);
                    }
                    out[off] = scale * head;
                }
            }
        }
    }

    /// Dense `W^2` (or `W^{-2}` when `inverse`) restricted to one SOC block,
    /// row-major `d x d`.
    pub fn soc_sq_block(&self, layout: &[Cone], block: usize, inverse: bool) -> Vec<f64> {
        let (c, off) = blocks(layout).nth(block).expect("block index");
        let d = c.dim();
        let mut out = vec![0.0; d * d];
        let single = [c];
        let mut e = vec![0.0; d];
        let mut t1 = vec![0.0; d];
        let mut t2 = vec![0.0; d];
        let sub = NtScaling { w: self.w[off..off + d].to_vec(), eta: vec![self.eta[block]] };
        for k in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[k] = 1.0;
            sub.apply(&single, &e, &mut t1, inverse);
            sub.apply(&single, &t1, &mut t2, inverse);
            for i in 0..d {
                out[i * d + k] = t2[i];
            }
        }
        out
    }

    /// Orthant diagonal of `W^2` at coordinate `i`.
    pub fn orthant_sq(&self, i: usize) -> f64 {
        self.w[i] * self.w[i]
    }
}
