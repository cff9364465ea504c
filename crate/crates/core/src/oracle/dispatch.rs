//! Closed-form single-period economic dispatch over committed units with
//! convex quadratic or piecewise-linear costs.

use crate::instance::CostCurve;

/// A committed unit's output range and cost for one period.
#[derive(Debug, Clone)]
pub struct Offer<'a> {
    pub lo: f64,
    pub hi: f64,
    pub cost: &'a CostCurve,
}

enum Shape {
    /// `p(lambda) = clamp((lambda - b) / 2a, lo, hi)`
    Smooth { a: f64, b: f64 },
    /// Breakpoints `z[0] = lo < .. < z[m] = hi` with slopes `sigma[j]` on
    /// `(z[j], z[j+1])`.
    Steps { z: Vec<f64>, sigma: Vec<f64> },
}

struct Resp {
    lo: f64,
    hi: f64,
    shape: Shape,
}

impl Resp {
    fn new(o: &Offer) -> Self {
        let shape = match *o.cost {
            CostCurve::Quadratic { a, b } if a > 0.0 => Shape::Smooth { a, b },
            CostCurve::Quadratic { b, .. } => Shape::Steps { z: vec![o.lo, o.hi], sigma: vec![b] },
            CostCurve::PiecewiseLinear { ref segments } => {
                let mut z = vec![o.lo];
                let mut sigma = Vec::new();
                if o.hi > o.lo {
                    let active = |p: f64| {
                        let mut best = 0;
                        for (k, (a, b)) in segments.iter().enumerate() {
                            let (ba, bb) = segments[best];
                            if a * p + b > ba * p + bb || (a * p + b == ba * p + bb && *a > ba) {
                                best = k;
                            }
                        }
                        best
                    };
                    let mut k = active(o.lo);
                    loop {
                        let (ak, bk) = segments[k];
                        // the next segment to overtake k
                        let mut next: Option<(f64, usize)> = None;
                        for (j, &(aj, bj)) in segments.iter().enumerate().skip(k + 1) {
                            let x = (bk - bj) / (aj - ak);
                            if x > *z.last().unwrap() && next.is_none_or(|(nx, _)| x < nx) {
                                next = Some((x, j));
                            }
                        }
                        sigma.push(ak);
                        match next {
                            Some((x, j)) if x < o.hi => {
                                z.push(x);
                                k = j;
                            }
                            _ => {
                                z.push(o.hi);
                                break;
                            }
                        }
                    }
                } else {
                    z.push(o.hi);
                    sigma.push(0.0);
                }
                Shape::Steps { z, sigma }
            }
        };
        Resp { lo: o.lo, hi: o.hi, shape }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        if self.hi <= self.lo {
            return;
        }
        match &self.shape {
            Shape::Smooth { a, b } => {
                out.push(b + 2.0 * a * self.lo);
                out.push(b + 2.0 * a * self.hi);
            }
            Shape::Steps { sigma, .. } => out.extend(sigma.iter().copied()),
        }
    }

    /// Smallest and largest cost-minimizing output at price `lambda`.
    fn range(&self, lambda: f64) -> (f64, f64) {
        if self.hi <= self.lo {
            return (self.lo, self.lo);
        }
        match &self.shape {
            Shape::Smooth { a, b } => {
                let p = ((lambda - b) / (2.0 * a)).clamp(self.lo, self.hi);
                (p, p)
            }
            Shape::Steps { z, sigma } => {
                let below = sigma.iter().filter(|&&s| s < lambda).count();
                let upto = sigma.iter().filter(|&&s| s <= lambda).count();
                (z[below], z[upto])
            }
        }
    }

    /// `dp / dlambda` strictly between breakpoints.
    fn slope(&self, l1: f64, l2: f64) -> f64 {
        match &self.shape {
            Shape::Smooth { a, b } if self.hi > self.lo => {
                let (s1, s2) = (b + 2.0 * a * self.lo, b + 2.0 * a * self.hi);
                if l1 >= s1 && l2 <= s2 {
                    1.0 / (2.0 * a)
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }
}

/// Optimal dispatch of `offers` against `demand`: outputs and the marginal
/// price. Returns `None` when the demand is outside the committed range.
/// Among equal-cost dispatches, flexible units are filled in index order.
pub fn economic_dispatch(offers: &[Offer], demand: f64) -> Option<(Vec<f64>, f64)> {
    let lo: f64 = offers.iter().map(|o| o.lo).sum();
    let hi: f64 = offers.iter().map(|o| o.hi).sum();
    let tol = 1e-9 * (1.0 + demand.abs());
    if demand < lo - tol || demand > hi + tol {
        return None;
    }
    let resp: Vec<Resp> = offers.iter().map(Resp::new).collect();
    let mut cands = Vec::new();
    for r in &resp {
        r.breakpoints(&mut cands);
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    if cands.is_empty() {
        // every unit is fixed
        return Some((resp.iter().map(|r| r.lo).collect(), 0.0));
    }
    let sums = |lambda: f64| {
        let mut s = (0.0, 0.0);
        for r in &resp {
            let (a, b) = r.range(lambda);
            s.0 += a;
            s.1 += b;
        }
        s
    };
    let fill = |lambda: f64| -> Vec<f64> {
        let parts: Vec<(f64, f64)> = resp.iter().map(|r| r.range(lambda)).collect();
        let mut rest = demand - parts.iter().map(|p| p.0).sum::<f64>();
        parts
            .iter()
            .map(|&(a, b)| {
                let take = rest.clamp(0.0, b - a);
                rest -= take;
                a + take
            })
            .collect()
    };
    for k in 0..cands.len() {
        let c = cands[k];
        let (s_lo, s_hi) = sums(c);
        if demand <= s_hi + tol && demand >= s_lo - tol {
            return Some((fill(c), c));
        }
        if demand > s_hi && (k + 1 == cands.len() || demand < sums(cands[k + 1]).0) {
            let c2 = cands.get(k + 1).copied().unwrap_or(f64::INFINITY);
            let slope: f64 = resp.iter().map(|r| r.slope(c, c2)).sum();
            if slope <= 0.0 {
                // only reachable through round-off at the last breakpoint
                return Some((fill(c), c));
            }
            let lambda = c + (demand - s_hi) / slope;
            return Some((fill(lambda), lambda));
        }
    }
    let last = *cands.last().unwrap();
    Some((fill(last), last))
}
