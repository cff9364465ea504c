//! Price anchoring of past periods in a rolling market.

use crate::error::{Error, Result};
use crate::instance::{validate, Instance, PriceAnchor};

/// Adds anchors for past periods. Every anchor must fall strictly before
/// `first_live`, and each period takes at most one anchor.
///
/// In the pricing model an anchored period gets a source priced at the
/// anchor price and a sink valued at it, both at the slack bus with
/// capacity `10 * total demand`, and the realized duals of its congested
/// lines enter the objective in place of their limits.
pub fn price_anchor(inst: &Instance, anchors: &[PriceAnchor], first_live: usize) -> Result<Instance> {
    let mut out = inst.clone();
    for a in anchors {
        if a.period >= first_live {
            return Err(Error::invariant(
                "anchors",
                format!("period {} is live (first live period is {})", a.period + 1, first_live + 1),
            ));
        }
        if out.anchors.iter().any(|b| b.period == a.period) {
            return Err(Error::invariant("anchors", format!("period {} is anchored twice", a.period + 1)));
        }
        out.anchors.push(a.clone());
    }
    out.anchors.sort_by_key(|a| a.period);
    validate(&mut out)?;
    Ok(out)
}
