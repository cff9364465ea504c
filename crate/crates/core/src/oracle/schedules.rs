//! Enumeration of a unit's feasible commitment schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::InitialStatus;

/// Default cap on the horizon for exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CommitmentSchedule {
    pub x: Vec<bool>,
    /// Start-ups, `u[0]` only with an initial status.
    pub u: Vec<bool>,
}

impl CommitmentSchedule {
    /// Shut-down indicator `w_t = u_t + x_{t-1} - x_t` for `t >= 1`.
    pub fn shutdown(&self, t: usize) -> bool {
        t >= 1 && self.x[t - 1] && !self.x[t]
    }

    pub fn on_periods(&self) -> usize {
        self.x.iter().filter(|&&b| b).count()
    }
}

/// All schedules respecting minimum up time `l_up` and minimum down time
/// `l_dn`, in lexicographic order of `x`.
///
/// A run that starts inside the horizon must last its minimum length unless
/// the horizon ends first. Without an initial status the first run is
/// unconstrained; with one, the first run continues the pre-horizon run.
pub fn enumerate_schedules(l_up: usize, l_dn: usize, horizon: usize, initial: Option<InitialStatus>) -> Result<Vec<CommitmentSchedule>> {
    enumerate_schedules_capped(l_up, l_dn, horizon, initial, ENUMERATION_CAP)
}

pub fn enumerate_schedules_capped(
    l_up: usize,
    l_dn: usize,
    horizon: usize,
    initial: Option<InitialStatus>,
    cap: usize,
) -> Result<Vec<CommitmentSchedule>> {
    if horizon > cap {
        return Err(Error::EnumerationCap(format!(
            "horizon {horizon} exceeds the cap of {cap} (up to 2^{horizon} = {} schedules)",
            1u128 << horizon.min(127)
        )));
    }
    let mut out = Vec::new();
    let mut x = Vec::with_capacity(horizon);
    let start = match initial {
        Some(h) => Run { on: h.on, len: h.duration as usize, free: false },
        None => Run { on: false, len: 0, free: true },
    };
    dfs(l_up, l_dn, horizon, initial, start, true, &mut x, &mut out);
    Ok(out)
}

#[derive(Clone, Copy)]
struct Run {
    on: bool,
    len: usize,
    /// The first run without history has no minimum length.
    free: bool,
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    l_up: usize,
    l_dn: usize,
    horizon: usize,
    initial: Option<InitialStatus>,
    run: Run,
    first: bool,
    x: &mut Vec<bool>,
    out: &mut Vec<CommitmentSchedule>,
) {
    let t = x.len();
    if t == horizon {
        let u = (0..horizon)
            .map(|t| if t == 0 { initial.is_some_and(|h| !h.on) && x[0] } else { x[t] && !x[t - 1] })
            .collect();
        out.push(CommitmentSchedule { x: x.clone(), u });
        return;
    }
    for state in [false, true] {
        let next = if first && initial.is_none() {
            // the first period opens the free run
            Some(Run { on: state, len: 1, free: true })
        } else if state == run.on {
            Some(Run { on: state, len: run.len.saturating_add(1), free: run.free })
        } else {
            let min_len = if run.on { l_up } else { l_dn };
            (run.free || run.len >= min_len).then_some(Run { on: state, len: 1, free: false })
        };
        if let Some(next) = next {
            x.push(state);
            dfs(l_up, l_dn, horizon, initial, next, false, x, out);
            x.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(v: &[CommitmentSchedule]) -> Vec<String> {
        v.iter().map(|s| s.x.iter().map(|&b| if b { '1' } else { '0' }).collect()).collect()
    }

    #[test]
    fn two_periods_give_four_schedules() {
        let s = enumerate_schedules(1, 1, 2, None).unwrap();
        assert_eq!(xs(&s), vec!["00", "01", "10", "11"]);
        assert_eq!(s[1].u, vec![false, true]);
    }

    #[test]
    fn min_up_excludes_short_runs() {
        let s = enumerate_schedules(2, 1, 3, None).unwrap();
        assert!(!xs(&s).contains(&"010".to_string()));
        assert!(xs(&s).contains(&"001".to_string()));
        assert!(xs(&s).contains(&"100".to_string()));
    }

    #[test]
    fn history_continues_the_first_run() {
        let h = InitialStatus { on: true, duration: 1, p: None };
        let s = enumerate_schedules(2, 1, 3, Some(h)).unwrap();
        assert!(xs(&s).iter().all(|x| x.starts_with('1')));
        let off = InitialStatus { on: false, duration: 5, p: None };
        let s = enumerate_schedules(1, 1, 2, Some(off)).unwrap();
        assert_eq!(s[2].u, vec![true, false]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(enumerate_schedules(1, 1, 13, None), Err(Error::EnumerationCap(_))));
    }
}
