//! Case-dispatched transition probabilities.
//!
//! Each (origin, destination) pair is classified by whether cell 1 ends full,
//! whether group 3 ends saturated (cell 1 full and cell 2 full or holding
//! `K` group-3 connections), and the direction of change of the group-3
//! counts on each cell. Every case is a sum over two group-3 enumerators of
//!
//! `theta * (xi [+ xi tail]) * alpha_cell1 * alpha_cell2`
//!
//! where `theta` is the group-3 termination mass on both cells, `xi` the
//! group-3 arrival mass, and `alpha` the home-group transition on each cell
//! given how many group-3 channels were released there. The four `theta`/`xi`
//! variants differ only in whether each enumerator counts group-3
//! terminations or group-3 admissions on that cell, which keeps every
//! summation range nonnegative.
//!
//! Readings of the printed case table used here:
//! * single-group full case: the overflow sum starts one above the exact
//!   arrival count (the printed lower bound counts that term twice);
//! * the home-group arrival index in the first `alpha` branch is the
//!   enumerator `k`, not `i`;
//! * `b_{t+1}`, `c_{t+1}` in the cell-1-full decreasing cases are `b_{t-1}`,
//!   `c_{t-1}`;
//! * non-edge, cell 1 not full: the "group 3 on cell 1 grows, cell 2
//!   unchanged" case also covers no change on cell 1, and the "both shrink"
//!   case also covers one of them unchanged;
//! * with cell 1 full and cell 2 not saturated, the both-shrink case uses
//!   the double sum (cell 2 may both lose and regain group-3 connections).

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::matrix::{Backend, TransitionMatrix};
use super::states::{enumerate_states, SystemState};
use super::{compress_row, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::kinetics::KineticsTable;
use crate::scenario::{Group, LinkId, ScenarioConfig};

/// Transition case identifiers. `Edge` cases end with group 3 saturated,
/// `Full` cases with cell 1 full but group 3 not saturated, `Open` cases
/// with room on cell 1. The suffix gives how the group-3 counts on the two
/// cells move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseId {
    /// Single group, occupancy falls (not full).
    SingleFalls,
    /// Single group, occupancy rises (not full).
    SingleRises,
    /// Single group, ends full.
    SingleFull,
    EdgeGrow,
    EdgeShrink,
    EdgeShiftToCell2,
    EdgeShiftToCell1,
    /// Structurally impossible: group 3 offloaded while cell 1 has room.
    OpenOffload,
    OpenGrow,
    FullGrow,
    OpenShrink,
    FullShrink,
    FullShiftToCell2,
    OpenShiftToCell1,
    FullShiftToCell1,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseId::SingleFalls => "single-falls",
            CaseId::SingleRises => "single-rises",
            CaseId::SingleFull => "single-full",
            CaseId::EdgeGrow => "edge-grow",
            CaseId::EdgeShrink => "edge-shrink",
            CaseId::EdgeShiftToCell2 => "edge-shift-to-cell2",
            CaseId::EdgeShiftToCell1 => "edge-shift-to-cell1",
            CaseId::OpenOffload => "open-offload",
            CaseId::OpenGrow => "open-grow",
            CaseId::FullGrow => "full-grow",
            CaseId::OpenShrink => "open-shrink",
            CaseId::FullShrink => "full-shrink",
            CaseId::FullShiftToCell2 => "full-shift-to-cell2",
            CaseId::OpenShiftToCell1 => "open-shift-to-cell1",
            CaseId::FullShiftToCell1 => "full-shift-to-cell1",
        };
        f.write_str(s)
    }
}

/// Branch of the home-group `alpha` function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaBranch {
    Decrease,
    Increase,
    FullWithOverflow,
    Infeasible,
}

fn is_single_group(cfg: &ScenarioConfig) -> bool {
    cfg.n[1] == 0 && cfg.n[2] == 0
}

/// Pick the case for a pair of valid states.
pub fn classify(cfg: &ScenarioConfig, o: &SystemState, s: &SystemState) -> Option<CaseId> {
    if is_single_group(cfg) {
        return Some(if s.a == cfg.m1 {
            CaseId::SingleFull
        } else if o.a >= s.a {
            CaseId::SingleFalls
        } else {
            CaseId::SingleRises
        });
    }
    let full1 = s.a + s.b == cfg.m1;
    let full2 = s.c + s.d == cfg.m2;
    let edge = full1 && (full2 || s.c == cfg.k);
    let (b0, c0, b, c) = (o.b, o.c, s.b, s.c);
    let case = if edge {
        if b >= b0 && c >= c0 {
            CaseId::EdgeGrow
        } else if b <= b0 && c <= c0 {
            CaseId::EdgeShrink
        } else if b < b0 && c > c0 {
            CaseId::EdgeShiftToCell2
        } else if b > b0 && c < c0 {
            CaseId::EdgeShiftToCell1
        } else {
            return None;
        }
    } else if !full1 {
        if c > c0 {
            CaseId::OpenOffload
        } else if c == c0 && b >= b0 {
            CaseId::OpenGrow
        } else if b <= b0 && c <= c0 {
            CaseId::OpenShrink
        } else if b > b0 && c < c0 {
            CaseId::OpenShiftToCell1
        } else {
            return None;
        }
    } else if b >= b0 && c >= c0 {
        CaseId::FullGrow
    } else if b <= b0 && c <= c0 {
        CaseId::FullShrink
    } else if b < b0 && c > c0 {
        CaseId::FullShiftToCell2
    } else if b > b0 && c < c0 {
        CaseId::FullShiftToCell1
    } else {
        return None;
    };
    Some(case)
}

/// Evaluator bound to one scenario.
pub struct ClosedForm<'a> {
    cfg: &'a ScenarioConfig,
    tab: KineticsTable,
}

/// Which cell an `alpha` factor describes.
#[derive(Clone, Copy)]
enum Cell {
    One,
    Two,
}

impl<'a> ClosedForm<'a> {
    pub fn new(cfg: &'a ScenarioConfig) -> Self {
        Self {
            cfg,
            tab: KineticsTable::new(cfg),
        }
    }

    pub fn kinetics(&self) -> &KineticsTable {
        &self.tab
    }

    fn home(&self, cell: Cell) -> (Group, LinkId, u32) {
        match cell {
            Cell::One => (Group::One, LinkId::G1Bs1, self.cfg.m1),
            Cell::Two => (Group::Two, LinkId::G2Bs2, self.cfg.m2),
        }
    }

    /// Home-group transition `i0 -> i` on a cell whose group-3 count was `j0`
    /// and lost `z` connections to termination this frame.
    fn alpha_branch(&self, cell: Cell, i0: u32, i: u32, j0: u32, z: i64) -> AlphaBranch {
        let (_, _, cap) = self.home(cell);
        if z < 0 || z > j0 as i64 {
            return AlphaBranch::Infeasible;
        }
        let remaining = j0 - z as u32;
        if i + remaining > cap {
            AlphaBranch::Infeasible
        } else if i + remaining == cap {
            AlphaBranch::FullWithOverflow
        } else if i < i0 {
            AlphaBranch::Decrease
        } else {
            AlphaBranch::Increase
        }
    }

    fn alpha(&self, cell: Cell, i0: u32, i: u32, j0: u32, z: i64) -> f64 {
        let (g, link, _) = self.home(cell);
        let t = |j: i64| self.tab.t(link, i0, j);
        let s = |j: i64| self.tab.s(g, i0, j);
        let (i0, i) = (i0 as i64, i as i64);
        match self.alpha_branch(cell, i0 as u32, i as u32, j0, z) {
            AlphaBranch::Infeasible => 0.0,
            // k new connections, k + i0 - i terminations
            AlphaBranch::Decrease => (0..=i).map(|k| t(k + i0 - i) * s(k)).sum(),
            // k terminations, k + i - i0 new connections
            AlphaBranch::Increase => (0..=i0).map(|k| t(k) * s(k + i - i0)).sum(),
            // exact fill plus every larger arrival count (the surplus is blocked)
            AlphaBranch::FullWithOverflow => (0..=i0)
                .map(|k| t(k) * self.tab.s_tail(g, i0 as u32, k + i - i0))
                .sum(),
        }
    }

    /// Group-3 termination mass for variant `n`.
    fn theta(&self, n: u8, o: &SystemState, s: &SystemState, k: i64, l: i64) -> f64 {
        let (b0, c0, b, c) = (o.b as i64, o.c as i64, s.b as i64, s.c as i64);
        let (tb, tc) = match n {
            1 => (k, l),
            2 => (k + b0 - b, l + c0 - c),
            3 => (k + b0 - b, l),
            _ => (k, l + c0 - c),
        };
        self.tab.t(LinkId::G3Bs1, o.b, tb) * self.tab.t(LinkId::G3Bs2, o.c, tc)
    }

    /// Group-3 arrival count implied by variant `n`.
    fn xi_index(n: u8, o: &SystemState, s: &SystemState, k: i64, l: i64) -> i64 {
        let (b0, c0, b, c) = (o.b as i64, o.c as i64, s.b as i64, s.c as i64);
        match n {
            1 => k + l + b + c - b0 - c0,
            2 => k + l,
            3 => k + l + c - c0,
            _ => k + l + b - b0,
        }
    }

    /// Group-3 terminations on (cell 1, cell 2) implied by variant `n`.
    fn released(n: u8, o: &SystemState, s: &SystemState, k: i64, l: i64) -> (i64, i64) {
        let (b0, c0, b, c) = (o.b as i64, o.c as i64, s.b as i64, s.c as i64);
        match n {
            1 => (k, l),
            2 => (k + b0 - b, l + c0 - c),
            3 => (k + b0 - b, l),
            _ => (k, l + c0 - c),
        }
    }

    fn term(&self, n: u8, o: &SystemState, s: &SystemState, k: i64, l: i64, overflow: bool) -> f64 {
        let th = self.theta(n, o, s, k, l);
        if th == 0.0 {
            return 0.0;
        }
        let active3 = o.b + o.c;
        let x = Self::xi_index(n, o, s, k, l);
        let arrivals = if overflow {
            // xi(k, l) + sum_{r > l} xi(k, r)
            self.tab.s_tail(Group::Three, active3, x)
        } else {
            self.tab.s(Group::Three, active3, x)
        };
        if arrivals == 0.0 {
            return 0.0;
        }
        let (z1, z2) = Self::released(n, o, s, k, l);
        th * arrivals
            * self.alpha(Cell::One, o.a, s.a, o.b, z1)
            * self.alpha(Cell::Two, o.d, s.d, o.c, z2)
    }

    fn double_sum(
        &self,
        n: u8,
        o: &SystemState,
        s: &SystemState,
        k_max: u32,
        l_max: u32,
        overflow: bool,
    ) -> f64 {
        let mut acc = 0.0;
        for k in 0..=k_max as i64 {
            for l in 0..=l_max as i64 {
                acc += self.term(n, o, s, k, l, overflow);
            }
        }
        acc
    }

    fn single_sum(&self, n: u8, o: &SystemState, s: &SystemState, k_max: u32) -> f64 {
        (0..=k_max as i64).map(|k| self.term(n, o, s, k, 0, false)).sum()
    }

    fn single_group(&self, case: CaseId, a0: u32, a: u32) -> f64 {
        let t = |j: i64| self.tab.t(LinkId::G1Bs1, a0, j);
        let sarr = |j: i64| self.tab.s(Group::One, a0, j);
        let (a0, a) = (a0 as i64, a as i64);
        match case {
            CaseId::SingleFalls => (0..=a).map(|i| t(i + a0 - a) * sarr(i)).sum(),
            CaseId::SingleRises => (0..=a).map(|i| t(i) * sarr(i + a - a0)).sum(),
            _ => (0..=a)
                .map(|i| {
                    t(i) * (sarr(i + a - a0)
                        + self.tab.s_tail(Group::One, a0 as u32, i + a - a0 + 1))
                })
                .sum(),
        }
    }

    /// Transition probability `origin -> dest` and the case that produced it.
    pub fn probability(&self, o: &SystemState, s: &SystemState) -> Result<(CaseId, f64)> {
        let case = classify(self.cfg, o, s).ok_or_else(|| Error::Coverage {
            origin: o.to_string(),
            destination: s.to_string(),
        })?;
        let (b0, c0, b, c) = (o.b, o.c, s.b, s.c);
        let v = match case {
            CaseId::SingleFalls | CaseId::SingleRises | CaseId::SingleFull => {
                self.single_group(case, o.a, s.a)
            }
            CaseId::EdgeGrow => self.double_sum(1, o, s, b0, c0, true),
            CaseId::EdgeShrink => self.double_sum(2, o, s, b, c, true),
            CaseId::EdgeShiftToCell2 => self.double_sum(3, o, s, b, c0, true),
            CaseId::EdgeShiftToCell1 => self.double_sum(4, o, s, b0, c, true),
            CaseId::OpenOffload => 0.0,
            CaseId::OpenGrow => self.single_sum(1, o, s, b0),
            CaseId::FullGrow => self.double_sum(1, o, s, b0, c0, false),
            CaseId::OpenShrink => self.single_sum(2, o, s, b),
            CaseId::FullShrink => self.double_sum(2, o, s, b, c0, false),
            CaseId::FullShiftToCell2 => self.double_sum(3, o, s, b, c0, false),
            CaseId::OpenShiftToCell1 => self.single_sum(4, o, s, b0),
            CaseId::FullShiftToCell1 => self.double_sum(4, o, s, b0, c, false),
        };
        Ok((case, v))
    }
}

/// Build the transition matrix from the case table.
pub fn build_closed_form(cfg: &ScenarioConfig) -> Result<TransitionMatrix> {
    build_closed_form_with_budget(cfg, DEFAULT_STATE_BUDGET)
}

pub fn build_closed_form_with_budget(cfg: &ScenarioConfig, budget: usize) -> Result<TransitionMatrix> {
    cfg.validate()?;
    let states = enumerate_states(cfg);
    if states.len() > budget {
        return Err(Error::Capacity {
            what: "state space",
            needed: states.len() as u64,
            budget: budget as u64,
        });
    }
    let eval = ClosedForm::new(cfg);
    let rows = states
        .par_iter()
        .map(|o| {
            let mut buf = vec![0.0; states.len()];
            for (j, s) in states.iter().enumerate() {
                buf[j] = eval.probability(o, s)?.1;
            }
            Ok(compress_row(&buf))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = TransitionMatrix::from_rows(states, Backend::ClosedForm, rows)?;
    m.check_stochastic(1e-6)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Links;

    #[test]
    fn display_matches_serialized_name() {
        use CaseId::*;
        for c in [
            SingleFalls, SingleRises, SingleFull, EdgeGrow, EdgeShrink, EdgeShiftToCell2, EdgeShiftToCell1,
            OpenOffload, OpenGrow, FullGrow, OpenShrink, FullShrink, FullShiftToCell2, OpenShiftToCell1,
            FullShiftToCell1,
        ] {
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{c}\""));
        }
    }

    #[test]
    fn every_pair_is_classified() {
        let cfg = ScenarioConfig {
            n: [3, 3, 4],
            m1: 2,
            m2: 3,
            k: 2,
            l: [2, 2, 3],
            p: [0.5; 3],
            q: 0.3,
            h: 1.0,
            links: Links::uniform(0.9),
        };
        let states = enumerate_states(&cfg);
        for o in &states {
            for s in &states {
                assert!(classify(&cfg, o, s).is_some(), "{o} -> {s}");
            }
        }
    }
}
