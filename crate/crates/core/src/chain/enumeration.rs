//! Forward-convolution transition builder.
//!
//! For each origin state, every outcome of the frame is pushed forward
//! through the admission rules in [`crate::frame`] and its probability is
//! accumulated on the destination. Arrival counts above what a cell can
//! absorb all lead to the same destination, so they are lumped into one
//! tail mass per stage.

use rayon::prelude::*;

use super::matrix::{Backend, TransitionMatrix};
use super::states::{enumerate_states, StateIndex, SystemState};
use super::{compress_row, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::frame::{admit_home, admit_overflow, offload_capacity};
use crate::kinetics::KineticsTable;
use crate::scenario::{Group, LinkId, ScenarioConfig};

/// Distribution over `(home-group occupancy after admission, group-3
/// occupancy after terminations)` on one cell.
fn cell_stage(
    tab: &KineticsTable,
    home: Group,
    home_link: LinkId,
    g3_link: LinkId,
    capacity: u32,
    home_active: u32,
    g3_active: u32,
) -> Vec<(u32, u32, f64)> {
    let width = g3_active as usize + 1;
    let mut grid = vec![0.0; (capacity as usize + 1) * width];
    let arrivals = tab.arrivals(home, home_active);
    for (th, &pth) in tab.terminations(home_link, home_active).iter().enumerate() {
        if pth == 0.0 {
            continue;
        }
        let h = home_active - th as u32;
        for (tg, &ptg) in tab.terminations(g3_link, g3_active).iter().enumerate() {
            if ptg == 0.0 {
                continue;
            }
            let g = g3_active - tg as u32;
            let free = capacity - h - g;
            let pt = pth * ptg;
            for (s, &ps) in arrivals.iter().enumerate() {
                let adm = admit_home(free, s as u32);
                grid[(h + adm.admitted) as usize * width + g as usize] += pt * ps;
            }
        }
    }
    grid.iter()
        .enumerate()
        .filter(|&(_, &v)| v != 0.0)
        .map(|(pos, &v)| ((pos / width) as u32, (pos % width) as u32, v))
        .collect()
}

fn row_for(
    cfg: &ScenarioConfig,
    tab: &KineticsTable,
    index: &StateIndex,
    n: usize,
    origin: SystemState,
) -> Vec<(u32, f64)> {
    let SystemState { a, b, c, d } = origin;
    let cell1 = cell_stage(tab, Group::One, LinkId::G1Bs1, LinkId::G3Bs1, cfg.m1, a, b);
    let cell2 = cell_stage(tab, Group::Two, LinkId::G2Bs2, LinkId::G3Bs2, cfg.m2, d, c);
    let arrivals3 = tab.arrivals(Group::Three, b + c);
    let mut buf = vec![0.0; n];
    for &(a2, b1, p1) in &cell1 {
        let free1 = cfg.m1 - a2 - b1;
        for &(d2, c1, p2) in &cell2 {
            let room = offload_capacity(cfg.k, cfg.m2, c1, d2);
            let w = p1 * p2;
            for (s, &ps) in arrivals3.iter().enumerate() {
                if ps == 0.0 {
                    continue;
                }
                let g3 = admit_overflow(free1, room, s as u32);
                let dest = SystemState {
                    a: a2,
                    b: b1 + g3.to_cell1,
                    c: c1 + g3.to_cell2,
                    d: d2,
                };
                let j = index
                    .get(&dest)
                    .expect("admission preserves state invariants");
                buf[j] += w * ps;
            }
        }
    }
    compress_row(&buf)
}

/// Build the transition matrix by forward convolution of frame outcomes.
pub fn build_enumeration(cfg: &ScenarioConfig) -> Result<TransitionMatrix> {
    build_enumeration_with_budget(cfg, DEFAULT_STATE_BUDGET)
}

pub fn build_enumeration_with_budget(cfg: &ScenarioConfig, budget: usize) -> Result<TransitionMatrix> {
    cfg.validate()?;
    let states = enumerate_states(cfg);
    if states.len() > budget {
        return Err(Error::Capacity {
            what: "state space",
            needed: states.len() as u64,
            budget: budget as u64,
        });
    }
    let tab = KineticsTable::new(cfg);
    let index = StateIndex::new(cfg, &states);
    let n = states.len();
    let rows: Vec<_> = states
        .par_iter()
        .map(|&s| row_for(cfg, &tab, &index, n, s))
        .collect();
    let m = TransitionMatrix::from_rows(states, Backend::Enumeration, rows)?;
    m.check_stochastic(super::matrix::ROW_SUM_TOL)?;
    Ok(m)
}
