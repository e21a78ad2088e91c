//! Within-frame admission rules and event definitions.
//!
//! A frame resolves in a fixed order: terminations free channels first, then
//! group 1 and group 2 successes take free channels on their home cells, then
//! group 3 successes fill what is left of cell 1 and overflow onto cell 2,
//! where group 3 may hold at most `K` channels. Surplus successes are blocked
//! and discarded. The Markov chain, the blocking metrics and the simulator all
//! go through these functions.

use crate::chain::SystemState;
use crate::scenario::ScenarioConfig;

/// Admission of a home-cell group (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HomeAdmission {
    pub admitted: u32,
    pub blocked: bool,
}

/// Admit `successes` requests into `free` channels of the home cell.
#[inline]
pub fn admit_home(free: u32, successes: u32) -> HomeAdmission {
    HomeAdmission {
        admitted: successes.min(free),
        blocked: successes > free,
    }
}

/// Admission of group 3: `to_cell1` on cell 1, `to_cell2` offloaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverflowAdmission {
    pub to_cell1: u32,
    pub to_cell2: u32,
    pub blocked: bool,
}

/// Channels group 3 may take on cell 2: free channels there, capped so that
/// group 3 holds no more than `k` of them.
#[inline]
pub fn offload_capacity(k: u32, m2: u32, c: u32, d: u32) -> u32 {
    (m2 - c - d).min(k - c)
}

/// Admit group-3 successes given cell-1 free channels and cell-2 offload room.
#[inline]
pub fn admit_overflow(free_cell1: u32, offload_room: u32, successes: u32) -> OverflowAdmission {
    let to_cell1 = successes.min(free_cell1);
    let rest = successes - to_cell1;
    OverflowAdmission {
        to_cell1,
        to_cell2: rest.min(offload_room),
        blocked: rest > offload_room,
    }
}

/// Result of admitting one frame's successful requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub next: SystemState,
    /// Blocking event per group (index 0 = group 1).
    pub blocked: [bool; 3],
}

/// Apply admission to the occupancy left after terminations.
pub fn admit(cfg: &ScenarioConfig, after_terminations: SystemState, successes: [u32; 3]) -> FrameOutcome {
    let SystemState { a, b, c, d } = after_terminations;
    let g1 = admit_home(cfg.m1 - a - b, successes[0]);
    let g2 = admit_home(cfg.m2 - c - d, successes[1]);
    let a = a + g1.admitted;
    let d = d + g2.admitted;
    let g3 = admit_overflow(cfg.m1 - a - b, offload_capacity(cfg.k, cfg.m2, c, d), successes[2]);
    FrameOutcome {
        next: SystemState {
            a,
            b: b + g3.to_cell1,
            c: c + g3.to_cell2,
            d,
        },
        blocked: [g1.blocked, g2.blocked, g3.blocked],
    }
}

/// Collision event for one group in one frame: the uplink was good and at
/// least one request shared its slot with another.
#[inline]
pub fn collided(uplink_good: bool, requesters: u32, successes: u32) -> bool {
    uplink_good && successes < requesters
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Links;

    fn cfg(k: u32) -> ScenarioConfig {
        ScenarioConfig {
            n: [5, 5, 5],
            m1: 3,
            m2: 3,
            k,
            l: [2, 2, 2],
            p: [0.5; 3],
            q: 0.1,
            h: 1.0,
            links: Links::uniform(0.9),
        }
    }

    #[test]
    fn priority_then_overflow() {
        let s = SystemState { a: 1, b: 1, c: 0, d: 1 };
        let out = admit(&cfg(2), s, [1, 1, 3]);
        // group 1 takes the last cell-1 channel; group 3 overflows two onto cell 2
        // but only one fits after group 2 takes its channel.
        assert_eq!(out.next, SystemState { a: 2, b: 1, c: 1, d: 2 });
        assert_eq!(out.blocked, [false, false, true]);
    }

    #[test]
    fn k_caps_offload() {
        let s = SystemState { a: 3, b: 0, c: 1, d: 0 };
        let out = admit(&cfg(1), s, [0, 0, 2]);
        assert_eq!(out.next, s);
        assert_eq!(out.blocked, [false, false, true]);
    }

    #[test]
    fn home_blocking() {
        let s = SystemState { a: 2, b: 1, c: 0, d: 0 };
        let out = admit(&cfg(0), s, [1, 0, 0]);
        assert_eq!(out.blocked, [true, false, false]);
        assert_eq!(out.next, s);
    }

    #[test]
    fn collision_needs_good_uplink() {
        assert!(collided(true, 2, 0));
        assert!(!collided(false, 2, 0));
        assert!(!collided(true, 1, 1));
    }
}
