use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioConfig;

/// Channel occupancy: `a` group-1 on cell 1, `b` group-3 on cell 1, `c`
/// group-3 on cell 2, `d` group-2 on cell 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SystemState {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl SystemState {
    pub const EMPTY: SystemState = SystemState { a: 0, b: 0, c: 0, d: 0 };

    pub fn new(a: u32, b: u32, c: u32, d: u32) -> Self {
        Self { a, b, c, d }
    }

    pub fn total(&self) -> u32 {
        self.a + self.b + self.c + self.d
    }

    pub fn is_valid(&self, cfg: &ScenarioConfig) -> bool {
        let [n1, n2, n3] = cfg.n;
        let &SystemState { a, b, c, d } = self;
        a + b <= (n1 + n3).min(cfg.m1)
            && c + d <= (n2 + n3).min(cfg.m2)
            && b + c <= n3.min(cfg.m1 + cfg.k)
            && a + b + c + d <= (n1 + n2 + n3).min(cfg.m1 + cfg.m2)
            && a <= n1
            && d <= n2
            && c <= cfg.k
    }
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

/// All admissible states in lexicographic `(a, b, c, d)` order.
pub fn enumerate_states(cfg: &ScenarioConfig) -> Vec<SystemState> {
    let mut out = Vec::new();
    for a in 0..=cfg.n[0].min(cfg.m1) {
        for b in 0..=(cfg.m1 - a).min(cfg.n[2]) {
            for c in 0..=cfg.k.min(cfg.n[2] - b) {
                for d in 0..=(cfg.m2 - c).min(cfg.n[1]) {
                    let s = SystemState { a, b, c, d };
                    if s.is_valid(cfg) {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// O(1) state-to-position lookup over the enumerated order.
#[derive(Debug, Clone)]
pub struct StateIndex {
    dims: [usize; 4],
    slots: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl StateIndex {
    pub fn new(cfg: &ScenarioConfig, states: &[SystemState]) -> Self {
        let dims = [
            cfg.m1 as usize + 1,
            cfg.m1 as usize + 1,
            cfg.k as usize + 1,
            cfg.m2 as usize + 1,
        ];
        let mut slots = vec![ABSENT; dims.iter().product()];
        for (i, s) in states.iter().enumerate() {
            let pos = Self::offset(&dims, s).expect("enumerated state within bounds");
            slots[pos] = i as u32;
        }
        Self { dims, slots }
    }

    fn offset(dims: &[usize; 4], s: &SystemState) -> Option<usize> {
        let (a, b, c, d) = (s.a as usize, s.b as usize, s.c as usize, s.d as usize);
        if a >= dims[0] || b >= dims[1] || c >= dims[2] || d >= dims[3] {
            return None;
        }
        Some(((a * dims[1] + b) * dims[2] + c) * dims[3] + d)
    }

    pub fn get(&self, s: &SystemState) -> Option<usize> {
        Self::offset(&self.dims, s)
            .map(|o| self.slots[o])
            .filter(|&v| v != ABSENT)
            .map(|v| v as usize)
    }
}
