//! Named sweeps reproducing the published figures.

use super::engine::{AnalyticalSettings, Engine, SimSettings};
use super::sweep::{Axis, SweepSpec};
use crate::error::{Error, Result};
use crate::radio::{link_quality, RadioParams};
use crate::scenario::{derive_q, Group, Links, ScenarioConfig};

pub const NAMES: [&str; 7] = ["fig2", "fig3", "fig4", "fig5a", "fig5b", "fig6", "fig7"];

/// Two small identical cells: six UEs and six access slots per group, three
/// channels per cell, every link at 0.806, mean transfer of 31.25 frames.
pub fn small_cells() -> ScenarioConfig {
    ScenarioConfig {
        n: [6, 6, 6],
        m1: 3,
        m2: 3,
        k: 3,
        l: [6, 6, 6],
        p: [0.4; 3],
        q: 0.032,
        h: 250_000.0,
        links: Links::uniform(0.806),
    }
}

/// Small cells with three access slots for groups 1 and 2.
pub fn small_cells_short_access() -> ScenarioConfig {
    ScenarioConfig {
        l: [3, 3, 6],
        ..small_cells()
    }
}

/// Macrocell pair: 25/25/40 UEs, ten channels per cell, every UE 220 m
/// from its base station with path-loss exponent 3, 1 kB transfers over
/// 250 kbit/s channels in 1 ms frames.
pub fn macrocell() -> ScenarioConfig {
    let w = link_quality(&RadioParams::reference(3.0, 220.0)).expect("reference radio parameters are valid");
    ScenarioConfig {
        n: [25, 25, 40],
        m1: 10,
        m2: 10,
        k: 0,
        l: [25, 25, 40],
        p: [0.2; 3],
        q: derive_q(8000.0, 250_000.0, 0.001).expect("valid service parameters"),
        h: 250_000.0,
        links: Links {
            w_11: w,
            w_31: w,
            w_32: w,
            w_22: w,
        },
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9).collect()
}

fn spec(label: String, base: ScenarioConfig, axis: Axis, values: Vec<f64>) -> SweepSpec {
    SweepSpec {
        label,
        base,
        axis,
        values,
        engine: Engine::Analytical,
        analytical: AnalyticalSettings::default(),
        sim: SimSettings::default(),
    }
}

/// Expand a preset into its sweeps (one per plotted series).
pub fn preset(name: &str) -> Result<Vec<SweepSpec>> {
    let with_k = |c: ScenarioConfig, k: u32| ScenarioConfig { k, ..c };
    let specs = match name {
        "fig2" => [0, 3]
            .into_iter()
            .map(|k| spec(format!("K={k}"), with_k(small_cells(), k), Axis::P(None), grid(0.05, 0.95, 0.05)))
            .collect(),
        "fig3" => [0, 3]
            .into_iter()
            .map(|k| spec(format!("K={k}"), with_k(small_cells(), k), Axis::W31, grid(0.05, 1.0, 0.05)))
            .collect(),
        "fig4" => (0..=3)
            .map(|k| spec(format!("K={k}"), with_k(small_cells(), k), Axis::W31, grid(0.05, 1.0, 0.05)))
            .collect(),
        "fig5a" => [4, 6, 8]
            .into_iter()
            .map(|n3| {
                let mut c = small_cells_short_access();
                c.n[Group::Three.index()] = n3;
                spec(format!("N_3={n3}"), c, Axis::P(None), grid(0.05, 0.95, 0.05))
            })
            .collect(),
        "fig5b" => vec![spec(
            "p=0.4".into(),
            small_cells_short_access(),
            Axis::L(None),
            grid(1.0, 12.0, 1.0),
        )],
        "fig6" | "fig7" => vec![spec("macrocell".into(), macrocell(), Axis::K, grid(0.0, 10.0, 1.0))],
        _ => {
            return Err(Error::Validation(format!(
                "unknown preset `{name}` (expected one of {})",
                NAMES.join(", ")
            )))
        }
    };
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_expand() {
        for n in NAMES {
            let specs = preset(n).unwrap();
            assert!(!specs.is_empty());
            for s in &specs {
                s.base.validate().unwrap();
            }
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn macrocell_service_and_links() {
        let c = macrocell();
        assert!((c.q - 1.0 / 32.0).abs() < 1e-15);
        assert!(c.links.w_11.w_up > 0.999 && c.links.w_11.w_up < 1.0);
    }

    #[test]
    fn grids() {
        assert_eq!(grid(0.05, 0.95, 0.05).len(), 19);
        assert_eq!(grid(0.0, 10.0, 1.0), (0..=10).map(f64::from).collect::<Vec<_>>());
    }
}
