use drk_core::chain::{build_closed_form, build_enumeration, ClosedForm};
use drk_core::radio::LinkQuality;
use drk_core::scenario::{Links, ScenarioConfig};

fn scenario(n: [u32; 3], m1: u32, m2: u32, k: u32, l: [u32; 3], p: [f64; 3], q: f64, w: [f64; 4]) -> ScenarioConfig {
    ScenarioConfig {
        n,
        m1,
        m2,
        k,
        l,
        p,
        q,
        h: 250_000.0,
        links: Links {
            w_11: LinkQuality::reciprocal(w[0]),
            w_31: LinkQuality::reciprocal(w[1]),
            w_32: LinkQuality::reciprocal(w[2]),
            w_22: LinkQuality::reciprocal(w[3]),
        },
    }
}

fn compare(cfg: &ScenarioConfig) {
    let cf = build_closed_form(cfg).unwrap();
    let en = build_enumeration(cfg).unwrap();
    assert_eq!(cf.states, en.states);
    let eval = ClosedForm::new(cfg);
    let mut worst = (0.0, String::new());
    for i in 0..cf.len() {
        for j in 0..cf.len() {
            let d = (cf.get(i, j) - en.get(i, j)).abs();
            if d > worst.0 {
                let case = eval.probability(&cf.states[i], &cf.states[j]).unwrap().0;
                worst = (
                    d,
                    format!("{} -> {} [{case}] cf={} en={}", cf.states[i], cf.states[j], cf.get(i, j), en.get(i, j)),
                );
            }
        }
    }
    assert!(worst.0 < 1e-9, "max deviation {:e} at {}", worst.0, worst.1);
}

#[test]
fn reference_scenario_all_k() {
    for k in 0..=3 {
        compare(&scenario([6, 6, 6], 3, 3, k, [6, 6, 6], [0.4; 3], 0.032, [0.806, 0.5, 0.806, 0.806]));
    }
}

#[test]
fn asymmetric_scenarios() {
    compare(&scenario([2, 7, 4], 4, 3, 2, [2, 3, 4], [0.3, 0.6, 0.5], 0.2, [0.9, 0.7, 0.6, 0.8]));
    compare(&scenario([0, 3, 9], 2, 5, 5, [3, 2, 5], [0.5, 0.4, 0.7], 0.1, [0.95, 0.85, 0.75, 0.65]));
    compare(&scenario([5, 0, 5], 3, 2, 1, [4, 4, 4], [0.6, 0.5, 0.8], 0.3, [1.0, 1.0, 1.0, 1.0]));
}

#[test]
fn single_group() {
    compare(&scenario([6, 0, 0], 3, 3, 0, [6, 6, 6], [0.4; 3], 0.032, [0.806; 4]));
    compare(&scenario([10, 0, 0], 4, 1, 0, [3, 1, 1], [0.7, 0.1, 0.1], 0.2, [0.9; 4]));
}
