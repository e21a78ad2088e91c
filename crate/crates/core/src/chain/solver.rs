use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::matrix::{TransitionMatrix, DENSE_LIMIT};
use super::states::SystemState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Target for `||pi P - pi||_inf`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateDistribution {
    pub states: Vec<SystemState>,
    pub pi: Vec<f64>,
    /// `||pi P - pi||_inf` at the returned vector.
    pub residual: f64,
}

impl SteadyStateDistribution {
    pub fn prob(&self, s: &SystemState) -> f64 {
        self.states
            .binary_search(s)
            .map(|i| self.pi[i])
            .unwrap_or(0.0)
    }
}

/// Number of closed communicating classes of the transition graph.
pub fn closed_classes(m: &TransitionMatrix) -> usize {
    let n = m.len();
    let mut g = DiGraph::<(), ()>::with_capacity(n, m.nnz());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for (j, _) in m.row(i) {
            if i != j {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; n];
    for (ci, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = ci;
        }
    }
    let mut leaves = vec![true; sccs.len()];
    for i in 0..n {
        for (j, _) in m.row(i) {
            if comp[i] != comp[j] {
                leaves[comp[i]] = false;
            }
        }
    }
    leaves.iter().filter(|&&c| c).count()
}

fn residual(m: &TransitionMatrix, pi: &[f64], scratch: &mut [f64]) -> f64 {
    m.left_multiply(pi, scratch);
    pi.iter()
        .zip(scratch.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn normalize(pi: &mut [f64]) {
    for v in pi.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= s);
}

/// Solve `pi (P - I) = 0`, `sum pi = 1` by LU with the last balance
/// equation replaced by normalization.
fn solve_dense(m: &TransitionMatrix) -> Option<Vec<f64>> {
    let n = m.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in m.row(i) {
            a[(j, i)] += v;
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let x = a.lu().solve(&rhs)?;
    let mut pi: Vec<f64> = x.iter().copied().collect();
    if pi.iter().any(|v| !v.is_finite()) {
        return None;
    }
    normalize(&mut pi);
    Some(pi)
}

/// Stationary distribution of an ergodic chain.
///
/// Dense LU for small chains, power iteration otherwise (and as refinement
/// after LU). If plain iteration stalls, which happens for periodic chains,
/// it switches to the averaged step `pi <- (pi + pi P) / 2`, which has the
/// same fixed point but no oscillation.
pub fn steady_state(m: &TransitionMatrix, opts: SolveOptions) -> Result<SteadyStateDistribution> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Validation("empty state space".into()));
    }
    let classes = closed_classes(m);
    if classes != 1 {
        return Err(Error::Structural {
            closed_classes: classes,
        });
    }
    let mut scratch = vec![0.0; n];
    let mut pi = if n <= DENSE_LIMIT {
        solve_dense(m).unwrap_or_else(|| vec![1.0 / n as f64; n])
    } else {
        vec![1.0 / n as f64; n]
    };
    let mut res = residual(m, &pi, &mut scratch);
    let mut averaged = false;
    let mut best = res;
    let mut since_best = 0usize;
    let mut iter = 0;
    while res > opts.tol {
        if iter >= opts.max_iter {
            return Err(Error::Convergence {
                iterations: iter,
                residual: res,
            });
        }
        // scratch holds pi P from the residual evaluation
        if averaged {
            for (p, s) in pi.iter_mut().zip(scratch.iter()) {
                *p = 0.5 * (*p + s);
            }
        } else {
            pi.copy_from_slice(&scratch);
        }
        normalize(&mut pi);
        res = residual(m, &pi, &mut scratch);
        iter += 1;
        if res < best * 0.999 {
            best = res;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 200 && !averaged {
                log::debug!("power iteration stalled at {res:e}, switching to averaged step");
                averaged = true;
                since_best = 0;
            }
        }
    }
    Ok(SteadyStateDistribution {
        states: m.states.clone(),
        pi,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::matrix::Backend;

    fn chain(rows: Vec<Vec<(u32, f64)>>) -> TransitionMatrix {
        let states = (0..rows.len() as u32)
            .map(|i| SystemState::new(i, 0, 0, 0))
            .collect();
        TransitionMatrix::from_rows(states, Backend::Enumeration, rows).unwrap()
    }

    #[test]
    fn two_state() {
        // stationary (b, a) / (a + b) for flip rates a, b
        let (a, b) = (0.3, 0.1);
        let m = chain(vec![vec![(0, 1.0 - a), (1, a)], vec![(0, b), (1, 1.0 - b)]]);
        let s = steady_state(&m, SolveOptions::default()).unwrap();
        assert!((s.pi[0] - b / (a + b)).abs() < 1e-12);
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn periodic_chain_converges() {
        let m = chain(vec![vec![(1, 1.0)], vec![(0, 1.0)]]);
        let s = steady_state(&m, SolveOptions::default()).unwrap();
        assert!((s.pi[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_closed_classes_rejected() {
        let m = chain(vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(0, 0.5), (1, 0.5)]]);
        assert!(matches!(
            steady_state(&m, SolveOptions::default()),
            Err(Error::Structural { closed_classes: 2 })
        ));
    }

    #[test]
    fn transient_states_get_zero_mass() {
        let m = chain(vec![vec![(0, 0.5), (1, 0.5)], vec![(1, 0.2), (2, 0.8)], vec![(1, 0.6), (2, 0.4)]]);
        let s = steady_state(&m, SolveOptions::default()).unwrap();
        assert!(s.pi[0].abs() < 1e-12);
        assert!((s.pi[1] - 0.6 / 1.4).abs() < 1e-10);
    }
}
