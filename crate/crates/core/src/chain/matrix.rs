use std::fmt;

use serde::{Deserialize, Serialize};

use super::states::SystemState;
use crate::error::{Error, Result};

/// State spaces up to this size keep dense rows.
pub const DENSE_LIMIT: usize = 2_000;

/// Row sums must be within this of one.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Negative round-off down to this magnitude is clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    ClosedForm,
    Enumeration,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::ClosedForm => "closed-form",
            Backend::Enumeration => "enumeration",
        })
    }
}

#[derive(Debug, Clone)]
enum Rows {
    Dense { n: usize, data: Vec<f64> },
    Sparse(Vec<Vec<(u32, f64)>>),
}

/// Row-stochastic transition matrix over an ordered state list.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub states: Vec<SystemState>,
    pub backend: Backend,
    rows: Rows,
}

impl TransitionMatrix {
    /// Assemble from per-row `(column, value)` lists sorted by column,
    /// clamping round-off negatives and dropping zeros.
    pub(crate) fn from_rows(
        states: Vec<SystemState>,
        backend: Backend,
        rows: Vec<Vec<(u32, f64)>>,
    ) -> Result<Self> {
        let n = states.len();
        let mut cleaned = rows;
        for (i, row) in cleaned.iter_mut().enumerate() {
            for (j, v) in row.iter_mut() {
                if *v < 0.0 {
                    if *v < -NEGATIVE_CLAMP {
                        return Err(Error::Integrity(format!(
                            "negative transition probability {v:e} at {} -> {}",
                            states[i], states[*j as usize]
                        )));
                    }
                    *v = 0.0;
                }
            }
            row.retain(|&(_, v)| v != 0.0);
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        }
        let rows = if n <= DENSE_LIMIT {
            let mut data = vec![0.0; n * n];
            for (i, row) in cleaned.into_iter().enumerate() {
                for (j, v) in row {
                    data[i * n + j as usize] = v;
                }
            }
            Rows::Dense { n, data }
        } else {
            Rows::Sparse(cleaned)
        };
        Ok(Self {
            states,
            backend,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.rows, Rows::Dense { .. })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.rows {
            Rows::Dense { n, data } => data[i * n + j],
            Rows::Sparse(rows) => rows[i]
                .binary_search_by_key(&(j as u32), |&(c, _)| c)
                .map(|pos| rows[i][pos].1)
                .unwrap_or(0.0),
        }
    }

    /// Nonzero entries of row `i` in column order.
    pub fn row(&self, i: usize) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.rows {
            Rows::Dense { n, data } => Box::new(
                data[i * n..(i + 1) * n]
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|&(_, v)| v != 0.0),
            ),
            Rows::Sparse(rows) => Box::new(rows[i].iter().map(|&(j, v)| (j as usize, v))),
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    /// Largest `|row sum - 1|` over all rows.
    pub fn max_row_deviation(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.row_sum(i) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        for i in 0..self.len() {
            let s = self.row_sum(i);
            if (s - 1.0).abs() > tol {
                let dump: Vec<String> = self
                    .row(i)
                    .map(|(j, v)| format!("{}:{v:.3e}", self.states[j]))
                    .collect();
                return Err(Error::Integrity(format!(
                    "{} row {} sums to {s:.12} [{}]",
                    self.backend,
                    self.states[i],
                    dump.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// `out = pi * P`.
    pub fn left_multiply(&self, pi: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match &self.rows {
            Rows::Dense { n, data } => {
                for (i, &w) in pi.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let row = &data[i * n..(i + 1) * n];
                    for (o, &p) in out.iter_mut().zip(row) {
                        *o += w * p;
                    }
                }
            }
            Rows::Sparse(rows) => {
                for (i, &w) in pi.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for &(j, p) in &rows[i] {
                        out[j as usize] += w * p;
                    }
                }
            }
        }
    }

    pub fn nnz(&self) -> usize {
        (0..self.len()).map(|i| self.row(i).count()).sum()
    }
}
