//! CSV export of transition matrices and stationary distributions.

use std::io::Write;

use super::matrix::TransitionMatrix;
use super::solver::SteadyStateDistribution;
use crate::error::Result;

/// One line per nonzero entry: `from_a,from_b,from_c,from_d,to_a,to_b,to_c,to_d,p`.
pub fn write_matrix_csv<W: Write>(m: &TransitionMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["from_a", "from_b", "from_c", "from_d", "to_a", "to_b", "to_c", "to_d", "p"])?;
    for i in 0..m.len() {
        let o = m.states[i];
        for (j, v) in m.row(i) {
            let s = m.states[j];
            w.write_record([
                o.a.to_string(),
                o.b.to_string(),
                o.c.to_string(),
                o.d.to_string(),
                s.a.to_string(),
                s.b.to_string(),
                s.c.to_string(),
                s.d.to_string(),
                format!("{v:.17e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One line per state: `a,b,c,d,pi`.
pub fn write_pi_csv<W: Write>(d: &SteadyStateDistribution, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "b", "c", "d", "pi"])?;
    for (s, p) in d.states.iter().zip(&d.pi) {
        w.write_record([
            s.a.to_string(),
            s.b.to_string(),
            s.c.to_string(),
            s.d.to_string(),
            format!("{p:.17e}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
