use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{analyze, monte_carlo, AnalyticalSettings, Engine, SimSettings};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::radio::LinkQuality;
use crate::scenario::{Group, ScenarioConfig, ScenarioDoc};

/// Swept parameter. `p` and `L` without a group index move all three
/// groups together; `w_31` sets both directions of the group-3/cell-1 link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Axis {
    P(Option<Group>),
    K,
    L(Option<Group>),
    W31,
    N(Group),
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::P(None) => f.write_str("p"),
            Axis::P(Some(g)) => write!(f, "p_{}", g.number()),
            Axis::K => f.write_str("K"),
            Axis::L(None) => f.write_str("L"),
            Axis::L(Some(g)) => write!(f, "L_{}", g.number()),
            Axis::W31 => f.write_str("w_31"),
            Axis::N(g) => write!(f, "N_{}", g.number()),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let group = |rest: &str| {
            rest.parse::<u8>()
                .ok()
                .and_then(Group::from_number)
                .ok_or_else(|| Error::Validation(format!("unknown sweep axis `{s}`")))
        };
        match s {
            "p" => Ok(Axis::P(None)),
            "K" => Ok(Axis::K),
            "L" => Ok(Axis::L(None)),
            "w_31" => Ok(Axis::W31),
            _ => {
                if let Some(r) = s.strip_prefix("p_") {
                    Ok(Axis::P(Some(group(r)?)))
                } else if let Some(r) = s.strip_prefix("L_") {
                    Ok(Axis::L(Some(group(r)?)))
                } else if let Some(r) = s.strip_prefix("N_") {
                    Ok(Axis::N(group(r)?))
                } else {
                    Err(Error::Validation(format!("unknown sweep axis `{s}`")))
                }
            }
        }
    }
}

impl TryFrom<String> for Axis {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Axis> for String {
    fn from(a: Axis) -> String {
        a.to_string()
    }
}

fn as_count(axis: Axis, v: f64) -> Result<u32> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(Error::Validation(format!("{axis} takes nonnegative integers, got {v}")))
    }
}

impl Axis {
    /// Copy of `base` with this parameter set to `v`.
    pub fn apply(self, base: &ScenarioConfig, v: f64) -> Result<ScenarioConfig> {
        let mut c = base.clone();
        match self {
            Axis::P(None) => c.p = [v; 3],
            Axis::P(Some(g)) => c.p[g.index()] = v,
            Axis::K => c.k = as_count(self, v)?,
            Axis::L(None) => c.l = [as_count(self, v)?; 3],
            Axis::L(Some(g)) => c.l[g.index()] = as_count(self, v)?,
            Axis::W31 => c.links.w_31 = LinkQuality::reciprocal(v),
            Axis::N(g) => c.n[g.index()] = as_count(self, v)?,
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub label: String,
    pub base: ScenarioConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub engine: Engine,
    pub analytical: AnalyticalSettings,
    pub sim: SimSettings,
}

/// File form of a sweep: the base scenario is a scenario document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpecDoc {
    #[serde(default)]
    pub label: String,
    pub base: ScenarioDoc,
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub analytical: AnalyticalSettings,
    #[serde(default)]
    pub sim: SimSettings,
}

impl SweepSpecDoc {
    pub fn parse(source: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(source);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn into_spec(self) -> Result<SweepSpec> {
        Ok(SweepSpec {
            label: self.label,
            base: self.base.normalize()?,
            axis: self.axis,
            values: self.values,
            engine: self.engine,
            analytical: self.analytical,
            sim: self.sim,
        })
    }
}

/// Changes relative to the `K = 0` baseline of the same sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KDiagnostics {
    /// `(U(K) / U(0) - 1) * 100`.
    pub u_improvement_pct: f64,
    /// `u_improvement_pct / K`; absent at `K = 0`.
    pub u_improvement_pct_per_k: Option<f64>,
    /// `(B3(0) - B3(K)) / K`.
    pub b3_decrease_per_k: Option<f64>,
    /// `(B2(K) - B2(0)) / K`.
    pub b2_increase_per_k: Option<f64>,
    /// `b3_decrease_per_k - b2_increase_per_k`.
    pub blocking_gap_per_k: Option<f64>,
}

impl KDiagnostics {
    pub fn new(k: u32, r: &MetricsReport, base: &MetricsReport) -> Self {
        let u_pct = if base.u > 0.0 { (r.u / base.u - 1.0) * 100.0 } else { 0.0 };
        let per_k = |x: f64| (k > 0).then(|| x / k as f64);
        let b3 = per_k(base.b[2] - r.b[2]);
        let b2 = per_k(r.b[1] - base.b[1]);
        Self {
            u_improvement_pct: u_pct,
            u_improvement_pct_per_k: per_k(u_pct),
            b3_decrease_per_k: b3,
            b2_increase_per_k: b2,
            blocking_gap_per_k: b3.zip(b2).map(|(x, y)| x - y),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytical: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MetricsReport>,
    /// Against the `K = 0` row, for `K` sweeps only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_diagnostics: Option<KDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    /// Analytical report when available, else the Monte Carlo one.
    pub fn primary(&self) -> Option<&MetricsReport> {
        self.analytical.as_ref().or(self.monte_carlo.as_ref())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub label: String,
    pub axis: Axis,
    pub engine: Engine,
    pub rows: Vec<SweepRow>,
}

fn evaluate_point(spec: &SweepSpec, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        analytical: None,
        monte_carlo: None,
        k_diagnostics: None,
        error: None,
    };
    let run = || -> Result<(Option<MetricsReport>, Option<MetricsReport>)> {
        let cfg = spec.axis.apply(&spec.base, value)?;
        let a = if spec.engine.analytical() {
            Some(analyze(&cfg, &spec.analytical)?.1)
        } else {
            None
        };
        let m = if spec.engine.monte_carlo() {
            Some(monte_carlo(&cfg, &spec.sim)?)
        } else {
            None
        };
        Ok((a, m))
    };
    match run() {
        Ok((a, m)) => {
            row.analytical = a;
            row.monte_carlo = m;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluate every axis value. Points run in parallel; rows keep the order
/// of `values`. A failing point is recorded in its row.
pub fn sweep(spec: &SweepSpec) -> SweepTable {
    let mut rows: Vec<SweepRow> = spec
        .values
        .par_iter()
        .map(|&v| evaluate_point(spec, v))
        .collect();
    if spec.axis == Axis::K && !rows.is_empty() {
        let baseline = rows
            .iter()
            .find(|r| r.value == 0.0)
            .cloned()
            .unwrap_or_else(|| evaluate_point(spec, 0.0));
        if let Some(base) = baseline.primary() {
            for r in rows.iter_mut() {
                if let Some(rep) = r.primary() {
                    r.k_diagnostics = Some(KDiagnostics::new(r.value as u32, rep, base));
                }
            }
        }
    }
    SweepTable {
        label: spec.label.clone(),
        axis: spec.axis,
        engine: spec.engine,
        rows,
    }
}

impl SweepTable {
    pub const EXTRA_COLUMNS: [&'static str; 7] = [
        "total_blocking",
        "u_improvement_pct",
        "u_improvement_pct_per_k",
        "b3_decrease_per_k",
        "b2_increase_per_k",
        "blocking_gap_per_k",
        "error",
    ];

    pub fn header() -> Vec<&'static str> {
        let mut h = vec!["label", "axis", "value"];
        h.extend(MetricsReport::CSV_HEADER);
        h.extend(Self::EXTRA_COLUMNS);
        h
    }

    /// Data rows (no header): one per row and engine.
    pub fn write_csv_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
        for row in &self.rows {
            let lead = [self.label.clone(), self.axis.to_string(), format!("{}", row.value)];
            let reports: Vec<&MetricsReport> = row.analytical.iter().chain(row.monte_carlo.iter()).collect();
            if reports.is_empty() {
                let mut rec: Vec<String> = lead.to_vec();
                rec.extend(std::iter::repeat_n(String::new(), MetricsReport::CSV_HEADER.len() + 6));
                rec.push(row.error.clone().unwrap_or_default());
                w.write_record(&rec)?;
                continue;
            }
            for rep in reports {
                let mut rec: Vec<String> = lead.to_vec();
                rec.extend(rep.csv_fields());
                rec.push(format!("{:.12e}", rep.b.iter().sum::<f64>() / 3.0));
                // diagnostics follow the primary engine
                let diag = if row.primary().is_some_and(|p| std::ptr::eq(p, rep)) {
                    row.k_diagnostics
                } else {
                    None
                };
                rec.push(opt(diag.map(|d| d.u_improvement_pct)));
                rec.push(opt(diag.and_then(|d| d.u_improvement_pct_per_k)));
                rec.push(opt(diag.and_then(|d| d.b3_decrease_per_k)));
                rec.push(opt(diag.and_then(|d| d.b2_increase_per_k)));
                rec.push(opt(diag.and_then(|d| d.blocking_gap_per_k)));
                rec.push(row.error.clone().unwrap_or_default());
                w.write_record(&rec)?;
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_tables_csv(std::slice::from_ref(self), out)
    }
}

/// Several tables under one header.
pub fn write_tables_csv<W: Write>(tables: &[SweepTable], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SweepTable::header())?;
    for t in tables {
        t.write_csv_rows(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Links;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            n: [3, 3, 3],
            m1: 2,
            m2: 2,
            k: 1,
            l: [2, 2, 3],
            p: [0.4; 3],
            q: 0.2,
            h: 100.0,
            links: Links::uniform(0.9),
        }
    }

    fn spec(axis: Axis, values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            label: "t".into(),
            base: base(),
            axis,
            values,
            engine: Engine::Analytical,
            analytical: AnalyticalSettings::default(),
            sim: SimSettings::default(),
        }
    }

    #[test]
    fn axis_names_round_trip() {
        for s in ["p", "p_2", "K", "L", "L_3", "w_31", "N_1"] {
            assert_eq!(s.parse::<Axis>().unwrap().to_string(), s);
        }
        assert!("N_4".parse::<Axis>().is_err());
        assert!("q".parse::<Axis>().is_err());
    }

    #[test]
    fn empty_values_empty_table() {
        assert!(sweep(&spec(Axis::P(None), vec![])).rows.is_empty());
    }

    #[test]
    fn bad_point_recorded_in_row() {
        let t = sweep(&spec(Axis::K, vec![0.0, 1.0, 5.0, 1.5]));
        assert_eq!(t.rows.len(), 4);
        assert!(t.rows[2].error.as_deref().unwrap().contains("K exceeds"));
        assert!(t.rows[3].error.is_some());
        assert!(t.rows[1].k_diagnostics.unwrap().u_improvement_pct > 0.0);
    }

    #[test]
    fn csv_is_deterministic() {
        let s = spec(Axis::P(None), vec![0.1, 0.5, 0.9]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        sweep(&s).write_csv(&mut a).unwrap();
        sweep(&s).write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), 4);
    }
}
