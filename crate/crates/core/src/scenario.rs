//! Scenario configuration: loading, validation and normalization.
//!
//! A scenario document is JSON (schema in `docs/scenario.schema.json`).
//! Links may be given either as explicit good-state probabilities or as
//! radio parameters; the termination probability `q` may be given directly
//! or derived from transfer size, channel rate and frame length. Loading
//! resolves both, so a [`ScenarioConfig`] always carries explicit values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::{link_quality, LinkQuality, RadioParams};

pub const SCHEMA_VERSION: u32 = 1;

/// UE group. Groups 1 and 2 see only their home cell; group 3 sits in the
/// overlap region and is registered to cell 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    One,
    Two,
    Three,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::One, Group::Two, Group::Three];

    pub fn index(self) -> usize {
        match self {
            Group::One => 0,
            Group::Two => 1,
            Group::Three => 2,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Group> {
        match n {
            1 => Some(Group::One),
            2 => Some(Group::Two),
            3 => Some(Group::Three),
            _ => None,
        }
    }
}

/// The four (group, base station) pairs that carry traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkId {
    G1Bs1,
    G3Bs1,
    G3Bs2,
    G2Bs2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Links {
    pub w_11: LinkQuality,
    pub w_31: LinkQuality,
    pub w_32: LinkQuality,
    pub w_22: LinkQuality,
}

impl Links {
    pub fn uniform(w: f64) -> Self {
        let lq = LinkQuality::reciprocal(w);
        Self {
            w_11: lq,
            w_31: lq,
            w_32: lq,
            w_22: lq,
        }
    }

    pub fn get(&self, id: LinkId) -> LinkQuality {
        match id {
            LinkId::G1Bs1 => self.w_11,
            LinkId::G3Bs1 => self.w_31,
            LinkId::G3Bs2 => self.w_32,
            LinkId::G2Bs2 => self.w_22,
        }
    }

    fn iter(&self) -> impl Iterator<Item = (&'static str, LinkQuality)> {
        [
            ("w_11", self.w_11),
            ("w_31", self.w_31),
            ("w_32", self.w_32),
            ("w_22", self.w_22),
        ]
        .into_iter()
    }
}

/// Fully resolved network description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// UE counts `N_1, N_2, N_3`.
    pub n: [u32; 3],
    pub m1: u32,
    pub m2: u32,
    /// Cap on group-3 connections carried by cell 2.
    pub k: u32,
    /// Random-access slots per frame `L_1, L_2, L_3`.
    pub l: [u32; 3],
    /// Per-frame request probabilities `p_1, p_2, p_3`.
    pub p: [f64; 3],
    /// Per-frame completion probability on a good downlink.
    pub q: f64,
    /// Per-channel throughput in bits/s.
    pub h: f64,
    pub links: Links,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m1 == 0 || self.m2 == 0 {
            return Err(Error::Validation("M_1 and M_2 must be positive".into()));
        }
        if self.k > self.m2 {
            return Err(Error::Validation(format!(
                "K exceeds M_2 ({} > {})",
                self.k, self.m2
            )));
        }
        for (x, &l) in self.l.iter().enumerate() {
            if l == 0 {
                return Err(Error::Validation(format!("L_{} must be at least 1", x + 1)));
            }
        }
        for (x, &p) in self.p.iter().enumerate() {
            check_probability(&format!("p_{}", x + 1), p)?;
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::Validation(format!("q must lie in (0, 1], got {}", self.q)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Validation("H must be positive".into()));
        }
        for (name, lq) in self.links.iter() {
            check_probability(&format!("{name}.w_u"), lq.w_up)?;
            check_probability(&format!("{name}.w_d"), lq.w_down)?;
        }
        Ok(())
    }

    pub fn population(&self, g: Group) -> u32 {
        self.n[g.index()]
    }

    pub fn slots(&self, g: Group) -> u32 {
        self.l[g.index()]
    }

    pub fn request_prob(&self, g: Group) -> f64 {
        self.p[g.index()]
    }

    /// Uplink quality governing a group's random access. Group 3 requests
    /// through the cell it is registered to, cell 1.
    pub fn access_link(&self, g: Group) -> LinkQuality {
        match g {
            Group::One => self.links.w_11,
            Group::Two => self.links.w_22,
            Group::Three => self.links.w_31,
        }
    }

    /// Per-frame termination probability `l = 1 - w_d + w_d q` on a link.
    pub fn termination_prob(&self, link: LinkId) -> f64 {
        let wd = self.links.get(link).w_down;
        1.0 - wd + wd * self.q
    }

    pub fn total_channels(&self) -> u32 {
        self.m1 + self.m2
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        let link = |lq: LinkQuality| LinkSpec {
            w_u: Some(lq.w_up),
            w_d: Some(lq.w_down),
            radio: None,
        };
        ScenarioDoc {
            schema_version: SCHEMA_VERSION,
            populations: Populations {
                n_1: self.n[0],
                n_2: self.n[1],
                n_3: self.n[2],
            },
            channels: Channels {
                m_1: self.m1,
                m_2: self.m2,
                k: self.k,
            },
            access: Access {
                l_1: self.l[0],
                l_2: self.l[1],
                l_3: self.l[2],
            },
            traffic: Traffic {
                p_1: self.p[0],
                p_2: self.p[1],
                p_3: self.p[2],
            },
            service: Service {
                q: Some(self.q),
                r_p: None,
                h: self.h,
                t_s: None,
            },
            links: LinksDoc {
                w_11: link(self.links.w_11),
                w_31: link(self.links.w_31),
                w_32: link(self.links.w_32),
                w_22: link(self.links.w_22),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("scenario serializes")
    }
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// `q = H t_s / r_p`: per-frame completion probability for transfers of
/// `r_p` bits over a channel of `h` bits/s with frames of `t_s` seconds.
pub fn derive_q(r_p: f64, h: f64, t_s: f64) -> Result<f64> {
    if !(r_p > 0.0 && h > 0.0 && t_s > 0.0) {
        return Err(Error::Validation("r_p, H and t_s must be positive".into()));
    }
    let per_frame = h * t_s;
    if r_p < per_frame {
        return Err(Error::Validation(format!(
            "transfer of {r_p} bits is shorter than one frame ({per_frame} bits)"
        )));
    }
    Ok((per_frame / r_p).clamp(f64::MIN_POSITIVE, 1.0))
}

// ---- document schema ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub populations: Populations,
    pub channels: Channels,
    pub access: Access,
    pub traffic: Traffic,
    pub service: Service,
    pub links: LinksDoc,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Populations {
    #[serde(rename = "N_1")]
    pub n_1: u32,
    #[serde(rename = "N_2")]
    pub n_2: u32,
    #[serde(rename = "N_3")]
    pub n_3: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channels {
    #[serde(rename = "M_1")]
    pub m_1: u32,
    #[serde(rename = "M_2")]
    pub m_2: u32,
    #[serde(rename = "K")]
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Access {
    #[serde(rename = "L_1")]
    pub l_1: u32,
    #[serde(rename = "L_2")]
    pub l_2: u32,
    #[serde(rename = "L_3")]
    pub l_3: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Traffic {
    pub p_1: f64,
    pub p_2: f64,
    pub p_3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Service {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_p: Option<f64>,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_s: Option<f64>,
}

/// One link: either `w_u` and `w_d`, or a `radio` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinksDoc {
    pub w_11: LinkSpec,
    pub w_31: LinkSpec,
    pub w_32: LinkSpec,
    pub w_22: LinkSpec,
}

impl LinkSpec {
    fn resolve(&self, name: &str) -> Result<LinkQuality> {
        match (self.w_u, self.w_d, &self.radio) {
            (Some(u), Some(d), None) => Ok(LinkQuality::new(u, d)),
            (None, None, Some(radio)) => link_quality(radio).map_err(|e| match e {
                Error::Domain(m) | Error::Validation(m) => {
                    Error::Validation(format!("links.{name}.radio: {m}"))
                }
                other => other,
            }),
            _ => Err(Error::Validation(format!(
                "links.{name} needs either both w_u and w_d or a radio block"
            ))),
        }
    }
}

impl ScenarioDoc {
    pub fn normalize(&self) -> Result<ScenarioConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let s = &self.service;
        let derived = match (s.r_p, s.t_s) {
            (Some(r_p), Some(t_s)) => Some(derive_q(r_p, s.h, t_s)?),
            (None, None) => None,
            _ => {
                return Err(Error::Validation(
                    "service needs both r_p and t_s to derive q".into(),
                ))
            }
        };
        let q = match (s.q, derived) {
            (Some(q), Some(dq)) => {
                if (q - dq).abs() > 1e-12 {
                    log::warn!("service.q = {q} overrides derived q = {dq}");
                }
                q
            }
            (Some(q), None) => q,
            (None, Some(dq)) => dq,
            (None, None) => {
                return Err(Error::Validation(
                    "service needs q or (r_p, t_s)".into(),
                ))
            }
        };
        let cfg = ScenarioConfig {
            n: [self.populations.n_1, self.populations.n_2, self.populations.n_3],
            m1: self.channels.m_1,
            m2: self.channels.m_2,
            k: self.channels.k,
            l: [self.access.l_1, self.access.l_2, self.access.l_3],
            p: [self.traffic.p_1, self.traffic.p_2, self.traffic.p_3],
            q,
            h: s.h,
            links: Links {
                w_11: self.links.w_11.resolve("w_11")?,
                w_31: self.links.w_31.resolve("w_31")?,
                w_32: self.links.w_32.resolve("w_32")?,
                w_22: self.links.w_22.resolve("w_22")?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse a scenario document, reporting the failing field path on error.
pub fn parse_doc(source: &str) -> Result<ScenarioDoc> {
    let de = &mut serde_json::Deserializer::from_str(source);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Parse, resolve and validate a scenario document.
pub fn load_scenario(source: &str) -> Result<ScenarioConfig> {
    parse_doc(source)?.normalize()
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    load_scenario(&std::fs::read_to_string(path)?)
}
