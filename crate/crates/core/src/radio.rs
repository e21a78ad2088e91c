//! Good-channel probabilities from path loss with log-normal shadowing.
//!
//! A link is "good" in a frame when the received power clears the reception
//! threshold. With log-distance path loss and Gaussian shadowing in dB the
//! probability is a Gaussian tail, evaluated here in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Path-loss and shadowing parameters for one (group, base station) link.
///
/// Powers and thresholds are in dBm, `W_*` is the antenna/attenuation
/// constant already expressed in dB (that is, `10 log10 W`), distances in
/// metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub gamma_q_u: f64,
    pub gamma_q_d: f64,
    #[serde(rename = "P_t_u")]
    pub p_t_u: f64,
    #[serde(rename = "P_t_d")]
    pub p_t_d: f64,
    #[serde(rename = "W_u")]
    pub w_u_db: f64,
    #[serde(rename = "W_d")]
    pub w_d_db: f64,
    pub sigma_psi: f64,
    pub delta: f64,
    pub d_0_u: f64,
    pub d_0_d: f64,
    pub d: f64,
}

/// Uplink and downlink good-state probabilities for one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkQuality {
    pub w_up: f64,
    pub w_down: f64,
}

impl LinkQuality {
    pub fn new(w_up: f64, w_down: f64) -> Self {
        Self { w_up, w_down }
    }

    /// Same probability in both directions.
    pub fn reciprocal(w: f64) -> Self {
        Self { w_up: w, w_down: w }
    }
}

/// Gaussian tail probability `Q(z) = P(X > z)` for a standard normal `X`.
pub fn q_function(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Normalized shadowing margin whose Gaussian tail is the good-state probability.
pub fn shadowing_argument(
    gamma_q: f64,
    p_t: f64,
    w_db: f64,
    sigma_psi: f64,
    delta: f64,
    d: f64,
    d_0: f64,
) -> f64 {
    (gamma_q - p_t - w_db + 10.0 * delta * (d / d_0).log10()) / sigma_psi
}

impl RadioParams {
    /// Parameter set shared by the published micro- and macrocell studies,
    /// with the path-loss exponent and distance left to the caller.
    pub fn reference(delta: f64, d: f64) -> Self {
        Self {
            gamma_q_u: -85.0,
            gamma_q_d: -85.0,
            p_t_u: 30.0,
            p_t_d: 30.0,
            w_u_db: -31.54,
            w_d_db: -31.54,
            sigma_psi: 3.65,
            delta,
            d_0_u: 1.0,
            d_0_d: 1.0,
            d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma_q_u,
            self.gamma_q_d,
            self.p_t_u,
            self.p_t_d,
            self.w_u_db,
            self.w_d_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("radio parameters must be finite".into()));
        }
        if self.sigma_psi <= 0.0 {
            return Err(Error::Validation("sigma_psi must be positive".into()));
        }
        if self.delta <= 0.0 {
            return Err(Error::Validation("delta must be positive".into()));
        }
        if !(self.d_0_u > 0.0 && self.d_0_d > 0.0) {
            return Err(Error::Validation("reference distances must be positive".into()));
        }
        Ok(())
    }
}

/// Evaluate uplink and downlink good-state probabilities for a link.
pub fn link_quality(params: &RadioParams) -> Result<LinkQuality> {
    params.validate()?;
    if !params.d.is_finite() || params.d < params.d_0_u || params.d < params.d_0_d {
        return Err(Error::Domain(format!(
            "link distance {} m is inside the reference distance (far-field model invalid)",
            params.d
        )));
    }
    let up = q_function(shadowing_argument(
        params.gamma_q_u,
        params.p_t_u,
        params.w_u_db,
        params.sigma_psi,
        params.delta,
        params.d,
        params.d_0_u,
    ));
    let down = q_function(shadowing_argument(
        params.gamma_q_d,
        params.p_t_d,
        params.w_d_db,
        params.sigma_psi,
        params.delta,
        params.d,
        params.d_0_d,
    ));
    Ok(LinkQuality {
        w_up: up.clamp(0.0, 1.0),
        w_down: down.clamp(0.0, 1.0),
    })
}
