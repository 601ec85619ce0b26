//! The fitness gene circuit: inducer response, inhibitor-modulated uptake,
//! GFP reporter, growth-rate coupling and eugenic culling.

use serde::{Deserialize, Serialize};

use crate::error::{BagaError, Result};

/// Concentrations are physically non-negative. Returns the clamped value and
/// whether clamping happened.
pub fn clamp_concentration(x: f64) -> (f64, bool) {
    if x < 0.0 {
        (0.0, true)
    } else {
        (x, false)
    }
}

/// `z = gain * iptg / scale`, with negative inducer clamped to zero.
pub fn linear_response(iptg: f64, gain: f64, scale: f64) -> f64 {
    gain * clamp_concentration(iptg).0 / scale
}

/// `z = v x^n / (k^n + x^n)`.
pub fn hill_response(x: f64, vmax: f64, half_saturation: f64, exponent: f64) -> f64 {
    let x = clamp_concentration(x).0;
    if x == 0.0 {
        return 0.0;
    }
    // Written as v / (1 + (k/x)^n) so that x = k gives exactly v/2.
    vmax / (1.0 + (half_saturation / x).powf(exponent))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseFn {
    Linear {
        gain: f64,
        scale: f64,
    },
    Hill {
        vmax: f64,
        half_saturation: f64,
        exponent: f64,
    },
}

impl ResponseFn {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ResponseFn::Linear { gain, scale } => {
                if !(scale > 0.0) {
                    return Err(BagaError::param(format!("linear scale must be > 0, got {scale}")));
                }
                if !gain.is_finite() {
                    return Err(BagaError::param("linear gain must be finite"));
                }
            }
            ResponseFn::Hill {
                vmax,
                half_saturation,
                exponent,
            } => {
                for (name, v) in [
                    ("vmax", vmax),
                    ("half_saturation", half_saturation),
                    ("exponent", exponent),
                ] {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(BagaError::param(format!("hill {name} must be > 0, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ResponseFn::Linear { gain, scale } => linear_response(x, gain, scale),
            ResponseFn::Hill {
                vmax,
                half_saturation,
                exponent,
            } => hill_response(x, vmax, half_saturation, exponent),
        }
    }

    /// Input that produces response `z`, when one exists.
    pub fn inverse(&self, z: f64) -> Option<f64> {
        if z < 0.0 || !z.is_finite() {
            return None;
        }
        match *self {
            ResponseFn::Linear { gain, scale } => (gain != 0.0).then(|| z * scale / gain),
            ResponseFn::Hill {
                vmax,
                half_saturation,
                exponent,
            } => {
                if z >= vmax {
                    None
                } else {
                    Some(half_saturation * (z / (vmax - z)).powf(1.0 / exponent))
                }
            }
        }
    }
}

/// Inducer uptake kinetics with a competitive inhibitor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportParams {
    /// Maximum uptake velocity.
    pub vmax: f64,
    /// Michaelis constant of uptake.
    pub michaelis: f64,
    /// Inhibition constant.
    pub inhibitor_k: f64,
}

impl TransportParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("transport vmax", self.vmax),
            ("michaelis constant", self.michaelis),
            ("inhibitor constant", self.inhibitor_k),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(BagaError::param(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// `v0 = v iptg / (iptg + K (1 + I/k2))`. With no inhibitor this reduces to
/// plain Michaelis-Menten uptake.
pub fn transport_velocity(iptg: f64, inhibitor: f64, p: &TransportParams) -> f64 {
    let iptg = clamp_concentration(iptg).0;
    let inhibitor = clamp_concentration(inhibitor).0;
    if iptg == 0.0 {
        return 0.0;
    }
    if inhibitor == 0.0 {
        return p.vmax * iptg / (p.michaelis + iptg);
    }
    p.vmax * iptg / (iptg + p.michaelis * (1.0 + inhibitor / p.inhibitor_k))
}

/// Uptake Michaelis constant from the item values: their sum over the
/// plasmid length.
pub fn michaelis_k_from_values(values: &[f64], length: usize) -> Result<f64> {
    if length == 0 {
        return Err(BagaError::InvalidLength(0));
    }
    let k = values.iter().sum::<f64>() / length as f64;
    if !(k > 0.0) {
        return Err(BagaError::param(format!("michaelis constant must be > 0, got {k}")));
    }
    Ok(k)
}

pub fn gfp_level(z: f64, m: f64) -> f64 {
    m * z
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    /// Baseline growth rate (1/time).
    pub k0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0) {
            return Err(BagaError::param(format!("k0 must be > 0, got {}", self.k0)));
        }
        if !(self.alpha >= 0.0) {
            return Err(BagaError::param(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0) {
            return Err(BagaError::param(format!("beta must be > 0, got {}", self.beta)));
        }
        Ok(())
    }

    /// `k = k0 + z alpha / beta`.
    pub fn growth_rate(&self, z: f64) -> f64 {
        if self.alpha == 0.0 {
            return self.k0;
        }
        self.k0 + z * self.alpha / self.beta
    }
}

pub fn updated_growth_rate(z: f64, p: &SelectionParams) -> Result<f64> {
    if p.beta == 0.0 {
        return Err(BagaError::param("beta must be non-zero"));
    }
    Ok(p.growth_rate(z))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReporterParams {
    /// GFP per unit fitness.
    pub m: f64,
    pub theta_gfp: f64,
    /// Culling threshold; `None` disables the eugenic rule.
    pub theta_e: Option<f64>,
}

impl ReporterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(BagaError::param(format!("m must be > 0, got {}", self.m)));
        }
        if !(self.theta_gfp >= 0.0) {
            return Err(BagaError::param("theta_gfp must be >= 0"));
        }
        if let Some(t) = self.theta_e {
            if !(t >= 0.0) {
                return Err(BagaError::param("theta_e must be >= 0"));
            }
        }
        Ok(())
    }
}

/// A cell survives the eugenic screen only if its GFP strictly exceeds the threshold.
pub fn eugenic_check(gfp: f64, theta_e: f64) -> bool {
    gfp > theta_e
}
