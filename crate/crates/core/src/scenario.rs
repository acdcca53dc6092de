//! Room geometry, the line-of-sight Lambertian gain and the degradedness test.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photodiode and emitter parameters of the Lambertian link model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdParams {
    /// Lambertian order of the emitter.
    pub m: f64,
    /// Detector area. Gains are linear in it; the reference preset uses
    /// the value 1 (one square centimetre entered as 1).
    pub area: f64,
    /// Optical filter gain.
    pub ts: f64,
    /// Concentrator gain.
    pub g: f64,
    /// Field of view in radians.
    pub fov: f64,
}

impl PdParams {
    /// Reference indoor parameters: m = 6, area 1, T_s = 1, g = 3, 75° FOV.
    pub fn table_i() -> Self {
        Self {
            m: 6.0,
            area: 1.0,
            ts: 1.0,
            g: 3.0,
            fov: 75f64.to_radians(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.m >= 1.0
            && self.area > 0.0
            && self.ts > 0.0
            && self.g > 0.0
            && self.fov > 0.0
            && self.fov <= PI / 2.0
            && [self.m, self.area, self.ts, self.g, self.fov]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "photodiode parameters out of range: {self:?} (need m >= 1, positive area/ts/g, 0 < fov <= pi/2)"
            )))
        }
    }
}

impl Default for PdParams {
    fn default() -> Self {
        Self::table_i()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Transmitter, both receivers, photodiode model and noise levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub alice: Position,
    pub bob: Position,
    pub eve: Position,
    pub pd: PdParams,
    pub sigma_b: f64,
    pub sigma_e: f64,
}

impl Scenario {
    pub fn new(
        alice: Position,
        bob: Position,
        eve: Position,
        pd: PdParams,
        sigma_b: f64,
        sigma_e: f64,
    ) -> Result<Self> {
        let s = Self {
            alice,
            bob,
            eve,
            pd,
            sigma_b,
            sigma_e,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.pd.validate()?;
        validate_sigmas(self.sigma_b, self.sigma_e)?;
        for (name, p) in [("alice", self.alice), ("bob", self.bob), ("eve", self.eve)] {
            if !p.is_finite() {
                return Err(Error::invalid(format!("{name} position is not finite")));
            }
        }
        if self.alice.z <= self.bob.z || self.alice.z <= self.eve.z {
            return Err(Error::invalid(
                "transmitter must be strictly above both receivers",
            ));
        }
        Ok(())
    }
}

pub(crate) fn validate_sigmas(sigma_b: f64, sigma_e: f64) -> Result<()> {
    if sigma_b > 0.0 && sigma_e > 0.0 && sigma_b.is_finite() && sigma_e.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "noise standard deviations must be positive and finite (got {sigma_b}, {sigma_e})"
        )))
    }
}

/// Channel gains to Bob and Eve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub h_b: f64,
    pub h_e: f64,
}

impl LinkGains {
    pub fn new(h_b: f64, h_e: f64) -> Result<Self> {
        if h_b >= 0.0 && h_e >= 0.0 && h_b.is_finite() && h_e.is_finite() {
            Ok(Self { h_b, h_e })
        } else {
            Err(Error::invalid(format!(
                "channel gains must be finite and non-negative (got {h_b}, {h_e})"
            )))
        }
    }
}

/// Line-of-sight gain from a downward-facing emitter to an upward-facing
/// detector. Zero outside the field of view; the boundary is inside.
pub fn channel_gain(tx: Position, rx: Position, pd: &PdParams) -> Result<f64> {
    if !tx.is_finite() || !rx.is_finite() {
        return Err(Error::invalid("positions must be finite"));
    }
    if tx.z <= rx.z {
        return Err(Error::invalid(format!(
            "transmitter height {} must exceed receiver height {}",
            tx.z, rx.z
        )));
    }
    let dx = rx.x - tx.x;
    let dy = rx.y - tx.y;
    let dz = tx.z - rx.z;
    let d2 = dx * dx + dy * dy + dz * dz;
    let cos_psi = dz / d2.sqrt();
    // Compare angles rather than cosines so psi == fov lands inside.
    let psi = dx.hypot(dy).atan2(dz);
    if psi > pd.fov {
        return Ok(0.0);
    }
    Ok((pd.m + 1.0) * pd.area * pd.ts * pd.g * cos_psi.powf(pd.m) * cos_psi / (2.0 * PI * d2))
}

pub fn link_gains(s: &Scenario) -> Result<LinkGains> {
    Ok(LinkGains {
        h_b: channel_gain(s.alice, s.bob, &s.pd)?,
        h_e: channel_gain(s.alice, s.eve, &s.pd)?,
    })
}

/// `H_B / sigma_B >= H_E / sigma_E`: the eavesdropper's channel is the
/// degraded one, so the secrecy capacity can be positive.
pub fn is_degraded_secure(g: &LinkGains, sigma_b: f64, sigma_e: f64) -> bool {
    g.h_b * sigma_e >= g.h_e * sigma_b
}
