//! Thermal ideal gas seen by the Brownian particle, and the Gaussian absolute moments
//! that turn its collision integrals into closed forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// One-dimensional thermal gas. `w_g` is the width of the Gaussian packets the
/// quantum description decomposes the gas into and `delta` the coarse-grain time;
/// the classical oracle ignores both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub n_g: f64,
    pub temperature: f64,
    pub m_g: f64,
    pub w_g: f64,
    pub delta: f64,
}

impl GasModel {
    pub fn new(n_g: f64, temperature: f64, m_g: f64, w_g: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("n_g", n_g), ("temperature", temperature), ("m_g", m_g), ("w_g", w_g), ("delta", delta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        for (name, v) in [("temperature", temperature), ("m_g", m_g), ("w_g", w_g), ("delta", delta)] {
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { n_g, temperature, m_g, w_g, delta })
    }

    /// Mass ratio α = m_g/m.
    pub fn alpha(&self, m: f64) -> f64 {
        self.m_g / m
    }

    /// Standard deviation √(T/m_g) of the gas velocity.
    pub fn velocity_spread(&self) -> f64 {
        (self.temperature / self.m_g).sqrt()
    }

    /// Maxwell–Boltzmann momentum density μ_T(p_g) (normalized to 1).
    pub fn maxwell_boltzmann(&self, p_g: f64) -> f64 {
        let s2 = self.m_g * self.temperature;
        (-p_g * p_g / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt()
    }

    /// Linear friction constant γ = 4n_g√(2m_gT)/(√π m) of the heavy-particle limit.
    pub fn gamma(&self, m: f64) -> f64 {
        4.0 * self.n_g * (2.0 * self.m_g * self.temperature).sqrt() / (PI.sqrt() * m)
    }

    /// Collision rate of a particle at rest, n_g√(2T/(πm_g)).
    pub fn rest_rate(&self) -> f64 {
        self.n_g * (2.0 * self.temperature / (PI * self.m_g)).sqrt()
    }
}

/// E|W| for W ~ N(μ, σ²).
pub fn abs_mean(mu: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mu.abs();
    }
    let z = mu / sigma;
    mu * erf(z / 2f64.sqrt()) + sigma * (2.0 / PI).sqrt() * (-0.5 * z * z).exp()
}

/// E[W|W|] for W ~ N(μ, σ²).
pub fn signed_square_mean(mu: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mu * mu.abs();
    }
    let z = mu / sigma;
    (mu * mu + sigma * sigma) * erf(z / 2f64.sqrt()) + mu * sigma * (2.0 / PI).sqrt() * (-0.5 * z * z).exp()
}

/// E|W|³ for W ~ N(μ, σ²).
pub fn abs_cube_mean(mu: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mu.abs().powi(3);
    }
    let z = mu / sigma;
    (mu.powi(3) + 3.0 * mu * sigma * sigma) * erf(z / 2f64.sqrt())
        + sigma * (2.0 / PI).sqrt() * (mu * mu + 2.0 * sigma * sigma) * (-0.5 * z * z).exp()
}
