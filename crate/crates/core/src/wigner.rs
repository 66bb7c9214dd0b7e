//! Closed-form Wigner functions of two-branch superpositions, their change under
//! collisions with thermal gas particles, Monte-Carlo averaging over the colliding
//! gas, and the closed-form decoherence-per-collision laws.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::collision::CatState;
use crate::collision::{collide_cat, GaussianLabel};
use crate::error::{Error, Result};
use crate::numeric::{quad, PhaseSpaceGrid};
use crate::rng;

/// Minimum number of grid points per oscillation wavelength of the interference term.
pub const POINTS_PER_WAVELENGTH: f64 = 8.0;

/// Trace of the unnormalized operator |a⟩⟨a| + |b⟩⟨b| + c e^{iφ}|a⟩⟨b| + h.c.
pub fn cat_trace(cat: &CatState) -> f64 {
    let (xd, pd, w) = (cat.x_diff(), cat.p_diff(), cat.width());
    let k = cat.x_mean() * pd - cat.p_mean() * xd;
    2.0 + 2.0 * cat.c * (-(pd * pd * w * w / 4.0 + xd * xd / (4.0 * w * w))).exp() * (cat.phi + 0.5 * k).cos()
}

/// Unnormalized Wigner function: two Gaussian humps plus the interference term
/// (2c/π)exp[−(x'−x_A)²/W² − W²(p'−p_A)²]cos[φ + (x_A p_D − p_A x_D)/2 + x_D(p_A−p') − p_D(x_A−x')].
fn wigner_terms(cat: &CatState, x: f64, p: f64) -> (f64, f64) {
    let w2 = cat.width().powi(2);
    let hump = |l: &GaussianLabel| (-(x - l.x).powi(2) / w2 - w2 * (p - l.p).powi(2)).exp() / PI;
    let (xa, pa, xd, pd) = (cat.x_mean(), cat.p_mean(), cat.x_diff(), cat.p_diff());
    let arg = cat.phi + 0.5 * (xa * pd - pa * xd) + xd * (pa - p) - pd * (xa - x);
    let interference = 2.0 * cat.c / PI * (-(x - xa).powi(2) / w2 - w2 * (p - pa).powi(2)).exp() * arg.cos();
    (hump(&cat.a) + hump(&cat.b), interference)
}

/// Normalized Wigner function of the cat at (x, p).
pub fn wigner_value(cat: &CatState, x: f64, p: f64) -> f64 {
    let (humps, interference) = wigner_terms(cat, x, p);
    (humps + interference) / cat_trace(cat)
}

/// Normalized interference term alone at (x, p).
pub fn interference_value(cat: &CatState, x: f64, p: f64) -> f64 {
    wigner_terms(cat, x, p).1 / cat_trace(cat)
}

fn check_resolution(cat: &CatState, x: (f64, f64, usize), p: (f64, f64, usize)) -> Result<()> {
    if x.2 < 2 || p.2 < 2 {
        return Err(Error::InvalidParameter("Wigner grid needs ≥ 2 points per axis".into()));
    }
    let dx = (x.1 - x.0) / (x.2 - 1) as f64;
    let dp = (p.1 - p.0) / (p.2 - 1) as f64;
    let (xd, pd) = (cat.x_diff().abs(), cat.p_diff().abs());
    if pd > 0.0 && dx > 2.0 * PI / pd / POINTS_PER_WAVELENGTH {
        return Err(Error::GridTooCoarse(format!(
            "x spacing {dx} does not resolve the wavelength 2π/|p_D| = {} with {POINTS_PER_WAVELENGTH} points",
            2.0 * PI / pd
        )));
    }
    if xd > 0.0 && dp > 2.0 * PI / xd / POINTS_PER_WAVELENGTH {
        return Err(Error::GridTooCoarse(format!(
            "p spacing {dp} does not resolve the wavelength 2π/|x_D| = {} with {POINTS_PER_WAVELENGTH} points",
            2.0 * PI / xd
        )));
    }
    Ok(())
}

/// Normalized Wigner function on a grid; errors if the grid undersamples the fringes.
pub fn wigner_cat(cat: &CatState, x: (f64, f64, usize), p: (f64, f64, usize)) -> Result<PhaseSpaceGrid<f64>> {
    check_resolution(cat, x, p)?;
    PhaseSpaceGrid::from_fn(x, p, |xx, pp| wigner_value(cat, xx, pp))
}

/// Cat parameters after a collision with the gas packet `gas`.
pub fn collide_cat_params(cat: &CatState, gas: &GaussianLabel) -> Result<CatState> {
    collide_cat(cat, gas)
}

/// Colliding gas particle for a slow Brownian particle at the origin: |p_g| has density
/// |p_g|/(m_g T)·exp(−p_g²/(2m_g T)) (inverse CDF p_g = √(−2m_g T ln 2u₁), u₁ ∈ (0, ½]),
/// random sign, and x_g = −u₂ p_g t/m_g so that it arrives within (0, t).
pub fn sample_colliding_gas(temperature: f64, m_g: f64, t_window: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = 0.5 * (1.0 - rng.random::<f64>());
    let magnitude = (-2.0 * m_g * temperature * (2.0 * u1).ln()).sqrt();
    let p_g = if rng.random::<bool>() { magnitude } else { -magnitude };
    let u2: f64 = rng.random();
    (-u2 * p_g * t_window / m_g, p_g)
}

/// Thermal Monte-Carlo setup: gas mass ratio α, temperature, arrival window (0, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceMc {
    pub temperature: f64,
    pub alpha: f64,
    pub t_window: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl DecoherenceMc {
    pub fn new(temperature: f64, alpha: f64, t_window: f64, n_samples: usize, seed: u64) -> Result<Self> {
        if !(temperature > 0.0 && alpha > 0.0 && t_window >= 0.0) {
            return Err(Error::InvalidParameter("decoherence MC needs T > 0, α > 0, t ≥ 0".into()));
        }
        if n_samples < 100 {
            return Err(Error::InvalidParameter(format!("need at least 100 samples, got {n_samples}")));
        }
        Ok(Self { temperature, alpha, t_window, n_samples, seed })
    }
}

/// Decoherence per collision at the reference point (x_A, p_A) of the initial cat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceEstimate {
    pub per_collision: f64,
    pub std_error: f64,
    pub reference: (f64, f64),
    pub initial_value: f64,
    /// Averaged post-collision Wigner value at the reference point.
    pub final_value: f64,
    pub n_samples: usize,
}

/// Post-collision cats for `n` gas particles drawn by `sampler` from independent streams.
pub fn collided_ensemble(
    cat: &CatState,
    alpha: f64,
    n: usize,
    seed: u64,
    sampler: impl Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync,
) -> Result<Vec<CatState>> {
    let m_g = alpha * cat.a.m;
    let w_g = cat.width() / alpha.sqrt();
    (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let (x_g, p_g) = sampler(&mut rng::stream(seed, k));
            collide_cat(cat, &GaussianLabel::new(x_g, p_g, w_g, m_g)?)
        })
        .collect()
}

fn estimate(cat: &CatState, ensemble: &[CatState]) -> DecoherenceEstimate {
    let reference = (cat.x_mean(), cat.p_mean());
    let v0 = wigner_value(cat, reference.0, reference.1);
    let d: Vec<f64> = ensemble.iter().map(|c| 1.0 - wigner_value(c, reference.0, reference.1) / v0).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    DecoherenceEstimate {
        per_collision: mean,
        std_error: (var / n).sqrt(),
        reference,
        initial_value: v0,
        final_value: v0 * (1.0 - mean),
        n_samples: d.len(),
    }
}

/// Decoherence per collision from an explicit gas sampler.
pub fn mc_decoherence_with(
    cat: &CatState,
    alpha: f64,
    n: usize,
    seed: u64,
    sampler: impl Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync,
) -> Result<DecoherenceEstimate> {
    let ensemble = collided_ensemble(cat, alpha, n, seed, sampler)?;
    Ok(estimate(cat, &ensemble))
}

fn thermal_ensemble(cat: &CatState, cfg: &DecoherenceMc) -> Result<Vec<CatState>> {
    let m_g = cfg.alpha * cat.a.m;
    collided_ensemble(cat, cfg.alpha, cfg.n_samples, cfg.seed, |r| {
        sample_colliding_gas(cfg.temperature, m_g, cfg.t_window, r)
    })
}

/// Decoherence per collision for thermal gas particles arriving within (0, t).
pub fn mc_decoherence(cat: &CatState, cfg: &DecoherenceMc) -> Result<DecoherenceEstimate> {
    Ok(estimate(cat, &thermal_ensemble(cat, cfg)?))
}

/// Wigner function averaged over one thermal collision, together with the estimate.
pub fn mc_averaged_wigner(
    cat: &CatState,
    cfg: &DecoherenceMc,
    x: (f64, f64, usize),
    p: (f64, f64, usize),
) -> Result<(PhaseSpaceGrid<f64>, DecoherenceEstimate)> {
    check_resolution(cat, x, p)?;
    let ensemble = thermal_ensemble(cat, cfg)?;
    let n = ensemble.len() as f64;
    let grid = PhaseSpaceGrid::from_fn(x, p, |xx, pp| ensemble.iter().map(|c| wigner_value(c, xx, pp)).sum::<f64>() / n)?;
    Ok((grid, estimate(cat, &ensemble)))
}

/// Dawson's integral F(z) = e^{−z²}∫₀^z e^{s²}ds = ∫₀^∞ e^{−u²}sin(2zu)du.
pub fn dawson(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    quad::finite(|s| (s * s - z * z).exp(), 0.0, z, 1e-14)
}

/// Small-separation position law 4m_g T x_D².
pub fn position_decoherence_small(x_d: f64, temperature: f64, m_g: f64) -> f64 {
    4.0 * m_g * temperature * x_d * x_d
}

/// 1 − ⟨cos(2x_D p_g)⟩ over colliding momenta: y∫₀^∞e^{−u²}sin(yu)du with y = 2x_D√(2m_g T).
pub fn position_decoherence(x_d: f64, temperature: f64, m_g: f64) -> f64 {
    let y = 2.0 * x_d * (2.0 * m_g * temperature).sqrt();
    y * dawson(0.5 * y)
}

/// Position decoherence rate (collision rate × decoherence per collision):
/// (4x_D n_g T/√π)∫₀^∞e^{−u²}sin(2x_D√(2m_g T)u)du.
pub fn position_decoherence_rate(x_d: f64, n_g: f64, temperature: f64, m_g: f64) -> f64 {
    4.0 * x_d * n_g * temperature / PI.sqrt() * dawson(x_d * (2.0 * m_g * temperature).sqrt())
}

/// Remaining coherence of a momentum cat after one collision within (0, t):
/// (1/k)∫₀^∞e^{−u²}sin(2ku)du with k = t√(2m_g T)p_D/m.
pub fn momentum_coherence(p_d: f64, temperature: f64, m_g: f64, m: f64, t: f64) -> f64 {
    let k = t * (2.0 * m_g * temperature).sqrt() * p_d / m;
    if k.abs() < 1e-4 {
        return 1.0 - 2.0 * k * k / 3.0 + 4.0 * k.powi(4) / 15.0;
    }
    dawson(k) / k
}

/// Momentum decoherence per collision, 1 − [`momentum_coherence`].
pub fn momentum_decoherence(p_d: f64, temperature: f64, m_g: f64, m: f64, t: f64) -> f64 {
    1.0 - momentum_coherence(p_d, temperature, m_g, m, t)
}

/// Short-time momentum law 4m_g T t² p_D²/(3m²).
pub fn momentum_decoherence_small(p_d: f64, temperature: f64, m_g: f64, m: f64, t: f64) -> f64 {
    4.0 * m_g * temperature * (t * p_d / m).powi(2) / 3.0
}
