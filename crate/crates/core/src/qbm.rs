//! Moment dynamics of collisional quantum Brownian motion.
//!
//! The master equation built from Gaussian-packet collisions yields closed equations
//! for the first two moments:
//! d⟨x⟩/dt = ⟨p⟩/m, d⟨p⟩/dt = −⟨f_T⟩, d⟨x²⟩/dt = ⟨{x,p}⟩/m + δ²⟨g_T⟩,
//! d⟨p²⟩/dt = −⟨h_T⟩, d⟨{x,p}⟩/dt = 2⟨p²⟩/m − ⟨{x, f_T}⟩.
//! f_T and h_T coincide with the classical collision integrals; the δ²g_T term is the
//! position diffusion introduced by time coarse graining.

use std::f64::consts::PI;

use serde::Serialize;

use crate::classical::{self, closed_averages, Closure};
use crate::error::{Error, Result};
use crate::gas::{abs_cube_mean, GasModel};
use crate::numeric::quad;

pub use crate::classical::MomentVector;

/// Friction f_T(p).
pub fn friction_ft(gas: &GasModel, m: f64, p: f64) -> f64 {
    classical::friction(gas, m, p)
}

/// Heating h_T(p); d⟨p²⟩/dt = −⟨h_T⟩.
pub fn heating_ht(gas: &GasModel, m: f64, p: f64) -> f64 {
    classical::heating(gas, m, p)
}

/// g_T(p) = α²/[3(1+α)²]·∫μ_T(p_g)|p/m − p_g/m_g|³dp_g (multiplied by δ² in the ⟨x²⟩ equation).
pub fn position_diffusion_gt(gas: &GasModel, m: f64, p: f64) -> f64 {
    let a = gas.alpha(m);
    a * a / (3.0 * (1.0 + a).powi(2)) * gas.n_g * abs_cube_mean(p / m, gas.velocity_spread())
}

/// g_T(p) by direct quadrature over the gas momentum.
pub fn position_diffusion_gt_quadrature(gas: &GasModel, m: f64, p: f64) -> f64 {
    let a = gas.alpha(m);
    let v = p / m;
    let integral = quad::real_line(|pg| gas.n_g * gas.maxwell_boltzmann(pg) * (v - pg / gas.m_g).abs().powi(3), gas.m_g * v, 1e-13);
    a * a / (3.0 * (1.0 + a).powi(2)) * integral
}

/// Thermal average ∫μ(p)h_T(p)dp over the Brownian Maxwell–Boltzmann distribution at the gas temperature.
pub fn thermal_average_ht(gas: &GasModel, m: f64) -> f64 {
    let s2 = m * gas.temperature;
    let mb = |p: f64| (-p * p / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
    quad::real_line(|p| mb(p) * heating_ht(gas, m, p), 0.0, 1e-13)
}

/// Options for the moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSettings {
    pub closure: Closure,
    /// Keep the δ²-proportional position diffusion in d⟨x²⟩/dt.
    pub delta_term: bool,
}

/// Right-hand side of the quantum moment equations.
pub fn moment_rhs(gas: &GasModel, m: f64, mv: &MomentVector, settings: MomentSettings) -> MomentVector {
    let [f, xf, h, w3] = closed_averages(gas, m, mv, settings.closure);
    let mut x2 = mv.xp / m;
    if settings.delta_term {
        let a = gas.alpha(m);
        let pref = match settings.closure {
            Closure::Kramers => a * a / 3.0,
            Closure::Gaussian => a * a / (3.0 * (1.0 + a).powi(2)),
        };
        x2 += gas.delta * gas.delta * pref * gas.n_g * w3;
    }
    MomentVector { x: mv.p / m, p: -f, x2, p2: -h, xp: 2.0 * mv.p2 / m - xf }
}

fn axpy(a: &MomentVector, s: f64, b: &MomentVector) -> MomentVector {
    let (x, y) = (a.to_array(), b.to_array());
    MomentVector::from_array(std::array::from_fn(|i| x[i] + s * y[i]))
}

/// Fixed-step RK4 for a moment right-hand side, sampled exactly at `times`.
pub fn integrate_moments(
    rhs: impl Fn(&MomentVector) -> MomentVector,
    m0: MomentVector,
    times: &[f64],
    dt: f64,
) -> Result<Vec<MomentVector>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("sample times must be nonnegative and ascending".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut y) = (0.0, m0);
    for &ts in times {
        while t < ts {
            let h = dt.min(ts - t);
            let k1 = rhs(&y);
            let k2 = rhs(&axpy(&y, h / 2.0, &k1));
            let k3 = rhs(&axpy(&y, h / 2.0, &k2));
            let k4 = rhs(&axpy(&y, h, &k3));
            let (a, b1, b2, b3, b4) = (y.to_array(), k1.to_array(), k2.to_array(), k3.to_array(), k4.to_array());
            y = MomentVector::from_array(std::array::from_fn(|i| a[i] + h / 6.0 * (b1[i] + 2.0 * b2[i] + 2.0 * b3[i] + b4[i])));
            if y.to_array().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(t));
            }
            t = if ts - t <= dt { ts } else { t + h };
        }
        out.push(y);
    }
    Ok(out)
}

/// Moment trajectory with the regime diagnostics of the slow heavy-particle closure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTrajectory {
    pub times: Vec<f64>,
    pub moments: Vec<MomentVector>,
    /// max_t √⟨p²⟩/m in units of the gas velocity spread √(T/m_g).
    pub max_relative_speed: f64,
    /// True when the Kramers closure is used outside |v| ≤ 0.1√(T/m_g) or α > 0.1.
    pub slow_limit_violated: bool,
}

pub fn evolve_moments(
    gas: &GasModel,
    m: f64,
    m0: MomentVector,
    times: &[f64],
    dt: f64,
    settings: MomentSettings,
) -> Result<MomentTrajectory> {
    let moments = integrate_moments(|mv| moment_rhs(gas, m, mv, settings), m0, times, dt)?;
    let speed = moments
        .iter()
        .chain(std::iter::once(&m0))
        .map(|mv| mv.p2.max(0.0).sqrt() / m / gas.velocity_spread())
        .fold(0.0, f64::max);
    let slow_limit_violated = settings.closure == Closure::Kramers && (speed > 0.1 || gas.alpha(m) > 0.1);
    Ok(MomentTrajectory { times: times.to_vec(), moments, max_relative_speed: speed, slow_limit_violated })
}

/// Slow heavy-particle position diffusion coefficient α²n_g/(3√π)(2T/m_g)^{3/2}δ².
pub fn slow_position_diffusion(gas: &GasModel, m: f64) -> f64 {
    let a = gas.alpha(m);
    a * a * gas.n_g / (3.0 * PI.sqrt()) * (2.0 * gas.temperature / gas.m_g).powf(1.5) * gas.delta * gas.delta
}

/// Closed-form solution of the linear moment equations with friction γ and constant
/// position diffusion `d_x` (d⟨x²⟩/dt gains d_x).
pub fn analytic_moments(m0: &MomentVector, gamma: f64, temperature: f64, m: f64, d_x: f64, t: f64) -> MomentVector {
    let e1 = (-gamma * t).exp();
    let e2 = e1 * e1;
    let mt = m * temperature;
    let p = m0.p * e1;
    let x = m0.x + m0.p * (1.0 - e1) / (m * gamma);
    let p2 = mt * (1.0 - e2) + e2 * m0.p2;
    let xp = 2.0 * temperature / gamma * (1.0 - e1).powi(2) + 2.0 * m0.p2 / (m * gamma) * (e1 - e2) + m0.xp * e1;
    let x2 = m0.x2 + m0.xp / (m * gamma) * (1.0 - e1) + m0.p2 / (m * gamma).powi(2) * (1.0 - e1).powi(2)
        - temperature / (m * gamma * gamma) * (3.0 - 4.0 * e1 + e2)
        + t * (2.0 * temperature / (m * gamma) + d_x);
    MomentVector { x, p, x2, p2, xp }
}

/// Short-time growth of ⟨x²⟩ from rest, n_g√m_g(2T)^{3/2}/(3√π m²)·(4t³ + tδ²).
pub fn short_time_x2(gas: &GasModel, m: f64, t: f64) -> f64 {
    gas.n_g * gas.m_g.sqrt() * (2.0 * gas.temperature).powf(1.5) / (3.0 * PI.sqrt() * m * m)
        * (4.0 * t.powi(3) + t * gas.delta * gas.delta)
}

/// Coefficients of the standard QBM master equation matched to the moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardForm {
    pub gamma: f64,
    pub d_pp: f64,
    pub d_xx: f64,
    /// D_xx·D_pp ≥ (γ/4)².
    pub lindblad_ok: bool,
    /// The matching is only meaningful for α ≪ 1 (flagged when α > 0.1).
    pub heavy_limit_violated: bool,
}

pub fn standard_form_coeffs(gas: &GasModel, m: f64, keep_delta_term: bool) -> StandardForm {
    let gamma = gas.gamma(m);
    let d_pp = m * gas.temperature * gamma;
    let d_xx = if keep_delta_term {
        gas.n_g / (6.0 * PI.sqrt()) * (2.0 * gas.temperature / gas.m_g).powf(1.5) * gas.delta * gas.delta
    } else {
        0.0
    };
    StandardForm {
        gamma,
        d_pp,
        d_xx,
        lindblad_ok: d_xx * d_pp >= (gamma / 4.0).powi(2),
        heavy_limit_violated: gas.alpha(m) > 0.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas(alpha: f64) -> GasModel {
        GasModel::new(1.0, 1.0, alpha, 1.0, 0.3).unwrap()
    }

    #[test]
    fn friction_vanishes_at_rest_and_is_odd() {
        let g = gas(0.2);
        assert_eq!(friction_ft(&g, 1.0, 0.0), 0.0);
        assert!((friction_ft(&g, 1.0, 0.7) + friction_ft(&g, 1.0, -0.7)).abs() < 1e-14);
    }

    #[test]
    fn friction_limits() {
        let g = gas(1e-3);
        let m = 1.0;
        let slow = 0.05 * g.velocity_spread() * m;
        let lin = g.gamma(m) / (1.0 + g.alpha(m)) * slow;
        assert!((friction_ft(&g, m, slow) / lin - 1.0).abs() < 0.01);
        let fast = 10.0 * g.velocity_spread() * m;
        let a = g.alpha(m);
        let drag = 2.0 * g.n_g * g.m_g / (1.0 + a) * (fast * fast / (m * m) + g.temperature / g.m_g);
        assert!((friction_ft(&g, m, fast) / drag - 1.0).abs() < 0.02);
    }

    #[test]
    fn gt_matches_quadrature_and_slow_limit() {
        let g = gas(0.3);
        for p in [0.0, 0.5, -2.0] {
            let a = position_diffusion_gt(&g, 1.0, p);
            let b = position_diffusion_gt_quadrature(&g, 1.0, p);
            assert!((a / b - 1.0).abs() < 1e-8);
        }
        let a = g.alpha(1.0);
        let slow = a * a / (3.0 * (1.0 + a).powi(2)) * g.n_g / PI.sqrt() * (2.0 * g.temperature / g.m_g).powf(1.5);
        assert!((position_diffusion_gt(&g, 1.0, 0.0) / slow - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heating_vanishes_on_thermal_state() {
        for a in [0.01, 0.3, 1.0, 3.0] {
            assert!(thermal_average_ht(&gas(a), 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn slow_heating_is_kramers_for_light_gas() {
        let g = gas(1e-4);
        let p = 0.3;
        let k = 2.0 * g.gamma(1.0) * (g.temperature - p * p);
        assert!((-heating_ht(&g, 1.0, p) / k - 1.0).abs() < 1e-3);
    }

    #[test]
    fn numeric_kramers_matches_analytic() {
        let g = gas(0.01);
        let m = 1.0;
        let m0 = MomentVector::gaussian(0.5, 2.0, 1.0, 0.25, 0.1);
        let times: Vec<f64> = (1..=6).map(|k| k as f64 * 3.0).collect();
        let s = MomentSettings { closure: Closure::Kramers, delta_term: true };
        let run = evolve_moments(&g, m, m0, &times, 1e-3, s).unwrap();
        let dx = slow_position_diffusion(&g, m);
        for (t, mv) in times.iter().zip(&run.moments) {
            let an = analytic_moments(&m0, g.gamma(m), g.temperature, m, dx, *t);
            for (a, b) in mv.to_array().iter().zip(an.to_array()) {
                assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-3), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn long_time_limits() {
        let g = gas(0.01);
        let m0 = MomentVector::gaussian(1.0, 3.0, 1.0, 0.25, 0.0);
        let gam = g.gamma(1.0);
        let mv = analytic_moments(&m0, gam, g.temperature, 1.0, 0.0, 60.0 / gam);
        assert!(mv.p.abs() < 1e-20);
        assert!((mv.p2 - g.temperature).abs() < 1e-12);
        assert!((mv.xp - 2.0 * g.temperature / gam).abs() < 1e-10);
        assert!((mv.x - 1.0 - 3.0 / gam).abs() < 1e-10);
    }

    #[test]
    fn gaussian_closure_thermalizes() {
        for a in [0.01, 0.1] {
            let g = gas(a);
            let gam = g.gamma(1.0);
            let m0 = MomentVector::gaussian(0.0, 0.0, 1.0, 0.25, 0.0);
            let s = MomentSettings { closure: Closure::Gaussian, delta_term: false };
            let run = evolve_moments(&g, 1.0, m0, &[20.0 / gam], 0.01 / gam, s).unwrap();
            assert!((run.moments[0].p2 / g.temperature - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn lindblad_inequality_needs_the_delta_term() {
        let g = GasModel::new(1.0, 1.0, 0.01, 1.0, 10.0).unwrap();
        assert!(!standard_form_coeffs(&g, 1.0, false).lindblad_ok);
        let s = standard_form_coeffs(&g, 1.0, true);
        assert!(s.lindblad_ok);
        assert!((s.d_pp / s.gamma - g.temperature).abs() < 1e-15);
    }
}
