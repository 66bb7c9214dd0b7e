//! Classical one-dimensional collisional Brownian motion: hard-core collisions with a
//! thermal gas, the flux-weighted collision statistics, an exact event-driven jump
//! simulator and the moment equations it implies.
//!
//! With u = p_g/m_g ~ N(0, T/m_g) and w = p/m − u, every collision integral is a
//! Gaussian absolute moment of w. The momentum kick is q = −2μ w with reduced mass
//! μ = m_g/(1 + α), so the mean kick is −f_T(p) = −2μ n_g E[w|w|] and the energy
//! kick ∫(q² + 2pq)P_p = −h_T(p).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::gas::{abs_cube_mean, abs_mean, signed_square_mean, GasModel};
use crate::rng;

/// Post-collision momenta (p̄, p̄_g) of a hard-core collision.
pub fn collide(p: f64, p_g: f64, m: f64, m_g: f64) -> (f64, f64) {
    let s = m + m_g;
    ((2.0 * m * p_g + (m - m_g) * p) / s, (2.0 * m_g * p + (m_g - m) * p_g) / s)
}

/// Momentum transferred to the Brownian particle, q = (2mp_g − 2m_g p)/(m + m_g).
pub fn kick(p: f64, p_g: f64, m: f64, m_g: f64) -> f64 {
    2.0 * (m * p_g - m_g * p) / (m + m_g)
}

/// Rate density P_p(p_g) = n_g μ_T(p_g)|p_g/m_g − p/m| of collisions with gas momentum p_g.
pub fn collision_density(gas: &GasModel, m: f64, p: f64, p_g: f64) -> f64 {
    gas.n_g * gas.maxwell_boltzmann(p_g) * (p_g / gas.m_g - p / m).abs()
}

/// Rate density P_p(q) of momentum kicks q.
pub fn kick_density(gas: &GasModel, m: f64, p: f64, q: f64) -> f64 {
    let (mg, t) = (gas.m_g, gas.temperature);
    let s = m + mg;
    let arg = q * s + 2.0 * mg * p;
    gas.n_g / (2.0 * PI * mg * t).sqrt() * s * s / (4.0 * m * m * mg) * q.abs() * (-arg * arg / (8.0 * m * m * mg * t)).exp()
}

/// Total collision rate ∫P_p(p_g)dp_g.
pub fn total_rate(gas: &GasModel, m: f64, p: f64) -> f64 {
    gas.n_g * abs_mean(p / m, gas.velocity_spread())
}

fn reduced_mass(gas: &GasModel, m: f64) -> f64 {
    gas.m_g * m / (gas.m_g + m)
}

/// Friction f_T(p) = −∫q P_p(q)dq.
pub fn friction(gas: &GasModel, m: f64, p: f64) -> f64 {
    2.0 * reduced_mass(gas, m) * gas.n_g * signed_square_mean(p / m, gas.velocity_spread())
}

/// Heating h_T(p) = −∫(q² + 2pq)P_p(q)dq, so that d⟨p²⟩/dt = −⟨h_T⟩.
pub fn heating(gas: &GasModel, m: f64, p: f64) -> f64 {
    let a = gas.alpha(m);
    let s = gas.velocity_spread();
    let v = p / m;
    4.0 * gas.m_g * gas.n_g / (1.0 + a).powi(2) * (p * (1.0 + a) * signed_square_mean(v, s) - gas.m_g * abs_cube_mean(v, s))
}

/// Momentum diffusion ∫(q²/2)P_p(q)dq.
pub fn half_square_kick(gas: &GasModel, m: f64, p: f64) -> f64 {
    let mu = reduced_mass(gas, m);
    2.0 * mu * mu * gas.n_g * abs_cube_mean(p / m, gas.velocity_spread())
}

/// Kramers coefficients of the slow heavy-particle limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kramers {
    pub gamma: f64,
    pub d_pp: f64,
}

pub fn kramers(gas: &GasModel, m: f64) -> Kramers {
    let gamma = gas.gamma(m);
    Kramers { gamma, d_pp: m * gas.temperature * gamma }
}

/// The three integrals of the split symmetric/antisymmetric evaluation: e^{−αp²/2mT},
/// ∫_0^{αp} e^{−p_g²/2m_gT}dp_g and ∫_0^{αp}(p_g/m_g)² e^{−p_g²/2m_gT}dp_g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitIntegrals {
    pub gauss: f64,
    pub sym0: f64,
    pub sym2: f64,
}

impl SplitIntegrals {
    pub fn exact(gas: &GasModel, m: f64, p: f64) -> Self {
        let s = gas.m_g * gas.temperature;
        let a = gas.alpha(m) * p;
        let g0 = (PI * s / 2.0).sqrt() * erf(a / (2.0 * s).sqrt());
        let e = (-a * a / (2.0 * s)).exp();
        Self { gauss: e, sym0: g0, sym2: s * (g0 - a * e) / (gas.m_g * gas.m_g) }
    }

    /// Truncated expansions, exact through order p⁵.
    pub fn series(gas: &GasModel, m: f64, p: f64) -> Self {
        let a = gas.alpha(m);
        let mt = m * gas.temperature;
        let x = a * p * p / mt;
        Self {
            gauss: 1.0 - x / 2.0 + x * x / 8.0,
            sym0: a * p * (1.0 - x / 6.0 + x * x / 40.0),
            sym2: a * p.powi(3) / (3.0 * m * m) * (1.0 - 0.3 * x),
        }
    }

    pub fn friction(&self, gas: &GasModel, m: f64, p: f64) -> f64 {
        let (mg, t, a) = (gas.m_g, gas.temperature, gas.alpha(m));
        4.0 * mg * gas.n_g / ((1.0 + a) * (2.0 * PI * mg * t).sqrt())
            * (2.0 * p * t / m * self.gauss + p * p / (m * m) * self.sym0 + self.sym2)
    }

    pub fn heating(&self, gas: &GasModel, m: f64, p: f64) -> f64 {
        let (mg, t, a) = (gas.m_g, gas.temperature, gas.alpha(m));
        let s = mg * t;
        8.0 * gas.n_g / ((1.0 + a).powi(2) * mg * (2.0 * PI * s).sqrt())
            * (self.gauss * (2.0 * a * (1.0 - a) * s * p * p - 2.0 * s * s)
                + a * a * p.powi(3) * self.sym0
                + (1.0 - 2.0 * a) * p * mg * mg * self.sym2)
    }
}

/// (⟨x⟩, ⟨p⟩, ⟨x²⟩, ⟨p²⟩, ⟨{x, p}⟩).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentVector {
    pub x: f64,
    pub p: f64,
    pub x2: f64,
    pub p2: f64,
    pub xp: f64,
}

impl MomentVector {
    pub fn to_array(self) -> [f64; 5] {
        [self.x, self.p, self.x2, self.p2, self.xp]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self { x: a[0], p: a[1], x2: a[2], p2: a[3], xp: a[4] }
    }

    /// Moments of a Gaussian with the given means, variances and covariance.
    pub fn gaussian(x: f64, p: f64, var_x: f64, var_p: f64, cov_xp: f64) -> Self {
        Self { x, p, x2: var_x + x * x, p2: var_p + p * p, xp: 2.0 * (cov_xp + x * p) }
    }

    pub fn var_x(&self) -> f64 {
        self.x2 - self.x * self.x
    }

    pub fn var_p(&self) -> f64 {
        self.p2 - self.p * self.p
    }

    pub fn cov_xp(&self) -> f64 {
        0.5 * self.xp - self.x * self.p
    }

    /// Var x·Var p − Cov² (≥ ħ²/4 for a quantum state).
    pub fn covariance_determinant(&self) -> f64 {
        self.var_x() * self.var_p() - self.cov_xp().powi(2)
    }
}

/// How the collision terms of the moment equations are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    /// Linear Kramers terms (slow heavy-particle limit): f = γp, h = −2γ(mT − p²).
    Kramers,
    /// Exact collision integrals averaged over a Gaussian momentum distribution.
    Gaussian,
}

/// Collision-term averages (⟨f_T⟩, ⟨{x, f_T}⟩, ⟨h_T⟩, ⟨E|w|³⟩) under a closure.
pub(crate) fn closed_averages(gas: &GasModel, m: f64, mv: &MomentVector, closure: Closure) -> [f64; 4] {
    match closure {
        Closure::Kramers => {
            let g = gas.gamma(m);
            let s = gas.velocity_spread();
            [g * mv.p, g * mv.xp, -2.0 * g * (m * gas.temperature - mv.p2), abs_cube_mean(0.0, s)]
        }
        Closure::Gaussian => {
            let a = gas.alpha(m);
            let var_p = mv.var_p().max(0.0);
            let v = mv.p / m;
            let s = (gas.velocity_spread().powi(2) + var_p / (m * m)).sqrt();
            let cf = 2.0 * reduced_mass(gas, m) * gas.n_g;
            let w2 = signed_square_mean(v, s);
            let w1 = abs_mean(v, s);
            let w3 = abs_cube_mean(v, s);
            let f = cf * w2;
            let df = cf * 2.0 / m * w1;
            let xf = mv.x * f + mv.cov_xp() * df;
            let pf_unit = mv.p * w2 + var_p * 2.0 / m * w1;
            let h = 4.0 * gas.m_g * gas.n_g / (1.0 + a).powi(2) * ((1.0 + a) * pf_unit - gas.m_g * w3);
            [f, 2.0 * xf, h, w3]
        }
    }
}

/// Right-hand side of the classical moment equations.
pub fn moment_rhs(gas: &GasModel, m: f64, mv: &MomentVector, closure: Closure) -> MomentVector {
    let [f, xf, h, _] = closed_averages(gas, m, mv, closure);
    MomentVector { x: mv.p / m, p: -f, x2: mv.xp / m, p2: -h, xp: 2.0 * mv.p2 / m - xf }
}

/// Classical RK4 integration of the moment equations, sampled at `times` (ascending, from 0).
pub fn evolve_classical_moments(
    gas: &GasModel,
    m: f64,
    m0: MomentVector,
    times: &[f64],
    dt: f64,
    closure: Closure,
) -> Result<Vec<MomentVector>> {
    crate::qbm::integrate_moments(|mv| moment_rhs(gas, m, mv, closure), m0, times, dt)
}

/// Which gas-momentum statistics drive the collisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistics {
    /// Flux-weighted n_g μ_T(p_g)|u − v| (the correct one).
    Flux,
    /// Plain Maxwell–Boltzmann μ_T(p_g) at the constant rate of a particle at rest.
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

/// One simulated trajectory sampled at requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRun {
    pub samples: Vec<PhasePoint>,
    pub collisions: u64,
    pub proposals: u64,
}

/// Event-driven simulation of the classical master equation. Between collisions the
/// particle flies freely; collision candidates arrive at the constant envelope rate
/// n_g(σ√(2/π) + |p/m| + 5σ), σ = √(T/m_g), with gas momenta drawn from
/// μ_T(p_g)(|u| + |p/m| + 5σ) and accepted with probability |u − p/m|/(|u| + |p/m| + 5σ).
pub fn simulate_jumps<R: Rng + ?Sized>(
    gas: &GasModel,
    m: f64,
    start: PhasePoint,
    sample_times: &[f64],
    statistics: Statistics,
    rng: &mut R,
) -> Result<JumpRun> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter("mass must be positive".into()));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("sample times must be nonnegative and ascending".into()));
    }
    let sigma = gas.velocity_spread();
    let spread_weight = sigma * (2.0 / PI).sqrt();
    let (mut t, mut x, mut p) = (0.0, start.x, start.p);
    let mut samples = Vec::with_capacity(sample_times.len());
    let (mut collisions, mut proposals) = (0u64, 0u64);
    for &ts in sample_times {
        loop {
            let v = p / m;
            let (envelope, rate) = match statistics {
                Statistics::Flux => {
                    let env = v.abs() + 5.0 * sigma;
                    (env, gas.n_g * (spread_weight + env))
                }
                Statistics::Thermal => (0.0, gas.rest_rate()),
            };
            let wait = if rate > 0.0 { Exp::new(rate).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng) } else { f64::INFINITY };
            if t + wait > ts {
                x += v * (ts - t);
                t = ts;
                samples.push(PhasePoint { x, p });
                break;
            }
            t += wait;
            x += v * wait;
            proposals += 1;
            let z: f64 = StandardNormal.sample(rng);
            let u = match statistics {
                Statistics::Thermal => sigma * z,
                Statistics::Flux => {
                    if rng.random::<f64>() * (spread_weight + envelope) < spread_weight {
                        let mag = sigma * (-2.0 * (1.0 - rng.random::<f64>()).ln()).sqrt();
                        if rng.random::<bool>() { mag } else { -mag }
                    } else {
                        sigma * z
                    }
                }
            };
            let accept = match statistics {
                Statistics::Thermal => true,
                Statistics::Flux => {
                    let ratio = (u - v).abs() / (u.abs() + envelope);
                    if ratio > 1.0 {
                        return Err(Error::Undefined(format!("rejection envelope violated (ratio {ratio})")));
                    }
                    rng.random::<f64>() < ratio
                }
            };
            if accept {
                p = collide(p, gas.m_g * u, m, gas.m_g).0;
                collisions += 1;
            }
        }
    }
    Ok(JumpRun { samples, collisions, proposals })
}

/// Independent Gaussian initial distribution of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDistribution {
    pub x_mean: f64,
    pub x_sd: f64,
    pub p_mean: f64,
    pub p_sd: f64,
}

impl InitialDistribution {
    pub fn moments(&self) -> MomentVector {
        MomentVector::gaussian(self.x_mean, self.p_mean, self.x_sd.powi(2), self.p_sd.powi(2), 0.0)
    }
}

/// Ensemble moment estimates with their standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRun {
    pub times: Vec<f64>,
    pub mean: Vec<MomentVector>,
    pub stderr: Vec<MomentVector>,
    pub final_states: Vec<PhasePoint>,
    pub collisions: u64,
    pub trajectories: usize,
}

const CHUNK: usize = 512;

/// Runs `n_traj` trajectories in parallel; trajectory k uses stream k of `seed` and
/// partial sums are combined in trajectory order, so the result does not depend on
/// the thread count.
pub fn ensemble(
    gas: &GasModel,
    m: f64,
    init: &InitialDistribution,
    times: &[f64],
    n_traj: usize,
    seed: u64,
    statistics: Statistics,
) -> Result<EnsembleRun> {
    if n_traj < 2 {
        return Err(Error::InvalidParameter("ensemble needs at least two trajectories".into()));
    }
    let nt = times.len();
    let chunks: Vec<(usize, usize)> = (0..n_traj).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(n_traj))).collect();
    type Partial = (Vec<[f64; 5]>, Vec<[f64; 5]>, Vec<PhasePoint>, u64);
    let partials: Vec<Result<Partial>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut s1 = vec![[0.0; 5]; nt];
            let mut s2 = vec![[0.0; 5]; nt];
            let mut finals = Vec::with_capacity(hi - lo);
            let mut coll = 0;
            for k in lo..hi {
                let mut r = rng::stream(seed, k as u64);
                let zx: f64 = StandardNormal.sample(&mut r);
                let zp: f64 = StandardNormal.sample(&mut r);
                let start = PhasePoint { x: init.x_mean + init.x_sd * zx, p: init.p_mean + init.p_sd * zp };
                let run = simulate_jumps(gas, m, start, times, statistics, &mut r)?;
                coll += run.collisions;
                for (i, s) in run.samples.iter().enumerate() {
                    let q = [s.x, s.p, s.x * s.x, s.p * s.p, 2.0 * s.x * s.p];
                    for j in 0..5 {
                        s1[i][j] += q[j];
                        s2[i][j] += q[j] * q[j];
                    }
                }
                if let Some(last) = run.samples.last() {
                    finals.push(*last);
                }
            }
            Ok((s1, s2, finals, coll))
        })
        .collect();
    let mut s1 = vec![[0.0; 5]; nt];
    let mut s2 = vec![[0.0; 5]; nt];
    let mut final_states = Vec::with_capacity(n_traj);
    let mut collisions = 0;
    for part in partials {
        let (a, b, f, c) = part?;
        for i in 0..nt {
            for j in 0..5 {
                s1[i][j] += a[i][j];
                s2[i][j] += b[i][j];
            }
        }
        final_states.extend(f);
        collisions += c;
    }
    let n = n_traj as f64;
    let mut mean = Vec::with_capacity(nt);
    let mut stderr = Vec::with_capacity(nt);
    for i in 0..nt {
        let mu: [f64; 5] = std::array::from_fn(|j| s1[i][j] / n);
        let se: [f64; 5] = std::array::from_fn(|j| ((s2[i][j] / n - mu[j] * mu[j]).max(0.0) * n / (n - 1.0) / n).sqrt());
        mean.push(MomentVector::from_array(mu));
        stderr.push(MomentVector::from_array(se));
    }
    Ok(EnsembleRun { times: times.to_vec(), mean, stderr, final_states, collisions, trajectories: n_traj })
}

/// Pearson χ² test of momentum samples against the Maxwell–Boltzmann distribution of a
/// particle of mass `m`, using `bins` equiprobable bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn maxwell_boltzmann_chi2(momenta: &[f64], m: f64, temperature: f64, bins: usize) -> Result<ChiSquareTest> {
    if bins < 2 || momenta.len() < 5 * bins {
        return Err(Error::InvalidParameter("need at least 2 bins and 5 expected counts per bin".into()));
    }
    let sd = (m * temperature).sqrt();
    let mut counts = vec![0usize; bins];
    for &p in momenta {
        let cdf = 0.5 * (1.0 + erf(p / (sd * 2f64.sqrt())));
        let k = ((cdf * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let expected = momenta.len() as f64 / bins as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = bins - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ChiSquareTest { statistic, dof, p_value: 1.0 - dist.cdf(statistic) })
}
