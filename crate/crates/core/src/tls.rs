//! Non-Markovian dephasing by two-level fluctuators coupled to the dots.
//!
//! Each window site n carries a fluctuator coupled through χ_n|n⟩⟨n|σ_z. The composite
//! Hamiltonian is block diagonal in the σ_z eigenbasis: block s has the chain
//! Hamiltonian with diagonal s_n χ_n and, for a product initial bath state, weight
//! Π_n (1 + s_n ω_n)/2 with ω_n the initial inversion.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::ctap::{self, ChainSpec, PulseSchedule, TransportInput};
use crate::error::{Error, Result};
use crate::numeric::{eig_tracked, hermitian_eigen, DensityOperator as GenericDensity};
use crate::{CMatrix, DensityOperator, StateVector, C64};

/// One fluctuator per transport-window site.
#[derive(Debug, Clone, PartialEq)]
pub struct TlsBath {
    pub chi: Vec<f64>,
    /// Initial inversions Tr[ρ_n σ_z] ∈ [−1, 1].
    pub omega: Vec<f64>,
}

impl TlsBath {
    pub fn new(chi: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if chi.len() != omega.len() {
            return Err(Error::DimensionMismatch { expected: chi.len(), got: omega.len() });
        }
        if chi.iter().any(|c| !c.is_finite()) || omega.iter().any(|w| !(-1.0..=1.0).contains(w)) {
            return Err(Error::InvalidParameter("couplings must be finite and inversions in [−1, 1]".into()));
        }
        Ok(Self { chi, omega })
    }

    /// Uniform coupling, completely mixed fluctuators.
    pub fn mixed(sites: usize, chi: f64) -> Result<Self> {
        Self::new(vec![chi; sites], vec![0.0; sites])
    }

    pub fn sites(&self) -> usize {
        self.chi.len()
    }

    /// Sign blocks with nonzero weight, in lexicographic order (bit n set ⇔ s_n = +1).
    pub fn blocks(&self) -> Vec<(Vec<i8>, f64)> {
        let n = self.sites();
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << n) {
            let signs: Vec<i8> = (0..n).map(|k| if mask >> k & 1 == 1 { 1 } else { -1 }).collect();
            let w: f64 = signs.iter().zip(&self.omega).map(|(&s, &o)| (1.0 + s as f64 * o) / 2.0).product();
            if w > 0.0 {
                out.push((signs, w));
            }
        }
        out
    }

    /// Full-chain diagonal for a sign block.
    pub fn block_diagonal(&self, chain: &ChainSpec, signs: &[i8]) -> Vec<f64> {
        let mut d = vec![0.0; chain.n_dots()];
        for (k, (&s, &c)) in signs.iter().zip(&self.chi).enumerate() {
            d[chain.start() - 1 + k] = s as f64 * c;
        }
        d
    }
}

/// ρ_kl(t)/ρ_kl(0) for two sites with fluctuators (χ, ω) and Markovian rate `d_kl`:
/// e^{−D t}(cos χ_k t − iω_k sin χ_k t)(cos χ_l t + iω_l sin χ_l t).
/// A site without a fluctuator is passed as χ = 0.
pub fn reduced_coherence(d_kl: f64, k: (f64, f64), l: (f64, f64), t: f64) -> C64 {
    let (ck, wk) = k;
    let (cl, wl) = l;
    let fk = C64::new((ck * t).cos(), -wk * (ck * t).sin());
    let fl = C64::new((cl * t).cos(), wl * (cl * t).sin());
    fk * fl * (-d_kl * t).exp()
}

/// Rates (γ, Δ) of the time-local reduced master equation:
/// γ − iΔ = χ(sin χt − iω cos χt)/(cos χt + iω sin χt).
pub fn gamma_delta(t: f64, chi: f64, omega: f64) -> Result<(f64, f64)> {
    let (s, c) = (chi * t).sin_cos();
    let den = C64::new(c, omega * s);
    if den.norm() < 1e-12 {
        return Err(Error::Undefined(format!("pole of γ at χt = {}", chi * t)));
    }
    let z = C64::new(s, -omega * c) / den * chi;
    Ok((z.re, -z.im))
}

/// Outcome of a block-averaged transport run.
#[derive(Debug, Clone)]
pub struct TlsRun {
    pub times: Vec<f64>,
    pub rho: Vec<DensityOperator>,
    pub purity: Vec<f64>,
    pub signs: Vec<Vec<i8>>,
    pub weights: Vec<f64>,
    pub block_fidelities: Vec<f64>,
    pub block_phases: Vec<f64>,
    /// Weighted final population on the last window site.
    pub fidelity: f64,
}

/// Default memory budget for stored block trajectories.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

pub fn transport_with_tls(
    chain: &ChainSpec,
    schedule: &PulseSchedule,
    bath: &TlsBath,
    input: &TransportInput,
    dt: f64,
    record_every: usize,
    memory_budget: usize,
) -> Result<TlsRun> {
    if bath.sites() != chain.span() {
        return Err(Error::DimensionMismatch { expected: chain.span(), got: bath.sites() });
    }
    if bath.sites() > 12 {
        return Err(Error::ResourceLimit(format!("{} fluctuators give 2^{} blocks; at most 12 supported", bath.sites(), bath.sites())));
    }
    let blocks = bath.blocks();
    let steps = ((schedule.t_end - schedule.t_start) / dt).ceil().max(0.0) as usize;
    let records = steps / record_every.max(1) + 2;
    let need = blocks.len() * records * chain.n_dots() * std::mem::size_of::<C64>();
    if need > memory_budget {
        return Err(Error::ResourceLimit(format!("block trajectories need {need} bytes, budget is {memory_budget}")));
    }
    let runs = blocks
        .par_iter()
        .map(|(signs, _)| {
            let diag = bath.block_diagonal(chain, signs);
            ctap::run_transport(chain, schedule, input, dt, Some(&diag), record_every)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = chain.n_dots();
    let times = runs[0].trajectory.times.clone();
    let mut rho = Vec::with_capacity(times.len());
    let mut purity = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let mut m = CMatrix::zeros(n, n);
        for (run, (_, w)) in runs.iter().zip(&blocks) {
            let psi = run.trajectory.states[k].amplitudes();
            m += psi * psi.adjoint() * C64::new(*w, 0.0);
        }
        let r = GenericDensity::from_matrix_unchecked(m);
        purity.push(r.purity());
        rho.push(r);
    }
    let fidelity = blocks.iter().zip(&runs).map(|((_, w), r)| w * r.fidelity).sum();
    Ok(TlsRun {
        times,
        rho,
        purity,
        signs: blocks.iter().map(|b| b.0.clone()).collect(),
        weights: blocks.iter().map(|b| b.1).collect(),
        block_fidelities: runs.iter().map(|r| r.fidelity).collect(),
        block_phases: runs.iter().map(|r| r.dynamical_phase).collect(),
        fidelity,
    })
}

/// Largest deviation of a sampled curve from its running mean over `window` samples.
/// Slow adiabatic population changes give values near zero; Rabi-like beating between
/// nearly degenerate levels gives values comparable to the oscillation amplitude.
pub fn oscillation_amplitude(series: &[f64], window: usize) -> f64 {
    let w = window.max(1);
    if series.len() < 2 * w + 1 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in w..series.len() - w {
        let mean = series[i - w..=i + w].iter().sum::<f64>() / (2 * w + 1) as f64;
        worst = worst.max((series[i] - mean).abs());
    }
    worst
}

/// Worst-case centrality of the transported level over all sign blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub satisfied: bool,
    /// Smallest distance from E₀ to its neighbors while central; negative (minus the
    /// distance to the central level) once E₀ has left the center.
    pub margin: f64,
    pub worst_block: Vec<i8>,
    pub worst_sample: usize,
}

/// Checks that the level connected to |m⟩ stays at the center of the window spectrum for every
/// sign block along the given (Ω_P, Ω_S) samples. The level is identified by overlap with |m⟩
/// at the first sample and followed by eigenvector continuity.
pub fn crossing_condition(chain: &ChainSpec, bath: &TlsBath, couplings: &[(f64, f64)]) -> Result<CrossingReport> {
    if bath.sites() != chain.span() {
        return Err(Error::DimensionMismatch { expected: chain.span(), got: bath.sites() });
    }
    if couplings.is_empty() {
        return Err(Error::InvalidParameter("no coupling samples".into()));
    }
    let span = chain.span();
    let off = chain.start() - 1;
    let centre = span / 2;
    let mut worst = CrossingReport { satisfied: true, margin: f64::INFINITY, worst_block: vec![], worst_sample: 0 };
    let signs_all: Vec<Vec<i8>> = (0u64..(1u64 << span)).map(|mask| (0..span).map(|k| if mask >> k & 1 == 1 { 1 } else { -1 }).collect()).collect();
    for signs in signs_all {
        let diag = bath.block_diagonal(chain, &signs);
        let hs = couplings
            .iter()
            .map(|&(p, s)| {
                let h = ctap::hamiltonian_real(chain, p, s, Some(&diag))?;
                Ok(crate::numeric::complexify(&h.view((off, off), (span, span)).into_owned()))
            })
            .collect::<Result<Vec<CMatrix>>>()?;
        let tracked = eig_tracked(&hs, 0.0)?;
        let b0 = (0..span)
            .max_by(|&a, &b| tracked.vectors[0][(0, a)].norm().partial_cmp(&tracked.vectors[0][(0, b)].norm()).expect("finite"))
            .expect("non-empty");
        for (k, vals) in tracked.values.iter().enumerate() {
            let e0 = vals[b0];
            let mut sorted = vals.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let below = sorted.iter().filter(|&&e| e < e0).count();
            let margin = if below == centre {
                let lo = if centre > 0 { e0 - sorted[centre - 1] } else { f64::INFINITY };
                let hi = if centre + 1 < span { sorted[centre + 1] - e0 } else { f64::INFINITY };
                lo.min(hi)
            } else {
                -(e0 - sorted[centre]).abs().max(f64::MIN_POSITIVE)
            };
            if margin < worst.margin {
                worst = CrossingReport { satisfied: margin > 0.0, margin, worst_block: signs.clone(), worst_sample: k };
            }
        }
    }
    Ok(worst)
}

/// [`crossing_condition`] on `n` samples of step two of a pulse schedule.
pub fn crossing_condition_schedule(chain: &ChainSpec, schedule: &PulseSchedule, bath: &TlsBath, n: usize) -> Result<CrossingReport> {
    let (t0, t1) = schedule.step_boundaries();
    let n = n.max(2);
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
            (schedule.omega_p(t), schedule.omega_s(t))
        })
        .collect();
    crossing_condition(chain, bath, &samples)
}

/// Smallest coupling Ω (Stokes and intermediate, with the pump off) for which the transported
/// level is central in every block, found by bisection on `[lo, hi]`.
pub fn crossing_threshold(n_dots: usize, bath: &TlsBath, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let check = |omega: f64| -> Result<bool> {
        let chain = ChainSpec::new(n_dots, omega)?;
        Ok(crossing_condition(&chain, bath, &[(0.0, omega)])?.satisfied)
    };
    let (mut a, mut b) = (lo, hi);
    if check(a)? || !check(b)? {
        return Err(Error::InvalidParameter("bisection interval does not bracket the threshold".into()));
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if check(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Superposition (|k⟩ + |m⟩)/√2 of a bystander and the window start (1-based sites).
pub fn bystander_superposition(chain: &ChainSpec, k: usize) -> Result<StateVector> {
    if k == 0 || k > chain.n_dots() || k == chain.start() {
        return Err(Error::InvalidParameter(format!("invalid bystander site {k}")));
    }
    let mut v = DVector::zeros(chain.n_dots());
    v[k - 1] = C64::new(1.0, 0.0);
    v[chain.start() - 1] = C64::new(1.0, 0.0);
    StateVector::new(v)
}

/// Dark-branch energies of a block on the given times (see [`ctap::dark_branch_energies`]).
pub fn block_energies(chain: &ChainSpec, schedule: &PulseSchedule, bath: &TlsBath, signs: &[i8], times: &[f64]) -> Result<Vec<f64>> {
    let diag = bath.block_diagonal(chain, signs);
    ctap::dark_branch_energies(chain, schedule, Some(&diag), times)
}

/// Sorted window eigenvalues of a block at time `t`.
pub fn block_spectrum(chain: &ChainSpec, schedule: &PulseSchedule, bath: &TlsBath, signs: &[i8], t: f64) -> Result<Vec<f64>> {
    let diag = bath.block_diagonal(chain, signs);
    let h = ctap::hamiltonian(chain, schedule, t, Some(&diag))?;
    let off = chain.start() - 1;
    let k = chain.span();
    Ok(hermitian_eigen(&h.view((off, off), (k, k)).into_owned()).0)
}
