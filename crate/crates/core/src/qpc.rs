//! Markovian dephasing of a dot chain by a parallel rail of quantum point contacts.
//!
//! Every QPC j weakly measures the charge on the chain through the effect operator
//! π_j = (κ/N)Σ_i (1 − α/r_ij)|i⟩⟨i|. With c_ij = √(1 − α/r_ij) and d_ij = 1 − c_ij,
//! completeness Σ_j π_j = 1 lets all rates be written through the convergent sums
//! D_kl = (R/N)κ·½Σ_j (d_kj − d_lj)², loss rate = Σ_ii' p_i p_i' D_ii' and
//! bystander coherence rate = Σ_i p_i D_ki.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::ctap::{self, ChainSpec, PulseSchedule, TransportInput};
use crate::error::{Error, Result};
use crate::numeric::{self, quad};
use crate::{CMatrix, DensityOperator, C64};

/// Sensitivity profile of a QPC to charge on the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// α/r_ij with r_ij = √(a² + (|i − j|d)²).
    Distance { a: f64, d: f64, alpha: f64 },
    /// α/r_ij = α·δ_ij with dimensionless α (the a/d → 0 limit at fixed α/a).
    Local { alpha: f64 },
}

/// Rail of QPCs. `rate_per_qpc` is R/N; the infinite rail is truncated at
/// `site_cutoff` sites on either side of the region of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpcArray {
    pub kernel: Kernel,
    pub rate_per_qpc: f64,
    pub site_cutoff: usize,
}

impl QpcArray {
    pub fn new(kernel: Kernel, rate_per_qpc: f64, site_cutoff: usize) -> Result<Self> {
        let weak = match kernel {
            Kernel::Distance { a, d, alpha } => {
                if !(a > 0.0 && d > 0.0 && alpha >= 0.0) {
                    return Err(Error::InvalidParameter("QPC rail needs a > 0, d > 0, α ≥ 0".into()));
                }
                alpha / a
            }
            Kernel::Local { alpha } => {
                if !(alpha >= 0.0) {
                    return Err(Error::InvalidParameter("α must be nonnegative".into()));
                }
                alpha
            }
        };
        if !(weak < 1.0) {
            return Err(Error::InvalidParameter(format!("measurement must be weak (α/a < 1), got {weak}")));
        }
        if !(rate_per_qpc >= 0.0) || !rate_per_qpc.is_finite() {
            return Err(Error::InvalidParameter("measurement rate must be nonnegative".into()));
        }
        if site_cutoff < 1 {
            return Err(Error::InvalidParameter("site_cutoff must be at least 1".into()));
        }
        Ok(Self { kernel, rate_per_qpc, site_cutoff })
    }

    /// Distance kernel with α = 0.04a and d = 1, per-QPC rate 1 (R = N).
    pub fn figure_parameters(a_over_d: f64) -> Result<Self> {
        if a_over_d == 0.0 {
            return Self::new(Kernel::Local { alpha: 0.04 }, 1.0, 10_000);
        }
        Self::new(Kernel::Distance { a: a_over_d, d: 1.0, alpha: 0.04 * a_over_d }, 1.0, 10_000)
    }

    /// Number of QPCs on the truncated ring.
    pub fn ring_size(&self) -> usize {
        2 * self.site_cutoff + 1
    }

    /// α/r for two sites `sep` apart.
    pub fn sensitivity(&self, sep: usize) -> f64 {
        match self.kernel {
            Kernel::Distance { a, d, alpha } => alpha / (a * a + (sep as f64 * d).powi(2)).sqrt(),
            Kernel::Local { alpha } => {
                if sep == 0 {
                    alpha
                } else {
                    0.0
                }
            }
        }
    }

    /// d = 1 − √(1 − α/r), computed without cancellation.
    fn deficit(&self, sep: usize) -> f64 {
        let s = self.sensitivity(sep);
        s / (1.0 + (1.0 - s).sqrt())
    }
}

/// κ̄ = N/Σ_i(1 − α/r_ij) on the periodic ring of `ring_size` QPCs (the same for every j).
pub fn kappa(array: &QpcArray) -> f64 {
    let n = array.ring_size();
    let m = array.site_cutoff;
    let s: f64 = array.sensitivity(0) + 2.0 * (1..=m).map(|k| array.sensitivity(k)).sum::<f64>();
    1.0 / (1.0 - s / n as f64)
}

/// Diagonal of the effect operator of QPC `j` on the ring sites `sites` (minimal-image distances).
pub fn effect_diagonal(array: &QpcArray, j: usize, sites: &[usize]) -> Vec<f64> {
    let n = array.ring_size();
    let k = kappa(array);
    sites
        .iter()
        .map(|&i| {
            let raw = i.abs_diff(j) % n;
            let sep = raw.min(n - raw);
            k / n as f64 * (1.0 - array.sensitivity(sep))
        })
        .collect()
}

/// |Σ_j ⟨i|π_j|i⟩ − 1| for a ring site `i`.
pub fn completeness_defect(array: &QpcArray, i: usize) -> f64 {
    let n = array.ring_size();
    let k = kappa(array);
    let mut total = 0.0;
    for j in 0..n {
        let raw = i.abs_diff(j);
        let sep = raw.min(n - raw);
        total += k / n as f64 * (1.0 - array.sensitivity(sep));
    }
    (total - 1.0).abs()
}

/// Dephasing rate between two sites `sep` apart on the infinite rail.
pub fn dephasing_rate_sep(array: &QpcArray, sep: usize) -> f64 {
    if sep == 0 {
        return 0.0;
    }
    let pref = array.rate_per_qpc * kappa(array);
    match array.kernel {
        Kernel::Local { .. } => {
            let b = array.deficit(0);
            pref * b * b
        }
        Kernel::Distance { d, alpha, .. } => {
            // sites k = 0, l = sep; QPCs j ∈ [−M, sep + M]
            let m = array.site_cutoff as i64;
            let s = sep as i64;
            let mut acc = 0.0;
            for j in -m..=(s + m) {
                let dk = array.deficit(j.unsigned_abs() as usize);
                let dl = array.deficit((s - j).unsigned_abs() as usize);
                acc += (dk - dl) * (dk - dl);
            }
            // (d_k − d_l)² ≈ (α/2)²Δ²/(j⁴d²) beyond the cutoff, both sides
            let tail = alpha * alpha * (sep as f64).powi(2) / (12.0 * (m as f64).powi(3) * d * d);
            pref * (0.5 * acc + tail)
        }
    }
}

/// D_kl for sites `k`, `l` (any indexing; only |k − l| matters).
pub fn dephasing_rate(array: &QpcArray, k: usize, l: usize) -> f64 {
    dephasing_rate_sep(array, k.abs_diff(l))
}

/// Weak-measurement large-separation limit πRα²coth(πa/d)/(4Nd²(a/d)).
pub fn saturation_rate(array: &QpcArray) -> Result<f64> {
    match array.kernel {
        Kernel::Distance { a, d, alpha } => {
            let x = a / d;
            let coth = 1.0 / (std::f64::consts::PI * x).tanh();
            Ok(std::f64::consts::PI * array.rate_per_qpc * alpha * alpha / (4.0 * d * d) * coth / x)
        }
        Kernel::Local { .. } => Err(Error::Undefined("no saturation law for the local kernel".into())),
    }
}

/// D_kl for all pairs of `n` consecutive sites, computed once per separation.
pub fn dephasing_table(array: &QpcArray, n: usize) -> DMatrix<f64> {
    let by_sep: Vec<f64> = (0..n).map(|s| dephasing_rate_sep(array, s)).collect();
    DMatrix::from_fn(n, n, |k, l| by_sep[k.abs_diff(l)])
}

/// Number of trapezoid points for the loss integrals.
pub const LOSS_POINTS: usize = 2000;

/// Result of an adiabatic-loss integral.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub value: f64,
    /// Same integral on the doubled grid.
    pub refined: f64,
    pub t0: f64,
    pub t1: f64,
    /// Largest adiabaticity ratio seen on the step-two samples.
    pub max_adiabaticity: f64,
    pub warning: Option<String>,
}

fn window_populations(chain: &ChainSpec, schedule: &PulseSchedule, t: f64) -> Result<Vec<f64>> {
    let (p, s) = (schedule.omega_p(t), schedule.omega_s(t));
    Ok(ctap::dark_state(p, s, chain.omega_max(), chain.span())?.populations())
}

fn adiabatic_integral(
    chain: &ChainSpec,
    schedule: &PulseSchedule,
    rate: impl Fn(&[f64]) -> f64,
) -> Result<LossReport> {
    let (t0, t1) = schedule.step_boundaries();
    let eval = |n: usize| -> Result<f64> {
        let h = (t1 - t0) / (n - 1) as f64;
        let ys = (0..n).map(|k| window_populations(chain, schedule, t0 + h * k as f64).map(|p| rate(&p))).collect::<Result<Vec<_>>>()?;
        Ok(quad::trapezoid(&ys, h))
    };
    let value = eval(LOSS_POINTS)?;
    let refined = eval(2 * LOSS_POINTS - 1)?;
    let mut max_ad = 0.0f64;
    for k in 0..=20 {
        let t = t0 + (t1 - t0) * k as f64 / 20.0;
        max_ad = max_ad.max(ctap::adiabaticity_metric(chain, schedule, t, None)?.max);
    }
    let mut warning = None;
    if max_ad >= 0.1 {
        warning = Some(format!("outside the adiabatic regime: max adiabaticity ratio {max_ad:.3}"));
    }
    if value > 0.0 && ((value - refined) / value).abs() > 1e-4 {
        warning = Some(format!("trapezoid not converged: {value} vs {refined}"));
    }
    Ok(LossReport { value, refined, t0, t1, max_adiabaticity: max_ad, warning })
}

/// Transfer error probability ∫ Σ_ii' p_i p_i' D_ii' dt over step two, to first order in
/// the measurement, with p_i the dark-state populations.
pub fn transfer_loss(array: &QpcArray, chain: &ChainSpec, schedule: &PulseSchedule) -> Result<LossReport> {
    let d = dephasing_table(array, chain.span());
    adiabatic_integral(chain, schedule, |p| {
        let mut s = 0.0;
        for i in 0..p.len() {
            for j in 0..p.len() {
                s += p[i] * p[j] * d[(i, j)];
            }
        }
        s
    })
}

/// Decay exponent of the coherence between bystander site `k` (1-based, outside the window)
/// and the transported amplitude: ∫ Σ_i p_i D_ki dt over step two.
pub fn coherence_loss(array: &QpcArray, chain: &ChainSpec, schedule: &PulseSchedule, k: usize) -> Result<LossReport> {
    if k == 0 || k > chain.n_dots() || (chain.start() <= k && k <= chain.end()) {
        return Err(Error::InvalidParameter(format!("bystander site {k} must lie on the chain outside the transport window")));
    }
    let rates: Vec<f64> = (chain.start()..=chain.end()).map(|i| dephasing_rate(array, k, i)).collect();
    adiabatic_integral(chain, schedule, |p| p.iter().zip(&rates).map(|(a, b)| a * b).sum())
}

/// Diagonal Lindblad operators on the transport window that reproduce the rail's dissipator.
///
/// The Kraus operators √R·A_j are shifted by multiples of the identity (which leaves the
/// Lindbladian unchanged for Hermitian operators) and compressed through the eigenvectors of
/// the Gram matrix G_kl = (R/N)κ Σ_j d_kj d_lj.
pub fn lindblad_operators(array: &QpcArray, chain: &ChainSpec) -> Vec<CMatrix> {
    let w = chain.span();
    let pref = array.rate_per_qpc * kappa(array);
    let m = array.site_cutoff as i64;
    let g = DMatrix::from_fn(w, w, |k, l| {
        let mut acc = 0.0;
        for j in -m..=(w as i64 - 1 + m) {
            acc += array.deficit((j - k as i64).unsigned_abs() as usize) * array.deficit((j - l as i64).unsigned_abs() as usize);
        }
        pref * acc
    });
    let eig = SymmetricEigen::new(g);
    let n = chain.n_dots();
    let off = chain.start() - 1;
    let mut ops = Vec::new();
    for (mu, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let mut op = CMatrix::zeros(n, n);
        for k in 0..w {
            op[(off + k, off + k)] = C64::new(lam.sqrt() * eig.eigenvectors[(k, mu)], 0.0);
        }
        ops.push(op);
    }
    ops
}

/// Full master-equation fidelity next to the adiabatic first-order estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub fidelity_full: f64,
    /// Closed-system fidelity minus the adiabatic loss.
    pub fidelity_adiabatic: f64,
    pub closed_fidelity: f64,
    pub loss_full: f64,
    pub loss_adiabatic: f64,
}

/// Integrates the Lindblad equation over the whole pulse window and compares it with
/// [`transfer_loss`].
pub fn lindblad_cross_check(array: &QpcArray, chain: &ChainSpec, schedule: &PulseSchedule, dt: f64) -> Result<CrossCheck> {
    let n = chain.n_dots();
    let start = chain.start() - 1;
    let rho0 = DensityOperator::new(CMatrix::from_fn(n, n, |i, j| if i == start && j == start { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))?;
    let ops = if array.rate_per_qpc > 0.0 { lindblad_operators(array, chain) } else { vec![] };
    let h = |t: f64| ctap::hamiltonian(chain, schedule, t, None).expect("no diagonal");
    let every = usize::MAX / 2;
    let traj = numeric::evolve_lindblad(h, &ops, &rho0, (schedule.t_start, schedule.t_end), dt, every)?;
    let fidelity_full = traj.last().matrix()[(chain.end() - 1, chain.end() - 1)].re;
    let closed = ctap::run_transport(chain, schedule, &TransportInput::Site(chain.start()), dt, None, every)?;
    let loss_adiabatic = if array.rate_per_qpc > 0.0 { transfer_loss(array, chain, schedule)?.value } else { 0.0 };
    Ok(CrossCheck {
        fidelity_full,
        fidelity_adiabatic: closed.fidelity - loss_adiabatic,
        closed_fidelity: closed.fidelity,
        loss_full: 1.0 - fidelity_full,
        loss_adiabatic,
    })
}
