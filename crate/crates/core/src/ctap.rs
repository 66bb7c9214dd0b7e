//! Coherent tunneling by adiabatic passage along a chain of quantum dots.
//!
//! Sites are numbered from 1 as in the usual chain notation; the transport
//! window runs from site `m` to site `n`. The pump pulse couples sites
//! `m, m+1`, the Stokes pulse couples `n−1, n`, and the bonds in between are
//! held at Ω_max. Bonds outside the window are off.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::{self, eig_tracked, hermitian_eigen};
use crate::{CMatrix, StateVector, C64};

/// Dot chain with its transport window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    n_dots: usize,
    omega_max: f64,
    m: usize,
    n: usize,
}

impl ChainSpec {
    /// Transport from the first to the last dot.
    pub fn new(n_dots: usize, omega_max: f64) -> Result<Self> {
        Self::with_window(n_dots, omega_max, 1, n_dots)
    }

    /// Transport from site `m` to site `n` (1-based, `n − m` even and positive).
    pub fn with_window(n_dots: usize, omega_max: f64, m: usize, n: usize) -> Result<Self> {
        if n_dots < 3 || n_dots.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("number of dots must be odd and ≥ 3, got {n_dots}")));
        }
        if !(omega_max > 0.0) || !omega_max.is_finite() {
            return Err(Error::InvalidParameter(format!("omega_max must be positive, got {omega_max}")));
        }
        if !(1 <= m && m < n && n <= n_dots) || !(n - m).is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("transport window ({m}, {n}) must satisfy 1 ≤ m < n ≤ {n_dots} with n − m even")));
        }
        Ok(Self { n_dots, omega_max, m, n })
    }

    pub fn n_dots(&self) -> usize {
        self.n_dots
    }
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }
    pub fn start(&self) -> usize {
        self.m
    }
    pub fn end(&self) -> usize {
        self.n
    }
    /// Number of sites in the transport window.
    pub fn span(&self) -> usize {
        self.n - self.m + 1
    }
}

/// Tunnel-rate time profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pulse {
    Constant(f64),
    /// amplitude · exp(−(t − center)²/width²)
    Gaussian { amplitude: f64, center: f64, width: f64 },
}

impl Pulse {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Pulse::Constant(v) => v,
            Pulse::Gaussian { amplitude, center, width } => {
                let u = (t - center) / width;
                amplitude * (-u * u).exp()
            }
        }
    }
}

/// Pump and Stokes pulses with the integration window and the characteristic time T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSchedule {
    pub pump: Pulse,
    pub stokes: Pulse,
    pub t_start: f64,
    pub t_end: f64,
    /// Characteristic duration used for finite-difference steps.
    pub period: f64,
}

impl PulseSchedule {
    /// Five-dot demonstration pulses: pump centered at 0.9T, Stokes at 0.5T, width T/4,
    /// integrated over [−T/2, 3T/2] where both pulses are off.
    pub fn demonstration(period: f64, omega_max: f64) -> Result<Self> {
        Self::gaussian(period, omega_max, 0.9, 0.5, (-0.5, 1.5))
    }

    /// Pump centered at 3T/4, Stokes at T/4, width T/4, over [−T/3, 4T/3].
    pub fn counterintuitive(period: f64, omega_max: f64) -> Result<Self> {
        Self::gaussian(period, omega_max, 0.75, 0.25, (-1.0 / 3.0, 4.0 / 3.0))
    }

    /// Gaussian pair of width T/4 with centers and window given as fractions of T.
    pub fn gaussian(period: f64, omega_max: f64, pump_center: f64, stokes_center: f64, window: (f64, f64)) -> Result<Self> {
        if !(period > 0.0) || !(omega_max > 0.0) || !(window.1 > window.0) {
            return Err(Error::InvalidParameter("pulse period, amplitude and window must be positive".into()));
        }
        let w = period / 4.0;
        Ok(Self {
            pump: Pulse::Gaussian { amplitude: omega_max, center: pump_center * period, width: w },
            stokes: Pulse::Gaussian { amplitude: omega_max, center: stokes_center * period, width: w },
            t_start: window.0 * period,
            t_end: window.1 * period,
            period,
        })
    }

    /// Constant couplings over `[t_start, t_end]`.
    pub fn constant(pump: f64, stokes: f64, t_start: f64, t_end: f64) -> Self {
        Self { pump: Pulse::Constant(pump), stokes: Pulse::Constant(stokes), t_start, t_end, period: (t_end - t_start).max(f64::MIN_POSITIVE) }
    }

    pub fn omega_p(&self, t: f64) -> f64 {
        self.pump.at(t)
    }

    pub fn omega_s(&self, t: f64) -> f64 {
        self.stokes.at(t)
    }

    /// Start and end of step two: the pump rising through and the Stokes pulse falling
    /// through 5% of its peak. Constant pulses give the full window.
    pub fn step_boundaries(&self) -> (f64, f64) {
        let cross = (20.0f64).ln().sqrt();
        let t0 = match self.pump {
            Pulse::Gaussian { center, width, .. } => center - width * cross,
            Pulse::Constant(_) => self.t_start,
        };
        let t1 = match self.stokes {
            Pulse::Gaussian { center, width, .. } => center + width * cross,
            Pulse::Constant(_) => self.t_end,
        };
        (t0, t1)
    }

    /// Uniform sample of `n` times across the window.
    pub fn sample_times(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let h = (self.t_end - self.t_start) / (n - 1) as f64;
        (0..n).map(|k| self.t_start + h * k as f64).collect()
    }
}

fn check_diagonal(chain: &ChainSpec, diagonal: Option<&[f64]>) -> Result<()> {
    match diagonal {
        Some(d) if d.len() != chain.n_dots => Err(Error::DimensionMismatch { expected: chain.n_dots, got: d.len() }),
        _ => Ok(()),
    }
}

/// Real tridiagonal chain Hamiltonian for given pump/Stokes couplings.
pub fn hamiltonian_real(chain: &ChainSpec, omega_p: f64, omega_s: f64, diagonal: Option<&[f64]>) -> Result<DMatrix<f64>> {
    check_diagonal(chain, diagonal)?;
    let n = chain.n_dots;
    let mut h = DMatrix::zeros(n, n);
    if let Some(d) = diagonal {
        for (i, v) in d.iter().enumerate() {
            h[(i, i)] = *v;
        }
    }
    // bond b joins 0-based sites b and b+1
    let (lo, hi) = (chain.m - 1, chain.n - 1);
    for b in lo..hi {
        let w = if b == lo {
            omega_p
        } else if b == hi - 1 {
            omega_s
        } else {
            chain.omega_max
        };
        h[(b, b + 1)] = w;
        h[(b + 1, b)] = w;
    }
    Ok(h)
}

/// Chain Hamiltonian at time `t`.
pub fn hamiltonian(chain: &ChainSpec, schedule: &PulseSchedule, t: f64, diagonal: Option<&[f64]>) -> Result<CMatrix> {
    Ok(numeric::complexify(&hamiltonian_real(chain, schedule.omega_p(t), schedule.omega_s(t), diagonal)?))
}

/// Restriction of the chain Hamiltonian to the transport window.
fn window_block(chain: &ChainSpec, schedule: &PulseSchedule, t: f64, diagonal: Option<&[f64]>) -> Result<CMatrix> {
    let full = hamiltonian(chain, schedule, t, diagonal)?;
    let k = chain.span();
    Ok(full.view((chain.m - 1, chain.m - 1), (k, k)).into_owned())
}

/// Zero-energy eigenvector of the zero-diagonal window Hamiltonian, on `span` sites.
pub fn dark_state(omega_p: f64, omega_s: f64, omega_max: f64, span: usize) -> Result<StateVector> {
    if span < 3 || span.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("dark state needs an odd span ≥ 3, got {span}")));
    }
    if omega_p == 0.0 && omega_s == 0.0 {
        return Err(Error::Undefined("mixing angle with both pulses off".into()));
    }
    let theta = omega_p.atan2(omega_s);
    let x = omega_p * omega_s / (omega_max * omega_p.hypot(omega_s));
    let mut v = vec![0.0; span];
    v[0] = theta.cos();
    let sign_end = if ((span - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    v[span - 1] += sign_end * theta.sin();
    for j in 2..=(span - 1) / 2 {
        let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
        v[2 * j - 2] = -x * sj;
    }
    StateVector::from_real(&v)
}

/// Dark state embedded in the full chain.
pub fn dark_state_in_chain(chain: &ChainSpec, omega_p: f64, omega_s: f64) -> Result<StateVector> {
    let local = dark_state(omega_p, omega_s, chain.omega_max, chain.span())?;
    let mut v = DVector::zeros(chain.n_dots);
    for (i, a) in local.amplitudes().iter().enumerate() {
        v[chain.m - 1 + i] = *a;
    }
    StateVector::new(v)
}

/// Local adiabaticity ratios r_j = |⟨ψ_j|ψ̇_0⟩| / |E_j − E_0| at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Adiabaticity {
    /// One ratio per window eigenstate other than the dark branch (ascending energy order).
    pub ratios: Vec<f64>,
    pub max: f64,
    /// Set when a gap to the dark branch fell below 1e-10; the ratio is then +∞.
    pub anti_crossing: bool,
    pub dark_energy: f64,
}

fn dark_branch(vecs: &CMatrix, reference: &DVector<C64>) -> usize {
    (0..vecs.ncols())
        .max_by(|&a, &b| {
            let oa = vecs.column(a).dotc(reference).norm();
            let ob = vecs.column(b).dotc(reference).norm();
            oa.partial_cmp(&ob).expect("finite overlap")
        })
        .expect("non-empty spectrum")
}

/// The dark branch is the window eigenvector with the largest overlap with the
/// zero-diagonal dark state; its derivative is a central difference with step T/2000.
pub fn adiabaticity_metric(chain: &ChainSpec, schedule: &PulseSchedule, t: f64, diagonal: Option<&[f64]>) -> Result<Adiabaticity> {
    let h = schedule.period / 2000.0;
    let reference = {
        let (p, s) = (schedule.omega_p(t), schedule.omega_s(t));
        if p == 0.0 && s == 0.0 {
            let mut e = DVector::zeros(chain.span());
            e[0] = C64::new(1.0, 0.0);
            e
        } else {
            dark_state(p, s, chain.omega_max, chain.span())?.amplitudes().clone()
        }
    };
    let (vals, vecs) = hermitian_eigen(&window_block(chain, schedule, t, diagonal)?);
    let b0 = dark_branch(&vecs, &reference);
    let psi0 = vecs.column(b0).into_owned();
    let aligned = |tt: f64| -> Result<DVector<C64>> {
        let (_, v) = hermitian_eigen(&window_block(chain, schedule, tt, diagonal)?);
        let b = dark_branch(&v, &psi0);
        let col = v.column(b).into_owned();
        let o = col.dotc(&psi0);
        let ph = if o.norm() > 0.0 { o / o.norm() } else { C64::new(1.0, 0.0) };
        Ok(col * ph)
    };
    let dpsi = (aligned(t + h)? - aligned(t - h)?) / C64::new(2.0 * h, 0.0);
    let mut ratios = Vec::with_capacity(vals.len() - 1);
    let mut anti = false;
    for j in 0..vals.len() {
        if j == b0 {
            continue;
        }
        let gap = (vals[j] - vals[b0]).abs();
        if gap < 1e-10 {
            anti = true;
            ratios.push(f64::INFINITY);
        } else {
            ratios.push(vecs.column(j).dotc(&dpsi).norm() / gap);
        }
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    Ok(Adiabaticity { ratios, max, anti_crossing: anti, dark_energy: vals[b0] })
}

/// Initial condition for a transport run.
#[derive(Debug, Clone, PartialEq)]
pub enum TransportInput {
    /// Electron localized on a site (1-based).
    Site(usize),
    State(StateVector),
}

impl TransportInput {
    pub fn to_state(&self, dim: usize) -> Result<StateVector> {
        match self {
            TransportInput::Site(k) if *k >= 1 => StateVector::basis(dim, k - 1),
            TransportInput::Site(_) => Err(Error::InvalidParameter("sites are numbered from 1".into())),
            TransportInput::State(s) if s.dim() == dim => Ok(s.clone()),
            TransportInput::State(s) => Err(Error::DimensionMismatch { expected: dim, got: s.dim() }),
        }
    }
}

/// Outcome of a closed-system transport run.
#[derive(Debug, Clone)]
pub struct TransportRun {
    pub trajectory: numeric::Trajectory<f64, StateVector>,
    /// Final population on the last window site.
    pub fidelity: f64,
    /// |⟨target|ψ(t_end)⟩|², where the target moves the amplitude on site m to site n with the
    /// dark-state sign (−1)^{(n−m)/2} and the dynamical phase e^{−iφ}; other amplitudes stay put.
    pub coherent_fidelity: f64,
    /// φ = ∫E_0 dt along the tracked dark branch over the window.
    pub dynamical_phase: f64,
}

/// Number of eigen-samples used to track the dark branch for the dynamical phase.
const PHASE_SAMPLES: usize = 4001;

/// Energy of the dark branch followed by eigenvector continuity from the window start.
pub fn dark_branch_energies(chain: &ChainSpec, schedule: &PulseSchedule, diagonal: Option<&[f64]>, times: &[f64]) -> Result<Vec<f64>> {
    let hs = times.iter().map(|&t| window_block(chain, schedule, t, diagonal)).collect::<Result<Vec<_>>>()?;
    let tracked = eig_tracked(&hs, 0.0)?;
    let Some(&t0) = times.first() else {
        return Ok(vec![]);
    };
    let (p, s) = (schedule.omega_p(t0), schedule.omega_s(t0));
    let reference = if p == 0.0 && s == 0.0 {
        let mut e = DVector::zeros(chain.span());
        e[0] = C64::new(1.0, 0.0);
        e
    } else {
        dark_state(p, s, chain.omega_max, chain.span())?.amplitudes().clone()
    };
    let b0 = dark_branch(&tracked.vectors[0], &reference);
    Ok(tracked.branch(b0))
}

pub fn run_transport(
    chain: &ChainSpec,
    schedule: &PulseSchedule,
    input: &TransportInput,
    dt: f64,
    diagonal: Option<&[f64]>,
    record_every: usize,
) -> Result<TransportRun> {
    check_diagonal(chain, diagonal)?;
    if dt * chain.omega_max > 0.05 {
        return Err(Error::InvalidParameter(format!("dt·Ω_max = {} exceeds 0.05", dt * chain.omega_max)));
    }
    let psi0 = input.to_state(chain.n_dots)?;
    let h = |t: f64| hamiltonian(chain, schedule, t, diagonal).expect("diagonal length checked");
    let trajectory = numeric::evolve_schrodinger(h, &psi0, (schedule.t_start, schedule.t_end), dt, record_every)?;
    let last = trajectory.last().clone();
    let fidelity = last.amplitudes()[chain.n - 1].norm_sqr();

    let times = schedule.sample_times(PHASE_SAMPLES);
    let dynamical_phase = if schedule.t_end > schedule.t_start {
        let e = dark_branch_energies(chain, schedule, diagonal, &times)?;
        numeric::quad::trapezoid(&e, times[1] - times[0])
    } else {
        0.0
    };

    let mut target = psi0.amplitudes().clone();
    let moved = target[chain.m - 1];
    target[chain.m - 1] = C64::new(0.0, 0.0);
    let sign = if ((chain.n - chain.m) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    target[chain.n - 1] += moved * C64::from_polar(sign, -dynamical_phase);
    let coherent_fidelity = target.dotc(last.amplitudes()).norm_sqr() / target.norm_squared().max(f64::MIN_POSITIVE);

    Ok(TransportRun { trajectory, fidelity, coherent_fidelity, dynamical_phase })
}

/// Fidelity at step `dt` and `dt/2` with the Richardson estimate |F_{dt/2} − F_dt|/15
/// of the remaining RK4 error in the finer result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepHalving {
    pub dt: f64,
    pub coarse: f64,
    pub fine: f64,
    pub error_estimate: f64,
}

pub fn transport_convergence(
    chain: &ChainSpec,
    schedule: &PulseSchedule,
    input: &TransportInput,
    dt: f64,
    diagonal: Option<&[f64]>,
) -> Result<StepHalving> {
    let run = |h: f64| run_transport(chain, schedule, input, h, diagonal, usize::MAX).map(|r| r.fidelity);
    let (coarse, fine) = (run(dt)?, run(0.5 * dt)?);
    Ok(StepHalving { dt, coarse, fine, error_estimate: (fine - coarse).abs() / 15.0 })
}
