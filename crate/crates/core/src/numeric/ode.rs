use nalgebra::ComplexField;
use nalgebra::DVector;
use num_complex::Complex;

use super::{commutator, hermiticity_defect, CMatrix, DensityOperator, Real, StateVector};
use crate::error::{Error, Result};
use crate::numeric::state::tol;

/// Trace drift beyond which Lindblad integration is aborted.
const TRACE_ABORT: f64 = 1e-5;

/// Bookkeeping reported by the fixed-step integrators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegratorStats {
    pub steps: usize,
    pub dt: f64,
    /// Largest per-step |‖ψ‖ − 1| removed by renormalization (Schrödinger) or
    /// largest |Tr ρ − 1| (Lindblad).
    pub max_drift: f64,
    /// Largest anti-Hermitian defect of the propagated density matrix.
    pub max_hermiticity_defect: f64,
}

/// Sampled states with their times.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real, S> {
    pub times: Vec<T>,
    pub states: Vec<S>,
    pub stats: IntegratorStats,
}

impl<T: Real, S> Trajectory<T, S> {
    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn step_count<T: Real>(tspan: (T, T), dt: T) -> Result<(usize, T)> {
    let (t0, t1) = tspan;
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if t1 < t0 {
        return Err(Error::InvalidParameter("tspan must be increasing".into()));
    }
    let n = ((t1 - t0) / dt).ceil().to_usize().unwrap_or(usize::MAX);
    if n > 50_000_000 {
        return Err(Error::ResourceLimit(format!("{n} steps requested")));
    }
    if n == 0 {
        return Ok((0, dt));
    }
    Ok((n, (t1 - t0) / T::lit(n as f64)))
}

fn minus_i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), -T::one())
}

/// Fixed-step RK4 for iψ̇ = H(t)ψ. The state is renormalized after every step and
/// the removed drift is tracked; every `record_every`-th state and the last are kept.
pub fn evolve_schrodinger<T: Real, F: Fn(T) -> CMatrix<T>>(
    h: F,
    psi0: &StateVector<T>,
    tspan: (T, T),
    dt: T,
    record_every: usize,
) -> Result<Trajectory<T, StateVector<T>>> {
    let (n, dt) = step_count(tspan, dt)?;
    let dim = psi0.dim();
    let every = record_every.max(1);
    let mi = minus_i::<T>();
    let half = T::lit(0.5);
    let herm_tol = tol::<T>(1e-10);
    let rhs = |t: T, y: &DVector<Complex<T>>| -> Result<DVector<Complex<T>>> {
        let m = h(t);
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
        }
        let d = hermiticity_defect(&m);
        if d > herm_tol {
            return Err(Error::NotHermitian(d.as_f64()));
        }
        Ok((m * y) * mi)
    };
    let mut y = psi0.amplitudes().clone();
    let mut t = tspan.0;
    let mut traj = Trajectory { times: vec![t], states: vec![psi0.clone()], stats: IntegratorStats { dt: dt.as_f64(), ..Default::default() } };
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    for k in 1..=n {
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + dt * half, &(&y + &k1 * Complex::from(dt * half)))?;
        let k3 = rhs(t + dt * half, &(&y + &k2 * Complex::from(dt * half)))?;
        let k4 = rhs(t + dt, &(&y + &k3 * Complex::from(dt)))?;
        y += (k1 + k2 * Complex::from(two) + k3 * Complex::from(two) + k4) * Complex::from(dt * sixth);
        t = tspan.0 + dt * T::lit(k as f64);
        let norm = y.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite(t.as_f64()));
        }
        traj.stats.max_drift = traj.stats.max_drift.max((norm - T::one()).abs().as_f64());
        y.unscale_mut(norm);
        if k % every == 0 || k == n {
            traj.times.push(t);
            traj.states.push(StateVector::from_normalized(y.clone()));
        }
    }
    traj.stats.steps = n;
    Ok(traj)
}

/// Fixed-step RK4 for the Lindblad equation
/// ρ̇ = −i[H(t), ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}).
/// Aborts with [`Error::TraceDrift`] when |Tr ρ − 1| exceeds 1e-5.
pub fn evolve_lindblad<T: Real, F: Fn(T) -> CMatrix<T>>(
    h: F,
    lindblads: &[CMatrix<T>],
    rho0: &DensityOperator<T>,
    tspan: (T, T),
    dt: T,
    record_every: usize,
) -> Result<Trajectory<T, DensityOperator<T>>> {
    let (n, dt) = step_count(tspan, dt)?;
    let dim = rho0.dim();
    for l in lindblads {
        if l.nrows() != dim || l.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: l.nrows() });
        }
    }
    let every = record_every.max(1);
    let half = T::lit(0.5);
    let herm_tol = tol::<T>(1e-10);
    let adj: Vec<CMatrix<T>> = lindblads.iter().map(|l| l.adjoint()).collect();
    let ldl = lindblads.iter().zip(&adj).fold(CMatrix::<T>::zeros(dim, dim), |acc, (l, la)| acc + la * l);
    let ldl_half = &ldl * Complex::from(half);
    let mi = minus_i::<T>();
    let rhs = |t: T, r: &CMatrix<T>| -> Result<CMatrix<T>> {
        let m = h(t);
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
        }
        let d = hermiticity_defect(&m);
        if d > herm_tol {
            return Err(Error::NotHermitian(d.as_f64()));
        }
        let mut out = commutator(&m, r) * mi - (&ldl_half * r + r * &ldl_half);
        for (l, la) in lindblads.iter().zip(&adj) {
            out += l * r * la;
        }
        Ok(out)
    };
    let mut r = rho0.matrix().clone();
    let mut t = tspan.0;
    let mut traj = Trajectory { times: vec![t], states: vec![rho0.clone()], stats: IntegratorStats { dt: dt.as_f64(), ..Default::default() } };
    let sixth = T::one() / T::lit(6.0);
    let two = Complex::from(T::lit(2.0));
    for k in 1..=n {
        let k1 = rhs(t, &r)?;
        let k2 = rhs(t + dt * half, &(&r + &k1 * Complex::from(dt * half)))?;
        let k3 = rhs(t + dt * half, &(&r + &k2 * Complex::from(dt * half)))?;
        let k4 = rhs(t + dt, &(&r + &k3 * Complex::from(dt)))?;
        r += (k1 + k2 * two + k3 * two + k4) * Complex::from(dt * sixth);
        t = tspan.0 + dt * T::lit(k as f64);
        let tr = r.trace();
        if !(tr.re.is_finite() && tr.im.is_finite()) {
            return Err(Error::NonFinite(t.as_f64()));
        }
        let drift = (tr - Complex::from(T::one())).modulus().as_f64();
        traj.stats.max_drift = traj.stats.max_drift.max(drift);
        if drift > TRACE_ABORT {
            return Err(Error::TraceDrift { drift, t: t.as_f64() });
        }
        if k % every == 0 || k == n {
            traj.stats.max_hermiticity_defect = traj.stats.max_hermiticity_defect.max(hermiticity_defect(&r).as_f64());
            traj.times.push(t);
            traj.states.push(DensityOperator::from_matrix_unchecked(r.clone()));
        }
    }
    traj.stats.steps = n;
    Ok(traj)
}
