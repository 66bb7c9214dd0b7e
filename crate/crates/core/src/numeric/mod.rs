//! Dense complex linear algebra, time integration, spectrum tracking and
//! phase-space transforms. Generic over the real scalar type.

mod eig;
mod fock;
mod ode;
mod phase_space;
pub mod quad;
mod state;

pub use eig::{eig_tracked, hermitian_eigen, min_gap, GapMinimum, TrackedSpectrum};
pub use fock::OscillatorBasis;
pub use ode::{evolve_lindblad, evolve_schrodinger, IntegratorStats, Trajectory};
pub use phase_space::{husimi_from_position, wigner_from_position, PhaseSpaceGrid, PositionGrid};
pub use state::{partial_trace, DensityOperator, StateVector, Subsystem};

use nalgebra::{ComplexField, DMatrix, RealField};
use num_complex::Complex;

/// Real scalar usable by the numeric layer (`f32` or `f64`).
pub trait Real:
    RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive + std::fmt::Display
{
    fn lit(v: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(v).expect("representable literal")
    }
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("finite")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// e^{iθ} scaled by `r`.
pub(crate) fn polar<T: Real>(r: T, theta: T) -> Complex<T> {
    Complex::new(r * theta.cos(), r * theta.sin())
}

/// Largest absolute entry of `m - m^†`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).modulus();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Promote a real matrix to a complex one.
pub fn complexify<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|v| Complex::new(v, T::zero()))
}

pub(crate) fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}
