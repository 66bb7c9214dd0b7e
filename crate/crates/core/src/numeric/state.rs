use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::{hermitian_eigen, hermiticity_defect, CMatrix, Real};
use crate::error::{Error, Result};

/// Tolerance floor so that tight f64 limits still make sense for f32.
pub(crate) fn tol<T: Real>(v: f64) -> T {
    let floor = T::default_epsilon() * T::lit(1.0e3);
    let v = T::lit(v);
    if v > floor {
        v
    } else {
        floor
    }
}

/// Normalized pure state on a finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amps: DVector<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Normalizes `amps`; fails on a zero or non-finite vector.
    pub fn new(amps: DVector<Complex<T>>) -> Result<Self> {
        let n = amps.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        Ok(Self { amps: amps.unscale(n) })
    }

    pub fn from_real(v: &[T]) -> Result<Self> {
        Self::new(DVector::from_iterator(v.len(), v.iter().map(|&x| Complex::new(x, T::zero()))))
    }

    /// Site basis vector |k> (0-based).
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidParameter(format!("site {k} outside dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[k] = Complex::new(T::one(), T::zero());
        Ok(Self { amps: v })
    }

    pub(crate) fn from_normalized(amps: DVector<Complex<T>>) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> T {
        self.amps.norm()
    }

    pub fn populations(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn overlap(&self, other: &Self) -> Complex<T> {
        self.amps.dotc(&other.amps)
    }

    pub fn to_density(&self) -> DensityOperator<T> {
        DensityOperator { matrix: &self.amps * self.amps.adjoint() }
    }
}

/// Density operator on a finite Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    /// Validates Hermiticity, unit trace, positivity and purity bound.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.matrix.is_square() {
            return Err(Error::InvalidParameter("density matrix must be square".into()));
        }
        let h = hermiticity_defect(&self.matrix);
        if h > tol(1e-10) {
            return Err(Error::NotHermitian(h.as_f64()));
        }
        let tr = self.trace();
        if (tr - T::one()).abs() > tol(1e-9) {
            return Err(Error::InvalidParameter(format!("trace {tr} differs from 1")));
        }
        let (vals, _) = hermitian_eigen(&self.matrix);
        let min = vals.iter().copied().fold(T::max_value().unwrap(), |a, b| if b < a { b } else { a });
        if min < -tol::<T>(1e-8) {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min}")));
        }
        if self.purity() > T::one() + tol(1e-9) {
            return Err(Error::InvalidParameter("purity exceeds one".into()));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> T {
        self.matrix.diagonal().iter().fold(T::zero(), |a, z| a + z.re)
    }

    /// Tr ρ².
    pub fn purity(&self) -> T {
        // Tr(ρρ) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    pub fn populations(&self) -> Vec<T> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = T::one() / T::lit(dim as f64);
        Self { matrix: DMatrix::from_diagonal_element(dim, dim, Complex::new(p, T::zero())) }
    }
}

/// Which factor of a bipartite space is kept by [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of a state on `A ⊗ B` with the given factor dimensions.
pub fn partial_trace<T: Real>(
    rho: &DensityOperator<T>,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<DensityOperator<T>> {
    if dim_a * dim_b != rho.dim() || dim_a == 0 || dim_b == 0 {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: dim_a * dim_b });
    }
    let m = rho.matrix();
    let out = match keep {
        Subsystem::A => DMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + m[(i * dim_b + k, j * dim_b + k)])
        }),
        Subsystem::B => DMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + m[(k * dim_b + i, k * dim_b + j)])
        }),
    };
    Ok(DensityOperator { matrix: out })
}
