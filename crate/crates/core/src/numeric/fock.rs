use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::{polar, CMatrix, Real};
use crate::error::{Error, Result};

/// Truncated harmonic-oscillator basis whose ground state is the Gaussian
/// |0,0⟩ of position spread `width` (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorBasis<T> {
    pub dim: usize,
    pub width: T,
}

impl<T: Real> OscillatorBasis<T> {
    pub fn new(dim: usize, width: T) -> Result<Self> {
        if dim < 2 || !(width > T::zero()) {
            return Err(Error::InvalidParameter("oscillator basis needs dim ≥ 2 and width > 0".into()));
        }
        Ok(Self { dim, width })
    }

    /// â with ⟨n−1|â|n⟩ = √n.
    pub fn annihilation(&self) -> CMatrix<T> {
        let mut a = CMatrix::<T>::zeros(self.dim, self.dim);
        for n in 1..self.dim {
            a[(n - 1, n)] = Complex::from(T::lit(n as f64).sqrt());
        }
        a
    }

    /// x̂ = W(â + â†)/√2.
    pub fn position(&self) -> CMatrix<T> {
        let a = self.annihilation();
        (&a + a.adjoint()) * Complex::from(self.width / T::lit(2.0).sqrt())
    }

    /// p̂ = −i(â − â†)/(√2 W).
    pub fn momentum(&self) -> CMatrix<T> {
        let a = self.annihilation();
        (&a - a.adjoint()) * Complex::new(T::zero(), -T::one() / (T::lit(2.0).sqrt() * self.width))
    }

    /// Complex amplitude x/(√2W) + iWp/√2 of the Gaussian label (x, p).
    pub fn amplitude(&self, x: T, p: T) -> Complex<T> {
        let s = T::lit(2.0).sqrt();
        Complex::new(x / (s * self.width), self.width * p / s)
    }

    /// Fock components of |x,p⟩ = D̂(x,p)|0,0⟩.
    pub fn coherent(&self, x: T, p: T) -> DVector<Complex<T>> {
        let a = self.amplitude(x, p);
        let mut v = DVector::zeros(self.dim);
        v[0] = Complex::from((-a.norm_sqr() / T::lit(2.0)).exp());
        for n in 1..self.dim {
            v[n] = v[n - 1] * a / T::lit(n as f64).sqrt();
        }
        v
    }

    /// D̂(dx, dp)|x,p⟩ = e^{i(dp·x − dx·p)/2}|x+dx, p+dp⟩, evaluated in closed form.
    pub fn displaced_coherent(&self, dx: T, dp: T, x: T, p: T) -> DVector<Complex<T>> {
        self.coherent(x + dx, p + dp) * polar(T::one(), (dp * x - dx * p) / T::lit(2.0))
    }

    /// Thermal-like operator (1 − e^{−λ}) e^{−λ n̂} with e^{−λ} = n̄/(n̄+1).
    pub fn thermal(&self, n_bar: T) -> CMatrix<T> {
        let q = n_bar / (n_bar + T::one());
        CMatrix::from_diagonal(&DVector::from_fn(self.dim, |n, _| Complex::from((T::one() - q) * q.powi(n as i32))))
    }

    /// D̂(x,p) restricted to the basis, from the exponential of the generator on a
    /// basis twice as large (accurate for states well inside the truncation).
    pub fn displacement(&self, x: T, p: T) -> CMatrix<T> {
        let big = Self { dim: 2 * self.dim, width: self.width };
        let a = big.annihilation();
        let z = self.amplitude(x, p);
        let gen: DMatrix<Complex<T>> = a.adjoint() * z - &a * z.conj();
        gen.exp().view((0, 0), (self.dim, self.dim)).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_state_is_normalized_and_centered() {
        let b = OscillatorBasis::new(60, 1.3f64).unwrap();
        let v = b.coherent(1.1, -0.7);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let x = (v.adjoint() * b.position() * &v)[(0, 0)].re;
        let p = (v.adjoint() * b.momentum() * &v)[(0, 0)].re;
        assert!((x - 1.1).abs() < 1e-10 && (p + 0.7).abs() < 1e-10);
    }

    #[test]
    fn displacement_matrix_matches_closed_form() {
        let b = OscillatorBasis::new(40, 0.8f64).unwrap();
        let d = b.displacement(0.4, 0.3);
        let lhs = &d * b.coherent(-0.2, 0.5);
        let rhs = b.displaced_coherent(0.4, 0.3, -0.2, 0.5);
        assert!((lhs - rhs).norm() < 1e-10);
    }
}
