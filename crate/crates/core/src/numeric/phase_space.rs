use nalgebra::DMatrix;

use super::{polar, CMatrix, Real};
use crate::error::{Error, Result};

/// Uniform position grid x_j = x0 + j·dx, j = 0..n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGrid<T> {
    pub x0: T,
    pub dx: T,
    pub n: usize,
}

impl<T: Real> PositionGrid<T> {
    /// `n` points spanning `[lo, hi]` inclusive.
    pub fn span(lo: T, hi: T, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidParameter("position grid needs hi > lo and n ≥ 2".into()));
        }
        Ok(Self { x0: lo, dx: (hi - lo) / T::lit((n - 1) as f64), n })
    }

    pub fn x(&self, j: usize) -> T {
        self.x0 + self.dx * T::lit(j as f64)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Largest |p| resolvable by the Wigner transform on this grid (offsets are 2·dx apart).
    pub fn wigner_nyquist(&self) -> T {
        T::pi() / (T::lit(2.0) * self.dx)
    }
}

/// Real function sampled on a rectangular (x, p) grid; rows index x, columns p.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid<T: Real> {
    pub xs: Vec<T>,
    pub ps: Vec<T>,
    pub values: DMatrix<T>,
    /// Estimated quadrature error of [`PhaseSpaceGrid::integral`].
    pub quad_error: T,
}

fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / T::lit((n - 1) as f64);
    (0..n).map(|k| lo + step * T::lit(k as f64)).collect()
}

impl<T: Real> PhaseSpaceGrid<T> {
    /// Sample `f(x, p)` on a uniform grid.
    pub fn from_fn(x: (T, T, usize), p: (T, T, usize), f: impl Fn(T, T) -> T) -> Result<Self> {
        if x.2 < 2 || p.2 < 2 || !(x.1 > x.0) || !(p.1 > p.0) {
            return Err(Error::InvalidParameter("phase-space grid needs increasing ranges and ≥ 2 points per axis".into()));
        }
        let xs = linspace(x.0, x.1, x.2);
        let ps = linspace(p.0, p.1, p.2);
        let values = DMatrix::from_fn(xs.len(), ps.len(), |i, j| f(xs[i], ps[j]));
        Ok(Self::with_values(xs, ps, values))
    }

    pub(crate) fn with_values(xs: Vec<T>, ps: Vec<T>, values: DMatrix<T>) -> Self {
        let mut g = Self { xs, ps, values, quad_error: T::zero() };
        g.quad_error = g.error_estimate();
        g
    }

    pub fn dx(&self) -> T {
        self.xs[1] - self.xs[0]
    }

    pub fn dp(&self) -> T {
        self.ps[1] - self.ps[0]
    }

    /// Riemann sum of the grid values times the cell area.
    pub fn integral(&self) -> T {
        self.values.sum() * self.dx() * self.dp()
    }

    /// ∫ W dp at every x.
    pub fn marginal_x(&self) -> Vec<T> {
        let dp = self.dp();
        self.values.row_iter().map(|r| r.sum() * dp).collect()
    }

    /// ∫ W dx at every p.
    pub fn marginal_p(&self) -> Vec<T> {
        let dx = self.dx();
        self.values.column_iter().map(|c| c.sum() * dx).collect()
    }

    /// 2π ∫∫ W₁W₂ dx dp, which equals Tr ρ₁ρ₂ for Wigner functions on a shared grid.
    pub fn overlap(&self, other: &Self) -> Result<T> {
        if self.values.shape() != other.values.shape() {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        Ok(T::two_pi() * self.values.component_mul(&other.values).sum() * self.dx() * self.dp())
    }

    pub fn min_value(&self) -> T {
        self.values.min()
    }

    pub fn max_value(&self) -> T {
        self.values.max()
    }

    /// Difference to the half-resolution sum plus a bound on the mass beyond the edges.
    fn error_estimate(&self) -> T {
        let (nx, np) = self.values.shape();
        let area = self.dx() * self.dp();
        let mut coarse = T::zero();
        for i in (0..nx).step_by(2) {
            for j in (0..np).step_by(2) {
                coarse += self.values[(i, j)];
            }
        }
        let coarse = coarse * area * T::lit(4.0);
        let mut edge = T::zero();
        for i in 0..nx {
            edge += self.values[(i, 0)].abs() + self.values[(i, np - 1)].abs();
        }
        for j in 0..np {
            edge += self.values[(0, j)].abs() + self.values[(nx - 1, j)].abs();
        }
        let edge = edge * area * T::lit(nx.max(np) as f64);
        (self.integral() - coarse).abs() + edge + T::default_epsilon() * T::lit(1e3)
    }
}

fn check_support<T: Real>(rho: &CMatrix<T>, grid: &PositionGrid<T>) -> Result<()> {
    if rho.nrows() != grid.n || rho.ncols() != grid.n {
        return Err(Error::DimensionMismatch { expected: grid.n, got: rho.nrows() });
    }
    let peak = rho.diagonal().iter().fold(T::zero(), |a, z| if z.re > a { z.re } else { a });
    let edge = rho[(0, 0)].re.abs().max(rho[(grid.n - 1, grid.n - 1)].re.abs());
    if edge > peak * T::lit(1e-8) {
        return Err(Error::GridTooCoarse(format!("position grid does not cover the support (edge/peak = {})", edge / peak)));
    }
    Ok(())
}

/// Wigner function W(x, p) = (1/2π)∫dy ⟨x + y/2|ρ|x − y/2⟩e^{−ipy} of a density matrix given
/// on a position grid (entries ρ_jk = ρ(x_j, x_k)·dx, unit trace).
pub fn wigner_from_position<T: Real>(
    rho: &CMatrix<T>,
    grid: &PositionGrid<T>,
    p: (T, T, usize),
) -> Result<PhaseSpaceGrid<T>> {
    check_support(rho, grid)?;
    let nyq = grid.wigner_nyquist();
    if p.0.abs() > nyq || p.1.abs() > nyq {
        return Err(Error::GridTooCoarse(format!("|p| up to {} exceeds the grid Nyquist limit {nyq}", p.0.abs().max(p.1.abs()))));
    }
    if p.2 < 2 || !(p.1 > p.0) {
        return Err(Error::InvalidParameter("momentum range must be increasing with ≥ 2 points".into()));
    }
    let xs = grid.points();
    let ps = linspace(p.0, p.1, p.2);
    let n = grid.n;
    let two_dx = grid.dx * T::lit(2.0);
    let values = DMatrix::from_fn(n, ps.len(), |i, j| {
        let kmax = i.min(n - 1 - i);
        let mut acc = rho[(i, i)].re;
        for k in 1..=kmax {
            let e = polar(T::one(), -ps[j] * two_dx * T::lit(k as f64));
            acc += T::lit(2.0) * (rho[(i + k, i - k)] * e).re;
        }
        acc / T::pi()
    });
    Ok(PhaseSpaceGrid::with_values(xs, ps, values))
}

/// Husimi function Q(x, p) = ⟨x,p|ρ|x,p⟩/2π with Gaussian probes of position spread `width`.
pub fn husimi_from_position<T: Real>(
    rho: &CMatrix<T>,
    grid: &PositionGrid<T>,
    p: (T, T, usize),
    width: T,
) -> Result<PhaseSpaceGrid<T>> {
    check_support(rho, grid)?;
    if !(width > T::zero()) {
        return Err(Error::InvalidParameter("Husimi probe width must be positive".into()));
    }
    let nyq = T::pi() / grid.dx;
    if p.0.abs() > nyq || p.1.abs() > nyq {
        return Err(Error::GridTooCoarse(format!("|p| exceeds the grid Nyquist limit {nyq}")));
    }
    let xs = grid.points();
    let ps = linspace(p.0, p.1, p.2);
    let norm = (T::two_pi() * width * width).powf(T::lit(-0.25)) * grid.dx.sqrt();
    let four_w2 = T::lit(4.0) * width * width;
    let values = DMatrix::from_fn(xs.len(), ps.len(), |i, j| {
        let probe = nalgebra::DVector::from_fn(grid.n, |l, _| {
            let y = xs[l];
            let d = y - xs[i];
            polar(norm * (-(d * d) / four_w2).exp(), ps[j] * y)
        });
        (probe.adjoint() * rho * &probe)[(0, 0)].re / T::two_pi()
    });
    Ok(PhaseSpaceGrid::with_values(xs, ps, values))
}
