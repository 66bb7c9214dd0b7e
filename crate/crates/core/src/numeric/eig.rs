use nalgebra::ComplexField;
use nalgebra::SymmetricEigen;
use num_complex::Complex;

use super::{hermiticity_defect, CMatrix, Real};
use crate::error::{Error, Result};
use crate::numeric::state::tol;

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalue"));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Rotate every column so its largest-magnitude component is real positive.
pub(crate) fn fix_phases<T: Real>(vecs: &mut CMatrix<T>) {
    for mut col in vecs.column_iter_mut() {
        let (mut best, mut mag) = (0, T::zero());
        for (i, z) in col.iter().enumerate() {
            if z.modulus() > mag {
                mag = z.modulus();
                best = i;
            }
        }
        if mag > T::zero() {
            let ph = col[best].conj().unscale(mag);
            col.iter_mut().for_each(|z| *z *= ph);
        }
    }
}

/// Eigen-curves followed by eigenvector continuity rather than energy order.
#[derive(Debug, Clone)]
pub struct TrackedSpectrum<T: Real> {
    /// `values[k][b]`: energy of branch `b` at sample `k`.
    pub values: Vec<Vec<T>>,
    /// Column `b` of `vectors[k]` is branch `b` at sample `k`.
    pub vectors: Vec<CMatrix<T>>,
    /// Samples where two energy-adjacent levels came closer than the threshold: (sample, gap).
    pub anti_crossings: Vec<(usize, T)>,
    /// Samples where the spectrum was degenerate to 1e-12 and matching relied on overlaps alone.
    pub degenerate_samples: Vec<usize>,
}

impl<T: Real> TrackedSpectrum<T> {
    pub fn branch(&self, b: usize) -> Vec<T> {
        self.values.iter().map(|v| v[b]).collect()
    }
}

/// Diagonalize each matrix and connect eigenpairs across samples by maximal overlap,
/// with phases chosen so that consecutive overlaps are real positive.
pub fn eig_tracked<T: Real>(hs: &[CMatrix<T>], gap_threshold: T) -> Result<TrackedSpectrum<T>> {
    let mut out = TrackedSpectrum { values: vec![], vectors: vec![], anti_crossings: vec![], degenerate_samples: vec![] };
    let Some(first) = hs.first() else {
        return Ok(out);
    };
    let n = first.nrows();
    for (k, h) in hs.iter().enumerate() {
        if h.nrows() != n || !h.is_square() {
            return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
        }
        let defect = hermiticity_defect(h);
        if defect > tol(1e-10) {
            return Err(Error::NotHermitian(defect.as_f64()));
        }
        let (vals, mut vecs) = hermitian_eigen(h);
        let min_gap = vals.windows(2).map(|w| w[1] - w[0]).fold(T::max_value().unwrap(), |a, b| if b < a { b } else { a });
        if n > 1 {
            if min_gap < T::lit(1e-12) {
                out.degenerate_samples.push(k);
            }
            if min_gap < gap_threshold {
                out.anti_crossings.push((k, min_gap));
            }
        }
        if k == 0 {
            fix_phases(&mut vecs);
            out.values.push(vals);
            out.vectors.push(vecs);
            continue;
        }
        let prev = out.vectors.last().unwrap();
        let ov = prev.adjoint() * &vecs;
        // greedy assignment on descending overlap magnitude
        let mut pairs: Vec<(usize, usize, T)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, ov[(i, j)].modulus())).collect();
        pairs.sort_by(|a, b| b.2.partial_cmp(&a.2).expect("finite overlap"));
        let mut assign = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for (i, j, _) in pairs {
            if assign[i] == usize::MAX && !used[j] {
                assign[i] = j;
                used[j] = true;
            }
        }
        let mut new_vecs = CMatrix::zeros(n, n);
        let mut new_vals = vec![T::zero(); n];
        for b in 0..n {
            let j = assign[b];
            let o = ov[(b, j)];
            let ph = if o.modulus() > T::zero() { o.conj().unscale(o.modulus()) } else { Complex::new(T::one(), T::zero()) };
            new_vecs.set_column(b, &(vecs.column(j) * ph));
            new_vals[b] = vals[j];
        }
        out.values.push(new_vals);
        out.vectors.push(new_vecs);
    }
    Ok(out)
}

/// Location and size of the smallest gap between energy-adjacent levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMinimum<T> {
    pub t: T,
    pub gap: T,
    /// Index (ascending order) of the lower of the two levels.
    pub lower_level: usize,
}

fn level_gap<T: Real>(h: &CMatrix<T>, lower: usize) -> T {
    let (v, _) = hermitian_eigen(h);
    v[lower + 1] - v[lower]
}

/// Smallest adjacent-level gap of `h(t)` on `[t_lo, t_hi]`: a uniform scan of `n_scan`
/// points followed by golden-section refinement around the best sample.
/// `level` restricts the search to the gap above that level.
pub fn min_gap<T: Real, F: Fn(T) -> CMatrix<T>>(
    h: F,
    t_lo: T,
    t_hi: T,
    n_scan: usize,
    level: Option<usize>,
) -> Result<GapMinimum<T>> {
    if !(t_hi > t_lo) || n_scan < 3 {
        return Err(Error::InvalidParameter("min_gap needs t_hi > t_lo and at least 3 scan points".into()));
    }
    let step = (t_hi - t_lo) / T::lit((n_scan - 1) as f64);
    let mut best = GapMinimum { t: t_lo, gap: T::max_value().unwrap(), lower_level: 0 };
    let mut best_k = 0;
    for k in 0..n_scan {
        let t = t_lo + step * T::lit(k as f64);
        let (v, _) = hermitian_eigen(&h(t));
        if v.len() < 2 {
            return Err(Error::InvalidParameter("gap needs at least two levels".into()));
        }
        let range: Vec<usize> = match level {
            Some(l) if l + 1 < v.len() => vec![l],
            Some(l) => return Err(Error::InvalidParameter(format!("level {l} has no level above it"))),
            None => (0..v.len() - 1).collect(),
        };
        for l in range {
            let g = v[l + 1] - v[l];
            if g < best.gap {
                best = GapMinimum { t, gap: g, lower_level: l };
                best_k = k;
            }
        }
    }
    let mut a = t_lo + step * T::lit(best_k.saturating_sub(1) as f64);
    let mut b = t_lo + step * T::lit((best_k + 1).min(n_scan - 1) as f64);
    let lvl = best.lower_level;
    let invphi = T::lit(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * invphi;
    let mut d = a + (b - a) * invphi;
    let (mut fc, mut fd) = (level_gap(&h(c), lvl), level_gap(&h(d), lvl));
    for _ in 0..200 {
        if (b - a).abs() <= T::default_epsilon() * T::lit(16.0) * (T::one() + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * invphi;
            fc = level_gap(&h(c), lvl);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * invphi;
            fd = level_gap(&h(d), lvl);
        }
    }
    let (t, g) = if fc < fd { (c, fc) } else { (d, fd) };
    if g < best.gap {
        best.t = t;
        best.gap = g;
    }
    Ok(best)
}
