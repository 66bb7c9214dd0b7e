use measq::numeric::{
    eig_tracked, evolve_lindblad, evolve_schrodinger, hermitian_eigen, husimi_from_position, min_gap, partial_trace,
    wigner_from_position, Subsystem,
};
use measq::{CMatrix, DensityOperator, PositionGrid, StateVector, C64};
use nalgebra::DVector;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

#[test]
fn rabi_oscillation() {
    let omega = 1.3;
    let h = sigma_x() * c(omega / 2.0, 0.0);
    let psi0 = StateVector::basis(2, 0).unwrap();
    let traj = evolve_schrodinger(|_| h.clone(), &psi0, (0.0, 10.0), 1e-3, 100).unwrap();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let exact = (omega * t / 2.0).sin().powi(2);
        assert!((s.populations()[1] - exact).abs() < 1e-9, "t = {t}");
    }
}

#[test]
fn pure_dephasing_decay() {
    let d: f64 = 0.4;
    let l = sigma_z() * c(d.sqrt() / 2.0, 0.0);
    let plus = StateVector::from_real(&[1.0, 1.0]).unwrap().to_density();
    let traj = evolve_lindblad(|_| CMatrix::zeros(2, 2), &[l], &plus, (0.0, 5.0), 1e-3, 500).unwrap();
    for (t, r) in traj.times.iter().zip(&traj.states) {
        let coh = r.matrix()[(0, 1)].re;
        assert!((coh - 0.5 * (-d * t / 2.0).exp()).abs() < 1e-10, "t = {t}");
        assert!((r.trace() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_hamiltonian_keeps_the_state() {
    let psi0 = StateVector::new(DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)])).unwrap();
    let traj = evolve_schrodinger(|_| CMatrix::zeros(3, 3), &psi0, (0.0, 7.0), 0.01, 1).unwrap();
    assert!((traj.last().overlap(&psi0).norm() - 1.0).abs() < 1e-14);
}

#[test]
fn avoided_crossing_gap() {
    let eps = 0.05;
    let h = |t: f64| CMatrix::from_row_slice(2, 2, &[c(t, 0.0), c(eps, 0.0), c(eps, 0.0), c(-t, 0.0)]);
    let g = min_gap(h, -1.0, 1.3, 101, None).unwrap();
    assert!((g.gap - 2.0 * eps).abs() < 1e-10);
    assert!(g.t.abs() < 1e-5);
}

#[test]
fn tracked_branches_cross_through_a_true_crossing() {
    let h = |t: f64| CMatrix::from_row_slice(2, 2, &[c(t, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-t, 0.0)]);
    let hs: Vec<CMatrix> = (0..41).map(|k| h(-1.0 + 0.05 * k as f64)).collect();
    let tr = eig_tracked(&hs, 1e-3).unwrap();
    let b = (0..2).find(|&b| tr.values[0][b] < 0.0).unwrap();
    let branch = tr.branch(b);
    for (k, e) in branch.iter().enumerate() {
        assert!((e - (-1.0 + 0.05 * k as f64)).abs() < 1e-12);
    }
}

#[test]
fn tracked_spectrum_matches_direct_eigensolve() {
    let h = |t: f64| {
        CMatrix::from_row_slice(3, 3, &[c(t, 0.0), c(0.3, 0.0), c(0.0, 0.1), c(0.3, 0.0), c(0.0, 0.0), c(0.2, 0.0), c(0.0, -0.1), c(0.2, 0.0), c(-t, 0.0)])
    };
    let hs: Vec<CMatrix> = (0..30).map(|k| h(-1.5 + 0.1 * k as f64)).collect();
    let tr = eig_tracked(&hs, 0.0).unwrap();
    for (k, m) in hs.iter().enumerate() {
        let (mut direct, _) = hermitian_eigen(m);
        let mut tracked = tr.values[k].clone();
        direct.sort_by(f64::total_cmp);
        tracked.sort_by(f64::total_cmp);
        for (a, b) in direct.iter().zip(&tracked) {
            assert!((a - b).abs() < 1e-12);
        }
        for b in 0..3 {
            let v = tr.vectors[k].column(b);
            let hv = m * v;
            assert!((hv - v * c(tr.values[k][b], 0.0)).norm() < 1e-10);
        }
    }
}

#[test]
fn bell_state_reduces_to_maximally_mixed() {
    let s = 0.5f64.sqrt();
    let bell = StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap().to_density();
    for keep in [Subsystem::A, Subsystem::B] {
        let r = partial_trace(&bell, 2, 2, keep).unwrap();
        assert!((r.purity() - 0.5).abs() < 1e-14);
        assert!((r.matrix() - DensityOperator::maximally_mixed(2).matrix()).norm() < 1e-14);
    }
}

#[test]
fn partial_trace_rejects_bad_dimensions() {
    let r = DensityOperator::maximally_mixed(6);
    assert!(partial_trace(&r, 4, 2, Subsystem::A).is_err());
}

fn gaussian_density(grid: &PositionGrid, x0: f64, p0: f64, w: f64) -> CMatrix {
    let psi: Vec<C64> = grid
        .points()
        .iter()
        .map(|&x| C64::from_polar((-(x - x0).powi(2) / (2.0 * w * w)).exp(), p0 * x))
        .collect();
    let v = DVector::from_vec(psi);
    let v = v.unscale(v.norm());
    &v * v.adjoint()
}

#[test]
fn wigner_overlap_equals_state_overlap() {
    let grid = PositionGrid::span(-12.0, 12.0, 241).unwrap();
    let (w, x1, x2, p1, p2) = (1.0, -0.5, 0.7, 0.3, -0.4);
    let r1 = gaussian_density(&grid, x1, p1, w);
    let r2 = gaussian_density(&grid, x2, p2, w);
    let pr = (-6.0, 6.0, 241);
    let w1 = wigner_from_position(&r1, &grid, pr).unwrap();
    let w2 = wigner_from_position(&r2, &grid, pr).unwrap();
    let exact = (r1.component_mul(&r2.transpose())).sum().re;
    let closed = (-(x1 - x2).powi(2) / (2.0 * w * w) - w * w * (p1 - p2).powi(2) / 2.0).exp();
    assert!((exact - closed).abs() < 1e-10);
    assert!((w1.overlap(&w2).unwrap() - closed).abs() < 1e-6);
    assert!((w1.integral() - 1.0).abs() < 1e-6);
}

#[test]
fn husimi_is_nonnegative_for_a_cat() {
    let grid = PositionGrid::span(-14.0, 14.0, 281).unwrap();
    let psi: Vec<C64> = grid
        .points()
        .iter()
        .map(|&x| c((-(x - 3.0).powi(2) / 2.0).exp() + (-(x + 3.0).powi(2) / 2.0).exp(), 0.0))
        .collect();
    let v = DVector::from_vec(psi);
    let v = v.unscale(v.norm());
    let rho = &v * v.adjoint();
    let w = wigner_from_position(&rho, &grid, (-4.0, 4.0, 81)).unwrap();
    assert!(w.min_value() < -0.05, "cat Wigner function should go negative");
    let q = husimi_from_position(&rho, &grid, (-4.0, 4.0, 41), 1.0).unwrap();
    assert!(q.min_value() >= -1e-14);
    assert!((q.integral() - 1.0).abs() < 1e-3);
}

#[test]
fn wigner_rejects_unresolved_momenta() {
    let grid = PositionGrid::span(-10.0, 10.0, 101).unwrap();
    let rho = gaussian_density(&grid, 0.0, 0.0, 1.0);
    assert!(wigner_from_position(&rho, &grid, (-20.0, 20.0, 11)).is_err());
}

fn random_hermitian(entries: &[f64], n: usize) -> CMatrix {
    let mut h = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        h[(i, i)] = c(entries[k], 0.0);
        k += 1;
        for j in i + 1..n {
            h[(i, j)] = c(entries[k], entries[k + 1]);
            h[(j, i)] = h[(i, j)].conj();
            k += 2;
        }
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lindblad_keeps_trace_and_hermiticity(h in prop::collection::vec(-1.0f64..1.0, 9), l in prop::collection::vec(-0.5f64..0.5, 9)) {
        let hm = random_hermitian(&h, 3);
        let lm = random_hermitian(&l, 3);
        let rho0 = StateVector::from_real(&[1.0, 0.5, -0.2]).unwrap().to_density();
        let traj = evolve_lindblad(|_| hm.clone(), &[lm], &rho0, (0.0, 3.0), 0.005, 100).unwrap();
        let r = traj.last();
        prop_assert!((r.trace() - 1.0).abs() < 1e-10);
        prop_assert!(traj.stats.max_hermiticity_defect < 1e-12);
        prop_assert!(r.purity() <= 1.0 + 1e-10);
    }

    #[test]
    fn schrodinger_preserves_energy_for_static_h(h in prop::collection::vec(-1.0f64..1.0, 9)) {
        let hm = random_hermitian(&h, 3);
        let psi0 = StateVector::from_real(&[0.3, -1.0, 0.4]).unwrap();
        let energy = |s: &StateVector| (s.amplitudes().adjoint() * &hm * s.amplitudes())[(0, 0)].re;
        let traj = evolve_schrodinger(|_| hm.clone(), &psi0, (0.0, 4.0), 0.002, 1000).unwrap();
        prop_assert!((energy(traj.last()) - energy(&psi0)).abs() < 1e-9);
    }
}
