use measq::ctap::{
    adiabaticity_metric, dark_state, dark_state_in_chain, hamiltonian, hamiltonian_real, run_transport, transport_convergence,
    ChainSpec, PulseSchedule, TransportInput,
};
use measq::numeric::{complexify, hermitian_eigen};
use proptest::prelude::*;

fn fidelity(period: f64) -> f64 {
    let chain = ChainSpec::new(5, 1.0).unwrap();
    let s = PulseSchedule::demonstration(period, 1.0).unwrap();
    run_transport(&chain, &s, &TransportInput::Site(1), 0.01, None, usize::MAX).unwrap().fidelity
}

#[test]
fn three_dot_spectrum() {
    let chain = ChainSpec::new(3, 1.0).unwrap();
    let s2 = 0.5f64.sqrt();
    let h = complexify(&hamiltonian_real(&chain, s2, s2, None).unwrap());
    let (vals, _) = hermitian_eigen(&h);
    for (v, e) in vals.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((v - e).abs() < 1e-14);
    }
}

#[test]
fn dark_state_limits() {
    let start = dark_state(0.0, 1.0, 1.0, 5).unwrap();
    assert!((start.populations()[0] - 1.0).abs() < 1e-15);
    let end = dark_state(1.0, 0.0, 1.0, 5).unwrap();
    assert!((end.populations()[4] - 1.0).abs() < 1e-15);
    assert!(dark_state(0.0, 0.0, 1.0, 5).is_err());
    assert!(dark_state(1.0, 1.0, 1.0, 4).is_err());
}

#[test]
fn dark_state_is_a_zero_mode_along_the_sweep() {
    for n in [3, 5, 7, 11] {
        let chain = ChainSpec::new(n, 1.0).unwrap();
        let s = PulseSchedule::counterintuitive(100.0, 1.0).unwrap();
        for t in s.sample_times(100) {
            let (p, q) = (s.omega_p(t), s.omega_s(t));
            if p.hypot(q) < 1e-12 {
                continue;
            }
            let d = dark_state_in_chain(&chain, p, q).unwrap();
            let h = hamiltonian(&chain, &s, t, None).unwrap();
            assert!((h * d.amplitudes()).norm() < 1e-12, "n = {n}, t = {t}");
        }
    }
}

#[test]
fn figure_fidelities() {
    let f40 = fidelity(40.0);
    let f60 = fidelity(60.0);
    assert!((f40 - 0.973).abs() < 0.002, "{f40}");
    assert!((f60 - 0.998).abs() < 0.002, "{f60}");
}

#[test]
fn fidelity_grows_with_duration() {
    let f: Vec<f64> = [20.0, 40.0, 60.0, 120.0].iter().map(|&t| fidelity(t)).collect();
    assert!(f.windows(2).all(|w| w[1] > w[0]), "{f:?}");
}

#[test]
fn doubling_the_duration_halves_the_adiabaticity_ratio() {
    let chain = ChainSpec::new(5, 1.0).unwrap();
    let a = PulseSchedule::demonstration(40.0, 1.0).unwrap();
    let b = PulseSchedule::demonstration(80.0, 1.0).unwrap();
    for frac in [0.4, 0.6, 0.7, 0.9] {
        let ra = adiabaticity_metric(&chain, &a, frac * 40.0, None).unwrap().max;
        let rb = adiabaticity_metric(&chain, &b, frac * 80.0, None).unwrap().max;
        assert!((rb / ra - 0.5).abs() < 1e-4, "frac = {frac}: {ra} vs {rb}");
    }
}

#[test]
fn step_halving_estimate_is_small() {
    let chain = ChainSpec::new(5, 1.0).unwrap();
    let s = PulseSchedule::demonstration(40.0, 1.0).unwrap();
    let c = transport_convergence(&chain, &s, &TransportInput::Site(1), 0.04, None).unwrap();
    assert!(c.error_estimate < 1e-6, "{c:?}");
    assert!((c.fine - fidelity(40.0)).abs() < 1e-6);
}

#[test]
fn window_outside_sites_are_untouched() {
    let chain = ChainSpec::with_window(7, 1.0, 2, 6).unwrap();
    let s = PulseSchedule::demonstration(60.0, 1.0).unwrap();
    let run = run_transport(&chain, &s, &TransportInput::Site(2), 0.01, None, usize::MAX).unwrap();
    let pops = run.trajectory.last().populations();
    assert!(pops[0] < 1e-20 && pops[6] < 1e-20);
    assert!((run.fidelity - fidelity(60.0)).abs() < 1e-10);
}

#[test]
fn coarse_steps_are_rejected() {
    let chain = ChainSpec::new(5, 1.0).unwrap();
    let s = PulseSchedule::demonstration(40.0, 1.0).unwrap();
    assert!(run_transport(&chain, &s, &TransportInput::Site(1), 0.1, None, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dark_state_kernel(p in 0.01f64..2.0, s in 0.01f64..2.0, omax in 0.2f64..3.0, half in 1usize..6) {
        let n = 2 * half + 1;
        let chain = ChainSpec::new(n, omax).unwrap();
        let d = dark_state_in_chain(&chain, p, s).unwrap();
        let h = complexify(&hamiltonian_real(&chain, p, s, None).unwrap());
        prop_assert!((h * d.amplitudes()).norm() < 1e-12);
        prop_assert!((d.norm() - 1.0).abs() < 1e-14);
    }
}
