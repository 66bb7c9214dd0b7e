use measq::ctap::{run_transport, ChainSpec, PulseSchedule, TransportInput};
use measq::tls::{
    bystander_superposition, crossing_condition, crossing_threshold, gamma_delta, oscillation_amplitude, reduced_coherence,
    transport_with_tls, TlsBath, DEFAULT_MEMORY_BUDGET,
};

#[test]
fn rates_for_mixed_and_polarized_fluctuators() {
    let (chi, t) = (0.3, 2.0);
    let (g, d) = gamma_delta(t, chi, 0.0).unwrap();
    assert!((g - chi * (chi * t).tan()).abs() < 1e-14 && d.abs() < 1e-14);
    for w in [1.0, -1.0] {
        let (g, d) = gamma_delta(t, chi, w).unwrap();
        assert!(g.abs() < 1e-14 && (d - w * chi).abs() < 1e-14);
    }
    assert!(gamma_delta(std::f64::consts::FRAC_PI_2 / chi, chi, 0.0).is_err());
}

#[test]
fn rates_are_the_log_derivative_of_the_coherence() {
    let (chi, w, t, h) = (0.4, 0.35, 1.7, 1e-5);
    let f = |t: f64| reduced_coherence(0.0, (0.0, 0.0), (chi, w), t);
    let dlog = (f(t + h) - f(t - h)) / (2.0 * h) / f(t);
    let (g, d) = gamma_delta(t, chi, w).unwrap();
    assert!((-dlog.re - g).abs() < 1e-8 && (dlog.im - d).abs() < 1e-8, "{dlog} vs ({g}, {d})");
}

#[test]
fn coherence_without_fluctuators_decays_exponentially() {
    let z = reduced_coherence(0.2, (0.0, 0.5), (0.0, -0.3), 3.0);
    assert!((z.re - (-0.6f64).exp()).abs() < 1e-15 && z.im.abs() < 1e-15);
}

#[test]
fn zero_coupling_keeps_the_state_pure() {
    let chain = ChainSpec::new(5, 1.0).unwrap();
    let s = PulseSchedule::counterintuitive(60.0, 1.0).unwrap();
    let bath = TlsBath::mixed(5, 0.0).unwrap();
    let run = transport_with_tls(&chain, &s, &bath, &TransportInput::Site(1), 0.01, 100, DEFAULT_MEMORY_BUDGET).unwrap();
    assert_eq!(run.weights.len(), 32);
    assert!(run.purity.iter().all(|p| (p - 1.0).abs() < 1e-10));
}

#[test]
fn polarized_bath_is_a_single_block() {
    let chain = ChainSpec::new(5, 1.0).unwrap();
    let s = PulseSchedule::counterintuitive(60.0, 1.0).unwrap();
    let bath = TlsBath::new(vec![0.1; 5], vec![1.0; 5]).unwrap();
    let run = transport_with_tls(&chain, &s, &bath, &TransportInput::Site(1), 0.01, 100, DEFAULT_MEMORY_BUDGET).unwrap();
    assert_eq!(run.signs, vec![vec![1i8; 5]]);
    let diag = bath.block_diagonal(&chain, &[1; 5]);
    let direct = run_transport(&chain, &s, &TransportInput::Site(1), 0.01, Some(&diag), 100).unwrap();
    assert!((run.fidelity - direct.fidelity).abs() < 1e-14);
    assert!(run.purity.iter().all(|p| (p - 1.0).abs() < 1e-10));
}

#[test]
fn mixed_bath_weights_sum_to_one() {
    let bath = TlsBath::new(vec![0.1, 0.2, 0.3], vec![0.2, -0.5, 1.0]).unwrap();
    let blocks = bath.blocks();
    assert_eq!(blocks.len(), 4);
    assert!((blocks.iter().map(|b| b.1).sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(TlsBath::new(vec![0.1], vec![1.5]).is_err());
}

#[test]
fn three_dot_crossing_threshold_is_twice_the_coupling() {
    let chi = 0.1;
    let bath = TlsBath::mixed(3, chi).unwrap();
    let t = crossing_threshold(3, &bath, 0.01, 1.0, 1e-9).unwrap();
    assert!((t - 2.0 * chi).abs() < 1e-8, "{t}");
    let chain = ChainSpec::new(3, 0.5).unwrap();
    assert!(crossing_condition(&chain, &bath, &[(0.0, 0.5)]).unwrap().satisfied);
    let chain = ChainSpec::new(3, 0.15).unwrap();
    assert!(!crossing_condition(&chain, &bath, &[(0.0, 0.15)]).unwrap().satisfied);
}

#[test]
fn oversized_baths_are_refused() {
    let chain = ChainSpec::new(15, 1.0).unwrap();
    let s = PulseSchedule::counterintuitive(60.0, 1.0).unwrap();
    let bath = TlsBath::mixed(15, 0.1).unwrap();
    let err = transport_with_tls(&chain, &s, &bath, &TransportInput::Site(1), 0.01, 1, DEFAULT_MEMORY_BUDGET).unwrap_err();
    assert!(matches!(err, measq::Error::ResourceLimit(_)));
    let small = ChainSpec::new(5, 1.0).unwrap();
    let err = transport_with_tls(&small, &s, &TlsBath::mixed(5, 0.1).unwrap(), &TransportInput::Site(1), 0.01, 1, 1000).unwrap_err();
    assert!(matches!(err, measq::Error::ResourceLimit(_)));
}

#[test]
fn bystander_superposition_is_normalized() {
    let chain = ChainSpec::with_window(7, 1.0, 3, 7).unwrap();
    let s = bystander_superposition(&chain, 1).unwrap();
    assert!((s.populations()[0] - 0.5).abs() < 1e-15 && (s.populations()[2] - 0.5).abs() < 1e-15);
    assert!(bystander_superposition(&chain, 3).is_err());
}

#[test]
fn oscillation_amplitude_separates_slow_from_fast() {
    let slow: Vec<f64> = (0..400).map(|k| (k as f64 / 400.0).powi(2)).collect();
    let fast: Vec<f64> = (0..400).map(|k| 0.5 + 0.2 * (k as f64 * 0.9).sin()).collect();
    assert!(oscillation_amplitude(&slow, 4) < 1e-3);
    assert!(oscillation_amplitude(&fast, 4) > 0.1);
}
