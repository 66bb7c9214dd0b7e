use measq::ctap::{ChainSpec, PulseSchedule};
use measq::qpc::{
    coherence_loss, completeness_defect, dephasing_rate, dephasing_rate_sep, dephasing_table, kappa, lindblad_operators,
    saturation_rate, transfer_loss, Kernel, QpcArray,
};
use proptest::prelude::*;

fn local(rate: f64) -> QpcArray {
    QpcArray::new(Kernel::Local { alpha: 0.04 }, rate, 10_000).unwrap()
}

#[test]
fn kappa_is_one_without_measurement() {
    let a = QpcArray::new(Kernel::Distance { a: 1.0, d: 1.0, alpha: 0.0 }, 1.0, 500).unwrap();
    assert_eq!(kappa(&a), 1.0);
    assert_eq!(dephasing_rate_sep(&a, 7), 0.0);
}

#[test]
fn effects_are_complete() {
    for arr in [QpcArray::figure_parameters(1.0).unwrap(), QpcArray::figure_parameters(0.0).unwrap()] {
        for i in [0, 17, 9_999, 20_000] {
            assert!(completeness_defect(&arr, i) < 1e-10);
        }
    }
}

#[test]
fn weak_measurement_is_enforced() {
    assert!(QpcArray::new(Kernel::Distance { a: 1.0, d: 1.0, alpha: 1.2 }, 1.0, 100).is_err());
    assert!(QpcArray::new(Kernel::Local { alpha: -0.1 }, 1.0, 100).is_err());
    assert!(QpcArray::new(Kernel::Local { alpha: 0.1 }, -1.0, 100).is_err());
}

#[test]
fn local_limit_closed_form() {
    let arr = local(1.0);
    let n = arr.ring_size() as f64;
    let a: f64 = 0.04;
    let exact = n * (2.0 - a - 2.0 * (1.0 - a).sqrt()) / (n - a);
    for sep in [1, 2, 50] {
        assert!((dephasing_rate_sep(&arr, sep) - exact).abs() < 1e-15);
    }
}

#[test]
fn distance_rates_grow_and_approach_saturation_from_below() {
    let arr = QpcArray::new(Kernel::Distance { a: 1.0, d: 1.0, alpha: 1e-3 }, 1.0, 10_000).unwrap();
    let sat = saturation_rate(&arr).unwrap();
    let rates: Vec<f64> = [1, 5, 40, 400, 4000].iter().map(|&s| dephasing_rate_sep(&arr, s)).collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]), "{rates:?}");
    assert!(rates.iter().all(|&r| r < sat));
    assert!((rates[4] / sat - 1.0).abs() < 0.02, "{}", rates[4] / sat);
    assert!(saturation_rate(&local(1.0)).is_err());
}

#[test]
fn rail_truncation_has_converged() {
    let k = Kernel::Distance { a: 2.0, d: 1.0, alpha: 0.08 };
    let a = QpcArray::new(k, 1.0, 10_000).unwrap();
    let b = QpcArray::new(k, 1.0, 100_000).unwrap();
    for sep in [1, 10, 80] {
        // κ̄(N) − 1 = O(ln N/N) is the only cutoff dependence left in the rate
        let (x, y) = (dephasing_rate_sep(&a, sep) / kappa(&a), dephasing_rate_sep(&b, sep) / kappa(&b));
        assert!(((x - y) / y).abs() < 1e-8, "sep {sep}: {x} vs {y}");
    }
}

#[test]
fn rate_table_is_symmetric_with_zero_diagonal() {
    let arr = QpcArray::figure_parameters(0.5).unwrap();
    let t = dephasing_table(&arr, 6);
    for i in 0..6 {
        assert_eq!(t[(i, i)], 0.0);
        for j in 0..6 {
            assert_eq!(t[(i, j)], t[(j, i)]);
            assert_eq!(t[(i, j)], dephasing_rate(&arr, i, j));
        }
    }
}

#[test]
fn lindblad_operators_reproduce_the_rates() {
    let arr = QpcArray::figure_parameters(1.0).unwrap();
    let chain = ChainSpec::new(5, 1.0).unwrap();
    let ops = lindblad_operators(&arr, &chain);
    for k in 0..5 {
        for l in 0..5 {
            let d: f64 = ops.iter().map(|op| 0.5 * (op[(k, k)] - op[(l, l)]).norm_sqr()).sum();
            let expected = dephasing_rate(&arr, k, l);
            assert!((d - expected).abs() < 1e-10 * expected.max(1e-12), "({k}, {l}): {d} vs {expected}");
        }
    }
}

#[test]
fn loss_vanishes_without_measurement_and_is_linear_in_the_rate() {
    let chain = ChainSpec::new(3, 1.0).unwrap();
    let s = PulseSchedule::counterintuitive(150.0, 1.0).unwrap();
    assert_eq!(transfer_loss(&local(0.0), &chain, &s).unwrap().value, 0.0);
    let a = transfer_loss(&local(1.0), &chain, &s).unwrap().value;
    let b = transfer_loss(&local(2.5), &chain, &s).unwrap().value;
    assert!((b / a - 2.5).abs() < 1e-12);
    assert!((a - 3.805e-3).abs() < 1e-5, "{a}");
}

#[test]
fn local_coherence_exponent_is_rate_times_duration() {
    let arr = local(1.0);
    let chain = ChainSpec::with_window(7, 1.0, 2, 6).unwrap();
    let s = PulseSchedule::counterintuitive(150.0, 1.0).unwrap();
    let r = coherence_loss(&arr, &chain, &s, 1).unwrap();
    let expected = dephasing_rate_sep(&arr, 1) * (r.t1 - r.t0);
    assert!((r.value - expected).abs() < 1e-10 * expected);
    assert!(coherence_loss(&arr, &chain, &s, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rates_are_nonnegative_and_symmetric(a in 0.1f64..3.0, frac in 0.0f64..0.9, k in 0usize..30, l in 0usize..30) {
        let arr = QpcArray::new(Kernel::Distance { a, d: 1.0, alpha: frac * a }, 1.0, 2000).unwrap();
        let d = dephasing_rate(&arr, k, l);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, dephasing_rate(&arr, l, k));
    }
}
