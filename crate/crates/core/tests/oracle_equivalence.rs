mod common;

use common::{random_bitstrings, random_circuit};
use proptest::prelude::*;
use tnsim::{
    compute_amplitudes, generate_ghz, generate_rqc, statevector, AmplitudeOptions, Bitstring, Circuit, Method,
};

fn max_deviation(c: &Circuit, tasks: &[Bitstring], opts: &AmplitudeOptions) -> f64 {
    let state = statevector(c).unwrap();
    let report = compute_amplitudes(c, tasks, opts).unwrap();
    assert_eq!(report.amplitudes.len(), tasks.len());
    report
        .amplitudes
        .iter()
        .zip(tasks)
        .map(|((x, a), t)| {
            assert_eq!(x, t);
            (a - state.amplitude(x)).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn ghz_all_amplitudes() {
    for n in 1..=8 {
        let c = generate_ghz(n).unwrap();
        let tasks: Vec<_> = Bitstring::all(n).collect();
        assert!(max_deviation(&c, &tasks, &AmplitudeOptions::default()) <= 1e-12, "n = {n}");
    }
}

#[test]
fn rqc_3x3_all_amplitudes() {
    let c = generate_rqc(3, 3, 12, 5).unwrap();
    let tasks: Vec<_> = Bitstring::all(9).collect();
    assert!(max_deviation(&c, &tasks, &AmplitudeOptions::default()) <= 1e-10);
}

#[test]
fn min_degree_plans_agree() {
    let c = generate_rqc(2, 3, 10, 2).unwrap();
    let tasks: Vec<_> = Bitstring::all(6).collect();
    let opts = AmplitudeOptions { method: Method::MinDegree, ..Default::default() };
    assert!(max_deviation(&c, &tasks, &opts) <= 1e-10);
}

#[test]
fn matrix_gates_agree() {
    let text = "qubits 2\nh 0\nmatrix 1 0\n\
        0.0 0.0\n1.0 0.0\n0.0 0.0\n0.0 0.0\n\
        1.0 0.0\n0.0 0.0\n0.0 0.0\n0.0 0.0\n\
        0.0 0.0\n0.0 0.0\n0.0 0.0\n0.0 1.0\n\
        0.0 0.0\n0.0 0.0\n1.0 0.0\n0.0 0.0\n";
    let c = tnsim::parse_circuit(text).unwrap();
    let tasks: Vec<_> = Bitstring::all(2).collect();
    assert!(max_deviation(&c, &tasks, &AmplitudeOptions::default()) <= 1e-12);
}

#[test]
fn idle_qubits_and_empty_circuits() {
    let c = Circuit::new(3).unwrap().with("x", &[2]).unwrap();
    let tasks: Vec<_> = Bitstring::all(3).collect();
    assert!(max_deviation(&c, &tasks, &AmplitudeOptions::default()) <= 1e-15);
    let empty = Circuit::new(2).unwrap();
    let report = compute_amplitudes(&empty, &["00".parse().unwrap()], &AmplitudeOptions::default()).unwrap();
    assert_eq!(report.amplitudes[0].1, tnsim::Complex64::new(1.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_circuits_match_oracle(n in 1usize..=7, depth in 0usize..=24, seed in any::<u64>()) {
        let c = random_circuit(n, depth, seed);
        let tasks = random_bitstrings(n, 8, seed ^ 1);
        let opts = AmplitudeOptions { seed, ..Default::default() };
        prop_assert!(max_deviation(&c, &tasks, &opts) <= 1e-10);
    }

    #[test]
    fn probabilities_sum_to_one(n in 1usize..=5, depth in 0usize..=16, seed in any::<u64>()) {
        let c = random_circuit(n, depth, seed);
        let tasks: Vec<_> = Bitstring::all(n).collect();
        let report = compute_amplitudes(&c, &tasks, &AmplitudeOptions::default()).unwrap();
        let total: f64 = report.amplitudes.iter().map(|(_, a)| a.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }
}
