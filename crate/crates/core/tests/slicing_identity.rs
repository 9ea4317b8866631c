mod common;

use common::{random_bitstrings, random_circuit};
use proptest::prelude::*;
use tnsim::{compute_amplitudes, generate_ghz, generate_rqc, AmplitudeOptions, Circuit, SliceTarget};

fn sliced_vs_unsliced(c: &Circuit, k: usize, seed: u64) -> f64 {
    let tasks = random_bitstrings(c.num_qubits, 16, seed);
    let base = compute_amplitudes(c, &tasks, &AmplitudeOptions::default()).unwrap();
    let opts = AmplitudeOptions { slices: Some(SliceTarget::Count(k)), seed, ..Default::default() };
    let sliced = compute_amplitudes(c, &tasks, &opts).unwrap();
    assert_eq!(sliced.slices_per_task, 1 << k);
    base.amplitudes.iter().zip(&sliced.amplitudes).map(|(a, b)| (a.1 - b.1).norm()).fold(0.0, f64::max)
}

#[test]
fn ghz_slices() {
    let c = generate_ghz(8).unwrap();
    for k in 1..=4 {
        assert!(sliced_vs_unsliced(&c, k, 3) <= 1e-12, "k = {k}");
    }
}

#[test]
fn rqc_slices() {
    let c = generate_rqc(3, 3, 10, 4).unwrap();
    for k in 1..=3 {
        assert!(sliced_vs_unsliced(&c, k, k as u64) <= 1e-10, "k = {k}");
    }
}

#[test]
fn rank_target_bounds_every_intermediate() {
    let c = generate_rqc(3, 3, 10, 4).unwrap();
    let opts = AmplitudeOptions { slices: Some(SliceTarget::MaxRank(5)), ..Default::default() };
    let sim = tnsim::Simulation::prepare(&c, &opts).unwrap();
    let outcome = sim.slicing.as_ref().unwrap();
    assert!(outcome.target_met);
    assert!(sim.plan.max_intermediate_rank <= 5);
    assert!(sim.plan.max_intermediate_size <= sim.base_plan.max_intermediate_size);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_slice_count_preserves_amplitudes(n in 2usize..=6, depth in 4usize..=20, k in 1usize..=3, seed in any::<u64>()) {
        let c = random_circuit(n, depth, seed);
        prop_assert!(sliced_vs_unsliced(&c, k, seed) <= 1e-10);
    }
}
