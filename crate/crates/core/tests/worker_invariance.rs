use tnsim::{generate_rqc, AmplitudeOptions, Bitstring, Simulation, SliceTarget};

fn bits(report: &tnsim::ExecutionReport) -> Vec<(String, u64, u64)> {
    report.amplitudes.iter().map(|(x, a)| (x.to_string(), a.re.to_bits(), a.im.to_bits())).collect()
}

#[test]
fn all_amplitudes_bit_identical_across_workers() {
    let c = generate_rqc(3, 3, 12, 5).unwrap();
    let sim = Simulation::prepare(&c, &AmplitudeOptions::default()).unwrap();
    let tasks: Vec<_> = Bitstring::all(9).collect();
    let reference = bits(&sim.run(&tasks, 1).unwrap());
    for workers in [2, 8] {
        let report = sim.run(&tasks, workers).unwrap();
        assert_eq!(report.workers, workers);
        assert_eq!(bits(&report), reference, "workers = {workers}");
    }
}

#[test]
fn sliced_sums_bit_identical_across_workers() {
    let c = generate_rqc(3, 3, 12, 5).unwrap();
    let opts = AmplitudeOptions { slices: Some(SliceTarget::Count(3)), ..Default::default() };
    let sim = Simulation::prepare(&c, &opts).unwrap();
    let tasks: Vec<_> = Bitstring::all(9).step_by(7).collect();
    let reference = bits(&sim.run(&tasks, 1).unwrap());
    for workers in [2, 3, 8] {
        assert_eq!(bits(&sim.run(&tasks, workers).unwrap()), reference, "workers = {workers}");
    }
}

#[test]
fn repeated_runs_on_one_engine() {
    let c = generate_rqc(2, 2, 8, 1).unwrap();
    let sim = Simulation::prepare(&c, &AmplitudeOptions::default()).unwrap();
    let engine = sim.engine(4).unwrap();
    let tasks: Vec<_> = Bitstring::all(4).collect();
    let first = bits(&engine.run(&tasks).unwrap());
    for _ in 0..3 {
        assert_eq!(bits(&engine.run(&tasks).unwrap()), first);
    }
}
