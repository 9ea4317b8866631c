//! Circuit to amplitudes in one place: network, plan, slices, program,
//! execution.

use crate::circuit::{Bitstring, Circuit};
use crate::dsl::{emit_program, DslProgram};
use crate::engine::{Engine, EngineError, ExecutionReport};
use crate::network::{circuit_to_network, close_network, TensorNetwork, TensorStore};
use crate::planner::{
    plan_network, select_slices, ContractionPlan, DecomposeOptions, Method, SliceOptions, SliceOutcome, SliceTarget,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmplitudeOptions {
    pub method: Method,
    /// Restart budget for the decomposition heuristic.
    pub restarts: usize,
    pub slices: Option<SliceTarget>,
    pub replan: bool,
    pub seed: u64,
    pub workers: usize,
}

impl Default for AmplitudeOptions {
    fn default() -> Self {
        AmplitudeOptions {
            method: Method::MinFill,
            restarts: DecomposeOptions::default().restarts,
            slices: None,
            replan: true,
            seed: 0,
            workers: 1,
        }
    }
}

impl AmplitudeOptions {
    pub fn decompose(&self) -> DecomposeOptions {
        DecomposeOptions { method: self.method, seed: self.seed, restarts: self.restarts }
    }
}

/// Everything produced by planning a circuit, ready to execute for any batch
/// of bitstrings.
#[derive(Debug, Clone)]
pub struct Simulation {
    /// Closed network; the closure tensors are placeholders that the program
    /// rebinds per task.
    pub network: TensorNetwork,
    /// Plan before slicing.
    pub base_plan: ContractionPlan,
    /// Plan that the program was emitted from.
    pub plan: ContractionPlan,
    pub slicing: Option<SliceOutcome>,
    pub program: DslProgram,
    pub store: TensorStore,
}

impl Simulation {
    pub fn prepare(circuit: &Circuit, opts: &AmplitudeOptions) -> Result<Simulation, Error> {
        let open = circuit_to_network(circuit);
        let network = close_network(&open, &Bitstring::zeros(circuit.num_qubits))?;
        let base_plan = plan_network(&network, &opts.decompose())?;
        let slicing = match opts.slices {
            Some(target) => Some(select_slices(
                &network,
                &base_plan,
                target,
                &SliceOptions { seed: opts.seed, replan: opts.replan, decompose: opts.decompose() },
            )?),
            None => None,
        };
        let plan = slicing.as_ref().map_or_else(|| base_plan.clone(), |s| s.plan.clone());
        let program = emit_program(&network, &plan)?;
        let store = TensorStore::from_network(&network);
        Ok(Simulation { network, base_plan, plan, slicing, program, store })
    }

    pub fn engine(&self, workers: usize) -> Result<Engine<'_>, EngineError> {
        Engine::new(&self.program, &self.store, workers)
    }

    pub fn run(&self, tasks: &[Bitstring], workers: usize) -> Result<ExecutionReport, EngineError> {
        self.engine(workers)?.run(tasks)
    }
}

/// Plans `circuit` and computes the amplitude of every bitstring.
pub fn compute_amplitudes(
    circuit: &Circuit,
    bitstrings: &[Bitstring],
    opts: &AmplitudeOptions,
) -> Result<ExecutionReport, Error> {
    let sim = Simulation::prepare(circuit, opts)?;
    Ok(sim.run(bitstrings, opts.workers)?)
}
