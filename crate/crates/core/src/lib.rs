//! Tensor-network simulation of quantum circuits.
//!
//! A circuit becomes a network of small tensors, one per input qubit, one per
//! gate and one per output qubit. A tree decomposition of the network's line
//! graph gives a contraction plan whose largest intermediate is bounded by the
//! decomposition width. Slicing fixes chosen indices to trade memory for
//! repeated work. The plan is written out as a flat program that the engine
//! runs over a worker pool, once per bitstring and slice.
//!
//! ```
//! use tnsim::{compute_amplitudes, generate_ghz, AmplitudeOptions, Bitstring};
//!
//! let circuit = generate_ghz(4).unwrap();
//! let x: Bitstring = "1111".parse().unwrap();
//! let report = compute_amplitudes(&circuit, &[x.clone()], &AmplitudeOptions::default()).unwrap();
//! let amp = report.amplitude(&x).unwrap();
//! assert!((amp.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
//! ```

pub mod circuit;
pub mod dsl;
pub mod engine;
pub mod network;
pub mod oracle;
mod pipeline;
pub mod planner;
pub mod rng;
pub mod sampler;
pub mod tensor;

pub use num_complex::Complex64;

pub use circuit::{generate_ghz, generate_rqc, parse_circuit, serialize_circuit, Bitstring, Circuit, CircuitError, Gate};
pub use dsl::{emit_program, parse_program, DslError, DslProgram, Instruction};
pub use engine::{execute_program, Engine, EngineError, ExecutionReport};
pub use network::{circuit_to_network, close_network, line_graph, NetworkError, TensorNetwork, TensorStore};
pub use oracle::{oracle_amplitude, statevector, OracleError, StateVector};
pub use pipeline::{compute_amplitudes, AmplitudeOptions, Simulation};
pub use planner::{
    count_contraction_orders, plan_network, select_slices, tree_decompose, ContractionPlan, Method, PlanError,
    SliceTarget,
};
pub use sampler::{draw_samples, sample_run, update_bound, SamplerError, SamplerOptions};
pub use tensor::{Tensor, TensorError};

/// Any error the library can return.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

// Book chapters run as doc-tests so the guide stays in sync with the code.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/slicing.md")]
    mod slicing {}
    #[doc = include_str!("../../../book/src/dsl.md")]
    mod dsl {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
