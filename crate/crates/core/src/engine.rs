//! Executes QXD programs against a tensor store.
//!
//! Every `(task, slice assignment)` pair is an independent job. Jobs run on a
//! pool of `workers` threads; their scalar results are collected by job index
//! and each task's partials are summed in lexicographic assignment order, so
//! the output does not depend on the number of workers or on scheduling.

use std::borrow::Cow;
use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use thiserror::Error;

use crate::circuit::Bitstring;
use crate::dsl::{DslError, DslProgram, Instruction};
use crate::network::TensorStore;
use crate::tensor::{contract_pair, slice_tensor, Tensor, TensorError};

pub use crate::pipeline::{compute_amplitudes, AmplitudeOptions};
pub use crate::tensor::{contract_pair as contract, slice_tensor as slice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("tensor store has no entry `{0}`")]
    MissingSource(String),
    #[error("slice label `{0}` is carried by no tensor")]
    UnknownSliceDim(String),
    #[error("task bitstring `{got}` has the wrong length for {expected} qubits")]
    BitstringLength { expected: usize, got: String },
    #[error("instruction {index}: {source}")]
    Instruction { index: usize, source: TensorError },
    #[error("saved tensor has rank {0}, expected a scalar")]
    NotScalar(usize),
    #[error("output template `{0}` must be a rank-1 tensor of dim 2")]
    BadOutputTemplate(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
}

/// Values of the slice labels, in `slice_labels` order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SliceAssignment(pub Vec<usize>);

impl SliceAssignment {
    /// The `index`-th assignment in lexicographic order (last label fastest).
    pub fn nth(index: usize, dims: &[usize]) -> SliceAssignment {
        let mut rem = index;
        let mut values = vec![0; dims.len()];
        for i in (0..dims.len()).rev() {
            values[i] = rem % dims[i];
            rem /= dims[i];
        }
        SliceAssignment(values)
    }

    /// All assignments in lexicographic order.
    pub fn all(dims: &[usize]) -> impl Iterator<Item = SliceAssignment> + '_ {
        let total: usize = dims.iter().product();
        (0..total).map(move |i| SliceAssignment::nth(i, dims))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionReport {
    /// One entry per task, in request order.
    pub amplitudes: Vec<(Bitstring, Complex64)>,
    pub wall_time: f64,
    /// Largest element count bound at once by any single job.
    pub peak_live_elements: u128,
    pub tasks: usize,
    pub slices_per_task: usize,
    pub workers: usize,
    /// How jobs are distributed; the reduction order is fixed regardless.
    pub schedule: &'static str,
}

impl ExecutionReport {
    pub fn amplitude(&self, x: &Bitstring) -> Option<Complex64> {
        self.amplitudes.iter().find(|(b, _)| b == x).map(|&(_, a)| a)
    }
}

enum Op<'a> {
    Load { slot: usize, tensor: &'a Tensor },
    Output { slot: usize, qubit: usize, template: &'a Tensor },
    View { slot: usize, input: usize, label: &'a str, slice: usize },
    Contract { slot: usize, a: usize, b: usize },
    Save { slot: usize },
}

/// A program resolved against a store: ids become slot numbers and sources
/// become references, so jobs do no lookups by name.
pub struct Executable<'a> {
    ops: Vec<Op<'a>>,
    slots: usize,
    num_qubits: usize,
    slice_dims: Vec<usize>,
}

impl<'a> Executable<'a> {
    pub fn new(program: &'a DslProgram, store: &'a TensorStore) -> Result<Executable<'a>, EngineError> {
        program.validate()?;
        let mut slots: HashMap<&str, usize> = HashMap::new();
        let slice_index: HashMap<&str, usize> =
            program.slice_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut slice_dims: Vec<Option<usize>> = vec![None; program.slice_labels.len()];
        let mut note_dims = |t: &Tensor| {
            for (l, &d) in t.labels().iter().zip(t.dims()) {
                if let Some(&i) = slice_index.get(l.as_str()) {
                    slice_dims[i].get_or_insert(d);
                }
            }
        };
        let mut ops = Vec::with_capacity(program.instructions.len());
        fn define<'p>(slots: &mut HashMap<&'p str, usize>, id: &'p str) -> usize {
            let n = slots.len();
            *slots.entry(id).or_insert(n)
        }
        for ins in &program.instructions {
            let op = match ins {
                Instruction::Load { id, source } => {
                    let tensor = store.get(source).ok_or_else(|| EngineError::MissingSource(source.clone()))?;
                    note_dims(tensor);
                    Op::Load { slot: define(&mut slots, id), tensor }
                }
                Instruction::Output { id, qubit } => {
                    let template = store.get(id).ok_or_else(|| EngineError::MissingSource(id.clone()))?;
                    if template.dims() != [2] {
                        return Err(EngineError::BadOutputTemplate(id.clone()));
                    }
                    note_dims(template);
                    Op::Output { slot: define(&mut slots, id), qubit: *qubit, template }
                }
                Instruction::View { out, input, label } => {
                    let input = slots[input.as_str()];
                    Op::View { slot: define(&mut slots, out), input, label, slice: slice_index[label.as_str()] }
                }
                Instruction::Contract { out, a, b } => {
                    let (a, b) = (slots[a.as_str()], slots[b.as_str()]);
                    Op::Contract { slot: define(&mut slots, out), a, b }
                }
                Instruction::Save { id } => Op::Save { slot: slots[id.as_str()] },
            };
            ops.push(op);
        }
        let slice_dims = slice_dims
            .into_iter()
            .zip(&program.slice_labels)
            .map(|(d, l)| d.ok_or_else(|| EngineError::UnknownSliceDim(l.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Executable { ops, slots: slots.len(), num_qubits: program.num_qubits, slice_dims })
    }

    pub fn slice_dims(&self) -> &[usize] {
        &self.slice_dims
    }

    pub fn slices_per_task(&self) -> usize {
        self.slice_dims.iter().product()
    }

    /// Runs one job; returns the scalar and the job's peak bound elements.
    pub fn run_job(&self, task: &Bitstring, assignment: &SliceAssignment) -> Result<(Complex64, u128), EngineError> {
        let mut env: Vec<Option<Cow<'a, Tensor>>> = vec![None; self.slots];
        let mut live = 0u128;
        let mut peak = 0u128;
        let mut saved = None;
        for (index, op) in self.ops.iter().enumerate() {
            let wrap = |source| EngineError::Instruction { index, source };
            match *op {
                Op::Load { slot, tensor } => {
                    live += tensor.len() as u128;
                    env[slot] = Some(Cow::Borrowed(tensor));
                }
                Op::Output { slot, qubit, template } => {
                    let mut t = template.clone();
                    let bit = task.bit(qubit) as usize;
                    for (i, z) in t.data_mut().iter_mut().enumerate() {
                        *z = Complex64::new((i == bit) as u8 as f64, 0.0);
                    }
                    live += t.len() as u128;
                    env[slot] = Some(Cow::Owned(t));
                }
                Op::View { slot, input, label, slice } => {
                    let src = env[input].take().expect("validated program");
                    let t = slice_tensor(&src, label, assignment.0[slice]).map_err(wrap)?;
                    live += t.len() as u128;
                    peak = peak.max(live);
                    live -= src.len() as u128;
                    env[slot] = Some(Cow::Owned(t));
                }
                Op::Contract { slot, a, b } => {
                    let x = env[a].take().expect("validated program");
                    let y = env[b].take().expect("validated program");
                    let t = contract_pair(&x, &y).map_err(wrap)?;
                    live += t.len() as u128;
                    peak = peak.max(live);
                    live -= (x.len() + y.len()) as u128;
                    env[slot] = Some(Cow::Owned(t));
                }
                Op::Save { slot } => saved = env[slot].take(),
            }
            peak = peak.max(live);
        }
        let t = saved.expect("validated program saves once");
        if t.rank() != 0 {
            return Err(EngineError::NotScalar(t.rank()));
        }
        Ok((t.data()[0], peak))
    }
}

/// Reusable executor: a resolved program plus its worker pool.
pub struct Engine<'a> {
    exe: Executable<'a>,
    pool: Option<ThreadPool>,
    workers: usize,
}

impl<'a> Engine<'a> {
    pub fn new(program: &'a DslProgram, store: &'a TensorStore, workers: usize) -> Result<Engine<'a>, EngineError> {
        let exe = Executable::new(program, store)?;
        let workers = workers.max(1);
        let pool = if workers > 1 {
            Some(
                ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| EngineError::Pool(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Engine { exe, pool, workers })
    }

    pub fn executable(&self) -> &Executable<'a> {
        &self.exe
    }

    pub fn run(&self, tasks: &[Bitstring]) -> Result<ExecutionReport, EngineError> {
        let start = Instant::now();
        for t in tasks {
            if t.len() != self.exe.num_qubits {
                return Err(EngineError::BitstringLength { expected: self.exe.num_qubits, got: t.to_string() });
            }
        }
        let per_task = self.exe.slices_per_task();
        let jobs = tasks.len() * per_task;
        let run = |j: usize| {
            let assignment = SliceAssignment::nth(j % per_task, &self.exe.slice_dims);
            self.exe.run_job(&tasks[j / per_task], &assignment)
        };
        let partials: Vec<Result<(Complex64, u128), EngineError>> = match &self.pool {
            Some(pool) => pool.install(|| (0..jobs).into_par_iter().map(run).collect()),
            None => (0..jobs).map(run).collect(),
        };

        let mut amplitudes = Vec::with_capacity(tasks.len());
        let mut peak = 0u128;
        let mut partials = partials.into_iter();
        for task in tasks {
            let mut sum = Complex64::new(0.0, 0.0);
            for _ in 0..per_task {
                let (value, job_peak) = partials.next().expect("one partial per job")?;
                sum += value;
                peak = peak.max(job_peak);
            }
            amplitudes.push((task.clone(), sum));
        }
        Ok(ExecutionReport {
            amplitudes,
            wall_time: start.elapsed().as_secs_f64(),
            peak_live_elements: peak,
            tasks: tasks.len(),
            slices_per_task: per_task,
            workers: self.workers,
            schedule: "work-stealing over (task, slice) jobs; partials summed in lexicographic order",
        })
    }
}

/// Executes `program` for every task bitstring.
pub fn execute_program(
    program: &DslProgram,
    store: &TensorStore,
    tasks: &[Bitstring],
    workers: usize,
) -> Result<ExecutionReport, EngineError> {
    Engine::new(program, store, workers)?.run(tasks)
}
