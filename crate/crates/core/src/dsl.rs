//! The QXD program format: a flat list of tensor instructions produced by the
//! planner and consumed by the engine.
//!
//! ```text
//! version 1
//! qubits 1
//! slices
//! load in0 in0
//! load g0 g0
//! output out0 0
//! contract %0 in0 g0
//! contract %1 %0 out0
//! save %1
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::network::TensorNetwork;
use crate::planner::ContractionPlan;

pub const DSL_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported program version {0}")]
    Version(u32),
    #[error("instruction {index}: `{id}` used before definition")]
    UseBeforeDefine { index: usize, id: String },
    #[error("instruction {index}: `{id}` defined twice")]
    Redefined { index: usize, id: String },
    #[error("instruction {index}: `{id}` consumed twice")]
    ConsumedTwice { index: usize, id: String },
    #[error("instruction {index}: view on `{label}`, which is not a slice label")]
    UnknownSliceLabel { index: usize, label: String },
    #[error("instruction {index}: output for qubit {qubit} out of range or repeated")]
    BadOutput { index: usize, qubit: usize },
    #[error("program has no save instruction")]
    NoSave,
    #[error("program saves more than once")]
    MultipleSaves,
    #[error("tensor `{0}` is never consumed")]
    Dangling(String),
    #[error("plan does not match network: {0}")]
    PlanMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    /// Bind `id` to the stored tensor `source`.
    Load { id: String, source: String },
    /// Bind `id` to the basis vector selected by the task's bit on `qubit`.
    Output { id: String, qubit: usize },
    /// Fix `label` of `input` to the current slice value.
    View { out: String, input: String, label: String },
    /// Contract `a` and `b` over their shared labels.
    Contract { out: String, a: String, b: String },
    Save { id: String },
}

impl Instruction {
    fn defines(&self) -> Option<&str> {
        match self {
            Instruction::Load { id, .. } | Instruction::Output { id, .. } => Some(id),
            Instruction::View { out, .. } | Instruction::Contract { out, .. } => Some(out),
            Instruction::Save { .. } => None,
        }
    }

    fn consumes(&self) -> Vec<&str> {
        match self {
            Instruction::View { input, .. } => vec![input],
            Instruction::Contract { a, b, .. } => vec![a, b],
            Instruction::Save { id } => vec![id],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DslProgram {
    pub version: u32,
    pub num_qubits: usize,
    pub slice_labels: Vec<String>,
    pub instructions: Vec<Instruction>,
}

impl DslProgram {
    /// Ids of the parameterized output tensors, indexed by qubit.
    pub fn output_binding(&self) -> Vec<Option<&str>> {
        let mut out = vec![None; self.num_qubits];
        for ins in &self.instructions {
            if let Instruction::Output { id, qubit } = ins {
                if let Some(slot) = out.get_mut(*qubit) {
                    *slot = Some(id.as_str());
                }
            }
        }
        out
    }

    /// Checks single assignment, single consumption, slice labels and the
    /// presence of exactly one save.
    pub fn validate(&self) -> Result<(), DslError> {
        if self.version != DSL_VERSION {
            return Err(DslError::Version(self.version));
        }
        let slices: HashSet<&str> = self.slice_labels.iter().map(String::as_str).collect();
        let mut defined: HashSet<&str> = HashSet::new();
        let mut consumed: HashSet<&str> = HashSet::new();
        let mut outputs = vec![false; self.num_qubits];
        let mut saves = 0;
        for (index, ins) in self.instructions.iter().enumerate() {
            for id in ins.consumes() {
                if !defined.contains(id) {
                    return Err(DslError::UseBeforeDefine { index, id: id.to_string() });
                }
                if !consumed.insert(id) {
                    return Err(DslError::ConsumedTwice { index, id: id.to_string() });
                }
            }
            match ins {
                Instruction::View { label, .. } if !slices.contains(label.as_str()) => {
                    return Err(DslError::UnknownSliceLabel { index, label: label.clone() });
                }
                Instruction::Output { qubit, .. } => {
                    if *qubit >= self.num_qubits || outputs[*qubit] {
                        return Err(DslError::BadOutput { index, qubit: *qubit });
                    }
                    outputs[*qubit] = true;
                }
                Instruction::Save { .. } => saves += 1,
                _ => {}
            }
            if let Some(id) = ins.defines() {
                if !defined.insert(id) {
                    return Err(DslError::Redefined { index, id: id.to_string() });
                }
            }
        }
        match saves {
            0 => return Err(DslError::NoSave),
            1 => {}
            _ => return Err(DslError::MultipleSaves),
        }
        if let Some(id) = self.instructions.iter().filter_map(Instruction::defines).find(|id| !consumed.contains(id)) {
            return Err(DslError::Dangling(id.to_string()));
        }
        Ok(())
    }

    /// Renders the program as QXD text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version {}", self.version);
        let _ = writeln!(out, "qubits {}", self.num_qubits);
        out.push_str("slices");
        for l in &self.slice_labels {
            out.push(' ');
            out.push_str(l);
        }
        out.push('\n');
        for ins in &self.instructions {
            let _ = match ins {
                Instruction::Load { id, source } => writeln!(out, "load {id} {source}"),
                Instruction::Output { id, qubit } => writeln!(out, "output {id} {qubit}"),
                Instruction::View { out: o, input, label } => writeln!(out, "view {o} {input} {label}"),
                Instruction::Contract { out: o, a, b } => writeln!(out, "contract {o} {a} {b}"),
                Instruction::Save { id } => writeln!(out, "save {id}"),
            };
        }
        out
    }
}

/// Parses and validates QXD text.
pub fn parse_program(text: &str) -> Result<DslProgram, DslError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut header = |key: &str| -> Result<(usize, Vec<&str>), DslError> {
        let (line, text) = lines.next().ok_or(DslError::Syntax { line: 0, msg: format!("missing `{key}` line") })?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(key) {
            return Err(DslError::Syntax { line, msg: format!("expected `{key}`") });
        }
        Ok((line, parts.collect()))
    };
    let number = |line: usize, v: &[&str]| -> Result<usize, DslError> {
        match v {
            [n] => n.parse().map_err(|_| DslError::Syntax { line, msg: format!("bad number `{n}`") }),
            _ => Err(DslError::Syntax { line, msg: "expected one number".into() }),
        }
    };
    let (line, v) = header("version")?;
    let version = number(line, &v)? as u32;
    if version != DSL_VERSION {
        return Err(DslError::Version(version));
    }
    let (line, v) = header("qubits")?;
    let num_qubits = number(line, &v)?;
    let (_, v) = header("slices")?;
    let slice_labels = v.into_iter().map(str::to_string).collect();

    let mut instructions = Vec::new();
    for (line, text) in lines {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let s = |i: usize| parts[i].to_string();
        let ins = match (parts[0], parts.len()) {
            ("load", 3) => Instruction::Load { id: s(1), source: s(2) },
            ("output", 3) => Instruction::Output { id: s(1), qubit: number(line, &parts[2..])? },
            ("view", 4) => Instruction::View { out: s(1), input: s(2), label: s(3) },
            ("contract", 4) => Instruction::Contract { out: s(1), a: s(2), b: s(3) },
            ("save", 2) => Instruction::Save { id: s(1) },
            (op, _) => return Err(DslError::Syntax { line, msg: format!("malformed `{op}` instruction") }),
        };
        instructions.push(ins);
    }
    let program = DslProgram { version, num_qubits, slice_labels, instructions };
    program.validate()?;
    Ok(program)
}

/// Lowers a plan to a program. Static tensors become `load`s, the closure
/// tensors of the network become `output`s, every leaf carrying a sliced
/// label is narrowed by `view`s right after it is bound, and the plan steps
/// become `contract`s.
pub fn emit_program(net: &TensorNetwork, plan: &ContractionPlan) -> Result<DslProgram, DslError> {
    let mismatch = |m: String| DslError::PlanMismatch(m);
    for l in &plan.sliced_labels {
        if net.dim(l).is_none() {
            return Err(mismatch(format!("sliced label `{l}` not in network")));
        }
    }
    let outputs: HashMap<&str, usize> =
        net.closure_ids().iter().enumerate().map(|(q, id)| (id.as_str(), q)).collect();

    let mut instructions = Vec::new();
    let mut current: HashMap<String, String> = HashMap::new();
    for t in net.tensors() {
        let id = t.id.clone();
        instructions.push(match outputs.get(id.as_str()) {
            Some(&qubit) => Instruction::Output { id: id.clone(), qubit },
            None => Instruction::Load { id: id.clone(), source: id.clone() },
        });
        let mut name = id.clone();
        for label in &plan.sliced_labels {
            if t.position(label).is_some() {
                let out = format!("{name}.{label}");
                instructions.push(Instruction::View { out: out.clone(), input: name, label: label.clone() });
                name = out;
            }
        }
        current.insert(id, name);
    }
    for step in &plan.steps {
        let mut resolve = |id: &str| {
            current.remove(id).ok_or_else(|| mismatch(format!("step input `{id}` is not available")))
        };
        let a = resolve(&step.left)?;
        let b = resolve(&step.right)?;
        instructions.push(Instruction::Contract { out: step.out.clone(), a, b });
        current.insert(step.out.clone(), step.out.clone());
    }
    if current.len() != 1 {
        return Err(mismatch(format!("{} tensors left after the plan", current.len())));
    }
    let last = current.into_values().next().expect("one tensor left");
    instructions.push(Instruction::Save { id: last });

    let program = DslProgram {
        version: DSL_VERSION,
        num_qubits: net.closure_ids().len(),
        slice_labels: plan.sliced_labels.clone(),
        instructions,
    };
    program.validate()?;
    Ok(program)
}
