//! Tensor networks built from circuits, their closure against an output
//! bitstring, the line graph used for planning, and the QXT tensor file
//! format.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use indexmap::IndexMap;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{parse_complex, Bitstring, Circuit};
use crate::tensor::{Tensor, TensorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("duplicate tensor id `{0}`")]
    DuplicateId(String),
    #[error("label `{0}` would be carried by more than two tensors")]
    LabelDegree(String),
    #[error("label `{label}` has inconsistent dimensions {left} and {right}")]
    DimMismatch { label: String, left: usize, right: usize },
    #[error("bitstring has length {got}, network has {expected} qubits")]
    LengthMismatch { expected: usize, got: usize },
    #[error("network is already closed")]
    AlreadyClosed,
    #[error("network has open indices: {0:?}")]
    OpenIndices(Vec<String>),
    #[error("qxt line {line}: {msg}")]
    Qxt { line: usize, msg: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Label of the wire segment of `qubit` after `step` gates have acted on it.
pub fn wire_label(qubit: usize, step: usize) -> String {
    format!("q{qubit}_{step}")
}

/// A set of tensors in which every label is carried by one tensor (open) or
/// two tensors (contracted).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorNetwork {
    tensors: IndexMap<String, Tensor>,
    degree: IndexMap<String, usize>,
    dims: HashMap<String, usize>,
    /// Current open wire label of each qubit, for circuit-derived networks.
    qubit_wires: Vec<String>,
    /// Ids of the tensors added by [`close_network`], indexed by qubit.
    closure: Vec<String>,
}

impl TensorNetwork {
    pub fn new() -> TensorNetwork {
        TensorNetwork::default()
    }

    pub fn add_tensor(&mut self, t: Tensor) -> Result<(), NetworkError> {
        if self.tensors.contains_key(&t.id) {
            return Err(NetworkError::DuplicateId(t.id.clone()));
        }
        for (l, &d) in t.labels().iter().zip(t.dims()) {
            if self.degree.get(l).copied().unwrap_or(0) >= 2 {
                return Err(NetworkError::LabelDegree(l.clone()));
            }
            if let Some(&prev) = self.dims.get(l) {
                if prev != d {
                    return Err(NetworkError::DimMismatch { label: l.clone(), left: prev, right: d });
                }
            }
        }
        for (l, &d) in t.labels().iter().zip(t.dims()) {
            *self.degree.entry(l.clone()).or_insert(0) += 1;
            self.dims.insert(l.clone(), d);
        }
        self.tensors.insert(t.id.clone(), t);
        Ok(())
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Tensor> {
        self.tensors.values()
    }

    pub fn tensor(&self, id: &str) -> Option<&Tensor> {
        self.tensors.get(id)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Number of tensors carrying each label, in first-seen order.
    pub fn index_degree(&self) -> &IndexMap<String, usize> {
        &self.degree
    }

    pub fn dim(&self, label: &str) -> Option<usize> {
        self.dims.get(label).copied()
    }

    pub fn open_indices(&self) -> Vec<String> {
        self.degree.iter().filter(|(_, &d)| d == 1).map(|(l, _)| l.clone()).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.degree.values().all(|&d| d == 2)
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_wires.len()
    }

    pub fn qubit_wires(&self) -> &[String] {
        &self.qubit_wires
    }

    /// Ids of the output tensors attached by [`close_network`], by qubit.
    pub fn closure_ids(&self) -> &[String] {
        &self.closure
    }

    /// Contracts everything in insertion order. Only meant for small
    /// networks and tests; real contractions go through a plan.
    pub fn contract_naive(&self) -> Result<Tensor, NetworkError> {
        let mut iter = self.tensors.values();
        let mut acc = match iter.next() {
            Some(t) => t.clone(),
            None => return Ok(Tensor::scalar("empty", Complex64::new(1.0, 0.0))),
        };
        for t in iter {
            acc = crate::tensor::contract_pair(&acc, t)?;
        }
        Ok(acc)
    }
}

fn basis(bit: bool) -> Vec<Complex64> {
    let (z, o) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    if bit {
        vec![z, o]
    } else {
        vec![o, z]
    }
}

/// Builds the open network for `C|0...0>`: one `(1, 0)` input per qubit and
/// one tensor per gate. A gate tensor carries its output wires first, then
/// its input wires, so its data is the gate matrix unchanged.
pub fn circuit_to_network(circuit: &Circuit) -> TensorNetwork {
    let n = circuit.num_qubits;
    let mut net = TensorNetwork::new();
    let mut step = vec![0usize; n];
    for q in 0..n {
        let t = Tensor::new(format!("in{q}"), vec![wire_label(q, 0)], vec![2], basis(false))
            .expect("input tensor shape");
        net.add_tensor(t).expect("fresh input label");
    }
    for (g, gate) in circuit.gates.iter().enumerate() {
        let inputs: Vec<String> = gate.targets.iter().map(|&q| wire_label(q, step[q])).collect();
        for &q in &gate.targets {
            step[q] += 1;
        }
        let outputs: Vec<String> = gate.targets.iter().map(|&q| wire_label(q, step[q])).collect();
        let labels: Vec<String> = outputs.into_iter().chain(inputs).collect();
        let t = Tensor::new(format!("g{g}"), labels, vec![2; 2 * gate.arity()], gate.matrix.clone())
            .expect("gate tensor shape");
        net.add_tensor(t).expect("circuit wiring is a chain per qubit");
    }
    net.qubit_wires = (0..n).map(|q| wire_label(q, step[q])).collect();
    net
}

/// Attaches `<x_q|` to every open qubit wire, producing a closed network
/// whose full contraction is the amplitude `<x|C|0...0>`.
pub fn close_network(net: &TensorNetwork, x: &Bitstring) -> Result<TensorNetwork, NetworkError> {
    if net.qubit_wires.is_empty() || !net.closure.is_empty() {
        return Err(NetworkError::AlreadyClosed);
    }
    if x.len() != net.num_qubits() {
        return Err(NetworkError::LengthMismatch { expected: net.num_qubits(), got: x.len() });
    }
    let mut closed = net.clone();
    for (q, wire) in net.qubit_wires.iter().enumerate() {
        let t = Tensor::new(format!("out{q}"), vec![wire.clone()], vec![2], basis(x.bit(q)))?;
        closed.add_tensor(t)?;
        closed.closure.push(format!("out{q}"));
    }
    Ok(closed)
}

/// Graph over index labels with an edge between every two labels that share
/// a tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl LineGraph {
    /// Builds a graph from label cliques; used by the planner for networks
    /// with some labels removed.
    pub fn from_cliques<'a, I, C>(cliques: I) -> LineGraph
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = &'a String>,
    {
        let mut g = LineGraph { vertices: Vec::new(), index: HashMap::new(), adjacency: Vec::new() };
        for clique in cliques {
            let ids: Vec<usize> = clique.into_iter().map(|l| g.vertex_or_insert(l)).collect();
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    g.adjacency[a].insert(b);
                    g.adjacency[b].insert(a);
                }
            }
        }
        g
    }

    /// Plain graph from labeled edges, mostly for tests.
    pub fn from_edges(vertices: &[&str], edges: &[(&str, &str)]) -> LineGraph {
        let mut g = LineGraph { vertices: Vec::new(), index: HashMap::new(), adjacency: Vec::new() };
        for v in vertices {
            g.vertex_or_insert(v);
        }
        for (a, b) in edges {
            let (a, b) = (g.vertex_or_insert(a), g.vertex_or_insert(b));
            if a != b {
                g.adjacency[a].insert(b);
                g.adjacency[b].insert(a);
            }
        }
        g
    }

    fn vertex_or_insert(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(label.to_string());
        self.index.insert(label.to_string(), i);
        self.adjacency.push(BTreeSet::new());
        i
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_id(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    /// Each undirected edge once, as `(smaller, larger)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }
}

/// Line graph of a closed network.
pub fn line_graph(net: &TensorNetwork) -> Result<LineGraph, NetworkError> {
    let open = net.open_indices();
    if !open.is_empty() {
        return Err(NetworkError::OpenIndices(open));
    }
    let mut g = LineGraph::from_cliques(net.tensors().map(|t| t.labels().iter()));
    // keep vertex order equal to first appearance across the network
    for l in net.index_degree().keys() {
        g.vertex_or_insert(l);
    }
    Ok(g)
}

/// Named tensors as stored in a QXT file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorStore {
    tensors: IndexMap<String, Tensor>,
}

impl TensorStore {
    pub fn new() -> TensorStore {
        TensorStore::default()
    }

    pub fn from_network(net: &TensorNetwork) -> TensorStore {
        TensorStore { tensors: net.tensors.clone() }
    }

    pub fn insert(&mut self, t: Tensor) {
        self.tensors.insert(t.id.clone(), t);
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tensor> {
        self.tensors.values()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Renders the store as QXT v1.
    pub fn to_qxt(&self) -> String {
        let mut out = String::from("# QXT v1\n");
        for t in self.tensors.values() {
            let _ = writeln!(out, "tensor {}", t.id);
            let _ = writeln!(out, "{}", join_line("labels", t.labels().iter()));
            let _ = writeln!(out, "{}", join_line("dims", t.dims().iter()));
            for z in t.data() {
                let _ = writeln!(out, "{:?} {:?}", z.re, z.im);
            }
        }
        out
    }

    pub fn from_qxt(text: &str) -> Result<TensorStore, NetworkError> {
        let err = |line: usize, msg: &str| NetworkError::Qxt { line, msg: msg.to_string() };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut store = TensorStore::new();
        while let Some((line, head)) = lines.next() {
            let id = match head.split_once(' ') {
                Some(("tensor", id)) if !id.trim().is_empty() && !id.trim().contains(' ') => id.trim(),
                _ => return Err(err(line, "expected `tensor <id>`")),
            };
            let labels: Vec<String> = match lines.next() {
                Some((_, l)) if l.split_whitespace().next() == Some("labels") => {
                    l.split_whitespace().skip(1).map(str::to_string).collect()
                }
                _ => return Err(err(line + 1, "expected `labels ...`")),
            };
            let (dline, dims) = match lines.next() {
                Some((n, l)) if l.split_whitespace().next() == Some("dims") => (n, l),
                _ => return Err(err(line + 2, "expected `dims ...`")),
            };
            let dims = dims
                .split_whitespace()
                .skip(1)
                .map(|d| d.parse::<usize>().map_err(|_| err(dline, "bad dimension")))
                .collect::<Result<Vec<_>, _>>()?;
            let count: usize = dims.iter().product();
            let mut data = Vec::with_capacity(count);
            for _ in 0..count {
                let (n, l) = lines.next().ok_or_else(|| err(dline, "tensor data ended early"))?;
                data.push(parse_complex(l).ok_or_else(|| err(n, "expected `<re> <im>`"))?);
            }
            if store.tensors.contains_key(id) {
                return Err(err(line, "duplicate tensor id"));
            }
            store.insert(Tensor::new(id, labels, dims, data)?);
        }
        Ok(store)
    }
}

fn join_line<T: std::fmt::Display>(head: &str, items: impl Iterator<Item = T>) -> String {
    let mut s = head.to_string();
    for it in items {
        let _ = write!(s, " {it}");
    }
    s
}
