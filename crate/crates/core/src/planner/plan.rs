//! Contraction plans derived from tree decompositions, and their symbolic
//! replay.

use std::collections::{HashMap, HashSet};

use crate::network::{line_graph, LineGraph, TensorNetwork};

use super::decompose::{tree_decompose, validate_decomposition, DecomposeOptions, TreeDecomposition};
use super::PlanError;

/// One pairwise contraction. `out_labels` are the labels left after the
/// planned slices are removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub left: String,
    pub right: String,
    pub out: String,
    pub out_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPlan {
    pub steps: Vec<PlanStep>,
    pub sliced_labels: Vec<String>,
    /// Largest rank of a step output.
    pub max_intermediate_rank: usize,
    /// Largest element count of a step output.
    pub max_intermediate_size: u128,
    /// Multiply-adds summed over steps and over every slice assignment.
    pub flop_estimate: u128,
    /// Peak elements bound in one job's environment, replaying the program
    /// layout produced by `emit_program`.
    pub peak_live_elements: u128,
    /// Width of the decomposition the steps were derived from.
    pub width: usize,
    /// Labels eliminated in order, as derived from the decomposition.
    pub elimination_order: Vec<String>,
}

impl ContractionPlan {
    /// Id of the tensor holding the final result.
    pub fn result_id(&self) -> Option<&str> {
        self.steps.last().map(|s| s.out.as_str())
    }

    /// Number of slice assignments, i.e. the product of sliced dims.
    pub fn slice_count(&self, net: &TensorNetwork) -> u128 {
        self.sliced_labels.iter().map(|l| net.dim(l).unwrap_or(1) as u128).product()
    }
}

/// Leaf tensor shapes with sliced labels removed.
#[derive(Debug, Clone)]
pub(crate) struct Leaves {
    pub ids: Vec<String>,
    pub labels: Vec<Vec<String>>,
    /// Leaf labels before slicing, for the environment model.
    pub full_labels: Vec<Vec<String>>,
    pub dims: HashMap<String, usize>,
    pub sliced: Vec<String>,
}

impl Leaves {
    pub fn new(net: &TensorNetwork, sliced: &[String]) -> Leaves {
        let cut: HashSet<&String> = sliced.iter().collect();
        let mut dims = HashMap::new();
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut full_labels = Vec::new();
        for t in net.tensors() {
            for (l, &d) in t.labels().iter().zip(t.dims()) {
                dims.insert(l.clone(), d);
            }
            ids.push(t.id.clone());
            labels.push(t.labels().iter().filter(|l| !cut.contains(l)).cloned().collect());
            full_labels.push(t.labels().to_vec());
        }
        Leaves { ids, labels, full_labels, dims, sliced: sliced.to_vec() }
    }

    pub fn size(&self, labels: &[String]) -> u128 {
        labels.iter().fold(1u128, |acc, l| acc.saturating_mul(self.dims[l] as u128))
    }

    pub fn graph(&self) -> LineGraph {
        LineGraph::from_cliques(self.labels.iter())
    }
}

/// Builds the step list by eliminating labels in decomposition order: each
/// label's two current holders are contracted (over everything they share).
/// Whatever remains afterwards is rank 0 and is multiplied in leaf order.
pub(crate) fn plan_leaves(leaves: &Leaves, td: &TreeDecomposition) -> ContractionPlan {
    let order = elimination_order(td);
    let mut holders: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut live: Vec<Option<Vec<String>>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (i, labels) in leaves.labels.iter().enumerate() {
        for l in labels {
            holders.entry(l.as_str()).or_default().push(i);
        }
        live.push(Some(labels.clone()));
        names.push(leaves.ids[i].clone());
    }

    let mut steps = Vec::new();
    let mut contract = |a: usize, b: usize, live: &mut Vec<Option<Vec<String>>>, names: &mut Vec<String>| {
        let la = live[a].take().expect("live tensor");
        let lb = live[b].take().expect("live tensor");
        let out: Vec<String> = la
            .iter()
            .filter(|l| !lb.contains(l))
            .chain(lb.iter().filter(|l| !la.contains(l)))
            .cloned()
            .collect();
        let id = format!("%{}", steps.len());
        steps.push(PlanStep { left: names[a].clone(), right: names[b].clone(), out: id.clone(), out_labels: out.clone() });
        live.push(Some(out));
        names.push(id);
        live.len() - 1
    };

    for label in &order {
        let Some(hs) = holders.get(label.as_str()) else { continue };
        let current: Vec<usize> = hs.iter().copied().filter(|&i| live[i].is_some()).collect();
        if current.len() != 2 {
            continue;
        }
        let (a, b) = (current[0].min(current[1]), current[0].max(current[1]));
        let shared: Vec<String> = live[a].as_ref().unwrap().clone();
        let out = contract(a, b, &mut live, &mut names);
        for l in live[out].as_ref().unwrap().clone() {
            let e = holders.get_mut(l.as_str()).unwrap();
            e.retain(|&i| i != a && i != b);
            e.push(out);
        }
        for l in shared {
            if let Some(e) = holders.get_mut(l.as_str()) {
                e.retain(|&i| i != a && i != b);
            }
        }
    }
    // labels absent from the decomposition (should not happen for valid
    // input) still get contracted here
    loop {
        let rest: Vec<usize> = (0..live.len()).filter(|&i| live[i].is_some()).collect();
        if rest.len() < 2 {
            break;
        }
        let a = rest[0];
        let partner = rest[1..]
            .iter()
            .copied()
            .find(|&b| live[b].as_ref().unwrap().iter().any(|l| live[a].as_ref().unwrap().contains(l)))
            .unwrap_or(rest[1]);
        contract(a, partner, &mut live, &mut names);
    }

    let mut plan = ContractionPlan {
        steps,
        sliced_labels: leaves.sliced.clone(),
        max_intermediate_rank: 0,
        max_intermediate_size: 0,
        flop_estimate: 0,
        peak_live_elements: 0,
        width: td.width,
        elimination_order: order,
    };
    refresh_stats(&mut plan, leaves);
    plan
}

/// Post-order over the decomposition rooted at its last bag; each label is
/// eliminated at the bag closest to the root that contains it.
pub(crate) fn elimination_order(td: &TreeDecomposition) -> Vec<String> {
    let nb = td.bags.len();
    if nb == 0 {
        return Vec::new();
    }
    let mut tree: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for &(a, b) in &td.tree_edges {
        tree[a].push(b);
        tree[b].push(a);
    }
    for t in &mut tree {
        t.sort_unstable();
    }
    let root = nb - 1;
    let mut depth = vec![usize::MAX; nb];
    let mut post = Vec::with_capacity(nb);
    // iterative DFS producing a post-order
    let mut stack = vec![(root, 0usize)];
    depth[root] = 0;
    while let Some((node, next)) = stack.pop() {
        if next < tree[node].len() {
            stack.push((node, next + 1));
            let child = tree[node][next];
            if depth[child] == usize::MAX {
                depth[child] = depth[node] + 1;
                stack.push((child, 0));
            }
        } else {
            post.push(node);
        }
    }
    let mut top: HashMap<&str, usize> = HashMap::new();
    for (b, bag) in td.bags.iter().enumerate() {
        for l in bag {
            let e = top.entry(l.as_str()).or_insert(b);
            if depth[b] < depth[*e] {
                *e = b;
            }
        }
    }
    let mut order = Vec::with_capacity(top.len());
    for b in post {
        for l in &td.bags[b] {
            if top[l.as_str()] == b {
                order.push(l.clone());
            }
        }
    }
    order
}

/// Recomputes the size statistics of `plan` from its steps.
pub(crate) fn refresh_stats(plan: &mut ContractionPlan, leaves: &Leaves) {
    let mut shapes: HashMap<&str, &[String]> = HashMap::new();
    for (id, labels) in leaves.ids.iter().zip(&leaves.labels) {
        shapes.insert(id, labels);
    }
    let mut max_rank = 0;
    let mut max_size = 0u128;
    let mut flops = 0u128;
    for step in &plan.steps {
        let l = shapes[step.left.as_str()];
        let r = shapes[step.right.as_str()];
        let union = l.iter().chain(r.iter().filter(|x| !l.contains(x)));
        let cost = union.fold(1u128, |acc, x| acc.saturating_mul(leaves.dims[x] as u128));
        flops = flops.saturating_add(cost);
        max_rank = max_rank.max(step.out_labels.len());
        max_size = max_size.max(leaves.size(&step.out_labels));
        shapes.insert(&step.out, &step.out_labels);
    }
    let slices = leaves.sliced.iter().fold(1u128, |acc, l| acc.saturating_mul(leaves.dims[l] as u128));
    plan.max_intermediate_rank = max_rank;
    plan.max_intermediate_size = max_size;
    plan.flop_estimate = flops.saturating_mul(slices);
    plan.peak_live_elements = environment_peak(plan, leaves);
}

/// Peak of the summed element counts of bound tensors when a job runs the
/// emitted program: each leaf is bound at full size and then narrowed one
/// sliced label at a time; each contraction holds its inputs and output at
/// once before the inputs are released.
fn environment_peak(plan: &ContractionPlan, leaves: &Leaves) -> u128 {
    let mut live = 0u128;
    let mut peak = 0u128;
    let mut sizes: HashMap<&str, u128> = HashMap::new();
    for (i, full) in leaves.full_labels.iter().enumerate() {
        let mut current: Vec<String> = full.clone();
        let mut size = leaves.size(&current);
        live += size;
        peak = peak.max(live);
        for cut in &leaves.sliced {
            if let Some(pos) = current.iter().position(|l| l == cut) {
                current.remove(pos);
                let narrowed = leaves.size(&current);
                live += narrowed;
                peak = peak.max(live);
                live -= size;
                size = narrowed;
            }
        }
        sizes.insert(&leaves.ids[i], size);
    }
    for step in &plan.steps {
        let out = leaves.size(&step.out_labels);
        live += out;
        peak = peak.max(live);
        live -= sizes[step.left.as_str()] + sizes[step.right.as_str()];
        sizes.insert(&step.out, out);
    }
    peak
}

/// Derives a plan from `td`, which must be valid for the network's line
/// graph.
pub fn plan_from_decomposition(net: &TensorNetwork, td: &TreeDecomposition) -> Result<ContractionPlan, PlanError> {
    let g = line_graph(net)?;
    validate_decomposition(&g, td).map_err(PlanError::InvalidDecomposition)?;
    Ok(plan_leaves(&Leaves::new(net, &[]), td))
}

/// Decomposes the network's line graph and derives a plan from it.
pub fn plan_network(net: &TensorNetwork, opts: &DecomposeOptions) -> Result<ContractionPlan, PlanError> {
    let g = line_graph(net)?;
    let td = tree_decompose(&g, opts);
    Ok(plan_leaves(&Leaves::new(net, &[]), &td))
}
