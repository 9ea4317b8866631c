//! Tree decompositions of line graphs via greedy elimination orderings.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::network::LineGraph;

/// Vertex-selection rule for the elimination ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Eliminate the vertex whose neighborhood needs the fewest fill edges.
    #[default]
    MinFill,
    /// Eliminate the vertex of smallest current degree.
    MinDegree,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::MinFill => "min_fill",
            Method::MinDegree => "min_degree",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_fill" | "min-fill" => Ok(Method::MinFill),
            "min_degree" | "min-degree" => Ok(Method::MinDegree),
            _ => Err(format!("unknown decomposition method `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecomposeOptions {
    pub method: Method,
    pub seed: u64,
    /// Extra runs with seeded random tie-breaking; the narrowest result wins.
    pub restarts: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { method: Method::MinFill, seed: 0, restarts: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<String>>,
    pub tree_edges: Vec<(usize, usize)>,
    pub width: usize,
}

impl TreeDecomposition {
    /// Builds a decomposition, computing the width from the bags.
    pub fn new(bags: Vec<Vec<String>>, tree_edges: Vec<(usize, usize)>) -> TreeDecomposition {
        let width = bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1);
        TreeDecomposition { bags, tree_edges, width }
    }
}

/// First violated decomposition property found by [`validate_decomposition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Defect {
    UnknownLabel(String),
    NotATree,
    UncoveredVertex(String),
    UncoveredEdge(String, String),
    Disconnected(String),
    WrongWidth { stated: usize, actual: usize },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::UnknownLabel(l) => write!(f, "bag label `{l}` is not a graph vertex"),
            Defect::NotATree => write!(f, "tree edges do not form a tree over the bags"),
            Defect::UncoveredVertex(v) => write!(f, "vertex `{v}` is in no bag"),
            Defect::UncoveredEdge(a, b) => write!(f, "edge `{a}`-`{b}` is in no bag"),
            Defect::Disconnected(v) => write!(f, "bags holding `{v}` are not connected"),
            Defect::WrongWidth { stated, actual } => write!(f, "stated width {stated}, bags give {actual}"),
        }
    }
}

/// Checks the three decomposition properties (vertex cover, edge cover,
/// running intersection) plus tree shape and width bookkeeping.
pub fn validate_decomposition(g: &LineGraph, td: &TreeDecomposition) -> Result<(), Defect> {
    let nb = td.bags.len();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    let mut bag_sets: Vec<FixedBitSet> = Vec::with_capacity(nb);
    for (b, bag) in td.bags.iter().enumerate() {
        let mut set = FixedBitSet::with_capacity(g.vertex_count());
        for l in bag {
            let v = g.vertex_id(l).ok_or_else(|| Defect::UnknownLabel(l.clone()))?;
            set.insert(v);
            holders[v].push(b);
        }
        bag_sets.push(set);
    }

    let mut tree: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for &(a, b) in &td.tree_edges {
        if a >= nb || b >= nb || a == b {
            return Err(Defect::NotATree);
        }
        tree[a].push(b);
        tree[b].push(a);
    }
    if nb > 0 && (td.tree_edges.len() != nb - 1 || reach(&tree, 0, |_| true) != nb) {
        return Err(Defect::NotATree);
    }

    for (v, hs) in holders.iter().enumerate() {
        if hs.is_empty() {
            return Err(Defect::UncoveredVertex(g.vertices()[v].clone()));
        }
    }
    for (a, b) in g.edges() {
        let covered = holders[a].iter().any(|&bag| bag_sets[bag].contains(b));
        if !covered {
            return Err(Defect::UncoveredEdge(g.vertices()[a].clone(), g.vertices()[b].clone()));
        }
    }
    for (v, hs) in holders.iter().enumerate() {
        if reach(&tree, hs[0], |bag| bag_sets[bag].contains(v)) != hs.len() {
            return Err(Defect::Disconnected(g.vertices()[v].clone()));
        }
    }
    let actual = TreeDecomposition::new(td.bags.clone(), Vec::new()).width;
    if actual != td.width {
        return Err(Defect::WrongWidth { stated: td.width, actual });
    }
    Ok(())
}

/// Number of tree nodes reachable from `start` through nodes accepted by `keep`.
fn reach(tree: &[Vec<usize>], start: usize, keep: impl Fn(usize) -> bool) -> usize {
    let mut seen = vec![false; tree.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 0;
    while let Some(x) = queue.pop_front() {
        count += 1;
        for &y in &tree[x] {
            if !seen[y] && keep(y) {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    count
}

/// Greedy elimination ordering turned into a tree decomposition. Restart 0
/// breaks ties by vertex order; further restarts break them with a
/// generator seeded from `opts.seed`. Disconnected components end up as
/// subtrees whose roots are chained together.
pub fn tree_decompose(g: &LineGraph, opts: &DecomposeOptions) -> TreeDecomposition {
    let n = g.vertex_count();
    if n == 0 {
        return TreeDecomposition::new(vec![Vec::new()], Vec::new());
    }
    let mut best: Option<(usize, Vec<usize>, Vec<FixedBitSet>)> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for restart in 0..=opts.restarts {
        let tiebreak: Vec<u64> = if restart == 0 {
            (0..n as u64).collect()
        } else {
            (0..n).map(|_| rng.random()).collect()
        };
        let (order, later) = eliminate(g, opts.method, &tiebreak);
        let width = later.iter().map(|s| s.count_ones(..)).max().unwrap_or(0);
        if best.as_ref().is_none_or(|(w, _, _)| width < *w) {
            best = Some((width, order, later));
        }
    }
    let (_, order, later) = best.expect("at least one run");
    build_from_order(g, &order, &later)
}

/// Runs the elimination; returns the order and, per vertex, its neighbors
/// at elimination time (all of which are eliminated later).
fn eliminate(g: &LineGraph, method: Method, tiebreak: &[u64]) -> (Vec<usize>, Vec<FixedBitSet>) {
    let n = g.vertex_count();
    let mut adj: Vec<FixedBitSet> = (0..n)
        .map(|v| {
            let mut s = FixedBitSet::with_capacity(n);
            for &u in g.neighbors(v) {
                s.insert(u);
            }
            s
        })
        .collect();
    let score = |adj: &[FixedBitSet], v: usize| -> (usize, usize) {
        let degree = adj[v].count_ones(..);
        match method {
            Method::MinDegree => (degree, 0),
            Method::MinFill => {
                // each missing pair counted from both ends; subtract u itself
                let missing: usize = adj[v].ones().map(|u| adj[v].difference_count(&adj[u]) - 1).sum();
                (missing / 2, degree)
            }
        }
    };
    let mut keys: Vec<(usize, usize)> = (0..n).map(|v| score(&adj, v)).collect();
    let mut queue: BTreeSet<(usize, usize, u64, usize)> =
        (0..n).map(|v| (keys[v].0, keys[v].1, tiebreak[v], v)).collect();

    let mut order = Vec::with_capacity(n);
    let mut later = vec![FixedBitSet::with_capacity(n); n];
    let mut touched = FixedBitSet::with_capacity(n);
    while let Some((_, _, _, v)) = queue.pop_first() {
        order.push(v);
        let nbrs: Vec<usize> = adj[v].ones().collect();
        later[v] = adj[v].clone();
        for &u in &nbrs {
            adj[u].remove(v);
            adj[u].union_with(&later[v]);
            adj[u].remove(u);
        }
        adj[v].clear();

        touched.clear();
        for &u in &nbrs {
            touched.insert(u);
            if method == Method::MinFill {
                touched.union_with(&adj[u]);
            }
        }
        for u in touched.ones() {
            queue.remove(&(keys[u].0, keys[u].1, tiebreak[u], u));
            keys[u] = score(&adj, u);
            queue.insert((keys[u].0, keys[u].1, tiebreak[u], u));
        }
    }
    (order, later)
}

fn build_from_order(g: &LineGraph, order: &[usize], later: &[FixedBitSet]) -> TreeDecomposition {
    let n = order.len();
    let mut position = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    // bag i belongs to order[i]
    let bags: Vec<Vec<String>> = order
        .iter()
        .map(|&v| {
            let mut members: Vec<usize> = std::iter::once(v).chain(later[v].ones()).collect();
            members.sort_unstable();
            members.into_iter().map(|u| g.vertices()[u].clone()).collect()
        })
        .collect();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut roots = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        match later[v].ones().map(|u| position[u]).min() {
            Some(parent) => edges.push((i, parent)),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDecomposition::new(bags, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> LineGraph {
        LineGraph::from_edges(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")])
    }

    fn bags(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter().map(|b| b.iter().map(|s| s.to_string()).collect()).collect()
    }

    /// Smallest width over every elimination order, by brute force.
    fn exact_width(g: &LineGraph) -> usize {
        fn perms(items: Vec<usize>) -> Vec<Vec<usize>> {
            if items.len() <= 1 {
                return vec![items];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.clone();
                let x = rest.remove(i);
                for mut p in perms(rest) {
                    p.insert(0, x);
                    out.push(p);
                }
            }
            out
        }
        let n = g.vertex_count();
        perms((0..n).collect())
            .into_iter()
            .map(|order| {
                let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
                let mut width = 0;
                for &v in &order {
                    let nb: Vec<usize> = adj[v].iter().copied().collect();
                    width = width.max(nb.len());
                    for &a in &nb {
                        adj[a].remove(&v);
                        for &b in &nb {
                            if a != b {
                                adj[a].insert(b);
                            }
                        }
                    }
                    adj[v].clear();
                }
                width
            })
            .min()
            .unwrap()
    }

    #[test]
    fn triangle_is_one_bag_of_three() {
        let g = triangle();
        for method in [Method::MinFill, Method::MinDegree] {
            let td = tree_decompose(&g, &DecomposeOptions { method, seed: 1, restarts: 2 });
            assert_eq!(td.width, 2);
            assert!(td.bags.iter().any(|b| b.len() == 3));
            validate_decomposition(&g, &td).unwrap();
        }
    }

    #[test]
    fn four_cycle_has_width_two() {
        let g = LineGraph::from_edges(&["g", "h", "i", "j"], &[("g", "h"), ("h", "i"), ("i", "j"), ("g", "j")]);
        assert_eq!(exact_width(&g), 2);
        let td = tree_decompose(&g, &DecomposeOptions::default());
        assert_eq!(td.width, 2);
        validate_decomposition(&g, &td).unwrap();
    }

    #[test]
    fn validation_examples() {
        let g = triangle();
        let all = TreeDecomposition::new(bags(&[&["a", "b", "c"]]), vec![]);
        assert_eq!(validate_decomposition(&g, &all), Ok(()));

        let missing = TreeDecomposition::new(bags(&[&["a", "b"], &["b", "c"]]), vec![(0, 1)]);
        assert_eq!(
            validate_decomposition(&g, &missing),
            Err(Defect::UncoveredEdge("a".into(), "c".into()))
        );

        // path a-b-c-d; `a` sits in bags 0 and 2 but not in bag 1 between them
        let path = LineGraph::from_edges(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")]);
        let broken =
            TreeDecomposition::new(bags(&[&["a", "b"], &["b", "c"], &["c", "d", "a"]]), vec![(0, 1), (1, 2)]);
        assert_eq!(validate_decomposition(&path, &broken), Err(Defect::Disconnected("a".into())));

        let cyclic = TreeDecomposition::new(bags(&[&["a", "b", "c"], &["a"]]), vec![(0, 1), (1, 0)]);
        assert_eq!(validate_decomposition(&g, &cyclic), Err(Defect::NotATree));

        let uncovered = TreeDecomposition::new(bags(&[&["a", "b"]]), vec![]);
        assert_eq!(validate_decomposition(&g, &uncovered), Err(Defect::UncoveredVertex("c".into())));
    }

    #[test]
    fn disconnected_components_are_joined() {
        let g = LineGraph::from_edges(&["a", "b", "c", "d", "e"], &[("a", "b"), ("c", "d")]);
        let td = tree_decompose(&g, &DecomposeOptions::default());
        validate_decomposition(&g, &td).unwrap();
        assert_eq!(td.width, 1);
    }

    #[test]
    fn heuristics_match_exact_width_on_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let names = ["a", "b", "c", "d", "e", "f", "g"];
            let mut edges = Vec::new();
            for i in 0..7 {
                for j in i + 1..7 {
                    if rng.random_bool(0.35) {
                        edges.push((names[i], names[j]));
                    }
                }
            }
            let g = LineGraph::from_edges(&names, &edges);
            let exact = exact_width(&g);
            for method in [Method::MinFill, Method::MinDegree] {
                let td = tree_decompose(&g, &DecomposeOptions { method, seed: 3, restarts: 8 });
                validate_decomposition(&g, &td).unwrap();
                assert!(td.width >= exact);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let c = crate::circuit::generate_rqc(3, 3, 8, 2).unwrap();
        let net = crate::network::close_network(
            &crate::network::circuit_to_network(&c),
            &crate::circuit::Bitstring::zeros(9),
        )
        .unwrap();
        let g = crate::network::line_graph(&net).unwrap();
        let opts = DecomposeOptions { method: Method::MinFill, seed: 11, restarts: 3 };
        assert_eq!(tree_decompose(&g, &opts), tree_decompose(&g, &opts));
    }
}
