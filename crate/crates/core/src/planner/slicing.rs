//! Greedy tree trimming: choose labels to slice so that the largest
//! intermediate tensor of a plan shrinks.

use std::collections::HashSet;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::network::TensorNetwork;

use super::decompose::{tree_decompose, DecomposeOptions};
use super::plan::{plan_leaves, refresh_stats, ContractionPlan, Leaves};
use super::PlanError;

/// When to stop slicing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceTarget {
    /// Largest intermediate rank at most this.
    MaxRank(usize),
    /// Largest intermediate element count at most this.
    MaxElements(u128),
    /// Exactly this many sliced labels.
    Count(usize),
}

impl SliceTarget {
    pub fn is_met(&self, plan: &ContractionPlan) -> bool {
        match *self {
            SliceTarget::MaxRank(r) => plan.max_intermediate_rank <= r,
            SliceTarget::MaxElements(m) => plan.max_intermediate_size <= m,
            SliceTarget::Count(k) => plan.sliced_labels.len() >= k,
        }
    }
}

impl fmt::Display for SliceTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SliceTarget::MaxRank(r) => write!(f, "max rank {r}"),
            SliceTarget::MaxElements(m) => write!(f, "max elements {m}"),
            SliceTarget::Count(k) => write!(f, "{k} slices"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceOptions {
    /// Seeds the random choice among labels that tie on every criterion.
    pub seed: u64,
    /// Re-decompose the reduced line graph after each pick and keep the
    /// fresh plan when it is smaller.
    pub replan: bool,
    pub decompose: DecomposeOptions,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions { seed: 0, replan: true, decompose: DecomposeOptions::default() }
    }
}

/// Record of one trimming round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceRound {
    pub label: String,
    pub max_size_before: u128,
    pub max_size_after: u128,
    /// The label was in every largest intermediate, so the maximum had to drop.
    pub strict: bool,
    pub replanned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceOutcome {
    pub plan: ContractionPlan,
    pub rounds: Vec<SliceRound>,
    pub target_met: bool,
    /// Why slicing stopped short of the target, if it did.
    pub shortfall: Option<String>,
    pub replan: bool,
}

/// Per-step output sizes of a plan under its current slicing.
fn step_sizes(plan: &ContractionPlan, leaves: &Leaves) -> Vec<u128> {
    plan.steps.iter().map(|s| leaves.size(&s.out_labels)).collect()
}

/// Picks slice labels one round at a time until `target` holds.
///
/// Each round considers the labels of the largest intermediates. Labels
/// carried by every largest intermediate are preferred, since only those
/// lower the maximum under the current contraction order; when there are
/// none, any label of a largest intermediate is allowed. Among the
/// candidates the pick maximizes the number of intermediates it shrinks,
/// then the total intermediate memory it saves, and remaining ties are
/// broken by a generator seeded from `opts.seed`.
pub fn select_slices(
    net: &TensorNetwork,
    plan: &ContractionPlan,
    target: SliceTarget,
    opts: &SliceOptions,
) -> Result<SliceOutcome, PlanError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut plan = plan.clone();
    let mut leaves = Leaves::new(net, &plan.sliced_labels);
    refresh_stats(&mut plan, &leaves);
    let mut rounds = Vec::new();
    let mut shortfall = None;
    let mut stalled = 0usize;

    while !target.is_met(&plan) {
        let sizes = step_sizes(&plan, &leaves);
        let max = plan.max_intermediate_size;
        let largest: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] == max).collect();
        let sliced: HashSet<&String> = plan.sliced_labels.iter().collect();

        let mut pool: Vec<&String> = Vec::new();
        for &i in &largest {
            for l in &plan.steps[i].out_labels {
                if !sliced.contains(l) && !pool.contains(&l) {
                    pool.push(l);
                }
            }
        }
        if pool.is_empty() {
            shortfall = Some("largest intermediates have no labels left to slice".to_string());
            break;
        }
        let in_all: Vec<&String> = pool
            .iter()
            .copied()
            .filter(|l| largest.iter().all(|&i| plan.steps[i].out_labels.contains(l)))
            .collect();
        let strict = !in_all.is_empty();
        if !strict {
            if !matches!(target, SliceTarget::Count(_)) && stalled >= largest.len() {
                shortfall = Some(format!(
                    "{} rounds without reducing the largest intermediate ({max} elements)",
                    stalled
                ));
                break;
            }
            stalled += 1;
        } else {
            stalled = 0;
        }
        let candidates = if strict { in_all } else { pool };

        // tiers two and three: intermediates touched, then memory saved
        let scored: Vec<(usize, u128, &String)> = candidates
            .into_iter()
            .map(|l| {
                let dim = leaves.dims[l] as u128;
                let mut hits = 0usize;
                let mut saved = 0u128;
                for (s, &size) in plan.steps.iter().zip(&sizes) {
                    if s.out_labels.contains(l) {
                        hits += 1;
                        saved += size - size / dim;
                    }
                }
                (hits, saved, l)
            })
            .collect();
        let best = scored.iter().map(|&(h, s, _)| (h, s)).max().expect("non-empty candidates");
        let tied: Vec<&String> = scored.iter().filter(|&&(h, s, _)| (h, s) == best).map(|&(_, _, l)| l).collect();
        let label = (*tied.choose(&mut rng).expect("non-empty tie set")).clone();

        let mut sliced_labels = plan.sliced_labels.clone();
        sliced_labels.push(label.clone());
        let next_leaves = Leaves::new(net, &sliced_labels);

        let mut trimmed = plan.clone();
        trimmed.sliced_labels = sliced_labels;
        for s in &mut trimmed.steps {
            s.out_labels.retain(|l| l != &label);
        }
        refresh_stats(&mut trimmed, &next_leaves);

        let mut replanned = false;
        if opts.replan {
            let td = tree_decompose(&next_leaves.graph(), &opts.decompose);
            let fresh = plan_leaves(&next_leaves, &td);
            let key = |p: &ContractionPlan| (p.max_intermediate_size, p.flop_estimate);
            if key(&fresh) < key(&trimmed) {
                trimmed = fresh;
                replanned = true;
            }
        }
        rounds.push(SliceRound {
            label,
            max_size_before: max,
            max_size_after: trimmed.max_intermediate_size,
            strict,
            replanned,
        });
        plan = trimmed;
        leaves = next_leaves;
    }

    let target_met = target.is_met(&plan);
    if !target_met && shortfall.is_none() {
        shortfall = Some(format!("target {target} not reached"));
    }
    Ok(SliceOutcome { plan, rounds, target_met, shortfall, replan: opts.replan })
}
