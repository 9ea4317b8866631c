//! Contraction planning: tree decompositions of the line graph, plans
//! derived from them, and slice selection.

mod decompose;
mod plan;
mod slicing;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::network::NetworkError;

pub use decompose::{tree_decompose, validate_decomposition, DecomposeOptions, Defect, Method, TreeDecomposition};
pub use plan::{plan_from_decomposition, plan_network, ContractionPlan, PlanStep};
pub use slicing::{select_slices, SliceOptions, SliceOutcome, SliceRound, SliceTarget};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("need at least two tensors, got {0}")]
    TooFewTensors(u64),
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(Defect),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Number of distinct pairwise contraction sequences for `n` tensors,
/// `n! (n-1)! / 2^(n-1)`.
pub fn count_contraction_orders(n: u64) -> Result<BigUint, PlanError> {
    if n < 2 {
        return Err(PlanError::TooFewTensors(n));
    }
    let mut value = BigUint::one();
    for k in 2..=n {
        value *= BigUint::from(k);
    }
    for k in 2..n {
        value *= BigUint::from(k);
    }
    Ok(value >> (n - 1) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts sequences by choosing an unordered pair at every step.
    fn enumerate(k: u64) -> u64 {
        if k <= 1 {
            return 1;
        }
        let mut total = 0;
        for a in 0..k {
            for _b in a + 1..k {
                total += enumerate(k - 1);
            }
        }
        total
    }

    #[test]
    fn small_counts() {
        let got: Vec<u64> = (2..=5).map(|n| count_contraction_orders(n).unwrap().try_into().unwrap()).collect();
        assert_eq!(got, [1, 3, 18, 180]);
        for n in 2..=5 {
            assert_eq!(count_contraction_orders(n).unwrap(), BigUint::from(enumerate(n)));
        }
        assert_eq!(count_contraction_orders(1), Err(PlanError::TooFewTensors(1)));
    }

    #[test]
    fn large_counts_are_exact() {
        // 30! * 29! / 2^29 has 55 digits
        assert_eq!(count_contraction_orders(30).unwrap().to_string().len(), 55);
    }
}
