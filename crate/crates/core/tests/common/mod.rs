#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnsim::{Bitstring, Circuit};

pub const ONE_QUBIT: [&str; 8] = ["h", "x", "y", "z", "s", "t", "x_1_2", "y_1_2"];
pub const TWO_QUBIT: [&str; 2] = ["cz", "cx"];

/// A circuit of `depth` library gates on `n` qubits, two-qubit gates with
/// probability one half when `n > 1`.
pub fn random_circuit(n: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n).unwrap();
    for _ in 0..depth {
        if n > 1 && rng.random_bool(0.5) {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            c = c.with(TWO_QUBIT.choose(&mut rng).unwrap(), &[a, b]).unwrap();
        } else {
            let q = rng.random_range(0..n);
            c = c.with(ONE_QUBIT.choose(&mut rng).unwrap(), &[q]).unwrap();
        }
    }
    c
}

pub fn random_bitstrings(n: usize, count: usize, seed: u64) -> Vec<Bitstring> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Bitstring::new((0..n).map(|_| rng.random_bool(0.5)).collect())).collect()
}
