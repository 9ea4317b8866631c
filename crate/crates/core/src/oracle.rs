//! Full statevector simulation, used as ground truth.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Bitstring, Circuit, Gate};

pub const DEFAULT_QUBIT_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} qubits exceeds the statevector cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("bitstring has length {got}, circuit has {expected} qubits")]
    LengthMismatch { expected: usize, got: usize },
}

/// Amplitudes indexed so that qubit 0 is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> StateVector {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amplitudes }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, x: &Bitstring) -> Complex64 {
        self.amplitudes[x.index()]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate) {
        let m = &gate.matrix;
        match gate.targets[..] {
            [q] => {
                let bit = 1usize << (self.n - 1 - q);
                for i in 0..self.amplitudes.len() {
                    if i & bit == 0 {
                        let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                        self.amplitudes[i] = m[0] * a0 + m[1] * a1;
                        self.amplitudes[i | bit] = m[2] * a0 + m[3] * a1;
                    }
                }
            }
            [qa, qb] => {
                let ba = 1usize << (self.n - 1 - qa);
                let bb = 1usize << (self.n - 1 - qb);
                for i in 0..self.amplitudes.len() {
                    if i & (ba | bb) == 0 {
                        // gate basis order: first target most significant
                        let idx = [i, i | bb, i | ba, i | ba | bb];
                        let v = idx.map(|k| self.amplitudes[k]);
                        for (r, &k) in idx.iter().enumerate() {
                            self.amplitudes[k] = (0..4).map(|c| m[r * 4 + c] * v[c]).sum();
                        }
                    }
                }
            }
            _ => unreachable!("gates act on one or two qubits"),
        }
    }
}

pub fn statevector_capped(circuit: &Circuit, cap: usize) -> Result<StateVector, OracleError> {
    if circuit.num_qubits > cap {
        return Err(OracleError::TooManyQubits { n: circuit.num_qubits, cap });
    }
    let mut state = StateVector::zero(circuit.num_qubits);
    for g in &circuit.gates {
        state.apply(g);
    }
    Ok(state)
}

/// `C|0...0>` for circuits up to [`DEFAULT_QUBIT_CAP`] qubits.
pub fn statevector(circuit: &Circuit) -> Result<StateVector, OracleError> {
    statevector_capped(circuit, DEFAULT_QUBIT_CAP)
}

pub fn oracle_amplitude(circuit: &Circuit, x: &Bitstring) -> Result<Complex64, OracleError> {
    if x.len() != circuit.num_qubits {
        return Err(OracleError::LengthMismatch { expected: circuit.num_qubits, got: x.len() });
    }
    Ok(statevector(circuit)?.amplitude(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate_ghz, generate_rqc, Gate};
    use crate::tensor::{contract_pair, Tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r2() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn close(a: Complex64, re: f64) -> bool {
        (a - Complex64::new(re, 0.0)).norm() < 1e-15
    }

    #[test]
    fn small_states() {
        let h = Circuit::new(1).unwrap().with("h", &[0]).unwrap();
        let s = statevector(&h).unwrap();
        assert!(close(s.amplitudes[0], r2()) && close(s.amplitudes[1], r2()));

        let bell = statevector(&generate_ghz(2).unwrap()).unwrap();
        let expected = [r2(), 0.0, 0.0, r2()];
        assert!(bell.amplitudes.iter().zip(expected).all(|(&a, e)| close(a, e)));

        let empty = statevector(&Circuit::new(3).unwrap()).unwrap();
        assert!(close(empty.amplitudes[0], 1.0));
        assert!(empty.amplitudes[1..].iter().all(|&a| close(a, 0.0)));
    }

    #[test]
    fn ghz_amplitudes() {
        let c = generate_ghz(3).unwrap();
        assert!(close(oracle_amplitude(&c, &"111".parse().unwrap()).unwrap(), r2()));
        assert!(close(oracle_amplitude(&c, &"101".parse().unwrap()).unwrap(), 0.0));
        assert!(matches!(
            oracle_amplitude(&c, &"11".parse().unwrap()),
            Err(OracleError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let c = Circuit::new(5).unwrap();
        assert_eq!(statevector_capped(&c, 4), Err(OracleError::TooManyQubits { n: 5, cap: 4 }));
    }

    #[test]
    fn norm_preserved_gate_by_gate() {
        let c = generate_rqc(3, 3, 12, 5).unwrap();
        let mut s = StateVector::zero(9);
        for g in &c.gates {
            s.apply(g);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    fn random_unitary(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        // Gram-Schmidt on random complex columns
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for _ in 0..4 {
            let mut v: Vec<Complex64> =
                (0..4).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            for u in &cols {
                let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= dot * y;
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
        (0..16).map(|k| cols[k % 4][k / 4]).collect()
    }

    #[test]
    fn two_qubit_gate_agrees_with_tensor_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=6 {
            // random normalized state as a rank-n tensor
            let data: Vec<Complex64> = (0..1 << n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let labels: Vec<String> = (0..n).map(|q| format!("s{q}")).collect();
            let state = Tensor::new("psi", labels.clone(), vec![2; n], data.clone()).unwrap();
            let qa = rng.random_range(0..n);
            let qb = (qa + rng.random_range(1..n)) % n;
            let u = random_unitary(&mut rng);
            let gate = Gate::from_matrix(&[qa, qb], u.clone()).unwrap();

            let mut sv = StateVector { n, amplitudes: data };
            sv.apply(&gate);

            let g = Tensor::new(
                "g",
                vec!["oa".into(), "ob".into(), labels[qa].clone(), labels[qb].clone()],
                vec![2; 4],
                u,
            )
            .unwrap();
            let out = contract_pair(&g, &state).unwrap();
            // out labels: oa ob then remaining qubits in order
            for idx in 0..1usize << n {
                let bits: Vec<usize> = (0..n).map(|q| (idx >> (n - 1 - q)) & 1).collect();
                let mut pos = vec![bits[qa], bits[qb]];
                pos.extend((0..n).filter(|&q| q != qa && q != qb).map(|q| bits[q]));
                assert!((out.get(&pos) - sv.amplitudes[idx]).norm() < 1e-12);
            }
        }
    }
}
