//! Quantum circuits: gates, the fixed gate library, the line-based circuit
//! file format, and the GHZ and random-circuit generators.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::rng::SplitMix64;

/// Entrywise tolerance used when checking that a matrix is unitary.
pub const UNITARY_TOL: f64 = 1e-12;

/// Names of the built-in gates, in the order they are documented.
pub const GATE_LIBRARY: [&str; 10] = ["h", "x", "y", "z", "s", "t", "x_1_2", "y_1_2", "cz", "cx"];

/// Name used for gates given by an inline matrix.
pub const MATRIX_GATE: &str = "matrix";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("qubit index {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("gate `{0}` lists the same qubit twice")]
    DuplicateTarget(String),
    #[error("gate `{name}` expects {expected} target(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("matrix for gate `{0}` is not unitary")]
    NotUnitary(String),
    #[error("a circuit needs at least one qubit")]
    NoQubits,
    #[error("invalid bitstring `{0}`")]
    InvalidBitstring(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub targets: Vec<usize>,
    /// Row-major `2^k x 2^k` matrix; for two-qubit gates the first target is
    /// the most significant bit of the row/column index.
    pub matrix: Vec<Complex64>,
}

impl Gate {
    /// Looks up `name` in the gate library.
    pub fn named(name: &str, targets: &[usize]) -> Result<Gate, CircuitError> {
        let matrix = gate_matrix(name)?;
        let expected = arity_of(matrix.len());
        if targets.len() != expected {
            return Err(CircuitError::Arity {
                name: name.to_string(),
                expected,
                got: targets.len(),
            });
        }
        Self::check_targets(name, targets)?;
        Ok(Gate {
            name: name.to_string(),
            targets: targets.to_vec(),
            matrix,
        })
    }

    /// A gate given by an explicit unitary matrix.
    pub fn from_matrix(targets: &[usize], matrix: Vec<Complex64>) -> Result<Gate, CircuitError> {
        let dim = 1usize << targets.len();
        if targets.is_empty() || targets.len() > 2 || matrix.len() != dim * dim {
            return Err(CircuitError::Arity {
                name: MATRIX_GATE.to_string(),
                expected: arity_of(matrix.len()),
                got: targets.len(),
            });
        }
        Self::check_targets(MATRIX_GATE, targets)?;
        if !is_unitary(&matrix, dim, UNITARY_TOL) {
            return Err(CircuitError::NotUnitary(MATRIX_GATE.to_string()));
        }
        Ok(Gate {
            name: MATRIX_GATE.to_string(),
            targets: targets.to_vec(),
            matrix,
        })
    }

    fn check_targets(name: &str, targets: &[usize]) -> Result<(), CircuitError> {
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(CircuitError::DuplicateTarget(name.to_string()));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    /// Side length of the gate matrix.
    pub fn dim(&self) -> usize {
        1 << self.targets.len()
    }
}

fn arity_of(len: usize) -> usize {
    match len {
        4 => 1,
        16 => 2,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Circuit, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(Circuit {
            num_qubits,
            gates: Vec::new(),
        })
    }

    /// Appends a gate after checking its targets against the register size.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        for &q in &gate.targets {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Builder-style helper for library gates.
    pub fn with(mut self, name: &str, targets: &[usize]) -> Result<Circuit, CircuitError> {
        self.push(Gate::named(name, targets)?)?;
        Ok(self)
    }
}

/// A measurement outcome; `bits[i]` is the value read on qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Bitstring {
        Bitstring(bits)
    }

    pub fn zeros(n: usize) -> Bitstring {
        Bitstring(vec![false; n])
    }

    /// Inverse of [`Bitstring::index`]: qubit 0 is the most significant bit.
    pub fn from_index(index: usize, n: usize) -> Bitstring {
        Bitstring((0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect())
    }

    /// Position of this outcome in a statevector of length `2^n`.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, qubit: usize) -> bool {
        self.0[qubit]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Every bitstring of length `n`, in index order.
    pub fn all(n: usize) -> impl Iterator<Item = Bitstring> {
        (0..1usize << n).map(move |i| Bitstring::from_index(i, n))
    }
}

impl FromStr for Bitstring {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CircuitError::InvalidBitstring(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bitstring)
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Matrix of a library gate, row-major.
pub fn gate_matrix(name: &str) -> Result<Vec<Complex64>, CircuitError> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let m = match name {
        "h" => vec![c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)],
        "x" => vec![z, o, o, z],
        "y" => vec![z, c(0.0, -1.0), c(0.0, 1.0), z],
        "z" => vec![o, z, z, c(-1.0, 0.0)],
        "s" => vec![o, z, z, c(0.0, 1.0)],
        "t" => vec![o, z, z, c(r, r)],
        "x_1_2" => vec![c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)],
        "y_1_2" => vec![c(0.5, 0.5), c(-0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5)],
        "cz" => {
            let mut m = vec![z; 16];
            m[0] = o;
            m[5] = o;
            m[10] = o;
            m[15] = c(-1.0, 0.0);
            m
        }
        "cx" => {
            let mut m = vec![z; 16];
            m[0] = o;
            m[5] = o;
            m[11] = o;
            m[14] = o;
            m
        }
        _ => return Err(CircuitError::UnknownGate(name.to_string())),
    };
    Ok(m)
}

/// Checks `U^dagger U = I` entrywise within `tol`.
pub fn is_unitary(m: &[Complex64], dim: usize, tol: f64) -> bool {
    if m.len() != dim * dim {
        return false;
    }
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = c(0.0, 0.0);
            for k in 0..dim {
                acc += m[k * dim + i].conj() * m[k * dim + j];
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            if (acc - c(expected, 0.0)).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Parses the line-based circuit format:
///
/// ```text
/// # comment
/// qubits 3
/// h 0
/// cx 0 1
/// matrix 2
/// 0 0
/// 1 0
/// 1 0
/// 0 0
/// ```
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines.next().ok_or(CircuitError::Syntax {
        line: 0,
        msg: "missing `qubits <n>` header".into(),
    })?;
    let mut parts = header.split_whitespace();
    let num_qubits = match (parts.next(), parts.next(), parts.next()) {
        (Some("qubits"), Some(n), None) => n.parse::<usize>().map_err(|_| CircuitError::Syntax {
            line,
            msg: format!("bad qubit count `{n}`"),
        })?,
        _ => {
            return Err(CircuitError::Syntax {
                line,
                msg: "expected `qubits <n>`".into(),
            })
        }
    };
    let mut circuit = Circuit::new(num_qubits)?;

    while let Some((line, text)) = lines.next() {
        let mut parts = text.split_whitespace();
        let name = parts.next().unwrap_or_default();
        let targets = parts
            .map(|t| {
                t.parse::<usize>().map_err(|_| CircuitError::Syntax {
                    line,
                    msg: format!("bad qubit index `{t}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if targets.is_empty() || targets.len() > 2 {
            return Err(CircuitError::Syntax {
                line,
                msg: format!("gate `{name}` needs one or two qubit indices"),
            });
        }
        for &q in &targets {
            if q >= num_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        let gate = if name == MATRIX_GATE {
            let dim = 1usize << targets.len();
            let mut matrix = Vec::with_capacity(dim * dim);
            for _ in 0..dim * dim {
                let (line, entry) = lines.next().ok_or(CircuitError::Syntax {
                    line,
                    msg: "matrix block ended early".into(),
                })?;
                matrix.push(parse_complex(entry).ok_or_else(|| CircuitError::Syntax {
                    line,
                    msg: format!("expected `<re> <im>`, got `{entry}`"),
                })?);
            }
            Gate::from_matrix(&targets, matrix)?
        } else {
            Gate::named(name, &targets)?
        };
        circuit.push(gate)?;
    }
    Ok(circuit)
}

pub(crate) fn parse_complex(s: &str) -> Option<Complex64> {
    let mut it = s.split_whitespace();
    let re = it.next()?.parse().ok()?;
    let im = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(c(re, im))
}

/// Renders a circuit in the format read by [`parse_circuit`]. Floats use the
/// shortest representation that parses back to the same value.
pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = format!("qubits {}", circuit.num_qubits);
    for gate in &circuit.gates {
        out.push('\n');
        out.push_str(&gate.name);
        for q in &gate.targets {
            out.push_str(&format!(" {q}"));
        }
        if gate.name == MATRIX_GATE {
            for z in &gate.matrix {
                out.push_str(&format!("\n{:?} {:?}", z.re, z.im));
            }
        }
    }
    out.push('\n');
    out
}

/// H on qubit 0 followed by a CX chain.
pub fn generate_ghz(n: usize) -> Result<Circuit, CircuitError> {
    let mut circuit = Circuit::new(n)?.with("h", &[0])?;
    for q in 1..n {
        circuit = circuit.with("cx", &[q - 1, q])?;
    }
    Ok(circuit)
}

/// One of the eight coupler patterns used by [`generate_rqc`].
///
/// Patterns alternate between horizontal and vertical couplers. A horizontal
/// pattern with offsets `(col_parity, row_parity)` couples `(r, c)` with
/// `(r, c + 1)` whenever `c % 2 == col_parity` and `r % 2 == row_parity`;
/// vertical patterns are the transpose.
pub fn cz_pattern(rows: usize, cols: usize, pattern: usize) -> Vec<(usize, usize)> {
    const PATTERNS: [(bool, usize, usize); 8] = [
        (true, 0, 0),
        (false, 0, 0),
        (true, 1, 1),
        (false, 1, 1),
        (true, 0, 1),
        (false, 0, 1),
        (true, 1, 0),
        (false, 1, 0),
    ];
    let (horizontal, major, minor) = PATTERNS[pattern % 8];
    let q = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for col in 0..cols {
            if horizontal {
                if col + 1 < cols && col % 2 == major && r % 2 == minor {
                    pairs.push((q(r, col), q(r, col + 1)));
                }
            } else if r + 1 < rows && r % 2 == major && col % 2 == minor {
                pairs.push((q(r, col), q(r + 1, col)));
            }
        }
    }
    pairs
}

/// Random grid circuit. Layer 0 is H on every qubit; layer `l >= 1` applies
/// CZ pattern `(l - 1) % 8` and a pseudo-random gate from `{t, x_1_2, y_1_2}`
/// on every qubit left idle by the pattern. A qubit never receives the same
/// single-qubit gate twice in a row. Randomness comes from [`SplitMix64`]
/// seeded with `seed`; each draw is `next_u64() % candidates`.
pub fn generate_rqc(rows: usize, cols: usize, depth: usize, seed: u64) -> Result<Circuit, CircuitError> {
    const SINGLE: [&str; 3] = ["t", "x_1_2", "y_1_2"];
    let n = rows * cols;
    let mut circuit = Circuit::new(n)?;
    for q in 0..n {
        circuit.push(Gate::named("h", &[q])?)?;
    }
    let mut rng = SplitMix64::new(seed);
    let mut last: Vec<Option<usize>> = vec![None; n];
    for layer in 1..=depth {
        let pairs = cz_pattern(rows, cols, layer - 1);
        let mut busy = vec![false; n];
        for &(a, b) in &pairs {
            busy[a] = true;
            busy[b] = true;
            circuit.push(Gate::named("cz", &[a, b])?)?;
        }
        for q in (0..n).filter(|&q| !busy[q]) {
            let choices: Vec<usize> = (0..SINGLE.len()).filter(|&g| Some(g) != last[q]).collect();
            let pick = choices[(rng.next_u64() % choices.len() as u64) as usize];
            last[q] = Some(pick);
            circuit.push(Gate::named(SINGLE[pick], &[q])?)?;
        }
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_gates_are_unitary() {
        for name in GATE_LIBRARY {
            let m = gate_matrix(name).unwrap();
            let dim = if m.len() == 4 { 2 } else { 4 };
            assert!(is_unitary(&m, dim, UNITARY_TOL), "{name}");
        }
    }

    #[test]
    fn named_matrices() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(gate_matrix("h").unwrap(), vec![c(r, 0.), c(r, 0.), c(r, 0.), c(-r, 0.)]);
        let cz = gate_matrix("cz").unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (3, 3) => -1.0,
                    (i, j) if i == j => 1.0,
                    _ => 0.0,
                };
                assert_eq!(cz[i * 4 + j], c(expected, 0.0));
            }
        }
        assert_eq!(
            gate_matrix("x_1_2").unwrap(),
            vec![c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)]
        );
        assert!(matches!(gate_matrix("rx"), Err(CircuitError::UnknownGate(_))));
    }

    #[test]
    fn square_roots_square_to_paulis() {
        for (root, pauli) in [("x_1_2", "x"), ("y_1_2", "y")] {
            let m = gate_matrix(root).unwrap();
            let p = gate_matrix(pauli).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let v = m[i * 2] * m[j] + m[i * 2 + 1] * m[2 + j];
                    assert!((v - p[i * 2 + j]).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn parse_examples() {
        let c1 = parse_circuit("qubits 1\nh 0").unwrap();
        assert_eq!(c1.num_qubits, 1);
        assert_eq!(c1.gates.len(), 1);
        assert_eq!(c1.gates[0].name, "h");

        let ghz = parse_circuit("qubits 3\nh 0\ncx 0 1\ncx 1 2").unwrap();
        assert_eq!(ghz, generate_ghz(3).unwrap());

        assert_eq!(
            parse_circuit("qubits 2\ncx 0 5"),
            Err(CircuitError::QubitOutOfRange { qubit: 5, num_qubits: 2 })
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_circuit("qubits 2\nfoo 0"), Err(CircuitError::UnknownGate(_))));
        assert!(matches!(parse_circuit("qubits 2\ncx 1 1"), Err(CircuitError::DuplicateTarget(_))));
        assert!(matches!(
            parse_circuit("qubits 2\nh 0\ncx 0 x"),
            Err(CircuitError::Syntax { line: 3, .. })
        ));
        assert!(matches!(parse_circuit("h 0"), Err(CircuitError::Syntax { line: 1, .. })));
        assert!(matches!(parse_circuit("qubits 2\nh 0 1"), Err(CircuitError::Arity { .. })));
        assert!(matches!(
            parse_circuit("qubits 1\nmatrix 0\n1 0\n0 0"),
            Err(CircuitError::Syntax { .. })
        ));
        assert!(matches!(
            parse_circuit("qubits 1\nmatrix 0\n1 0\n1 0\n0 0\n1 0"),
            Err(CircuitError::NotUnitary(_))
        ));
        assert!(matches!(parse_circuit("qubits 0"), Err(CircuitError::NoQubits)));
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_circuit("# ghz\n\nqubits 2\n# body\nh 0\n  cx 0 1  \n").unwrap();
        assert_eq!(c, generate_ghz(2).unwrap());
    }

    #[test]
    fn serialize_examples() {
        assert_eq!(serialize_circuit(&generate_ghz(3).unwrap()), "qubits 3\nh 0\ncx 0 1\ncx 1 2\n");
        assert_eq!(serialize_circuit(&Circuit::new(2).unwrap()), "qubits 2\n");

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let m = vec![c(r, 0.), c(0., r), c(0., r), c(r, 0.)];
        let mut circ = Circuit::new(1).unwrap();
        circ.push(Gate::from_matrix(&[0], m).unwrap()).unwrap();
        let text = serialize_circuit(&circ);
        assert!(text.starts_with("qubits 1\nmatrix 0\n0.7071067811865476 0.0\n"));
        assert_eq!(text.lines().count(), 6);
        assert_eq!(parse_circuit(&text).unwrap(), circ);
    }

    #[test]
    fn ghz_shape() {
        assert_eq!(generate_ghz(1).unwrap().gates.len(), 1);
        let g = generate_ghz(3).unwrap();
        let summary: Vec<_> = g.gates.iter().map(|g| (g.name.as_str(), g.targets.clone())).collect();
        assert_eq!(summary, vec![("h", vec![0]), ("cx", vec![0, 1]), ("cx", vec![1, 2])]);
        assert_eq!(generate_ghz(0), Err(CircuitError::NoQubits));
    }

    #[test]
    fn rqc_degenerate_and_deterministic() {
        for seed in [0, 1, 99] {
            let c = generate_rqc(1, 1, 0, seed).unwrap();
            assert_eq!(serialize_circuit(&c), "qubits 1\nh 0\n");
        }
        assert_eq!(generate_rqc(2, 2, 8, 7).unwrap(), generate_rqc(2, 2, 8, 7).unwrap());
        assert_ne!(generate_rqc(3, 3, 8, 7).unwrap(), generate_rqc(3, 3, 8, 8).unwrap());
    }

    #[test]
    fn rqc_never_repeats_single_qubit_gate() {
        let c = generate_rqc(4, 4, 24, 1).unwrap();
        let mut last: Vec<Option<&str>> = vec![None; 16];
        for g in c.gates.iter().skip(16) {
            if g.arity() == 1 {
                let q = g.targets[0];
                assert_ne!(last[q], Some(g.name.as_str()));
                last[q] = Some(&g.name);
            }
        }
    }

    #[test]
    fn cz_patterns_are_matchings() {
        for p in 0..8 {
            let pairs = cz_pattern(4, 5, p);
            assert!(!pairs.is_empty());
            let mut seen = [false; 20];
            for (a, b) in pairs {
                assert!(!seen[a] && !seen[b]);
                seen[a] = true;
                seen[b] = true;
            }
        }
    }

    #[test]
    fn bitstring_index_convention() {
        let b: Bitstring = "100".parse().unwrap();
        assert_eq!(b.index(), 4);
        assert_eq!(Bitstring::from_index(4, 3), b);
        assert_eq!(b.to_string(), "100");
        assert!("10a".parse::<Bitstring>().is_err());
    }
}
