//! Dense state-vector simulation, used as an oracle for the stabilizer code.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use shallowsep::{GateKind, PauliOp, ResolvedCircuit};

pub struct StateVector {
    pub n: usize,
    pub amp: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); 1 << n];
        amp[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amp }
    }

    pub fn apply(&mut self, kind: GateKind, a: usize, b: usize) {
        let (ma, mb) = (1usize << a, 1usize << b);
        let i = Complex64::new(0.0, 1.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for idx in 0..self.amp.len() {
            match kind {
                GateKind::H if idx & ma == 0 => {
                    let (x0, x1) = (self.amp[idx], self.amp[idx | ma]);
                    self.amp[idx] = (x0 + x1) * r;
                    self.amp[idx | ma] = (x0 - x1) * r;
                }
                GateKind::S if idx & ma != 0 => self.amp[idx] *= i,
                GateKind::Sdg if idx & ma != 0 => self.amp[idx] *= -i,
                GateKind::Z if idx & ma != 0 => self.amp[idx] = -self.amp[idx],
                GateKind::X if idx & ma == 0 => self.amp.swap(idx, idx | ma),
                GateKind::Cnot if idx & ma != 0 && idx & mb == 0 => self.amp.swap(idx, idx | mb),
                GateKind::Cz if idx & ma != 0 && idx & mb != 0 => self.amp[idx] = -self.amp[idx],
                GateKind::Swap if idx & ma != 0 && idx & mb == 0 => self.amp.swap(idx, idx ^ ma ^ mb),
                _ => {}
            }
        }
    }

    pub fn run(&mut self, c: &ResolvedCircuit) {
        for layer in &c.layers {
            for &(k, a, b) in layer {
                self.apply(k, a, b);
            }
        }
    }

    /// `|psi> <- i^phase X^x Z^z |psi>`.
    pub fn apply_pauli(&mut self, p: &PauliOp) {
        let (mut xm, mut zm) = (0usize, 0usize);
        for q in 0..self.n {
            xm |= (p.x(q) as usize) << q;
            zm |= (p.z(q) as usize) << q;
        }
        let phase = Complex64::new(0.0, 1.0).powu(p.phase() as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amp.len()];
        for (idx, &a) in self.amp.iter().enumerate() {
            let sign = if (idx & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[idx ^ xm] = a * sign * phase;
        }
        self.amp = out;
    }

    /// Computational basis strings with nonzero amplitude, qubit `q` at bit `q`.
    pub fn support(&self) -> Vec<Vec<bool>> {
        (0..self.amp.len())
            .filter(|&i| self.amp[i].norm_sqr() > 1e-9)
            .map(|i| (0..self.n).map(|q| i >> q & 1 == 1).collect())
            .collect()
    }

    pub fn close_to(&self, other: &StateVector) -> bool {
        self.amp.iter().zip(&other.amp).all(|(a, b)| (a - b).norm() < 1e-9)
    }

    pub fn expectation(&self, p: &PauliOp) -> f64 {
        let mut q = StateVector { n: self.n, amp: self.amp.clone() };
        q.apply_pauli(p);
        self.amp.iter().zip(&q.amp).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

pub fn bits_of(idx: usize, n: usize) -> Vec<bool> {
    (0..n).map(|q| idx >> q & 1 == 1).collect()
}

const KINDS: [GateKind; 8] =
    [GateKind::H, GateKind::S, GateKind::Sdg, GateKind::X, GateKind::Z, GateKind::Cnot, GateKind::Cz, GateKind::Swap];

/// A random resolved circuit with one gate per layer.
pub fn random_circuit<R: Rng>(n: usize, gates: usize, rng: &mut R) -> ResolvedCircuit {
    let mut layers = Vec::with_capacity(gates);
    for _ in 0..gates {
        let kind = KINDS[rng.gen_range(0..KINDS.len())];
        let a = rng.gen_range(0..n);
        let b = if kind.arity() == 2 {
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            b
        } else {
            a
        };
        layers.push(vec![(kind, a, b)]);
    }
    ResolvedCircuit { n, layers }
}

pub fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliOp {
    let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let z: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    PauliOp::from_bits(&x, &z, rng.gen_range(0..4)).unwrap()
}
