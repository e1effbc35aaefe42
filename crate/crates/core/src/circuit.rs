//! Layered Clifford circuits with classically controlled gates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Z,
    Cnot,
    Cz,
    Swap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => 2,
            _ => 1,
        }
    }
}

/// Index of a control predicate registered on a circuit.
pub type ControlId = usize;

/// A gate on one or two qubits. For one-qubit gates `b == a`.
/// For `Cnot`, `a` is the control qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub a: usize,
    pub b: usize,
    pub control: Option<ControlId>,
}

impl Gate {
    pub fn one(kind: GateKind, q: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Gate { kind, a: q, b: q, control: None }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        Gate { kind, a, b, control: None }
    }

    pub fn when(mut self, control: Option<ControlId>) -> Self {
        self.control = control;
        self
    }

    /// Qubits touched by the gate.
    pub fn support(&self) -> Vec<usize> {
        gate_support(self)[..self.kind.arity()].to_vec()
    }
}

/// Conjunction of equality tests on named input bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Control {
    pub bits: Vec<usize>,
    pub pattern: Vec<bool>,
}

impl Control {
    fn excludes(&self, other: &Control) -> bool {
        self.bits.iter().zip(&self.pattern).any(|(b, v)| {
            other.bits.iter().zip(&other.pattern).any(|(b2, v2)| b == b2 && v != v2)
        })
    }
}

/// Values for the named input bits of a circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InputBits(BTreeMap<String, bool>);

impl InputBits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, v: bool) -> &mut Self {
        self.0.insert(name.into(), v);
        self
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.0.get(name).copied()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        let mut out = Self::new();
        for (k, v) in pairs {
            out.set(k, v);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct LayeredCliffordCircuit {
    n: usize,
    layers: Vec<Vec<Gate>>,
    inputs: Vec<String>,
    controls: Vec<Control>,
    coords: Option<Vec<[f64; 3]>>,
}

/// Gates of one layer after evaluating the controls: `(kind, a, b)`.
pub type ResolvedLayer = Vec<(GateKind, usize, usize)>;

/// A circuit with all controls evaluated.
#[derive(Clone, Debug)]
pub struct ResolvedCircuit {
    pub n: usize,
    pub layers: Vec<ResolvedLayer>,
}

impl LayeredCliffordCircuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroQubits);
        }
        Ok(LayeredCliffordCircuit { n, layers: Vec::new(), inputs: Vec::new(), controls: Vec::new(), coords: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn input_names(&self) -> &[String] {
        &self.inputs
    }

    pub fn control(&self, id: ControlId) -> &Control {
        &self.controls[id]
    }

    pub fn coords(&self) -> Option<&[[f64; 3]]> {
        self.coords.as_deref()
    }

    pub fn set_coords(&mut self, coords: Vec<[f64; 3]>) -> Result<()> {
        if coords.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: coords.len() });
        }
        self.coords = Some(coords);
        Ok(())
    }

    /// Index of a named input bit, registering it on first use.
    pub fn input(&mut self, name: &str) -> usize {
        if let Some(i) = self.inputs.iter().position(|s| s == name) {
            return i;
        }
        self.inputs.push(name.to_string());
        self.inputs.len() - 1
    }

    /// Registers the predicate "every listed bit equals its value".
    pub fn add_control(&mut self, tests: &[(&str, bool)]) -> ControlId {
        let bits = tests.iter().map(|(name, _)| self.input(name)).collect();
        let pattern = tests.iter().map(|&(_, v)| v).collect();
        let c = Control { bits, pattern };
        if let Some(i) = self.controls.iter().position(|x| *x == c) {
            return i;
        }
        self.controls.push(c);
        self.controls.len() - 1
    }

    /// Appends a layer. Gates may share a qubit only if their controls can
    /// never hold together.
    pub fn push_layer(&mut self, gates: Vec<Gate>) -> Result<()> {
        let layer = self.layers.len();
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (gi, g) in gates.iter().enumerate() {
            for &q in gate_support(g).iter().take(g.kind.arity()) {
                if q >= self.n {
                    return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
                }
                if g.kind.arity() == 2 && g.a == g.b {
                    return Err(Error::LayerOverlap { layer, qubit: q });
                }
                users[q].push(gi);
            }
            if let Some(c) = g.control {
                if c >= self.controls.len() {
                    return Err(Error::InvalidInput(format!("unknown control id {c}")));
                }
            }
        }
        for (q, list) in users.iter().enumerate() {
            for (i, &g1) in list.iter().enumerate() {
                for &g2 in &list[i + 1..] {
                    let exclusive = match (gates[g1].control, gates[g2].control) {
                        (Some(c1), Some(c2)) => self.controls[c1].excludes(&self.controls[c2]),
                        _ => false,
                    };
                    if !exclusive {
                        return Err(Error::LayerOverlap { layer, qubit: q });
                    }
                }
            }
        }
        self.layers.push(gates);
        Ok(())
    }

    /// Evaluates every control against `inputs`.
    pub fn resolve(&self, inputs: &InputBits) -> Result<ResolvedCircuit> {
        let mut values = Vec::with_capacity(self.inputs.len());
        for name in &self.inputs {
            values.push(inputs.get(name));
        }
        let mut active = Vec::with_capacity(self.controls.len());
        for c in &self.controls {
            let mut on = true;
            for (&b, &v) in c.bits.iter().zip(&c.pattern) {
                match values[b] {
                    None => return Err(Error::UnresolvedControl(self.inputs[b].clone())),
                    Some(x) => on &= x == v,
                }
            }
            active.push(on);
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.len());
            let mut seen = vec![false; self.n];
            for g in layer {
                if g.control.is_some_and(|c| !active[c]) {
                    continue;
                }
                for &q in gate_support(g).iter().take(g.kind.arity()) {
                    if std::mem::replace(&mut seen[q], true) {
                        return Err(Error::LayerOverlap { layer: li, qubit: q });
                    }
                }
                out.push((g.kind, g.a, g.b));
            }
            layers.push(out);
        }
        Ok(ResolvedCircuit { n: self.n, layers })
    }
}

pub(crate) fn gate_support(g: &Gate) -> [usize; 2] {
    [g.a, g.b]
}

impl ResolvedCircuit {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `p <- U p U^dagger` for the whole circuit.
    pub fn conjugate(&self, p: &mut PauliOp) {
        for l in 0..self.layers.len() {
            self.conjugate_layer(l, p);
        }
    }

    pub fn conjugate_layer(&self, layer: usize, p: &mut PauliOp) {
        for &(k, a, b) in &self.layers[layer] {
            conjugate_gate(p, k, a, b);
        }
    }
}

/// `p <- g p g^dagger` for a single gate, phase included.
#[inline]
pub fn conjugate_gate(p: &mut PauliOp, kind: GateKind, a: usize, b: usize) {
    match kind {
        GateKind::H => {
            let (xa, za) = (p.x(a), p.z(a));
            p.set_x(a, za);
            p.set_z(a, xa);
            if xa && za {
                p.add_phase(2);
            }
        }
        GateKind::S => {
            if p.x(a) {
                p.flip_z(a);
                p.add_phase(1);
            }
        }
        GateKind::Sdg => {
            if p.x(a) {
                p.flip_z(a);
                p.add_phase(3);
            }
        }
        GateKind::X => {
            if p.z(a) {
                p.add_phase(2);
            }
        }
        GateKind::Z => {
            if p.x(a) {
                p.add_phase(2);
            }
        }
        GateKind::Cnot => {
            if p.x(a) {
                p.flip_x(b);
            }
            if p.z(b) {
                p.flip_z(a);
            }
        }
        GateKind::Cz => {
            let (xa, xb) = (p.x(a), p.x(b));
            if xb {
                p.flip_z(a);
            }
            if xa {
                p.flip_z(b);
            }
            if xa && xb {
                p.add_phase(2);
            }
        }
        GateKind::Swap => {
            let (xa, za, xb, zb) = (p.x(a), p.z(a), p.x(b), p.z(b));
            p.set_x(a, xb);
            p.set_z(a, zb);
            p.set_x(b, xa);
            p.set_z(b, za);
        }
    }
}

/// Conjugates `p` through the circuit under the given inputs.
pub fn conjugate_pauli(c: &LayeredCliffordCircuit, inputs: &InputBits, p: &PauliOp) -> Result<PauliOp> {
    if p.n() != c.n() {
        return Err(Error::DimensionMismatch { expected: c.n(), got: p.n() });
    }
    let r = c.resolve(inputs)?;
    let mut out = p.clone();
    r.conjugate(&mut out);
    Ok(out)
}
