//! Boolean netlists (JSON) and the classical decode circuit of the pipeline.
//!
//! A netlist is a list of named gates over named wires. Built-in kinds are
//! `xor`, `and`, `or`, `not`, `copy`, `lut` (params `{"table": [..]}`, input
//! `i` is bit `i` of the row index) and `propagate` (Pauli-frame update of
//! one qubit through one circuit layer). Other kinds are evaluated by a
//! caller-supplied function.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circuit::{conjugate_gate, GateKind};
use crate::error::{Error, Result};
use crate::magic_square::{output_qubit, z_in_bits, MspInstance};
use crate::pauli::PauliOp;
use crate::pipeline::{block_home, FtSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetGate {
    pub kind: String,
    pub inputs: Vec<String>,
    pub output: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

impl NetGate {
    pub fn new(kind: &str, inputs: Vec<String>, output: String) -> Self {
        NetGate { kind: kind.to_string(), inputs, output, params: Value::Null }
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub gates: Vec<NetGate>,
}

impl Netlist {
    pub fn from_json(text: &str) -> Result<Self> {
        let net: Netlist = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("netlist: {e}")))?;
        net.topological_order()?;
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    /// Gate index driving each non-input wire.
    fn drivers(&self) -> Result<HashMap<&str, usize>> {
        let mut drivers = HashMap::with_capacity(self.gates.len());
        for name in &self.inputs {
            if drivers.insert(name.as_str(), usize::MAX).is_some() {
                return Err(Error::InvalidInput(format!("wire {name} declared twice")));
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            if drivers.insert(g.output.as_str(), i).is_some() {
                return Err(Error::InvalidInput(format!("wire {} driven twice", g.output)));
            }
        }
        Ok(drivers)
    }

    /// Gate indices such that every gate follows its drivers. Fails on
    /// undefined wires and cycles.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let drivers = self.drivers()?;
        let mut pending = vec![0usize; self.gates.len()];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            for w in &g.inputs {
                match drivers.get(w.as_str()) {
                    None => return Err(Error::InvalidInput(format!("wire {w} is never driven"))),
                    Some(&usize::MAX) => {}
                    Some(&j) => {
                        pending[i] += 1;
                        users[j].push(i);
                    }
                }
            }
        }
        for w in &self.outputs {
            if !drivers.contains_key(w.as_str()) {
                return Err(Error::InvalidInput(format!("output {w} is never driven")));
            }
        }
        let mut order: Vec<usize> = (0..self.gates.len()).filter(|&i| pending[i] == 0).collect();
        let mut head = 0;
        while head < order.len() {
            let g = order[head];
            head += 1;
            for &u in &users[g] {
                pending[u] -= 1;
                if pending[u] == 0 {
                    order.push(u);
                }
            }
        }
        if order.len() != self.gates.len() {
            return Err(Error::InvalidInput("netlist has a cycle".into()));
        }
        Ok(order)
    }

    /// Longest input-to-wire path, in gates, for every wire.
    pub fn levels(&self) -> Result<HashMap<String, usize>> {
        let mut level: HashMap<String, usize> = self.inputs.iter().map(|w| (w.clone(), 0)).collect();
        for i in self.topological_order()? {
            let g = &self.gates[i];
            let l = g.inputs.iter().map(|w| level[w]).max().unwrap_or(0) + 1;
            level.insert(g.output.clone(), l);
        }
        Ok(level)
    }

    pub fn depth(&self) -> Result<usize> {
        Ok(self.levels()?.values().copied().max().unwrap_or(0))
    }

    pub fn max_fan_in(&self) -> usize {
        self.gates.iter().map(|g| g.inputs.len()).max().unwrap_or(0)
    }

    /// Evaluates with built-in kinds only.
    pub fn evaluate(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        self.evaluate_with(inputs, &mut |g, _| Err(Error::InvalidInput(format!("unknown gate kind {}", g.kind))))
    }

    /// Evaluates; `custom` handles kinds that are not built in.
    pub fn evaluate_with(
        &self,
        inputs: &[bool],
        custom: &mut dyn FnMut(&NetGate, &[bool]) -> Result<bool>,
    ) -> Result<Vec<bool>> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch { expected: self.inputs.len(), got: inputs.len() });
        }
        let mut value: HashMap<&str, bool> = self.inputs.iter().map(String::as_str).zip(inputs.iter().copied()).collect();
        let mut args = Vec::new();
        for i in self.topological_order()? {
            let g = &self.gates[i];
            args.clear();
            args.extend(g.inputs.iter().map(|w| value[w.as_str()]));
            let v = match builtin(g, &args)? {
                Some(v) => v,
                None => custom(g, &args)?,
            };
            value.insert(g.output.as_str(), v);
        }
        Ok(self.outputs.iter().map(|w| value[w.as_str()]).collect())
    }
}

fn arity_error(g: &NetGate) -> Error {
    Error::InvalidInput(format!("gate {} has the wrong number of inputs", g.output))
}

fn builtin(g: &NetGate, args: &[bool]) -> Result<Option<bool>> {
    Ok(Some(match g.kind.as_str() {
        "xor" => args.iter().fold(false, |a, &b| a ^ b),
        "and" => args.iter().all(|&b| b),
        "or" => args.iter().any(|&b| b),
        "not" | "copy" => {
            if args.len() != 1 {
                return Err(arity_error(g));
            }
            args[0] ^ (g.kind == "not")
        }
        "lut" => {
            let table = g.params.get("table").and_then(Value::as_array).ok_or_else(|| arity_error(g))?;
            if table.len() != 1 << args.len() {
                return Err(arity_error(g));
            }
            let row = args.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | (b as usize) << i);
            table[row].as_bool().or_else(|| table[row].as_u64().map(|v| v != 0)).ok_or_else(|| arity_error(g))?
        }
        "propagate" => propagate(g, args)?,
        _ => return Ok(None),
    }))
}

#[derive(Deserialize)]
struct PropagateParams {
    controls: Vec<String>,
    qubits: Vec<usize>,
    ops: Vec<PropagateOp>,
    target: usize,
    component: String,
}

#[derive(Deserialize)]
struct PropagateOp {
    kind: GateKind,
    a: usize,
    b: usize,
    when: Vec<(String, bool)>,
}

/// Inputs: the control bits, then `(x, z)` of each listed qubit.
fn propagate(g: &NetGate, args: &[bool]) -> Result<bool> {
    let p: PropagateParams =
        serde_json::from_value(g.params.clone()).map_err(|e| Error::InvalidInput(format!("gate {}: {e}", g.output)))?;
    let k = p.controls.len();
    if args.len() != k + 2 * p.qubits.len() {
        return Err(arity_error(g));
    }
    let local = |q: usize| p.qubits.iter().position(|&x| x == q).ok_or_else(|| arity_error(g));
    let mut frame = PauliOp::identity(p.qubits.len());
    for i in 0..p.qubits.len() {
        frame.set_x(i, args[k + 2 * i]);
        frame.set_z(i, args[k + 2 * i + 1]);
    }
    for op in &p.ops {
        let mut fires = true;
        for (name, v) in &op.when {
            let c = p.controls.iter().position(|x| x == name).ok_or_else(|| arity_error(g))?;
            fires &= args[c] == *v;
        }
        if fires {
            conjugate_gate(&mut frame, op.kind, local(op.a)?, local(op.b)?);
        }
    }
    let t = local(p.target)?;
    Ok(if p.component == "x" { frame.x(t) } else { frame.z(t) })
}

/// The decode netlist with its audited quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeCircuit {
    pub n: usize,
    pub d: usize,
    pub logical_depth: usize,
    pub depth: usize,
    pub max_fan_in: usize,
    /// Largest number of control bits read by one propagation gate.
    pub k_controls: usize,
    /// Largest number of qubits read by one propagation gate.
    pub k_qubits: usize,
    pub m: usize,
    pub m_anc: usize,
    pub fan_in_bound: usize,
    pub netlist: Netlist,
}

fn frame_wire(t: usize, q: usize, comp: char) -> String {
    format!("l{t}:{q}:{comp}")
}

/// Builds the circuit mapping `(b, s, y)` to `z`: Rec gates, one
/// propagation layer per logical-circuit layer, an XOR layer and the
/// per-block decoders.
pub fn classical_decode_circuit(sys: &FtSystem) -> Result<DecodeCircuit> {
    let lat = sys.lattice();
    let logical = sys.logical_circuit();
    let m = sys.m();
    let m_anc = lat.region_a().len();
    let n = sys.n();
    let nq = 4 * n * m;
    let mut net = Netlist::default();
    let names = logical.input_names();
    net.inputs.extend(names.iter().map(|s| format!("b:{s}")));
    for cube in 0..sys.cubes() {
        net.inputs.extend((0..m_anc).map(|i| format!("s:{cube}:{i}")));
    }
    net.inputs.extend((0..nq).map(|j| format!("y:{j}")));

    for l in 0..4 * n {
        let (cube, face) = block_home(l);
        let s_wires: Vec<String> = (0..m_anc).map(|i| format!("s:{cube}:{i}")).collect();
        for q in 0..m {
            let pos = face * m + q;
            for comp in ['x', 'z'] {
                net.gates.push(
                    NetGate::new("rec", s_wires.clone(), frame_wire(0, l * m + q, comp))
                        .with_params(json!({"cube": cube, "pos": pos, "component": comp.to_string()})),
                );
            }
        }
    }

    let (mut k_controls, mut k_qubits) = (0, 0);
    for (t, layer) in logical.layers().iter().enumerate() {
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); nq];
        for (gi, g) in layer.iter().enumerate() {
            for q in g.support() {
                touching[q].push(gi);
            }
        }
        for (q, gates) in touching.iter().enumerate() {
            if gates.is_empty() {
                for comp in ['x', 'z'] {
                    net.gates.push(NetGate::new("copy", vec![frame_wire(t, q, comp)], frame_wire(t + 1, q, comp)));
                }
                continue;
            }
            let mut controls: Vec<String> = Vec::new();
            let mut qubits: Vec<usize> = Vec::new();
            let mut ops = Vec::new();
            for &gi in gates {
                let g = &layer[gi];
                let mut when = Vec::new();
                if let Some(id) = g.control {
                    let c = logical.control(id);
                    for (&b, &v) in c.bits.iter().zip(&c.pattern) {
                        let w = format!("b:{}", names[b]);
                        if !controls.contains(&w) {
                            controls.push(w.clone());
                        }
                        when.push((w, v));
                    }
                }
                for s in g.support() {
                    if !qubits.contains(&s) {
                        qubits.push(s);
                    }
                }
                ops.push(json!({"kind": g.kind, "a": g.a, "b": g.b, "when": when}));
            }
            k_controls = k_controls.max(controls.len());
            k_qubits = k_qubits.max(qubits.len());
            let mut inputs = controls.clone();
            for &s in &qubits {
                inputs.push(frame_wire(t, s, 'x'));
                inputs.push(frame_wire(t, s, 'z'));
            }
            for comp in ['x', 'z'] {
                net.gates.push(NetGate::new("propagate", inputs.clone(), frame_wire(t + 1, q, comp)).with_params(json!({
                    "controls": controls,
                    "qubits": qubits,
                    "ops": ops,
                    "target": q,
                    "component": comp.to_string(),
                })));
            }
        }
    }

    let last = logical.depth();
    for j in 0..nq {
        net.gates.push(NetGate::new("xor", vec![format!("y:{j}"), frame_wire(last, j, 'x')], format!("u:{j}")));
    }
    for l in 0..4 * n {
        let u: Vec<String> = (0..m).map(|q| format!("u:{}", l * m + q)).collect();
        net.gates.push(NetGate::new("dec", u, format!("z:{l}")).with_params(json!({"d": sys.d()})));
    }
    net.outputs = (0..4 * n).map(|i| format!("z:{}", output_qubit(n, i))).collect();

    let depth = net.depth()?;
    let max_fan_in = net.max_fan_in();
    Ok(DecodeCircuit {
        n,
        d: sys.d(),
        logical_depth: last,
        depth,
        max_fan_in,
        k_controls,
        k_qubits,
        m,
        m_anc,
        fan_in_bound: k_controls + 2 * k_qubits + m.max(m_anc),
        netlist: net,
    })
}

/// Input vector of the decode netlist for one trial.
pub fn decode_inputs(sys: &FtSystem, inst: &MspInstance, s: &[Vec<bool>], y: &[bool]) -> Result<Vec<bool>> {
    let bits = z_in_bits(sys.n(), &inst.z_in())?;
    let mut out = Vec::new();
    for name in sys.logical_circuit().input_names() {
        out.push(bits.get(name).ok_or_else(|| Error::InvalidInput(format!("missing input bit {name}")))?);
    }
    for sc in s {
        out.extend_from_slice(sc);
    }
    out.extend_from_slice(y);
    Ok(out)
}

/// Evaluates the decode netlist; `Rec` is computed once per cube.
pub fn evaluate_decode(sys: &FtSystem, circuit: &DecodeCircuit, inputs: &[bool]) -> Result<Vec<bool>> {
    let mut recs: BTreeMap<Vec<bool>, PauliOp> = BTreeMap::new();
    let layout = sys.layout();
    let lat = sys.lattice();
    circuit.netlist.evaluate_with(inputs, &mut |g, args| match g.kind.as_str() {
        "rec" => {
            let pos = g.params["pos"].as_u64().ok_or_else(|| arity_error(g))? as usize;
            if !recs.contains_key(args) {
                recs.insert(args.to_vec(), lat.rec(args)?);
            }
            let p = &recs[args];
            Ok(if g.params["component"] == "x" { p.x(pos) } else { p.z(pos) })
        }
        "dec" => layout.dec(args),
        other => Err(Error::InvalidInput(format!("unknown gate kind {other}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_kinds() {
        let net = Netlist::from_json(
            r#"{"inputs":["a","b"],"outputs":["o","l"],"gates":[
                {"kind":"and","inputs":["a","n"],"output":"o"},
                {"kind":"not","inputs":["b"],"output":"n"},
                {"kind":"lut","inputs":["a","b"],"output":"l","params":{"table":[0,1,1,0]}}]}"#,
        )
        .unwrap();
        assert_eq!(net.depth().unwrap(), 2);
        assert_eq!(net.evaluate(&[true, false]).unwrap(), vec![true, true]);
        assert_eq!(net.evaluate(&[true, true]).unwrap(), vec![false, false]);
    }

    #[test]
    fn malformed_netlists_are_rejected() {
        let cyc = r#"{"inputs":["a"],"outputs":["x"],"gates":[
            {"kind":"xor","inputs":["a","y"],"output":"x"},{"kind":"copy","inputs":["x"],"output":"y"}]}"#;
        assert!(Netlist::from_json(cyc).is_err());
        let undriven = r#"{"inputs":["a"],"outputs":["x"],"gates":[{"kind":"xor","inputs":["a","q"],"output":"x"}]}"#;
        assert!(Netlist::from_json(undriven).is_err());
    }

    #[test]
    fn decode_circuit_shape() {
        let sys = FtSystem::new(2, 2).unwrap();
        let c = classical_decode_circuit(&sys).unwrap();
        assert_eq!(c.depth, c.logical_depth + 3);
        assert!(c.max_fan_in <= c.fan_in_bound);
        let text = c.netlist.to_json();
        assert_eq!(Netlist::from_json(&text).unwrap(), c.netlist);
    }

    #[test]
    fn netlist_reproduces_pipeline_decode() {
        use crate::noise::{NoiseModel, NoiseSpec};
        use crate::pipeline::{run_ft_trial, Engine, FtConfig, InstanceChoice};
        let sys = FtSystem::new(2, 3).unwrap();
        let c = classical_decode_circuit(&sys).unwrap();
        let cfg = FtConfig {
            n: 2,
            d: 3,
            noise: NoiseSpec::uniform(0.005, NoiseModel::IidDepolarizing),
            instance: InstanceChoice::default(),
            trials: 1,
            seed: 0,
            engine: Engine::Frame,
        };
        for i in 0..30 {
            let r = run_ft_trial(&sys, &cfg, &mut crate::trial_rng(3, i)).unwrap();
            let inputs = decode_inputs(&sys, &r.instance, &r.s, &r.y).unwrap();
            assert_eq!(evaluate_decode(&sys, &c, &inputs).unwrap(), r.z);
        }
    }
}
