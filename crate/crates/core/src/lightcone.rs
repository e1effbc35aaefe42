//! Lightcones of classical circuits given as netlists.
//!
//! Lightcones here are reachability sets: an input is in the backward
//! lightcone of an output when some wire path joins them. This contains the
//! set of inputs the output actually depends on; [`correlation_pairs`] finds
//! the latter exactly for small circuits.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::netlist::{NetGate, Netlist};

/// Classical circuits are netlists.
pub type BooleanDag = Netlist;

/// Wire adjacency of a netlist, built once and shared by lightcone queries.
pub struct DagIndex<'a> {
    dag: &'a BooleanDag,
    id: HashMap<&'a str, usize>,
    names: Vec<&'a str>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    is_input: Vec<bool>,
    is_output: Vec<bool>,
}

impl<'a> DagIndex<'a> {
    pub fn new(dag: &'a BooleanDag) -> Result<Self> {
        dag.topological_order()?;
        let names: Vec<&str> = dag.inputs.iter().chain(dag.gates.iter().map(|g| &g.output)).map(String::as_str).collect();
        let id: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut preds = vec![Vec::new(); names.len()];
        let mut succs = vec![Vec::new(); names.len()];
        for (gi, g) in dag.gates.iter().enumerate() {
            let out = dag.inputs.len() + gi;
            for w in &g.inputs {
                let src = id[w.as_str()];
                preds[out].push(src);
                succs[src].push(out);
            }
        }
        let mut is_output = vec![false; names.len()];
        for w in &dag.outputs {
            is_output[id[w.as_str()]] = true;
        }
        let is_input = (0..names.len()).map(|i| i < dag.inputs.len()).collect();
        Ok(DagIndex { dag, id, names, preds, succs, is_input, is_output })
    }

    pub fn dag(&self) -> &BooleanDag {
        self.dag
    }

    fn wire(&self, name: &str) -> Result<usize> {
        self.id.get(name).copied().ok_or_else(|| Error::InvalidInput(format!("unknown wire {name}")))
    }

    fn reach(&self, start: &[usize], next: &[Vec<usize>], keep: &[bool]) -> BTreeSet<String> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = start.to_vec();
        let mut cone = BTreeSet::new();
        while let Some(w) = stack.pop() {
            if std::mem::replace(&mut seen[w], true) {
                continue;
            }
            if keep[w] {
                cone.insert(self.names[w].to_string());
            }
            stack.extend(next[w].iter().copied());
        }
        cone
    }

    /// Inputs with a path to `output`.
    pub fn backward(&self, output: &str) -> Result<BTreeSet<String>> {
        Ok(self.reach(&[self.wire(output)?], &self.preds, &self.is_input))
    }

    /// Outputs reachable from any of `inputs`.
    pub fn forward(&self, inputs: &[String]) -> Result<BTreeSet<String>> {
        let start = inputs.iter().map(|w| self.wire(w)).collect::<Result<Vec<_>>>()?;
        Ok(self.reach(&start, &self.succs, &self.is_output))
    }
}

/// Inputs with a path to wire `output`.
pub fn backward_lightcone(dag: &BooleanDag, output: &str) -> Result<BTreeSet<String>> {
    DagIndex::new(dag)?.backward(output)
}

/// Outputs reachable from wire `input`.
pub fn forward_lightcone(dag: &BooleanDag, input: &str) -> Result<BTreeSet<String>> {
    DagIndex::new(dag)?.forward(&[input.to_string()])
}

/// Union of the forward lightcones of several inputs.
pub fn forward_lightcone_of(dag: &BooleanDag, inputs: &[String]) -> Result<BTreeSet<String>> {
    DagIndex::new(dag)?.forward(inputs)
}

/// Wire names of a 1D Magic Square solver: inputs `a{i}.{1,2}` (column
/// input of pair `i`) and `b{i}.{1,2}`, outputs `x{i}.{1,2}` and `y{i}.{1,2}`.
pub fn solver_wire(prefix: char, i: usize, bit: u8) -> String {
    format!("{prefix}{i}.{bit}")
}

fn pair_wires(prefix: char, i: usize) -> Vec<String> {
    vec![solver_wire(prefix, i, 1), solver_wire(prefix, i, 2)]
}

/// Number of pairs of a correctly labelled solver.
pub fn solver_size(dag: &BooleanDag) -> Result<usize> {
    let n = dag.inputs.len() / 4;
    let mut want_in: Vec<String> = Vec::new();
    let mut want_out: Vec<String> = Vec::new();
    for i in 1..=n {
        want_in.extend(pair_wires('a', i));
        want_in.extend(pair_wires('b', i));
        want_out.extend(pair_wires('x', i));
        want_out.extend(pair_wires('y', i));
    }
    let have_in: BTreeSet<&String> = dag.inputs.iter().collect();
    let have_out: BTreeSet<&String> = dag.outputs.iter().collect();
    if n == 0 || have_in != want_in.iter().collect() || have_out != want_out.iter().collect() {
        return Err(Error::InvalidInput("dag is not labelled as a 1D Magic Square solver".into()));
    }
    Ok(n)
}

/// The event that the forward lightcones of `alpha_j` and `beta_k` are
/// disjoint, `y_k` is outside the cone of `alpha_j` and `x_j` is outside the
/// cone of `beta_k`.
pub fn check_event_ec(dag: &BooleanDag, j: usize, k: usize) -> Result<bool> {
    let n = solver_size(dag)?;
    event_ec(&DagIndex::new(dag)?, n, j, k)
}

fn event_ec(index: &DagIndex, n: usize, j: usize, k: usize) -> Result<bool> {
    if j == 0 || k == 0 || j > n || k > n {
        return Err(Error::InvalidInput(format!("pair indices ({j}, {k}) outside 1..={n}")));
    }
    let fa = index.forward(&pair_wires('a', j))?;
    let fb = index.forward(&pair_wires('b', k))?;
    Ok(fa.is_disjoint(&fb)
        && pair_wires('y', k).iter().all(|w| !fa.contains(w))
        && pair_wires('x', j).iter().all(|w| !fb.contains(w)))
}

/// Fraction of uniformly drawn pairs `j < k` for which the event holds.
pub fn event_ec_rate<R: Rng + ?Sized>(dag: &BooleanDag, samples: usize, rng: &mut R) -> Result<f64> {
    let n = solver_size(dag)?;
    if n < 2 {
        return Err(Error::InvalidInput("need at least two pairs".into()));
    }
    let index = DagIndex::new(dag)?;
    let mut hits = 0;
    for _ in 0..samples {
        let j = rng.gen_range(1..n);
        let k = rng.gen_range(j + 1..=n);
        hits += usize::from(event_ec(&index, n, j, k)?);
    }
    Ok(hits as f64 / samples as f64)
}

/// `(input, output)` pairs where flipping the input changes the output for
/// some assignment of the others. Exhaustive; at most 12 inputs.
pub fn correlation_pairs(dag: &BooleanDag) -> Result<BTreeSet<(String, String)>> {
    let k = dag.inputs.len();
    if k > 12 {
        return Err(Error::InvalidInput(format!("exhaustive correlation needs at most 12 inputs, got {k}")));
    }
    let table: Vec<Vec<bool>> = (0..1usize << k)
        .map(|row| dag.evaluate(&(0..k).map(|i| row >> i & 1 == 1).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mut pairs = BTreeSet::new();
    for i in 0..k {
        for row in 0..1usize << k {
            if row >> i & 1 == 1 {
                continue;
            }
            let (lo, hi) = (&table[row], &table[row | 1 << i]);
            for (o, name) in dag.outputs.iter().enumerate() {
                if lo[o] != hi[o] {
                    pairs.insert((dag.inputs[i].clone(), name.clone()));
                }
            }
        }
    }
    Ok(pairs)
}

/// Balanced XOR tree of depth `depth` over `2^depth` inputs.
pub fn xor_tree(depth: usize) -> BooleanDag {
    let mut level: Vec<String> = (0..1usize << depth).map(|i| format!("i{i}")).collect();
    let mut dag = BooleanDag { inputs: level.clone(), ..Default::default() };
    for t in 1..=depth {
        let next: Vec<String> = (0..level.len() / 2).map(|i| format!("t{t}.{i}")).collect();
        for (i, w) in next.iter().enumerate() {
            dag.gates.push(NetGate::new("xor", vec![level[2 * i].clone(), level[2 * i + 1].clone()], w.clone()));
        }
        level = next;
    }
    dag.outputs = level;
    dag
}

fn random_lut<R: Rng + ?Sized>(inputs: Vec<String>, output: String, rng: &mut R) -> NetGate {
    let table: Vec<bool> = (0..1usize << inputs.len()).map(|_| rng.gen()).collect();
    NetGate::new("lut", inputs, output).with_params(json!({ "table": table }))
}

/// Layered circuit of random `lut` gates: `width` gates per layer, each
/// reading `fan_in` distinct wires of the previous layer. The outputs are
/// the last layer.
pub fn random_dag<R: Rng + ?Sized>(inputs: &[String], outputs: &[String], depth: usize, fan_in: usize, rng: &mut R) -> Result<BooleanDag> {
    if depth == 0 || fan_in == 0 || fan_in > inputs.len() {
        return Err(Error::InvalidInput(format!("bad random dag shape: depth {depth}, fan-in {fan_in}")));
    }
    let mut dag = BooleanDag { inputs: inputs.to_vec(), outputs: outputs.to_vec(), gates: Vec::new() };
    let width = outputs.len().max(fan_in);
    let mut prev = inputs.to_vec();
    for t in 1..=depth {
        let names: Vec<String> =
            if t == depth { outputs.to_vec() } else { (0..width).map(|i| format!("w{t}.{i}")).collect() };
        for w in &names {
            let picks: Vec<String> = prev.choose_multiple(rng, fan_in).cloned().collect();
            dag.gates.push(random_lut(picks, w.clone(), rng));
        }
        prev = names;
    }
    Ok(dag)
}

/// Random depth-`depth`, fan-in-`fan_in` solver over `n` pairs whose gates
/// read wires within `reach` pair indices of their own.
pub fn random_local_solver<R: Rng + ?Sized>(n: usize, depth: usize, fan_in: usize, reach: usize, rng: &mut R) -> Result<BooleanDag> {
    if n == 0 || depth == 0 || fan_in == 0 {
        return Err(Error::InvalidInput("solver needs n, depth, fan-in >= 1".into()));
    }
    let mut dag = BooleanDag::default();
    for i in 1..=n {
        dag.inputs.extend(pair_wires('a', i));
        dag.inputs.extend(pair_wires('b', i));
    }
    let mut prev: Vec<(usize, String)> = dag.inputs.iter().enumerate().map(|(p, w)| (p / 4 + 1, w.clone())).collect();
    for t in 1..=depth {
        let mut next = Vec::with_capacity(4 * n);
        for i in 1..=n {
            let names: Vec<String> = if t == depth {
                [pair_wires('x', i), pair_wires('y', i)].concat()
            } else {
                (0..4).map(|c| format!("w{t}.{i}.{c}")).collect()
            };
            let near: Vec<&String> = prev.iter().filter(|(p, _)| p.abs_diff(i) <= reach).map(|(_, w)| w).collect();
            for w in names {
                let picks: Vec<String> = near.choose_multiple(rng, fan_in.min(near.len())).map(|s| (*s).clone()).collect();
                dag.gates.push(random_lut(picks, w.clone(), rng));
                next.push((i, w));
            }
        }
        prev = next;
    }
    dag.outputs = prev.into_iter().map(|(_, w)| w).collect();
    Ok(dag)
}

/// The lower bound `1 - 80 K^(2D) / n` on the event rate.
pub fn event_ec_bound(n: usize, fan_in: usize, depth: usize) -> f64 {
    1.0 - 80.0 * (fan_in as f64).powi(2 * depth as i32) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wire_cone_is_the_wire() {
        let dag = BooleanDag { inputs: vec!["a".into(), "b".into()], outputs: vec!["a".into()], gates: vec![] };
        assert_eq!(backward_lightcone(&dag, "a").unwrap(), BTreeSet::from(["a".to_string()]));
        assert!(backward_lightcone(&dag, "nope").is_err());
    }

    #[test]
    fn xor_tree_cone_meets_the_bound() {
        for depth in 1..=6 {
            let dag = xor_tree(depth);
            assert_eq!(backward_lightcone(&dag, &dag.outputs[0]).unwrap().len(), 1 << depth);
        }
    }

    #[test]
    fn random_dag_cones_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ins: Vec<String> = (0..400).map(|i| format!("i{i}")).collect();
        let outs: Vec<String> = (0..40).map(|i| format!("o{i}")).collect();
        let dag = random_dag(&ins, &outs, 5, 3, &mut rng).unwrap();
        for o in &dag.outputs {
            assert!(backward_lightcone(&dag, o).unwrap().len() <= 243);
        }
    }

    #[test]
    fn dense_and_wired_solvers() {
        let mut dense = BooleanDag::default();
        let mut wired = BooleanDag::default();
        for i in 1..=4 {
            for v in [pair_wires('a', i), pair_wires('b', i)].concat() {
                dense.inputs.push(v.clone());
                wired.inputs.push(v);
            }
        }
        for i in 1..=4 {
            for (o, src) in [('x', 'a'), ('y', 'b')] {
                for bit in 1..=2 {
                    let w = solver_wire(o, i, bit);
                    dense.gates.push(NetGate::new("xor", dense.inputs.clone(), w.clone()));
                    wired.gates.push(NetGate::new("copy", vec![solver_wire(src, i, bit)], w.clone()));
                    dense.outputs.push(w.clone());
                    wired.outputs.push(w);
                }
            }
        }
        for j in 1..=4 {
            for k in j + 1..=4 {
                assert!(!check_event_ec(&dense, j, k).unwrap());
                assert!(check_event_ec(&wired, j, k).unwrap());
            }
        }
        assert!(check_event_ec(&xor_tree(2), 1, 2).is_err());
    }
}
