//! Distance-`d` surface code with folded logical `H` and `S`, transversal
//! two-block gates, and the minimum-weight decoder `Dec`.
//!
//! Coordinates: qubit `(a, b)` with `1 <= a <= 2d-1`, `0 <= b <= 2d-2` and
//! `a + b` odd. Vertices (X checks) sit at even-even points, faces (Z checks)
//! at odd-odd points with `1 <= b <= 2d-3`. The diagonal is
//! `{(k+1, k)}` and the fold is `sigma(a, b) = (b+1, a-1)`.

use rand::Rng;

use crate::circuit::{Gate, GateKind, LayeredCliffordCircuit, ResolvedLayer};
use crate::error::{Error, Result};
use crate::matching::DefectGraph;
use crate::noise::{sample_qubit, NoiseModel};
use crate::pauli::PauliOp;

#[derive(Clone, Debug)]
pub struct SurfaceCodeLayout {
    d: usize,
    coords: Vec<(usize, usize)>,
    index: Vec<Option<usize>>,
    vertices: Vec<(usize, usize)>,
    faces: Vec<(usize, usize)>,
    vertex_support: Vec<Vec<usize>>,
    face_support: Vec<Vec<usize>>,
    diag: Vec<usize>,
    top: Vec<usize>,
    fold: Vec<usize>,
    face_graph: DefectGraph,
    face_edge_qubit: Vec<usize>,
    vertex_graph: DefectGraph,
    vertex_edge_qubit: Vec<usize>,
}

impl SurfaceCodeLayout {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("distance must be at least 2, got {d}")));
        }
        let side = 2 * d - 1;
        let mut coords = Vec::new();
        let mut index = vec![None; (side + 1) * (side + 1)];
        for a in 1..=side {
            for b in 0..side {
                if (a + b) % 2 == 1 {
                    index[a * (side + 1) + b] = Some(coords.len());
                    coords.push((a, b));
                }
            }
        }
        let mut layout = SurfaceCodeLayout {
            d,
            coords,
            index,
            vertices: Vec::new(),
            faces: Vec::new(),
            vertex_support: Vec::new(),
            face_support: Vec::new(),
            diag: Vec::new(),
            top: Vec::new(),
            fold: Vec::new(),
            face_graph: DefectGraph::new(0),
            face_edge_qubit: Vec::new(),
            vertex_graph: DefectGraph::new(0),
            vertex_edge_qubit: Vec::new(),
        };
        for a in (2..side).step_by(2) {
            for b in (0..side).step_by(2) {
                layout.vertices.push((a, b));
                let s = layout.neighbours(a, b);
                layout.vertex_support.push(s);
            }
        }
        for a in (1..=side).step_by(2) {
            for b in (1..side - 1).step_by(2) {
                layout.faces.push((a, b));
                let s = layout.neighbours(a, b);
                layout.face_support.push(s);
            }
        }
        let m = layout.coords.len();
        for q in 0..m {
            let (a, b) = layout.coords[q];
            let f = layout.qubit_at(b + 1, a - 1).expect("fold stays on the lattice");
            layout.fold.push(f);
            if b + 1 == a {
                layout.diag.push(q);
            } else if b >= a {
                layout.top.push(q);
            }
        }
        let (fg, fq) = check_graph(m, &layout.face_support);
        let (vg, vq) = check_graph(m, &layout.vertex_support);
        layout.face_graph = fg;
        layout.face_edge_qubit = fq;
        layout.vertex_graph = vg;
        layout.vertex_edge_qubit = vq;
        Ok(layout)
    }

    fn neighbours(&self, a: usize, b: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(4);
        let cand = [(a.wrapping_sub(1), b), (a + 1, b), (a, b.wrapping_sub(1)), (a, b + 1)];
        for (x, y) in cand {
            if let Some(q) = self.qubit_at(x, y) {
                out.push(q);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of physical qubits, `d^2 + (d-1)^2`.
    pub fn m(&self) -> usize {
        self.coords.len()
    }

    pub fn qubit_at(&self, a: usize, b: usize) -> Option<usize> {
        let side = 2 * self.d - 1;
        if a > side || b > side {
            return None;
        }
        self.index[a * (side + 1) + b]
    }

    pub fn coord(&self, q: usize) -> (usize, usize) {
        self.coords[q]
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    pub fn faces(&self) -> &[(usize, usize)] {
        &self.faces
    }

    pub fn vertex_support(&self, v: usize) -> &[usize] {
        &self.vertex_support[v]
    }

    pub fn face_support(&self, f: usize) -> &[usize] {
        &self.face_support[f]
    }

    pub fn vertex_index(&self, a: usize, b: usize) -> Option<usize> {
        self.vertices.iter().position(|&v| v == (a, b))
    }

    pub fn face_index(&self, a: usize, b: usize) -> Option<usize> {
        self.faces.iter().position(|&f| f == (a, b))
    }

    pub fn diag(&self) -> &[usize] {
        &self.diag
    }

    /// Qubits strictly above the diagonal.
    pub fn top(&self) -> &[usize] {
        &self.top
    }

    pub fn fold(&self, q: usize) -> usize {
        self.fold[q]
    }

    /// `A_v`.
    pub fn vertex_stabilizer(&self, v: usize) -> PauliOp {
        PauliOp::x_on(self.m(), self.vertex_support[v].iter().copied())
    }

    /// `B_f`.
    pub fn face_stabilizer(&self, f: usize) -> PauliOp {
        PauliOp::z_on(self.m(), self.face_support[f].iter().copied())
    }

    /// The face `sigma(v)` reached by folding vertex `v`.
    pub fn fold_vertex(&self, v: usize) -> usize {
        let (a, b) = self.vertices[v];
        self.face_index(b + 1, a - 1).expect("vertices fold onto faces")
    }

    /// The vertex `sigma(f)` reached by folding face `f`.
    pub fn fold_face(&self, f: usize) -> usize {
        let (a, b) = self.faces[f];
        self.vertex_index(b + 1, a - 1).expect("faces fold onto vertices")
    }

    pub fn logical_x(&self) -> PauliOp {
        PauliOp::x_on(self.m(), self.diag.iter().copied())
    }

    pub fn logical_z(&self) -> PauliOp {
        PauliOp::z_on(self.m(), self.diag.iter().copied())
    }

    /// All `A_v` followed by all `B_f`.
    pub fn stabilizers(&self) -> Vec<PauliOp> {
        let mut out: Vec<PauliOp> = (0..self.vertices.len()).map(|v| self.vertex_stabilizer(v)).collect();
        out.extend((0..self.faces.len()).map(|f| self.face_stabilizer(f)));
        out
    }

    /// Diagonal qubits carrying `S` (the rest carry `S^dagger`).
    fn s_sign(&self, q: usize) -> bool {
        self.coords[q].0 % 2 == 1
    }

    /// Layers of the logical `H`: a fold SWAP layer then transversal `H`.
    pub fn h_layers(&self) -> Vec<ResolvedLayer> {
        let swaps = self.top.iter().map(|&e| (GateKind::Swap, e, self.fold[e])).collect();
        let hs = (0..self.m()).map(|q| (GateKind::H, q, q)).collect();
        vec![swaps, hs]
    }

    /// Single layer of the logical `S`.
    pub fn s_layers(&self) -> Vec<ResolvedLayer> {
        let mut layer: ResolvedLayer = self
            .diag
            .iter()
            .map(|&q| (if self.s_sign(q) { GateKind::S } else { GateKind::Sdg }, q, q))
            .collect();
        layer.extend(self.top.iter().map(|&e| (GateKind::Cz, e, self.fold[e])));
        vec![layer]
    }

    /// Logical `Z`: physical `Z` on the diagonal.
    pub fn z_layers(&self) -> Vec<ResolvedLayer> {
        vec![self.diag.iter().map(|&q| (GateKind::Z, q, q)).collect()]
    }

    /// Transversal two-block gate between blocks at `off_a` and `off_b`.
    pub fn transversal_layer(&self, kind: GateKind, off_a: usize, off_b: usize) -> ResolvedLayer {
        (0..self.m()).map(|q| (kind, off_a + q, off_b + q)).collect()
    }

    /// Folded position of each qubit: pairs `(e, sigma(e))` share a site.
    pub fn folded_coords(&self) -> Vec<[f64; 3]> {
        (0..self.m())
            .map(|q| {
                let (a, b) = self.coords[q];
                let (fa, fb) = self.coords[self.fold[q]];
                let (x, y) = if b >= a - 1 { (a, b) } else { (fa, fb) };
                [x as f64, y as f64, 0.0]
            })
            .collect()
    }

    fn circuit_from(&self, layers: Vec<ResolvedLayer>) -> Result<LayeredCliffordCircuit> {
        let mut c = LayeredCliffordCircuit::new(self.m())?;
        for l in layers {
            c.push_layer(
                l.into_iter()
                    .map(|(k, a, b)| if k.arity() == 1 { Gate::one(k, a) } else { Gate::two(k, a, b) })
                    .collect(),
            )?;
        }
        c.set_coords(self.folded_coords())?;
        Ok(c)
    }

    pub fn logical_h_circuit(&self) -> Result<LayeredCliffordCircuit> {
        self.circuit_from(self.h_layers())
    }

    pub fn logical_s_circuit(&self) -> Result<LayeredCliffordCircuit> {
        self.circuit_from(self.s_layers())
    }

    /// Matching graph for X errors: vertices are faces, each qubit an edge
    /// (dangling on the top and bottom rows).
    pub fn face_graph(&self) -> &DefectGraph {
        &self.face_graph
    }

    /// Matching graph for Z errors: vertices are vertex checks.
    pub fn vertex_graph(&self) -> &DefectGraph {
        &self.vertex_graph
    }

    /// Faces violated by the X error `x`.
    pub fn face_syndrome(&self, x: &[bool]) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| self.face_support[f].iter().filter(|&&q| x[q]).count() % 2 == 1)
            .collect()
    }

    /// Vertices violated by the Z error `z`.
    pub fn vertex_syndrome(&self, z: &[bool]) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertex_support[v].iter().filter(|&&q| z[q]).count() % 2 == 1)
            .collect()
    }

    /// Minimum-weight string with the same face syndrome as `x`.
    pub fn cor(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: x.len() });
        }
        self.x_correction(&self.face_syndrome(x))
    }

    /// Minimum-weight string with the same vertex syndrome as `z`.
    pub fn cor_z(&self, z: &[bool]) -> Result<Vec<bool>> {
        if z.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: z.len() });
        }
        self.z_correction(&self.vertex_syndrome(z))
    }

    /// Minimum-weight X string violating exactly the listed faces.
    pub fn x_correction(&self, faces: &[usize]) -> Result<Vec<bool>> {
        let edges = self.face_graph.min_weight_matching(faces)?;
        let mut out = vec![false; self.m()];
        for e in edges {
            out[self.face_edge_qubit[e]] = true;
        }
        Ok(out)
    }

    /// Minimum-weight Z string violating exactly the listed vertices.
    pub fn z_correction(&self, vertices: &[usize]) -> Result<Vec<bool>> {
        let edges = self.vertex_graph.min_weight_matching(vertices)?;
        let mut out = vec![false; self.m()];
        for e in edges {
            out[self.vertex_edge_qubit[e]] = true;
        }
        Ok(out)
    }

    /// Parity of `x` on the diagonal.
    pub fn diag_parity(&self, x: &[bool]) -> bool {
        self.diag.iter().fold(false, |acc, &q| acc ^ x[q])
    }

    /// `Dec(x) = Parity(Cor(x) xor x)` over the diagonal.
    pub fn dec(&self, x: &[bool]) -> Result<bool> {
        let c = self.cor(x)?;
        Ok(self.diag.iter().fold(false, |acc, &q| acc ^ c[q] ^ x[q]))
    }
}

/// Graph whose vertices are checks and whose edges are qubits touching one
/// or two of them.
fn check_graph(m: usize, supports: &[Vec<usize>]) -> (DefectGraph, Vec<usize>) {
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (c, s) in supports.iter().enumerate() {
        for &q in s {
            touching[q].push(c);
        }
    }
    let mut g = DefectGraph::new(supports.len());
    let mut edge_qubit = Vec::with_capacity(m);
    for (q, t) in touching.iter().enumerate() {
        let r = match t.as_slice() {
            [a] => g.add_edge(*a, None),
            [a, b] => g.add_edge(*a, Some(*b)),
            _ => continue,
        };
        r.expect("check ids are in range");
        edge_qubit.push(q);
    }
    (g, edge_qubit)
}

/// Upper bound `3 d (6 sqrt(q))^d` on the memory failure probability.
pub fn failure_bound(d: usize, q: f64) -> f64 {
    3.0 * d as f64 * (6.0 * q.sqrt()).powi(d as i32)
}

/// `3 exp(-0.2 d)`.
pub fn threshold_failure_target(d: usize) -> f64 {
    3.0 * (-0.2 * d as f64).exp()
}

/// Number of decoding failures among `trials` iid X-noise samples at rate `q`.
pub fn memory_failures<R: Rng + ?Sized>(layout: &SurfaceCodeLayout, q: f64, trials: usize, rng: &mut R) -> Result<usize> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability(q));
    }
    let mut fails = 0;
    let mut v = vec![false; layout.m()];
    for _ in 0..trials {
        for b in v.iter_mut() {
            *b = sample_qubit(q, NoiseModel::IidXz, rng).0;
        }
        fails += layout.dec(&v)? as usize;
    }
    Ok(fails)
}

/// Monte-Carlo estimate of the memory failure rate.
pub fn memory_failure_rate<R: Rng + ?Sized>(d: usize, q: f64, trials: usize, rng: &mut R) -> Result<f64> {
    let layout = SurfaceCodeLayout::new(d)?;
    Ok(memory_failures(&layout, q, trials, rng)? as f64 / trials.max(1) as f64)
}

/// Memory failures over `trials` samples split into blocks of 4096; block
/// `i` draws from the stream `(seed, i)`.
pub fn memory_failures_seeded(layout: &SurfaceCodeLayout, q: f64, trials: usize, seed: u64) -> Result<usize> {
    use rayon::prelude::*;
    const BLOCK: usize = 4096;
    let blocks = trials.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|i| {
            let len = BLOCK.min(trials - i * BLOCK);
            memory_failures(layout, q, len, &mut crate::trial_rng(seed, i as u64))
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(counts.into_iter().sum())
}
