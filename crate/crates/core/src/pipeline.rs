//! The fault-tolerant 1D Magic Square pipeline.
//!
//! Bare qubit `l` of the Magic Square circuit (`p_j` is `2(j-1)`, `q_j` is
//! `2(j-1)+1`) becomes surface-code block `l`. The Bell pair on
//! `(p_{2i-1}, p_{2i})` comes from cube `2(i-1)` and the pair on
//! `(q_{2i-1}, q_{2i})` from cube `2(i-1)+1`; odd `j` sits on face `u3 = 1`,
//! even `j` on face `u3 = r`.
//!
//! Two registers appear below. The logical register holds the `4n` blocks
//! back to back (`l * m + q`). The full register holds every cube site
//! (`cube * |C| + site`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind, InputBits, LayeredCliffordCircuit, ResolvedCircuit, ResolvedLayer};
use crate::cluster::{build_cluster, ClusterLattice};
use crate::error::{Error, Result};
use crate::magic_square::{check_relation, controlled_block, qubits_to_z_out, sample_msp_output, z_in_bits, MspInstance};
use crate::noise::{sample_qubit, ErrorHistory, NoiseSpec};
use crate::pauli::PauliOp;
use crate::surface_code::SurfaceCodeLayout;
use crate::tableau::StabilizerTableau;

/// Physical depth of the logical circuit: one layer for the Pauli/SWAP/CNOT
/// slice, five for the slice holding `CZ = Hbar CNOT Hbar`, two for the
/// final `Hbar`.
pub const LOGICAL_DEPTH: usize = 8;

/// Marker for instances drawn uniformly from `S` on every trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RandomFromS {
    #[default]
    #[serde(rename = "random-from-S")]
    RandomFromS,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceChoice {
    Random(RandomFromS),
    Fixed(MspInstance),
}

impl Default for InstanceChoice {
    fn default() -> Self {
        InstanceChoice::Random(RandomFromS::RandomFromS)
    }
}

/// How trials are simulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Exact sampling from the Pauli-frame description of the noisy run.
    #[default]
    Frame,
    /// Full stabilizer simulation of every cube and block.
    Tableau,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtConfig {
    pub n: usize,
    pub d: usize,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub instance: InstanceChoice,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub engine: Engine,
}

impl FtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.d < 2 || self.trials < 1 {
            return Err(Error::InvalidInput(format!(
                "need n >= 2, d >= 2, trials >= 1; got n={}, d={}, trials={}",
                self.n, self.d, self.trials
            )));
        }
        if let InstanceChoice::Fixed(inst) = self.instance {
            if inst.n != self.n {
                return Err(Error::InvalidInput(format!("instance has n={}, config has n={}", inst.n, self.n)));
            }
        }
        self.noise.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FtTrialResult {
    pub instance: MspInstance,
    /// One measured ancilla string per cube.
    pub s: Vec<Vec<bool>>,
    /// Block measurements in logical-register order.
    pub y: Vec<bool>,
    /// Decoded bits in `z_out` order.
    pub z: Vec<bool>,
    pub f_strings: Vec<Vec<bool>>,
    pub pass: bool,
}

/// Errors of one noisy run: per cube, the merged error before the ancilla
/// readout; on the logical register, the merged error before block readout.
#[derive(Clone, Debug, PartialEq)]
pub struct FtErrors {
    pub cubes: Vec<PauliOp>,
    pub logical: PauliOp,
}

/// Lattice, code and circuits for given `(n, d)`.
#[derive(Clone, Debug)]
pub struct FtSystem {
    n: usize,
    lattice: ClusterLattice,
    logical: LayeredCliffordCircuit,
    full: LayeredCliffordCircuit,
    /// Full-register site of each logical-register qubit.
    block_sites: Vec<usize>,
    /// Logical-register qubit of each `B` position, per cube.
    cube_to_logical: Vec<Vec<usize>>,
    ancilla_reference: Vec<bool>,
}

/// Cube index and face of block `l`.
pub fn block_home(l: usize) -> (usize, usize) {
    let (j, c) = (l / 2 + 1, l % 2);
    let i = (j + 1) / 2;
    (2 * (i - 1) + c, (j + 1) % 2)
}

impl FtSystem {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least two pairs, got {n}")));
        }
        let lattice = build_cluster(d)?;
        let m = lattice.layout().m();
        let nc = lattice.n_sites();
        let mut block_sites = Vec::with_capacity(4 * n * m);
        let mut cube_to_logical = vec![vec![0; 2 * m]; 2 * n];
        for l in 0..4 * n {
            let (cube, face) = block_home(l);
            for q in 0..m {
                block_sites.push(cube * nc + lattice.region_b()[face * m + q]);
                cube_to_logical[cube][face * m + q] = l * m + q;
            }
        }
        let logical = build_logical_circuit(n, lattice.layout())?;
        let ancilla_reference = ideal_ancilla_reference(&lattice)?;
        let mut sys = FtSystem {
            n,
            lattice,
            logical,
            full: LayeredCliffordCircuit::new(1)?,
            block_sites,
            cube_to_logical,
            ancilla_reference,
        };
        sys.full = sys.build_full_circuit()?;
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.lattice.d()
    }

    pub fn m(&self) -> usize {
        self.lattice.layout().m()
    }

    pub fn cubes(&self) -> usize {
        2 * self.n
    }

    pub fn lattice(&self) -> &ClusterLattice {
        &self.lattice
    }

    pub fn layout(&self) -> &SurfaceCodeLayout {
        self.lattice.layout()
    }

    /// `Cbar_b` on the logical register, controls symbolic.
    pub fn logical_circuit(&self) -> &LayeredCliffordCircuit {
        &self.logical
    }

    /// `W` on every cube followed by `Cbar_b` on the `B` sites.
    pub fn full_circuit(&self) -> &LayeredCliffordCircuit {
        &self.full
    }

    pub fn block_sites(&self) -> &[usize] {
        &self.block_sites
    }

    fn build_full_circuit(&self) -> Result<LayeredCliffordCircuit> {
        let nc = self.lattice.n_sites();
        let total = self.cubes() * nc;
        let mut c = LayeredCliffordCircuit::new(total)?;
        for layer in &self.lattice.resolved_w().layers {
            let mut gates = Vec::with_capacity(layer.len() * self.cubes());
            for cube in 0..self.cubes() {
                let off = cube * nc;
                gates.extend(layer.iter().map(|&(k, a, b)| make_gate(k, off + a, off + b, None)));
            }
            c.push_layer(gates)?;
        }
        let names = self.logical.input_names().to_vec();
        for layer in self.logical.layers() {
            let mut gates = Vec::with_capacity(layer.len());
            for g in layer {
                let control = g.control.map(|id| {
                    let ctl = self.logical.control(id);
                    let tests: Vec<(&str, bool)> =
                        ctl.bits.iter().zip(&ctl.pattern).map(|(&b, &v)| (names[b].as_str(), v)).collect();
                    c.add_control(&tests)
                });
                gates.push(make_gate(g.kind, self.block_sites[g.a], self.block_sites[g.b], control));
            }
            c.push_layer(gates)?;
        }
        c.set_coords(self.embedding())?;
        Ok(c)
    }

    /// 3D positions of the full register. Each cube's `(u1, u2)` plane is
    /// folded along the surface-code diagonal so paired sites coincide;
    /// cubes of the same pair index follow each other along `u3`, and the
    /// `q` cubes sit beside the `p` cubes.
    pub fn embedding(&self) -> Vec<[f64; 3]> {
        let nc = self.lattice.n_sites();
        let r = self.lattice.r();
        let side = 2 * self.d();
        let mut out = Vec::with_capacity(self.cubes() * nc);
        for cube in 0..self.cubes() {
            let (i, c) = (cube / 2, cube % 2);
            for s in 0..nc {
                let [u1, u2, u3] = self.lattice.site(s);
                let (a, b) = if u2 + 1 >= u1 { (u1, u2) } else { (u2 + 1, u1 - 1) };
                out.push([a as f64, (b + c * side) as f64, (i * (r + 1) + u3) as f64]);
            }
        }
        out
    }

    /// The ideal distribution of one cube's ancilla outcomes.
    fn sample_ideal_ancillas<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        let lat = &self.lattice;
        let mut s = self.ancilla_reference.clone();
        for site in 0..lat.n_sites() {
            if rng.gen::<bool>() {
                for v in lat.neigh(lat.site(site)) {
                    if let Some(a) = lat.a_position(v) {
                        s[a] ^= true;
                    }
                }
            }
        }
        s
    }

    /// Embeds per-cube operators on `B` into the logical register.
    pub fn to_logical_register(&self, per_cube: &[PauliOp]) -> PauliOp {
        let mut out = PauliOp::identity(4 * self.n * self.m());
        for (cube, p) in per_cube.iter().enumerate() {
            p.embed_into(&mut out, &self.cube_to_logical[cube]);
        }
        out
    }
}

fn make_gate(kind: GateKind, a: usize, b: usize, control: Option<usize>) -> Gate {
    let g = if kind.arity() == 1 { Gate::one(kind, a) } else { Gate::two(kind, a, b) };
    g.when(control)
}

/// One point in the support of the ideal ancilla distribution.
fn ideal_ancilla_reference(lat: &ClusterLattice) -> Result<Vec<bool>> {
    let mut t = StabilizerTableau::new(lat.n_sites())?;
    t.apply_resolved(lat.resolved_w())?;
    let mut s = Vec::with_capacity(lat.region_a().len());
    for &q in lat.region_a() {
        s.push(match t.measure_z_forced(q, false) {
            Ok(_) => false,
            Err(Error::ImpossibleOutcome(_)) => true,
            Err(e) => return Err(e),
        });
    }
    Ok(s)
}

/// The Magic Square circuit without its Bell-pair layers, each gate replaced
/// by its folded-code implementation on `4n` blocks of `m` qubits.
pub fn build_logical_circuit(n: usize, layout: &SurfaceCodeLayout) -> Result<LayeredCliffordCircuit> {
    let m = layout.m();
    let mut c = LayeredCliffordCircuit::new(4 * n * m)?;
    let block = controlled_block(&mut c, n);
    let shift = |layer: &ResolvedLayer, l: usize, control: Option<usize>| -> Vec<Gate> {
        layer.iter().map(|&(k, a, b)| make_gate(k, l * m + a, l * m + b, control)).collect()
    };
    let hbar = layout.h_layers();
    let zbar = &layout.z_layers()[0];

    let mut la = Vec::new();
    for g in &block.la {
        match g.kind {
            GateKind::Z => la.extend(shift(zbar, g.a, g.control)),
            GateKind::Swap | GateKind::Cnot => {
                la.extend(layout.transversal_layer(g.kind, g.a * m, g.b * m).into_iter().map(|(k, a, b)| make_gate(k, a, b, g.control)))
            }
            other => return Err(Error::InvalidInput(format!("unexpected {other:?} in the first slice"))),
        }
    }
    let mut lb: Vec<Vec<Gate>> = vec![Vec::new(); 5];
    for g in &block.lb {
        match g.kind {
            GateKind::H => {
                for (t, layer) in hbar.iter().enumerate() {
                    lb[t].extend(shift(layer, g.a, g.control));
                }
            }
            GateKind::Cz => {
                for (t, layer) in hbar.iter().enumerate() {
                    lb[t].extend(shift(layer, g.b, g.control));
                    lb[3 + t].extend(shift(layer, g.b, g.control));
                }
                lb[2].extend(
                    layout.transversal_layer(GateKind::Cnot, g.a * m, g.b * m).into_iter().map(|(k, a, b)| make_gate(k, a, b, g.control)),
                );
            }
            other => return Err(Error::InvalidInput(format!("unexpected {other:?} in the second slice"))),
        }
    }
    let mut lc: Vec<Vec<Gate>> = vec![Vec::new(); 2];
    for g in &block.lc {
        for (t, layer) in hbar.iter().enumerate() {
            lc[t].extend(shift(layer, g.a, g.control));
        }
    }
    c.push_layer(la)?;
    for layer in lb.into_iter().chain(lc) {
        c.push_layer(layer)?;
    }
    Ok(c)
}

/// `X(f) Z(h) ~ Cbar_b (Rec(s^1) (x) ...) Cbar_b^dagger` on the logical
/// register, returned as `(f, h)` split per block.
pub fn compute_fh(sys: &FtSystem, s: &[Vec<bool>], z_in: &[bool]) -> Result<(Vec<Vec<bool>>, Vec<Vec<bool>>)> {
    let resolved = sys.logical.resolve(&z_in_bits(sys.n, z_in)?)?;
    compute_fh_resolved(sys, s, &resolved)
}

fn compute_fh_resolved(sys: &FtSystem, s: &[Vec<bool>], resolved: &ResolvedCircuit) -> Result<(Vec<Vec<bool>>, Vec<Vec<bool>>)> {
    if s.len() != sys.cubes() {
        return Err(Error::DimensionMismatch { expected: sys.cubes(), got: s.len() });
    }
    let recs = s.iter().map(|si| sys.lattice.rec(si)).collect::<Result<Vec<_>>>()?;
    let mut p = sys.to_logical_register(&recs);
    resolved.conjugate(&mut p);
    let m = sys.m();
    let f = (0..4 * sys.n).map(|l| (0..m).map(|q| p.x(l * m + q)).collect()).collect();
    let h = (0..4 * sys.n).map(|l| (0..m).map(|q| p.z(l * m + q)).collect()).collect();
    Ok((f, h))
}

/// The X-part of the conjugated recovery, per block.
pub fn compute_f(sys: &FtSystem, s: &[Vec<bool>], z_in: &[bool]) -> Result<Vec<Vec<bool>>> {
    Ok(compute_fh(sys, s, z_in)?.0)
}

/// `z_l = Dec(y^l xor f^l)`, returned in `z_out` order.
pub fn decode_blocks(sys: &FtSystem, y: &[bool], f: &[Vec<bool>]) -> Result<Vec<bool>> {
    let m = sys.m();
    if y.len() != 4 * sys.n * m {
        return Err(Error::DimensionMismatch { expected: 4 * sys.n * m, got: y.len() });
    }
    let mut bits = Vec::with_capacity(4 * sys.n);
    for (l, fl) in f.iter().enumerate() {
        let u: Vec<bool> = (0..m).map(|q| y[l * m + q] ^ fl[q]).collect();
        bits.push(sys.layout().dec(&u)?);
    }
    Ok(qubits_to_z_out(sys.n, &bits))
}

impl FtErrors {
    pub fn sample<R: Rng + ?Sized>(sys: &FtSystem, spec: &NoiseSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let lat = &sys.lattice;
        let w_spec = NoiseSpec { p_out: 0.0, ..*spec };
        let mut cubes = Vec::with_capacity(sys.cubes());
        for _ in 0..sys.cubes() {
            let h = ErrorHistory::sample(lat.n_sites(), lat.resolved_w().depth(), &w_spec, rng)?;
            let mut e = h.merged(lat.resolved_w())?;
            let mut readout = PauliOp::identity(lat.n_sites());
            let mut ys = 0u8;
            for &a in lat.region_a() {
                let (x, z) = sample_qubit(spec.p_out, spec.model, rng);
                readout.set_x(a, x);
                readout.set_z(a, z);
                ys += (x && z) as u8;
            }
            readout.set_phase(ys & 3);
            e = readout.mul(&e)?;
            cubes.push(e);
        }
        Ok(FtErrors { cubes, logical: PauliOp::identity(4 * sys.n * sys.m()) })
    }

    /// Adds the logical-circuit errors for a resolved `Cbar_b`.
    fn sample_logical<R: Rng + ?Sized>(&mut self, resolved: &ResolvedCircuit, spec: &NoiseSpec, rng: &mut R) -> Result<()> {
        let l_spec = NoiseSpec { p_in: 0.0, ..*spec };
        let h = ErrorHistory::sample(resolved.n, resolved.depth(), &l_spec, rng)?;
        self.logical = h.merged(resolved)?;
        Ok(())
    }

    pub fn none(sys: &FtSystem) -> Self {
        let nc = sys.lattice.n_sites();
        FtErrors { cubes: vec![PauliOp::identity(nc); sys.cubes()], logical: PauliOp::identity(4 * sys.n * sys.m()) }
    }
}

/// Draws the instance and the errors of one trial.
pub fn sample_trial_setup<R: Rng + ?Sized>(
    sys: &FtSystem,
    choice: InstanceChoice,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<(MspInstance, ResolvedCircuit, FtErrors)> {
    let inst = match choice {
        InstanceChoice::Fixed(inst) => inst,
        InstanceChoice::Random(_) => MspInstance::random(sys.n, rng)?,
    };
    let resolved = sys.logical.resolve(&z_in_bits(sys.n, &inst.z_in())?)?;
    let mut errors = FtErrors::sample(sys, spec, rng)?;
    errors.sample_logical(&resolved, spec, rng)?;
    Ok((inst, resolved, errors))
}

/// Measurement record `(s, y)` of one run with the given errors, by full
/// stabilizer simulation.
pub fn simulate_tableau<R: Rng + ?Sized>(sys: &FtSystem, inst: &MspInstance, errors: &FtErrors, rng: &mut R) -> Result<(Vec<Vec<bool>>, Vec<bool>)> {
    let run = tableau_run(sys, inst, errors, None, rng)?;
    Ok((run.s, run.y))
}

struct TableauRun {
    s: Vec<Vec<bool>>,
    y: Vec<bool>,
    random_y: usize,
}

/// With `replay = Some((s, y))`, every outcome is forced to the given value,
/// `Rec(s)` is applied to the blocks after the ancilla readout, and an
/// impossible outcome is an error.
fn tableau_run<R: Rng + ?Sized>(
    sys: &FtSystem,
    inst: &MspInstance,
    errors: &FtErrors,
    replay: Option<(&[Vec<bool>], &[bool])>,
    rng: &mut R,
) -> Result<TableauRun> {
    let full = sys.full.resolve(&z_in_bits(sys.n, &inst.z_in())?)?;
    let lat = &sys.lattice;
    let nc = lat.n_sites();
    let mut t = StabilizerTableau::new(full.n)?;
    let w_depth = lat.resolved_w().depth();
    for layer in &full.layers[..w_depth] {
        for &(k, a, b) in layer {
            t.apply_gate(k, a, b)?;
        }
    }
    let mut e = PauliOp::identity(full.n);
    for (cube, ec) in errors.cubes.iter().enumerate() {
        let targets: Vec<usize> = (0..nc).map(|s| cube * nc + s).collect();
        ec.embed_into(&mut e, &targets);
    }
    t.apply_pauli(&e)?;
    let mut measure = |t: &mut StabilizerTableau, q: usize, forced: Option<bool>| -> Result<(bool, bool)> {
        match forced {
            Some(v) => Ok((v, t.measure_z_forced(q, v)?)),
            None => t.measure_z(q, rng),
        }
    };
    let mut s = vec![Vec::with_capacity(lat.region_a().len()); sys.cubes()];
    for (cube, sc) in s.iter_mut().enumerate() {
        for (i, &a) in lat.region_a().iter().enumerate() {
            sc.push(measure(&mut t, cube * nc + a, replay.map(|(rs, _)| rs[cube][i]))?.0);
        }
    }
    if replay.is_some() {
        let recs = s.iter().map(|si| lat.rec(si)).collect::<Result<Vec<_>>>()?;
        t.apply_pauli(&sys.to_logical_register(&recs).embed(full.n, &sys.block_sites))?;
    }
    for layer in &full.layers[w_depth..] {
        for &(k, a, b) in layer {
            t.apply_gate(k, a, b)?;
        }
    }
    t.apply_pauli(&errors.logical.embed(full.n, &sys.block_sites))?;
    let mut y = Vec::with_capacity(sys.block_sites.len());
    let mut random_y = 0;
    for (j, &q) in sys.block_sites.iter().enumerate() {
        let (v, det) = measure(&mut t, q, replay.map(|(_, ry)| ry[j]))?;
        y.push(v);
        random_y += usize::from(!det);
    }
    Ok(TableauRun { s, y, random_y })
}

/// Runs a trial twice with the same errors: once with `Rec` folded into `f`,
/// once with `Rec` applied to the blocks and `f = 0`. The second run is
/// forced to the outcomes `(s, y xor f)` of the first. Returns whether those
/// outcomes are possible with the same number of random block readouts, and
/// whether both decodings agree.
pub fn masked_identity_check<R: Rng + ?Sized>(sys: &FtSystem, inst: &MspInstance, errors: &FtErrors, rng: &mut R) -> Result<bool> {
    let resolved = sys.logical.resolve(&z_in_bits(sys.n, &inst.z_in())?)?;
    let folded = tableau_run(sys, inst, errors, None, rng)?;
    let (f, _) = compute_fh_resolved(sys, &folded.s, &resolved)?;
    let m = sys.m();
    let shifted: Vec<bool> = folded.y.iter().enumerate().map(|(j, &v)| v ^ f[j / m][j % m]).collect();
    let physical = match tableau_run(sys, inst, errors, Some((&folded.s, &shifted)), rng) {
        Ok(run) => run,
        Err(Error::ImpossibleOutcome(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let zero = vec![vec![false; m]; 4 * sys.n];
    let z_folded = decode_blocks(sys, &folded.y, &f)?;
    let z_physical = decode_blocks(sys, &physical.y, &zero)?;
    Ok(physical.random_y == folded.random_y && z_folded == z_physical)
}

/// Pass rate when every block readout is replaced by uniform bits.
pub fn uniform_y_pass_rate(sys: &FtSystem, cfg: &FtConfig) -> Result<f64> {
    use rayon::prelude::*;
    cfg.validate()?;
    let passes = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::trial_rng(cfg.seed, i as u64);
            let (inst, resolved, _) = sample_trial_setup(sys, cfg.instance, &NoiseSpec::none(), &mut rng)?;
            let s = (0..sys.cubes()).map(|_| (0..sys.lattice.region_a().len()).map(|_| rng.gen()).collect()).collect();
            let y = (0..4 * sys.n * sys.m()).map(|_| rng.gen()).collect();
            Ok(finish_trial(sys, inst, &resolved, s, y)?.pass)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(passes.iter().filter(|&&b| b).count() as f64 / cfg.trials as f64)
}

/// `Cbar Rep(E) Cbar^dagger` times the logical-circuit error: the residual
/// Pauli on the logical register after an ideal recovery.
pub fn residual_error(sys: &FtSystem, resolved: &ResolvedCircuit, errors: &FtErrors) -> Result<PauliOp> {
    let reps = errors
        .cubes
        .iter()
        .map(|e| {
            let r = sys.lattice.repair_from_error(e)?;
            Ok(sys.lattice.repair_operator(&r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut p = sys.to_logical_register(&reps);
    resolved.conjugate(&mut p);
    p.xor_assign(&errors.logical);
    Ok(p)
}

/// Logical bit flips (in bare-qubit order) that the residual error causes
/// after decoding.
pub fn logical_flips(sys: &FtSystem, residual: &PauliOp) -> Result<Vec<bool>> {
    let m = sys.m();
    (0..4 * sys.n)
        .map(|l| {
            let x: Vec<bool> = (0..m).map(|q| residual.x(l * m + q)).collect();
            sys.layout().dec(&x)
        })
        .collect()
}

/// Measurement record `(s, y)` of one run sampled from its Pauli-frame
/// description: ideal outcomes shifted by the propagated errors.
pub fn simulate_frame<R: Rng + ?Sized>(
    sys: &FtSystem,
    inst: &MspInstance,
    resolved: &ResolvedCircuit,
    errors: &FtErrors,
    rng: &mut R,
) -> Result<(Vec<Vec<bool>>, Vec<bool>)> {
    let lat = &sys.lattice;
    let mut s = Vec::with_capacity(sys.cubes());
    for e in &errors.cubes {
        let mut sc = sys.sample_ideal_ancillas(rng);
        for (i, &a) in lat.region_a().iter().enumerate() {
            sc[i] ^= e.x(a);
        }
        s.push(sc);
    }
    let recs = s.iter().map(|si| lat.rec(si)).collect::<Result<Vec<_>>>()?;
    let mut shift = sys.to_logical_register(&recs);
    resolved.conjugate(&mut shift);
    shift.xor_assign(&residual_error(sys, resolved, errors)?);

    let z_in = inst.z_in();
    let ideal = sample_msp_output(sys.n, &z_in, rng)?;
    let bare = crate::magic_square::z_out_to_qubits(sys.n, &ideal);
    let layout = sys.layout();
    let m = layout.m();
    let mut y = vec![false; 4 * sys.n * m];
    for (l, &bit) in bare.iter().enumerate() {
        if bit {
            for &q in layout.diag() {
                y[l * m + q] ^= true;
            }
        }
        for v in 0..layout.vertices().len() {
            if rng.gen::<bool>() {
                for &q in layout.vertex_support(v) {
                    y[l * m + q] ^= true;
                }
            }
        }
    }
    for (j, yj) in y.iter_mut().enumerate() {
        *yj ^= shift.x(j);
    }
    Ok((s, y))
}

/// Runs one trial end to end.
pub fn run_ft_trial<R: Rng + ?Sized>(sys: &FtSystem, cfg: &FtConfig, rng: &mut R) -> Result<FtTrialResult> {
    let (instance, resolved, errors) = sample_trial_setup(sys, cfg.instance, &cfg.noise, rng)?;
    let (s, y) = match cfg.engine {
        Engine::Frame => simulate_frame(sys, &instance, &resolved, &errors, rng)?,
        Engine::Tableau => simulate_tableau(sys, &instance, &errors, rng)?,
    };
    finish_trial(sys, instance, &resolved, s, y)
}

/// Decodes a measurement record and checks the relation.
pub fn finish_trial(sys: &FtSystem, instance: MspInstance, resolved: &ResolvedCircuit, s: Vec<Vec<bool>>, y: Vec<bool>) -> Result<FtTrialResult> {
    let (f, _) = compute_fh_resolved(sys, &s, resolved)?;
    let z = decode_blocks(sys, &y, &f)?;
    let pass = check_relation(&instance.z_in(), &z)?;
    Ok(FtTrialResult { instance, s, y, z, f_strings: f, pass })
}

/// All trials of a configuration; trial `i` uses the stream `(seed, i)`.
pub fn run_ft_trials(sys: &FtSystem, cfg: &FtConfig) -> Result<Vec<FtTrialResult>> {
    use rayon::prelude::*;
    cfg.validate()?;
    if sys.n != cfg.n || sys.d() != cfg.d {
        return Err(Error::InvalidInput("system does not match the configuration".into()));
    }
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_ft_trial(sys, cfg, &mut crate::trial_rng(cfg.seed, i as u64)))
        .collect()
}

/// Fraction of passing trials.
pub fn pass_rate(sys: &FtSystem, cfg: &FtConfig) -> Result<f64> {
    let results = run_ft_trials(sys, cfg)?;
    Ok(results.iter().filter(|r| r.pass).count() as f64 / results.len() as f64)
}

/// Largest `p` (to bisection resolution) in `[lo, hi]` whose pass rate is at
/// least `target`, with uniform noise of the given model.
pub fn locate_threshold(sys: &FtSystem, base: &FtConfig, target: f64, mut lo: f64, mut hi: f64, steps: usize) -> Result<f64> {
    let at = |p: f64| {
        let mut cfg = base.clone();
        cfg.noise = NoiseSpec::uniform(p, base.noise.model);
        pass_rate(sys, &cfg)
    };
    if at(lo)? < target {
        return Ok(0.0);
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if at(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// A grid of `(d, p)` points sharing `n`, instance choice, seed and engine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub ds: Vec<usize>,
    pub ps: Vec<f64>,
    #[serde(default = "default_model")]
    pub model: crate::noise::NoiseModel,
    #[serde(default)]
    pub instance: InstanceChoice,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub engine: Engine,
}

fn default_model() -> crate::noise::NoiseModel {
    crate::noise::NoiseModel::IidDepolarizing
}

impl SweepConfig {
    pub fn point(&self, d: usize, p: f64) -> FtConfig {
        FtConfig {
            n: self.n,
            d,
            noise: NoiseSpec::uniform(p, self.model),
            instance: self.instance,
            trials: self.trials,
            seed: self.seed,
            engine: self.engine,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ds.is_empty() || self.ps.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one d and one p".into()));
        }
        for &d in &self.ds {
            for &p in &self.ps {
                self.point(d, p).validate()?;
            }
        }
        Ok(())
    }
}

/// One CSV row of an ft sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub trial: usize,
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub pass: bool,
    pub s_hash: String,
    pub z_hex: String,
}

/// First 16 hex digits of the SHA-256 of the per-cube syndromes, each cube
/// written as a hex string and joined by `:`.
pub fn syndrome_hash(s: &[Vec<bool>]) -> String {
    use sha2::{Digest, Sha256};
    let text: Vec<String> = s.iter().map(|c| crate::magic_square::bits_to_hex(c)).collect();
    hex::encode(&Sha256::digest(text.join(":").as_bytes())[..8])
}

/// Every trial of every grid point, ordered by `d`, then `p`, then trial.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &d in &cfg.ds {
        let sys = FtSystem::new(cfg.n, d)?;
        for &p in &cfg.ps {
            let point = cfg.point(d, p);
            for (trial, r) in run_ft_trials(&sys, &point)?.into_iter().enumerate() {
                rows.push(SweepRow {
                    seed: cfg.seed,
                    trial,
                    n: cfg.n,
                    d,
                    p,
                    pass: r.pass,
                    s_hash: syndrome_hash(&r.s),
                    z_hex: crate::magic_square::bits_to_hex(&r.z),
                });
            }
        }
    }
    Ok(rows)
}

/// Largest Euclidean distance between the qubits of any gate, over every
/// control branch.
pub fn locality_audit(circuit: &LayeredCliffordCircuit) -> Result<f64> {
    let coords = circuit.coords().ok_or_else(|| Error::InvalidInput("circuit has no coordinates".into()))?;
    let mut worst: f64 = 0.0;
    for layer in circuit.layers() {
        for g in layer {
            if g.kind.arity() == 2 {
                let (p, q) = (coords[g.a], coords[g.b]);
                let dist = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                worst = worst.max(dist);
            }
        }
    }
    Ok(worst)
}

/// Input bits of the circuit for a given `z_in`.
pub fn inputs_for(n: usize, z_in: &[bool]) -> Result<InputBits> {
    z_in_bits(n, z_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magic_square::build_msp_circuit;
    use crate::noise::NoiseModel;

    #[test]
    fn block_homes_pair_up() {
        assert_eq!(block_home(0), (0, 0));
        assert_eq!(block_home(1), (1, 0));
        assert_eq!(block_home(2), (0, 1));
        assert_eq!(block_home(3), (1, 1));
        assert_eq!(block_home(4), (2, 0));
    }

    #[test]
    fn logical_circuit_depth() {
        let sys = FtSystem::new(2, 2).unwrap();
        assert_eq!(sys.logical_circuit().depth(), LOGICAL_DEPTH);
        assert_eq!(sys.full_circuit().depth(), 6 + LOGICAL_DEPTH);
        let bare = build_msp_circuit(2, &[false; 8]).unwrap();
        assert_eq!(bare.depth(), 5);
    }

    #[test]
    fn noiseless_trials_pass() {
        let sys = FtSystem::new(2, 2).unwrap();
        for engine in [Engine::Frame, Engine::Tableau] {
            let cfg = FtConfig { n: 2, d: 2, noise: NoiseSpec::none(), instance: InstanceChoice::default(), trials: 20, seed: 4, engine };
            assert!(run_ft_trials(&sys, &cfg).unwrap().iter().all(|r| r.pass));
        }
    }

    #[test]
    fn trivial_recovery_gives_zero_f() {
        let sys = FtSystem::new(2, 2).unwrap();
        let lat = sys.lattice();
        let zeros = vec![false; lat.region_a().len()];
        if lat.rec(&zeros).unwrap().is_identity() {
            let f = compute_f(&sys, &vec![zeros; 4], &[false; 8]).unwrap();
            assert!(f.iter().flatten().all(|&b| !b));
        }
    }

    fn corrected_record_is_ideal(d: usize, engine: Engine) {
        let sys = FtSystem::new(2, d).unwrap();
        let spec = NoiseSpec::uniform(0.02, NoiseModel::IidDepolarizing);
        let mut rng = crate::trial_rng(11, d as u64);
        for _ in 0..40 {
            let (inst, resolved, errors) = sample_trial_setup(&sys, InstanceChoice::default(), &spec, &mut rng).unwrap();
            let (s, y) = match engine {
                Engine::Frame => simulate_frame(&sys, &inst, &resolved, &errors, &mut rng).unwrap(),
                Engine::Tableau => simulate_tableau(&sys, &inst, &errors, &mut rng).unwrap(),
            };
            let res = finish_trial(&sys, inst, &resolved, s, y).unwrap();
            let flips = qubits_to_z_out(2, &logical_flips(&sys, &residual_error(&sys, &resolved, &errors).unwrap()).unwrap());
            let undone: Vec<bool> = res.z.iter().zip(&flips).map(|(a, b)| a ^ b).collect();
            assert!(check_relation(&inst.z_in(), &undone).unwrap());
        }
    }

    #[test]
    fn tableau_records_match_predicted_flips() {
        corrected_record_is_ideal(2, Engine::Tableau);
        corrected_record_is_ideal(3, Engine::Tableau);
    }

    #[test]
    fn frame_records_match_predicted_flips() {
        corrected_record_is_ideal(3, Engine::Frame);
    }

    #[test]
    fn folding_rec_into_f_matches_physical_rec() {
        let sys = FtSystem::new(2, 3).unwrap();
        let spec = NoiseSpec::uniform(0.01, NoiseModel::IidDepolarizing);
        let mut rng = crate::trial_rng(5, 0);
        for _ in 0..20 {
            let (inst, _, errors) = sample_trial_setup(&sys, InstanceChoice::default(), &spec, &mut rng).unwrap();
            assert!(masked_identity_check(&sys, &inst, &errors, &mut rng).unwrap());
        }
    }

    #[test]
    fn locality() {
        let lat = build_cluster(3).unwrap();
        let mut w = lat.circuit_w().clone();
        w.set_coords((0..lat.n_sites()).map(|s| lat.site(s).map(|u| u as f64)).collect()).unwrap();
        assert_eq!(locality_audit(&w).unwrap(), 1.0);
        let layout = SurfaceCodeLayout::new(3).unwrap();
        let mut h = layout.logical_h_circuit().unwrap();
        h.set_coords(layout.folded_coords()).unwrap();
        assert_eq!(locality_audit(&h).unwrap(), 0.0);
        let d3 = locality_audit(FtSystem::new(3, 3).unwrap().full_circuit()).unwrap();
        assert_eq!(locality_audit(FtSystem::new(6, 3).unwrap().full_circuit()).unwrap(), d3);
        assert!(locality_audit(&LayeredCliffordCircuit::new(2).unwrap()).is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = FtConfig {
            n: 3,
            d: 3,
            noise: NoiseSpec::uniform(0.001, NoiseModel::IidDepolarizing),
            instance: InstanceChoice::default(),
            trials: 10,
            seed: 1,
            engine: Engine::Frame,
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("random-from-S"));
        assert_eq!(serde_json::from_str::<FtConfig>(&text).unwrap(), cfg);
        let fixed = r#"{"n":2,"d":2,"noise":{"p_in":0,"p":0,"p_out":0},"instance":{"n":2,"j":1,"k":2,"alpha":"01","beta":"11"},"trials":1,"seed":0}"#;
        let parsed: FtConfig = serde_json::from_str(fixed).unwrap();
        assert!(matches!(parsed.instance, InstanceChoice::Fixed(_)));
        parsed.validate().unwrap();
    }
}
