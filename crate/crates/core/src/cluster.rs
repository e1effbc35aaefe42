//! Single-shot logical Bell preparation on a 3D cluster lattice.
//!
//! Sites are `u = (u1, u2, u3)` with `1 <= u1, u3 <= r`, `0 <= u2 <= r-1`
//! and `r = 2d-1`, excluding the all-odd and all-even points. The two
//! surface codes sit on the faces `u3 = 1` and `u3 = r`; on both faces the
//! pair `(u1, u2)` is the surface-code coordinate `(a, b)`.
//!
//! `B` is indexed face-major: position `f * m + q` is surface-code qubit `q`
//! on face `f`. The S1 generators come in the order: vertex checks of face 0
//! and face 1, face checks of face 0 and face 1, then `S1^X` and `S1^Z`.

use std::collections::HashMap;

use rand::Rng;

use crate::circuit::{Gate, GateKind, LayeredCliffordCircuit, ResolvedCircuit};
use crate::error::{Error, Result};
use crate::gf2;
use crate::matching::DefectGraph;
use crate::noise::{ErrorHistory, NoiseModel, NoiseSpec};
use crate::pauli::{get_bit, set_bit, word_count, PauliOp};
use crate::surface_code::SurfaceCodeLayout;
use crate::tableau::StabilizerTableau;

pub type Site = [usize; 3];

fn parities(u: Site) -> [usize; 3] {
    [u[0] % 2, u[1] % 2, u[2] % 2]
}

/// A matching graph whose edges are lattice sites.
#[derive(Clone, Debug)]
pub struct SiteGraph {
    pub graph: DefectGraph,
    pub vertices: Vec<Site>,
    /// Site id carried by each edge.
    pub edge_sites: Vec<usize>,
}

/// One stabilizer generator of `W|0>` split as `(-1)^sign Z(a_support) (x) b_op`.
#[derive(Clone, Debug)]
struct Generator {
    op: PauliOp,
    a_support: Vec<usize>,
    b_op: PauliOp,
    sign: bool,
}

#[derive(Clone, Debug)]
pub struct ClusterLattice {
    d: usize,
    r: usize,
    layout: SurfaceCodeLayout,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    region_a: Vec<usize>,
    region_b: Vec<usize>,
    a_pos: Vec<Option<usize>>,
    b_pos: Vec<Option<usize>>,
    t_e: SiteGraph,
    t_o: SiteGraph,
    t_sc: SiteGraph,
    t_sc_star: SiteGraph,
    t_gl: SiteGraph,
    s0: Vec<Generator>,
    s1: Vec<Generator>,
    pure_errors: Vec<PauliOp>,
    w: LayeredCliffordCircuit,
    w_resolved: ResolvedCircuit,
}

/// Defect vertices of `T_e` and `T_o`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Defects {
    pub even: Vec<usize>,
    pub odd: Vec<usize>,
}

impl Defects {
    pub fn is_empty(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }
}

/// The factors of `Rep(E)` plus the residual S1 syndrome they reproduce.
#[derive(Clone, Debug, PartialEq)]
pub struct Repair {
    pub rep_x: PauliOp,
    pub rep_z: PauliOp,
    pub fail_x: bool,
    pub fail_z: bool,
    /// `syn1(E) xor syn1(M)`.
    pub residual: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct PrepOutcome {
    /// Measured bits over `A`, in `region_a` order.
    pub s: Vec<bool>,
    /// State of `B` after the recovery.
    pub b_state: StabilizerTableau,
    pub injected_error: PauliOp,
    pub diagnostics: Option<Repair>,
}

impl ClusterLattice {
    pub fn new(d: usize) -> Result<Self> {
        let layout = SurfaceCodeLayout::new(d)?;
        let r = 2 * d - 1;
        let mut sites = Vec::new();
        let mut index = HashMap::new();
        for u1 in 1..=r {
            for u2 in 0..r {
                for u3 in 1..=r {
                    let p = parities([u1, u2, u3]);
                    if p == [1, 1, 1] || p == [0, 0, 0] {
                        continue;
                    }
                    index.insert([u1, u2, u3], sites.len());
                    sites.push([u1, u2, u3]);
                }
            }
        }
        let m = layout.m();
        let mut region_b = Vec::with_capacity(2 * m);
        for u3 in [1, r] {
            for q in 0..m {
                let (a, b) = layout.coord(q);
                region_b.push(index[&[a, b, u3]]);
            }
        }
        let mut b_pos = vec![None; sites.len()];
        for (i, &s) in region_b.iter().enumerate() {
            b_pos[s] = Some(i);
        }
        let region_a: Vec<usize> = (0..sites.len()).filter(|&s| b_pos[s].is_none()).collect();
        let mut a_pos = vec![None; sites.len()];
        for (i, &s) in region_a.iter().enumerate() {
            a_pos[s] = Some(i);
        }

        let on_face = |u: &Site| u[2] == 1 || u[2] == r;
        let all_points = || {
            (1..=r).flat_map(move |u1| (0..r).flat_map(move |u2| (1..=r).map(move |u3| [u1, u2, u3])))
        };
        let of_pattern = |pat: [usize; 3]| all_points().filter(move |&u| parities(u) == pat);
        let mixed = |odd_count: usize| {
            sites.iter().enumerate().filter(move |(_, u)| parities(**u).iter().sum::<usize>() == odd_count).map(|(i, _)| i)
        };

        let te_vertices: Vec<Site> = of_pattern([0, 0, 0]).collect();
        let te_edges: Vec<usize> = mixed(1).collect();
        let t_e = site_graph(&sites, te_vertices, &te_edges, [0, 0, 0]);

        let to_vertices: Vec<Site> = of_pattern([1, 1, 1]).filter(|u| !on_face(u)).collect();
        let to_edges: Vec<usize> = mixed(2).filter(|&i| !on_face(&sites[i])).collect();
        let t_o = site_graph(&sites, to_vertices, &to_edges, [1, 1, 1]);

        let mut sc_vertices = Vec::new();
        let mut sc_star_vertices = Vec::new();
        for u3 in [1, r] {
            sc_vertices.extend(layout.vertices().iter().map(|&(a, b)| [a, b, u3]));
            sc_star_vertices.extend(layout.faces().iter().map(|&(a, b)| [a, b, u3]));
        }
        let t_sc = site_graph(&sites, sc_vertices, &region_b, [0, 0, 1]);
        let t_sc_star = site_graph(&sites, sc_star_vertices, &region_b, [1, 1, 1]);
        let t_gl = glue(&t_e, &t_sc, &sites);

        let mut lat = ClusterLattice {
            d,
            r,
            layout,
            sites,
            index,
            region_a,
            region_b,
            a_pos,
            b_pos,
            t_e,
            t_o,
            t_sc,
            t_sc_star,
            t_gl,
            s0: Vec::new(),
            s1: Vec::new(),
            pure_errors: Vec::new(),
            w: LayeredCliffordCircuit::new(1)?,
            w_resolved: ResolvedCircuit { n: 1, layers: Vec::new() },
        };
        lat.build_generators()?;
        lat.pure_errors = pure_error_basis(&lat.s1.iter().map(|g| g.b_op.clone()).collect::<Vec<_>>())?;
        lat.w = lat.build_w()?;
        lat.w_resolved = lat.w.resolve(&Default::default())?;
        Ok(lat)
    }

    fn build_generators(&mut self) -> Result<()> {
        let mut s0 = Vec::new();
        for u in self.t_e.vertices.iter().chain(&self.t_o.vertices) {
            s0.push(self.product_of(&self.neigh(*u))?);
        }
        let r = self.r;
        let mut s1 = Vec::new();
        for u in &self.t_sc.vertices {
            s1.push(self.product_of(&[self.index[u]])?);
        }
        for u in &self.t_sc_star.vertices {
            let above = if u[2] == 1 { [u[0], u[1], 2] } else { [u[0], u[1], r - 1] };
            let mut factors = vec![self.index[&above]];
            factors.extend(self.neigh(*u).into_iter().filter(|&v| self.b_pos[v].is_some()));
            s1.push(self.product_of(&factors)?);
        }
        let rough: Vec<usize> = self
            .t_e
            .edge_sites
            .iter()
            .copied()
            .filter(|&s| {
                let u = self.sites[s];
                u[0] == 1 && u[1] % 2 == 0 && u[2] % 2 == 0
            })
            .collect();
        s1.push(self.product_of(&rough)?);
        let column: Vec<usize> = (0..self.sites.len())
            .filter(|&s| {
                let u = self.sites[s];
                u[0] % 2 == 1 && u[1] == 0 && u[2] % 2 == 1
            })
            .collect();
        s1.push(self.product_of(&column)?);
        for g in &s0 {
            if !g.b_op.is_identity() {
                return Err(Error::InvalidInput("S0 generator acts on B".into()));
            }
        }
        self.s0 = s0;
        self.s1 = s1;
        Ok(())
    }

    /// `prod G_v` over the listed sites, split into its `A` and `B` parts.
    fn product_of(&self, factors: &[usize]) -> Result<Generator> {
        let mut op = PauliOp::identity(self.sites.len());
        for &v in factors {
            op.mul_assign_right(&self.g_u(v));
        }
        let mut a_support = Vec::new();
        for (i, &s) in self.region_a.iter().enumerate() {
            if op.x(s) {
                return Err(Error::InvalidInput(format!("generator has X on ancilla site {:?}", self.sites[s])));
            }
            if op.z(s) {
                a_support.push(i);
            }
        }
        let b_op = op.restrict(&self.region_b);
        let ys = (0..b_op.n()).filter(|&q| b_op.x(q) && b_op.z(q)).count();
        if ys > 0 || op.phase() % 2 == 1 {
            return Err(Error::InvalidInput("generator is not Z on A times an X/Z-type Pauli on B".into()));
        }
        let sign = op.phase() == 2;
        let mut b_op = b_op;
        b_op.set_phase(0);
        Ok(Generator { op, a_support, b_op, sign })
    }

    /// `W = H^n (prod CZ) H^n` with the CZs split into four matchings.
    fn build_w(&self) -> Result<LayeredCliffordCircuit> {
        let n = self.sites.len();
        let mut c = LayeredCliffordCircuit::new(n)?;
        let hs = || (0..n).map(|q| Gate::one(GateKind::H, q)).collect::<Vec<_>>();
        let mut colours: [Vec<Gate>; 4] = Default::default();
        for (i, &u) in self.sites.iter().enumerate() {
            for j in 0..3 {
                let mut v = u;
                v[j] += 1;
                let Some(&k) = self.index.get(&v) else { continue };
                // `k_odd` is the odd axis of whichever endpoint has two even coordinates.
                let e_site = if parities(u).iter().sum::<usize>() == 1 { u } else { v };
                let k_odd = (0..3).find(|&a| e_site[a] % 2 == 1).expect("mixed parity site");
                let class = 2 * usize::from((j + 3 - k_odd) % 3 == 1) + u[j] % 2;
                colours[class].push(Gate::two(GateKind::Cz, i, k));
            }
        }
        c.push_layer(hs())?;
        for layer in colours {
            c.push_layer(layer)?;
        }
        c.push_layer(hs())?;
        c.set_coords(self.sites.iter().map(|u| [u[0] as f64, u[1] as f64, u[2] as f64]).collect())?;
        Ok(c)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn layout(&self) -> &SurfaceCodeLayout {
        &self.layout
    }

    /// Number of sites `|C|`.
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, i: usize) -> Site {
        self.sites[i]
    }

    pub fn site_index(&self, u: Site) -> Option<usize> {
        self.index.get(&u).copied()
    }

    pub fn region_a(&self) -> &[usize] {
        &self.region_a
    }

    /// Sites of `B` in face-major surface-code order.
    pub fn region_b(&self) -> &[usize] {
        &self.region_b
    }

    pub fn a_position(&self, site: usize) -> Option<usize> {
        self.a_pos[site]
    }

    pub fn b_position(&self, site: usize) -> Option<usize> {
        self.b_pos[site]
    }

    /// Sites of `C` at distance one from `u` (which need not be in `C`).
    pub fn neigh(&self, u: Site) -> Vec<usize> {
        let mut out = Vec::with_capacity(6);
        for j in 0..3 {
            for up in [false, true] {
                let mut v = u;
                if up {
                    v[j] += 1;
                } else if v[j] == 0 {
                    continue;
                } else {
                    v[j] -= 1;
                }
                if let Some(&k) = self.index.get(&v) {
                    out.push(k);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn t_e(&self) -> &SiteGraph {
        &self.t_e
    }

    pub fn t_o(&self) -> &SiteGraph {
        &self.t_o
    }

    pub fn t_sc(&self) -> &SiteGraph {
        &self.t_sc
    }

    pub fn t_sc_star(&self) -> &SiteGraph {
        &self.t_sc_star
    }

    /// `T_e` with its dangling edges at `u3 = 1, r` attached to `T_sc`.
    pub fn t_gl(&self) -> &SiteGraph {
        &self.t_gl
    }

    /// `G_u = Z_u prod_{v ~ u} X_v`.
    pub fn g_u(&self, site: usize) -> PauliOp {
        let mut g = PauliOp::x_on(self.sites.len(), self.neigh(self.sites[site]));
        g.set_z(site, true);
        g
    }

    pub fn circuit_w(&self) -> &LayeredCliffordCircuit {
        &self.w
    }

    pub fn resolved_w(&self) -> &ResolvedCircuit {
        &self.w_resolved
    }

    /// S0 generators on `C`, signs included.
    pub fn s0_generators(&self) -> Vec<PauliOp> {
        self.s0.iter().map(|g| g.op.clone()).collect()
    }

    /// S1 generators on `C`, signs included.
    pub fn s1_generators(&self) -> Vec<PauliOp> {
        self.s1.iter().map(|g| g.op.clone()).collect()
    }

    /// The stabilizers `B^i` of the logical Bell state: S1 restricted to `B`.
    pub fn bell_stabilizers(&self) -> Vec<PauliOp> {
        self.s1.iter().map(|g| g.b_op.clone()).collect()
    }

    pub fn s1_x_index(&self) -> usize {
        self.s1.len() - 2
    }

    pub fn s1_z_index(&self) -> usize {
        self.s1.len() - 1
    }

    pub fn pure_errors(&self) -> &[PauliOp] {
        &self.pure_errors
    }

    /// The ideal logical Bell state on `B`.
    pub fn bell_state(&self) -> Result<StabilizerTableau> {
        StabilizerTableau::from_stabilizers(&self.bell_stabilizers())
    }

    fn check_s(&self, s: &[bool]) -> Result<()> {
        if s.len() != self.region_a.len() {
            return Err(Error::DimensionMismatch { expected: self.region_a.len(), got: s.len() });
        }
        Ok(())
    }

    fn defects_from(&self, bits: impl Fn(usize) -> bool) -> Defects {
        let ne = self.t_e.vertices.len();
        let mut out = Defects::default();
        for i in (0..self.s0.len()).filter(|&i| bits(i)) {
            if i < ne {
                out.even.push(i);
            } else {
                out.odd.push(i - ne);
            }
        }
        out
    }

    /// Syndrome read from the measured ancillas.
    pub fn syn0(&self, s: &[bool]) -> Result<Defects> {
        self.check_s(s)?;
        Ok(self.defects_from(|i| self.s0[i].a_support.iter().fold(self.s0[i].sign, |acc, &a| acc ^ s[a])))
    }

    /// Generators of S0 anticommuting with `e` (a Pauli on `C`).
    pub fn syn0_of_error(&self, e: &PauliOp) -> Result<Defects> {
        self.check_c(e)?;
        Ok(self.defects_from(|i| self.s0[i].op.anticommutes(e)))
    }

    fn check_c(&self, e: &PauliOp) -> Result<()> {
        if e.n() != self.sites.len() {
            return Err(Error::DimensionMismatch { expected: self.sites.len(), got: e.n() });
        }
        Ok(())
    }

    /// Minimum-weight X error on `A` with the given S0 syndrome, as a mask
    /// over `A`.
    pub fn proxy_m(&self, defects: &Defects) -> Result<Vec<bool>> {
        let mut m = vec![false; self.region_a.len()];
        for (graph, defs) in [(&self.t_e, &defects.even), (&self.t_o, &defects.odd)] {
            for e in graph.graph.min_weight_matching(defs)? {
                let a = self.a_pos[graph.edge_sites[e]].expect("matching edges lie in A");
                m[a] ^= true;
            }
        }
        Ok(m)
    }

    /// S1 syndrome of an X error on `A` given as a mask.
    pub fn syn1_of_mask(&self, m: &[bool]) -> Vec<bool> {
        self.s1.iter().map(|g| g.a_support.iter().fold(false, |acc, &a| acc ^ m[a])).collect()
    }

    /// S1 syndrome of a Pauli on `C`.
    pub fn syn1_of_error(&self, e: &PauliOp) -> Result<Vec<bool>> {
        self.check_c(e)?;
        Ok(self.s1.iter().map(|g| g.op.anticommutes(e)).collect())
    }

    /// `sigma_i`: the eigenvalue bit of `B^i` after measuring `A`.
    pub fn sigma(&self, s: &[bool]) -> Result<Vec<bool>> {
        self.check_s(s)?;
        Ok(self.s1.iter().map(|g| g.a_support.iter().fold(g.sign, |acc, &a| acc ^ s[a])).collect())
    }

    /// The product of pure errors selected by a target S1 syndrome.
    pub fn pauli_for_syndrome(&self, target: &[bool]) -> PauliOp {
        let mut out = PauliOp::identity(self.region_b.len());
        for (i, _) in target.iter().enumerate().filter(|(_, &t)| t) {
            out.xor_assign(&self.pure_errors[i]);
        }
        let ys = (0..out.n()).filter(|&q| out.x(q) && out.z(q)).count();
        out.set_phase((ys % 4) as u8);
        out
    }

    /// `Rec(s)`: the Pauli on `B` with `syn1(Rec) = sigma(s) xor syn1(M(s))`.
    pub fn rec(&self, s: &[bool]) -> Result<PauliOp> {
        let sigma = self.sigma(s)?;
        let m = self.proxy_m(&self.syn0(s)?)?;
        let target: Vec<bool> = sigma.iter().zip(self.syn1_of_mask(&m)).map(|(a, b)| a ^ b).collect();
        Ok(self.pauli_for_syndrome(&target))
    }

    /// Splits `Rep(E)` into matched and logical parts.
    pub fn diagnose_repair(&self, e: &PauliOp, s: &[bool]) -> Result<Repair> {
        let m = self.proxy_m(&self.syn0(s)?)?;
        self.repair_with_proxy(e, &m)
    }

    /// `diagnose_repair` with the S0 syndrome read off `e` itself, which is
    /// what the ancilla outcomes give in every run.
    pub fn repair_from_error(&self, e: &PauliOp) -> Result<Repair> {
        let m = self.proxy_m(&self.syn0_of_error(e)?)?;
        self.repair_with_proxy(e, &m)
    }

    fn repair_with_proxy(&self, e: &PauliOp, m: &[bool]) -> Result<Repair> {
        let syn_e = self.syn1_of_error(e)?;
        let residual: Vec<bool> = syn_e.iter().zip(self.syn1_of_mask(m)).map(|(a, b)| a ^ b).collect();
        let nv = self.t_sc.vertices.len();
        let nf = self.t_sc_star.vertices.len();
        let nb = self.region_b.len();
        let vdefects: Vec<usize> = (0..nv).filter(|&i| residual[i]).collect();
        let fdefects: Vec<usize> = (0..nf).filter(|&i| residual[nv + i]).collect();
        let mut rep_z = PauliOp::identity(nb);
        for edge in self.t_sc.graph.min_weight_matching(&vdefects)? {
            rep_z.flip_z(self.b_pos[self.t_sc.edge_sites[edge]].expect("T_sc edges lie in B"));
        }
        let mut rep_x = PauliOp::identity(nb);
        for edge in self.t_sc_star.graph.min_weight_matching(&fdefects)? {
            rep_x.flip_x(self.b_pos[self.t_sc_star.edge_sites[edge]].expect("T_sc* edges lie in B"));
        }
        let fail_z = residual[self.s1_x_index()] ^ self.s1[self.s1_x_index()].b_op.anticommutes(&rep_z);
        let fail_x = residual[self.s1_z_index()] ^ self.s1[self.s1_z_index()].b_op.anticommutes(&rep_x);
        Ok(Repair { rep_x, rep_z, fail_x, fail_z, residual })
    }

    /// `Rep(E) = Rep_X Rep_Xbar Rep_Z Rep_Zbar` as one Pauli on `B`.
    pub fn repair_operator(&self, rep: &Repair) -> PauliOp {
        let m = self.layout.m();
        let face0: Vec<usize> = (0..m).collect();
        let mut out = rep.rep_x.clone();
        if rep.fail_x {
            out.xor_assign(&self.layout.logical_x().embed(2 * m, &face0));
        }
        out.xor_assign(&rep.rep_z);
        if rep.fail_z {
            out.xor_assign(&self.layout.logical_z().embed(2 * m, &face0));
        }
        let ys = (0..out.n()).filter(|&q| out.x(q) && out.z(q)).count();
        out.set_phase((ys % 4) as u8);
        out
    }

    /// Eigenvalue bits of every `B^i` in a state on `B` (1 for `-1`).
    pub fn classify_state(&self, b_state: &StabilizerTableau) -> Result<Vec<bool>> {
        self.s1
            .iter()
            .map(|g| match b_state.expectation(&g.b_op)? {
                Some(v) => Ok(v < 0),
                None => Err(Error::NotAStabilizerState("B^i has zero expectation".into())),
            })
            .collect()
    }

    /// Logical failure flags `(fail_x, fail_z)` of a residual S1 syndrome,
    /// found with the per-face surface-code decoders. Where minimum-weight
    /// corrections tie, this can differ from the flags of [`Repair`].
    pub fn logical_failure(&self, residual: &[bool]) -> Result<(bool, bool)> {
        if residual.len() != self.s1.len() {
            return Err(Error::DimensionMismatch { expected: self.s1.len(), got: residual.len() });
        }
        let nv = self.layout.vertices().len();
        let nf = self.layout.faces().len();
        let m = self.layout.m();
        let sx = &self.s1[self.s1_x_index()].b_op;
        let sz = &self.s1[self.s1_z_index()].b_op;
        let mut fail_z = residual[self.s1_x_index()];
        let mut fail_x = residual[self.s1_z_index()];
        for f in 0..2 {
            let vdef: Vec<usize> = (0..nv).filter(|&v| residual[f * nv + v]).collect();
            let fdef: Vec<usize> = (0..nf).filter(|&k| residual[2 * nv + f * nf + k]).collect();
            for (q, hit) in self.layout.z_correction(&vdef)?.into_iter().enumerate() {
                fail_z ^= hit && sx.x(f * m + q);
            }
            for (q, hit) in self.layout.x_correction(&fdef)?.into_iter().enumerate() {
                fail_x ^= hit && sz.z(f * m + q);
            }
        }
        Ok((fail_x, fail_z))
    }
}

/// Builds the lattice for distance `d >= 2`.
pub fn build_cluster(d: usize) -> Result<ClusterLattice> {
    ClusterLattice::new(d)
}

/// Each edge site joins the vertices one step away along the axis where its
/// parity differs from `pattern`; missing endpoints make the edge dangling.
fn site_graph(sites: &[Site], vertices: Vec<Site>, edges: &[usize], pattern: [usize; 3]) -> SiteGraph {
    let vmap: HashMap<Site, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut graph = DefectGraph::new(vertices.len());
    let mut edge_sites = Vec::with_capacity(edges.len());
    for &e in edges {
        let u = sites[e];
        let p = parities(u);
        let axis = (0..3).find(|&k| p[k] != pattern[k]).expect("edge site differs from the vertex pattern");
        let mut ends = Vec::with_capacity(2);
        for up in [false, true] {
            let mut v = u;
            if up {
                v[axis] += 1;
            } else if v[axis] == 0 {
                continue;
            } else {
                v[axis] -= 1;
            }
            if let Some(&i) = vmap.get(&v) {
                ends.push(i);
            }
        }
        let added = match ends.as_slice() {
            [a] => graph.add_edge(*a, None),
            [a, b] => graph.add_edge(*a, Some(*b)),
            _ => continue,
        };
        added.expect("vertex ids are in range");
        edge_sites.push(e);
    }
    SiteGraph { graph, vertices, edge_sites }
}

fn glue(t_e: &SiteGraph, t_sc: &SiteGraph, sites: &[Site]) -> SiteGraph {
    let ne = t_e.vertices.len();
    let sc_index: HashMap<Site, usize> = t_sc.vertices.iter().enumerate().map(|(i, &v)| (v, ne + i)).collect();
    let mut vertices = t_e.vertices.clone();
    vertices.extend_from_slice(&t_sc.vertices);
    let mut graph = DefectGraph::new(vertices.len());
    let mut edge_sites = Vec::new();
    for (id, &site) in t_e.edge_sites.iter().enumerate() {
        let (a, b) = t_e.graph.edge(id).expect("edge ids are dense");
        let b = b.or_else(|| sc_index.get(&sites[site]).copied());
        graph.add_edge(a, b).expect("vertex ids are in range");
        edge_sites.push(site);
    }
    for (id, &site) in t_sc.edge_sites.iter().enumerate() {
        let (a, b) = t_sc.graph.edge(id).expect("edge ids are dense");
        graph.add_edge(ne + a, b.map(|b| ne + b)).expect("vertex ids are in range");
        edge_sites.push(site);
    }
    SiteGraph { graph, vertices, edge_sites }
}

/// For independent generators `B^1..B^k` on `k` qubits, Paulis `T^i` with
/// `T^i` anticommuting with `B^j` exactly when `i = j`.
fn pure_error_basis(gens: &[PauliOp]) -> Result<Vec<PauliOp>> {
    let k = gens.len();
    let n = gens.first().map_or(0, PauliOp::n);
    let cols = 2 * n;
    let w = word_count(cols);
    // Row i holds (z | x) of B^i so a dot product with (x | z) is symplectic.
    let mut rows: Vec<Vec<u64>> = gens
        .iter()
        .map(|g| {
            let mut r = vec![0u64; w];
            for q in 0..n {
                set_bit(&mut r, q, g.z(q));
                set_bit(&mut r, n + q, g.x(q));
            }
            r
        })
        .collect();
    let mut companion = gf2::identity_rows(k);
    let pivots = gf2::rref(&mut rows, cols, &mut companion);
    if pivots.len() != k {
        return Err(Error::NotAStabilizerState("Bell stabilizers are dependent".into()));
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut t = PauliOp::identity(n);
        for (row, &p) in pivots.iter().enumerate() {
            if get_bit(&companion[row], i) {
                if p < n {
                    t.flip_x(p);
                } else {
                    t.flip_z(p - n);
                }
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// Samples the error of one preparation run, merged to just before the
/// ancilla measurement.
pub fn sample_prep_error<R: Rng + ?Sized>(lat: &ClusterLattice, spec: &NoiseSpec, rng: &mut R) -> Result<PauliOp> {
    let h = ErrorHistory::sample(lat.n_sites(), lat.w_resolved.depth(), spec, rng)?;
    h.merged(&lat.w_resolved)
}

/// Simulates `W`, the merged error, the ancilla measurement and `Rec(s)`.
pub fn run_bell_prep<R: Rng + ?Sized>(lat: &ClusterLattice, spec: &NoiseSpec, rng: &mut R) -> Result<PrepOutcome> {
    let e = sample_prep_error(lat, spec, rng)?;
    run_bell_prep_with_error(lat, e, rng)
}

/// [`run_bell_prep`] with a given error on `C`.
pub fn run_bell_prep_with_error<R: Rng + ?Sized>(lat: &ClusterLattice, e: PauliOp, rng: &mut R) -> Result<PrepOutcome> {
    let mut t = StabilizerTableau::new(lat.n_sites())?;
    t.apply_resolved(&lat.w_resolved)?;
    t.apply_pauli(&e)?;
    let mut s = Vec::with_capacity(lat.region_a.len());
    for &q in &lat.region_a {
        s.push(t.measure_z(q, rng)?.0);
    }
    let rec = lat.rec(&s)?;
    t.apply_pauli(&rec.embed(lat.n_sites(), &lat.region_b))?;
    let b_state = t.reduced_to(&lat.region_b)?;
    let diagnostics = Some(lat.diagnose_repair(&e, &s)?);
    Ok(PrepOutcome { s, b_state, injected_error: e, diagnostics })
}

/// Counts over many preparation runs.
#[derive(Clone, Debug, PartialEq)]
pub struct BellPrepSummary {
    pub d: usize,
    pub p: f64,
    pub model: NoiseModel,
    pub trials: usize,
    pub logical_x_fail: usize,
    pub logical_z_fail: usize,
    pub any_fail: usize,
    pub mean_rep_weight: f64,
}

/// One preparation run judged by the repair decomposition alone.
pub fn bell_prep_frame_trial<R: Rng + ?Sized>(lat: &ClusterLattice, spec: &NoiseSpec, rng: &mut R) -> Result<Repair> {
    let e = sample_prep_error(lat, spec, rng)?;
    lat.repair_from_error(&e)
}

/// Preparation runs with iid noise of rate `p` on `C` just before the
/// ancilla measurement. Trial `i` draws from its own stream seeded by
/// `(seed, i)`.
pub fn bell_prep_experiment(lat: &ClusterLattice, p: f64, model: NoiseModel, trials: usize, seed: u64) -> Result<BellPrepSummary> {
    use rayon::prelude::*;
    let spec = NoiseSpec { p_in: 0.0, p: 0.0, p_out: p, model };
    spec.validate()?;
    let reps: Vec<Repair> = (0..trials)
        .into_par_iter()
        .map(|i| bell_prep_frame_trial(lat, &spec, &mut crate::trial_rng(seed, i as u64)))
        .collect::<Result<_>>()?;
    let weight: usize = reps.iter().map(|r| r.rep_x.weight() + r.rep_z.weight()).sum();
    Ok(BellPrepSummary {
        d: lat.d(),
        p,
        model,
        trials,
        logical_x_fail: reps.iter().filter(|r| r.fail_x).count(),
        logical_z_fail: reps.iter().filter(|r| r.fail_z).count(),
        any_fail: reps.iter().filter(|r| r.fail_x || r.fail_z).count(),
        mean_rep_weight: if trials == 0 { 0.0 } else { weight as f64 / trials as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizes() {
        for d in 2..=4 {
            let lat = build_cluster(d).unwrap();
            assert_eq!(lat.r(), 2 * d - 1);
            let m = d * d + (d - 1) * (d - 1);
            assert_eq!(lat.region_b().len(), 2 * m);
            assert_eq!(lat.t_sc().edge_sites.len(), 2 * m);
            assert_eq!(lat.t_sc_star().edge_sites.len(), 2 * m);
            assert_eq!(lat.bell_stabilizers().len(), 2 * m);
            assert_eq!(lat.region_a().len() + 2 * m, lat.n_sites());
        }
        assert_eq!(build_cluster(2).unwrap().n_sites(), 21);
    }

    #[test]
    fn w_has_depth_six_and_prepares_the_cluster_state() {
        for d in 2..=3 {
            let lat = build_cluster(d).unwrap();
            assert_eq!(lat.circuit_w().depth(), 6);
            let mut t = StabilizerTableau::new(lat.n_sites()).unwrap();
            t.apply_resolved(lat.resolved_w()).unwrap();
            for s in 0..lat.n_sites() {
                let g = lat.g_u(s);
                assert!(g.weight() <= 5);
                assert_eq!(t.expectation(&g).unwrap(), Some(1));
            }
            for g in lat.s0_generators().iter().chain(&lat.s1_generators()) {
                assert_eq!(t.expectation(g).unwrap(), Some(1));
            }
        }
    }

    #[test]
    fn stabilizer_group_properties() {
        for d in 2..=4 {
            let lat = build_cluster(d).unwrap();
            for g in lat.s0_generators() {
                assert_eq!(g.x_support(), Vec::<usize>::new());
                assert!(g.z_support().iter().all(|&q| lat.a_position(q).is_some()));
            }
            let bell = lat.bell_state().unwrap();
            let layout = lat.layout();
            let m = layout.m();
            let face = |f: usize| (f * m..(f + 1) * m).collect::<Vec<_>>();
            for f in 0..2 {
                for s in layout.stabilizers() {
                    assert_eq!(bell.expectation(&s.embed(2 * m, &face(f))).unwrap(), Some(1));
                }
            }
            let mut xx = layout.logical_x().embed(2 * m, &face(0));
            xx.xor_assign(&layout.logical_x().embed(2 * m, &face(1)));
            let mut zz = layout.logical_z().embed(2 * m, &face(0));
            zz.xor_assign(&layout.logical_z().embed(2 * m, &face(1)));
            assert_eq!(bell.expectation(&xx).unwrap(), Some(1));
            assert_eq!(bell.expectation(&zz).unwrap(), Some(1));
        }
    }

    #[test]
    fn pure_errors_are_dual() {
        let lat = build_cluster(3).unwrap();
        let b = lat.bell_stabilizers();
        for (i, t) in lat.pure_errors().iter().enumerate() {
            for (j, g) in b.iter().enumerate() {
                assert_eq!(t.anticommutes(g), i == j);
            }
        }
    }

    #[test]
    fn noiseless_preparation_is_exact() {
        let lat = build_cluster(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let out = run_bell_prep(&lat, &NoiseSpec::none(), &mut rng).unwrap();
            assert!(lat.syn0(&out.s).unwrap().is_empty());
            assert!(lat.classify_state(&out.b_state).unwrap().iter().all(|&b| !b));
            let rep = out.diagnostics.unwrap();
            assert!(!rep.fail_x && !rep.fail_z);
            assert!(rep.rep_x.is_identity() && rep.rep_z.is_identity());
        }
    }

    #[test]
    fn single_ancilla_flip_marks_its_endpoints() {
        let lat = build_cluster(3).unwrap();
        let te = lat.t_e();
        for (id, &site) in te.edge_sites.iter().enumerate() {
            let e = PauliOp::x_on(lat.n_sites(), [site]);
            let defects = lat.syn0_of_error(&e).unwrap();
            let (a, b) = te.graph.edge(id).unwrap();
            let mut want: Vec<usize> = std::iter::once(a).chain(b).collect();
            want.sort_unstable();
            assert_eq!(defects.even, want);
            assert!(defects.odd.is_empty());
            let z = PauliOp::z_on(lat.n_sites(), [site]);
            assert!(lat.syn0_of_error(&z).unwrap().is_empty());
        }
    }

    #[test]
    fn state_matches_repair() {
        let lat = build_cluster(3).unwrap();
        let spec = NoiseSpec { p_in: 0.0, p: 0.0, p_out: 0.02, model: NoiseModel::IidDepolarizing };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let out = run_bell_prep(&lat, &spec, &mut rng).unwrap();
            let rep = out.diagnostics.unwrap();
            let signs = lat.classify_state(&out.b_state).unwrap();
            assert_eq!(signs, rep.residual);
            let fixed = lat.repair_operator(&rep);
            let mut t = out.b_state.clone();
            t.apply_pauli(&fixed).unwrap();
            assert!(lat.classify_state(&t).unwrap().iter().all(|&b| !b));
            let m = lat.proxy_m(&lat.syn0(&out.s).unwrap()).unwrap();
            assert_eq!(lat.syn0(&out.s).unwrap(), lat.syn0_of_error(&out.injected_error).unwrap());
            let mut em = vec![false; lat.region_a().len()];
            for (i, &site) in lat.region_a().iter().enumerate() {
                em[i] = out.injected_error.x(site) ^ m[i];
            }
            let left = lat.syn0(&vec![false; em.len()]).unwrap();
            let after = lat.defects_from(|i| lat.s0[i].a_support.iter().fold(lat.s0[i].sign, |acc, &a| acc ^ em[a]));
            assert_eq!(left, after);
        }
    }

    #[test]
    fn rec_is_deterministic_and_trivial_on_zero() {
        let lat = build_cluster(2).unwrap();
        let zeros = vec![false; lat.region_a().len()];
        if lat.sigma(&zeros).unwrap().iter().all(|&b| !b) {
            assert!(lat.rec(&zeros).unwrap().is_identity());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s: Vec<bool> = (0..zeros.len()).map(|_| rng.gen()).collect();
        assert_eq!(lat.rec(&s).unwrap(), lat.rec(&s).unwrap());
    }
}
