//! Stabilizer tableau with destabilizers.
//!
//! Rows `0..n` hold destabilizers and rows `n..2n` stabilizers, each stored
//! in the same `i^phase X^x Z^z` convention as [`PauliOp`].

use rand::Rng;

use crate::circuit::{GateKind, ResolvedCircuit};
use crate::error::{Error, Result};
use crate::gf2;
use crate::pauli::{flip_bit, get_bit, set_bit, word_count, PauliOp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    w: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Vec<u8>,
}

impl StabilizerTableau {
    /// The state `|0...0>`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroQubits);
        }
        let w = word_count(n);
        let mut t = StabilizerTableau { n, w, x: vec![0; 2 * n * w], z: vec![0; 2 * n * w], phase: vec![0; 2 * n] };
        for q in 0..n {
            set_bit(&mut t.x[q * w..(q + 1) * w], q, true);
            set_bit(&mut t.z[(n + q) * w..(n + q + 1) * w], q, true);
        }
        Ok(t)
    }

    /// Builds the state stabilized by `gens` (n independent commuting
    /// Hermitian operators on n qubits). Destabilizers are found by solving
    /// the symplectic duality equations.
    pub fn from_stabilizers(gens: &[PauliOp]) -> Result<Self> {
        let n = gens.len();
        if n == 0 {
            return Err(Error::ZeroQubits);
        }
        for g in gens {
            if g.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.n() });
            }
            if !g.is_hermitian() {
                return Err(Error::NotAStabilizerState(format!("{g} is not Hermitian")));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if gens[i].anticommutes(&gens[j]) {
                    return Err(Error::NotAStabilizerState(format!("generators {i} and {j} anticommute")));
                }
            }
        }
        let w = word_count(n);
        // Row j is the symplectic dual (z_j | x_j) so that row . (x_d | z_d) = <s_j, d>.
        let mut rows: Vec<Vec<u64>> = gens
            .iter()
            .map(|g| {
                let mut r = vec![0u64; word_count(2 * n)];
                for q in 0..n {
                    if g.z(q) {
                        set_bit(&mut r, q, true);
                    }
                    if g.x(q) {
                        set_bit(&mut r, n + q, true);
                    }
                }
                r
            })
            .collect();
        let mut comp = gf2::identity_rows(n);
        let pivots = gf2::rref(&mut rows, 2 * n, &mut comp);
        if pivots.len() < n {
            return Err(Error::NotAStabilizerState("generators are dependent".into()));
        }
        let mut destab: Vec<PauliOp> = (0..n)
            .map(|i| {
                let mut d = PauliOp::identity(n);
                for (r, &c) in pivots.iter().enumerate() {
                    if get_bit(&comp[r], i) {
                        if c < n {
                            d.flip_x(c);
                        } else {
                            d.flip_z(c - n);
                        }
                    }
                }
                d
            })
            .collect();
        for i in 0..n {
            for j in 0..i {
                if destab[i].anticommutes(&destab[j]) {
                    let s = gens[j].clone();
                    destab[i].xor_assign(&s);
                }
            }
        }
        let mut t = StabilizerTableau { n, w, x: vec![0; 2 * n * w], z: vec![0; 2 * n * w], phase: vec![0; 2 * n] };
        for i in 0..n {
            t.set_row(i, &destab[i]);
            t.set_row(n + i, &gens[i]);
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row_x(&self, r: usize) -> &[u64] {
        &self.x[r * self.w..(r + 1) * self.w]
    }

    fn row_z(&self, r: usize) -> &[u64] {
        &self.z[r * self.w..(r + 1) * self.w]
    }

    fn row(&self, r: usize) -> PauliOp {
        PauliOp::from_words(self.n, self.row_x(r).to_vec(), self.row_z(r).to_vec(), self.phase[r])
    }

    fn set_row(&mut self, r: usize, p: &PauliOp) {
        let w = self.w;
        self.x[r * w..(r + 1) * w].copy_from_slice(p.x_words());
        self.z[r * w..(r + 1) * w].copy_from_slice(p.z_words());
        self.phase[r] = p.phase();
    }

    pub fn stabilizer(&self, i: usize) -> PauliOp {
        self.row(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliOp {
        self.row(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliOp> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    #[inline]
    fn xb(&self, r: usize, q: usize) -> bool {
        get_bit(&self.x[r * self.w..], q)
    }

    /// `row r <- row r * row p`.
    fn rowmul(&mut self, r: usize, p: usize) {
        let w = self.w;
        let mut cross = 0u32;
        for k in 0..w {
            let (xp, zp) = (self.x[p * w + k], self.z[p * w + k]);
            cross += (self.z[r * w + k] & xp).count_ones();
            self.x[r * w + k] ^= xp;
            self.z[r * w + k] ^= zp;
        }
        self.phase[r] = ((self.phase[r] as u32 + self.phase[p] as u32 + 2 * cross) & 3) as u8;
    }

    pub fn apply_gate(&mut self, kind: GateKind, a: usize, b: usize) -> Result<()> {
        for q in [a, b] {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        let w = self.w;
        let (wa, ma) = (a >> 6, 1u64 << (a & 63));
        let (wb, mb) = (b >> 6, 1u64 << (b & 63));
        for r in 0..2 * self.n {
            let base = r * w;
            let xa = self.x[base + wa] & ma != 0;
            let za = self.z[base + wa] & ma != 0;
            match kind {
                GateKind::H => {
                    if xa != za {
                        self.x[base + wa] ^= ma;
                        self.z[base + wa] ^= ma;
                    }
                    if xa && za {
                        self.phase[r] = (self.phase[r] + 2) & 3;
                    }
                }
                GateKind::S | GateKind::Sdg => {
                    if xa {
                        self.z[base + wa] ^= ma;
                        let k = if kind == GateKind::S { 1 } else { 3 };
                        self.phase[r] = (self.phase[r] + k) & 3;
                    }
                }
                GateKind::X => {
                    if za {
                        self.phase[r] = (self.phase[r] + 2) & 3;
                    }
                }
                GateKind::Z => {
                    if xa {
                        self.phase[r] = (self.phase[r] + 2) & 3;
                    }
                }
                GateKind::Cnot => {
                    let zb = self.z[base + wb] & mb != 0;
                    if xa {
                        self.x[base + wb] ^= mb;
                    }
                    if zb {
                        self.z[base + wa] ^= ma;
                    }
                }
                GateKind::Cz => {
                    let xb = self.x[base + wb] & mb != 0;
                    if xb {
                        self.z[base + wa] ^= ma;
                    }
                    if xa {
                        self.z[base + wb] ^= mb;
                    }
                    if xa && xb {
                        self.phase[r] = (self.phase[r] + 2) & 3;
                    }
                }
                GateKind::Swap => {
                    let xb = self.x[base + wb] & mb != 0;
                    let zb = self.z[base + wb] & mb != 0;
                    if xa != xb {
                        self.x[base + wa] ^= ma;
                        self.x[base + wb] ^= mb;
                    }
                    if za != zb {
                        self.z[base + wa] ^= ma;
                        self.z[base + wb] ^= mb;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_resolved(&mut self, c: &ResolvedCircuit) -> Result<()> {
        if c.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: c.n });
        }
        for layer in &c.layers {
            for &(k, a, b) in layer {
                self.apply_gate(k, a, b)?;
            }
        }
        Ok(())
    }

    /// Applies a Pauli operator to the state (`|psi> <- P |psi>`).
    pub fn apply_pauli(&mut self, p: &PauliOp) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: p.n() });
        }
        let w = self.w;
        for r in 0..2 * self.n {
            let mut acc = 0u64;
            for k in 0..w {
                acc ^= (self.x[r * w + k] & p.z_words()[k]) ^ (self.z[r * w + k] & p.x_words()[k]);
            }
            if acc.count_ones() % 2 == 1 {
                self.phase[r] = (self.phase[r] + 2) & 3;
            }
        }
        Ok(())
    }

    fn pivot_for(&self, q: usize) -> Option<usize> {
        (self.n..2 * self.n).find(|&r| self.xb(r, q))
    }

    /// Outcome of a `Z` measurement of qubit `q` if it is deterministic.
    pub fn peek_z(&self, q: usize) -> Result<Option<bool>> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        if self.pivot_for(q).is_some() {
            return Ok(None);
        }
        let mut acc = PauliOp::identity(self.n);
        for i in 0..self.n {
            if self.xb(i, q) {
                acc.mul_assign_right(&self.row(self.n + i));
            }
        }
        debug_assert!(acc.z(q) && acc.weight() == 1);
        Ok(Some(acc.phase() == 2))
    }

    fn collapse(&mut self, q: usize, p: usize, outcome: bool) {
        for r in 0..2 * self.n {
            if r != p && self.xb(r, q) {
                self.rowmul(r, p);
            }
        }
        let w = self.w;
        let d = p - self.n;
        self.x.copy_within(p * w..(p + 1) * w, d * w);
        self.z.copy_within(p * w..(p + 1) * w, d * w);
        self.phase[d] = self.phase[p];
        for k in 0..w {
            self.x[p * w + k] = 0;
            self.z[p * w + k] = 0;
        }
        flip_bit(&mut self.z[p * w..(p + 1) * w], q);
        self.phase[p] = if outcome { 2 } else { 0 };
    }

    /// Measures `Z_q`; returns `(outcome, deterministic)`.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(bool, bool)> {
        match self.peek_z(q)? {
            Some(v) => Ok((v, true)),
            None => {
                let p = self.pivot_for(q).expect("random outcome has a pivot");
                let outcome = rng.gen::<bool>();
                self.collapse(q, p, outcome);
                Ok((outcome, false))
            }
        }
    }

    /// Measures `Z_q` with a prescribed outcome. Fails if the outcome has
    /// probability zero; returns whether the outcome was deterministic.
    pub fn measure_z_forced(&mut self, q: usize, outcome: bool) -> Result<bool> {
        match self.peek_z(q)? {
            Some(v) if v == outcome => Ok(true),
            Some(_) => Err(Error::ImpossibleOutcome(q)),
            None => {
                let p = self.pivot_for(q).expect("random outcome has a pivot");
                self.collapse(q, p, outcome);
                Ok(false)
            }
        }
    }

    /// Whether `<z|psi>` is nonzero, found by forcing each qubit in turn.
    pub fn support_membership(&self, z: &[bool]) -> Result<bool> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.len() });
        }
        let mut t = self.clone();
        for (q, &b) in z.iter().enumerate() {
            match t.measure_z_forced(q, b) {
                Ok(_) => {}
                Err(Error::ImpossibleOutcome(_)) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
        Ok(true)
    }

    /// Expectation value of a Hermitian Pauli: `Some(+1)` or `Some(-1)` when
    /// `+-P` stabilizes the state, `None` when the expectation is zero.
    pub fn expectation(&self, p: &PauliOp) -> Result<Option<i8>> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: p.n() });
        }
        let mut acc = PauliOp::identity(self.n);
        for i in 0..self.n {
            let stab = self.row(self.n + i);
            if stab.anticommutes(p) {
                return Ok(None);
            }
            if self.row(i).anticommutes(p) {
                acc.mul_assign_right(&stab);
            }
        }
        debug_assert!(acc.x_words() == p.x_words() && acc.z_words() == p.z_words());
        match (p.phase() + 4 - acc.phase()) & 3 {
            0 => Ok(Some(1)),
            2 => Ok(Some(-1)),
            _ => Err(Error::InvalidInput(format!("{p} is not Hermitian"))),
        }
    }

    /// The state of the qubits in `keep`, provided they are unentangled with
    /// the rest (for example after measuring every other qubit).
    pub fn reduced_to(&self, keep: &[usize]) -> Result<StabilizerTableau> {
        let mut is_kept = vec![false; self.n];
        for &q in keep {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
            is_kept[q] = true;
        }
        let mut rows: Vec<PauliOp> = self.stabilizers();
        let mut used = vec![false; rows.len()];
        for q in (0..self.n).filter(|&q| !is_kept[q]) {
            for want_x in [true, false] {
                let has = |p: &PauliOp| if want_x { p.x(q) } else { p.z(q) };
                let Some(piv) = (0..rows.len()).find(|&i| !used[i] && has(&rows[i])) else {
                    continue;
                };
                used[piv] = true;
                let pr = rows[piv].clone();
                for (i, r) in rows.iter_mut().enumerate() {
                    if i != piv && has(r) {
                        r.mul_assign_right(&pr);
                    }
                }
            }
        }
        let gens: Vec<PauliOp> = rows
            .iter()
            .zip(&used)
            .filter(|(_, &u)| !u)
            .map(|(r, _)| r.restrict(keep))
            .collect();
        if gens.len() != keep.len() {
            return Err(Error::NotAStabilizerState(format!(
                "subsystem of {} qubits carries {} local generators",
                keep.len(),
                gens.len()
            )));
        }
        StabilizerTableau::from_stabilizers(&gens)
    }

    /// Tensor product `self (x) other`, qubits of `other` appended.
    pub fn tensor(&self, other: &StabilizerTableau) -> StabilizerTableau {
        let n = self.n + other.n;
        let w = word_count(n);
        let mut t = StabilizerTableau { n, w, x: vec![0; 2 * n * w], z: vec![0; 2 * n * w], phase: vec![0; 2 * n] };
        let shift = |p: &PauliOp, off: usize| {
            let mut out = PauliOp::identity(n);
            for q in p.x_support() {
                out.flip_x(q + off);
            }
            for q in p.z_support() {
                out.flip_z(q + off);
            }
            out.set_phase(p.phase());
            out
        };
        for i in 0..self.n {
            t.set_row(i, &shift(&self.row(i), 0));
            t.set_row(n + i, &shift(&self.row(self.n + i), 0));
        }
        for i in 0..other.n {
            t.set_row(self.n + i, &shift(&other.row(i), self.n));
            t.set_row(n + self.n + i, &shift(&other.row(other.n + i), self.n));
        }
        t
    }

    /// Checks the commutation structure of the tableau.
    pub fn is_consistent(&self) -> bool {
        let rows: Vec<PauliOp> = (0..2 * self.n).map(|r| self.row(r)).collect();
        for i in 0..self.n {
            if !rows[self.n + i].is_hermitian() {
                return false;
            }
            for j in 0..self.n {
                if rows[self.n + i].anticommutes(&rows[self.n + j]) {
                    return false;
                }
                if rows[i].anticommutes(&rows[j]) {
                    return false;
                }
                if rows[i].anticommutes(&rows[self.n + j]) != (i == j) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn zero_state_is_deterministic() {
        let mut t = StabilizerTableau::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for q in 0..3 {
            assert_eq!(t.measure_z(q, &mut rng).unwrap(), (false, true));
        }
        assert_eq!(StabilizerTableau::new(1).unwrap().stabilizer(0), p("Z"));
        assert!(StabilizerTableau::new(0).is_err());
    }

    #[test]
    fn bell_pair() {
        let mut t = StabilizerTableau::new(2).unwrap();
        t.apply_gate(GateKind::H, 0, 0).unwrap();
        t.apply_gate(GateKind::Cnot, 0, 1).unwrap();
        assert_eq!(t.expectation(&p("XX")).unwrap(), Some(1));
        assert_eq!(t.expectation(&p("ZZ")).unwrap(), Some(1));
        assert_eq!(t.expectation(&p("YY")).unwrap(), Some(-1));
        assert_eq!(t.expectation(&p("ZI")).unwrap(), None);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut u = t.clone();
            let (a, _) = u.measure_z(0, &mut rng).unwrap();
            let (b, det) = u.measure_z(1, &mut rng).unwrap();
            assert!(det);
            assert_eq!(a, b);
            assert!(u.is_consistent());
        }
    }

    #[test]
    fn forced_measurement_rejects_impossible_outcomes() {
        let mut t = StabilizerTableau::new(2).unwrap();
        t.apply_gate(GateKind::H, 0, 0).unwrap();
        t.apply_gate(GateKind::Cnot, 0, 1).unwrap();
        let mut u = t.clone();
        u.measure_z_forced(0, true).unwrap();
        assert_eq!(u.measure_z_forced(1, false), Err(Error::ImpossibleOutcome(1)));
    }

    #[test]
    fn support_of_small_states() {
        let zero = StabilizerTableau::new(2).unwrap();
        assert!(zero.support_membership(&[false, false]).unwrap());
        assert!(!zero.support_membership(&[true, false]).unwrap());
        assert!(zero.support_membership(&[true]).is_err());
        let mut bell = zero.clone();
        bell.apply_gate(GateKind::H, 0, 0).unwrap();
        bell.apply_gate(GateKind::Cnot, 0, 1).unwrap();
        for (z, want) in [([false, false], true), ([true, true], true), ([false, true], false), ([true, false], false)] {
            assert_eq!(bell.support_membership(&z).unwrap(), want);
        }
        let mut plus = zero;
        plus.apply_gate(GateKind::H, 0, 0).unwrap();
        plus.apply_gate(GateKind::H, 1, 1).unwrap();
        for z in [[false, false], [false, true], [true, false], [true, true]] {
            assert!(plus.support_membership(&z).unwrap());
        }
    }

    #[test]
    fn from_stabilizers_round_trip() {
        let t = StabilizerTableau::from_stabilizers(&[p("XXX"), p("ZZI"), p("-IZZ")]).unwrap();
        assert!(t.is_consistent());
        assert_eq!(t.expectation(&p("-ZIZ")).unwrap(), Some(1));
        assert_eq!(t.expectation(&p("XXX")).unwrap(), Some(1));
        assert!(StabilizerTableau::from_stabilizers(&[p("XI"), p("ZI")]).is_err());
        assert!(StabilizerTableau::from_stabilizers(&[p("ZI"), p("ZI")]).is_err());
    }

    #[test]
    fn reduction_after_measurement() {
        // GHZ on 3 qubits, measure qubit 0, remaining pair is |00> or |11>.
        let mut t = StabilizerTableau::new(3).unwrap();
        t.apply_gate(GateKind::H, 0, 0).unwrap();
        t.apply_gate(GateKind::Cnot, 0, 1).unwrap();
        t.apply_gate(GateKind::Cnot, 1, 2).unwrap();
        assert!(t.reduced_to(&[1, 2]).is_err());
        t.measure_z_forced(0, true).unwrap();
        let r = t.reduced_to(&[1, 2]).unwrap();
        assert_eq!(r.expectation(&p("ZI")).unwrap(), Some(-1));
        assert_eq!(r.expectation(&p("IZ")).unwrap(), Some(-1));
    }

    #[test]
    fn tensor_product_keeps_signs() {
        let a = StabilizerTableau::from_stabilizers(&[p("-Z")]).unwrap();
        let b = StabilizerTableau::from_stabilizers(&[p("XX"), p("ZZ")]).unwrap();
        let t = a.tensor(&b);
        assert_eq!(t.expectation(&p("-ZII")).unwrap(), Some(1));
        assert_eq!(t.expectation(&p("IXX")).unwrap(), Some(1));
        assert!(t.is_consistent());
    }
}
