//! n-qubit Pauli operators.
//!
//! A [`PauliOp`] stores `i^phase * X^x Z^z`, where `X^x` is the product of `X`
//! over the qubits set in `x` and likewise for `Z`. With this ordering a `Y`
//! factor on one qubit is `i * X Z`, so a Hermitian operator has
//! `phase == popcount(x & z) (mod 2)`. Products only pick up a sign when a `Z`
//! of the left factor meets an `X` of the right factor on the same qubit.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], q: usize) -> bool {
    (words[q >> 6] >> (q & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], q: usize, v: bool) {
    let m = 1u64 << (q & 63);
    if v {
        words[q >> 6] |= m;
    } else {
        words[q >> 6] &= !m;
    }
}

#[inline]
pub(crate) fn flip_bit(words: &mut [u64], q: usize) {
    words[q >> 6] ^= 1u64 << (q & 63);
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        let w = word_count(n);
        PauliOp { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// `X` on every listed qubit.
    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            p.flip_x(q);
        }
        p
    }

    /// `Z` on every listed qubit.
    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            p.flip_z(q);
        }
        p
    }

    pub fn from_bits(x: &[bool], z: &[bool], phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: z.len() });
        }
        let mut p = Self::identity(x.len());
        for q in 0..x.len() {
            p.set_x(q, x[q]);
            p.set_z(q, z[q]);
        }
        p.phase = phase & 3;
        Ok(p)
    }

    pub(crate) fn from_words(n: usize, x: Vec<u64>, z: Vec<u64>, phase: u8) -> Self {
        PauliOp { n, x, z, phase: phase & 3 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub(crate) fn add_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) & 3;
    }

    pub fn x(&self, q: usize) -> bool {
        get_bit(&self.x, q)
    }

    pub fn z(&self, q: usize) -> bool {
        get_bit(&self.z, q)
    }

    pub fn set_x(&mut self, q: usize, v: bool) {
        set_bit(&mut self.x, q, v)
    }

    pub fn set_z(&mut self, q: usize, v: bool) {
        set_bit(&mut self.z, q, v)
    }

    pub fn flip_x(&mut self, q: usize) {
        flip_bit(&mut self.x, q)
    }

    pub fn flip_z(&mut self, q: usize) {
        flip_bit(&mut self.z, q)
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn x_bits(&self) -> Vec<bool> {
        (0..self.n).map(|q| self.x(q)).collect()
    }

    pub fn z_bits(&self) -> Vec<bool> {
        (0..self.n).map(|q| self.z(q)).collect()
    }

    pub fn x_support(&self) -> Vec<usize> {
        ones(&self.x, self.n)
    }

    pub fn z_support(&self) -> Vec<usize> {
        ones(&self.z, self.n)
    }

    pub fn support(&self) -> Vec<usize> {
        let w: Vec<u64> = self.x.iter().zip(&self.z).map(|(a, b)| a | b).collect();
        ones(&w, self.n)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// True when the operator is the identity up to phase.
    pub fn is_trivial(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_trivial() && self.phase == 0
    }

    pub fn is_hermitian(&self) -> bool {
        let y: u32 = self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum();
        (self.phase as u32 + y) % 2 == 0
    }

    /// Sign of a Hermitian operator written with `Y` factors: `+1` or `-1`.
    pub fn hermitian_sign(&self) -> Option<i8> {
        let y: u32 = self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum();
        match (self.phase as u32 + 4 - y % 4) % 4 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Symplectic product: true when the operators anticommute.
    pub fn anticommutes(&self, other: &PauliOp) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u64;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i]);
        }
        acc.count_ones() % 2 == 1
    }

    pub fn commutes(&self, other: &PauliOp) -> bool {
        !self.anticommutes(other)
    }

    /// `self <- self * other`.
    pub fn mul_assign_right(&mut self, other: &PauliOp) {
        debug_assert_eq!(self.n, other.n);
        let mut cross = 0u32;
        for i in 0..self.x.len() {
            cross += (self.z[i] & other.x[i]).count_ones();
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * cross) & 3) as u8;
    }

    /// Ordered product `self * other`.
    pub fn mul(&self, other: &PauliOp) -> Result<PauliOp> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// XOR of the bit masks, ignoring phases. Used for frames.
    pub fn xor_assign(&mut self, other: &PauliOp) {
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    /// The operator acting on the listed qubits only, in listed order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOp {
        let mut out = PauliOp::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set_x(i, self.x(q));
            out.set_z(i, self.z(q));
        }
        out.phase = self.phase;
        out
    }

    /// Places this operator into an `n`-qubit register, qubit `i` going to `targets[i]`.
    pub fn embed(&self, n: usize, targets: &[usize]) -> PauliOp {
        let mut out = PauliOp::identity(n);
        self.embed_into(&mut out, targets);
        out.phase = self.phase;
        out
    }

    /// XORs this operator's masks into `out` at the given positions.
    pub fn embed_into(&self, out: &mut PauliOp, targets: &[usize]) {
        for (i, &q) in targets.iter().enumerate() {
            if self.x(i) {
                out.flip_x(q);
            }
            if self.z(i) {
                out.flip_z(q);
            }
        }
    }

    /// Parity of the `X` mask over a qubit set.
    pub fn x_parity(&self, qubits: &[usize]) -> bool {
        qubits.iter().fold(false, |acc, &q| acc ^ self.x(q))
    }

    /// Parity of the `Z` mask over a qubit set.
    pub fn z_parity(&self, qubits: &[usize]) -> bool {
        qubits.iter().fold(false, |acc, &q| acc ^ self.z(q))
    }
}

fn ones(words: &[u64], n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (wi, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let b = w.trailing_zeros() as usize;
            let q = wi * 64 + b;
            if q < n {
                out.push(q);
            }
            w &= w - 1;
        }
    }
    out
}

impl fmt::Display for PauliOp {
    /// Hermitian-style label such as `-XYZI` or `+iXX`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let y: u32 = self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum();
        let k = (self.phase as u32 + 4 - y % 4) % 4;
        f.write_str(["+", "+i", "-", "-i"][k as usize])?;
        for q in 0..self.n {
            let c = match (self.x(q), self.z(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    /// Parses labels like `XZ`, `-iYI`, `+XX`.
    fn from_str(s: &str) -> Result<Self> {
        let (k, body) = if let Some(r) = s.strip_prefix("-i") {
            (3u32, r)
        } else if let Some(r) = s.strip_prefix("+i").or_else(|| s.strip_prefix('i')) {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        let mut p = PauliOp::identity(body.chars().count());
        let mut y = 0u32;
        for (q, c) in body.chars().enumerate() {
            match c {
                'I' => {}
                'X' => p.set_x(q, true),
                'Z' => p.set_z(q, true),
                'Y' => {
                    p.set_x(q, true);
                    p.set_z(q, true);
                    y += 1;
                }
                other => return Err(Error::InvalidInput(format!("bad Pauli letter {other:?}"))),
            }
        }
        p.phase = ((k + y) % 4) as u8;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        assert_eq!(p("X").mul(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Z").mul(&p("X")).unwrap(), p("+iY"));
    }

    #[test]
    fn squares_are_plus_minus_identity() {
        for s in ["X", "Y", "Z", "iX", "XYZ", "-iZZY"] {
            let q = p(s);
            let sq = q.mul(&q).unwrap();
            assert!(sq.is_trivial());
            assert!(sq.phase() == 0 || sq.phase() == 2);
        }
        assert!(p("X").mul(&p("X")).unwrap().is_identity());
    }

    #[test]
    fn label_round_trip() {
        for s in ["+XYZI", "-YY", "+iZ", "-iXIY"] {
            assert_eq!(p(s).to_string(), s);
        }
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes(&p("ZZ")));
        assert!(p("XI").anticommutes(&p("ZZ")));
        assert!(p("Y").anticommutes(&p("X")));
    }

    #[test]
    fn hermitian_detection() {
        assert!(p("Y").is_hermitian());
        assert!(p("-XZ").is_hermitian());
        assert!(!p("+iX").is_hermitian());
        assert_eq!(p("-YY").hermitian_sign(), Some(-1));
    }

    #[test]
    fn support_spans_words() {
        let q = PauliOp::x_on(130, [0, 64, 129]);
        assert_eq!(q.support(), vec![0, 64, 129]);
        assert_eq!(q.weight(), 3);
    }
}
