//! The magic square game, its sign-twisted generalization, and the 1D Magic
//! Square Problem circuit with its exact relation checker.
//!
//! Bits are stored as `{0,1}`; a bit `b` reads as the sign `(-1)^b` only in
//! the game-level functions.
//!
//! Layout conventions:
//! * qubits are ordered `p_1, q_1, p_2, q_2, ..., p_{2n}, q_{2n}`;
//! * `z_in = (alpha_1, ..., alpha_n, beta_1, ..., beta_n)`, two bits each;
//! * `z_out = (x_1, ..., x_n, y_1, ..., y_n)`, where `x_i` is read from
//!   `p_{2i-1} q_{2i-1}` and `y_i` from `p_{2i} q_{2i}`.

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind, InputBits, LayeredCliffordCircuit, ResolvedCircuit};
use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;

/// A two-bit input `(b1, b2)` stored as `2*b1 + b2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GameInput(u8);

impl GameInput {
    pub const IDLE: GameInput = GameInput(0);
    pub const ALL: [GameInput; 3] = [GameInput(1), GameInput(2), GameInput(3)];

    pub fn new(value: u8) -> Result<Self> {
        if value < 4 {
            Ok(GameInput(value))
        } else {
            Err(Error::InvalidInput(format!("two-bit input out of range: {value}")))
        }
    }

    pub fn from_bits(b1: bool, b2: bool) -> Self {
        GameInput(2 * b1 as u8 + b2 as u8)
    }

    pub fn bits(self) -> (bool, bool) {
        (self.0 & 2 != 0, self.0 & 1 != 0)
    }

    /// Row or column index in `1..=3`; 0 for the idle input.
    pub fn iota(self) -> usize {
        self.0 as usize
    }

    pub fn is_idle(self) -> bool {
        self.0 == 0
    }

    fn playable(self) -> Result<usize> {
        if self.is_idle() {
            Err(Error::InvalidInput("input 00 is not a game input".into()))
        } else {
            Ok(self.iota())
        }
    }
}

impl std::fmt::Display for GameInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = self.bits();
        write!(f, "{}{}", a as u8, b as u8)
    }
}

impl TryFrom<String> for GameInput {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        match s.as_str() {
            "00" => Ok(GameInput(0)),
            "01" => Ok(GameInput(1)),
            "10" => Ok(GameInput(2)),
            "11" => Ok(GameInput(3)),
            _ => Err(Error::InvalidInput(format!("expected a two-bit string, got {s:?}"))),
        }
    }
}

impl From<GameInput> for String {
    fn from(g: GameInput) -> String {
        g.to_string()
    }
}

/// Signs `(s, t, s', t')`, each `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GameParams {
    pub s: i8,
    pub t: i8,
    pub sp: i8,
    pub tp: i8,
}

impl GameParams {
    pub const TRIVIAL: GameParams = GameParams { s: 1, t: 1, sp: 1, tp: 1 };

    /// All 16 assignments.
    pub fn all() -> impl Iterator<Item = GameParams> {
        (0..16u8).map(|m| {
            let sg = |b: u8| if m >> b & 1 == 1 { -1 } else { 1 };
            GameParams { s: sg(0), t: sg(1), sp: sg(2), tp: sg(3) }
        })
    }

    /// Entrywise product.
    pub fn times(self, o: GameParams) -> GameParams {
        GameParams { s: self.s * o.s, t: self.t * o.t, sp: self.sp * o.sp, tp: self.tp * o.tp }
    }
}

pub fn sign(bit: bool) -> i8 {
    if bit {
        -1
    } else {
        1
    }
}

/// The twist `f_{alpha,beta}(s, t, s', t')`.
pub fn f_value(alpha: GameInput, beta: GameInput, p: GameParams) -> Result<i8> {
    let GameParams { s, t, sp, tp } = p;
    Ok(match (beta.playable()?, alpha.playable()?) {
        (1, 1) => s,
        (1, 2) => sp,
        (1, 3) => s * sp,
        (2, 1) => tp,
        (2, 2) => t,
        (2, 3) => t * tp,
        (3, 1) => s * tp,
        (3, 2) => sp * t,
        _ => s * sp * t * tp,
    })
}

/// Alice answers the column, Bob the row; both triples are complete.
pub fn check_generalized_win(alpha: GameInput, beta: GameInput, x: [i8; 3], y: [i8; 3], p: GameParams) -> bool {
    let Ok(f) = f_value(alpha, beta, p) else {
        return false;
    };
    x[0] * x[1] * x[2] == -1 && y[0] * y[1] * y[2] == 1 && x[beta.iota() - 1] * y[alpha.iota() - 1] == f
}

/// Completes two measured bits to Alice's triple `(x1, x2, -x1 x2)`.
pub fn alice_triple(b1: bool, b2: bool) -> [i8; 3] {
    let (a, b) = (sign(b1), sign(b2));
    [a, b, -a * b]
}

/// Completes two measured bits to Bob's triple `(y1, y2, y1 y2)`.
pub fn bob_triple(b1: bool, b2: bool) -> [i8; 3] {
    let (a, b) = (sign(b1), sign(b2));
    [a, b, a * b]
}

fn odd_columns() -> Vec<[i8; 3]> {
    (0..4u8).map(|m| alice_triple(m & 1 == 1, m & 2 == 2)).collect()
}

fn even_rows() -> Vec<[i8; 3]> {
    (0..4u8).map(|m| bob_triple(m & 1 == 1, m & 2 == 2)).collect()
}

/// Best average win probability over deterministic classical strategies,
/// with the win condition twisted by `params`.
pub fn classical_generalized_value(params: GameParams) -> Ratio<u32> {
    let cols = odd_columns();
    let rows = even_rows();
    // strategy = choice of one valid triple per input (4^3 options each side)
    let mut best = 0u32;
    for a in 0..64usize {
        let alice = [cols[a & 3], cols[(a >> 2) & 3], cols[(a >> 4) & 3]];
        for b in 0..64usize {
            let bob = [rows[b & 3], rows[(b >> 2) & 3], rows[(b >> 4) & 3]];
            let mut wins = 0;
            for alpha in GameInput::ALL {
                for beta in GameInput::ALL {
                    let x = alice[alpha.iota() - 1];
                    let y = bob[beta.iota() - 1];
                    wins += check_generalized_win(alpha, beta, x, y, params) as u32;
                }
            }
            best = best.max(wins);
        }
    }
    Ratio::new(best, 9)
}

/// Classical value of the standard game.
pub fn classical_game_value() -> Ratio<u32> {
    classical_generalized_value(GameParams::TRIVIAL)
}

/// Qubit index of `p_i` (1-based `i`).
pub fn p_qubit(i: usize) -> usize {
    2 * (i - 1)
}

/// Qubit index of `q_i` (1-based `i`).
pub fn q_qubit(i: usize) -> usize {
    2 * (i - 1) + 1
}

/// Name of input bit `which` (1 or 2) of `alpha_i`.
pub fn alpha_bit_name(i: usize, which: u8) -> String {
    format!("a{i}.{which}")
}

/// Name of input bit `which` (1 or 2) of `beta_i`.
pub fn beta_bit_name(i: usize, which: u8) -> String {
    format!("b{i}.{which}")
}

/// Qubit measured for output bit `bit` of `z_out`.
pub fn output_qubit(n: usize, bit: usize) -> usize {
    let (half, r) = (bit / (2 * n), bit % (2 * n));
    let (i, a) = (r / 2 + 1, r % 2);
    let site = if half == 0 { 2 * i - 1 } else { 2 * i };
    if a == 0 {
        p_qubit(site)
    } else {
        q_qubit(site)
    }
}

/// Reorders a measurement of all qubits into `z_out`.
pub fn qubits_to_z_out(n: usize, qubits: &[bool]) -> Vec<bool> {
    (0..4 * n).map(|b| qubits[output_qubit(n, b)]).collect()
}

/// Inverse of [`qubits_to_z_out`].
pub fn z_out_to_qubits(n: usize, z_out: &[bool]) -> Vec<bool> {
    let mut q = vec![false; 4 * n];
    for (b, &v) in z_out.iter().enumerate() {
        q[output_qubit(n, b)] = v;
    }
    q
}

/// Named input assignment for `z_in`.
pub fn z_in_bits(n: usize, z_in: &[bool]) -> Result<InputBits> {
    if z_in.len() != 4 * n {
        return Err(Error::DimensionMismatch { expected: 4 * n, got: z_in.len() });
    }
    let mut bits = InputBits::new();
    for i in 1..=n {
        bits.set(alpha_bit_name(i, 1), z_in[2 * (i - 1)]);
        bits.set(alpha_bit_name(i, 2), z_in[2 * (i - 1) + 1]);
        bits.set(beta_bit_name(i, 1), z_in[2 * n + 2 * (i - 1)]);
        bits.set(beta_bit_name(i, 2), z_in[2 * n + 2 * (i - 1) + 1]);
    }
    Ok(bits)
}

pub fn alpha_of(z_in: &[bool], i: usize) -> GameInput {
    GameInput::from_bits(z_in[2 * (i - 1)], z_in[2 * (i - 1) + 1])
}

pub fn beta_of(n: usize, z_in: &[bool], i: usize) -> GameInput {
    GameInput::from_bits(z_in[2 * n + 2 * (i - 1)], z_in[2 * n + 2 * (i - 1) + 1])
}

/// Gates of the controlled Cliffords, grouped by the layer they occupy
/// within the three-layer block that follows Bell-pair creation.
pub(crate) struct BlockLayers {
    pub la: Vec<Gate>,
    pub lb: Vec<Gate>,
    pub lc: Vec<Gate>,
}

fn input_test(c: &mut LayeredCliffordCircuit, name_1: &str, name_2: &str, g: GameInput) -> usize {
    let (b1, b2) = g.bits();
    c.add_control(&[(name_1, b1), (name_2, b2)])
}

/// `U(alpha_i)` on `(p_{2i-1}, q_{2i-1})`, `V(beta_i)` on `(p_{2i}, q_{2i})`
/// and `W(beta_i, alpha_{i+1})` on `p_{2i} q_{2i} p_{2i+1} q_{2i+1}`.
pub(crate) fn controlled_block(c: &mut LayeredCliffordCircuit, n: usize) -> BlockLayers {
    use GateKind::*;
    let mut out = BlockLayers { la: Vec::new(), lb: Vec::new(), lc: Vec::new() };
    for i in 1..=n {
        let (a1, a2) = (alpha_bit_name(i, 1), alpha_bit_name(i, 2));
        let (b1, b2) = (beta_bit_name(i, 1), beta_bit_name(i, 2));
        let (pa, qa) = (p_qubit(2 * i - 1), q_qubit(2 * i - 1));
        let (pb, qb) = (p_qubit(2 * i), q_qubit(2 * i));
        // U(alpha): H1 after SWAP (10) or CNOT (11).
        let c10 = input_test(c, &a1, &a2, GameInput(2));
        let c11 = input_test(c, &a1, &a2, GameInput(3));
        out.la.push(Gate::two(Swap, pa, qa).when(Some(c10)));
        out.la.push(Gate::two(Cnot, pa, qa).when(Some(c11)));
        for g in GameInput::ALL {
            let ctl = input_test(c, &a1, &a2, g);
            out.lb.push(Gate::one(H, pa).when(Some(ctl)));
        }
        // V(beta): SWAP (10); Z1 Z2, then CZ, then H1 H2 (11); H1 H2 (01).
        let v01 = input_test(c, &b1, &b2, GameInput(1));
        let v10 = input_test(c, &b1, &b2, GameInput(2));
        let v11 = input_test(c, &b1, &b2, GameInput(3));
        out.la.push(Gate::two(Swap, pb, qb).when(Some(v10)));
        out.la.push(Gate::one(Z, pb).when(Some(v11)));
        out.la.push(Gate::one(Z, qb).when(Some(v11)));
        out.lb.push(Gate::two(Cz, pb, qb).when(Some(v11)));
        for ctl in [v01, v11] {
            out.lc.push(Gate::one(H, pb).when(Some(ctl)));
            out.lc.push(Gate::one(H, qb).when(Some(ctl)));
        }
        if i < n {
            let (na1, na2) = (alpha_bit_name(i + 1, 1), alpha_bit_name(i + 1, 2));
            let w = c.add_control(&[(b1.as_str(), false), (b2.as_str(), false), (na1.as_str(), false), (na2.as_str(), false)]);
            let (pn, qn) = (p_qubit(2 * i + 1), q_qubit(2 * i + 1));
            out.la.push(Gate::two(Cnot, pb, pn).when(Some(w)));
            out.la.push(Gate::two(Cnot, qb, qn).when(Some(w)));
            out.lb.push(Gate::one(H, pb).when(Some(w)));
            out.lb.push(Gate::one(H, qb).when(Some(w)));
        }
    }
    out
}

fn build_circuit(n: usize) -> Result<LayeredCliffordCircuit> {
    let mut c = LayeredCliffordCircuit::new(4 * n)?;
    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    for i in 1..=n {
        l1.push(Gate::one(GateKind::H, p_qubit(2 * i - 1)));
        l1.push(Gate::one(GateKind::H, q_qubit(2 * i - 1)));
        l2.push(Gate::two(GateKind::Cnot, p_qubit(2 * i - 1), p_qubit(2 * i)));
        l2.push(Gate::two(GateKind::Cnot, q_qubit(2 * i - 1), q_qubit(2 * i)));
    }
    let block = controlled_block(&mut c, n);
    c.push_layer(l1)?;
    c.push_layer(l2)?;
    c.push_layer(block.la)?;
    c.push_layer(block.lb)?;
    c.push_layer(block.lc)?;
    let coords = (0..4 * n).map(|q| [(q / 2) as f64, (q % 2) as f64, 0.0]).collect();
    c.set_coords(coords)?;
    Ok(c)
}

/// The classically controlled circuit on `4n` qubits; `z_in` only fixes
/// the length check, the controls stay symbolic.
pub fn build_msp_circuit(n: usize, z_in: &[bool]) -> Result<LayeredCliffordCircuit> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least two pairs, got {n}")));
    }
    if z_in.len() != 4 * n {
        return Err(Error::DimensionMismatch { expected: 4 * n, got: z_in.len() });
    }
    build_circuit(n)
}

/// The circuit with its controls evaluated at `z_in`.
pub fn resolved_msp_circuit(n: usize, z_in: &[bool]) -> Result<ResolvedCircuit> {
    build_msp_circuit(n, z_in)?.resolve(&z_in_bits(n, z_in)?)
}

/// The state before measurement.
pub fn msp_state(n: usize, z_in: &[bool]) -> Result<StabilizerTableau> {
    let r = resolved_msp_circuit(n, z_in)?;
    let mut t = StabilizerTableau::new(4 * n)?;
    t.apply_resolved(&r)?;
    Ok(t)
}

/// Runs the ideal circuit once and returns `z_out`.
pub fn sample_msp_output<R: Rng + ?Sized>(n: usize, z_in: &[bool], rng: &mut R) -> Result<Vec<bool>> {
    let mut t = msp_state(n, z_in)?;
    let mut qubits = Vec::with_capacity(4 * n);
    for q in 0..4 * n {
        qubits.push(t.measure_z(q, rng)?.0);
    }
    Ok(qubits_to_z_out(n, &qubits))
}

/// Exact check that `z_out` has nonzero probability on input `z_in`.
pub fn check_relation(z_in: &[bool], z_out: &[bool]) -> Result<bool> {
    if z_in.len() != z_out.len() || z_in.len() % 4 != 0 {
        return Err(Error::DimensionMismatch { expected: z_in.len(), got: z_out.len() });
    }
    let n = z_in.len() / 4;
    msp_state(n, z_in)?.support_membership(&z_out_to_qubits(n, z_out))
}

/// How [`check_relation_with`] decides membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Full support membership.
    #[default]
    Exact,
    /// Only the game condition on the `(j, k)` window. Necessary, not
    /// sufficient; opt-in.
    WindowOnly,
}

pub fn check_relation_with(mode: CheckMode, instance: &MspInstance, z_out: &[bool]) -> Result<bool> {
    match mode {
        CheckMode::Exact => check_relation(&instance.z_in(), z_out),
        CheckMode::WindowOnly => check_stst_condition(instance, z_out),
    }
}

/// An element of the instance family `S`: one active column input at pair
/// `j`, one active row input at pair `k > j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MspInstance {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub alpha: GameInput,
    pub beta: GameInput,
}

impl MspInstance {
    pub fn new(n: usize, j: usize, k: usize, alpha: GameInput, beta: GameInput) -> Result<Self> {
        if !(1 <= j && j < k && k <= n) {
            return Err(Error::InvalidInput(format!("need 1 <= j < k <= n, got j={j}, k={k}, n={n}")));
        }
        alpha.playable()?;
        beta.playable()?;
        Ok(MspInstance { n, j, k, alpha, beta })
    }

    /// `|S| = 9 n (n-1) / 2`.
    pub fn count(n: usize) -> usize {
        9 * n * n.saturating_sub(1) / 2
    }

    /// The `idx`-th instance in `(j, k, alpha, beta)` lexicographic order.
    pub fn from_index(n: usize, idx: usize) -> Result<Self> {
        if idx >= Self::count(n) {
            return Err(Error::InvalidInput(format!("instance index {idx} out of range")));
        }
        let (pair, g) = (idx / 9, idx % 9);
        let mut rest = pair;
        let mut j = 1;
        while rest >= n - j {
            rest -= n - j;
            j += 1;
        }
        let k = j + 1 + rest;
        Self::new(n, j, k, GameInput::ALL[g / 3], GameInput::ALL[g % 3])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::from_index(n, rng.gen_range(0..Self::count(n).max(1)))
    }

    pub fn z_in(&self) -> Vec<bool> {
        let n = self.n;
        let mut z = vec![false; 4 * n];
        let (a1, a2) = self.alpha.bits();
        let (b1, b2) = self.beta.bits();
        z[2 * (self.j - 1)] = a1;
        z[2 * (self.j - 1) + 1] = a2;
        z[2 * n + 2 * (self.k - 1)] = b1;
        z[2 * n + 2 * (self.k - 1) + 1] = b2;
        z
    }
}

/// `x_i^a` as a bit (1-based `i`, `a` in {1, 2}).
pub fn x_bit(z_out: &[bool], i: usize, a: usize) -> bool {
    z_out[2 * (i - 1) + a - 1]
}

/// `y_i^a` as a bit.
pub fn y_bit(n: usize, z_out: &[bool], i: usize, a: usize) -> bool {
    z_out[2 * n + 2 * (i - 1) + a - 1]
}

/// The window parameters `(s, t, s', t')` read off `z_out`.
pub fn window_params(inst: &MspInstance, z_out: &[bool]) -> GameParams {
    let n = inst.n;
    let prod = |f: &dyn Fn(usize) -> bool| (inst.j..inst.k).map(|i| sign(f(i))).product::<i8>();
    GameParams {
        s: prod(&|i| y_bit(n, z_out, i, 1)),
        t: prod(&|i| x_bit(z_out, i + 1, 1)),
        sp: prod(&|i| y_bit(n, z_out, i, 2)),
        tp: prod(&|i| x_bit(z_out, i + 1, 2)),
    }
}

/// The generalized game condition on Alice's block `j` and Bob's block `k`.
pub fn check_stst_condition(inst: &MspInstance, z_out: &[bool]) -> Result<bool> {
    let n = inst.n;
    if z_out.len() != 4 * n {
        return Err(Error::DimensionMismatch { expected: 4 * n, got: z_out.len() });
    }
    let x = alice_triple(x_bit(z_out, inst.j, 1), x_bit(z_out, inst.j, 2));
    let y = bob_triple(y_bit(n, z_out, inst.k, 1), y_bit(n, z_out, inst.k, 2));
    Ok(check_generalized_win(inst.alpha, inst.beta, x, y, window_params(inst, z_out)))
}

/// Plays one round of the quantum strategy: two Bell pairs, Alice rotates
/// with `U(alpha)`, Bob with `V(beta)`, both measure. Returns `(x, y)`.
pub fn play_quantum_round<R: Rng + ?Sized>(alpha: GameInput, beta: GameInput, rng: &mut R) -> Result<([i8; 3], [i8; 3])> {
    alpha.playable()?;
    beta.playable()?;
    let c = build_circuit(1)?;
    let mut z_in = vec![false; 4];
    let (a1, a2) = alpha.bits();
    let (b1, b2) = beta.bits();
    z_in.copy_from_slice(&[a1, a2, b1, b2]);
    let r = c.resolve(&z_in_bits(1, &z_in)?)?;
    let mut t = StabilizerTableau::new(4)?;
    t.apply_resolved(&r)?;
    let mut m = [false; 4];
    for (q, slot) in m.iter_mut().enumerate() {
        *slot = t.measure_z(q, rng)?.0;
    }
    Ok((alice_triple(m[0], m[1]), bob_triple(m[2], m[3])))
}

/// Hex encoding of a bit string, four bits per digit, most significant
/// bit first, zero-padded at the end.
pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (b as u32) << (3 - i));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

/// Inverse of [`bits_to_hex`] for a string holding `len` bits.
pub fn hex_to_bits(s: &str, len: usize) -> Result<Vec<bool>> {
    let mut out = Vec::with_capacity(4 * s.len());
    for ch in s.chars() {
        let v = ch.to_digit(16).ok_or_else(|| Error::InvalidInput(format!("bad hex digit {ch:?}")))?;
        for i in 0..4 {
            out.push(v >> (3 - i) & 1 == 1);
        }
    }
    if out.len() < len || out.len() >= len + 4 || out[len..].iter().any(|&b| b) {
        return Err(Error::InvalidInput(format!("hex string does not encode {len} bits")));
    }
    out.truncate(len);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn f_table_entries() {
        let p = GameParams { s: -1, t: 1, sp: -1, tp: -1 };
        let g = |v| GameInput::new(v).unwrap();
        assert_eq!(f_value(g(1), g(1), p).unwrap(), p.s);
        assert_eq!(f_value(g(3), g(3), p).unwrap(), p.s * p.sp * p.t * p.tp);
        assert!(f_value(g(0), g(1), p).is_err());
        for a in GameInput::ALL {
            for b in GameInput::ALL {
                assert_eq!(f_value(a, b, GameParams::TRIVIAL).unwrap(), 1);
            }
        }
    }

    #[test]
    fn win_condition_examples() {
        let one = GameInput::new(1).unwrap();
        let (x, y) = ([1, 1, -1], [1, 1, 1]);
        assert!(check_generalized_win(one, one, x, y, GameParams::TRIVIAL));
        assert!(!check_generalized_win(one, one, [-1, 1, -1], y, GameParams::TRIVIAL));
    }

    #[test]
    fn instance_indexing_covers_s() {
        for n in 2..6 {
            let all: Vec<_> = (0..MspInstance::count(n)).map(|i| MspInstance::from_index(n, i).unwrap()).collect();
            let mut dedup = all.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), 9 * n * (n - 1) / 2);
            assert!(all.iter().all(|s| s.j < s.k && s.k <= n));
        }
        assert!(MspInstance::new(3, 2, 2, GameInput::ALL[0], GameInput::ALL[0]).is_err());
    }

    #[test]
    fn game_values() {
        assert_eq!(classical_game_value(), Ratio::new(8, 9));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for a in GameInput::ALL {
            for b in GameInput::ALL {
                for _ in 0..20 {
                    let (x, y) = play_quantum_round(a, b, &mut rng).unwrap();
                    assert!(check_generalized_win(a, b, x, y, GameParams::TRIVIAL), "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn hex_round_trip() {
        let bits = vec![true, false, true, true, false, true];
        let h = bits_to_hex(&bits);
        assert_eq!(h, "b4");
        assert_eq!(hex_to_bits(&h, 6).unwrap(), bits);
        assert!(hex_to_bits("b6", 6).is_err());
    }

    #[test]
    fn layout_maps_are_inverse() {
        let n = 3;
        let z: Vec<bool> = (0..12).map(|i| i % 3 == 0).collect();
        assert_eq!(qubits_to_z_out(n, &z_out_to_qubits(n, &z)), z);
        assert_eq!(output_qubit(n, 0), p_qubit(1));
        assert_eq!(output_qubit(n, 2 * n + 1), q_qubit(2));
    }

    #[test]
    fn idle_circuit_depth() {
        let c = build_msp_circuit(3, &[false; 12]).unwrap();
        assert_eq!(c.depth(), 5);
        assert!(build_msp_circuit(1, &[false; 4]).is_err());
    }

    #[test]
    fn sampled_outputs_satisfy_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let inst = MspInstance::random(4, &mut rng).unwrap();
            let z_in = inst.z_in();
            let z = sample_msp_output(4, &z_in, &mut rng).unwrap();
            assert!(check_relation(&z_in, &z).unwrap());
            assert!(check_stst_condition(&inst, &z).unwrap());
        }
    }
}
