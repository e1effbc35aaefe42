//! Local stochastic Pauli noise: iid samplers and merging of layer errors
//! into a single error placed just before measurement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{InputBits, LayeredCliffordCircuit, ResolvedCircuit};
use crate::error::{Error, Result};
use crate::pauli::PauliOp;
use crate::tableau::StabilizerTableau;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Each qubit independently hit by X, Y or Z (uniform) with probability p.
    #[default]
    IidDepolarizing,
    /// X and Z flipped independently with probability p each.
    IidXz,
    None,
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseModel::IidDepolarizing => "iid_depolarizing",
            NoiseModel::IidXz => "iid_xz",
            NoiseModel::None => "none",
        })
    }
}

/// Rates for initialization, per-layer and readout noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct NoiseSpec {
    pub p_in: f64,
    pub p: f64,
    pub p_out: f64,
    #[serde(default)]
    pub model: NoiseModel,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec { p_in: 0.0, p: 0.0, p_out: 0.0, model: NoiseModel::None }
    }

    /// Same rate at every location.
    pub fn uniform(p: f64, model: NoiseModel) -> Self {
        NoiseSpec { p_in: p, p, p_out: p, model }
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.p_in, self.p, self.p_out] {
            check_probability(v)?;
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.model == NoiseModel::None || (self.p_in == 0.0 && self.p == 0.0 && self.p_out == 0.0)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Draws a single-qubit error as `(x, z)` bits.
pub fn sample_qubit<R: Rng + ?Sized>(p: f64, model: NoiseModel, rng: &mut R) -> (bool, bool) {
    match model {
        NoiseModel::None => (false, false),
        NoiseModel::IidDepolarizing => {
            if p > 0.0 && rng.gen::<f64>() < p {
                match rng.gen_range(0..3) {
                    0 => (true, false),
                    1 => (true, true),
                    _ => (false, true),
                }
            } else {
                (false, false)
            }
        }
        NoiseModel::IidXz => (p > 0.0 && rng.gen::<f64>() < p, p > 0.0 && rng.gen::<f64>() < p),
    }
}

/// A Hermitian Pauli error on `n` qubits, iid across qubits.
pub fn sample_iid_pauli<R: Rng + ?Sized>(n: usize, p: f64, model: NoiseModel, rng: &mut R) -> Result<PauliOp> {
    check_probability(p)?;
    let mut e = PauliOp::identity(n);
    let mut ys = 0u8;
    for q in 0..n {
        let (x, z) = sample_qubit(p, model, rng);
        if x {
            e.set_x(q, true);
        }
        if z {
            e.set_z(q, true);
        }
        ys += (x && z) as u8;
    }
    e.set_phase(ys & 3);
    Ok(e)
}

/// Product `e1 * e2` with phase.
pub fn merge_errors(e1: &PauliOp, e2: &PauliOp) -> Result<PauliOp> {
    e1.mul(e2)
}

/// Error locations of a depth-`D` circuit: `E_in`, one per layer, `E_out`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorHistory {
    pub e_in: PauliOp,
    pub layers: Vec<PauliOp>,
    pub e_out: PauliOp,
}

impl ErrorHistory {
    pub fn sample<R: Rng + ?Sized>(n: usize, depth: usize, spec: &NoiseSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let model = spec.model;
        let e_in = sample_iid_pauli(n, spec.p_in, model, rng)?;
        let layers = (0..depth).map(|_| sample_iid_pauli(n, spec.p, model, rng)).collect::<Result<_>>()?;
        let e_out = sample_iid_pauli(n, spec.p_out, model, rng)?;
        Ok(ErrorHistory { e_in, layers, e_out })
    }

    /// Pushes every error through the remaining layers and multiplies them
    /// into one operator acting after the full circuit.
    pub fn merged(&self, c: &ResolvedCircuit) -> Result<PauliOp> {
        if self.layers.len() != c.depth() {
            return Err(Error::DimensionMismatch { expected: c.depth(), got: self.layers.len() });
        }
        let mut acc = self.e_in.clone();
        for (l, e) in self.layers.iter().enumerate() {
            c.conjugate_layer(l, &mut acc);
            acc = merge_errors(e, &acc)?;
        }
        merge_errors(&self.e_out, &acc)
    }
}

/// Runs the circuit from `|0^n>` with the given error history and measures
/// every qubit in the Z basis. Returns the outcome and the merged error.
pub fn run_with_errors<R: Rng + ?Sized>(
    c: &ResolvedCircuit,
    errors: &ErrorHistory,
    rng: &mut R,
) -> Result<(Vec<bool>, PauliOp)> {
    let merged = errors.merged(c)?;
    let mut t = StabilizerTableau::new(c.n)?;
    t.apply_resolved(c)?;
    t.apply_pauli(&merged)?;
    let mut out = Vec::with_capacity(c.n);
    for q in 0..c.n {
        out.push(t.measure_z(q, rng)?.0);
    }
    Ok((out, merged))
}

/// Noisy execution with iid errors at every location.
pub fn run_noisy_circuit<R: Rng + ?Sized>(
    c: &LayeredCliffordCircuit,
    inputs: &InputBits,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<(Vec<bool>, PauliOp)> {
    let resolved = c.resolve(inputs)?;
    let errors = ErrorHistory::sample(c.n(), c.depth(), spec, rng)?;
    run_with_errors(&resolved, &errors, rng)
}
