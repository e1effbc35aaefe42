//! Stabilizer simulation of noisy shallow Clifford circuits.

pub mod circuit;
pub mod cli;
pub mod cluster;
pub mod error;
mod gf2;
pub mod lightcone;
pub mod magic_square;
pub mod matching;
pub mod netlist;
pub mod noise;
pub mod pauli;
pub mod pipeline;
pub mod surface_code;
pub mod tableau;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use circuit::{conjugate_pauli, Control, Gate, GateKind, InputBits, LayeredCliffordCircuit, ResolvedCircuit};
pub use cluster::{build_cluster, run_bell_prep, ClusterLattice, PrepOutcome, Repair};
pub use error::{Error, Result};
pub use matching::{min_weight_pauli_for_syndrome, DefectGraph, PauliType};
pub use noise::{merge_errors, run_noisy_circuit, sample_iid_pauli, NoiseModel, NoiseSpec};
pub use pauli::PauliOp;
pub use surface_code::SurfaceCodeLayout;
pub use tableau::StabilizerTableau;

/// Random stream for trial `trial` of a run seeded with `seed`. Streams do
/// not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
