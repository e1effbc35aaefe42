//! Runs the fault-tolerant pipeline at a few noise rates.

use shallowsep::pipeline::{pass_rate, Engine, FtConfig, FtSystem, InstanceChoice};
use shallowsep::{NoiseModel, NoiseSpec};

fn main() -> shallowsep::Result<()> {
    let (n, d) = (2, 3);
    let sys = FtSystem::new(n, d)?;
    println!("{} cubes, {} qubits per block, logical depth {}", sys.cubes(), sys.m(), sys.logical_circuit().depth());
    for p in [0.0, 0.001, 0.003, 0.01] {
        let cfg = FtConfig {
            n,
            d,
            noise: NoiseSpec::uniform(p, NoiseModel::IidDepolarizing),
            instance: InstanceChoice::default(),
            trials: 500,
            seed: 3,
            engine: Engine::Frame,
        };
        println!("p={p}: pass rate {:.3}", pass_rate(&sys, &cfg)?);
    }
    Ok(())
}
