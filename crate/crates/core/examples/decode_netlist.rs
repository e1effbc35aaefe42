//! Builds the classical decode netlist and replays one noisy trial on it.

use shallowsep::netlist::{classical_decode_circuit, decode_inputs, evaluate_decode};
use shallowsep::pipeline::{run_ft_trial, FtConfig, FtSystem};
use shallowsep::{trial_rng, NoiseModel, NoiseSpec};

fn main() -> shallowsep::Result<()> {
    let sys = FtSystem::new(2, 3)?;
    let c = classical_decode_circuit(&sys)?;
    println!(
        "{} gates, depth {} (logical depth {}), max fan-in {} <= {}",
        c.netlist.gates.len(),
        c.depth,
        c.logical_depth,
        c.max_fan_in,
        c.fan_in_bound
    );
    let cfg = FtConfig {
        n: 2,
        d: 3,
        noise: NoiseSpec::uniform(0.003, NoiseModel::IidDepolarizing),
        instance: Default::default(),
        trials: 1,
        seed: 0,
        engine: Default::default(),
    };
    let r = run_ft_trial(&sys, &cfg, &mut trial_rng(0, 0))?;
    let z = evaluate_decode(&sys, &c, &decode_inputs(&sys, &r.instance, &r.s, &r.y)?)?;
    println!("netlist matches pipeline: {}, pass: {}", z == r.z, r.pass);
    Ok(())
}
