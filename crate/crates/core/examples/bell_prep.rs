//! Logical failure of single-shot Bell preparation against distance.

use shallowsep::cluster::{bell_prep_experiment, build_cluster};
use shallowsep::NoiseModel;

fn main() -> shallowsep::Result<()> {
    let p = 0.01;
    let trials = 10000;
    println!("d,p,trials,fail_x,fail_z,any,mean_rep_weight");
    for d in [3, 4, 5, 6, 7] {
        let lat = build_cluster(d)?;
        let s = bell_prep_experiment(&lat, p, NoiseModel::IidDepolarizing, trials, 7)?;
        println!("{},{},{},{},{},{},{:.3}", d, p, trials, s.logical_x_fail, s.logical_z_fail, s.any_fail, s.mean_rep_weight);
    }
    Ok(())
}
