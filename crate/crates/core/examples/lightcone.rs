//! Lightcones of a small circuit and the pair event rate of a local solver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shallowsep::lightcone::{backward_lightcone, event_ec_bound, event_ec_rate, random_local_solver, xor_tree};

fn main() -> shallowsep::Result<()> {
    let tree = xor_tree(3);
    let out = &tree.outputs[0];
    println!("xor tree of depth 3: {} inputs in the cone of {out}", backward_lightcone(&tree, out)?.len());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 2000;
    let solver = random_local_solver(n, 1, 2, 1, &mut rng)?;
    println!(
        "local solver n={n}: event rate {:.3}, lower bound {:.3}",
        event_ec_rate(&solver, 300, &mut rng)?,
        event_ec_bound(n, 2, 1)
    );
    Ok(())
}
