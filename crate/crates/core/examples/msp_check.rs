//! Samples the noiseless depth-5 circuit on random instances and checks
//! the relation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shallowsep::magic_square::{bits_to_hex, check_relation, check_stst_condition, sample_msp_output, MspInstance};

fn main() -> shallowsep::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [4, 8, 16] {
        let inst = MspInstance::random(n, &mut rng)?;
        let z = sample_msp_output(n, &inst.z_in(), &mut rng)?;
        println!(
            "n={n} j={} k={} alpha={} beta={} z_out={} relation={} window={}",
            inst.j,
            inst.k,
            inst.alpha,
            inst.beta,
            bits_to_hex(&z),
            check_relation(&inst.z_in(), &z)?,
            check_stst_condition(&inst, &z)?
        );
    }
    Ok(())
}
