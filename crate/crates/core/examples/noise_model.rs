//! Empirical inclusion probabilities of iid depolarizing noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shallowsep::noise::sample_iid_pauli;
use shallowsep::NoiseModel;

fn main() -> shallowsep::Result<()> {
    let (n, p, samples) = (4, 0.1, 200_000);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut hits = [0usize; 4];
    for _ in 0..samples {
        let e = sample_iid_pauli(n, p, NoiseModel::IidDepolarizing, &mut rng)?;
        for (k, h) in hits.iter_mut().enumerate() {
            *h += usize::from((0..=k).all(|q| e.x(q) || e.z(q)));
        }
    }
    for (k, h) in hits.iter().enumerate() {
        println!("|F|={}: {:.5} (p^|F| = {:.5})", k + 1, *h as f64 / samples as f64, p.powi(k as i32 + 1));
    }
    Ok(())
}
