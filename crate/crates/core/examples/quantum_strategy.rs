//! Plays the two-Bell-pair strategy on every input pair.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shallowsep::magic_square::{check_generalized_win, play_quantum_round, GameInput, GameParams};

fn main() -> shallowsep::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for alpha in GameInput::ALL {
        for beta in GameInput::ALL {
            let wins = (0..1000)
                .map(|_| play_quantum_round(alpha, beta, &mut rng))
                .filter(|r| matches!(r, Ok((x, y)) if check_generalized_win(alpha, beta, *x, *y, GameParams::TRIVIAL)))
                .count();
            println!("alpha={alpha} beta={beta}: {wins}/1000");
        }
    }
    Ok(())
}
