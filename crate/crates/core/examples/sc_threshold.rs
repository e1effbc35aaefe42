//! Memory failure rate of the surface-code decoder under iid X noise.

use shallowsep::surface_code::{failure_bound, memory_failures_seeded};
use shallowsep::SurfaceCodeLayout;

fn main() -> shallowsep::Result<()> {
    let trials = 20000;
    println!("d,q,rate,bound");
    for q in [0.005, 0.01, 0.02] {
        for d in [3, 5, 7] {
            let fails = memory_failures_seeded(&SurfaceCodeLayout::new(d)?, q, trials, 0)?;
            println!("{d},{q},{:.2e},{:.3}", fails as f64 / trials as f64, failure_bound(d, q));
        }
    }
    Ok(())
}
