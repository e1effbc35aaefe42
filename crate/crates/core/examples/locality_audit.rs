//! Longest two-qubit gate of the embedded pipeline circuit.

use shallowsep::pipeline::{locality_audit, FtSystem};

fn main() -> shallowsep::Result<()> {
    for (n, d) in [(2, 3), (4, 3), (2, 5)] {
        let sys = FtSystem::new(n, d)?;
        println!("n={n} d={d}: diameter {}", locality_audit(sys.full_circuit())?);
    }
    Ok(())
}
