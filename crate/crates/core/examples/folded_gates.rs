//! Conjugates the logical operators through the folded H and S circuits.

use shallowsep::{ResolvedCircuit, SurfaceCodeLayout};

fn main() -> shallowsep::Result<()> {
    let l = SurfaceCodeLayout::new(3)?;
    let h = ResolvedCircuit { n: l.m(), layers: l.h_layers() };
    let s = ResolvedCircuit { n: l.m(), layers: l.s_layers() };
    let (x, z) = (l.logical_x(), l.logical_z());
    let conj = |c: &ResolvedCircuit, p: &shallowsep::PauliOp| {
        let mut out = p.clone();
        c.conjugate(&mut out);
        out
    };
    println!("X  = {x}\nZ  = {z}");
    println!("H Z H = {}", conj(&h, &z));
    println!("S X S^-1 = {}", conj(&s, &x));
    let a = l.vertex_stabilizer(0);
    println!("A_0 = {a}\nH A_0 H = {}", conj(&h, &a));
    Ok(())
}
