//! Classical value of the magic square game under every sign twist.

use shallowsep::magic_square::{classical_generalized_value, GameParams};

fn main() {
    println!("s,t,sp,tp,value");
    for p in GameParams::all() {
        println!("{},{},{},{},{}", p.s, p.t, p.sp, p.tp, classical_generalized_value(p));
    }
}
