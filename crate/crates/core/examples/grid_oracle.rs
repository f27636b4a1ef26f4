//! Finite-difference checks: 2D ground energy, Ermakov state against
//! Crank-Nicolson, and (with `--full`) the 2D CBOD evolution.

use cbod::oracle::{cbod_vs_crank_nicolson, grid_ground_energy, scaling_vs_crank_nicolson};

fn main() -> cbod::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    println!("{}", grid_ground_energy(128)?.line());
    println!("{}", scaling_vs_crank_nicolson(20_000)?.line());
    // 2000 steps is already well inside tolerance; --full uses the default 20000.
    for c in cbod_vs_crank_nicolson(128, if full { 20_000 } else { 2_000 })? {
        println!("{}", c.line());
    }
    Ok(())
}
