//! Normal modes, BOA frame and static fidelity of one coupled pair.

use cbod::oscillators::{boa_frame, exact_energy, geometric_quantities, normal_mode_frame, static_fidelity};
use cbod::params::OscillatorParams;

fn main() -> cbod::Result<()> {
    let p = OscillatorParams::new(10.0, 1.0, 100.0, 100.0, 50.0)?;
    let f = normal_mode_frame(&p, 0.0)?;
    let b = boa_frame(&p, 0.0)?;
    println!("{f:#?}");
    println!("{b:#?}");
    println!("E00 = {:.8}, E10 = {:.8}", exact_energy(&p, 0.0, 0, 0)?, exact_energy(&p, 0.0, 1, 0)?);
    println!("{:#?}", geometric_quantities(&p, 0.0)?);
    println!("F = {:.10}", static_fidelity(&p, 0.0)?);
    Ok(())
}
