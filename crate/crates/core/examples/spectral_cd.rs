//! Counterdiabatic terms: the analytic squeeze against the spectral
//! construction, and the CBOD effective springs along a ramp.

use cbod::cd::{cbod_effective_springs, exact_cd};
use cbod::oracle::spectral_cd;
use cbod::params::{OscillatorParams, RampSchedule};

fn main() -> cbod::Result<()> {
    for c in spectral_cd()? {
        println!("{}", c.line());
    }
    let p = OscillatorParams::new(100.0, 1.0, RampSchedule::new(50.0, 25.0, 0.2)?, 100.0, 50.0)?;
    println!("{:>5} {:>11} {:>11} {:>10} {:>10}", "t", "mode 1 CD", "mode 2 CD", "gamma_S", "gamma_F");
    for i in 0..=10 {
        let t = 0.02 * i as f64;
        let [a, b] = exact_cd(&p, t)?;
        let g = cbod_effective_springs(&p, t)?;
        println!("{t:>5.2} {:>+11.5} {:>+11.5} {:>10.4} {:>10.4}", a.coeff, b.coeff, g.gamma_slow, g.gamma_fast);
    }
    Ok(())
}
