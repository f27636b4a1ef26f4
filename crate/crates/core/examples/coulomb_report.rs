//! Hydrogenic fast subsystem: Berry connection (closed form vs quadrature),
//! diagonal CD, radial nodes and the printed-form discrepancies.

use cbod::coulomb::{cd_potential, coulomb_report, HydrogenicState};

fn main() -> cbod::Result<()> {
    println!("{:>2} {:>2} {:>14} {:>14} {:>12}  nodes", "n", "l", "berry formula", "berry numeric", "diagonal CD");
    let reports = coulomb_report(1.0, 1.0, 1.0, 1.0, 4)?;
    for r in &reports {
        println!(
            "{:>2} {:>2} {:>14.6} {:>14.2e} {:>12.2e}  {:?}",
            r.n, r.l, r.berry_formula, r.berry_numeric, r.diagonal_cd, r.canonical_poles
        );
    }
    for d in reports.iter().flat_map(|r| r.discrepancies(1e-8)) {
        println!("discrepancy {d}");
    }

    let s = HydrogenicState::new(2, 0, 1.0, 1.0)?;
    let radii: Vec<f64> = (0..=8).map(|i| 0.5 * i as f64).collect();
    let profile = cd_potential(&s, 1.0, &radii)?;
    println!("(2,0) CD coefficient, gdot/g = 1:");
    for (r, c) in profile.radii.iter().zip(&profile.coefficients) {
        match c {
            Some(c) => println!("  r = {r:<4} {c:+.6}"),
            None => println!("  r = {r:<4} pole"),
        }
    }
    Ok(())
}
