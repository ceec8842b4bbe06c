//! Invariant density of the base tent map: saltus series against Ulam.

use fracsus::density::{invariant_density_ulam, saltus_density_map};
use fracsus::maps::make_tent_fixed_slope;
use fracsus::stepfn::transfer_tent;

fn main() -> fracsus::Result<()> {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    let (peak, slope) = fam.tent_at(0.0).expect("tent family");
    let d = saltus_density_map(fam.base(), 60)?;
    println!("saltus: {} jumps, tail bound {:.2e}, mass {:.15}", d.jumps.len(), d.tail_bound, d.sal.integral());
    let lr = transfer_tent(peak, slope, &d.sal);
    println!("|L rho - rho|_1 = {:.2e}", lr.l1_distance(&d.sal));

    for n in [100, 200, 400, 800] {
        let u = invariant_density_ulam(&fam, 0.0, n)?;
        println!("ulam n={n:4}: L1 distance to saltus {:.3e}", u.sal.l1_distance(&d.sal));
    }
    Ok(())
}
