//! Response curve t -> ∫φ ρ_t, its Marchaud derivative at 0 and the
//! conjugacy derivative it approaches as η -> 1.

use fracsus::maps::make_tent_fixed_slope;
use fracsus::marchaud::{geometric_grid, MarchaudKernel};
use fracsus::observable::Observable;
use fracsus::response::{conjugacy_derivative, marchaud_of_response, response_curve, DensityMethod};

fn main() -> fracsus::Result<()> {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    let e = fam.eps1();
    let phi = Observable::identity();
    let grid = geometric_grid(e, 0.8, 60, &[2.0 * e, 3.0 * e]);
    let curve = response_curve(&fam, &phi, &grid, DensityMethod::Saltus { k: 60 })?;

    println!("{:>12} {:>14}", "t", "R(t)");
    for (t, r) in curve.t.iter().zip(&curve.values).step_by(8) {
        println!("{t:12.4e} {r:14.10}");
    }

    let d = conjugacy_derivative(&fam, &phi)?;
    println!("\nconjugacy derivative R'(0) = {d:.8}");
    for eta in [0.5, 0.8, 0.9, 0.95, 0.99] {
        let tr = marchaud_of_response(&curve, &MarchaudKernel::truncated_real(eta, e)?)?.re();
        let full = marchaud_of_response(&curve, &MarchaudKernel::full_real(eta)?)?.re();
        println!("eta={eta:4}: truncated {tr:.8}  full {full:.8}");
    }
    Ok(())
}
