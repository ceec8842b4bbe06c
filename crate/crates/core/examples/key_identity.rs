//! ρ_t - ρ₀ = (I - L_t)⁻¹ (L_t - L₀) ρ₀ on Ulam partitions of increasing size.

use fracsus::density::key_identity_check;
use fracsus::maps::make_tent_fixed_slope;

fn main() -> fracsus::Result<()> {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    for t in [0.005, -0.005] {
        for n in [100, 200, 400, 800] {
            let k = key_identity_check(&fam, t, n, 60)?;
            println!("t={t:+} n={n:4}: residual {:.3e}  refinement {:.3e}", k.residual, k.refinement);
        }
    }
    Ok(())
}
