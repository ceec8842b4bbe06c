//! Expansion of the one-sided susceptibility in ζ around η₀ through
//! log-weighted kernels, compared with the direct value at η₀ + ζ.

use fracsus::maps::make_tent_fixed_slope;
use fracsus::observable::Observable;
use fracsus::susceptibility::{zeta_expansion_check, EngineConfig};
use num_complex::Complex64;

fn main() -> fracsus::Result<()> {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    let cfg = EngineConfig::default();
    for zeta in [Complex64::new(0.05, 0.0), Complex64::new(0.0, 0.1), Complex64::new(-0.1, 0.05)] {
        let r = zeta_expansion_check(&fam, &Observable::identity(), 0.3, zeta, 8, &cfg)?;
        println!("zeta = {zeta}");
        println!("  direct    {:.10}", r.direct);
        println!("  expansion {:.10}", r.expansion);
        println!("  |diff| {:.2e}, last term {:.2e}", r.discrepancy, r.last_term);
        println!("  |Psi_n| <= C B^n n!: C = {:.3}, B = {:.3}", r.growth_c, r.growth_b);
    }
    Ok(())
}
