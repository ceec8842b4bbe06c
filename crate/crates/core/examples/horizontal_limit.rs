//! η -> 1 limit of Ψ_φ(η, 1) against the classical susceptibility, the
//! real-analytic TCE form and the conjugacy derivative; the full-frozen gap.

use fracsus::maps::make_tent_fixed_slope;
use fracsus::observable::Observable;
use fracsus::susceptibility::{classical_susceptibility, horizontal_limit_check, EngineConfig};
use num_complex::Complex64;

fn main() -> fracsus::Result<()> {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    let phi = Observable::identity();
    let r = horizontal_limit_check(&fam, &phi, &[0.9, 0.95, 0.975], &[0.7, 0.8, 0.9, 0.95], &EngineConfig::default())?;
    for ((eta, p), e) in r.etas.iter().zip(&r.psi).zip(&r.psi_err) {
        println!("Psi({eta}, 1) = {p:.8} +- {e:.1e}");
    }
    println!("extrapolated to eta = 1: {:.8}", r.extrapolated);
    println!("classical (z = 1):       {:.8}", r.classical);
    println!("reTCE:                   {:.8}", r.retce);
    if let Some(c) = r.conjugacy {
        println!("conjugacy derivative:    {c:.8}");
    }
    println!("max pairwise relative difference {:.2e}", r.max_pairwise_rel);

    println!("\n|Psi - Psi_frozen| at z = 1 ({} frozen panels)", r.frozen_panels);
    for ((eta, g), e) in r.gap_etas.iter().zip(&r.gap).zip(&r.gap_err) {
        println!("eta={eta:4}: {g:.5} +- {e:.1e}");
    }
    println!("decreasing: {}", r.gap_decreasing);

    let inside = classical_susceptibility(&fam, &phi, Complex64::new(0.5, 0.0), 60)?;
    println!("\nclassical susceptibility at z = 0.5: {:.8}", inside.value.re);
    Ok(())
}
