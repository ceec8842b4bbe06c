//! Power series Ψ_φ(η, z) = Σ_k c_k z^k, its geometric decay and resummed values.

use fracsus::maps::make_tent_fixed_slope;
use fracsus::marchaud::{MarchaudKernel, MarchaudSide};
use fracsus::observable::Observable;
use fracsus::susceptibility::{series_evaluate, EngineConfig, Propagation, SeriesNodes};
use num_complex::Complex64;

fn main() -> fracsus::Result<()> {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    let phi = Observable::identity();
    let zs: Vec<Complex64> = [0.0, 0.5, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let cfg = EngineConfig::default();

    for (name, prop) in [("full", Propagation::Full), ("frozen", Propagation::Frozen)] {
        let nodes = SeriesNodes::build(&fam, &phi, prop, &cfg, &zs)?;
        for eta in [0.25, 0.5, 0.75] {
            let k = MarchaudKernel::truncated_real(eta, fam.eps1())?;
            let s = nodes.series(&k, MarchaudSide::TwoSided)?;
            let decay = s.decay.as_ref().map_or("none".into(), |d| format!("r = {:.3}", d.r));
            println!("{name:6} eta={eta}: c0 = {:.6e}  c10 = {:.3e}  decay {decay}", s.coeffs[0].re, s.coeffs[10].re);
            let partial = series_evaluate(&s, zs[1]);
            let resummed = nodes.resummed(&k, MarchaudSide::TwoSided)?;
            println!(
                "        z=0.5 partial sum {:.8} (tail {:.1e}), resummed {:.8}; z=1 resummed {:.8}",
                partial.value.re, partial.tail_bound, resummed[1].0.re, resummed[2].0.re
            );
        }
    }
    Ok(())
}
