//! Frozen susceptibility computed from the parameter side and from the
//! spatial side (transfer resolvent applied to the kernel-weighted source).

use fracsus::maps::make_tent_fixed_slope;
use fracsus::marchaud::{MarchaudKernel, MarchaudSide};
use fracsus::observable::Observable;
use fracsus::susceptibility::{response_susceptibility_tent, EngineConfig, Propagation, SeriesNodes, SpatialConfig};
use num_complex::Complex64;

fn main() -> fracsus::Result<()> {
    let fam = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    let phi = Observable::identity();
    let k = MarchaudKernel::truncated_real(0.5, fam.eps1())?;
    let zs: Vec<Complex64> = [0.0, 0.5, 1.0].iter().map(|&z| Complex64::new(z, 0.0)).collect();
    let cfg = EngineConfig::default();
    let frozen = SeriesNodes::build(&fam, &phi, Propagation::Frozen, &cfg, &zs)?.resummed(&k, MarchaudSide::TwoSided)?;
    for cells in [16_000, 64_000] {
        let sp = SpatialConfig {
            cells,
            ..Default::default()
        };
        let (_, spatial) = response_susceptibility_tent(&fam, &phi, &k, &zs, &cfg, &sp)?;
        for (z, ((f, _), s)) in zs.iter().zip(frozen.iter().zip(&spatial)) {
            println!("cells={cells:6} z={}: parameter {:.8}  spatial {:.8}  |diff| {:.1e}", z.re, f.re, s.re, (f - s).norm());
        }
    }
    Ok(())
}
