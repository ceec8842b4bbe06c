//! Modulus of continuity of t -> ρ_t in L¹ for the varying-slope tent family.

use fracsus::maps::make_tent_varying_slope;
use fracsus::response::{density_distance_curve, modulus_fit_points, ModulusModel};

fn main() -> fracsus::Result<()> {
    let fam = make_tent_varying_slope(1.8, 0.15)?;
    let ts: Vec<f64> = (0..=30).map(|i| 10f64.powf(-4.0 + 0.1 * i as f64)).collect();
    let d = density_distance_curve(&fam, &ts, 60)?;
    for (t, x) in ts.iter().zip(&d).step_by(5) {
        println!("t={t:.1e}: |rho_t - rho_0|_1 = {x:.4e}  ratio to t|log t| {:.3}", x / (t * t.ln().abs()));
    }
    for model in [ModulusModel::Power, ModulusModel::PowerLog] {
        let f = modulus_fit_points(&ts, &d, model)?;
        println!("{model:?}: exponent {:.4} +- {:.4}, rms residual {:.2e}", f.exponent, f.exponent_stderr, f.residual);
    }
    Ok(())
}
