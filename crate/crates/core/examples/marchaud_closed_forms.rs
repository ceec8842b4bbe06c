//! Marchaud derivative at 0 of a Heaviside step and of sin.

use fracsus::marchaud::{heaviside_closed, marchaud_fn, MarchaudKernel, MarchaudOptions, MarchaudSide, TailModel};

fn main() -> fracsus::Result<()> {
    println!("{:>5} {:>6} {:>16} {:>16}", "eta", "x", "numeric", "closed");
    for eta in [0.25, 0.5, 0.75] {
        let k = MarchaudKernel::full_real(eta)?;
        for x in [0.2f64, -0.2, 1.0] {
            let opts = MarchaudOptions {
                hints: vec![x.abs()],
                ..Default::default()
            };
            let v = marchaud_fn(|t| if x > t { 1.0 } else { 0.0 }, 0.0, &k, MarchaudSide::TwoSided, &opts)?;
            println!("{eta:5} {x:6} {:16.12} {:16.12}", v.re(), heaviside_closed(x, 0.0, eta)?);
        }
    }

    let opts = MarchaudOptions {
        upper: 2000.0,
        tail: TailModel::Bounded(1.0),
        ..Default::default()
    };
    println!("\nsin at 0 tends to cos(0) = 1 as eta -> 1");
    for eta in [0.5, 0.9, 0.95, 0.99] {
        let v = marchaud_fn(f64::sin, 0.0, &MarchaudKernel::full_real(eta)?, MarchaudSide::TwoSided, &opts)?;
        let exact = (std::f64::consts::FRAC_PI_2 * eta).sin();
        println!("eta={eta:4}: {:.6}  sin(pi eta / 2) = {exact:.6}", v.re());
    }
    Ok(())
}
