//! Twisted cohomological solution α, horizontality index and the identity
//! linking the critical orbit, the perturbation and α.

use fracsus::cohomology::{alpha_solve, horizontality_index, magic_identity_residual, tce_residual};
use fracsus::maps::{critical_orbit, make_tent_fixed_slope, make_tent_varying_slope};

fn main() -> fracsus::Result<()> {
    let fixed = make_tent_fixed_slope(1.8, 0.05, 0.01)?;
    let a0 = fixed.lambda0() - 1.0 + fixed.t0();
    for x in [-0.7, 0.1, 0.6] {
        let a = alpha_solve(&fixed, x, 80)?;
        println!("alpha({x:+}) = {:.12}  x / a0 = {:.12}", a.value, x / a0);
    }

    let varying = make_tent_varying_slope(1.8, 0.1)?;
    for (name, fam) in [("fixed slope", &fixed), ("varying slope", &varying)] {
        let h = horizontality_index(fam, 60)?;
        let v = fam.v0_fn();
        let res = tce_residual(fam.base(), &|y| v(y), 0.3, 60)?;
        println!("{name}: index {:.3e} (tail {:.1e}), TCE residual at 0.3 {:.2e}", h.value, h.tail_bound, res);
    }

    let orbit = critical_orbit(fixed.base(), 80)?;
    for j in [1, 3, 5, 10] {
        let r = magic_identity_residual(fixed.base(), &orbit, &|_| 1.0, 1.0, j, 60)?;
        println!("orbit identity j={j:2}: residual {r:.2e}");
    }
    Ok(())
}
