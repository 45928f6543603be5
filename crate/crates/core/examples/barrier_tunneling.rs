//! JWKB analysis of the l = 3 two-valley screened Coulomb curve: turning
//! points, action, transmission and traversal time below the barrier top.

use partialwave::grid::RadialGrid;
use partialwave::potential::{effective_curve, PotentialSpec};
use partialwave::wkb::{barrier_segment, barrier_top, gamow_factor, traversal_time, tunneling_probability};

fn main() -> partialwave::Result<()> {
    let spec = PotentialSpec::yukawa(120.0, 0.25)?;
    let grid = RadialGrid::with_step(40.0, 0.002)?;
    let curve = effective_curve(&spec, 3, &grid)?;
    let top = barrier_top(&curve)?;
    println!("inner minimum {:?}", curve.inner_minimum);
    println!("barrier top {:.6} hartree at r = {:.4} bohr", top.value, top.r);

    for frac in [0.25, 0.5, 0.75, 0.9] {
        let seg = barrier_segment(&curve, frac * top.value)?;
        let t = traversal_time(&seg);
        println!(
            "E = {:.4}: [{:.4}, {:.4}] action {:.6} T {:.3e} traversal {:.2} as",
            seg.energy,
            seg.r_inner,
            seg.r_outer,
            seg.action,
            tunneling_probability(&seg),
            t.time_attosec
        );
    }
    println!("Gamow factor, z = 1, E = 1: {:.6}", gamow_factor(1.0, 1.0));
    Ok(())
}
