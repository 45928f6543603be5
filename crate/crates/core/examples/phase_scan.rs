//! s- and p-wave phase shifts of a square well, Levinson counting and the
//! total cross section.

use partialwave::grid::RadialGrid;
use partialwave::potential::PotentialSpec;
use partialwave::radialsolver::find_bound_states;
use partialwave::scattering::{anchor_high_energy, cross_section, levinson_count, phase_scan};

fn main() -> partialwave::Result<()> {
    let spec = PotentialSpec::square_well(2.0, 1.0)?;
    let grid = RadialGrid::with_step(200.0, 0.005)?;
    let energies: Vec<f64> = (0..120).map(|i| 0.01 * 1.1f64.powi(i)).collect();

    let curves = [phase_scan(&spec, 0, &energies, &grid)?, phase_scan(&spec, 1, &energies, &grid)?];
    for e in [0.01, 0.1, 1.0] {
        let cs = cross_section(&curves, e)?;
        println!(
            "E = {e:>5}  d0 = {:+.6}  d1 = {:+.6}  sigma = {:.6}",
            curves[0].delta_at(e)?,
            curves[1].delta_at(e)?,
            cs.sigma_total
        );
    }

    let (anchored, shift) = anchor_high_energy(&spec, &curves[0], &grid, 2e3, 40)?;
    let bound = find_bound_states(&spec, 0, (-2.0, -1e-6), 8)?;
    println!("Levinson count {} (branch shift {shift}), bound s states {}", levinson_count(&anchored), bound.len());
    Ok(())
}
