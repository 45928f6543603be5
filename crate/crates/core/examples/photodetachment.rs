//! Photodetachment from the 1-node p state of a screened Coulomb well:
//! channel cross sections, the d-channel Cooper minimum, the threshold law
//! and the photoelectron delay across the minimum.

use partialwave::grid::RadialGrid;
use partialwave::photo::{
    channel_delay, continuum_extent, dipole_scan, find_cooper_minimum, photodetachment_cross_section,
    threshold_exponent_fit,
};
use partialwave::potential::PotentialSpec;
use partialwave::radialsolver::find_bound_states;
use partialwave::timedelay::delay_structure_scan;

fn main() -> partialwave::Result<()> {
    let spec = PotentialSpec::yukawa(20.0, 0.5)?;
    let initial = find_bound_states(&spec, 1, (-400.0, -1e-4), 16)?.into_iter().find(|s| s.n_radial == 1).unwrap();
    println!("initial p state: E = {:.8}", initial.energy);

    let grid = RadialGrid::with_step(60.0, 0.01)?.extended(continuum_extent(&spec, 1e-4));
    let energies: Vec<f64> = (1..=100).map(|i| 0.05 * i as f64).collect();
    let pd = photodetachment_cross_section(&initial, &spec, &energies, &grid)?;
    for scan in &pd.channels {
        match find_cooper_minimum(scan) {
            Ok(cm) => {
                println!("l' = {}: Cooper minimum at E = {:.8}", scan.final_ell, cm.e_cm);
                let tau = channel_delay(scan, Some(&cm), &grid)?;
                for f in delay_structure_scan(&tau)? {
                    println!("  delay {:?} at {:.6}", f.kind, f.energy);
                }
            }
            Err(e) => println!("l' = {}: {e}", scan.final_ell),
        }
        let near: Vec<f64> = (0..12).map(|i| 1e-4 * 10f64.powf(i as f64 / 11.0)).collect();
        let fit =
            threshold_exponent_fit(&dipole_scan(&initial, &spec, scan.final_ell, &near, &grid)?, 1.0, scan.final_ell)?;
        println!("  threshold exponent {:.4} (Wigner {})", fit.exponent, fit.expected);
    }
    Ok(())
}
