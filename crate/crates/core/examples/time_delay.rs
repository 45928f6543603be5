//! Scattering time delays: hard-sphere advance against the causality bound
//! and the delay peak of a shape resonance.

use partialwave::grid::RadialGrid;
use partialwave::potential::PotentialSpec;
use partialwave::scattering::phase_scan;
use partialwave::timedelay::{causality_bound, causality_check, delay_structure_scan, time_delay, DelayMode};

fn main() -> partialwave::Result<()> {
    let grid = RadialGrid::with_step(200.0, 0.005)?;
    let sphere = PotentialSpec::hard_sphere(1.0)?;
    let energies: Vec<f64> = (0..41).map(|i| 0.01 * 10f64.powf(i as f64 / 20.0)).collect();
    let tau = time_delay(&phase_scan(&sphere, 0, &energies, &grid)?, DelayMode::FullScattering)?;
    for i in (0..41).step_by(10) {
        let e = tau.energies[i];
        println!("E = {e:.4}  tau = {:+.5}  bound = {:+.5}", tau.tau[i], causality_bound(1.0, e));
    }
    println!("violations: {}", causality_check(&tau, 1.0)?.violations.len());

    let well = PotentialSpec::yukawa(27.5, 1.0)?;
    let energies: Vec<f64> = (0..401).map(|i| 0.08 + 0.08 * i as f64 / 400.0).collect();
    let tau = time_delay(&phase_scan(&well, 3, &energies, &grid)?, DelayMode::FullScattering)?;
    for f in delay_structure_scan(&tau)? {
        println!(
            "{:?} at E = {:.6}: tau = {:.2} a.u. ({:.0} as), FWHM {:.2e}",
            f.kind,
            f.energy,
            f.tau_extremum,
            f.tau_extremum * partialwave::units::AU_TIME_ATTOSEC,
            f.fwhm
        );
    }
    Ok(())
}
