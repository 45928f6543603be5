//! Shape resonance of an l = 3 screened Coulomb well: background/resonant
//! phase split and a Fano fit of the partial cross section.

use partialwave::grid::RadialGrid;
use partialwave::potential::{effective_curve, PotentialSpec};
use partialwave::resonance::{classify, decompose_phase, fano_fit, FitReport};
use partialwave::scattering::{partial_cross_section, phase_scan};

fn main() -> partialwave::Result<()> {
    let spec = PotentialSpec::yukawa(27.5, 1.0)?;
    let grid = RadialGrid::with_step(120.0, 0.01)?;
    let energies: Vec<f64> = (0..401).map(|i| 0.08 + 0.08 * i as f64 / 400.0).collect();
    let curve = phase_scan(&spec, 3, &energies, &grid)?;

    let dec = decompose_phase(&curve, (0.08, 0.16))?;
    println!(
        "E_r = {:.6}  Gamma = {:.6}  identity residual {:.1e}",
        dec.e_r,
        dec.gamma,
        dec.decomposition.identity_residual()
    );

    let data: Vec<(f64, f64)> = curve
        .energies
        .iter()
        .zip(&curve.deltas)
        .map(|(&e, &d)| (e, partial_cross_section(3, (2.0 * e).sqrt(), d)))
        .collect();
    let fit = fano_fit(&data, None)?;
    println!("{}", serde_json::to_string_pretty(&FitReport::from(&fit)).unwrap());

    let veff = effective_curve(&spec, 3, &grid)?;
    println!("label: {:?}, barrier {:?}", classify(&veff, dec.e_r), veff.barrier);
    Ok(())
}
