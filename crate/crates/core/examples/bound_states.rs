//! Bound-state ladders of a deep square well and a screened Coulomb well.

use partialwave::potential::PotentialSpec;
use partialwave::radialsolver::find_bound_states;

fn main() -> partialwave::Result<()> {
    let well = PotentialSpec::square_well(60.0, 1.0)?;
    for ell in 0..3 {
        let states = find_bound_states(&well, ell, (-60.0, -1e-4), 10)?;
        let energies: Vec<String> = states.iter().map(|s| format!("{:.6}", s.energy)).collect();
        println!("square well l={ell}: {}", energies.join(", "));
    }

    let yukawa = PotentialSpec::yukawa(2.0, 5.0)?;
    let ground = &find_bound_states(&yukawa, 0, (-4.0, -1e-4), 10)?[0];
    let norm: f64 = ground
        .r
        .windows(2)
        .zip(ground.u.windows(2))
        .map(|(r, u)| 0.5 * (r[1] - r[0]) * (u[0] * u[0] + u[1] * u[1]))
        .sum();
    println!("Yukawa Z=2 d=5: E0 = {:.6} (hydrogenic -2), trapezoid norm {norm:.6}", ground.energy);
    Ok(())
}
