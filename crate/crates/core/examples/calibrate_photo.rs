//! Calibrates the Cl⁻-like and Ne-like photodetachment configs against the
//! independent RK4/trapezoid dipole pipeline.
//!
//! Usage: calibrate_photo [Z d nodes]
//! Without arguments the frozen corpus parameters are re-checked.

use partialwave_oracles::dipole::{dense_dipole_zero, refine_zero, YukawaModel};

fn report(z: f64, d: f64, nodes: usize) {
    let model = YukawaModel::new(z, d);
    let Some((e_b, _, _)) = model.bound_state(1, nodes) else {
        println!("Z={z} d={d}: no p state with {nodes} nodes");
        return;
    };
    println!("Z={z} d={d} p state, {nodes} nodes: E_b = {e_b:.10}");
    for final_ell in [0, 2] {
        // 10x finer than the 0.05 hartree config grid over [0.05, 5]
        let brackets = dense_dipole_zero(&model, 1, nodes, final_ell, 0.05, 5.0, 991);
        if brackets.is_empty() {
            println!("  l'={final_ell}: no sign change in [0.05, 5]");
        }
        for (lo, hi, _) in brackets {
            let e = refine_zero(&model, 1, nodes, final_ell, lo, hi, 1e-11);
            println!("  l'={final_ell}: sign change in [{lo:.6}, {hi:.6}], zero at {e:.10}");
        }
    }
}

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if let [z, d, nodes] = args[..] {
        report(z, d, nodes as usize);
        return;
    }
    report(20.0, 0.5, 1);
    report(3.0, 2.0, 0);
}
