//! Hartree atomic units: ħ = m = e = 1.

/// One atomic unit of time in attoseconds (ħ³/me⁴ = 24.188843 as).
pub const AU_TIME_ATTOSEC: f64 = 24.18884;

/// Fine-structure constant.
pub const ALPHA: f64 = 1.0 / 137.035999;

/// Threshold on |V(R)|·R² that certifies a potential as short-range beyond R,
/// in hartree·bohr².
pub const RANGE_EPSILON: f64 = 1e-10;

pub fn au_to_attosec(t: f64) -> f64 {
    t * AU_TIME_ATTOSEC
}

/// Wave number k = √(2E).
pub fn wavenumber(energy: f64) -> f64 {
    (2.0 * energy).sqrt()
}
