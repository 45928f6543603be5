//! Closed-form s-wave results for the attractive square well
//! V(r) = -V0 for r < a, 0 outside.

/// δ₀ = −ka + arctan[(k/κ_in)·tan(κ_in a)], κ_in = √(2(E+V0)).
///
/// The value is the principal branch in (−π/2, π/2].
pub fn phase_shift(v0: f64, a: f64, energy: f64) -> f64 {
    let k = (2.0 * energy).sqrt();
    let kin = (2.0 * (energy + v0)).sqrt();
    let raw = -k * a + ((k / kin) * (kin * a).tan()).atan();
    principal(raw)
}

/// Reduce an angle modulo π into (−π/2, π/2].
pub fn principal(delta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut d = delta - pi * (delta / pi).round();
    if d <= -pi / 2.0 {
        d += pi;
    }
    if d > pi / 2.0 {
        d -= pi;
    }
    d
}

/// s-wave bound-state energies, ascending, each to 1e-12 hartree.
///
/// Roots of κ_in·cos(κ_in a) + κ·sin(κ_in a), which vanishes exactly where
/// κ_in·cot(κ_in a) = −κ and has no poles. Brackets come from a uniform scan
/// of (−V0, 0) fine enough that adjacent roots never share a cell.
pub fn bound_energies(v0: f64, a: f64) -> Vec<f64> {
    let f = |e: f64| {
        let kin = (2.0 * (e + v0)).sqrt();
        let kappa = (-2.0 * e).sqrt();
        kin * (kin * a).cos() + kappa * (kin * a).sin()
    };
    let n_scan = 200_000;
    let lo = -v0;
    let hi = 0.0;
    let step = (hi - lo) / n_scan as f64;
    let mut roots = Vec::new();
    let mut e_prev = lo + step * 1e-6;
    let mut f_prev = f(e_prev);
    for i in 1..=n_scan {
        let e = if i == n_scan { -1e-15 } else { lo + step * i as f64 };
        let fe = f(e);
        if f_prev == 0.0 {
            roots.push(e_prev);
        } else if f_prev.signum() != fe.signum() {
            roots.push(bisect(&f, e_prev, e, 1e-12));
        }
        e_prev = e;
        f_prev = fe;
    }
    roots
}

/// Bisection on a sign change of `f` in [lo, hi] down to `tol`.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// u(r) for the s-wave scattering solution, normalized so u ≈ sin(κ_in r)
/// inside the well.
pub fn scattering_wavefunction(v0: f64, a: f64, energy: f64, r: f64) -> f64 {
    let k = (2.0 * energy).sqrt();
    let kin = (2.0 * (energy + v0)).sqrt();
    if r < a {
        (kin * r).sin()
    } else {
        // continuity of u and u' at r = a
        let ua = (kin * a).sin();
        let dua = kin * (kin * a).cos();
        ua * (k * (r - a)).cos() + dua / k * (k * (r - a)).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_well_gives_no_shift() {
        assert!(phase_shift(1e-12, 1.0, 0.5).abs() < 1e-10);
    }

    #[test]
    fn kin_a_equal_pi_reduces_to_hard_core_value() {
        // κ_in a = π  →  tan(κ_in a) = 0  →  δ₀ = −ka (mod π)
        let a = 1.0;
        let e = 0.5;
        let v0 = std::f64::consts::PI.powi(2) / 2.0 - e;
        let d = phase_shift(v0, a, e);
        assert!((d - principal(-1.0)).abs() < 1e-12);
    }

    #[test]
    fn state_count_threshold() {
        let crit = std::f64::consts::PI.powi(2) / 8.0;
        assert!(bound_energies(0.95 * crit, 1.0).is_empty());
        assert_eq!(bound_energies(1.05 * crit, 1.0).len(), 1);
        // V0 a² between (3π/2)²/2 and (5π/2)²/2 supports exactly two
        assert_eq!(bound_energies(20.0, 1.0).len(), 2);
    }

    #[test]
    fn deep_well_approaches_infinite_well_levels() {
        let v0 = 1.0e5;
        let e = bound_energies(v0, 1.0);
        let pi = std::f64::consts::PI;
        // E_n + V0 → (nπ)²/2 as V0 → ∞
        for (n, en) in e.iter().take(3).enumerate() {
            let exact = ((n + 1) as f64 * pi).powi(2) / 2.0;
            assert!(((en + v0) - exact).abs() / exact < 1e-2);
        }
    }
}
