//! Brute-force barrier integrals.

use crate::square_well::bisect;

/// Turning points of `v(r) = e` on either side of a barrier top `r_peak`,
/// found by stepping outward in increments of `step` and bisecting.
pub fn turning_points(v: &dyn Fn(f64) -> f64, e: f64, r_peak: f64, step: f64) -> (f64, f64) {
    let g = |r: f64| v(r) - e;
    assert!(g(r_peak) > 0.0, "energy above barrier top");
    let mut r = r_peak;
    while g(r - step) > 0.0 {
        r -= step;
        assert!(r - step > 0.0, "no inner turning point");
    }
    let inner = bisect(&g, r - step, r, 1e-14);
    let mut r = r_peak;
    while g(r + step) > 0.0 {
        r += step;
    }
    let outer = bisect(&g, r, r + step, 1e-14);
    (inner, outer)
}

/// ∫ √(2·max(v − e, 0)) dr over [r_in, r_out] by the plain trapezoid rule
/// with `n_nodes` equally spaced nodes.
pub fn action_trapezoid(v: &dyn Fn(f64) -> f64, e: f64, r_in: f64, r_out: f64, n_nodes: usize) -> f64 {
    let h = (r_out - r_in) / (n_nodes - 1) as f64;
    let f = |r: f64| (2.0 * (v(r) - e)).max(0.0).sqrt();
    let mut sum = 0.5 * (f(r_in) + f(r_out));
    for i in 1..n_nodes - 1 {
        sum += f(r_in + h * i as f64);
    }
    sum * h
}

/// Action under the repulsive Coulomb barrier z/r at energy e, from the
/// origin to r_t = z/e, by midpoint sums after the substitution r = r_t·sin²θ
/// (which removes both endpoint singularities).
pub fn coulomb_action_midpoint(z: f64, e: f64, n: usize) -> f64 {
    let rt = z / e;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let h = half_pi / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let th = (i as f64 + 0.5) * h;
        let r = rt * th.sin().powi(2);
        let dr = 2.0 * rt * th.sin() * th.cos();
        sum += (2.0 * (z / r - e)).max(0.0).sqrt() * dr;
    }
    sum * h
}

/// Interior local extrema of `v` sampled at `n` uniform points on
/// [r_lo, r_hi], each polished by golden-section search (location good to
/// about √ε, value to ε).
/// Returned as (r, v(r), is_maximum) in ascending r.
pub fn dense_extrema(v: &dyn Fn(f64) -> f64, r_lo: f64, r_hi: f64, n: usize) -> Vec<(f64, f64, bool)> {
    let h = (r_hi - r_lo) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|i| v(r_lo + h * i as f64)).collect();
    let mut out = Vec::new();
    for i in 1..n - 1 {
        let is_max = vals[i] > vals[i - 1] && vals[i] >= vals[i + 1];
        let is_min = vals[i] < vals[i - 1] && vals[i] <= vals[i + 1];
        if !(is_max || is_min) {
            continue;
        }
        let sign = if is_max { -1.0 } else { 1.0 };
        let f = |r: f64| sign * v(r);
        let r = golden(&f, r_lo + h * (i - 1) as f64, r_lo + h * (i + 1) as f64, 1e-12);
        out.push((r, v(r), is_max));
    }
    out
}

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while b - a > tol {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangular_barrier_is_exact() {
        let vb = 2.0;
        let v = move |r: f64| if (1.0..=3.0).contains(&r) { vb } else { 0.0 };
        let s = action_trapezoid(&v, 0.5, 1.0, 3.0, 1001);
        assert!((s - 2.0 * (2.0f64 * 1.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coulomb_action_closed_form() {
        // S = π z / √(2E)
        let s = coulomb_action_midpoint(1.0, 1.0, 20_000);
        assert!((s - std::f64::consts::PI / 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn extrema_of_a_cosine() {
        let e = dense_extrema(&|r: f64| r.cos(), 0.5, 7.0, 1000);
        assert_eq!(e.len(), 2);
        assert!((e[0].0 - std::f64::consts::PI).abs() < 1e-7 && !e[0].2);
        assert!((e[1].0 - 2.0 * std::f64::consts::PI).abs() < 1e-7 && e[1].2);
    }
}
