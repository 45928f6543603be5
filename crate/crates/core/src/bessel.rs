//! Spherical Bessel functions of real argument.
//!
//! j_ℓ comes from Miller's downward recurrence normalized against j₀ or j₁,
//! y_ℓ from upward recurrence; each is used only in its stable direction.
//! The Riccati forms ĵ_ℓ(x) = x·j_ℓ(x), ŷ_ℓ(x) = x·y_ℓ(x) are what the
//! reduced radial function u(r) matches onto outside the potential.

/// Spherical Bessel functions of the first kind j_0..=j_lmax at x > 0.
pub fn spherical_j_all(lmax: u32, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "spherical_j_all requires x > 0");
    let lmax = lmax as usize;
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if lmax == 0 {
        return vec![j0];
    }
    let start = lmax + x.ceil() as usize + 20 + (10.0 * (lmax as f64 + x).sqrt()) as usize;
    let mut out = vec![0.0; lmax + 1];
    let mut above = 0.0; // j_{n+1}
    let mut cur = 1e-300; // j_n
    for n in (1..=start).rev() {
        let below = (2 * n + 1) as f64 / x * cur - above;
        above = cur;
        cur = below;
        if n - 1 <= lmax {
            out[n - 1] = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // out[0] and out[1] are now unnormalized j₀, j₁
    let j1 = s / (x * x) - c / x;
    let scale = if j0.abs() >= j1.abs() || x < 0.5 { j0 / out[0] } else { j1 / out[1] };
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Spherical Bessel functions of the second kind y_0..=y_lmax at x > 0.
pub fn spherical_y_all(lmax: u32, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "spherical_y_all requires x > 0");
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(lmax as usize + 1);
    out.push(-c / x);
    if lmax >= 1 {
        out.push(-c / (x * x) - s / x);
    }
    for n in 1..lmax as usize {
        let v = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        out.push(v);
    }
    out
}

pub fn spherical_j(ell: u32, x: f64) -> f64 {
    spherical_j_all(ell, x)[ell as usize]
}

pub fn spherical_y(ell: u32, x: f64) -> f64 {
    spherical_y_all(ell, x)[ell as usize]
}

/// Riccati-Bessel pair and their x-derivatives at a single order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Riccati {
    /// x·j_ℓ(x), regular at the origin, → sin(x − ℓπ/2)
    pub j: f64,
    /// d/dx of `j`
    pub dj: f64,
    /// x·y_ℓ(x), irregular, → −cos(x − ℓπ/2)
    pub y: f64,
    /// d/dx of `y`
    pub dy: f64,
}

pub fn riccati(ell: u32, x: f64) -> Riccati {
    let js = spherical_j_all(ell, x);
    let ys = spherical_y_all(ell, x);
    let l = ell as usize;
    if ell == 0 {
        let (s, c) = x.sin_cos();
        return Riccati { j: s, dj: c, y: -c, dy: s };
    }
    // d/dx[x f_ℓ] = x f_{ℓ-1} − ℓ f_ℓ
    Riccati {
        j: x * js[l],
        dj: x * js[l - 1] - ell as f64 * js[l],
        y: x * ys[l],
        dy: x * ys[l - 1] - ell as f64 * ys[l],
    }
}

/// Decaying Riccati solution of u'' = [1 + ℓ(ℓ+1)/x²] u, normalized as
/// e^{−x}·Σ_{j≤ℓ} (ℓ+j)!/(j!(ℓ−j)!)·(2x)^{−j}; returns (value, d/dx).
pub fn riccati_decaying(ell: u32, x: f64) -> (f64, f64) {
    let mut poly = 0.0;
    let mut dpoly = 0.0;
    let mut coef = 1.0; // (ℓ+j)!/(j!(ℓ−j)!) / 2^j
    for j in 0..=ell {
        if j > 0 {
            let jf = j as f64;
            coef *= (ell + j) as f64 * (ell + 1 - j) as f64 / (2.0 * jf);
        }
        let xp = x.powi(-(j as i32));
        poly += coef * xp;
        dpoly -= j as f64 * coef * xp / x;
    }
    let e = (-x).exp();
    (e * poly, e * (dpoly - poly))
}

#[cfg(test)]
mod tests {
    use super::*;
    use partialwave_oracles::{riccati_explicit, riccati_explicit_deriv};

    #[test]
    fn matches_explicit_forms() {
        for &x in &[1e-3, 0.1, 0.9, 3.0, 3.5, 7.5, 25.0, 140.0] {
            for ell in 0..=4u32 {
                let r = riccati(ell, x);
                let (je, ye) = riccati_explicit(ell, x);
                let (dje, dye) = riccati_explicit_deriv(ell, x);
                // explicit forms cancel catastrophically at small x for ℓ ≥ 2
                if x >= 0.5 || ell <= 1 {
                    let tol = 1e-12 * (1.0 + je.abs());
                    assert!((r.j - je).abs() < tol, "j ell={ell} x={x}: {} vs {je}", r.j);
                    assert!((r.dj - dje).abs() < 1e-11 * (1.0 + dje.abs()), "dj ell={ell} x={x}");
                }
                assert!((r.y - ye).abs() < 1e-11 * (1.0 + ye.abs()), "y ell={ell} x={x}");
                assert!((r.dy - dye).abs() < 1e-11 * (1.0 + dye.abs()), "dy ell={ell} x={x}");
            }
        }
    }

    #[test]
    fn small_argument_series() {
        // j_ℓ(x) ≈ x^ℓ/(2ℓ+1)!! for x → 0
        let x = 1e-4;
        let j = spherical_j_all(4, x);
        let dfact = [1.0, 3.0, 15.0, 105.0, 945.0];
        for (l, df) in dfact.iter().enumerate() {
            let expected = x.powi(l as i32) / df;
            assert!((j[l] - expected).abs() / expected < 1e-7);
        }
    }

    #[test]
    fn wronskian() {
        for &x in &[0.3, 2.0, 11.0] {
            for ell in 0..8 {
                let r = riccati(ell, x);
                assert!((r.j * r.dy - r.dj * r.y - 1.0).abs() < 1e-10, "ell={ell} x={x}");
            }
        }
    }

    #[test]
    fn decaying_solution_satisfies_ode() {
        for ell in 0..4u32 {
            let x = 1.7;
            let h = 1e-4;
            let f = |t: f64| riccati_decaying(ell, t).0;
            let second = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let l = ell as f64;
            let rhs = (1.0 + l * (l + 1.0) / (x * x)) * f(x);
            assert!((second - rhs).abs() < 1e-6 * rhs.abs().max(1.0));
            let (_, d) = riccati_decaying(ell, x);
            let fd = (f(x + h) - f(x - h)) / (2.0 * h);
            assert!((d - fd).abs() < 1e-7);
        }
    }
}
