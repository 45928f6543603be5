//! Reference values for the `partialwave` test suite.
//!
//! Everything here is computed by methods that deliberately differ from the
//! library: closed forms where they exist, bisection where the library uses
//! node counting, fourth-order Runge-Kutta where the library uses Numerov,
//! plain trapezoid sums where the library uses Gauss-Legendre panels, and
//! explicit trigonometric Bessel formulas where the library recurses. The
//! crate has no dependency on `partialwave`; all inputs are plain numbers.

pub mod dipole;
pub mod quadrature;
pub mod report;
pub mod square_well;

pub use report::OracleReport;

/// Riccati-Bessel functions x·j_ℓ(x) and x·y_ℓ(x) from their explicit
/// trigonometric forms, for ℓ ≤ 4.
pub fn riccati_explicit(ell: u32, x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let x2 = x * x;
    match ell {
        0 => (s, -c),
        1 => (s / x - c, -c / x - s),
        2 => ((3.0 / x2 - 1.0) * s - 3.0 * c / x, -(3.0 / x2 - 1.0) * c - 3.0 * s / x),
        3 => {
            let a = 15.0 / (x2 * x) - 6.0 / x;
            let b = 15.0 / x2 - 1.0;
            (a * s - b * c, -a * c - b * s)
        }
        4 => {
            let x3 = x2 * x;
            let x4 = x2 * x2;
            let a = 105.0 / x4 - 45.0 / x2 + 1.0;
            let b = 105.0 / x3 - 10.0 / x;
            (a * s - b * c, -a * c - b * s)
        }
        _ => panic!("explicit Riccati-Bessel forms only tabulated for ell <= 4"),
    }
}

/// Derivatives with respect to x of [`riccati_explicit`], by the exact
/// relation d/dx[x f_ℓ] = x f_{ℓ-1} - ℓ f_ℓ (ℓ ≥ 1), d/dx[x f_0] from trig.
pub fn riccati_explicit_deriv(ell: u32, x: f64) -> (f64, f64) {
    if ell == 0 {
        let (s, c) = x.sin_cos();
        return (c, s);
    }
    let (jm, ym) = riccati_explicit(ell - 1, x);
    let (j, y) = riccati_explicit(ell, x);
    let l = ell as f64;
    (jm - l * j / x, ym - l * y / x)
}
