//! Independent dipole pipeline for the screened-Coulomb model
//! V(r) = −(Z/r)·exp(−r/d).
//!
//! Bound and continuum radial functions come from classical RK4 on a
//! uniform grid; the bound energy is found by Dirichlet-box node-count
//! bisection; continuum normalization uses the explicit Riccati-Bessel
//! forms; the radial integral is a trapezoid sum.

use crate::riccati_explicit;
use crate::riccati_explicit_deriv;
use crate::square_well::bisect;

#[derive(Debug, Clone, Copy)]
pub struct YukawaModel {
    pub z: f64,
    pub d: f64,
    /// uniform RK4 step
    pub step: f64,
    /// outer edge of the box used for bound states and matching
    pub r_box: f64,
}

impl YukawaModel {
    pub fn new(z: f64, d: f64) -> Self {
        Self { z, d, step: 5e-4, r_box: 60.0 }
    }

    fn potential(&self, r: f64) -> f64 {
        -(self.z / r) * (-r / self.d).exp()
    }

    /// RK4 solution of u'' = [2(V − E) + ℓ(ℓ+1)/r²] u on r_i = (i+1)·h,
    /// returning (r, u, u').
    fn integrate(&self, ell: u32, e: f64, r_end: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.step;
        let l = ell as f64;
        let rhs = |r: f64, u: f64, du: f64| -> (f64, f64) {
            (du, (2.0 * (self.potential(r) - e) + l * (l + 1.0) / (r * r)) * u)
        };
        let n = (r_end / h).ceil() as usize;
        let mut rs = Vec::with_capacity(n);
        let mut us = Vec::with_capacity(n);
        let mut dus = Vec::with_capacity(n);
        // two-term series u = r^{ℓ+1}(1 − Z r/(ℓ+1))
        let r0 = h;
        let c1 = -self.z / (l + 1.0);
        let mut u = r0.powi(ell as i32 + 1) * (1.0 + c1 * r0);
        let mut du = r0.powi(ell as i32) * ((l + 1.0) + (l + 2.0) * c1 * r0);
        let mut r = r0;
        for _ in 0..n {
            rs.push(r);
            us.push(u);
            dus.push(du);
            let (k1u, k1v) = rhs(r, u, du);
            let (k2u, k2v) = rhs(r + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1v);
            let (k3u, k3v) = rhs(r + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2v);
            let (k4u, k4v) = rhs(r + h, u + h * k3u, du + h * k3v);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            r += h;
            let big = u.abs().max(du.abs());
            if big > 1e150 {
                for x in us.iter_mut().chain(dus.iter_mut()) {
                    *x *= 1e-150;
                }
                u *= 1e-150;
                du *= 1e-150;
            }
        }
        (rs, us, dus)
    }

    fn nodes(u: &[f64]) -> usize {
        u.windows(2).filter(|w| w[0] != 0.0 && w[0].signum() != w[1].signum()).count()
    }

    /// Bound state of angular momentum `ell` with `nodes` radial nodes:
    /// energy and (r, u) normalized to ∫u² dr = 1, positive near the origin.
    pub fn bound_state(&self, ell: u32, nodes: usize) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let count = |e: f64| {
            let (_, u, _) = self.integrate(ell, e, self.r_box);
            Self::nodes(&u)
        };
        // upper end: just below threshold; lower end: deep enough
        let mut lo = -self.z * self.z;
        let mut hi = -1e-6;
        if count(hi) <= nodes || count(lo) > nodes {
            return None;
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if count(mid) > nodes {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let e = 0.5 * (lo + hi);
        let (r, mut u, _) = self.integrate(ell, e, self.r_box);
        // cut the divergent tail at the last minimum of |u| past the turning point
        let l = ell as f64;
        let mut start = r.len() - 1;
        while start > 1 && self.potential(r[start]) + l * (l + 1.0) / (2.0 * r[start] * r[start]) > e {
            start -= 1;
        }
        let mut cut = u.len();
        for i in start.max(1)..u.len() - 1 {
            if u[i].abs() < u[i - 1].abs() && u[i].abs() <= u[i + 1].abs() {
                cut = i;
                break;
            }
        }
        for x in u.iter_mut().skip(cut) {
            *x = 0.0;
        }
        let norm: f64 = trapezoid(&r, &u.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
        for x in u.iter_mut() {
            *x /= norm;
        }
        Some((e, r, u))
    }

    /// Energy-normalized continuum function on the RK4 grid up to `r_end`,
    /// asymptotic amplitude √(2/(πk)), positive near the origin.
    pub fn continuum(&self, ell: u32, e: f64, r_end: f64) -> (Vec<f64>, Vec<f64>) {
        let (r, mut u, du) = self.integrate(ell, e, r_end);
        let k = (2.0 * e).sqrt();
        let i = r.len() - 1;
        let x = k * r[i];
        let (j, y) = riccati_explicit(ell, x);
        let (dj, dy) = riccati_explicit_deriv(ell, x);
        // u = A cosδ·ĵ − A sinδ·ŷ  with ŷ = x·y_ℓ; Wronskian ĵŷ' − ĵ'ŷ = 1
        let uk = du[i] / k;
        let acos = u[i] * dy - uk * y;
        let asin = u[i] * dj - uk * j;
        let amp = (acos * acos + asin * asin).sqrt();
        let scale = (2.0 / (std::f64::consts::PI * k)).sqrt() / amp;
        for v in u.iter_mut() {
            *v *= scale;
        }
        (r, u)
    }
}

fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1])).sum()
}

/// Dipole radial integral ∫ u_b r u_E dr for a precomputed bound state.
pub fn dipole(model: &YukawaModel, bound: &(f64, Vec<f64>, Vec<f64>), final_ell: u32, e: f64) -> f64 {
    let (_, rb, ub) = bound;
    let r_end = rb[rb.len() - 1];
    let (rc, uc) = model.continuum(final_ell, e, r_end);
    let n = rb.len().min(rc.len());
    let integrand: Vec<f64> = (0..n).map(|i| ub[i] * rb[i] * uc[i]).collect();
    trapezoid(&rb[..n], &integrand)
}

/// Sign changes of D(E) on a uniform energy grid of `n` points over
/// [e_lo, e_hi]: each bracket is (E_i, E_{i+1}, linear zero estimate).
pub fn dense_dipole_zero(
    model: &YukawaModel,
    initial_ell: u32,
    initial_nodes: usize,
    final_ell: u32,
    e_lo: f64,
    e_hi: f64,
    n: usize,
) -> Vec<(f64, f64, f64)> {
    let bound = model.bound_state(initial_ell, initial_nodes).expect("bound state exists");
    let es: Vec<f64> = (0..n).map(|i| e_lo + (e_hi - e_lo) * i as f64 / (n - 1) as f64).collect();
    let ds: Vec<f64> = es.iter().map(|&e| dipole(model, &bound, final_ell, e)).collect();
    let mut out = Vec::new();
    for i in 0..n - 1 {
        if ds[i] != 0.0 && ds[i].signum() != ds[i + 1].signum() {
            let t = ds[i] / (ds[i] - ds[i + 1]);
            out.push((es[i], es[i + 1], es[i] + t * (es[i + 1] - es[i])));
        }
    }
    out
}

/// Refine a bracket from [`dense_dipole_zero`] by bisection on D(E).
pub fn refine_zero(
    model: &YukawaModel,
    initial_ell: u32,
    initial_nodes: usize,
    final_ell: u32,
    lo: f64,
    hi: f64,
    tol: f64,
) -> f64 {
    let bound = model.bound_state(initial_ell, initial_nodes).expect("bound state exists");
    let f = |e: f64| dipole(model, &bound, final_ell, e);
    bisect(&f, lo, hi, tol)
}
