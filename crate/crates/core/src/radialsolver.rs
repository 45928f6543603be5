//! Outward Numerov integration of the radial equation and bound states by
//! node-count bisection.

use serde::Serialize;

use crate::bessel::riccati_decaying;
use crate::error::{Error, Result};
use crate::grid::{Mesh, RadialGrid, DEFAULT_R_SWITCH};
use crate::potential::PotentialSpec;

const GUARD: f64 = 1e100;
/// 2^-332, exact rescaling factor
const RESCALE: f64 = 1.1447138822014276e-100;

/// 9-point central first-derivative weights, offsets −4..=4.
const STENCIL: [f64; 9] =
    [1.0 / 280.0, -4.0 / 105.0, 1.0 / 5.0, -4.0 / 5.0, 0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Liouville-transformed solution w (u = √g'·w) with running node counts,
/// which survive the rescaling that may flush early values to zero.
pub(crate) struct Propagation {
    pub w: Vec<f64>,
    /// nodes[i] = sign changes of w on nodes 0..=i
    pub nodes: Vec<u32>,
}

/// Numerov propagation on `mesh`. `scale` multiplies the starting values.
pub(crate) fn propagate(spec: &PotentialSpec, ell: u32, energy: f64, mesh: &Mesh, scale: f64) -> Result<Propagation> {
    let n = mesh.len();
    let h = mesh.h;
    let h2 = h * h;
    let l = ell as f64;
    let cent = l * (l + 1.0);
    let phys = |r: f64, v: f64| 2.0 * (v - energy) + cent / (r * r);
    let mut big_f = Vec::with_capacity(n);
    for i in 0..n {
        let r = mesh.r[i];
        let f = phys(r, spec.value(r));
        if f < 0.0 {
            let wavelength = 2.0 * std::f64::consts::PI / (-f).sqrt();
            let step = mesh.gp[i] * h;
            if wavelength < 6.0 * step {
                return Err(Error::StepTooCoarse { r, wavelength, step });
            }
        }
        big_f.push(mesh.gp[i] * mesh.gp[i] * f + mesh.s[i]);
    }
    // one-sided values at a discontinuity node
    let knot = match (mesh.knot_index, spec.knot()) {
        (Some(j), Some((_, jump))) if j >= 3 && j + 1 < n => {
            let g = mesh.gp[j];
            let delta = g * g * 2.0 * jump;
            let inner = big_f[j] - delta;
            Some((j, inner, big_f[j], delta, 2.0 * g * mesh.gpp[j] * 2.0 * jump))
        }
        _ => None,
    };

    let mut w = vec![0.0; n];
    if mesh.wall {
        w[0] = 0.0;
        w[1] = scale;
    } else {
        let r0 = mesh.r[0];
        w[0] = scale / mesh.gp[0].sqrt();
        w[1] = scale * (mesh.r[1] / r0).powi(ell as i32 + 1) / mesh.gp[1].sqrt();
    }
    let coef = |f: f64| 1.0 - h2 * f / 12.0;
    let mut nodes = vec![0u32; n];
    let mut count = 0u32;
    let mut last = w[0].signum() * f64::from(u8::from(w[0] != 0.0));
    if w[1] != 0.0 {
        last = w[1].signum();
    }
    for i in 1..n - 1 {
        let (f_prev, f_here, f_next) = match knot {
            Some((j, inner, _, _, _)) if i + 1 == j => (big_f[i - 1], big_f[i], inner),
            Some((j, inner, outer, _, _)) if i == j => (big_f[i - 1], 0.5 * (inner + outer), big_f[i + 1]),
            Some((j, _, outer, _, _)) if i == j + 1 => (outer, big_f[i], big_f[i + 1]),
            _ => (big_f[i - 1], big_f[i], big_f[i + 1]),
        };
        let mut rhs = 2.0 * w[i] * (1.0 + 5.0 * h2 * f_here / 12.0) - w[i - 1] * coef(f_prev);
        if let Some((j, _, _, df, dfp)) = knot {
            if i == j {
                let dw = (11.0 * w[i] - 18.0 * w[i - 1] + 9.0 * w[i - 2] - 2.0 * w[i - 3]) / (6.0 * h);
                rhs += h2 * h / 12.0 * (df * dw + dfp * w[i]);
            }
        }
        w[i + 1] = rhs / coef(f_next);
        if w[i + 1] != 0.0 {
            if last != 0.0 && w[i + 1].signum() != last {
                count += 1;
            }
            last = w[i + 1].signum();
        }
        nodes[i + 1] = count;
        if w[i + 1].abs() > GUARD {
            for v in w[..=i + 1].iter_mut() {
                *v *= RESCALE;
            }
        }
    }
    Ok(Propagation { w, nodes })
}

pub(crate) fn u_value(mesh: &Mesh, w: &[f64], i: usize) -> f64 {
    w[i] * mesh.gp[i].sqrt()
}

/// du/dr at node i from the 9-point stencil in x; needs 4 nodes either side.
pub(crate) fn u_derivative(mesh: &Mesh, w: &[f64], i: usize) -> f64 {
    let dw: f64 = STENCIL.iter().enumerate().map(|(k, c)| c * w[i + k - 4]).sum::<f64>() / mesh.h;
    let g = mesh.gp[i];
    (mesh.gpp[i] / (2.0 * g.sqrt()) * w[i] + g.sqrt() * dw) / g
}

#[cfg(test)]
fn count_nodes(w: &[f64]) -> usize {
    let mut nodes = 0;
    let mut last = 0.0f64;
    for &v in w {
        if v != 0.0 {
            if last != 0.0 && v.signum() != last.signum() {
                nodes += 1;
            }
            last = v;
        }
    }
    nodes
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub ell: u32,
    pub energy: f64,
    pub grid: RadialGrid,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub node_count: usize,
}

/// Regular solution u(r) on the whole grid, arbitrary scale.
pub fn integrate_regular(spec: &PotentialSpec, ell: u32, energy: f64, grid: &RadialGrid) -> Result<RadialSolution> {
    let mesh = grid.mesh(spec.wall(), spec.knot().map(|k| k.0), f64::INFINITY, 0);
    let p = propagate(spec, ell, energy, &mesh, 1.0)?;
    let u: Vec<f64> = (0..mesh.len()).map(|i| u_value(&mesh, &p.w, i)).collect();
    let node_count = *p.nodes.last().unwrap_or(&0) as usize;
    Ok(RadialSolution { ell, energy, grid: *grid, node_count, r: mesh.r, u })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundState {
    pub n_radial: usize,
    pub ell: u32,
    pub energy: f64,
    /// grid whose mesh carries `r` and `u`
    pub grid: RadialGrid,
    pub r: Vec<f64>,
    /// normalized so that ∫u² dr = 1, positive near the origin
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundSearchOptions {
    /// asymptotic grid spacing in bohr
    pub step: f64,
    pub r_switch: f64,
    pub(crate) scale: f64,
}

impl Default for BoundSearchOptions {
    fn default() -> Self {
        Self { step: 0.005, r_switch: DEFAULT_R_SWITCH, scale: 1.0 }
    }
}

impl BoundSearchOptions {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }
}

pub fn find_bound_states(spec: &PotentialSpec, ell: u32, window: (f64, f64), n_max: usize) -> Result<Vec<BoundState>> {
    find_bound_states_with(spec, ell, window, n_max, &BoundSearchOptions::default())
}

struct Counter<'a> {
    spec: &'a PotentialSpec,
    ell: u32,
    mesh: Mesh,
    i_match: usize,
    scale: f64,
}

impl Counter<'_> {
    /// Number of eigenvalues below `energy`.
    fn count(&self, energy: f64) -> Result<usize> {
        let p = propagate(self.spec, self.ell, energy, &self.mesh, self.scale)?;
        let w = &p.w;
        let i = self.i_match;
        let nodes = p.nodes[i] as usize;
        let u = u_value(&self.mesh, w, i);
        let du = u_derivative(&self.mesh, w, i);
        let kappa = (-2.0 * energy).sqrt();
        let (d, dd) = riccati_decaying(self.ell, kappa * self.mesh.r[i]);
        let l_asym = kappa * dd / d;
        Ok(nodes + usize::from((du - l_asym * u) * u < 0.0))
    }
}

pub fn find_bound_states_with(
    spec: &PotentialSpec,
    ell: u32,
    window: (f64, f64),
    n_max: usize,
    opts: &BoundSearchOptions,
) -> Result<Vec<BoundState>> {
    let (e_lo, e_hi) = window;
    if !(e_lo < e_hi) {
        return Err(Error::InvalidWindow { lo: e_lo, hi: e_hi, reason: "need E_lo < E_hi" });
    }
    if !(e_hi < 0.0) {
        return Err(Error::InvalidWindow { lo: e_lo, hi: e_hi, reason: "E_hi must be strictly negative" });
    }
    let kappa_hi = (-2.0 * e_hi).sqrt();
    let r_match = spec.range_radius().max(10.0 / kappa_hi);
    let grid = RadialGrid::log_with_step(r_match * 1.05 + 20.0 * opts.step, opts.step, opts.r_switch)?;
    let knot = spec.knot().map(|k| k.0);
    let mesh = grid.mesh(spec.wall(), knot, r_match, 4);
    let mut i_match = mesh.index_at_or_after(r_match).unwrap_or(mesh.len() - 5).max(4);
    if let Some(j) = mesh.knot_index {
        i_match = i_match.max(j + 4);
    }
    let counter = Counter { spec, ell, mesh, i_match, scale: opts.scale };

    let n_lo = counter.count(e_lo)?;
    let n_hi = counter.count(e_hi)?;
    if n_hi < n_lo {
        return Ok(Vec::new());
    }
    let found = n_hi - n_lo;
    if found > n_max {
        return Err(Error::TooManyStates { found, n_max });
    }
    let mut states = Vec::with_capacity(found);
    let mut lo_edge = e_lo;
    for k in n_lo..n_hi {
        // eigenvalue k: count goes from ≤ k to > k
        let (mut lo, mut hi) = (lo_edge, e_hi);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if counter.count(mid)? > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let energy = 0.5 * (lo + hi);
        states.push(eigenfunction(spec, ell, k, energy, &grid, r_match, opts.scale)?);
        lo_edge = hi;
    }
    Ok(states)
}

fn eigenfunction(
    spec: &PotentialSpec,
    ell: u32,
    n_radial: usize,
    energy: f64,
    grid: &RadialGrid,
    r_match: f64,
    scale: f64,
) -> Result<BoundState> {
    let kappa = (-2.0 * energy).sqrt();
    let knot = spec.knot().map(|k| k.0);
    let probe = grid.mesh(spec.wall(), knot, r_match, 0);
    let r_turn = probe.r.iter().rev().find(|&&r| spec.effective(ell, r) < energy).copied().unwrap_or(probe.r[0]);
    let r_join = (r_turn + 5.0 / kappa).min(r_match);
    let r_end = r_join + 30.0 / kappa;
    let grid = grid.extended(r_end);
    let mesh = grid.mesh(spec.wall(), knot, r_end, 0);
    let w = propagate(spec, ell, energy, &mesh, scale)?.w;
    let j = mesh.index_at_or_after(r_join).unwrap_or(mesh.len() - 1);
    let mut u: Vec<f64> = (0..mesh.len()).map(|i| u_value(&mesh, &w, i)).collect();
    let (d_join, _) = riccati_decaying(ell, kappa * mesh.r[j]);
    let u_join = u[j];
    for (ui, &r) in u.iter_mut().zip(&mesh.r).skip(j + 1) {
        let (d, _) = riccati_decaying(ell, kappa * r);
        *ui = u_join * d / d_join;
    }
    let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
    let norm = mesh.integrate(&sq).sqrt();
    let sign = if u.iter().find(|v| **v != 0.0).copied().unwrap_or(1.0) < 0.0 { -1.0 } else { 1.0 };
    for v in u.iter_mut() {
        *v *= sign / norm;
    }
    Ok(BoundState { n_radial, ell, energy, grid, r: mesh.r, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use partialwave_oracles::square_well;

    #[test]
    fn free_s_wave_is_sine() {
        let g = RadialGrid::uniform(10.0, 10000).unwrap();
        let s = integrate_regular(&PotentialSpec::zero(), 0, 0.5, &g).unwrap();
        let c = s.u[999] / s.r[999].sin();
        let i = s.r.partition_point(|&r| r < std::f64::consts::PI - 5e-4);
        let near_pi = s.r[i];
        assert!((s.u[i] / c - near_pi.sin()).abs() < 1e-8);
        assert!((near_pi - std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn free_p_wave_near_origin() {
        let g = RadialGrid::log_uniform(10.0, 4000).unwrap();
        let s = integrate_regular(&PotentialSpec::zero(), 1, 0.5, &g).unwrap();
        let ratio = s.u[1] / s.u[0];
        let expected = (s.r[1] / s.r[0]).powi(2);
        assert!((ratio / expected - 1.0).abs() < 0.01);
        // compare with kr·j₁(kr) away from the origin
        let c = s.u[2000] / crate::bessel::riccati(1, s.r[2000]).j;
        for &i in &[2500usize, 3500] {
            assert!((s.u[i] / c - crate::bessel::riccati(1, s.r[i]).j).abs() < 1e-7);
        }
    }

    #[test]
    fn square_well_piecewise_solution() {
        let g = RadialGrid::with_step(6.0, 0.002).unwrap();
        let spec = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let s = integrate_regular(&spec, 0, 0.5, &g).unwrap();
        let i_ref = s.r.partition_point(|&r| r < 0.5);
        let c = s.u[i_ref] / square_well::scattering_wavefunction(2.0, 1.0, 0.5, s.r[i_ref]);
        for i in (0..s.r.len()).step_by(97) {
            let exact = square_well::scattering_wavefunction(2.0, 1.0, 0.5, s.r[i]);
            let rel = (s.u[i] / c - exact).abs() / exact.abs().max(0.05);
            assert!(rel < 1e-7, "r = {} rel {rel}", s.r[i]);
        }
    }

    #[test]
    fn rejects_coarse_step() {
        let g = RadialGrid::uniform(10.0, 64).unwrap();
        let err = integrate_regular(&PotentialSpec::zero(), 0, 50.0, &g).unwrap_err();
        assert!(matches!(err, Error::StepTooCoarse { .. }));
    }

    #[test]
    fn zero_potential_binds_nothing() {
        for ell in 0..3 {
            let s = find_bound_states(&PotentialSpec::zero(), ell, (-5.0, -1e-3), 10).unwrap();
            assert!(s.is_empty());
        }
    }

    #[test]
    fn square_well_single_state() {
        let spec = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let opts = BoundSearchOptions::with_step(0.001);
        let s = find_bound_states_with(&spec, 0, (-2.0, -1e-4), 5, &opts).unwrap();
        let exact = square_well::bound_energies(2.0, 1.0);
        assert_eq!(s.len(), 1);
        assert_eq!(exact.len(), 1);
        assert!((s[0].energy - exact[0]).abs() < 1e-9, "{} vs {}", s[0].energy, exact[0]);
        let sq: Vec<f64> = s[0].u.iter().map(|v| v * v).collect();
        let m = s[0].grid.mesh(None, Some(1.0), f64::INFINITY, 0);
        assert!((m.integrate(&sq) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn node_ordering_and_window_errors() {
        let spec = PotentialSpec::square_well(40.0, 1.0).unwrap();
        let s = find_bound_states(&spec, 0, (-40.0, -1e-3), 10).unwrap();
        assert!(s.len() >= 3);
        for (k, st) in s.iter().enumerate() {
            assert_eq!(st.n_radial, k);
            let cut = st.r.partition_point(|&r| r < 1.5);
            assert_eq!(count_nodes(&st.u[..cut]), k);
        }
        assert!(s.windows(2).all(|w| w[0].energy < w[1].energy));
        assert!(matches!(find_bound_states(&spec, 0, (-40.0, -1e-3), 1), Err(Error::TooManyStates { .. })));
        assert!(find_bound_states(&spec, 0, (-1.0, 0.0), 1).is_err());
        assert!(find_bound_states(&spec, 0, (-1.0, -2.0), 1).is_err());
    }

    #[test]
    fn scale_invariance() {
        let spec = PotentialSpec::yukawa(3.0, 2.0).unwrap();
        let base = find_bound_states(&spec, 1, (-3.0, -1e-3), 10).unwrap();
        for scale in [3.7, 1e-30, 2.5e40] {
            let opts = BoundSearchOptions { scale, ..BoundSearchOptions::default() };
            let other = find_bound_states_with(&spec, 1, (-3.0, -1e-3), 10, &opts).unwrap();
            assert_eq!(base.len(), other.len());
            for (a, b) in base.iter().zip(&other) {
                assert_eq!(a.energy.to_bits(), b.energy.to_bits());
            }
        }
    }
}
