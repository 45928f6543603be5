//! Phase shifts from asymptotic matching, unwrapped phase scans, partial and
//! total cross sections, and single-channel S-matrix elements.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::riccati;
use crate::error::{Error, Result};
use crate::grid::{Mesh, RadialGrid};
use crate::potential::PotentialSpec;
use crate::radialsolver::{propagate, u_derivative, u_value};

const MAX_REFINE: u32 = 8;
/// adjacent unwrapped samples further apart than this get bisected
const REFINE_JUMP: f64 = PI / 4.0;

/// Reduce an angle to (−π/2, π/2].
pub fn principal(delta: f64) -> f64 {
    let mut d = delta - PI * (delta / PI).round();
    if d <= -PI / 2.0 {
        d += PI;
    } else if d > PI / 2.0 {
        d -= PI;
    }
    d
}

/// Reusable outward integrator matched at a fixed radius; the mesh is
/// realized once, up to the matching radius plus the stencil.
pub(crate) struct Matcher<'a> {
    spec: &'a PotentialSpec,
    ell: u32,
    grid: RadialGrid,
    pub(crate) mesh: Mesh,
    pub(crate) i_match: usize,
}

impl<'a> Matcher<'a> {
    pub(crate) fn new(spec: &'a PotentialSpec, ell: u32, grid: &RadialGrid, r_match: Option<f64>) -> Result<Self> {
        let range = spec.range_radius();
        let target = match r_match {
            Some(r) if r < range => return Err(Error::MatchInsideRange { r_match: r, range }),
            Some(r) => r,
            None => range,
        };
        let mesh = grid.mesh(spec.wall(), spec.knot().map(|k| k.0), target, 12);
        let mut i_match = mesh.index_at_or_after(target).unwrap_or(mesh.len()).max(4);
        if let Some(j) = mesh.knot_index {
            i_match = i_match.max(j + 4);
        }
        if i_match + 5 > mesh.len() {
            return Err(Error::GridTooShort { r_max: grid.r_max, required: target, k: f64::NAN });
        }
        Ok(Self { spec, ell, grid: *grid, mesh, i_match })
    }

    pub(crate) fn r_match(&self) -> f64 {
        self.mesh.r[self.i_match]
    }

    fn check_extent(&self, k: f64) -> Result<()> {
        let required = self.spec.range_radius() + 4.0 * PI / k;
        if self.grid.r_max < required {
            return Err(Error::GridTooShort { r_max: self.grid.r_max, required, k });
        }
        Ok(())
    }

    /// (u, du/dr) at the matching node.
    pub(crate) fn match_values(&self, energy: f64) -> Result<(f64, f64)> {
        let p = propagate(self.spec, self.ell, energy, &self.mesh, 1.0)?;
        Ok((u_value(&self.mesh, &p.w, self.i_match), u_derivative(&self.mesh, &p.w, self.i_match)))
    }

    /// Principal-value phase shift at `energy`.
    pub(crate) fn phase(&self, energy: f64) -> Result<f64> {
        if !(energy > 0.0) {
            return Err(Error::NonPositiveEnergy { energy });
        }
        let k = (2.0 * energy).sqrt();
        self.check_extent(k)?;
        let (u, du) = self.match_values(energy)?;
        match tan_components(self.ell, k, self.r_match(), u, du) {
            Some((num, den)) => Ok(principal(num.atan2(den))),
            None => {
                // a quarter wavelength further out the pair cannot vanish together
                let shifted = self.r_match() + 0.5 * PI / k;
                let retry = Matcher::new(self.spec, self.ell, &self.grid, Some(shifted))?;
                let (u, du) = retry.match_values(energy)?;
                tan_components(self.ell, k, retry.r_match(), u, du)
                    .map(|(n, d)| principal(n.atan2(d)))
                    .ok_or(Error::IllConditionedMatch { r_match: retry.r_match() })
            }
        }
    }
}

/// Numerator and denominator of tan δ, normalized; `None` when both vanish.
fn tan_components(ell: u32, k: f64, r: f64, u: f64, du: f64) -> Option<(f64, f64)> {
    let b = riccati(ell, k * r);
    let norm = (u * u + (du / k).powi(2)).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let (u, dk) = (u / norm, du / k / norm);
    let num = b.dj * u - dk * b.j;
    let den = b.dy * u - dk * b.y;
    if num.abs() < 1e-14 && den.abs() < 1e-14 {
        None
    } else {
        Some((num, den))
    }
}

/// Phase shift δ_ℓ(E) in (−π/2, π/2].
pub fn phase_shift(spec: &PotentialSpec, ell: u32, energy: f64, grid: &RadialGrid) -> Result<f64> {
    Matcher::new(spec, ell, grid, None)?.phase(energy)
}

/// Phase shift matched at an explicit radius r_m ≥ range_radius.
pub fn phase_shift_at(spec: &PotentialSpec, ell: u32, energy: f64, grid: &RadialGrid, r_match: f64) -> Result<f64> {
    Matcher::new(spec, ell, grid, Some(r_match))?.phase(energy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseShiftCurve {
    pub ell: u32,
    pub energies: Vec<f64>,
    /// continuity-unwrapped, radians
    pub deltas: Vec<f64>,
}

impl PhaseShiftCurve {
    /// Curve from given samples; energies must be positive and increasing.
    pub fn from_samples(ell: u32, energies: Vec<f64>, deltas: Vec<f64>) -> Result<Self> {
        validate_energies(&energies)?;
        if energies.len() != deltas.len() {
            return Err(Error::InvalidEnergyGrid { reason: "energies and deltas differ in length".into() });
        }
        Ok(Self { ell, energies, deltas })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.energies.iter().map(|e| (2.0 * e).sqrt()).collect()
    }

    /// δ at `energy`, linear in E between samples.
    pub fn delta_at(&self, energy: f64) -> Result<f64> {
        let (lo, hi) = (self.energies[0], self.energies[self.len() - 1]);
        if !(energy >= lo && energy <= hi) {
            return Err(Error::EnergyOutOfRange { energy, lo, hi });
        }
        let i = self.energies.partition_point(|&e| e <= energy);
        if i >= self.len() {
            return Ok(self.deltas[self.len() - 1]);
        }
        let (e0, e1) = (self.energies[i - 1], self.energies[i]);
        let t = (energy - e0) / (e1 - e0);
        Ok(self.deltas[i - 1] + t * (self.deltas[i] - self.deltas[i - 1]))
    }

    /// Shift every sample by `n` multiples of π.
    pub fn shifted(&self, n: i64) -> Self {
        let s = n as f64 * PI;
        Self { ell: self.ell, energies: self.energies.clone(), deltas: self.deltas.iter().map(|d| d + s).collect() }
    }
}

fn validate_energies(energies: &[f64]) -> Result<()> {
    if energies.is_empty() {
        return Err(Error::InvalidEnergyGrid { reason: "empty energy grid".into() });
    }
    if let Some(e) = energies.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidEnergyGrid { reason: format!("energies must be positive, got {e}") });
    }
    if energies.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidEnergyGrid { reason: "energies must strictly increase".into() });
    }
    Ok(())
}

fn nearest_branch(principal_value: f64, reference: f64) -> f64 {
    principal_value + PI * ((reference - principal_value) / PI).round()
}

/// δ_ℓ over an ascending energy grid, unwrapped by continuity from the
/// principal value at the first energy. Intervals whose unwrapped step
/// exceeds π/4 are bisected (up to 8 levels); the inserted energies are
/// kept in the returned curve.
pub fn phase_scan(spec: &PotentialSpec, ell: u32, energies: &[f64], grid: &RadialGrid) -> Result<PhaseShiftCurve> {
    validate_energies(energies)?;
    let matcher = Matcher::new(spec, ell, grid, None)?;
    let principal_values: Vec<f64> = energies.par_iter().map(|&e| matcher.phase(e)).collect::<Result<Vec<_>>>()?;

    let mut out_e = vec![energies[0]];
    let mut out_d = vec![principal_values[0]];
    for i in 1..energies.len() {
        let prev = *out_d.last().unwrap();
        let d = nearest_branch(principal_values[i], prev);
        if (d - prev).abs() > REFINE_JUMP {
            refine(&matcher, energies[i - 1], prev, energies[i], principal_values[i], 0, &mut out_e, &mut out_d)?;
        } else {
            out_e.push(energies[i]);
            out_d.push(d);
        }
    }
    Ok(PhaseShiftCurve { ell, energies: out_e, deltas: out_d })
}

/// Fill (e_lo, e_hi] by bisection; the caller has already pushed e_lo.
#[allow(clippy::too_many_arguments)]
fn refine(
    m: &Matcher,
    e_lo: f64,
    d_lo: f64,
    e_hi: f64,
    p_hi: f64,
    level: u32,
    out_e: &mut Vec<f64>,
    out_d: &mut Vec<f64>,
) -> Result<()> {
    let d_hi = nearest_branch(p_hi, d_lo);
    if (d_hi - d_lo).abs() <= REFINE_JUMP {
        out_e.push(e_hi);
        out_d.push(d_hi);
        return Ok(());
    }
    if level == MAX_REFINE {
        return Err(Error::UnresolvedJump { e_lo, e_hi, jump: d_hi - d_lo });
    }
    let e_mid = 0.5 * (e_lo + e_hi);
    let p_mid = m.phase(e_mid)?;
    refine(m, e_lo, d_lo, e_mid, p_mid, level + 1, out_e, out_d)?;
    let d_mid = *out_d.last().unwrap();
    refine(m, e_mid, d_mid, e_hi, p_hi, level + 1, out_e, out_d)
}

/// Extend the scan geometrically up to `e_high` and shift the whole curve by
/// the multiple of π that puts δ(e_high) on the principal branch. Returns
/// the anchored curve over the original range and the number of π shifts.
pub fn anchor_high_energy(
    spec: &PotentialSpec,
    curve: &PhaseShiftCurve,
    grid: &RadialGrid,
    e_high: f64,
    n_tail: usize,
) -> Result<(PhaseShiftCurve, i64)> {
    let e_last = curve.energies[curve.len() - 1];
    if !(e_high > e_last) {
        return Ok((curve.clone(), 0));
    }
    let n = n_tail.max(2);
    let ratio = (e_high / e_last).powf(1.0 / (n - 1) as f64);
    let tail_e: Vec<f64> = (0..n).map(|i| if i + 1 == n { e_high } else { e_last * ratio.powi(i as i32) }).collect();
    let tail = phase_scan(spec, curve.ell, &tail_e, grid)?;
    // tail starts at e_last: align its branch with the curve's last sample
    let offset = nearest_branch(tail.deltas[0], curve.deltas[curve.len() - 1]) - tail.deltas[0];
    let end = tail.deltas[tail.len() - 1] + offset;
    let shift = -(end / PI).round() as i64;
    Ok((curve.shifted(shift), shift))
}

/// Number of bound states implied by an anchored curve: (δ(E_min) − δ(E_max))/π.
pub fn levinson_count(anchored: &PhaseShiftCurve) -> i64 {
    ((anchored.deltas[0] - anchored.deltas[anchored.len() - 1]) / PI).round() as i64
}

/// (4π/k²)(2ℓ+1) sin²δ.
pub fn partial_cross_section(ell: u32, k: f64, delta: f64) -> f64 {
    4.0 * PI / (k * k) * (2 * ell + 1) as f64 * delta.sin().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSection {
    pub energy: f64,
    pub sigma_total: f64,
    /// indexed by position in the input curve list
    pub sigma_partial: Vec<f64>,
}

pub fn cross_section(curves: &[PhaseShiftCurve], energy: f64) -> Result<CrossSection> {
    if !(energy > 0.0) {
        return Err(Error::NonPositiveEnergy { energy });
    }
    let k = (2.0 * energy).sqrt();
    let sigma_partial = curves
        .iter()
        .map(|c| c.delta_at(energy).map(|d| partial_cross_section(c.ell, k, d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossSection { energy, sigma_total: sigma_partial.iter().sum(), sigma_partial })
}

/// Smallest ℓ ≤ `cap` with |δ_ℓ(e_max)| < 1e−6.
pub fn default_ell_max(spec: &PotentialSpec, e_max: f64, grid: &RadialGrid, cap: u32) -> Result<u32> {
    for ell in 0..=cap {
        if phase_shift(spec, ell, e_max, grid)?.abs() < 1e-6 {
            return Ok(ell);
        }
    }
    Ok(cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SMatrixPoint {
    pub ell: u32,
    pub energy: f64,
    /// e^{2iδ}
    pub s_value: Complex64,
    /// e^{iδ} sin δ
    pub amplitude_factor: Complex64,
}

impl SMatrixPoint {
    pub fn from_delta(ell: u32, energy: f64, delta: f64) -> Self {
        let s_value = Complex64::from_polar(1.0, 2.0 * delta);
        let amplitude_factor = Complex64::from_polar(delta.sin(), delta);
        Self { ell, energy, s_value, amplitude_factor }
    }
}

pub fn s_matrix(curve: &PhaseShiftCurve, energy: f64) -> Result<SMatrixPoint> {
    Ok(SMatrixPoint::from_delta(curve.ell, energy, curve.delta_at(energy)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use partialwave_oracles::square_well;

    #[test]
    fn principal_range() {
        for &d in &[0.0, 1.0, -1.0, PI / 2.0, -PI / 2.0, 3.0, -7.5, 10.0 * PI + 0.2] {
            let p = principal(d);
            assert!(p > -PI / 2.0 && p <= PI / 2.0);
            let n = (d - p) / PI;
            assert!((n - n.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_potential_has_no_shift() {
        let g = RadialGrid::with_step(2000.0, 0.005).unwrap();
        for ell in 0..=4 {
            for &e in &[0.01, 0.5, 10.0] {
                assert!(phase_shift(&PotentialSpec::zero(), ell, e, &g).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn hard_sphere_s_wave() {
        let g = RadialGrid::with_step(40.0, 0.005).unwrap();
        let d = phase_shift(&PotentialSpec::hard_sphere(1.0).unwrap(), 0, 0.5, &g).unwrap();
        assert!((d - principal(-1.0)).abs() < 1e-8, "{d}");
    }

    #[test]
    fn square_well_closed_form() {
        let g = RadialGrid::with_step(60.0, 0.002).unwrap();
        let spec = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let d = phase_shift(&spec, 0, 0.5, &g).unwrap();
        let exact = square_well::phase_shift(2.0, 1.0, 0.5);
        assert!((d - principal(exact)).abs() < 1e-7, "{d} vs {exact}");
    }

    #[test]
    fn matching_radius_independence() {
        let g = RadialGrid::with_step(60.0, 0.005).unwrap();
        let spec = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let a = phase_shift_at(&spec, 1, 0.5, &g, 1.5).unwrap();
        let b = phase_shift_at(&spec, 1, 0.5, &g, 1.5 + 2.0 * PI).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} {b}");
        assert!(matches!(phase_shift_at(&spec, 1, 0.5, &g, 0.5), Err(Error::MatchInsideRange { .. })));
    }

    #[test]
    fn short_grid_is_rejected() {
        let g = RadialGrid::with_step(5.0, 0.005).unwrap();
        let spec = PotentialSpec::square_well(2.0, 1.0).unwrap();
        assert!(matches!(phase_shift(&spec, 0, 0.01, &g), Err(Error::GridTooShort { .. })));
    }

    #[test]
    fn scan_is_continuous_and_refines() {
        let g = RadialGrid::with_step(200.0, 0.005).unwrap();
        let spec = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let es: Vec<f64> = (1..=6).map(|i| 0.5 * i as f64).collect();
        let c = phase_scan(&spec, 0, &es, &g).unwrap();
        assert!(c.deltas.windows(2).all(|w| (w[1] - w[0]).abs() <= PI / 4.0));
        for &e in &es {
            let d = c.delta_at(e).unwrap();
            let exact = square_well::phase_shift(2.0, 1.0, e);
            assert!((principal(d) - principal(exact)).abs() < 1e-6);
        }
        assert!(c.delta_at(10.0).is_err());
    }

    #[test]
    fn s_matrix_identities() {
        for &d in &[0.0, PI / 2.0, PI / 4.0, -1.3] {
            let s = SMatrixPoint::from_delta(0, 1.0, d);
            assert!((s.s_value.norm() - 1.0).abs() < 1e-12);
            let lhs = s.s_value - 1.0;
            let rhs = Complex64::new(0.0, 2.0) * s.amplitude_factor;
            assert!((lhs - rhs).norm() < 1e-12);
        }
        let s = SMatrixPoint::from_delta(0, 1.0, PI / 2.0);
        assert!((s.s_value + 1.0).norm() < 1e-12);
        assert!((s.amplitude_factor - Complex64::i()).norm() < 1e-12);
        let s = SMatrixPoint::from_delta(0, 1.0, PI / 4.0);
        assert!((s.s_value - Complex64::i()).norm() < 1e-12);
    }

    #[test]
    fn cross_section_limits() {
        let c = PhaseShiftCurve::from_samples(0, vec![0.4, 0.6], vec![PI / 2.0, PI / 2.0]).unwrap();
        let z = PhaseShiftCurve::from_samples(1, vec![0.4, 0.6], vec![0.0, 0.0]).unwrap();
        let x = cross_section(&[c, z], 0.5).unwrap();
        assert!((x.sigma_total - 4.0 * PI).abs() < 1e-12);
        assert_eq!(x.sigma_partial[1], 0.0);
    }
}
