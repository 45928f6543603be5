//! Bound-to-continuum dipole matrix elements, model photodetachment cross
//! sections, Cooper minima and threshold-law fits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::riccati;
use crate::error::{Error, Result};
use crate::grid::{Mesh, RadialGrid};
use crate::potential::PotentialSpec;
use crate::radialsolver::{propagate, u_derivative, u_value, BoundState};
use crate::scattering::{phase_scan, PhaseShiftCurve};
use crate::timedelay::{time_delay, DelayMode, TimeDelayCurve};
use crate::units::ALPHA;

/// Bound-state cutoff relative to its peak |u|.
const TAIL_CUTOFF: f64 = 1e-12;

/// Offset of the two samples placed either side of a refined dipole zero.
pub const ZERO_STRADDLE: f64 = 1e-7;

fn check_selection(initial: &BoundState, final_ell: u32) -> Result<()> {
    if initial.ell.abs_diff(final_ell) != 1 {
        return Err(Error::SelectionRule { initial: initial.ell, final_ell });
    }
    Ok(())
}

/// ℓ_>/(2ℓ+1).
pub fn channel_weight(ell: u32, final_ell: u32) -> f64 {
    ell.max(final_ell) as f64 / (2 * ell + 1) as f64
}

/// σ = (4π²/3)·α·ω·weight·D².
pub fn partial_sigma(ell: u32, final_ell: u32, omega: f64, d: f64) -> f64 {
    4.0 * PI * PI / 3.0 * ALPHA * omega * channel_weight(ell, final_ell) * d * d
}

/// Outer radius a continuum mesh must reach so that a full wavelength at
/// `e_min` fits beyond the potential range, with some slack.
pub fn continuum_extent(spec: &PotentialSpec, e_min: f64) -> f64 {
    spec.range_radius() + 2.5 * 2.0 * PI / (2.0 * e_min).sqrt()
}

/// Energy-normalized continuum on a mesh sharing the bound state's nodes.
struct Continuum {
    mesh: Mesh,
    u: Vec<f64>,
}

fn continuum(
    initial: &BoundState,
    spec: &PotentialSpec,
    ell: u32,
    energy: f64,
    grid: &RadialGrid,
) -> Result<Continuum> {
    if !(energy > 0.0) {
        return Err(Error::NonPositiveEnergy { energy });
    }
    let r_bound_end = *initial.r.last().ok_or(Error::InvalidGrid { reason: "empty bound state".into() })?;
    let cgrid = initial.grid.extended(grid.r_max.max(r_bound_end));
    let mesh = cgrid.mesh(spec.wall(), spec.knot().map(|k| k.0), f64::INFINITY, 0);
    let n_shared = initial.r.len().min(mesh.len());
    if initial.r.len() > mesh.len()
        || (0..n_shared).any(|i| (mesh.r[i] - initial.r[i]).abs() > 1e-9 * mesh.r[i].max(1.0))
    {
        return Err(Error::InvalidGrid { reason: "bound state does not share the continuum mesh".into() });
    }
    let w = propagate(spec, ell, energy, &mesh, 1.0)?.w;
    let k = (2.0 * energy).sqrt();
    let wavelength = 2.0 * PI / k;
    let last = mesh.len() - 5;
    let r_last = mesh.r[last];
    if r_last - wavelength < spec.range_radius() {
        return Err(Error::NormalizationFailure { energy, spread: f64::INFINITY });
    }
    let first = mesh.index_at_or_after(r_last - wavelength).unwrap_or(last);
    let amplitude = |i: usize| {
        let u = u_value(&mesh, &w, i);
        let uk = u_derivative(&mesh, &w, i) / k;
        let b = riccati(ell, k * mesh.r[i]);
        let c = u * b.dy - uk * b.y;
        let s = u * b.dj - uk * b.j;
        c.hypot(s)
    };
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in first..=last {
        let a = amplitude(i);
        lo = lo.min(a);
        hi = hi.max(a);
    }
    let spread = hi / lo - 1.0;
    if !(spread < 0.01) {
        return Err(Error::NormalizationFailure { energy, spread });
    }
    let scale = (2.0 / (PI * k)).sqrt() / amplitude(last);
    let u = (0..mesh.len()).map(|i| scale * u_value(&mesh, &w, i)).collect();
    Ok(Continuum { mesh, u })
}

/// Radial integral ∫ u_b(r)·r·u_{E,ℓ'}(r) dr in the length gauge with an
/// energy-normalized continuum. `grid.r_max` sets how far the continuum is
/// carried for normalization; its last wavelength must lie outside the
/// potential range.
pub fn dipole_matrix_element(
    initial: &BoundState,
    spec: &PotentialSpec,
    final_ell: u32,
    energy: f64,
    grid: &RadialGrid,
) -> Result<f64> {
    check_selection(initial, final_ell)?;
    let c = continuum(initial, spec, final_ell, energy, grid)?;
    let peak = initial.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let end = initial.u.iter().rposition(|v| v.abs() >= TAIL_CUTOFF * peak).map_or(0, |i| i + 1);
    let f: Vec<f64> = (0..end).map(|i| initial.u[i] * initial.r[i] * c.u[i]).collect();
    Ok(c.mesh.integrate(&f))
}

#[derive(Debug, Clone, Serialize)]
pub struct DipoleScan {
    pub initial_nodes: usize,
    pub initial_ell: u32,
    pub initial_energy: f64,
    pub final_ell: u32,
    pub energies: Vec<f64>,
    pub d_values: Vec<f64>,
    /// bohr² per hartree
    pub sigma_partial: Vec<f64>,
    /// ω = E + |E_bound|
    pub photon_energies: Vec<f64>,
    #[serde(skip)]
    initial: BoundState,
    #[serde(skip)]
    spec: PotentialSpec,
    #[serde(skip)]
    grid: RadialGrid,
}

impl DipoleScan {
    /// D at an energy off the scan grid, same bound state and normalization.
    pub fn dipole_at(&self, energy: f64) -> Result<f64> {
        dipole_matrix_element(&self.initial, &self.spec, self.final_ell, energy, &self.grid)
    }

    pub fn sigma_at(&self, energy: f64) -> Result<f64> {
        let d = self.dipole_at(energy)?;
        Ok(partial_sigma(self.initial_ell, self.final_ell, energy - self.initial_energy, d))
    }

    pub fn initial(&self) -> &BoundState {
        &self.initial
    }
}

pub fn dipole_scan(
    initial: &BoundState,
    spec: &PotentialSpec,
    final_ell: u32,
    energies: &[f64],
    grid: &RadialGrid,
) -> Result<DipoleScan> {
    check_selection(initial, final_ell)?;
    if let Some(&e) = energies.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::NonPositiveEnergy { energy: e });
    }
    let d_values: Vec<f64> = energies
        .par_iter()
        .map(|&e| dipole_matrix_element(initial, spec, final_ell, e, grid))
        .collect::<Result<_>>()?;
    let photon_energies: Vec<f64> = energies.iter().map(|e| e - initial.energy).collect();
    let sigma_partial =
        photon_energies.iter().zip(&d_values).map(|(&w, &d)| partial_sigma(initial.ell, final_ell, w, d)).collect();
    Ok(DipoleScan {
        initial_nodes: initial.n_radial,
        initial_ell: initial.ell,
        initial_energy: initial.energy,
        final_ell,
        energies: energies.to_vec(),
        d_values,
        sigma_partial,
        photon_energies,
        initial: initial.clone(),
        spec: spec.clone(),
        grid: *grid,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Photodetachment {
    /// one scan per allowed ℓ' (ℓ−1 first when present)
    pub channels: Vec<DipoleScan>,
    pub sigma_total: Vec<f64>,
}

pub fn photodetachment_cross_section(
    initial: &BoundState,
    spec: &PotentialSpec,
    energies: &[f64],
    grid: &RadialGrid,
) -> Result<Photodetachment> {
    let mut finals = Vec::new();
    if initial.ell > 0 {
        finals.push(initial.ell - 1);
    }
    finals.push(initial.ell + 1);
    let channels =
        finals.into_iter().map(|l| dipole_scan(initial, spec, l, energies, grid)).collect::<Result<Vec<_>>>()?;
    let sigma_total = (0..energies.len()).map(|i| channels.iter().map(|c| c.sigma_partial[i]).sum()).collect();
    Ok(Photodetachment { channels, sigma_total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CooperMinimum {
    pub e_cm: f64,
    /// scan samples straddling the sign change
    pub bracket: (f64, f64),
    /// final bisection interval, width < 1e−8
    pub refined: (f64, f64),
    /// σ(E_CM) below the three nearest scan samples
    pub local_minimum: bool,
}

/// First sign change of D in the scan, refined by bisection on D(E).
pub fn find_cooper_minimum(scan: &DipoleScan) -> Result<CooperMinimum> {
    let d = &scan.d_values;
    let i = (0..d.len().saturating_sub(1))
        .find(|&i| d[i] != 0.0 && d[i + 1] != 0.0 && d[i].signum() != d[i + 1].signum())
        .or_else(|| d.iter().position(|v| *v == 0.0).map(|i| i.saturating_sub(1)))
        .ok_or(Error::NoCooperMinimum)?;
    let bracket = (scan.energies[i], scan.energies[(i + 1).min(d.len() - 1)]);
    let (mut lo, mut hi) = bracket;
    let mut d_lo = d[i];
    while hi - lo >= 1e-8 {
        let mid = 0.5 * (lo + hi);
        let dm = scan.dipole_at(mid)?;
        if dm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if dm.signum() == d_lo.signum() {
            lo = mid;
            d_lo = dm;
        } else {
            hi = mid;
        }
    }
    let e_cm = 0.5 * (lo + hi);
    let sigma_cm = scan.sigma_at(e_cm)?;
    let mut nearest: Vec<usize> = (0..d.len()).collect();
    nearest.sort_by(|&a, &b| (scan.energies[a] - e_cm).abs().total_cmp(&(scan.energies[b] - e_cm).abs()));
    let local_minimum = nearest.iter().take(3).all(|&j| sigma_cm <= scan.sigma_partial[j]);
    Ok(CooperMinimum { e_cm, bracket, refined: (lo, hi), local_minimum })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdFit {
    pub exponent: f64,
    pub stderr: f64,
    /// ℓ' + ½
    pub expected: f64,
    pub points: usize,
}

/// Least-squares slope of ln σ against ln E over the lowest `decades`
/// decades of the scan.
pub fn threshold_exponent_fit(scan: &DipoleScan, decades: f64, expected_ell: u32) -> Result<ThresholdFit> {
    let e_min = scan.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let e_top = e_min * 10f64.powf(decades);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&e, &s) in scan.energies.iter().zip(&scan.sigma_partial) {
        if e > e_top * (1.0 + 1e-12) {
            continue;
        }
        if !(s > 0.0) {
            return Err(Error::NonPositiveSigma { energy: e, value: s });
        }
        xs.push(e.ln());
        ys.push(s.ln());
    }
    let (slope, stderr) = log_slope(&xs, &ys)?;
    Ok(ThresholdFit { exponent: slope, stderr, expected: expected_ell as f64 + 0.5, points: xs.len() })
}

/// Ordinary least-squares slope and its standard error.
pub(crate) fn log_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 10 {
        return Err(Error::TooFewPoints { found: n, needed: 10 });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok((slope, (ssr / (nf - 2.0) / sxx).sqrt()))
}

/// Photoelectron phase η = δ_ℓ'(E) + arg D(E) over the scan energies. D is
/// real, so arg D is 0 or −π; each sign change lowers η by π. With a Cooper
/// minimum, two samples are added at E_CM ± [`ZERO_STRADDLE`]. `grid` must
/// reach far enough to extract δ at the lowest energy.
pub fn channel_phase(scan: &DipoleScan, cooper: Option<&CooperMinimum>, grid: &RadialGrid) -> Result<PhaseShiftCurve> {
    let mut pts: Vec<(f64, f64)> = scan.energies.iter().copied().zip(scan.d_values.iter().copied()).collect();
    if let Some(cm) = cooper {
        for e in [cm.e_cm - ZERO_STRADDLE, cm.e_cm + ZERO_STRADDLE] {
            pts.push((e, scan.dipole_at(e)?));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
    }
    let energies: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let curve = phase_scan(&scan.spec, scan.final_ell, &energies, grid)?;
    let mut drops = 0.0;
    let mut last_sign = 0.0;
    let mut deltas = Vec::with_capacity(pts.len());
    for &(e, d) in &pts {
        if d != 0.0 {
            if last_sign != 0.0 && d.signum() != last_sign {
                drops += 1.0;
            }
            last_sign = d.signum();
        }
        deltas.push(curve.delta_at(e)? - PI * drops);
    }
    PhaseShiftCurve::from_samples(scan.final_ell, energies, deltas)
}

/// Half-scattering delay dη/dE of the channel phase.
pub fn channel_delay(scan: &DipoleScan, cooper: Option<&CooperMinimum>, grid: &RadialGrid) -> Result<TimeDelayCurve> {
    time_delay(&channel_phase(scan, cooper, grid)?, DelayMode::HalfScattering)
}
