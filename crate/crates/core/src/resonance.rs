//! Beutler–Fano profiles: evaluation, damped least-squares fitting, phase
//! decomposition into background and resonant parts, and q-reversal
//! detection along a series.

use std::f64::consts::PI;

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::EffectiveCurve;
use crate::scattering::PhaseShiftCurve;
use crate::units::au_to_attosec;

const MAX_ITER: usize = 200;
const PARAM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceParams {
    pub e_r: f64,
    /// full width Γ > 0
    pub gamma: f64,
    pub q: f64,
    pub sigma_0: f64,
    pub sigma_a: f64,
}

impl ResonanceParams {
    /// ε = (E − E_r)/(Γ/2).
    pub fn reduced_energy(&self, energy: f64) -> f64 {
        (energy - self.e_r) / (0.5 * self.gamma)
    }

    /// Energy of the profile zero, ε = −q.
    pub fn zero_energy(&self) -> f64 {
        self.e_r - self.q * 0.5 * self.gamma
    }

    /// Energy of the profile maximum, ε = 1/q.
    pub fn peak_energy(&self) -> Option<f64> {
        (self.q != 0.0).then(|| self.e_r + 0.5 * self.gamma / self.q)
    }

    /// ħ/Γ in atomic units of time.
    pub fn lifetime_au(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// (q + ε)²/(1 + ε²).
pub fn resonant_factor(q: f64, eps: f64) -> f64 {
    (q + eps).powi(2) / (1.0 + eps * eps)
}

pub fn fano_eval(params: &ResonanceParams, energy: f64) -> f64 {
    params.sigma_0 + params.sigma_a * resonant_factor(params.q, params.reduced_energy(energy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanoFit {
    pub params: ResonanceParams,
    pub rms_residual: f64,
    pub iterations: usize,
}

/// JSON record for a fitted resonance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    #[serde(rename = "E_r")]
    pub e_r: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub q: f64,
    pub sigma_0: f64,
    pub sigma_a: f64,
    pub rms: f64,
    pub lifetime_au: f64,
    pub lifetime_attosec: f64,
}

impl From<&FanoFit> for FitReport {
    fn from(f: &FanoFit) -> Self {
        let p = f.params;
        Self {
            e_r: p.e_r,
            gamma: p.gamma,
            q: p.q,
            sigma_0: p.sigma_0,
            sigma_a: p.sigma_a,
            rms: f.rms_residual,
            lifetime_au: p.lifetime_au(),
            lifetime_attosec: au_to_attosec(p.lifetime_au()),
        }
    }
}

/// Coordinates of the damped least-squares search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    /// θ = (E_r, ln Γ, q, σ₀, σ_a)
    Fano,
    /// θ = (E_r, ln Γ, u = 1/q, σ₀, A = σ_a q²); regular at the Lorentzian limit
    Inverse,
}

fn unpack(t: &Vector5<f64>, chart: Chart) -> ResonanceParams {
    let (q, sigma_a) = match chart {
        Chart::Fano => (t[2], t[4]),
        Chart::Inverse => {
            let u = if t[2] == 0.0 { f64::MIN_POSITIVE } else { t[2] };
            (1.0 / u, t[4] * u * u)
        }
    };
    ResonanceParams { e_r: t[0], gamma: t[1].exp(), q, sigma_0: t[3], sigma_a }
}

fn pack(p: &ResonanceParams, chart: Chart) -> Vector5<f64> {
    match chart {
        Chart::Fano => Vector5::new(p.e_r, p.gamma.ln(), p.q, p.sigma_0, p.sigma_a),
        Chart::Inverse => Vector5::new(p.e_r, p.gamma.ln(), 1.0 / p.q, p.sigma_0, p.sigma_a * p.q * p.q),
    }
}

fn residuals_and_jacobian(t: &Vector5<f64>, data: &[(f64, f64)], chart: Chart) -> (Vec<f64>, Vec<[f64; 5]>) {
    let (e_r, gamma) = (t[0], t[1].exp());
    let mut res = Vec::with_capacity(data.len());
    let mut jac = Vec::with_capacity(data.len());
    for &(e, s) in data {
        let eps = (e - e_r) / (0.5 * gamma);
        let d = 1.0 + eps * eps;
        let (f, df_deps, df_dx) = match chart {
            Chart::Fano => {
                let q = t[2];
                ((q + eps).powi(2) / d, 2.0 * (q + eps) * (1.0 - q * eps) / (d * d), 2.0 * (q + eps) / d)
            }
            Chart::Inverse => {
                let u = t[2];
                let a = 1.0 + u * eps;
                (a * a / d, 2.0 * a * (u - eps) / (d * d), 2.0 * eps * a / d)
            }
        };
        let amp = t[4];
        res.push(t[3] + amp * f - s);
        jac.push([amp * df_deps * (-2.0 / gamma), amp * df_deps * (-eps), amp * df_dx, 1.0, f]);
    }
    (res, jac)
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn sorted_window(data: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    let mut pts: Vec<(f64, f64)> =
        data.iter().copied().filter(|(e, _)| window.is_none_or(|(lo, hi)| *e >= lo && *e <= hi)).collect();
    if pts.len() < 8 {
        return Err(Error::InsufficientData { found: pts.len(), needed: 8 });
    }
    if let Some(&(e, s)) = pts.iter().find(|(_, s)| *s < 0.0) {
        return Err(Error::NegativeCrossSection { energy: e, value: s });
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts)
}

/// Full width at half height of a peak (dip when `sign` < 0) around index i
/// measured from `base`.
fn half_width(pts: &[(f64, f64)], i: usize, base: f64, sign: f64) -> f64 {
    let half = base + 0.5 * (pts[i].1 - base);
    let inside = |s: f64| sign * (s - half) > 0.0;
    let mut lo = i;
    while lo > 0 && inside(pts[lo - 1].1) {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < pts.len() && inside(pts[hi + 1].1) {
        hi += 1;
    }
    let e_lo = if lo > 0 { pts[lo - 1].0 } else { pts[0].0 };
    let e_hi = if hi + 1 < pts.len() { pts[hi + 1].0 } else { pts[pts.len() - 1].0 };
    (0.5 * ((pts[lo].0 - e_lo) + (e_hi - pts[hi].0)) + (pts[hi].0 - pts[lo].0)).max(1e-300)
}

fn initial_guess(pts: &[(f64, f64)]) -> Result<ResonanceParams> {
    let n = pts.len();
    let (mut i_min, mut i_max) = (0, 0);
    for i in 0..n {
        if pts[i].1 < pts[i_min].1 {
            i_min = i;
        }
        if pts[i].1 > pts[i_max].1 {
            i_max = i;
        }
    }
    let (s_min, s_max) = (pts[i_min].1, pts[i_max].1);
    if s_max - s_min <= 1e-12 * s_max.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NoResonantStructure { reason: "data are flat".into() });
    }
    let interior = |i: usize| i > 0 && i + 1 < n;
    let edge = 0.5 * (pts[0].1 + pts[n - 1].1);
    match (interior(i_min), interior(i_max)) {
        (true, true) => {
            let sigma_0 = s_min;
            let sigma_a = (edge - sigma_0).max(1e-3 * (s_max - s_min));
            let q_abs = ((s_max - sigma_0) / sigma_a - 1.0).max(1e-4).sqrt();
            let q = if pts[i_min].0 < pts[i_max].0 { q_abs } else { -q_abs };
            let gamma = (2.0 * (pts[i_max].0 - pts[i_min].0) / (q + 1.0 / q)).abs();
            Ok(ResonanceParams { e_r: pts[i_min].0 + q * 0.5 * gamma, gamma, q, sigma_0, sigma_a })
        }
        (false, true) => {
            let gamma = half_width(pts, i_max, s_min, 1.0);
            let skew = pts[n - 1].1 - pts[0].1;
            let q = if skew > 0.0 { -10.0 } else { 10.0 };
            let sigma_a = (s_max - s_min) / (q * q + 1.0);
            Ok(ResonanceParams { e_r: pts[i_max].0, gamma, q, sigma_0: s_min - sigma_a, sigma_a })
        }
        (true, false) => {
            let gamma = half_width(pts, i_min, s_max, -1.0);
            let skew = pts[n - 1].1 - pts[0].1;
            let q = if skew > 0.0 { 0.1 } else { -0.1 };
            Ok(ResonanceParams { e_r: pts[i_min].0, gamma, q, sigma_0: s_min, sigma_a: s_max - s_min })
        }
        (false, false) => Err(Error::NoResonantStructure { reason: "no interior extremum in window".into() }),
    }
}

/// Damped least-squares fit of σ₀ + σ_a(q+ε)²/(1+ε²). A search that
/// drifts past |q| = 20 is continued in 1/q.
pub fn fano_fit(data: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FanoFit> {
    let pts = sorted_window(data, window)?;
    let guess = initial_guess(&pts)?;
    let sigma_scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let e_span = pts[pts.len() - 1].0 - pts[0].0;
    let mut chart = if guess.q.abs() > 20.0 { Chart::Inverse } else { Chart::Fano };
    let mut theta = pack(&guess, chart);
    let mut used = 0;
    loop {
        match levenberg_marquardt(theta, &pts, chart, [e_span, sigma_scale], MAX_ITER - used) {
            Search::Converged(t, c, iter) => return Ok(finish(t, chart, c, pts.len(), used + iter)),
            Search::Switch(t, iter) if chart == Chart::Fano => {
                used += iter;
                theta = pack(&unpack(&t, Chart::Fano), Chart::Inverse);
                chart = Chart::Inverse;
            }
            Search::Switch(_, iter) | Search::Failed(iter) => {
                return Err(Error::FitNotConverged { iterations: used + iter })
            }
        }
    }
}

enum Search {
    Converged(Vector5<f64>, f64, usize),
    /// |q| left the well-conditioned range
    Switch(Vector5<f64>, usize),
    Failed(usize),
}

fn levenberg_marquardt(
    mut theta: Vector5<f64>,
    pts: &[(f64, f64)],
    chart: Chart,
    [e_span, sigma_scale]: [f64; 2],
    max_iter: usize,
) -> Search {
    let floors = [e_span, 1.0, 1e-6, sigma_scale, sigma_scale];
    let (mut res, mut jac) = residuals_and_jacobian(&theta, pts, chart);
    let mut c = cost(&res);
    let mut lambda = 1e-3;
    let mut stalls = 0;
    for iter in 1..=max_iter {
        let mut a = Matrix5::<f64>::zeros();
        let mut g = Vector5::<f64>::zeros();
        for (r, row) in res.iter().zip(&jac) {
            for j in 0..5 {
                g[j] += row[j] * r;
                for k in 0..5 {
                    a[(j, k)] += row[j] * row[k];
                }
            }
        }
        loop {
            let mut damped = a;
            for j in 0..5 {
                damped[(j, j)] += lambda * a[(j, j)].max(1e-300);
            }
            let step = match damped.lu().solve(&(-g)) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    if lambda > 1e30 {
                        return Search::Failed(iter);
                    }
                    continue;
                }
            };
            let small = (0..5).all(|j| step[j].abs() <= PARAM_TOL * (theta[j].abs() + floors[j] * 1e-3));
            let trial = theta + step;
            let (r_new, j_new) = residuals_and_jacobian(&trial, pts, chart);
            let c_new = cost(&r_new);
            if c_new.is_finite() && c_new <= c {
                stalls = if c - c_new <= 1e-14 * c { stalls + 1 } else { 0 };
                theta = trial;
                res = r_new;
                jac = j_new;
                c = c_new;
                lambda = (lambda / 3.0).max(1e-12);
                if small || stalls >= 5 {
                    return Search::Converged(theta, c, iter);
                }
                if chart == Chart::Fano && theta[2].abs() > 20.0 {
                    return Search::Switch(theta, iter);
                }
                break;
            }
            if small {
                return Search::Converged(theta, c, iter);
            }
            lambda *= 10.0;
            if lambda > 1e30 {
                return Search::Failed(iter);
            }
        }
    }
    Search::Failed(max_iter)
}

fn finish(theta: Vector5<f64>, chart: Chart, c: f64, n: usize, iterations: usize) -> FanoFit {
    let mut p = unpack(&theta, chart);
    if p.sigma_a < 0.0 && p.q != 0.0 {
        // same curve with q → −1/q
        let q2 = p.q * p.q;
        p = ResonanceParams {
            sigma_0: p.sigma_0 + p.sigma_a * (1.0 + q2),
            sigma_a: -p.sigma_a * q2,
            q: -1.0 / p.q,
            ..p
        };
    }
    FanoFit { params: p, rms_residual: (c / n as f64).sqrt(), iterations }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDecomposition {
    pub energies: Vec<f64>,
    pub delta_a: Vec<f64>,
    pub delta_b: Vec<f64>,
    pub window: (f64, f64),
}

impl PhaseDecomposition {
    /// Largest |sin²(δ_a+δ_b) − sin²δ_a(−cot δ_a − cot δ_b)²/(1+cot²δ_b)|.
    pub fn identity_residual(&self) -> f64 {
        self.delta_a
            .iter()
            .zip(&self.delta_b)
            .map(|(&a, &b)| {
                let (l, r) = identity_sides(a, b);
                (l - r).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Both sides of sin²(a+b) = sin²a(−cot a − cot b)²/(1+cot²b), the right
/// side written as (ε sin a − cos a)²/(1+ε²) with ε = −cot b.
pub fn identity_sides(a: f64, b: f64) -> (f64, f64) {
    let lhs = (a + b).sin().powi(2);
    let (sb, cb) = b.sin_cos();
    let eps = -cb / sb;
    let rhs = if eps.is_finite() { (eps * a.sin() - a.cos()).powi(2) / (1.0 + eps * eps) } else { a.sin().powi(2) };
    (lhs, rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub decomposition: PhaseDecomposition,
    pub e_r: f64,
    pub gamma: f64,
    /// rms residual of the background fit outside the resonance core, rad
    pub background_residual: f64,
}

/// Least-squares polynomial of degree ≤ `deg` through (x, y); coefficients
/// in powers of (x − x0)/scale.
fn polyfit(x: &[f64], y: &[f64], deg: usize, x0: f64, scale: f64) -> Vec<f64> {
    let m = deg + 1;
    let mut a = nalgebra::DMatrix::<f64>::zeros(x.len(), m);
    for (i, &xi) in x.iter().enumerate() {
        let t = (xi - x0) / scale;
        for j in 0..m {
            a[(i, j)] = t.powi(j as i32);
        }
    }
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14).map(|v| v.iter().copied().collect()).unwrap_or_else(|_| vec![0.0; m])
}

fn polyval(c: &[f64], x: f64, x0: f64, scale: f64) -> f64 {
    let t = (x - x0) / scale;
    c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
}

/// Locate the π/2 crossing of `d` and its slope there from the 5-point
/// interpolating polynomial around the bracketing samples.
fn crossing(e: &[f64], d: &[f64]) -> Option<(f64, f64)> {
    let target = PI / 2.0;
    let i = (0..e.len() - 1).find(|&i| (d[i] - target) * (d[i + 1] - target) <= 0.0 && d[i + 1] > d[i])?;
    let lo = i.saturating_sub(2).min(e.len().saturating_sub(5));
    let idx: Vec<usize> = (lo..(lo + 5).min(e.len())).collect();
    let lagrange = |x: f64| -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for &a in &idx {
            let mut basis = 1.0;
            let mut dbasis = 0.0;
            for &b in &idx {
                if a == b {
                    continue;
                }
                let denom = e[a] - e[b];
                dbasis = dbasis * (x - e[b]) / denom + basis / denom;
                basis *= (x - e[b]) / denom;
            }
            v += d[a] * basis;
            dv += d[a] * dbasis;
        }
        (v, dv)
    };
    let mut x = e[i] + (target - d[i]) / (d[i + 1] - d[i]) * (e[i + 1] - e[i]);
    for _ in 0..50 {
        let (v, dv) = lagrange(x);
        if dv <= 0.0 {
            break;
        }
        let step = (v - target) / dv;
        x = (x - step).clamp(e[i], e[i + 1]);
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    let (_, slope) = lagrange(x);
    (slope > 0.0).then_some((x, slope))
}

/// Split δ into a background δ_a (degree ≤ 2 polynomial fitted where
/// |ε| > 3) and δ_b = δ − δ_a; E_r is where δ_b crosses π/2 and
/// Γ = 2/(dδ_b/dE) there. Iterated to self-consistency.
pub fn decompose_phase(curve: &PhaseShiftCurve, window: (f64, f64)) -> Result<DecompositionResult> {
    let idx: Vec<usize> =
        (0..curve.len()).filter(|&i| curve.energies[i] >= window.0 && curve.energies[i] <= window.1).collect();
    if idx.len() < 8 {
        return Err(Error::InsufficientData { found: idx.len(), needed: 8 });
    }
    let e: Vec<f64> = idx.iter().map(|&i| curve.energies[i]).collect();
    let d: Vec<f64> = idx.iter().map(|&i| curve.deltas[i]).collect();
    // largest rise over the window
    let mut rise = 0.0f64;
    let mut low = d[0];
    for &v in &d {
        low = low.min(v);
        rise = rise.max(v - low);
    }
    if rise < 0.9 * PI {
        return Err(Error::InsufficientRise { rise });
    }
    let x0 = 0.5 * (e[0] + e[e.len() - 1]);
    let scale = 0.5 * (e[e.len() - 1] - e[0]);

    let first: Vec<f64> = d.iter().map(|v| v - d[0]).collect();
    let (mut e_r, slope) =
        crossing(&e, &first).ok_or(Error::NoResonantStructure { reason: "no π/2 crossing".into() })?;
    let mut gamma = 2.0 / slope;
    let mut delta_a = vec![d[0]; e.len()];
    let mut background_residual = 0.0;
    for _ in 0..100 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = e
            .iter()
            .zip(&d)
            .filter(|(ei, _)| ((*ei - e_r) / (0.5 * gamma)).abs() > 3.0)
            .map(|(&ei, &di)| (ei, di - (PI / 2.0 + ((ei - e_r) / (0.5 * gamma)).atan())))
            .unzip();
        if xs.len() < 3 {
            return Err(Error::InsufficientData { found: xs.len(), needed: 3 });
        }
        let deg = 2.min(xs.len() - 1);
        let c = polyfit(&xs, &ys, deg, x0, scale);
        background_residual = (xs.iter().zip(&ys).map(|(&x, &y)| (polyval(&c, x, x0, scale) - y).powi(2)).sum::<f64>()
            / xs.len() as f64)
            .sqrt();
        delta_a = e.iter().map(|&x| polyval(&c, x, x0, scale)).collect();
        let delta_b: Vec<f64> = d.iter().zip(&delta_a).map(|(v, a)| v - a).collect();
        let (new_e, new_slope) =
            crossing(&e, &delta_b).ok_or(Error::NoResonantStructure { reason: "δ_b never crosses π/2".into() })?;
        let new_gamma = 2.0 / new_slope;
        let done = (new_e - e_r).abs() < 1e-13 * scale.max(gamma) && (new_gamma / gamma - 1.0).abs() < 1e-11;
        e_r = new_e;
        gamma = new_gamma;
        if done {
            break;
        }
    }
    if background_residual > 0.05 {
        return Err(Error::BackgroundNotSlow { residual: background_residual });
    }
    let delta_b = d.iter().zip(&delta_a).map(|(v, a)| v - a).collect();
    Ok(DecompositionResult {
        decomposition: PhaseDecomposition { energies: e, delta_a, delta_b, window },
        e_r,
        gamma,
        background_residual,
    })
}

/// Indices i where sign(q_i) ≠ sign(q_{i+1}); a zero q takes the sign of
/// its neighbor with larger |q|.
pub fn detect_q_reversal(series: &[ResonanceParams]) -> Vec<usize> {
    let qs: Vec<f64> = series.iter().map(|p| p.q).collect();
    q_sign_changes(&qs)
}

pub fn q_sign_changes(qs: &[f64]) -> Vec<usize> {
    let n = qs.len();
    let signs: Vec<f64> = (0..n)
        .map(|i| {
            if qs[i] != 0.0 {
                return qs[i].signum();
            }
            let left = if i > 0 { qs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { qs[i + 1] } else { 0.0 };
            let pick = if left.abs() >= right.abs() { left } else { right };
            if pick == 0.0 {
                0.0
            } else {
                pick.signum()
            }
        })
        .collect();
    (0..n.saturating_sub(1)).filter(|&i| signs[i] != signs[i + 1]).collect()
}

/// "shape" when a positive barrier rises above E_r > 0 with a deeper inner
/// well on its inside; no label otherwise. Feshbach resonances need closed
/// channels and are never reported.
pub fn classify(curve: &EffectiveCurve, e_r: f64) -> Option<&'static str> {
    let barrier = curve.barrier?;
    let inner_ok = curve.inner_minimum.map_or(curve.wall.is_some(), |m| m.value < e_r && m.r < barrier.r);
    (e_r > 0.0 && barrier.value > e_r && inner_ok).then_some("shape")
}
