//! Wigner–Eisenbud–Smith delays τ = 2 dδ/dE, the causality bound, and
//! detection of peaks and dips in τ(E).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scattering::PhaseShiftCurve;
use crate::units::au_to_attosec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DelayMode {
    /// τ = 2 dδ/dE, incoming and outgoing legs
    FullScattering,
    /// τ = dδ/dE, outgoing leg only (photoemission)
    HalfScattering,
}

impl DelayMode {
    pub fn factor(self) -> f64 {
        match self {
            DelayMode::FullScattering => 2.0,
            DelayMode::HalfScattering => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DelayMode::FullScattering => "full",
            DelayMode::HalfScattering => "half",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeDelayCurve {
    pub energies: Vec<f64>,
    /// a.u. of time
    pub tau: Vec<f64>,
    pub mode: DelayMode,
}

impl TimeDelayCurve {
    pub fn tau_attosec(&self) -> Vec<f64> {
        self.tau.iter().map(|&t| au_to_attosec(t)).collect()
    }

    /// ∫ τ dE by the trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.energies.windows(2).zip(self.tau.windows(2)).map(|(e, t)| 0.5 * (e[1] - e[0]) * (t[0] + t[1])).sum()
    }
}

/// dy/dx by three-point differences on a nonuniform grid (one-sided at the
/// ends).
pub fn derivative(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::TooFewPoints { found: n.min(y.len()), needed: 3 });
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        d[i] = (hm * hm * y[i + 1] - hp * hp * y[i - 1] + (hp * hp - hm * hm) * y[i]) / (hp * hm * (hp + hm));
    }
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[0] + (h1 + h2) / (h1 * h2) * y[1] - h1 / (h2 * (h1 + h2)) * y[2];
    let (h1, h2) = (x[n - 1] - x[n - 2], x[n - 2] - x[n - 3]);
    d[n - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[n - 1] - (h1 + h2) / (h1 * h2) * y[n - 2]
        + h1 / (h2 * (h1 + h2)) * y[n - 3];
    Ok(d)
}

pub fn time_delay(curve: &PhaseShiftCurve, mode: DelayMode) -> Result<TimeDelayCurve> {
    let d = derivative(&curve.energies, &curve.deltas)?;
    let f = mode.factor();
    Ok(TimeDelayCurve { energies: curve.energies.clone(), tau: d.iter().map(|v| f * v).collect(), mode })
}

/// −2R/v with v = √(2E).
pub fn causality_bound(range: f64, energy: f64) -> f64 {
    -2.0 * range / (2.0 * energy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub energy: f64,
    pub tau: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalityReport {
    pub violations: Vec<Violation>,
    /// samples with E ≥ 1e−6 that were tested
    pub checked: usize,
}

/// Flag samples with τ < bound − (0.05|bound| + 1e−3).
pub fn causality_check(tdc: &TimeDelayCurve, range: f64) -> Result<CausalityReport> {
    if tdc.mode != DelayMode::FullScattering {
        return Err(Error::HalfScatteringBound);
    }
    if !(range > 0.0) {
        return Err(Error::InvalidRange { range });
    }
    let mut violations = Vec::new();
    let mut checked = 0;
    for (&e, &tau) in tdc.energies.iter().zip(&tdc.tau) {
        if e < 1e-6 {
            continue;
        }
        checked += 1;
        let bound = causality_bound(range, e);
        if tau < bound - (0.05 * bound.abs() + 1e-3) {
            violations.push(Violation { energy: e, tau, bound });
        }
    }
    Ok(CausalityReport { violations, checked })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Peak,
    Dip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayFeature {
    pub kind: FeatureKind,
    pub energy: f64,
    pub tau_extremum: f64,
    pub fwhm: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Vertex of the parabola through three points.
fn vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == 0.0 {
        return None;
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[0] + (xv - x[0]) * (d1 + a * (xv - x[1]));
    Some((xv, yv))
}

/// Local extrema of τ beyond 3× the median |τ|, refined parabolically where
/// the samples are evenly spaced, with full width at half extremum.
pub fn delay_structure_scan(tdc: &TimeDelayCurve) -> Result<Vec<DelayFeature>> {
    let n = tdc.tau.len();
    if n < 5 {
        return Err(Error::TooFewPoints { found: n, needed: 5 });
    }
    let (e, t) = (&tdc.energies, &tdc.tau);
    let threshold = 3.0 * median(t.iter().map(|v| v.abs()).collect());
    let mut out = Vec::new();
    for i in 1..n - 1 {
        // an extremum next to a larger opposite excursion is a flank
        let flank_low = t[i - 1].min(t[i + 1]) < -t[i].abs();
        let flank_high = t[i - 1].max(t[i + 1]) > t[i].abs();
        let kind = if t[i] > t[i - 1] && t[i] >= t[i + 1] && t[i] > threshold && t[i] > 0.0 && !flank_low {
            FeatureKind::Peak
        } else if t[i] < t[i - 1] && t[i] <= t[i + 1] && t[i] < -threshold && t[i] < 0.0 && !flank_high {
            FeatureKind::Dip
        } else {
            continue;
        };
        let (hm, hp) = (e[i] - e[i - 1], e[i + 1] - e[i]);
        let even = hm.max(hp) <= 4.0 * hm.min(hp);
        let (energy, tau_extremum) = even
            .then(|| vertex([e[i - 1], e[i], e[i + 1]], [t[i - 1], t[i], t[i + 1]]))
            .flatten()
            .unwrap_or((e[i], t[i]));
        let half = 0.5 * tau_extremum;
        let beyond = |v: f64| if kind == FeatureKind::Peak { v > half } else { v < half };
        let mut lo = i;
        while lo > 0 && beyond(t[lo - 1]) {
            lo -= 1;
        }
        let left =
            if lo == 0 { e[0] } else { e[lo - 1] + (half - t[lo - 1]) / (t[lo] - t[lo - 1]) * (e[lo] - e[lo - 1]) };
        let mut hi = i;
        while hi + 1 < n && beyond(t[hi + 1]) {
            hi += 1;
        }
        let right =
            if hi + 1 == n { e[n - 1] } else { e[hi] + (half - t[hi]) / (t[hi + 1] - t[hi]) * (e[hi + 1] - e[hi]) };
        out.push(DelayFeature { kind, energy, tau_extremum, fwhm: right - left });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bw_curve(e_r: f64, gamma: f64, lo: f64, hi: f64, n: usize) -> PhaseShiftCurve {
        let es: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let ds = es.iter().map(|&e| PI / 2.0 + ((e - e_r) / (0.5 * gamma)).atan()).collect();
        PhaseShiftCurve::from_samples(0, es, ds).unwrap()
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let x = [0.1, 0.3, 0.35, 0.9, 1.0, 1.7];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v - v + 2.0).collect();
        let d = derivative(&x, &y).unwrap();
        for (xi, di) in x.iter().zip(&d) {
            assert!((di - (6.0 * xi - 1.0)).abs() < 1e-12);
        }
        assert!(derivative(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn breit_wigner_peak_and_area() {
        let gamma = 0.01;
        let c = bw_curve(0.5, gamma, 0.5 - 40.0 * gamma, 0.5 + 40.0 * gamma, 1601);
        let t = time_delay(&c, DelayMode::FullScattering).unwrap();
        let peak = t.tau.iter().copied().fold(f64::MIN, f64::max);
        assert!((peak / (4.0 / gamma) - 1.0).abs() < 0.01);
        assert!((t.integral() / (2.0 * PI) - 1.0).abs() < 0.02);
        let f = delay_structure_scan(&t).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, FeatureKind::Peak);
        assert!((f[0].energy - 0.5).abs() < 1e-4);
        assert!((f[0].fwhm / gamma - 1.0).abs() < 0.1);
    }

    #[test]
    fn mode_ratio_and_half_rejection() {
        let c = bw_curve(0.5, 0.02, 0.3, 0.7, 101);
        let full = time_delay(&c, DelayMode::FullScattering).unwrap();
        let half = time_delay(&c, DelayMode::HalfScattering).unwrap();
        for (a, b) in full.tau.iter().zip(&half.tau) {
            assert!((a - 2.0 * b).abs() <= 1e-15 * a.abs());
        }
        assert!(matches!(causality_check(&half, 1.0), Err(Error::HalfScatteringBound)));
    }

    #[test]
    fn causality_counterexample() {
        // δ = −4R·k falls twice as fast as the bound allows
        let r = 1.0;
        let es: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
        let ds = es.iter().map(|&e| -4.0 * r * (2.0 * e).sqrt()).collect();
        let c = PhaseShiftCurve::from_samples(0, es, ds).unwrap();
        let t = time_delay(&c, DelayMode::FullScattering).unwrap();
        let rep = causality_check(&t, r).unwrap();
        assert_eq!(rep.violations.len(), rep.checked);
        let ok = PhaseShiftCurve::from_samples(0, c.energies.clone(), vec![0.0; 50]).unwrap();
        let t = time_delay(&ok, DelayMode::FullScattering).unwrap();
        assert!(causality_check(&t, r).unwrap().violations.is_empty());
        assert!(delay_structure_scan(&t).unwrap().is_empty());
    }
}
