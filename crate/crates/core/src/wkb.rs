//! JWKB barrier penetration: turning points, the under-barrier action with
//! the Langer-modified centrifugal term (ℓ+½)²/2r², tunneling
//! probabilities, Gamow factors and imaginary-velocity traversal times.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{EffectiveCurve, Feature};
use crate::units::au_to_attosec;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Gauss–Legendre nodes and weights on [−1, 1], 8 points.
const GL_X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
const GL_W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

const MAX_PANELS: usize = 1 << 16;
const QUAD_TOL: f64 = 1e-13;

#[derive(Clone, Serialize)]
pub struct BarrierSegment {
    pub ell: u32,
    pub energy: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    /// ∫√(2(V_L − E)) dr between the turning points
    pub action: f64,
    #[serde(skip)]
    profile: Profile,
}

impl fmt::Debug for BarrierSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BarrierSegment")
            .field("ell", &self.ell)
            .field("energy", &self.energy)
            .field("r_inner", &self.r_inner)
            .field("r_outer", &self.r_outer)
            .field("action", &self.action)
            .finish()
    }
}

impl BarrierSegment {
    /// Rectangular barrier of `height` on [0, width] at energy E < height.
    pub fn rectangular(height: f64, width: f64, energy: f64) -> Result<Self> {
        if !(energy < height) {
            return Err(Error::NoBarrier { energy, top: height });
        }
        let profile: Profile = Arc::new(move |_| height);
        let action = action_integral(&*profile, energy, 0.0, width);
        Ok(Self { ell: 0, energy, r_inner: 0.0, r_outer: width, action, profile })
    }

    /// The potential the segment was built from (Langer form for curves).
    pub fn eval(&self, r: f64) -> f64 {
        (self.profile)(r)
    }
}

/// Composite 8-point Gauss–Legendre on [a, b] with `panels` panels.
fn gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in GL_X.iter().zip(&GL_W) {
            sum += w * (f(mid - half * x) + f(mid + half * x));
        }
    }
    sum * 0.5 * h
}

/// Panel doubling until the relative change drops below `QUAD_TOL`.
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut panels = 4;
    let mut prev = gauss(f, a, b, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = gauss(f, a, b, panels);
        if (next - prev).abs() <= QUAD_TOL * next.abs().max(1e-300) {
            return next;
        }
        prev = next;
    }
    prev
}

/// ∫ g(r) dr over [r_in, r_out] where g has integrable √-type behavior at
/// both ends: split at the midpoint, substitute r = r_in + s² on the left
/// half and r = r_out − s² on the right.
fn endpoint_substituted(g: &dyn Fn(f64) -> f64, r_in: f64, r_out: f64) -> f64 {
    let m = 0.5 * (r_in + r_out);
    let span = (m - r_in).sqrt();
    let left = |s: f64| 2.0 * s * g(r_in + s * s);
    let right = |s: f64| 2.0 * s * g(r_out - s * s);
    adaptive(&left, 0.0, span) + adaptive(&right, 0.0, span)
}

/// ∫ √(2(V − E)) dr between `r_in` and `r_out`, clamping V − E at zero.
pub fn action_integral(v: &dyn Fn(f64) -> f64, energy: f64, r_in: f64, r_out: f64) -> f64 {
    endpoint_substituted(&|r| (2.0 * (v(r) - energy)).max(0.0).sqrt(), r_in, r_out)
}

fn bisect_crossing(f: &dyn Fn(f64) -> f64, mut inside: f64, mut outside: f64) -> f64 {
    // f(inside) > 0 ≥ f(outside)
    for _ in 0..200 {
        if (inside - outside).abs() < 1e-12 * inside.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (inside + outside);
        if f(mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Highest point of the Langer curve near the barrier feature.
fn langer_top(curve: &EffectiveCurve, near: usize) -> (f64, f64) {
    let r = &curve.radii;
    let v = |x: f64| curve.eval_langer(x);
    let mut i = near;
    while i + 1 < r.len() && v(r[i + 1]) > v(r[i]) {
        i += 1;
    }
    while i > 0 && v(r[i - 1]) > v(r[i]) {
        i -= 1;
    }
    if i == 0 || i + 1 == r.len() {
        return (r[i], v(r[i]));
    }
    // golden-section refinement on the bracketing samples
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (r[i - 1], r[i + 1]);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if v(c) > v(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let x = 0.5 * (a + b);
    if v(x) >= v(r[i]) {
        (x, v(x))
    } else {
        (r[i], v(r[i]))
    }
}

/// Maximum of the Langer curve next to the barrier feature; this is the
/// height `barrier_segment` compares energies against.
pub fn barrier_top(curve: &EffectiveCurve) -> Result<Feature> {
    let barrier = curve.barrier.ok_or(Error::BarrierAbsent)?;
    let near = curve.radii.partition_point(|&x| x < barrier.r).min(curve.radii.len() - 1);
    let (r, value) = langer_top(curve, near);
    Ok(Feature { r, value })
}

/// Classically forbidden segment under the barrier of `curve` at `energy`.
/// Turning points and action use the Langer form V + (ℓ+½)²/2r²; the
/// barrier top is the maximum of that form next to the barrier feature.
pub fn barrier_segment(curve: &EffectiveCurve, energy: f64) -> Result<BarrierSegment> {
    let barrier = curve.barrier.ok_or(Error::BarrierAbsent)?;
    let r = &curve.radii;
    let near = r.partition_point(|&x| x < barrier.r).min(r.len() - 1);
    let (r_top, top) = langer_top(curve, near);
    if !(energy < top) {
        return Err(Error::NoBarrier { energy, top });
    }
    let f = |x: f64| curve.eval_langer(x) - energy;
    // samples either side of the top
    let b_idx = r.partition_point(|&x| x < r_top).min(r.len() - 1);

    // inward: sample bracket, else the wall closes the segment
    let r_inner = match (0..b_idx).rev().find(|&i| f(r[i]) <= 0.0) {
        Some(i) => {
            let inside = if i + 1 == b_idx { r_top } else { r[i + 1] };
            bisect_crossing(&f, inside, r[i])
        }
        None => match curve.wall {
            Some(w) => w,
            None => return Err(Error::NoInnerRegion { energy }),
        },
    };

    // outward: past the samples the exact curve is followed geometrically
    let r_outer = match (b_idx..r.len()).find(|&j| r[j] > r_top && f(r[j]) <= 0.0) {
        Some(j) => {
            let inside = if j > 0 && r[j - 1] > r_top { r[j - 1] } else { r_top };
            bisect_crossing(&f, inside, r[j])
        }
        None => {
            let mut lo = r[r.len() - 1].max(r_top);
            let mut hi = lo * 1.5;
            while f(hi) > 0.0 {
                lo = hi;
                hi *= 1.5;
                if hi > 1e12 {
                    return Err(Error::NoBarrier { energy, top });
                }
            }
            bisect_crossing(&f, lo, hi)
        }
    };

    let (ri, ro) = (r_inner, r_outer);
    for t in [1.0, 2.0, 3.0, 4.0, 5.0] {
        if !(f(ri + (ro - ri) * t / 6.0) > 0.0) {
            return Err(Error::NoBarrier { energy, top });
        }
    }
    let c = curve.clone();
    let profile: Profile = Arc::new(move |x| c.eval_langer(x));
    let action = action_integral(&*profile, energy, r_inner, r_outer);
    Ok(BarrierSegment { ell: curve.ell, energy, r_inner, r_outer, action, profile })
}

/// T = exp(−2·action).
pub fn tunneling_probability(segment: &BarrierSegment) -> f64 {
    (-2.0 * segment.action).exp()
}

/// exp(−π·z·√2/√E): the JWKB transmission through a pure repulsive
/// Coulomb barrier z/r, whose action from 0 to z/E is πz/√(2E).
pub fn gamow_factor(z_product: f64, energy: f64) -> f64 {
    (-PI * z_product * 2f64.sqrt() / energy.sqrt()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraversalTime {
    pub time_au: f64,
    pub time_attosec: f64,
}

/// ∫ dr/√(2(V − E)) across the segment.
pub fn traversal_time(segment: &BarrierSegment) -> TraversalTime {
    let e = segment.energy;
    let p = &segment.profile;
    let g = |r: f64| {
        let gap = 2.0 * (p(r) - e);
        if gap > 0.0 {
            1.0 / gap.sqrt()
        } else {
            0.0
        }
    };
    let t = endpoint_substituted(&g, segment.r_inner, segment.r_outer);
    TraversalTime { time_au: t, time_attosec: au_to_attosec(t) }
}

/// Action convergence check: the same integral with the panel budget
/// capped at `panels` on each half.
pub fn action_with_panels(segment: &BarrierSegment, panels: usize) -> f64 {
    let p = &segment.profile;
    let e = segment.energy;
    let g = |r: f64| (2.0 * (p(r) - e)).max(0.0).sqrt();
    let (a, b) = (segment.r_inner, segment.r_outer);
    let m = 0.5 * (a + b);
    let span = (m - a).sqrt();
    gauss(&|s| 2.0 * s * g(a + s * s), 0.0, span, panels) + gauss(&|s| 2.0 * s * g(b - s * s), 0.0, span, panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::potential::{classical_turning_point, effective_curve, PotentialSpec};

    #[test]
    fn direct_values() {
        let s = BarrierSegment::rectangular(1.0, 2.0, 0.5).unwrap();
        assert!((s.action - 2.0).abs() < 1e-13);
        let t = traversal_time(&s);
        assert!((t.time_au - 2.0).abs() < 1e-12);
        let mut z = s.clone();
        z.action = 0.0;
        assert_eq!(tunneling_probability(&z), 1.0);
        z.action = 10f64.ln();
        assert!((tunneling_probability(&z) - 0.01).abs() < 1e-15);
        assert!(BarrierSegment::rectangular(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn gamow_form() {
        assert!((gamow_factor(1.0, 1.0) - (-PI * 2f64.sqrt()).exp()).abs() < 1e-16);
        assert!((gamow_factor(1.0, 1e12) - 1.0).abs() < 1e-5);
        let r = gamow_factor(2.0, 0.5).ln() / gamow_factor(2.0, 1.0).ln();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        // quadrature of the Coulomb action through the same routine
        let s = action_integral(&|r: f64| 1.0 / r, 1.0, 0.0, 1.0);
        assert!(((-2.0 * s).exp() / gamow_factor(1.0, 1.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn centrifugal_turning_point() {
        let spec = PotentialSpec::hard_sphere(0.5).unwrap();
        let grid = RadialGrid::with_step(40.0, 0.01).unwrap();
        let curve = effective_curve(&spec, 1, &grid).unwrap();
        assert!(curve.barrier.is_some());
        let e = 0.01;
        let seg = barrier_segment(&curve, e).unwrap();
        assert!((seg.r_outer - classical_turning_point(1, e).unwrap()).abs() < 1e-8);
        assert_eq!(seg.r_inner, 0.5);
    }

    #[test]
    fn action_vanishes_at_the_top() {
        let spec = PotentialSpec::yukawa(30.0, 1.0).unwrap();
        let grid = RadialGrid::with_step(40.0, 0.01).unwrap();
        let curve = effective_curve(&spec, 3, &grid).unwrap();
        let mut last = f64::INFINITY;
        let top = match barrier_segment(&curve, 1e3) {
            Err(Error::NoBarrier { top, .. }) => top,
            other => panic!("{other:?}"),
        };
        for frac in [0.5, 0.9, 0.99, 0.9999, 0.999999] {
            let seg = barrier_segment(&curve, frac * top).unwrap();
            assert!(seg.action < last);
            last = seg.action;
        }
        assert!(last < 1e-3);
        let seg = barrier_segment(&curve, 0.5 * top).unwrap();
        assert!((action_with_panels(&seg, 512) / action_with_panels(&seg, 256) - 1.0).abs() < 1e-8);
    }
}
