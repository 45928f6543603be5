//! Central model potentials and their ℓ-dependent effective curves.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::units::RANGE_EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    Zero,
    HardSphere {
        radius: f64,
    },
    /// V = −depth for r < radius
    SquareWell {
        depth: f64,
        radius: f64,
    },
    /// V = −(charge/r)·exp(−r/screening)
    Yukawa {
        charge: f64,
        screening: f64,
    },
    Tabulated(Table),
}

/// Monotone cubic (Fritsch–Carlson) interpolant through (r_i, V_i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    radii: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 3 {
            return Err(Error::InvalidPotential {
                name: "table",
                value: radii.len() as f64,
                reason: "need at least 3 (r, V) pairs of equal length",
            });
        }
        if !(radii[0] > 0.0) {
            return Err(Error::InvalidPotential { name: "r_0", value: radii[0], reason: "first radius must be > 0" });
        }
        if let Some(w) = radii.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential { name: "r_i", value: w[1], reason: "radii must strictly increase" });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential { name: "V_i", value: *v, reason: "values must be finite" });
        }
        let n = radii.len();
        let secant: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / (radii[i + 1] - radii[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secant[0];
        slopes[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secant[i - 1] * secant[i] <= 0.0 { 0.0 } else { 0.5 * (secant[i - 1] + secant[i]) };
        }
        for i in 0..n - 1 {
            if secant[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / secant[i];
            let b = slopes[i + 1] / secant[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                slopes[i] = t * a * secant[i];
                slopes[i + 1] = t * b * secant[i];
            }
        }
        Ok(Self { radii, values, slopes })
    }

    /// Parse two whitespace-separated columns (r, V); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace().map(str::parse::<f64>);
            match (cols.next(), cols.next(), cols.next()) {
                (Some(Ok(r)), Some(Ok(v)), None) => {
                    radii.push(r);
                    values.push(v);
                }
                _ => {
                    return Err(Error::InvalidPotential {
                        name: "table",
                        value: radii.len() as f64,
                        reason: "each data line must hold exactly two numbers",
                    })
                }
            }
        }
        Self::new(radii, values)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn first(&self) -> f64 {
        self.radii[0]
    }

    fn last(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    fn interpolate(&self, r: f64) -> f64 {
        if r > self.last() {
            return 0.0;
        }
        let n = self.radii.len();
        let i = self.radii.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        let h = self.radii[i + 1] - self.radii[i];
        let t = (r - self.radii[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

/// Result of evaluating a potential: hard walls are a flag, not a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialValue {
    Finite(f64),
    Infinite,
}

impl PotentialValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PotentialValue::Finite(v) => Some(v),
            PotentialValue::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    kind: PotentialKind,
    range_radius: f64,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self { kind: PotentialKind::Zero, range_radius: 0.0 }
    }

    pub fn hard_sphere(radius: f64) -> Result<Self> {
        positive("a", radius)?;
        Ok(Self { kind: PotentialKind::HardSphere { radius }, range_radius: radius })
    }

    pub fn square_well(depth: f64, radius: f64) -> Result<Self> {
        positive("V0", depth)?;
        positive("a", radius)?;
        Ok(Self { kind: PotentialKind::SquareWell { depth, radius }, range_radius: radius })
    }

    pub fn yukawa(charge: f64, screening: f64) -> Result<Self> {
        positive("Z", charge)?;
        positive("d", screening)?;
        // |V|·R² = Z·R·e^{−R/d} is decreasing once R > d
        let g = |r: f64| (charge * r).ln() - r / screening - RANGE_EPSILON.ln();
        let mut lo = screening;
        let mut hi = 2.0 * screening;
        if g(lo) <= 0.0 {
            return Ok(Self { kind: PotentialKind::Yukawa { charge, screening }, range_radius: lo });
        }
        while g(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self { kind: PotentialKind::Yukawa { charge, screening }, range_radius: hi })
    }

    pub fn tabulated(table: Table) -> Result<Self> {
        let n = table.radii.len();
        for i in n - 3..n {
            let (r, v) = (table.radii[i], table.values[i]);
            if v.abs() * r * r >= RANGE_EPSILON {
                return Err(Error::LongRangeTail { r, value: v.abs() * r * r });
            }
        }
        // last radius where the contract is not yet met
        let mut range = table.first();
        for i in (0..n).rev() {
            if table.values[i].abs() * table.radii[i].powi(2) >= RANGE_EPSILON {
                range = table.radii[(i + 1).min(n - 1)];
                break;
            }
        }
        Ok(Self { kind: PotentialKind::Tabulated(table), range_radius: range })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Radius beyond which |V|·r² < 1e−10 hartree·bohr².
    pub fn range_radius(&self) -> f64 {
        self.range_radius
    }

    pub fn eval(&self, r: f64) -> Result<PotentialValue> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius { r });
        }
        Ok(match &self.kind {
            PotentialKind::Zero => PotentialValue::Finite(0.0),
            PotentialKind::HardSphere { radius } => {
                if r < *radius {
                    PotentialValue::Infinite
                } else {
                    PotentialValue::Finite(0.0)
                }
            }
            PotentialKind::SquareWell { depth, radius } => {
                PotentialValue::Finite(if r < *radius { -depth } else { 0.0 })
            }
            PotentialKind::Yukawa { charge, screening } => {
                PotentialValue::Finite(-(charge / r) * (-r / screening).exp())
            }
            PotentialKind::Tabulated(t) => {
                if r < t.first() {
                    return Err(Error::BelowTable { r, first: t.first() });
                }
                PotentialValue::Finite(t.interpolate(r))
            }
        })
    }

    /// V(r) for integration: zero inside a hard wall (never sampled there),
    /// clamped to V(r₀) below a table.
    pub(crate) fn value(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero | PotentialKind::HardSphere { .. } => 0.0,
            PotentialKind::SquareWell { depth, radius } => {
                if r < *radius {
                    -depth
                } else {
                    0.0
                }
            }
            PotentialKind::Yukawa { charge, screening } => -(charge / r) * (-r / screening).exp(),
            PotentialKind::Tabulated(t) => t.interpolate(r.max(t.first())),
        }
    }

    /// Hard-wall radius, if any.
    pub fn wall(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::HardSphere { radius } => Some(radius),
            _ => None,
        }
    }

    /// Discontinuity radius and the jump V(a⁺) − V(a⁻), if any.
    pub(crate) fn knot(&self) -> Option<(f64, f64)> {
        match self.kind {
            PotentialKind::SquareWell { depth, radius } => Some((radius, depth)),
            _ => None,
        }
    }

    /// V(r) + ℓ(ℓ+1)/(2r²).
    pub fn effective(&self, ell: u32, r: f64) -> f64 {
        self.value(r) + centrifugal(ell, r)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPotential { name, value, reason: "must be positive and finite" })
    }
}

pub(crate) fn centrifugal(ell: u32, r: f64) -> f64 {
    let l = ell as f64;
    l * (l + 1.0) / (2.0 * r * r)
}

/// (ℓ+½)/√(2E).
pub fn classical_turning_point(ell: u32, energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::NonPositiveEnergy { energy });
    }
    Ok((ell as f64 + 0.5) / (2.0 * energy).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub r: f64,
    pub value: f64,
}

/// Sampled V_eff together with its wells and barrier.
#[derive(Clone)]
pub struct EffectiveCurve {
    pub ell: u32,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub inner_minimum: Option<Feature>,
    pub barrier: Option<Feature>,
    pub outer_minimum: Option<Feature>,
    /// hard wall bounding the inner region
    pub wall: Option<f64>,
    bare: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for EffectiveCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EffectiveCurve")
            .field("ell", &self.ell)
            .field("samples", &self.radii.len())
            .field("inner_minimum", &self.inner_minimum)
            .field("barrier", &self.barrier)
            .field("outer_minimum", &self.outer_minimum)
            .field("wall", &self.wall)
            .finish()
    }
}

impl EffectiveCurve {
    /// Exact V_eff(r) backing the samples.
    pub fn eval(&self, r: f64) -> f64 {
        (self.bare)(r) + centrifugal(self.ell, r)
    }

    /// V(r) + (ℓ+½)²/(2r²), the Langer-modified curve.
    pub fn eval_langer(&self, r: f64) -> f64 {
        let l = self.ell as f64 + 0.5;
        (self.bare)(r) + l * l / (2.0 * r * r)
    }

    /// Curve for an arbitrary bare potential sampled on `radii`; features
    /// are detected the same way as for a [`PotentialSpec`].
    pub fn from_profile(
        ell: u32,
        radii: Vec<f64>,
        wall: Option<f64>,
        bare: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        let values: Vec<f64> = radii.iter().map(|&r| bare(r) + centrifugal(ell, r)).collect();
        let mut curve =
            Self { ell, radii, values, inner_minimum: None, barrier: None, outer_minimum: None, wall, bare };
        curve.detect(&[])?;
        Ok(curve)
    }

    fn detect(&mut self, knots: &[f64]) -> Result<()> {
        let n = self.values.len();
        if n < 3 {
            return Ok(());
        }
        let near_knot = |i: usize| {
            let lo = self.radii[i.saturating_sub(1)];
            let hi = self.radii[(i + 1).min(n - 1)];
            knots.iter().any(|&a| a >= lo && a <= hi) || (self.wall.is_some() && i <= 1)
        };
        // extrema at sign changes of the discrete derivative
        let mut extrema: Vec<(usize, bool)> = Vec::new(); // (index, is_max)
        let mut last_sign = 0.0;
        // a hard wall followed by a descent is a barrier top
        if self.wall.is_some() {
            if let Some(d) = self.values.windows(2).map(|w| w[1] - w[0]).find(|d| *d != 0.0) {
                if d < 0.0 {
                    extrema.push((0, true));
                }
            }
        }
        for i in 0..n - 1 {
            let d = self.values[i + 1] - self.values[i];
            let s = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            if s != 0.0 {
                if last_sign != 0.0 && s != last_sign {
                    extrema.push((i, last_sign > 0.0));
                }
                last_sign = s;
            }
        }
        for w in extrema.windows(2) {
            let (i, j) = (w[0].0, w[1].0);
            if j - i < 3 && !near_knot(i) && !near_knot(j) {
                return Err(Error::GridTooCoarse { first: self.radii[i], second: self.radii[j] });
            }
        }
        let refined: Vec<(usize, bool, Feature)> = extrema
            .iter()
            .map(|&(i, is_max)| {
                let sample = Feature { r: self.radii[i], value: self.values[i] };
                if i == 0 || i + 1 >= n || near_knot(i) {
                    return (i, is_max, sample);
                }
                let (x0, x1, x2) = (self.radii[i - 1], self.radii[i], self.radii[i + 1]);
                let (y0, y1, y2) = (self.values[i - 1], self.values[i], self.values[i + 1]);
                let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
                let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
                if den == 0.0 {
                    return (i, is_max, sample);
                }
                let r = (x1 - 0.5 * num / den).clamp(x0, x2);
                let v = self.eval(r);
                let better = if is_max { v >= y1 } else { v <= y1 };
                (i, is_max, if better { Feature { r, value: v } } else { sample })
            })
            .collect();

        let barrier = refined.iter().filter(|e| e.1).max_by(|a, b| a.2.value.total_cmp(&b.2.value)).copied();
        let lowest = |it: &mut dyn Iterator<Item = &(usize, bool, Feature)>| {
            it.filter(|e| !e.1).min_by(|a, b| a.2.value.total_cmp(&b.2.value)).map(|e| e.2)
        };
        match barrier {
            Some((ib, _, fb)) => {
                self.barrier = Some(fb);
                self.inner_minimum = lowest(&mut refined.iter().filter(|e| e.0 < ib));
                self.outer_minimum = lowest(&mut refined.iter().filter(|e| e.0 > ib));
            }
            None => {
                self.inner_minimum = lowest(&mut refined.iter());
            }
        }
        Ok(())
    }
}

/// Sample V_eff on the grid's mesh and locate its features.
pub fn effective_curve(spec: &PotentialSpec, ell: u32, grid: &RadialGrid) -> Result<EffectiveCurve> {
    let knot = spec.knot().map(|k| k.0);
    let mesh = grid.mesh(spec.wall(), knot, f64::INFINITY, 0);
    let s = spec.clone();
    let bare: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |r| s.value(r));
    let values: Vec<f64> = mesh.r.iter().map(|&r| spec.effective(ell, r)).collect();
    let mut curve = EffectiveCurve {
        ell,
        radii: mesh.r,
        values,
        inner_minimum: None,
        barrier: None,
        outer_minimum: None,
        wall: spec.wall(),
        bare,
    };
    curve.detect(&knot.into_iter().collect::<Vec<_>>())?;
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_values() {
        let w = PotentialSpec::square_well(1.0, 1.0).unwrap();
        assert_eq!(w.eval(0.5).unwrap(), PotentialValue::Finite(-1.0));
        assert_eq!(PotentialSpec::zero().eval(3.7).unwrap(), PotentialValue::Finite(0.0));
        let y = PotentialSpec::yukawa(2.0, 1.0).unwrap();
        let v = y.eval(1.0).unwrap().finite().unwrap();
        assert!((v + 0.7357588823428847).abs() < 1e-15);
        let h = PotentialSpec::hard_sphere(1.0).unwrap();
        assert_eq!(h.eval(0.5).unwrap(), PotentialValue::Infinite);
        assert_eq!(h.eval(1.5).unwrap(), PotentialValue::Finite(0.0));
        assert!(w.eval(0.0).is_err());
        assert!(PotentialSpec::square_well(-1.0, 1.0).is_err());
    }

    #[test]
    fn yukawa_range_meets_contract() {
        let y = PotentialSpec::yukawa(10.0, 1.0).unwrap();
        let r = y.range_radius();
        let v = y.eval(r).unwrap().finite().unwrap();
        assert!((v.abs() * r * r / RANGE_EPSILON - 1.0).abs() < 1e-6);
    }

    #[test]
    fn table_parse_and_interpolation() {
        let text = "# r V\n0.5 -2.0\n1.0 -1.0\n1.5 -0.2  # comment\n2.0 0\n3.0 0\n4.0 0\n";
        let t = Table::parse(text).unwrap();
        let p = PotentialSpec::tabulated(t).unwrap();
        assert_eq!(p.eval(1.0).unwrap(), PotentialValue::Finite(-1.0));
        assert_eq!(p.eval(5.0).unwrap(), PotentialValue::Finite(0.0));
        assert!(matches!(p.eval(0.1), Err(Error::BelowTable { .. })));
        // monotone data gives a monotone interpolant
        let mut prev = -2.0;
        for i in 0..=150 {
            let v = p.eval(0.5 + 0.01 * i as f64).unwrap().finite().unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!(Table::parse("1 2 3\n").is_err());
        let long = Table::new(vec![1.0, 2.0, 3.0], vec![-1.0, -1.0, -1.0]).unwrap();
        assert!(matches!(PotentialSpec::tabulated(long), Err(Error::LongRangeTail { .. })));
    }

    #[test]
    fn turning_point() {
        assert!((classical_turning_point(0, 0.125).unwrap() - 1.0).abs() < 1e-15);
        assert!((classical_turning_point(2, 0.5).unwrap() - 2.5).abs() < 1e-15);
        let a = classical_turning_point(1, 0.3).unwrap();
        let b = classical_turning_point(1, 1.2).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
        assert!(classical_turning_point(1, 0.0).is_err());
    }

    #[test]
    fn zero_potential_has_no_features() {
        let g = RadialGrid::log_uniform(30.0, 2000).unwrap();
        let c = effective_curve(&PotentialSpec::zero(), 2, &g).unwrap();
        assert!(c.inner_minimum.is_none() && c.barrier.is_none());
        assert!(c.values.windows(2).all(|w| w[1] < w[0]));
        assert!((c.values[100] - 3.0 / c.radii[100].powi(2)).abs() < 1e-12 * c.values[100]);
    }

    #[test]
    fn square_well_s_wave_has_no_barrier() {
        let g = RadialGrid::log_uniform(10.0, 2000).unwrap();
        let c = effective_curve(&PotentialSpec::square_well(5.0, 1.0).unwrap(), 0, &g).unwrap();
        assert!(c.barrier.is_none());
        assert!(c.values.iter().all(|&v| v <= 0.0));
    }

    #[test]
    fn two_valley_yukawa() {
        let g = RadialGrid::log_uniform(30.0, 4000).unwrap();
        let c = effective_curve(&PotentialSpec::yukawa(30.0, 1.0).unwrap(), 3, &g).unwrap();
        let inner = c.inner_minimum.unwrap();
        let b = c.barrier.unwrap();
        assert!(inner.r < b.r && inner.value < 0.0 && b.value > 0.0);
        // refinement never undercuts the adjacent samples
        let i = c.radii.partition_point(|&r| r < b.r);
        assert!(b.value >= c.values[i - 1] && b.value >= c.values[i]);
    }
}
