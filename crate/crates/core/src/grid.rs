//! Radial grids and their realization as Numerov meshes.
//!
//! Integration always runs on a uniform grid in an auxiliary coordinate x
//! with r = g(x). For `Uniform`, g is the identity. For `LogThenUniform`,
//! x = r + β·ln r (β = r_switch), which is logarithmic for r ≪ β and uniform
//! for r ≫ β. Under the Liouville substitution u = √g'·w the radial equation
//! keeps the Numerov form w'' = [g'²·f(r) + S(x)]·w with
//! S = 3g''²/(4g'²) − g'''/(2g').

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default crossover radius between the logarithmic and uniform regions.
pub const DEFAULT_R_SWITCH: f64 = 0.1;

/// Innermost radius of a logarithmic grid, relative to r_switch.
const LOG_START_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridScheme {
    Uniform,
    LogThenUniform { r_switch: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_points: usize,
    pub scheme: GridScheme,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_points: usize, scheme: GridScheme) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid { reason: format!("r_max must be positive, got {r_max}") });
        }
        if n_points < 64 {
            return Err(Error::InvalidGrid { reason: format!("n_points must be >= 64, got {n_points}") });
        }
        if let GridScheme::LogThenUniform { r_switch } = scheme {
            if !(r_switch > 0.0 && r_switch < r_max) {
                return Err(Error::InvalidGrid { reason: format!("r_switch must lie in (0, r_max), got {r_switch}") });
            }
        }
        Ok(Self { r_max, n_points, scheme })
    }

    /// Log-then-uniform grid with the default crossover radius.
    pub fn log_uniform(r_max: f64, n_points: usize) -> Result<Self> {
        Self::new(r_max, n_points, GridScheme::LogThenUniform { r_switch: DEFAULT_R_SWITCH })
    }

    pub fn uniform(r_max: f64, n_points: usize) -> Result<Self> {
        Self::new(r_max, n_points, GridScheme::Uniform)
    }

    /// Log-then-uniform grid whose asymptotic spacing is about `step`.
    pub fn with_step(r_max: f64, step: f64) -> Result<Self> {
        Self::log_with_step(r_max, step, DEFAULT_R_SWITCH)
    }

    pub fn log_with_step(r_max: f64, step: f64, r_switch: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidGrid { reason: format!("step must be positive, got {step}") });
        }
        let beta = r_switch;
        let span = r_max + beta * (r_max / (beta * LOG_START_FRACTION)).ln();
        let n = (span / step).ceil() as usize + 1;
        Self::new(r_max, n.max(64), GridScheme::LogThenUniform { r_switch })
    }

    /// Same spacing in x, extended so that r_max ≥ `r_needed`; nodes shared
    /// with `self` coincide.
    pub fn extended(&self, r_needed: f64) -> Self {
        if r_needed <= self.r_max {
            return *self;
        }
        match self.scheme {
            GridScheme::Uniform => {
                let h = self.r_max / self.n_points as f64;
                let extra = ((r_needed - self.r_max) / h).ceil() as usize;
                let n = self.n_points + extra;
                Self { r_max: h * n as f64, n_points: n, scheme: self.scheme }
            }
            GridScheme::LogThenUniform { r_switch } => {
                let x0 = map_x(r_switch * LOG_START_FRACTION, r_switch);
                let h = self.asymptotic_step();
                let extra = ((map_x(r_needed, r_switch) - map_x(self.r_max, r_switch)) / h).ceil() as usize;
                let n = self.n_points + extra;
                let x_end = x0 + h * (n - 1) as f64;
                let r_max = invert_x(x_end, r_switch, r_needed);
                Self { r_max, n_points: n, scheme: self.scheme }
            }
        }
    }

    /// Asymptotic spacing in r.
    pub fn asymptotic_step(&self) -> f64 {
        match self.scheme {
            GridScheme::Uniform => self.r_max / self.n_points as f64,
            GridScheme::LogThenUniform { r_switch } => {
                let x0 = map_x(r_switch * LOG_START_FRACTION, r_switch);
                (map_x(self.r_max, r_switch) - x0) / (self.n_points - 1) as f64
            }
        }
    }

    /// Realize the grid as a mesh starting at the origin or at a hard wall,
    /// with `knot` (if any) placed exactly on a node, stopping at the first
    /// node beyond `r_limit` plus `extra` further nodes (or at the grid end).
    pub(crate) fn mesh(&self, wall: Option<f64>, knot: Option<f64>, r_limit: f64, extra: usize) -> Mesh {
        let beta = match self.scheme {
            GridScheme::Uniform => None,
            GridScheme::LogThenUniform { r_switch } => Some(r_switch),
        };
        let to_x = |r: f64| match beta {
            None => r,
            Some(b) => map_x(r, b),
        };
        // node 0 sits at `base`; for a uniform grid from the origin node 0 is
        // the origin itself and is skipped
        let (base, r_base, skip) = match (wall, beta) {
            (Some(a), _) => (to_x(a), a, 0usize),
            (None, None) => (0.0, 0.0, 1usize),
            (None, Some(b)) => {
                let r0 = b * LOG_START_FRACTION;
                (map_x(r0, b), r0, 0usize)
            }
        };
        let x_end = to_x(self.r_max);
        let mut h = (x_end - base) / (self.n_points - 1 + skip) as f64;
        let mut knot_node = None;
        if let Some(a) = knot {
            if a > r_base {
                let xa = to_x(a);
                let m = ((xa - base) / h).round().max(4.0);
                h = (xa - base) / m;
                knot_node = Some(m as usize);
            }
        }
        let n_total = ((x_end - base) / h - 1e-9).ceil() as usize + 1;

        let n_cap = if r_limit.is_finite() {
            (((to_x(r_limit.min(self.r_max)) - base) / h).max(0.0) as usize + extra + 2).min(n_total)
        } else {
            n_total
        };
        let mut r = Vec::with_capacity(n_cap);
        let mut gp = Vec::with_capacity(r.capacity());
        let mut gpp = Vec::with_capacity(r.capacity());
        let mut s = Vec::with_capacity(r.capacity());
        let mut prev_r = r_base;
        let mut past_limit = 0usize;
        for i in skip..n_total {
            let x = base + h * i as f64;
            let ri = if i == 0 {
                r_base
            } else if Some(i) == knot_node {
                knot.unwrap()
            } else {
                match beta {
                    None => x,
                    Some(b) => invert_x(x, b, prev_r),
                }
            };
            prev_r = ri;
            match beta {
                None => {
                    gp.push(1.0);
                    gpp.push(0.0);
                    s.push(0.0);
                }
                Some(b) => {
                    let rb = ri + b;
                    let g1 = ri / rb;
                    gp.push(g1);
                    gpp.push(g1 * b / (rb * rb));
                    s.push((b * b + 4.0 * b * ri) / (4.0 * rb.powi(4)));
                }
            }
            r.push(ri);
            if ri >= r_limit {
                past_limit += 1;
                if past_limit > extra {
                    break;
                }
            }
        }
        Mesh { h, r, gp, gpp, s, knot_index: knot_node.map(|k| k - skip), wall: wall.is_some() }
    }
}

fn map_x(r: f64, beta: f64) -> f64 {
    r + beta * r.ln()
}

/// Solve r + β ln r = x by Newton's method from a nearby starting radius.
fn invert_x(x: f64, beta: f64, guess: f64) -> f64 {
    let mut r = guess.max(1e-300);
    for _ in 0..60 {
        let f = r + beta * r.ln() - x;
        let step = f / (1.0 + beta / r);
        let mut next = r - step;
        if next <= 0.0 {
            next = 0.5 * r;
        }
        if (next - r).abs() <= 1e-15 * r {
            return next;
        }
        r = next;
    }
    r
}

/// Concrete nodes of a realized grid.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// uniform spacing in the auxiliary coordinate
    pub h: f64,
    pub r: Vec<f64>,
    /// dr/dx
    pub gp: Vec<f64>,
    /// d²r/dx²
    pub gpp: Vec<f64>,
    /// Liouville correction term
    pub s: Vec<f64>,
    /// node sitting exactly on a potential discontinuity
    pub knot_index: Option<usize>,
    /// node 0 is a hard wall where u = 0
    pub wall: bool,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// ∫ f(r) dr over the mesh by composite Simpson in x (trapezoid on a
    /// trailing odd interval).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let n = f.len().min(self.len());
        if n < 2 {
            return 0.0;
        }
        let w: Vec<f64> = (0..n).map(|i| f[i] * self.gp[i]).collect();
        let mut sum = 0.0;
        let pairs = (n - 1) / 2;
        for p in 0..pairs {
            let i = 2 * p;
            sum += w[i] + 4.0 * w[i + 1] + w[i + 2];
        }
        sum *= self.h / 3.0;
        if (n - 1) % 2 == 1 {
            sum += 0.5 * self.h * (w[n - 2] + w[n - 1]);
        }
        sum
    }

    /// Index of the first node with r ≥ target.
    pub fn index_at_or_after(&self, target: f64) -> Option<usize> {
        let i = self.r.partition_point(|&r| r < target);
        (i < self.len()).then_some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(RadialGrid::log_uniform(10.0, 10).is_err());
        assert!(RadialGrid::log_uniform(-1.0, 100).is_err());
        assert!(RadialGrid::new(1.0, 100, GridScheme::LogThenUniform { r_switch: 2.0 }).is_err());
    }

    #[test]
    fn mesh_is_increasing_and_hits_knot() {
        let g = RadialGrid::log_uniform(20.0, 4000).unwrap();
        let m = g.mesh(None, Some(1.0), f64::INFINITY, 0);
        assert!(m.r.windows(2).all(|w| w[1] > w[0]));
        assert!(m.r[0] > 0.0);
        assert_eq!(m.r[m.knot_index.unwrap()], 1.0);
        assert!(*m.r.last().unwrap() >= 20.0 - 1e-9);
        // log region spacing is proportional to r
        let ratio0 = (m.r[1] - m.r[0]) / m.r[0];
        let ratio1 = (m.r[11] - m.r[10]) / m.r[10];
        assert!((ratio0 / ratio1 - 1.0).abs() < 0.01);
    }

    #[test]
    fn uniform_mesh_from_origin_and_wall() {
        let g = RadialGrid::uniform(10.0, 1000).unwrap();
        let m = g.mesh(None, None, f64::INFINITY, 0);
        assert!((m.r[0] - 0.01).abs() < 1e-15);
        assert_eq!(m.len(), 1000);
        let w = g.mesh(Some(1.0), None, f64::INFINITY, 0);
        assert_eq!(w.r[0], 1.0);
        assert!(w.wall);
    }

    #[test]
    fn extension_preserves_nodes() {
        let g = RadialGrid::with_step(12.0, 0.01).unwrap();
        let e = g.extended(40.0);
        assert!(e.r_max >= 40.0);
        let a = g.mesh(None, None, f64::INFINITY, 0);
        let b = e.mesh(None, None, f64::INFINITY, 0);
        for i in 0..a.len() {
            assert!((a.r[i] - b.r[i]).abs() <= 1e-12 * a.r[i]);
        }
    }

    #[test]
    fn mesh_truncation() {
        let g = RadialGrid::log_uniform(100.0, 20000).unwrap();
        let m = g.mesh(None, None, 5.0, 4);
        let i = m.index_at_or_after(5.0).unwrap();
        assert_eq!(m.len(), i + 5);
    }

    #[test]
    fn simpson_on_mapped_grid() {
        let g = RadialGrid::log_uniform(30.0, 6000).unwrap();
        let m = g.mesh(None, None, f64::INFINITY, 0);
        let f: Vec<f64> = m.r.iter().map(|r| r * r * (-r).exp()).collect();
        let exact = 2.0; // ∫ r² e^{−r}, tail beyond 30 is ~1e-10
        assert!((m.integrate(&f) - exact).abs() < 1e-8);
    }
}
