//! Potential theory in the upper half-plane `ℍ`.
//!
//! Points in the lower half-plane are handled by conjugating at the call
//! site ([`HalfPlaneVariety::from_lower`]), never by duplicated code.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conditions::{classify_trend, Thresholds, TrendFit};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadSpec};
use crate::sum::CompensatedSum;
use crate::variety::{Variety, WeightedPoint, P_MIN};
use crate::weights::BeurlingWeight;

fn require_upper(z: Complex64, what: &str) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} {z} is not in the upper half-plane")))
    }
}

/// `ρ(z, w) = |z − w| / |z − w̄|`.
pub fn pseudo_distance(z: Complex64, w: Complex64) -> Result<f64> {
    require_upper(z, "point")?;
    require_upper(w, "point")?;
    Ok(rho(z, w))
}

#[inline]
fn rho(z: Complex64, w: Complex64) -> f64 {
    (z - w).norm() / (z - w.conj()).norm()
}

/// Poisson kernel `|Im λ| / |x − λ|²` (unnormalized: total mass π).
pub fn poisson_kernel(lam: Complex64, x: f64) -> Result<f64> {
    require_upper(lam, "pole")?;
    let d = Complex64::new(x, 0.0) - lam;
    Ok(lam.im / d.norm_sqr())
}

/// Green function `log(1/ρ(λ, z))`.
pub fn green_function(lam: Complex64, z: Complex64) -> Result<f64> {
    let r = pseudo_distance(lam, z)?;
    if r == 0.0 {
        return Err(Error::domain(format!("Green function evaluated at its pole {lam}")));
    }
    Ok(-r.ln())
}

/// Points of `Λ ∩ ℍ`.
#[derive(Debug, Clone)]
pub struct HalfPlaneVariety {
    points: Vec<WeightedPoint>,
    window_radius: f64,
}

impl HalfPlaneVariety {
    pub fn new(points: Vec<WeightedPoint>, window_radius: f64) -> Result<Self> {
        let v = Variety::new(points, window_radius)?;
        Self::from_upper(&v)
    }

    /// Requires every point of `v` to lie in `ℍ`.
    pub fn from_upper(v: &Variety) -> Result<Self> {
        if let Some(p) = v.points().iter().find(|p| !(p.lambda.im > 0.0)) {
            return Err(Error::domain(format!("point {} is not in the upper half-plane", p.lambda)));
        }
        Ok(Self { points: v.points().to_vec(), window_radius: v.window_radius() })
    }

    /// Reflects a lower-half-plane variety into `ℍ`.
    pub fn from_lower(v: &Variety) -> Result<Self> {
        Self::from_upper(&v.conjugate())
    }

    /// The part of `v` above the horizontal line `Im z = level`, shifted down by `level`.
    pub fn above_line(v: &Variety, level: f64) -> Result<Self> {
        let shift = Complex64::new(0.0, level);
        let pts = v
            .points()
            .iter()
            .filter(|p| p.lambda.im > level)
            .map(|p| WeightedPoint::new(p.lambda - shift, p.mult))
            .collect();
        Self::new(pts, v.window_radius() + level.abs())
    }

    pub fn points(&self) -> &[WeightedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    fn find(&self, lam: Complex64) -> Option<usize> {
        self.points.iter().position(|p| p.lambda == lam)
    }
}

/// `log |B(z)|`, or the zero sentinel when `z` is a point of the variety.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogModulus {
    Finite { value: f64 },
    Zero { multiplicity: u32 },
}

impl LogModulus {
    pub fn finite(self) -> Option<f64> {
        match self {
            LogModulus::Finite { value } => Some(value),
            LogModulus::Zero { .. } => None,
        }
    }
}

pub fn log_blaschke_abs(hv: &HalfPlaneVariety, z: Complex64) -> Result<LogModulus> {
    require_upper(z, "evaluation point")?;
    let mut s = CompensatedSum::new();
    for p in &hv.points {
        let r = rho(z, p.lambda);
        if r == 0.0 {
            return Ok(LogModulus::Zero { multiplicity: p.mult });
        }
        s.add(p.mult as f64 * r.ln());
    }
    Ok(LogModulus::Finite { value: s.value() })
}

/// `S(λ) = Σ_{λ' ≠ λ} m_{λ'} log(1/ρ(λ, λ'))`.
pub fn blaschke_log_sum(hv: &HalfPlaneVariety, lam: Complex64) -> Result<f64> {
    let k = hv
        .find(lam)
        .ok_or_else(|| Error::domain(format!("{lam} is not a point of the variety")))?;
    Ok(bu_sum_at(hv, k))
}

fn bu_sum_at(hv: &HalfPlaneVariety, k: usize) -> f64 {
    let lam = hv.points[k].lambda;
    let mut s = CompensatedSum::new();
    for (j, p) in hv.points.iter().enumerate() {
        if j != k {
            s.add(-(p.mult as f64) * rho(lam, p.lambda).ln());
        }
    }
    s.value()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuWitness {
    pub lambda: Complex64,
    pub sum: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuNecessityReport {
    pub radii: Vec<f64>,
    /// Per radius, `max S(λ)/p(λ)` over `|λ| ≤ R`.
    pub constants: Vec<f64>,
    pub witnesses: Vec<Option<BuWitness>>,
    pub fit: TrendFit,
}

pub fn bu_necessity_report(
    hv: &HalfPlaneVariety,
    w: &BeurlingWeight,
    radii: &[f64],
    th: &Thresholds,
) -> Result<BuNecessityReport> {
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::input("radii must be positive, finite and strictly increasing"));
    }
    let r_max = *radii.last().unwrap();
    let mut rows = Vec::new();
    for (k, p) in hv.points.iter().enumerate() {
        if p.lambda.norm() <= r_max {
            let s = bu_sum_at(hv, k);
            let pl = w.p(p.lambda)?.max(P_MIN);
            rows.push(BuWitness { lambda: p.lambda, sum: s, ratio: s / pl });
        }
    }
    // points are ordered by modulus, so each radius extends the previous prefix
    let mut constants = Vec::new();
    let mut witnesses = Vec::new();
    let mut best: Option<BuWitness> = None;
    let mut i = 0;
    for &r in radii {
        while i < rows.len() && rows[i].lambda.norm() <= r {
            if best.as_ref().map_or(true, |b| rows[i].ratio > b.ratio) {
                best = Some(rows[i].clone());
            }
            i += 1;
        }
        constants.push(best.as_ref().map_or(0.0, |b| b.ratio.max(0.0)));
        witnesses.push(best.clone());
    }
    let fit = classify_trend(radii, &constants, th)?;
    Ok(BuNecessityReport { radii: radii.to_vec(), constants, witnesses, fit })
}

/// Closed pseudohyperbolic disk `{w : ρ(z, w) ≤ t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl HypDisk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        require_upper(center, "disk center")?;
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::domain(format!("pseudohyperbolic radius {radius} outside (0, 1)")));
        }
        Ok(Self { center, radius })
    }

    pub fn euclidean_center(&self) -> Complex64 {
        let t2 = self.radius * self.radius;
        Complex64::new(self.center.re, (1.0 + t2) / (1.0 - t2) * self.center.im)
    }

    pub fn euclidean_radius(&self) -> f64 {
        2.0 * self.radius / (1.0 - self.radius * self.radius) * self.center.im
    }

    pub fn contains(&self, w: Complex64) -> bool {
        w.im > 0.0 && rho(self.center, w) <= self.radius
    }
}

/// `n_ℍ(z, t)`: multiplicity inside the closed disk of pseudohyperbolic radius `t`.
pub fn hyperbolic_counting(hv: &HalfPlaneVariety, z: Complex64, t: f64) -> Result<u64> {
    let disk = HypDisk::new(z, t)?;
    Ok(hv
        .points
        .iter()
        .filter(|p| disk.contains(p.lambda))
        .map(|p| p.mult as u64)
        .sum())
}

/// `∫₀¹ n_ℍ(z,t)/t dt`, evaluated in closed form as `Σ m log(1/ρ)`.
pub fn hyperbolic_jensen(hv: &HalfPlaneVariety, z: Complex64) -> Result<f64> {
    match log_blaschke_abs(hv, z)? {
        LogModulus::Finite { value } => Ok(-value),
        LogModulus::Zero { .. } => Err(Error::domain(format!("{z} is a point of the variety"))),
    }
}

/// Direct quadrature of `∫₀¹ n_ℍ(z,t)/t dt` with breakpoints at each `ρ(z, λ)`.
pub fn hyperbolic_jensen_quadrature(hv: &HalfPlaneVariety, z: Complex64, quad: &QuadSpec) -> Result<f64> {
    require_upper(z, "evaluation point")?;
    let mut rhos: Vec<(f64, u32)> = hv.points.iter().map(|p| (rho(z, p.lambda), p.mult)).collect();
    if rhos.iter().any(|r| r.0 == 0.0) {
        return Err(Error::domain(format!("{z} is a point of the variety")));
    }
    if rhos.is_empty() {
        return Ok(0.0);
    }
    rhos.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = rhos[0].0;
    if lo >= 1.0 {
        return Ok(0.0);
    }
    let breaks: Vec<f64> = rhos.iter().map(|r| r.0).collect();
    let count = |t: f64| -> f64 {
        let k = rhos.partition_point(|r| r.0 <= t);
        rhos[..k].iter().map(|r| r.1 as f64).sum()
    };
    Ok(integrate(|t| count(t) / t, lo, 1.0, &breaks, quad)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// Worst `−log|B(z)| / p(z)` over the samples.
    pub worst_constant: f64,
    pub witness: Option<Complex64>,
    pub samples: usize,
}

pub fn blaschke_lower_bound_check(
    hv: &HalfPlaneVariety,
    w: &BeurlingWeight,
    samples: &[Complex64],
) -> Result<LowerBoundReport> {
    let mut rep = LowerBoundReport { worst_constant: 0.0, witness: None, samples: samples.len() };
    for &z in samples {
        let val = hyperbolic_jensen(hv, z)?;
        let c = val / w.p(z)?.max(P_MIN);
        if rep.witness.is_none() || c > rep.worst_constant {
            rep.worst_constant = c;
            rep.witness = Some(z);
        }
    }
    Ok(rep)
}
