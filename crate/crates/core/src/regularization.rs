//! A subharmonic weight equivalent to `p`, built from explicit measures.
//!
//! The real axis is tiled by intervals `I_n` of length `ω_n = ω(|x_n|)`.
//! Each interval carries two measures of mass `ω_n`: arc length on `I_n`,
//! and its sweep by disks `D(x, 10ω_n)`, `x ∈ I_n`. Their log-potential
//! difference `r = Σ r_n` is nonnegative, vanishes off the disks, and
//! `p̃ = |Im z| + r` is comparable to `p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadSpec};
use crate::sum::CompensatedSum;
use crate::weights::{BeurlingWeight, GrowthWeight};

/// Intervals start where `ω` first reaches this value.
pub const OMEGA_FLOOR: f64 = 1e-3;
/// Disk radius in units of the interval length.
pub const SWEEP_FACTOR: f64 = 10.0;

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_ITERS: usize = 200;
const MAX_INTERVALS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub omega: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    fn sweep_radius(&self) -> f64 {
        SWEEP_FACTOR * self.omega
    }

    /// `[a, b] = {x ∈ I : |z − x| < R}`, if nonempty.
    fn clip(&self, z: Complex64) -> Option<(f64, f64)> {
        let r = self.sweep_radius();
        let y = z.im.abs();
        if y >= r {
            return None;
        }
        let s = ((r - y) * (r + y)).sqrt();
        let a = self.lo.max(z.re - s);
        let b = self.hi.min(z.re + s);
        (a < b).then_some((a, b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalPartition {
    /// Sorted left to right; the negative half mirrors the positive one.
    intervals: Vec<Interval>,
    range: f64,
    start: f64,
    max_omega: f64,
}

fn solve_center(w: &BeurlingWeight, t: f64) -> Result<f64> {
    // x = t + ω(x)/2 by plain iteration first
    let mut x = t + 0.5 * w.omega(t)?;
    for _ in 0..FIXED_POINT_ITERS {
        let next = t + 0.5 * w.omega(x)?;
        if (next - x).abs() <= FIXED_POINT_TOL * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    // Steep ω near the floor makes the map expansive; fall back to bisection
    // on g(x) = x − t − ω(x)/2, which is negative at t and positive far out.
    let g = |x: f64| -> Result<f64> { Ok(x - t - 0.5 * w.omega(x)?) };
    let mut lo = t;
    let mut step = w.omega(t)?.max(OMEGA_FLOOR);
    let mut hi = t + step;
    let mut doublings = 0;
    while g(hi)? < 0.0 {
        lo = hi;
        step *= 2.0;
        hi = t + step;
        doublings += 1;
        if doublings > FIXED_POINT_ITERS {
            return Err(Error::Construction(format!("interval center did not converge from t = {t}")));
        }
    }
    while hi - lo > FIXED_POINT_TOL * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn first_start(w: &BeurlingWeight, range: f64) -> Result<f64> {
    if w.omega(0.0)? >= OMEGA_FLOOR {
        return Ok(0.0);
    }
    let mut hi = OMEGA_FLOOR;
    while w.omega(hi)? < OMEGA_FLOOR {
        hi *= 2.0;
        if hi > range {
            return Err(Error::Construction(format!("ω stays below {OMEGA_FLOOR} on [0, {range}]")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if w.omega(mid)? >= OMEGA_FLOOR {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

impl IntervalPartition {
    /// Tiles `[−T, T]` outside the small gap where `ω` is below [`OMEGA_FLOOR`].
    pub fn build(w: &BeurlingWeight, range: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::input(format!("partition range {range} must be positive")));
        }
        let start = first_start(w, range)?;
        let mut right = Vec::new();
        let mut t = start;
        while t < range {
            let x = solve_center(w, t)?;
            let om = w.omega(x)?;
            if !(om > 0.0) {
                return Err(Error::Construction(format!("zero interval length at t = {t}")));
            }
            right.push(Interval { center: x, omega: om, lo: t, hi: t + om });
            t += om;
            if right.len() > MAX_INTERVALS {
                return Err(Error::Construction(format!("more than {MAX_INTERVALS} intervals up to {range}")));
            }
        }
        let mut intervals: Vec<Interval> = right
            .iter()
            .rev()
            .map(|i| Interval { center: -i.center, omega: i.omega, lo: -i.hi, hi: -i.lo })
            .collect();
        intervals.extend_from_slice(&right);
        let max_omega = right.iter().map(|i| i.omega).fold(0.0, f64::max);
        Ok(Self { intervals, range, start, max_omega })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    /// First left endpoint on the positive axis.
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn max_omega(&self) -> f64 {
        self.max_omega
    }

    /// `r` is only trusted for `|Re z|` up to this value.
    pub fn reliable_limit(&self) -> f64 {
        self.range - SWEEP_FACTOR * self.max_omega
    }

    /// Largest gap or overlap between neighbours, and largest offset between
    /// an interval's midpoint and its center.
    pub fn tiling_defect(&self) -> (f64, f64) {
        let n = self.intervals.len() / 2;
        let right = &self.intervals[n..];
        let gap = right.windows(2).map(|p| (p[1].lo - p[0].hi).abs()).fold(0.0, f64::max);
        let mid = right
            .iter()
            .map(|i| (0.5 * (i.lo + i.hi) - i.center).abs())
            .fold(0.0, f64::max);
        (gap, mid)
    }

    /// Indices of intervals whose disk sweep can reach `z`.
    pub fn candidates(&self, z: Complex64) -> impl Iterator<Item = usize> + '_ {
        let reach = (SWEEP_FACTOR + 0.5) * self.max_omega * (1.0 + 1e-12);
        let a = self.intervals.partition_point(|i| i.hi < z.re - reach);
        let b = self.intervals.partition_point(|i| i.lo <= z.re + reach);
        (a..b.max(a)).filter(move |&k| {
            let i = &self.intervals[k];
            (z - Complex64::new(i.center, 0.0)).norm() <= (SWEEP_FACTOR + 0.5) * i.omega * (1.0 + 1e-12)
        })
    }
}

pub fn build_partition(w: &BeurlingWeight, range: f64) -> Result<IntervalPartition> {
    IntervalPartition::build(w, range)
}

/// Mean of `log|z − w|` over `w` in the disk `D(a, R)`.
pub fn circular_mean_log(z: Complex64, a: Complex64, radius: f64) -> f64 {
    let d2 = (z - a).norm_sqr();
    if d2 >= radius * radius {
        0.5 * d2.ln()
    } else {
        radius.ln() - 0.5 + d2 / (2.0 * radius * radius)
    }
}

#[inline]
fn kernel_inside(d2: f64, radius: f64) -> f64 {
    radius.ln() - 0.5 + d2 / (2.0 * radius * radius) - 0.5 * d2.ln()
}

/// Disk mean of `log|z − ·|` over `D(x, R)` minus `log|z − x|`.
/// Zero off the disk; `+∞` at `z = x`.
pub fn m_kernel(z: Complex64, x: f64, radius: f64) -> f64 {
    let d2 = (z - Complex64::new(x, 0.0)).norm_sqr();
    if d2 >= radius * radius {
        0.0
    } else if d2 == 0.0 {
        f64::INFINITY
    } else {
        kernel_inside(d2, radius)
    }
}

/// `|Im z| + r(z)` on top of a base weight.
#[derive(Debug, Clone)]
pub struct RegularizedWeight {
    base: BeurlingWeight,
    partition: IntervalPartition,
    quad: QuadSpec,
}

impl RegularizedWeight {
    /// `quad.abs_tol` is taken relative to each interval's length.
    pub fn new(base: BeurlingWeight, range: f64, quad: QuadSpec) -> Result<Self> {
        let partition = IntervalPartition::build(&base, range)?;
        Ok(Self { base, partition, quad })
    }

    pub fn base(&self) -> &BeurlingWeight {
        &self.base
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    pub fn quad(&self) -> &QuadSpec {
        &self.quad
    }

    pub fn with_quad(mut self, quad: QuadSpec) -> Self {
        self.quad = quad;
        self
    }

    fn check_reliable(&self, z: Complex64) -> Result<()> {
        let lim = self.partition.reliable_limit();
        if z.re.abs() > lim || !z.im.is_finite() {
            return Err(Error::domain(format!("{z} outside the reliable region |Re z| ≤ {lim}")));
        }
        Ok(())
    }

    /// Contribution `r_n(z)` of a single interval.
    pub fn r_interval(&self, k: usize, z: Complex64) -> Result<f64> {
        let iv = self.partition.intervals.get(k).ok_or_else(|| Error::input(format!("no interval {k}")))?;
        let Some((a, b)) = iv.clip(z) else { return Ok(0.0) };
        let radius = iv.sweep_radius();
        let (u, y2) = (z.re, z.im * z.im);
        let spec = self.quad.with_abs_tol(self.quad.abs_tol * iv.omega);
        let f = |x: f64| kernel_inside((x - u) * (x - u) + y2, radius);
        integrate(f, a, b, &[u], &spec).map(|r| r.value).map_err(|e| match e {
            Error::Quadrature { context, estimate, abs_err, intervals } => Error::Quadrature {
                context: format!("interval {k} {context}"),
                estimate,
                abs_err,
                intervals,
            },
            other => other,
        })
    }

    pub fn r(&self, z: Complex64) -> Result<f64> {
        self.check_reliable(z)?;
        let mut s = CompensatedSum::new();
        for k in self.partition.candidates(z) {
            s.add(self.r_interval(k, z)?);
        }
        Ok(s.value())
    }

    pub fn tilde_p(&self, z: Complex64) -> Result<f64> {
        Ok(z.im.abs() + self.r(z)?)
    }
}

impl GrowthWeight for RegularizedWeight {
    fn eval(&self, z: Complex64) -> Result<f64> {
        self.tilde_p(z)
    }
}

pub fn r_correction(rw: &RegularizedWeight, z: Complex64) -> Result<f64> {
    rw.r(z)
}

pub fn tilde_p(rw: &RegularizedWeight, z: Complex64) -> Result<f64> {
    rw.tilde_p(z)
}

/// Density of the swept measure at `z`: `Σ |{x ∈ I_n : |z−x| ≤ 10ω_n}| / (100π ω_n²)`.
///
/// `Δr = 2π` times this off the real axis.
pub fn mu_density(partition: &IntervalPartition, z: Complex64) -> f64 {
    let mut s = CompensatedSum::new();
    for k in partition.candidates(z) {
        let iv = &partition.intervals[k];
        if let Some((a, b)) = iv.clip(z) {
            let r = iv.sweep_radius();
            s.add((b - a) / (std::f64::consts::PI * r * r));
        }
    }
    s.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacianAudit {
    pub z: Complex64,
    pub h: f64,
    /// Five-point Laplacian of `r`.
    pub laplacian: f64,
    /// `2π` times [`mu_density`], the exact value the stencil approximates.
    pub expected: f64,
    pub p: f64,
    /// `Δr · p(z)`.
    pub scaled: f64,
}

pub fn laplacian_audit(rw: &RegularizedWeight, z: Complex64, h: f64) -> Result<LaplacianAudit> {
    if !(h > 0.0) {
        return Err(Error::input("stencil step must be positive"));
    }
    if z.im.abs() < 2.0 * h {
        return Err(Error::domain(format!("stencil at {z} with step {h} is too close to the real axis")));
    }
    let e = [Complex64::new(h, 0.0), Complex64::new(0.0, h)];
    let c = rw.r(z)?;
    let mut s = CompensatedSum::new();
    for d in e {
        s.add(rw.r(z + d)? - c);
        s.add(rw.r(z - d)? - c);
    }
    let laplacian = s.value() / (h * h);
    let p = rw.base.p(z)?;
    Ok(LaplacianAudit {
        z,
        h,
        laplacian,
        expected: 2.0 * std::f64::consts::PI * mu_density(&rw.partition, z),
        p,
        scaled: laplacian * p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    pub coarse: f64,
    pub fine: f64,
    pub finest: f64,
    /// `(coarse − fine) / (fine − finest)`; close to 4 for a second-order stencil.
    pub ratio: f64,
}

pub fn laplacian_richardson(rw: &RegularizedWeight, z: Complex64, h: f64) -> Result<Richardson> {
    let coarse = laplacian_audit(rw, z, h)?.laplacian;
    let fine = laplacian_audit(rw, z, h / 2.0)?.laplacian;
    let finest = laplacian_audit(rw, z, h / 4.0)?.laplacian;
    Ok(Richardson { coarse, fine, finest, ratio: (coarse - fine) / (fine - finest) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassAudit {
    pub index: usize,
    pub omega: f64,
    /// Mass of the disk sweep, by two-dimensional quadrature of its density.
    pub swept_mass: f64,
    /// Arc length of the interval.
    pub interval_mass: f64,
}

pub fn mass_audit(partition: &IntervalPartition, k: usize, quad: &QuadSpec) -> Result<MassAudit> {
    let iv = *partition.intervals.get(k).ok_or_else(|| Error::input(format!("no interval {k}")))?;
    let r = iv.sweep_radius();
    let norm = std::f64::consts::PI * r * r;
    let inner = |y: f64| -> Result<f64> {
        let s = ((r - y) * (r + y)).max(0.0).sqrt();
        if s == 0.0 {
            return Ok(0.0);
        }
        let len = |u: f64| ((iv.hi).min(u + s) - (iv.lo).max(u - s)).max(0.0);
        let brk = [iv.lo - s, iv.lo + s, iv.hi - s, iv.hi + s];
        Ok(integrate(len, iv.lo - s, iv.hi + s, &brk, quad)?.value)
    };
    // y = R sin θ removes the square-root endpoint behaviour
    let mut failure = None;
    let outer = integrate(
        |th: f64| match inner(r * th.sin()) {
            Ok(v) => v * r * th.cos(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        &[],
        &quad.with_abs_tol(quad.abs_tol * iv.omega * norm),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MassAudit { index: k, omega: iv.omega, swept_mass: outer.value / norm, interval_mass: iv.hi - iv.lo })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizeRow {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub p_tilde: f64,
    pub p: f64,
    pub ratio: f64,
}

/// Tabulates `r`, `p̃`, `p` and `p̃/p` on the product grid `xs × ys`.
pub fn regularize_grid(rw: &RegularizedWeight, xs: &[f64], ys: &[f64]) -> Result<Vec<RegularizeRow>> {
    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    for &y in ys {
        for &x in xs {
            let z = Complex64::new(x, y);
            let r = rw.r(z)?;
            let p_tilde = y.abs() + r;
            let p = rw.base.p(z)?;
            rows.push(RegularizeRow { x, y, r, p_tilde, p, ratio: p_tilde / p });
        }
    }
    Ok(rows)
}
