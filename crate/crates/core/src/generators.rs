//! Parametric test families.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::Verdict;
use crate::error::{Error, Result};
use crate::variety::{Variety, WeightedPoint};

const MAX_POINTS: usize = 5_000_000;

fn one() -> u32 {
    1
}

/// Wire format for generated families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `ℤ ∩ [−W, W]`.
    IntegerLattice {
        #[serde(default = "one")]
        mult: u32,
        window_radius: f64,
    },
    /// `k·spacing + i·height` with `|k·spacing| ≤ W`.
    HorizontalLine {
        height: f64,
        spacing: f64,
        #[serde(default = "one")]
        mult: u32,
        window_radius: f64,
    },
    /// For each `n`, `2ⁿ` cell-centred points on the segment `Im z = 2ⁿ`, `|Re z| < 2ⁿ`.
    AngleSegments { n_min: u32, n_max: u32 },
    /// Integers moved by up to `amplitude` in each coordinate.
    PerturbedLattice { amplitude: f64, seed: u64, window_radius: f64 },
    /// Uniform points in `[−W, W] × [−h, h]`.
    StripRandom { count: usize, strip_height: f64, seed: u64, window_radius: f64 },
    /// `k·ratioᵏ` for `k = 1..=count`.
    GeometricRay { ratio: f64, count: usize },
    /// At `2ᵏ`, `k = 1..=count`, a run of `⌈2^{growth·k}⌉` points spaced `2^{−k}`.
    CollapsingClusters { count: u32, growth: f64 },
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::input(msg()))
    }
}

fn check_window(w: f64) -> Result<()> {
    check(w.is_finite() && w > 0.0, || format!("window radius {w} must be positive"))?;
    check(w <= 1e7, || format!("window radius {w} would generate too many points"))
}

fn check_mult(m: u32) -> Result<()> {
    check(m >= 1, || "multiplicity must be at least 1".into())
}

/// Window for families without one: the largest modulus, at least 1.
fn extent(points: &[WeightedPoint]) -> f64 {
    points.iter().map(|p| p.lambda.norm()).fold(1.0, f64::max)
}

pub fn generate(spec: &FamilySpec) -> Result<Variety> {
    let c = Complex64::new;
    match *spec {
        FamilySpec::IntegerLattice { mult, window_radius } => {
            check_mult(mult)?;
            check_window(window_radius)?;
            let k = window_radius.floor() as i64;
            let pts = (-k..=k).map(|j| WeightedPoint::new(c(j as f64, 0.0), mult)).collect();
            Variety::new(pts, window_radius)
        }
        FamilySpec::HorizontalLine { height, spacing, mult, window_radius } => {
            check_mult(mult)?;
            check_window(window_radius)?;
            check(height.is_finite(), || "line height must be finite".into())?;
            check(spacing.is_finite() && spacing > 0.0, || format!("spacing {spacing} must be positive"))?;
            let k = (window_radius / spacing).floor();
            check(k <= MAX_POINTS as f64, || format!("spacing {spacing} gives too many points"))?;
            let k = k as i64;
            let pts = (-k..=k).map(|j| WeightedPoint::new(c(j as f64 * spacing, height), mult)).collect();
            Variety::new(pts, window_radius)
        }
        FamilySpec::AngleSegments { n_min, n_max } => {
            check(n_min >= 1 && n_min <= n_max, || format!("need 1 ≤ n_min ≤ n_max, got {n_min}..{n_max}"))?;
            check(n_max <= 20, || format!("n_max = {n_max} exceeds 20"))?;
            let mut pts = Vec::new();
            for n in n_min..=n_max {
                let h = (1u64 << n) as f64;
                for k in 0..(1u64 << n) {
                    pts.push(WeightedPoint::new(c(-h + 2.0 * k as f64 + 1.0, h), 1));
                }
            }
            let w = extent(&pts);
            Variety::new(pts, w)
        }
        FamilySpec::PerturbedLattice { amplitude, seed, window_radius } => {
            check_window(window_radius)?;
            check((0.0..0.5).contains(&amplitude), || format!("amplitude {amplitude} must lie in [0, 1/2)"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = window_radius.floor() as i64;
            let pts = (-k..=k)
                .map(|j| {
                    let dx = amplitude * rng.gen_range(-1.0..=1.0);
                    let dy = amplitude * rng.gen_range(-1.0..=1.0);
                    WeightedPoint::new(c(j as f64 + dx, dy), 1)
                })
                .collect();
            Variety::new(pts, window_radius)
        }
        FamilySpec::StripRandom { count, strip_height, seed, window_radius } => {
            check_window(window_radius)?;
            check(count <= MAX_POINTS, || format!("count {count} exceeds {MAX_POINTS}"))?;
            check(strip_height.is_finite() && strip_height >= 0.0, || {
                format!("strip height {strip_height} must be nonnegative")
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = (0..count)
                .map(|_| {
                    let x = rng.gen_range(-window_radius..=window_radius);
                    let y = if strip_height > 0.0 { rng.gen_range(-strip_height..=strip_height) } else { 0.0 };
                    WeightedPoint::new(c(x, y), 1)
                })
                .collect();
            Variety::new(pts, window_radius)
        }
        FamilySpec::GeometricRay { ratio, count } => {
            check(ratio.is_finite() && ratio > 0.0, || format!("ratio {ratio} must be positive"))?;
            check(count >= 1 && count <= MAX_POINTS, || format!("count {count} out of range"))?;
            let pts: Vec<WeightedPoint> = (1..=count)
                .map(|k| WeightedPoint::new(c(k as f64 * ratio.powi(k as i32), 0.0), 1))
                .collect();
            check(pts.iter().all(|p| p.lambda.re.is_finite() && p.lambda.re > 0.0), || {
                format!("ratio {ratio} over {count} terms leaves the floating-point range")
            })?;
            let w = extent(&pts);
            Variety::new(pts, w)
        }
        FamilySpec::CollapsingClusters { count, growth } => {
            check(count >= 1 && count <= 40, || format!("cluster count {count} must lie in 1..=40"))?;
            check(growth > 0.0 && growth <= 1.0, || format!("growth {growth} must lie in (0, 1]"))?;
            let mut pts = Vec::new();
            for k in 1..=count {
                let x = (k as f64).exp2();
                let size = (growth * k as f64).exp2().ceil() as usize;
                let gap = (-(k as f64)).exp2();
                pts.extend((0..size).map(|j| WeightedPoint::new(c(x + j as f64 * gap, 0.0), 1)));
                check(pts.len() <= MAX_POINTS, || "cluster family too large".into())?;
            }
            let w = extent(&pts);
            Variety::new(pts, w)
        }
    }
}

/// What a family is known to do, where anything is known.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub verdict_a: Option<Verdict>,
    pub verdict_b: Option<Verdict>,
    /// Limit of the condition-(a) constant as the radius grows.
    pub limit_a: Option<f64>,
    pub b_identically_zero: bool,
    /// Contribution of each generation to the balayage at 0.
    pub balayage_increment_at_zero: Option<f64>,
}

pub fn expected_profile(spec: &FamilySpec) -> Expectations {
    match spec {
        FamilySpec::IntegerLattice { mult: 1, .. } => Expectations {
            verdict_a: Some(Verdict::BoundedEvidence),
            verdict_b: Some(Verdict::BoundedEvidence),
            limit_a: Some(2.0),
            b_identically_zero: true,
            balayage_increment_at_zero: None,
        },
        FamilySpec::AngleSegments { .. } => Expectations {
            verdict_a: Some(Verdict::BoundedEvidence),
            verdict_b: Some(Verdict::DivergenceEvidence),
            limit_a: None,
            b_identically_zero: false,
            balayage_increment_at_zero: Some(std::f64::consts::FRAC_PI_4),
        },
        _ => Expectations::default(),
    }
}
