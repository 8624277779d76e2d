//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The caller supplies breakpoints for kinks and integrable singularities;
//! each segment is refined by bisecting the interval with the largest error
//! estimate until the total estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

impl QuadSpec {
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || self.abs_tol + self.rel_tol == 0.0 {
            return Err(Error::input("quadrature tolerances must be nonnegative and not both zero"));
        }
        if self.max_intervals == 0 {
            return Err(Error::input("quadrature budget must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by position for determinism.
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        err = f64::INFINITY;
    }
    Segment { a, b, value, err }
}

/// Integrates `f` over `[a, b]` with the given interior breakpoints.
///
/// Breakpoints outside `(a, b)` are ignored; they need not be sorted.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], spec: &QuadSpec) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("quadrature bounds must be finite"));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0, intervals: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut left = lo;
    for &c in cuts.iter().chain(std::iter::once(&hi)) {
        heap.push(gk15(&mut f, left, c));
        left = c;
    }

    let total = |heap: &BinaryHeap<Segment>| -> (f64, f64) {
        let mut v = CompensatedSum::new();
        let mut e = CompensatedSum::new();
        for s in heap.iter() {
            v.add(s.value);
            e.add(s.err);
        }
        (v.value(), e.value())
    };

    let (mut value, mut err) = total(&heap);
    let mut stalled = Vec::new();
    while err > spec.abs_tol.max(spec.rel_tol * value.abs()) {
        if heap.len() + stalled.len() >= spec.max_intervals {
            return Err(Error::Quadrature {
                context: format!("[{lo}, {hi}]"),
                estimate: value,
                abs_err: err,
                intervals: heap.len() + stalled.len(),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        // Segment too narrow to split in floating point: keep it as is.
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs() {
            stalled.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        heap.push(gk15(&mut f, worst.a, mid));
        heap.push(gk15(&mut f, mid, worst.b));
        let mut v = CompensatedSum::new();
        let mut e = CompensatedSum::new();
        for s in heap.iter().chain(stalled.iter()) {
            v.add(s.value);
            e.add(s.err);
        }
        value = v.value();
        err = e.value();
    }
    if !value.is_finite() {
        return Err(Error::Quadrature {
            context: format!("[{lo}, {hi}] non-finite integrand"),
            estimate: value,
            abs_err: err,
            intervals: heap.len() + stalled.len(),
        });
    }
    // Re-sum in position order so the result does not depend on heap layout.
    let mut segs: Vec<Segment> = heap.into_iter().chain(stalled).collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = segs.iter().map(|s| s.value).collect::<CompensatedSum>().value();
    let abs_err: f64 = segs.iter().map(|s| s.err).collect::<CompensatedSum>().value();
    Ok(QuadResult {
        value: sign * value,
        abs_err,
        intervals: segs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &[], &QuadSpec::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let spec = QuadSpec::default();
        let fwd = integrate(f64::sin, 0.0, PI, &[], &spec).unwrap().value;
        let rev = integrate(f64::sin, PI, 0.0, &[], &spec).unwrap().value;
        assert!((fwd - 2.0).abs() < 1e-12);
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫₀¹ ln x dx = −1
        let r = integrate(f64::ln, 0.0, 1.0, &[], &QuadSpec::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate(|x: f64| (x - 0.3).abs(), -1.0, 1.0, &[0.3], &QuadSpec::default()).unwrap();
        assert!((r.value - (1.3f64.powi(2) + 0.7f64.powi(2)) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let spec = QuadSpec { abs_tol: 1e-16, rel_tol: 0.0, max_intervals: 3 };
        let r = integrate(|x: f64| x.abs().sqrt().recip(), -1.0, 1.0, &[], &spec);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
