//! The two geometric conditions over finite truncations.
//!
//! Condition (a) bounds `N(λ, p(λ)) / p(λ)`; condition (b) bounds the Poisson
//! balayage of the points lying off the strip `|Im z| ≤ ω(|z|)`. A finite
//! sample cannot prove "there is C"; instead the constants are computed over
//! a sweep of truncation radii and their log-log growth is classified.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;
use crate::variety::{Variety, WeightedPoint, P_MIN};
use crate::weights::BeurlingWeight;

/// `Λ₀` (closed strip), `Λ₊` and `Λ₋`.
#[derive(Debug, Clone)]
pub struct RegionSplit {
    pub lambda0: Variety,
    pub lambda_plus: Variety,
    pub lambda_minus: Variety,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Strip,
    Upper,
    Lower,
}

pub fn region_of(w: &BeurlingWeight, z: Complex64) -> Result<Region> {
    let om = w.omega(z.norm())?;
    Ok(if z.im > om {
        Region::Upper
    } else if z.im < -om {
        Region::Lower
    } else {
        Region::Strip
    })
}

impl RegionSplit {
    /// `Λ₊ ∪ Λ₋`: the points entering the balayage condition.
    pub fn exterior(&self) -> Variety {
        self.lambda_plus
            .union(&self.lambda_minus)
            .expect("disjoint parts of a valid variety")
    }
}

pub fn split_regions(v: &Variety, w: &BeurlingWeight) -> Result<RegionSplit> {
    let mut parts: [Vec<WeightedPoint>; 3] = Default::default();
    for p in v.points() {
        let slot = match region_of(w, p.lambda)? {
            Region::Strip => 0,
            Region::Upper => 1,
            Region::Lower => 2,
        };
        parts[slot].push(*p);
    }
    let [zero, plus, minus] = parts;
    let wr = v.window_radius();
    Ok(RegionSplit {
        lambda0: Variety::new(zero, wr)?,
        lambda_plus: Variety::new(plus, wr)?,
        lambda_minus: Variety::new(minus, wr)?,
    })
}

/// Eight radii, geometric from `W/32` to `W/2`.
pub fn default_radii(window_radius: f64) -> Vec<f64> {
    crate::weights::geomspace(window_radius / 32.0, window_radius / 2.0, 8)
}

fn check_radii(v: &Variety, radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::input("radius schedule is empty"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::input("radii must be positive and finite"));
    }
    if radii.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::input("radii must be strictly increasing"));
    }
    let half = v.window_radius() / 2.0;
    if let Some(r) = radii.iter().find(|&&r| r > half * (1.0 + 1e-12)) {
        return Err(Error::input(format!("radius {r} exceeds half the window radius {half}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointWitness {
    pub lambda: Complex64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionAScan {
    /// `max N(λ, p(λ)) / p(λ)` over `|λ| ≤ R`, with `n(λ,0) log p(λ)` included.
    pub constants: Vec<f64>,
    /// Same without the `n(λ,0) log p(λ)` term.
    pub constants_punctured: Vec<f64>,
    pub witnesses: Vec<Option<PointWitness>>,
    pub floor_hits: usize,
}

/// Per-radius condition-(a) constants. `p(λ)` below [`P_MIN`] is raised to
/// it, both as the disk radius and as the divisor.
pub fn condition_a_scan(v: &Variety, w: &BeurlingWeight, radii: &[f64]) -> Result<ConditionAScan> {
    check_radii(v, radii)?;
    let r_max = *radii.last().unwrap();
    let mut ratios = Vec::new();
    let mut floor_hits = 0;
    for p in v.points().iter().take_while(|p| p.lambda.norm() <= r_max) {
        let pl = w.p(p.lambda)?;
        if pl < P_MIN {
            floor_hits += 1;
        }
        let r = pl.max(P_MIN);
        let (punct, center) = v.integrated_n_parts(p.lambda, r)?;
        let full = punct + center as f64 * r.ln();
        ratios.push((p.lambda, full / r, punct / r));
    }
    let mut constants = Vec::with_capacity(radii.len());
    let mut constants_punctured = Vec::with_capacity(radii.len());
    let mut witnesses = Vec::with_capacity(radii.len());
    let mut best: Option<PointWitness> = None;
    let mut best_p = 0.0f64;
    let mut k = 0;
    for &rad in radii {
        while k < ratios.len() && ratios[k].0.norm() <= rad {
            let (lam, full, punct) = ratios[k];
            if best.map_or(true, |b| full > b.value) {
                best = Some(PointWitness { lambda: lam, value: full });
            }
            best_p = best_p.max(punct);
            k += 1;
        }
        constants.push(best.map_or(0.0, |b| b.value.max(0.0)));
        constants_punctured.push(best_p);
        witnesses.push(best);
    }
    Ok(ConditionAScan { constants, constants_punctured, witnesses, floor_hits })
}

pub fn condition_a_constants(v: &Variety, w: &BeurlingWeight, radii: &[f64]) -> Result<Vec<f64>> {
    Ok(condition_a_scan(v, w, radii)?.constants)
}

/// Precomputed Poisson balayage `Φ(x) = Σ m_λ |Im λ| / |x − λ|²`.
#[derive(Debug, Clone)]
pub struct Balayage {
    re: Vec<f64>,
    im: Vec<f64>,
    mult: Vec<f64>,
}

impl Balayage {
    pub fn new(points: &[WeightedPoint]) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.lambda.im == 0.0) {
            return Err(Error::Invariant(format!("real point {} in the balayage set", p.lambda)));
        }
        Ok(Self {
            re: points.iter().map(|p| p.lambda.re).collect(),
            im: points.iter().map(|p| p.lambda.im.abs()).collect(),
            mult: points.iter().map(|p| p.mult as f64).collect(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut s = CompensatedSum::new();
        for i in 0..self.re.len() {
            let dx = x - self.re[i];
            let b = self.im[i];
            s.add(self.mult[i] * b / (dx * dx + b * b));
        }
        s.value()
    }

    /// Bound on `|Φ'|`: each kernel `b/((x−a)²+b²)` has slope at most `3√3/(8b²)`.
    pub fn lipschitz_bound(&self) -> f64 {
        let k = 3.0 * 3f64.sqrt() / 8.0;
        self.im.iter().zip(&self.mult).map(|(b, m)| m * k / (b * b)).sum()
    }

    /// Distinct `Re λ`, ascending.
    pub fn candidates(&self) -> Vec<f64> {
        let mut c = self.re.clone();
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }
}

pub fn balayage_value(exterior: &Variety, x: f64) -> Result<f64> {
    Ok(Balayage::new(exterior.points())?.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub samples: usize,
    /// Scan range; defaults to `[−W, W]` for the variety's window `W`.
    pub range: Option<(f64, f64)>,
    /// Golden-section stops when the bracket is narrower than this.
    pub refine_tol: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self { samples: 2001, range: None, refine_tol: 1e-6 }
    }
}

/// Result of the sup scan. `sup` is a lower bound for the true supremum;
/// `gap_estimate` bounds how far the uniform grid alone can undershoot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalayageSup {
    pub x: f64,
    pub sup: f64,
    pub grid_max: f64,
    pub candidate_max: f64,
    pub candidates: usize,
    pub lipschitz_bound: f64,
    pub gap_estimate: f64,
}

impl BalayageSup {
    fn zero() -> Self {
        Self { x: 0.0, sup: 0.0, grid_max: 0.0, candidate_max: 0.0, candidates: 0, lipschitz_bound: 0.0, gap_estimate: 0.0 }
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn sup_of(bal: &Balayage, lo: f64, hi: f64, scan: &ScanSpec) -> BalayageSup {
    if bal.is_empty() {
        return BalayageSup::zero();
    }
    let mut best_x = 0.0;
    let mut best = f64::NEG_INFINITY;
    let cands = bal.candidates();
    let mut candidate_max = f64::NEG_INFINITY;
    for &x in &cands {
        let v = bal.eval(x);
        if v > candidate_max {
            candidate_max = v;
        }
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let n = scan.samples.max(2);
    let h = (hi - lo) / (n - 1) as f64;
    let mut grid_max = f64::NEG_INFINITY;
    for i in 0..n {
        let x = lo + h * i as f64;
        let v = bal.eval(x);
        grid_max = grid_max.max(v);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let (gx, gv) = golden_max(|x| bal.eval(x), best_x - h, best_x + h, scan.refine_tol);
    if gv > best {
        best = gv;
        best_x = gx;
    }
    let lipschitz_bound = bal.lipschitz_bound();
    BalayageSup {
        x: best_x,
        sup: best,
        grid_max,
        candidate_max,
        candidates: cands.len(),
        lipschitz_bound,
        gap_estimate: 0.5 * h * lipschitz_bound,
    }
}

/// Sup of `Φ` over the real line, scanning every `Re λ`, a uniform grid and a
/// golden-section refinement around the best candidate.
pub fn balayage_sup(exterior: &Variety, scan: &ScanSpec) -> Result<BalayageSup> {
    let bal = Balayage::new(exterior.points())?;
    let w = exterior.window_radius();
    let (lo, hi) = scan.range.unwrap_or((-w, w));
    if !(lo < hi) {
        return Err(Error::input("balayage scan range must have xmin < xmax"));
    }
    Ok(sup_of(&bal, lo, hi, scan))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalayageProfile {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax: f64,
    pub max: f64,
}

impl BalayageProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.xs.iter().zip(&self.values) {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }
}

pub fn balayage_profile(exterior: &Variety, xmin: f64, xmax: f64, samples: usize) -> Result<BalayageProfile> {
    if !(xmin < xmax) || samples < 2 {
        return Err(Error::input("balayage profile needs xmin < xmax and at least two samples"));
    }
    let bal = Balayage::new(exterior.points())?;
    let h = (xmax - xmin) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples)
        .map(|i| if i + 1 == samples { xmax } else { xmin + h * i as f64 })
        .collect();
    let values: Vec<f64> = xs.iter().map(|&x| bal.eval(x)).collect();
    let (mut argmax, mut max) = (xs[0], values[0]);
    for (&x, &v) in xs.iter().zip(&values) {
        if v > max {
            max = v;
            argmax = x;
        }
    }
    Ok(BalayageProfile { xs, values, argmax, max })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionBScan {
    pub constants: Vec<f64>,
    pub witnesses: Vec<BalayageSup>,
}

/// Per-radius balayage sup over exterior points with `|λ| ≤ R`, scanned on `[−R, R]`.
pub fn condition_b_scan(v: &Variety, w: &BeurlingWeight, radii: &[f64], scan: &ScanSpec) -> Result<ConditionBScan> {
    check_radii(v, radii)?;
    let ext = split_regions(v, w)?.exterior();
    let pts = ext.points();
    let mut constants = Vec::with_capacity(radii.len());
    let mut witnesses = Vec::with_capacity(radii.len());
    for &r in radii {
        let k = pts.partition_point(|p| p.lambda.norm() <= r);
        let bal = Balayage::new(&pts[..k])?;
        let s = sup_of(&bal, -r, r, scan);
        constants.push(s.sup);
        witnesses.push(s);
    }
    Ok(ConditionBScan { constants, witnesses })
}

pub fn condition_b_constants(v: &Variety, w: &BeurlingWeight, radii: &[f64]) -> Result<Vec<f64>> {
    Ok(condition_b_scan(v, w, radii, &ScanSpec::default())?.constants)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundedEvidence,
    DivergenceEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Slopes below this are read as boundedness.
    pub bounded: f64,
    /// Slopes above this are read as divergence.
    pub divergent: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { bounded: 0.05, divergent: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub verdict: Verdict,
    /// Least-squares slope of `log constant` against `log radius`.
    pub exponent: Option<f64>,
    pub points_used: usize,
}

/// Classifies growth from the upper half of the radius sweep.
pub fn classify_trend(radii: &[f64], constants: &[f64], th: &Thresholds) -> Result<TrendFit> {
    if radii.len() != constants.len() {
        return Err(Error::input("radii and constants differ in length"));
    }
    if radii.len() < 4 {
        return Err(Error::input("trend fit needs at least four radii"));
    }
    if !(radii[0] > 0.0) || radii[radii.len() - 1] < 4.0 * radii[0] {
        return Err(Error::input("trend fit needs radii spanning at least two doublings"));
    }
    let start = radii.len() / 2;
    let pts: Vec<(f64, f64)> = radii[start..]
        .iter()
        .zip(&constants[start..])
        .filter(|(_, &c)| c > 0.0 && c.is_finite())
        .map(|(&r, &c)| (r.ln(), c.ln()))
        .collect();
    if pts.is_empty() {
        return Ok(TrendFit { verdict: Verdict::BoundedEvidence, exponent: Some(0.0), points_used: 0 });
    }
    if pts.len() < 2 {
        return Ok(TrendFit { verdict: Verdict::Inconclusive, exponent: None, points_used: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let verdict = if slope < th.bounded {
        Verdict::BoundedEvidence
    } else if slope > th.divergent {
        Verdict::DivergenceEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(TrendFit { verdict, exponent: Some(slope), points_used: pts.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub radii: Vec<f64>,
    pub constants_a: Vec<f64>,
    pub constants_a_punctured: Vec<f64>,
    pub witnesses_a: Vec<Option<PointWitness>>,
    pub constants_b: Vec<f64>,
    pub witnesses_b: Vec<BalayageSup>,
    pub verdict_a: Verdict,
    pub exponent_a: Option<f64>,
    pub verdict_a_punctured: Verdict,
    pub exponent_a_punctured: Option<f64>,
    pub verdict_b: Verdict,
    pub exponent_b: Option<f64>,
    pub thresholds: Thresholds,
    pub floor_hits: usize,
    pub region_counts: RegionCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub strip: usize,
    pub upper: usize,
    pub lower: usize,
}

pub fn condition_report(
    v: &Variety,
    w: &BeurlingWeight,
    radii: &[f64],
    th: &Thresholds,
    scan: &ScanSpec,
) -> Result<ConditionReport> {
    let split = split_regions(v, w)?;
    let a = condition_a_scan(v, w, radii)?;
    let b = condition_b_scan(v, w, radii, scan)?;
    let fa = classify_trend(radii, &a.constants, th)?;
    let fap = classify_trend(radii, &a.constants_punctured, th)?;
    let fb = classify_trend(radii, &b.constants, th)?;
    Ok(ConditionReport {
        radii: radii.to_vec(),
        constants_a: a.constants,
        constants_a_punctured: a.constants_punctured,
        witnesses_a: a.witnesses,
        constants_b: b.constants,
        witnesses_b: b.witnesses,
        verdict_a: fa.verdict,
        exponent_a: fa.exponent,
        verdict_a_punctured: fap.verdict,
        exponent_a_punctured: fap.exponent,
        verdict_b: fb.verdict,
        exponent_b: fb.exponent,
        thresholds: *th,
        floor_hits: a.floor_hits,
        region_counts: RegionCounts {
            strip: split.lambda0.len(),
            upper: split.lambda_plus.len(),
            lower: split.lambda_minus.len(),
        },
    })
}
