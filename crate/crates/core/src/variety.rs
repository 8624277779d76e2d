//! Finite multiplicity varieties and their counting functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{DiskIndex, GridHash};
use crate::sum::CompensatedSum;
use crate::weights::GrowthWeight;

/// Floor applied to `p(λ)` wherever it is used as a radius or a divisor.
pub const P_MIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub lambda: Complex64,
    pub mult: u32,
}

impl WeightedPoint {
    pub fn new(lambda: Complex64, mult: u32) -> Self {
        Self { lambda, mult }
    }

    pub fn simple(re: f64, im: f64) -> Self {
        Self::new(Complex64::new(re, im), 1)
    }
}

/// A finite truncation of a multiplicity variety.
///
/// Points are distinct and sorted by modulus, then argument. Asymptotic
/// constants are only evaluated at points with `|λ| ≤ window_radius / 2`.
#[derive(Debug, Clone)]
pub struct Variety {
    points: Vec<WeightedPoint>,
    window_radius: f64,
    index: DiskIndex,
    merged: usize,
}

fn canonical(z: Complex64) -> Complex64 {
    // +0.0 and −0.0 denote the same point.
    Complex64::new(z.re + 0.0, z.im + 0.0)
}

fn order_key(z: &Complex64) -> (f64, f64) {
    (z.norm(), z.arg())
}

impl Variety {
    /// Builds a variety, merging coincident points into one with the summed
    /// multiplicity.
    pub fn new(points: Vec<WeightedPoint>, window_radius: f64) -> Result<Self> {
        if !(window_radius.is_finite() && window_radius > 0.0) {
            return Err(Error::input(format!("window radius must be positive, got {window_radius}")));
        }
        let mut pts = Vec::with_capacity(points.len());
        for (i, p) in points.into_iter().enumerate() {
            if !(p.lambda.re.is_finite() && p.lambda.im.is_finite()) {
                return Err(Error::input(format!("point {i} has non-finite coordinates")));
            }
            if p.mult == 0 {
                return Err(Error::input(format!("point {i} has multiplicity 0")));
            }
            pts.push(WeightedPoint::new(canonical(p.lambda), p.mult));
        }
        pts.sort_by(|a, b| {
            let (ka, kb) = (order_key(&a.lambda), order_key(&b.lambda));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(a.lambda.re.total_cmp(&b.lambda.re))
                .then(a.lambda.im.total_cmp(&b.lambda.im))
        });
        let mut merged_pts: Vec<WeightedPoint> = Vec::with_capacity(pts.len());
        let mut merged = 0;
        for p in pts {
            match merged_pts.last_mut() {
                Some(last) if last.lambda == p.lambda => {
                    last.mult = last
                        .mult
                        .checked_add(p.mult)
                        .ok_or_else(|| Error::input("multiplicity overflow while merging"))?;
                    merged += 1;
                }
                _ => merged_pts.push(p),
            }
        }
        let lambdas: Vec<Complex64> = merged_pts.iter().map(|p| p.lambda).collect();
        Ok(Self {
            index: DiskIndex::new(&lambdas),
            points: merged_pts,
            window_radius,
            merged,
        })
    }

    pub fn empty(window_radius: f64) -> Result<Self> {
        Self::new(Vec::new(), window_radius)
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

    /// Number of input records folded into an earlier point at ingestion.
    pub fn merged_duplicates(&self) -> usize {
        self.merged
    }

    pub fn index(&self) -> &DiskIndex {
        &self.index
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.points.iter().map(|p| p.mult as u64).sum()
    }

    /// Sub-variety of the points satisfying `keep`, with the same window.
    pub fn filter<F: FnMut(&WeightedPoint) -> bool>(&self, mut keep: F) -> Self {
        let pts: Vec<WeightedPoint> = self.points.iter().copied().filter(|p| keep(p)).collect();
        Self::new(pts, self.window_radius).expect("subset of a valid variety")
    }

    pub fn conjugate(&self) -> Self {
        let pts = self.points.iter().map(|p| WeightedPoint::new(p.lambda.conj(), p.mult)).collect();
        Self::new(pts, self.window_radius).expect("conjugate of a valid variety")
    }

    pub fn scale_multiplicities(&self, k: u32) -> Result<Self> {
        let pts = self
            .points
            .iter()
            .map(|p| {
                p.mult
                    .checked_mul(k)
                    .map(|m| WeightedPoint::new(p.lambda, m))
                    .ok_or_else(|| Error::input("multiplicity overflow"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts, self.window_radius)
    }

    /// Union with another variety; coincident points merge.
    pub fn union(&self, other: &Variety) -> Result<Self> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        Self::new(pts, self.window_radius.max(other.window_radius))
    }

    pub fn find(&self, z: Complex64) -> Option<&WeightedPoint> {
        let z = canonical(z);
        let mut hit = None;
        self.index.for_each_within(z, 0.0, |i, _| hit = Some(i));
        hit.map(|i| &self.points[i])
    }

    /// `n(z, r)`: total multiplicity in the closed disk `D(z, r)`.
    pub fn counting_n(&self, z: Complex64, r: f64) -> u64 {
        let mut n = 0u64;
        self.index.for_each_within(z, r, |i, _| n += self.points[i].mult as u64);
        n
    }

    /// `n(z, 0)`: multiplicity of `z` if it is a point of the variety.
    pub fn center_multiplicity(&self, z: Complex64) -> u64 {
        self.counting_n(z, 0.0)
    }

    /// `N(z, r) = Σ_{0<|λ−z|≤r} m_λ log(r/|λ−z|) + n(z,0) log r`.
    pub fn integrated_n(&self, z: Complex64, r: f64) -> Result<f64> {
        let (punct, center) = self.integrated_n_parts(z, r)?;
        Ok(punct + center as f64 * r.ln())
    }

    /// `N(z, r)` without the `n(z,0) log r` term.
    pub fn integrated_n_punctured(&self, z: Complex64, r: f64) -> Result<f64> {
        Ok(self.integrated_n_parts(z, r)?.0)
    }

    /// Punctured sum and `n(z, 0)` from a single disk query.
    pub fn integrated_n_parts(&self, z: Complex64, r: f64) -> Result<(f64, u64)> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("N(z, r) needs r > 0, got {r}")));
        }
        let ln_r = r.ln();
        let mut sum = CompensatedSum::new();
        let mut center = 0u64;
        let mut hits = Vec::new();
        self.index.for_each_within(z, r, |i, d| hits.push((i, d)));
        hits.sort_unstable_by_key(|h| h.0);
        for (i, d) in hits {
            let m = self.points[i].mult;
            if d == 0.0 {
                center += m as u64;
            } else {
                sum.add(m as f64 * (ln_r - d.ln()));
            }
        }
        Ok((sum.value(), center))
    }

    /// Quadrature of `∫₀^r (n(z,t) − n(z,0))/t dt + n(z,0) log r`.
    ///
    /// In `s = log t` the integrand is the step function `n(z, eˢ) − n(z,0)`;
    /// the composite trapezoid rule runs on each step with the jump
    /// locations as breakpoints and `steps` panels shared in proportion to
    /// the log-length of each step.
    pub fn integrated_n_oracle(&self, z: Complex64, r: f64, steps: usize) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("N(z, r) needs r > 0, got {r}")));
        }
        if steps < 1000 {
            return Err(Error::input("oracle needs at least 1000 steps"));
        }
        let n0 = self.center_multiplicity(z);
        let mut dists: Vec<f64> = self
            .points
            .iter()
            .map(|p| (p.lambda - z).norm())
            .filter(|&d| d > 0.0 && d <= r)
            .collect();
        dists.sort_by(f64::total_cmp);
        dists.dedup();
        let mut integral = CompensatedSum::new();
        if let Some(&first) = dists.first() {
            let mut knots: Vec<f64> = dists.iter().map(|d| d.ln()).collect();
            knots.push(r.ln());
            let total = knots.last().unwrap() - knots[0];
            for (k, seg) in knots.windows(2).enumerate() {
                let (a, b) = (seg[0], seg[1]);
                if b <= a {
                    continue;
                }
                let panels = if total > 0.0 {
                    ((steps as f64 * (b - a) / total).round() as usize).max(1)
                } else {
                    1
                };
                let h = (b - a) / panels as f64;
                // One-sided limits at the jumps equal n on the closed disk of
                // the left breakpoint.
                let edge = self.counting_n(z, dists[k]) as f64 - n0 as f64;
                let mut acc = CompensatedSum::new();
                acc.add(0.5 * edge);
                for j in 1..panels {
                    let t = (a + j as f64 * h).exp();
                    acc.add(self.counting_n(z, t) as f64 - n0 as f64);
                }
                acc.add(0.5 * edge);
                integral.add(h * acc.value());
            }
            debug_assert!(first > 0.0);
        }
        integral.add(n0 as f64 * r.ln());
        Ok(integral.value())
    }

    /// Weak-separation scan over pairs closer than 1.
    pub fn separation_profile<W: GrowthWeight>(&self, w: &W) -> Result<SeparationProfile> {
        if self.points.len() < 2 {
            return Err(Error::input("separation profile needs at least two points"));
        }
        let lambdas: Vec<Complex64> = self.points.iter().map(|p| p.lambda).collect();
        let pairs = GridHash::new(&lambdas, 1.0).close_pairs(&lambdas);
        let ps: Vec<f64> = lambdas.iter().map(|&z| w.eval(z)).collect::<Result<_>>()?;
        let floor_hits = ps.iter().filter(|&&p| p < P_MIN).count();
        let mut prof = SeparationProfile {
            worst_pair: None,
            worst_constant: 0.0,
            pairs_examined: pairs.len(),
            floor_hits,
        };
        for (i, j, d) in pairs {
            if d == 0.0 {
                return Err(Error::Invariant(format!(
                    "coincident points {} and {} survived ingestion",
                    lambdas[i], lambdas[j]
                )));
            }
            let ld = -d.ln();
            for (c, o) in [(i, j), (j, i)] {
                let v = self.points[o].mult as f64 * ld / ps[c].max(P_MIN);
                if prof.worst_pair.is_none() || v > prof.worst_constant {
                    prof.worst_constant = v;
                    prof.worst_pair = Some([lambdas[c], lambdas[o]]);
                }
            }
        }
        Ok(prof)
    }

    /// `max n(z, ε p(z)) / max(p(z), P_MIN)` over the samples.
    pub fn local_density_constant<W: GrowthWeight>(
        &self,
        w: &W,
        eps: f64,
        samples: &[Complex64],
    ) -> Result<LocalDensity> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::domain(format!("local density needs 0 < ε ≤ 1/2, got {eps}")));
        }
        let mut out = LocalDensity { constant: 0.0, at: None, floor_hits: 0 };
        for &z in samples {
            let p = w.eval(z)?;
            if p < P_MIN {
                out.floor_hits += 1;
            }
            let c = self.counting_n(z, eps * p) as f64 / p.max(P_MIN);
            if c > out.constant {
                out.constant = c;
                out.at = Some(z);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationProfile {
    /// `(λ, λ')` attaining the worst `m_{λ'} log(1/|λ−λ'|) / p(λ)`.
    pub worst_pair: Option<[Complex64; 2]>,
    pub worst_constant: f64,
    pub pairs_examined: usize,
    /// Points whose `p(λ)` was raised to [`P_MIN`].
    pub floor_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDensity {
    pub constant: f64,
    pub at: Option<Complex64>,
    pub floor_hits: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::BeurlingWeight;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn integers(k: i64, window: f64) -> Variety {
        Variety::new((-k..=k).map(|j| WeightedPoint::simple(j as f64, 0.0)).collect(), window).unwrap()
    }

    #[test]
    fn counting_examples() {
        assert_eq!(Variety::empty(1.0).unwrap().counting_n(c(0.0, 0.0), 5.0), 0);
        let v = Variety::new(
            vec![WeightedPoint::new(c(0.0, 1.0), 2), WeightedPoint::simple(5.0, 0.0)],
            10.0,
        )
        .unwrap();
        assert_eq!(v.counting_n(c(0.0, 0.0), 2.0), 2);
        assert_eq!(integers(100, 100.0).counting_n(c(0.0, 0.0), 10.5), 21);
    }

    #[test]
    fn ingestion_merges_and_sorts() {
        let v = Variety::new(
            vec![
                WeightedPoint::simple(2.0, 0.0),
                WeightedPoint::new(c(1.0, 0.0), 2),
                WeightedPoint::simple(1.0, -0.0),
                WeightedPoint::simple(0.0, 1.0),
            ],
            4.0,
        )
        .unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.merged_duplicates(), 1);
        assert_eq!(v.points()[0], WeightedPoint::new(c(1.0, 0.0), 3));
        assert_eq!(v.points()[1].lambda, c(0.0, 1.0));
        assert!(Variety::new(vec![WeightedPoint::new(c(0.0, 0.0), 0)], 1.0).is_err());
        assert!(Variety::new(vec![], 0.0).is_err());
    }

    #[test]
    fn integrated_n_examples() {
        let e = std::f64::consts::E;
        let v = Variety::new(vec![WeightedPoint::new(c(1.0, 0.0), 2)], 10.0).unwrap();
        assert_eq!(v.integrated_n(c(5.0, 0.0), 1.0).unwrap(), 0.0);
        let r = 3.0;
        let v = Variety::new(vec![WeightedPoint::new(c(r / e, 0.0), 2)], 10.0).unwrap();
        assert!((v.integrated_n(c(0.0, 0.0), r).unwrap() - 2.0).abs() < 1e-14);
        assert!(v.integrated_n(c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn integrated_n_on_integers() {
        // Independent evaluation: 19 log r − 2 log 9! (with center term) and
        // 18 log r − 2 log 9! (without), r = log(1 + 10⁴).
        let v = integers(10_020, 2e4);
        let z = c(1e4, 0.0);
        let r = 1e4f64.ln_1p();
        let log9f = (1..=9).map(|k| (k as f64).ln()).sum::<f64>();
        let full = 19.0 * r.ln() - 2.0 * log9f;
        let punct = 18.0 * r.ln() - 2.0 * log9f;
        assert!((v.integrated_n(z, r).unwrap() - full).abs() < 1e-12 * full);
        assert!((v.integrated_n_punctured(z, r).unwrap() - punct).abs() < 1e-12 * punct);
        assert!((full - 16.582_760_639).abs() < 1e-8);
        assert!((punct - 14.362_422_976).abs() < 1e-8);
        let oracle = v.integrated_n_oracle(z, r, 5000).unwrap();
        assert!((oracle - full).abs() <= 1e-6 * full);
    }

    #[test]
    fn negative_n_for_small_radius() {
        let v = integers(3, 10.0);
        let n = v.integrated_n(c(0.0, 0.0), 0.5).unwrap();
        assert!((n - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn oracle_one_point_and_boundary() {
        let v = Variety::new(vec![WeightedPoint::simple(0.3, 0.4)], 10.0).unwrap();
        let z = c(0.0, 0.0);
        let exact = v.integrated_n(z, 2.0).unwrap();
        assert!((v.integrated_n_oracle(z, 2.0, 1000).unwrap() - exact).abs() < 1e-9);
        // point exactly at distance r = 0.5 contributes nothing
        assert_eq!(v.integrated_n(z, 0.5).unwrap(), 0.0);
        assert_eq!(v.integrated_n_oracle(z, 0.5, 1000).unwrap(), 0.0);
        assert!(v.integrated_n_oracle(z, 0.5, 10).is_err());
    }

    #[test]
    fn separation_examples() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let far = Variety::new(vec![WeightedPoint::simple(0.0, 0.0), WeightedPoint::simple(1.5, 0.0)], 4.0).unwrap();
        let p = far.separation_profile(&w).unwrap();
        assert_eq!((p.worst_constant, p.pairs_examined, p.worst_pair), (0.0, 0, None));

        let near = Variety::new(vec![WeightedPoint::simple(0.0, 10.0), WeightedPoint::simple(0.1, 10.0)], 20.0).unwrap();
        let p = near.separation_profile(&w).unwrap();
        let p_lam = 10.0 + 11f64.ln();
        assert!((p.worst_constant - 10f64.ln() / p_lam).abs() < 1e-12);
        assert!((p.worst_constant - 0.1857).abs() < 1e-4);
        assert!(Variety::empty(1.0).unwrap().separation_profile(&w).is_err());
    }

    #[test]
    fn separation_grows_on_collapsing_ray() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let ray = |n: i32| {
            let pts = (1..=n).map(|k| WeightedPoint::simple(k as f64 * 0.5f64.powi(k), 0.0)).collect();
            Variety::new(pts, 1.0).unwrap().separation_profile(&w).unwrap().worst_constant
        };
        let cs: Vec<f64> = [10, 20, 30, 40].iter().map(|&n| ray(n)).collect();
        assert!(cs.windows(2).all(|p| p[1] > p[0] + 1.0), "{cs:?}");
    }

    #[test]
    fn local_density_examples() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let z = c(1e3, 0.0);
        let ld = Variety::empty(1.0).unwrap().local_density_constant(&w, 0.5, &[z]).unwrap();
        assert_eq!(ld.constant, 0.0);
        let v = integers(1100, 1100.0);
        let ld = v.local_density_constant(&w, 0.5, &[z]).unwrap();
        let p = 1001f64.ln();
        assert!((ld.constant - 7.0 / p).abs() < 1e-12);
        assert!((ld.constant - 1.01).abs() < 0.01);
        assert!(v.local_density_constant(&w, 0.75, &[z]).is_err());
    }
}
