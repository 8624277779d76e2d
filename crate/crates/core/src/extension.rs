//! Smooth interpolation on the strip part of a variety, and the estimates a
//! `∂̄`-correction would need: growth of `∂̄F`, the singular weight `v`,
//! subharmonicity of `ψ_β = β p + v`, and the annulus counting bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conditions::{classify_trend, Thresholds, TrendFit};
use crate::error::{Error, Result};
use crate::halfplane::LogModulus;
use crate::index::DiskIndex;
use crate::sum::CompensatedSum;
use crate::variety::{Variety, P_MIN};
use crate::weights::GrowthWeight;

/// Prescribed Taylor coefficients `v^0, …, v^{m−1}` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub lambda: Complex64,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaCertificate {
    /// Smallest `α ≥ 0` with `Σ_l |v^l| ≤ e^{α p(λ)}` at every point.
    pub alpha: f64,
    /// `sup_λ Σ_l |v^l| e^{−α p(λ)}` at that `α`.
    pub constant: f64,
}

/// Jets aligned with the points of a variety.
#[derive(Debug, Clone)]
pub struct InterpolationData {
    variety: Variety,
    values: Vec<Vec<Complex64>>,
}

impl InterpolationData {
    /// Every point of `variety` needs exactly one jet with `m_λ` values.
    pub fn new(variety: Variety, jets: Vec<Jet>) -> Result<Self> {
        let mut values: Vec<Option<Vec<Complex64>>> = vec![None; variety.len()];
        for jet in jets {
            let k = variety
                .points()
                .iter()
                .position(|p| p.lambda == jet.lambda)
                .ok_or_else(|| Error::input(format!("jet at {} is not a point of the variety", jet.lambda)))?;
            let m = variety.points()[k].mult as usize;
            if jet.values.len() != m {
                return Err(Error::input(format!(
                    "jet at {} has {} values, multiplicity is {m}",
                    jet.lambda,
                    jet.values.len()
                )));
            }
            if jet.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::input(format!("jet at {} has non-finite values", jet.lambda)));
            }
            if values[k].replace(jet.values).is_some() {
                return Err(Error::input(format!("duplicate jet at {}", jet.lambda)));
            }
        }
        let values = values
            .into_iter()
            .zip(variety.points())
            .map(|(v, p)| v.ok_or_else(|| Error::input(format!("no jet given at {}", p.lambda))))
            .collect::<Result<_>>()?;
        Ok(Self { variety, values })
    }

    /// Applies `f(λ, l)` to fill every coefficient.
    pub fn from_fn<F: FnMut(Complex64, usize) -> Complex64>(variety: Variety, mut f: F) -> Self {
        let values = variety
            .points()
            .iter()
            .map(|p| (0..p.mult as usize).map(|l| f(p.lambda, l)).collect())
            .collect();
        Self { variety, values }
    }

    pub fn zeros(variety: Variety) -> Self {
        Self::from_fn(variety, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn variety(&self) -> &Variety {
        &self.variety
    }

    pub fn values(&self, k: usize) -> &[Complex64] {
        &self.values[k]
    }

    pub fn jets(&self) -> Vec<Jet> {
        self.variety
            .points()
            .iter()
            .zip(&self.values)
            .map(|(p, v)| Jet { lambda: p.lambda, values: v.clone() })
            .collect()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let values = self.values.iter().map(|v| v.iter().map(|x| x * c).collect()).collect();
        Self { variety: self.variety.clone(), values }
    }

    /// Pointwise sum; both sides must live on the same variety.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.variety.points() != other.variety.points() {
            return Err(Error::input("jet sets live on different varieties"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self { variety: self.variety.clone(), values })
    }

    pub fn alpha_certificate<W: GrowthWeight>(&self, w: &W) -> Result<AlphaCertificate> {
        let mut alpha = 0.0f64;
        let mut rows = Vec::with_capacity(self.values.len());
        for (p, v) in self.variety.points().iter().zip(&self.values) {
            let size: f64 = v.iter().map(|x| x.norm()).sum();
            let pl = w.eval(p.lambda)?.max(P_MIN);
            if size > 0.0 {
                alpha = alpha.max(size.ln() / pl);
            }
            rows.push((size, pl));
        }
        let constant = rows.iter().map(|(s, pl)| s * (-alpha * pl).exp()).fold(0.0, f64::max);
        Ok(AlphaCertificate { alpha, constant })
    }

    fn jet_poly(&self, k: usize, z: Complex64) -> Complex64 {
        let u = z - self.variety.points()[k].lambda;
        self.values[k].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }
}

/// `√(3/2)`: radius ratio of the circle where `𝒳′(|z−λ|²/δ²)` peaks.
const ANNULUS_MID: f64 = 1.224_744_871_391_589;

/// Smooth step: 1 on `(−∞, 1]`, 0 on `[2, ∞)`, `max |𝒳′| = 2` at `s = 3/2`.
///
/// `𝒳(s) = f(2−s) / (f(2−s) + f(s−1))` with `f(u) = e^{−1/u}` for `u > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Cutoff;

impl Cutoff {
    pub const MAX_SLOPE: f64 = 2.0;

    fn exponent(s: f64) -> (f64, f64) {
        // 𝒳 = 1/(1 + e^g) with g = 1/(2−s) − 1/(s−1)
        let g = 1.0 / (2.0 - s) - 1.0 / (s - 1.0);
        let dg = 1.0 / (2.0 - s).powi(2) + 1.0 / (s - 1.0).powi(2);
        (g, dg)
    }

    pub fn value(&self, s: f64) -> f64 {
        if s <= 1.0 {
            1.0
        } else if s >= 2.0 {
            0.0
        } else {
            let (g, _) = Self::exponent(s);
            let e = (-g.abs()).exp();
            if g > 0.0 {
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + e)
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        if s <= 1.0 || s >= 2.0 {
            0.0
        } else {
            let (g, dg) = Self::exponent(s);
            let e = (-g.abs()).exp();
            -dg * e / ((1.0 + e) * (1.0 + e))
        }
    }
}

/// Per-point radii `δ_λ = δ e^{−C p(λ)/m_λ}` with pairwise disjoint `D(λ, 2δ_λ)`.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationRadii {
    pub delta: f64,
    pub c: f64,
    pub radii: Vec<f64>,
    #[serde(skip)]
    centers: Vec<Complex64>,
    #[serde(skip)]
    index: DiskIndex,
}

impl SeparationRadii {
    pub fn new<W: GrowthWeight>(v: &Variety, w: &W, delta: f64, c: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite() && c >= 0.0 && c.is_finite()) {
            return Err(Error::input(format!("separation needs δ > 0 and C ≥ 0, got δ = {delta}, C = {c}")));
        }
        let radii = v
            .points()
            .iter()
            .map(|p| Ok(delta * (-c * w.eval(p.lambda)? / p.mult as f64).exp()))
            .collect::<Result<Vec<f64>>>()?;
        let centers: Vec<Complex64> = v.points().iter().map(|p| p.lambda).collect();
        let out = Self { delta, c, radii, index: DiskIndex::new(&centers), centers };
        out.check_disjoint()?;
        Ok(out)
    }

    /// `C` twice the observed separation constant, `δ` the largest value (up
    /// to 1/5) that keeps the doubled disks of close pairs apart by a factor 2.
    pub fn from_profile<W: GrowthWeight>(v: &Variety, w: &W) -> Result<Self> {
        let c = if v.len() < 2 { 0.0 } else { 2.0 * v.separation_profile(w)?.worst_constant };
        let pts: Vec<Complex64> = v.points().iter().map(|p| p.lambda).collect();
        let e: Vec<f64> = v
            .points()
            .iter()
            .map(|p| Ok((-c * w.eval(p.lambda)? / p.mult as f64).exp()))
            .collect::<Result<_>>()?;
        let mut delta = 0.2f64;
        for (i, j, d) in crate::index::GridHash::new(&pts, 1.0).close_pairs(&pts) {
            delta = delta.min(d / (4.0 * (e[i] + e[j])));
        }
        Self::new(v, w, delta, c)
    }

    fn check_disjoint(&self) -> Result<()> {
        let index = &self.index;
        let max_r = self.radii.iter().copied().fold(0.0, f64::max);
        for (i, (&z, &r)) in self.centers.iter().zip(&self.radii).enumerate() {
            let mut clash = None;
            index.for_each_within(z, 2.0 * (r + max_r), |j, d| {
                if j != i && d <= 2.0 * (r + self.radii[j]) && clash.is_none() {
                    clash = Some(j);
                }
            });
            if let Some(j) = clash {
                return Err(Error::Invariant(format!(
                    "disks D(λ, 2δ_λ) around {} and {} overlap",
                    z, self.centers[j]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// The unique `k` with `|z − λ_k| < 2δ_k`.
    fn owner(&self, z: Complex64) -> Result<Option<usize>> {
        let index = &self.index;
        let max_r = self.radii.iter().copied().fold(0.0, f64::max);
        let mut hits = Vec::new();
        index.for_each_within(z, 2.0 * max_r, |j, d| {
            if d < 2.0 * self.radii[j] {
                hits.push(j);
            }
        });
        match hits.len() {
            0 => Ok(None),
            1 => Ok(Some(hits[0])),
            _ => Err(Error::Invariant(format!("{z} lies in {} cutoff disks", hits.len()))),
        }
    }

    /// `per` points on the circle `|z − λ|² = 3δ_λ²/2` of every annulus, where the
    /// cutoff is steepest.
    pub fn annulus_samples(&self, per: usize) -> Vec<(usize, Complex64)> {
        let mut out = Vec::with_capacity(self.len() * per);
        for (k, (&c, &r)) in self.centers.iter().zip(&self.radii).enumerate() {
            for j in 0..per {
                let th = std::f64::consts::TAU * j as f64 / per as f64;
                out.push((k, c + Complex64::from_polar(ANNULUS_MID * r, th)));
            }
        }
        out
    }
}

fn check_pairing(data: &InterpolationData, radii: &SeparationRadii) -> Result<()> {
    if data.variety.points().iter().map(|p| p.lambda).ne(radii.centers.iter().copied()) {
        return Err(Error::input("jets and separation radii refer to different points"));
    }
    Ok(())
}

/// `F(z) = p_λ(z) 𝒳(|z−λ|²/δ_λ²)` near each `λ`, zero elsewhere.
pub fn smooth_f(data: &InterpolationData, radii: &SeparationRadii, z: Complex64) -> Result<Complex64> {
    check_pairing(data, radii)?;
    Ok(match radii.owner(z)? {
        None => Complex64::new(0.0, 0.0),
        Some(k) => {
            let lam = radii.centers[k];
            let s = (z - lam).norm_sqr() / (radii.radii[k] * radii.radii[k]);
            data.jet_poly(k, z) * Cutoff.value(s)
        }
    })
}

/// `∂F/∂z̄ = p_λ(z) 𝒳′(s) (z − λ)/δ_λ²`, supported on the annuli.
pub fn dbar_f(data: &InterpolationData, radii: &SeparationRadii, z: Complex64) -> Result<Complex64> {
    check_pairing(data, radii)?;
    Ok(match radii.owner(z)? {
        None => Complex64::new(0.0, 0.0),
        Some(k) => {
            let lam = radii.centers[k];
            let d2 = radii.radii[k] * radii.radii[k];
            let s = (z - lam).norm_sqr() / d2;
            let slope = Cutoff.derivative(s);
            if slope == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                data.jet_poly(k, z) * slope * (z - lam) / d2
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbarCertificate {
    /// Smallest `K ≥ 0` with `|∂̄F| ≤ e^{K p}` on the samples.
    pub k: f64,
    /// `max log|∂̄F|` over the samples; `None` when `∂̄F` vanishes there.
    pub log_sup: Option<f64>,
    /// Exponent used for the two weighted integrals, `2K + 1`.
    pub gamma: f64,
    /// Polar-grid sums for `∫|F|² e^{−γp}` over the disks `D(λ, 2δ_λ)`
    /// and `∫|∂̄F|² e^{−γp}` over the annuli.
    pub f_integral: f64,
    pub dbar_integral: f64,
    pub samples: usize,
}

/// Scans `n_radial × n_angular` polar points per annulus.
pub fn dbar_growth_certificate<W: GrowthWeight>(
    data: &InterpolationData,
    radii: &SeparationRadii,
    w: &W,
    n_radial: usize,
    n_angular: usize,
) -> Result<DbarCertificate> {
    check_pairing(data, radii)?;
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::input("certificate grid must be nonempty"));
    }
    let mut rows = Vec::new();
    for (k, (&c, &r)) in radii.centers.iter().zip(&radii.radii).enumerate() {
        // midpoint rule in (ρ, θ) over 0 < ρ < 2δ: inner half for F, outer half for both
        for i in 0..2 * n_radial {
            let rho = 2.0 * r * (i as f64 + 0.5) / (2 * n_radial) as f64;
            let area = rho * (2.0 * r / (2 * n_radial) as f64) * (std::f64::consts::TAU / n_angular as f64);
            for j in 0..n_angular {
                let th = std::f64::consts::TAU * j as f64 / n_angular as f64;
                let z = c + Complex64::from_polar(rho, th);
                let p = w.eval(z)?;
                let s = rho * rho / (r * r);
                let poly = data.jet_poly(k, z);
                let f = poly * Cutoff.value(s);
                let db = poly * Cutoff.derivative(s) * (z - c) / (r * r);
                rows.push((p, f.norm(), db.norm(), area, rho >= r));
            }
        }
    }
    let mut k = 0.0f64;
    let mut log_sup: Option<f64> = None;
    for &(p, _, db, _, on_annulus) in &rows {
        if on_annulus && db > 0.0 {
            let l = db.ln();
            log_sup = Some(log_sup.map_or(l, |m| m.max(l)));
            k = k.max(l / p.max(P_MIN));
        }
    }
    let gamma = 2.0 * k + 1.0;
    let mut fi = CompensatedSum::new();
    let mut di = CompensatedSum::new();
    for &(p, f, db, area, _) in &rows {
        let damp = (-gamma * p).exp();
        fi.add(f * f * damp * area);
        di.add(db * db * damp * area);
    }
    Ok(DbarCertificate {
        k,
        log_sup,
        gamma,
        f_integral: fi.value(),
        dbar_integral: di.value(),
        samples: rows.len(),
    })
}

/// `v(z) = Σ_{|z−λ| ≤ εp(λ)} m_λ [log s + 1 − s]`, `s = |z−λ|²/(εp(λ))²`,
/// with `p` floored at [`P_MIN`].
#[derive(Debug, Clone)]
pub struct SingularWeight {
    mults: Vec<f64>,
    reach: Vec<f64>,
    max_reach: f64,
    index: DiskIndex,
    eps: f64,
}

impl SingularWeight {
    pub fn new<W: GrowthWeight>(v: &Variety, w: &W, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::domain(format!("ε must lie in (0, 1/2], got {eps}")));
        }
        let centers: Vec<Complex64> = v.points().iter().map(|p| p.lambda).collect();
        let reach = v
            .points()
            .iter()
            .map(|p| Ok(eps * w.eval(p.lambda)?.max(P_MIN)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            index: DiskIndex::new(&centers),
            mults: v.points().iter().map(|p| p.mult as f64).collect(),
            max_reach: reach.iter().copied().fold(0.0, f64::max),
            reach,
            eps,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eval(&self, z: Complex64) -> LogModulus {
        let mut terms = Vec::new();
        let mut pole = None;
        self.index.for_each_within(z, self.max_reach, |j, d| {
            let rho = self.reach[j];
            if d <= rho {
                if d == 0.0 {
                    pole = Some(self.mults[j] as u32);
                } else {
                    let s = (d / rho) * (d / rho);
                    terms.push((j, self.mults[j] * (s.ln() + 1.0 - s)));
                }
            }
        });
        if let Some(m) = pole {
            return LogModulus::Zero { multiplicity: m };
        }
        terms.sort_by_key(|t| t.0);
        LogModulus::Finite { value: terms.into_iter().map(|t| t.1).collect::<CompensatedSum>().value() }
    }

    fn finite(&self, z: Complex64) -> Result<f64> {
        self.eval(z)
            .finite()
            .ok_or_else(|| Error::domain(format!("{z} is a point of the variety")))
    }
}

pub fn v_weight<W: GrowthWeight>(v: &Variety, w: &W, eps: f64, z: Complex64) -> Result<LogModulus> {
    Ok(SingularWeight::new(v, w, eps)?.eval(z))
}

/// `ψ_β(z) = β p(z) + v(z)`.
pub fn psi_beta<W: GrowthWeight>(v: &Variety, w: &W, eps: f64, beta: f64, z: Complex64) -> Result<LogModulus> {
    Ok(match SingularWeight::new(v, w, eps)?.eval(z) {
        LogModulus::Finite { value } => LogModulus::Finite { value: beta * w.eval(z)? + value },
        pole => pole,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiAudit {
    /// Reported threshold: 1% above the smallest `β` making every stencil
    /// value nonnegative.
    pub beta0: f64,
    /// Smallest stencil Laplacian of `ψ_{β₀}` over the samples.
    pub min_laplacian: f64,
    pub worst_at: Option<Complex64>,
    pub samples: usize,
}

fn stencil<F: Fn(Complex64) -> Result<f64>>(f: F, z: Complex64, h: f64) -> Result<f64> {
    let c = f(z)?;
    let mut s = CompensatedSum::new();
    for d in [Complex64::new(h, 0.0), Complex64::new(0.0, h)] {
        s.add(f(z + d)? - c);
        s.add(f(z - d)? - c);
    }
    Ok(s.value() / (h * h))
}

/// Five-point check that `ψ_β` is subharmonic at the samples, which must
/// stay at least `2h` off the real axis.
pub fn psi_beta_audit<W: GrowthWeight>(
    v: &Variety,
    w: &W,
    eps: f64,
    samples: &[Complex64],
    h: f64,
) -> Result<PsiAudit> {
    if !(h > 0.0) {
        return Err(Error::input("stencil step must be positive"));
    }
    let sw = SingularWeight::new(v, w, eps)?;
    let mut parts = Vec::with_capacity(samples.len());
    let mut beta0 = 0.0f64;
    for &z in samples {
        if z.im.abs() < 2.0 * h {
            return Err(Error::domain(format!("stencil at {z} with step {h} reaches the real axis")));
        }
        let lp = stencil(|q| w.eval(q), z, h)?;
        let lv = stencil(|q| sw.finite(q), z, h)?;
        if lv < 0.0 {
            if !(lp > 0.0) {
                return Err(Error::Invariant(format!("weight is not strictly subharmonic at {z}")));
            }
            beta0 = beta0.max(-lv / lp);
        }
        parts.push(z);
    }
    let beta0 = 1.01 * beta0;
    let mut out = PsiAudit { beta0, min_laplacian: f64::INFINITY, worst_at: None, samples: samples.len() };
    for z in parts {
        let l = stencil(|q| Ok(beta0 * w.eval(q)? + sw.finite(q)?), z, h)?;
        if l < out.min_laplacian {
            out.min_laplacian = l;
            out.worst_at = Some(z);
        }
    }
    if samples.is_empty() {
        out.min_laplacian = 0.0;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularitySlope {
    /// Fitted slope of `ψ_β` against `log|z − λ|`; equals `2m_λ` for a pole of order `m_λ`.
    pub slope: f64,
    /// Spread of `ψ_β − 2m_λ log|z−λ|` over the rings.
    pub remainder_spread: f64,
}

/// Fits `ψ_β` on rings of radius `εp(λ) 2^{−j}`, `j = 3..=12`, around the `k`-th point.
pub fn psi_log_slope<W: GrowthWeight>(
    v: &Variety,
    w: &W,
    eps: f64,
    beta: f64,
    k: usize,
) -> Result<SingularitySlope> {
    let p = v.points().get(k).ok_or_else(|| Error::input(format!("no point {k}")))?;
    let sw = SingularWeight::new(v, w, eps)?;
    let base = eps * w.eval(p.lambda)?.max(P_MIN);
    let mut pts = Vec::new();
    for j in 3..=12 {
        let rho = base * 0.5f64.powi(j);
        let z = p.lambda + Complex64::from_polar(rho, 0.7);
        pts.push((rho.ln(), beta * w.eval(z)? + sw.finite(z)?));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
    let two_m = 2.0 * p.mult as f64;
    let rem: Vec<f64> = pts.iter().map(|q| q.1 - two_m * q.0).collect();
    let spread = rem.iter().copied().fold(f64::NEG_INFINITY, f64::max) - rem.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SingularitySlope { slope: sxy / sxx, remainder_spread: spread })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportCountReport {
    pub radii: Vec<f64>,
    /// Per radius, `max N(z, C(ε)p(z)) / p(z)` over annulus samples around `|λ| ≤ R`.
    pub constants: Vec<f64>,
    pub witnesses: Vec<Option<Complex64>>,
    pub growth_constant: f64,
    /// Worst `N(z, C(ε)p(z)) / (p(λ) + N°(λ, 2C(ε)² p(λ)))`, the domination
    /// constant of the comparison with the centre's counting function.
    pub chain_constant: f64,
    pub fit: TrendFit,
}

/// Counting bound on the support of `∂̄F`, with `C(ε)` the growth constant of
/// the weight for the chosen `ε`.
pub fn support_counting_check<W: GrowthWeight>(
    v: &Variety,
    w: &W,
    radii: &SeparationRadii,
    growth_constant: f64,
    schedule: &[f64],
    th: &Thresholds,
) -> Result<SupportCountReport> {
    if v.points().iter().map(|p| p.lambda).ne(radii.centers.iter().copied()) {
        return Err(Error::input("separation radii refer to a different variety"));
    }
    if !(growth_constant >= 1.0) {
        return Err(Error::input(format!("growth constant {growth_constant} must be at least 1")));
    }
    if schedule.is_empty() || schedule.windows(2).any(|q| q[1] <= q[0]) {
        return Err(Error::input("radius schedule must be nonempty and strictly increasing"));
    }
    let r_max = *schedule.last().unwrap();
    let chain_mult = 2.0 * growth_constant * growth_constant;
    let mut per_point: Vec<(f64, f64, Complex64)> = Vec::new();
    let mut chain = 0.0f64;
    for (k, p) in v.points().iter().enumerate() {
        if p.lambda.norm() > r_max {
            break;
        }
        let pl = w.eval(p.lambda)?.max(P_MIN);
        let rhs = pl + v.integrated_n_punctured(p.lambda, chain_mult * pl)?;
        let mut best = (0.0f64, p.lambda);
        for j in 0..8 {
            let th = std::f64::consts::FRAC_PI_4 * j as f64;
            let z = p.lambda + Complex64::from_polar(ANNULUS_MID * radii.radii[k], th);
            let pz = w.eval(z)?.max(P_MIN);
            let n = v.integrated_n(z, growth_constant * pz)?;
            chain = chain.max(n / rhs);
            if n / pz > best.0 {
                best = (n / pz, z);
            }
        }
        per_point.push((p.lambda.norm(), best.0, best.1));
    }
    let mut constants = Vec::with_capacity(schedule.len());
    let mut witnesses = Vec::with_capacity(schedule.len());
    let mut best: Option<(f64, Complex64)> = None;
    let mut i = 0;
    for &r in schedule {
        while i < per_point.len() && per_point[i].0 <= r {
            if best.map_or(true, |b| per_point[i].1 > b.0) {
                best = Some((per_point[i].1, per_point[i].2));
            }
            i += 1;
        }
        constants.push(best.map_or(0.0, |b| b.0));
        witnesses.push(best.map(|b| b.1));
    }
    let fit = classify_trend(schedule, &constants, th)?;
    Ok(SupportCountReport {
        radii: schedule.to_vec(),
        constants,
        witnesses,
        growth_constant,
        chain_constant: chain,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::WeightedPoint;
    use crate::weights::BeurlingWeight;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lattice(k: i64, mult: u32) -> Variety {
        Variety::new(
            (-k..=k).map(|j| WeightedPoint::new(c(j as f64, 0.0), mult)).collect(),
            2.0 * k as f64 + 2.0,
        )
        .unwrap()
    }

    #[test]
    fn cutoff_shape() {
        let x = Cutoff;
        assert_eq!((x.value(0.5), x.value(1.0), x.value(2.0), x.value(3.0)), (1.0, 1.0, 0.0, 0.0));
        assert!((x.value(1.5) - 0.5).abs() < 1e-15);
        assert!((x.derivative(1.5) + 2.0).abs() < 1e-14);
        let mut worst = 0.0f64;
        for i in 0..=10_000 {
            let s = 0.5 + 2.0 * i as f64 / 10_000.0;
            let v = x.value(s);
            assert!((0.0..=1.0).contains(&v));
            worst = worst.max(x.derivative(s).abs());
        }
        assert!(worst <= Cutoff::MAX_SLOPE + 1e-12);
        // derivative against central differences
        for s in [1.1, 1.3, 1.5, 1.77, 1.95] {
            let h = 1e-6;
            let fd = (x.value(s + h) - x.value(s - h)) / (2.0 * h);
            assert!((fd - x.derivative(s)).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn jet_validation() {
        let v = lattice(2, 2);
        let bad = vec![Jet { lambda: c(0.0, 0.0), values: vec![c(1.0, 0.0)] }];
        assert!(InterpolationData::new(v.clone(), bad).is_err());
        let stray = vec![Jet { lambda: c(0.5, 0.0), values: vec![c(1.0, 0.0); 2] }];
        assert!(InterpolationData::new(v.clone(), stray).is_err());
        let full: Vec<Jet> = v.points().iter().map(|p| Jet { lambda: p.lambda, values: vec![c(1.0, 0.0); 2] }).collect();
        assert!(InterpolationData::new(v, full).is_ok());
    }

    #[test]
    fn interpolant_values_and_support() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let v = lattice(5, 1);
        let data = InterpolationData::from_fn(v.clone(), |lam, _| c(lam.re + 2.0, -1.0));
        let radii = SeparationRadii::from_profile(&v, &w).unwrap();
        for p in v.points() {
            assert_eq!(smooth_f(&data, &radii, p.lambda).unwrap(), c(p.lambda.re + 2.0, -1.0));
        }
        assert_eq!(smooth_f(&data, &radii, c(0.5, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(dbar_f(&data, &radii, c(0.0, 0.5 * radii.radii[5])).unwrap(), c(0.0, 0.0));
        assert_eq!(dbar_f(&data, &radii, c(0.5, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn dbar_matches_wirtinger_stencil() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let v = lattice(3, 3);
        let data = InterpolationData::from_fn(v.clone(), |lam, l| c(1.0 + l as f64, lam.re - 0.5 * l as f64));
        let radii = SeparationRadii::from_profile(&v, &w).unwrap();
        let f = |z| smooth_f(&data, &radii, z).unwrap();
        for (k, z) in radii.annulus_samples(8) {
            let h = 1e-4 * radii.radii[k];
            let dx = (f(z + c(h, 0.0)) - f(z - c(h, 0.0))) / (2.0 * h);
            let dy = (f(z + c(0.0, h)) - f(z - c(0.0, h))) / (2.0 * h);
            let fd = 0.5 * (dx + Complex64::i() * dy);
            let an = dbar_f(&data, &radii, z).unwrap();
            assert!(an.norm() > 0.0);
            assert!((fd - an).norm() < 1e-6 * an.norm().max(1.0), "{z}: {fd} vs {an}");
        }
    }

    #[test]
    fn overlapping_radii_rejected() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let v = lattice(2, 1);
        assert!(matches!(SeparationRadii::new(&v, &w, 0.3, 0.0), Err(Error::Invariant(_))));
        assert!(SeparationRadii::new(&v, &w, 0.2, 0.0).is_ok());
    }

    #[test]
    fn certificate_examples() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let v = lattice(10, 1);
        let radii = SeparationRadii::from_profile(&v, &w).unwrap();
        let zero = dbar_growth_certificate(&InterpolationData::zeros(v.clone()), &radii, &w, 6, 16).unwrap();
        assert_eq!((zero.k, zero.log_sup), (0.0, None));
        let unit = InterpolationData::from_fn(v.clone(), |_, _| c(1.0, 0.0));
        let a = dbar_growth_certificate(&unit, &radii, &w, 6, 16).unwrap();
        let b = dbar_growth_certificate(&unit.scaled(c(2.0, 0.0)), &radii, &w, 6, 16).unwrap();
        assert!(a.k.is_finite() && a.f_integral.is_finite() && a.dbar_integral.is_finite());
        assert!((b.log_sup.unwrap() - a.log_sup.unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn singular_weight_examples() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let v = Variety::new(vec![WeightedPoint::simple(10.0, 0.0)], 40.0).unwrap();
        let eps = 0.2;
        let rho = eps * w.p(c(10.0, 0.0)).unwrap();
        let sw = SingularWeight::new(&v, &w, eps).unwrap();
        assert_eq!(sw.eval(c(10.0 + 1.01 * rho, 0.0)), LogModulus::Finite { value: 0.0 });
        assert!(sw.eval(c(10.0 + rho, 0.0)).finite().unwrap().abs() < 1e-15);
        let half = sw.eval(c(10.0, 0.5 * rho)).finite().unwrap();
        assert!((half - (0.25f64.ln() + 0.75)).abs() < 1e-14);
        assert_eq!(sw.eval(c(10.0, 0.0)), LogModulus::Zero { multiplicity: 1 });
        assert!(SingularWeight::new(&v, &w, 0.6).is_err());
        // ψ_β with no nearby point is β p
        let far = c(20.0, 3.0);
        let psi = psi_beta(&v, &w, eps, 3.0, far).unwrap().finite().unwrap();
        assert_eq!(psi, 3.0 * w.p(far).unwrap());
    }

    #[test]
    fn pole_order_from_slope() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let v = Variety::new(vec![WeightedPoint::new(c(5.0, 0.0), 3)], 40.0).unwrap();
        let s = psi_log_slope(&v, &w, 0.2, 4.0, 0).unwrap();
        assert!((s.slope - 6.0).abs() < 0.05, "{s:?}");
        assert!(s.remainder_spread < 0.5);
    }

    #[test]
    fn support_count_on_singleton() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let v = Variety::new(vec![WeightedPoint::simple(50.0, 0.0)], 200.0).unwrap();
        let radii = SeparationRadii::from_profile(&v, &w).unwrap();
        let sched = crate::weights::geomspace(60.0, 100.0, 4);
        let rep = support_counting_check(&v, &w, &radii, 1.2, &sched, &Thresholds { bounded: 0.05, divergent: 0.2 });
        // four radii spanning less than two doublings are refused
        assert!(rep.is_err());
        let sched = crate::weights::geomspace(60.0, 100.0 * 4.0, 4);
        let v = Variety::new(vec![WeightedPoint::simple(50.0, 0.0)], 1000.0).unwrap();
        let rep = support_counting_check(&v, &w, &radii, 1.2, &sched, &Thresholds::default()).unwrap();
        let want = (0..8)
            .map(|j| {
                let z = c(50.0, 0.0) + Complex64::from_polar(1.5f64.sqrt() * radii.radii[0], std::f64::consts::FRAC_PI_4 * j as f64);
                let p = w.p(z).unwrap();
                (1.2 * p / (1.5f64.sqrt() * radii.radii[0])).ln() / p
            })
            .fold(0.0, f64::max);
        assert!((rep.constants[0] - want).abs() < 1e-12, "{} vs {want}", rep.constants[0]);
    }
}
