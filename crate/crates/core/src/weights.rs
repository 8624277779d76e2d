//! Beurling weight profiles `ω` and the non-isotropic weight
//! `p(z) = |Im z| + ω(|z|)`.
//!
//! Besides evaluation this module audits the weight axioms on finite grids
//! (subadditivity, the logarithmic lower bound, the integrability condition,
//! the local comparability properties) and computes the Poisson extension of
//! `ω(|t|)` into the upper half-plane.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadSpec};

/// Anything that can serve as a growth weight `z ↦ p(z)`.
pub trait GrowthWeight {
    fn eval(&self, z: Complex64) -> Result<f64>;
}

/// Wire format for weight profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    LogShift { a: f64 },
    LogSquare,
    Power { gamma: f64 },
    Tabulated { knots: Vec<[f64; 2]> },
}

/// Piecewise-linear profile through sorted knots.
///
/// The first knot sits at `t = 0`; evaluation outside the knot range is an
/// error, never an extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    ts: Vec<f64>,
    ws: Vec<f64>,
}

impl Tabulated {
    pub fn new(knots: &[[f64; 2]]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidWeight("tabulated profile needs at least two knots".into()));
        }
        if knots[0][0] != 0.0 {
            return Err(Error::InvalidWeight("first tabulated knot must be at t = 0".into()));
        }
        for (i, k) in knots.iter().enumerate() {
            if !(k[0].is_finite() && k[1].is_finite()) || k[1] < 0.0 {
                return Err(Error::InvalidWeight(format!("knot {i} must be finite with ω ≥ 0")));
            }
            if i > 0 {
                let prev = knots[i - 1];
                if k[0] <= prev[0] {
                    return Err(Error::InvalidWeight(format!("knot {i}: t must be strictly increasing")));
                }
                if k[1] < prev[1] {
                    return Err(Error::InvalidWeight(format!("knot {i}: ω must be non-decreasing")));
                }
            }
        }
        Ok(Self {
            ts: knots.iter().map(|k| k[0]).collect(),
            ws: knots.iter().map(|k| k[1]).collect(),
        })
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().expect("validated non-empty")
    }

    pub fn knots(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.ts.iter().zip(&self.ws).map(|(&t, &w)| [t, w])
    }

    fn interp(&self, t: f64) -> f64 {
        let i = self.ts.partition_point(|&k| k <= t);
        if i == 0 {
            return self.ws[0];
        }
        if i == self.ts.len() {
            return self.ws[i - 1];
        }
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let (w0, w1) = (self.ws[i - 1], self.ws[i]);
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// The radial profile `ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSpec", into = "WeightSpec")]
pub enum OmegaProfile {
    /// `a·log(1+t)`
    LogShift { a: f64 },
    /// `log(1+t²)`
    LogSquare,
    /// `t^γ`, `0 < γ < 1`
    Power { gamma: f64 },
    Tabulated(Tabulated),
}

impl TryFrom<WeightSpec> for OmegaProfile {
    type Error = Error;

    fn try_from(spec: WeightSpec) -> Result<Self> {
        match spec {
            WeightSpec::LogShift { a } => {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::InvalidWeight(format!("log_shift needs a > 0, got {a}")));
                }
                Ok(OmegaProfile::LogShift { a })
            }
            WeightSpec::LogSquare => Ok(OmegaProfile::LogSquare),
            WeightSpec::Power { gamma } => {
                // γ ≥ 1 fails the integrability condition.
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::InvalidWeight(format!("power needs 0 < gamma < 1, got {gamma}")));
                }
                Ok(OmegaProfile::Power { gamma })
            }
            WeightSpec::Tabulated { knots } => Ok(OmegaProfile::Tabulated(Tabulated::new(&knots)?)),
        }
    }
}

impl From<OmegaProfile> for WeightSpec {
    fn from(p: OmegaProfile) -> Self {
        match p {
            OmegaProfile::LogShift { a } => WeightSpec::LogShift { a },
            OmegaProfile::LogSquare => WeightSpec::LogSquare,
            OmegaProfile::Power { gamma } => WeightSpec::Power { gamma },
            OmegaProfile::Tabulated(t) => WeightSpec::Tabulated { knots: t.knots().collect() },
        }
    }
}

impl OmegaProfile {
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::domain(format!("ω evaluated at negative argument {t}")));
        }
        match self {
            OmegaProfile::Tabulated(tab) => {
                if t > tab.t_max() {
                    return Err(Error::Range { t, lo: 0.0, hi: tab.t_max() });
                }
                Ok(tab.interp(t))
            }
            _ => Ok(self.eval_closed(t)),
        }
    }

    /// Largest argument accepted by [`eval`](Self::eval).
    pub fn t_max(&self) -> f64 {
        match self {
            OmegaProfile::Tabulated(tab) => tab.t_max(),
            _ => f64::INFINITY,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, OmegaProfile::Tabulated(_))
    }

    fn eval_closed(&self, t: f64) -> f64 {
        match self {
            OmegaProfile::LogShift { a } => a * t.ln_1p(),
            OmegaProfile::LogSquare => {
                if t > 1e8 {
                    2.0 * t.ln() + (t * t).recip().ln_1p()
                } else {
                    (t * t).ln_1p()
                }
            }
            OmegaProfile::Power { gamma } => t.powf(*gamma),
            OmegaProfile::Tabulated(tab) => tab.interp(t),
        }
    }

    /// ω on all of `[0, ∞)`; tabulated profiles continue with their last
    /// knot value. Used only where an integral runs over the whole line.
    fn eval_continued(&self, t: f64) -> f64 {
        match self {
            OmegaProfile::Tabulated(tab) => tab.interp(t.min(tab.t_max())),
            _ => self.eval_closed(t),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            OmegaProfile::Tabulated(tab) => tab.ts.clone(),
            _ => Vec::new(),
        }
    }
}

/// `p(z) = |Im z| + ω(|z|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeurlingWeight {
    pub omega: OmegaProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axiom_report: Option<AxiomReport>,
}

impl BeurlingWeight {
    pub fn new(omega: OmegaProfile) -> Self {
        Self { omega, axiom_report: None }
    }

    pub fn from_spec(spec: WeightSpec) -> Result<Self> {
        Ok(Self::new(OmegaProfile::try_from(spec)?))
    }

    pub fn log_shift(a: f64) -> Result<Self> {
        Self::from_spec(WeightSpec::LogShift { a })
    }

    pub fn log_square() -> Self {
        Self::new(OmegaProfile::LogSquare)
    }

    pub fn power(gamma: f64) -> Result<Self> {
        Self::from_spec(WeightSpec::Power { gamma })
    }

    pub fn tabulated(knots: &[[f64; 2]]) -> Result<Self> {
        Ok(Self::new(OmegaProfile::Tabulated(Tabulated::new(knots)?)))
    }

    pub fn omega(&self, t: f64) -> Result<f64> {
        self.omega.eval(t)
    }

    pub fn p(&self, z: Complex64) -> Result<f64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain("p evaluated at a non-finite point"));
        }
        Ok(z.im.abs() + self.omega.eval(z.norm())?)
    }

    pub fn spec(&self) -> WeightSpec {
        self.omega.clone().into()
    }

    /// Runs [`check_axioms`] and stores the report.
    pub fn with_axiom_report(mut self, grid: &GridSpec, tol: &ToleranceSpec) -> Result<Self> {
        self.axiom_report = Some(check_axioms(&self, grid, tol)?);
        Ok(self)
    }
}

impl GrowthWeight for BeurlingWeight {
    fn eval(&self, z: Complex64) -> Result<f64> {
        self.p(z)
    }
}

/// Radial test grid `{0} ∪ geomspace(t_min, t_max, points)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { t_min: 1e-3, t_max: 1e4, points: 160 }
    }
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(geomspace(self.t_min, self.t_max, self.points));
        v
    }
}

/// `n` points from `a` to `b` (inclusive) in geometric progression.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        b
                    } else {
                        (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Thresholds used by [`check_axioms`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    /// Allowed additive slack in `ω(s+t) ≤ ω(s) + ω(t) + ε`.
    pub eps_add: f64,
    /// The constant `C` in the oscillation property.
    pub oscillation_c: f64,
    /// Oscillation is only scanned for `x > x_min`.
    pub oscillation_x_min: f64,
    /// Radius factor `c` for the local comparability `p(ζ) ≤ C p(z)`, `ζ ∈ D(z, c p(z))`.
    pub growth_c: f64,
    /// Values of ε at which `C(ε)` is estimated.
    pub growth_eps: Vec<f64>,
    pub quad: QuadSpec,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            eps_add: 0.5,
            oscillation_c: 1.0,
            oscillation_x_min: 100.0,
            growth_c: 1.0,
            growth_eps: vec![0.4, 0.2, 0.1, 0.05, 0.025],
            quad: QuadSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: f64,
    pub at: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsConstant {
    pub eps: f64,
    pub constant: f64,
}

/// Grid audit of the weight axioms. Every scan records where its worst value
/// was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub normalized: bool,
    pub monotone: bool,
    /// `max ω(s+t) − ω(s) − ω(t)` and the pair `(s, t)`.
    pub subadd_excess: Witness,
    pub subadd_strict_pass: bool,
    pub subadd_relaxed_pass: bool,
    pub eps_add: f64,
    /// `max log(1+t)/ω(t)` over grid points `t > 1`; the location is `(t, 0)`.
    pub w1_constant: Witness,
    pub w1_pass: bool,
    /// `∫₀^∞ ω(t)/(1+t²) dt = head + tail`.
    pub w2_integral: f64,
    pub w2_head: f64,
    pub w2_tail: f64,
    /// Upper bound for the tail from `ω(t) ≤ ω(T) + ω(t−T)`.
    pub w2_tail_bound: f64,
    /// How the tail was obtained: `quadrature` or `constant_continuation`.
    pub w2_tail_kind: String,
    /// Difference between the integral at the requested and a tenfold
    /// tighter tolerance.
    pub w2_refinement_delta: f64,
    pub w2_pass: bool,
    /// `max max(ω(y)/ω(x), ω(x)/ω(y))` for `|y − x| < Cω(x)`, `x > x_min`;
    /// location `(x, y)`.
    pub oscillation_worst: Witness,
    pub oscillation_pass: bool,
    /// Sampled `sup p(ζ)/p(z)` over `ζ ∈ D(z, c·p(z))`; location is `z`.
    pub growth_c_constant: Witness,
    /// Sampled `C(ε)` with `p(ζ) ≤ C(ε) p(z)` whenever `z ∈ D(ζ, ε p(ζ))`.
    pub growth_d: Vec<EpsConstant>,
}

fn scan_max<I: IntoIterator<Item = (f64, [f64; 2])>>(it: I) -> Witness {
    let mut best = Witness { value: f64::NEG_INFINITY, at: [0.0, 0.0] };
    for (v, at) in it {
        if v > best.value {
            best = Witness { value: v, at };
        }
    }
    best
}

/// Numerically audits the weight axioms on a radial grid.
pub fn check_axioms(w: &BeurlingWeight, grid: &GridSpec, tol: &ToleranceSpec) -> Result<AxiomReport> {
    if grid.t_max < 1e4 {
        return Err(Error::input(format!("axiom grid must reach t_max ≥ 1e4, got {}", grid.t_max)));
    }
    if !(grid.t_min > 0.0 && grid.t_min < grid.t_max) || grid.points < 2 {
        return Err(Error::input("axiom grid needs 0 < t_min < t_max and at least two points"));
    }
    let omega = &w.omega;
    let t_hi = omega.t_max();
    if grid.t_max > t_hi {
        return Err(Error::Range { t: grid.t_max, lo: 0.0, hi: t_hi });
    }
    let nodes = grid.nodes();
    let vals: Vec<f64> = nodes.iter().map(|&t| omega.eval(t)).collect::<Result<_>>()?;

    let normalized = vals[0] == 0.0;
    let monotone = vals.windows(2).all(|p| p[1] >= p[0]);

    let mut pairs = Vec::new();
    for (i, &s) in nodes.iter().enumerate() {
        for (j, &t) in nodes.iter().enumerate().skip(i) {
            if s + t <= t_hi {
                let excess = omega.eval(s + t)? - vals[i] - vals[j];
                pairs.push((excess, [s, t]));
            }
        }
    }
    let subadd_excess = scan_max(pairs);

    let w1_constant = scan_max(nodes.iter().zip(&vals).filter(|(&t, _)| t > 1.0).map(|(&t, &v)| {
        let c = if v > 0.0 { t.ln_1p() / v } else { f64::INFINITY };
        (c, [t, 0.0])
    }));

    let (w2_head, w2_tail, w2_tail_bound, kind) = w2_parts(omega, grid.t_max, &tol.quad)?;
    let fine = tol.quad.with_abs_tol(tol.quad.abs_tol / 10.0).with_rel_tol(tol.quad.rel_tol / 10.0);
    let (h2, t2, _, _) = w2_parts(omega, grid.t_max, &fine)?;
    let w2_integral = w2_head + w2_tail;
    let w2_refinement_delta = (h2 + t2 - w2_integral).abs();

    let mut osc = Vec::new();
    for &x in nodes.iter().filter(|&&x| x > tol.oscillation_x_min) {
        let wx = omega.eval(x)?;
        let half = tol.oscillation_c * wx;
        for k in -4..=4 {
            let y = x + half * 0.999 * k as f64 / 4.0;
            if y < 0.0 || y > t_hi {
                continue;
            }
            let wy = omega.eval(y)?;
            let r = if wx > 0.0 && wy > 0.0 { (wy / wx).max(wx / wy) } else { f64::INFINITY };
            osc.push((r, [x, y]));
        }
    }
    let oscillation_worst = if osc.is_empty() { Witness { value: 1.0, at: [0.0, 0.0] } } else { scan_max(osc) };

    let growth_c_constant = sample_growth_c(w, grid, tol.growth_c)?;
    let growth_d = tol
        .growth_eps
        .iter()
        .map(|&eps| Ok(EpsConstant { eps, constant: sample_growth_d(w, grid, eps)?.value }))
        .collect::<Result<Vec<_>>>()?;

    Ok(AxiomReport {
        normalized,
        monotone,
        subadd_strict_pass: subadd_excess.value <= 0.0,
        subadd_relaxed_pass: subadd_excess.value <= tol.eps_add,
        subadd_excess,
        eps_add: tol.eps_add,
        w1_pass: w1_constant.value.is_finite(),
        w1_constant,
        w2_pass: w2_integral.is_finite() && w2_integral >= 0.0,
        w2_integral,
        w2_head,
        w2_tail,
        w2_tail_bound,
        w2_tail_kind: kind.to_string(),
        w2_refinement_delta,
        oscillation_pass: oscillation_worst.value <= 2.0,
        oscillation_worst,
        growth_c_constant,
        growth_d,
    })
}

fn w2_parts(omega: &OmegaProfile, t_max: f64, quad: &QuadSpec) -> Result<(f64, f64, f64, &'static str)> {
    let mut cuts = omega.kinks();
    let mut d = 1.0;
    while d < t_max {
        cuts.push(d);
        d *= 10.0;
    }
    let head = integrate(|t| omega.eval_continued(t) / (1.0 + t * t), 0.0, t_max, &cuts, quad)?.value;
    let w_t = omega.eval(t_max)?;
    let arc = FRAC_PI_2 - t_max.atan();
    if omega.is_tabulated() {
        let tail = w_t * arc;
        return Ok((head, tail, tail, "constant_continuation"));
    }
    // t = tan θ turns the tail into a finite integral with an integrable
    // endpoint singularity.
    let theta0 = t_max.atan();
    let tail = integrate(|th| omega.eval_closed(th.tan()), theta0, FRAC_PI_2, &[], quad)?.value;
    // ∫_T^∞ ω(t−T)/(1+t²) dt = ∫_0^∞ ω(s)/(1+(s+T)²) ds, again via tan.
    let shifted = integrate(
        |th| {
            let s = th.tan();
            let c = th.cos();
            omega.eval_closed(s) / (c * c + (s + t_max).powi(2) * c * c)
        },
        0.0,
        FRAC_PI_2,
        &[],
        quad,
    )?
    .value;
    Ok((head, tail, w_t * arc + shifted, "quadrature"))
}

fn sample_centers(grid: &GridSpec, omega: &OmegaProfile) -> Vec<Complex64> {
    let radii = geomspace(0.5, (grid.t_max / 10.0).min(omega.t_max() / 4.0), 24);
    let mut out = Vec::new();
    for r in radii {
        for k in 0..7 {
            let th = FRAC_PI_2 * k as f64 / 6.0;
            out.push(Complex64::from_polar(r, th));
        }
    }
    out
}

fn ring(center: Complex64, radius: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
}

fn sample_growth_c(w: &BeurlingWeight, grid: &GridSpec, c: f64) -> Result<Witness> {
    let mut best = Witness { value: 1.0, at: [0.0, 0.0] };
    let limit = w.omega.t_max();
    for z in sample_centers(grid, &w.omega) {
        let pz = w.p(z)?;
        if pz <= 0.0 {
            continue;
        }
        for frac in [0.5, 1.0] {
            for zeta in ring(z, frac * c * pz, 16) {
                if zeta.norm() > limit {
                    continue;
                }
                let r = w.p(zeta)? / pz;
                if r > best.value {
                    best = Witness { value: r, at: [z.re, z.im] };
                }
            }
        }
    }
    Ok(best)
}

/// Sampled `C(ε)`: the worst `p(ζ)/p(z)` with `z` on circles of radius
/// `ε p(ζ)` and `ε p(ζ)/2` around sample centers `ζ`.
pub fn sample_growth_d(w: &BeurlingWeight, grid: &GridSpec, eps: f64) -> Result<Witness> {
    if !(eps > 0.0) {
        return Err(Error::domain("ε must be positive"));
    }
    let mut best = Witness { value: 1.0, at: [0.0, 0.0] };
    let limit = w.omega.t_max();
    for zeta in sample_centers(grid, &w.omega) {
        let pzeta = w.p(zeta)?;
        for frac in [0.5, 1.0] {
            for z in ring(zeta, frac * eps * pzeta, 16) {
                if z.norm() > limit {
                    continue;
                }
                let pz = w.p(z)?;
                let r = if pz > 0.0 { pzeta / pz } else { f64::INFINITY };
                if r > best.value {
                    best = Witness { value: r, at: [zeta.re, zeta.im] };
                }
            }
        }
    }
    Ok(best)
}

/// Normalized Poisson extension of `ω(|t|)` to the upper half-plane,
/// `u(z) = (1/π) ∫ y ω(|t|) / ((x−t)² + y²) dt`.
///
/// Substituting `t = x + y tan θ` gives `u(z) = (1/π) ∫_{−π/2}^{π/2} ω(|x + y tan θ|) dθ`.
/// Tabulated profiles are continued by their last value beyond the knots.
pub fn poisson_transform(w: &BeurlingWeight, z: Complex64, quad: &QuadSpec) -> Result<f64> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain(format!("Poisson transform needs Im z > 0, got {z}")));
    }
    let (x, y) = (z.re, z.im);
    let mut cuts = vec![(-x / y).atan()];
    for k in w.omega.kinks() {
        cuts.push(((k - x) / y).atan());
        cuts.push(((-k - x) / y).atan());
    }
    let omega = &w.omega;
    let r = integrate(
        |th| omega.eval_continued((x + y * th.tan()).abs()),
        -FRAC_PI_2,
        FRAC_PI_2,
        &cuts,
        quad,
    )?;
    Ok(r.value / PI)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HBoundReport {
    pub a_fit: f64,
    pub b_fit: f64,
    /// Largest `|u(z) − ω(|z|)|` over the samples and where it occurs.
    pub worst_residual: Witness,
    /// Smallest `A + B·Im z − |u(z) − ω(|z|)|` over the samples (0 at an active sample).
    pub min_slack: f64,
    pub samples: usize,
}

/// Fits the smallest `(A, B)` with `|u(z) − ω(|z|)| ≤ A + B·Im z` on the
/// samples. "Smallest" minimizes the mean bound `A + B·mean(Im z)` over
/// `A, B ≥ 0`; among ties the smaller `B` wins.
pub fn verify_h_bound(w: &BeurlingWeight, samples: &[Complex64], quad: &QuadSpec) -> Result<HBoundReport> {
    if let Some(z) = samples.iter().find(|z| !(z.im > 0.0)) {
        return Err(Error::domain(format!("H-bound sample {z} not in the upper half-plane")));
    }
    if samples.is_empty() {
        return Ok(HBoundReport {
            a_fit: 0.0,
            b_fit: 0.0,
            worst_residual: Witness { value: 0.0, at: [0.0, 0.0] },
            min_slack: 0.0,
            samples: 0,
        });
    }
    let mut pts = Vec::with_capacity(samples.len());
    for &z in samples {
        let res = (poisson_transform(w, z, quad)? - w.omega.eval_continued(z.norm())).abs();
        pts.push((z.im, res, z));
    }
    let worst = pts
        .iter()
        .fold(Witness { value: f64::NEG_INFINITY, at: [0.0, 0.0] }, |b, &(_, r, z)| {
            if r > b.value {
                Witness { value: r, at: [z.re, z.im] }
            } else {
                b
            }
        });
    let ys: Vec<(f64, f64)> = pts.iter().map(|&(y, r, _)| (y, r)).collect();
    let (a, b) = fit_linear_envelope(&ys);
    let min_slack = ys
        .iter()
        .map(|&(y, r)| a + b * y - r)
        .fold(f64::INFINITY, f64::min);
    Ok(HBoundReport { a_fit: a, b_fit: b, worst_residual: worst, min_slack, samples: samples.len() })
}

/// Minimizes `A + B·ȳ` subject to `A + B·yᵢ ≥ rᵢ`, `A, B ≥ 0`.
pub(crate) fn fit_linear_envelope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let ybar = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let feasible = |a: f64, b: f64| {
        a >= 0.0 && b >= 0.0 && pts.iter().all(|&(y, r)| a + b * y >= r - 1e-12 * (1.0 + r.abs()))
    };
    let rmax = pts.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let mut best = (rmax, 0.0);
    let mut best_obj = rmax;
    let mut consider = |a: f64, b: f64| {
        if !(a.is_finite() && b.is_finite()) || !feasible(a, b) {
            return;
        }
        let obj = a + b * ybar;
        if obj < best_obj - 1e-15 * best_obj.abs() || (obj <= best_obj && b < best.1) {
            best = (a, b);
            best_obj = obj;
        }
    };
    let bmax = pts
        .iter()
        .filter(|p| p.0 > 0.0)
        .map(|p| p.1 / p.0)
        .fold(0.0f64, f64::max);
    consider(0.0, bmax);

    // Upper hull of the residual cloud; optimal lines pass along its edges.
    let mut sorted: Vec<(f64, f64)> = pts.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.total_cmp(&p.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        if hull.last().is_some_and(|h| h.0 == p.0) {
            continue;
        }
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    for e in hull.windows(2) {
        let b = (e[1].1 - e[0].1) / (e[1].0 - e[0].0);
        let a = e[0].1 - b * e[0].0;
        consider(a, b);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn omega_examples() {
        let ls = BeurlingWeight::log_shift(1.0).unwrap();
        assert_eq!(ls.omega(0.0).unwrap(), 0.0);
        assert_eq!(BeurlingWeight::power(0.5).unwrap().omega(4.0).unwrap(), 2.0);
        assert!((BeurlingWeight::log_square().omega(1.0).unwrap() - LN_2).abs() < 1e-15);
    }

    #[test]
    fn omega_rejects_negative_and_out_of_range() {
        let ls = BeurlingWeight::log_shift(1.0).unwrap();
        assert!(matches!(ls.omega(-1.0), Err(Error::Domain(_))));
        let tab = BeurlingWeight::tabulated(&[[0.0, 0.0], [10.0, 2.0]]).unwrap();
        assert!((tab.omega(5.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(tab.omega(10.5), Err(Error::Range { .. })));
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(BeurlingWeight::power(1.0).is_err());
        assert!(BeurlingWeight::power(0.0).is_err());
        assert!(BeurlingWeight::log_shift(0.0).is_err());
        assert!(BeurlingWeight::tabulated(&[[0.0, 1.0], [1.0, 0.5]]).is_err());
        assert!(BeurlingWeight::tabulated(&[[1.0, 0.0], [2.0, 0.5]]).is_err());
        assert!(BeurlingWeight::tabulated(&[[0.0, 0.0], [0.0, 0.5]]).is_err());
    }

    #[test]
    fn p_examples() {
        let ls = BeurlingWeight::log_shift(1.0).unwrap();
        assert!((ls.p(c(0.0, 3.0)).unwrap() - (3.0 + 4f64.ln())).abs() < 1e-12);
        assert_eq!(ls.p(c(0.0, 0.0)).unwrap(), 0.0);
        let sq = BeurlingWeight::log_square();
        assert!((sq.p(c(1.0, 1.0)).unwrap() - (1.0 + 3f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn json_wire_format() {
        let w: BeurlingWeight = BeurlingWeight::from_spec(
            serde_json::from_str(r#"{"family":"power","gamma":0.5}"#).unwrap(),
        )
        .unwrap();
        assert_eq!(w.omega, OmegaProfile::Power { gamma: 0.5 });
        let s = serde_json::to_string(&OmegaProfile::LogSquare).unwrap();
        assert_eq!(s, r#"{"family":"log_square"}"#);
        let bad: std::result::Result<OmegaProfile, _> = serde_json::from_str(r#"{"family":"power","gamma":1.5}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn log_shift_is_subadditive() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let r = check_axioms(&w, &GridSpec::default(), &ToleranceSpec::default()).unwrap();
        assert!(r.subadd_excess.value <= 1e-15, "{:?}", r.subadd_excess);
        assert!(r.subadd_strict_pass && r.w1_pass && r.w2_pass && r.oscillation_pass);
        assert!((r.w1_constant.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_square_axioms() {
        let w = BeurlingWeight::log_square();
        let r = check_axioms(&w, &GridSpec::default(), &ToleranceSpec::default()).unwrap();
        // The excess at s = t = 1 is log 5 − 2 log 2; the grid sup is near log(4/3).
        let at_one = w.omega(2.0).unwrap() - 2.0 * w.omega(1.0).unwrap();
        assert!((at_one - 0.223_143_551_314_209_7).abs() < 1e-12);
        assert!(r.subadd_excess.value >= at_one && r.subadd_excess.value <= (4.0f64 / 3.0).ln() + 1e-12);
        assert!(!r.subadd_strict_pass && r.subadd_relaxed_pass);
        assert!((r.w2_integral - PI * LN_2).abs() < 1e-6, "{}", r.w2_integral);
        assert!(r.w2_refinement_delta < 1e-6 * (1.0 + r.w2_integral));
        assert!(r.w2_tail_bound >= r.w2_tail);
    }

    #[test]
    fn growth_constant_tends_to_one() {
        let w = BeurlingWeight::log_shift(1.0).unwrap();
        let r = check_axioms(&w, &GridSpec::default(), &ToleranceSpec::default()).unwrap();
        let cs: Vec<f64> = r.growth_d.iter().map(|e| e.constant).collect();
        assert!(cs.windows(2).all(|p| p[1] <= p[0] + 1e-12), "{cs:?}");
        assert!(*cs.last().unwrap() < 1.1);
        assert!(r.growth_c_constant.value.is_finite());
    }

    #[test]
    fn zero_profile_w1_fails() {
        let w = BeurlingWeight::tabulated(&[[0.0, 0.0], [2e4, 0.0]]).unwrap();
        let r = check_axioms(&w, &GridSpec::default(), &ToleranceSpec::default()).unwrap();
        assert!(!r.w1_pass);
        assert_eq!(r.w2_integral, 0.0);
        assert_eq!(r.w2_tail_kind, "constant_continuation");
    }

    #[test]
    fn axiom_grid_must_be_long_enough() {
        let w = BeurlingWeight::log_square();
        let g = GridSpec { t_max: 100.0, ..GridSpec::default() };
        assert!(check_axioms(&w, &g, &ToleranceSpec::default()).is_err());
    }

    #[test]
    fn poisson_transform_examples() {
        let q = QuadSpec::default();
        let zero = BeurlingWeight::tabulated(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(poisson_transform(&zero, c(0.0, 1.0), &q).unwrap(), 0.0);
        let sq = BeurlingWeight::log_square();
        assert!((poisson_transform(&sq, c(0.0, 1.0), &q).unwrap() - 2.0 * LN_2).abs() < 1e-8);
        // (2/π)·(π log 2 / 4 + Catalan)
        let catalan = 0.915_965_594_177_219_015;
        let expected = 2.0 / PI * (PI * LN_2 / 4.0 + catalan);
        let ls = BeurlingWeight::log_shift(1.0).unwrap();
        assert!((poisson_transform(&ls, c(0.0, 1.0), &q).unwrap() - expected).abs() < 1e-8);
        assert!((expected - 0.9297).abs() < 1e-3);
        assert!(poisson_transform(&ls, c(0.0, 0.0), &q).is_err());
    }

    #[test]
    fn poisson_transform_of_constant_is_constant() {
        let one = BeurlingWeight::tabulated(&[[0.0, 1.0], [5.0, 1.0]]).unwrap();
        let u = poisson_transform(&one, c(3.0, 0.25), &QuadSpec::default()).unwrap();
        assert!((u - 1.0).abs() < 1e-10);
    }

    #[test]
    fn h_bound_zero_profile() {
        let zero = BeurlingWeight::tabulated(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let s: Vec<_> = (0..5).map(|k| c(k as f64, 1.0 + k as f64)).collect();
        let r = verify_h_bound(&zero, &s, &QuadSpec::default()).unwrap();
        assert_eq!((r.a_fit, r.b_fit), (0.0, 0.0));
    }

    #[test]
    fn h_bound_rejects_lower_half_plane() {
        let w = BeurlingWeight::log_square();
        assert!(verify_h_bound(&w, &[c(0.0, -1.0)], &QuadSpec::default()).is_err());
    }

    #[test]
    fn envelope_fit_is_feasible_and_tight() {
        let pts = [(1.0, 2.0), (2.0, 2.5), (4.0, 5.0), (3.0, 1.0)];
        let (a, b) = fit_linear_envelope(&pts);
        assert!(pts.iter().all(|&(y, r)| a + b * y >= r - 1e-12));
        assert!(pts.iter().any(|&(y, r)| (a + b * y - r).abs() < 1e-12));
        let (a0, b0) = fit_linear_envelope(&[(1.0, 3.0), (1.0, 2.0)]);
        assert_eq!((a0, b0), (3.0, 0.0));
    }
}
