//! The combined report behind `beurling check`.

use serde::{Deserialize, Serialize};

use crate::conditions::{condition_report, split_regions, ConditionReport, ScanSpec, Thresholds};
use crate::error::Result;
use crate::halfplane::{bu_necessity_report, BuNecessityReport, HalfPlaneVariety};
use crate::variety::{SeparationProfile, Variety};
use crate::weights::{BeurlingWeight, WeightSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub weight: WeightSpec,
    pub points: usize,
    pub total_multiplicity: u64,
    pub window_radius: f64,
    pub warnings: Vec<String>,
    pub conditions: ConditionReport,
    /// `None` for fewer than two points.
    pub separation: Option<SeparationProfile>,
    /// Blaschke-sum necessity scan for the points above the strip.
    pub necessity_upper: BuNecessityReport,
    /// Same for the points below, reflected into the upper half-plane.
    pub necessity_lower: BuNecessityReport,
}

impl CheckReport {
    /// Pretty JSON with a trailing newline; field order is fixed, so equal
    /// inputs give identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

pub fn check(
    v: &Variety,
    w: &BeurlingWeight,
    radii: &[f64],
    th: &Thresholds,
    scan: &ScanSpec,
    warnings: Vec<String>,
) -> Result<CheckReport> {
    let conditions = condition_report(v, w, radii, th, scan)?;
    let separation = if v.len() >= 2 { Some(v.separation_profile(w)?) } else { None };
    let split = split_regions(v, w)?;
    let upper = HalfPlaneVariety::from_upper(&split.lambda_plus)?;
    let lower = HalfPlaneVariety::from_lower(&split.lambda_minus)?;
    Ok(CheckReport {
        weight: w.spec(),
        points: v.len(),
        total_multiplicity: v.total_multiplicity(),
        window_radius: v.window_radius(),
        warnings,
        conditions,
        separation,
        necessity_upper: bu_necessity_report(&upper, w, radii, th)?,
        necessity_lower: bu_necessity_report(&lower, w, radii, th)?,
    })
}
