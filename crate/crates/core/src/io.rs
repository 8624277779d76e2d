//! Readers and writers for the on-disk formats.
//!
//! Every parser takes untrusted text and reports failures as
//! [`Error::Parse`] naming the offending record.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conditions::Thresholds;
use crate::error::{Error, Result};
use crate::extension::Jet;
use crate::generators::FamilySpec;
use crate::variety::{Variety, WeightedPoint};
use crate::weights::{BeurlingWeight, WeightSpec};

fn parse_err(record: impl Into<String>, message: impl ToString) -> Error {
    Error::Parse { record: record.into(), message: message.to_string() }
}

fn json_err(what: &str, e: serde_json::Error) -> Error {
    parse_err(format!("{what} line {} column {}", e.line(), e.column()), e)
}

/// A parsed variety plus anything worth telling the user about it.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

fn finish_variety(points: Vec<WeightedPoint>, window: Option<f64>) -> Result<Parsed<Variety>> {
    for (i, p) in points.iter().enumerate() {
        if !(p.lambda.re.is_finite() && p.lambda.im.is_finite()) {
            return Err(parse_err(format!("point {i}"), "coordinates must be finite"));
        }
        if p.mult == 0 {
            return Err(parse_err(format!("point {i}"), "multiplicity must be at least 1"));
        }
    }
    let window = match window {
        Some(w) if !(w.is_finite() && w > 0.0) => {
            return Err(parse_err("window_radius", format!("must be positive, got {w}")))
        }
        Some(w) => w,
        None => points.iter().map(|p| p.lambda.norm()).fold(1.0, f64::max),
    };
    let variety = Variety::new(points, window).map_err(|e| parse_err("points", e))?;
    let mut warnings = Vec::new();
    if variety.merged_duplicates() > 0 {
        warnings.push(format!(
            "merged {} duplicate point(s) into their first occurrence, adding multiplicities",
            variety.merged_duplicates()
        ));
    }
    Ok(Parsed { value: variety, warnings })
}

pub fn parse_weight_json(text: &str) -> Result<BeurlingWeight> {
    let spec: WeightSpec = serde_json::from_str(text).map_err(|e| json_err("weight JSON", e))?;
    BeurlingWeight::from_spec(spec).map_err(|e| parse_err("weight", e))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    re: f64,
    im: f64,
    #[serde(default = "default_mult")]
    mult: u32,
}

fn default_mult() -> u32 {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarietyFile {
    points: Vec<PointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window_radius: Option<f64>,
}

/// `{"points":[{"re":..,"im":..,"mult":..}], "window_radius":..}`; `mult`
/// defaults to 1 and the window to the largest modulus (at least 1).
pub fn parse_variety_json(text: &str) -> Result<Parsed<Variety>> {
    let file: VarietyFile = serde_json::from_str(text).map_err(|e| json_err("variety JSON", e))?;
    let points = file
        .points
        .into_iter()
        .map(|p| WeightedPoint::new(Complex64::new(p.re, p.im), p.mult))
        .collect();
    finish_variety(points, file.window_radius)
}

pub fn variety_to_json(v: &Variety) -> String {
    let file = VarietyFile {
        points: v
            .points()
            .iter()
            .map(|p| PointRecord { re: p.lambda.re, im: p.lambda.im, mult: p.mult })
            .collect(),
        window_radius: Some(v.window_radius()),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
    s.push('\n');
    s
}

/// Rows `re,im[,mult]`, with an optional header row naming those columns.
pub fn parse_variety_csv(text: &str, window: Option<f64>) -> Result<Parsed<Variety>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(i as u64 + 1, |p| p.line());
            parse_err(format!("line {line}"), e)
        })?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let record = || format!("line {line}");
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            let names: Vec<&str> = rec.iter().collect();
            if names != ["re", "im"] && names != ["re", "im", "mult"] {
                return Err(parse_err(record(), format!("unexpected header {names:?}, want re,im[,mult]")));
            }
            continue;
        }
        if !(2..=3).contains(&rec.len()) {
            return Err(parse_err(record(), format!("expected 2 or 3 fields, found {}", rec.len())));
        }
        let num = |k: usize, name: &str| -> Result<f64> {
            let s = &rec[k];
            let v: f64 = s.parse().map_err(|_| parse_err(record(), format!("{name} {s:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(record(), format!("{name} must be finite")))
            }
        };
        let (re, im) = (num(0, "re")?, num(1, "im")?);
        let mult = match rec.get(2) {
            None | Some("") => 1,
            Some(s) => s
                .parse::<u32>()
                .ok()
                .filter(|&m| m >= 1)
                .ok_or_else(|| parse_err(record(), format!("mult {s:?} is not a positive integer")))?,
        };
        points.push(WeightedPoint::new(Complex64::new(re, im), mult));
    }
    finish_variety(points, window)
}

pub fn variety_to_csv(v: &Variety) -> String {
    let mut out = String::from("re,im,mult\n");
    for p in v.points() {
        out.push_str(&format!("{},{},{}\n", p.lambda.re, p.lambda.im, p.mult));
    }
    out
}

pub fn parse_family_json(text: &str) -> Result<FamilySpec> {
    serde_json::from_str(text).map_err(|e| json_err("family JSON", e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetRecord {
    re: f64,
    im: f64,
    values: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetFile {
    jets: Vec<JetRecord>,
}

/// `{"jets":[{"re":..,"im":..,"values":[[re,im],...]}]}`.
pub fn parse_jets_json(text: &str) -> Result<Vec<Jet>> {
    let file: JetFile = serde_json::from_str(text).map_err(|e| json_err("jets JSON", e))?;
    file.jets
        .into_iter()
        .enumerate()
        .map(|(i, j)| {
            if j.values.is_empty() {
                return Err(parse_err(format!("jet {i}"), "needs at least one value"));
            }
            Ok(Jet {
                lambda: Complex64::new(j.re, j.im),
                values: j.values.into_iter().map(|[a, b]| Complex64::new(a, b)).collect(),
            })
        })
        .collect()
}

/// Comma-separated, strictly increasing positive radii.
pub fn parse_radii(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, field) in text.split(',').enumerate() {
        let f = field.trim();
        let r: f64 = f
            .parse()
            .map_err(|_| parse_err(format!("radius {i}"), format!("{f:?} is not a number")))?;
        if !(r.is_finite() && r > 0.0) {
            return Err(parse_err(format!("radius {i}"), format!("{r} must be positive and finite")));
        }
        if out.last().is_some_and(|&prev| r <= prev) {
            return Err(parse_err(format!("radius {i}"), "radii must be strictly increasing"));
        }
        out.push(r);
    }
    Ok(out)
}

/// `"bounded,divergent"` slope thresholds.
pub fn parse_thresholds(text: &str) -> Result<Thresholds> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(parse_err("thresholds", "expected two comma-separated values"));
    }
    let num = |s: &str, name: &str| -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err("thresholds", format!("{name} {s:?} is not a finite number")))
    };
    let (bounded, divergent) = (num(parts[0], "bounded")?, num(parts[1], "divergent")?);
    if bounded > divergent {
        return Err(parse_err("thresholds", "bounded threshold exceeds divergent threshold"));
    }
    Ok(Thresholds { bounded, divergent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variety_json_round_trip() {
        let text = r#"{"points":[{"re":1.5,"im":-2,"mult":3},{"re":0,"im":0.1}],"window_radius":10}"#;
        let v = parse_variety_json(text).unwrap();
        assert!(v.warnings.is_empty());
        let again = parse_variety_json(&variety_to_json(&v.value)).unwrap().value;
        assert_eq!(again.points(), v.value.points());
        assert_eq!(again.window_radius(), 10.0);
    }

    #[test]
    fn variety_json_errors_name_record() {
        let e = parse_variety_json(r#"{"points":[{"re":1,"im":0,"mult":0}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Parse { record, .. } if record == "point 0"), "{e}");
        let e = parse_variety_json(r#"{"points":[{"re":1,"im":0,"extra":1}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Parse { record, .. } if record.starts_with("variety JSON line 1")));
        assert!(parse_variety_json(r#"{"points":[],"window_radius":-1}"#).is_err());
    }

    #[test]
    fn csv_with_and_without_header() {
        let a = parse_variety_csv("re,im,mult\n1,2,1\n3,4\n", None).unwrap();
        let b = parse_variety_csv("1,2\n3,4,1\n", None).unwrap();
        assert_eq!(a.value.points(), b.value.points());
        assert_eq!(a.value.window_radius(), 5.0);
        let dup = parse_variety_csv("1,2\n1,2,2\n", Some(10.0)).unwrap();
        assert_eq!(dup.value.points()[0].mult, 3);
        assert_eq!(dup.warnings.len(), 1);
        let e = parse_variety_csv("re,im\n1,2\n3,x\n", None).unwrap_err();
        assert!(matches!(&e, Error::Parse { record, .. } if record == "line 3"), "{e}");
        assert!(parse_variety_csv("1,2,0\n", None).is_err());
        assert!(parse_variety_csv("1,2,3,4\n", None).is_err());
        assert!(parse_variety_csv("1,inf\n", None).is_err());
    }

    #[test]
    fn weight_family_jets() {
        let w = parse_weight_json(r#"{"family":"log_shift","a":1}"#).unwrap();
        assert!((w.omega(1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(parse_weight_json(r#"{"family":"power","gamma":1.5}"#).is_err());
        assert!(parse_family_json(r#"{"family":"geometric_ray","ratio":2,"count":4}"#).is_ok());
        let j = parse_jets_json(r#"{"jets":[{"re":0,"im":0,"values":[[1,0],[0,2]]}]}"#).unwrap();
        assert_eq!(j[0].values, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]);
        assert!(parse_jets_json(r#"{"jets":[{"re":0,"im":0,"values":[]}]}"#).is_err());
    }

    #[test]
    fn radii_and_thresholds() {
        assert_eq!(parse_radii("1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(parse_radii("1,1").is_err());
        assert!(parse_radii("1,-2").is_err());
        assert!(parse_radii("").is_err());
        let t = parse_thresholds("0.05,0.2").unwrap();
        assert_eq!((t.bounded, t.divergent), (0.05, 0.2));
        assert!(parse_thresholds("0.3,0.2").is_err());
        assert!(parse_thresholds("0.3").is_err());
    }
}
