//! `beurling`: condition reports, balayage profiles, regularization grids and
//! test families from the command line.
//!
//! Exit status is 0 on success (whatever the verdicts), 1 for bad input and
//! 2 when the numerics fail.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beurling_interp::conditions::{
    balayage_profile, balayage_sup, default_radii, split_regions, ScanSpec, Thresholds,
};
use beurling_interp::extension::SingularWeight;
use beurling_interp::generators::{generate, FamilySpec};
use beurling_interp::io::{
    parse_family_json, parse_radii, parse_thresholds, parse_variety_csv, parse_variety_json, parse_weight_json,
    variety_to_csv, variety_to_json, Parsed,
};
use beurling_interp::quad::QuadSpec;
use beurling_interp::regularization::RegularizedWeight;
use beurling_interp::report::check;
use beurling_interp::{BeurlingWeight, Complex64, Error, Variety};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "beurling", version, about = "Interpolation conditions for Beurling-weighted varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condition (a)/(b) sweeps, separation and Blaschke-sum scans as one JSON report.
    Check(CheckArgs),
    /// Poisson balayage of the points off the strip, sampled on the real line.
    ProfileBalayage(ProfileArgs),
    /// Grid of the regularized weight against the original one.
    Regularize(RegularizeArgs),
    /// Writes a generated family as a variety file.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Source {
    /// Variety file (`.csv` for CSV, anything else is read as JSON).
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    /// Family spec, inline JSON or a path to it.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Weight spec, inline JSON or a path to it.
    #[arg(long)]
    weight: String,
    #[command(flatten)]
    source: Source,
    /// Comma-separated truncation radii (default: 8 geometric radii from W/32 to W/2).
    #[arg(long)]
    radii: Option<String>,
    /// Slope thresholds `bounded,divergent`.
    #[arg(long, default_value = "0.05,0.2")]
    thresholds: String,
    /// Uniform grid size of each balayage sup scan.
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    weight: String,
    #[command(flatten)]
    source: Source,
    /// Left end of the sampled range (default: −W).
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<f64>,
    /// Right end of the sampled range (default: W).
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegularizeArgs {
    #[arg(long)]
    weight: String,
    /// Half-length of the tiled part of the real axis.
    #[arg(long, default_value_t = 1000.0)]
    range: f64,
    #[arg(long, default_value_t = -500.0, allow_hyphen_values = true)]
    xmin: f64,
    #[arg(long, default_value_t = 500.0, allow_hyphen_values = true)]
    xmax: f64,
    #[arg(long, default_value_t = 101)]
    nx: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ymin: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    ymax: f64,
    #[arg(long, default_value_t = 11)]
    ny: usize,
    /// With a variety, adds `psi = β p̃ + v` with `v` built at this `ε`.
    #[arg(long, requires = "beta")]
    eps: Option<f64>,
    #[arg(long, requires = "eps")]
    beta: Option<f64>,
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Family spec, inline JSON or a path to it.
    #[arg(long)]
    family: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn inline_or_file(arg: &str) -> Outcome<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::Input(format!("{arg}: {e}")))
    }
}

fn load_weight(arg: &str) -> Outcome<BeurlingWeight> {
    Ok(parse_weight_json(&inline_or_file(arg)?)?)
}

fn load_variety(src: &Source) -> Outcome<Option<Parsed<Variety>>> {
    if let Some(path) = &src.input {
        let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let parsed = if is_csv { parse_variety_csv(&text, None) } else { parse_variety_json(&text) };
        return parsed
            .map(Some)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())));
    }
    if let Some(f) = &src.family {
        let spec = parse_family_json(&inline_or_file(f)?)?;
        return Ok(Some(Parsed { value: generate(&spec)?, warnings: Vec::new() }));
    }
    Ok(None)
}

fn require_variety(src: &Source) -> Outcome<Parsed<Variety>> {
    load_variety(src)?.ok_or_else(|| Failure::Input("one of --input or --family is required".into()))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

fn run_check(a: &CheckArgs) -> Outcome<()> {
    let w = load_weight(&a.weight)?;
    let parsed = require_variety(&a.source)?;
    warn_all(&parsed.warnings);
    let v = parsed.value;
    let radii = match &a.radii {
        Some(r) => parse_radii(r)?,
        None => default_radii(v.window_radius()),
    };
    if radii.len() < 4 {
        return Err(Failure::Input("trend fitting needs at least 4 radii".into()));
    }
    let th: Thresholds = parse_thresholds(&a.thresholds)?;
    let scan = ScanSpec { samples: a.samples.max(2), ..ScanSpec::default() };
    let report = check(&v, &w, &radii, &th, &scan, parsed.warnings)?;
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => {
            let c = &report.conditions;
            let mut s = String::from("radius,constant_a,constant_a_punctured,constant_b,necessity_upper,necessity_lower\n");
            for i in 0..c.radii.len() {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    c.radii[i],
                    c.constants_a[i],
                    c.constants_a_punctured[i],
                    c.constants_b[i],
                    report.necessity_upper.constants[i],
                    report.necessity_lower.constants[i]
                ));
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

fn run_profile(a: &ProfileArgs) -> Outcome<()> {
    let w = load_weight(&a.weight)?;
    let parsed = require_variety(&a.source)?;
    warn_all(&parsed.warnings);
    let v = parsed.value;
    let wr = v.window_radius();
    let (xmin, xmax) = (a.xmin.unwrap_or(-wr), a.xmax.unwrap_or(wr));
    let ext = split_regions(&v, &w)?.exterior();
    let prof = balayage_profile(&ext, xmin, xmax, a.samples)?;
    let sup = balayage_sup(&ext, &ScanSpec { samples: a.samples, range: Some((xmin, xmax)), ..ScanSpec::default() })?;
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("kind,x,value\n");
            for (x, y) in prof.xs.iter().zip(&prof.values) {
                s.push_str(&format!("sample,{x},{y}\n"));
            }
            s.push_str(&format!("sup,{},{}\n", sup.x, sup.sup));
            s
        }
        Format::Json => {
            let body = serde_json::json!({ "profile": prof, "sup": sup });
            let mut s = serde_json::to_string_pretty(&body).expect("plain data serializes");
            s.push('\n');
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

fn fmt_value(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

fn run_regularize(a: &RegularizeArgs) -> Outcome<()> {
    let w = load_weight(&a.weight)?;
    if a.nx == 0 || a.ny == 0 {
        return Err(Failure::Input("grid sizes must be positive".into()));
    }
    let rw = RegularizedWeight::new(w, a.range, QuadSpec::default())?;
    let psi = match (a.eps, a.beta) {
        (Some(eps), Some(beta)) => {
            let parsed = require_variety(&a.source)?;
            warn_all(&parsed.warnings);
            Some((SingularWeight::new(&parsed.value, &rw, eps)?, beta))
        }
        _ => None,
    };
    let xs = linspace(a.xmin, a.xmax, a.nx);
    let ys = linspace(a.ymin, a.ymax, a.ny);
    let rows = beurling_interp::regularization::regularize_grid(&rw, &xs, &ys)?;
    let mut psis = Vec::new();
    if let Some((sw, beta)) = &psi {
        for r in &rows {
            let v = sw.eval(Complex64::new(r.x, r.y)).finite().unwrap_or(f64::NEG_INFINITY);
            psis.push(beta * r.p_tilde + v);
        }
    }
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("x,y,r,p_tilde,p,ratio");
            s.push_str(if psi.is_some() { ",psi\n" } else { "\n" });
            for (i, r) in rows.iter().enumerate() {
                s.push_str(&format!("{},{},{},{},{},{}", r.x, r.y, r.r, r.p_tilde, r.p, r.ratio));
                match psis.get(i) {
                    Some(p) => s.push_str(&format!(",{}\n", fmt_value(*p))),
                    None => s.push('\n'),
                }
            }
            s
        }
        Format::Json => {
            let body = serde_json::json!({ "rows": rows, "psi": psi.as_ref().map(|_| psis.iter().map(|p| fmt_value(*p)).collect::<Vec<_>>()) });
            let mut s = serde_json::to_string_pretty(&body).expect("plain data serializes");
            s.push('\n');
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

fn run_generate(a: &GenerateArgs) -> Outcome<()> {
    let spec: FamilySpec = parse_family_json(&inline_or_file(&a.family)?)?;
    let v = generate(&spec)?;
    let text = match a.format {
        Format::Json => variety_to_json(&v),
        Format::Csv => variety_to_csv(&v),
    };
    emit(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Check(a) => run_check(a),
        Command::ProfileBalayage(a) => run_profile(a),
        Command::Regularize(a) => run_regularize(a),
        Command::Generate(a) => run_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(2)
        }
    }
}
