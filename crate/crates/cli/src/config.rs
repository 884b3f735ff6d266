//! Run configuration: TOML file sections `[chain]`, `[coupling]`, `[sweep]`,
//! `[output]`, overridden field by field by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use cmf_core::ed::{MAX_SITES, THERMAL_MAX_SITES};
use cmf_core::FamilyKind;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cmf,
    Ed,
    Jw,
    Asymptotic,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Self::Cmf => "cmf",
            Self::Ed => "ed",
            Self::Jw => "jw",
            Self::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
pub enum Family {
    #[serde(rename = "powerlaw")]
    #[value(name = "powerlaw")]
    PowerLaw,
    #[serde(rename = "finite-range")]
    #[value(name = "finite-range")]
    FiniteRange,
    #[serde(rename = "lipkin")]
    #[value(name = "lipkin")]
    Lipkin,
    #[serde(rename = "nn")]
    #[value(name = "nn")]
    NearestNeighbor,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Self::PowerLaw => "powerlaw",
            Self::FiniteRange => "finite-range",
            Self::Lipkin => "lipkin",
            Self::NearestNeighbor => "nn",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Field,
    Temperature,
}

/// Separations to report: `"all"` or an explicit list.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Separations {
    Keyword(String),
    List(Vec<usize>),
}

impl std::str::FromStr for Separations {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::Keyword("all".into()));
        }
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("separation {p:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::List)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    chain: ChainSection,
    #[serde(default)]
    coupling: CouplingSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainSection {
    n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingSection {
    family: Option<Family>,
    alpha: Option<f64>,
    range: Option<usize>,
    chi: Option<f64>,
    vz: Option<f64>,
    vx: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    methods: Option<Vec<Method>>,
    axis: Option<SweepAxis>,
    b_min: Option<f64>,
    b_max: Option<f64>,
    steps: Option<usize>,
    temperature: Option<f64>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    b: Option<f64>,
    j: Option<Separations>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: Option<PathBuf>,
    max_points: Option<usize>,
    threads: Option<usize>,
}

/// Command-line overrides; every flag is optional so a file can supply it.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Method(s) to run; repeat or separate with commas
    #[arg(long = "method", value_enum, value_delimiter = ',')]
    pub methods: Vec<Method>,
    /// Number of spins in the ring
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Power-law exponent
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Range of the finite-range family
    #[arg(long)]
    pub range: Option<usize>,
    /// Anisotropy v^y/v^x
    #[arg(long)]
    pub chi: Option<f64>,
    /// Ratio v^z/v^x
    #[arg(long)]
    pub vz: Option<f64>,
    /// Overall coupling strength v^x (default 1)
    #[arg(long)]
    pub vx: Option<f64>,
    #[arg(long, value_enum)]
    pub axis: Option<SweepAxis>,
    /// Lowest field in units of b_c
    #[arg(long)]
    pub b_min: Option<f64>,
    /// Highest field in units of b_c
    #[arg(long)]
    pub b_max: Option<f64>,
    /// Number of sweep intervals (steps + 1 points)
    #[arg(long)]
    pub steps: Option<usize>,
    /// Temperature of a field sweep
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Fixed field of a temperature sweep, in units of b_c
    #[arg(long)]
    pub b: Option<f64>,
    /// Separations: "all" or a comma-separated list
    #[arg(long)]
    pub j: Option<Separations>,
    /// Output CSV path; standard output when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    /// `b/b_c` from `b_min` to `b_max` at fixed temperature.
    Field { b_min: f64, b_max: f64, steps: usize, temperature: f64 },
    /// Temperature from `t_min` to `t_max` at fixed `b/b_c`.
    Temperature { t_min: f64, t_max: f64, steps: usize, b: f64 },
}

impl Sweep {
    pub fn max_temperature(&self) -> f64 {
        match *self {
            Self::Field { temperature, .. } => temperature,
            Self::Temperature { t_min, t_max, .. } => t_min.max(t_max),
        }
    }

    pub fn steps(&self) -> usize {
        match *self {
            Self::Field { steps, .. } | Self::Temperature { steps, .. } => steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub methods: Vec<Method>,
    pub n: usize,
    pub family: Family,
    pub kind: FamilyKind,
    /// Power-law exponent or range, as reported in the CSV.
    pub alpha_or_range: f64,
    pub chi: f64,
    pub vz: f64,
    pub vx: f64,
    pub sweep: Sweep,
    pub separations: Vec<usize>,
    pub output: Option<PathBuf>,
    pub max_points: usize,
    pub threads: Option<usize>,
}

pub const DEFAULT_MAX_POINTS: usize = 100_000;

/// Reads the optional file, applies the flags and validates the result.
pub fn parse_config(file: Option<&Path>, flags: Overrides) -> Result<RunConfig, ConfigError> {
    let fc: FileConfig = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let FileConfig { chain, coupling, sweep, output } = fc;

    let mut methods = if flags.methods.is_empty() { sweep.methods.unwrap_or_default() } else { flags.methods };
    let mut seen = Vec::new();
    methods.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });
    if methods.is_empty() {
        return bad("sweep.methods: at least one method is required (--method)");
    }

    let family =
        flags.family.or(coupling.family).ok_or_else(|| ConfigError("coupling.family: required (--family)".into()))?;
    if methods.contains(&Method::Jw) && family != Family::NearestNeighbor {
        return bad(format!("coupling.family: jw needs the nn family, got {}", family.label()));
    }
    let n = flags.n.or(chain.n).ok_or_else(|| ConfigError("chain.n: required (--n)".into()))?;
    if n < 2 {
        return bad(format!("chain.n: need at least 2 spins, got {n}"));
    }
    let alpha = flags.alpha.or(coupling.alpha);
    let range = flags.range.or(coupling.range);
    let (kind, alpha_or_range) = match family {
        Family::PowerLaw => {
            if range.is_some() {
                return bad("coupling.range: only applies to the finite-range family");
            }
            let a = alpha.ok_or_else(|| ConfigError("coupling.alpha: required for powerlaw (--alpha)".into()))?;
            if !(a >= 0.0 && a.is_finite()) {
                return bad(format!("coupling.alpha: must be finite and >= 0, got {a}"));
            }
            (FamilyKind::PowerLaw { alpha: a }, a)
        }
        Family::FiniteRange => {
            if alpha.is_some() {
                return bad("coupling.alpha: only applies to the powerlaw family");
            }
            let l = range.ok_or_else(|| ConfigError("coupling.range: required for finite-range (--range)".into()))?;
            if l == 0 || l > n / 2 {
                return bad(format!("coupling.range: need 1 <= range <= n/2 = {}, got {l}", n / 2));
            }
            (FamilyKind::FiniteRangeConstant { range: l }, l as f64)
        }
        Family::Lipkin | Family::NearestNeighbor => {
            if alpha.is_some() || range.is_some() {
                return bad(format!("coupling: alpha/range do not apply to the {} family", family.label()));
            }
            let kind = if family == Family::Lipkin { FamilyKind::Lipkin } else { FamilyKind::NearestNeighbor };
            (kind, 0.0)
        }
    };
    let chi = flags.chi.or(coupling.chi).unwrap_or(0.0);
    let vz = flags.vz.or(coupling.vz).unwrap_or(0.0);
    let vx = flags.vx.or(coupling.vx).unwrap_or(1.0);
    if !(-1.0..=1.0).contains(&chi) {
        return bad(format!("coupling.chi: need -1 <= chi <= 1, got {chi}"));
    }
    if !(0.0..=1.0).contains(&vz) {
        return bad(format!("coupling.vz: need 0 <= vz <= 1, got {vz}"));
    }
    if !(vx >= 0.0 && vx.is_finite()) {
        return bad(format!("coupling.vx: must be finite and >= 0, got {vx}"));
    }

    let axis = flags.axis.or(sweep.axis).unwrap_or(SweepAxis::Field);
    let steps = flags.steps.or(sweep.steps).ok_or_else(|| ConfigError("sweep.steps: required (--steps)".into()))?;
    if steps < 1 {
        return bad("sweep.steps: must be >= 1");
    }
    let sweep_cfg = match axis {
        SweepAxis::Field => {
            let b_min =
                flags.b_min.or(sweep.b_min).ok_or_else(|| ConfigError("sweep.b_min: required (--b-min)".into()))?;
            let b_max =
                flags.b_max.or(sweep.b_max).ok_or_else(|| ConfigError("sweep.b_max: required (--b-max)".into()))?;
            if !(b_min <= b_max) {
                return bad(format!("sweep: need b_min <= b_max, got {b_min} > {b_max}"));
            }
            let temperature = flags.temperature.or(sweep.temperature).unwrap_or(0.0);
            if !(temperature >= 0.0 && temperature.is_finite()) {
                return bad(format!("sweep.temperature: must be >= 0, got {temperature}"));
            }
            Sweep::Field { b_min, b_max, steps, temperature }
        }
        SweepAxis::Temperature => {
            let t_min =
                flags.t_min.or(sweep.t_min).ok_or_else(|| ConfigError("sweep.t_min: required (--t-min)".into()))?;
            let t_max =
                flags.t_max.or(sweep.t_max).ok_or_else(|| ConfigError("sweep.t_max: required (--t-max)".into()))?;
            if !(0.0 <= t_min && t_min <= t_max && t_max.is_finite()) {
                return bad(format!("sweep: need 0 <= t_min <= t_max, got {t_min}, {t_max}"));
            }
            let b = flags
                .b
                .or(sweep.b)
                .ok_or_else(|| ConfigError("sweep.b: required for a temperature sweep (--b)".into()))?;
            if b == 1.0 {
                return bad("sweep.b: the fixed field coincides with b_c");
            }
            Sweep::Temperature { t_min, t_max, steps, b }
        }
    };

    let separations = match flags.j.or(sweep.j) {
        None => (1..=n / 2).collect(),
        Some(Separations::Keyword(k)) if k.eq_ignore_ascii_case("all") => (1..=n / 2).collect(),
        Some(Separations::Keyword(k)) => return bad(format!("sweep.j: expected \"all\" or a list, got {k:?}")),
        Some(Separations::List(js)) => {
            if js.is_empty() {
                return bad("sweep.j: empty list");
            }
            if let Some(j) = js.iter().find(|&&j| j == 0 || j >= n) {
                return bad(format!("sweep.j: separation {j} outside 1..{}", n - 1));
            }
            js
        }
    };

    let t_max = sweep_cfg.max_temperature();
    for &m in &methods {
        match m {
            Method::Ed if n > MAX_SITES => {
                return bad(format!("chain.n: ed supports n <= {MAX_SITES}, got {n}"));
            }
            Method::Ed if t_max > 0.0 && n > THERMAL_MAX_SITES => {
                return bad(format!("chain.n: ed at T > 0 supports n <= {THERMAL_MAX_SITES}, got {n}"));
            }
            Method::Jw if t_max > 0.0 => return bad("sweep: jw is restricted to T = 0"),
            Method::Jw if vz != 0.0 => return bad(format!("coupling.vz: jw needs vz = 0, got {vz}")),
            Method::Jw if n < 3 => return bad("chain.n: jw needs n >= 3"),
            _ => {}
        }
    }

    let max_points = flags.max_points.or(output.max_points).unwrap_or(DEFAULT_MAX_POINTS);
    // +1 for the inserted factorizing field
    let points = steps.saturating_add(2);
    if points > max_points {
        return bad(format!("output.max_points: sweep has up to {points} points, cap is {max_points}"));
    }
    let threads = flags.threads.or(output.threads);
    if threads == Some(0) {
        return bad("output.threads: must be >= 1");
    }

    Ok(RunConfig {
        methods,
        n,
        family,
        kind,
        alpha_or_range,
        chi,
        vz,
        vx,
        sweep: sweep_cfg,
        separations,
        output: flags.output.or(output.path),
        max_points,
        threads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Overrides {
        Overrides {
            methods: vec![Method::Cmf],
            n: Some(18),
            family: Some(Family::PowerLaw),
            alpha: Some(2.0),
            chi: Some(0.5),
            b_min: Some(0.0),
            b_max: Some(3.0),
            steps: Some(300),
            ..Default::default()
        }
    }

    #[test]
    fn minimal_flags_are_valid() {
        let c = parse_config(None, minimal()).unwrap();
        assert_eq!(c.methods, vec![Method::Cmf]);
        assert_eq!(c.kind, FamilyKind::PowerLaw { alpha: 2.0 });
        assert_eq!(c.sweep, Sweep::Field { b_min: 0.0, b_max: 3.0, steps: 300, temperature: 0.0 });
        assert_eq!(c.separations, (1..=9).collect::<Vec<_>>());
    }

    #[test]
    fn jw_needs_nearest_neighbors() {
        let flags = Overrides { methods: vec![Method::Jw], ..minimal() };
        let err = parse_config(None, flags).unwrap_err();
        assert!(err.0.contains("coupling.family"), "{err}");
    }

    #[test]
    fn ed_size_caps() {
        let flags = Overrides { methods: vec![Method::Ed], n: Some(22), ..minimal() };
        assert!(parse_config(None, flags).unwrap_err().0.contains("n <= 20"));
        let flags = Overrides { methods: vec![Method::Ed], n: Some(14), temperature: Some(0.1), ..minimal() };
        assert!(parse_config(None, flags).unwrap_err().0.contains("T > 0"));
    }

    #[test]
    fn zero_steps_and_misplaced_parameters_are_rejected() {
        assert!(parse_config(None, Overrides { steps: Some(0), ..minimal() }).is_err());
        let flags = Overrides { family: Some(Family::NearestNeighbor), ..minimal() };
        assert!(parse_config(None, flags).unwrap_err().0.contains("alpha/range"));
        let flags = Overrides { j: Some("0,3".parse().unwrap()), ..minimal() };
        assert!(parse_config(None, flags).unwrap_err().0.contains("separation 0"));
    }

    #[test]
    fn file_values_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "[chain]\nn = 10\n[coupling]\nfamily = \"nn\"\nchi = 0.5\n\
             [sweep]\nmethods = [\"cmf\", \"jw\"]\nb_min = 0.5\nb_max = 2.0\nsteps = 4\nj = [1, 2]\n",
        )
        .unwrap();
        let c = parse_config(Some(&path), Overrides::default()).unwrap();
        assert_eq!((c.n, c.family, c.separations.clone()), (10, Family::NearestNeighbor, vec![1, 2]));
        let c = parse_config(Some(&path), Overrides { n: Some(12), ..Default::default() }).unwrap();
        assert_eq!(c.n, 12);
        assert_eq!(c.methods, vec![Method::Cmf, Method::Jw]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[chain]\nn = 10\nspins = 3\n").unwrap();
        let err = parse_config(Some(&path), minimal()).unwrap_err();
        assert!(err.0.contains("spins"), "{err}");
    }
}
