//! INI run configuration, parsed strictly and validated before any
//! computation starts.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use ini::{Ini, Properties};

use crate::grid::{GridScheme, RadialGrid, DEFAULT_R_SWITCH};
use crate::potential::{PotentialSpec, Table};
use crate::resonance::ResonanceParams;
use crate::timedelay::DelayMode;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Parsed<T> = std::result::Result<T, ConfigError>;

fn fail<T>(msg: impl Into<String>) -> Parsed<T> {
    Err(ConfigError(msg.into()))
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("potential", &["kind", "radius", "depth", "charge", "screening", "table"]),
    ("grid", &["r_max", "n_points", "step", "scheme", "r_switch"]),
    ("scan", &["ell", "e_min", "e_max", "n_energies", "spacing"]),
    ("bound", &["ell", "e_min", "e_max", "n_max"]),
    ("resonance", &["ell", "window_lo", "window_hi", "large_q", "source", "e_r", "gamma", "q", "sigma_0", "sigma_a"]),
    ("delay", &["ell", "mode", "range"]),
    (
        "photo",
        &[
            "ell",
            "nodes",
            "bound_e_min",
            "e_min",
            "e_max",
            "n_energies",
            "spacing",
            "step",
            "threshold_e_min",
            "threshold_decades",
            "threshold_points",
        ],
    ),
    ("wkb", &["ell", "energies", "fractions", "k_min", "k_points"]),
    ("output", &["directory", "formats"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn parse_list(text: &str) -> Parsed<BTreeSet<Format>> {
        let mut out = BTreeSet::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.insert(match item {
                "csv" => Format::Csv,
                "json" => Format::Json,
                "svg" => Format::Svg,
                other => return fail(format!("unknown output format '{other}'")),
            });
        }
        if out.is_empty() {
            return fail("no output format selected");
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid {
    pub e_min: f64,
    pub e_max: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl EnergyGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.e_min + (self.e_max - self.e_min) * t,
                    Spacing::Log => self.e_min * (self.e_max / self.e_min).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub ells: Vec<u32>,
    pub energies: EnergyGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    pub ells: Vec<u32>,
    pub window: (f64, f64),
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResonanceSource {
    Computed,
    Synthetic(ResonanceParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceConfig {
    pub ell: u32,
    pub window: Option<(f64, f64)>,
    pub large_q: f64,
    pub source: ResonanceSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayConfig {
    pub ells: Vec<u32>,
    pub mode: DelayMode,
    pub range: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotoConfig {
    pub ell: u32,
    pub nodes: usize,
    pub bound_e_min: f64,
    pub energies: EnergyGrid,
    pub step: f64,
    pub threshold: EnergyGrid,
    pub threshold_decades: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WkbConfig {
    pub ell: u32,
    pub energies: Vec<f64>,
    pub fractions: Vec<f64>,
    pub k_min: f64,
    pub k_points: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub grid: RadialGrid,
    pub scan: Option<ScanConfig>,
    pub bound: Option<BoundConfig>,
    pub resonance: Option<ResonanceConfig>,
    pub delay: Option<DelayConfig>,
    pub photo: Option<PhotoConfig>,
    pub wkb: Option<WkbConfig>,
    pub output_dir: Option<PathBuf>,
    pub formats: Option<BTreeSet<Format>>,
}

struct Section<'a> {
    name: &'a str,
    props: &'a Properties,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.props.get(key).map(str::trim)
    }

    fn f64_opt(&self, key: &str) -> Parsed<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => fail(format!("[{}] {key} = '{v}' is not a finite number", self.name)),
            },
        }
    }

    fn f64(&self, key: &str) -> Parsed<f64> {
        self.f64_opt(key)?.map_or_else(|| fail(format!("[{}] missing key {key}", self.name)), Ok)
    }

    fn f64_or(&self, key: &str, default: f64) -> Parsed<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_opt(&self, key: &str) -> Parsed<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .or_else(|_| fail(format!("[{}] {key} = '{v}' is not a non-negative integer", self.name))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Parsed<usize> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    fn ell(&self) -> Parsed<u32> {
        let list = self.ells()?;
        if list.len() != 1 {
            return fail(format!("[{}] ell must be a single value", self.name));
        }
        Ok(list[0])
    }

    fn ells(&self) -> Parsed<Vec<u32>> {
        let v = self.raw("ell").map_or_else(|| fail(format!("[{}] missing key ell", self.name)), Ok)?;
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim) {
            match item.parse::<u32>() {
                Ok(l) if l <= 60 => out.push(l),
                _ => return fail(format!("[{}] ell entry '{item}' is not an integer in 0..=60", self.name)),
            }
        }
        let mut sorted = out.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != out.len() {
            return fail(format!("[{}] ell list has duplicates", self.name));
        }
        Ok(out)
    }

    fn list(&self, key: &str) -> Parsed<Vec<f64>> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => fail(format!("[{}] {key} entry '{s}' is not a finite number", self.name)),
                })
                .collect(),
        }
    }

    fn energy_grid(&self, default_n: usize, min_n: usize) -> Parsed<EnergyGrid> {
        let e_min = self.f64("e_min")?;
        let e_max = self.f64("e_max")?;
        let n = self.usize_or("n_energies", default_n)?;
        let spacing = match self.raw("spacing").unwrap_or("linear") {
            "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => return fail(format!("[{}] spacing '{other}' is neither linear nor log", self.name)),
        };
        if !(e_min > 0.0) {
            return fail(format!("[{}] e_min must be > 0, got {e_min}", self.name));
        }
        if !(e_max > e_min) {
            return fail(format!("[{}] e_max must exceed e_min", self.name));
        }
        if n < min_n {
            return fail(format!("[{}] n_energies must be at least {min_n}", self.name));
        }
        Ok(EnergyGrid { e_min, e_max, n, spacing })
    }
}

fn positive(section: &str, key: &str, v: f64) -> Parsed<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        fail(format!("[{section}] {key} must be > 0, got {v}"))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Parsed<Self> {
        let text = std::fs::read_to_string(path).or_else(|e| fail(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parse and validate; `base` resolves relative table paths.
    pub fn parse(text: &str, base: &Path) -> Parsed<Self> {
        let ini = Ini::load_from_str(text).or_else(|e| fail(format!("parse error: {e}")))?;
        let mut seen = BTreeSet::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return fail(format!("key '{k}' outside any section"));
                }
                continue;
            };
            let Some((_, allowed)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
                return fail(format!("unknown section [{name}]"));
            };
            if !seen.insert(name.to_string()) {
                return fail(format!("duplicate section [{name}]"));
            }
            let mut keys = BTreeSet::new();
            for (k, _) in props.iter() {
                if !allowed.contains(&k) {
                    return fail(format!("unknown key '{k}' in [{name}]"));
                }
                if !keys.insert(k) {
                    return fail(format!("duplicate key '{k}' in [{name}]"));
                }
            }
        }
        let section = |name: &'static str| ini.section(Some(name)).map(|props| Section { name, props });

        let pot = section("potential").map_or_else(|| fail("missing [potential] section"), Ok)?;
        let potential = parse_potential(&pot, base)?;
        let grid = match section("grid") {
            Some(g) => parse_grid(&g)?,
            None => return fail("missing [grid] section"),
        };

        let scan = section("scan")
            .map(|s| -> Parsed<ScanConfig> { Ok(ScanConfig { ells: s.ells()?, energies: s.energy_grid(200, 3)? }) })
            .transpose()?;
        if let Some(s) = &scan {
            check_extent(&potential, &grid, s.energies.e_min)?;
        }

        let bound = section("bound")
            .map(|s| -> Parsed<BoundConfig> {
                let window = (s.f64("e_min")?, s.f64("e_max")?);
                if !(window.0 < window.1 && window.1 < 0.0) {
                    return fail("[bound] need e_min < e_max < 0");
                }
                Ok(BoundConfig { ells: s.ells()?, window, n_max: s.usize_or("n_max", 32)? })
            })
            .transpose()?;

        let resonance = section("resonance").map(|s| parse_resonance(&s)).transpose()?;
        if resonance.is_some() && scan.is_none() {
            return fail("[resonance] needs a [scan] section for its energy grid");
        }

        let delay = section("delay")
            .map(|s| -> Parsed<DelayConfig> {
                let mode = match s.raw("mode").unwrap_or("full") {
                    "full" => DelayMode::FullScattering,
                    "half" => DelayMode::HalfScattering,
                    other => return fail(format!("[delay] mode '{other}' is neither full nor half")),
                };
                let range = s.f64_opt("range")?.map(|r| positive("delay", "range", r)).transpose()?;
                Ok(DelayConfig { ells: s.ells()?, mode, range })
            })
            .transpose()?;
        if delay.is_some() && scan.is_none() {
            return fail("[delay] needs a [scan] section for its energy grid");
        }

        let photo = section("photo").map(|s| parse_photo(&s)).transpose()?;
        let wkb = section("wkb").map(|s| parse_wkb(&s)).transpose()?;

        let (output_dir, formats) = match section("output") {
            Some(o) => {
                (o.raw("directory").map(|d| base.join(d)), o.raw("formats").map(Format::parse_list).transpose()?)
            }
            None => (None, None),
        };

        Ok(Self { potential, grid, scan, bound, resonance, delay, photo, wkb, output_dir, formats })
    }
}

fn parse_potential(s: &Section, base: &Path) -> Parsed<PotentialSpec> {
    let kind = s.raw("kind").map_or_else(|| fail("[potential] missing key kind"), Ok)?;
    let allowed: &[&str] = match kind {
        "zero" => &["kind"],
        "hard_sphere" => &["kind", "radius"],
        "square_well" => &["kind", "radius", "depth"],
        "yukawa" => &["kind", "charge", "screening"],
        "table" => &["kind", "table"],
        other => return fail(format!("[potential] unknown kind '{other}'")),
    };
    if let Some((k, _)) = s.props.iter().find(|(k, _)| !allowed.contains(k)) {
        return fail(format!("[potential] key '{k}' does not apply to kind {kind}"));
    }
    let spec = match kind {
        "zero" => Ok(PotentialSpec::zero()),
        "hard_sphere" => PotentialSpec::hard_sphere(s.f64("radius")?),
        "square_well" => PotentialSpec::square_well(s.f64("depth")?, s.f64("radius")?),
        "yukawa" => PotentialSpec::yukawa(s.f64("charge")?, s.f64("screening")?),
        _ => {
            let file = base.join(s.raw("table").map_or_else(|| fail("[potential] missing key table"), Ok)?);
            let text = std::fs::read_to_string(&file)
                .or_else(|e| fail(format!("cannot read table {}: {e}", file.display())))?;
            Table::parse(&text).and_then(PotentialSpec::tabulated)
        }
    };
    spec.map_err(|e| ConfigError(e.to_string()))
}

fn parse_grid(s: &Section) -> Parsed<RadialGrid> {
    let r_max = s.f64("r_max")?;
    let r_switch = s.f64_or("r_switch", DEFAULT_R_SWITCH)?;
    let scheme = match s.raw("scheme").unwrap_or("log_uniform") {
        "log_uniform" => GridScheme::LogThenUniform { r_switch },
        "uniform" => GridScheme::Uniform,
        other => return fail(format!("[grid] scheme '{other}' is neither log_uniform nor uniform")),
    };
    let grid = match (s.usize_opt("n_points")?, s.f64_opt("step")?) {
        (Some(n), None) => RadialGrid::new(r_max, n, scheme),
        (None, Some(step)) => match scheme {
            GridScheme::Uniform => {
                RadialGrid::uniform(r_max, (r_max / positive("grid", "step", step)?).ceil() as usize)
            }
            GridScheme::LogThenUniform { r_switch } => RadialGrid::log_with_step(r_max, step, r_switch),
        },
        _ => return fail("[grid] give exactly one of n_points or step"),
    };
    grid.map_err(|e| ConfigError(e.to_string()))
}

fn check_extent(spec: &PotentialSpec, grid: &RadialGrid, e_min: f64) -> Parsed<()> {
    let required = spec.range_radius() + 4.0 * std::f64::consts::PI / (2.0 * e_min).sqrt();
    if grid.r_max < required {
        return fail(format!(
            "[grid] r_max = {} is too short for E = {e_min}: matching needs at least {required:.6}",
            grid.r_max
        ));
    }
    Ok(())
}

fn parse_resonance(s: &Section) -> Parsed<ResonanceConfig> {
    let window = match (s.f64_opt("window_lo")?, s.f64_opt("window_hi")?) {
        (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
        (None, None) => None,
        _ => return fail("[resonance] need both window_lo < window_hi or neither"),
    };
    let large_q = positive("resonance", "large_q", s.f64_or("large_q", 1e3)?)?;
    let synth_keys = ["e_r", "gamma", "q", "sigma_0", "sigma_a"];
    let source = match s.raw("source").unwrap_or("computed") {
        "computed" => {
            if let Some(k) = synth_keys.iter().find(|k| s.raw(k).is_some()) {
                return fail(format!("[resonance] key '{k}' only applies to source = synthetic"));
            }
            ResonanceSource::Computed
        }
        "synthetic" => {
            let p = ResonanceParams {
                e_r: s.f64("e_r")?,
                gamma: positive("resonance", "gamma", s.f64("gamma")?)?,
                q: s.f64("q")?,
                sigma_0: s.f64("sigma_0")?,
                sigma_a: s.f64("sigma_a")?,
            };
            ResonanceSource::Synthetic(p)
        }
        other => return fail(format!("[resonance] source '{other}' is neither computed nor synthetic")),
    };
    let ell = match (&source, s.raw("ell")) {
        (ResonanceSource::Synthetic(_), None) => 0,
        _ => s.ell()?,
    };
    Ok(ResonanceConfig { ell, window, large_q, source })
}

fn parse_photo(s: &Section) -> Parsed<PhotoConfig> {
    let ell = s.ell()?;
    let nodes = s.usize_or("nodes", 0)?;
    let bound_e_min = s.f64_or("bound_e_min", -100.0)?;
    if !(bound_e_min < 0.0) {
        return fail("[photo] bound_e_min must be negative");
    }
    let energies = s.energy_grid(120, 3)?;
    let step = positive("photo", "step", s.f64_or("step", 0.005)?)?;
    let t_min = positive("photo", "threshold_e_min", s.f64_or("threshold_e_min", 1e-4)?)?;
    let decades = positive("photo", "threshold_decades", s.f64_or("threshold_decades", 1.0)?)?;
    let points = s.usize_or("threshold_points", 12)?;
    if points < 10 {
        return fail("[photo] threshold_points must be at least 10");
    }
    let threshold = EnergyGrid { e_min: t_min, e_max: t_min * 10f64.powf(decades), n: points, spacing: Spacing::Log };
    Ok(PhotoConfig { ell, nodes, bound_e_min, energies, step, threshold, threshold_decades: decades })
}

fn parse_wkb(s: &Section) -> Parsed<WkbConfig> {
    let energies = s.list("energies")?;
    let fractions = s.list("fractions")?;
    if energies.is_empty() && fractions.is_empty() {
        return fail("[wkb] give energies and/or fractions");
    }
    if let Some(e) = energies.iter().find(|e| !(**e > 0.0)) {
        return fail(format!("[wkb] energies must be > 0, got {e}"));
    }
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0)) {
        return fail(format!("[wkb] fractions must be > 0, got {f}"));
    }
    let k_min = positive("wkb", "k_min", s.f64_or("k_min", 1e-3)?)?;
    let k_points = s.usize_or("k_points", 11)?;
    if k_points < 10 {
        return fail("[wkb] k_points must be at least 10");
    }
    Ok(WkbConfig { ell: s.ell()?, energies, fractions, k_min, k_points })
}
