use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ncho_core::ep::{EpFamily, ExponentialFamily, RationalFamily};
use ncho_core::model::{NcParams, OscillatorConstants};
use ncho_core::qstate::QuantumNumbers;

use crate::args::{FamilyKind, Format, Preset, RunArgs, Suite};

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config file contents or parameters (exit 2).
    Config(String),
    /// A computation failed or a check did not pass (exit 1).
    Run(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Run(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "configuration error: {msg}"),
            Failure::Run(msg) => write!(f, "{msg}"),
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

const KEYS: &[&str] = &[
    "preset",
    "family",
    "sigma",
    "delta",
    "mu",
    "gamma",
    "cconst",
    "kconst",
    "chi",
    "korder",
    "small-delta",
    "n",
    "m",
    "t-start",
    "t-end",
    "samples",
    "mass",
    "omega",
    "theta",
    "omega-nc",
    "format",
    "out",
    "tol",
    "suite",
    "perturb-constraint",
    "basis",
];

/// Default tolerances by name.
pub const TOLERANCES: &[(&str, f64)] = &[
    ("ep", 1e-10),
    ("chiellini", 1e-12),
    ("laguerre", 1e-10),
    ("appendix-a", 1e-10),
    ("orthonormality", 1e-8),
    ("expectation", 1e-8),
    ("energy-assembly", 1e-12),
    ("invariance", 1e-6),
    ("control", 1e-2),
    ("nc-roundtrip", 1e-10),
    ("fixed-point", 1e-12),
];

/// Raw key=value settings before interpretation.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    tols: Vec<String>,
    suites: Vec<String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: String) -> Result<(), Failure> {
        match key {
            "tol" => self.tols.push(value),
            "suite" => self
                .suites
                .extend(value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty())),
            _ if KEYS.contains(&key) => {
                self.values.insert(key.to_string(), value);
            }
            _ => return Err(config_err(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Overlays `other`: its scalar keys win, list keys replace when present.
    pub fn overlay(&mut self, other: Settings) {
        self.values.extend(other.values);
        if !other.tols.is_empty() {
            self.tols.extend(other.tols);
        }
        if !other.suites.is_empty() {
            self.suites = other.suites;
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config file {}: {e}", path.display())))?;
        let mut out = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
            out.set(key.trim(), value.trim().to_string())
                .map_err(|e| config_err(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        Ok(out)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| config_err(format!("`{key}` = `{raw}` is not a valid number"))),
        }
    }

    fn required(&self, key: &str, family: &str) -> Result<f64, Failure> {
        self.number::<f64>(key)?
            .ok_or_else(|| config_err(format!("family `{family}` requires `{key}`")))
    }

    fn choice<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => T::from_str(raw, true)
                .map(Some)
                .map_err(|_| config_err(format!("`{key}` = `{raw}` is not a recognised value"))),
        }
    }
}

/// Settings from the optional config file overlaid with the flags.
pub fn gather(run: &RunArgs, extra: &[(&'static str, String)], suites: &[Suite]) -> Result<Settings, Failure> {
    let mut settings = match &run.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut flags = Settings::default();
    for (key, value) in run.pairs().into_iter().chain(extra.iter().cloned()) {
        flags.set(key, value)?;
    }
    flags.tols = run.tol.clone();
    flags.suites = suites.iter().map(crate::args::enum_name).collect();
    settings.overlay(flags);
    Ok(settings)
}

fn preset_defaults(preset: Preset) -> Settings {
    let pairs: &[(&str, &str)] = match preset {
        Preset::Fig1 => &[
            ("family", "exp"),
            ("sigma", "1"),
            ("delta", "1.25"),
            ("mu", "1"),
            ("gamma", "1"),
            ("cconst", "2"),
            ("kconst", "0"),
            ("n", "1"),
            ("m", "1"),
            ("t-end", "6"),
            ("samples", "61"),
        ],
        Preset::Fig2 => &[
            ("family", "rational"),
            ("sigma", "1"),
            ("delta", "2"),
            ("mu", "1"),
            ("gamma", "1"),
            ("chi", "1"),
            ("korder", "1"),
            ("small-delta", "1"),
            ("n", "1"),
            ("m", "1"),
            ("t-end", "10"),
            ("samples", "101"),
        ],
        Preset::Static => &[
            ("family", "static"),
            ("sigma", "1"),
            ("delta", "1"),
            ("n", "0"),
            ("m", "0"),
            ("t-end", "1"),
            ("samples", "11"),
        ],
        Preset::Roundtrip => &[("family", "roundtrip"), ("t-end", "10"), ("samples", "101")],
    };
    let mut out = Settings::default();
    for (k, v) in pairs {
        out.values.insert(k.to_string(), v.to_string());
    }
    out
}

/// Where the coefficients come from.
#[derive(Debug, Clone)]
pub enum Source {
    Family(EpFamily),
    /// Known (θ(t), Ω(t)) pushed through the coefficient map.
    Roundtrip,
}

#[derive(Debug, Clone)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|j| {
                if j + 1 == self.samples {
                    self.end
                } else {
                    self.start + (self.end - self.start) * j as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub family_kind: FamilyKind,
    settings: Settings,
    pub qn: QuantumNumbers,
    pub grid: TimeGrid,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
    pub osc: OscillatorConstants,
    pub nc: NcParams,
    pub suites: Vec<Suite>,
    pub perturb: Option<f64>,
    pub basis: usize,
}

impl RunConfig {
    pub fn resolve(user: Settings) -> Result<Self, Failure> {
        let preset: Option<Preset> = user.choice("preset")?;
        let mut settings = preset.map(preset_defaults).unwrap_or_default();
        settings.overlay(user);

        let family_kind = settings.choice("family")?.unwrap_or(FamilyKind::Exp);
        let n = settings.number::<u32>("n")?.unwrap_or(0);
        let m = settings.number::<u32>("m")?.unwrap_or(0);
        let grid = TimeGrid {
            start: settings.number("t-start")?.unwrap_or(0.0),
            end: settings.number("t-end")?.unwrap_or(10.0),
            samples: settings.number("samples")?.unwrap_or(101),
        };
        if !(grid.start.is_finite() && grid.end.is_finite()) || !(grid.end > grid.start) {
            return Err(config_err(format!(
                "time grid needs finite t-end > t-start (got t-start = {}, t-end = {})",
                grid.start, grid.end
            )));
        }
        if grid.samples < 2 {
            return Err(config_err(format!("samples must be at least 2 (got {})", grid.samples)));
        }
        let mut tolerances: BTreeMap<String, f64> = TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for entry in &settings.tols {
            let (name, value) = entry
                .split_once('=')
                .ok_or_else(|| config_err(format!("tolerance `{entry}` must be NAME=VAL")))?;
            let slot = tolerances
                .get_mut(name.trim())
                .ok_or_else(|| config_err(format!("unknown tolerance `{}`", name.trim())))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| config_err(format!("tolerance `{entry}` has an invalid value")))?;
            if !(value > 0.0) {
                return Err(config_err(format!("tolerance `{entry}` must be positive")));
            }
            *slot = value;
        }
        let osc = OscillatorConstants::new(
            settings.number("mass")?.unwrap_or(1.0),
            settings.number("omega")?.unwrap_or(1.0),
        )
        .map_err(|e| config_err(e.to_string()))?;
        let nc = NcParams::new(
            settings.number("theta")?.unwrap_or(0.0),
            settings.number("omega-nc")?.unwrap_or(0.0),
        )
        .map_err(|e| config_err(e.to_string()))?;
        let mut suites = Vec::new();
        for raw in &settings.suites {
            suites.push(Suite::from_str(raw, true).map_err(|_| config_err(format!("unknown suite `{raw}`")))?);
        }
        suites.sort();
        suites.dedup();
        let basis = settings.number::<usize>("basis")?.unwrap_or(40);
        if basis < 4 {
            return Err(config_err(format!("basis must be at least 4 (got {basis})")));
        }
        Ok(Self {
            family_kind,
            qn: QuantumNumbers::new(n, m),
            grid,
            format: settings.choice("format")?.unwrap_or(Format::Csv),
            out: settings.get("out").map(PathBuf::from),
            tolerances,
            osc,
            nc,
            suites,
            perturb: settings.number("perturb-constraint")?,
            basis,
            settings,
        })
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    /// Builds the selected family, checking its constraint.
    pub fn source(&self) -> Result<Source, Failure> {
        let s = &self.settings;
        let name = crate::args::enum_name(&self.family_kind);
        let built = match self.family_kind {
            FamilyKind::Roundtrip => return Ok(Source::Roundtrip),
            FamilyKind::Exp => {
                let (sigma, delta, mu, gamma, cconst) = (
                    s.required("sigma", &name)?,
                    s.required("delta", &name)?,
                    s.required("mu", &name)?,
                    s.required("gamma", &name)?,
                    s.required("cconst", &name)?,
                );
                match s.number::<f64>("kconst")? {
                    Some(k) => ExponentialFamily::new(sigma, delta, mu, gamma, cconst, k),
                    None => ExponentialFamily::with_derived_kconst(sigma, delta, mu, gamma, cconst),
                }
                .map(EpFamily::Exponential)
            }
            FamilyKind::Rational => {
                let k = s
                    .number::<u32>("korder")?
                    .ok_or_else(|| config_err("family `rational` requires `korder`"))?;
                let (sigma, delta, mu, gamma, chi) = (
                    s.required("sigma", &name)?,
                    s.required("delta", &name)?,
                    s.required("mu", &name)?,
                    s.required("gamma", &name)?,
                    s.required("chi", &name)?,
                );
                match s.number::<f64>("small-delta")? {
                    Some(d) => RationalFamily::new(sigma, delta, mu, gamma, chi, k, d),
                    None => RationalFamily::with_derived_small_delta(sigma, delta, mu, gamma, chi, k),
                }
                .map(EpFamily::Rational)
            }
            FamilyKind::Static => EpFamily::stationary(s.required("sigma", &name)?, s.required("delta", &name)?),
        };
        built.map(Source::Family).map_err(|e| config_err(e.to_string()))
    }

    pub fn family(&self) -> Result<EpFamily, Failure> {
        match self.source()? {
            Source::Family(f) => Ok(f),
            Source::Roundtrip => Err(config_err("the roundtrip source only applies to nc-recover")),
        }
    }
}
