use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coarse::PhaseRule;
use crate::error::{Error, Result};
use crate::mc::{Channel, InitialState, RunSpec, DEFAULT_RESYNC_EVERY};
use crate::model::{HorizontalBc, Lattice, ModelParams, Scales, VerticalBc};

/// Prefix of environment overrides: `KAC__RUN__SWEEPS=500` sets
/// `sweeps` in `[run]`.
pub const ENV_PREFIX: &str = "KAC__";

const SECTIONS: &[(&str, &[&str])] = &[
    ("model", &["beta", "gamma", "A", "alpha", "a"]),
    ("lattice", &["width", "height", "horizontal_bc", "vertical_bc"]),
    (
        "run",
        &["sweeps", "burn_in", "seed", "measure_every", "replicas", "init", "channels", "decoupled", "resync_every"],
    ),
    ("scales", &["ell_minus", "ell_plus", "zeta"]),
    ("sweep", &["betas", "gammas", "A", "bcs", "max_site_sweeps"]),
    ("census", &["samples", "sample_every", "frame_blocks", "frame_layers", "phase_rule", "site"]),
    ("output", &["dir"]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub width: usize,
    pub height: usize,
    pub horizontal_bc: HorizontalBc,
    pub vertical_bc: VerticalBc,
}

fn one() -> usize {
    1
}

fn resync() -> usize {
    DEFAULT_RESYNC_EVERY
}

fn magnetization() -> Vec<Channel> {
    vec![Channel::Magnetization]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub sweeps: usize,
    #[serde(default)]
    pub burn_in: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub measure_every: usize,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default)]
    pub init: InitialState,
    #[serde(default = "magnetization")]
    pub channels: Vec<Channel>,
    #[serde(default)]
    pub decoupled: bool,
    #[serde(default = "resync")]
    pub resync_every: usize,
}

/// Boundary choice of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepBc {
    Plus,
    Minus,
    Periodic,
}

impl SweepBc {
    pub fn boundaries(self) -> (HorizontalBc, VerticalBc) {
        match self {
            SweepBc::Plus => (HorizontalBc::Plus, VerticalBc::Plus),
            SweepBc::Minus => (HorizontalBc::Minus, VerticalBc::Minus),
            SweepBc::Periodic => (HorizontalBc::Periodic, VerticalBc::Periodic),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            SweepBc::Plus => 1.0,
            SweepBc::Minus => -1.0,
            SweepBc::Periodic => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepBc::Plus => "plus",
            SweepBc::Minus => "minus",
            SweepBc::Periodic => "periodic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    #[serde(rename = "A")]
    pub vertical_exponents: Vec<f64>,
    pub bcs: Vec<SweepBc>,
    /// Cells needing more site updates than this are skipped.
    #[serde(default)]
    pub max_site_sweeps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusSection {
    pub samples: usize,
    #[serde(default = "one")]
    pub sample_every: usize,
    #[serde(default)]
    pub frame_blocks: usize,
    #[serde(default)]
    pub frame_layers: usize,
    #[serde(default)]
    pub phase_rule: PhaseRule,
    /// Site `(x, layer)` whose contour membership frequency is reported.
    #[serde(default)]
    pub site: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

/// A parsed and validated configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Scales>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<CensusSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Values derived from the model parameters, recorded in manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub ell_plus: usize,
    pub ell_minus: usize,
    pub zeta: f64,
    pub epsilon: f64,
    pub kac_range: usize,
    pub m_beta: f64,
}

impl Derived {
    pub fn of(params: &ModelParams) -> Self {
        Derived {
            ell_plus: params.ell_plus(),
            ell_minus: params.ell_minus(),
            zeta: params.zeta(),
            epsilon: params.epsilon(),
            kac_range: params.kac_range(),
            m_beta: crate::meanfield::solve_mbeta(params.beta()).m_beta,
        }
    }
}

fn override_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `KAC__SECTION__KEY=value` pairs to a raw table.
pub fn apply_overrides(table: &mut toml::Table, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    for (name, raw) in vars {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
        let Some((section, key)) = rest.split_once("__") else {
            return Err(Error::invalid(name.clone(), "override must look like KAC__SECTION__KEY"));
        };
        let (section, key) = (section.to_lowercase(), key.to_string());
        let key = SECTIONS
            .iter()
            .find(|(s, _)| *s == section)
            .and_then(|(_, keys)| keys.iter().find(|k| k.eq_ignore_ascii_case(&key)))
            .map(|k| k.to_string())
            .ok_or_else(|| Error::UnknownKey(format!("{section}.{}", key.to_lowercase())))?;
        let entry = table
            .entry(section.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key, override_value(&raw));
            }
            _ => return Err(Error::invalid(section, "is not a section")),
        }
    }
    Ok(())
}

fn check_keys(table: &toml::Table) -> Result<()> {
    for (section, value) in table {
        let keys = SECTIONS
            .iter()
            .find(|(s, _)| s == section)
            .map(|(_, k)| *k)
            .ok_or_else(|| Error::UnknownKey(section.clone()))?;
        let toml::Value::Table(inner) = value else {
            return Err(Error::invalid(section.clone(), "expected a [section]"));
        };
        if let Some(k) = inner.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Error::UnknownKey(format!("{section}.{k}")));
        }
    }
    Ok(())
}

impl Config {
    /// Parses TOML text after applying overrides from `vars`.
    pub fn parse_with(text: &str, vars: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::parse("config", e))?;
        apply_overrides(&mut table, vars)?;
        check_keys(&table)?;
        let model = table
            .get("model")
            .cloned()
            .ok_or_else(|| Error::invalid("model", "section [model] is required"))?;
        let raw: crate::model::RawParams = model
            .try_into()
            .map_err(|e: toml::de::Error| Error::parse("[model]", e.message()))?;
        ModelParams::try_from(raw)?;
        let config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::parse("config", e.message()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, std::iter::empty())
    }

    /// Reads `path`, honouring `KAC__*` environment overrides.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with(&text, std::env::vars())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = &self.lattice {
            Lattice::new(l.width, l.height, l.horizontal_bc, l.vertical_bc, self.model.kac_range())?;
            let needs_blocks = self.census.is_some()
                || self.run.as_ref().is_some_and(|r| {
                    r.channels
                        .iter()
                        .any(|c| matches!(c, Channel::BlockEtaHistogram | Channel::IntervalLengths))
                });
            if needs_blocks {
                crate::model::check_block_width(l.width, self.block_scales().ell_plus)?;
            }
        }
        if let Some(s) = &self.scales {
            Scales::new(s.ell_minus, s.ell_plus, s.zeta)?;
        }
        if self.run.is_some() {
            self.run_spec()?.validate()?;
        }
        if let Some(sw) = &self.sweep {
            for &b in &sw.betas {
                for &g in &sw.gammas {
                    for &a in &sw.vertical_exponents {
                        ModelParams::new(b, g, a, self.model.alpha(), self.model.accuracy())?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn block_scales(&self) -> Scales {
        self.scales.unwrap_or_else(|| self.model.scales())
    }

    pub fn lattice(&self) -> Result<Lattice> {
        let l = self
            .lattice
            .as_ref()
            .ok_or_else(|| Error::invalid("lattice", "section [lattice] is required"))?;
        Lattice::new(l.width, l.height, l.horizontal_bc, l.vertical_bc, self.model.kac_range())
    }

    pub fn run_spec(&self) -> Result<RunSpec> {
        let r = self.run.as_ref().ok_or_else(|| Error::invalid("run", "section [run] is required"))?;
        let mut spec = RunSpec::new(self.model, self.lattice()?, r.sweeps, r.burn_in, r.seed);
        spec.measure_every = r.measure_every;
        spec.replicas = r.replicas;
        spec.init = r.init;
        spec.measurements = r.channels.clone();
        spec.decoupled = r.decoupled;
        spec.resync_every = r.resync_every;
        spec.scales = self.scales;
        Ok(spec)
    }

    pub fn derived(&self) -> Derived {
        Derived::of(&self.model)
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
