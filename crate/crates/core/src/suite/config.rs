//! TOML run configuration, schema version 1.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::engine::McSpec;
use crate::events::{count_event, linear_event, CountRelation, EventSet, LinearWeight};
use crate::space::{PointSpace, QuadSpec, Region};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides `mc.seed`.
pub const SEED_ENV: &str = "POISSON_VERIFY_SEED";

pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Identities,
    Kernels,
    Boundaries,
    Coarea,
    MargulisRusso,
    Deviation,
    Profiles,
    Inequalities,
    Clark,
}

impl SuiteName {
    pub const ALL: [SuiteName; 9] = [
        SuiteName::Identities,
        SuiteName::Kernels,
        SuiteName::Boundaries,
        SuiteName::Coarea,
        SuiteName::MargulisRusso,
        SuiteName::Deviation,
        SuiteName::Profiles,
        SuiteName::Inequalities,
        SuiteName::Clark,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Identities => "identities",
            SuiteName::Kernels => "kernels",
            SuiteName::Boundaries => "boundaries",
            SuiteName::Coarea => "coarea",
            SuiteName::MargulisRusso => "margulis_russo",
            SuiteName::Deviation => "deviation",
            SuiteName::Profiles => "profiles",
            SuiteName::Inequalities => "inequalities",
            SuiteName::Clark => "clark",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDecl {
    pub sides: Vec<f64>,
    pub total_mass: f64,
}

impl Default for SpaceDecl {
    fn default() -> Self {
        SpaceDecl {
            sides: vec![1.0],
            total_mass: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClarkDecl {
    pub n_outer: usize,
    pub m: usize,
    pub n_inner: usize,
}

impl Default for ClarkDecl {
    fn default() -> Self {
        ClarkDecl {
            n_outer: 1000,
            m: 32,
            n_inner: 200,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDecl {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventDecl {
    /// `{ω(B) rel k}` with `B = [lower, upper]`, the whole space by default.
    Count {
        name: String,
        lower: Option<Vec<f64>>,
        upper: Option<Vec<f64>>,
        relation: CountRelation,
        k: i64,
    },
    /// `{Σ_{x∈ω} f(x) > threshold}`
    Linear {
        name: String,
        weight: LinearWeight,
        threshold: f64,
    },
}

impl EventDecl {
    pub fn name(&self) -> &str {
        match self {
            EventDecl::Count { name, .. } | EventDecl::Linear { name, .. } => name,
        }
    }

    pub fn build(&self, space: &PointSpace) -> Result<EventSet> {
        let ev = match self {
            EventDecl::Count {
                lower,
                upper,
                relation,
                k,
                ..
            } => {
                let full = space.full_region();
                let upper = upper.clone().unwrap_or(full.upper);
                let lower = lower.clone().unwrap_or_else(|| vec![0.0; upper.len()]);
                count_event(space, &Region::new(lower, upper)?, *relation, *k)?
            }
            EventDecl::Linear {
                weight, threshold, ..
            } => linear_event(weight, *threshold)?,
        };
        Ok(ev.with_label(self.name()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub suites: Vec<SuiteName>,
    #[serde(default = "unit_intensity")]
    pub intensity: f64,
    #[serde(default)]
    pub space: SpaceDecl,
    pub mc: McSpec,
    pub quad: QuadSpec,
    #[serde(default)]
    pub clark: ClarkDecl,
    #[serde(default)]
    pub events: Vec<EventDecl>,
    #[serde(default)]
    pub output: OutputDecl,
}

fn unit_intensity() -> f64 {
    1.0
}

impl RunConfig {
    /// Parses and validates; TOML syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok((RunConfig::parse(&text)?, text))
    }

    pub fn default_config() -> Self {
        RunConfig::parse(DEFAULT_CONFIG).expect("bundled config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.suites.is_empty() {
            return Err(Error::Config("at least one suite is required".into()));
        }
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(Error::InvalidIntensity(self.intensity));
        }
        self.mc.validate()?;
        self.quad.validate()?;
        if self.clark.m == 0 || self.clark.n_inner == 0 || self.clark.n_outer < 2 {
            return Err(Error::Config("clark needs m >= 1, n_inner >= 1, n_outer >= 2".into()));
        }
        let space = self.space()?;
        let mut names = std::collections::BTreeSet::new();
        for e in &self.events {
            if !names.insert(e.name()) {
                return Err(Error::Config(format!("duplicate event name '{}'", e.name())));
            }
            e.build(&space)
                .map_err(|err| Error::Config(format!("event '{}': {err}", e.name())))?;
        }
        if self.suites.contains(&SuiteName::Profiles) && self.events.is_empty() {
            return Err(Error::Config("the profiles suite needs at least one event".into()));
        }
        Ok(())
    }

    pub fn space(&self) -> Result<PointSpace> {
        PointSpace::new_box(self.space.sides.len(), &self.space.sides, self.space.total_mass)
    }

    pub fn events(&self) -> Result<Vec<EventSet>> {
        let space = self.space()?;
        self.events.iter().map(|e| e.build(&space)).collect()
    }

    /// Reads the seed override from the environment, if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.mc.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}='{v}' is not a u64")))?;
        }
        Ok(())
    }
}

/// Lower-case hex SHA-256 of the configuration text.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
