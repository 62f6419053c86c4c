use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Manufactured solution on the split unit square, refinement sequence.
    Mms,
    WellboreVertical,
    WellboreHorizontal,
    /// Horizontal wellbore with per-cell random permeabilities.
    RandomPerm,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Mms,
        Scenario::WellboreVertical,
        Scenario::WellboreHorizontal,
        Scenario::RandomPerm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Mms => "mms",
            Scenario::WellboreVertical => "wellbore-vertical",
            Scenario::WellboreHorizontal => "wellbore-horizontal",
            Scenario::RandomPerm => "random-perm",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario `{s}` (expected one of mms, wellbore-vertical, wellbore-horizontal, random-perm)"
                ))
            })
    }
}

/// Fully resolved run configuration. Serialized as the `[config]` table of
/// the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Polynomial degree.
    pub k: usize,
    /// Interior penalty.
    pub beta: f64,
    /// Number of refinement levels (mms only).
    pub levels: usize,
    /// Grid intervals per unit length; the coarsest level for mms.
    pub n: usize,
    pub mu: f64,
    pub kappa_f: f64,
    pub kappa_m: f64,
    pub sigma: f64,
    /// Slip coefficient; derived from the exact solution for mms.
    pub alpha: f64,
    /// Boundary value of the fracture pressure (wellbore scenarios).
    pub fracture_pressure: f64,
    /// Boundary value of the matrix pressure (wellbore scenarios).
    pub matrix_pressure: f64,
    /// Sampling range of the fracture permeability (random-perm).
    pub kappa_f_range: [f64; 2],
    /// Sampling range of the matrix permeability (random-perm).
    pub kappa_m_range: [f64; 2],
    pub seed: u64,
    pub condense: bool,
    pub out: PathBuf,
}

/// Partially specified configuration as read from a file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub scenario: Option<Scenario>,
    pub k: Option<usize>,
    pub beta: Option<f64>,
    pub levels: Option<usize>,
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub kappa_f: Option<f64>,
    pub kappa_m: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub fracture_pressure: Option<f64>,
    pub matrix_pressure: Option<f64>,
    pub kappa_f_range: Option<[f64; 2]>,
    pub kappa_m_range: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub condense: Option<bool>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        PartialConfig { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl PartialConfig {
    /// Reads a TOML file. A run manifest is accepted too: its `[config]` table
    /// is used and everything else ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(toml::Value::Table(config)) = table.remove("config") {
            table = config;
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: PartialConfig) -> PartialConfig {
        overlay!(
            self, lower, scenario, k, beta, levels, n, mu, kappa_f, kappa_m, sigma, alpha,
            fracture_pressure, matrix_pressure, kappa_f_range, kappa_m_range, seed, condense, out
        )
    }

    /// Fills the remaining fields with the defaults of the scenario and
    /// validates the result.
    pub fn resolve(self) -> Result<RunConfig> {
        let scenario = self
            .scenario
            .ok_or_else(|| Error::Config("no scenario given".into()))?;
        let mms = scenario == Scenario::Mms;
        let k = self.k.unwrap_or(2);
        let mu = self.mu.unwrap_or(if mms { 1.0 } else { 1e-3 });
        let kappa_f = self.kappa_f.unwrap_or(if mms { 1.0 } else { 1e-1 });
        let mut config = RunConfig {
            scenario,
            k,
            beta: self.beta.unwrap_or(10.0 * (k * k) as f64),
            levels: self.levels.unwrap_or(if mms { 5 } else { 1 }),
            n: self.n.unwrap_or(if mms { 4 } else { 64 }),
            mu,
            kappa_f,
            kappa_m: self.kappa_m.unwrap_or(if mms { 1.0 } else { 1e-5 }),
            sigma: self.sigma.unwrap_or(if mms { 0.5 } else { 0.9 }),
            alpha: 1.0,
            fracture_pressure: self.fracture_pressure.unwrap_or(1e4),
            matrix_pressure: self.matrix_pressure.unwrap_or(5e4),
            kappa_f_range: self.kappa_f_range.unwrap_or([1e-2, 1.0]),
            kappa_m_range: self.kappa_m_range.unwrap_or([1e-6, 1e-4]),
            seed: self.seed.unwrap_or(42),
            condense: self.condense.unwrap_or(true),
            out: self
                .out
                .unwrap_or_else(|| PathBuf::from("out").join(scenario.name())),
        };
        if mms {
            let exact = crate::mms::ExactSolution {
                params: config.mms_params(),
            };
            let derived = exact.alpha();
            match self.alpha {
                Some(a) if (a - derived).abs() > 1e-12 * derived => {
                    return Err(Error::Config(format!(
                        "alpha is fixed by the manufactured solution ({derived}); got {a}"
                    )))
                }
                _ => config.alpha = derived,
            }
        } else if let Some(a) = self.alpha {
            config.alpha = a;
        }
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    pub fn defaults(scenario: Scenario) -> RunConfig {
        PartialConfig {
            scenario: Some(scenario),
            ..Default::default()
        }
        .resolve()
        .expect("scenario defaults are valid")
    }

    pub fn mms_params(&self) -> crate::mms::MmsParams {
        crate::mms::MmsParams {
            mu: self.mu,
            kappa_f: self.kappa_f,
            kappa_m: self.kappa_m,
            sigma: self.sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(1..=crate::fem::MAX_DEGREE).contains(&self.k) {
            return bad(format!("k must be in 1..={}, got {}", crate::fem::MAX_DEGREE, self.k));
        }
        if self.levels == 0 {
            return bad("levels must be at least 1".into());
        }
        if self.scenario == Scenario::Mms && (self.levels > 10 || self.n << (self.levels - 1) > 4096) {
            return bad(format!("{} levels from n = {} is too fine", self.levels, self.n));
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        for (name, v) in [
            ("beta", self.beta),
            ("mu", self.mu),
            ("kappa_f", self.kappa_f),
            ("kappa_m", self.kappa_m),
            ("sigma", self.sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed must be at most {} to fit in a manifest, got {}", i64::MAX, self.seed));
        }
        for (name, [lo, hi]) in [("kappa_f_range", self.kappa_f_range), ("kappa_m_range", self.kappa_m_range)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("{name} must satisfy 0 < lo <= hi, got [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}
