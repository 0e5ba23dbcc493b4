//! JSON workbench configuration. Every key is optional; omitted keys take
//! the reference-experiment defaults, and unknown keys are rejected.
//!
//! Angles accept raw radians (`0.785`) or multiples of π as strings
//! (`"0.25pi"`, `"3/16pi"`, `"pi"`).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::HybridModel;
use crate::scenario::{
    default_paper_scenario, ObservableSpec, Scenario, MEASURED_V1, MEASURED_V2, MEASURED_VH,
};
use crate::spacetime::SpacetimeLayout;
use crate::stats::{DEFAULT_RESAMPLES, MIN_RESAMPLES};
use crate::witness::linear_grid;

/// Angle in radians, parsed from a number or a `"<k>pi"` string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

/// Parses `"0.25pi"`, `"3/16pi"`, `"pi"`, `"-0.5pi"` or a plain number.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let Some(coef) = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) else {
        return t.parse::<f64>().map_err(|_| format!("cannot parse angle {s:?}"));
    };
    let coef = coef.trim().trim_end_matches('*').trim();
    let k = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        _ => match coef.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.trim().parse().map_err(|_| format!("cannot parse angle {s:?}"))?;
                let d: f64 = d.trim().parse().map_err(|_| format!("cannot parse angle {s:?}"))?;
                n / d
            }
            None => coef.parse().map_err(|_| format!("cannot parse angle {s:?}"))?,
        },
    };
    let v = k * PI;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("angle {s:?} is not finite"))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct AngleVisitor;
        impl Visitor<'_> for AngleVisitor {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an angle in radians or a string such as \"0.25pi\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Angle, E> {
                Ok(Angle(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Angle, E> {
                parse_angle(v).map(Angle).map_err(E::custom)
            }
        }
        d.deserialize_any(AngleVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub visibility1: f64,
    pub visibility2: f64,
    pub hom_visibility: f64,
    pub alpha1: Angle,
    pub alpha2: Angle,
    /// Bloch vectors of Alice's two observables; `X`, `Z` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_settings: Option<[[f64; 3]; 2]>,
    /// Bloch vectors of Charlie's two observables; `(Z ± X)/√2` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charlie_settings: Option<[[f64; 3]; 2]>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            visibility1: MEASURED_V1,
            visibility2: MEASURED_V2,
            hom_visibility: MEASURED_VH,
            alpha1: Angle(FRAC_PI_4),
            alpha2: Angle(FRAC_PI_4),
            alice_settings: None,
            charlie_settings: None,
        }
    }
}

impl ScenarioConfig {
    /// Scenario at the given source angles with this block's noise and settings.
    pub fn scenario_at(&self, alpha1: f64, alpha2: f64) -> Result<Scenario> {
        let mut s = default_paper_scenario(self.visibility1, self.visibility2, self.hom_visibility, alpha1, alpha2)?;
        if let Some([a0, a1]) = self.alice_settings {
            s.alice_settings = [ObservableSpec { bloch: a0 }, ObservableSpec { bloch: a1 }];
        }
        if let Some([c0, c1]) = self.charlie_settings {
            s.charlie_settings = [ObservableSpec { bloch: c0 }, ObservableSpec { bloch: c1 }];
        }
        s.validate()?;
        Ok(s)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        self.scenario_at(self.alpha1.0, self.alpha2.0)
    }
}

/// Grid over the first source angle; the second stays at `alpha2` (or the scenario's).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub alpha1_min: Angle,
    pub alpha1_max: Angle,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<Angle>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha1_min: Angle(0.0),
            alpha1_max: Angle(FRAC_PI_2),
            points: 9,
            alpha2: None,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        linear_grid(self.alpha1_min.0, self.alpha1_max.0, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatisticsConfig {
    pub total: u64,
    pub seed: u64,
    pub bootstrap_resamples: usize,
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        Self {
            total: 4700,
            seed: 1,
            bootstrap_resamples: DEFAULT_RESAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizationConfig {
    pub n_lambda: usize,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    /// Random models sampled per witness by `verify-bound`.
    pub random_models: usize,
    /// Random models per witness checked by `inflate-check`.
    pub inflation_models: usize,
    /// Extra models evaluated and reported verbatim.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fixture_models: Vec<HybridModel>,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            n_lambda: 4,
            restarts: 32,
            iters: 100,
            seed: 1,
            random_models: 1000,
            inflation_models: 100,
            fixture_models: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpacetimeConfig {
    /// Pairs pass when `Δs² − k_sigma·σ > 0`.
    pub k_sigma: f64,
    pub layout: SpacetimeLayout,
}

impl Default for SpacetimeConfig {
    fn default() -> Self {
        Self {
            k_sigma: 0.0,
            layout: SpacetimeLayout::default_layout(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkbenchConfig {
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
    pub statistics: StatisticsConfig,
    pub optimization: OptimizationConfig,
    pub spacetime: SpacetimeConfig,
}

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn check_unit(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(config_err(field, format!("{v} is outside [0, 1]")))
    }
}

fn check_finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(config_err(field, "must be finite"))
    }
}

impl WorkbenchConfig {
    /// Parses JSON text; blank input yields the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        check_unit("scenario.visibility1", s.visibility1)?;
        check_unit("scenario.visibility2", s.visibility2)?;
        check_unit("scenario.hom_visibility", s.hom_visibility)?;
        check_finite("scenario.alpha1", s.alpha1.0)?;
        check_finite("scenario.alpha2", s.alpha2.0)?;
        s.scenario().map_err(|e| config_err("scenario", e.to_string()))?;

        let w = &self.sweep;
        check_finite("sweep.alpha1_min", w.alpha1_min.0)?;
        check_finite("sweep.alpha1_max", w.alpha1_max.0)?;
        if w.alpha1_min.0 > w.alpha1_max.0 {
            return Err(config_err("sweep.alpha1_min", "must not exceed sweep.alpha1_max"));
        }
        if w.points == 0 {
            return Err(config_err("sweep.points", "must be at least 1"));
        }
        if let Some(a) = w.alpha2 {
            check_finite("sweep.alpha2", a.0)?;
        }

        let st = &self.statistics;
        if st.total == 0 {
            return Err(config_err("statistics.total", "must be at least 1"));
        }
        if st.bootstrap_resamples < MIN_RESAMPLES {
            return Err(config_err(
                "statistics.bootstrap_resamples",
                format!("must be at least {MIN_RESAMPLES}"),
            ));
        }

        let o = &self.optimization;
        for (field, v) in [
            ("optimization.n_lambda", o.n_lambda),
            ("optimization.restarts", o.restarts),
            ("optimization.iters", o.iters),
        ] {
            if v == 0 {
                return Err(config_err(field, "must be at least 1"));
            }
        }
        for (i, m) in o.fixture_models.iter().enumerate() {
            let v = crate::models::validate_model(m, crate::models::MODEL_TOL)
                .map_err(|e| config_err(&format!("optimization.fixture_models[{i}]"), e.to_string()))?;
            if !v.passed {
                return Err(config_err(
                    &format!("optimization.fixture_models[{i}]"),
                    format!("violated constraints: {}", v.violations.join(", ")),
                ));
            }
        }

        let sp = &self.spacetime;
        if !(sp.k_sigma.is_finite() && sp.k_sigma >= 0.0) {
            return Err(config_err("spacetime.k_sigma", "must be >= 0"));
        }
        sp.layout.validate()?;
        Ok(())
    }

    /// Pretty JSON of the fully resolved configuration.
    pub fn dump(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact resolved JSON, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<WorkbenchConfig> {
    let text = std::fs::read_to_string(path)?;
    WorkbenchConfig::from_json(&text)
}
