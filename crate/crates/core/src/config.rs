//! Run configuration: a JSON document naming the field expressions, the free
//! entries of n, the time grid and the verification settings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{FieldCurve, FieldSource};
use crate::maxwell_system::{CaseId, Slot};
use crate::timefunc::{TimeFunc, TimeFuncError};
use crate::verify::{Axis, GridSpec, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on time-grid intervals.
pub const MAX_STEPS: usize = 1_000_000;

pub const DEFAULT_SEED: u64 = 20_240_901;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON for this schema: {0}")]
    Parse(String),
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("expression for {field}: {error}")]
    Expression { field: String, error: TimeFuncError },
    #[error("parameter `{name}` must be finite")]
    NonFiniteParameter { name: String },
    #[error("constant {name} = {value} is invalid: {reason}")]
    BadConstant {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("time_grid: {0}")]
    TimeGrid(String),
    #[error("verify_grid: {0}")]
    VerifyGrid(String),
    #[error("{case} requires an expression for free slot {slot}")]
    MissingFreeSlot { case: CaseId, slot: Slot },
    #[error("free slot {slot} is not free in {case} (free slots: {free})")]
    UnexpectedFreeSlot {
        case: CaseId,
        slot: Slot,
        free: String,
    },
    #[error("grid override `{item}`: {reason}")]
    GridOverride { item: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldsConfig {
    Direct {
        alpha: [String; 3],
        beta: [String; 3],
    },
    Case5a {
        e: f64,
        c2: f64,
        c3: f64,
        phi: String,
    },
    Case5b {
        c: f64,
        phi: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    /// Number of intervals; the grid has `steps + 1` points.
    pub steps: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|k| {
                if k == self.steps {
                    self.t1
                } else {
                    self.t0 + (self.t1 - self.t0) * k as f64 / self.steps as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseId>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub fields: FieldsConfig,
    #[serde(default)]
    pub free: BTreeMap<Slot, String>,
    pub time_grid: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A config whose expressions parsed and whose grids are usable.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub config: RunConfig,
    pub curve: FieldCurve,
    pub grid: Vec<f64>,
    pub verify_grid: GridSpec,
    pub tolerances: Tolerances,
    pub seed: u64,
}

fn func(field: &str, src: &str, params: &BTreeMap<String, f64>) -> Result<TimeFunc, ConfigError> {
    TimeFunc::new(src, params).map_err(|error| ConfigError::Expression {
        field: field.to_string(),
        error,
    })
}

fn finite_nonzero(name: &'static str, value: f64) -> Result<(), ConfigError> {
    if !value.is_finite() {
        return Err(ConfigError::BadConstant { name, value, reason: "must be finite" });
    }
    if value == 0.0 {
        return Err(ConfigError::BadConstant { name, value, reason: "must be non-zero" });
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion { found: cfg.schema_version });
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parses all expressions and checks the grids.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion { found: self.schema_version });
        }
        let p = &self.parameters;
        if let Some((name, _)) = p.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ConfigError::NonFiniteParameter { name: name.clone() });
        }
        let source = match &self.fields {
            FieldsConfig::Direct { alpha, beta } => {
                let names = ["alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3"];
                let mut fs = Vec::with_capacity(6);
                for (name, src) in names.iter().zip(alpha.iter().chain(beta)) {
                    fs.push(func(name, src, p)?);
                }
                let b: [TimeFunc; 3] = [fs[3].clone(), fs[4].clone(), fs[5].clone()];
                let a: [TimeFunc; 3] = [fs[0].clone(), fs[1].clone(), fs[2].clone()];
                FieldSource::Direct { alpha: a, beta: b }
            }
            FieldsConfig::Case5a { e, c2, c3, phi } => {
                finite_nonzero("e", *e)?;
                for (name, v) in [("c2", *c2), ("c3", *c3)] {
                    if !v.is_finite() {
                        return Err(ConfigError::BadConstant { name, value: v, reason: "must be finite" });
                    }
                }
                FieldSource::Case5a {
                    e: *e,
                    c2: *c2,
                    c3: *c3,
                    phi: func("phi", phi, p)?,
                }
            }
            FieldsConfig::Case5b { c, phi } => {
                finite_nonzero("c", *c)?;
                FieldSource::Case5b {
                    c: *c,
                    phi: func("phi", phi, p)?,
                }
            }
        };
        let mut free = BTreeMap::new();
        for (slot, src) in &self.free {
            free.insert(*slot, func(slot.name(), src, p)?);
        }
        let tg = self.time_grid;
        if !(tg.t0.is_finite() && tg.t1.is_finite() && tg.t0 < tg.t1) {
            return Err(ConfigError::TimeGrid(format!(
                "need finite t0 < t1, got [{}, {}]",
                tg.t0, tg.t1
            )));
        }
        if tg.steps == 0 || tg.steps > MAX_STEPS {
            return Err(ConfigError::TimeGrid(format!(
                "steps must be between 1 and {MAX_STEPS}, got {}",
                tg.steps
            )));
        }
        let verify_grid = self.verify_grid.unwrap_or_default();
        check_verify_grid(&verify_grid, &tg)?;
        Ok(Prepared {
            config: self.clone(),
            curve: FieldCurve::new(source, free),
            grid: tg.points(),
            verify_grid,
            tolerances: self.tolerances.unwrap_or_default(),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
        })
    }
}

/// Grid validity plus containment of the u⁰ stencils in the time grid.
pub fn check_verify_grid(g: &GridSpec, tg: &TimeGrid) -> Result<(), ConfigError> {
    g.validate().map_err(|e| ConfigError::VerifyGrid(e.to_string()))?;
    let margin = 2.0 * g.h;
    if g.u0.lo - margin < tg.t0 || g.u0.hi + margin > tg.t1 {
        return Err(ConfigError::VerifyGrid(format!(
            "u0 range [{}, {}] plus stencil margin {margin} must lie inside the time grid [{}, {}]",
            g.u0.lo, g.u0.hi, tg.t0, tg.t1
        )));
    }
    Ok(())
}

impl Prepared {
    /// Checks that exactly the branch's free slots have expressions.
    pub fn check_free_slots(&self, case: CaseId) -> Result<(), ConfigError> {
        for slot in case.free_slots() {
            if !self.curve.free.contains_key(slot) {
                return Err(ConfigError::MissingFreeSlot { case, slot: *slot });
            }
        }
        if let Some(slot) = self.curve.extra_slots(case).first() {
            let free = case
                .free_slots()
                .iter()
                .map(|s| s.name())
                .collect::<Vec<_>>()
                .join(", ");
            return Err(ConfigError::UnexpectedFreeSlot { case, slot: *slot, free });
        }
        Ok(())
    }
}

/// Applies overrides of the form `u0=0.2:1.2:5;u1=0.5:2.5:3;h=0.001` to a
/// verification grid. Each axis takes `lo:hi:points`; `h` takes a number.
pub fn parse_grid_overrides(text: &str, base: GridSpec) -> Result<GridSpec, ConfigError> {
    let mut g = base;
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let err = |reason: &str| ConfigError::GridOverride {
            item: item.to_string(),
            reason: reason.to_string(),
        };
        let (key, value) = item.split_once('=').ok_or_else(|| err("expected key=value"))?;
        let num = |s: &str| -> Result<f64, ConfigError> {
            let v: f64 = s.trim().parse().map_err(|_| err("not a number"))?;
            if !v.is_finite() {
                return Err(err("not finite"));
            }
            Ok(v)
        };
        match key.trim() {
            "h" => g.h = num(value)?,
            axis @ ("u0" | "u1" | "u2" | "u3") => {
                let parts: Vec<&str> = value.split(':').collect();
                let [lo, hi, points] = parts[..] else {
                    return Err(err("expected lo:hi:points"));
                };
                let points: usize = points.trim().parse().map_err(|_| err("points must be a positive integer"))?;
                if points == 0 || points > 1000 {
                    return Err(err("points must be between 1 and 1000"));
                }
                let a = Axis::new(num(lo)?, num(hi)?, points);
                match axis {
                    "u0" => g.u0 = a,
                    "u1" => g.u1 = a,
                    "u2" => g.u2 = a,
                    _ => g.u3 = a,
                }
            }
            _ => return Err(err("unknown key (expected u0, u1, u2, u3 or h)")),
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE5B: &str = r#"{
        "schema_version": 1,
        "case": "case5b",
        "fields": {"kind": "case5b", "c": 1.0, "phi": "t"},
        "free": {"n11": "1", "n12": "0", "n22": "1"},
        "time_grid": {"t0": 0.1, "t1": 1.3, "steps": 12}
    }"#;

    #[test]
    fn parses_and_prepares() {
        let cfg = RunConfig::from_json(CASE5B).unwrap();
        assert_eq!(cfg.case, Some(CaseId::Case5b));
        let p = cfg.prepare().unwrap();
        assert_eq!(p.grid.len(), 13);
        assert_eq!(p.grid[12], 1.3);
        assert_eq!(p.seed, DEFAULT_SEED);
        p.check_free_slots(CaseId::Case5b).unwrap();
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig::from_json(CASE5B).unwrap();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn missing_and_extra_slots_are_named() {
        let p = RunConfig::from_json(CASE5B).unwrap().prepare().unwrap();
        match p.check_free_slots(CaseId::Case5a) {
            Err(e @ ConfigError::MissingFreeSlot { .. }) => assert!(e.to_string().contains("n23")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            p.check_free_slots(CaseId::Case1),
            Err(ConfigError::UnexpectedFreeSlot { slot: Slot::N12, .. })
        ));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(RunConfig::from_json("{"), Err(ConfigError::Parse(_))));
        let v2 = CASE5B.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(RunConfig::from_json(&v2), Err(ConfigError::SchemaVersion { found: 2 })));
        let unknown = CASE5B.replace("\"case\"", "\"kase\"");
        assert!(RunConfig::from_json(&unknown).is_err());
        let bad_expr = CASE5B.replace("\"phi\": \"t\"", "\"phi\": \"sin(t\"");
        let e = RunConfig::from_json(&bad_expr).unwrap().prepare().unwrap_err();
        assert!(matches!(e, ConfigError::Expression { ref field, .. } if field == "phi"));
        let unbound = CASE5B.replace("\"phi\": \"t\"", "\"phi\": \"w*t\"");
        assert!(RunConfig::from_json(&unbound).unwrap().prepare().is_err());
        let zero_c = CASE5B.replace("\"c\": 1.0", "\"c\": 0.0");
        assert!(RunConfig::from_json(&zero_c).unwrap().prepare().is_err());
        let grid = CASE5B.replace("\"t1\": 1.3", "\"t1\": 0.1");
        assert!(matches!(
            RunConfig::from_json(&grid).unwrap().prepare(),
            Err(ConfigError::TimeGrid(_))
        ));
        let short = CASE5B.replace("\"t1\": 1.3", "\"t1\": 1.0");
        assert!(matches!(
            RunConfig::from_json(&short).unwrap().prepare(),
            Err(ConfigError::VerifyGrid(_))
        ));
    }

    #[test]
    fn grid_overrides() {
        let g = parse_grid_overrides("u0=0.3:0.9:3; h=0.002", GridSpec::default()).unwrap();
        assert_eq!(g.u0, Axis::new(0.3, 0.9, 3));
        assert_eq!(g.h, 0.002);
        assert_eq!(g.u1, GridSpec::default().u1);
        assert_eq!(parse_grid_overrides("", GridSpec::default()).unwrap(), GridSpec::default());
        for bad in ["u0", "u5=1:2:3", "u0=1:2", "u0=1:2:0", "h=abc", "h=inf", "u1=a:2:3", "u2=1:2:-1"] {
            assert!(parse_grid_overrides(bad, GridSpec::default()).is_err(), "{bad}");
        }
    }
}
