//! Scenario definition, validation, and file I/O.
//!
//! A scenario file is a JSON document with top-level keys `schema_version`,
//! `applications`, `configurations`, `nodes`, and `profiles`. Units are fixed:
//! latency targets in seconds, loss targets in MAPE percent, compute cost in
//! tera-operations, power in watts, capacity in TOPS.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{AppRequirements, ComputeNodeSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Schema version written and accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Deployment mode: load a pre-trained model and infer.
pub const MODE_PRETRAINED: u8 = 0;
/// Deployment mode: load a pre-trained model, update it, and infer.
pub const MODE_UPDATE: u8 = 1;

/// A model configuration tuple: data source, training extent, and mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigSpec {
    pub id: String,
    pub data_source: String,
    pub epochs: u32,
    pub steps_per_epoch: u32,
    pub mode: u8,
}

impl ConfigSpec {
    /// Training volume in optimizer steps; zero for pre-trained inference.
    pub fn training_volume(&self) -> u64 {
        if self.mode == MODE_PRETRAINED {
            0
        } else {
            u64::from(self.epochs) * u64::from(self.steps_per_epoch)
        }
    }
}

/// Measured (or generated) cost and loss of one (application, configuration)
/// pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry<T> {
    pub app: String,
    pub config: String,
    pub compute_cost_tops: T,
    pub loss_mape: T,
}

/// Full problem instance: applications with targets, configurations, compute
/// nodes, and the per-(application, configuration) profile table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub schema_version: u32,
    pub applications: Vec<AppRequirements<T>>,
    pub configurations: Vec<ConfigSpec>,
    pub nodes: Vec<ComputeNodeSpec<T>>,
    pub profiles: Vec<ProfileEntry<T>>,
}

impl<T: Scalar> Scenario<T> {
    /// Checks all structural invariants, naming the offending field on error.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        if self.applications.is_empty() {
            return Err(Error::Validation("applications must be non-empty".into()));
        }
        if self.configurations.is_empty() {
            return Err(Error::Validation("configurations must be non-empty".into()));
        }

        let mut seen = std::collections::BTreeSet::new();
        for a in &self.applications {
            if !seen.insert(a.id.clone()) {
                return Err(Error::Validation(format!("duplicate application id `{}`", a.id)));
            }
            if !(a.loss_max > T::zero()) {
                return Err(Error::Validation(format!(
                    "application `{}`: loss_max must be positive",
                    a.id
                )));
            }
            if !(a.latency_max > T::zero()) {
                return Err(Error::Validation(format!(
                    "application `{}`: latency_max must be positive",
                    a.id
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.configurations {
            if !seen.insert(c.id.clone()) {
                return Err(Error::Validation(format!("duplicate configuration id `{}`", c.id)));
            }
            if c.epochs < 1 {
                return Err(Error::Validation(format!(
                    "configuration `{}`: epochs must be >= 1",
                    c.id
                )));
            }
            if c.steps_per_epoch < 1 {
                return Err(Error::Validation(format!(
                    "configuration `{}`: steps_per_epoch must be >= 1",
                    c.id
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.clone()) {
                return Err(Error::Validation(format!("duplicate node id `{}`", n.id)));
            }
            if !(n.capacity_tops > T::zero()) {
                return Err(Error::Validation(format!(
                    "node `{}`: capacity_tops must be positive",
                    n.id
                )));
            }
            if n.idle_power_w < T::zero() || n.idle_power_w > n.max_power_w {
                return Err(Error::Validation(format!(
                    "node `{}`: require 0 <= idle_power_w <= max_power_w",
                    n.id
                )));
            }
        }

        self.profile_table()?;
        Ok(())
    }

    /// Dense (application, configuration) -> (cost, loss) table. Errors name
    /// the first missing pair; duplicate or dangling entries are rejected.
    pub fn profile_table(&self) -> Result<Vec<Vec<(T, T)>>> {
        let app_index: HashMap<&str, usize> = self
            .applications
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.as_str(), i))
            .collect();
        let config_index: HashMap<&str, usize> = self
            .configurations
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();

        let mut table = vec![vec![None; self.configurations.len()]; self.applications.len()];
        for p in &self.profiles {
            let &a = app_index.get(p.app.as_str()).ok_or_else(|| {
                Error::Validation(format!("profile references unknown application `{}`", p.app))
            })?;
            let &c = config_index.get(p.config.as_str()).ok_or_else(|| {
                Error::Validation(format!("profile references unknown configuration `{}`", p.config))
            })?;
            if p.compute_cost_tops < T::zero() {
                return Err(Error::Validation(format!(
                    "profile ({}, {}): compute_cost_tops must be non-negative",
                    p.app, p.config
                )));
            }
            if p.loss_mape < T::zero() {
                return Err(Error::Validation(format!(
                    "profile ({}, {}): loss_mape must be non-negative",
                    p.app, p.config
                )));
            }
            if table[a][c].replace((p.compute_cost_tops, p.loss_mape)).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate profile entry for ({}, {})",
                    p.app, p.config
                )));
            }
        }
        let mut out = Vec::with_capacity(table.len());
        for (a, row) in table.into_iter().enumerate() {
            let mut dense = Vec::with_capacity(row.len());
            for (c, cell) in row.into_iter().enumerate() {
                match cell {
                    Some(v) => dense.push(v),
                    None => {
                        return Err(Error::MissingProfile {
                            app: self.applications[a].id.clone(),
                            config: self.configurations[c].id.clone(),
                        })
                    }
                }
            }
            out.push(dense);
        }
        Ok(out)
    }

    /// (cost, loss) of one (application, configuration) pair by index.
    pub fn profile(&self, app: usize, config: usize) -> Result<(T, T)> {
        let app_id = &self.applications[app].id;
        let config_id = &self.configurations[config].id;
        self.profiles
            .iter()
            .find(|p| &p.app == app_id && &p.config == config_id)
            .map(|p| (p.compute_cost_tops, p.loss_mape))
            .ok_or_else(|| Error::MissingProfile {
                app: app_id.clone(),
                config: config_id.clone(),
            })
    }

    /// Applies the same latency/loss targets to every application.
    pub fn with_targets(mut self, latency_max: T, loss_max: T) -> Self {
        for a in &mut self.applications {
            a.latency_max = latency_max;
            a.loss_max = loss_max;
        }
        self
    }
}

impl<T: Scalar + Serialize> Scenario<T> {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes a scenario as pretty-printed JSON.
pub fn save_scenario<T: Scalar + Serialize>(scenario: &Scenario<T>, path: &Path) -> Result<()> {
    scenario.validate()?;
    fs::write(path, scenario.to_json()?)?;
    Ok(())
}

/// Loads and validates a scenario file.
pub fn load_scenario<T: Scalar + serde::de::DeserializeOwned>(path: &Path) -> Result<Scenario<T>> {
    let text = fs::read_to_string(path)?;
    parse_scenario(&text)
}

/// Parses a scenario from JSON text, checking the schema version before the
/// full structure so version mismatches are reported as such.
pub fn parse_scenario<T: Scalar + serde::de::DeserializeOwned>(text: &str) -> Result<Scenario<T>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::SchemaVersion { found: v as u32, supported: SCHEMA_VERSION })
        }
        None => return Err(Error::Parse("missing schema_version".into())),
    }
    let scenario: Scenario<T> =
        serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_small_example;

    #[test]
    fn round_trip_is_identity() {
        let s = fixture_small_example::<f64>();
        let text = s.to_json().unwrap();
        let back: Scenario<f64> = parse_scenario(&text).unwrap();
        assert_eq!(back, s);
        // Serialization is byte-stable.
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn missing_profile_entry_names_the_pair() {
        let mut s = fixture_small_example::<f64>();
        s.profiles.retain(|p| !(p.app == "h1" && p.config == "s2"));
        match s.validate() {
            Err(Error::MissingProfile { app, config }) => {
                assert_eq!((app.as_str(), config.as_str()), ("h1", "s2"));
            }
            other => panic!("expected MissingProfile, got {other:?}"),
        }
    }

    #[test]
    fn unknown_schema_version_is_rejected() {
        let mut s = fixture_small_example::<f64>();
        s.schema_version = 99;
        let text = serde_json::to_string(&s).unwrap();
        match parse_scenario::<f64>(&text) {
            Err(Error::SchemaVersion { found, supported }) => {
                assert_eq!(found, 99);
                assert_eq!(supported, SCHEMA_VERSION);
            }
            other => panic!("expected SchemaVersion, got {other:?}"),
        }
    }

    #[test]
    fn malformed_file_reports_parse_error() {
        let err = parse_scenario::<f64>("{ not json").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn invalid_node_spec_is_named() {
        let mut s = fixture_small_example::<f64>();
        s.nodes[0].capacity_tops = 0.0;
        let err = s.validate().unwrap_err();
        assert!(err.to_string().contains("capacity_tops"));
        assert!(err.to_string().contains("n1"));
    }
}
