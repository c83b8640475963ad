//! Scenario configuration: JSON text plus `key=value` overrides.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::counterdiabatic::CdConvention;
use crate::error::{Error, Result};
use crate::model::ProtocolKind;
use crate::propagation::{Stepper, DEFAULT_CONVERGENCE_TOL, DEFAULT_STEPS, MIN_STEPS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Lz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdMode {
    Off,
    Standard,
    TauDFixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Timeseries,
    Qsl,
    Work,
    Spectra,
}

impl OutputKind {
    pub fn name(self) -> &'static str {
        match self {
            OutputKind::Timeseries => "timeseries",
            OutputKind::Qsl => "qsl",
            OutputKind::Work => "work",
            OutputKind::Spectra => "spectra",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * f,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * f).exp(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Value(f64),
    List(Vec<f64>),
    Sweep(Sweep),
}

impl TauSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TauSpec::Value(t) => vec![*t],
            TauSpec::List(v) => v.clone(),
            TauSpec::Sweep(s) => s.values(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Follow {
    Tau,
}

/// Either a fixed `tau_d` or `"tau"`, which uses each scenario's own duration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauD {
    Value(f64),
    Follow(Follow),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProtocolSpec {
    One(ProtocolKind),
    Many(Vec<ProtocolKind>),
}

impl ProtocolSpec {
    pub fn kinds(&self) -> Vec<ProtocolKind> {
        match self {
            ProtocolSpec::One(k) => vec![*k],
            ProtocolSpec::Many(v) => v.clone(),
        }
    }
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_convergence_tol() -> f64 {
    DEFAULT_CONVERGENCE_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "B_i")]
    pub b_i: f64,
    #[serde(rename = "B_f")]
    pub b_f: f64,
    pub protocol: ProtocolSpec,
    pub cd: CdMode,
    pub tau: TauSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_d: Option<TauD>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub stepper: Stepper,
    #[serde(default = "default_convergence_tol")]
    pub convergence_tol: f64,
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::config("<config>", e.to_string())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text).map_err(parse_error)?)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let config: Self = serde_json::from_value(value).map_err(parse_error)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value` overrides; dotted keys reach into nested objects.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut value = self.to_value();
        for o in overrides {
            apply_override(&mut value, o.as_ref())?;
        }
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(Error::config("J", "must be positive and finite"));
        }
        for (name, v) in [("B_i", self.b_i), ("B_f", self.b_f)] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        if self.protocol.kinds().is_empty() {
            return Err(Error::config("protocol", "at least one protocol is required"));
        }
        if self.steps < MIN_STEPS {
            return Err(Error::config("steps", format!("must be at least {MIN_STEPS}")));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::config("convergence_tol", "must be positive"));
        }
        if let TauSpec::Sweep(s) = &self.tau {
            if s.count < 1 {
                return Err(Error::config("tau.count", "must be at least 1"));
            }
            if s.spacing == Spacing::Log && !(s.start > 0.0 && s.stop > 0.0) {
                return Err(Error::config("tau", "log spacing requires positive start and stop"));
            }
        }
        let taus = self.tau.values();
        if taus.is_empty() {
            return Err(Error::config("tau", "no durations given"));
        }
        if let Some(bad) = taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::config("tau", format!("durations must be positive, got {bad}")));
        }
        if let Some(TauD::Value(t)) = self.tau_d {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config("tau_d", "must be positive"));
            }
        }
        if self.cd == CdMode::TauDFixed && self.tau_d.is_none() && taus.len() > 1 {
            return Err(Error::config(
                "tau_d",
                "required for tau_d_fixed when tau takes several values (a number or \"tau\")",
            ));
        }
        Ok(())
    }

    pub fn taus(&self) -> Vec<f64> {
        self.tau.values()
    }

    /// Convention for the scenario of duration `tau`, `None` when CD is off.
    pub fn convention(&self, tau: f64) -> Option<CdConvention> {
        match self.cd {
            CdMode::Off => None,
            CdMode::Standard => Some(CdConvention::Standard),
            CdMode::TauDFixed => Some(CdConvention::TauDFixed {
                tau_d: self.tau_d_for(tau),
            }),
        }
    }

    /// Convention used for excess work; runs without CD use `H0`.
    pub fn work_convention(&self, tau: f64) -> CdConvention {
        self.convention(tau).unwrap_or(CdConvention::Standard)
    }

    pub fn tau_d_for(&self, tau: f64) -> f64 {
        match self.tau_d {
            Some(TauD::Value(t)) => t,
            Some(TauD::Follow(Follow::Tau)) | None => tau,
        }
    }

    /// True when `tau_d` tracks the duration, so a sweep over `tau` is a sweep over intensity.
    pub fn intensity_follows_tau(&self) -> bool {
        match self.cd {
            CdMode::Off => false,
            CdMode::Standard => true,
            CdMode::TauDFixed => !matches!(self.tau_d, Some(TauD::Value(_))),
        }
    }

    pub fn wants(&self, output: OutputKind) -> bool {
        self.outputs.contains(&output)
    }
}

fn parse_scalar(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

fn apply_override(root: &mut Value, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::config(item, "override must look like key=value"))?;
    let key = key.trim().trim_start_matches("--");
    if key.is_empty() {
        return Err(Error::config(item, "empty key"));
    }
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        if !node.get(*part).is_some_and(Value::is_object) {
            node[*part] = Value::Object(Default::default());
        }
        node = node.get_mut(*part).expect("just inserted");
    }
    match node {
        Value::Object(map) => {
            map.insert(parts[parts.len() - 1].to_string(), parse_scalar(raw.trim()));
            Ok(())
        }
        _ => Err(Error::config(key, "cannot index into a non-object value")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"J": 5, "B_i": -50, "B_f": 50, "protocol": "smoothstep",
        "cd": "standard", "tau": 0.1, "outputs": ["work"]}"#;

    #[test]
    fn defaults_are_filled_in() {
        let c = ScenarioConfig::from_json(BASE).unwrap();
        assert_eq!(c.steps, DEFAULT_STEPS);
        assert_eq!(c.stepper, Stepper::Magnus4);
        assert_eq!(c.taus(), vec![0.1]);
        assert_eq!(c.model, ModelKind::Lz);
    }

    #[test]
    fn sweep_values() {
        let s = Sweep {
            start: 0.02,
            stop: 2.0,
            count: 3,
            spacing: Spacing::Log,
        };
        let v = s.values();
        assert!((v[1] - 0.2).abs() < 1e-15 && (v[2] - 2.0).abs() < 1e-15);
        let one = Sweep { count: 1, ..s };
        assert_eq!(one.values(), vec![0.02]);
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let c = ScenarioConfig::from_json(BASE).unwrap();
        let c = c
            .with_overrides(&["steps=800", "cd=tau_d_fixed", "tau_d=0.3", "protocol=linear"])
            .unwrap();
        assert_eq!(c.steps, 800);
        assert_eq!(c.convention(1.0), Some(CdConvention::TauDFixed { tau_d: 0.3 }));
        let swept = c
            .with_overrides(&[
                r#"tau={"start":0.1,"stop":1,"count":4,"spacing":"linear"}"#,
                "tau.count=5",
            ])
            .unwrap();
        assert_eq!(swept.taus().len(), 5);
        assert!(c.with_overrides(&["steps"]).is_err());
        assert!(c.with_overrides(&["nonsense=1"]).is_err());
    }

    #[test]
    fn tau_d_required_for_fixed_sweeps() {
        let c = ScenarioConfig::from_json(BASE).unwrap();
        let err = c
            .with_overrides(&["cd=tau_d_fixed", "tau=[0.1,0.2]"])
            .unwrap_err();
        assert!(matches!(err, Error::ConfigInvalid { ref field, .. } if field == "tau_d"));
        let ok = c
            .with_overrides(&["cd=tau_d_fixed", "tau=[0.1,0.2]", "tau_d=tau"])
            .unwrap();
        assert_eq!(ok.tau_d_for(0.2), 0.2);
        assert!(ok.intensity_follows_tau());
    }

    #[test]
    fn rejects_invalid_fields() {
        let c = ScenarioConfig::from_json(BASE).unwrap();
        for bad in [
            "J=0",
            "steps=10",
            "tau=-1",
            r#"tau={"start":0,"stop":1,"count":3,"spacing":"log"}"#,
            r#"tau={"start":0.1,"stop":1,"count":0,"spacing":"linear"}"#,
            "protocol=[]",
            "outputs=[\"movie\"]",
        ] {
            let e = c.with_overrides(&[bad]).unwrap_err();
            assert!(e.is_config_error(), "{bad}: {e}");
        }
    }

    #[test]
    fn serialization_round_trip_is_idempotent() {
        let c = ScenarioConfig::from_json(BASE)
            .unwrap()
            .with_overrides(&["tau_d=tau", "protocol=[\"linear\",\"smoothstep\"]"])
            .unwrap();
        let once = c.to_json();
        let twice = ScenarioConfig::from_json(&once).unwrap().to_json();
        assert_eq!(once, twice);
    }
}
