//! Named configurations for the six figures.

use serde_json::json;

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"];

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => "ground-state population of H0 + H1 under CD, tau in {0.05, 0.1, 0.5}",
        "fig2" => "speed-limit bounds vs tau, linear ramp, tau_d = tau",
        "fig3" => "time-averaged excess work vs tau, smoothstep and linear, tau_d = tau",
        "fig4" => "eigenenergies of H0 and H0 + H1 at tau = 0.1",
        "fig5" => "CD amplitude C(s) for several tau",
        "fig6" => "ground energies of H0 and H0 + H1 with tau_d = 0.1",
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let value = match name {
        "fig1" => json!({
            "J": 5.0, "B_i": -50.0, "B_f": 50.0, "protocol": "smoothstep",
            "cd": "standard", "tau": [0.05, 0.1, 0.5], "outputs": ["timeseries"]
        }),
        // linear ramp: the trapezoid error of the exactly tight MT bound needs a finer grid
        "fig2" => json!({
            "J": 5.0, "B_i": 50.0, "B_f": -50.0, "protocol": "linear",
            "cd": "tau_d_fixed", "tau_d": "tau",
            "tau": {"start": 0.02, "stop": 2.0, "count": 20, "spacing": "log"},
            "steps": 16000, "outputs": ["qsl"]
        }),
        "fig3" => json!({
            "J": 5.0, "B_i": 50.0, "B_f": -50.0, "protocol": ["smoothstep", "linear"],
            "cd": "tau_d_fixed", "tau_d": "tau",
            "tau": {"start": 0.05, "stop": 1.0, "count": 10, "spacing": "log"},
            "outputs": ["work"]
        }),
        "fig4" => json!({
            "J": 5.0, "B_i": -50.0, "B_f": 50.0, "protocol": "smoothstep",
            "cd": "standard", "tau": 0.1, "outputs": ["spectra"]
        }),
        "fig5" => json!({
            "J": 5.0, "B_i": -50.0, "B_f": 50.0, "protocol": "smoothstep",
            "cd": "standard", "tau": [0.1, 0.2, 0.5, 1.0], "outputs": ["spectra"]
        }),
        "fig6" => json!({
            "J": 5.0, "B_i": -50.0, "B_f": 50.0, "protocol": "smoothstep",
            "cd": "tau_d_fixed", "tau_d": 0.1, "tau": 0.1, "outputs": ["spectra", "work"]
        }),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    ScenarioConfig::from_value(value)
}
