//! Scenario configuration as read from JSON.

use std::f64::consts::PI;

use dirac_lab::evolution::{Envelope, GaugeFunction, KickRecipe, Profile};
use dirac_lab::{Field, LatticeConfig, VacuumSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub lattice: LatticeConfig,
    /// "bare", "standard" or "band"; defaults to "standard".
    #[serde(default)]
    pub vacuum: Option<String>,
    #[serde(default, rename = "delta_Ew")]
    pub delta_ew: Option<f64>,
    /// Optional guard: must name the subcommand being run.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub packet: Option<PacketConfig>,
    #[serde(default)]
    pub kick: Option<KickConfig>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub output_every: Option<usize>,
    #[serde(default)]
    pub f_sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub saturation_f: Option<Vec<f64>>,
    #[serde(default)]
    pub chi: Option<ChiConfig>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub samples_per_period: Option<usize>,
    /// Sample points per box for position tables; defaults depend on the
    /// subcommand.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub p_center: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    pub recipe: KickRecipe,
    pub f: f64,
    pub t_a: f64,
    pub t_b: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeKind {
    #[default]
    Smoothstep,
    Bump,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChiMode {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `χ(x, t) = strength · e(t) · Σ (a_k cos p_k x + b_k sin p_k x)`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChiConfig {
    #[serde(default = "one")]
    pub strength: f64,
    pub t_a: f64,
    pub t_b: f64,
    #[serde(default)]
    pub envelope: EnvelopeKind,
    pub modes: Vec<ChiMode>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: String,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(default)]
    pub m: Option<Vec<f64>>,
    /// Couples the band width to the cutoff: `delta_Ew = ratio (E_max - m)`.
    #[serde(default)]
    pub band_ratio: Option<f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::config(format!("config JSON: {e}")))
    }

    pub fn vacuum_spec(&self) -> Result<VacuumSpec, Failure> {
        let name = self.vacuum.as_deref().unwrap_or("standard");
        let spec = match (name, self.delta_ew) {
            ("bare", None) => VacuumSpec::Bare,
            ("standard", None) => VacuumSpec::Standard,
            ("band", Some(delta_ew)) => VacuumSpec::Band { delta_ew },
            ("band", None) => return Err(Failure::config("band vacuum needs \"delta_Ew\"")),
            ("bare" | "standard", Some(_)) => {
                return Err(Failure::config(format!("\"delta_Ew\" only applies to the band vacuum, not {name}")))
            }
            _ => return Err(Failure::config(format!("unknown vacuum \"{name}\"; use bare, standard or band"))),
        };
        spec.validate(&self.lattice)?;
        Ok(spec)
    }

    pub fn validate_for(&self, command: &str) -> Result<(), Failure> {
        self.lattice.validate()?;
        if let Some(e) = &self.experiment {
            if e.replace('_', "-") != command {
                return Err(Failure::config(format!(
                    "config is for experiment \"{e}\" but the subcommand is {command}"
                )));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Failure::config(format!("dt must be positive, got {dt}")));
            }
        }
        if self.output_every == Some(0) {
            return Err(Failure::config("output_every must be at least 1"));
        }
        if self.resolution == Some(0) {
            return Err(Failure::config("resolution must be at least 1"));
        }
        if let Some(k) = &self.kick {
            if !(k.t_b > k.t_a) {
                return Err(Failure::config(format!("kick needs t_b > t_a, got [{}, {}]", k.t_a, k.t_b)));
            }
        }
        if let Some(chi) = &self.chi {
            if !(chi.t_b > chi.t_a) {
                return Err(Failure::config(format!("chi needs t_b > t_a, got [{}, {}]", chi.t_a, chi.t_b)));
            }
            let limit = self.lattice.max_index() as u32;
            if let Some(bad) = chi.modes.iter().find(|m| m.k > limit) {
                return Err(Failure::config(format!(
                    "chi mode k = {} exceeds the momentum cutoff {limit}",
                    bad.k
                )));
            }
        }
        self.vacuum_spec()?;
        Ok(())
    }

    pub fn require<'a, T>(&self, value: &'a Option<T>, key: &str, command: &str) -> Result<&'a T, Failure> {
        value
            .as_ref()
            .ok_or_else(|| Failure::config(format!("{command} needs \"{key}\" in the config")))
    }
}

impl ChiConfig {
    pub fn gauge_function(&self, config: &LatticeConfig) -> GaugeFunction {
        let l = config.box_length;
        let max_k = self.modes.iter().map(|m| m.k as usize).max().unwrap_or(0);
        let modes = self.modes.clone();
        let profile = Field::from_fn(l, max_k, move |x| {
            let v: f64 = modes
                .iter()
                .map(|m| {
                    let p = 2.0 * PI * m.k as f64 / l;
                    m.cos * (p * x).cos() + m.sin * (p * x).sin()
                })
                .sum();
            Complex64::new(v, 0.0)
        });
        let envelope = match self.envelope {
            EnvelopeKind::Smoothstep => Envelope::Smoothstep { t_a: self.t_a, t_b: self.t_b },
            EnvelopeKind::Bump => Envelope::Bump { t_a: self.t_a, t_b: self.t_b },
        };
        GaugeFunction::new(self.strength, envelope, Profile::Static(profile))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"lattice": {"L": 6.283185307179586, "N": 5, "m": 1.0, "q": 1.0}"#;

    fn parse(extra: &str) -> Result<ScenarioConfig, Failure> {
        ScenarioConfig::parse(&format!("{BASE}{extra}}}"))
    }

    #[test]
    fn defaults_to_standard_vacuum() {
        let c = parse("").unwrap();
        assert_eq!(c.vacuum_spec().unwrap(), VacuumSpec::Standard);
    }

    #[test]
    fn band_needs_width_and_headroom() {
        assert!(parse(r#", "vacuum": "band""#).unwrap().vacuum_spec().is_err());
        let ok = parse(r#", "vacuum": "band", "delta_Ew": 0.5"#).unwrap();
        assert_eq!(ok.vacuum_spec().unwrap(), VacuumSpec::Band { delta_ew: 0.5 });
        let e = parse(r#", "vacuum": "band", "delta_Ew": 50.0"#).unwrap().vacuum_spec().unwrap_err();
        assert!(e.message.contains("headroom"), "{}", e.message);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse(r#", "dtt": 0.1"#).is_err());
    }

    #[test]
    fn experiment_guard() {
        let c = parse(r#", "experiment": "extract_energy""#).unwrap();
        assert!(c.validate_for("extract-energy").is_ok());
        assert!(c.validate_for("schwinger").is_err());
    }

    #[test]
    fn chi_profile_is_the_configured_trig_sum() {
        let c = parse(
            r#", "chi": {"t_a": 0.0, "t_b": 1.0, "modes": [{"k": 1, "cos": 2.0}, {"k": 2, "sin": -1.0}]}"#,
        )
        .unwrap();
        let g = c.chi.unwrap().gauge_function(&c.lattice);
        let lat = LatticeConfig::new(2.0 * PI, 5, 1.0, 1.0).unwrap();
        let b = dirac_lab::ModeBasis::build(lat).unwrap();
        let v = g.value(&b, 1.0);
        let x = 0.7f64;
        assert!((v.eval(x).re - (2.0 * x.cos() - (2.0 * x).sin())).abs() < 1e-12);
    }
}
