//! JSON run configuration.
//!
//! A config file is a single flat JSON object. `scenario` and `resolution`
//! are required; every other key is optional and falls back to the
//! scenario's benchmark default. Keys carry their units so files are
//! self-describing. Command-line `--set key=value` overrides are applied on
//! the raw JSON before parsing, so typos surface as unknown-field errors.

use serde::{Deserialize, Serialize};

use crate::scenario::{MaterialSpec, Params, ScenarioKind};
use crate::{Result, SimError};

/// User-facing run configuration. Unset fields defer to scenario defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: String,
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_stab: Option<f64>,
    /// "neo_hookean" or "mooney_rivlin".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material_model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shear_modulus_dyn_per_cm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mooney_c1_dyn_per_cm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mooney_c2_dyn_per_cm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluid_density_g_per_cm3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluid_viscosity_dyn_s_per_cm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_dyn_per_cm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_angle_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_g_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tether_stiffness_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tether_damping_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_load_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_factor: Option<f64>,
    /// Hard time-step override; wins over `dt_factor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    /// Turns bond breakage on or off regardless of the scenario default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enable_bond_failure: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_stretch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_speed_cm_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields_every_s: Option<f64>,
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SimError::Config(format!("{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(SimError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    finite(name, v)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(SimError::Config(format!("{name} must not be negative, got {v}")))
    }
}

impl Config {
    /// Minimal config for a scenario at a resolution, everything else
    /// defaulted.
    pub fn new(scenario: &str, resolution: usize) -> Config {
        Config {
            scenario: scenario.to_string(),
            resolution,
            mesh_factor: None,
            horizon_factor: None,
            nu_stab: None,
            material_model: None,
            shear_modulus_dyn_per_cm2: None,
            mooney_c1_dyn_per_cm2: None,
            mooney_c2_dyn_per_cm2: None,
            fluid_density_g_per_cm3: None,
            fluid_viscosity_dyn_s_per_cm2: None,
            load_dyn_per_cm2: None,
            twist_angle_rad: None,
            damping_g_per_s: None,
            tether_stiffness_factor: None,
            tether_damping_factor: None,
            t_load_s: None,
            t_final_s: None,
            dt_factor: None,
            dt_s: None,
            enable_bond_failure: None,
            critical_stretch: None,
            steady_speed_cm_per_s: None,
            output_every_s: None,
            fields_every_s: None,
        }
    }

    /// Parse a JSON config document.
    pub fn parse(text: &str) -> Result<Config> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parse a JSON config document after applying `key=value` overrides to
    /// the raw object. Values parse as JSON when possible (numbers, bools,
    /// null) and as strings otherwise, so `--set scenario=torsion` works
    /// unquoted.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Config> {
        let mut doc: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| SimError::Config(format!("config is not valid JSON: {e}")))?;
        let map = doc
            .as_object_mut()
            .ok_or_else(|| SimError::Config("config root must be a JSON object".into()))?;
        for ov in overrides {
            let (key, raw) = ov.split_once('=').ok_or_else(|| {
                SimError::Config(format!("override \"{ov}\" must have the form key=value"))
            })?;
            let value = serde_json::from_str::<serde_json::Value>(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(key.to_string(), value);
        }
        serde_json::from_value(doc).map_err(|e| SimError::Config(e.to_string()))
    }

    /// Serialize with stable key order for manifests and round-trip checks.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolve against the scenario defaults into runnable parameters,
    /// validating every field.
    pub fn resolve(&self) -> Result<Params> {
        let kind = ScenarioKind::parse(&self.scenario)?;
        if self.resolution == 0 {
            return Err(SimError::Config("resolution must be at least 1".into()));
        }
        let d = Params::defaults(kind, self.resolution);

        let material = self.resolve_material(d.material)?;
        let critical_stretch = self.resolve_failure(d.critical_stretch)?;

        let p = Params {
            kind,
            resolution: self.resolution,
            mesh_factor: positive("mesh_factor", self.mesh_factor.unwrap_or(d.mesh_factor))?,
            horizon_factor: positive(
                "horizon_factor",
                self.horizon_factor.unwrap_or(d.horizon_factor),
            )?,
            nu_stab: finite("nu_stab", self.nu_stab.unwrap_or(d.nu_stab))?,
            material,
            rho: positive(
                "fluid_density_g_per_cm3",
                self.fluid_density_g_per_cm3.unwrap_or(d.rho),
            )?,
            mu: nonnegative(
                "fluid_viscosity_dyn_s_per_cm2",
                self.fluid_viscosity_dyn_s_per_cm2.unwrap_or(d.mu),
            )?,
            load: finite("load_dyn_per_cm2", self.load_dyn_per_cm2.unwrap_or(d.load))?,
            angle_rad: finite("twist_angle_rad", self.twist_angle_rad.unwrap_or(d.angle_rad))?,
            damping: nonnegative("damping_g_per_s", self.damping_g_per_s.unwrap_or(d.damping))?,
            tether_stiffness_factor: nonnegative(
                "tether_stiffness_factor",
                self.tether_stiffness_factor.unwrap_or(d.tether_stiffness_factor),
            )?,
            tether_damping_factor: nonnegative(
                "tether_damping_factor",
                self.tether_damping_factor.unwrap_or(d.tether_damping_factor),
            )?,
            t_load: nonnegative("t_load_s", self.t_load_s.unwrap_or(d.t_load))?,
            t_final: nonnegative("t_final_s", self.t_final_s.unwrap_or(d.t_final))?,
            dt_factor: positive("dt_factor", self.dt_factor.unwrap_or(d.dt_factor))?,
            dt_override: match self.dt_s {
                Some(dt) => Some(positive("dt_s", dt)?),
                None => None,
            },
            critical_stretch,
            steady_speed: nonnegative(
                "steady_speed_cm_per_s",
                self.steady_speed_cm_per_s.unwrap_or(d.steady_speed),
            )?,
            output_every: nonnegative(
                "output_every_s",
                self.output_every_s.unwrap_or(d.output_every),
            )?,
            fields_every: match self.fields_every_s.or(d.fields_every) {
                Some(v) => Some(nonnegative("fields_every_s", v)?),
                None => None,
            },
        };
        Ok(p)
    }

    fn resolve_material(&self, default: MaterialSpec) -> Result<MaterialSpec> {
        let model = match self.material_model.as_deref() {
            None => default,
            Some("neo_hookean") => MaterialSpec::NeoHookean {
                shear: match default {
                    MaterialSpec::NeoHookean { shear } => shear,
                    MaterialSpec::MooneyRivlin { .. } => {
                        self.shear_modulus_dyn_per_cm2.ok_or_else(|| {
                            SimError::Config(
                                "shear_modulus_dyn_per_cm2 is required when switching \
                                 material_model to neo_hookean"
                                    .into(),
                            )
                        })?
                    }
                },
            },
            Some("mooney_rivlin") => match default {
                MaterialSpec::MooneyRivlin { c1, c2 } => MaterialSpec::MooneyRivlin { c1, c2 },
                MaterialSpec::NeoHookean { .. } => MaterialSpec::MooneyRivlin {
                    c1: self.mooney_c1_dyn_per_cm2.ok_or_else(|| {
                        SimError::Config(
                            "mooney_c1_dyn_per_cm2 is required when switching material_model \
                             to mooney_rivlin"
                                .into(),
                        )
                    })?,
                    c2: self.mooney_c2_dyn_per_cm2.ok_or_else(|| {
                        SimError::Config(
                            "mooney_c2_dyn_per_cm2 is required when switching material_model \
                             to mooney_rivlin"
                                .into(),
                        )
                    })?,
                },
            },
            Some(other) => {
                return Err(SimError::Config(format!(
                    "unknown material_model \"{other}\"; expected neo_hookean or mooney_rivlin"
                )))
            }
        };

        match model {
            MaterialSpec::NeoHookean { shear } => {
                if self.mooney_c1_dyn_per_cm2.is_some() || self.mooney_c2_dyn_per_cm2.is_some() {
                    return Err(SimError::Config(
                        "mooney_c1/mooney_c2 apply to material_model \"mooney_rivlin\"".into(),
                    ));
                }
                let shear = self.shear_modulus_dyn_per_cm2.unwrap_or(shear);
                positive("shear_modulus_dyn_per_cm2", shear)?;
                Ok(MaterialSpec::NeoHookean { shear })
            }
            MaterialSpec::MooneyRivlin { c1, c2 } => {
                if self.shear_modulus_dyn_per_cm2.is_some() {
                    return Err(SimError::Config(
                        "shear_modulus_dyn_per_cm2 applies to material_model \"neo_hookean\"; \
                         use mooney_c1/mooney_c2"
                            .into(),
                    ));
                }
                let c1 = self.mooney_c1_dyn_per_cm2.unwrap_or(c1);
                let c2 = self.mooney_c2_dyn_per_cm2.unwrap_or(c2);
                nonnegative("mooney_c1_dyn_per_cm2", c1)?;
                nonnegative("mooney_c2_dyn_per_cm2", c2)?;
                if c1 + c2 <= 0.0 {
                    return Err(SimError::Config(
                        "mooney_c1_dyn_per_cm2 + mooney_c2_dyn_per_cm2 must be positive".into(),
                    ));
                }
                Ok(MaterialSpec::MooneyRivlin { c1, c2 })
            }
        }
    }

    fn resolve_failure(&self, default: Option<f64>) -> Result<Option<f64>> {
        let resolved = match self.enable_bond_failure {
            Some(false) => None,
            Some(true) => Some(self.critical_stretch.or(default).ok_or_else(|| {
                SimError::Config(
                    "critical_stretch is required when enable_bond_failure is true".into(),
                )
            })?),
            None => self.critical_stretch.or(default),
        };
        match resolved {
            Some(s) => {
                positive("critical_stretch", s)?;
                Ok(Some(s))
            }
            None => Ok(None),
        }
    }

    /// Fully populated config mirroring resolved parameters. Resolving the
    /// result reproduces the same parameters, which is the round-trip
    /// identity the run manifest relies on.
    pub fn from_params(p: &Params) -> Config {
        let mut c = Config::new(p.kind.name(), p.resolution);
        c.mesh_factor = Some(p.mesh_factor);
        c.horizon_factor = Some(p.horizon_factor);
        c.nu_stab = Some(p.nu_stab);
        match p.material {
            MaterialSpec::NeoHookean { shear } => {
                c.material_model = Some("neo_hookean".into());
                c.shear_modulus_dyn_per_cm2 = Some(shear);
            }
            MaterialSpec::MooneyRivlin { c1, c2 } => {
                c.material_model = Some("mooney_rivlin".into());
                c.mooney_c1_dyn_per_cm2 = Some(c1);
                c.mooney_c2_dyn_per_cm2 = Some(c2);
            }
        }
        c.fluid_density_g_per_cm3 = Some(p.rho);
        c.fluid_viscosity_dyn_s_per_cm2 = Some(p.mu);
        c.load_dyn_per_cm2 = Some(p.load);
        c.twist_angle_rad = Some(p.angle_rad);
        c.damping_g_per_s = Some(p.damping);
        c.tether_stiffness_factor = Some(p.tether_stiffness_factor);
        c.tether_damping_factor = Some(p.tether_damping_factor);
        c.t_load_s = Some(p.t_load);
        c.t_final_s = Some(p.t_final);
        c.dt_factor = Some(p.dt_factor);
        c.dt_s = p.dt_override;
        c.enable_bond_failure = Some(p.critical_stretch.is_some());
        c.critical_stretch = p.critical_stretch;
        c.steady_speed_cm_per_s = Some(p.steady_speed);
        c.output_every_s = Some(p.output_every);
        c.fields_every_s = p.fields_every;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_resolves_to_scenario_defaults() {
        let c = Config::parse(r#"{"scenario": "compression", "resolution": 16}"#).unwrap();
        let p = c.resolve().unwrap();
        let d = Params::defaults(ScenarioKind::Compression, 16);
        assert_eq!(p.load, d.load);
        assert_eq!(p.t_final, d.t_final);
        assert_eq!(p.damping, d.damping);
        assert!(p.critical_stretch.is_none());
        match p.material {
            MaterialSpec::NeoHookean { shear } => assert_eq!(shear, 80.194),
            _ => panic!("compression defaults to neo-Hookean"),
        }
    }

    #[test]
    fn unknown_keys_are_field_level_errors() {
        let err = Config::parse(r#"{"scenario": "compression", "resolution": 8, "sheer": 1}"#)
            .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("sheer"), "{msg}");
    }

    #[test]
    fn overrides_apply_and_bad_override_keys_fail() {
        let base = r#"{"scenario": "compression", "resolution": 8}"#;
        let c = Config::parse_with_overrides(
            base,
            &["nu_stab=0.49995".into(), "scenario=cooks_membrane".into(), "resolution=24".into()],
        )
        .unwrap();
        assert_eq!(c.nu_stab, Some(0.49995));
        assert_eq!(c.scenario, "cooks_membrane");
        assert_eq!(c.resolution, 24);

        let err =
            Config::parse_with_overrides(base, &["no_such_knob=3".into()]).unwrap_err();
        assert!(format!("{err}").contains("no_such_knob"));
        let err = Config::parse_with_overrides(base, &["nu_stab".into()]).unwrap_err();
        assert!(format!("{err}").contains("key=value"));
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        for (name, n) in
            [("compression", 16), ("torsion", 4), ("band_rupture", 8), ("cooks_membrane", 12)]
        {
            let p = Config::new(name, n).resolve().unwrap();
            let full = Config::from_params(&p);
            let reparsed = Config::parse(&full.to_json_pretty()).unwrap();
            assert_eq!(reparsed, full, "{name} round trip");
            let p2 = reparsed.resolve().unwrap();
            assert_eq!(format!("{p:?}"), format!("{p2:?}"), "{name} parameters");
        }
    }

    #[test]
    fn failure_switch_interacts_with_critical_stretch() {
        let base = r#"{"scenario": "band_rupture", "resolution": 4}"#;
        let p = Config::parse(base).unwrap().resolve().unwrap();
        assert_eq!(p.critical_stretch, Some(4.5));

        let p = Config::parse_with_overrides(base, &["enable_bond_failure=false".into()])
            .unwrap()
            .resolve()
            .unwrap();
        assert!(p.critical_stretch.is_none());

        let p = Config::parse_with_overrides(base, &["critical_stretch=2.0".into()])
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(p.critical_stretch, Some(2.0));

        let err = Config::parse_with_overrides(
            r#"{"scenario": "band_static", "resolution": 4}"#,
            &["enable_bond_failure=true".into()],
        )
        .unwrap()
        .resolve()
        .unwrap_err();
        assert!(format!("{err}").contains("critical_stretch"));
    }

    #[test]
    fn material_overrides_are_cross_checked() {
        let tors = r#"{"scenario": "torsion", "resolution": 2}"#;
        let err = Config::parse_with_overrides(tors, &["shear_modulus_dyn_per_cm2=50".into()])
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(format!("{err}").contains("neo_hookean"), "{err}");

        let c = Config::parse_with_overrides(
            tors,
            &["material_model=neo_hookean".into(), "shear_modulus_dyn_per_cm2=50".into()],
        )
        .unwrap();
        match c.resolve().unwrap().material {
            MaterialSpec::NeoHookean { shear } => assert_eq!(shear, 50.0),
            _ => panic!("switched model"),
        }

        let comp = r#"{"scenario": "compression", "resolution": 8}"#;
        let err = Config::parse_with_overrides(comp, &["mooney_c1_dyn_per_cm2=10".into()])
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(format!("{err}").contains("mooney_rivlin"), "{err}");
    }

    #[test]
    fn numeric_range_errors_name_the_field() {
        for (ov, frag) in [
            ("fluid_density_g_per_cm3=-1", "fluid_density_g_per_cm3"),
            ("dt_factor=0", "dt_factor"),
            ("t_final_s=-2", "t_final_s"),
            ("critical_stretch=-4.5", "critical_stretch"),
            ("dt_s=0", "dt_s"),
        ] {
            let err = Config::parse_with_overrides(
                r#"{"scenario": "band_dynamic", "resolution": 4}"#,
                &[ov.to_string()],
            )
            .unwrap()
            .resolve()
            .unwrap_err();
            let msg = format!("{err}");
            assert!(msg.contains(frag), "override {ov} gave {msg}");
        }
    }
}
