//! Flat `key = value` scenario files.
//!
//! ```text
//! # comments start with '#'
//! name = sir-vaccination-demo
//! strategy = sir-vaccination
//! model.nu = 0.2
//! model.delta = 0.1
//! initial.s = 0.95
//! initial.i = 0.05
//! initial.r = 0
//! weights.b = 1
//! solver.tf = 100            # optional, as is the rest of solver.*
//! solver.n_steps = 1000
//! output.dir = out/demo
//! output.plots = true
//! ```
//!
//! A `preset = <name>` line starts from a built-in scenario; every other key
//! then overrides it. The name and output directory are never inherited from
//! the preset. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use super::presets;
use super::{Scenario, WeightTable};
use crate::error::{Error, Result};
use crate::fbs::FbsSettings;
use crate::integrator::TimeGrid;
use crate::models::{ModelFamily, ModelParams, SeirParams, SirParams, StrategyTag};

struct Entry {
    line: usize,
    value: String,
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty key".into(),
            });
        }
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = entries.insert(key.to_string(), entry) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}` (first set on line {})", prev.line),
            });
        }
    }
    Ok(entries)
}

fn parse_value<T: FromStr>(key: &str, entry: &Entry) -> Result<T> {
    entry.value.parse().map_err(|_| Error::Parse {
        line: entry.line,
        message: format!("cannot parse `{}` as the value of `{key}`", entry.value),
    })
}

fn parse_bool(key: &str, entry: &Entry) -> Result<bool> {
    match entry.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Parse {
            line: entry.line,
            message: format!("expected a boolean for `{key}`, got `{other}`"),
        }),
    }
}

/// Partially assembled scenario; every field may still be missing.
#[derive(Default)]
struct Draft {
    name: Option<String>,
    strategy: Option<StrategyTag>,
    nu: Option<f64>,
    rho: Option<f64>,
    delta: Option<f64>,
    initial: BTreeMap<&'static str, f64>,
    weights: WeightTable,
    tf: Option<f64>,
    n_steps: Option<usize>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    relaxation: Option<f64>,
    output_dir: Option<PathBuf>,
    emit_plots: Option<bool>,
}

impl Draft {
    fn from_scenario(s: &Scenario) -> Self {
        let (nu, rho, delta) = match s.model {
            ModelParams::Sir(p) => (p.infection_rate, None, p.recovery_rate),
            ModelParams::Seir(p) => (p.transmission_rate, Some(p.infectious_rate), p.recovery_rate),
        };
        Self {
            name: Some(s.name.clone()),
            strategy: Some(s.strategy),
            nu: Some(nu),
            rho,
            delta: Some(delta),
            initial: s
                .model
                .family()
                .compartments()
                .iter()
                .copied()
                .zip(s.initial.iter().copied())
                .collect(),
            weights: s.weights.clone(),
            tf: Some(s.settings.grid.tf()),
            n_steps: Some(s.settings.grid.n_steps()),
            tolerance: Some(s.settings.tolerance),
            max_iterations: Some(s.settings.max_iterations),
            relaxation: Some(s.settings.relaxation),
            output_dir: Some(s.output_dir.clone()),
            emit_plots: Some(s.emit_plots),
        }
    }

    fn apply(&mut self, key: &str, entry: &Entry) -> Result<()> {
        match key {
            "preset" => {}
            "name" => self.name = Some(entry.value.clone()),
            "strategy" => self.strategy = Some(entry.value.parse()?),
            "model.nu" => self.nu = Some(parse_value(key, entry)?),
            "model.rho" => self.rho = Some(parse_value(key, entry)?),
            "model.delta" => self.delta = Some(parse_value(key, entry)?),
            "solver.tf" => self.tf = Some(parse_value(key, entry)?),
            "solver.n_steps" => self.n_steps = Some(parse_value(key, entry)?),
            "solver.tolerance" => self.tolerance = Some(parse_value(key, entry)?),
            "solver.max_iterations" => self.max_iterations = Some(parse_value(key, entry)?),
            "solver.relaxation" => self.relaxation = Some(parse_value(key, entry)?),
            "output.dir" => self.output_dir = Some(PathBuf::from(&entry.value)),
            "output.plots" => self.emit_plots = Some(parse_bool(key, entry)?),
            _ => {
                if let Some(name) = key.strip_prefix("initial.") {
                    let name = ["s", "e", "i", "r"]
                        .into_iter()
                        .find(|c| *c == name)
                        .ok_or_else(|| unknown_key(key, entry))?;
                    self.initial.insert(name, parse_value(key, entry)?);
                } else if let Some(name) = key.strip_prefix("weights.") {
                    if !WeightTable::KEYS.contains(&name) {
                        return Err(unknown_key(key, entry));
                    }
                    self.weights.set(name, parse_value(key, entry)?);
                } else {
                    return Err(unknown_key(key, entry));
                }
            }
        }
        Ok(())
    }

    fn finish(self, default_name: &str) -> Result<Scenario> {
        let strategy = self
            .strategy
            .ok_or_else(|| Error::validation("strategy", "missing"))?;
        let family = strategy.family();
        let require = |field: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::validation(field, "missing"))
        };
        let model = match family {
            ModelFamily::Sir => {
                if self.rho.is_some() {
                    return Err(Error::validation("model.rho", "not a parameter of the SIR model"));
                }
                ModelParams::Sir(SirParams::new(
                    require("model.nu", self.nu)?,
                    require("model.delta", self.delta)?,
                )?)
            }
            ModelFamily::Seir => ModelParams::Seir(SeirParams::new(
                require("model.nu", self.nu)?,
                require("model.rho", self.rho)?,
                require("model.delta", self.delta)?,
            )?),
        };

        let compartments = family.compartments();
        if let Some(extra) = self.initial.keys().find(|k| !compartments.contains(k)) {
            return Err(Error::validation(
                format!("initial.{extra}"),
                format!("not a compartment of the {} model", family.as_str()),
            ));
        }
        let initial = compartments
            .iter()
            .map(|c| {
                self.initial
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::validation(format!("initial.{c}"), "missing"))
            })
            .collect::<Result<Vec<f64>>>()?;

        let defaults = FbsSettings::default();
        let grid = TimeGrid::horizon(
            self.tf.unwrap_or(TimeGrid::DEFAULT_FINAL_TIME),
            self.n_steps.unwrap_or(TimeGrid::DEFAULT_STEPS),
        )
        .map_err(|e| Error::validation("solver.tf", e.to_string()))?;
        let settings = FbsSettings {
            tolerance: self.tolerance.unwrap_or(defaults.tolerance),
            max_iterations: self.max_iterations.unwrap_or(defaults.max_iterations),
            relaxation: self.relaxation.unwrap_or(defaults.relaxation),
            grid,
        };

        let name = self.name.unwrap_or_else(|| default_name.to_string());
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(Error::validation("name", format!("`{name}` is not a usable name")));
        }
        let scenario = Scenario {
            output_dir: self
                .output_dir
                .unwrap_or_else(|| PathBuf::from("out").join(&name)),
            name,
            strategy,
            model,
            initial,
            weights: self.weights,
            settings,
            emit_plots: self.emit_plots.unwrap_or(true),
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

fn unknown_key(key: &str, entry: &Entry) -> Error {
    Error::Parse {
        line: entry.line,
        message: format!("unknown key `{key}`"),
    }
}

/// Parses scenario text. `default_name` is used when no `name` key is given.
pub fn parse_scenario(text: &str, default_name: &str) -> Result<Scenario> {
    let entries = tokenize(text)?;
    let mut draft = match entries.get("preset") {
        Some(entry) => {
            let base = presets::preset(&entry.value).ok_or_else(|| Error::Parse {
                line: entry.line,
                message: format!("unknown preset `{}`", entry.value),
            })?;
            Draft {
                name: None,
                output_dir: None,
                ..Draft::from_scenario(&base)
            }
        }
        None => Draft::default(),
    };
    for (key, entry) in &entries {
        draft.apply(key, entry)?;
    }
    draft.finish(default_name)
}

/// Renders a scenario in the file format; [`parse_scenario`] reads it back
/// to an identical value.
pub fn to_config_string(s: &Scenario) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("name", &s.name);
    kv("strategy", &s.strategy);
    match s.model {
        ModelParams::Sir(p) => {
            kv("model.nu", &p.infection_rate);
            kv("model.delta", &p.recovery_rate);
        }
        ModelParams::Seir(p) => {
            kv("model.nu", &p.transmission_rate);
            kv("model.rho", &p.infectious_rate);
            kv("model.delta", &p.recovery_rate);
        }
    }
    for (c, v) in s.model.family().compartments().iter().zip(&s.initial) {
        kv(&format!("initial.{c}"), v);
    }
    for key in WeightTable::KEYS {
        if let Some(v) = s.weights.get(key) {
            kv(&format!("weights.{key}"), &v);
        }
    }
    kv("solver.tf", &s.settings.grid.tf());
    kv("solver.n_steps", &s.settings.grid.n_steps());
    kv("solver.tolerance", &s.settings.tolerance);
    kv("solver.max_iterations", &s.settings.max_iterations);
    kv("solver.relaxation", &s.settings.relaxation);
    kv("output.dir", &s.output_dir.display());
    kv("output.plots", &s.emit_plots);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIR_TEXT: &str = "\
# demo
name = demo
strategy = sir-vaccination
model.nu = 0.2
model.delta = 0.1   # per day
initial.s = 0.95
initial.i = 0.05
initial.r = 0
weights.b = 1
";

    #[test]
    fn parses_minimal_file_with_defaults() {
        let s = parse_scenario(SIR_TEXT, "fallback").unwrap();
        assert_eq!(s.name, "demo");
        assert_eq!(s.strategy, StrategyTag::SirVaccination);
        assert_eq!(s.initial, vec![0.95, 0.05, 0.0]);
        assert_eq!(s.weights.b, Some(1.0));
        assert_eq!(s.settings, FbsSettings::default());
        assert_eq!(s.output_dir, PathBuf::from("out/demo"));
        assert!(s.emit_plots);
    }

    #[test]
    fn echo_round_trips() {
        let s = parse_scenario(SIR_TEXT, "x").unwrap();
        let again = parse_scenario(&to_config_string(&s), "y").unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn preset_base_with_overrides() {
        let s = parse_scenario("preset = seir-fig5\nstrategy = seir-treatment-education\nweights.d2 = 2\n", "x")
            .unwrap();
        assert_eq!(s.strategy, StrategyTag::SeirTreatmentEducation);
        assert_eq!(s.weights.d2, Some(2.0));
        assert_eq!(s.weights.d3, Some(5.0));
        assert_eq!(s.initial, vec![0.88, 0.07, 0.05, 0.0]);
    }

    #[test]
    fn off_simplex_initial_state_is_rejected() {
        let text = SIR_TEXT.replace("initial.s = 0.95", "initial.s = 0.85");
        let err = parse_scenario(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "initial"), "{err}");
    }

    #[test]
    fn nonpositive_weight_names_field() {
        let text = SIR_TEXT.replace("weights.b = 1", "weights.b = 0");
        let err = parse_scenario(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "weights.b"), "{err}");
    }

    #[test]
    fn unknown_strategy_is_rejected() {
        let text = SIR_TEXT.replace("sir-vaccination", "sir-lockdown");
        let err = parse_scenario(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "strategy"), "{err}");
    }

    #[test]
    fn missing_weight_for_strategy() {
        let text = SIR_TEXT.replace("weights.b = 1", "weights.c1 = 1");
        let err = parse_scenario(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "weights.b"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_scenario("name = a\nthis line is wrong\n", "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_scenario("name = a\nname = b\n", "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_scenario(&format!("{SIR_TEXT}model.gamma = 3\n"), "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 10, .. }), "{err}");
    }

    #[test]
    fn seir_keys_on_sir_model_are_rejected() {
        let err = parse_scenario(&format!("{SIR_TEXT}initial.e = 0\n"), "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "initial.e"), "{err}");
        let err = parse_scenario(&format!("{SIR_TEXT}model.rho = 0.2\n"), "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "model.rho"), "{err}");
    }
}
