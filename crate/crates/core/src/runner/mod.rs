//! Scenario files, presets, run artifacts and strategy comparisons.

mod config;
mod output;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse_scenario, to_config_string};
pub use output::{format_csv, RunArtifacts, RunSummary};
pub use presets::{preset, preset_family, PRESET_NAMES};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fbs::{self, FbsSettings};
use crate::integrator::{ControlTrajectory, Trajectory};
use crate::models::{validate_initial_state, CostWeights, ModelParams, Strategy, StrategyTag};

/// Every objective weight a scenario may carry; a strategy reads the subset
/// it needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightTable {
    pub b: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub d: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d3: Option<f64>,
}

impl WeightTable {
    pub const KEYS: [&'static str; 11] =
        ["b", "c1", "c2", "c3", "d", "k1", "k2", "k3", "d1", "d2", "d3"];

    fn slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "b" => &mut self.b,
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "c3" => &mut self.c3,
            "d" => &mut self.d,
            "k1" => &mut self.k1,
            "k2" => &mut self.k2,
            "k3" => &mut self.k3,
            "d1" => &mut self.d1,
            "d2" => &mut self.d2,
            "d3" => &mut self.d3,
            _ => return None,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.clone().slot(key).and_then(|v| *v)
    }

    /// Sets a weight by key; unknown keys are ignored.
    pub fn set(&mut self, key: &str, value: f64) {
        if let Some(slot) = self.slot(key) {
            *slot = Some(value);
        }
    }

    /// The weights `tag` needs, or a validation error naming the first missing one.
    pub fn for_strategy(&self, tag: StrategyTag) -> Result<CostWeights> {
        let need = |key: &str| {
            self.get(key)
                .ok_or_else(|| Error::validation(format!("weights.{key}"), format!("required by {tag}")))
        };
        Ok(match tag {
            StrategyTag::SirUncontrolled | StrategyTag::SeirUncontrolled => CostWeights::None,
            StrategyTag::SirVaccination => CostWeights::SirVaccination { b: need("b")? },
            StrategyTag::SirTreatmentEducation => CostWeights::SirTreatmentEducation {
                c1: need("c1")?,
                c2: need("c2")?,
                c3: need("c3")?,
            },
            StrategyTag::SeirVaccination => CostWeights::SeirVaccination { d: need("d")? },
            StrategyTag::SeirVaccinationExposedWeighted => CostWeights::SeirVaccinationExposedWeighted {
                k1: need("k1")?,
                k2: need("k2")?,
                k3: need("k3")?,
            },
            StrategyTag::SeirTreatmentEducation => CostWeights::SeirTreatmentEducation {
                d1: need("d1")?,
                d2: need("d2")?,
                d3: need("d3")?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub strategy: StrategyTag,
    pub model: ModelParams,
    /// Initial proportions in compartment order.
    pub initial: Vec<f64>,
    pub weights: WeightTable,
    pub settings: FbsSettings,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.strategy.family() != self.model.family() {
            return Err(Error::ModelMismatch {
                strategy: self.strategy,
                expected: self.model.family().as_str(),
            });
        }
        validate_initial_state(self.model.family(), &self.initial)?;
        for key in WeightTable::KEYS {
            if let Some(w) = self.weights.get(key) {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::validation(
                        format!("weights.{key}"),
                        format!("weight must be positive, got {w}"),
                    ));
                }
            }
        }
        self.settings.validate()?;
        self.strategy().map(|_| ())
    }

    pub fn strategy(&self) -> Result<Strategy> {
        Strategy::from_parts(self.strategy, self.model, self.weights.for_strategy(self.strategy)?)
    }

    /// Copy of this scenario running `tag`, named and placed per strategy.
    pub fn with_strategy(&self, tag: StrategyTag) -> Scenario {
        Scenario {
            name: format!("{}-{}", self.name, tag),
            strategy: tag,
            output_dir: self.output_dir.join(tag.as_str()),
            ..self.clone()
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    parse_scenario(&text, stem)
}

/// Resolves a preset name (optionally `preset:strategy`) or a scenario file path.
pub fn resolve_scenario(spec: &str) -> Result<Scenario> {
    let path = Path::new(spec);
    if path.is_file() {
        return load_scenario(path);
    }
    let (name, tag) = match spec.split_once(':') {
        Some((name, tag)) => (name, Some(tag.parse::<StrategyTag>()?)),
        None => (spec, None),
    };
    match (preset(name), tag) {
        (Some(base), Some(tag)) => {
            let s = base.with_strategy(tag);
            s.validate()?;
            Ok(s)
        }
        (Some(base), None) => Ok(base),
        (None, _) => Err(Error::validation(
            "scenario",
            format!(
                "`{spec}` is neither a readable file nor a preset (known presets: {})",
                PRESET_NAMES.join(", ")
            ),
        )),
    }
}

/// In-memory result of executing a scenario.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub strategy: Strategy,
    pub state: Trajectory,
    pub controls: Option<ControlTrajectory>,
    pub adjoint: Option<Trajectory>,
    /// Uncontrolled trajectory from the same start, for controlled runs.
    pub baseline: Option<Trajectory>,
    pub summary: RunSummary,
}

/// Solves a scenario without touching the filesystem.
pub fn execute(scenario: &Scenario) -> Result<Outcome> {
    scenario.validate()?;
    let strategy = scenario.strategy()?;
    let grid = scenario.settings.grid;
    let baseline = fbs::solve_uncontrolled(&scenario.model, &scenario.initial, &grid)?;

    if !strategy.tag().is_controlled() {
        let controls = ControlTrajectory::zeros(grid, 0);
        let objective = fbs::evaluate_objective(&strategy, &baseline, &controls)?;
        let (peak_time, peak_infected) = fbs::peak_infected(&strategy, &baseline);
        let summary = RunSummary {
            name: scenario.name.clone(),
            strategy: strategy.tag(),
            objective,
            iterations: 0,
            converged: true,
            peak_infected,
            peak_time,
            final_recovered: fbs::final_recovered(&strategy, &baseline),
        };
        return Ok(Outcome {
            strategy,
            state: baseline,
            controls: None,
            adjoint: None,
            baseline: None,
            summary,
        });
    }

    let report = fbs::solve(&strategy, &scenario.initial, &scenario.settings)?;
    let (peak_time, peak_infected) = report.peak_infected();
    let summary = RunSummary {
        name: scenario.name.clone(),
        strategy: strategy.tag(),
        objective: report.objective,
        iterations: report.iterations,
        converged: report.converged,
        peak_infected,
        peak_time,
        final_recovered: report.final_recovered(),
    };
    Ok(Outcome {
        strategy,
        state: report.state,
        controls: Some(report.controls),
        adjoint: Some(report.adjoint),
        baseline: Some(baseline),
        summary,
    })
}

/// Executes a scenario and writes its artifacts under `scenario.output_dir`.
///
/// An unconverged solve still writes everything; check `summary.converged`.
pub fn run(scenario: &Scenario) -> Result<RunArtifacts> {
    let outcome = execute(scenario)?;
    output::write_run(scenario, &outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub name: String,
    pub strategy: StrategyTag,
    pub objective: f64,
    pub peak_infected: f64,
    pub peak_time: f64,
    pub final_recovered: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&RunSummary> for ComparisonRow {
    fn from(s: &RunSummary) -> Self {
        Self {
            name: s.name.clone(),
            strategy: s.strategy,
            objective: s.objective,
            peak_infected: s.peak_infected,
            peak_time: s.peak_time,
            final_recovered: s.final_recovered,
            iterations: s.iterations,
            converged: s.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub const HEADER: [&'static str; 8] = [
        "name",
        "strategy",
        "objective",
        "peak_infected",
        "peak_time",
        "final_recovered",
        "iterations",
        "converged",
    ];

    pub fn to_csv(&self) -> String {
        let mut out = Self::HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.name,
                r.strategy,
                r.objective,
                r.peak_infected,
                r.peak_time,
                r.final_recovered,
                r.iterations,
                r.converged
            ));
        }
        out
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

impl std::fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        writeln!(
            f,
            "{:<width$}  {:<26} {:>10} {:>9} {:>8} {:>9} {:>5} {:>5}",
            "name", "strategy", "objective", "peak_i", "t_peak", "final_r", "iter", "conv"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<width$}  {:<26} {:>10.5} {:>9.5} {:>8.2} {:>9.5} {:>5} {:>5}",
                r.name,
                r.strategy.as_str(),
                r.objective,
                r.peak_infected,
                r.peak_time,
                r.final_recovered,
                r.iterations,
                r.converged
            )?;
        }
        Ok(())
    }
}

fn check_comparable(scenarios: &[Scenario]) -> Result<()> {
    let Some(first) = scenarios.first() else {
        return Err(Error::ComparisonIncompatible("no scenarios given".into()));
    };
    for s in &scenarios[1..] {
        if s.model.family() != first.model.family() {
            return Err(Error::ComparisonIncompatible(format!(
                "`{}` is a {} scenario but `{}` is {}",
                s.name,
                s.model.family().as_str(),
                first.name,
                first.model.family().as_str()
            )));
        }
        if s.initial != first.initial {
            return Err(Error::ComparisonIncompatible(format!(
                "`{}` and `{}` start from different initial states",
                s.name, first.name
            )));
        }
        if s.settings.grid != first.settings.grid {
            return Err(Error::ComparisonIncompatible(format!(
                "`{}` and `{}` use different time grids",
                s.name, first.name
            )));
        }
    }
    Ok(())
}

/// Executes each scenario and tabulates the headline numbers, one row per
/// scenario in input order.
pub fn compare(scenarios: &[Scenario], exec: Execution) -> Result<ComparisonTable> {
    check_comparable(scenarios)?;
    let outcomes = exec.try_map(scenarios, execute)?;
    Ok(ComparisonTable {
        rows: outcomes.iter().map(|o| ComparisonRow::from(&o.summary)).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct ComparisonArtifacts {
    pub table: ComparisonTable,
    pub table_csv: PathBuf,
    pub runs: Vec<RunArtifacts>,
    pub plot_script: Option<PathBuf>,
}

/// Like [`compare`], but also writes every run into its own subdirectory of
/// `dir`, the table as `comparison.csv` and an overlay plot script.
pub fn write_comparison(
    dir: &Path,
    scenarios: &[Scenario],
    exec: Execution,
    emit_plots: bool,
) -> Result<ComparisonArtifacts> {
    check_comparable(scenarios)?;
    let mut placed: Vec<Scenario> = Vec::with_capacity(scenarios.len());
    for (idx, s) in scenarios.iter().enumerate() {
        let mut sub = s.name.clone();
        if placed.iter().any(|p| p.name == sub) {
            sub = format!("{sub}-{idx}");
        }
        placed.push(Scenario {
            name: sub.clone(),
            output_dir: dir.join(&sub),
            emit_plots,
            ..s.clone()
        });
    }
    let runs = exec.try_map(&placed, run)?;
    let table = ComparisonTable {
        rows: runs.iter().map(|r| ComparisonRow::from(&r.summary)).collect(),
    };
    let table_csv = dir.join("comparison.csv");
    output::write_file(&table_csv, &table.to_csv())?;
    let plot_script = if emit_plots {
        let path = dir.join("plot_comparison.py");
        output::write_file(&path, &output::comparison_plot_script(&placed))?;
        Some(path)
    } else {
        None
    };
    Ok(ComparisonArtifacts {
        table,
        table_csv,
        runs,
        plot_script,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_table_lookup() {
        let mut w = WeightTable::default();
        w.set("k2", 3.0);
        w.set("nope", 1.0);
        assert_eq!(w.get("k2"), Some(3.0));
        assert_eq!(w.get("k1"), None);
        assert!(matches!(
            w.for_strategy(StrategyTag::SeirVaccinationExposedWeighted),
            Err(Error::Validation { ref field, .. }) if field == "weights.k1"
        ));
        assert_eq!(w.for_strategy(StrategyTag::SeirUncontrolled).unwrap(), CostWeights::None);
    }

    #[test]
    fn resolve_preset_with_strategy_suffix() {
        let s = resolve_scenario("sir-fig2:sir-uncontrolled").unwrap();
        assert_eq!(s.strategy, StrategyTag::SirUncontrolled);
        assert_eq!(s.name, "sir-fig2-sir-uncontrolled");
        assert!(resolve_scenario("sir-fig2:seir-vaccination").is_err());
        assert!(resolve_scenario("no-such-thing").is_err());
    }

    #[test]
    fn comparison_rejects_mixed_families() {
        let a = preset("sir-fig2").unwrap();
        let b = preset("seir-fig5").unwrap();
        assert!(matches!(
            compare(&[a.clone(), b], Execution::Sequential),
            Err(Error::ComparisonIncompatible(_))
        ));
        let mut c = a.clone();
        c.settings.grid = crate::TimeGrid::horizon(50.0, 500).unwrap();
        assert!(matches!(
            compare(&[a, c], Execution::Sequential),
            Err(Error::ComparisonIncompatible(_))
        ));
    }

    #[test]
    fn single_scenario_comparison() {
        let s = resolve_scenario("sir-fig2:sir-uncontrolled").unwrap();
        let table = compare(&[s], Execution::Sequential).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!(table.to_csv().starts_with("name,strategy,objective"));
    }
}
