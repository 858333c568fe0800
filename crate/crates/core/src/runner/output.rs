//! On-disk artifacts of a run: CSV tables, a plain-text summary, the echoed
//! scenario and an optional matplotlib script.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{to_config_string, Outcome, Scenario};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::models::StrategyTag;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub strategy: StrategyTag,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub peak_infected: f64,
    pub peak_time: f64,
    pub final_recovered: f64,
}

impl RunSummary {
    /// `key = value` lines, one per field.
    pub fn to_text(&self) -> String {
        format!(
            "name = {}\nstrategy = {}\nobjective = {}\niterations = {}\nconverged = {}\n\
             peak_infected = {}\npeak_time = {}\nfinal_recovered = {}\n",
            self.name,
            self.strategy,
            self.objective,
            self.iterations,
            self.converged,
            self.peak_infected,
            self.peak_time,
            self.final_recovered
        )
    }
}

/// Paths written by a run. Optional files are `None` when not produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub summary: RunSummary,
    pub state_csv: PathBuf,
    pub controls_csv: Option<PathBuf>,
    pub adjoint_csv: Option<PathBuf>,
    pub baseline_csv: Option<PathBuf>,
    pub summary_txt: PathBuf,
    pub scenario_cfg: PathBuf,
    pub plot_script: Option<PathBuf>,
}

/// One row per grid node: the node time followed by every component.
pub fn format_csv(columns: &[&str], traj: &Trajectory) -> String {
    debug_assert_eq!(columns.len(), traj.dim());
    let mut out = String::with_capacity(traj.len() * (traj.dim() + 1) * 20);
    out.push('t');
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (k, row) in traj.rows().enumerate() {
        let _ = write!(out, "{}", traj.grid().node(k));
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_run(scenario: &Scenario, outcome: &Outcome) -> Result<RunArtifacts> {
    let dir = scenario.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let family = scenario.model.family();
    let compartments = family.compartments();

    let state_csv = dir.join("state.csv");
    write_file(&state_csv, &format_csv(compartments, &outcome.state))?;

    let controls_csv = match &outcome.controls {
        Some(c) => {
            let path = dir.join("controls.csv");
            write_file(&path, &format_csv(scenario.strategy.control_names(), c.as_trajectory()))?;
            Some(path)
        }
        None => None,
    };

    let adjoint_csv = match &outcome.adjoint {
        Some(phi) => {
            let names: Vec<String> = (1..=phi.dim()).map(|j| format!("phi{j}")).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let path = dir.join("adjoint.csv");
            write_file(&path, &format_csv(&names, phi))?;
            Some(path)
        }
        None => None,
    };

    let baseline_csv = match &outcome.baseline {
        Some(b) => {
            let path = dir.join("baseline.csv");
            write_file(&path, &format_csv(compartments, b))?;
            Some(path)
        }
        None => None,
    };

    let summary_txt = dir.join("summary.txt");
    write_file(&summary_txt, &outcome.summary.to_text())?;

    let scenario_cfg = dir.join("scenario.cfg");
    write_file(&scenario_cfg, &to_config_string(scenario))?;

    let plot_script = if scenario.emit_plots {
        let path = dir.join("plot.py");
        write_file(&path, &run_plot_script(scenario))?;
        Some(path)
    } else {
        None
    };

    Ok(RunArtifacts {
        dir,
        summary: outcome.summary.clone(),
        state_csv,
        controls_csv,
        adjoint_csv,
        baseline_csv,
        summary_txt,
        scenario_cfg,
        plot_script,
    })
}

const PY_LOADER: &str = r#"import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [float(r[j]) for r in body] for j, name in enumerate(header)}

"#;

fn run_plot_script(scenario: &Scenario) -> String {
    let family = scenario.model.family();
    let compartments = family.compartments();
    let mut py = String::from(PY_LOADER);
    let _ = writeln!(py, "COMPARTMENTS = {:?}", compartments);
    let _ = writeln!(py, "CONTROLS = {:?}", scenario.strategy.control_names());
    let _ = writeln!(py, "TITLE = {:?}", scenario.name);
    py.push_str(
        r#"
state = load(os.path.join(HERE, "state.csv"))
baseline_path = os.path.join(HERE, "baseline.csv")
baseline = load(baseline_path) if os.path.exists(baseline_path) else None
controls_path = os.path.join(HERE, "controls.csv")
controls = load(controls_path) if os.path.exists(controls_path) else None

panels = len(COMPARTMENTS) + (1 if controls else 0)
fig, axes = plt.subplots(panels, 1, figsize=(7, 2.2 * panels), sharex=True)
for ax, name in zip(axes, COMPARTMENTS):
    ax.plot(state["t"], state[name], label="with control")
    if baseline:
        ax.plot(baseline["t"], baseline[name], "--", label="without control")
    ax.set_ylabel(name)
    ax.legend(loc="best")
if controls:
    ax = axes[-1]
    for name in CONTROLS:
        ax.plot(controls["t"], controls[name], label=name)
    ax.set_ylabel("control")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="best")
axes[-1].set_xlabel("t")
fig.suptitle(TITLE)
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "plot.png")
fig.savefig(out, dpi=120)
"#,
    );
    py
}

pub(crate) fn comparison_plot_script(scenarios: &[Scenario]) -> String {
    let family = scenarios[0].model.family();
    let infected = family.compartments()[family.infected_index()];
    let recovered = family.compartments()[family.recovered_index()];
    let names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    let mut py = String::from(PY_LOADER);
    let _ = writeln!(py, "RUNS = {:?}", names);
    let _ = writeln!(py, "PANELS = {:?}", [infected, recovered]);
    py.push_str(
        r#"
fig, axes = plt.subplots(len(PANELS), 1, figsize=(7, 5), sharex=True)
for run in RUNS:
    state = load(os.path.join(HERE, run, "state.csv"))
    for ax, name in zip(axes, PANELS):
        ax.plot(state["t"], state[name], label=run)
for ax, name in zip(axes, PANELS):
    ax.set_ylabel(name)
    ax.legend(loc="best", fontsize="small")
axes[-1].set_xlabel("t")
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "comparison.png")
fig.savefig(out, dpi=120)
"#,
    );
    py
}
