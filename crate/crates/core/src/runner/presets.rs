//! Built-in scenarios carrying the published parameter sets.
//!
//! Horizon and grid are not published; both presets use 100 days on 1000 steps.

use std::path::PathBuf;

use super::{Scenario, WeightTable};
use crate::fbs::FbsSettings;
use crate::models::{ModelParams, SeirParams, SirParams, StrategyTag};

pub const PRESET_NAMES: [&str; 2] = ["sir-fig2", "seir-fig5"];

/// One-line description of each preset, for listings.
pub fn describe(name: &str) -> Option<&'static str> {
    match name {
        "sir-fig2" => Some(
            "SIR, nu=0.2 delta=0.1, (s,i,r)=(0.95,0.05,0), B=1 C1=1 C2=5 C3=5; default strategy sir-vaccination",
        ),
        "seir-fig5" => Some(
            "SEIR, nu=0.2 rho=0.1887 delta=0.1, (s,e,i,r)=(0.88,0.07,0.05,0), D=5 K1=1 K2=5 K3=5 D1=1 D2=5 D3=5; default strategy seir-vaccination",
        ),
        _ => None,
    }
}

pub fn preset(name: &str) -> Option<Scenario> {
    let scenario = match name {
        "sir-fig2" => Scenario {
            name: name.into(),
            strategy: StrategyTag::SirVaccination,
            model: ModelParams::Sir(SirParams {
                infection_rate: 0.2,
                recovery_rate: 0.1,
            }),
            initial: vec![0.95, 0.05, 0.0],
            weights: WeightTable {
                b: Some(1.0),
                c1: Some(1.0),
                c2: Some(5.0),
                c3: Some(5.0),
                ..WeightTable::default()
            },
            settings: FbsSettings::default(),
            output_dir: PathBuf::from("out").join(name),
            emit_plots: true,
        },
        "seir-fig5" => Scenario {
            name: name.into(),
            strategy: StrategyTag::SeirVaccination,
            model: ModelParams::Seir(SeirParams {
                transmission_rate: 0.2,
                infectious_rate: 0.1887,
                recovery_rate: 0.1,
            }),
            initial: vec![0.88, 0.07, 0.05, 0.0],
            weights: WeightTable {
                d: Some(5.0),
                k1: Some(1.0),
                k2: Some(5.0),
                k3: Some(5.0),
                d1: Some(1.0),
                d2: Some(5.0),
                d3: Some(5.0),
                ..WeightTable::default()
            },
            settings: FbsSettings::default(),
            output_dir: PathBuf::from("out").join(name),
            emit_plots: true,
        },
        _ => return None,
    };
    Some(scenario)
}

/// The preset once per strategy of its model family, uncontrolled first.
/// Scenario names get the strategy appended.
pub fn preset_family(name: &str) -> Option<Vec<Scenario>> {
    let base = preset(name)?;
    let family = base.model.family();
    Some(
        StrategyTag::ALL
            .into_iter()
            .filter(|t| t.family() == family)
            .map(|tag| base.with_strategy(tag))
            .collect(),
    )
}
