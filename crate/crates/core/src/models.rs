//! Scaled SIR and SEIR dynamics, the controlled variants and their running costs.
//!
//! State layout is `[s, i, r]` for SIR and `[s, e, i, r]` for SEIR. All
//! compartments are proportions of a constant total population. Controls only
//! move mass from `s` or `i` into `r`, so every field conserves `Σx`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirParams {
    /// ν, per day.
    pub infection_rate: f64,
    /// δ, per day.
    pub recovery_rate: f64,
}

impl SirParams {
    pub fn new(infection_rate: f64, recovery_rate: f64) -> Result<Self> {
        let p = Self {
            infection_rate,
            recovery_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("model.nu", self.infection_rate)?;
        check_rate("model.delta", self.recovery_rate)
    }
}

impl Default for SirParams {
    fn default() -> Self {
        Self {
            infection_rate: 0.2,
            recovery_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeirParams {
    /// ν, per day.
    pub transmission_rate: f64,
    /// ρ, rate at which exposed become infectious, per day.
    pub infectious_rate: f64,
    /// δ, per day.
    pub recovery_rate: f64,
}

impl SeirParams {
    pub fn new(transmission_rate: f64, infectious_rate: f64, recovery_rate: f64) -> Result<Self> {
        let p = Self {
            transmission_rate,
            infectious_rate,
            recovery_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("model.nu", self.transmission_rate)?;
        check_rate("model.rho", self.infectious_rate)?;
        check_rate("model.delta", self.recovery_rate)
    }
}

impl Default for SeirParams {
    fn default() -> Self {
        Self {
            transmission_rate: 0.2,
            infectious_rate: 0.1887,
            recovery_rate: 0.1,
        }
    }
}

fn check_rate(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("rate must be finite and nonnegative, got {v}")))
    }
}

fn check_weight(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("weight must be positive, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Sir,
    Seir,
}

impl ModelFamily {
    pub fn n_states(self) -> usize {
        match self {
            ModelFamily::Sir => 3,
            ModelFamily::Seir => 4,
        }
    }

    pub fn compartments(self) -> &'static [&'static str] {
        match self {
            ModelFamily::Sir => &["s", "i", "r"],
            ModelFamily::Seir => &["s", "e", "i", "r"],
        }
    }

    /// Index of the infected compartment.
    pub fn infected_index(self) -> usize {
        match self {
            ModelFamily::Sir => 1,
            ModelFamily::Seir => 2,
        }
    }

    pub fn recovered_index(self) -> usize {
        self.n_states() - 1
    }

    pub fn uncontrolled(self) -> StrategyTag {
        match self {
            ModelFamily::Sir => StrategyTag::SirUncontrolled,
            ModelFamily::Seir => StrategyTag::SeirUncontrolled,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Sir => "sir",
            ModelFamily::Seir => "seir",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Sir(SirParams),
    Seir(SeirParams),
}

impl ModelParams {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelParams::Sir(_) => ModelFamily::Sir,
            ModelParams::Seir(_) => ModelFamily::Seir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Sir(p) => p.validate(),
            ModelParams::Seir(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyTag {
    SirUncontrolled,
    SirVaccination,
    SirTreatmentEducation,
    SeirUncontrolled,
    SeirVaccination,
    SeirVaccinationExposedWeighted,
    SeirTreatmentEducation,
}

impl StrategyTag {
    pub const ALL: [StrategyTag; 7] = [
        StrategyTag::SirUncontrolled,
        StrategyTag::SirVaccination,
        StrategyTag::SirTreatmentEducation,
        StrategyTag::SeirUncontrolled,
        StrategyTag::SeirVaccination,
        StrategyTag::SeirVaccinationExposedWeighted,
        StrategyTag::SeirTreatmentEducation,
    ];

    pub const CONTROLLED: [StrategyTag; 5] = [
        StrategyTag::SirVaccination,
        StrategyTag::SirTreatmentEducation,
        StrategyTag::SeirVaccination,
        StrategyTag::SeirVaccinationExposedWeighted,
        StrategyTag::SeirTreatmentEducation,
    ];

    pub fn family(self) -> ModelFamily {
        match self {
            StrategyTag::SirUncontrolled
            | StrategyTag::SirVaccination
            | StrategyTag::SirTreatmentEducation => ModelFamily::Sir,
            _ => ModelFamily::Seir,
        }
    }

    pub fn n_controls(self) -> usize {
        match self {
            StrategyTag::SirUncontrolled | StrategyTag::SeirUncontrolled => 0,
            StrategyTag::SirVaccination
            | StrategyTag::SeirVaccination
            | StrategyTag::SeirVaccinationExposedWeighted => 1,
            StrategyTag::SirTreatmentEducation | StrategyTag::SeirTreatmentEducation => 2,
        }
    }

    pub fn is_controlled(self) -> bool {
        self.n_controls() > 0
    }

    /// Column names for the control signals.
    pub fn control_names(self) -> &'static [&'static str] {
        match self.n_controls() {
            0 => &[],
            1 => &["eta"],
            _ => &["eta1", "eta2"],
        }
    }

    /// Config keys (below `weights.`) this strategy's objective needs.
    pub fn weight_keys(self) -> &'static [&'static str] {
        match self {
            StrategyTag::SirUncontrolled | StrategyTag::SeirUncontrolled => &[],
            StrategyTag::SirVaccination => &["b"],
            StrategyTag::SirTreatmentEducation => &["c1", "c2", "c3"],
            StrategyTag::SeirVaccination => &["d"],
            StrategyTag::SeirVaccinationExposedWeighted => &["k1", "k2", "k3"],
            StrategyTag::SeirTreatmentEducation => &["d1", "d2", "d3"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyTag::SirUncontrolled => "sir-uncontrolled",
            StrategyTag::SirVaccination => "sir-vaccination",
            StrategyTag::SirTreatmentEducation => "sir-treatment-education",
            StrategyTag::SeirUncontrolled => "seir-uncontrolled",
            StrategyTag::SeirVaccination => "seir-vaccination",
            StrategyTag::SeirVaccinationExposedWeighted => "seir-vaccination-exposed",
            StrategyTag::SeirTreatmentEducation => "seir-treatment-education",
        }
    }
}

impl fmt::Display for StrategyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = StrategyTag::ALL.iter().map(|t| t.as_str()).collect();
                Error::validation(
                    "strategy",
                    format!("unknown strategy `{s}` (expected one of {})", known.join(", ")),
                )
            })
    }
}

/// Weights of the quadratic-cost objectives, one variant per controlled strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostWeights {
    None,
    /// `i + (B/2)η²`
    SirVaccination { b: f64 },
    /// `C1 i + (C2/2)η1² + (C3/2)η2²`
    SirTreatmentEducation { c1: f64, c2: f64, c3: f64 },
    /// `i + (D/2)η²`
    SeirVaccination { d: f64 },
    /// `K1 e + K2 i + (K3/2)η²`
    SeirVaccinationExposedWeighted { k1: f64, k2: f64, k3: f64 },
    /// `D1 i + (D2/2)η1² + (D3/2)η2²`
    SeirTreatmentEducation { d1: f64, d2: f64, d3: f64 },
}

impl CostWeights {
    pub fn tag(&self) -> Option<StrategyTag> {
        Some(match self {
            CostWeights::None => return None,
            CostWeights::SirVaccination { .. } => StrategyTag::SirVaccination,
            CostWeights::SirTreatmentEducation { .. } => StrategyTag::SirTreatmentEducation,
            CostWeights::SeirVaccination { .. } => StrategyTag::SeirVaccination,
            CostWeights::SeirVaccinationExposedWeighted { .. } => {
                StrategyTag::SeirVaccinationExposedWeighted
            }
            CostWeights::SeirTreatmentEducation { .. } => StrategyTag::SeirTreatmentEducation,
        })
    }

    /// Weight values in the order of [`StrategyTag::weight_keys`].
    pub fn values(&self) -> Vec<f64> {
        match *self {
            CostWeights::None => vec![],
            CostWeights::SirVaccination { b } => vec![b],
            CostWeights::SirTreatmentEducation { c1, c2, c3 } => vec![c1, c2, c3],
            CostWeights::SeirVaccination { d } => vec![d],
            CostWeights::SeirVaccinationExposedWeighted { k1, k2, k3 } => vec![k1, k2, k3],
            CostWeights::SeirTreatmentEducation { d1, d2, d3 } => vec![d1, d2, d3],
        }
    }
}

/// A fully specified controlled (or uncontrolled) system: dynamics, weights
/// and, through [`crate::pmp`], adjoints and control characterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    SirUncontrolled(SirParams),
    SirVaccination { params: SirParams, b: f64 },
    SirTreatmentEducation { params: SirParams, c1: f64, c2: f64, c3: f64 },
    SeirUncontrolled(SeirParams),
    SeirVaccination { params: SeirParams, d: f64 },
    SeirVaccinationExposedWeighted { params: SeirParams, k1: f64, k2: f64, k3: f64 },
    SeirTreatmentEducation { params: SeirParams, d1: f64, d2: f64, d3: f64 },
}

impl Strategy {
    /// Assembles a strategy, checking that the model family and weights fit the tag.
    pub fn from_parts(tag: StrategyTag, params: ModelParams, weights: CostWeights) -> Result<Self> {
        let wrong_model = || Error::ModelMismatch {
            strategy: tag,
            expected: params.family().as_str(),
        };
        if tag.family() != params.family() {
            return Err(wrong_model());
        }
        if weights.tag() != tag.is_controlled().then_some(tag) {
            return Err(Error::validation(
                "weights",
                format!("weights {weights:?} do not match strategy {tag}"),
            ));
        }
        let strategy = match (params, weights) {
            (ModelParams::Sir(p), CostWeights::None) => Strategy::SirUncontrolled(p),
            (ModelParams::Sir(p), CostWeights::SirVaccination { b }) => {
                Strategy::SirVaccination { params: p, b }
            }
            (ModelParams::Sir(p), CostWeights::SirTreatmentEducation { c1, c2, c3 }) => {
                Strategy::SirTreatmentEducation { params: p, c1, c2, c3 }
            }
            (ModelParams::Seir(p), CostWeights::None) => Strategy::SeirUncontrolled(p),
            (ModelParams::Seir(p), CostWeights::SeirVaccination { d }) => {
                Strategy::SeirVaccination { params: p, d }
            }
            (ModelParams::Seir(p), CostWeights::SeirVaccinationExposedWeighted { k1, k2, k3 }) => {
                Strategy::SeirVaccinationExposedWeighted { params: p, k1, k2, k3 }
            }
            (ModelParams::Seir(p), CostWeights::SeirTreatmentEducation { d1, d2, d3 }) => {
                Strategy::SeirTreatmentEducation { params: p, d1, d2, d3 }
            }
            _ => return Err(wrong_model()),
        };
        strategy.validate()?;
        Ok(strategy)
    }

    pub fn uncontrolled(params: ModelParams) -> Self {
        match params {
            ModelParams::Sir(p) => Strategy::SirUncontrolled(p),
            ModelParams::Seir(p) => Strategy::SeirUncontrolled(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        for (key, w) in self.tag().weight_keys().iter().zip(self.weights().values()) {
            check_weight(&format!("weights.{key}"), w)?;
        }
        Ok(())
    }

    pub fn tag(&self) -> StrategyTag {
        match self {
            Strategy::SirUncontrolled(_) => StrategyTag::SirUncontrolled,
            Strategy::SirVaccination { .. } => StrategyTag::SirVaccination,
            Strategy::SirTreatmentEducation { .. } => StrategyTag::SirTreatmentEducation,
            Strategy::SeirUncontrolled(_) => StrategyTag::SeirUncontrolled,
            Strategy::SeirVaccination { .. } => StrategyTag::SeirVaccination,
            Strategy::SeirVaccinationExposedWeighted { .. } => {
                StrategyTag::SeirVaccinationExposedWeighted
            }
            Strategy::SeirTreatmentEducation { .. } => StrategyTag::SeirTreatmentEducation,
        }
    }

    pub fn family(&self) -> ModelFamily {
        self.tag().family()
    }

    pub fn n_states(&self) -> usize {
        self.family().n_states()
    }

    pub fn n_controls(&self) -> usize {
        self.tag().n_controls()
    }

    pub fn params(&self) -> ModelParams {
        match *self {
            Strategy::SirUncontrolled(params)
            | Strategy::SirVaccination { params, .. }
            | Strategy::SirTreatmentEducation { params, .. } => ModelParams::Sir(params),
            Strategy::SeirUncontrolled(params)
            | Strategy::SeirVaccination { params, .. }
            | Strategy::SeirVaccinationExposedWeighted { params, .. }
            | Strategy::SeirTreatmentEducation { params, .. } => ModelParams::Seir(params),
        }
    }

    pub fn weights(&self) -> CostWeights {
        match *self {
            Strategy::SirUncontrolled(_) | Strategy::SeirUncontrolled(_) => CostWeights::None,
            Strategy::SirVaccination { b, .. } => CostWeights::SirVaccination { b },
            Strategy::SirTreatmentEducation { c1, c2, c3, .. } => {
                CostWeights::SirTreatmentEducation { c1, c2, c3 }
            }
            Strategy::SeirVaccination { d, .. } => CostWeights::SeirVaccination { d },
            Strategy::SeirVaccinationExposedWeighted { k1, k2, k3, .. } => {
                CostWeights::SeirVaccinationExposedWeighted { k1, k2, k3 }
            }
            Strategy::SeirTreatmentEducation { d1, d2, d3, .. } => {
                CostWeights::SeirTreatmentEducation { d1, d2, d3 }
            }
        }
    }

    /// The same model with every control removed.
    pub fn without_controls(&self) -> Strategy {
        Strategy::uncontrolled(self.params())
    }

    pub(crate) fn check_arity(&self, x: &[f64], u: &[f64]) -> Result<()> {
        if x.len() != self.n_states() {
            return Err(Error::Shape(format!(
                "strategy {} expects a state of dimension {}, got {}",
                self.tag(),
                self.n_states(),
                x.len()
            )));
        }
        if u.len() != self.n_controls() {
            return Err(Error::Arity {
                strategy: self.tag(),
                expected: self.n_controls(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Right-hand side of the controlled dynamics, written into `out`.
    /// Slice lengths are not checked here; see [`Strategy::field`].
    pub fn field_into(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        match *self {
            Strategy::SirUncontrolled(p) => sir_rhs(&p, x, 0.0, 0.0, out),
            Strategy::SirVaccination { params, .. } => sir_rhs(&params, x, 0.0, u[0], out),
            Strategy::SirTreatmentEducation { params, .. } => {
                sir_rhs(&params, x, u[0], u[1], out)
            }
            Strategy::SeirUncontrolled(p) => seir_rhs(&p, x, 0.0, 0.0, out),
            Strategy::SeirVaccination { params, .. }
            | Strategy::SeirVaccinationExposedWeighted { params, .. } => {
                seir_rhs(&params, x, 0.0, u[0], out)
            }
            Strategy::SeirTreatmentEducation { params, .. } => {
                seir_rhs(&params, x, u[0], u[1], out)
            }
        }
    }

    /// Right-hand side of the controlled dynamics.
    pub fn field(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x, u)?;
        let mut out = vec![0.0; x.len()];
        self.field_into(x, u, &mut out);
        Ok(out)
    }

    /// Integrand of the objective functional. Uncontrolled strategies carry
    /// the bare infection burden `i(t)`.
    pub fn running_cost(&self, x: &[f64], u: &[f64]) -> Result<f64> {
        self.check_arity(x, u)?;
        Ok(self.running_cost_unchecked(x, u))
    }

    pub(crate) fn running_cost_unchecked(&self, x: &[f64], u: &[f64]) -> f64 {
        match *self {
            Strategy::SirUncontrolled(_) => x[1],
            Strategy::SirVaccination { b, .. } => x[1] + 0.5 * b * u[0] * u[0],
            Strategy::SirTreatmentEducation { c1, c2, c3, .. } => {
                c1 * x[1] + 0.5 * c2 * u[0] * u[0] + 0.5 * c3 * u[1] * u[1]
            }
            Strategy::SeirUncontrolled(_) => x[2],
            Strategy::SeirVaccination { d, .. } => x[2] + 0.5 * d * u[0] * u[0],
            Strategy::SeirVaccinationExposedWeighted { k1, k2, k3, .. } => {
                k1 * x[1] + k2 * x[2] + 0.5 * k3 * u[0] * u[0]
            }
            Strategy::SeirTreatmentEducation { d1, d2, d3, .. } => {
                d1 * x[2] + 0.5 * d2 * u[0] * u[0] + 0.5 * d3 * u[1] * u[1]
            }
        }
    }
}

/// `treat` moves i → r, `vacc` moves s → r.
#[inline]
fn sir_rhs(p: &SirParams, x: &[f64], treat: f64, vacc: f64, out: &mut [f64]) {
    let (s, i) = (x[0], x[1]);
    let infection = p.infection_rate * s * i;
    let recovery = p.recovery_rate * i;
    let treated = treat * i;
    let vaccinated = vacc * s;
    out[0] = -infection - vaccinated;
    out[1] = infection - recovery - treated;
    out[2] = recovery + treated + vaccinated;
}

#[inline]
fn seir_rhs(p: &SeirParams, x: &[f64], treat: f64, vacc: f64, out: &mut [f64]) {
    let (s, e, i) = (x[0], x[1], x[2]);
    let infection = p.transmission_rate * s * i;
    let onset = p.infectious_rate * e;
    let recovery = p.recovery_rate * i;
    let treated = treat * i;
    let vaccinated = vacc * s;
    out[0] = -infection - vaccinated;
    out[1] = infection - onset;
    out[2] = onset - recovery - treated;
    out[3] = recovery + treated + vaccinated;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SirState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl SirState {
    pub fn new(s: f64, i: f64, r: f64) -> Self {
        Self { s, i, r }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s, self.i, self.r]
    }
}

impl From<[f64; 3]> for SirState {
    fn from([s, i, r]: [f64; 3]) -> Self {
        Self { s, i, r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeirState {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

impl SeirState {
    pub fn new(s: f64, e: f64, i: f64, r: f64) -> Self {
        Self { s, e, i, r }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.e, self.i, self.r]
    }
}

impl From<[f64; 4]> for SeirState {
    fn from([s, e, i, r]: [f64; 4]) -> Self {
        Self { s, e, i, r }
    }
}

/// Time derivative of a SIR state under `strategy` with the given controls.
pub fn sir_field(state: &SirState, controls: &[f64], strategy: &Strategy) -> Result<SirState> {
    if strategy.family() != ModelFamily::Sir {
        return Err(Error::ModelMismatch {
            strategy: strategy.tag(),
            expected: "sir",
        });
    }
    let dx = strategy.field(&state.to_array(), controls)?;
    Ok(SirState::from([dx[0], dx[1], dx[2]]))
}

/// Time derivative of a SEIR state under `strategy` with the given controls.
pub fn seir_field(state: &SeirState, controls: &[f64], strategy: &Strategy) -> Result<SeirState> {
    if strategy.family() != ModelFamily::Seir {
        return Err(Error::ModelMismatch {
            strategy: strategy.tag(),
            expected: "seir",
        });
    }
    let dx = strategy.field(&state.to_array(), controls)?;
    Ok(SeirState::from([dx[0], dx[1], dx[2], dx[3]]))
}

/// Maps absolute compartment counts to proportions of `total`.
pub fn scale_population(counts: &[f64], total: f64) -> Result<Vec<f64>> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::InvalidPopulation(format!(
            "total population must be positive, got {total}"
        )));
    }
    if let Some(c) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::InvalidPopulation(format!(
            "compartment counts must be nonnegative, got {c}"
        )));
    }
    let sum: f64 = counts.iter().sum();
    if (sum - total).abs() > 1e-9 * total {
        return Err(Error::InconsistentPopulation { sum, total });
    }
    Ok(counts.iter().map(|c| c / total).collect())
}

/// Checks that `x` is a point of the probability simplex of the family's dimension.
pub fn validate_initial_state(family: ModelFamily, x: &[f64]) -> Result<()> {
    if x.len() != family.n_states() {
        return Err(Error::validation(
            "initial",
            format!(
                "{} model needs {} compartments, got {}",
                family.as_str(),
                family.n_states(),
                x.len()
            ),
        ));
    }
    for (name, v) in family.compartments().iter().zip(x) {
        if !(v.is_finite() && (0.0..=1.0).contains(v)) {
            return Err(Error::validation(
                format!("initial.{name}"),
                format!("proportion must lie in [0, 1], got {v}"),
            ));
        }
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::validation(
            "initial",
            format!("proportions must sum to 1, got {sum}"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sir() -> SirParams {
        SirParams::default()
    }

    fn seir() -> SeirParams {
        SeirParams::default()
    }

    #[test]
    fn uncontrolled_sir_by_hand() {
        let d = sir_field(&SirState::new(0.95, 0.05, 0.0), &[], &Strategy::SirUncontrolled(sir()))
            .unwrap();
        assert!((d.s + 0.0095).abs() < 1e-15);
        assert!((d.i - 0.0045).abs() < 1e-15);
        assert!((d.r - 0.005).abs() < 1e-15);
    }

    #[test]
    fn uncontrolled_seir_exposed_rate() {
        let d = seir_field(
            &SeirState::new(0.88, 0.07, 0.05, 0.0),
            &[],
            &Strategy::SeirUncontrolled(seir()),
        )
        .unwrap();
        assert!((d.e - -0.004409).abs() < 1e-12, "{}", d.e);
    }

    #[test]
    fn infection_free_state_is_invariant() {
        let strat = Strategy::SirVaccination { params: sir(), b: 1.0 };
        let d = sir_field(&SirState::new(0.7, 0.0, 0.3), &[0.8], &strat).unwrap();
        assert_eq!(d.i, 0.0);

        let strat = Strategy::SeirTreatmentEducation { params: seir(), d1: 1.0, d2: 5.0, d3: 5.0 };
        let d = seir_field(&SeirState::new(0.6, 0.0, 0.0, 0.4), &[0.5, 0.5], &strat).unwrap();
        assert_eq!((d.e, d.i), (0.0, 0.0));
        assert_eq!(d.s, -0.3);
        assert_eq!(d.r, 0.3);
    }

    #[test]
    fn running_cost_by_hand() {
        let vacc = Strategy::SirVaccination { params: sir(), b: 1.0 };
        assert_eq!(vacc.running_cost(&[0.95, 0.05, 0.0], &[0.0]).unwrap(), 0.05);

        let exposed = Strategy::SeirVaccinationExposedWeighted {
            params: seir(),
            k1: 1.0,
            k2: 5.0,
            k3: 5.0,
        };
        let c = exposed.running_cost(&[0.83, 0.07, 0.05, 0.05], &[1.0]).unwrap();
        assert!((c - 2.82).abs() < 1e-12);
    }

    #[test]
    fn arity_mismatch() {
        let strat = Strategy::SirTreatmentEducation { params: sir(), c1: 1.0, c2: 5.0, c3: 5.0 };
        let err = strat.field(&[0.9, 0.1, 0.0], &[0.1]).unwrap_err();
        assert!(matches!(err, Error::Arity { expected: 2, got: 1, .. }));
        let err = sir_field(&SirState::default(), &[0.1], &Strategy::SirUncontrolled(sir()))
            .unwrap_err();
        assert!(matches!(err, Error::Arity { expected: 0, got: 1, .. }));
    }

    #[test]
    fn family_mismatch() {
        let err = seir_field(&SeirState::default(), &[], &Strategy::SirUncontrolled(sir()))
            .unwrap_err();
        assert!(matches!(err, Error::ModelMismatch { .. }));
        let err = Strategy::from_parts(
            StrategyTag::SirVaccination,
            ModelParams::Seir(seir()),
            CostWeights::SirVaccination { b: 1.0 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::ModelMismatch { .. }));
    }

    #[test]
    fn from_parts_checks_weights() {
        let ok = Strategy::from_parts(
            StrategyTag::SeirVaccination,
            ModelParams::Seir(seir()),
            CostWeights::SeirVaccination { d: 5.0 },
        )
        .unwrap();
        assert_eq!(ok.tag(), StrategyTag::SeirVaccination);
        assert_eq!(ok.weights(), CostWeights::SeirVaccination { d: 5.0 });

        let err = Strategy::from_parts(
            StrategyTag::SeirVaccination,
            ModelParams::Seir(seir()),
            CostWeights::SeirVaccination { d: 0.0 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "weights.d"));

        assert!(Strategy::from_parts(
            StrategyTag::SeirVaccination,
            ModelParams::Seir(seir()),
            CostWeights::None,
        )
        .is_err());
    }

    #[test]
    fn tags_round_trip_through_strings() {
        for tag in StrategyTag::ALL {
            assert_eq!(tag.as_str().parse::<StrategyTag>().unwrap(), tag);
        }
        assert!("sir-quarantine".parse::<StrategyTag>().is_err());
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scale_population(&[95.0, 5.0, 0.0], 100.0).unwrap(), vec![0.95, 0.05, 0.0]);
        assert_eq!(
            scale_population(&[88.0, 7.0, 5.0, 0.0], 100.0).unwrap(),
            vec![0.88, 0.07, 0.05, 0.0]
        );
        assert_eq!(scale_population(&[0.0, 0.0, 250.0], 250.0).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn scaling_rejects_inconsistent_counts() {
        assert!(matches!(
            scale_population(&[95.0, 5.0, 1.0], 100.0),
            Err(Error::InconsistentPopulation { .. })
        ));
        assert!(scale_population(&[1.0], 0.0).is_err());
        assert!(scale_population(&[-1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn simplex_validation() {
        assert!(validate_initial_state(ModelFamily::Sir, &[0.95, 0.05, 0.0]).is_ok());
        assert!(validate_initial_state(ModelFamily::Sir, &[0.85, 0.05, 0.0]).is_err());
        assert!(validate_initial_state(ModelFamily::Seir, &[0.95, 0.05, 0.0]).is_err());
        assert!(validate_initial_state(ModelFamily::Sir, &[1.1, -0.1, 0.0]).is_err());
    }
}
