//! On-disk scenario documents and their resolution into domain objects.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::aggregation::{GammaSigma, Objective, ObjectiveSet, WeightState};
use crate::augmentation::{lift_window_counter, CounterLift, WindowCounterObjective};
use crate::intertemporal::{linear_schedule, IntertemporalConfig, PreferenceSchedule};
use crate::model::{GeneralizedMdp, State};
use crate::planning::PlanConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Table keyed by state name, then action name.
pub type PairTable<T> = BTreeMap<String, BTreeMap<String, T>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    /// Defaults to the first state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    pub transitions: PairTable<TransitionDoc>,
    pub objectives: Vec<ObjectiveDoc>,
    #[serde(default)]
    pub aggregation: AggregationDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intertemporal: Option<IntertemporalDoc>,
    #[serde(default)]
    pub planner: PlannerDoc,
}

/// A successor state name or a distribution over successor names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransitionDoc {
    Next(String),
    Distribution(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiscountDoc {
    Constant(f64),
    Table(PairTable<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub name: String,
    /// Missing pairs pay zero.
    #[serde(default)]
    pub rewards: PairTable<f64>,
    pub discount: DiscountDoc,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDoc {
    pub n: usize,
    pub trigger: String,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationDoc {
    #[serde(default = "default_gamma_sigma")]
    pub gamma_sigma: String,
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub allow_negative_weights: bool,
}

fn default_gamma_sigma() -> String {
    "max".into()
}

impl Default for AggregationDoc {
    fn default() -> Self {
        Self { gamma_sigma: default_gamma_sigma(), constant: 0.0, allow_negative_weights: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntertemporalDoc {
    /// `none`, `nstep` or `historical`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleDoc>,
}

/// Weights by objective name; names missing from `w_start` take the
/// objective's own weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_start: Option<BTreeMap<String, f64>>,
    pub w_end: BTreeMap<String, f64>,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerDoc {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_period")]
    pub max_cycle_period: usize,
}

fn default_horizon() -> usize {
    PlanConfig::default().horizon
}

fn default_period() -> usize {
    PlanConfig::default().max_cycle_period
}

impl Default for PlannerDoc {
    fn default() -> Self {
        Self { horizon: default_horizon(), max_cycle_period: default_period() }
    }
}

/// A validated scenario ready for the commands.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    /// Objectives in document order, over the lifted space when a window
    /// rule is present.
    pub objectives: ObjectiveSet,
    pub lift: Option<CounterLift>,
    /// Start in the (possibly lifted) state space.
    pub start: State,
    pub weights: WeightState,
    pub gamma_sigma: GammaSigma,
    pub schedule: PreferenceSchedule,
    pub intertemporal: IntertemporalConfig,
    pub plan: PlanConfig,
}

impl Scenario {
    pub fn objective_names(&self) -> Vec<&str> {
        self.objectives.iter().map(|o| o.name.as_str()).collect()
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let doc = parse_document(&text)?;
    resolve(doc)
}

/// Parses JSON text against the document schema.
pub fn parse_document(text: &str) -> Result<ScenarioDoc, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() || inner.is_io() {
            return CliError::parse(format!("malformed JSON: {inner}"));
        }
        let message = inner.to_string();
        let full = match message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            Some(field) if path == "." => field.to_string(),
            Some(field) => format!("{path}.{field}"),
            None => path,
        };
        CliError::schema(format!("schema violation at {full}: {message}"))
    })?;
    de.end().map_err(|e| CliError::parse(format!("malformed JSON: {e}")))?;
    Ok(doc)
}

fn index_names(names: &[String], what: &str) -> Result<HashMap<String, usize>, CliError> {
    if names.is_empty() {
        return Err(CliError::semantic(format!("no {what}s declared")));
    }
    let mut map = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        if map.insert(name.clone(), i).is_some() {
            return Err(CliError::semantic(format!("duplicate {what} `{name}`")));
        }
    }
    Ok(map)
}

fn lookup(map: &HashMap<String, usize>, name: &str, what: &str, context: &str) -> Result<usize, CliError> {
    map.get(name).copied().ok_or_else(|| CliError::semantic(format!("{context}: unknown {what} `{name}`")))
}

/// Expands a pair table into a flat `s·|A| + a` table.
fn expand_table(
    table: &PairTable<f64>,
    states: &HashMap<String, usize>,
    actions: &HashMap<String, usize>,
    n_actions: usize,
    fill: Option<f64>,
    context: &str,
) -> Result<Vec<f64>, CliError> {
    let mut flat = vec![None; states.len() * n_actions];
    for (s_name, row) in table {
        let s = lookup(states, s_name, "state", context)?;
        for (a_name, &v) in row {
            let a = lookup(actions, a_name, "action", context)?;
            flat[s * n_actions + a] = Some(v);
        }
    }
    flat.into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.or(fill).ok_or_else(|| {
                CliError::semantic(format!("{context}: no entry for pair ({}, {})", k / n_actions, k % n_actions))
            })
        })
        .collect()
}

pub fn resolve(doc: ScenarioDoc) -> Result<Scenario, CliError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::semantic(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    let states = index_names(&doc.states, "state")?;
    let actions = index_names(&doc.actions, "action")?;
    if let Some(bad) =
        doc.actions.iter().find(|a| a.is_empty() || a.chars().any(|c| c.is_whitespace() || "(),*".contains(c)))
    {
        return Err(CliError::semantic(format!("action name `{bad}` may not contain whitespace or any of ( ) , *")));
    }
    let (ns, na) = (doc.states.len(), doc.actions.len());

    let mut transition = vec![Vec::new(); ns * na];
    for (s_name, row) in &doc.transitions {
        let s = lookup(&states, s_name, "state", "transitions")?;
        for (a_name, t) in row {
            let a = lookup(&actions, a_name, "action", "transitions")?;
            let mut dist = vec![0.0; ns];
            match t {
                TransitionDoc::Next(next) => dist[lookup(&states, next, "state", "transitions")?] = 1.0,
                TransitionDoc::Distribution(map) => {
                    for (next, &p) in map {
                        dist[lookup(&states, next, "state", "transitions")?] += p;
                    }
                }
            }
            transition[s * na + a] = dist;
        }
    }
    if let Some(k) = transition.iter().position(Vec::is_empty) {
        return Err(CliError::semantic(format!(
            "transitions: no entry for ({}, {})",
            doc.states[k / na],
            doc.actions[k % na]
        )));
    }

    if doc.objectives.is_empty() {
        return Err(CliError::semantic("no objectives declared"));
    }
    let mut seen = HashMap::new();
    for (i, o) in doc.objectives.iter().enumerate() {
        if seen.insert(o.name.clone(), i).is_some() {
            return Err(CliError::semantic(format!("duplicate objective `{}`", o.name)));
        }
    }

    let mut base = Vec::new();
    let mut window: Option<(usize, WindowCounterObjective)> = None;
    for (i, o) in doc.objectives.iter().enumerate() {
        let context = format!("objective `{}`", o.name);
        if let Some(w) = &o.window {
            if window.is_some() {
                return Err(CliError::semantic("at most one objective may carry a window rule"));
            }
            let DiscountDoc::Constant(discount) = o.discount else {
                return Err(CliError::semantic(format!("{context}: a window objective needs a constant discount")));
            };
            if w.n == 0 {
                return Err(CliError::semantic(format!("{context}: window n must be at least 1")));
            }
            if !o.rewards.is_empty() {
                return Err(CliError::semantic(format!("{context}: a window objective takes no rewards table")));
            }
            let trigger = lookup(&actions, &w.trigger, "action", &context)?;
            window = Some((
                i,
                WindowCounterObjective { name: o.name.clone(), trigger, reward: w.reward, window: w.n, discount },
            ));
            continue;
        }
        let reward = expand_table(&o.rewards, &states, &actions, na, Some(0.0), &context)?;
        let discount = match &o.discount {
            DiscountDoc::Constant(g) => vec![*g; ns * na],
            DiscountDoc::Table(t) => expand_table(t, &states, &actions, na, None, &context)?,
        };
        let mdp = GeneralizedMdp::new(ns, na, transition.clone(), reward, discount).map_err(CliError::semantic_from)?;
        mdp.ensure_valid().map_err(|e| CliError::semantic(format!("{context}: {e}")))?;
        base.push(Objective::new(o.name.clone(), mdp));
    }

    let (objectives, lift) = match window {
        None => (ObjectiveSet::new(base).map_err(CliError::semantic_from)?, None),
        Some((at, rule)) => {
            if base.is_empty() {
                // The dynamics still need a host objective to lift.
                let host = GeneralizedMdp::new(ns, na, transition.clone(), vec![0.0; ns * na], vec![0.0; ns * na])
                    .map_err(CliError::semantic_from)?;
                let host_set = ObjectiveSet::new(vec![Objective::new("", host)]).map_err(CliError::semantic_from)?;
                let lifted = lift_window_counter(&rule, &host_set).map_err(CliError::semantic_from)?;
                (ObjectiveSet::new(vec![lifted.window]).map_err(CliError::semantic_from)?, Some(lifted.lift))
            } else {
                let base_set = ObjectiveSet::new(base).map_err(CliError::semantic_from)?;
                let lifted = lift_window_counter(&rule, &base_set).map_err(CliError::semantic_from)?;
                let mut ordered = lifted.base;
                ordered.insert(at, lifted.window);
                (ObjectiveSet::new(ordered).map_err(CliError::semantic_from)?, Some(lifted.lift))
            }
        }
    };

    let start_base = match &doc.start {
        Some(name) => lookup(&states, name, "state", "start")?,
        None => 0,
    };
    let start = lift.map_or(start_base, |l| l.initial(start_base));

    let allow_negative = doc.aggregation.allow_negative_weights;
    let check_weights = |w: &[f64], context: &str| -> Result<(), CliError> {
        if !allow_negative && w.iter().any(|&x| x < 0.0) {
            return Err(CliError::semantic(format!(
                "{context}: negative weight requires aggregation.allow_negative_weights"
            )));
        }
        Ok(())
    };
    let initial: Vec<f64> = doc.objectives.iter().map(|o| o.weight).collect();
    check_weights(&initial, "objectives")?;
    let weights =
        WeightState::with_constant(initial.clone(), doc.aggregation.constant).map_err(CliError::semantic_from)?;
    let gamma_sigma = parse_gamma_sigma(&doc.aggregation.gamma_sigma)?;

    let by_name = |map: &BTreeMap<String, f64>, fallback: &[f64], context: &str| -> Result<Vec<f64>, CliError> {
        let mut w = fallback.to_vec();
        for (name, &v) in map {
            w[lookup(&seen, name, "objective", context)?] = v;
        }
        check_weights(&w, context)?;
        Ok(w)
    };
    let (schedule, intertemporal) = match &doc.intertemporal {
        None => {
            (PreferenceSchedule::constant(initial.clone()).map_err(CliError::semantic_from)?, IntertemporalConfig::None)
        }
        Some(it) => {
            let schedule = match &it.schedule {
                None => PreferenceSchedule::constant(initial.clone()).map_err(CliError::semantic_from)?,
                Some(sd) => {
                    let w_start = match &sd.w_start {
                        Some(m) => by_name(m, &initial, "schedule.w_start")?,
                        None => initial.clone(),
                    };
                    let w_end = by_name(&sd.w_end, &initial, "schedule.w_end")?;
                    linear_schedule(&w_start, &w_end, sd.t).map_err(CliError::semantic_from)?
                }
            };
            let mode = match it.mode.as_str() {
                "none" => IntertemporalConfig::None,
                "nstep" => IntertemporalConfig::NStep(
                    it.n.ok_or_else(|| CliError::semantic("intertemporal: mode nstep needs n"))?,
                ),
                "historical" => IntertemporalConfig::Historical(
                    it.eta.ok_or_else(|| CliError::semantic("intertemporal: mode historical needs eta"))?,
                ),
                other => return Err(CliError::semantic(format!("intertemporal: unknown mode `{other}`"))),
            };
            mode.validate().map_err(|e| CliError::semantic(format!("intertemporal: {e}")))?;
            (schedule, mode)
        }
    };

    let plan = PlanConfig {
        horizon: doc.planner.horizon,
        max_cycle_period: doc.planner.max_cycle_period,
        gamma_sigma,
        ..PlanConfig::default()
    };
    Ok(Scenario {
        state_names: doc.states.clone(),
        action_names: doc.actions.clone(),
        doc,
        objectives,
        lift,
        start,
        weights,
        gamma_sigma,
        schedule,
        intertemporal,
        plan,
    })
}

/// `max`, `normalize` or `const:<value>`.
pub fn parse_gamma_sigma(text: &str) -> Result<GammaSigma, CliError> {
    match text {
        "max" => Ok(GammaSigma::MaxIndividual),
        "normalize" => Ok(GammaSigma::WeightNormalizing),
        other => {
            let value = other
                .strip_prefix("const:")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CliError::semantic(format!("aggregation.gamma_sigma: cannot parse `{other}`")))?;
            GammaSigma::constant(value).map_err(|e| CliError::semantic(format!("aggregation.gamma_sigma: {e}")))
        }
    }
}
