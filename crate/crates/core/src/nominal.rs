//! Nominal transition systems in register form.
//!
//! A state is a control label together with a tuple of pairwise distinct
//! atoms; one label is one orbit. Transitions are given by equivariant rule
//! templates, so the whole (infinite) system is determined by finitely many
//! rules, and well-foundedness reduces to acyclicity of the finite orbit
//! graph on labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::wellfounded::{fixpoint_ranks, walk_to_cycle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NominalError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label `{label}` declared twice")]
    DuplicateLabel { label: String },
    #[error("rule {rule}: {reason}")]
    BadRule { rule: usize, reason: String },
    #[error("state {0} does not fit the label's arity or repeats an atom")]
    BadState(NState),
    #[error("the transition system has an infinite path from label `{0}`")]
    NotWellFounded(String),
    #[error("unsupported version {0}")]
    Version(u64),
}

/// An atom, identified by a natural number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Atom(pub u32);

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A register state `(label, [a₁, …, aₙ])`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NState {
    pub label: String,
    pub registers: Vec<Atom>,
}

impl NState {
    pub fn new(label: impl Into<String>, registers: impl IntoIterator<Item = u32>) -> Self {
        NState {
            label: label.into(),
            registers: registers.into_iter().map(Atom).collect(),
        }
    }

    /// `π · x` for an atom permutation given pointwise.
    pub fn permute(&self, pi: impl Fn(Atom) -> Atom) -> NState {
        NState {
            label: self.label.clone(),
            registers: self.registers.iter().map(|&a| pi(a)).collect(),
        }
    }

    /// Atoms not in `known` are replaced by `None`; the result identifies a
    /// state up to the choice of fresh names.
    pub fn canonical(&self, known: &BTreeSet<Atom>) -> (String, Vec<Option<Atom>>) {
        (
            self.label.clone(),
            self.registers
                .iter()
                .map(|a| known.contains(a).then_some(*a))
                .collect(),
        )
    }

    pub fn to_json(&self) -> Value {
        json!({"label": self.label, "registers": self.registers})
    }
}

impl fmt::Display for NState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},[", self.label)?;
        for (i, a) in self.registers.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("])")
    }
}

/// Which orbit of `(state, atom)` a rule fires on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputCase {
    /// The input atom is in no register.
    Fresh,
    /// The input atom is the one stored in register `i`.
    Register(usize),
}

/// Where a target register takes its atom from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assign {
    Input,
    Reg(usize),
    Fresh(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Template {
    pub label: String,
    pub assign: Vec<Assign>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub from: String,
    pub case: InputCase,
    pub to: Vec<Template>,
}

/// A nominal transition system in rule-template form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct NltsSpec {
    labels: BTreeMap<String, usize>,
    rules: Vec<Rule>,
    table: BTreeMap<(String, InputCase), Vec<Template>>,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u64>,
    labels: BTreeMap<String, usize>,
    #[serde(default)]
    rules: Vec<Rule>,
}

impl TryFrom<SpecRepr> for NltsSpec {
    type Error = NominalError;

    fn try_from(r: SpecRepr) -> Result<Self, Self::Error> {
        if let Some(v) = r.version.filter(|&v| v != 1) {
            return Err(NominalError::Version(v));
        }
        NltsSpec::new(r.labels, r.rules)
    }
}

impl From<NltsSpec> for SpecRepr {
    fn from(s: NltsSpec) -> Self {
        SpecRepr {
            kind: Some("nlts".into()),
            version: Some(1),
            labels: s.labels,
            rules: s.rules,
        }
    }
}

impl NltsSpec {
    pub fn new(
        labels: impl IntoIterator<Item = (String, usize)>,
        rules: Vec<Rule>,
    ) -> Result<Self, NominalError> {
        let mut table_labels = BTreeMap::new();
        for (label, arity) in labels {
            if table_labels.insert(label.clone(), arity).is_some() {
                return Err(NominalError::DuplicateLabel { label });
            }
        }
        let labels = table_labels;
        let mut table: BTreeMap<(String, InputCase), Vec<Template>> = BTreeMap::new();
        for (k, rule) in rules.iter().enumerate() {
            let bad = |reason: String| NominalError::BadRule { rule: k, reason };
            let src_arity = *labels
                .get(&rule.from)
                .ok_or_else(|| NominalError::UnknownLabel(rule.from.clone()))?;
            if let InputCase::Register(i) = rule.case {
                if i >= src_arity {
                    return Err(bad(format!("`{}` has no register {i}", rule.from)));
                }
            }
            for t in &rule.to {
                let arity = *labels
                    .get(&t.label)
                    .ok_or_else(|| NominalError::UnknownLabel(t.label.clone()))?;
                if t.assign.len() != arity {
                    return Err(bad(format!(
                        "`{}` has arity {arity}, template assigns {}",
                        t.label,
                        t.assign.len()
                    )));
                }
                let mut sources = BTreeSet::new();
                let mut fresh = BTreeSet::new();
                for a in &t.assign {
                    let fresh_clash = match *a {
                        Assign::Reg(j) if j >= src_arity => {
                            return Err(bad(format!("`{}` has no register {j}", rule.from)))
                        }
                        Assign::Reg(j) => !sources.insert(Some(j)),
                        Assign::Input => match rule.case {
                            InputCase::Register(i) => !sources.insert(Some(i)),
                            InputCase::Fresh => !sources.insert(None),
                        },
                        Assign::Fresh(m) => !fresh.insert(m),
                    };
                    if fresh_clash {
                        return Err(bad(format!("template for `{}` repeats an atom", t.label)));
                    }
                }
            }
            table
                .entry((rule.from.clone(), rule.case))
                .or_default()
                .extend(rule.to.iter().cloned());
        }
        Ok(NltsSpec {
            labels,
            rules,
            table,
        })
    }

    pub fn labels(&self) -> &BTreeMap<String, usize> {
        &self.labels
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serialisable")
    }

    fn check_state(&self, state: &NState) -> Result<(), NominalError> {
        let arity = *self
            .labels
            .get(&state.label)
            .ok_or_else(|| NominalError::UnknownLabel(state.label.clone()))?;
        let distinct: BTreeSet<_> = state.registers.iter().collect();
        if state.registers.len() != arity || distinct.len() != arity {
            return Err(NominalError::BadState(state.clone()));
        }
        Ok(())
    }

    /// The state with label `label` holding atoms `0, 1, …`.
    pub fn initial_state(&self, label: &str) -> Result<NState, NominalError> {
        let arity = *self
            .labels
            .get(label)
            .ok_or_else(|| NominalError::UnknownLabel(label.into()))?;
        Ok(NState::new(label, 0..arity as u32))
    }

    fn templates(&self, label: &str, case: InputCase) -> &[Template] {
        self.table
            .get(&(label.to_string(), case))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

fn input_case(state: &NState, a: Atom) -> InputCase {
    match state.registers.iter().position(|&r| r == a) {
        Some(i) => InputCase::Register(i),
        None => InputCase::Fresh,
    }
}

fn instantiate(t: &Template, state: &NState, a: Atom) -> NState {
    let mut placeholders: Vec<usize> = t
        .assign
        .iter()
        .filter_map(|x| match x {
            Assign::Fresh(m) => Some(*m),
            _ => None,
        })
        .collect();
    placeholders.sort_unstable();
    let mut used: BTreeSet<Atom> = state.registers.iter().copied().collect();
    used.insert(a);
    let mut fresh = BTreeMap::new();
    let mut next = 0u32;
    for m in placeholders {
        while used.contains(&Atom(next)) {
            next += 1;
        }
        fresh.insert(m, Atom(next));
        next += 1;
    }
    NState {
        label: t.label.clone(),
        registers: t
            .assign
            .iter()
            .map(|x| match *x {
                Assign::Input => a,
                Assign::Reg(j) => state.registers[j],
                Assign::Fresh(m) => fresh[&m],
            })
            .collect(),
    }
}

/// All `y` with `state →a y`. Fresh placeholders take the smallest atoms
/// outside the registers and the input, in placeholder order.
pub fn nominal_step(spec: &NltsSpec, state: &NState, a: Atom) -> Result<BTreeSet<NState>, NominalError> {
    spec.check_state(state)?;
    Ok(spec
        .templates(&state.label, input_case(state, a))
        .iter()
        .map(|t| instantiate(t, state, a))
        .collect())
}

/// The graph on labels with an edge `ℓ → ℓ'` whenever some rule of `ℓ`
/// has a template targeting `ℓ'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitGraph {
    pub adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl OrbitGraph {
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.adjacency
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (a.as_str(), b.as_str())))
    }

    fn indexed(&self) -> (Vec<&String>, Vec<Vec<usize>>) {
        let names: Vec<&String> = self.adjacency.keys().collect();
        let succ = self
            .adjacency
            .values()
            .map(|bs| {
                bs.iter()
                    .map(|b| names.binary_search(&b).expect("node"))
                    .collect()
            })
            .collect();
        (names, succ)
    }

    /// Label ranks; `None` for labels from which a cycle is reachable.
    pub fn ranks(&self) -> BTreeMap<String, Option<usize>> {
        let (names, succ) = self.indexed();
        names
            .into_iter()
            .cloned()
            .zip(fixpoint_ranks(&succ))
            .collect()
    }

    pub fn reachable_from(&self, label: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![label.to_string()];
        while let Some(l) = stack.pop() {
            if seen.insert(l.clone()) {
                if let Some(next) = self.adjacency.get(&l) {
                    stack.extend(next.iter().cloned());
                }
            }
        }
        seen
    }

    /// A label on a cycle reachable from `label`, if any.
    pub fn cycle_from(&self, label: &str) -> Option<String> {
        let (names, succ) = self.indexed();
        let ranks = fixpoint_ranks(&succ);
        let start = names.binary_search(&&label.to_string()).ok()?;
        ranks[start]
            .is_none()
            .then(|| names[walk_to_cycle(&succ, &ranks, start)].clone())
    }
}

pub fn orbit_graph(spec: &NltsSpec) -> OrbitGraph {
    let mut adjacency: BTreeMap<String, BTreeSet<String>> =
        spec.labels.keys().map(|l| (l.clone(), BTreeSet::new())).collect();
    for ((from, _), ts) in &spec.table {
        let out = adjacency.get_mut(from).expect("validated");
        out.extend(ts.iter().map(|t| t.label.clone()));
    }
    OrbitGraph { adjacency }
}

/// Decided on the orbit graph: every concrete transition follows a
/// template (projection), and every template fires from every state of its
/// source orbit since fresh atoms always exist (lifting).
pub fn nominal_is_well_founded(spec: &NltsSpec) -> bool {
    orbit_graph(spec).ranks().values().all(Option::is_some)
}

/// One step of a concrete path: the input atom and the state reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NominalStep {
    pub atom: Atom,
    pub state: NState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NominalPath {
    pub start: NState,
    pub steps: Vec<NominalStep>,
}

impl NominalPath {
    /// Re-checks every step with [`nominal_step`].
    pub fn verify(&self, spec: &NltsSpec) -> bool {
        let mut cur = &self.start;
        for s in &self.steps {
            match nominal_step(spec, cur, s.atom) {
                Ok(next) if next.contains(&s.state) => cur = &s.state,
                _ => return false,
            }
        }
        true
    }

    pub fn to_json(&self) -> Value {
        let mut states = vec![self.start.to_json()];
        states.extend(self.steps.iter().map(|s| {
            let mut v = s.state.to_json();
            v["input"] = json!(s.atom);
            v
        }));
        Value::Array(states)
    }
}

/// A verified concrete path of `length` steps from `state`, following
/// templates whose target label still reaches a cycle. `None` when no
/// infinite path leaves `state`.
pub fn nominal_infinite_path_witness(
    spec: &NltsSpec,
    state: &NState,
    length: usize,
) -> Result<Option<NominalPath>, NominalError> {
    spec.check_state(state)?;
    let ranks = orbit_graph(spec).ranks();
    if ranks[&state.label].is_some() {
        return Ok(None);
    }
    let mut cur = state.clone();
    let mut steps = Vec::with_capacity(length);
    for _ in 0..length {
        let (case, template) = spec
            .table
            .iter()
            .filter(|((from, _), _)| *from == cur.label)
            .flat_map(|((_, case), ts)| ts.iter().map(move |t| (*case, t)))
            .find(|(_, t)| ranks[&t.label].is_none())
            .expect("a label reaching a cycle has a successor that does");
        let atom = match case {
            InputCase::Register(i) => cur.registers[i],
            InputCase::Fresh => smallest_fresh(&cur.registers),
        };
        let next = instantiate(template, &cur, atom);
        if !nominal_step(spec, &cur, atom)?.contains(&next) {
            unreachable!("instantiated template is a transition");
        }
        steps.push(NominalStep {
            atom,
            state: next.clone(),
        });
        cur = next;
    }
    Ok(Some(NominalPath {
        start: state.clone(),
        steps,
    }))
}

fn smallest_fresh(regs: &[Atom]) -> Atom {
    (0..).map(Atom).find(|a| !regs.contains(a)).expect("atoms are infinite")
}

/// Labels reachable from the state's label. All states carrying them form
/// an orbit-finite subcoalgebra containing `state`.
pub fn nominal_koenig_extract(spec: &NltsSpec, state: &NState) -> Result<BTreeSet<String>, NominalError> {
    spec.check_state(state)?;
    let graph = orbit_graph(spec);
    if let Some((label, _)) = graph.ranks().into_iter().find(|(_, r)| r.is_none()) {
        return Err(NominalError::NotWellFounded(label));
    }
    Ok(graph.reachable_from(&state.label))
}

/// A random atom relevant to `state`: a register, or a fresh atom drawn
/// from a small window above the registers.
pub fn random_input<R: Rng + ?Sized>(state: &NState, rng: &mut R) -> Atom {
    if !state.registers.is_empty() && rng.gen_bool(0.5) {
        *state.registers.choose(rng).expect("non-empty")
    } else {
        let top = state.registers.iter().map(|a| a.0).max().map_or(0, |m| m + 1);
        Atom(rng.gen_range(0..=top + 3))
    }
}

/// A random concrete run of at most `max_steps` steps, stopping at the
/// first state without successors for the drawn input.
pub fn random_walk<R: Rng + ?Sized>(
    spec: &NltsSpec,
    state: &NState,
    max_steps: usize,
    rng: &mut R,
) -> Result<NominalPath, NominalError> {
    let mut cur = state.clone();
    let mut steps = Vec::new();
    while steps.len() < max_steps {
        let atom = random_input(&cur, rng);
        let next: Vec<NState> = nominal_step(spec, &cur, atom)?.into_iter().collect();
        let Some(y) = next.choose(rng) else { break };
        steps.push(NominalStep {
            atom,
            state: y.clone(),
        });
        cur = y.clone();
    }
    Ok(NominalPath {
        start: state.clone(),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(from: &str, case: InputCase, to: &[(&str, &[Assign])]) -> Rule {
        Rule {
            from: from.into(),
            case,
            to: to
                .iter()
                .map(|(l, a)| Template {
                    label: l.to_string(),
                    assign: a.to_vec(),
                })
                .collect(),
        }
    }

    fn labels(ls: &[(&str, usize)]) -> Vec<(String, usize)> {
        ls.iter().map(|(l, a)| (l.to_string(), *a)).collect()
    }

    fn two_label() -> NltsSpec {
        NltsSpec::new(
            labels(&[("l0", 1), ("l1", 1)]),
            vec![rule("l0", InputCase::Fresh, &[("l1", &[Assign::Input])])],
        )
        .unwrap()
    }

    fn fresh_loop() -> NltsSpec {
        NltsSpec::new(
            labels(&[("l0", 1)]),
            vec![rule("l0", InputCase::Fresh, &[("l0", &[Assign::Fresh(1)])])],
        )
        .unwrap()
    }

    #[test]
    fn step_examples() {
        let spec = two_label();
        let got = nominal_step(&spec, &NState::new("l0", [0]), Atom(1)).unwrap();
        assert_eq!(got, BTreeSet::from([NState::new("l1", [1])]));
        assert!(nominal_step(&spec, &NState::new("l1", [0]), Atom(1)).unwrap().is_empty());
        // the input equals register 0, and only the fresh case has rules
        assert!(nominal_step(&spec, &NState::new("l0", [0]), Atom(0)).unwrap().is_empty());
        let got = nominal_step(&fresh_loop(), &NState::new("l0", [0]), Atom(1)).unwrap();
        assert_eq!(got, BTreeSet::from([NState::new("l0", [2])]));
        assert_eq!(
            nominal_step(&spec, &NState::new("nope", []), Atom(0)),
            Err(NominalError::UnknownLabel("nope".into()))
        );
    }

    #[test]
    fn fresh_placeholders_in_order() {
        let spec = NltsSpec::new(
            labels(&[("a", 2), ("b", 3)]),
            vec![rule(
                "a",
                InputCase::Register(1),
                &[("b", &[Assign::Fresh(7), Assign::Reg(0), Assign::Fresh(2)])],
            )],
        )
        .unwrap();
        let got = nominal_step(&spec, &NState::new("a", [0, 2]), Atom(2)).unwrap();
        // free atoms are 1, 3, …; placeholder 2 gets 1, placeholder 7 gets 3
        assert_eq!(got, BTreeSet::from([NState::new("b", [3, 0, 1])]));
    }

    #[test]
    fn validation() {
        let err = NltsSpec::new(
            labels(&[("a", 1)]),
            vec![rule("a", InputCase::Register(0), &[("a", &[Assign::Input])])],
        );
        assert!(err.is_ok());
        let err = NltsSpec::new(
            labels(&[("a", 2)]),
            vec![rule("a", InputCase::Register(0), &[("a", &[Assign::Input, Assign::Reg(0)])])],
        );
        assert!(matches!(err, Err(NominalError::BadRule { rule: 0, .. })));
        let err = NltsSpec::new(
            labels(&[("a", 2)]),
            vec![rule("a", InputCase::Fresh, &[("a", &[Assign::Fresh(0), Assign::Fresh(0)])])],
        );
        assert!(matches!(err, Err(NominalError::BadRule { .. })));
        let err = NltsSpec::new(labels(&[("a", 1)]), vec![rule("a", InputCase::Fresh, &[("b", &[])])]);
        assert_eq!(err, Err(NominalError::UnknownLabel("b".into())));
        let err = NltsSpec::new(labels(&[("a", 0)]), vec![rule("a", InputCase::Register(0), &[])]);
        assert!(matches!(err, Err(NominalError::BadRule { .. })));
    }

    #[test]
    fn orbit_graph_examples() {
        let g = orbit_graph(&two_label());
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![("l0", "l1")]);
        assert!(nominal_is_well_founded(&two_label()));
        assert!(!nominal_is_well_founded(&fresh_loop()));
        let diamond = NltsSpec::new(
            labels(&[("l0", 0), ("l1", 0), ("l2", 0), ("l3", 0)]),
            vec![
                rule("l0", InputCase::Fresh, &[("l1", &[]), ("l2", &[])]),
                rule("l1", InputCase::Fresh, &[("l3", &[])]),
                rule("l2", InputCase::Fresh, &[("l3", &[])]),
            ],
        )
        .unwrap();
        assert!(nominal_is_well_founded(&diamond));
        assert_eq!(orbit_graph(&diamond).ranks()["l0"], Some(3));
        assert!(nominal_is_well_founded(&NltsSpec::new(vec![], vec![]).unwrap()));
    }

    #[test]
    fn witness_for_fresh_loop() {
        let spec = fresh_loop();
        let path = nominal_infinite_path_witness(&spec, &NState::new("l0", [0]), 100)
            .unwrap()
            .unwrap();
        assert_eq!(path.steps.len(), 100);
        assert!(path.verify(&spec));
        assert_eq!(
            nominal_infinite_path_witness(&two_label(), &NState::new("l0", [0]), 10).unwrap(),
            None
        );
    }

    #[test]
    fn koenig_examples() {
        let spec = two_label();
        assert_eq!(
            nominal_koenig_extract(&spec, &NState::new("l0", [0])).unwrap(),
            BTreeSet::from(["l0".to_string(), "l1".to_string()])
        );
        assert_eq!(
            nominal_koenig_extract(&spec, &NState::new("l1", [5])).unwrap(),
            BTreeSet::from(["l1".to_string()])
        );
        assert_eq!(
            nominal_koenig_extract(&fresh_loop(), &NState::new("l0", [0])),
            Err(NominalError::NotWellFounded("l0".into()))
        );
    }

    #[test]
    fn json_shape() {
        let v = json!({"labels": {"l0": 1, "l1": 1},
                       "rules": [{"from": "l0", "case": "fresh", "to": [{"label": "l1", "assign": ["input"]}]}]});
        let spec: NltsSpec = serde_json::from_value(v).unwrap();
        assert_eq!(spec, two_label());
        let back = spec.to_json();
        assert_eq!(back["kind"], "nlts");
        assert_eq!(serde_json::from_value::<NltsSpec>(back).unwrap(), spec);
        let v = json!({"labels": {"a": 2},
                       "rules": [{"from": "a", "case": {"register": 1},
                                  "to": [{"label": "a", "assign": [{"reg": 0}, {"fresh": 3}]}]}]});
        assert!(serde_json::from_value::<NltsSpec>(v).is_ok());
    }
}
