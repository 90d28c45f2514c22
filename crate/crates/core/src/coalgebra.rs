//! Coalgebras, algebras, morphisms and subcoalgebras.
//!
//! A coalgebra is either a [`FiniteCoalgebra`] (an explicit table) or a
//! [`LazyCoalgebra`] (a structure rule queried on demand, for infinite
//! carriers). Both implement [`Coalgebra`]. Analyses that need the whole
//! carrier take a `FiniteCoalgebra`; searches over lazy carriers are always
//! budget-guarded.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::container::{Container, ContainerError, HStructure, StateId, Structure};

/// A set of states of some coalgebra.
pub type Subset = BTreeSet<StateId>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoalgebraError {
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("state `{0}` is listed twice")]
    DuplicateState(StateId),
    #[error("state `{0}` has no structure")]
    MissingStructure(StateId),
    #[error("structure given for `{0}`, which is not a state")]
    ExtraStructure(StateId),
    #[error("structure of `{from}` refers to `{to}`, which is not a state")]
    DanglingRef { from: StateId, to: StateId },
    #[error("structure of `{0}` does not match the functor")]
    IllTyped(StateId),
    #[error("the two coalgebras have different functors")]
    ContainerMismatch,
    #[error("`{0}` is not a state of the coalgebra")]
    NotInCarrier(StateId),
    #[error("map is undefined on state `{0}`")]
    UndefinedOn(StateId),
    #[error("new state `{0}` clashes with an existing state")]
    NameClash(StateId),
    #[error("subset is not closed under successors: `{from}` reaches `{to}`")]
    NotClosed { from: StateId, to: StateId },
    #[error("budget {budget} is smaller than the seed ({seed} states)")]
    InvalidBudget { budget: usize, seed: usize },
}

/// Anything that can answer "what is the structure of state `s`?".
pub trait Coalgebra {
    fn container(&self) -> &Container;

    fn structure(&self, state: &StateId) -> Result<HStructure, CoalgebraError>;

    /// Successors in the canonical graph: the support of the structure.
    fn successors(&self, state: &StateId) -> Result<BTreeSet<StateId>, CoalgebraError> {
        Ok(self.structure(state)?.support())
    }
}

/// A coalgebra on a finite, explicitly listed carrier.
#[derive(Clone, Debug)]
pub struct FiniteCoalgebra {
    container: Container,
    states: Vec<StateId>,
    index: HashMap<StateId, usize>,
    structure: Vec<HStructure>,
    succ: Vec<Vec<usize>>,
}

impl PartialEq for FiniteCoalgebra {
    fn eq(&self, other: &Self) -> bool {
        self.container == other.container
            && self.states == other.states
            && self.structure == other.structure
    }
}

impl Eq for FiniteCoalgebra {}

impl FiniteCoalgebra {
    /// Builds a coalgebra from `(state, structure)` pairs; the carrier order
    /// is the order of `entries`.
    pub fn new(
        container: Container,
        entries: impl IntoIterator<Item = (StateId, HStructure)>,
    ) -> Result<Self, CoalgebraError> {
        container.check()?;
        let mut states = Vec::new();
        let mut structure = Vec::new();
        let mut index = HashMap::new();
        for (s, h) in entries {
            if index.insert(s.clone(), states.len()).is_some() {
                return Err(CoalgebraError::DuplicateState(s));
            }
            states.push(s);
            structure.push(h);
        }
        let mut succ = Vec::with_capacity(states.len());
        for (s, h) in states.iter().zip(&structure) {
            if !container.validate(h) {
                return Err(CoalgebraError::IllTyped(s.clone()));
            }
            let mut out = Vec::new();
            for t in h.support() {
                match index.get(&t) {
                    Some(&j) => out.push(j),
                    None => {
                        return Err(CoalgebraError::DanglingRef {
                            from: s.clone(),
                            to: t,
                        })
                    }
                }
            }
            succ.push(out);
        }
        Ok(FiniteCoalgebra {
            container,
            states,
            index,
            structure,
            succ,
        })
    }

    /// Builds a coalgebra from a carrier list and a structure table, checking
    /// that the table is total on the carrier and mentions nothing else.
    pub fn from_table(
        container: Container,
        states: Vec<StateId>,
        mut table: BTreeMap<StateId, HStructure>,
    ) -> Result<Self, CoalgebraError> {
        let mut entries = Vec::with_capacity(states.len());
        for s in states {
            let h = table
                .remove(&s)
                .ok_or_else(|| CoalgebraError::MissingStructure(s.clone()))?;
            entries.push((s, h));
        }
        if let Some((extra, _)) = table.into_iter().next() {
            return Err(CoalgebraError::ExtraStructure(extra));
        }
        FiniteCoalgebra::new(container, entries)
    }

    /// A graph (`P_ω`-coalgebra) from adjacency lists.
    pub fn graph<'a>(
        adjacency: impl IntoIterator<Item = (&'a str, &'a [&'a str])>,
    ) -> Result<Self, CoalgebraError> {
        let mut entries = Vec::new();
        for (s, succ) in adjacency {
            let h = Structure::set(
                succ.iter()
                    .map(|t| StateId::new(*t).map(Structure::Slot))
                    .collect::<Result<Vec<_>, _>>()?,
            );
            entries.push((StateId::new(s)?, h));
        }
        FiniteCoalgebra::new(Container::graph(), entries)
    }

    pub fn empty(container: Container) -> Self {
        FiniteCoalgebra::new(container, []).expect("empty coalgebra is always valid")
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, s: &StateId) -> bool {
        self.index.contains_key(s)
    }

    pub fn carrier(&self) -> Subset {
        self.states.iter().cloned().collect()
    }

    pub fn structure_of(&self, s: &StateId) -> Option<&HStructure> {
        self.index.get(s).map(|&i| &self.structure[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&StateId, &HStructure)> {
        self.states.iter().zip(&self.structure)
    }

    pub(crate) fn index_of(&self, s: &StateId) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Canonical-graph successors by carrier index.
    pub(crate) fn succ_indices(&self) -> &[Vec<usize>] {
        &self.succ
    }

    pub fn successors_of(&self, s: &StateId) -> Option<impl Iterator<Item = &StateId>> {
        self.index
            .get(s)
            .map(|&i| self.succ[i].iter().map(|&j| &self.states[j]))
    }

    /// The canonical graph: every state points to the support of its structure.
    pub fn canonical_graph(&self) -> FiniteCoalgebra {
        let structure = self
            .succ
            .iter()
            .map(|out| Structure::set(out.iter().map(|&j| Structure::Slot(self.states[j].clone()))))
            .collect();
        FiniteCoalgebra {
            container: Container::graph(),
            states: self.states.clone(),
            index: self.index.clone(),
            structure,
            succ: self.succ.clone(),
        }
    }

    /// `x ∈ S ∧ x → y ⟹ y ∈ S`.
    pub fn is_subcoalgebra(&self, subset: &Subset) -> bool {
        subset.iter().all(|s| match self.index.get(s) {
            Some(&i) => self.succ[i].iter().all(|&j| subset.contains(&self.states[j])),
            None => false,
        })
    }

    /// For every state `x`: `x ∈ S ⟺ every successor of x lies in S`.
    pub fn is_cartesian_subcoalgebra(&self, subset: &Subset) -> bool {
        if subset.iter().any(|s| !self.contains(s)) {
            return false;
        }
        self.states.iter().enumerate().all(|(i, s)| {
            let closed = self.succ[i].iter().all(|&j| subset.contains(&self.states[j]));
            subset.contains(s) == closed
        })
    }

    /// The subcoalgebra on a successor-closed subset, in carrier order.
    pub fn restrict(&self, subset: &Subset) -> Result<FiniteCoalgebra, CoalgebraError> {
        for s in subset {
            let i = self
                .index_of(s)
                .ok_or_else(|| CoalgebraError::NotInCarrier(s.clone()))?;
            if let Some(&j) = self.succ[i].iter().find(|&&j| !subset.contains(&self.states[j])) {
                return Err(CoalgebraError::NotClosed {
                    from: s.clone(),
                    to: self.states[j].clone(),
                });
            }
        }
        FiniteCoalgebra::new(
            self.container.clone(),
            self.entries()
                .filter(|(s, _)| subset.contains(*s))
                .map(|(s, h)| (s.clone(), h.clone())),
        )
    }

    /// Coproduct extension `(C + X, c_p)`: the new states of `extension` with
    /// their structures `p(x)`, which may only mention old states. Old states
    /// keep their structure, so the inclusion of the old carrier is a
    /// coalgebra morphism.
    pub fn coproduct_extension(
        &self,
        extension: &[(StateId, HStructure)],
    ) -> Result<FiniteCoalgebra, CoalgebraError> {
        let mut fresh = BTreeSet::new();
        for (x, _) in extension {
            if self.contains(x) {
                return Err(CoalgebraError::NameClash(x.clone()));
            }
            if !fresh.insert(x) {
                return Err(CoalgebraError::DuplicateState(x.clone()));
            }
        }
        for (x, p) in extension {
            if !self.container.validate(p) {
                return Err(CoalgebraError::IllTyped(x.clone()));
            }
            if let Some(bad) = p.support().into_iter().find(|t| !self.contains(t)) {
                return Err(CoalgebraError::DanglingRef {
                    from: x.clone(),
                    to: bad,
                });
            }
        }
        FiniteCoalgebra::new(
            self.container.clone(),
            self.entries()
                .map(|(s, h)| (s.clone(), h.clone()))
                .chain(extension.iter().cloned()),
        )
    }

    /// Identity map on the carrier; the inclusion into any extension.
    pub fn inclusion(&self) -> BTreeMap<StateId, StateId> {
        self.states.iter().map(|s| (s.clone(), s.clone())).collect()
    }

    /// Presents this coalgebra through the lazy interface.
    pub fn to_lazy(&self) -> LazyCoalgebra {
        let this = self.clone();
        LazyCoalgebra::new("finite", self.container.clone(), move |s| {
            this.structure_of(s)
                .cloned()
                .ok_or_else(|| CoalgebraError::NotInCarrier(s.clone()))
        })
    }

    /// The coalgebra file format:
    /// `{"kind": "set-coalgebra", "version": 1, "functor": …, "states": […], "structure": {…}}`.
    pub fn to_json(&self) -> Value {
        let table: Map<String, Value> = self
            .entries()
            .map(|(s, h)| (s.as_str().to_owned(), h.to_json()))
            .collect();
        json!({
            "kind": "set-coalgebra",
            "version": 1,
            "functor": self.container.to_json(),
            "states": self.states.iter().map(StateId::as_str).collect::<Vec<_>>(),
            "structure": table,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CoalgebraError> {
        let schema = |m: &str| CoalgebraError::Container(ContainerError::Schema(m.to_owned()));
        let obj = v.as_object().ok_or_else(|| schema("a coalgebra must be an object"))?;
        let functor = obj.get("functor").ok_or_else(|| schema("missing `functor`"))?;
        let container = Container::from_json(functor)?;
        let states = obj
            .get("states")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("`states` must be a list"))?
            .iter()
            .map(|s| {
                s.as_str()
                    .ok_or_else(|| schema("state names must be strings"))
                    .and_then(|s| Ok(StateId::new(s)?))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let table = obj
            .get("structure")
            .and_then(Value::as_object)
            .ok_or_else(|| schema("`structure` must be an object"))?
            .iter()
            .map(|(k, h)| Ok((StateId::new(k.as_str())?, HStructure::from_json(h)?)))
            .collect::<Result<BTreeMap<_, _>, CoalgebraError>>()?;
        FiniteCoalgebra::from_table(container, states, table)
    }
}

impl Coalgebra for FiniteCoalgebra {
    fn container(&self) -> &Container {
        &self.container
    }

    fn structure(&self, state: &StateId) -> Result<HStructure, CoalgebraError> {
        self.structure_of(state)
            .cloned()
            .ok_or_else(|| CoalgebraError::NotInCarrier(state.clone()))
    }

    fn successors(&self, state: &StateId) -> Result<BTreeSet<StateId>, CoalgebraError> {
        let i = self
            .index_of(state)
            .ok_or_else(|| CoalgebraError::NotInCarrier(state.clone()))?;
        Ok(self.succ[i].iter().map(|&j| self.states[j].clone()).collect())
    }
}

impl fmt::Display for FiniteCoalgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coalgebra for H = {}", self.container)?;
        for (s, h) in self.entries() {
            writeln!(f, "  {s} ↦ {h}")?;
        }
        Ok(())
    }
}

type Rule = Arc<dyn Fn(&StateId) -> Result<HStructure, CoalgebraError> + Send + Sync>;

/// A coalgebra given by a structure rule; the carrier is whatever the rule
/// accepts. Rules must be pure.
#[derive(Clone)]
pub struct LazyCoalgebra {
    name: String,
    container: Container,
    rule: Rule,
}

impl LazyCoalgebra {
    pub fn new(
        name: impl Into<String>,
        container: Container,
        rule: impl Fn(&StateId) -> Result<HStructure, CoalgebraError> + Send + Sync + 'static,
    ) -> Self {
        LazyCoalgebra {
            name: name.into(),
            container,
            rule: Arc::new(rule),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn canonical_graph(&self) -> LazyCoalgebra {
        let inner = self.clone();
        LazyCoalgebra::new(
            format!("graph({})", self.name),
            Container::graph(),
            move |s| Ok(Structure::set(inner.successors(s)?.into_iter().map(Structure::Slot))),
        )
    }
}

impl fmt::Debug for LazyCoalgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyCoalgebra")
            .field("name", &self.name)
            .field("container", &self.container)
            .finish_non_exhaustive()
    }
}

impl Coalgebra for LazyCoalgebra {
    fn container(&self) -> &Container {
        &self.container
    }

    fn structure(&self, state: &StateId) -> Result<HStructure, CoalgebraError> {
        let h = (self.rule)(state)?;
        if !self.container.validate(&h) {
            return Err(CoalgebraError::IllTyped(state.clone()));
        }
        Ok(h)
    }
}

/// Checks `Hh ∘ c = d ∘ h` state by state.
///
/// Returns `Ok(false)` when the equation fails or `h` leaves the target
/// carrier; `Err` when the functors differ or `h` is undefined somewhere.
pub fn verify_coalgebra_morphism(
    h: &BTreeMap<StateId, StateId>,
    source: &FiniteCoalgebra,
    target: &FiniteCoalgebra,
) -> Result<bool, CoalgebraError> {
    if source.container != target.container {
        return Err(CoalgebraError::ContainerMismatch);
    }
    for (x, cx) in source.entries() {
        let hx = h
            .get(x)
            .ok_or_else(|| CoalgebraError::UndefinedOn(x.clone()))?;
        let Some(d_hx) = target.structure_of(hx) else {
            return Ok(false);
        };
        let mapped = cx.try_map(&mut |s| {
            h.get(s)
                .cloned()
                .ok_or_else(|| CoalgebraError::UndefinedOn(s.clone()))
        })?;
        if &mapped != d_hx {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of a budget-guarded successor closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    /// The closure is finite and is this subset.
    Closed(Subset),
    /// More than `budget` states were visited.
    BudgetExhausted { visited: usize },
}

impl Closure {
    pub fn closed(self) -> Option<Subset> {
        match self {
            Closure::Closed(s) => Some(s),
            Closure::BudgetExhausted { .. } => None,
        }
    }
}

/// Breadth-first successor closure of `seed`.
pub fn least_subcoalgebra(
    coalg: &dyn Coalgebra,
    seed: &Subset,
    budget: usize,
) -> Result<Closure, CoalgebraError> {
    if budget < seed.len() || budget == 0 {
        return Err(CoalgebraError::InvalidBudget {
            budget,
            seed: seed.len(),
        });
    }
    let mut visited: Subset = seed.clone();
    let mut queue: VecDeque<StateId> = seed.iter().cloned().collect();
    while let Some(s) = queue.pop_front() {
        for t in coalg.successors(&s)? {
            if visited.insert(t.clone()) {
                if visited.len() > budget {
                    return Ok(Closure::BudgetExhausted {
                        visited: visited.len(),
                    });
                }
                queue.push_back(t);
            }
        }
    }
    Ok(Closure::Closed(visited))
}

type Eval<V> = Arc<dyn Fn(&Structure<V>) -> V + Send + Sync>;

/// An algebra `a: HA → A`. Carrier values compare with their own `Ord`.
#[derive(Clone)]
pub struct Algebra<V> {
    name: String,
    container: Container,
    eval: Eval<V>,
}

impl<V> fmt::Debug for Algebra<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Algebra")
            .field("name", &self.name)
            .field("container", &self.container)
            .finish_non_exhaustive()
    }
}

impl<V> Algebra<V> {
    pub fn new(
        name: impl Into<String>,
        container: Container,
        eval: impl Fn(&Structure<V>) -> V + Send + Sync + 'static,
    ) -> Self {
        Algebra {
            name: name.into(),
            container,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn container(&self) -> &Container {
        &self.container
    }

    pub fn eval(&self, h: &Structure<V>) -> V {
        (self.eval)(h)
    }
}

impl Algebra<bool> {
    /// The induction algebra: true iff every slot holds true. On `P_ω` this
    /// sends `∅, {1}` to 1 and `{0}, {0, 1}` to 0.
    pub fn induction(container: Container) -> Self {
        Algebra::new("induction", container, |h: &Structure<bool>| {
            h.slots().into_iter().all(|b| *b)
        })
    }
}

impl Algebra<u64> {
    /// One plus the sum of the slot values (slots of a set merge when equal).
    pub fn count(container: Container) -> Self {
        Algebra::new("count", container, |h: &Structure<u64>| {
            h.slots()
                .into_iter()
                .fold(1u64, |acc, v| acc.saturating_add(*v))
        })
    }

    /// One plus the largest slot value, zero slots giving 1: the height.
    pub fn height(container: Container) -> Self {
        Algebra::new("height", container, |h: &Structure<u64>| {
            1 + h.slots().into_iter().copied().max().unwrap_or(0)
        })
    }
}
