//! Finitary set functors as a closed grammar of containers.
//!
//! A [`Container`] describes a functor `H`; a [`Structure<T>`] is an element
//! of `HT`, a finite tree whose `Identity` positions hold values of type `T`.
//! Coalgebra structures are `Structure<StateId>` ([`HStructure`]), algebra
//! inputs are `Structure<V>` for the algebra's carrier `V`.
//!
//! Every container of the grammar preserves binary intersections, and its
//! support map is exact: the set of slot values occurring in a structure is
//! the least subset over which the structure can be expressed.
//!
//! # JSON encoding
//!
//! Containers:
//!
//! | grammar              | JSON                                              |
//! |----------------------|---------------------------------------------------|
//! | `Identity`           | `{"id": null}`                                    |
//! | `Const(labels)`      | `{"const": ["a", "b"]}`                           |
//! | `Sum(l, r)`          | `{"sum": [l, r]}`                                 |
//! | `Product(cs)`        | `{"product": [c1, c2, ...]}`                      |
//! | `FinPow(c)`          | `{"finpow": c}`                                   |
//! | `Exp(c, labels)`     | `{"exp": {"base": c, "exponent": ["a", "b"]}}`    |
//! | `PairNeq(c)`         | `{"pairneq": c}`                                  |
//!
//! Structures:
//!
//! | node                 | JSON                                              |
//! |----------------------|---------------------------------------------------|
//! | slot                 | `{"state": "a"}`                                  |
//! | constant             | `{"const": "a"}`                                  |
//! | left/right injection | `{"inl": h}` / `{"inr": h}`                       |
//! | tuple                | `{"tuple": [h1, h2, ...]}`                        |
//! | finite set           | `{"set": [h1, h2, ...]}`                          |
//! | function             | `{"fun": {"a": h1, "b": h2}}`                     |
//! | diagonal point       | `{"star": null}`                                  |
//! | distinct pair        | `{"pair": [h1, h2]}`                              |
//!
//! Printing is canonical (sets sorted, keys sorted), so printing a parsed
//! value and parsing it again is the identity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("state names must be non-empty")]
    EmptyStateId,
    #[error("label list of {0} must be non-empty")]
    EmptyLabels(&'static str),
    #[error("duplicate label `{label}` in {context}")]
    DuplicateLabel { label: String, context: &'static str },
    #[error("state `{0}` is not in the domain of the map")]
    UnknownState(StateId),
    #[error("structure does not match its container")]
    IllTyped,
    #[error("malformed JSON: {0}")]
    Schema(String),
}

/// Name of a state. Never empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(String);

impl StateId {
    pub fn new(name: impl Into<String>) -> Result<Self, ContainerError> {
        let name = name.into();
        if name.is_empty() {
            return Err(ContainerError::EmptyStateId);
        }
        Ok(StateId(name))
    }

    /// State named by an integer, as used by the integer-carrier examples.
    pub fn from_int(k: i64) -> Self {
        StateId(k.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for StateId {
    type Err = ContainerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StateId::new(s)
    }
}

impl Serialize for StateId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for StateId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        StateId::new(s).map_err(D::Error::custom)
    }
}

/// A finitary set functor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Container {
    /// `HX = X`
    Identity,
    /// `HX = L` for a finite, non-empty label set `L`.
    Const(Vec<String>),
    /// `HX = FX + GX`
    Sum(Box<Container>, Box<Container>),
    /// `HX = F₁X × … × FₙX`; the empty product is the one-point set.
    Product(Vec<Container>),
    /// `HX = P_ω(FX)`
    FinPow(Box<Container>),
    /// `HX = (FX)^E` for a finite, non-empty exponent `E`.
    Exp {
        base: Box<Container>,
        exponent: Vec<String>,
    },
    /// `HX = {*} + {(u, v) ∈ FX × FX | u ≠ v}`: `FX × FX` with the diagonal
    /// collapsed to a single point.
    PairNeq(Box<Container>),
}

impl Container {
    pub fn constant<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Container::Const(labels.into_iter().map(Into::into).collect())
    }

    pub fn sum(left: Container, right: Container) -> Self {
        Container::Sum(Box::new(left), Box::new(right))
    }

    pub fn finpow(inner: Container) -> Self {
        Container::FinPow(Box::new(inner))
    }

    pub fn exp<S: Into<String>>(base: Container, exponent: impl IntoIterator<Item = S>) -> Self {
        Container::Exp {
            base: Box::new(base),
            exponent: exponent.into_iter().map(Into::into).collect(),
        }
    }

    pub fn pair_neq(inner: Container) -> Self {
        Container::PairNeq(Box::new(inner))
    }

    /// The finite powerset functor, i.e. finitely branching graphs.
    pub fn graph() -> Self {
        Container::finpow(Container::Identity)
    }

    /// Checks the label-list invariants throughout the grammar.
    pub fn check(&self) -> Result<(), ContainerError> {
        match self {
            Container::Identity => Ok(()),
            Container::Const(labels) => check_labels(labels, "a constant"),
            Container::Sum(l, r) => {
                l.check()?;
                r.check()
            }
            Container::Product(cs) => cs.iter().try_for_each(Container::check),
            Container::FinPow(c) | Container::PairNeq(c) => c.check(),
            Container::Exp { base, exponent } => {
                check_labels(exponent, "an exponent")?;
                base.check()
            }
        }
    }

    /// Whether `H∅` is non-empty, i.e. some structure mentions no state.
    pub fn has_closed_value(&self) -> bool {
        match self {
            Container::Identity => false,
            Container::Const(_) | Container::FinPow(_) | Container::PairNeq(_) => true,
            Container::Sum(l, r) => l.has_closed_value() || r.has_closed_value(),
            Container::Product(cs) => cs.iter().all(Container::has_closed_value),
            Container::Exp { base, .. } => base.has_closed_value(),
        }
    }

    /// True iff `h` is a well-typed value of this container.
    pub fn validate<T: Ord>(&self, h: &Structure<T>) -> bool {
        match (self, h) {
            (Container::Identity, Structure::Slot(_)) => true,
            (Container::Const(labels), Structure::Const(l)) => labels.contains(l),
            (Container::Sum(l, _), Structure::InL(h)) => l.validate(h),
            (Container::Sum(_, r), Structure::InR(h)) => r.validate(h),
            (Container::Product(cs), Structure::Tuple(hs)) => {
                cs.len() == hs.len() && cs.iter().zip(hs).all(|(c, h)| c.validate(h))
            }
            (Container::FinPow(c), Structure::Set(hs)) => {
                hs.windows(2).all(|w| w[0] < w[1]) && hs.iter().all(|h| c.validate(h))
            }
            (Container::Exp { base, exponent }, Structure::Fun(map)) => {
                map.len() == exponent.len()
                    && exponent
                        .iter()
                        .all(|e| map.get(e).is_some_and(|h| base.validate(h)))
            }
            (Container::PairNeq(_), Structure::Star) => true,
            (Container::PairNeq(c), Structure::Pair(a, b)) => {
                a != b && c.validate(a) && c.validate(b)
            }
            _ => false,
        }
    }

    /// The functor action `Hf` on a structure, with `f` given as a finite map.
    pub fn hmap(
        &self,
        f: &BTreeMap<StateId, StateId>,
        h: &HStructure,
    ) -> Result<HStructure, ContainerError> {
        if !self.validate(h) {
            return Err(ContainerError::IllTyped);
        }
        h.try_map(&mut |s| {
            f.get(s)
                .cloned()
                .ok_or_else(|| ContainerError::UnknownState(s.clone()))
        })
    }

    /// The states occurring in `h`.
    pub fn support(&self, h: &HStructure) -> BTreeSet<StateId> {
        debug_assert!(self.validate(h));
        h.support()
    }
}

fn check_labels(labels: &[String], context: &'static str) -> Result<(), ContainerError> {
    if labels.is_empty() {
        return Err(ContainerError::EmptyLabels(context));
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(ContainerError::DuplicateLabel {
                label: l.clone(),
                context,
            });
        }
    }
    Ok(())
}

/// An element of `HT` for some container `H`.
///
/// Sets are kept sorted and duplicate-free and pairs with equal components
/// are collapsed to [`Structure::Star`] by the smart constructors, so
/// equality of structures is syntactic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Structure<T> {
    Slot(T),
    Const(String),
    InL(Box<Structure<T>>),
    InR(Box<Structure<T>>),
    Tuple(Vec<Structure<T>>),
    Set(Vec<Structure<T>>),
    Fun(BTreeMap<String, Structure<T>>),
    Star,
    Pair(Box<Structure<T>>, Box<Structure<T>>),
}

/// A structure over states: an element of `HC`.
pub type HStructure = Structure<StateId>;

impl<T> Structure<T> {
    pub fn constant(label: impl Into<String>) -> Self {
        Structure::Const(label.into())
    }

    pub fn inl(h: Structure<T>) -> Self {
        Structure::InL(Box::new(h))
    }

    pub fn inr(h: Structure<T>) -> Self {
        Structure::InR(Box::new(h))
    }

    /// Visits every slot value, left to right.
    pub fn for_each_slot<'a>(&'a self, f: &mut impl FnMut(&'a T)) {
        match self {
            Structure::Slot(t) => f(t),
            Structure::Const(_) | Structure::Star => {}
            Structure::InL(h) | Structure::InR(h) => h.for_each_slot(f),
            Structure::Tuple(hs) | Structure::Set(hs) => {
                hs.iter().for_each(|h| h.for_each_slot(f));
            }
            Structure::Fun(map) => map.values().for_each(|h| h.for_each_slot(f)),
            Structure::Pair(a, b) => {
                a.for_each_slot(f);
                b.for_each_slot(f);
            }
        }
    }

    pub fn slots(&self) -> Vec<&T> {
        let mut out = Vec::new();
        self.for_each_slot(&mut |t| out.push(t));
        out
    }
}

impl<T: Ord> Structure<T> {
    /// A finite set, sorted and deduplicated.
    pub fn set(items: impl IntoIterator<Item = Structure<T>>) -> Self {
        let mut items: Vec<_> = items.into_iter().collect();
        items.sort();
        items.dedup();
        Structure::Set(items)
    }

    /// A pair of the diagonal-quotient functor; equal components collapse to `Star`.
    pub fn pair(a: Structure<T>, b: Structure<T>) -> Self {
        if a == b {
            Structure::Star
        } else {
            Structure::Pair(Box::new(a), Box::new(b))
        }
    }

    /// Set of slot values occurring in the structure.
    pub fn support(&self) -> BTreeSet<T>
    where
        T: Clone,
    {
        let mut out = BTreeSet::new();
        self.for_each_slot(&mut |t| {
            out.insert(t.clone());
        });
        out
    }

    /// Replaces every slot value, renormalising sets and pairs.
    pub fn try_map<U: Ord, E>(
        &self,
        f: &mut impl FnMut(&T) -> Result<U, E>,
    ) -> Result<Structure<U>, E> {
        Ok(match self {
            Structure::Slot(t) => Structure::Slot(f(t)?),
            Structure::Const(l) => Structure::Const(l.clone()),
            Structure::InL(h) => Structure::inl(h.try_map(f)?),
            Structure::InR(h) => Structure::inr(h.try_map(f)?),
            Structure::Tuple(hs) => {
                Structure::Tuple(hs.iter().map(|h| h.try_map(f)).collect::<Result<_, _>>()?)
            }
            Structure::Set(hs) => {
                Structure::set(hs.iter().map(|h| h.try_map(f)).collect::<Result<Vec<_>, _>>()?)
            }
            Structure::Fun(map) => Structure::Fun(
                map.iter()
                    .map(|(k, h)| Ok((k.clone(), h.try_map(f)?)))
                    .collect::<Result<_, _>>()?,
            ),
            Structure::Star => Structure::Star,
            Structure::Pair(a, b) => Structure::pair(a.try_map(f)?, b.try_map(f)?),
        })
    }

    pub fn map<U: Ord>(&self, mut f: impl FnMut(&T) -> U) -> Structure<U> {
        match self.try_map(&mut |t| Ok::<_, std::convert::Infallible>(f(t))) {
            Ok(h) => h,
            Err(never) => match never {},
        }
    }
}

impl<T> Structure<T> {
    /// JSON encoding with a caller-supplied encoding of slot values.
    pub fn to_json_with(&self, slot: &impl Fn(&T) -> Value) -> Value {
        match self {
            Structure::Slot(t) => slot(t),
            Structure::Const(l) => json!({ "const": l }),
            Structure::InL(h) => json!({ "inl": h.to_json_with(slot) }),
            Structure::InR(h) => json!({ "inr": h.to_json_with(slot) }),
            Structure::Tuple(hs) => {
                json!({ "tuple": hs.iter().map(|h| h.to_json_with(slot)).collect::<Vec<_>>() })
            }
            Structure::Set(hs) => {
                json!({ "set": hs.iter().map(|h| h.to_json_with(slot)).collect::<Vec<_>>() })
            }
            Structure::Fun(map) => {
                let obj: Map<String, Value> = map
                    .iter()
                    .map(|(k, h)| (k.clone(), h.to_json_with(slot)))
                    .collect();
                json!({ "fun": obj })
            }
            Structure::Star => json!({ "star": null }),
            Structure::Pair(a, b) => {
                json!({ "pair": [a.to_json_with(slot), b.to_json_with(slot)] })
            }
        }
    }
}

impl HStructure {
    pub fn state(s: StateId) -> Self {
        Structure::Slot(s)
    }

    pub fn to_json(&self) -> Value {
        self.to_json_with(&|s: &StateId| json!({ "state": s.as_str() }))
    }

    pub fn from_json(v: &Value) -> Result<Self, ContainerError> {
        let (tag, body) = single_key(v, "structure")?;
        Ok(match tag {
            "state" => {
                let name = body
                    .as_str()
                    .ok_or_else(|| schema("`state` expects a string"))?;
                Structure::Slot(StateId::new(name)?)
            }
            "const" => Structure::Const(
                body.as_str()
                    .ok_or_else(|| schema("`const` expects a string"))?
                    .to_owned(),
            ),
            "inl" => Structure::inl(Self::from_json(body)?),
            "inr" => Structure::inr(Self::from_json(body)?),
            "tuple" => Structure::Tuple(json_list(body, "tuple")?),
            "set" => Structure::set(json_list(body, "set")?),
            "fun" => {
                let obj = body
                    .as_object()
                    .ok_or_else(|| schema("`fun` expects an object"))?;
                Structure::Fun(
                    obj.iter()
                        .map(|(k, h)| Ok((k.clone(), Self::from_json(h)?)))
                        .collect::<Result<_, ContainerError>>()?,
                )
            }
            "star" => Structure::Star,
            "pair" => {
                let mut items: Vec<HStructure> = json_list(body, "pair")?;
                if items.len() != 2 {
                    return Err(schema("`pair` expects exactly two components"));
                }
                let b = items.pop().unwrap();
                let a = items.pop().unwrap();
                Structure::pair(a, b)
            }
            other => return Err(schema(&format!("unknown structure tag `{other}`"))),
        })
    }
}

impl fmt::Display for HStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Slot(s) => write!(f, "{s}"),
            Structure::Const(l) => write!(f, "'{l}"),
            Structure::InL(h) => write!(f, "inl({h})"),
            Structure::InR(h) => write!(f, "inr({h})"),
            Structure::Tuple(hs) => write_seq(f, "(", hs, ")"),
            Structure::Set(hs) => write_seq(f, "{", hs, "}"),
            Structure::Fun(map) => {
                f.write_str("[")?;
                for (i, (k, h)) in map.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k} ↦ {h}")?;
                }
                f.write_str("]")
            }
            Structure::Star => f.write_str("*"),
            Structure::Pair(a, b) => write!(f, "<{a}, {b}>"),
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, open: &str, hs: &[HStructure], close: &str) -> fmt::Result {
    f.write_str(open)?;
    for (i, h) in hs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{h}")?;
    }
    f.write_str(close)
}

impl Container {
    pub fn to_json(&self) -> Value {
        match self {
            Container::Identity => json!({ "id": null }),
            Container::Const(labels) => json!({ "const": labels }),
            Container::Sum(l, r) => json!({ "sum": [l.to_json(), r.to_json()] }),
            Container::Product(cs) => {
                json!({ "product": cs.iter().map(Container::to_json).collect::<Vec<_>>() })
            }
            Container::FinPow(c) => json!({ "finpow": c.to_json() }),
            Container::Exp { base, exponent } => {
                json!({ "exp": { "base": base.to_json(), "exponent": exponent } })
            }
            Container::PairNeq(c) => json!({ "pairneq": c.to_json() }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, ContainerError> {
        let (tag, body) = single_key(v, "container")?;
        let c = match tag {
            "id" => Container::Identity,
            "const" => Container::Const(string_list(body, "const")?),
            "sum" => {
                let mut items: Vec<Container> = container_list(body, "sum")?;
                if items.len() != 2 {
                    return Err(schema("`sum` expects exactly two summands"));
                }
                let r = items.pop().unwrap();
                let l = items.pop().unwrap();
                Container::sum(l, r)
            }
            "product" => Container::Product(container_list(body, "product")?),
            "finpow" => Container::finpow(Container::from_json(body)?),
            "exp" => {
                let obj = body
                    .as_object()
                    .ok_or_else(|| schema("`exp` expects an object"))?;
                let base = obj
                    .get("base")
                    .ok_or_else(|| schema("`exp` is missing `base`"))?;
                let exponent = obj
                    .get("exponent")
                    .ok_or_else(|| schema("`exp` is missing `exponent`"))?;
                Container::Exp {
                    base: Box::new(Container::from_json(base)?),
                    exponent: string_list(exponent, "exponent")?,
                }
            }
            "pairneq" => Container::pair_neq(Container::from_json(body)?),
            other => return Err(schema(&format!("unknown container tag `{other}`"))),
        };
        c.check()?;
        Ok(c)
    }
}

impl fmt::Display for Container {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Container::Identity => f.write_str("X"),
            Container::Const(labels) => write!(f, "{{{}}}", labels.join(",")),
            Container::Sum(l, r) => write!(f, "({l} + {r})"),
            Container::Product(cs) if cs.is_empty() => f.write_str("1"),
            Container::Product(cs) => {
                f.write_str("(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" × ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            Container::FinPow(c) => write!(f, "P({c})"),
            Container::Exp { base, exponent } => write!(f, "{base}^{{{}}}", exponent.join(",")),
            Container::PairNeq(c) => write!(f, "Pair≠({c})"),
        }
    }
}

impl Serialize for Container {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Container {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        Container::from_json(&v).map_err(D::Error::custom)
    }
}

impl Serialize for HStructure {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HStructure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        HStructure::from_json(&v).map_err(D::Error::custom)
    }
}

fn schema(msg: &str) -> ContainerError {
    ContainerError::Schema(msg.to_owned())
}

fn single_key<'a>(v: &'a Value, what: &str) -> Result<(&'a str, &'a Value), ContainerError> {
    match v.as_object() {
        Some(obj) if obj.len() == 1 => {
            let (k, v) = obj.iter().next().unwrap();
            Ok((k.as_str(), v))
        }
        _ => Err(schema(&format!(
            "a {what} must be an object with exactly one tag"
        ))),
    }
}

fn string_list(v: &Value, what: &str) -> Result<Vec<String>, ContainerError> {
    v.as_array()
        .ok_or_else(|| schema(&format!("`{what}` expects a list of strings")))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_owned)
                .ok_or_else(|| schema(&format!("`{what}` expects a list of strings")))
        })
        .collect()
}

fn container_list(v: &Value, what: &str) -> Result<Vec<Container>, ContainerError> {
    v.as_array()
        .ok_or_else(|| schema(&format!("`{what}` expects a list")))?
        .iter()
        .map(Container::from_json)
        .collect()
}

fn json_list(v: &Value, what: &str) -> Result<Vec<HStructure>, ContainerError> {
    v.as_array()
        .ok_or_else(|| schema(&format!("`{what}` expects a list")))?
        .iter()
        .map(HStructure::from_json)
        .collect()
}
