//! Term algebras and the initial algebra as a colimit of finite
//! well-founded coalgebras.
//!
//! For a signature `Σ` the initial algebra is the algebra of closed terms.
//! Every state of a finite well-founded coalgebra for `H_Σ` unfolds to a
//! term (the colimit injection), and every `H_Σ`-structure over terms is
//! realised by a state of some finite well-founded coalgebra, obtained by a
//! coproduct extension of the prefix coalgebra of its subterms. Together
//! these witness that the structure map of the colimit is a bijection on
//! any finite fragment, which [`check_initial_algebra`] verifies by
//! enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coalgebra::{verify_coalgebra_morphism, Algebra, CoalgebraError, FiniteCoalgebra};
use crate::container::{Container, StateId, Structure};
use crate::wellfounded::{solve_recursion_at, well_founded_part, RecursionError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InitialError {
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
    #[error(transparent)]
    Recursion(#[from] RecursionError),
    #[error("a signature needs at least one operation")]
    EmptySignature,
    #[error("operation `{0}` is declared twice")]
    DuplicateOp(String),
    #[error("operation names must be non-empty")]
    EmptyOpName,
    #[error("structure does not match the signature functor")]
    IllTyped,
    #[error("realised state unfolds to {got}, expected {expected}")]
    RealizationMismatch { expected: Term, got: Term },
    #[error("diagram arrow {0} refers to a missing coalgebra")]
    BadArrow(usize),
    #[error("diagram arrow {0} is not a coalgebra morphism")]
    NotAMorphism(usize),
    #[error("diagram coalgebras have different functors")]
    ContainerMismatch,
    #[error("term syntax: {0}")]
    TermSyntax(String),
    #[error("enumeration would exceed {0} terms")]
    TooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
}

/// An algebraic signature: operation symbols with arities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SignatureRepr", into = "SignatureRepr")]
pub struct Signature {
    ops: Vec<Operation>,
}

#[derive(Serialize, Deserialize)]
struct SignatureRepr {
    ops: Vec<Operation>,
}

impl TryFrom<SignatureRepr> for Signature {
    type Error = InitialError;

    fn try_from(r: SignatureRepr) -> Result<Self, Self::Error> {
        Signature::new(r.ops.into_iter().map(|o| (o.name, o.arity)))
    }
}

impl From<Signature> for SignatureRepr {
    fn from(s: Signature) -> Self {
        SignatureRepr { ops: s.ops }
    }
}

impl Signature {
    pub fn new<S: Into<String>>(
        ops: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, InitialError> {
        let ops: Vec<Operation> = ops
            .into_iter()
            .map(|(name, arity)| Operation {
                name: name.into(),
                arity,
            })
            .collect();
        if ops.is_empty() {
            return Err(InitialError::EmptySignature);
        }
        let mut seen = BTreeSet::new();
        for op in &ops {
            if op.name.is_empty() {
                return Err(InitialError::EmptyOpName);
            }
            if !seen.insert(op.name.as_str()) {
                return Err(InitialError::DuplicateOp(op.name.clone()));
            }
        }
        Ok(Signature { ops })
    }

    /// `{z/0, s/1}`
    pub fn naturals() -> Self {
        Signature::new([("z", 0), ("s", 1)]).unwrap()
    }

    /// `{leaf/0, node/2}`
    pub fn binary_trees() -> Self {
        Signature::new([("leaf", 0), ("node", 2)]).unwrap()
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "signature",
            "version": 1,
            "ops": self.ops.iter().map(|o| json!({"name": o.name, "arity": o.arity})).collect::<Vec<_>>(),
        })
    }

    /// The container of `H_Σ X = ∐ X^{ar(f)}`: a right-nested sum with one
    /// summand per operation (a one-label constant for arity 0, `X` for
    /// arity 1, an `n`-fold product otherwise).
    pub fn container(&self) -> Container {
        fn summand(op: &Operation) -> Container {
            match op.arity {
                0 => Container::constant([op.name.clone()]),
                1 => Container::Identity,
                n => Container::Product(vec![Container::Identity; n]),
            }
        }
        let mut iter = self.ops.iter().rev();
        let last = summand(iter.next().expect("non-empty"));
        iter.fold(last, |acc, op| Container::sum(summand(op), acc))
    }

    /// The structure `f(x₁, …, xₙ)` in `H_Σ`.
    pub fn encode<T>(&self, op: usize, args: Vec<T>) -> Structure<T> {
        let o = &self.ops[op];
        assert_eq!(o.arity, args.len(), "arity of `{}`", o.name);
        let mut body = match o.arity {
            0 => Structure::Const(o.name.clone()),
            1 => Structure::Slot(args.into_iter().next().unwrap()),
            _ => Structure::Tuple(args.into_iter().map(Structure::Slot).collect()),
        };
        if self.ops.len() > 1 {
            if op + 1 < self.ops.len() {
                body = Structure::inl(body);
            }
            for _ in 0..op {
                body = Structure::inr(body);
            }
        }
        body
    }

    /// Inverse of [`Signature::encode`] on well-typed structures.
    pub fn decode<'a, T>(&self, h: &'a Structure<T>) -> Option<(usize, Vec<&'a T>)> {
        let n = self.ops.len();
        let mut h = h;
        let mut op = 0;
        if n > 1 {
            loop {
                match h {
                    Structure::InL(inner) if op + 1 < n => {
                        h = inner;
                        break;
                    }
                    Structure::InR(inner) if op + 1 < n => {
                        h = inner;
                        op += 1;
                        if op + 1 == n {
                            break;
                        }
                    }
                    _ => return None,
                }
            }
        }
        let o = &self.ops[op];
        let args = match (o.arity, h) {
            (0, Structure::Const(l)) if *l == o.name => vec![],
            (1, Structure::Slot(t)) => vec![t],
            (k, Structure::Tuple(items)) if k >= 2 && items.len() == k => items
                .iter()
                .map(|i| match i {
                    Structure::Slot(t) => Some(t),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()?,
            _ => return None,
        };
        Some((op, args))
    }

    /// The top-level structure of a term, `t⁻¹`.
    pub fn top_structure(&self, term: &Term) -> Option<Structure<Term>> {
        let op = self.position(term.op())?;
        if self.ops[op].arity != term.args().len() {
            return None;
        }
        Some(self.encode(op, term.args().to_vec()))
    }
}

struct TermNode {
    op: String,
    args: Vec<Term>,
}

/// A closed term. Subterms are shared, comparison is structural.
#[derive(Clone)]
pub struct Term(Arc<TermNode>);

impl Term {
    pub fn new(op: impl Into<String>, args: Vec<Term>) -> Self {
        Term(Arc::new(TermNode {
            op: op.into(),
            args,
        }))
    }

    pub fn constant(op: impl Into<String>) -> Self {
        Term::new(op, vec![])
    }

    pub fn op(&self) -> &str {
        &self.0.op
    }

    pub fn args(&self) -> &[Term] {
        &self.0.args
    }

    /// Height of the term tree; constants have depth 0.
    pub fn depth(&self) -> usize {
        self.args().iter().map(|t| t.depth() + 1).max().unwrap_or(0)
    }

    fn key(&self) -> (&str, &[Term]) {
        (&self.0.op, &self.0.args)
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.key() == other.key()
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return std::cmp::Ordering::Equal;
        }
        self.key().cmp(&other.key())
    }
}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op())?;
        if !self.args().is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args().iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Term {
    type Err = InitialError;

    /// Parses `op` or `op(t₁,…,tₙ)`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_term(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(InitialError::TermSyntax(format!("trailing input at {pos} in `{s}`")));
        }
        Ok(t)
    }
}

fn parse_term(chars: &[char], pos: &mut usize) -> Result<Term, InitialError> {
    let start = *pos;
    while *pos < chars.len() && !matches!(chars[*pos], '(' | ')' | ',') {
        *pos += 1;
    }
    if *pos == start {
        return Err(InitialError::TermSyntax(format!("expected an operation name at {start}")));
    }
    let op: String = chars[start..*pos].iter().collect();
    let mut args = Vec::new();
    if chars.get(*pos) == Some(&'(') {
        loop {
            *pos += 1;
            args.push(parse_term(chars, pos)?);
            match chars.get(*pos) {
                Some(',') => continue,
                Some(')') => {
                    *pos += 1;
                    break;
                }
                _ => return Err(InitialError::TermSyntax(format!("expected `,` or `)` at {pos}"))),
            }
        }
    }
    Ok(Term::new(op, args))
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The algebra of closed terms. `eval` panics on structures that are not
/// values of the signature's container.
pub fn term_algebra(sig: &Signature) -> Algebra<Term> {
    let sig2 = sig.clone();
    Algebra::new("term", sig.container(), move |h: &Structure<Term>| {
        let (op, args) = sig2
            .decode(h)
            .expect("term algebra applied to a structure outside its functor");
        Term::new(sig2.ops[op].name.clone(), args.into_iter().cloned().collect())
    })
}

/// A finite well-founded tree over an arbitrary container: an element of
/// the initial algebra `μH`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tree(pub Arc<Structure<Tree>>);

impl Tree {
    /// Nested JSON: each slot holds the child tree's structure.
    pub fn to_json(&self) -> Value {
        self.0.to_json_with(&|t: &Tree| t.to_json())
    }
}

/// The initial algebra of any container, as trees.
pub fn tree_algebra(container: Container) -> Algebra<Tree> {
    Algebra::new("term", container, |h: &Structure<Tree>| Tree(Arc::new(h.clone())))
}

/// The colimit injection `c#` at `state`: the term the state unfolds to.
pub fn unfold_to_term(
    sig: &Signature,
    coalg: &FiniteCoalgebra,
    state: &StateId,
) -> Result<Term, RecursionError> {
    solve_recursion_at(coalg, &term_algebra(sig), state)
}

/// A finite well-founded coalgebra and a state of it realising a structure.
#[derive(Clone, Debug)]
pub struct Realization {
    pub coalgebra: FiniteCoalgebra,
    pub state: StateId,
    pub term: Term,
}

/// Post-order listing of distinct subterms.
fn collect_subterms(t: &Term, seen: &mut BTreeMap<Term, usize>, order: &mut Vec<Term>) {
    if seen.contains_key(t) {
        return;
    }
    for a in t.args() {
        collect_subterms(a, seen, order);
    }
    seen.insert(t.clone(), order.len());
    order.push(t.clone());
}

/// Builds the prefix coalgebra of the slot terms of `q` (one state per
/// distinct subterm) and coproduct-extends it by a fresh state `x` with
/// `p(x) = q` re-pointed at those states. The fresh state unfolds to
/// `eval(q)`, which is checked before returning.
pub fn realize_hstructure(sig: &Signature, q: &Structure<Term>) -> Result<Realization, InitialError> {
    let container = sig.container();
    if !container.validate(q) {
        return Err(InitialError::IllTyped);
    }
    let mut seen = BTreeMap::new();
    let mut order = Vec::new();
    for t in q.slots() {
        collect_subterms(t, &mut seen, &mut order);
    }
    let name = |i: usize| StateId::new(format!("t{i}")).expect("non-empty");
    let mut entries = Vec::with_capacity(order.len());
    for (i, t) in order.iter().enumerate() {
        let op = sig.position(t.op()).ok_or(InitialError::IllTyped)?;
        if sig.ops[op].arity != t.args().len() {
            return Err(InitialError::IllTyped);
        }
        let args = t.args().iter().map(|a| name(seen[a])).collect();
        entries.push((name(i), sig.encode(op, args)));
    }
    let prefix = FiniteCoalgebra::new(container, entries)?;
    let x = StateId::new("x").expect("non-empty");
    let p = q.map(|t| name(seen[t]));
    let coalgebra = prefix.coproduct_extension(&[(x.clone(), p)])?;
    let expected = term_algebra(sig).eval(q);
    let got = unfold_to_term(sig, &coalgebra, &x)?;
    if got != expected {
        return Err(InitialError::RealizationMismatch { expected, got });
    }
    Ok(Realization {
        coalgebra,
        state: x,
        term: got,
    })
}

/// All closed terms of depth at most `depth` (constants have depth 0),
/// sorted. Fails once more than `limit` terms would be produced.
pub fn enumerate_terms(sig: &Signature, depth: usize, limit: usize) -> Result<Vec<Term>, InitialError> {
    let mut level: BTreeSet<Term> = BTreeSet::new();
    for d in 0..=depth {
        let prev: Vec<Term> = level.iter().cloned().collect();
        let mut next = BTreeSet::new();
        for op in &sig.ops {
            let count = prev.len().checked_pow(op.arity as u32).unwrap_or(usize::MAX);
            if count > limit {
                return Err(InitialError::TooLarge(limit));
            }
            for args in tuples(&prev, op.arity) {
                next.insert(Term::new(op.name.clone(), args));
                if next.len() > limit {
                    return Err(InitialError::TooLarge(limit));
                }
            }
        }
        let grew = next.len() != level.len();
        level = next;
        if !grew && d > 0 {
            break;
        }
    }
    Ok(level.into_iter().collect())
}

fn tuples(items: &[Term], k: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Result of [`check_initial_algebra`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitialityReport {
    pub depth: usize,
    /// Closed terms of depth ≤ `depth`.
    pub terms: usize,
    /// Terms realised by a finite well-founded coalgebra and unfolded back.
    pub realized: usize,
    /// Structures over terms of depth < `depth`.
    pub structures: usize,
    /// Distinct terms among their evaluations.
    pub distinct_images: usize,
    pub counterexample: Option<String>,
}

impl InitialityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
            && self.realized == self.terms
            && self.distinct_images == self.structures
    }

    pub fn to_json(&self) -> Value {
        json!({
            "depth": self.depth,
            "terms": self.terms,
            "realized": self.realized,
            "structures": self.structures,
            "distinctImages": self.distinct_images,
            "counterexample": self.counterexample,
            "passed": self.passed(),
        })
    }
}

/// Upper bound on the number of terms [`check_initial_algebra`] enumerates.
pub const ENUMERATION_LIMIT: usize = 200_000;

/// Lambek check on the depth-`depth` fragment of the initial algebra:
/// every term is realised by a finite well-founded coalgebra whose
/// distinguished state unfolds back to it (surjectivity), and distinct
/// structures over shallower terms evaluate to distinct terms, each of
/// which decomposes back to its structure (injectivity).
pub fn check_initial_algebra(sig: &Signature, depth: usize) -> Result<InitialityReport, InitialError> {
    let terms = enumerate_terms(sig, depth, ENUMERATION_LIMIT)?;
    let mut report = InitialityReport {
        depth,
        terms: terms.len(),
        realized: 0,
        structures: 0,
        distinct_images: 0,
        counterexample: None,
    };
    for t in &terms {
        let q = sig.top_structure(t).ok_or(InitialError::IllTyped)?;
        let r = realize_hstructure(sig, &q)?;
        let wf = well_founded_part(&r.coalgebra);
        if r.term == *t && wf.is_well_founded {
            report.realized += 1;
        } else if report.counterexample.is_none() {
            report.counterexample = Some(t.to_string());
        }
    }
    let shallower: Vec<Term> = if depth == 0 {
        Vec::new()
    } else {
        terms.iter().filter(|t| t.depth() < depth).cloned().collect()
    };
    let alg = term_algebra(sig);
    let mut images = BTreeSet::new();
    for (op, o) in sig.ops.iter().enumerate() {
        for args in tuples(&shallower, o.arity) {
            let q = sig.encode(op, args);
            report.structures += 1;
            let t = alg.eval(&q);
            if sig.top_structure(&t).as_ref() != Some(&q) && report.counterexample.is_none() {
                report.counterexample = Some(t.to_string());
            }
            images.insert(t);
        }
    }
    report.distinct_images = images.len();
    Ok(report)
}

/// An arrow of a diagram: a coalgebra morphism between two of its objects.
#[derive(Clone, Debug)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    pub map: BTreeMap<StateId, StateId>,
}

/// A finite diagram of finite coalgebras; every arrow is checked to be a
/// coalgebra morphism on construction.
#[derive(Clone, Debug)]
pub struct DiagramSpec {
    coalgebras: Vec<FiniteCoalgebra>,
    arrows: Vec<Arrow>,
}

impl DiagramSpec {
    pub fn new(coalgebras: Vec<FiniteCoalgebra>, arrows: Vec<Arrow>) -> Result<Self, InitialError> {
        if let Some(first) = coalgebras.first() {
            use crate::coalgebra::Coalgebra;
            if coalgebras.iter().any(|c| c.container() != first.container()) {
                return Err(InitialError::ContainerMismatch);
            }
        }
        for (k, a) in arrows.iter().enumerate() {
            let (Some(src), Some(tgt)) = (coalgebras.get(a.source), coalgebras.get(a.target)) else {
                return Err(InitialError::BadArrow(k));
            };
            match verify_coalgebra_morphism(&a.map, src, tgt) {
                Ok(true) => {}
                Ok(false) | Err(CoalgebraError::UndefinedOn(_)) => {
                    return Err(InitialError::NotAMorphism(k))
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(DiagramSpec { coalgebras, arrows })
    }

    pub fn coalgebras(&self) -> &[FiniteCoalgebra] {
        &self.coalgebras
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Colimit of a finite diagram, computed on carriers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colimit {
    /// Equivalence classes of `(coalgebra index, state)`, in order of first
    /// appearance.
    pub classes: Vec<Vec<(usize, StateId)>>,
    /// Per coalgebra, the quotient map to class indices.
    pub injections: Vec<BTreeMap<StateId, usize>>,
    /// Induced structure per class; `None` where members disagree.
    pub structure: Vec<Option<Structure<usize>>>,
}

impl Colimit {
    pub fn is_total(&self) -> bool {
        self.structure.iter().all(Option::is_some)
    }

    /// The colimit as a coalgebra with classes named `q0, q1, …`, when the
    /// induced structure is total.
    pub fn to_coalgebra(&self, container: &Container) -> Option<FiniteCoalgebra> {
        let name = |i: &usize| StateId::new(format!("q{i}")).expect("non-empty");
        let entries = self
            .structure
            .iter()
            .enumerate()
            .map(|(i, h)| Some((name(&i), h.as_ref()?.map(name))))
            .collect::<Option<Vec<_>>>()?;
        FiniteCoalgebra::new(container.clone(), entries).ok()
    }
}

/// Disjoint union of the carriers modulo the equivalence generated by
/// `(x, i) ~ (f(x), j)` for every arrow `f: i → j`.
pub fn diagram_colimit(d: &DiagramSpec) -> Colimit {
    let mut offset = Vec::with_capacity(d.coalgebras.len());
    let mut all: Vec<(usize, StateId)> = Vec::new();
    for (i, c) in d.coalgebras.iter().enumerate() {
        offset.push(all.len());
        all.extend(c.states().iter().map(|s| (i, s.clone())));
    }
    let flat = |i: usize, s: &StateId| -> usize {
        offset[i] + d.coalgebras[i].index_of(s).expect("arrows are verified")
    };
    let mut uf = UnionFind::new(all.len());
    for a in &d.arrows {
        for (x, fx) in &a.map {
            if d.coalgebras[a.source].contains(x) {
                uf.union(flat(a.source, x), flat(a.target, fx));
            }
        }
    }
    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<(usize, StateId)>> = Vec::new();
    let mut class_of = vec![0; all.len()];
    for (k, member) in all.iter().enumerate() {
        let root = uf.find(k);
        let c = *class_of_root.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(member.clone());
        class_of[k] = c;
    }
    let injections: Vec<BTreeMap<StateId, usize>> = d
        .coalgebras
        .iter()
        .enumerate()
        .map(|(i, c)| {
            c.states()
                .iter()
                .map(|s| (s.clone(), class_of[flat(i, s)]))
                .collect()
        })
        .collect();
    let structure = classes
        .iter()
        .map(|members| {
            let mut induced: Option<Structure<usize>> = None;
            for (i, s) in members {
                let h = d.coalgebras[*i]
                    .structure_of(s)
                    .expect("member of carrier")
                    .map(|t| injections[*i][t]);
                match &induced {
                    None => induced = Some(h),
                    Some(prev) if *prev == h => {}
                    Some(_) => return None,
                }
            }
            induced
        })
        .collect();
    Colimit {
        classes,
        injections,
        structure,
    }
}
