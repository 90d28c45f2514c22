//! Well-founded parts, König extraction and well-founded recursion.
//!
//! Well-foundedness of a coalgebra over the container grammar is decided on
//! its canonical graph: the well-founded part is the least fixpoint of
//! `S ↦ {x | every successor of x lies in S}`, and a coalgebra is
//! well-founded iff that fixpoint is the whole carrier, iff no state has an
//! infinite outgoing path.
//!
//! A failing recursion solve ([`RecursionError::Cycle`]) only says that the
//! depth-first evaluation could not bottom out. It does not show that the
//! coalgebra lacks a unique solution: [`example311`] is recursive but has no
//! finite subcoalgebra other than the empty one.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Value};
use thiserror::Error;

use crate::coalgebra::{
    Algebra, Coalgebra, CoalgebraError, FiniteCoalgebra, LazyCoalgebra, Subset,
};
use crate::container::{Container, HStructure, StateId, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WfError {
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
    #[error("coalgebra is not well-founded: `{0}` has an infinite path")]
    NotWellFounded(StateId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecursionError {
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
    #[error("algebra and coalgebra have different functors")]
    ContainerMismatch,
    #[error("recursion does not bottom out: `{0}` lies on a cycle")]
    Cycle(StateId),
    #[error("solution has no value for `{0}`")]
    MissingValue(StateId),
    #[error("coalgebra-to-algebra square fails at `{0}`")]
    VerificationFailed(StateId),
}

/// Ranks by the Jacobi iteration `S₀ = ∅`, `Sₙ₊₁ = {x | succ(x) ⊆ Sₙ}`:
/// `rank[i] = Some(n)` iff `i` first appears in `Sₙ`. Computed with a
/// counting worklist, so the cost is linear in the graph.
pub(crate) fn fixpoint_ranks(succ: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = succ.len();
    let mut preds = vec![Vec::new(); n];
    let mut remaining = vec![0usize; n];
    for (i, out) in succ.iter().enumerate() {
        let distinct: BTreeSet<usize> = out.iter().copied().collect();
        remaining[i] = distinct.len();
        for j in distinct {
            preds[j].push(i);
        }
    }
    let mut rank = vec![None; n];
    let mut best = vec![0usize; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| remaining[i] == 0).collect();
    for &i in &queue {
        rank[i] = Some(1);
    }
    while let Some(j) = queue.pop_front() {
        let r = rank[j].expect("queued states are ranked");
        for &p in &preds[j] {
            best[p] = best[p].max(r);
            remaining[p] -= 1;
            if remaining[p] == 0 {
                rank[p] = Some(best[p] + 1);
                queue.push_back(p);
            }
        }
    }
    rank
}

/// Outcome of [`well_founded_part`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfReport {
    pub wf_part: Subset,
    pub is_well_founded: bool,
    /// Round at which each state of the well-founded part entered the fixpoint.
    pub rank: BTreeMap<StateId, usize>,
}

impl WfReport {
    pub fn to_json(&self) -> Value {
        let ranks: serde_json::Map<String, Value> = self
            .rank
            .iter()
            .map(|(s, r)| (s.as_str().to_owned(), json!(r)))
            .collect();
        json!({
            "wellFounded": self.is_well_founded,
            "wfPart": self.wf_part.iter().map(StateId::as_str).collect::<Vec<_>>(),
            "ranks": ranks,
        })
    }
}

pub fn well_founded_part(coalg: &FiniteCoalgebra) -> WfReport {
    let ranks = fixpoint_ranks(coalg.succ_indices());
    let mut wf_part = Subset::new();
    let mut rank = BTreeMap::new();
    for (s, r) in coalg.states().iter().zip(ranks) {
        if let Some(r) = r {
            wf_part.insert(s.clone());
            rank.insert(s.clone(), r);
        }
    }
    WfReport {
        is_well_founded: wf_part.len() == coalg.len(),
        wf_part,
        rank,
    }
}

pub fn is_well_founded(coalg: &FiniteCoalgebra) -> bool {
    fixpoint_ranks(coalg.succ_indices()).iter().all(Option::is_some)
}

/// Follows unranked successors from an unranked `start` until a state
/// repeats; that state lies on a cycle.
pub(crate) fn walk_to_cycle(succ: &[Vec<usize>], ranks: &[Option<usize>], start: usize) -> usize {
    let mut seen = vec![false; succ.len()];
    let mut i = start;
    while !seen[i] {
        seen[i] = true;
        i = *succ[i]
            .iter()
            .find(|&&j| ranks[j].is_none())
            .expect("an unranked state has an unranked successor");
    }
    i
}

/// The finite well-founded subcoalgebras generated by single states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KoenigFamily {
    pub members: Vec<Subset>,
}

impl KoenigFamily {
    pub fn union(&self) -> Subset {
        self.members.iter().flatten().cloned().collect()
    }

    /// Join of two members. Unions of subcoalgebras are subcoalgebras, so
    /// the family is directed.
    pub fn join(&self, i: usize, j: usize) -> Subset {
        self.members[i].union(&self.members[j]).cloned().collect()
    }
}

fn closure_indices(succ: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; succ.len()];
    let mut order = vec![start];
    seen[start] = true;
    let mut k = 0;
    while k < order.len() {
        for &j in &succ[order[k]] {
            if !seen[j] {
                seen[j] = true;
                order.push(j);
            }
        }
        k += 1;
    }
    order
}

/// One member per state, `least_subcoalgebra({x})`, deduplicated and sorted
/// by size. With `require_wf` the coalgebra must be well-founded.
pub fn koenig_family(coalg: &FiniteCoalgebra, require_wf: bool) -> Result<KoenigFamily, WfError> {
    let ranks = fixpoint_ranks(coalg.succ_indices());
    if require_wf {
        if let Some(i) = ranks.iter().position(Option::is_none) {
            return Err(WfError::NotWellFounded(coalg.states()[i].clone()));
        }
    }
    let mut members: BTreeSet<(usize, Subset)> = BTreeSet::new();
    for i in 0..coalg.len() {
        let member: Subset = closure_indices(coalg.succ_indices(), i)
            .into_iter()
            .map(|j| coalg.states()[j].clone())
            .collect();
        members.insert((member.len(), member));
    }
    Ok(KoenigFamily {
        members: members.into_iter().map(|(_, m)| m).collect(),
    })
}

/// Outcome of [`koenig_extract`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KoenigOutcome {
    /// A finite, well-founded subcoalgebra containing the state.
    Extracted(Subset),
    /// The closure was not confirmed finite within the budget.
    BudgetExhausted { visited: usize },
    /// The closure is finite but the state reaches a cycle in it, so the
    /// coalgebra is not well-founded.
    InfinitePath { on_cycle: StateId },
}

/// Finds the finite subcoalgebra generated by `state` and checks that it is
/// well-founded.
pub fn koenig_extract(
    coalg: &dyn Coalgebra,
    state: &StateId,
    budget: usize,
) -> Result<KoenigOutcome, CoalgebraError> {
    if budget == 0 {
        return Err(CoalgebraError::InvalidBudget { budget, seed: 1 });
    }
    let mut ids: Vec<StateId> = vec![state.clone()];
    let mut index: BTreeMap<StateId, usize> = BTreeMap::from([(state.clone(), 0)]);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < ids.len() {
        let mut out = Vec::new();
        for t in coalg.successors(&ids[k])? {
            let j = match index.get(&t) {
                Some(&j) => j,
                None => {
                    let j = ids.len();
                    if j + 1 > budget {
                        return Ok(KoenigOutcome::BudgetExhausted { visited: j });
                    }
                    index.insert(t.clone(), j);
                    ids.push(t);
                    j
                }
            };
            out.push(j);
        }
        succ.push(out);
        k += 1;
    }
    let ranks = fixpoint_ranks(&succ);
    if ranks[0].is_none() {
        return Ok(KoenigOutcome::InfinitePath {
            on_cycle: ids[walk_to_cycle(&succ, &ranks, 0)].clone(),
        });
    }
    Ok(KoenigOutcome::Extracted(ids.into_iter().collect()))
}

/// Materialises a closed subset of any coalgebra as a finite coalgebra.
pub fn materialize(coalg: &dyn Coalgebra, subset: &Subset) -> Result<FiniteCoalgebra, CoalgebraError> {
    let entries = subset
        .iter()
        .map(|s| Ok((s.clone(), coalg.structure(s)?)))
        .collect::<Result<Vec<_>, CoalgebraError>>()?;
    FiniteCoalgebra::new(coalg.container().clone(), entries)
}

struct Solver<'a, V> {
    coalg: &'a FiniteCoalgebra,
    alg: &'a Algebra<V>,
    values: Vec<Option<V>>,
    on_stack: Vec<bool>,
}

impl<'a, V: Ord + Clone> Solver<'a, V> {
    fn new(coalg: &'a FiniteCoalgebra, alg: &'a Algebra<V>) -> Result<Self, RecursionError> {
        if coalg.container() != alg.container() {
            return Err(RecursionError::ContainerMismatch);
        }
        Ok(Solver {
            coalg,
            alg,
            values: vec![None; coalg.len()],
            on_stack: vec![false; coalg.len()],
        })
    }

    fn eval_at(&self, i: usize) -> V {
        let h = self
            .coalg
            .structure_of(&self.coalg.states()[i])
            .expect("index in range");
        let mapped = h.map(|s| {
            let j = self.coalg.index_of(s).expect("structures are closed");
            self.values[j].clone().expect("successors are solved first")
        });
        self.alg.eval(&mapped)
    }

    /// Iterative post-order DFS from `root`.
    fn solve(&mut self, root: usize) -> Result<(), RecursionError> {
        if self.values[root].is_some() {
            return Ok(());
        }
        let succ = self.coalg.succ_indices();
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        self.on_stack[root] = true;
        while let Some(&mut (i, ref mut next)) = stack.last_mut() {
            if let Some(&j) = succ[i].get(*next) {
                *next += 1;
                if self.values[j].is_some() {
                    continue;
                }
                if self.on_stack[j] {
                    return Err(RecursionError::Cycle(self.coalg.states()[j].clone()));
                }
                self.on_stack[j] = true;
                stack.push((j, 0));
            } else {
                self.values[i] = Some(self.eval_at(i));
                self.on_stack[i] = false;
                stack.pop();
            }
        }
        Ok(())
    }
}

/// The coalgebra-to-algebra morphism `h(x) = a(Hh(c(x)))`, by memoised
/// depth-first evaluation.
pub fn solve_recursion<V: Ord + Clone>(
    coalg: &FiniteCoalgebra,
    alg: &Algebra<V>,
) -> Result<BTreeMap<StateId, V>, RecursionError> {
    let mut solver = Solver::new(coalg, alg)?;
    for i in 0..coalg.len() {
        solver.solve(i)?;
    }
    Ok(coalg
        .states()
        .iter()
        .cloned()
        .zip(solver.values.into_iter().map(|v| v.expect("all solved")))
        .collect())
}

/// Like [`solve_recursion`] but only evaluates what `state` reaches.
pub fn solve_recursion_at<V: Ord + Clone>(
    coalg: &FiniteCoalgebra,
    alg: &Algebra<V>,
    state: &StateId,
) -> Result<V, RecursionError> {
    let i = coalg
        .index_of(state)
        .ok_or_else(|| CoalgebraError::NotInCarrier(state.clone()))?;
    let mut solver = Solver::new(coalg, alg)?;
    solver.solve(i)?;
    Ok(solver.values[i].take().expect("solved"))
}

/// Checks `h = a ∘ Hh ∘ c` at every state.
pub fn verify_recursion_square<V: Ord + Clone>(
    coalg: &FiniteCoalgebra,
    alg: &Algebra<V>,
    h: &BTreeMap<StateId, V>,
) -> Result<(), RecursionError> {
    if coalg.container() != alg.container() {
        return Err(RecursionError::ContainerMismatch);
    }
    for (x, cx) in coalg.entries() {
        let hx = h.get(x).ok_or_else(|| RecursionError::MissingValue(x.clone()))?;
        let mapped = cx.try_map(&mut |s| {
            h.get(s)
                .cloned()
                .ok_or_else(|| RecursionError::MissingValue(s.clone()))
        })?;
        if &alg.eval(&mapped) != hx {
            return Err(RecursionError::VerificationFailed(x.clone()));
        }
    }
    Ok(())
}

/// Extends a solution on `(C, c)` to the coproduct extension by `p` with the
/// composite `[id, a] ∘ (h + Hh) ∘ (id + p)`: old states keep `h`, a new
/// state `x` gets `a(Hh(p(x)))`.
pub fn extend_recursion_solution<V: Ord + Clone>(
    coalg: &FiniteCoalgebra,
    h: &BTreeMap<StateId, V>,
    extension: &[(StateId, HStructure)],
    alg: &Algebra<V>,
) -> Result<(FiniteCoalgebra, BTreeMap<StateId, V>), RecursionError> {
    if coalg.container() != alg.container() {
        return Err(RecursionError::ContainerMismatch);
    }
    let extended = coalg.coproduct_extension(extension)?;
    let mut out = BTreeMap::new();
    for s in coalg.states() {
        let v = h.get(s).ok_or_else(|| RecursionError::MissingValue(s.clone()))?;
        out.insert(s.clone(), v.clone());
    }
    for (x, p) in extension {
        let hp = p.try_map(&mut |s| {
            h.get(s)
                .cloned()
                .ok_or_else(|| RecursionError::MissingValue(s.clone()))
        })?;
        out.insert(x.clone(), alg.eval(&hp));
    }
    Ok((extended, out))
}

fn parse_nonzero(s: &StateId) -> Result<i64, CoalgebraError> {
    match s.as_str().parse::<i64>() {
        Ok(k) if k != 0 => Ok(k),
        _ => Err(CoalgebraError::NotInCarrier(s.clone())),
    }
}

/// `c(k) = (−|k| − 1, |k| + 1)` on `ℤ \ {0}`, for the functor
/// `{*} + {(x₁, x₂) | x₁ ≠ x₂}`.
pub fn example311_structure(k: i64) -> Result<HStructure, CoalgebraError> {
    if k == 0 {
        return Err(CoalgebraError::NotInCarrier(StateId::from_int(0)));
    }
    let m = k.unsigned_abs() as i64 + 1;
    Ok(Structure::pair(
        Structure::Slot(StateId::from_int(-m)),
        Structure::Slot(StateId::from_int(m)),
    ))
}

/// The recursive, non-well-founded coalgebra on `ℤ \ {0}`. States are named
/// by their decimal integer; querying `0` or a non-integer fails with
/// [`CoalgebraError::NotInCarrier`].
pub fn example311() -> LazyCoalgebra {
    LazyCoalgebra::new(
        "example-3.11",
        Container::pair_neq(Container::Identity),
        |s| example311_structure(parse_nonzero(s)?),
    )
}

/// A finite window `±1 … ±radius` of [`example311`]: targets beyond the
/// window are clamped to `±radius`, which turns the escaping paths into a
/// cycle at the boundary.
pub fn example311_window(radius: u32) -> FiniteCoalgebra {
    let r = i64::from(radius.max(1));
    let entries = (1..=r).flat_map(|m| [-m, m]).map(|k| {
        let next = (k.abs() + 1).min(r);
        (
            StateId::from_int(k),
            Structure::pair(
                Structure::Slot(StateId::from_int(-next)),
                Structure::Slot(StateId::from_int(next)),
            ),
        )
    });
    FiniteCoalgebra::new(Container::pair_neq(Container::Identity), entries)
        .expect("window is closed")
}

/// The constant solution `h(k) = a(*)` on the listed states, each checked
/// against `(a ∘ Hh ∘ c)(k) = h(k)`.
pub fn example311_recursion<V: Ord + Clone>(
    alg: &Algebra<V>,
    states: &[i64],
) -> Result<BTreeMap<i64, V>, RecursionError> {
    if alg.container() != &Container::pair_neq(Container::Identity) {
        return Err(RecursionError::ContainerMismatch);
    }
    let value = alg.eval(&Structure::Star);
    let mut out = BTreeMap::new();
    for &k in states {
        let mapped = example311_structure(k)?.map(|_| value.clone());
        if alg.eval(&mapped) != value {
            return Err(RecursionError::VerificationFailed(StateId::from_int(k)));
        }
        out.insert(k, value.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::least_subcoalgebra;

    fn s(name: &str) -> StateId {
        StateId::new(name).unwrap()
    }

    fn subset(names: &[&str]) -> Subset {
        names.iter().map(|n| s(n)).collect()
    }

    fn chain() -> FiniteCoalgebra {
        FiniteCoalgebra::graph([("a", &["b"][..]), ("b", &["c"][..]), ("c", &[][..])]).unwrap()
    }

    #[test]
    fn self_loop_has_empty_wf_part() {
        let c = FiniteCoalgebra::graph([("s", &["s"][..])]).unwrap();
        let r = well_founded_part(&c);
        assert!(r.wf_part.is_empty());
        assert!(!r.is_well_founded);
        assert!(!is_well_founded(&c));
    }

    #[test]
    fn chain_ranks() {
        let r = well_founded_part(&chain());
        assert!(r.is_well_founded);
        assert_eq!(r.rank[&s("c")], 1);
        assert_eq!(r.rank[&s("b")], 2);
        assert_eq!(r.rank[&s("a")], 3);
    }

    #[test]
    fn cycle_plus_tail() {
        let c = FiniteCoalgebra::graph([
            ("a", &["b"][..]),
            ("b", &["a"][..]),
            ("d", &["c"][..]),
            ("c", &[][..]),
        ])
        .unwrap();
        assert_eq!(well_founded_part(&c).wf_part, subset(&["c", "d"]));
    }

    #[test]
    fn empty_is_well_founded() {
        assert!(is_well_founded(&FiniteCoalgebra::empty(Container::graph())));
    }

    #[test]
    fn report_json() {
        let v = well_founded_part(&chain()).to_json();
        assert_eq!(v["wellFounded"], json!(true));
        assert_eq!(v["wfPart"], json!(["a", "b", "c"]));
        assert_eq!(v["ranks"]["a"], json!(3));
    }

    #[test]
    fn koenig_family_of_chain() {
        let fam = koenig_family(&chain(), true).unwrap();
        assert_eq!(
            fam.members,
            vec![subset(&["c"]), subset(&["b", "c"]), subset(&["a", "b", "c"])]
        );
        assert_eq!(fam.union(), chain().carrier());
        assert_eq!(fam.join(0, 1), subset(&["b", "c"]));
    }

    #[test]
    fn koenig_family_empty_and_non_wf() {
        let fam = koenig_family(&FiniteCoalgebra::empty(Container::graph()), true).unwrap();
        assert!(fam.members.is_empty());
        assert!(matches!(
            koenig_family(&example311_window(10), true),
            Err(WfError::NotWellFounded(_))
        ));
        assert!(koenig_family(&example311_window(10), false).is_ok());
        assert_eq!(example311_window(10).len(), 20);
    }

    #[test]
    fn koenig_extract_lazy_dag() {
        let c = chain();
        let lazy = c.to_lazy();
        let finite = least_subcoalgebra(&c, &subset(&["b"]), 1000).unwrap().closed().unwrap();
        assert_eq!(
            koenig_extract(&lazy, &s("b"), 1000).unwrap(),
            KoenigOutcome::Extracted(finite)
        );
    }

    #[test]
    fn koenig_extract_deadlock() {
        let lazy = LazyCoalgebra::new("dead", Container::graph(), |_| Ok(Structure::set([])));
        assert_eq!(
            koenig_extract(&lazy, &s("q"), 1).unwrap(),
            KoenigOutcome::Extracted(subset(&["q"]))
        );
    }

    #[test]
    fn koenig_extract_example311_exhausts() {
        let c = example311();
        for budget in [10, 100, 1000] {
            assert!(matches!(
                koenig_extract(&c, &StateId::from_int(1), budget).unwrap(),
                KoenigOutcome::BudgetExhausted { .. }
            ));
        }
    }

    #[test]
    fn koenig_extract_reports_cycle() {
        let c = FiniteCoalgebra::graph([("a", &["b"][..]), ("b", &["b"][..])]).unwrap();
        assert_eq!(
            koenig_extract(&c, &s("a"), 10).unwrap(),
            KoenigOutcome::InfinitePath { on_cycle: s("b") }
        );
    }

    #[test]
    fn induction_algebra_is_constantly_true() {
        let c = chain();
        let h = solve_recursion(&c, &Algebra::induction(Container::graph())).unwrap();
        assert!(h.values().all(|v| *v));
    }

    #[test]
    fn self_loop_cycle_error() {
        let c = FiniteCoalgebra::graph([("s", &["s"][..])]).unwrap();
        assert_eq!(
            solve_recursion(&c, &Algebra::count(Container::graph())),
            Err(RecursionError::Cycle(s("s")))
        );
    }

    #[test]
    fn recursion_square_holds() {
        let c = chain();
        let alg = Algebra::count(Container::graph());
        let h = solve_recursion(&c, &alg).unwrap();
        assert_eq!(h[&s("a")], 3);
        verify_recursion_square(&c, &alg, &h).unwrap();
        let mut bad = h.clone();
        bad.insert(s("a"), 7);
        assert_eq!(
            verify_recursion_square(&c, &alg, &bad),
            Err(RecursionError::VerificationFailed(s("a")))
        );
    }

    #[test]
    fn extension_of_solution() {
        let c = FiniteCoalgebra::graph([("s", &[][..])]).unwrap();
        let alg = Algebra::induction(Container::graph());
        let h = solve_recursion(&c, &alg).unwrap();
        let (ext, h2) = extend_recursion_solution(&c, &h, &[], &alg).unwrap();
        assert_eq!(ext, c);
        assert_eq!(h2, h);
        let p = [(s("x"), Structure::set([Structure::Slot(s("s"))]))];
        let (ext, h2) = extend_recursion_solution(&c, &h, &p, &alg).unwrap();
        assert!(h2[&s("x")]);
        verify_recursion_square(&ext, &alg, &h2).unwrap();
    }

    #[test]
    fn example311_formula() {
        let c = example311();
        assert_eq!(
            c.structure(&StateId::from_int(1)).unwrap(),
            Structure::pair(
                Structure::Slot(StateId::from_int(-2)),
                Structure::Slot(StateId::from_int(2))
            )
        );
        assert_eq!(
            c.structure(&StateId::from_int(-3)).unwrap(),
            Structure::pair(
                Structure::Slot(StateId::from_int(-4)),
                Structure::Slot(StateId::from_int(4))
            )
        );
        assert!(matches!(
            c.structure(&StateId::from_int(0)),
            Err(CoalgebraError::NotInCarrier(_))
        ));
        for k in (-60..=60).filter(|k| *k != 0) {
            assert_ne!(example311_structure(k).unwrap(), HStructure::Star);
        }
    }

    #[test]
    fn example311_constant_solution() {
        let depth = Algebra::new(
            "pair-depth",
            Container::pair_neq(Container::Identity),
            |h: &Structure<u64>| match h {
                Structure::Pair(..) => 1 + h.slots().into_iter().copied().max().unwrap_or(0),
                _ => 0,
            },
        );
        let ks: Vec<i64> = (1..=50).flat_map(|m| [-m, m]).collect();
        let h = example311_recursion(&depth, &ks).unwrap();
        assert!(h.values().all(|v| *v == 0));
        let seven = Algebra::new(
            "seven",
            Container::pair_neq(Container::Identity),
            |h: &Structure<u64>| if *h == Structure::Star { 7 } else { 1 },
        );
        let h7 = example311_recursion(&seven, &ks).unwrap();
        assert!(h7.values().all(|v| *v == 7));
        assert!(matches!(
            example311_recursion(&Algebra::count(Container::graph()), &[1]),
            Err(RecursionError::ContainerMismatch)
        ));
    }
}
