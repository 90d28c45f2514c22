//! Library answers checked against brute-force computations on small
//! instances.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wfcoalg::coalgebra::{least_subcoalgebra, Coalgebra, FiniteCoalgebra, Subset};
use wfcoalg::container::{Container, HStructure, StateId, Structure};
use wfcoalg::random::{random_coalgebra, random_container, random_structure};
use wfcoalg::wellfounded::{
    is_well_founded, koenig_extract, koenig_family, materialize, well_founded_part, KoenigOutcome,
};

fn sid(i: usize) -> StateId {
    StateId::new(format!("n{i}")).unwrap()
}

/// Every graph on `n` nodes, as adjacency bitmasks.
fn all_graphs(n: usize) -> impl Iterator<Item = FiniteCoalgebra> {
    (0u64..1 << (n * n)).map(move |bits| {
        let entries = (0..n).map(|i| {
            let succ = (0..n).filter(|j| bits >> (i * n + j) & 1 == 1).map(|j| Structure::Slot(sid(j)));
            (sid(i), Structure::set(succ))
        });
        FiniteCoalgebra::new(Container::graph(), entries).unwrap()
    })
}

fn adjacency(c: &FiniteCoalgebra) -> BTreeMap<StateId, Vec<StateId>> {
    c.states()
        .iter()
        .map(|s| (s.clone(), c.successors(s).unwrap().into_iter().collect()))
        .collect()
}

fn reachable(adj: &BTreeMap<StateId, Vec<StateId>>, from: &StateId) -> BTreeSet<StateId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![from.clone()];
    while let Some(s) = stack.pop() {
        if seen.insert(s.clone()) {
            stack.extend(adj[&s].iter().cloned());
        }
    }
    seen
}

/// States that reach no cycle, found by plain DFS.
fn dfs_wf_part(c: &FiniteCoalgebra) -> Subset {
    let adj = adjacency(c);
    let on_cycle: BTreeSet<StateId> = adj
        .keys()
        .filter(|v| adj[*v].iter().any(|w| reachable(&adj, w).contains(*v)))
        .cloned()
        .collect();
    adj.keys()
        .filter(|x| reachable(&adj, x).is_disjoint(&on_cycle))
        .cloned()
        .collect()
}

/// `x ∈ S ⟺ succ(x) ⊆ S` checked literally.
fn cartesian(adj: &BTreeMap<StateId, Vec<StateId>>, s: &Subset) -> bool {
    adj.iter().all(|(x, succ)| s.contains(x) == succ.iter().all(|y| s.contains(y)))
}

fn subsets(states: &[StateId]) -> impl Iterator<Item = Subset> + '_ {
    (0u64..1 << states.len()).map(move |m| {
        (0..states.len()).filter(|i| m >> i & 1 == 1).map(|i| states[i].clone()).collect()
    })
}

fn height(adj: &BTreeMap<StateId, Vec<StateId>>, x: &StateId, memo: &mut BTreeMap<StateId, usize>) -> usize {
    if let Some(&h) = memo.get(x) {
        return h;
    }
    let h = 1 + adj[x].iter().map(|y| height(adj, y, memo)).max().unwrap_or(0);
    memo.insert(x.clone(), h);
    h
}

fn check_against_oracles(c: &FiniteCoalgebra) {
    let report = well_founded_part(c);
    assert_eq!(report.wf_part, dfs_wf_part(c), "{c}");
    let adj = adjacency(c);
    let carrier = c.carrier();
    let proper_cartesian = subsets(c.states()).any(|s| s != carrier && cartesian(&adj, &s));
    assert_eq!(report.is_well_founded, !proper_cartesian, "{c}");
    for s in subsets(c.states()) {
        assert_eq!(c.is_cartesian_subcoalgebra(&s), cartesian(&adj, &s));
    }
    let mut memo = BTreeMap::new();
    for (x, r) in &report.rank {
        assert_eq!(*r, height(&adj, x, &mut memo), "rank of {x}");
    }
}

#[test]
fn exhaustive_graphs_up_to_three_states() {
    for n in 0..=3 {
        for c in all_graphs(n) {
            check_against_oracles(&c);
        }
    }
}

#[test]
fn random_graphs_up_to_ten_states() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.gen_range(1..=10);
        let p = rng.gen_range(0.0..0.4);
        check_against_oracles(&random_coalgebra(&Container::graph(), n, p, &mut rng));
    }
}

/// All values of `c` over `pool` (small containers only).
fn enumerate_values(c: &Container, pool: &[StateId]) -> Vec<HStructure> {
    match c {
        Container::Identity => pool.iter().cloned().map(Structure::Slot).collect(),
        Container::Const(ls) => ls.iter().cloned().map(Structure::Const).collect(),
        Container::Sum(l, r) => enumerate_values(l, pool)
            .into_iter()
            .map(Structure::inl)
            .chain(enumerate_values(r, pool).into_iter().map(Structure::inr))
            .collect(),
        Container::FinPow(inner) => {
            let items = enumerate_values(inner, pool);
            (0u64..1 << items.len())
                .map(|m| Structure::set((0..items.len()).filter(|i| m >> i & 1 == 1).map(|i| items[i].clone())))
                .collect()
        }
        Container::PairNeq(inner) => {
            let items = enumerate_values(inner, pool);
            let mut out = vec![Structure::Star];
            for a in &items {
                for b in &items {
                    if a != b {
                        out.push(Structure::pair(a.clone(), b.clone()));
                    }
                }
            }
            out
        }
        _ => unimplemented!("not needed"),
    }
}

/// Cartesian subsets are exactly those whose inclusion square is a
/// pullback: `c(x) ∈ Hm[HS]` forces `x ∈ S`.
#[test]
fn cartesian_iff_pullback() {
    for container in [Container::graph(), Container::pair_neq(Container::Identity)] {
        let states: Vec<StateId> = (0..3).map(sid).collect();
        let values = enumerate_values(&container, &states);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let entries = states.iter().map(|s| (s.clone(), values[rng.gen_range(0..values.len())].clone()));
            let c = FiniteCoalgebra::new(container.clone(), entries).unwrap();
            for s in subsets(&states) {
                let pool: Vec<StateId> = s.iter().cloned().collect();
                let image: BTreeSet<HStructure> = enumerate_values(&container, &pool).into_iter().collect();
                let pullback = c
                    .states()
                    .iter()
                    .all(|x| s.contains(x) == image.contains(c.structure_of(x).unwrap()));
                assert_eq!(c.is_cartesian_subcoalgebra(&s), pullback, "{c} at {s:?}");
            }
        }
    }
}

#[test]
fn koenig_family_on_random_containers() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..60 {
        let container = random_container(&mut rng, 3);
        let n = rng.gen_range(1..=40);
        let c = random_coalgebra(&container, n, 0.0, &mut rng);
        assert!(is_well_founded(&c));
        let family = koenig_family(&c, true).unwrap();
        assert_eq!(family.union(), c.carrier());
        for m in &family.members {
            assert!(c.is_subcoalgebra(m));
            assert!(is_well_founded(&materialize(&c, m).unwrap()));
        }
        for i in 0..family.members.len().min(5) {
            for j in 0..family.members.len().min(5) {
                assert!(c.is_subcoalgebra(&family.join(i, j)));
            }
        }
        for x in c.states() {
            let got = koenig_extract(&c, x, 10 * c.len()).unwrap();
            let least = least_subcoalgebra(&c, &BTreeSet::from([x.clone()]), c.len())
                .unwrap()
                .closed()
                .unwrap();
            assert_eq!(got, KoenigOutcome::Extracted(least));
        }
    }
}

#[test]
fn koenig_on_cyclic_states_reports_infinite_path() {
    let mut rng = StdRng::seed_from_u64(29);
    for _ in 0..100 {
        let c = random_coalgebra(&Container::graph(), 12, 0.3, &mut rng);
        let wf = well_founded_part(&c).wf_part;
        for x in c.states() {
            match koenig_extract(&c, x, 1000).unwrap() {
                KoenigOutcome::Extracted(s) => assert!(wf.contains(x) && s.iter().all(|y| wf.contains(y))),
                KoenigOutcome::InfinitePath { on_cycle } => {
                    assert!(!wf.contains(x));
                    let adj = adjacency(&c);
                    assert!(adj[&on_cycle].iter().any(|y| reachable(&adj, y).contains(&on_cycle)));
                }
                KoenigOutcome::BudgetExhausted { .. } => panic!("budget exceeds carrier"),
            }
        }
    }
}

#[test]
fn extension_keeps_old_ranks() {
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..100 {
        let container = random_container(&mut rng, 2);
        let c = random_coalgebra(&container, rng.gen_range(0..15), 0.0, &mut rng);
        let before = well_founded_part(&c);
        let pool: Vec<StateId> = c.states().to_vec();
        let ext: Vec<(StateId, HStructure)> = (0..3)
            .filter_map(|i| {
                let h = random_structure(&container, &pool, &mut rng)?;
                Some((StateId::new(format!("new{i}")).unwrap(), h))
            })
            .collect();
        let extended = c.coproduct_extension(&ext).unwrap();
        let after = well_founded_part(&extended);
        assert!(after.is_well_founded);
        for (s, r) in &before.rank {
            assert_eq!(after.rank[s], *r);
        }
        for (x, h) in &ext {
            let expect = 1 + h.support().iter().map(|s| before.rank[s]).max().unwrap_or(0);
            assert_eq!(after.rank[x], expect);
        }
    }
}
