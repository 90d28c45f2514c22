use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use wfcoalg::coalgebra::{Algebra, FiniteCoalgebra};
use wfcoalg::container::{Container, HStructure, StateId};
use wfcoalg::convex::{
    affinity_certificate, convex_koenig_extract, convex_path_witness, convex_wf_fixpoint, mix, random_path, rational, successors,
    CPoint, ConvexExtraction,
};
use wfcoalg::initial_algebra::{
    diagram_colimit, realize_hstructure, term_algebra, tree_algebra, unfold_to_term, Arrow, DiagramSpec,
    Signature,
};
use wfcoalg::nominal::{
    nominal_infinite_path_witness, nominal_is_well_founded, nominal_koenig_extract, nominal_step, orbit_graph,
    random_input, random_walk, Atom, NState, NltsSpec,
};
use wfcoalg::random::{
    random_coalgebra, random_container, random_convex, random_nlts, random_point, random_structure,
    random_weight,
};
use wfcoalg::wellfounded::{extend_recursion_solution, solve_recursion, verify_recursion_square, well_founded_part};

/// Whether `c` uses the diagonal-collapsing pair, whose action can shrink
/// supports.
fn collapses(c: &Container) -> bool {
    match c {
        Container::Identity | Container::Const(_) => false,
        Container::PairNeq(_) => true,
        Container::Sum(l, r) => collapses(l) || collapses(r),
        Container::Product(cs) => cs.iter().any(collapses),
        Container::FinPow(c) => collapses(c),
        Container::Exp { base, .. } => collapses(base),
    }
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn ids(n: usize, prefix: &str) -> Vec<StateId> {
    (0..n).map(|i| StateId::new(format!("{prefix}{i}")).unwrap()).collect()
}

fn random_map(rng: &mut StdRng, from: &[StateId], to: &[StateId]) -> BTreeMap<StateId, StateId> {
    from.iter().map(|s| (s.clone(), to.choose(rng).unwrap().clone())).collect()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn hmap_is_functorial(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = random_container(&mut rng, 3);
        let (a, b, d) = (ids(4, "a"), ids(3, "b"), ids(3, "d"));
        let Some(h) = random_structure(&c, &a, &mut rng) else { return Ok(()) };
        prop_assert!(c.validate(&h));
        let id: BTreeMap<_, _> = a.iter().map(|s| (s.clone(), s.clone())).collect();
        prop_assert_eq!(c.hmap(&id, &h).unwrap(), h.clone());
        let f = random_map(&mut rng, &a, &b);
        let g = random_map(&mut rng, &b, &d);
        let gf: BTreeMap<_, _> = f.iter().map(|(k, v)| (k.clone(), g[v].clone())).collect();
        let fh = c.hmap(&f, &h).unwrap();
        prop_assert!(c.validate(&fh));
        prop_assert_eq!(c.hmap(&g, &fh).unwrap(), c.hmap(&gf, &h).unwrap());
        let image: BTreeSet<StateId> = c.support(&h).iter().map(|s| f[s].clone()).collect();
        prop_assert!(c.support(&fh).is_subset(&image));
        if !collapses(&c) {
            prop_assert_eq!(c.support(&fh), image);
        }
    }

    #[test]
    fn structure_json_round_trips(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = random_container(&mut rng, 3);
        prop_assert_eq!(Container::from_json(&c.to_json()).unwrap(), c.clone());
        if let Some(h) = random_structure(&c, &ids(3, "x"), &mut rng) {
            prop_assert_eq!(HStructure::from_json(&h.to_json()).unwrap(), h);
        }
    }

    #[test]
    fn coalgebra_file_round_trips(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = random_container(&mut rng, 2);
        let coalg = random_coalgebra(&c, rng.gen_range(0..12), 0.3, &mut rng);
        prop_assert_eq!(FiniteCoalgebra::from_json(&coalg.to_json()).unwrap(), coalg);
    }

    #[test]
    fn height_algebra_computes_ranks(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = random_container(&mut rng, 3);
        let coalg = random_coalgebra(&c, rng.gen_range(1..30), 0.0, &mut rng);
        let h = solve_recursion(&coalg, &Algebra::height(c.clone())).unwrap();
        let report = well_founded_part(&coalg);
        for (s, r) in &report.rank {
            prop_assert!(h[s] as usize <= *r);
            if !collapses(&c) {
                prop_assert_eq!(h[s] as usize, *r);
            }
        }
        for alg in [Algebra::count(c.clone()), Algebra::height(c.clone())] {
            let sol = solve_recursion(&coalg, &alg).unwrap();
            prop_assert!(verify_recursion_square(&coalg, &alg, &sol).is_ok());
        }
    }

    #[test]
    fn extension_preserves_recursion(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = random_container(&mut rng, 2);
        let coalg = random_coalgebra(&c, rng.gen_range(0..20), 0.0, &mut rng);
        let pool = coalg.states().to_vec();
        let ext: Vec<(StateId, HStructure)> = ids(3, "new")
            .into_iter()
            .filter_map(|x| random_structure(&c, &pool, &mut rng).map(|h| (x, h)))
            .collect();
        fn check<V: Ord + Clone + std::fmt::Debug>(
            coalg: &FiniteCoalgebra,
            ext: &[(StateId, HStructure)],
            alg: &Algebra<V>,
        ) -> Result<(), TestCaseError> {
            let h = solve_recursion(coalg, alg).unwrap();
            let (extended, h2) = extend_recursion_solution(coalg, &h, ext, alg).unwrap();
            prop_assert!(verify_recursion_square(&extended, alg, &h2).is_ok());
            prop_assert_eq!(h2, solve_recursion(&extended, alg).unwrap());
            Ok(())
        }
        check(&coalg, &ext, &Algebra::count(c.clone()))?;
        check(&coalg, &ext, &Algebra::height(c.clone()))?;
        check(&coalg, &ext, &Algebra::induction(c.clone()))?;
        check(&coalg, &ext, &tree_algebra(c.clone()))?;
    }

    #[test]
    fn unfold_and_realize_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sig = if rng.gen_bool(0.5) {
            Signature::binary_trees()
        } else {
            Signature::new([("z", 0), ("s", 1), ("p", 2), ("t", 3)]).unwrap()
        };
        let coalg = random_coalgebra(&sig.container(), rng.gen_range(1..12), 0.0, &mut rng);
        let alg = term_algebra(&sig);
        let terms = solve_recursion(&coalg, &alg).unwrap();
        prop_assert!(verify_recursion_square(&coalg, &alg, &terms).is_ok());
        for (x, t) in &terms {
            prop_assert_eq!(&unfold_to_term(&sig, &coalg, x).unwrap(), t);
            let q = sig.top_structure(t).unwrap();
            let r = realize_hstructure(&sig, &q).unwrap();
            prop_assert_eq!(&r.term, t);
            let report = well_founded_part(&r.coalgebra);
            prop_assert!(report.is_well_founded);
            let prefix_max = r
                .coalgebra
                .structure_of(&r.state)
                .unwrap()
                .support()
                .iter()
                .map(|s| report.rank[s])
                .max()
                .unwrap_or(0);
            prop_assert_eq!(report.rank[&r.state], prefix_max + 1);
        }
    }

    #[test]
    fn colimit_injections_commute(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        // a random graph glued to a copy of itself along the identity
        let base = random_coalgebra(&Container::graph(), rng.gen_range(1..8), 0.3, &mut rng);
        let identity: BTreeMap<_, _> = base.states().iter().map(|s| (s.clone(), s.clone())).collect();
        let copy = base.clone();
        let d = DiagramSpec::new(
            vec![base.clone(), copy],
            vec![Arrow { source: 0, target: 1, map: identity }],
        )
        .unwrap();
        let col = diagram_colimit(&d);
        prop_assert_eq!(col.classes.len(), base.len());
        for a in d.arrows() {
            for (x, fx) in &a.map {
                prop_assert_eq!(col.injections[a.source][x], col.injections[a.target][fx]);
            }
        }
        prop_assert!(col.is_total());
    }
}

fn random_state(spec: &NltsSpec, rng: &mut StdRng) -> NState {
    let (label, arity) = spec.labels().iter().collect::<Vec<_>>().choose(rng).map(|(l, a)| ((*l).clone(), **a)).unwrap();
    let mut atoms: Vec<u32> = (0..8).collect();
    atoms.shuffle(rng);
    NState::new(label, atoms.into_iter().take(arity))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn nominal_step_is_equivariant(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let spec = random_nlts(&mut rng, 5, false);
        let mut perm: Vec<u32> = (0..12).collect();
        perm.shuffle(&mut rng);
        let pi = |a: Atom| if a.0 < 12 { Atom(perm[a.0 as usize]) } else { a };
        for _ in 0..10 {
            let s = random_state(&spec, &mut rng);
            let a = random_input(&s, &mut rng);
            let moved = nominal_step(&spec, &s.permute(pi), pi(a)).unwrap();
            let image: BTreeSet<NState> = nominal_step(&spec, &s, a).unwrap().iter().map(|y| y.permute(pi)).collect();
            prop_assert_eq!(moved.len(), image.len());
            let mut known: BTreeSet<Atom> = s.permute(pi).registers.into_iter().collect();
            known.insert(pi(a));
            let canon = |set: &BTreeSet<NState>| set.iter().map(|y| y.canonical(&known)).collect::<BTreeSet<_>>();
            prop_assert_eq!(canon(&moved), canon(&image));
        }
    }

    #[test]
    fn nominal_lifting_and_projection(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let acyclic = rng.gen_bool(0.5);
        let spec = random_nlts(&mut rng, 6, acyclic);
        let graph = orbit_graph(&spec);
        let ranks = graph.ranks();
        prop_assert_eq!(nominal_is_well_founded(&spec), ranks.values().all(Option::is_some));
        for _ in 0..10 {
            let s = random_state(&spec, &mut rng);
            let len = rng.gen_range(1..60);
            let witness = nominal_infinite_path_witness(&spec, &s, len).unwrap();
            match ranks[&s.label] {
                None => {
                    let path = witness.unwrap();
                    prop_assert_eq!(path.steps.len(), len);
                    prop_assert!(path.verify(&spec));
                }
                Some(r) => {
                    prop_assert!(witness.is_none());
                    let walk = random_walk(&spec, &s, 50, &mut rng).unwrap();
                    prop_assert!(walk.steps.len() < r);
                }
            }
            let walk = random_walk(&spec, &s, 50, &mut rng).unwrap();
            prop_assert!(walk.verify(&spec));
            let mut label = &s.label;
            for step in &walk.steps {
                prop_assert!(graph.adjacency[label].contains(&step.state.label));
                label = &step.state.label;
            }
        }
        if nominal_is_well_founded(&spec) {
            let s = random_state(&spec, &mut rng);
            let labels = nominal_koenig_extract(&spec, &s).unwrap();
            prop_assert!(labels.contains(&s.label));
            for _ in 0..20 {
                let walk = random_walk(&spec, &s, 10, &mut rng).unwrap();
                for step in &walk.steps {
                    prop_assert!(labels.contains(&step.state.label));
                }
            }
        }
    }
}

fn point(rng: &mut StdRng, n: usize) -> CPoint {
    let all: Vec<usize> = (0..n).collect();
    let p = random_point(rng, n, &all);
    let q = random_point(rng, n, &all);
    mix(&p, &q, &random_weight(rng)).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn mixing_laws(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..5);
        let (x, y, z) = (point(&mut rng, n), point(&mut rng, n), point(&mut rng, n));
        let (r, s) = (random_weight(&mut rng), random_weight(&mut rng));
        let one = rational(1, 1);
        prop_assert_eq!(mix(&x, &x, &r).unwrap(), x.clone());
        prop_assert_eq!(mix(&x, &y, &rational(0, 1)).unwrap(), y.clone());
        prop_assert_eq!(mix(&x, &y, &r).unwrap(), mix(&y, &x, &(&one - &r)).unwrap());
        let s2 = &r + &s - &r * &s;
        if s2 != rational(0, 1) {
            let r2 = &r / &s2;
            prop_assert_eq!(
                mix(&x, &mix(&y, &z, &s).unwrap(), &r).unwrap(),
                mix(&mix(&x, &y, &r2).unwrap(), &z, &s2).unwrap()
            );
        }
    }

    #[test]
    fn successors_are_affine(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..5);
        let spec = random_convex(&mut rng, n, false);
        let (x, y) = (point(&mut rng, n), point(&mut rng, n));
        let cert = affinity_certificate(&spec, &x, &y, &random_weight(&mut rng)).unwrap();
        prop_assert!(cert.verify());
    }

    #[test]
    fn convex_verdicts(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..6);
        let acyclic = rng.gen_bool(0.3);
        let spec = random_convex(&mut rng, n, acyclic);
        let wf = convex_wf_fixpoint(&spec);
        // greatest fixpoint of "some vertex stays inside", from all generators
        let mut bad = vec![true; n];
        loop {
            let next: Vec<bool> = (0..n)
                .map(|g| bad[g] && spec.polytope(g).vertices().iter().any(|v| v.support().iter().all(|&k| bad[k])))
                .collect();
            if next == bad {
                break;
            }
            bad = next;
        }
        for g in 0..n {
            prop_assert_eq!(wf.is_wf(g), !bad[g]);
            match wf.rank[g] {
                None => prop_assert!(convex_path_witness(&spec, g, 10).unwrap().unwrap().verify(&spec)),
                Some(r) => {
                    prop_assert!(convex_path_witness(&spec, g, 10).unwrap().is_none());
                    let path = random_path(&spec, &CPoint::generator(n, g), 3 * n, &mut rng).unwrap();
                    prop_assert!(path.len() <= r);
                    let level = |p: &CPoint| p.support().iter().filter_map(|&k| wf.rank[k]).min();
                    for w in path.windows(2) {
                        prop_assert!(level(&w[1]).unwrap() < level(&w[0]).unwrap());
                        prop_assert!(!successors(&spec, &w[0]).unwrap().vertices().is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn convex_extraction_is_closed(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..5);
        let acyclic = rng.gen_bool(0.3);
        let spec = random_convex(&mut rng, n, acyclic);
        let wf = convex_wf_fixpoint(&spec);
        for g in 0..n {
            match convex_koenig_extract(&spec, g, 5_000).unwrap() {
                ConvexExtraction::NotWellFounded => prop_assert!(!wf.is_wf(g)),
                ConvexExtraction::BudgetExhausted { .. } => prop_assert!(wf.is_wf(g)),
                ConvexExtraction::Extracted(points) => {
                    let set: BTreeSet<&CPoint> = points.iter().collect();
                    prop_assert!(set.contains(&CPoint::generator(n, g)));
                    for p in &points {
                        prop_assert!(p.support().iter().any(|&k| wf.is_wf(k)));
                        for v in successors(&spec, p).unwrap().vertices() {
                            prop_assert!(set.contains(v));
                        }
                    }
                }
            }
        }
    }
}
