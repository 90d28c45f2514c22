//! Random instances for property tests, acceptance runs and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coalgebra::FiniteCoalgebra;
use crate::container::{Container, HStructure, StateId, Structure};
use crate::convex::{rational, CPoint, CPolytope, ConvexSpec, Rational};
use crate::nominal::{Assign, InputCase, NltsSpec, Rule, Template};

const LABELS: [&str; 3] = ["a", "b", "c"];
const EXPONENT: [&str; 2] = ["x", "y"];

fn random_container_at<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Container {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return if rng.gen_bool(0.7) {
            Container::Identity
        } else {
            let k = rng.gen_range(1..=LABELS.len());
            Container::constant(LABELS[..k].iter().copied())
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Container::sum(random_container_at(rng, d), random_container_at(rng, d)),
        1 => {
            let k = rng.gen_range(1..=3);
            Container::Product((0..k).map(|_| random_container_at(rng, d)).collect())
        }
        2 => Container::finpow(random_container_at(rng, d)),
        3 => {
            let k = rng.gen_range(1..=EXPONENT.len());
            Container::exp(random_container_at(rng, d), EXPONENT[..k].iter().copied())
        }
        _ => Container::pair_neq(random_container_at(rng, d)),
    }
}

fn mentions_identity(c: &Container) -> bool {
    match c {
        Container::Identity => true,
        Container::Const(_) => false,
        Container::Sum(l, r) => mentions_identity(l) || mentions_identity(r),
        Container::Product(cs) => cs.iter().any(mentions_identity),
        Container::FinPow(c) | Container::PairNeq(c) => mentions_identity(c),
        Container::Exp { base, .. } => mentions_identity(base),
    }
}

/// A container of nesting depth at most `max_depth` that has a closed value
/// and mentions the identity somewhere.
pub fn random_container<R: Rng + ?Sized>(rng: &mut R, max_depth: usize) -> Container {
    loop {
        let c = random_container_at(rng, max_depth);
        if c.has_closed_value() && mentions_identity(&c) {
            return c;
        }
    }
}

/// A random value of `c` with slots drawn from `pool`, if one exists.
pub fn random_structure<R: Rng + ?Sized>(
    c: &Container,
    pool: &[StateId],
    rng: &mut R,
) -> Option<HStructure> {
    match c {
        Container::Identity => pool.choose(rng).cloned().map(Structure::Slot),
        Container::Const(labels) => Some(Structure::Const(labels.choose(rng)?.clone())),
        Container::Sum(l, r) => {
            let left_first = rng.gen_bool(0.5);
            let (first, second) = if left_first { (l, r) } else { (r, l) };
            let wrap = |h, is_left: bool| if is_left { Structure::inl(h) } else { Structure::inr(h) };
            match random_structure(first, pool, rng) {
                Some(h) => Some(wrap(h, left_first)),
                None => random_structure(second, pool, rng).map(|h| wrap(h, !left_first)),
            }
        }
        Container::Product(cs) => cs
            .iter()
            .map(|c| random_structure(c, pool, rng))
            .collect::<Option<Vec<_>>>()
            .map(Structure::Tuple),
        Container::FinPow(inner) => {
            let k = rng.gen_range(0..=3);
            Some(Structure::set(
                (0..k).filter_map(|_| random_structure(inner, pool, rng)),
            ))
        }
        Container::Exp { base, exponent } => exponent
            .iter()
            .map(|e| random_structure(base, pool, rng).map(|h| (e.clone(), h)))
            .collect::<Option<_>>()
            .map(Structure::Fun),
        Container::PairNeq(inner) => {
            if rng.gen_bool(0.15) {
                return Some(Structure::Star);
            }
            match (random_structure(inner, pool, rng), random_structure(inner, pool, rng)) {
                (Some(a), Some(b)) => Some(Structure::pair(a, b)),
                _ => Some(Structure::Star),
            }
        }
    }
}

/// A coalgebra on `n` states named `s0 … s(n-1)`.
///
/// States are placed in a random order and each one refers only to states
/// earlier in it, except that with probability `back_edge` a state may refer
/// to any state. With `back_edge = 0` the result is well-founded. Requires
/// `c.has_closed_value()`.
pub fn random_coalgebra<R: Rng + ?Sized>(
    c: &Container,
    n: usize,
    back_edge: f64,
    rng: &mut R,
) -> FiniteCoalgebra {
    assert!(c.has_closed_value(), "container needs a closed value");
    let mut names: Vec<StateId> = (0..n).map(|i| StateId::new(format!("s{i}")).unwrap()).collect();
    names.shuffle(rng);
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let pool = if rng.gen_bool(back_edge) { &names[..] } else { &names[..i] };
        let h = random_structure(c, pool, rng)
            .or_else(|| random_structure(c, &[], rng))
            .unwrap_or_else(|| closed_value(c).expect("closed value"));
        entries.push((names[i].clone(), h));
    }
    FiniteCoalgebra::new(c.clone(), entries).expect("generated coalgebra is valid")
}

/// Some slot-free value of `c`.
pub fn closed_value(c: &Container) -> Option<HStructure> {
    match c {
        Container::Identity => None,
        Container::Const(labels) => Some(Structure::Const(labels.first()?.clone())),
        Container::Sum(l, r) => closed_value(l)
            .map(Structure::inl)
            .or_else(|| closed_value(r).map(Structure::inr)),
        Container::Product(cs) => cs.iter().map(closed_value).collect::<Option<_>>().map(Structure::Tuple),
        Container::FinPow(_) => Some(Structure::Set(vec![])),
        Container::Exp { base, exponent } => {
            let h = closed_value(base)?;
            Some(Structure::Fun(exponent.iter().map(|e| (e.clone(), h.clone())).collect()))
        }
        Container::PairNeq(_) => Some(Structure::Star),
    }
}

/// A random transition system with up to `max_labels` labels of arity ≤ 2.
/// When `acyclic`, templates only target labels of higher index.
pub fn random_nlts<R: Rng + ?Sized>(rng: &mut R, max_labels: usize, acyclic: bool) -> NltsSpec {
    let k = rng.gen_range(1..=max_labels.max(1));
    let arities: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=2)).collect();
    let name = |i: usize| format!("l{i}");
    let mut rules = Vec::new();
    for from in 0..k {
        let cases = std::iter::once(InputCase::Fresh).chain((0..arities[from]).map(InputCase::Register));
        for case in cases {
            if !rng.gen_bool(0.5) {
                continue;
            }
            let targets: Vec<usize> = if acyclic { (from + 1..k).collect() } else { (0..k).collect() };
            if targets.is_empty() {
                continue;
            }
            let mut to = Vec::new();
            for _ in 0..rng.gen_range(1..=2) {
                let t = *targets.choose(rng).expect("non-empty");
                to.push(Template {
                    label: name(t),
                    assign: random_assignment(rng, arities[from], case, arities[t]),
                });
            }
            rules.push(Rule {
                from: name(from),
                case,
                to,
            });
        }
    }
    NltsSpec::new((0..k).map(|i| (name(i), arities[i])), rules).expect("generated spec is valid")
}

fn random_assignment<R: Rng + ?Sized>(
    rng: &mut R,
    src_arity: usize,
    case: InputCase,
    arity: usize,
) -> Vec<Assign> {
    let mut sources: Vec<Assign> = (0..src_arity).map(Assign::Reg).collect();
    if let InputCase::Register(i) = case {
        sources.retain(|a| *a != Assign::Reg(i));
    }
    sources.push(Assign::Input);
    sources.shuffle(rng);
    let mut next_fresh = 0;
    (0..arity)
        .map(|_| {
            if rng.gen_bool(0.4) {
                if let Some(a) = sources.pop() {
                    return a;
                }
            }
            next_fresh += 1;
            Assign::Fresh(next_fresh)
        })
        .collect()
}

/// A rational `p/q` in `[0, 1]` with `q ≤ 8`.
pub fn random_weight<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let q = rng.gen_range(1..=8);
    rational(rng.gen_range(0..=q), q)
}

/// A random point over `n` generators supported on at most two of
/// `allowed`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize, allowed: &[usize]) -> CPoint {
    assert!(!allowed.is_empty());
    let a = *allowed.choose(rng).unwrap();
    let b = *allowed.choose(rng).unwrap();
    let w = random_weight(rng);
    let mut coeffs = vec![rational(0, 1); n];
    coeffs[a] += &w;
    coeffs[b] += rational(1, 1) - w;
    CPoint::new(coeffs).expect("probability vector")
}

/// A random system on `n` generators, each with up to three successor
/// vertices. When `acyclic`, vertices of generator `g` are supported on
/// generators of higher index only.
pub fn random_convex<R: Rng + ?Sized>(rng: &mut R, n: usize, acyclic: bool) -> ConvexSpec {
    let polys = (0..n)
        .map(|g| {
            let allowed: Vec<usize> = if acyclic { (g + 1..n).collect() } else { (0..n).collect() };
            if allowed.is_empty() {
                return CPolytope::empty();
            }
            let k = rng.gen_range(0..=3);
            CPolytope::new((0..k).map(|_| random_point(rng, n, &allowed)))
        })
        .collect();
    ConvexSpec::new(n, polys).expect("generated spec is valid")
}
