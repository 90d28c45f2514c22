//! Built-in named examples.

use wfcoalg::coalgebra::FiniteCoalgebra;
use wfcoalg::container::StateId;
use wfcoalg::convex::{rational, CPoint, CPolytope, ConvexSpec};
use wfcoalg::initial_algebra::Signature;
use wfcoalg::nominal::{Assign, InputCase, NltsSpec, Rule, Template};
use wfcoalg::wellfounded::example311;

use crate::input::Input;

/// What `gallery NAME` runs on the entry's input.
#[derive(Clone, Debug)]
pub enum Action {
    CheckWf,
    WfPart,
    /// König extraction, then the constant recursion check.
    Example311 { state: i64 },
    FoldTerms(fn() -> Signature),
    CheckInitial { depth: usize },
}

pub struct Entry {
    pub name: &'static str,
    pub description: &'static str,
    pub action: Action,
    build: fn() -> Input,
}

impl Entry {
    pub fn input(&self) -> Input {
        (self.build)()
    }
}

fn graph(adj: &[(&str, &[&str])]) -> Input {
    Input::Set(FiniteCoalgebra::graph(adj.iter().copied()).expect("gallery graph"))
}

fn templates(to: Targets) -> Vec<Template> {
    to.iter()
        .map(|(l, a)| Template {
            label: l.to_string(),
            assign: a.to_vec(),
        })
        .collect()
}

type Targets<'a> = &'a [(&'a str, &'a [Assign])];

fn nlts(labels: &[(&str, usize)], rules: &[(&str, InputCase, Targets)]) -> Input {
    let rules = rules
        .iter()
        .map(|(from, case, to)| Rule {
            from: from.to_string(),
            case: *case,
            to: templates(to),
        })
        .collect();
    Input::Nlts(
        NltsSpec::new(labels.iter().map(|(l, a)| (l.to_string(), *a)), rules).expect("gallery spec"),
    )
}

fn convex(n: usize, polys: Vec<Vec<CPoint>>) -> Input {
    Input::Convex(ConvexSpec::new(n, polys.into_iter().map(CPolytope::new).collect()).expect("gallery spec"))
}

fn half() -> CPoint {
    CPoint::new(vec![rational(1, 2), rational(1, 2), rational(0, 1)]).unwrap()
}

fn tree_fold() -> Input {
    let sig = Signature::binary_trees();
    let s = |x: &str| StateId::new(x).unwrap();
    let entries = [
        (s("root"), sig.encode(1, vec![s("left"), s("shared")])),
        (s("left"), sig.encode(1, vec![s("shared"), s("shared")])),
        (s("shared"), sig.encode(1, vec![s("leaf"), s("leaf")])),
        (s("leaf"), sig.encode::<StateId>(0, vec![])),
    ];
    Input::Set(FiniteCoalgebra::new(sig.container(), entries).expect("gallery tree"))
}

pub const ENTRIES: &[Entry] = &[
    Entry {
        name: "chain",
        description: "a → b → c, a finite chain ending in a deadlock",
        action: Action::CheckWf,
        build: || graph(&[("a", &["b"]), ("b", &["c"]), ("c", &[])]),
    },
    Entry {
        name: "selfloop",
        description: "a single state with a self-loop",
        action: Action::CheckWf,
        build: || graph(&[("a", &["a"])]),
    },
    Entry {
        name: "cycle-tail",
        description: "a root branching into a deadlock and into a two-cycle",
        action: Action::WfPart,
        build: || {
            graph(&[
                ("root", &["leaf", "p"]),
                ("leaf", &[]),
                ("p", &["q"]),
                ("q", &["p"]),
                ("done", &["leaf"]),
            ])
        },
    },
    Entry {
        name: "example-3.11",
        description: "c(k) = (−|k|−1, |k|+1) on the nonzero integers: recursive but not well-founded",
        action: Action::Example311 { state: 1 },
        build: || Input::Lazy(example311()),
    },
    Entry {
        name: "binary-trees",
        description: "closed terms of HX = X × X + X + 1 up to depth 3",
        action: Action::CheckInitial { depth: 3 },
        build: || Input::Signature(Signature::new([("node", 2), ("un", 1), ("leaf", 0)]).unwrap()),
    },
    Entry {
        name: "nat-terms",
        description: "closed terms of {z/0, s/1} up to depth 6",
        action: Action::CheckInitial { depth: 6 },
        build: || Input::Signature(Signature::naturals()),
    },
    Entry {
        name: "tree-fold",
        description: "a binary tree with shared subtrees, unfolded to its term",
        action: Action::FoldTerms(Signature::binary_trees),
        build: tree_fold,
    },
    Entry {
        name: "nominal-fresh-loop",
        description: "l0 reads a fresh atom and stores another fresh one, forever",
        action: Action::CheckWf,
        build: || nlts(&[("l0", 1)], &[("l0", InputCase::Fresh, &[("l0", &[Assign::Fresh(1)])])]),
    },
    Entry {
        name: "nominal-acyclic",
        description: "l0 stores a fresh input and moves to the deadlock l1",
        action: Action::CheckWf,
        build: || {
            nlts(
                &[("l0", 1), ("l1", 1)],
                &[("l0", InputCase::Fresh, &[("l1", &[Assign::Input])])],
            )
        },
    },
    Entry {
        name: "convex-self-loop",
        description: "one generator whose only successor is itself",
        action: Action::CheckWf,
        build: || convex(1, vec![vec![CPoint::generator(1, 0)]]),
    },
    Entry {
        name: "convex-chain",
        description: "g0 → g1, g1 a deadlock",
        action: Action::CheckWf,
        build: || convex(2, vec![vec![CPoint::generator(2, 1)], vec![]]),
    },
    Entry {
        name: "convex-escape",
        description: "g2 moves to an even mix of the loop g0 and the deadlock g1",
        action: Action::CheckWf,
        build: || convex(3, vec![vec![CPoint::generator(3, 0)], vec![], vec![half()]]),
    },
];

pub fn entry(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name)
}
