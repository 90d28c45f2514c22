//! Command-line front end for `wfcoalg`.
//!
//! Exit codes: 0 well-founded or success, 1 not well-founded (or a failed
//! check), 2 budget exhausted, 3 input error.

pub mod dot;
pub mod gallery;
pub mod input;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use wfcoalg::coalgebra::{Algebra, Coalgebra, FiniteCoalgebra};
use wfcoalg::container::StateId;
use wfcoalg::convex::{convex_koenig_extract, convex_path_witness, ConvexExtraction, convex_wf_fixpoint, random_path, CPoint, ConvexSpec};
use wfcoalg::initial_algebra::{
    check_initial_algebra, realize_hstructure, term_algebra, tree_algebra, InitialError, Signature,
};
use wfcoalg::nominal::{
    nominal_infinite_path_witness, nominal_koenig_extract, orbit_graph, random_walk, NState, NltsSpec,
    NominalError,
};
use wfcoalg::wellfounded::{
    example311_recursion, example311_structure, koenig_extract, solve_recursion, well_founded_part,
    KoenigOutcome, RecursionError,
};

use gallery::Action;
use input::{Input, InputError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Success = 0,
    NotWellFounded = 1,
    BudgetExhausted = 2,
    InputError = 3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgebraName {
    Term,
    Induction,
    Count,
    Height,
}

#[derive(Debug, Parser)]
#[command(name = "wfcoalg", version, about = "Well-foundedness analyses for coalgebras")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Maximum number of states explored by König extraction.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Term depth for the initial-algebra check.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    /// Length of witness paths.
    #[arg(long, global = true, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    /// Seed for sampled simulations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide well-foundedness of each input.
    CheckWf {
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// Print the well-founded part with ranks.
    WfPart { input: String },
    /// Extract a finite well-founded subcoalgebra containing a state.
    Koenig {
        input: String,
        #[arg(long)]
        state: String,
    },
    /// Compute the unique coalgebra-to-algebra morphism into a built-in algebra.
    Fold {
        input: String,
        #[arg(long, value_enum)]
        algebra: AlgebraName,
        /// Signature whose term algebra `--algebra term` folds into.
        #[arg(long)]
        sig: Option<String>,
    },
    /// Realise a structure over terms by a finite well-founded coalgebra.
    Realize {
        #[arg(long)]
        sig: String,
        #[arg(long)]
        structure: String,
    },
    /// Check the initial algebra of a signature on all terms up to `--depth`.
    #[command(alias = "check-5.2")]
    CheckInitial {
        #[arg(long)]
        sig: String,
    },
    /// Run a built-in example, or list and run all of them.
    Gallery { name: Option<String> },
    /// Print the canonical graph, orbit graph or generator graph as DOT.
    ExportDot { input: String },
}

/// The result of one analysis.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub text: String,
    pub json: Value,
    pub dot: Option<String>,
}

impl Outcome {
    fn new(exit: Exit, text: String, json: Value) -> Self {
        Outcome {
            exit,
            text,
            json,
            dot: None,
        }
    }

    fn with_dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }
}

#[derive(Debug)]
enum Failure {
    Input(InputError),
    Usage(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "{e}"),
            Failure::Usage(m) => f.write_str(m),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn usage(m: impl Into<String>) -> Failure {
    Failure::Usage(m.into())
}

fn failure_outcome(f: &Failure) -> Outcome {
    Outcome::new(Exit::InputError, format!("error: {f}"), json!({"error": f.to_string()}))
}

fn join_ranks<'a>(ranks: impl IntoIterator<Item = (&'a str, usize)>) -> String {
    ranks
        .into_iter()
        .map(|(s, r)| format!("{s}={r}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn graph_dot(c: &FiniteCoalgebra) -> String {
    dot::render(
        c.states().iter().map(|s| s.to_string()),
        c.states().iter().flat_map(|s| {
            c.successors(s)
                .expect("state")
                .into_iter()
                .map(move |t| (s.to_string(), t.to_string()))
        }),
    )
}

fn nlts_dot(spec: &NltsSpec) -> String {
    let g = orbit_graph(spec);
    dot::render(
        g.adjacency.keys().cloned(),
        g.edges().map(|(a, b)| (a.to_string(), b.to_string())),
    )
}

fn generator(i: usize) -> String {
    format!("g{i}")
}

fn convex_dot(spec: &ConvexSpec) -> String {
    let n = spec.generators();
    dot::render(
        (0..n).map(generator),
        (0..n).flat_map(|g| {
            spec.polytope(g)
                .vertices()
                .iter()
                .flat_map(CPoint::support)
                .map(move |k| (generator(g), generator(k)))
                .collect::<Vec<_>>()
        }),
    )
}

fn input_dot(input: &Input) -> Result<String> {
    match input {
        Input::Set(c) => Ok(graph_dot(c)),
        Input::Nlts(s) => Ok(nlts_dot(s)),
        Input::Convex(s) => Ok(convex_dot(s)),
        Input::Lazy(_) => Err(usage("a lazily presented coalgebra has no finite graph to draw")),
        Input::Signature(_) => Err(usage("a signature has no graph to draw")),
    }
}

fn set_wf(c: &FiniteCoalgebra, full: bool) -> Outcome {
    let report = well_founded_part(c);
    let ranks = join_ranks(report.rank.iter().map(|(s, r)| (s.as_str(), *r)));
    let mut text = String::new();
    if report.is_well_founded {
        writeln!(text, "well-founded, ranks {ranks}").unwrap();
    } else {
        writeln!(text, "not well-founded").unwrap();
        let outside: Vec<&str> = c
            .states()
            .iter()
            .filter(|s| !report.wf_part.contains(*s))
            .map(StateId::as_str)
            .collect();
        writeln!(text, "outside the well-founded part: {}", outside.join(" ")).unwrap();
        if full {
            writeln!(text, "ranks {ranks}").unwrap();
        }
        let first = StateId::new(outside[0]).expect("state");
        if let Ok(KoenigOutcome::InfinitePath { on_cycle }) = koenig_extract(c, &first, c.len().max(1)) {
            writeln!(text, "an infinite path from {first} enters a cycle at {on_cycle}").unwrap();
        }
    }
    let mut json = report.to_json();
    json["kind"] = json!("set-coalgebra");
    let exit = if report.is_well_founded {
        Exit::Success
    } else {
        Exit::NotWellFounded
    };
    Outcome::new(exit, text, json).with_dot(graph_dot(c))
}

fn nlts_wf(spec: &NltsSpec, cfg: &RunConfig) -> Result<Outcome> {
    let ranks = orbit_graph(spec).ranks();
    let wf = ranks.values().all(Option::is_some);
    let mut text = String::new();
    let shown: Vec<String> = ranks
        .iter()
        .map(|(l, r)| match r {
            Some(r) => format!("{l}={r}"),
            None => format!("{l}=∞"),
        })
        .collect();
    let mut json = json!({
        "kind": "nlts",
        "wellFounded": wf,
        "labelRanks": ranks,
    });
    if wf {
        writeln!(text, "well-founded (orbit graph acyclic), label ranks {}", shown.join(" ")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut longest = 0;
        for label in spec.labels().keys() {
            let start = spec.initial_state(label).map_err(nominal_failure)?;
            for _ in 0..100 {
                let walk = random_walk(spec, &start, spec.labels().len() + 1, &mut rng).map_err(nominal_failure)?;
                longest = longest.max(walk.steps.len());
            }
        }
        writeln!(text, "sampled runs: {} per label, longest {longest} steps", 100).unwrap();
        json["sampledRuns"] = json!({"perLabel": 100, "longest": longest, "seed": cfg.seed});
    } else {
        writeln!(text, "not well-founded (orbit graph has a cycle), label ranks {}", shown.join(" ")).unwrap();
        let label = ranks.iter().find(|(_, r)| r.is_none()).map(|(l, _)| l.clone()).expect("cyclic");
        let start = spec.initial_state(&label).map_err(nominal_failure)?;
        let path = nominal_infinite_path_witness(spec, &start, cfg.length as usize)
            .map_err(nominal_failure)?
            .expect("label reaches a cycle");
        writeln!(text, "witness, {} verified steps from {start}:", path.steps.len()).unwrap();
        for s in path.steps.iter().take(SHOWN_STEPS) {
            writeln!(text, "  --{}--> {}", s.atom, s.state).unwrap();
        }
        elide(&mut text, path.steps.len());
        json["witness"] = path.to_json();
    }
    let exit = if wf { Exit::Success } else { Exit::NotWellFounded };
    Ok(Outcome::new(exit, text, json).with_dot(nlts_dot(spec)))
}

/// Witness steps printed in text mode; JSON carries all of them.
const SHOWN_STEPS: usize = 8;

fn elide(text: &mut String, total: usize) {
    if total > SHOWN_STEPS {
        writeln!(text, "  … {} more", total - SHOWN_STEPS).unwrap();
    }
}

fn nominal_failure(e: NominalError) -> Failure {
    usage(e.to_string())
}

fn convex_wf(spec: &ConvexSpec, cfg: &RunConfig) -> Result<Outcome> {
    let wf = convex_wf_fixpoint(spec);
    let shown: Vec<String> = wf
        .rank
        .iter()
        .enumerate()
        .map(|(g, r)| match r {
            Some(r) => format!("g{g}={r}"),
            None => format!("g{g}=∞"),
        })
        .collect();
    let mut text = String::new();
    let mut json = wf.to_json();
    json["kind"] = json!("convex");
    if wf.all_well_founded() {
        writeln!(
            text,
            "well-founded; the whole carrier on {} generators is the finitely generated witness",
            spec.generators()
        )
        .unwrap();
        writeln!(text, "generator ranks {}", shown.join(" ")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut longest = 0;
        for g in 0..spec.generators() {
            for _ in 0..20 {
                let path = random_path(spec, &CPoint::generator(spec.generators(), g), spec.generators() + 1, &mut rng)
                    .map_err(|e| usage(e.to_string()))?;
                longest = longest.max(path.len() - 1);
            }
        }
        writeln!(text, "sampled paths: 20 per generator, longest {longest} steps").unwrap();
        json["sampledPaths"] = json!({"perGenerator": 20, "longest": longest, "seed": cfg.seed});
    } else {
        writeln!(text, "not well-founded").unwrap();
        writeln!(text, "generator ranks {}", shown.join(" ")).unwrap();
        let g = wf.rank.iter().position(Option::is_none).expect("non-wf generator");
        let path = convex_path_witness(spec, g, cfg.length as usize)
            .map_err(|e| usage(e.to_string()))?
            .expect("generator has an infinite path");
        writeln!(text, "witness, {} verified steps from g{g}:", path.len()).unwrap();
        for p in path.points[1..].iter().take(SHOWN_STEPS) {
            writeln!(text, "  → {p}").unwrap();
        }
        elide(&mut text, path.len());
        json["witness"] = json!({"generator": g, "steps": path.to_json()});
    }
    let exit = if wf.all_well_founded() {
        Exit::Success
    } else {
        Exit::NotWellFounded
    };
    Ok(Outcome::new(exit, text, json).with_dot(convex_dot(spec)))
}

fn check_wf(input: &Input, cfg: &RunConfig, full: bool) -> Result<Outcome> {
    match input {
        Input::Set(c) => Ok(set_wf(c, full)),
        Input::Nlts(s) => nlts_wf(s, cfg),
        Input::Convex(s) => convex_wf(s, cfg),
        Input::Lazy(c) => Err(usage(format!(
            "`{}` has an infinite carrier; use `koenig` on one of its states",
            c.name()
        ))),
        Input::Signature(_) => Err(usage("a signature is not a coalgebra; use `check-initial`")),
    }
}

fn parse_nstate(spec: &NltsSpec, s: &str) -> Result<NState> {
    let bad = || usage(format!("state `{s}`: expected LABEL or LABEL[a,b,…]"));
    let state = match s.split_once('[') {
        None => spec.initial_state(s).map_err(nominal_failure)?,
        Some((label, rest)) => {
            let inner = rest.strip_suffix(']').ok_or_else(bad)?;
            let atoms = inner
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            NState::new(label, atoms)
        }
    };
    Ok(state)
}

fn koenig_outcome(coalg: &dyn Coalgebra, name: Option<&str>, state: &str, budget: usize) -> Result<Outcome> {
    let s = StateId::new(state).map_err(|e| usage(e.to_string()))?;
    let outcome = koenig_extract(coalg, &s, budget).map_err(|e| usage(e.to_string()))?;
    Ok(match outcome {
        KoenigOutcome::Extracted(states) => {
            let names: Vec<&str> = states.iter().map(StateId::as_str).collect();
            Outcome::new(
                Exit::Success,
                format!(
                    "finite well-founded subcoalgebra containing {s}: {} states\n{}\n",
                    names.len(),
                    names.join(" ")
                ),
                json!({"outcome": "extracted", "state": s, "states": names}),
            )
        }
        KoenigOutcome::BudgetExhausted { visited } => {
            let mut text = format!("budget exhausted after visiting {visited} states from {s}");
            if name == Some("example-3.11") {
                text.push_str("; only the empty finite subcoalgebra exists");
            }
            text.push('\n');
            Outcome::new(
                Exit::BudgetExhausted,
                text,
                json!({"outcome": "budget-exhausted", "state": s, "visited": visited, "budget": budget}),
            )
        }
        KoenigOutcome::InfinitePath { on_cycle } => Outcome::new(
            Exit::NotWellFounded,
            format!("{s} is not in the well-founded part: an infinite path enters a cycle at {on_cycle}\n"),
            json!({"outcome": "infinite-path", "state": s, "onCycle": on_cycle}),
        ),
    })
}

fn koenig(input: &Input, state: &str, cfg: &RunConfig) -> Result<Outcome> {
    let budget = usize::try_from(cfg.budget).unwrap_or(usize::MAX);
    match input {
        Input::Set(c) => koenig_outcome(c, None, state, budget),
        Input::Lazy(c) => koenig_outcome(c, Some(c.name()), state, budget),
        Input::Nlts(spec) => {
            let s = parse_nstate(spec, state)?;
            match nominal_koenig_extract(spec, &s) {
                Ok(labels) => {
                    let names: Vec<&str> = labels.iter().map(String::as_str).collect();
                    Ok(Outcome::new(
                        Exit::Success,
                        format!(
                            "orbit-finite subcoalgebra containing {s}: all states with labels {}\n",
                            names.join(" ")
                        ),
                        json!({"outcome": "extracted", "state": s.to_json(), "labels": names}),
                    ))
                }
                Err(NominalError::NotWellFounded(l)) => Ok(Outcome::new(
                    Exit::NotWellFounded,
                    format!("not well-founded: the orbit graph has a cycle reachable from {l}\n"),
                    json!({"outcome": "not-well-founded", "label": l}),
                )),
                Err(e) => Err(nominal_failure(e)),
            }
        }
        Input::Convex(spec) => {
            let g: usize = state
                .trim_start_matches('g')
                .parse()
                .map_err(|_| usage(format!("state `{state}`: expected a generator like g0")))?;
            Ok(match convex_koenig_extract(spec, g, budget).map_err(|e| usage(e.to_string()))? {
                ConvexExtraction::Extracted(points) => {
                    let mut text = format!(
                        "finitely generated well-founded subcoalgebra containing g{g}: the hull of {} points\n",
                        points.len()
                    );
                    for p in &points {
                        writeln!(text, "  {p}").unwrap();
                    }
                    Outcome::new(
                        Exit::Success,
                        text,
                        json!({"outcome": "extracted", "generator": g, "points": points.iter().map(CPoint::to_json).collect::<Vec<_>>()}),
                    )
                }
                ConvexExtraction::BudgetExhausted { visited } => Outcome::new(
                    Exit::BudgetExhausted,
                    format!("budget exhausted after visiting {visited} points from g{g}\n"),
                    json!({"outcome": "budget-exhausted", "generator": g, "visited": visited, "budget": budget}),
                ),
                ConvexExtraction::NotWellFounded => Outcome::new(
                    Exit::NotWellFounded,
                    format!("g{g} is not in the well-founded part: it has an infinite path\n"),
                    json!({"outcome": "not-well-founded", "generator": g}),
                ),
            })
        }
        Input::Signature(_) => Err(usage("a signature is not a coalgebra")),
    }
}

fn recursion_failure(e: RecursionError) -> Result<Outcome> {
    match e {
        RecursionError::Cycle(s) => Ok(Outcome::new(
            Exit::NotWellFounded,
            format!("no solution computed: {s} reaches a cycle\n"),
            json!({"outcome": "cycle", "state": s}),
        )),
        other => Err(usage(other.to_string())),
    }
}

fn fold_values<V: Ord + Clone>(
    c: &FiniteCoalgebra,
    alg: &Algebra<V>,
    show: impl Fn(&V) -> String,
    encode: impl Fn(&V) -> Value,
) -> Result<Outcome> {
    match solve_recursion(c, alg) {
        Ok(h) => {
            let mut text = String::new();
            let mut map = serde_json::Map::new();
            for (s, v) in &h {
                writeln!(text, "{s} = {}", show(v)).unwrap();
                map.insert(s.to_string(), encode(v));
            }
            Ok(Outcome::new(
                Exit::Success,
                text,
                json!({"outcome": "solved", "algebra": alg.name(), "values": map}),
            ))
        }
        Err(e) => recursion_failure(e),
    }
}

fn fold(input: &Input, algebra: AlgebraName, sig: Option<&Signature>) -> Result<Outcome> {
    let Input::Set(c) = input else {
        return Err(usage("fold needs a finite set coalgebra"));
    };
    let h = c.container().clone();
    match (algebra, sig) {
        (AlgebraName::Term, Some(sig)) => {
            if sig.container() != h {
                return Err(usage("the coalgebra's functor is not the signature's"));
            }
            fold_values(c, &term_algebra(sig), |t| t.to_string(), |t| json!(t.to_string()))
        }
        (AlgebraName::Term, None) => fold_values(c, &tree_algebra(h), |t| t.to_json().to_string(), |t| t.to_json()),
        (AlgebraName::Induction, _) => fold_values(c, &Algebra::induction(h), |b| b.to_string(), |b| json!(b)),
        (AlgebraName::Count, _) => fold_values(c, &Algebra::count(h), |n| n.to_string(), |n| json!(n)),
        (AlgebraName::Height, _) => fold_values(c, &Algebra::height(h), |n| n.to_string(), |n| json!(n)),
    }
}

fn initial_failure(e: InitialError) -> Failure {
    usage(e.to_string())
}

fn realize(sig: &Signature, structure: &str) -> Result<Outcome> {
    let q = input::load_structure(structure)?;
    let r = realize_hstructure(sig, &q).map_err(initial_failure)?;
    let report = well_founded_part(&r.coalgebra);
    let text = format!(
        "term {}\nrealised by state {} (rank {}) of a well-founded coalgebra with {} states\n{}",
        r.term,
        r.state,
        report.rank[&r.state],
        r.coalgebra.len(),
        r.coalgebra
    );
    let json = json!({
        "term": r.term.to_string(),
        "state": r.state,
        "coalgebra": r.coalgebra.to_json(),
    });
    Ok(Outcome::new(Exit::Success, text, json).with_dot(graph_dot(&r.coalgebra)))
}

fn check_initial(sig: &Signature, depth: usize) -> Result<Outcome> {
    let r = check_initial_algebra(sig, depth).map_err(initial_failure)?;
    let mut text = String::new();
    writeln!(
        text,
        "{}: {} terms of depth ≤ {depth}, {} realised and unfolded back; {} structures over shallower terms, {} distinct images",
        if r.passed() { "passed" } else { "FAILED" },
        r.terms,
        r.realized,
        r.structures,
        r.distinct_images
    )
    .unwrap();
    if let Some(t) = &r.counterexample {
        writeln!(text, "counterexample: {t}").unwrap();
    }
    let exit = if r.passed() {
        Exit::Success
    } else {
        Exit::NotWellFounded
    };
    Ok(Outcome::new(exit, text, r.to_json()))
}

fn example311_outcome(state: i64, cfg: &RunConfig) -> Result<Outcome> {
    let coalg = wfcoalg::wellfounded::example311();
    let mut out = koenig_outcome(&coalg, Some(coalg.name()), &state.to_string(), cfg.budget as usize)?;
    let samples: BTreeMap<String, String> = [1, -3]
        .into_iter()
        .map(|k| (k.to_string(), example311_structure(k).expect("nonzero").to_string()))
        .collect();
    let window: Vec<i64> = (1..=50).flat_map(|k| [-k, k]).collect();
    let h = coalg.container().clone();
    let algebras = [
        ("count", example311_recursion(&Algebra::count(h.clone()), &window).is_ok()),
        ("height", example311_recursion(&Algebra::height(h.clone()), &window).is_ok()),
        ("induction", example311_recursion(&Algebra::induction(h), &window).is_ok()),
    ];
    for (k, s) in &samples {
        writeln!(out.text, "c({k}) = {s}").unwrap();
    }
    for (name, ok) in &algebras {
        writeln!(
            out.text,
            "constant solution into the {name} algebra: {} on |k| ≤ 50",
            if *ok { "verified" } else { "FAILED" }
        )
        .unwrap();
    }
    out.json["structures"] = json!(samples);
    out.json["recursion"] = json!(algebras.iter().map(|(n, ok)| (n.to_string(), *ok)).collect::<BTreeMap<_, _>>());
    Ok(out)
}

fn run_gallery_entry(e: &gallery::Entry, cfg: &RunConfig) -> Result<Outcome> {
    let input = e.input();
    match &e.action {
        Action::CheckWf => check_wf(&input, cfg, false),
        Action::WfPart => check_wf(&input, cfg, true),
        Action::Example311 { state } => example311_outcome(*state, cfg),
        Action::FoldTerms(sig) => fold(&input, AlgebraName::Term, Some(&sig())),
        Action::CheckInitial { depth } => match &input {
            Input::Signature(sig) => check_initial(sig, *depth),
            _ => unreachable!("gallery signature"),
        },
    }
}

fn gallery(name: Option<&str>, cfg: &RunConfig) -> Result<Outcome> {
    let Some(name) = name else {
        let mut text = String::new();
        let mut entries = Vec::new();
        for e in gallery::ENTRIES {
            let out = run_gallery_entry(e, cfg).unwrap_or_else(|f| failure_outcome(&f));
            writeln!(text, "== {} (exit {}): {}", e.name, out.exit as i32, e.description).unwrap();
            text.push_str(&out.text);
            entries.push(json!({"name": e.name, "exitCode": out.exit as i32, "report": out.json}));
        }
        return Ok(Outcome::new(Exit::Success, text, Value::Array(entries)));
    };
    let e = gallery::entry(name).ok_or_else(|| {
        let names: Vec<&str> = gallery::ENTRIES.iter().map(|e| e.name).collect();
        usage(format!("no gallery entry `{name}`; available: {}", names.join(", ")))
    })?;
    run_gallery_entry(e, cfg)
}

fn execute(cfg: &RunConfig) -> Vec<(Option<String>, Outcome)> {
    let single = |r: Result<Outcome>| vec![(None, r.unwrap_or_else(|f| failure_outcome(&f)))];
    match &cfg.command {
        Command::CheckWf { inputs } => {
            let results: Vec<Outcome> = std::thread::scope(|scope| {
                let handles: Vec<_> = inputs
                    .iter()
                    .map(|path| {
                        scope.spawn(move || {
                            input::load(path)
                                .map_err(Failure::from)
                                .and_then(|i| check_wf(&i, cfg, false))
                                .unwrap_or_else(|f| failure_outcome(&f))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("analysis thread")).collect()
            });
            if inputs.len() == 1 {
                results.into_iter().map(|o| (None, o)).collect()
            } else {
                inputs.iter().cloned().map(Some).zip(results).collect()
            }
        }
        Command::WfPart { input } => single(input::load(input).map_err(Failure::from).and_then(|i| check_wf(&i, cfg, true))),
        Command::Koenig { input, state } => {
            single(input::load(input).map_err(Failure::from).and_then(|i| koenig(&i, state, cfg)))
        }
        Command::Fold { input, algebra, sig } => single((|| {
            let i = input::load(input)?;
            let sig = sig.as_deref().map(input::load_signature).transpose()?;
            let out = fold(&i, *algebra, sig.as_ref())?;
            Ok(match input_dot(&i) {
                Ok(d) => out.with_dot(d),
                Err(_) => out,
            })
        })()),
        Command::Realize { sig, structure } => single(input::load_signature(sig).map_err(Failure::from).and_then(|s| realize(&s, structure))),
        Command::CheckInitial { sig } => single(
            input::load_signature(sig)
                .map_err(Failure::from)
                .and_then(|s| check_initial(&s, cfg.depth as usize)),
        ),
        Command::Gallery { name } => single(gallery(name.as_deref(), cfg)),
        Command::ExportDot { input } => single((|| {
            let i = input::load(input)?;
            let d = input_dot(&i)?;
            let graph = match &i {
                Input::Set(c) => json!({"kind": "set-coalgebra", "states": c.states()}),
                _ => json!({"kind": i.kind()}),
            };
            Ok(Outcome::new(Exit::Success, d.clone(), graph).with_dot(d))
        })()),
    }
}

fn render(cfg: &RunConfig, results: &[(Option<String>, Outcome)], out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<()> {
    let export = matches!(cfg.command, Command::ExportDot { .. });
    match (cfg.format, export) {
        (Format::Dot, _) | (Format::Text, true) => {
            for (name, o) in results {
                match &o.dot {
                    Some(d) if o.exit != Exit::InputError => {
                        if let Some(n) = name {
                            writeln!(out, "// {n}")?;
                        }
                        out.write_all(d.as_bytes())?;
                    }
                    Some(_) | None if o.exit == Exit::InputError => writeln!(err, "{}", o.text)?,
                    _ => writeln!(err, "error: no graph to draw for this command")?,
                }
            }
        }
        (Format::Text, false) => {
            for (name, o) in results {
                if let Some(n) = name {
                    writeln!(out, "== {n} (exit {})", o.exit as i32)?;
                }
                if o.exit == Exit::InputError {
                    writeln!(err, "{}", o.text)?;
                } else {
                    out.write_all(o.text.as_bytes())?;
                }
            }
        }
        (Format::Json, _) => {
            let doc = if results.len() == 1 && results[0].0.is_none() {
                let o = &results[0].1;
                json!({"exitCode": o.exit as i32, "report": o.json})
            } else {
                Value::Array(
                    results
                        .iter()
                        .map(|(n, o)| json!({"input": n, "exitCode": o.exit as i32, "report": o.json}))
                        .collect(),
                )
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
            for (_, o) in results {
                if o.exit == Exit::InputError {
                    writeln!(err, "{}", o.text)?;
                }
            }
        }
    }
    Ok(())
}

/// Runs one invocation, writing the report to `out` and diagnostics to
/// `err`. Returns the exit code; with several inputs, the largest one.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let results = execute(cfg);
    let mut code = results.iter().map(|(_, o)| o.exit).max().unwrap_or(Exit::Success);
    if cfg.format == Format::Dot && results.iter().any(|(_, o)| o.dot.is_none() && o.exit != Exit::InputError) {
        code = Exit::InputError;
    }
    if render(cfg, &results, out, err).is_err() {
        return Exit::InputError as i32;
    }
    code as i32
}

/// Parses `args` (including the program name) and runs.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg, out, err),
        Err(e) => {
            let code = if e.use_stderr() { Exit::InputError as i32 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            code
        }
    }
}
