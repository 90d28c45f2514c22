//! Finitely generated convex transition systems over exact rationals.
//!
//! The carrier is the free convex set on `n` generators: a point is a
//! probability vector over the generators. A system assigns each generator
//! a finitely generated successor polytope and extends affinely, so the
//! successors of `Σ λᵢ gᵢ` are the points `Σ λᵢ vᵢ` with each `vᵢ` drawn
//! from the polytope of `gᵢ`. Membership claims are backed by explicit
//! combination certificates, never by floating point.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvexError {
    #[error("expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("negative coefficient {0}")]
    Negative(Rational),
    #[error("coefficients sum to {0}, not 1")]
    NotNormalized(Rational),
    #[error("mixing weight {0} is outside [0, 1]")]
    WeightOutOfRange(Rational),
    #[error("generator {0} out of range")]
    NoGenerator(usize),
    #[error("schema: {0}")]
    Schema(String),
}

/// Parses `"p/q"` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational, ConvexError> {
    Rational::from_str(s.trim()).map_err(|_| ConvexError::Schema(format!("bad rational `{s}`")))
}

pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// A convex combination of generators.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CPoint {
    coeffs: Vec<Rational>,
}

impl CPoint {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self, ConvexError> {
        if let Some(c) = coeffs.iter().find(|c| c.is_negative()) {
            return Err(ConvexError::Negative(c.clone()));
        }
        let sum: Rational = coeffs.iter().sum();
        if !sum.is_one() {
            return Err(ConvexError::NotNormalized(sum));
        }
        Ok(CPoint { coeffs })
    }

    /// The `i`-th generator `eᵢ` of an `n`-generator basis.
    pub fn generator(n: usize, i: usize) -> Self {
        assert!(i < n, "generator {i} of {n}");
        let mut coeffs = vec![Rational::zero(); n];
        coeffs[i] = Rational::one();
        CPoint { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Generators with positive coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coeffs[i].is_positive()).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(|c| json!(c.to_string())).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self, ConvexError> {
        let items = v
            .as_array()
            .ok_or_else(|| ConvexError::Schema("a point is a list of rationals".into()))?;
        let coeffs = items
            .iter()
            .map(|x| match x {
                Value::String(s) => parse_rational(s),
                Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap().into())),
                _ => Err(ConvexError::Schema(format!("bad rational {x}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        CPoint::new(coeffs)
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn combine<'a>(terms: impl IntoIterator<Item = (&'a Rational, &'a CPoint)>, n: usize) -> CPoint {
    let mut coeffs = vec![Rational::zero(); n];
    for (w, p) in terms {
        for (c, x) in coeffs.iter_mut().zip(&p.coeffs) {
            *c += w * x;
        }
    }
    CPoint { coeffs }
}

/// A polytope given by a sorted, duplicate-free list of generating points.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CPolytope {
    vertices: Vec<CPoint>,
}

impl CPolytope {
    pub fn new(vertices: impl IntoIterator<Item = CPoint>) -> Self {
        let mut vertices: Vec<CPoint> = vertices.into_iter().collect();
        vertices.sort();
        vertices.dedup();
        CPolytope { vertices }
    }

    pub fn empty() -> Self {
        CPolytope::default()
    }

    pub fn vertices(&self) -> &[CPoint] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, p: &CPoint) -> Option<usize> {
        self.vertices.binary_search(p).ok()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.vertices.iter().map(CPoint::to_json).collect())
    }
}

fn check_weight(r: &Rational) -> Result<(), ConvexError> {
    if r.is_negative() || *r > Rational::one() {
        return Err(ConvexError::WeightOutOfRange(r.clone()));
    }
    Ok(())
}

/// `x +_r y = r·x + (1 − r)·y`.
pub fn mix(x: &CPoint, y: &CPoint, r: &Rational) -> Result<CPoint, ConvexError> {
    check_weight(r)?;
    if x.dim() != y.dim() {
        return Err(ConvexError::Dimension {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let s = Rational::one() - r;
    Ok(CPoint {
        coeffs: x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(a, b)| r * a + &s * b)
            .collect(),
    })
}

/// `S +_r T`: pairwise mixes for `r ∈ (0, 1)`; `T` for `r = 0` and `S` for
/// `r = 1`, so that `∅ +_0 S = S = S +_1 ∅`.
pub fn mix_sets(s: &CPolytope, t: &CPolytope, r: &Rational) -> Result<CPolytope, ConvexError> {
    check_weight(r)?;
    if r.is_zero() {
        return Ok(t.clone());
    }
    if r.is_one() {
        return Ok(s.clone());
    }
    let mut out = Vec::with_capacity(s.len() * t.len());
    for x in &s.vertices {
        for y in &t.vertices {
            out.push(mix(x, y, r)?);
        }
    }
    Ok(CPolytope::new(out))
}

/// An `n`-generator system with one successor polytope per generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexSpec {
    n: usize,
    successors: Vec<CPolytope>,
}

impl ConvexSpec {
    pub fn new(n: usize, successors: Vec<CPolytope>) -> Result<Self, ConvexError> {
        if successors.len() != n {
            return Err(ConvexError::Dimension {
                expected: n,
                got: successors.len(),
            });
        }
        for p in successors.iter().flat_map(|p| &p.vertices) {
            if p.dim() != n {
                return Err(ConvexError::Dimension {
                    expected: n,
                    got: p.dim(),
                });
            }
        }
        Ok(ConvexSpec { n, successors })
    }

    pub fn generators(&self) -> usize {
        self.n
    }

    pub fn polytope(&self, g: usize) -> &CPolytope {
        &self.successors[g]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "convex",
            "version": 1,
            "generators": self.n,
            "successors": self.successors.iter().map(CPolytope::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ConvexError> {
        let schema = |m: &str| ConvexError::Schema(m.into());
        if let Some(ver) = v.get("version") {
            if ver != 1 {
                return Err(schema("unsupported version"));
            }
        }
        let n = v
            .get("generators")
            .and_then(Value::as_u64)
            .ok_or_else(|| schema("`generators` must be a natural number"))? as usize;
        let succ = v
            .get("successors")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("`successors` must be a list of polytopes"))?;
        let polys = succ
            .iter()
            .map(|p| {
                let vs = p.as_array().ok_or_else(|| schema("a polytope is a list of points"))?;
                Ok(CPolytope::new(vs.iter().map(CPoint::from_json).collect::<Result<Vec<_>, _>>()?))
            })
            .collect::<Result<Vec<_>, ConvexError>>()?;
        ConvexSpec::new(n, polys)
    }

    fn check_point(&self, p: &CPoint) -> Result<(), ConvexError> {
        if p.dim() != self.n {
            return Err(ConvexError::Dimension {
                expected: self.n,
                got: p.dim(),
            });
        }
        Ok(())
    }
}

/// Vertex choices, one per support generator, for every successor vertex.
fn choice_vectors(spec: &ConvexSpec, p: &CPoint) -> Vec<Vec<(usize, usize)>> {
    let mut acc: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for g in p.support() {
        let k = spec.successors[g].len();
        acc = acc
            .into_iter()
            .flat_map(|c| {
                (0..k).map(move |j| {
                    let mut c = c.clone();
                    c.push((g, j));
                    c
                })
            })
            .collect();
    }
    acc
}

fn choice_point(spec: &ConvexSpec, p: &CPoint, choice: &[(usize, usize)]) -> CPoint {
    combine(
        choice
            .iter()
            .map(|&(g, j)| (&p.coeffs[g], &spec.successors[g].vertices[j])),
        spec.n,
    )
}

/// `c(p) = Σ λᵢ c(gᵢ)` over the positive support of `p`.
pub fn successors(spec: &ConvexSpec, p: &CPoint) -> Result<CPolytope, ConvexError> {
    spec.check_point(p)?;
    let mut points = vec![CPoint {
        coeffs: vec![Rational::zero(); spec.n],
    }];
    for g in p.support() {
        let lam = &p.coeffs[g];
        let mut next = Vec::with_capacity(points.len() * spec.successors[g].len());
        for acc in &points {
            for v in &spec.successors[g].vertices {
                let mut q = acc.clone();
                for (c, x) in q.coeffs.iter_mut().zip(&v.coeffs) {
                    *c += lam * x;
                }
                next.push(q);
            }
        }
        next.sort();
        next.dedup();
        points = next;
    }
    Ok(CPolytope::new(points))
}

/// Weights on the vertices of a polytope exhibiting a point as their
/// convex combination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub weights: Vec<(usize, Rational)>,
}

impl Certificate {
    /// Exact check that the weights are a convex combination of vertices
    /// of `poly` equal to `point`.
    pub fn verify(&self, poly: &CPolytope, point: &CPoint) -> bool {
        let total: Rational = self.weights.iter().map(|(_, w)| w).sum();
        if !total.is_one() || self.weights.iter().any(|(_, w)| w.is_negative()) {
            return false;
        }
        if self.weights.iter().any(|(j, _)| *j >= poly.len()) {
            return false;
        }
        let q = combine(
            self.weights.iter().map(|(j, w)| (w, &poly.vertices[*j])),
            point.dim(),
        );
        q == *point
    }

    fn vertex(j: usize) -> Self {
        Certificate {
            weights: vec![(j, Rational::one())],
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.weights
                .iter()
                .map(|(j, w)| json!({"vertex": j, "weight": w.to_string()}))
                .collect(),
        )
    }
}

/// Mutual inclusion certificates between `c(x +_r y)` and
/// `c(x) +_r c(y)`: each vertex of one lies in the hull of the other.
#[derive(Clone, Debug)]
pub struct AffinityCertificate {
    pub mixed: CPolytope,
    pub mixed_sets: CPolytope,
    /// For each vertex of `mixed`, a combination of `mixed_sets` vertices.
    pub forward: Vec<Certificate>,
    /// For each vertex of `mixed_sets`, a combination of `mixed` vertices.
    pub backward: Vec<Certificate>,
}

impl AffinityCertificate {
    pub fn verify(&self) -> bool {
        self.forward.len() == self.mixed.len()
            && self.backward.len() == self.mixed_sets.len()
            && self
                .forward
                .iter()
                .zip(&self.mixed.vertices)
                .all(|(c, v)| c.verify(&self.mixed_sets, v))
            && self
                .backward
                .iter()
                .zip(&self.mixed_sets.vertices)
                .all(|(c, v)| c.verify(&self.mixed, v))
    }
}

/// Builds the certificates for affinity of `successors` at `(x, y, r)`.
///
/// A vertex of `c(x +_r y)` picks one successor per generator and is the
/// mix of the matching vertices of `c(x)` and `c(y)`. Conversely a vertex
/// `x₁ +_r y₁` of `c(x) +_r c(y)` may pick different successors `u, u'`
/// for a generator `g` in both supports; its `g`-part
/// `r·xg·u + (1−r)·yg·u'` splits as `m·(α·u + (1−α)·u')` with
/// `m = r·xg + (1−r)·yg` and `α = r·xg / m`, so it is the product-weighted
/// combination of the vertices of `c(x +_r y)` choosing `u` or `u'` per
/// generator.
pub fn affinity_certificate(
    spec: &ConvexSpec,
    x: &CPoint,
    y: &CPoint,
    r: &Rational,
) -> Result<AffinityCertificate, ConvexError> {
    let z = mix(x, y, r)?;
    let mixed = successors(spec, &z)?;
    let mixed_sets = mix_sets(&successors(spec, x)?, &successors(spec, y)?, r)?;
    let lookup = |poly: &CPolytope, p: &CPoint| poly.index_of(p).map(Certificate::vertex);

    let mut forward = Vec::with_capacity(mixed.len());
    for v in &mixed.vertices {
        forward.push(lookup(&mixed_sets, v).ok_or_else(|| {
            ConvexError::Schema(format!("successor {v} of the mix is not a mix of successors"))
        })?);
    }

    let mut backward: Vec<Option<Certificate>> = vec![None; mixed_sets.len()];
    if r.is_zero() || r.is_one() {
        for (k, v) in mixed_sets.vertices.iter().enumerate() {
            backward[k] = lookup(&mixed, v);
        }
    } else {
        let one = Rational::one();
        let s = &one - r;
        for cx in choice_vectors(spec, x) {
            for cy in choice_vectors(spec, y) {
                let v = mix(&choice_point(spec, x, &cx), &choice_point(spec, y, &cy), r)?;
                let Some(k) = mixed_sets.index_of(&v) else { continue };
                if backward[k].is_some() {
                    continue;
                }
                let ax: BTreeMap<usize, usize> = cx.iter().copied().collect();
                let ay: BTreeMap<usize, usize> = cy.iter().copied().collect();
                // per generator, the alternatives and their weights
                let mut options: Vec<Vec<(usize, usize, Rational)>> = Vec::new();
                for g in z.support() {
                    let opts = match (ax.get(&g), ay.get(&g)) {
                        (Some(&u), Some(&w)) if u != w => {
                            let m = r * &x.coeffs[g] + &s * &y.coeffs[g];
                            let alpha = r * &x.coeffs[g] / &m;
                            vec![(g, u, alpha.clone()), (g, w, &one - alpha)]
                        }
                        (Some(&u), _) | (None, Some(&u)) => vec![(g, u, one.clone())],
                        (None, None) => unreachable!("support of a mix"),
                    };
                    options.push(opts);
                }
                let mut weights: BTreeMap<usize, Rational> = BTreeMap::new();
                let mut partial: Vec<(Vec<(usize, usize)>, Rational)> = vec![(Vec::new(), one.clone())];
                for opts in &options {
                    partial = partial
                        .into_iter()
                        .flat_map(|(c, w)| {
                            opts.iter().map(move |(g, j, a)| {
                                let mut c = c.clone();
                                c.push((*g, *j));
                                (c, &w * a)
                            })
                        })
                        .collect();
                }
                for (choice, w) in partial {
                    let point = choice_point(spec, &z, &choice);
                    let j = mixed.index_of(&point).expect("choice point is a successor vertex");
                    *weights.entry(j).or_insert_with(Rational::zero) += w;
                }
                backward[k] = Some(Certificate {
                    weights: weights.into_iter().collect(),
                });
            }
        }
    }
    let backward = backward
        .into_iter()
        .map(|c| c.ok_or_else(|| ConvexError::Schema("mix of successors without certificate".into())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AffinityCertificate {
        mixed,
        mixed_sets,
        forward,
        backward,
    })
}

/// Verdict of [`convex_wf_fixpoint`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexWf {
    /// Rank of each generator; `None` for generators with an infinite path.
    pub rank: Vec<Option<usize>>,
}

impl ConvexWf {
    pub fn is_wf(&self, g: usize) -> bool {
        self.rank[g].is_some()
    }

    pub fn wf_generators(&self) -> Vec<bool> {
        self.rank.iter().map(Option::is_some).collect()
    }

    /// The system is well-founded iff every generator is; the whole
    /// finitely generated carrier is then the witnessing subcoalgebra.
    pub fn all_well_founded(&self) -> bool {
        self.rank.iter().all(Option::is_some)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "wellFounded": self.all_well_founded(),
            "wfGenerators": self.wf_generators(),
            "ranks": self.rank,
        })
    }
}

/// Least fixpoint of `WF(g) ⟸ every vertex of P_g has some support
/// generator already in WF`, iterated in rounds from the empty set; a
/// generator's rank is the round it enters.
///
/// A point has an infinite path iff all of its support generators do
/// (paths project to components and combine from them), and a generator
/// does iff some vertex of its polytope does.
pub fn convex_wf_fixpoint(spec: &ConvexSpec) -> ConvexWf {
    let supports: Vec<Vec<Vec<usize>>> = spec
        .successors
        .iter()
        .map(|p| p.vertices.iter().map(CPoint::support).collect())
        .collect();
    let mut rank: Vec<Option<usize>> = vec![None; spec.n];
    for round in 1..=spec.n {
        let entering: Vec<usize> = (0..spec.n)
            .filter(|&g| rank[g].is_none())
            .filter(|&g| {
                supports[g]
                    .iter()
                    .all(|supp| supp.iter().any(|&k| rank[k].is_some()))
            })
            .collect();
        if entering.is_empty() {
            break;
        }
        for g in entering {
            rank[g] = Some(round);
        }
    }
    ConvexWf { rank }
}

/// The vertex chosen for each support generator, with its weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepCertificate {
    pub choices: Vec<(usize, usize, Rational)>,
}

impl StepCertificate {
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.choices
                .iter()
                .map(|(g, j, w)| json!({"generator": g, "vertex": j, "weight": w.to_string()}))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPath {
    pub points: Vec<CPoint>,
    pub certificates: Vec<StepCertificate>,
}

impl ConvexPath {
    /// Checks each step: the certificate picks one vertex of each support
    /// generator's polytope with that generator's weight, the weighted sum
    /// is the next point, and the next point is among the successors.
    pub fn verify(&self, spec: &ConvexSpec) -> bool {
        if self.points.len() != self.certificates.len() + 1 {
            return false;
        }
        self.points.windows(2).zip(&self.certificates).all(|(w, cert)| {
            let (p, q) = (&w[0], &w[1]);
            let gens: Vec<usize> = cert.choices.iter().map(|c| c.0).collect();
            if gens != p.support() {
                return false;
            }
            let ok = cert.choices.iter().all(|(g, j, wt)| {
                *j < spec.successors[*g].len() && *wt == p.coeffs[*g]
            });
            ok && combine(
                cert.choices
                    .iter()
                    .map(|(g, j, wt)| (wt, &spec.successors[*g].vertices[*j])),
                spec.n,
            ) == *q
                && successors(spec, p).is_ok_and(|s| s.index_of(q).is_some())
        })
    }

    pub fn len(&self) -> usize {
        self.certificates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.certificates.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let mut steps = vec![json!({"point": self.points[0].to_json()})];
        for (p, c) in self.points[1..].iter().zip(&self.certificates) {
            steps.push(json!({"point": p.to_json(), "certificate": c.to_json()}));
        }
        Value::Array(steps)
    }
}

/// A verified path `e_g = p₀ → p₁ → … → p_length` staying among points
/// whose support generators all have infinite paths; `None` when `g` is
/// well-founded.
pub fn convex_path_witness(
    spec: &ConvexSpec,
    g: usize,
    length: usize,
) -> Result<Option<ConvexPath>, ConvexError> {
    if g >= spec.n {
        return Err(ConvexError::NoGenerator(g));
    }
    let wf = convex_wf_fixpoint(spec);
    if wf.is_wf(g) {
        return Ok(None);
    }
    let pick: Vec<Option<usize>> = (0..spec.n)
        .map(|k| {
            spec.successors[k]
                .vertices
                .iter()
                .position(|v| v.support().iter().all(|&i| !wf.is_wf(i)))
        })
        .collect();
    let mut points = vec![CPoint::generator(spec.n, g)];
    let mut certificates = Vec::with_capacity(length);
    for _ in 0..length {
        let p = points.last().expect("non-empty");
        let choices: Vec<(usize, usize, Rational)> = p
            .support()
            .into_iter()
            .map(|k| (k, pick[k].expect("generator with an infinite path"), p.coeffs[k].clone()))
            .collect();
        let q = combine(
            choices
                .iter()
                .map(|(k, j, w)| (w, &spec.successors[*k].vertices[*j])),
            spec.n,
        );
        certificates.push(StepCertificate { choices });
        points.push(q);
    }
    let path = ConvexPath {
        points,
        certificates,
    };
    assert!(path.verify(spec), "constructed witness failed verification");
    Ok(Some(path))
}

/// Result of [`convex_koenig_extract`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConvexExtraction {
    /// Points whose convex hull is a well-founded subcoalgebra containing
    /// the generator: closed under taking vertices of successor polytopes.
    Extracted(Vec<CPoint>),
    BudgetExhausted { visited: usize },
    NotWellFounded,
}

/// The finitely generated subcoalgebra spanned by every vertex reachable
/// from generator `g`. Successors are affine, so the hull of a set closed
/// under successor vertices is closed under successors.
pub fn convex_koenig_extract(
    spec: &ConvexSpec,
    g: usize,
    budget: usize,
) -> Result<ConvexExtraction, ConvexError> {
    if g >= spec.n {
        return Err(ConvexError::NoGenerator(g));
    }
    if !convex_wf_fixpoint(spec).is_wf(g) {
        return Ok(ConvexExtraction::NotWellFounded);
    }
    let start = CPoint::generator(spec.n, g);
    let mut seen: BTreeSet<CPoint> = BTreeSet::from([start.clone()]);
    let mut queue = vec![start];
    while let Some(p) = queue.pop() {
        for v in successors(spec, &p)?.vertices {
            if seen.insert(v.clone()) {
                if seen.len() > budget {
                    return Ok(ConvexExtraction::BudgetExhausted { visited: budget });
                }
                queue.push(v);
            }
        }
    }
    Ok(ConvexExtraction::Extracted(seen.into_iter().collect()))
}

/// A random point of `poly`: random positive weights on its vertices.
pub fn random_point_in<R: Rng + ?Sized>(poly: &CPolytope, rng: &mut R) -> Option<CPoint> {
    if poly.is_empty() {
        return None;
    }
    let raw: Vec<u32> = (0..poly.len()).map(|_| rng.gen_range(0..4)).collect();
    let total: u32 = raw.iter().sum();
    let weights: Vec<Rational> = if total == 0 {
        let mut w = vec![Rational::zero(); poly.len()];
        w[rng.gen_range(0..poly.len())] = Rational::one();
        w
    } else {
        raw.iter().map(|&a| rational(a.into(), total.into())).collect()
    };
    let n = poly.vertices[0].dim();
    Some(combine(weights.iter().zip(&poly.vertices), n))
}

/// A random path from `start` of at most `max_steps` steps, each step a
/// random point of the successor polytope.
pub fn random_path<R: Rng + ?Sized>(
    spec: &ConvexSpec,
    start: &CPoint,
    max_steps: usize,
    rng: &mut R,
) -> Result<Vec<CPoint>, ConvexError> {
    let mut path = vec![start.clone()];
    while path.len() <= max_steps {
        let succ = successors(spec, path.last().expect("non-empty"))?;
        match random_point_in(&succ, rng) {
            Some(q) => path.push(q),
            None => break,
        }
    }
    Ok(path)
}
