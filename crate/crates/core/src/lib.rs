//! Well-founded coalgebras for finitary set functors, with nominal and
//! convex back-ends.
//!
//! Functors are described by a small grammar of containers
//! ([`container`]). On top of that sit finite and lazily presented
//! coalgebras ([`coalgebra`]), the well-founded part, König extraction and
//! recursion ([`wellfounded`]), and the initial algebra of a signature
//! ([`initial_algebra`]). [`nominal`] and [`convex`] decide
//! well-foundedness for register-style nominal transition systems and for
//! finitely generated convex transition systems.

pub mod coalgebra;
pub mod container;
pub mod convex;
pub mod initial_algebra;
pub mod nominal;
pub mod random;
pub mod wellfounded;

pub use coalgebra::{
    least_subcoalgebra, verify_coalgebra_morphism, Algebra, Closure, Coalgebra, CoalgebraError,
    FiniteCoalgebra, LazyCoalgebra, Subset,
};
pub use container::{Container, ContainerError, HStructure, StateId, Structure};
pub use initial_algebra::{Signature, Term};
pub use wellfounded::{
    is_well_founded, koenig_extract, koenig_family, solve_recursion, well_founded_part,
    KoenigOutcome, RecursionError, WfError, WfReport,
};
