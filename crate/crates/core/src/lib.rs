//! Exact finite models of signatures, polynomial and analytic functors,
//! their tensors, monoids (multicategories), free constructions and opetopes.

pub mod compare;
pub mod diagrams;
pub mod error;
pub mod evaluation;
pub mod finset;
pub mod json;
pub mod monad;
pub mod monoids;
pub mod opetopes;
pub mod perm;
pub mod random;
pub mod recover;
pub mod signatures;
pub mod symset;
pub mod tgraph;

pub use error::{Error, Result};
pub use finset::{FinMap, FinSet, SliceMap, SliceObj, Square};
pub use perm::Perm;
