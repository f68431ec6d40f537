//! Worst-case optimal joins, AGM bounds, and sampling-based join size
//! estimation and uniform join sampling.

pub mod component;
pub mod conjunctive;
pub mod error;
pub mod estimators;
pub mod exact_weight;
pub mod ghd;
pub mod query;
pub mod store;
pub mod wcoj;

pub use error::{Error, Result};
pub use query::{Atom, Binding, Query, Var, VarSet};
pub use store::{Database, Relation, Value};

/// The guide in `book/` and the README, compiled so that its snippets run as doc tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/relations.md")]
    mod relations {}
    #[doc = include_str!("../../../book/src/joins.md")]
    mod joins {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/driver.md")]
    mod driver {}
    #[doc = include_str!("../../../book/src/ghd.md")]
    mod ghd {}
    #[doc = include_str!("../../../book/src/components.md")]
    mod components {}
    #[doc = include_str!("../../../book/src/exact_weight.md")]
    mod exact_weight {}
    #[doc = include_str!("../../../book/src/projections.md")]
    mod projections {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
