//! Compatible DG/FEM discretizations on triangles.

pub mod config;
pub mod driver;
pub mod error;
pub mod io;
pub mod mesh;
pub mod operators;
pub mod refelem;
pub mod scenarios;
pub mod solvers;
pub mod spaces;

pub use error::{Error, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/time_stepping.md")]
    mod time_stepping {}
    #[doc = include_str!("../../../book/src/running.md")]
    mod running {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
}
