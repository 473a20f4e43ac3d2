//! Numerical verification of Hardy-type inequalities on the unit sphere
//! `S^n` with weights singular at a point and its antipode.
//!
//! The guide in `book/` explains the pieces; its code listings run as
//! doc-tests of this crate.
//!
//! ```
//! use sphere_hardy::functionals::Inequality;
//! use sphere_hardy::sharpness::{sweep, Resolution};
//!
//! let ineq = Inequality::subcritical(3, 2.0)?;
//! let r = sweep(&ineq, &[0.3, 0.03], Resolution::AUTO)?;
//! assert!(r.quotients.iter().all(|&q| q > ineq.constant()));
//! # Ok::<(), sphere_hardy::Error>(())
//! ```

pub mod checks;
pub mod error;
pub mod functionals;
pub mod functions;
pub mod geometry;
pub mod quadrature;
pub mod sharpness;

pub use error::{Error, Result};

/// Each chapter of the guide as a module, so `cargo test --doc` runs its listings.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    pub mod geometry {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    pub mod quadrature {}
    #[doc = include_str!("../../../book/src/test-functions.md")]
    pub mod test_functions {}
    #[doc = include_str!("../../../book/src/inequalities.md")]
    pub mod inequalities {}
    #[doc = include_str!("../../../book/src/sharpness.md")]
    pub mod sharpness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
