//! Numerics for spherical localisation.
//!
//! - [`needle`]: needle densities `C sin(t + φ)^m` on arcs and the meridian
//!   Fubini check.
//! - [`convex2d`]: symmetric planar bodies, polar duals and cones.
//! - [`conemeasure`]: weighted measures of bodies inside a cone.
//! - [`gcc`]: Gaussian correlation checks in the plane and on cones, the strip
//!   counterexample hunt and the phase search.
//! - [`mahler`]: the α min-max estimator and the volume-product bound.
//! - [`waist`]: waist bounds for uniformly convex spaces and round tubes.
//! - [`cli`]: the `sphloc` command line.
//!
//! ```
//! use sphloc::waist::{waist_bound, Modulus, WaistParams};
//! let w = waist_bound(&WaistParams::new(6, 2, Modulus::L2).unwrap(), 0.8).unwrap();
//! assert!(w > 0.0 && w < 1.0);
//! ```

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conemeasure;
pub mod convex2d;
pub mod error;
pub mod gcc;
pub mod mahler;
pub mod needle;
pub mod numerics;
pub mod report;
pub mod waist;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/needles.md")]
    mod needles {}
    #[doc = include_str!("../../../book/src/bodies.md")]
    mod bodies {}
    #[doc = include_str!("../../../book/src/cone-measures.md")]
    mod cone_measures {}
    #[doc = include_str!("../../../book/src/correlation.md")]
    mod correlation {}
    #[doc = include_str!("../../../book/src/mahler.md")]
    mod mahler {}
    #[doc = include_str!("../../../book/src/waist.md")]
    mod waist {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
