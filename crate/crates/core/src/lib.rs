//! Constructive tools for the CR Hartogs problem on ellipsoid-type domains in C².
//!
//! The crate is organised bottom-up:
//!
//! * [`polyalg`]: polynomials in `z, z̄, w, w̄` graded by antiholomorphic degree;
//! * [`splitter`]: exact splitting of boundary polynomials on admissible ellipsoids
//!   and the truncated substitution cascade on perturbed domains;
//! * [`geometry`]: boundary parametrisations, slice curves and surface quadrature;
//! * [`slicehardy`]: per-slice Hardy tests, slice-wise extension and weak CR pairings;
//! * [`szego`]: discretised L² projections, alternating projections, principal angles;
//! * [`bmop`]: Bochner–Martinelli evaluation by the kernel and by averaged Cauchy integrals;
//! * [`runner`]: configuration-driven commands emitting JSON/CSV reports.
//!
//! The algebraic layers are generic over the scalar type (`f32`/`f64`); the quadrature
//! layers work in `f64`.

pub mod bmop;
pub mod error;
pub mod geometry;
pub mod polyalg;
pub mod runner;
pub mod scalar;
pub mod slicehardy;
pub mod splitter;
pub mod szego;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

/// Double-precision complex scalar used by the quadrature layers.
pub type C64 = num_complex::Complex<f64>;

pub type Poly = polyalg::BigradedPoly<f64>;
pub type Poly32 = polyalg::BigradedPoly<f32>;
pub type Ellipsoid = splitter::EllipsoidSpec<f64>;
pub type Ellipsoid32 = splitter::EllipsoidSpec<f32>;
pub type BandMatrix = splitter::BandMatrixA<f64>;
pub type Splitter64 = splitter::Splitter<f64>;
