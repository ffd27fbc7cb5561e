//! Splitting boundary polynomials into a `z̄`-free part plus a `w̄`-free part.

mod band;
mod decomposition;
mod exact;
mod perturbed;

pub use band::{certify_inverse_bound, BandMatrixA, InverseBoundReport, LinearSpace, TridiagonalLu};
pub use exact::{
    build_a, AdmissibilityReport, EllipsoidSpec, SplitTriple, Splitter, DEFAULT_DEGREE_CAP,
};
pub use decomposition::{
    decompose_batch, decompose_on_ellipsoid, decompose_perturbed, decompose_with, residual_sup,
    residual_sups, DecompositionResult, RoundReport,
};
pub use perturbed::{
    build_b, certify_perturbation, run_cascade, Cascade, CascadeRound, CertificateCheck,
    PerturbationCertificate, PerturbationSpec, PolyMatrix,
};
