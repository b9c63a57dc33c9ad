//! Deformation theory bookkeeping for special Lagrangian conifolds.
//!
//! Given link spectra, convergence rates, symmetry data and Betti numbers,
//! the crate computes exceptional weights of the cone Laplacian, Fredholm
//! kernel and cokernel dimensions of the weighted Laplacian, stability of
//! the singular cones, and the dimension of the moduli space together with
//! an additive breakdown of every term.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`; the `*32` aliases fix it to `f32`.

pub mod error;
pub mod linalg;
pub mod mesh;
pub mod moduli;
mod scalar;
pub mod spectral_catalog;
pub mod topology;
pub mod weights;

pub use error::{Error, MeshError, Result};
pub use moduli::{
    cross_check, expected_stable_multiplicities, lagrangian_slice_dim, moduli_dim_ac, moduli_dim_compact,
    moduli_dim_cs, moduli_dim_csac, obstruction_dim_stable, slice_dim, stability_check, Deviation, Identity,
    ObstructionDim, RateRegime, Term, TermKind,
};
pub use scalar::{approx_eq, Scalar};
pub use spectral_catalog::{resolve_link, sphere_spectrum, torus_spectrum, SpectrumSource};
pub use topology::{decomposition_block_dims, tilde_h0bullet_dim, tilde_hc1_dim, BlockCase, ConifoldTopology};
pub use weights::{
    exceptional_set, fredholm_data, index_jump, is_exceptional, roots_for_eigenvalue, total_multiplicity,
    ConifoldCase, EndKind, FredholmData, Window,
};

pub type Spectrum = spectral_catalog::Spectrum<f64>;
pub type Eigenspace = spectral_catalog::Eigenspace<f64>;
pub type LinkDescriptor = spectral_catalog::LinkDescriptor<f64>;
pub type LinkKind = spectral_catalog::LinkKind<f64>;
pub type TriangleMesh = mesh::TriangleMesh<f64>;
pub type EigResult = mesh::EigResult<f64>;
pub type ConeEnd = weights::ConeEnd<f64>;
pub type ExceptionalWeightSet = weights::ExceptionalWeightSet<f64>;
pub type ConeData = moduli::ConeData<f64>;
pub type StabilityVerdict = moduli::StabilityVerdict<f64>;
pub type ModuliReport = moduli::ModuliReport<f64>;
pub type ConifoldScenario = moduli::ConifoldScenario<f64>;
pub type CsEnd = moduli::CsEnd<f64>;

pub type Spectrum32 = spectral_catalog::Spectrum<f32>;
pub type TriangleMesh32 = mesh::TriangleMesh<f32>;
pub type ConeEnd32 = weights::ConeEnd<f32>;
pub type ConeData32 = moduli::ConeData<f32>;
pub type ModuliReport32 = moduli::ModuliReport<f32>;
pub type ConifoldScenario32 = moduli::ConifoldScenario<f32>;
