//! Spectral analysis of scalar divergence-form operators −∇·A(x)∇ on the
//! honeycomb (equilateral triangular) lattice.
//!
//! The crate computes Floquet-Bloch band structures by a plane-wave Galerkin
//! method, locates and certifies Dirac points at the Brillouin-zone vertices,
//! quantifies the spectral gaps opened by symmetry-breaking perturbations, and
//! solves the domain-wall edge-state eigenvalue problem on a truncated
//! cylinder. An effective one-dimensional Dirac operator with a spatially
//! varying mass term supplies the topologically protected zero mode that seeds
//! the edge-state bifurcation, and a Maxwell front end reduces 2D
//! magneto-optic and bianisotropic constitutive tensors to this scalar
//! framework.
//!
//! Module map:
//!
//! - [`lattice`]: triangular lattice geometry, dual basis, high-symmetry
//!   points, rotation index maps, rational edge frames.
//! - [`media`]: Fourier-coefficient representation of 2×2 matrix coefficients
//!   A(x), symmetry classification, constructors for standard media.
//! - [`bloch`]: plane-wave discretization of ℒ^A(k), band computation,
//!   rotation-sector projection.
//! - [`dirac`]: Dirac-point detection, Fermi velocity, conical fits, gap
//!   opening and persistence under perturbations.
//! - [`edge`]: edge-state eigenproblem on the truncated cylinder, band
//!   slices, no-fold check, bifurcation/dispersion sweeps, mode
//!   classification.
//! - [`dirac1d`]: the effective 1D Dirac operator, its analytic zero mode and
//!   protection tests.
//! - [`maxwell`]: reduction of bianisotropic constitutive tensors to
//!   divergence-form operators, time-reversal predicates, field
//!   reconstruction.
//! - [`cli`]: configuration ingestion, result envelopes, caching and the
//!   command implementations behind the `honeylat` binary.

pub mod bloch;
pub mod cli;
pub mod dirac;
pub mod dirac1d;
pub mod edge;
pub mod lattice;
pub mod linalg;
pub mod maxwell;
pub mod media;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a rational edge: gcd({0}, {1}) != 1")]
    NotRationalEdge(i64, i64),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("ellipticity violated: min eigenvalue {min_eig} at sample point ({x}, {y})")]
    EllipticityViolated { min_eig: f64, x: f64, y: f64 },
    #[error("medium support exceeds truncation: max index {max_index} > trunc {trunc}")]
    TruncationTooSmall { max_index: i64, trunc: i64 },
    #[error("rotation not defined at this quasimomentum")]
    RotationNotDefined,
    #[error("no Dirac point found in window [{lo}, {hi}]")]
    NoDiracPoint { lo: f64, hi: f64 },
    #[error("hypothesis A3 violated: sector-1 eigenvalue inside the degenerate cluster")]
    SectorOneContamination,
    #[error("band tracking ambiguity: {0}")]
    BandTracking(String),
    #[error("degenerate low-contrast structure: K^T A_{{0,-1}} RK = 0")]
    DegenerateLowContrast,
    #[error("theta_sharp not real: imaginary part {0:e}")]
    ThetaSharpNotReal(f64),
    #[error("no mass term: theta_sharp = 0")]
    NoMassTerm,
    #[error("not a localized perturbation: wall asymptotes changed")]
    NotLocalizedPerturbation,
    #[error("domain wall invalid: {0}")]
    InvalidWall(String),
    #[error("ellipticity violated on cylinder at grid point ({0}, {1})")]
    CylinderEllipticity(usize, usize),
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
    #[error("constitutive tensor singular or indefinite at grid point ({x}, {y}): min eigenvalue {min_eig}")]
    ConstitutiveSingular { min_eig: f64, x: f64, y: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
