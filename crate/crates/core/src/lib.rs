//! Correlated mean field (MF + RPA) treatment of finite spin-1/2 rings with
//! general-range anisotropic couplings in a transverse field, together with
//! exact references (full diagonalization and, for nearest-neighbor XY rings,
//! free fermions) and the closed-form asymptotic estimates.

pub mod asymptotics;
pub mod ed;
pub mod error;
pub mod jw;
pub mod meanfield;
pub mod model;
pub mod observables;
pub mod rpa;

pub use error::{Error, Result};
pub use meanfield::{
    critical_field, critical_temperature, factorizing_field, solve_uniform_mf, Branch, MeanFieldSolution,
};
pub use model::{build_couplings, Axis, ChainSpec, CouplingFamily, CouplingProfile, FamilyKind};
pub use observables::{
    concurrence_profile, correlations, evaluate, two_site_rho, CmfPoint, ConcurrenceKind, ConcurrenceProfile,
    CorrelationSet, ObservableFlag, TwoSiteDensity,
};
pub use rpa::{rpa_spectrum, RpaSpectrum};
