//! Continuous-time quantum walks of two indistinguishable bosons on a
//! one-dimensional tight-binding lattice, starting from mixed states.
//!
//! The usual pipeline is lattice -> propagator -> initial density matrix ->
//! two-particle correlation, with observables (average separation,
//! entanglement entropy) built on top. [`oracle`] holds an independent
//! brute-force Fock-space implementation used for cross-checking.

pub mod bessel;
pub mod correlation;
pub mod densityfile;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod fock;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod states;

pub use nalgebra;
pub use num_complex;

pub use correlation::{
    gamma_bessel, gamma_family, gamma_general, gamma_general_with, BesselCorrelationTerms, CorrelationCheck,
    CorrelationMatrix, GammaOptions, GammaStrategy,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use fock::{two_boson_dim, FockBasis};
pub use lattice::{Boundary, Couplings, Lattice, LatticeSpec, OnsiteRule, SingleParticleMatrix};
pub use observables::{
    avg_distance, avg_distance_normalized, distance_series, entropy_series, partial_trace, von_neumann_entropy,
    DistanceSeries, EntropyReport, ReducedDensity, Side,
};
pub use propagator::{check_wrap_margin, propagate_bessel, propagate_spectral, Propagator, PropagatorMethod};
pub use states::{
    coherence_eta, density_from_beams, density_from_family, density_from_pure, eta_lower_bound, pure_state, validate,
    BeamParams, CoherenceFamily, TwoBosonDensityMatrix, TwoBosonPureState, ValidationReport,
};
