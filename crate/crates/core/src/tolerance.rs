//! Numerical tolerances shared across modules.

/// Max-abs entry of `H - H^dag` accepted as Hermitian.
pub const HERMITIAN: f64 = 1e-10;

/// Max-abs deviation accepted for `P^2 = P = P^dag`.
pub const PROJECTOR: f64 = 1e-10;

/// Identity resolutions over integer-labelled spectra.
pub const IDENTITY: f64 = 1e-12;

/// Constraint residuals `||H |Psi>||` of constructed universes.
pub const CONSTRAINT: f64 = 1e-10;

/// Unitary dynamics comparisons.
pub const DYNAMICS: f64 = 1e-10;

/// Relative tolerance when deciding that a real number sits on an integer lattice.
pub const LATTICE: f64 = 1e-9;

/// Two energies closer than this (relative to the spectrum scale) are one level.
pub const DEGENERACY: f64 = 1e-9;
