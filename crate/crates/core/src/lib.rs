//! Finite-dimensional relational quantum dynamics.
//!
//! Static global states constrained by total energy (and momentum) operators,
//! clocks and rods built from complements of bounded discrete spectra, and the
//! conditional dynamics that emerges from them.

pub mod clockwork;
pub mod gravity;
pub mod hilbert;
pub mod multitime;
pub mod paw;
pub mod rational;
pub mod spacetime;
pub mod tolerance;
pub mod typicality;
