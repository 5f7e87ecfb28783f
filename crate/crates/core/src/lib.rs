//! Core library for simulating entanglement-assisted loading and transfer of
//! optical skyrmion textures.
//!
//! A local photon carries a skyrmionic spin-orbit texture, half of a
//! momentum-polarization Bell pair links it to a remote photon, and a Bell-state
//! measurement teleports the texture's topology onto the remote polarization.
//! The modules follow that pipeline:
//!
//! * [`tensor`] - labeled two-level factors, states, density operators, the
//!   small eigensolvers ([`cmat`]).
//! * [`states`] - grating selection rules and the canonical states.
//! * [`transfer`] - Bell-state measurement, Pauli corrections, full pipeline.
//! * [`channels`] - isotropic, flip, and local-imperfection noise.
//! * [`texture`] - transverse Stokes fields and skyrmion-number estimators.
//! * [`correlations`] - purity, fidelity, concurrence, quantum discord.
//! * [`tomography`] - 36-setting measurement simulation and reconstruction.

pub mod channels;
pub mod cmat;
pub mod correlations;
pub mod error;
pub mod states;
pub mod tensor;
pub mod texture;
pub mod tomography;
pub mod transfer;

pub use error::{Error, Result};
