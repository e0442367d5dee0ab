//! Simulator for intelligent omni-surface (IOS) aided wireless links.
//!
//! The crate models a planar surface of 1-bit elements that either reflect
//! (both endpoints on the same side) or refract (opposite sides) an
//! incident wave. It provides:
//!
//! - [`geometry`]: the surface-local frame, element lattice and angles;
//! - [`element`]: the angle-dependent element response and its table;
//! - [`channel`]: link and end-to-end channels plus reciprocity checks;
//! - [`beamforming`]: far-field patterns, 1-bit configuration search and
//!   the beam round-trip experiment;
//! - [`workbench`]: scenario files, random scenarios and experiment runs.

pub mod beamforming;
pub mod channel;
pub mod element;
pub mod error;
pub mod geometry;
pub mod surface;
pub mod workbench;

pub use beamforming::{
    beam_reciprocity_experiment, compare_beamforming_models, configure_surface, far_field,
    far_field_pattern, far_field_pattern_with, main_beam, BeamDesign, BeamReport, PatternSweep,
    SweepGrid,
};
pub use channel::{
    check_cascade_reciprocity, check_channel_reciprocity, Antenna, ComplexChannel, Direction,
    DirectLink, Scenario, Verdict,
};
pub use element::{
    CompositionRule, ElementModel, ElementPatternParams, ElementResponseTable, ElementState,
    InteractionMode, ResponseModel,
};
pub use error::{Error, ErrorKind, Result};
pub use geometry::{IosGrid, Side, SidedAngle, SphericalAngle, Vec3};
pub use num_complex::Complex64;
pub use surface::SurfaceConfiguration;
