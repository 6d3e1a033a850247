//! Numerics for Darboux transforms of closed polarised curves in the
//! lightcone model of the conformal 2-sphere.

pub mod curve;
pub mod darboux;
pub mod error;
pub mod minkowski;
pub mod monodromy;
pub mod space_forms;

pub use curve::{
    fd_derivative, verify_pcq_sections, CurveFamily, LiftedSection, PcqReport,
    PolarisedCurve, Polarisation, SectionPoly,
};
pub use darboux::{
    backlund_indicator, backlund_pcq, check_gauge, closed_transforms,
    closed_transforms_extrapolated, parallel_section, parallel_section_extrapolated,
    random_lightlike_seeds, splittings_along, transform_connection, transform_pcq,
    GaugeEntry, GaugeReport, TransformConnection, TransformCurve,
};
pub use error::{Error, Result};
pub use minkowski::{Mat4, OrthoMatrix, SkewMap, Vec31};
pub use monodromy::{
    find_cover_resonance, find_resonance, integrate_frame, integrate_frame_checked,
    integrate_frame_extrapolated, integrate_frame_rk4, integrate_frames, monodromy,
    monodromy_extrapolated, sweep, Branch, MonodromyResult,
    ResonancePoint, SpectralSweep,
};
pub use space_forms::{NullSplitting, SpaceFormKind, SpaceFormVector};
