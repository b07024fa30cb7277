//! Detection, localization and ranking of responsive layout failures over
//! captured page layouts.
//!
//! The pipeline runs over a [`snapshot::CaptureBundle`]: [`detection`] finds
//! failures across viewport widths, [`noi`] marks the ones with no visible
//! pixels, [`localization`] collects suspicious (element, CSS property)
//! pairs, and [`prioritization`] ranks them. [`metrics`] scores rankings
//! against ground truth.

pub mod config;
pub mod css;
pub mod detection;
pub mod localization;
pub mod metrics;
pub mod noi;
pub mod par;
pub mod pipeline;
pub mod prioritization;
pub mod snapshot;
