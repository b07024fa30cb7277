//! Run configuration shared by every pipeline stage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::DetectConfig;
use crate::localization::LocalizeOptions;
use crate::metrics::oracle::Neutralization;
use crate::metrics::Exclusions;
use crate::noi::NoiConfig;
use crate::prioritization::RankOptions;

pub const DEFAULT_WIDTH_MIN: u32 = 320;
pub const DEFAULT_WIDTH_MAX: u32 = 1400;
pub const DEFAULT_STEP: u32 = 1;
pub const DEFAULT_HEIGHT: u32 = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub width_min: u32,
    pub width_max: u32,
    pub step: u32,
    pub height: u32,
    pub eps: f64,
    pub sr_max_span: u32,
    pub noi: NoiConfig,
    pub exclusions: Exclusions,
    pub k: usize,
    pub hops: usize,
    pub numeric_first: bool,
    pub neutralization: Neutralization,
}

impl Default for RunConfig {
    fn default() -> Self {
        let detect = DetectConfig::default();
        Self {
            width_min: DEFAULT_WIDTH_MIN,
            width_max: DEFAULT_WIDTH_MAX,
            step: DEFAULT_STEP,
            height: DEFAULT_HEIGHT,
            eps: detect.eps,
            sr_max_span: detect.sr_max_span,
            noi: NoiConfig::default(),
            exclusions: Exclusions::default(),
            k: 3,
            hops: 1,
            numeric_first: false,
            neutralization: Neutralization::Delete,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError(m.to_string()));
        if self.step == 0 {
            return fail("step must be at least 1");
        }
        if self.width_min == 0 || self.width_min > self.width_max {
            return fail("width range must satisfy 0 < width_min <= width_max");
        }
        if self.height == 0 {
            return fail("height must be positive");
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return fail("eps must be a non-negative number");
        }
        if self.sr_max_span == 0 {
            return fail("sr_max_span must be at least 1");
        }
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if self.hops == 0 {
            return fail("hops must be at least 1");
        }
        Ok(())
    }

    pub fn detect(&self) -> DetectConfig {
        DetectConfig {
            eps: self.eps,
            sr_max_span: self.sr_max_span,
        }
    }

    pub fn localize(&self) -> LocalizeOptions {
        LocalizeOptions {
            eps: self.eps,
            hops: self.hops,
        }
    }

    pub fn rank(&self) -> RankOptions {
        RankOptions {
            numeric_first: self.numeric_first,
        }
    }
}
