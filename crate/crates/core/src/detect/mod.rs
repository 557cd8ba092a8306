//! Principal-heading detectors.
//!
//! Each detector takes the heading set of the current (possibly deflated)
//! whitened data and returns one unit direction believed to belong to a
//! single source.

mod global1;
mod global2;
mod mhc;

pub use global1::{global1_detect, weighted_average, ClusterMatrices, Global1Threshold};
pub use global2::{global2_detect, Global2Trace};
pub use mhc::{mhc_detect, MhcTrace};

use thiserror::Error;

use crate::model::{HeadingSet, ModelError, PrincipalHeading, VelocityField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("at least 2 headings are required, got {0}")]
    TooFewHeadings(usize),
    #[error("no heading cluster survives the cross-component AND")]
    NoClusterFound,
    #[error("cluster velocities cancel to a zero average")]
    ZeroAverage,
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("no heading has a defined difference magnitude")]
    NoDefinedE,
    #[error("cluster threshold must be positive and at most 1, got {0}")]
    BadAlpha(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-component ascending sort of absolute heading components.
///
/// `order[i][m]` is the heading position at sorted row `m` of component `i`;
/// `rank[i]` is its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedComponents {
    pub values: Vec<Vec<f64>>,
    pub order: Vec<Vec<usize>>,
    pub rank: Vec<Vec<usize>>,
}

impl SortedComponents {
    pub fn new(headings: &HeadingSet) -> Self {
        let len = headings.len();
        let mut values = Vec::with_capacity(headings.dim());
        let mut order = Vec::with_capacity(headings.dim());
        let mut rank = Vec::with_capacity(headings.dim());
        for i in 0..headings.dim() {
            let mags: Vec<f64> = (0..len).map(|p| headings.heading(p)[i].abs()).collect();
            let mut perm: Vec<usize> = (0..len).collect();
            perm.sort_by(|&a, &b| mags[a].total_cmp(&mags[b]).then(a.cmp(&b)));
            let mut inv = vec![0; len];
            for (m, &p) in perm.iter().enumerate() {
                inv[p] = m;
            }
            values.push(perm.iter().map(|&p| mags[p]).collect());
            order.push(perm);
            rank.push(inv);
        }
        Self {
            values,
            order,
            rank,
        }
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    /// `|sorted[m] - sorted[m-1]|`, undefined at `m = 0`.
    pub fn gap(&self, component: usize, m: usize) -> Option<f64> {
        (m > 0).then(|| (self.values[component][m] - self.values[component][m - 1]).abs())
    }
}

/// Detector choice with its tuning parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorConfig {
    Mhc,
    Global1(Global1Threshold),
    Global2,
}

impl DetectorConfig {
    pub fn detector(&self) -> crate::model::Detector {
        match self {
            DetectorConfig::Mhc => crate::model::Detector::Mhc,
            DetectorConfig::Global1(_) => crate::model::Detector::Global1,
            DetectorConfig::Global2 => crate::model::Detector::Global2,
        }
    }

    /// Runs the configured detector and discards its trace.
    pub fn detect(
        &self,
        headings: &HeadingSet,
        field: &VelocityField,
    ) -> Result<PrincipalHeading, DetectError> {
        match *self {
            DetectorConfig::Mhc => mhc_detect(headings).map(|(h, _)| h),
            DetectorConfig::Global1(threshold) => {
                global1_detect(headings, field, threshold).map(|(h, _)| h)
            }
            DetectorConfig::Global2 => global2_detect(headings).map(|(h, _)| h),
        }
    }
}
