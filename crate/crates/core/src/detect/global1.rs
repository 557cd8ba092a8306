//! Global 1: threshold clustering of sorted heading components with
//! magnitude-weighted averaging of the clustered velocities.
//!
//! Outline:
//! 1. sort `|r_i|` per component and flag sorted rows whose gap to the
//!    previous row is below the threshold (`C`);
//! 2. take the longest run of flags over all components; the run plus the
//!    row just before it is one cluster of that component;
//! 3. map the cluster back to heading positions (`C^U`) and check every
//!    other component at those positions;
//! 4. AND across components (`D`) and average the surviving velocities.

use ndarray::{Array1, ArrayView1};

use crate::model::{norm, Detector, HeadingSet, PrincipalHeading, VelocityField};

use super::{DetectError, SortedComponents};

/// Minimum `|Ṽ|` accepted from [`weighted_average`].
pub const ZERO_AVERAGE_TOL: f64 = 1e-12;

/// How the sorted-gap threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Global1Threshold {
    /// `epsilon = alpha / M`, with `M` the sample count of the signal.
    Alpha(f64),
    /// Fixed `epsilon`.
    Epsilon(f64),
}

impl Default for Global1Threshold {
    fn default() -> Self {
        Global1Threshold::Alpha(1.0)
    }
}

impl Global1Threshold {
    pub fn epsilon(self, samples: usize) -> Result<f64, DetectError> {
        match self {
            Global1Threshold::Alpha(a) if a > 0.0 && a <= 1.0 => Ok(a / samples as f64),
            Global1Threshold::Alpha(a) => Err(DetectError::BadAlpha(a)),
            Global1Threshold::Epsilon(e) if e > 0.0 && e.is_finite() => Ok(e),
            Global1Threshold::Epsilon(e) => Err(DetectError::BadAlpha(e)),
        }
    }
}

/// Flag matrices produced while clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMatrices {
    pub epsilon: f64,
    pub sorted: SortedComponents,
    /// `c[i][m]`: sorted row `m` of component `i` is within `epsilon` of row `m-1`.
    pub c: Vec<Vec<bool>>,
    /// `cu[i][k]`: heading position `k` is clustered in component `i`.
    pub cu: Vec<Vec<bool>>,
    /// AND of `cu` across components.
    pub d: Vec<bool>,
    /// Component and inclusive sorted-row range of the selected run of flags.
    pub run: (usize, usize, usize),
    /// Heading positions with `d` set.
    pub cluster: Vec<usize>,
}

pub fn global1_detect(
    headings: &HeadingSet,
    field: &VelocityField,
    threshold: Global1Threshold,
) -> Result<(PrincipalHeading, ClusterMatrices), DetectError> {
    let len = headings.len();
    if len < 2 {
        return Err(DetectError::TooFewHeadings(len));
    }
    if field.dim() != headings.dim() {
        return Err(DetectError::DimensionMismatch {
            expected: headings.dim(),
            got: field.dim(),
        });
    }
    let epsilon = threshold.epsilon(field.signal_samples())?;
    let sorted = SortedComponents::new(headings);
    let dims = sorted.components();

    let c: Vec<Vec<bool>> = (0..dims)
        .map(|i| {
            (0..len)
                .map(|m| sorted.gap(i, m).is_some_and(|g| g < epsilon))
                .collect()
        })
        .collect();

    // Longest run of flags; ties go to the lowest component, then lowest row.
    let mut best: Option<(usize, usize, usize)> = None;
    for (i, flags) in c.iter().enumerate() {
        let mut m = 0;
        while m < len {
            if !flags[m] {
                m += 1;
                continue;
            }
            let start = m;
            while m < len && flags[m] {
                m += 1;
            }
            let end = m - 1;
            if best.is_none_or(|(_, s, e)| end - start > e - s) {
                best = Some((i, start, end));
            }
        }
    }
    let (comp, start, end) = best.ok_or(DetectError::NoClusterFound)?;

    let mut cu = vec![vec![false; len]; dims];
    // A flag at row m links it to row m-1, so the run starts one row earlier.
    let members: Vec<usize> = (start - 1..=end).map(|m| sorted.order[comp][m]).collect();
    for &k in &members {
        cu[comp][k] = true;
    }
    for (i, col) in cu.iter_mut().enumerate() {
        if i == comp {
            continue;
        }
        for &k in &members {
            let m = sorted.rank[i][k];
            // A zero just before a run of ones belongs to that run.
            col[k] = c[i][m] || (m + 1 < len && c[i][m + 1]);
        }
    }
    let d: Vec<bool> = (0..len).map(|k| cu.iter().all(|col| col[k])).collect();
    let cluster: Vec<usize> = (0..len).filter(|&k| d[k]).collect();
    if cluster.is_empty() {
        return Err(DetectError::NoClusterFound);
    }

    let sample_indices: Vec<usize> = cluster.iter().map(|&k| headings.indices()[k]).collect();
    let velocities: Vec<ArrayView1<'_, f64>> =
        sample_indices.iter().map(|&n| field.vector(n)).collect();
    let mut heading = weighted_average(&velocities)?;
    heading.detector = Detector::Global1;
    heading.support = sample_indices;

    Ok((
        heading,
        ClusterMatrices {
            epsilon,
            sorted,
            c,
            cu,
            d,
            run: (comp, start, end),
            cluster,
        },
    ))
}

/// Magnitude-weighted average `Ṽ = Σ M_j v_j / Σ M_j²` with `M_j = |v_j|`,
/// normalized to unit length.
///
/// Members pointing away from the first member are flipped before summing.
/// The returned support holds member positions in the input slice and the
/// weight is `Σ M_j`.
pub fn weighted_average(velocities: &[ArrayView1<'_, f64>]) -> Result<PrincipalHeading, DetectError> {
    let first = velocities.first().ok_or(DetectError::EmptyCluster)?;
    let dim = first.len();
    let mut numerator = Array1::<f64>::zeros(dim);
    let mut denominator = 0.0;
    let mut weight = 0.0;
    for v in velocities {
        if v.len() != dim {
            return Err(DetectError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let sign = if v.dot(first) < 0.0 { -1.0 } else { 1.0 };
        let mag = norm(*v);
        numerator.scaled_add(sign * mag, v);
        denominator += mag * mag;
        weight += mag;
    }
    if denominator == 0.0 {
        return Err(DetectError::ZeroAverage);
    }
    let average = numerator / denominator;
    let len = norm(average.view());
    if len < ZERO_AVERAGE_TOL {
        return Err(DetectError::ZeroAverage);
    }
    Ok(PrincipalHeading::new(
        average / len,
        Detector::Global1,
        (0..velocities.len()).collect(),
        weight,
    )?)
}
