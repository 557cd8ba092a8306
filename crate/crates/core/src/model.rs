//! Shared domain types.
//!
//! Signals are stored channel-major: row `i` of a [`SignalMatrix`] is the
//! time series of channel `i`, and column `n` is the phase-space point at
//! sample `n`.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use thiserror::Error;

/// Absolute determinant below which a mixing matrix is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Tolerance on the unit norm of headings and principal directions.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("non-finite value at channel {channel}, sample {sample}")]
    NonFinite { channel: usize, sample: usize },
    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("signal matrix has no channels")]
    EmptyChannels,
    #[error("channel {channel} has a different length from channel 0")]
    Ragged { channel: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("vector of length {0} is not unit norm")]
    NotUnit(usize),
    #[error("heading index {0} is not strictly increasing")]
    UnorderedIndex(usize),
    #[error("principal heading has empty support")]
    EmptySupport,
}

/// What a [`SignalMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalRole {
    Sources,
    Mixtures,
    Whitened,
    Estimates,
}

/// N channels by M samples of finite real data.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    data: Array2<f64>,
    role: SignalRole,
}

impl SignalMatrix {
    pub fn new(data: Array2<f64>, role: SignalRole) -> Result<Self, ModelError> {
        validate(&data)?;
        Ok(Self { data, role })
    }

    /// Builds a matrix from per-channel rows. Rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>], role: SignalRole) -> Result<Self, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::EmptyChannels);
        }
        let m = rows[0].len();
        if let Some(channel) = rows.iter().position(|r| r.len() != m) {
            return Err(ModelError::Ragged { channel });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), m), flat)
            .map_err(|_| ModelError::TooFewSamples(m))?;
        Self::new(data, role)
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn role(&self) -> SignalRole {
        self.role
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn row(&self, channel: usize) -> ArrayView1<'_, f64> {
        self.data.row(channel)
    }

    /// Phase-space point at sample `n`.
    pub fn point(&self, n: usize) -> ArrayView1<'_, f64> {
        self.data.column(n)
    }

    pub fn with_role(mut self, role: SignalRole) -> Self {
        self.role = role;
        self
    }

    /// Frobenius norm over all channels and samples.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.axis_iter(Axis(0)).map(|r| r.to_vec()).collect()
    }
}

/// Checks the [`SignalMatrix`] invariants on raw data.
pub fn validate(data: &Array2<f64>) -> Result<(), ModelError> {
    if data.nrows() == 0 {
        return Err(ModelError::EmptyChannels);
    }
    if data.ncols() < 2 {
        return Err(ModelError::TooFewSamples(data.ncols()));
    }
    if let Some(((channel, sample), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(ModelError::NonFinite { channel, sample });
    }
    Ok(())
}

fn check_square(entries: &Array2<f64>) -> Result<(), ModelError> {
    if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
        return Err(ModelError::NotSquare {
            rows: entries.nrows(),
            cols: entries.ncols(),
        });
    }
    if let Some(((row, col), _)) = entries.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(ModelError::NonFiniteEntry { row, col });
    }
    Ok(())
}

fn to_nalgebra(a: &Array2<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Square matrix `A` with `z = A s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    entries: Array2<f64>,
}

impl MixingMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self, ModelError> {
        check_square(&entries)?;
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ModelError::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        let flat = rows.iter().flatten().copied().collect();
        Self::new(Array2::from_shape_vec((n, n), flat).expect("checked square"))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: Array2::eye(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn determinant(&self) -> f64 {
        to_nalgebra(&self.entries).determinant()
    }

    pub fn is_singular(&self) -> bool {
        self.determinant().abs() <= SINGULAR_DET
    }

    /// `A⁻¹`, or `None` when singular.
    pub fn inverse(&self) -> Option<Array2<f64>> {
        if self.is_singular() {
            return None;
        }
        let inv = to_nalgebra(&self.entries).try_inverse()?;
        let n = self.dim();
        Some(Array2::from_shape_fn((n, n), |(i, j)| inv[(i, j)]))
    }
}

/// Lower-triangular transform `W` with `E = W Z` produced by whitening.
///
/// Combined with the mixing matrix, `W A` gives the effective source
/// directions in whitened space: column `p` is the direction traced by
/// source `p` when it is active alone.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningMatrix {
    entries: Array2<f64>,
}

impl WhiteningMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self, ModelError> {
        check_square(&entries)?;
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// `B = W A`, the map from sources to whitened channels.
    pub fn effective_mixing(&self, mixing: &MixingMatrix) -> Array2<f64> {
        self.entries.dot(mixing.entries())
    }
}

/// Per-sample velocity vectors of a whitened signal and their acceptance mask.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    /// `(M-1) x N`; row `n` is `e[n+1] - e[n]`.
    pub vectors: Array2<f64>,
    pub accepted: Vec<bool>,
    pub vth: f64,
    pub vmax: f64,
}

impl VelocityField {
    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Number of samples in the signal the field was built from.
    pub fn signal_samples(&self) -> usize {
        self.vectors.nrows() + 1
    }

    pub fn vector(&self, n: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(n)
    }

    pub fn accepted_indices(&self) -> Vec<usize> {
        self.accepted
            .iter()
            .enumerate()
            .filter_map(|(n, &a)| a.then_some(n))
            .collect()
    }
}

/// Unit heading vectors at accepted sample indices, in increasing index order.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadingSet {
    indices: Vec<usize>,
    vectors: Vec<Array1<f64>>,
    dim: usize,
}

impl HeadingSet {
    /// Builds a heading set from already-normalized vectors.
    pub fn new(dim: usize, entries: Vec<(usize, Array1<f64>)>) -> Result<Self, ModelError> {
        let mut indices = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len());
        for (n, v) in entries {
            if v.len() != dim || (norm(v.view()) - 1.0).abs() > UNIT_NORM_TOL {
                return Err(ModelError::NotUnit(v.len()));
            }
            if indices.last().is_some_and(|&last| last >= n) {
                return Err(ModelError::UnorderedIndex(n));
            }
            indices.push(n);
            vectors.push(v);
        }
        Ok(Self {
            indices,
            vectors,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn heading(&self, position: usize) -> ArrayView1<'_, f64> {
        self.vectors[position].view()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, ArrayView1<'_, f64>)> {
        self.indices
            .iter()
            .copied()
            .zip(self.vectors.iter().map(|v| v.view()))
    }
}

/// Which procedure produced a [`PrincipalHeading`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    Mhc,
    Global1,
    Global2,
    FastIca,
}

impl Detector {
    pub fn name(self) -> &'static str {
        match self {
            Detector::Mhc => "mhc",
            Detector::Global1 => "global1",
            Detector::Global2 => "global2",
            Detector::FastIca => "fastica",
        }
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A detected source direction in whitened phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalHeading {
    direction: Array1<f64>,
    pub detector: Detector,
    /// Sample indices whose headings contributed.
    pub support: Vec<usize>,
    /// Sum of cluster velocity magnitudes; zero for single-heading detectors.
    pub weight: f64,
}

impl PrincipalHeading {
    pub fn new(
        direction: Array1<f64>,
        detector: Detector,
        support: Vec<usize>,
        weight: f64,
    ) -> Result<Self, ModelError> {
        if (norm(direction.view()) - 1.0).abs() > UNIT_NORM_TOL {
            return Err(ModelError::NotUnit(direction.len()));
        }
        if support.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        Ok(Self {
            direction,
            detector,
            support,
            weight,
        })
    }

    pub fn direction(&self) -> ArrayView1<'_, f64> {
        self.direction.view()
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }
}

/// Output of a separation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    /// One row per extracted source in extraction order; rows past
    /// `extracted` are zero.
    pub estimates: SignalMatrix,
    pub headings: Vec<PrincipalHeading>,
    /// Frobenius norm of the deflated data after each subtraction.
    pub residual_energy: Vec<f64>,
    /// Number of iterations that produced an estimate.
    pub extracted: usize,
}

pub(crate) fn norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}
