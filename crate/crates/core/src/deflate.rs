//! Deflationary extraction: detect a heading, project, subtract, repeat.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use thiserror::Error;

use crate::detect::{DetectError, DetectorConfig};
use crate::model::{
    ModelError, PrincipalHeading, SeparationResult, SignalMatrix, SignalRole,
};
use crate::preprocess::{gram_schmidt_whiten, headings, velocity_field, PreprocessError};

/// Residual Frobenius norm, relative to the initial one, at which the loop
/// stops early.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeflateError {
    #[error("heading has {got} components but the data has {expected} channels")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("whitening failed: {0}")]
    Whitening(PreprocessError),
    #[error("iteration {iteration}: {cause}")]
    HaltedEarly {
        iteration: usize,
        cause: StepError,
        partial: Box<SeparationResult>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Failure inside one deflation step.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Detect(#[from] DetectError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparateConfig {
    /// Velocity threshold fraction in `[0, 1)`.
    pub vth: f64,
    pub detector: DetectorConfig,
}

fn check_dim(e: &Array2<f64>, rhat: ArrayView1<'_, f64>) -> Result<(), DeflateError> {
    if rhat.len() != e.nrows() {
        return Err(DeflateError::DimensionMismatch {
            expected: e.nrows(),
            got: rhat.len(),
        });
    }
    Ok(())
}

/// `s[n] = R̂ · e[n]` for every sample.
pub fn project_source(
    whitened: &SignalMatrix,
    rhat: &PrincipalHeading,
) -> Result<Array1<f64>, DeflateError> {
    check_dim(whitened.data(), rhat.direction())?;
    Ok(rhat.direction().dot(whitened.data()))
}

/// `e'[n] = e[n] - (R̂ · e[n]) R̂` for every sample.
pub fn subtract_source(
    whitened: &SignalMatrix,
    rhat: &PrincipalHeading,
) -> Result<SignalMatrix, DeflateError> {
    let e = whitened.data();
    check_dim(e, rhat.direction())?;
    let estimate = rhat.direction().dot(e);
    let mut out = e.clone();
    for (mut row, &r) in out.axis_iter_mut(Axis(0)).zip(rhat.direction()) {
        row.scaled_add(-r, &estimate);
    }
    Ok(SignalMatrix::new(out, SignalRole::Whitened)?)
}

/// Whitens `mixtures` once and extracts one source per channel.
///
/// The velocity threshold is re-applied to each residual, so it tracks the
/// shrinking amplitude after every subtraction. A detector failure returns
/// [`DeflateError::HaltedEarly`] with everything extracted so far.
pub fn separate(
    mixtures: &SignalMatrix,
    config: &SeparateConfig,
) -> Result<SeparationResult, DeflateError> {
    let (whitened, _) = gram_schmidt_whiten(mixtures).map_err(DeflateError::Whitening)?;
    separate_whitened(whitened, config)
}

/// Deflation loop on data that is already whitened.
pub fn separate_whitened(
    whitened: SignalMatrix,
    config: &SeparateConfig,
) -> Result<SeparationResult, DeflateError> {
    let n = whitened.channels();
    let m = whitened.samples();
    let initial = whitened.frobenius_norm();
    let mut estimates = Array2::<f64>::zeros((n, m));
    let mut found = Vec::with_capacity(n);
    let mut residual_energy = Vec::with_capacity(n);
    let mut residual = whitened;

    let finish = |estimates: Array2<f64>, headings, residual_energy, extracted| {
        Ok::<_, ModelError>(SeparationResult {
            estimates: SignalMatrix::new(estimates, SignalRole::Estimates)?,
            headings,
            residual_energy,
            extracted,
        })
    };

    for iteration in 0..n {
        if residual_energy
            .last()
            .is_some_and(|&r: &f64| r <= RESIDUAL_FLOOR * initial)
        {
            break;
        }
        let step = step(&residual, config);
        let rhat = match step {
            Ok(rhat) => rhat,
            Err(cause) => {
                let partial = finish(estimates, found, residual_energy, iteration)?;
                return Err(DeflateError::HaltedEarly {
                    iteration,
                    cause,
                    partial: Box::new(partial),
                });
            }
        };
        estimates
            .row_mut(iteration)
            .assign(&project_source(&residual, &rhat)?);
        residual = subtract_source(&residual, &rhat)?;
        residual_energy.push(residual.frobenius_norm());
        found.push(rhat);
    }

    let extracted = found.len();
    Ok(finish(estimates, found, residual_energy, extracted)?)
}

fn step(residual: &SignalMatrix, config: &SeparateConfig) -> Result<PrincipalHeading, StepError> {
    if residual.channels() == 1 {
        // One channel leaves a single direction up to sign.
        let support = (0..residual.samples() - 1).collect();
        return Ok(
            PrincipalHeading::new(ndarray::arr1(&[1.0]), config.detector.detector(), support, 0.0)
                .map_err(DetectError::from)?,
        );
    }
    let field = velocity_field(residual, config.vth)?;
    let set = headings(&field)?;
    Ok(config.detector.detect(&set, &field)?)
}
