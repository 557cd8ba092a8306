//! Whitening, velocity vectors, thresholding and heading normalization.
//!
//! The mean is never removed here. Differencing consecutive samples already
//! cancels constant offsets, and centering the mixtures before whitening
//! would correlate otherwise uncorrelated sparse sources.

use ndarray::{Array1, Array2, Axis};
use thiserror::Error;

use crate::model::{
    norm, HeadingSet, ModelError, SignalMatrix, SignalRole, VelocityField, WhiteningMatrix,
};

/// Residual norm, relative to the pre-projection norm, below which a channel
/// is declared linearly dependent on earlier channels.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error("channel {0} is linearly dependent on earlier channels")]
    RankDeficient(usize),
    #[error("velocity threshold {0} outside [0, 1)")]
    BadThreshold(f64),
    #[error("no velocity vector passes the threshold; lower vth")]
    AllRejected,
    #[error("every accepted velocity vector has zero magnitude")]
    EmptyHeadingSet,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Classical Gram–Schmidt over channel rows in order `0..N`, each residual
/// normalized to unit energy over the record.
///
/// Returns the whitened rows and the lower-triangular `W` with `E = W Z`.
pub fn gram_schmidt_whiten(
    mixtures: &SignalMatrix,
) -> Result<(SignalMatrix, WhiteningMatrix), PreprocessError> {
    let z = mixtures.data();
    let (n, m) = z.dim();
    let mut e = Array2::<f64>::zeros((n, m));
    let mut w = Array2::<f64>::zeros((n, n));

    for k in 0..n {
        let zk = z.row(k);
        let zk_norm = norm(zk);
        // Classical variant: all projection coefficients come from the
        // original row, not the partially reduced one.
        let coeffs: Vec<f64> = (0..k).map(|j| e.row(j).dot(&zk)).collect();
        let mut u = zk.to_owned();
        let mut w_row = Array1::<f64>::zeros(n);
        w_row[k] = 1.0;
        for (j, &c) in coeffs.iter().enumerate() {
            u.scaled_add(-c, &e.row(j));
            w_row.scaled_add(-c, &w.row(j));
        }
        let u_norm = norm(u.view());
        if zk_norm == 0.0 || u_norm < RANK_TOL * zk_norm {
            return Err(PreprocessError::RankDeficient(k));
        }
        e.row_mut(k).assign(&(u / u_norm));
        w.row_mut(k).assign(&(w_row / u_norm));
    }

    Ok((
        SignalMatrix::new(e, SignalRole::Whitened)?,
        WhiteningMatrix::new(w)?,
    ))
}

/// Differences of consecutive samples with the acceptance rule
/// `max_i |v_i[n]| >= vth * max_n |v[n]|`.
///
/// `vmax` is taken over every vector before masking.
pub fn velocity_field(whitened: &SignalMatrix, vth: f64) -> Result<VelocityField, PreprocessError> {
    let e = whitened.data();
    let m = e.ncols();
    let vectors = Array2::from_shape_fn((m - 1, e.nrows()), |(n, i)| e[[i, n + 1]] - e[[i, n]]);
    velocity_field_from_vectors(vectors, vth)
}

/// Thresholds a precomputed `(M-1) x N` velocity array.
pub fn velocity_field_from_vectors(
    vectors: Array2<f64>,
    vth: f64,
) -> Result<VelocityField, PreprocessError> {
    if !(0.0..1.0).contains(&vth) {
        return Err(PreprocessError::BadThreshold(vth));
    }
    let vmax = vectors
        .axis_iter(Axis(0))
        .map(norm)
        .fold(0.0_f64, f64::max);
    // A zero field has no direction anywhere, whatever the threshold.
    if vmax == 0.0 {
        return Err(PreprocessError::AllRejected);
    }
    let threshold = vth * vmax;
    let accepted: Vec<bool> = vectors
        .axis_iter(Axis(0))
        .map(|v| {
            let comp_max = v.iter().map(|x| x.abs()).fold(0.0_f64, f64::max);
            comp_max >= threshold
        })
        .collect();
    if !accepted.iter().any(|&a| a) {
        return Err(PreprocessError::AllRejected);
    }
    Ok(VelocityField {
        vectors,
        accepted,
        vth,
        vmax,
    })
}

/// Unit headings `v[n] / |v[n]|` for every accepted, nonzero velocity.
pub fn headings(field: &VelocityField) -> Result<HeadingSet, PreprocessError> {
    let entries: Vec<(usize, Array1<f64>)> = field
        .accepted_indices()
        .into_iter()
        .filter_map(|n| {
            let v = field.vector(n);
            let mag = norm(v);
            (mag > 0.0).then(|| (n, v.mapv(|x| x / mag)))
        })
        .collect();
    if entries.is_empty() {
        return Err(PreprocessError::EmptyHeadingSet);
    }
    Ok(HeadingSet::new(field.dim(), entries)?)
}
