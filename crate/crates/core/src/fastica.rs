//! Deflationary FastICA baseline.
//!
//! Unlike the heading detectors this centres each channel before whitening
//! (covariance eigendecomposition) and uses the whole record. Centring is
//! kept on purpose: on sparse sources it correlates the centred sources and
//! is what makes the baseline leak one source into another.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::model::{Detector, ModelError, PrincipalHeading, SeparationResult, SignalMatrix, SignalRole};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FastIcaError {
    #[error("component {0} did not converge")]
    NotConverged(usize),
    #[error("covariance is rank deficient (eigenvalue {0:e})")]
    RankDeficient(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Contrast function `g` and its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Nonlinearity {
    #[default]
    Gauss,
    Tanh,
    Pow3,
}

impl Nonlinearity {
    fn eval(self, u: f64) -> (f64, f64) {
        match self {
            Nonlinearity::Gauss => {
                let e = (-0.5 * u * u).exp();
                (u * e, (1.0 - u * u) * e)
            }
            Nonlinearity::Tanh => {
                let t = u.tanh();
                (t, 1.0 - t * t)
            }
            Nonlinearity::Pow3 => (u * u * u, 3.0 * u * u),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::Gauss => "gauss",
            Nonlinearity::Tanh => "tanh",
            Nonlinearity::Pow3 => "pow3",
        }
    }
}

impl std::str::FromStr for Nonlinearity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gauss" => Ok(Nonlinearity::Gauss),
            "tanh" => Ok(Nonlinearity::Tanh),
            "pow3" => Ok(Nonlinearity::Pow3),
            other => Err(format!("unknown nonlinearity `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastIcaConfig {
    pub nonlinearity: Nonlinearity,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FastIcaConfig {
    fn default() -> Self {
        Self {
            nonlinearity: Nonlinearity::Gauss,
            seed: 0,
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

/// Full FastICA output, including the unmixing in whitened coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FastIcaFit {
    pub result: SeparationResult,
    /// Rows are the extracted weight vectors in whitened coordinates.
    pub weights: Array2<f64>,
    pub iterations: Vec<usize>,
}

/// Centres each channel and whitens with `D^{-1/2} Eᵀ` from the covariance
/// eigendecomposition, giving unit-variance uncorrelated rows.
fn centre_and_whiten(z: &Array2<f64>) -> Result<Array2<f64>, FastIcaError> {
    let (n, m) = z.dim();
    let mean = z.mean_axis(Axis(1)).expect("at least one sample");
    let centred = z - &mean.insert_axis(Axis(1));
    let cov = centred.dot(&centred.t()) / m as f64;
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| cov[[i, j]]));
    let scale = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let mut k = Array2::<f64>::zeros((n, n));
    for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(FastIcaError::RankDeficient(lambda));
        }
        let inv = lambda.sqrt().recip();
        for i in 0..n {
            k[[c, i]] = eig.eigenvectors[(i, c)] * inv;
        }
    }
    Ok(k.dot(&centred))
}

fn unit(v: Array1<f64>) -> Array1<f64> {
    let len = v.dot(&v).sqrt();
    v / len
}

pub fn fastica_separate(
    mixtures: &SignalMatrix,
    config: &FastIcaConfig,
) -> Result<SeparationResult, FastIcaError> {
    fastica_fit(mixtures, config).map(|fit| fit.result)
}

pub fn fastica_fit(mixtures: &SignalMatrix, config: &FastIcaConfig) -> Result<FastIcaFit, FastIcaError> {
    let x = centre_and_whiten(mixtures.data())?;
    let (n, m) = x.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = Array2::<f64>::zeros((n, n));
    let mut iterations = Vec::with_capacity(n);

    for p in 0..n {
        let decorrelate = |mut w: Array1<f64>, weights: &Array2<f64>| {
            for j in 0..p {
                let wj = weights.row(j);
                let c = w.dot(&wj);
                w.scaled_add(-c, &wj);
            }
            unit(w)
        };
        let init = Array1::from_shape_fn(n, |_| StandardNormal.sample(&mut rng));
        let mut w = decorrelate(init, &weights);
        let mut converged = None;
        for iter in 1..=config.max_iter {
            let proj = w.dot(&x);
            let mut next = Array1::<f64>::zeros(n);
            let mut mean_dg = 0.0;
            for (col, &u) in x.axis_iter(Axis(1)).zip(proj.iter()) {
                let (g, dg) = config.nonlinearity.eval(u);
                next.scaled_add(g, &col);
                mean_dg += dg;
            }
            next /= m as f64;
            next.scaled_add(-mean_dg / m as f64, &w);
            let next = decorrelate(next, &weights);
            let same = (&next - &w).dot(&(&next - &w)).sqrt();
            let flipped = (&next + &w).dot(&(&next + &w)).sqrt();
            w = next;
            if same.min(flipped) < config.tol {
                converged = Some(iter);
                break;
            }
        }
        let iter = converged.ok_or(FastIcaError::NotConverged(p))?;
        weights.row_mut(p).assign(&w);
        iterations.push(iter);
    }

    let estimates = weights.dot(&x);
    let mut residual = x.clone();
    let mut residual_energy = Vec::with_capacity(n);
    let mut headings = Vec::with_capacity(n);
    for (w, s) in weights.axis_iter(Axis(0)).zip(estimates.axis_iter(Axis(0))) {
        for (mut row, &wi) in residual.axis_iter_mut(Axis(0)).zip(w.iter()) {
            row.scaled_add(-wi, &s);
        }
        residual_energy.push(residual.iter().map(|v| v * v).sum::<f64>().sqrt());
        headings.push(PrincipalHeading::new(
            w.to_owned(),
            Detector::FastIca,
            (0..m).collect(),
            0.0,
        )?);
    }

    Ok(FastIcaFit {
        result: SeparationResult {
            estimates: SignalMatrix::new(estimates, SignalRole::Estimates)?,
            headings,
            residual_energy,
            extracted: n,
        },
        weights,
        iterations,
    })
}
