//! Matching estimates to sources, error curves and the Monte Carlo harness.
//!
//! Rows are compared after scaling to unit energy, so an estimate that is a
//! scaled or negated copy of its source scores zero error.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::csvio::{write_table, CsvError};
use crate::datagen::{DataError, Scenario};
use crate::deflate::{separate, SeparateConfig};
use crate::fastica::{fastica_separate, FastIcaConfig, Nonlinearity};
use crate::model::{SeparationResult, SignalMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("signal has zero energy")]
    ZeroSignal,
    #[error("row {0} has zero energy")]
    DegenerateRow(usize),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("no runs to aggregate")]
    NoRuns,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// `x / sqrt(Σ x²)`.
pub fn unit_normalize(x: ArrayView1<'_, f64>) -> Result<Array1<f64>, EvalError> {
    let energy = x.dot(&x).sqrt();
    if energy == 0.0 || !energy.is_finite() {
        return Err(EvalError::ZeroSignal);
    }
    Ok(x.mapv(|v| v / energy))
}

fn normalize_rows(m: &SignalMatrix) -> Result<Array2<f64>, EvalError> {
    let mut out = m.data().clone();
    for (r, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let unit = unit_normalize(row.view()).map_err(|_| EvalError::DegenerateRow(r))?;
        row.assign(&unit);
    }
    Ok(out)
}

/// `c[r][s]`: inner product of unit-energy source `r` and estimate `s`.
pub fn correlation_matrix(
    sources: &SignalMatrix,
    estimates: &SignalMatrix,
) -> Result<Array2<f64>, EvalError> {
    if sources.data().dim() != estimates.data().dim() {
        return Err(EvalError::ShapeMismatch {
            expected: sources.data().dim(),
            got: estimates.data().dim(),
        });
    }
    let s = normalize_rows(sources)?;
    let e = normalize_rows(estimates)?;
    Ok(s.dot(&e.t()))
}

/// Source-to-estimate pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    /// `assignment[r]` is the estimate paired with source `r`.
    pub assignment: Vec<usize>,
    /// `±1` per source.
    pub signs: Vec<f64>,
    /// Signed correlation per source.
    pub correlations: Vec<f64>,
}

/// Pairs each source with one estimate, largest `|c|` first.
pub fn match_sources(
    sources: &SignalMatrix,
    estimates: &SignalMatrix,
) -> Result<MatchReport, EvalError> {
    let c = correlation_matrix(sources, estimates)?;
    Ok(match_correlations(&c))
}

/// Greedy unique assignment on a square correlation matrix. Ties go to the
/// lowest source, then the lowest estimate.
pub fn match_correlations(c: &Array2<f64>) -> MatchReport {
    let n = c.nrows();
    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |s| (r, s))).collect();
    cells.sort_by(|&(ra, sa), &(rb, sb)| c[[rb, sb]].abs().total_cmp(&c[[ra, sa]].abs()));
    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (r, s) in cells {
        if assignment[r] == usize::MAX && !used[s] {
            assignment[r] = s;
            used[s] = true;
        }
    }
    let correlations: Vec<f64> = (0..n).map(|r| c[[r, assignment[r]]]).collect();
    let signs = correlations
        .iter()
        .map(|&v| if v > 0.0 { 1.0 } else { -1.0 })
        .collect();
    MatchReport {
        assignment,
        signs,
        correlations,
    }
}

/// Per-source error rows `s_r − sign · ŝ`, both at unit energy.
pub fn matched_errors(
    sources: &SignalMatrix,
    estimates: &SignalMatrix,
    report: &MatchReport,
) -> Result<Array2<f64>, EvalError> {
    let s = normalize_rows(sources)?;
    let e = normalize_rows(estimates)?;
    let mut out = s;
    for (r, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        row.scaled_add(-report.signs[r], &e.row(report.assignment[r]));
    }
    Ok(out)
}

/// `RMS[n] = sqrt(mean_q ε_q[n]²)` over the rows of `errors` (runs × samples).
pub fn rms_curve(errors: &Array2<f64>) -> Result<Array1<f64>, EvalError> {
    let q = errors.nrows();
    if q == 0 {
        return Err(EvalError::NoRuns);
    }
    let mut acc = Array1::<f64>::zeros(errors.ncols());
    for row in errors.axis_iter(Axis(0)) {
        acc.zip_mut_with(&row, |a, &e| *a += e * e);
    }
    Ok(acc.mapv(|v| (v / q as f64).sqrt()))
}

/// A separation method under evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Phase {
        label: String,
        config: SeparateConfig,
    },
    /// The seed is drawn per run from the run's generator.
    FastIca {
        nonlinearity: Nonlinearity,
        max_iter: usize,
        tol: f64,
    },
}

impl Method {
    pub fn fastica_default() -> Self {
        let d = FastIcaConfig::default();
        Method::FastIca {
            nonlinearity: d.nonlinearity,
            max_iter: d.max_iter,
            tol: d.tol,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Method::Phase { label, .. } => label,
            Method::FastIca { .. } => "fastica",
        }
    }

    fn run(&self, mixtures: &SignalMatrix, seed: u64) -> Result<SeparationResult, String> {
        match self {
            Method::Phase { config, .. } => separate(mixtures, config).map_err(|e| e.to_string()),
            Method::FastIca {
                nonlinearity,
                max_iter,
                tol,
            } => {
                let cfg = FastIcaConfig {
                    nonlinearity: *nonlinearity,
                    seed,
                    max_iter: *max_iter,
                    tol: *tol,
                };
                fastica_separate(mixtures, &cfg).map_err(|e| e.to_string())
            }
        }
    }
}

/// Errors of every method on one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunErrors {
    pub run: usize,
    /// Per method: sources × samples error rows, or the failure message.
    pub per_method: Vec<Result<Array2<f64>, String>>,
}

/// Runs every method once on the same noisy draw for run `q`.
///
/// The generator is ChaCha8 seeded with `master_seed` on stream `q`; noise
/// is drawn first, then one FastICA seed.
pub fn run_once(
    scenario: &Scenario,
    methods: &[Method],
    q: usize,
    master_seed: u64,
) -> Result<RunErrors, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(q as u64);
    let mixtures = scenario.noisy_mixtures(&mut rng)?;
    let ica_seed: u64 = rng.random();
    let per_method = methods
        .iter()
        .map(|method| {
            let out = method.run(&mixtures, ica_seed)?;
            if out.extracted < scenario.sources.channels() {
                return Err(format!("extracted {} of {} sources", out.extracted, scenario.sources.channels()));
            }
            let report = match_sources(&scenario.sources, &out.estimates).map_err(|e| e.to_string())?;
            matched_errors(&scenario.sources, &out.estimates, &report).map_err(|e| e.to_string())
        })
        .collect();
    Ok(RunErrors { run: q, per_method })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFailure {
    pub run: usize,
    pub message: String,
}

/// RMS curves of one method over all successful runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsReport {
    pub method: String,
    pub scenario: String,
    pub seed: u64,
    /// Runs attempted.
    pub q: usize,
    /// One curve per source; empty when every run failed.
    pub curves: Vec<Array1<f64>>,
    pub failures: Vec<RunFailure>,
}

impl RmsReport {
    pub fn successes(&self) -> usize {
        self.q - self.failures.len()
    }

    /// Mean of every curve value.
    pub fn mean_rms(&self) -> f64 {
        let total: f64 = self.curves.iter().map(|c| c.sum()).sum();
        let count: usize = self.curves.iter().map(|c| c.len()).sum();
        total / count as f64
    }
}

/// Sums squared errors in run-index order whatever the input order.
pub fn aggregate(
    scenario: &Scenario,
    methods: &[Method],
    mut runs: Vec<RunErrors>,
    master_seed: u64,
) -> Vec<RmsReport> {
    runs.sort_by_key(|r| r.run);
    let (n, m) = scenario.sources.data().dim();
    methods
        .iter()
        .enumerate()
        .map(|(k, method)| {
            let mut acc = Array2::<f64>::zeros((n, m));
            let mut failures = Vec::new();
            for run in &runs {
                match &run.per_method[k] {
                    Ok(err) => acc.zip_mut_with(err, |a, &e| *a += e * e),
                    Err(message) => failures.push(RunFailure {
                        run: run.run,
                        message: message.clone(),
                    }),
                }
            }
            let ok = runs.len() - failures.len();
            let curves = if ok == 0 {
                Vec::new()
            } else {
                acc.axis_iter(Axis(0))
                    .map(|row| row.mapv(|v| (v / ok as f64).sqrt()))
                    .collect()
            };
            RmsReport {
                method: method.label().to_string(),
                scenario: scenario.name.clone(),
                seed: master_seed,
                q: runs.len(),
                curves,
                failures,
            }
        })
        .collect()
}

/// `q` independent noisy runs of every method, one report per method.
///
/// Runs execute in parallel; each run's randomness depends only on
/// `(master_seed, run)`, so results do not depend on scheduling.
pub fn monte_carlo(
    scenario: &Scenario,
    methods: &[Method],
    q: usize,
    master_seed: u64,
) -> Result<Vec<RmsReport>, EvalError> {
    if q == 0 {
        return Err(EvalError::NoRuns);
    }
    let runs = (0..q)
        .into_par_iter()
        .map(|run| run_once(scenario, methods, run, master_seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(scenario, methods, runs, master_seed))
}

/// Writes `sample` then one column per report and source in `sources`,
/// followed by any `extra` named columns.
pub fn write_rms_csv<W: Write>(
    writer: W,
    reports: &[RmsReport],
    sources: &[usize],
    extra: &[(String, ArrayView1<'_, f64>)],
) -> Result<(), CsvError> {
    let mut header = vec!["sample".to_string()];
    let mut columns: Vec<ArrayView1<'_, f64>> = Vec::new();
    for report in reports {
        for &s in sources {
            if let Some(curve) = report.curves.get(s) {
                header.push(format!("{}_s{}", report.method, s));
                columns.push(curve.view());
            }
        }
    }
    for (name, col) in extra {
        header.push(name.clone());
        columns.push(col.view());
    }
    let len = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    let rows = (0..len).map(|n| {
        std::iter::once(n.to_string())
            .chain(columns.iter().map(|c| c.get(n).map_or(String::new(), |v| v.to_string())))
            .collect()
    });
    write_table(writer, &header, rows)
}
