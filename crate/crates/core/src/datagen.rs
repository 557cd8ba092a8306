//! Synthetic sparse sources, mixing and noise.
//!
//! Sources are sums of raised-cosine bumps placed in index windows. In the
//! completely sparse layout no two sources share a window, so each source
//! is alone whenever it is nonzero. The partially sparse layout adds one
//! shared region where every source has a bump.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::model::{MixingMatrix, ModelError, SignalMatrix, SignalRole};

/// Identifies the noise generator recorded in reports.
pub const NOISE_RNG_ID: &str = "chacha8/normal-ziggurat";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("windows {0:?} and {1:?} overlap")]
    OverlappingWindows(Window, Window),
    #[error("window {window:?} does not fit in {samples} samples")]
    WindowOutOfRange { window: Window, samples: usize },
    #[error("source {0} has no window of its own")]
    NoSoloWindow(usize),
    #[error("source {0} has no windows")]
    EmptySource(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mixing matrix is singular")]
    SingularMixing,
    #[error("noise standard deviation must be finite and non-negative, got {0}")]
    BadNoise(f64),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Inclusive sample range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "window start after end");
        Self { start, end }
    }

    pub fn overlaps(&self, other: &Window) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.start..=self.end).contains(&n)
    }
}

/// Where one source is active and how tall its bumps are.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceLayout {
    pub windows: Vec<Window>,
    pub amplitude: f64,
}

impl SourceLayout {
    pub fn new(windows: Vec<Window>, amplitude: f64) -> Self {
        Self { windows, amplitude }
    }
}

/// Bump shape shared by all generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    /// Each bump's amplitude is scaled by `1 + jitter * u`, `u ~ U(-1, 1)`.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for PulseParams {
    fn default() -> Self {
        Self {
            jitter: 0.0,
            seed: 0,
        }
    }
}

/// Adds `amplitude * (1 - cos)/2` over `window`; zero at both ends.
fn add_bump(row: &mut [f64], window: Window, amplitude: f64) {
    let len = window.end - window.start;
    if len == 0 {
        return;
    }
    for n in window.start..=window.end {
        let phase = std::f64::consts::TAU * (n - window.start) as f64 / len as f64;
        row[n] += amplitude * 0.5 * (1.0 - phase.cos());
    }
}

fn check_disjoint(windows: &[Window], samples: usize) -> Result<(), DataError> {
    for (i, a) in windows.iter().enumerate() {
        if a.end >= samples {
            return Err(DataError::WindowOutOfRange { window: *a, samples });
        }
        if let Some(b) = windows[i + 1..].iter().find(|b| a.overlaps(b)) {
            return Err(DataError::OverlappingWindows(*a, *b));
        }
    }
    Ok(())
}

fn bump_amplitude(base: f64, params: &PulseParams, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random_range(-1.0..=1.0);
    base * (1.0 + params.jitter * u)
}

/// Sources that are each nonzero only inside their own windows.
pub fn gen_completely_sparse(
    samples: usize,
    layouts: &[SourceLayout],
    params: PulseParams,
) -> Result<SignalMatrix, DataError> {
    let all: Vec<Window> = layouts.iter().flat_map(|l| l.windows.iter().copied()).collect();
    check_disjoint(&all, samples)?;
    if let Some(p) = layouts.iter().position(|l| l.windows.is_empty()) {
        return Err(DataError::EmptySource(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut data = Array2::<f64>::zeros((layouts.len(), samples));
    for (p, layout) in layouts.iter().enumerate() {
        let row = data.row_mut(p).into_slice().expect("standard layout");
        for &w in &layout.windows {
            add_bump(row, w, bump_amplitude(layout.amplitude, &params, &mut rng));
        }
    }
    Ok(SignalMatrix::new(data, SignalRole::Sources)?)
}

/// Like [`gen_completely_sparse`], plus one `overlap` region where every
/// source has a bump.
///
/// Inside the overlap, source `p` of `N` spans the first
/// `1 - p / (2N)` of the region, so the bumps coincide near the start
/// without being proportional to each other.
pub fn gen_partially_sparse(
    samples: usize,
    layouts: &[SourceLayout],
    overlap: Window,
    params: PulseParams,
) -> Result<SignalMatrix, DataError> {
    if let Some(p) = layouts.iter().position(|l| l.windows.is_empty()) {
        return Err(DataError::NoSoloWindow(p));
    }
    let mut all: Vec<Window> = vec![overlap];
    all.extend(layouts.iter().flat_map(|l| l.windows.iter().copied()));
    check_disjoint(&all, samples)?;

    let n = layouts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut data = Array2::<f64>::zeros((n, samples));
    for (p, layout) in layouts.iter().enumerate() {
        let row = data.row_mut(p).into_slice().expect("standard layout");
        let span = overlap.end - overlap.start;
        let shrink = (span * p) / (2 * n);
        let shared = Window::new(overlap.start, overlap.end - shrink);
        add_bump(row, shared, bump_amplitude(layout.amplitude, &params, &mut rng));
        for &w in &layout.windows {
            add_bump(row, w, bump_amplitude(layout.amplitude, &params, &mut rng));
        }
    }
    Ok(SignalMatrix::new(data, SignalRole::Sources)?)
}

/// `Z = A S`.
pub fn mix(sources: &SignalMatrix, mixing: &MixingMatrix) -> Result<SignalMatrix, DataError> {
    if mixing.dim() != sources.channels() {
        return Err(DataError::DimensionMismatch {
            expected: sources.channels(),
            got: mixing.dim(),
        });
    }
    if mixing.is_singular() {
        return Err(DataError::SingularMixing);
    }
    Ok(SignalMatrix::new(
        mixing.entries().dot(sources.data()),
        SignalRole::Mixtures,
    )?)
}

/// Adds i.i.d. `N(0, sd²)` noise drawn from a generator seeded with `seed`.
pub fn add_noise(z: &SignalMatrix, sd: f64, seed: u64) -> Result<SignalMatrix, DataError> {
    add_noise_with(z, sd, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// As [`add_noise`] with a caller-supplied generator. Draws nothing when
/// `sd` is zero.
pub fn add_noise_with<R: Rng>(
    z: &SignalMatrix,
    sd: f64,
    rng: &mut R,
) -> Result<SignalMatrix, DataError> {
    if !(sd >= 0.0 && sd.is_finite()) {
        return Err(DataError::BadNoise(sd));
    }
    if sd == 0.0 {
        return Ok(z.clone());
    }
    let normal = Normal::new(0.0, sd).map_err(|_| DataError::BadNoise(sd))?;
    let mut data = z.data().clone();
    data.iter_mut().for_each(|x| *x += normal.sample(rng));
    Ok(SignalMatrix::new(data, z.role())?)
}

/// Clean sources, a mixing matrix and a noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub sources: SignalMatrix,
    pub mixing: MixingMatrix,
    pub noise_sd: f64,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        sources: SignalMatrix,
        mixing: MixingMatrix,
        noise_sd: f64,
    ) -> Result<Self, DataError> {
        if mixing.dim() != sources.channels() {
            return Err(DataError::DimensionMismatch {
                expected: sources.channels(),
                got: mixing.dim(),
            });
        }
        if mixing.is_singular() {
            return Err(DataError::SingularMixing);
        }
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
            return Err(DataError::BadNoise(noise_sd));
        }
        Ok(Self {
            name: name.into(),
            sources,
            mixing,
            noise_sd,
        })
    }

    /// Names accepted by [`Scenario::by_name`].
    pub const PRESETS: [&'static str; 2] = ["sparse-pure", "sparse-partial"];

    pub fn by_name(name: &str) -> Result<Self, DataError> {
        match name {
            "sparse-pure" => Ok(Self::sparse_pure()),
            "sparse-partial" => Ok(Self::sparse_partial()),
            other => Err(DataError::UnknownScenario(other.to_string())),
        }
    }

    /// Two trains of narrow pulses with disjoint supports, mixed by
    /// `[[1.3, 2], [1, 3]]`. Source 1 has ten unit pulses over samples
    /// 60..160; source 2 has five pulses of height 0.2 over samples 3..37.
    /// Noise sd 0.005.
    ///
    /// Pulses span a few samples so that velocities stand well above the
    /// noise at high thresholds.
    pub fn sparse_pure() -> Self {
        let train = |start: usize, width: usize, gap: usize, count: usize| -> Vec<Window> {
            (0..count)
                .map(|k| {
                    let s = start + k * (width + gap);
                    Window::new(s, s + width)
                })
                .collect()
        };
        let layouts = [
            SourceLayout::new(train(60, 6, 4, 10), 1.0),
            SourceLayout::new(train(3, 4, 3, 5), 0.2),
        ];
        let sources = gen_completely_sparse(200, &layouts, PulseParams::default())
            .expect("preset layout is valid");
        let mixing =
            MixingMatrix::from_rows(&[vec![1.3, 2.0], vec![1.0, 3.0]]).expect("2x2 matrix");
        Self::new("sparse-pure", sources, mixing, 0.005).expect("preset is valid")
    }

    /// Two sources sharing a bump in `[0, 50]`, with solo bumps centred
    /// near samples 276 (source 1) and 198 and 370 (source 2), mixed by
    /// `[[6.5, 1], [3, 1]]`. Noise sd 0.05.
    pub fn sparse_partial() -> Self {
        let layouts = [
            SourceLayout::new(vec![Window::new(264, 288)], 1.0),
            SourceLayout::new(vec![Window::new(186, 210), Window::new(358, 382)], 1.0),
        ];
        let sources =
            gen_partially_sparse(400, &layouts, Window::new(0, 50), PulseParams::default())
                .expect("preset layout is valid");
        let mixing =
            MixingMatrix::from_rows(&[vec![6.5, 1.0], vec![3.0, 1.0]]).expect("2x2 matrix");
        Self::new("sparse-partial", sources, mixing, 0.05).expect("preset is valid")
    }

    pub fn with_noise_sd(mut self, sd: f64) -> Result<Self, DataError> {
        if !(sd >= 0.0 && sd.is_finite()) {
            return Err(DataError::BadNoise(sd));
        }
        self.noise_sd = sd;
        Ok(self)
    }

    pub fn clean_mixtures(&self) -> Result<SignalMatrix, DataError> {
        mix(&self.sources, &self.mixing)
    }

    pub fn noisy_mixtures<R: Rng>(&self, rng: &mut R) -> Result<SignalMatrix, DataError> {
        add_noise_with(&self.clean_mixtures()?, self.noise_sd, rng)
    }
}
