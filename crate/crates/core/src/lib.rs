//! Extraction of sparse and partially sparse sources from linear mixtures.
//!
//! Mixtures are whitened with Gram–Schmidt, turned into unit "headings"
//! (normalized differences of consecutive phase-space points), and one
//! source direction at a time is detected, projected out and subtracted.
//! Three detectors are provided:
//!
//! * [`detect::mhc_detect`]: closest pair of time-adjacent headings;
//! * [`detect::global1_detect`]: threshold clustering of sorted heading
//!   components with magnitude-weighted averaging;
//! * [`detect::global2_detect`]: smallest sorted-neighbor difference, no
//!   clustering threshold.
//!
//! A deflationary FastICA ([`fastica`]) is included as a baseline, and
//! [`evalkit`] holds the matching, RMS-curve and Monte Carlo machinery used
//! to compare them.
//!
//! ```
//! use sparsesep::datagen::Scenario;
//! use sparsesep::deflate::{separate, SeparateConfig};
//! use sparsesep::detect::DetectorConfig;
//!
//! let scenario = Scenario::sparse_pure();
//! let mixtures = scenario.clean_mixtures().unwrap();
//! let config = SeparateConfig { vth: 0.1, detector: DetectorConfig::Global2 };
//! let result = separate(&mixtures, &config).unwrap();
//! assert_eq!(result.extracted, 2);
//! ```

pub mod csvio;
pub mod datagen;
pub mod deflate;
pub mod detect;
pub mod evalkit;
pub mod fastica;
pub mod model;
pub mod preprocess;

pub use deflate::{separate, SeparateConfig};
pub use detect::DetectorConfig;
pub use model::{
    Detector, HeadingSet, MixingMatrix, PrincipalHeading, SeparationResult, SignalMatrix,
    SignalRole, VelocityField, WhiteningMatrix,
};
