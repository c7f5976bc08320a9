//! Dataset handling: the labeled-matrix container, CSV ingestion with
//! one-hot encoding, feature normalization, disjoint role splits, and a
//! Gaussian-blob synthesizer for controlled experiments.

pub mod csv;
pub mod dataset;
pub mod normalize;
pub mod split;
pub mod synth;

pub use self::csv::{load_csv, LoadReport};
pub use dataset::LabeledDataset;
pub use normalize::FeatureStats;
pub use split::{six_way_split, SixWaySplit, SplitSizes, SplitSpec, ROLE_NAMES};
pub use synth::{generate_synthetic, SyntheticSpec};
