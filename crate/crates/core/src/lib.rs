//! Single-object shape classification: Otsu segmentation, run-length
//! component labeling, region shape descriptors, tabular data formats,
//! tree-based and Bayesian learners, and cross-validated evaluation.
//!
//! A typical pipeline:
//!
//! ```
//! use shapeclass::{image_features, synth, Connectivity, Polarity};
//!
//! let params = synth::GenParams::default();
//! let image = synth::generate_image(synth::ShapeClass::Ring, &params, 3);
//! let features = image_features(&image, Polarity::Minority, Connectivity::Eight).unwrap();
//! assert_eq!(features.euler_number, 0.0);
//! ```

pub mod dataio;
pub mod eval;
pub mod labeling;
pub mod learners;
pub mod pipeline;
pub mod raster;
pub mod shapefeat;
pub mod synth;

pub use dataio::{Attribute, AttributeKind, Dataset, FoldPlan};
pub use eval::{cross_validate, ConfusionMatrix, EvalReport};
pub use labeling::{label_components, Connectivity, LabelMap};
pub use learners::persist::SavedModel;
pub use learners::{LearnerSpec, Model, Prng};
pub use pipeline::{image_features, ExtractError, FeatureRecord};
pub use raster::{BinaryMask, GrayImage, Histogram256, Polarity};
pub use shapefeat::{FeatureVector, Region};
