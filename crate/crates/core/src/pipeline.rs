//! Image to feature-vector extraction and feature-table assembly.

use thiserror::Error;

use crate::dataio::{DataError, Dataset};
use crate::labeling::{Connectivity, LabelError};
use crate::raster::{segment, GrayImage, Polarity, ThresholdError};
use crate::shapefeat::{extract_features, FeatureVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Otsu segmentation, labeling, and description of the largest component.
pub fn image_features(
    image: &GrayImage,
    polarity: Polarity,
    connectivity: Connectivity,
) -> Result<FeatureVector, ExtractError> {
    let (_, mask) = segment(image, polarity)?;
    Ok(extract_features(&mask, connectivity)?)
}

/// One row of a feature table.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub id: String,
    pub class: String,
    pub features: FeatureVector,
}

/// Builds a dataset over the eleven shape features. Classes keep the order
/// given in `classes`; every record's class must be listed.
pub fn feature_dataset(
    relation: &str,
    classes: &[String],
    records: &[FeatureRecord],
) -> Result<Dataset, DataError> {
    let mut ds = Dataset::for_features(relation, classes.iter().cloned())?;
    for rec in records {
        let label = classes.iter().position(|c| *c == rec.class).ok_or_else(|| DataError::UnknownClass { class: rec.class.clone() })?;
        ds.push_with_id(rec.id.clone(), rec.features.to_array().to_vec(), label)?;
    }
    Ok(ds)
}
