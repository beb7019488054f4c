//! Fixtures shared by the benchmarks.

use shapeclass::pipeline::{feature_dataset, image_features, FeatureRecord};
use shapeclass::synth::{generate_dataset, GenParams, ShapeClass};
use shapeclass::{Connectivity, Dataset, Polarity};

/// Synthetic images with the default generator settings.
pub fn images(per_class: usize) -> shapeclass::synth::SynthDataset {
    generate_dataset(per_class, &GenParams::default())
}

/// Feature table for `per_class` images of each shape.
pub fn features(per_class: usize) -> Dataset {
    let set = images(per_class);
    let records: Vec<FeatureRecord> = set
        .images
        .iter()
        .map(|img| FeatureRecord {
            id: img.filename.clone(),
            class: img.class.to_string(),
            features: image_features(&img.image, Polarity::Minority, Connectivity::Eight)
                .expect("synthetic images always contain a shape"),
        })
        .collect();
    feature_dataset("bench", &ShapeClass::names(), &records).expect("class names come from the generator")
}
