//! Deterministic synthetic single-object images in five shape classes.
//!
//! Each image shows one dark shape on a light background. Shape parameters
//! and boundary jitter come from the `"synth"` PRNG stream indexed by the
//! image number, so any image can be regenerated on its own.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::learners::Prng;
use crate::raster::GrayImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    Disk,
    Rectangle,
    Ellipse,
    Ring,
    Cross,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 5] =
        [ShapeClass::Disk, ShapeClass::Rectangle, ShapeClass::Ellipse, ShapeClass::Ring, ShapeClass::Cross];

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Disk => "disk",
            ShapeClass::Rectangle => "rectangle",
            ShapeClass::Ellipse => "ellipse",
            ShapeClass::Ring => "ring",
            ShapeClass::Cross => "cross",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn names() -> Vec<String> {
        Self::ALL.iter().map(|c| c.name().to_owned()).collect()
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ShapeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown shape class `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub width: usize,
    pub height: usize,
    /// Bounding radius as a fraction of the usable half-extent.
    pub scale_min: f64,
    pub scale_max: f64,
    /// Rotation range in degrees.
    pub rotation_min: f64,
    pub rotation_max: f64,
    /// Maximum boundary displacement in pixels.
    pub jitter: f64,
    pub background: u8,
    pub foreground: u8,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            scale_min: 0.3,
            scale_max: 0.8,
            rotation_min: 0.0,
            rotation_max: 180.0,
            jitter: 0.5,
            background: 255,
            foreground: 40,
            seed: 42,
        }
    }
}

/// Clear space kept between a shape's outermost possible pixel and the border.
pub const MARGIN: f64 = 2.0;

impl GenParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.width < 16 || self.height < 16 {
            return Err(format!("image must be at least 16x16, got {}x{}", self.width, self.height));
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max && self.scale_max <= 1.0) {
            return Err(format!("scale range {}..{} must lie in (0, 1]", self.scale_min, self.scale_max));
        }
        if !(self.rotation_min.is_finite() && self.rotation_max.is_finite() && self.rotation_min <= self.rotation_max) {
            return Err("rotation range is invalid".into());
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(format!("jitter must be non-negative, got {}", self.jitter));
        }
        if self.usable_radius() < 4.0 {
            return Err(format!("jitter {} leaves no room for a shape", self.jitter));
        }
        if self.background == self.foreground {
            return Err("background and foreground intensities must differ".into());
        }
        Ok(())
    }

    /// Largest bounding radius a shape may have.
    ///
    /// The jitter allowance is at least two pixels, which also keeps every
    /// shape well under half the image area so the object is the minority
    /// class after thresholding.
    pub fn usable_radius(&self) -> f64 {
        self.width.min(self.height) as f64 / 2.0 - MARGIN - self.jitter.max(2.0)
    }
}

/// Geometry of one rendered shape, in pixel coordinates (pixel `(c, r)` has
/// its center at `(c + 0.5, r + 0.5)`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeInstance {
    pub class: ShapeClass,
    pub center: (f64, f64),
    /// Radius of the circle enclosing the unjittered shape.
    pub radius: f64,
    /// Minor-to-major ratio for rectangles and ellipses; inner-to-outer for
    /// rings; arm half-width to arm length for crosses.
    pub aspect: f64,
    pub rotation_deg: f64,
}

/// Periodic boundary displacement `amplitude * sum_h w_h sin(h*theta + phase_h)`
/// with weights summing to 1, so it never exceeds `amplitude`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jitter {
    amplitude: f64,
    harmonics: Vec<(f64, f64, f64)>,
}

impl Jitter {
    pub fn none() -> Self {
        Self { amplitude: 0.0, harmonics: Vec::new() }
    }

    pub fn random(amplitude: f64, rng: &mut Prng) -> Self {
        let raw: Vec<(f64, f64, f64)> =
            (2..=5).map(|h| (f64::from(h), rng.uniform(0.2, 1.0), rng.uniform(0.0, 2.0 * PI))).collect();
        let total: f64 = raw.iter().map(|&(_, w, _)| w).sum();
        let harmonics = raw.into_iter().map(|(h, w, p)| (h, w / total, p)).collect();
        Self { amplitude, harmonics }
    }

    pub fn at(&self, theta: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * self.harmonics.iter().map(|&(h, w, p)| w * (h * theta + p).sin()).sum::<f64>()
    }
}

fn box_sdf(x: f64, y: f64, hx: f64, hy: f64) -> f64 {
    let (dx, dy) = (x.abs() - hx, y.abs() - hy);
    let outside = dx.max(0.0).hypot(dy.max(0.0));
    outside + dx.max(dy).min(0.0)
}

impl ShapeInstance {
    /// Signed distance (negative inside) of a point given in the shape's
    /// local, unrotated frame. Exact except for ellipses, which use a scaled
    /// radial approximation.
    pub fn local_sdf(&self, x: f64, y: f64) -> f64 {
        let r = self.radius;
        match self.class {
            ShapeClass::Disk => x.hypot(y) - r,
            ShapeClass::Ring => {
                let d = x.hypot(y);
                (d - r).max(self.aspect * r - d)
            }
            ShapeClass::Ellipse => {
                let (a, b) = (r, self.aspect * r);
                ((x / a).hypot(y / b) - 1.0) * b
            }
            ShapeClass::Rectangle => {
                let hx = r / (1.0 + self.aspect * self.aspect).sqrt();
                box_sdf(x, y, hx, self.aspect * hx)
            }
            ShapeClass::Cross => {
                let arm = r / (1.0 + self.aspect * self.aspect).sqrt();
                let half_width = self.aspect * arm;
                box_sdf(x, y, arm, half_width).min(box_sdf(x, y, half_width, arm))
            }
        }
    }

    /// Whether the point `(px, py)` (image coordinates, rows pointing down)
    /// is inside the jittered shape.
    pub fn contains(&self, px: f64, py: f64, jitter: &Jitter) -> bool {
        let (dx, dy) = (px - self.center.0, py - self.center.1);
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        // Rotate counter-clockwise as seen on screen (y axis points down).
        let x = c * dx - s * dy;
        let y = s * dx + c * dy;
        self.local_sdf(x, y) <= jitter.at(dy.atan2(dx))
    }
}

/// Draws the shape parameters for image `index`.
///
/// Every class consumes the same number of draws, so the stream layout does
/// not depend on the class.
pub fn sample_instance(class: ShapeClass, params: &GenParams, index: u64) -> (ShapeInstance, Jitter) {
    let mut rng = Prng::stream(params.seed, "synth", index);
    let usable = params.usable_radius();
    let radius = usable * rng.uniform(params.scale_min, params.scale_max);
    let rotation_deg = rng.uniform(params.rotation_min, params.rotation_max);
    let aspect_draw = rng.next_f64();
    let aspect = match class {
        ShapeClass::Disk => 1.0,
        ShapeClass::Rectangle => 0.55 + 0.3 * aspect_draw,
        ShapeClass::Ellipse => 0.3 + 0.2 * aspect_draw,
        ShapeClass::Ring => 0.5,
        ShapeClass::Cross => 0.2 + 0.1 * aspect_draw,
    };
    let slack = usable - radius;
    let cx = params.width as f64 / 2.0 + rng.uniform(-slack, slack);
    let cy = params.height as f64 / 2.0 + rng.uniform(-slack, slack);
    let jitter = Jitter::random(params.jitter, &mut rng);
    (ShapeInstance { class, center: (cx, cy), radius, aspect, rotation_deg }, jitter)
}

/// Renders a shape by testing every pixel center.
pub fn render(shape: &ShapeInstance, jitter: &Jitter, params: &GenParams) -> GrayImage {
    let mut image =
        GrayImage::filled(params.width, params.height, params.background).expect("dimensions are nonzero");
    for r in 0..params.height {
        for c in 0..params.width {
            if shape.contains(c as f64 + 0.5, r as f64 + 0.5, jitter) {
                image.set(c, r, params.foreground);
            }
        }
    }
    image
}

/// Image number `index` of class `class`; deterministic in all arguments.
pub fn generate_image(class: ShapeClass, params: &GenParams, index: u64) -> GrayImage {
    let (shape, jitter) = sample_instance(class, params, index);
    render(&shape, &jitter, params)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedImage {
    pub filename: String,
    pub class: ShapeClass,
    pub index: u64,
    pub image: GrayImage,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthDataset {
    pub images: Vec<GeneratedImage>,
    /// CSV text with header `filename,class`.
    pub manifest: String,
}

/// File name used for image `index`.
pub fn image_filename(class: ShapeClass, index: u64) -> String {
    format!("img{index:05}_{class}.pgm")
}

/// `5 * n_per_class` images, interleaving the classes so that image `index`
/// has class `index mod 5`. A larger set therefore extends a smaller one.
pub fn generate_dataset(n_per_class: usize, params: &GenParams) -> SynthDataset {
    use rayon::prelude::*;
    let total = (n_per_class * ShapeClass::ALL.len()) as u64;
    let images: Vec<GeneratedImage> = (0..total)
        .into_par_iter()
        .map(|index| {
            let class = ShapeClass::ALL[(index % 5) as usize];
            GeneratedImage {
                filename: image_filename(class, index),
                class,
                index,
                image: generate_image(class, params, index),
            }
        })
        .collect();
    let mut manifest = String::from("filename,class\n");
    for img in &images {
        manifest.push_str(&format!("{},{}\n", img.filename, img.class));
    }
    SynthDataset { images, manifest }
}
