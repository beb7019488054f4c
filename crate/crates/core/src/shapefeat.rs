//! Region shape descriptors.
//!
//! Eleven features are computed per region, always in this order: area, major
//! and minor axis length, eccentricity, orientation, convex area, filled area,
//! Euler number, equivalent diameter, solidity and extent.
//!
//! Pixels are unit squares centered on integer `(col, row)` coordinates with
//! rows growing downward. Second moments include the `1/12` unit-square term,
//! and the equivalent-ellipse axes use the `2*sqrt(2)` scaling, so values line
//! up with the common image-toolbox conventions.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::labeling::{label_components, largest_component, Connectivity, LabelError};
use crate::raster::BinaryMask;

/// The pixel set of one connected component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pixels: Vec<(i64, i64)>,
    bbox: (i64, i64, i64, i64),
}

impl Region {
    /// Builds a region from `(col, row)` pixels; duplicates are dropped.
    /// Returns `None` for an empty set.
    pub fn new(mut pixels: Vec<(i64, i64)>) -> Option<Self> {
        if pixels.is_empty() {
            return None;
        }
        pixels.sort_unstable_by_key(|&(c, r)| (r, c));
        pixels.dedup();
        let mut bbox = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for &(c, r) in &pixels {
            bbox.0 = bbox.0.min(c);
            bbox.1 = bbox.1.min(r);
            bbox.2 = bbox.2.max(c);
            bbox.3 = bbox.3.max(r);
        }
        Some(Self { pixels, bbox })
    }

    /// Pixels in row-major order.
    pub fn pixels(&self) -> &[(i64, i64)] {
        &self.pixels
    }

    /// `(min_col, min_row, max_col, max_row)`, inclusive.
    pub fn bbox(&self) -> (i64, i64, i64, i64) {
        self.bbox
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn bbox_width(&self) -> i64 {
        self.bbox.2 - self.bbox.0 + 1
    }

    pub fn bbox_height(&self) -> i64 {
        self.bbox.3 - self.bbox.1 + 1
    }

    pub fn translated(&self, dc: i64, dr: i64) -> Self {
        Self::new(self.pixels.iter().map(|&(c, r)| (c + dc, r + dr)).collect())
            .expect("translation keeps the region nonempty")
    }

    /// Quarter turn: `(col, row) -> (row, -col)`.
    pub fn rotated_90(&self) -> Self {
        Self::new(self.pixels.iter().map(|&(c, r)| (r, -c)).collect())
            .expect("rotation keeps the region nonempty")
    }
}

/// Centroid and normalized second central moments (unit-square corrected).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralMoments {
    pub n: usize,
    pub cx: f64,
    pub cy: f64,
    pub uxx: f64,
    pub uyy: f64,
    pub uxy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseFeatures {
    pub major_axis_length: f64,
    pub minor_axis_length: f64,
    pub eccentricity: f64,
    /// Degrees in `(-90, 90]`, counter-clockwise from the x axis with y up.
    pub orientation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexFeatures {
    pub convex_area: u64,
    pub solidity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TopologyFeatures {
    pub filled_area: u64,
    pub euler_number: i64,
    pub hole_count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarFeatures {
    pub area: u64,
    pub equiv_diameter: f64,
    pub extent: f64,
}

/// The eleven descriptors of one region, in their fixed interchange order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub area: f64,
    pub major_axis_length: f64,
    pub minor_axis_length: f64,
    pub eccentricity: f64,
    pub orientation: f64,
    pub convex_area: f64,
    pub filled_area: f64,
    pub euler_number: f64,
    pub equiv_diameter: f64,
    pub solidity: f64,
    pub extent: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 11] = [
        "area",
        "major_axis_length",
        "minor_axis_length",
        "eccentricity",
        "orientation",
        "convex_area",
        "filled_area",
        "euler_number",
        "equiv_diameter",
        "solidity",
        "extent",
    ];

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.area,
            self.major_axis_length,
            self.minor_axis_length,
            self.eccentricity,
            self.orientation,
            self.convex_area,
            self.filled_area,
            self.euler_number,
            self.equiv_diameter,
            self.solidity,
            self.extent,
        ]
    }

    pub fn from_array(v: [f64; 11]) -> Self {
        Self {
            area: v[0],
            major_axis_length: v[1],
            minor_axis_length: v[2],
            eccentricity: v[3],
            orientation: v[4],
            convex_area: v[5],
            filled_area: v[6],
            euler_number: v[7],
            equiv_diameter: v[8],
            solidity: v[9],
            extent: v[10],
        }
    }
}

/// Second moments from exact integer sums taken relative to the bounding-box
/// corner: `n * sum(d^2) - sum(d)^2` is unchanged by translation and
/// reflection, so those symmetries hold bit for bit.
pub fn central_moments(region: &Region) -> CentralMoments {
    let n = region.area() as i128;
    let (min_c, min_r, _, _) = region.bbox;
    let (mut sc, mut sr, mut scc, mut srr, mut scr) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for &(c, r) in &region.pixels {
        let (dc, dr) = (i128::from(c - min_c), i128::from(r - min_r));
        sc += dc;
        sr += dr;
        scc += dc * dc;
        srr += dr * dr;
        scr += dc * dr;
    }
    let n2 = (n * n) as f64;
    CentralMoments {
        n: region.area(),
        cx: min_c as f64 + sc as f64 / n as f64,
        cy: min_r as f64 + sr as f64 / n as f64,
        uxx: (n * scc - sc * sc) as f64 / n2 + 1.0 / 12.0,
        uyy: (n * srr - sr * sr) as f64 / n2 + 1.0 / 12.0,
        uxy: (n * scr - sc * sr) as f64 / n2,
    }
}

/// Axes, eccentricity and orientation of the ellipse with the same second
/// moments as the region.
pub fn ellipse_features(m: &CentralMoments) -> EllipseFeatures {
    let diff = m.uxx - m.uyy;
    let common = ((diff * diff) + 4.0 * m.uxy * m.uxy).sqrt();
    let scale = 2.0 * 2f64.sqrt();
    let major = scale * (m.uxx + m.uyy + common).sqrt();
    let minor = scale * (m.uxx + m.uyy - common).max(0.0).sqrt();
    let eccentricity = if major > 0.0 {
        (1.0 - (minor / major).powi(2)).max(0.0).sqrt()
    } else {
        0.0
    };

    let orientation = if m.uxy == 0.0 && diff == 0.0 {
        0.0
    } else {
        // Rows grow downward; negating uxy gives the y-up angle.
        let mut deg = 0.5 * (-2.0 * m.uxy).atan2(diff).to_degrees();
        if deg <= -90.0 {
            deg += 180.0;
        }
        if deg > 90.0 {
            deg -= 180.0;
        }
        deg + 0.0
    };
    EllipseFeatures {
        major_axis_length: major,
        minor_axis_length: minor,
        eccentricity,
        orientation,
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of integer points by monotone chain, counter-clockwise in
/// (x, y) with collinear points removed. Degenerate inputs yield one or two
/// vertices.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    // The upper chain must not pop into the finished lower chain.
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Lattice points inside or on a convex polygon with integer vertices.
///
/// Pick's theorem gives `interior + boundary = area + boundary/2 + 1`; both
/// sides are kept doubled so everything stays in integers. A segment hull
/// (two vertices) reduces to `gcd(dx, dy) + 1`, a point to 1.
pub fn lattice_points_in_hull(hull: &[(i64, i64)]) -> u64 {
    match hull.len() {
        0 => 0,
        1 => 1,
        _ => {
            let mut twice_area = 0i64;
            let mut boundary = 0i64;
            for (i, &a) in hull.iter().enumerate() {
                let b = hull[(i + 1) % hull.len()];
                twice_area += a.0 * b.1 - b.0 * a.1;
                boundary += gcd(b.0 - a.0, b.1 - a.1);
            }
            if hull.len() == 2 {
                // Both directed edges were counted.
                boundary /= 2;
                return (boundary + 1) as u64;
            }
            ((twice_area.abs() + boundary) / 2 + 1) as u64
        }
    }
}

pub fn convex_features(region: &Region) -> ConvexFeatures {
    let hull = convex_hull(&region.pixels);
    let convex_area = lattice_points_in_hull(&hull);
    ConvexFeatures {
        convex_area,
        solidity: region.area() as f64 / convex_area as f64,
    }
}

const FOUR_STEPS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const EIGHT_STEPS: [(i64, i64); 8] =
    [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

fn steps(conn: Connectivity) -> &'static [(i64, i64)] {
    match conn {
        Connectivity::Four => &FOUR_STEPS,
        Connectivity::Eight => &EIGHT_STEPS,
    }
}

/// Holes are background pixels that the dual-connectivity flood fill from a
/// one-pixel ring around the bounding box cannot reach.
pub fn topology_features(region: &Region, fg_connectivity: Connectivity) -> TopologyFeatures {
    let (min_c, min_r, _, _) = region.bbox;
    let w = region.bbox_width() + 2;
    let h = region.bbox_height() + 2;
    let idx = |c: i64, r: i64| (r * w + c) as usize;

    // 0 = background, 1 = region, 2 = reached from outside
    let mut grid = vec![0u8; (w * h) as usize];
    for &(c, r) in &region.pixels {
        grid[idx(c - min_c + 1, r - min_r + 1)] = 1;
    }
    let bg_steps = steps(fg_connectivity.dual());
    let mut queue = VecDeque::new();
    grid[0] = 2;
    queue.push_back((0i64, 0i64));
    while let Some((c, r)) = queue.pop_front() {
        for &(dc, dr) in bg_steps {
            let (nc, nr) = (c + dc, r + dr);
            if nc < 0 || nr < 0 || nc >= w || nr >= h {
                continue;
            }
            let k = idx(nc, nr);
            if grid[k] == 0 {
                grid[k] = 2;
                queue.push_back((nc, nr));
            }
        }
    }

    let mut hole_pixels = 0u64;
    let mut hole_count = 0u64;
    for start in 0..grid.len() {
        if grid[start] != 0 {
            continue;
        }
        hole_count += 1;
        grid[start] = 3;
        queue.push_back((start as i64 % w, start as i64 / w));
        while let Some((c, r)) = queue.pop_front() {
            hole_pixels += 1;
            for &(dc, dr) in bg_steps {
                let (nc, nr) = (c + dc, r + dr);
                // Holes never touch the outer ring, so neighbors stay in bounds.
                let k = idx(nc, nr);
                if grid[k] == 0 {
                    grid[k] = 3;
                    queue.push_back((nc, nr));
                }
            }
        }
    }
    TopologyFeatures {
        filled_area: region.area() as u64 + hole_pixels,
        euler_number: 1 - hole_count as i64,
        hole_count,
    }
}

pub fn scalar_features(region: &Region) -> ScalarFeatures {
    let area = region.area() as u64;
    let af = area as f64;
    ScalarFeatures {
        area,
        equiv_diameter: (4.0 * af / PI).sqrt(),
        extent: af / (region.bbox_width() * region.bbox_height()) as f64,
    }
}

/// All eleven features of a single region.
pub fn region_features(region: &Region, connectivity: Connectivity) -> FeatureVector {
    let scalar = scalar_features(region);
    let ellipse = ellipse_features(&central_moments(region));
    let convex = convex_features(region);
    let topo = topology_features(region, connectivity);
    FeatureVector {
        area: scalar.area as f64,
        major_axis_length: ellipse.major_axis_length,
        minor_axis_length: ellipse.minor_axis_length,
        eccentricity: ellipse.eccentricity,
        orientation: ellipse.orientation,
        convex_area: convex.convex_area as f64,
        filled_area: topo.filled_area as f64,
        euler_number: topo.euler_number as f64,
        equiv_diameter: scalar.equiv_diameter,
        solidity: convex.solidity,
        extent: scalar.extent,
    }
}

/// Labels the mask, keeps the largest component and describes it.
pub fn extract_features(
    mask: &BinaryMask,
    connectivity: Connectivity,
) -> Result<FeatureVector, LabelError> {
    let map = label_components(mask, connectivity);
    let region = largest_component(&map)?;
    Ok(region_features(&region, connectivity))
}
