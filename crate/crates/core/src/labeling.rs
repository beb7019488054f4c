//! Run-length connected-component labeling.
//!
//! Labeling proceeds in four passes over a run-length encoding of the mask:
//! encode the runs, scan them assigning provisional labels while recording
//! equivalences, resolve the equivalence classes, and relabel compactly.

use thiserror::Error;

use crate::raster::BinaryMask;
use crate::shapefeat::Region;

/// Pixel adjacency used for foreground components.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    /// The adjacency used for background when `self` is used for foreground.
    pub fn dual(self) -> Self {
        match self {
            Connectivity::Four => Connectivity::Eight,
            Connectivity::Eight => Connectivity::Four,
        }
    }

    pub fn as_number(self) -> u8 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum LabelError {
    #[error("mask has no foreground pixels")]
    EmptyMask,
}

/// A maximal horizontal stretch of foreground pixels (`col_end` inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Run {
    pub row: usize,
    pub col_start: usize,
    pub col_end: usize,
    /// Provisional component id, 0 while unassigned.
    pub label: u32,
}

impl Run {
    pub fn len(&self) -> usize {
        self.col_end - self.col_start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Union-find over provisional labels. Label 0 is reserved and never used.
///
/// Unions attach the larger representative under the smaller one, so the
/// representative of a class is always its smallest label.
#[derive(Clone, Debug, Default)]
pub struct EquivalenceTable {
    parent: Vec<u32>,
}

impl EquivalenceTable {
    pub fn new() -> Self {
        Self { parent: vec![0] }
    }

    /// Allocates a fresh provisional label.
    pub fn make_label(&mut self) -> u32 {
        let label = self.parent.len() as u32;
        self.parent.push(label);
        label
    }

    pub fn len(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Merges the classes of `a` and `b`, returning the surviving representative.
    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (keep, drop) = if ra <= rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop as usize] = keep;
        keep
    }
}

/// Final component labeling: 0 is background, components are `1..=count` in
/// order of first appearance in a row-major scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn get(&self, col: usize, row: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Pixel count per label; index 0 holds the background count.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count as usize + 1];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// The pixels carrying `label`, or `None` if the label is absent.
    pub fn region(&self, label: u32) -> Option<Region> {
        if label == 0 || label > self.count {
            return None;
        }
        let pixels = self
            .labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == label)
            .map(|(i, _)| ((i % self.width) as i64, (i / self.width) as i64))
            .collect();
        Region::new(pixels)
    }

    /// Diagnostic rendering: label modulo 255 as gray level.
    pub fn to_debug_image(&self) -> crate::raster::GrayImage {
        let data = self
            .labels
            .iter()
            .map(|&l| if l == 0 { 0 } else { ((l - 1) % 255 + 1) as u8 })
            .collect();
        crate::raster::GrayImage::from_raw(self.width, self.height, data)
            .expect("label map dimensions are valid")
    }
}

pub fn encode_runs(mask: &BinaryMask) -> Vec<Run> {
    let mut runs = Vec::new();
    let width = mask.width();
    for (row, bits) in mask.bits().chunks(width.max(1)).enumerate() {
        let mut col = 0;
        while col < width {
            if !bits[col] {
                col += 1;
                continue;
            }
            let col_start = col;
            while col < width && bits[col] {
                col += 1;
            }
            runs.push(Run { row, col_start, col_end: col - 1, label: 0 });
        }
    }
    runs
}

fn adjacent(upper: &Run, lower: &Run, connectivity: Connectivity) -> bool {
    let slack = match connectivity {
        Connectivity::Four => 0,
        Connectivity::Eight => 1,
    };
    upper.col_start <= lower.col_end + slack && lower.col_start <= upper.col_end + slack
}

pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> LabelMap {
    let mut runs = encode_runs(mask);
    let mut table = EquivalenceTable::new();

    let slack = usize::from(connectivity == Connectivity::Eight);
    // Runs are row-major, so the previous row's runs form one contiguous,
    // column-sorted block `prev_start..prev_end`.
    let (mut prev_start, mut prev_end) = (0, 0);
    let mut i = 0;
    while i < runs.len() {
        let row = runs[i].row;
        let row_start = i;
        while i < runs.len() && runs[i].row == row {
            i += 1;
        }
        if row_start == 0 || runs[row_start - 1].row + 1 != row {
            prev_start = row_start;
            prev_end = row_start;
        }
        let mut window = prev_start;
        for cur in row_start..i {
            let Run { col_start, col_end, .. } = runs[cur];
            // Upper runs ending left of this run cannot reach any later run either.
            while window < prev_end && runs[window].col_end + slack < col_start {
                window += 1;
            }
            let mut assigned = 0u32;
            let mut p = window;
            while p < prev_end && runs[p].col_start <= col_end + slack {
                debug_assert!(adjacent(&runs[p], &runs[cur], connectivity));
                let root = table.find(runs[p].label);
                assigned = if assigned == 0 { root } else { table.union(assigned, root) };
                p += 1;
            }
            runs[cur].label = if assigned == 0 { table.make_label() } else { assigned };
        }
        prev_start = row_start;
        prev_end = i;
    }

    // Resolve classes, then number them in first-encounter order.
    let mut compact = vec![0u32; table.len() + 1];
    let mut count = 0u32;
    let mut labels = vec![0u32; mask.width() * mask.height()];
    for run in &runs {
        let root = table.find(run.label) as usize;
        if compact[root] == 0 {
            count += 1;
            compact[root] = count;
        }
        let base = run.row * mask.width();
        labels[base + run.col_start..=base + run.col_end].fill(compact[root]);
    }
    LabelMap { width: mask.width(), height: mask.height(), labels, count }
}

/// The component with the most pixels; ties go to the lowest label.
pub fn largest_component(map: &LabelMap) -> Result<Region, LabelError> {
    if map.count == 0 {
        return Err(LabelError::EmptyMask);
    }
    let sizes = map.sizes();
    let mut best = 1usize;
    for label in 2..sizes.len() {
        if sizes[label] > sizes[best] {
            best = label;
        }
    }
    Ok(map.region(best as u32).expect("label in range has pixels"))
}
