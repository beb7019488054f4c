//! Brute-force reference implementations used as test oracles. Each one is
//! deliberately written differently from the library code it checks.

#![allow(dead_code)]

use std::collections::VecDeque;

use shapeclass::learners::Prng;
use shapeclass::{BinaryMask, Region};

/// Exhaustive Otsu scan in exact 128-bit arithmetic.
///
/// With `S` the total intensity sum and `N` the pixel count, the between-class
/// variance at `t` is proportional to `(N*s0 - S*n0)^2 / (n0 * n1)`. Candidates
/// are compared by cross-multiplication; a later `t` must be strictly better.
/// Valid while `N < 2^20`.
pub fn otsu_oracle(counts: &[u64; 256]) -> Option<u8> {
    let n: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    let s: u128 = counts.iter().enumerate().map(|(v, &c)| v as u128 * u128::from(c)).sum();
    assert!(n < 1 << 20, "oracle range exceeded");
    let (mut n0, mut s0) = (0u128, 0u128);
    let mut best: Option<(u8, u128, u128)> = None;
    for (t, &count) in counts.iter().enumerate() {
        n0 += u128::from(count);
        s0 += t as u128 * u128::from(count);
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (n * s0).abs_diff(s * n0);
        let num = diff * diff;
        let den = n0 * n1;
        match best {
            Some((_, bn, bd)) if num * bd <= bn * den => {}
            _ => best = Some((t as u8, num, den)),
        }
    }
    best.map(|(t, _, _)| t)
}

/// Floating-point between-class variance `w0 * w1 * (mu0 - mu1)^2`.
pub fn between_class_variance(counts: &[u64; 256], t: usize) -> f64 {
    let n: f64 = counts.iter().map(|&c| c as f64).sum();
    let (mut n0, mut s0, mut n1, mut s1) = (0.0, 0.0, 0.0, 0.0);
    for (v, &c) in counts.iter().enumerate() {
        if v <= t {
            n0 += c as f64;
            s0 += v as f64 * c as f64;
        } else {
            n1 += c as f64;
            s1 += v as f64 * c as f64;
        }
    }
    if n0 == 0.0 || n1 == 0.0 {
        return f64::NAN;
    }
    (n0 / n) * (n1 / n) * (s0 / n0 - s1 / n1).powi(2)
}

/// Breadth-first flood-fill labeling: labels follow the row-major position
/// of each component's first pixel.
pub fn bfs_labels(mask: &BinaryMask, eight: bool) -> (Vec<u32>, u32) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let (c, r) = ((p % w) as i64, (p / w) as i64);
            for dr in -1..=1i64 {
                for dc in -1..=1i64 {
                    if (dr == 0 && dc == 0) || (!eight && dr != 0 && dc != 0) {
                        continue;
                    }
                    let (nc, nr) = (c + dc, r + dr);
                    if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                        continue;
                    }
                    let q = nr as usize * w + nc as usize;
                    if mask.bits()[q] && labels[q] == 0 {
                        labels[q] = next;
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    (labels, next)
}

fn orient(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(p: (i64, i64), a: (i64, i64), b: (i64, i64)) -> bool {
    orient(a, b, p) == 0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

fn in_triangle(p: (i64, i64), a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> bool {
    let (d1, d2, d3) = (orient(a, b, p), orient(b, c, p), orient(c, a, p));
    let has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    let has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    !(has_neg && has_pos)
}

/// Lattice points in the convex hull of `points`, without building a hull:
/// in the plane a point lies in the hull iff it lies in a triangle (possibly
/// degenerate) spanned by three of the points. Cubic in `points.len()` per
/// candidate, so only for small inputs.
pub fn hull_lattice_oracle(points: &[(i64, i64)]) -> u64 {
    let min_c = points.iter().map(|p| p.0).min().unwrap();
    let max_c = points.iter().map(|p| p.0).max().unwrap();
    let min_r = points.iter().map(|p| p.1).min().unwrap();
    let max_r = points.iter().map(|p| p.1).max().unwrap();
    let mut count = 0;
    for r in min_r..=max_r {
        for c in min_c..=max_c {
            let p = (c, r);
            let inside = points.iter().enumerate().any(|(i, &a)| {
                a == p
                    || points[i + 1..].iter().enumerate().any(|(j, &b)| {
                        on_segment(p, a, b)
                            || points[i + 1 + j + 1..].iter().any(|&c3| {
                                orient(a, b, c3) != 0 && in_triangle(p, a, b, c3)
                            })
                    })
            });
            count += u64::from(inside);
        }
    }
    count
}

/// Euler number of a binary pattern by bit-quad counting. `pixels` must be
/// nonempty. With 2x2 windows over the padded grid, `q1`/`q3` count windows
/// with one/three set pixels and `qd` the two diagonal patterns.
pub fn euler_bit_quads(pixels: &[(i64, i64)], eight: bool) -> i64 {
    let min_c = pixels.iter().map(|p| p.0).min().unwrap();
    let max_c = pixels.iter().map(|p| p.0).max().unwrap();
    let min_r = pixels.iter().map(|p| p.1).min().unwrap();
    let max_r = pixels.iter().map(|p| p.1).max().unwrap();
    let w = (max_c - min_c + 3) as usize;
    let h = (max_r - min_r + 3) as usize;
    let mut grid = vec![false; w * h];
    for &(c, r) in pixels {
        grid[(r - min_r + 1) as usize * w + (c - min_c + 1) as usize] = true;
    }
    let (mut q1, mut q3, mut qd) = (0i64, 0i64, 0i64);
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let a = grid[r * w + c];
            let b = grid[r * w + c + 1];
            let d = grid[(r + 1) * w + c];
            let e = grid[(r + 1) * w + c + 1];
            match [a, b, d, e].iter().filter(|&&x| x).count() {
                1 => q1 += 1,
                3 => q3 += 1,
                2 if (a && e) || (b && d) => qd += 1,
                _ => {}
            }
        }
    }
    if eight {
        (q1 - q3 - 2 * qd) / 4
    } else {
        (q1 - q3 + 2 * qd) / 4
    }
}

/// Pixels enclosed by `pixels`: background cells of the padded bounding box
/// not reachable from its border under the background adjacency.
pub fn enclosed_pixel_count(pixels: &[(i64, i64)], bg_eight: bool) -> u64 {
    let min_c = pixels.iter().map(|p| p.0).min().unwrap() - 1;
    let max_c = pixels.iter().map(|p| p.0).max().unwrap() + 1;
    let min_r = pixels.iter().map(|p| p.1).min().unwrap() - 1;
    let max_r = pixels.iter().map(|p| p.1).max().unwrap() + 1;
    let set: std::collections::HashSet<(i64, i64)> = pixels.iter().copied().collect();
    let mut seen = std::collections::HashSet::new();
    let mut stack: Vec<(i64, i64)> = Vec::new();
    for c in min_c..=max_c {
        stack.push((c, min_r));
        stack.push((c, max_r));
    }
    for r in min_r..=max_r {
        stack.push((min_c, r));
        stack.push((max_c, r));
    }
    while let Some(p) = stack.pop() {
        if p.0 < min_c || p.0 > max_c || p.1 < min_r || p.1 > max_r || set.contains(&p) || !seen.insert(p) {
            continue;
        }
        for dr in -1..=1 {
            for dc in -1..=1 {
                if (dr != 0 || dc != 0) && (bg_eight || dr == 0 || dc == 0) {
                    stack.push((p.0 + dc, p.1 + dr));
                }
            }
        }
    }
    let boxed = ((max_c - min_c + 1) * (max_r - min_r + 1)) as u64;
    boxed - seen.len() as u64 - pixels.len() as u64
}

/// A random `w x h` mask with the given foreground probability.
pub fn random_mask(rng: &mut Prng, w: usize, h: usize, density: f64) -> BinaryMask {
    let bits = (0..w * h).map(|_| rng.next_f64() < density).collect();
    BinaryMask::from_bits(w, h, bits).unwrap()
}

/// A random 8-connected region: the largest component of a random mask.
pub fn random_region(rng: &mut Prng, max_side: usize) -> Region {
    loop {
        let w = 1 + rng.below_usize(max_side);
        let h = 1 + rng.below_usize(max_side);
        let density = rng.uniform(0.3, 0.9);
        let mask = random_mask(rng, w, h, density);
        let map = shapeclass::label_components(&mask, shapeclass::Connectivity::Eight);
        if let Ok(region) = shapeclass::labeling::largest_component(&map) {
            return region;
        }
    }
}

/// A random 256-bin histogram with at least two occupied levels.
pub fn random_histogram(rng: &mut Prng) -> [u64; 256] {
    loop {
        let mut counts = [0u64; 256];
        let occupied = 2 + rng.below_usize(40);
        let max_count = 1 + rng.below(2000);
        for _ in 0..occupied {
            counts[rng.below_usize(256)] += 1 + rng.below(max_count);
        }
        if counts.iter().filter(|&&c| c > 0).count() >= 2 {
            return counts;
        }
    }
}
