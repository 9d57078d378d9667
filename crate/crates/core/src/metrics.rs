//! Measurement kit: volume, area, Hausdorff distance, connectivity and detail
//! histograms.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{interpolate, node_gradient, sample_surface, smeared_delta, smeared_heaviside};
use crate::grid::ScalarGrid;
use crate::msr::MultiscaleRecord;
use crate::redistance::{redistance_field_with, RedistanceOptions};

/// Enclosed volume `h³ Σ H(-φ)` with the smeared Heaviside.
pub fn volume(grid: &ScalarGrid) -> f64 {
    let h = grid.spacing();
    grid.values()
        .iter()
        .map(|&v| smeared_heaviside(-v, h))
        .sum::<f64>()
        * h.powi(3)
}

/// Surface area `h³ Σ δ(φ)|∇φ|` with the smeared delta.
pub fn area(grid: &ScalarGrid) -> f64 {
    let geom = *grid.geometry();
    let h = geom.spacing();
    let terms: Vec<f64> = (0..geom.len())
        .into_par_iter()
        .map(|idx| {
            let d = smeared_delta(grid.values()[idx], h);
            if d == 0.0 {
                return 0.0;
            }
            let [i, j, k] = geom.coords(idx);
            d * node_gradient(grid, i, j, k).norm()
        })
        .collect();
    terms.iter().sum::<f64>() * h.powi(3)
}

/// `area³ / volume²`; equals 36π for a sphere and exceeds it otherwise.
pub fn isoperimetric_ratio(grid: &ScalarGrid) -> f64 {
    let a = area(grid);
    let v = volume(grid);
    a.powi(3) / (v * v)
}

/// Band used when distance fields are rebuilt for Hausdorff estimation, in cells.
pub const HAUSDORFF_BAND_CELLS: f64 = 16.0;

/// Symmetric Hausdorff distance between two zero level sets: dense samples of
/// each surface are evaluated against the other's signed distance field.
pub fn hausdorff(a: &ScalarGrid, b: &ScalarGrid) -> Result<f64> {
    if !a.geometry().same_geometry(b.geometry()) {
        return Err(Error::InvalidParameter(
            "hausdorff needs grids with identical geometry".into(),
        ));
    }
    let opts = RedistanceOptions {
        band_cells: HAUSDORFF_BAND_CELLS,
        ..RedistanceOptions::default()
    };
    let da = redistance_field_with(a, opts)?;
    let db = redistance_field_with(b, opts)?;
    Ok(directed(&da, &db)?.max(directed(&db, &da)?))
}

fn directed(from: &ScalarGrid, to: &ScalarGrid) -> Result<f64> {
    let samples = sample_surface(from, 0.0)?;
    Ok(samples
        .points
        .par_iter()
        .filter_map(|p| interpolate(to, p).ok())
        .map(f64::abs)
        .reduce(|| 0.0, f64::max))
}

/// Number of 6-connected components of the inside set `{φ < 0}`.
pub fn connected_components(grid: &ScalarGrid) -> usize {
    let inside: Vec<bool> = grid.values().iter().map(|&v| v < 0.0).collect();
    count_components(grid.geometry(), &inside)
}

pub fn count_components(geom: &crate::grid::GridGeometry, member: &[bool]) -> usize {
    let mut seen = vec![false; member.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..member.len() {
        if !member[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            for n in geom.neighbors6(idx) {
                if member[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// One `bin_center count` line per bin.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (c, n) in self.centers().iter().zip(&self.counts) {
            let _ = writeln!(s, "{c} {n}");
        }
        s
    }
}

/// Histogram of signed details at `level` (1-based) over the symmetric range
/// `[-max|w|, max|w|]`.
pub fn detail_histogram(rec: &MultiscaleRecord, level: usize, bins: usize) -> Result<Histogram> {
    if level == 0 || level > rec.levels.len() {
        return Err(Error::InvalidParameter(format!(
            "level {level} outside 1..={}",
            rec.levels.len()
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive".into()));
    }
    let details = &rec.levels[level - 1].details;
    Ok(histogram_symmetric(details, bins))
}

pub fn histogram_symmetric(values: &[f64], bins: usize) -> Histogram {
    let m = values.iter().map(|w| w.abs()).fold(0.0, f64::max);
    histogram_range(values, bins, if m > 0.0 { m } else { 1.0 })
}

/// Histogram over `[-half_width, half_width]`; values outside land in the end bins.
pub fn histogram_range(values: &[f64], bins: usize, half_width: f64) -> Histogram {
    let m = half_width;
    let edges: Vec<f64> = (0..=bins)
        .map(|b| -m + 2.0 * m * b as f64 / bins as f64)
        .collect();
    let mut counts = vec![0; bins];
    for &w in values {
        let t = ((w + m) / (2.0 * m) * bins as f64).floor() as isize;
        counts[t.clamp(0, bins as isize - 1) as usize] += 1;
    }
    Histogram { edges, counts }
}

/// Fraction of details with `|w| < 0.1 max|w|`; 1 when all details vanish.
pub fn center_mass_fraction(details: &[f64]) -> f64 {
    if details.is_empty() {
        return 1.0;
    }
    let m = details.iter().map(|w| w.abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return 1.0;
    }
    details.iter().filter(|w| w.abs() < 0.1 * m).count() as f64 / details.len() as f64
}
