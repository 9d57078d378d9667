#![allow(dead_code)]

use shape_msr::phantoms::{make_primitive, Primitive};
use shape_msr::{GridGeometry, ScalarGrid, Vec3};

/// Cube grid of `n` nodes per axis with `h = 1` and origin 0.
pub fn cube(n: usize) -> GridGeometry {
    GridGeometry::cube(n, 1.0).unwrap()
}

pub fn mid(g: &GridGeometry) -> Vec3 {
    (g.origin() + g.max_corner()) / 2.0
}

pub fn sphere(g: GridGeometry, center: Vec3, radius: f64) -> ScalarGrid {
    make_primitive(&Primitive::Sphere { center, radius }, g).unwrap()
}

pub fn bumpy(g: GridGeometry, center: Vec3, radius: f64, amplitude: f64, frequency: u32) -> ScalarGrid {
    make_primitive(
        &Primitive::BumpySphere {
            center,
            radius,
            amplitude,
            frequency,
        },
        g,
    )
    .unwrap()
}

pub fn bumpy_radius(radius: f64, amplitude: f64, frequency: u32, theta: f64, polar: f64) -> f64 {
    let k = frequency as f64;
    radius * (1.0 + amplitude * (k * theta).cos() * (k * polar).sin())
}

/// Dense parametric triangulation of a star-shaped surface `r(θ, ϑ)` about `c`.
pub fn star_mesh(c: Vec3, r: impl Fn(f64, f64) -> f64, nt: usize, np: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    use std::f64::consts::PI;
    let mut verts = Vec::new();
    for j in 0..=np {
        let polar = PI * j as f64 / np as f64;
        for i in 0..nt {
            let theta = 2.0 * PI * i as f64 / nt as f64;
            let d = Vec3::new(polar.sin() * theta.cos(), polar.sin() * theta.sin(), polar.cos());
            verts.push(c + d * r(theta, polar));
        }
    }
    let id = |i: usize, j: usize| j * nt + (i % nt);
    let mut tris = Vec::new();
    for j in 0..np {
        for i in 0..nt {
            tris.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    (verts, tris)
}

pub fn mesh_area(verts: &[Vec3], tris: &[[usize; 3]]) -> f64 {
    tris.iter()
        .map(|t| 0.5 * (verts[t[1]] - verts[t[0]]).cross(&(verts[t[2]] - verts[t[0]])).norm())
        .sum()
}

/// Symmetric Hausdorff distance of two point sets by all-pairs search.
pub fn brute_hausdorff(a: &[Vec3], b: &[Vec3]) -> f64 {
    let directed = |x: &[Vec3], y: &[Vec3]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Equivalent sphere radius from the enclosed volume.
pub fn volume_radius(v: f64) -> f64 {
    (3.0 * v / (4.0 * std::f64::consts::PI)).cbrt()
}

/// Smooth-indicator weighted centroid of the inside set.
pub fn centroid(phi: &ScalarGrid) -> Vec3 {
    let g = phi.geometry();
    let h = g.spacing();
    let mut m = 0.0;
    let mut s = Vec3::zeros();
    for (idx, &v) in phi.values().iter().enumerate() {
        let w = shape_msr::field::smeared_heaviside(-v, h);
        m += w;
        s += g.position_of(idx) * w;
    }
    s / m
}

/// Exhaustive threshold search: the volume error of the best `λ` among all
/// distinct values of `χ̄` and one value below the minimum.
pub fn scan_threshold_error(chi: &ScalarGrid, v0: f64) -> f64 {
    let dv = chi.geometry().voxel_volume();
    let mut vals = chi.values().to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = vals.len();
    // Choosing λ = vals[i] keeps the n - 1 - i' values strictly above it,
    // where i' is the last index holding the same value.
    let mut best = ((n as f64) * dv - v0).abs();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && vals[j + 1] == vals[i] {
            j += 1;
        }
        let above = (n - 1 - j) as f64 * dv;
        best = best.min((above - v0).abs());
        i = j + 1;
    }
    best
}

/// Number of band voxels whose extended vector differs from the vector of the
/// nearest base point found by linear search (ties to the lower index).
pub fn extension_mismatches(
    ext: &shape_msr::VectorGrid,
    phi: &ScalarGrid,
    points: &[Vec3],
    vectors: &[Vec3],
    band: f64,
) -> usize {
    let g = phi.geometry();
    let mut bad = 0;
    for idx in 0..g.len() {
        let got = ext.values()[idx];
        if phi.values()[idx].abs() > band {
            if got != Vec3::zeros() {
                bad += 1;
            }
            continue;
        }
        let p = g.position_of(idx);
        let mut best = (f64::INFINITY, 0);
        for (k, q) in points.iter().enumerate() {
            let d = (q - p).norm_squared();
            if d < best.0 {
                best = (d, k);
            }
        }
        if got != vectors[best.1] {
            bad += 1;
        }
    }
    bad
}
