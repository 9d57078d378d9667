//! Point queries and differential geometry on level set grids.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ScalarGrid, Vec3};
use crate::mesh::edge_crossings;
use crate::spatial::GrowingHash;

/// Gradient magnitudes below `GRADIENT_FLOOR / h` are treated as degenerate.
pub const GRADIENT_FLOOR: f64 = 1e-6;
/// Curvature is clamped to `±CURVATURE_CLAMP / h`.
pub const CURVATURE_CLAMP: f64 = 2.0;
/// Half-width of the smeared delta and Heaviside, in cells.
pub const SMEAR_WIDTH: f64 = 1.5;
/// Projection tolerance, in cells.
pub const PROJECTION_TOL: f64 = 1e-3;
pub const PROJECTION_MAX_ITER: usize = 20;
/// Curvature is only meaningful this many cells from the zero level set.
pub const CURVATURE_BAND: f64 = 3.0;

#[inline]
pub fn smeared_delta(phi: f64, h: f64) -> f64 {
    let w = SMEAR_WIDTH * h;
    if phi.abs() >= w {
        0.0
    } else {
        (1.0 + (std::f64::consts::PI * phi / w).cos()) / (2.0 * w)
    }
}

/// Smoothed step, 0 for `s <= -w` and 1 for `s >= w`; `H(-phi)` is the inside fraction.
#[inline]
pub fn smeared_heaviside(s: f64, h: f64) -> f64 {
    use std::f64::consts::PI;
    let w = SMEAR_WIDTH * h;
    if s <= -w {
        0.0
    } else if s >= w {
        1.0
    } else {
        0.5 * (1.0 + s / w + (PI * s / w).sin() / PI)
    }
}

/// Trilinear interpolation. Errors if `p` lies outside the bounding box.
pub fn interpolate(grid: &ScalarGrid, p: &Vec3) -> Result<f64> {
    let geom = grid.geometry();
    geom.check_inside(p, 0.0)?;
    Ok(trilinear(grid, &geom.to_local(p)))
}

/// Cell index and fractional offset along one axis, kept inside `[0, n-2]`.
#[inline]
fn cell_of(u: f64, n: usize) -> (usize, f64) {
    let i = (u.floor() as isize).clamp(0, n as isize - 2) as usize;
    (i, u - i as f64)
}

#[inline]
fn trilinear(grid: &ScalarGrid, local: &Vec3) -> f64 {
    let [nx, ny, nz] = grid.geometry().dims();
    let (i, fx) = cell_of(local.x, nx);
    let (j, fy) = cell_of(local.y, ny);
    let (k, fz) = cell_of(local.z, nz);
    let g = |a, b, c| grid.get(i + a, j + b, k + c);
    let c00 = g(0, 0, 0) * (1.0 - fx) + g(1, 0, 0) * fx;
    let c10 = g(0, 1, 0) * (1.0 - fx) + g(1, 1, 0) * fx;
    let c01 = g(0, 0, 1) * (1.0 - fx) + g(1, 0, 1) * fx;
    let c11 = g(0, 1, 1) * (1.0 - fx) + g(1, 1, 1) * fx;
    let c0 = c00 * (1.0 - fy) + c10 * fy;
    let c1 = c01 * (1.0 - fy) + c11 * fy;
    c0 * (1.0 - fz) + c1 * fz
}

/// Central-difference gradient at a node, one-sided on the boundary.
#[inline]
pub fn node_gradient(grid: &ScalarGrid, i: usize, j: usize, k: usize) -> Vec3 {
    let geom = grid.geometry();
    let h = geom.spacing();
    let dims = geom.dims();
    let ijk = [i, j, k];
    let mut g = Vec3::zeros();
    for axis in 0..3 {
        let mut lo = ijk;
        let mut hi = ijk;
        let mut span = 2.0;
        if ijk[axis] == 0 {
            span = 1.0;
        } else {
            lo[axis] -= 1;
        }
        if ijk[axis] + 1 == dims[axis] {
            span -= 1.0;
        } else {
            hi[axis] += 1;
        }
        g[axis] = (grid.get(hi[0], hi[1], hi[2]) - grid.get(lo[0], lo[1], lo[2])) / (span * h);
    }
    g
}

fn gradient_local(grid: &ScalarGrid, local: &Vec3) -> Vec3 {
    let [nx, ny, nz] = grid.geometry().dims();
    let (i, fx) = cell_of(local.x, nx);
    let (j, fy) = cell_of(local.y, ny);
    let (k, fz) = cell_of(local.z, nz);
    let mut g = Vec3::zeros();
    for c in 0..8 {
        let (a, b, d) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
        let w = (if a == 1 { fx } else { 1.0 - fx })
            * (if b == 1 { fy } else { 1.0 - fy })
            * (if d == 1 { fz } else { 1.0 - fz });
        if w != 0.0 {
            g += node_gradient(grid, i + a, j + b, k + d) * w;
        }
    }
    g
}

/// Central-difference gradient interpolated to `p`.
pub fn gradient_at(grid: &ScalarGrid, p: &Vec3) -> Result<Vec3> {
    let geom = grid.geometry();
    geom.check_inside(p, 0.0)?;
    Ok(gradient_local(grid, &geom.to_local(p)))
}

/// Unit normal `∇φ/|∇φ|` at `p`.
pub fn normal_at(grid: &ScalarGrid, p: &Vec3) -> Result<Vec3> {
    let g = gradient_at(grid, p)?;
    let n = g.norm();
    if n < GRADIENT_FLOOR / grid.spacing() {
        return Err(Error::DegenerateGradient(p.x, p.y, p.z));
    }
    Ok(g / n)
}

/// Mean curvature (sum of principal curvatures) with per-node reliability flags.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub values: ScalarGrid,
    /// Set where the value was clamped, the gradient degenerated, the node sits
    /// on the grid boundary, or the node lies outside the curvature band.
    pub flagged: Vec<bool>,
}

/// `κ = ∇·(∇φ/|∇φ|)` by central differences, clamped to `±2/h`.
pub fn mean_curvature(grid: &ScalarGrid) -> Curvature {
    let geom = *grid.geometry();
    let h = geom.spacing();
    let [nx, ny, nz] = geom.dims();
    let band = CURVATURE_BAND * h;
    let clamp = CURVATURE_CLAMP / h;
    let floor = GRADIENT_FLOOR / h;
    let out: Vec<(f64, bool)> = (0..geom.len())
        .into_par_iter()
        .map(|idx| {
            let [i, j, k] = geom.coords(idx);
            let (i, j, k) = (i as isize, j as isize, k as isize);
            let f = |a: isize, b: isize, c: isize| grid.get_clamped(i + a, j + b, k + c);
            let boundary = i == 0
                || j == 0
                || k == 0
                || i as usize == nx - 1
                || j as usize == ny - 1
                || k as usize == nz - 1;
            let c = f(0, 0, 0);
            let fx = (f(1, 0, 0) - f(-1, 0, 0)) / (2.0 * h);
            let fy = (f(0, 1, 0) - f(0, -1, 0)) / (2.0 * h);
            let fz = (f(0, 0, 1) - f(0, 0, -1)) / (2.0 * h);
            let h2 = h * h;
            let fxx = (f(1, 0, 0) - 2.0 * c + f(-1, 0, 0)) / h2;
            let fyy = (f(0, 1, 0) - 2.0 * c + f(0, -1, 0)) / h2;
            let fzz = (f(0, 0, 1) - 2.0 * c + f(0, 0, -1)) / h2;
            let q = 4.0 * h2;
            let fxy = (f(1, 1, 0) - f(1, -1, 0) - f(-1, 1, 0) + f(-1, -1, 0)) / q;
            let fxz = (f(1, 0, 1) - f(1, 0, -1) - f(-1, 0, 1) + f(-1, 0, -1)) / q;
            let fyz = (f(0, 1, 1) - f(0, 1, -1) - f(0, -1, 1) + f(0, -1, -1)) / q;
            let g2 = fx * fx + fy * fy + fz * fz;
            let g = g2.sqrt();
            if g < floor {
                return (0.0, true);
            }
            let num = fxx * (fy * fy + fz * fz) + fyy * (fx * fx + fz * fz) + fzz * (fx * fx + fy * fy)
                - 2.0 * (fx * fy * fxy + fx * fz * fxz + fy * fz * fyz);
            let kappa = num / (g2 * g);
            let clamped = kappa.abs() > clamp;
            (
                kappa.clamp(-clamp, clamp),
                clamped || boundary || c.abs() > band,
            )
        })
        .collect();
    let (values, flagged): (Vec<f64>, Vec<bool>) = out.into_iter().unzip();
    Curvature {
        values: ScalarGrid::from_raw(geom, values),
        flagged,
    }
}

/// Surface-weighted mean of `κ` over the zero level set.
pub fn average_mean_curvature(grid: &ScalarGrid) -> Result<f64> {
    let curv = mean_curvature(grid);
    let geom = grid.geometry();
    let h = geom.spacing();
    let [nx, ny, nz] = geom.dims();
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = geom.index(i, j, k);
                let d = smeared_delta(grid.values()[idx], h);
                if d == 0.0 {
                    continue;
                }
                let w = d * node_gradient(grid, i, j, k).norm();
                num += w * curv.values.values()[idx];
                den += w;
            }
        }
    }
    if den <= 0.0 {
        return Err(Error::NoSurface);
    }
    Ok(num / den)
}

/// Closest-point projection by Newton iteration along the interpolated gradient.
/// Returns the final point and whether it converged onto the zero set.
pub fn project_to_zero(grid: &ScalarGrid, p: &Vec3) -> (Vec3, bool) {
    let geom = grid.geometry();
    let h = geom.spacing();
    let tol = PROJECTION_TOL * h;
    let floor = GRADIENT_FLOOR / h;
    let mut x = *p;
    for _ in 0..=PROJECTION_MAX_ITER {
        if geom.check_inside(&x, 0.0).is_err() {
            return (x, false);
        }
        let local = geom.to_local(&x);
        let phi = trilinear(grid, &local);
        if phi.abs() <= tol {
            return (x, true);
        }
        let g = gradient_local(grid, &local);
        let g2 = g.norm_squared();
        if g2.sqrt() < floor {
            return (x, false);
        }
        x -= g * (phi / g2);
    }
    (x, false)
}

/// Ordered points on a zero level set with unit normals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub alive: Vec<bool>,
}

impl SurfaceSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }
}

/// Exclusion radius of the greedy thinning relative to the target spacing;
/// leaves about one sample per `target_spacing²` of surface.
pub const THINNING_RADIUS: f64 = 0.85;

/// Samples the zero level set from edge crossings, greedily thinned so no two
/// kept candidates are closer than `THINNING_RADIUS · target_spacing` (`<= 0`
/// keeps all), then projected onto the zero set. Only successfully projected
/// points are returned.
pub fn sample_surface(grid: &ScalarGrid, target_spacing: f64) -> Result<SurfaceSample> {
    let candidates = edge_crossings(grid);
    if candidates.is_empty() {
        return Err(Error::NoSurface);
    }
    let thinned = if target_spacing > 0.0 {
        let r = THINNING_RADIUS * target_spacing;
        let mut hash = GrowingHash::new(r);
        let mut kept = Vec::new();
        for p in candidates {
            if !hash.any_within(&p, r) {
                hash.insert(p);
                kept.push(p);
            }
        }
        kept
    } else {
        candidates
    };
    let projected: Vec<Option<(Vec3, Vec3)>> = thinned
        .par_iter()
        .map(|p| {
            let (q, ok) = project_to_zero(grid, p);
            if !ok {
                return None;
            }
            normal_at(grid, &q).ok().map(|n| (q, n))
        })
        .collect();
    let mut out = SurfaceSample::default();
    for (q, n) in projected.into_iter().flatten() {
        out.points.push(q);
        out.normals.push(n);
        out.alive.push(true);
    }
    if out.points.is_empty() {
        return Err(Error::NoSurface);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;
    use approx::assert_abs_diff_eq;

    fn centered(n: usize) -> GridGeometry {
        let o = -((n - 1) as f64) / 2.0;
        GridGeometry::new([n; 3], 1.0, Vec3::repeat(o)).unwrap()
    }

    #[test]
    fn interpolate_linear_field_exact() {
        let g = centered(9);
        let f = ScalarGrid::from_fn(g, |p| p.x);
        assert_abs_diff_eq!(interpolate(&f, &Vec3::new(2.5, 0.0, 0.0)).unwrap(), 2.5, epsilon = 1e-14);
    }

    #[test]
    fn interpolate_at_node_returns_sample() {
        let g = centered(9);
        let f = ScalarGrid::from_fn(g, |p| (p.x * 3.0 + p.y).sin() + p.z * p.z);
        let p = g.position(3, 5, 2);
        assert_eq!(interpolate(&f, &p).unwrap(), f.get(3, 5, 2));
    }

    #[test]
    fn interpolate_bilinear_product() {
        // f = xy, p = (1.25, 2.5, 0): exact value 3.125.
        let g = GridGeometry::new([8; 3], 1.0, Vec3::repeat(-3.0)).unwrap();
        let f = ScalarGrid::from_fn(g, |p| p.x * p.y);
        assert_abs_diff_eq!(
            interpolate(&f, &Vec3::new(1.25, 2.5, 0.0)).unwrap(),
            3.125,
            epsilon = 1e-13
        );
    }

    #[test]
    fn interpolate_out_of_bounds_names_axis() {
        let g = centered(9);
        let f = ScalarGrid::filled(g, 0.0);
        match interpolate(&f, &Vec3::new(0.0, 12.0, 0.0)) {
            Err(Error::OutOfBounds { axis, value, .. }) => {
                assert_eq!(axis, 'y');
                assert_eq!(value, 12.0);
            }
            other => panic!("expected out of bounds, got {other:?}"),
        }
    }

    #[test]
    fn normal_of_half_space() {
        let g = centered(9);
        let f = ScalarGrid::from_fn(g, |p| p.z);
        let n = normal_at(&f, &Vec3::new(0.3, -1.2, 0.7)).unwrap();
        assert_abs_diff_eq!((n - Vec3::z()).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn normal_of_flat_field_is_degenerate() {
        let g = centered(9);
        let f = ScalarGrid::filled(g, 1.0);
        assert!(matches!(
            normal_at(&f, &Vec3::zeros()),
            Err(Error::DegenerateGradient(..))
        ));
    }

    #[test]
    fn projection_identity_on_surface() {
        let g = centered(33);
        let f = ScalarGrid::from_fn(g, |p| p.norm() - 10.0);
        let p = Vec3::new(10.0, 0.0, 0.0);
        let (q, ok) = project_to_zero(&f, &p);
        assert!(ok);
        assert!((q - p).norm() <= PROJECTION_TOL);
    }

    #[test]
    fn smeared_heaviside_integrates_delta() {
        let h = 1.0;
        let n = 20000;
        let a = -2.0;
        let b = 2.0;
        let dx = (b - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = a + (i as f64 + 0.5) * dx;
            acc += smeared_delta(x, h) * dx;
            let hv = smeared_heaviside(x + 0.5 * dx, h);
            assert!((hv - acc).abs() < 1e-6, "at {x}: {hv} vs {acc}");
        }
    }
}
