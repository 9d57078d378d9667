//! Multiscale transform: tracked surface points record their displacement
//! between successive scales, and the inverse transform advects a level set
//! backwards through those displacements.
//!
//! Displacements are stored as `W_i = X_i - X_{i-1}`, the forward motion of
//! each tracked point, so the detail `w = sign(W·n)|W|` is positive where the
//! surface moved outwards. Reconstruction transports the level set with
//! velocity `-W_i` for unit pseudo-time per level.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{default_vol_tol, evolve_level, EvolutionSchedule, VelocityModel};
use crate::field::{normal_at, project_to_zero, sample_surface};
use crate::grid::{ScalarGrid, Vec3, VectorGrid};
use crate::redistance::redistance_field;
use crate::spatial::PointHash;

/// Narrow band used for extension and advection, in cells.
pub const EXTENSION_BAND_CELLS: f64 = 6.0;
/// Largest admissible per-level displacement, in cells.
pub const MAX_DISPLACEMENT_CELLS: f64 = 3.0;
/// Upwind stability limit on the advection substep.
pub const CFL_LIMIT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementSet {
    /// 1-based level index.
    pub level: usize,
    pub interval: (f64, f64),
    /// Index of each tracked point in the initial sample.
    pub ids: Vec<usize>,
    /// Positions on the level's surface.
    pub base_points: Vec<Vec3>,
    pub vectors: Vec<Vec3>,
    pub details: Vec<f64>,
}

impl DisplacementSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleRecord {
    /// The initial sample `X_0`.
    pub initial_points: Vec<Vec3>,
    pub levels: Vec<DisplacementSet>,
    pub coarse: ScalarGrid,
    pub schedule: EvolutionSchedule,
    pub model: VelocityModel,
    pub target_spacing: f64,
    /// Optional reference fields `φ(·, t_i)` for `i = 0..N-1`, kept for
    /// per-level diagnostics; empty when not retained.
    pub level_fields: Vec<ScalarGrid>,
}

impl MultiscaleRecord {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Field at node `i` (`0..=N`) when retained; the coarse field is always available.
    pub fn field_at(&self, i: usize) -> Option<&ScalarGrid> {
        if i == self.levels.len() {
            Some(&self.coarse)
        } else {
            self.level_fields.get(i)
        }
    }

    /// Final position of every point still alive at the coarsest level.
    pub fn final_points(&self) -> Vec<(usize, Vec3)> {
        match self.levels.last() {
            Some(l) => l.ids.iter().copied().zip(l.base_points.iter().copied()).collect(),
            None => self.initial_points.iter().copied().enumerate().collect(),
        }
    }
}

/// What happens to a point whose displacement exceeds the per-level limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisplacementPolicy {
    /// Reject the schedule with an error.
    #[default]
    Strict,
    /// Retire the point, as for a failed projection.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstOptions {
    /// Sampling distance for `X_0`, in cells; `0` keeps every edge crossing.
    pub target_spacing_cells: f64,
    /// Volume tolerance for volume-preserving steps; `None` selects half a voxel.
    pub vol_tol: Option<f64>,
    pub policy: DisplacementPolicy,
    pub keep_level_fields: bool,
}

impl Default for MstOptions {
    fn default() -> Self {
        Self {
            target_spacing_cells: 1.0,
            vol_tol: None,
            policy: DisplacementPolicy::Strict,
            keep_level_fields: true,
        }
    }
}

pub fn mst_decompose(phi0: &ScalarGrid, model: &VelocityModel, schedule: &EvolutionSchedule) -> Result<MultiscaleRecord> {
    mst_decompose_with(phi0, model, schedule, MstOptions::default())
}

pub fn mst_decompose_with(
    phi0: &ScalarGrid,
    model: &VelocityModel,
    schedule: &EvolutionSchedule,
    opts: MstOptions,
) -> Result<MultiscaleRecord> {
    let h = phi0.spacing();
    let vol_tol = opts.vol_tol.unwrap_or_else(|| default_vol_tol(h));
    let spacing = opts.target_spacing_cells * h;
    let sample = sample_surface(phi0, spacing)?;
    let initial_points = sample.points;
    let limit = MAX_DISPLACEMENT_CELLS * h;
    let diag = phi0.geometry().diagonal();

    let mut ids: Vec<usize> = (0..initial_points.len()).collect();
    let mut current: Vec<Vec3> = initial_points.clone();
    let mut field = phi0.clone();
    let mut levels = Vec::with_capacity(schedule.levels());
    let mut level_fields = Vec::new();

    for level in 1..=schedule.levels() {
        let next = evolve_level(&field, model, schedule, level, vol_tol).map_err(|e| match e {
            Error::ShapeCollapsed(_) => Error::ShapeCollapsed(format!(" at level {level}")),
            e => e,
        })?;
        let tracked: Vec<Option<(Vec3, Vec3)>> = current
            .par_iter()
            .map(|p| {
                let (q, ok) = project_to_zero(&next, p);
                if !ok {
                    return None;
                }
                normal_at(&next, &q).ok().map(|n| (q, n))
            })
            .collect();

        let mut set = DisplacementSet {
            level,
            interval: (schedule.nodes()[level - 1], schedule.nodes()[level]),
            ids: Vec::new(),
            base_points: Vec::new(),
            vectors: Vec::new(),
            details: Vec::new(),
        };
        for ((&id, prev), t) in ids.iter().zip(&current).zip(tracked) {
            let Some((q, n)) = t else { continue };
            let w = q - prev;
            let m = w.norm();
            if m > limit || m > diag {
                match opts.policy {
                    DisplacementPolicy::Strict => {
                        return Err(Error::DisplacementTooLarge {
                            level,
                            magnitude: m,
                            limit,
                        })
                    }
                    DisplacementPolicy::Drop => continue,
                }
            }
            let s = w.dot(&n);
            set.ids.push(id);
            set.base_points.push(q);
            set.vectors.push(w);
            set.details.push(if s < 0.0 { -m } else { m });
        }
        if set.is_empty() {
            return Err(Error::ShapeCollapsed(format!(": no tracked points left at level {level}")));
        }
        ids = set.ids.clone();
        current = set.base_points.clone();
        levels.push(set);
        if opts.keep_level_fields {
            level_fields.push(std::mem::replace(&mut field, next));
        } else {
            field = next;
        }
    }

    Ok(MultiscaleRecord {
        initial_points,
        levels,
        coarse: field,
        schedule: schedule.clone(),
        model: *model,
        target_spacing: spacing,
        level_fields,
    })
}

/// Nearest-point extension of per-point vectors onto the band `|φ| <= band`;
/// zero elsewhere.
pub fn extend_displacements(d: &DisplacementSet, phi: &ScalarGrid, band: f64) -> Result<VectorGrid> {
    extend_vectors(&d.base_points, &d.vectors, phi, band, 2.0 * phi.spacing())
}

pub fn extend_vectors(points: &[Vec3], vectors: &[Vec3], phi: &ScalarGrid, band: f64, cell: f64) -> Result<VectorGrid> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("cannot extend an empty displacement set".into()));
    }
    if points.len() != vectors.len() {
        return Err(Error::InvalidParameter("points and vectors differ in length".into()));
    }
    let hash = PointHash::new(points, cell);
    let values: Vec<Vec3> = phi
        .values()
        .par_iter()
        .enumerate()
        .map(|(idx, &v)| {
            if v.abs() > band {
                return Vec3::zeros();
            }
            let p = phi.geometry().position_of(idx);
            hash.nearest(&p).map_or(Vec3::zeros(), |(i, _)| vectors[i])
        })
        .collect();
    VectorGrid::new(*phi.geometry(), values)
}

fn cfl_number(w: &VectorGrid, dtau: f64) -> f64 {
    dtau * w.max_norm() / w.geometry().spacing()
}

/// One explicit upwind step of `ψ_τ + W·∇ψ = 0`.
pub fn imst_step(psi: &ScalarGrid, w: &VectorGrid, dtau: f64) -> Result<ScalarGrid> {
    if !psi.geometry().same_geometry(w.geometry()) {
        return Err(Error::InvalidParameter("field and velocity grids differ".into()));
    }
    let cfl = cfl_number(w, dtau);
    if cfl > CFL_LIMIT {
        return Err(Error::Cfl {
            step: dtau,
            speed: w.max_norm(),
            limit: CFL_LIMIT,
        });
    }
    Ok(transport_step(psi, w, dtau, 0.0))
}

/// Upwind advection plus optional explicit diffusion `eps ∇²ψ` (zero flux).
fn transport_step(psi: &ScalarGrid, w: &VectorGrid, dtau: f64, eps: f64) -> ScalarGrid {
    let geom = *psi.geometry();
    let [nx, ny, nz] = geom.dims();
    let h = geom.spacing();
    let strides = [1, nx, nx * ny];
    let dims = [nx, ny, nz];
    let v = psi.values();
    let vel = w.values();
    let values: Vec<f64> = (0..geom.len())
        .into_par_iter()
        .map(|idx| {
            let c = v[idx];
            let wv = vel[idx];
            let ijk = geom.coords(idx);
            let mut adv = 0.0;
            let mut lap = 0.0;
            for a in 0..3 {
                let s = strides[a];
                let has_lo = ijk[a] > 0;
                let has_hi = ijk[a] + 1 < dims[a];
                let lo = if has_lo { v[idx - s] } else { c };
                let hi = if has_hi { v[idx + s] } else { c };
                let wa = wv[a];
                if wa > 0.0 {
                    let d = if has_lo { (c - lo) / h } else { (hi - c) / h };
                    adv += wa * d;
                } else if wa < 0.0 {
                    let d = if has_hi { (hi - c) / h } else { (c - lo) / h };
                    adv += wa * d;
                }
                lap += lo + hi - 2.0 * c;
            }
            let mut next = c - dtau * adv;
            if eps > 0.0 {
                next += dtau * eps * lap / (h * h);
            }
            next
        })
        .collect();
    ScalarGrid::from_raw(geom, values)
}

/// Substep count for unit pseudo-time: keeps `Δτ (Σ|W_a|/h + 6ε/h²) <= CFL_LIMIT`.
fn substeps(w: &VectorGrid, eps: f64) -> usize {
    let h = w.geometry().spacing();
    let speed = w
        .values()
        .iter()
        .map(|v| v.x.abs() + v.y.abs() + v.z.abs())
        .fold(0.0, f64::max);
    let rate = speed / h + 6.0 * eps / (h * h);
    ((rate / CFL_LIMIT).ceil() as usize).max(1)
}

/// Transports `psi` backwards through one level's displacements.
pub fn reverse_level(psi: &ScalarGrid, d: &DisplacementSet, eps: f64, cell: f64) -> Result<ScalarGrid> {
    reverse_with(psi, &d.base_points, &d.vectors, eps, cell)
}

pub(crate) fn reverse_with(psi: &ScalarGrid, points: &[Vec3], vectors: &[Vec3], eps: f64, cell: f64) -> Result<ScalarGrid> {
    let band = EXTENSION_BAND_CELLS * psi.spacing();
    let mut w = extend_vectors(points, vectors, psi, band, cell)?;
    for v in w.values_mut() {
        *v = -*v;
    }
    let n = substeps(&w, eps);
    let dtau = 1.0 / n as f64;
    let mut cur = psi.clone();
    for _ in 0..n {
        cur = transport_step(&cur, &w, dtau, eps);
    }
    redistance_field(&cur)
}

fn check_level(rec: &MultiscaleRecord, down_to_level: usize) -> Result<()> {
    if down_to_level >= rec.levels.len() {
        return Err(Error::InvalidParameter(format!(
            "target level {down_to_level} must be below the level count {}",
            rec.levels.len()
        )));
    }
    Ok(())
}

/// Reconstruction of level `down_to_level` by cascading from the coarse field.
pub fn imst_reconstruct(rec: &MultiscaleRecord, down_to_level: usize) -> Result<ScalarGrid> {
    imst_viscous(rec, down_to_level, 0.0)
}

/// As [`imst_reconstruct`] with added viscosity `eps ∇²ψ`.
pub fn imst_viscous(rec: &MultiscaleRecord, down_to_level: usize, eps: f64) -> Result<ScalarGrid> {
    check_level(rec, down_to_level)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("viscosity {eps} must be non-negative")));
    }
    let cell = 2.0 * rec.target_spacing.max(rec.coarse.spacing());
    let mut psi = rec.coarse.clone();
    for d in rec.levels[down_to_level..].iter().rev() {
        psi = reverse_level(&psi, d, eps, cell)?;
    }
    Ok(psi)
}

/// Every cascade reconstruction at once; entry `i` is the reconstruction of level `i`.
pub fn imst_cascade(rec: &MultiscaleRecord, eps: f64) -> Result<Vec<ScalarGrid>> {
    if rec.levels.is_empty() {
        return Ok(Vec::new());
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("viscosity {eps} must be non-negative")));
    }
    let cell = 2.0 * rec.target_spacing.max(rec.coarse.spacing());
    let mut out = Vec::with_capacity(rec.levels.len());
    let mut psi = rec.coarse.clone();
    for d in rec.levels.iter().rev() {
        psi = reverse_level(&psi, d, eps, cell)?;
        out.push(psi.clone());
    }
    out.reverse();
    Ok(out)
}

/// Reconstruction `S̃_i` of level `level` from the retained field of level `i + 1`.
pub fn imst_single_level(rec: &MultiscaleRecord, level: usize) -> Result<ScalarGrid> {
    check_level(rec, level)?;
    let from = rec
        .field_at(level + 1)
        .ok_or_else(|| Error::InvalidParameter("record does not retain per-level fields".into()))?;
    let cell = 2.0 * rec.target_spacing.max(rec.coarse.spacing());
    reverse_level(from, &rec.levels[level], 0.0, cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;

    #[test]
    fn zero_velocity_is_identity() {
        let g = GridGeometry::cube(8, 1.0).unwrap();
        let f = ScalarGrid::from_fn(g, |p| p.x - 3.2);
        let w = VectorGrid::zeros(g);
        assert_eq!(imst_step(&f, &w, 0.5).unwrap(), f);
    }

    #[test]
    fn uniform_transport_is_exact_on_linear_fields() {
        let g = GridGeometry::cube(10, 1.0).unwrap();
        let f = ScalarGrid::from_fn(g, |p| 2.0 * p.x - 7.0);
        let w = VectorGrid::new(g, vec![Vec3::new(0.6, 0.0, 0.0); g.len()]).unwrap();
        let out = imst_step(&f, &w, 1.0).unwrap();
        for idx in 0..g.len() {
            let p = g.position_of(idx);
            if g.coords(idx)[0] > 0 {
                assert!((out.values()[idx] - (2.0 * (p.x - 0.6) - 7.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = GridGeometry::cube(6, 1.0).unwrap();
        let f = ScalarGrid::from_fn(g, |p| p.x - 2.5);
        let w = VectorGrid::new(g, vec![Vec3::new(2.0, 0.0, 0.0); g.len()]).unwrap();
        assert!(matches!(imst_step(&f, &w, 0.5), Err(Error::Cfl { .. })));
    }

    #[test]
    fn single_point_extension_fills_band() {
        let g = GridGeometry::cube(12, 1.0).unwrap();
        let f = ScalarGrid::from_fn(g, |p| p.z - 5.5);
        let v = Vec3::new(0.1, -0.2, 0.3);
        let d = DisplacementSet {
            level: 1,
            interval: (0.0, 1.0),
            ids: vec![0],
            base_points: vec![Vec3::new(5.0, 5.0, 5.5)],
            vectors: vec![v],
            details: vec![v.norm()],
        };
        let e = extend_displacements(&d, &f, 3.0).unwrap();
        for (idx, w) in e.values().iter().enumerate() {
            if f.values()[idx].abs() <= 3.0 {
                assert_eq!(*w, v);
            } else {
                assert_eq!(*w, Vec3::zeros());
            }
        }
    }

    #[test]
    fn substeps_grow_with_viscosity() {
        let g = GridGeometry::cube(6, 1.0).unwrap();
        let w = VectorGrid::new(g, vec![Vec3::new(0.5, 0.5, 0.0); g.len()]).unwrap();
        assert_eq!(substeps(&w, 0.0), 2);
        assert_eq!(substeps(&w, 0.3), 4);
    }
}
