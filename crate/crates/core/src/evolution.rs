//! Forward scale-space generators: diffusion-threshold curvature motions,
//! constant normal speed by distance offset, and their splittings.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::smeared_heaviside;
use crate::grid::ScalarGrid;
use crate::metrics::{area, volume};
use crate::redistance::redistance_field;

/// Threshold dynamics freeze below `Δt = MBO_FLOOR · h²`.
pub const MBO_FLOOR: f64 = 2.0;
/// Default volume tolerance, in voxel volumes.
pub const DEFAULT_VOL_TOL_CELLS: f64 = 0.5;
/// Largest distance offset applied between two redistance passes, in cells.
const MAX_OFFSET_CELLS: f64 = 4.0;
const VOLUME_POLISH_ITERS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityKind {
    /// `v_n = c`.
    Constant,
    /// `v_n = c - λκ`.
    ConstantMinusCurvature,
    /// `v_n = κ_a - κ`.
    VolumePreservingMC,
    /// `v_n = c + κ_a - κ`, `c > 0`.
    CombinedInpainting,
}

/// Order of the two sub-motions when a curvature motion is split with a
/// constant expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitOrder {
    #[default]
    CurvatureFirst,
    ConstantFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityModel {
    pub kind: VelocityKind,
    pub c: f64,
    pub lambda: f64,
    pub split: SplitOrder,
}

impl VelocityModel {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: VelocityKind::Constant,
            c,
            lambda: 0.0,
            split: SplitOrder::default(),
        }
    }

    pub fn constant_minus_curvature(c: f64, lambda: f64) -> Self {
        Self {
            kind: VelocityKind::ConstantMinusCurvature,
            c,
            lambda,
            split: SplitOrder::default(),
        }
    }

    pub fn volume_preserving() -> Self {
        Self {
            kind: VelocityKind::VolumePreservingMC,
            c: 0.0,
            lambda: 0.0,
            split: SplitOrder::default(),
        }
    }

    pub fn combined(c: f64) -> Self {
        Self {
            kind: VelocityKind::CombinedInpainting,
            c,
            lambda: 0.0,
            split: SplitOrder::default(),
        }
    }

    pub fn with_split(mut self, split: SplitOrder) -> Self {
        self.split = split;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "velocity parameters must be finite with λ >= 0 (c = {}, λ = {})",
                self.c, self.lambda
            )));
        }
        match self.kind {
            VelocityKind::ConstantMinusCurvature if self.lambda <= 0.0 => Err(Error::InvalidParameter(
                "ConstantMinusCurvature needs λ > 0".into(),
            )),
            VelocityKind::CombinedInpainting if self.c <= 0.0 => Err(Error::InvalidParameter(
                "CombinedInpainting needs c > 0".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Whether the model involves a diffusion-threshold step, which imposes
    /// the resolution floor on the time step.
    pub fn uses_threshold_dynamics(&self) -> bool {
        self.kind != VelocityKind::Constant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSchedule {
    t_nodes: Vec<f64>,
    dt: f64,
}

impl EvolutionSchedule {
    pub fn new(t_nodes: Vec<f64>, dt: f64) -> Result<Self> {
        if t_nodes.first() != Some(&0.0) {
            return Err(Error::InvalidParameter("schedule must start at t = 0".into()));
        }
        if t_nodes.windows(2).any(|w| !(w[1] > w[0])) || t_nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("schedule nodes must be finite and strictly increasing".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
        }
        let min_gap = t_nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if dt > min_gap * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "time step {dt} exceeds the smallest node gap {min_gap}"
            )));
        }
        Ok(Self { t_nodes, dt })
    }

    /// `levels` equal intervals of length `level_time`.
    pub fn uniform(levels: usize, level_time: f64, dt: f64) -> Result<Self> {
        Self::new((0..=levels).map(|i| i as f64 * level_time).collect(), dt)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn levels(&self) -> usize {
        self.t_nodes.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        *self.t_nodes.last().unwrap()
    }

    /// Number and size of the steps covering level `i` (1-based). The
    /// interval is split into `floor(gap / dt)` equal steps, each at least `dt`.
    pub fn steps_for(&self, level: usize) -> (usize, f64) {
        let gap = self.t_nodes[level] - self.t_nodes[level - 1];
        let n = ((gap / self.dt) * (1.0 + 1e-12)).floor().max(1.0) as usize;
        (n, gap / n as f64)
    }

    pub fn check_resolution(&self, h: f64) -> Result<()> {
        if self.dt < MBO_FLOOR * h * h * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "time step {} is below the threshold-dynamics floor {}·h² = {}",
                self.dt,
                MBO_FLOOR,
                MBO_FLOOR * h * h
            )));
        }
        Ok(())
    }
}

/// Volume threshold fit; `achieved_error` is `|volume{χ̄ > λ} - V_0|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdState {
    pub lambda: f64,
    pub v0: f64,
    pub vol_tol: f64,
    pub achieved_error: f64,
}

/// Solves `χ_t = ∇²χ` for `dt` with zero-flux boundaries by explicit
/// 7-point substeps no larger than `h²/6`.
pub fn diffuse_step(chi: &ScalarGrid, dt: f64) -> Result<ScalarGrid> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("diffusion time {dt} must be positive")));
    }
    let h = chi.spacing();
    let n = (dt / (h * h / 6.0)).ceil().max(1.0) as usize;
    Ok(diffuse_substeps(chi, dt / n as f64, n))
}

pub(crate) fn diffuse_substeps(u: &ScalarGrid, tau: f64, n: usize) -> ScalarGrid {
    let geom = *u.geometry();
    let [nx, ny, nz] = geom.dims();
    let h = geom.spacing();
    let r = tau / (h * h);
    let slab = nx * ny;
    let mut cur = u.values().to_vec();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..n {
        next.par_chunks_mut(slab).enumerate().for_each(|(k, out)| {
            let src = &cur;
            let base = k * slab;
            for j in 0..ny {
                for i in 0..nx {
                    let idx = base + j * nx + i;
                    let c = src[idx];
                    let xm = if i > 0 { src[idx - 1] } else { c };
                    let xp = if i + 1 < nx { src[idx + 1] } else { c };
                    let ym = if j > 0 { src[idx - nx] } else { c };
                    let yp = if j + 1 < ny { src[idx + nx] } else { c };
                    let zm = if k > 0 { src[idx - slab] } else { c };
                    let zp = if k + 1 < nz { src[idx + slab] } else { c };
                    out[j * nx + i] = c + r * (xm + xp + ym + yp + zm + zp - 6.0 * c);
                }
            }
        });
        std::mem::swap(&mut cur, &mut next);
    }
    ScalarGrid::from_raw(geom, cur)
}

fn count_above(values: &[f64], lambda: f64) -> usize {
    values.par_iter().filter(|&&v| v > lambda).count()
}

/// Bisection for `λ` so that `h³ · #{χ̄ > λ}` is as close to `v0` as the voxel
/// granularity permits; ties go to the larger `λ`.
pub fn find_volume_threshold(chi_bar: &ScalarGrid, v0: f64, vol_tol: f64) -> Result<ThresholdState> {
    let dv = chi_bar.geometry().voxel_volume();
    let total = dv * chi_bar.values().len() as f64;
    if !(v0 >= 0.0 && v0 <= total) {
        return Err(Error::InvalidParameter(format!("target volume {v0} outside [0, {total}]")));
    }
    if !(vol_tol > 0.0) {
        return Err(Error::InvalidParameter("vol_tol must be positive".into()));
    }
    let values = chi_bar.values();
    let vol = |l: f64| count_above(values, l) as f64 * dv;
    let lo_v = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_v = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // vol(hi) <= v0 < vol(lo) is maintained.
    let mut hi = hi_v;
    let mut lo = lo_v.min(hi_v) - 1.0;
    if vol(lo) <= v0 {
        let e = (vol(lo) - v0).abs();
        return Ok(ThresholdState {
            lambda: lo.max(0.0),
            v0,
            vol_tol,
            achieved_error: e,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if vol(mid) <= v0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (vol(hi) - v0).abs() < vol_tol {
            break;
        }
    }
    let (eh, el) = ((vol(hi) - v0).abs(), (vol(lo) - v0).abs());
    let (lambda, e) = if eh <= el { (hi, eh) } else { (lo, el) };
    // Same count, but centered between the neighbouring values of `χ̄`.
    let below = values.par_iter().cloned().filter(|&v| v <= lambda).reduce(|| f64::NEG_INFINITY, f64::max);
    let above = values.par_iter().cloned().filter(|&v| v > lambda).reduce(|| f64::INFINITY, f64::min);
    let lambda = if below.is_finite() && above.is_finite() {
        0.5 * (below + above)
    } else {
        lambda
    };
    Ok(ThresholdState {
        lambda,
        v0,
        vol_tol,
        achieved_error: e,
    })
}

/// Smooth inside indicator `H(-φ)`; its sum times `h³` is the enclosed volume.
fn characteristic(phi: &ScalarGrid) -> ScalarGrid {
    let h = phi.spacing();
    phi.map(|v| smeared_heaviside(-v, h))
}

/// Level set `λ - χ̄` of the thresholded set, returned as a signed distance.
fn sharpen(chi_bar: &ScalarGrid, lambda: f64) -> Result<ScalarGrid> {
    let psi = chi_bar.map(|v| lambda - v);
    if !psi.has_interface() {
        return Err(Error::ShapeCollapsed(String::new()));
    }
    redistance_field(&psi)
}

/// Shifts `φ` along its normals until the smeared volume is within `vol_tol` of `v0`.
fn polish_volume(mut phi: ScalarGrid, v0: f64, vol_tol: f64) -> Result<ScalarGrid> {
    for _ in 0..VOLUME_POLISH_ITERS {
        let v = volume(&phi);
        if (v - v0).abs() < vol_tol {
            break;
        }
        let a = area(&phi);
        if a <= 0.0 {
            break;
        }
        let shift = (v - v0) / a;
        phi = phi.map(|x| x + shift);
    }
    if !phi.has_interface() {
        return Err(Error::ShapeCollapsed(String::new()));
    }
    Ok(phi)
}

/// Volume-preserving mean curvature step; output volume within `vol_tol` of the input's.
pub fn step_vpmcm(phi: &ScalarGrid, dt: f64, vol_tol: f64) -> Result<ScalarGrid> {
    if !phi.has_interface() {
        return Err(Error::NoSurface);
    }
    let chi = characteristic(phi);
    let dv = phi.geometry().voxel_volume();
    let v0 = chi.values().iter().sum::<f64>() * dv;
    let chi_bar = diffuse_step(&chi, dt)?;
    let fit = find_volume_threshold(&chi_bar, v0, vol_tol)?;
    let sharp = sharpen(&chi_bar, fit.lambda)?;
    polish_volume(sharp, v0, vol_tol)
}

/// Mean curvature step with threshold `1/2`. `None` when the shape vanishes.
pub fn step_mcm(phi: &ScalarGrid, dt: f64) -> Result<Option<ScalarGrid>> {
    if !phi.has_interface() {
        return Err(Error::NoSurface);
    }
    let chi_bar = diffuse_step(&characteristic(phi), dt)?;
    match sharpen(&chi_bar, 0.5) {
        Ok(g) => Ok(Some(g)),
        Err(Error::ShapeCollapsed(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Constant normal speed by distance offset `φ - c·dt`; `c > 0` expands.
pub fn step_constant_normal(phi: &ScalarGrid, c: f64, dt: f64) -> Result<ScalarGrid> {
    let h = phi.spacing();
    let total = c * dt;
    if !total.is_finite() {
        return Err(Error::InvalidParameter("non-finite offset".into()));
    }
    if total == 0.0 {
        return redistance_field(phi);
    }
    let chunks = (total.abs() / (MAX_OFFSET_CELLS * h)).ceil().max(1.0) as usize;
    let off = total / chunks as f64;
    let mut cur = phi.clone();
    for _ in 0..chunks {
        cur = redistance_field(&cur.map(|v| v - off))?;
    }
    Ok(cur)
}

/// The diffuse-and-threshold-at-zero constant motion. Experimental: its speed
/// depends on the grid resolution and the diffusion time rather than on `c`.
pub fn step_constant_threshold(phi: &ScalarGrid, dt: f64) -> Result<ScalarGrid> {
    let chi_bar = diffuse_step(&phi.map(|v| f64::from(u8::from(v < 0.0))), dt)?;
    sharpen(&chi_bar, 0.0)
}

/// `v_n = c + κ_a - κ` by splitting a volume-preserving step with a constant one.
pub fn step_combined(phi: &ScalarGrid, c: f64, dt: f64, vol_tol: f64, order: SplitOrder) -> Result<ScalarGrid> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter("combined motion needs c > 0".into()));
    }
    match order {
        SplitOrder::CurvatureFirst => step_constant_normal(&step_vpmcm(phi, dt, vol_tol)?, c, dt),
        SplitOrder::ConstantFirst => step_vpmcm(&step_constant_normal(phi, c, dt)?, dt, vol_tol),
    }
}

fn collapsed(g: Option<ScalarGrid>) -> Result<ScalarGrid> {
    g.ok_or_else(|| Error::ShapeCollapsed(String::new()))
}

/// One step of `model`; `vol_tol` applies to the volume-preserving parts.
pub fn step_model(phi: &ScalarGrid, model: &VelocityModel, dt: f64, vol_tol: f64) -> Result<ScalarGrid> {
    match model.kind {
        VelocityKind::Constant => step_constant_normal(phi, model.c, dt),
        VelocityKind::ConstantMinusCurvature => {
            let curvature = |g: &ScalarGrid| step_mcm(g, model.lambda * dt).and_then(collapsed);
            match model.split {
                SplitOrder::CurvatureFirst => step_constant_normal(&curvature(phi)?, model.c, dt),
                SplitOrder::ConstantFirst => curvature(&step_constant_normal(phi, model.c, dt)?),
            }
        }
        VelocityKind::VolumePreservingMC => step_vpmcm(phi, dt, vol_tol),
        VelocityKind::CombinedInpainting => step_combined(phi, model.c, dt, vol_tol, model.split),
    }
}

pub fn default_vol_tol(h: f64) -> f64 {
    DEFAULT_VOL_TOL_CELLS * h.powi(3)
}

fn check_model(phi: &ScalarGrid, model: &VelocityModel, schedule: &EvolutionSchedule) -> Result<()> {
    model.validate()?;
    if model.uses_threshold_dynamics() {
        schedule.check_resolution(phi.spacing())?;
        if model.kind == VelocityKind::ConstantMinusCurvature {
            let h = phi.spacing();
            if model.lambda * schedule.dt() < MBO_FLOOR * h * h * (1.0 - 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "curvature diffusion time λ·Δt = {} is below the floor {}·h²",
                    model.lambda * schedule.dt(),
                    MBO_FLOOR
                )));
            }
        }
    }
    Ok(())
}

/// Advances `phi` across level `level` (1-based) of the schedule.
pub fn evolve_level(
    phi: &ScalarGrid,
    model: &VelocityModel,
    schedule: &EvolutionSchedule,
    level: usize,
    vol_tol: f64,
) -> Result<ScalarGrid> {
    check_model(phi, model, schedule)?;
    let (n, dt) = schedule.steps_for(level);
    let mut cur = phi.clone();
    for _ in 0..n {
        cur = step_model(&cur, model, dt, vol_tol)?;
    }
    Ok(cur)
}

/// Fields at every schedule node, starting with the input itself.
pub fn evolve(phi: &ScalarGrid, model: &VelocityModel, schedule: &EvolutionSchedule) -> Result<Vec<ScalarGrid>> {
    evolve_with_tol(phi, model, schedule, default_vol_tol(phi.spacing()))
}

pub fn evolve_with_tol(
    phi: &ScalarGrid,
    model: &VelocityModel,
    schedule: &EvolutionSchedule,
    vol_tol: f64,
) -> Result<Vec<ScalarGrid>> {
    check_model(phi, model, schedule)?;
    let mut out = vec![phi.clone()];
    for level in 1..=schedule.levels() {
        let next = evolve_level(out.last().unwrap(), model, schedule, level, vol_tol).map_err(|e| match e {
            Error::ShapeCollapsed(_) => Error::ShapeCollapsed(format!(" at level {level}")),
            e => e,
        })?;
        out.push(next);
    }
    Ok(out)
}
