//! Procedural test shapes with known geometry, including damaged vessels.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::interpolate;
use crate::grid::{GridGeometry, ScalarGrid, Vec3};
use crate::redistance::redistance_field;

/// Required clearance between a shape and the domain boundary, in cells.
pub const DOMAIN_MARGIN_CELLS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    /// Axis-aligned cube.
    Cube {
        center: Vec3,
        side: f64,
    },
    /// Ring in the xy-plane.
    Torus {
        center: Vec3,
        major: f64,
        minor: f64,
    },
    /// `R(θ, ϑ) = R (1 + a cos(kθ) sin(kϑ))` with `θ` the azimuth about z and
    /// `ϑ` the polar angle from +z.
    BumpySphere {
        center: Vec3,
        radius: f64,
        amplitude: f64,
        frequency: u32,
    },
    Ellipsoid {
        center: Vec3,
        semi_axes: Vec3,
    },
}

impl Primitive {
    pub fn center(&self) -> Vec3 {
        match *self {
            Primitive::Sphere { center, .. }
            | Primitive::Cube { center, .. }
            | Primitive::Torus { center, .. }
            | Primitive::BumpySphere { center, .. }
            | Primitive::Ellipsoid { center, .. } => center,
        }
    }

    /// Half-extent of the axis-aligned bounding box.
    fn half_extent(&self) -> Vec3 {
        match *self {
            Primitive::Sphere { radius, .. } => Vec3::repeat(radius),
            Primitive::Cube { side, .. } => Vec3::repeat(side / 2.0),
            Primitive::Torus { major, minor, .. } => Vec3::new(major + minor, major + minor, minor),
            Primitive::BumpySphere {
                radius, amplitude, ..
            } => Vec3::repeat(radius * (1.0 + amplitude.abs())),
            Primitive::Ellipsoid { semi_axes, .. } => semi_axes,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match *self {
            Primitive::Sphere { radius, .. } if radius <= 0.0 => bad("sphere radius must be positive"),
            Primitive::Cube { side, .. } if side <= 0.0 => bad("cube side must be positive"),
            Primitive::Torus { major, minor, .. } if !(minor > 0.0 && major > minor) => {
                bad("torus needs 0 < minor < major")
            }
            Primitive::BumpySphere {
                radius, amplitude, ..
            } if radius <= 0.0 || !(0.0..=0.2).contains(&amplitude.abs()) => {
                bad("bumpy sphere needs radius > 0 and |amplitude| <= 0.2")
            }
            Primitive::Ellipsoid { semi_axes, .. } if semi_axes.min() <= 0.0 => {
                bad("ellipsoid semi-axes must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Value of the defining implicit function; the exact signed distance for
    /// sphere, cube and torus.
    pub fn implicit(&self, p: &Vec3) -> f64 {
        match *self {
            Primitive::Sphere { center, radius } => (p - center).norm() - radius,
            Primitive::Cube { center, side } => {
                let q = (p - center).abs() - Vec3::repeat(side / 2.0);
                let outside = q.map(|v| v.max(0.0)).norm();
                outside + q.max().min(0.0)
            }
            Primitive::Torus {
                center,
                major,
                minor,
            } => {
                let d = p - center;
                let ring = (d.x * d.x + d.y * d.y).sqrt() - major;
                (ring * ring + d.z * d.z).sqrt() - minor
            }
            Primitive::BumpySphere {
                center,
                radius,
                amplitude,
                frequency,
            } => {
                let d = p - center;
                let r = d.norm();
                if r == 0.0 {
                    return -radius;
                }
                let k = frequency as f64;
                let azimuth = d.y.atan2(d.x);
                let polar = (d.z / r).clamp(-1.0, 1.0).acos();
                r - radius * (1.0 + amplitude * (k * azimuth).cos() * (k * polar).sin())
            }
            Primitive::Ellipsoid { center, semi_axes } => {
                let d = p - center;
                let q = d.component_div(&semi_axes);
                let g = q.norm();
                if g == 0.0 {
                    return -semi_axes.min();
                }
                let grad = d.component_div(&semi_axes.component_mul(&semi_axes)) / g;
                (g - 1.0) / grad.norm()
            }
        }
    }

    fn has_exact_distance(&self) -> bool {
        matches!(
            self,
            Primitive::Sphere { .. } | Primitive::Cube { .. } | Primitive::Torus { .. }
        )
    }
}

fn check_margin(geom: &GridGeometry, lo: Vec3, hi: Vec3) -> Result<()> {
    let m = DOMAIN_MARGIN_CELLS * geom.spacing();
    let glo = geom.origin();
    let ghi = geom.max_corner();
    for a in 0..3 {
        if lo[a] - m < glo[a] - 1e-9 || hi[a] + m > ghi[a] + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "shape extent [{}, {}] on axis {a} leaves less than {} cells to the domain [{}, {}]",
                lo[a], hi[a], DOMAIN_MARGIN_CELLS, glo[a], ghi[a]
            )));
        }
    }
    Ok(())
}

/// Level set grid of a primitive; exact distance where available, otherwise
/// the implicit function redistanced.
pub fn make_primitive(shape: &Primitive, geom: GridGeometry) -> Result<ScalarGrid> {
    shape.validate()?;
    let c = shape.center();
    let e = shape.half_extent();
    check_margin(&geom, c - e, c + e)?;
    let field = ScalarGrid::from_fn(geom, |p| shape.implicit(&p));
    if shape.has_exact_distance() {
        Ok(field)
    } else {
        redistance_field(&field)
    }
}

/// Union (pointwise minimum) of level sets on a shared grid.
pub fn union(fields: &[ScalarGrid]) -> Result<ScalarGrid> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidParameter("union of zero fields".into()))?;
    let mut values = first.values().to_vec();
    for f in &fields[1..] {
        if !f.geometry().same_geometry(first.geometry()) {
            return Err(Error::InvalidParameter("union needs matching grids".into()));
        }
        for (a, b) in values.iter_mut().zip(f.values()) {
            *a = a.min(*b);
        }
    }
    ScalarGrid::new(*first.geometry(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Damage {
    /// Removes the tube wherever the nearest centerline arclength lies in `[start, end]`.
    Chop { start: f64, end: f64 },
    /// Scales the radius by `factor` over `[start, end]`, blended over two cells.
    Stenosis { start: f64, end: f64, factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VesselSpec {
    pub centerline: Vec<Vec3>,
    /// One radius per centerline vertex, interpolated linearly along segments.
    pub radii: Vec<f64>,
    pub damage: Option<Damage>,
}

/// Nearest centerline location of a query point.
#[derive(Debug, Clone, Copy)]
pub struct CenterlineHit {
    pub distance: f64,
    pub arclength: f64,
    /// Undamaged radius interpolated at the hit.
    pub radius: f64,
    pub point: Vec3,
}

impl VesselSpec {
    /// Straight vessel from `a` to `b` with constant radius.
    pub fn straight(a: Vec3, b: Vec3, radius: f64) -> Self {
        Self {
            centerline: vec![a, b],
            radii: vec![radius, radius],
            damage: None,
        }
    }

    /// Circular arc in the xy-plane about `center`, from angle `a0` to `a1`.
    pub fn arc(center: Vec3, bend_radius: f64, a0: f64, a1: f64, segments: usize, radius: f64) -> Self {
        let centerline = (0..=segments)
            .map(|i| {
                let t = a0 + (a1 - a0) * i as f64 / segments as f64;
                center + Vec3::new(t.cos(), t.sin(), 0.0) * bend_radius
            })
            .collect();
        Self {
            centerline,
            radii: vec![radius; segments + 1],
            damage: None,
        }
    }

    pub fn with_damage(mut self, damage: Damage) -> Self {
        self.damage = Some(damage);
        self
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = vec![0.0];
        for w in self.centerline.windows(2) {
            acc.push(acc.last().unwrap() + (w[1] - w[0]).norm());
        }
        acc
    }

    pub fn length(&self) -> f64 {
        *self.cumulative().last().unwrap_or(&0.0)
    }

    pub fn validate(&self, h: f64) -> Result<()> {
        if self.centerline.len() < 2 {
            return Err(Error::InvalidParameter("vessel needs at least two centerline vertices".into()));
        }
        if self.radii.len() != self.centerline.len() {
            return Err(Error::InvalidParameter("one radius per centerline vertex".into()));
        }
        if self.radii.iter().any(|&r| r < 2.0 * h) {
            return Err(Error::InvalidParameter(format!("vessel radii must be at least 2h = {}", 2.0 * h)));
        }
        if self.centerline.windows(2).any(|w| (w[1] - w[0]).norm() == 0.0) {
            return Err(Error::InvalidParameter("zero-length centerline segment".into()));
        }
        let len = self.length();
        match self.damage {
            Some(Damage::Chop { start, end }) | Some(Damage::Stenosis { start, end, .. })
                if !(0.0 <= start && start <= end && end <= len) =>
            {
                Err(Error::InvalidParameter(format!(
                    "damage interval [{start}, {end}] outside [0, {len}]"
                )))
            }
            Some(Damage::Stenosis { factor, .. }) if !(factor > 0.0 && factor < 1.0) => Err(
                Error::InvalidParameter(format!("stenosis factor {factor} must lie in (0, 1)")),
            ),
            _ => Ok(()),
        }
    }

    pub fn nearest(&self, p: &Vec3) -> CenterlineHit {
        let cum = self.cumulative();
        let mut best = CenterlineHit {
            distance: f64::INFINITY,
            arclength: 0.0,
            radius: self.radii[0],
            point: self.centerline[0],
        };
        for (s, w) in self.centerline.windows(2).enumerate() {
            let d = w[1] - w[0];
            let len2 = d.norm_squared();
            let t = ((p - w[0]).dot(&d) / len2).clamp(0.0, 1.0);
            let q = w[0] + d * t;
            let dist = (p - q).norm();
            if dist < best.distance {
                best = CenterlineHit {
                    distance: dist,
                    arclength: cum[s] + t * len2.sqrt(),
                    radius: self.radii[s] + t * (self.radii[s + 1] - self.radii[s]),
                    point: q,
                };
            }
        }
        best
    }

    /// Centerline point and unit tangent at arclength `s`.
    pub fn frame_at(&self, s: f64) -> (Vec3, Vec3) {
        let cum = self.cumulative();
        let n = self.centerline.len();
        let mut seg = n - 2;
        for i in 0..n - 1 {
            if s <= cum[i + 1] {
                seg = i;
                break;
            }
        }
        let a = self.centerline[seg];
        let b = self.centerline[seg + 1];
        let len = cum[seg + 1] - cum[seg];
        let t = ((s - cum[seg]) / len).clamp(0.0, 1.0);
        (a + (b - a) * t, (b - a) / len)
    }

    /// Undamaged radius at arclength `s`.
    pub fn radius_at(&self, s: f64) -> f64 {
        let cum = self.cumulative();
        for i in 0..self.centerline.len() - 1 {
            if s <= cum[i + 1] || i + 2 == self.centerline.len() {
                let t = ((s - cum[i]) / (cum[i + 1] - cum[i])).clamp(0.0, 1.0);
                return self.radii[i] + t * (self.radii[i + 1] - self.radii[i]);
            }
        }
        self.radii[0]
    }

    /// Radius after damage at arclength `s` (zero inside a chop).
    pub fn damaged_radius_at(&self, s: f64, h: f64) -> f64 {
        let r = self.radius_at(s);
        match self.damage {
            Some(Damage::Chop { start, end }) if start < end && s >= start && s <= end => 0.0,
            Some(Damage::Stenosis { start, end, factor }) if start < end => {
                r * stenosis_scale(s, start, end, factor, h)
            }
            _ => r,
        }
    }

    /// Implicit function of the damaged vessel with flat end caps.
    pub fn implicit(&self, p: &Vec3, h: f64) -> f64 {
        let hit = self.nearest(p);
        let n = self.centerline.len();
        let t0 = (self.centerline[1] - self.centerline[0]).normalize();
        let t1 = (self.centerline[n - 1] - self.centerline[n - 2]).normalize();
        let cap0 = (self.centerline[0] - p).dot(&t0);
        let cap1 = (p - self.centerline[n - 1]).dot(&t1);
        let radius = match self.damage {
            Some(Damage::Stenosis { start, end, factor }) if start < end => {
                hit.radius * stenosis_scale(hit.arclength, start, end, factor, h)
            }
            _ => hit.radius,
        };
        let mut phi = (hit.distance - radius).max(cap0).max(cap1);
        if let Some(Damage::Chop { start, end }) = self.damage {
            if start < end {
                let inside_chop = (hit.arclength - start).min(end - hit.arclength);
                phi = phi.max(inside_chop);
            }
        }
        phi
    }
}

/// Radius multiplier: `factor` on `[start, end]`, cosine blend over `2h` on each side.
fn stenosis_scale(s: f64, start: f64, end: f64, factor: f64, h: f64) -> f64 {
    let blend = 2.0 * h;
    let weight = if s >= start && s <= end {
        1.0
    } else {
        let gap = if s < start { start - s } else { s - end };
        if gap >= blend {
            0.0
        } else {
            0.5 * (1.0 + (PI * gap / blend).cos())
        }
    };
    1.0 - (1.0 - factor) * weight
}

/// Signed distance grid of a (possibly damaged) vessel.
pub fn make_vessel(spec: &VesselSpec, geom: GridGeometry) -> Result<ScalarGrid> {
    let h = geom.spacing();
    spec.validate(h)?;
    let rmax = spec.radii.iter().cloned().fold(0.0, f64::max);
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for c in &spec.centerline {
        lo = lo.inf(&(c - Vec3::repeat(rmax)));
        hi = hi.sup(&(c + Vec3::repeat(rmax)));
    }
    check_margin(&geom, lo, hi)?;
    let field = ScalarGrid::from_fn(geom, |p| spec.implicit(&p, h));
    redistance_field(&field)
}

/// Mean distance from the centerline point at arclength `s` to the zero level
/// set, probed along `rays` directions perpendicular to the tangent. Rays that
/// find no crossing within `max_radius` contribute zero.
pub fn probe_radius(grid: &ScalarGrid, spec: &VesselSpec, s: f64, rays: usize, max_radius: f64) -> f64 {
    let (c, t) = spec.frame_at(s);
    let helper = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = t.cross(&helper).normalize();
    let v = t.cross(&u);
    let h = grid.spacing();
    let step = 0.25 * h;
    let mut total = 0.0;
    for r in 0..rays {
        let a = 2.0 * PI * r as f64 / rays as f64;
        let dir = u * a.cos() + v * a.sin();
        let value = |d: f64| interpolate(grid, &(c + dir * d)).unwrap_or(1.0);
        if value(0.0) >= 0.0 {
            continue;
        }
        let mut prev = 0.0;
        let mut d = step;
        let mut found = None;
        while d <= max_radius {
            if value(d) >= 0.0 {
                found = Some((prev, d));
                break;
            }
            prev = d;
            d += step;
        }
        if let Some((mut a0, mut a1)) = found {
            for _ in 0..40 {
                let m = 0.5 * (a0 + a1);
                if value(m) < 0.0 {
                    a0 = m;
                } else {
                    a1 = m;
                }
            }
            total += 0.5 * (a0 + a1);
        }
    }
    total / rays as f64
}
