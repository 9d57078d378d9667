mod common;

use common::*;
use shape_msr::evolution::{step_constant_normal, EvolutionSchedule, VelocityModel};
use shape_msr::field::sample_surface;
use shape_msr::metrics::{area, histogram_range, volume};
use shape_msr::msr::*;
use shape_msr::{ScalarGrid, Vec3, VectorGrid};

fn vp() -> VelocityModel {
    VelocityModel::volume_preserving()
}

#[test]
fn sphere_details_vanish_under_volume_preservation() {
    let g = cube(48);
    let phi = sphere(g, Vec3::new(23.7, 24.1, 23.8), 12.0);
    let s = EvolutionSchedule::uniform(3, 4.0, 2.0).unwrap();
    let rec = mst_decompose(&phi, &vp(), &s).unwrap();
    assert_eq!(rec.level_count(), 3);
    for l in &rec.levels {
        let m = l.details.iter().map(|w| w.abs()).fold(0.0, f64::max);
        assert!(m <= 0.5, "level {}: {m}", l.level);
        // All mass in the center bin of an h-wide histogram.
        let hist = histogram_range(&l.details, 11, 1.0);
        assert_eq!(hist.counts[5], l.len(), "level {}: {:?}", l.level, hist.counts);
    }
}

#[test]
fn constant_speed_details_are_outward_offsets() {
    let g = cube(48);
    let phi = sphere(g, mid(&g), 12.0);
    let (c, delta) = (0.5, 4.0);
    let s = EvolutionSchedule::uniform(1, delta, 2.0).unwrap();
    let rec = mst_decompose(&phi, &VelocityModel::constant(c), &s).unwrap();
    let d = &rec.levels[0];
    for w in &d.details {
        assert!((w - c * delta).abs() <= 0.5, "{w}");
    }
    let hist = histogram_range(&d.details, 21, 2.0 * c * delta);
    let (peak, &count) = hist.counts.iter().enumerate().max_by_key(|(_, n)| **n).unwrap();
    assert!(count as f64 >= 0.95 * d.len() as f64);
    let width = hist.edges[1] - hist.edges[0];
    assert!((hist.centers()[peak] - c * delta).abs() <= width);
}

#[test]
fn uniform_radial_vectors_extend_uniformly() {
    let g = cube(40);
    let phi = sphere(g, mid(&g), 10.0);
    let s = sample_surface(&phi, 1.0).unwrap();
    let m = 0.7;
    let vectors: Vec<Vec3> = s.normals.iter().map(|n| n * m).collect();
    let ext = extend_vectors(&s.points, &vectors, &phi, 6.0, 2.0).unwrap();
    for (v, &p) in ext.values().iter().zip(phi.values()) {
        if p.abs() <= 6.0 {
            assert!((v.norm() - m).abs() <= 1e-6);
        }
    }
}

#[test]
fn bumpy_extension_matches_brute_force() {
    let g = cube(40);
    let phi = bumpy(g, mid(&g), 12.0, 0.1, 6);
    let s = EvolutionSchedule::uniform(1, 4.0, 2.0).unwrap();
    let rec = mst_decompose(&phi, &vp(), &s).unwrap();
    let d = &rec.levels[0];
    let next = rec.field_at(1).unwrap();
    let ext = extend_displacements(d, next, 6.0).unwrap();
    assert_eq!(extension_mismatches(&ext, next, &d.base_points, &d.vectors, 6.0), 0);
}

#[test]
fn radial_transport_matches_constant_offset() {
    let g = cube(48);
    let c = mid(&g);
    let phi = sphere(g, c, 12.0);
    let w = VectorGrid::new(
        g,
        (0..g.len()).map(|i| (g.position_of(i) - c).normalize()).collect(),
    )
    .unwrap();
    let moved = imst_step(&phi, &w, 0.5).unwrap();
    let oracle = step_constant_normal(&phi, 1.0, 0.5).unwrap();
    let (r, ro) = (volume_radius(volume(&moved)), volume_radius(volume(&oracle)));
    assert!((r - ro).abs() <= 0.2, "{r} vs {ro}");
    assert!((r - volume_radius(volume(&phi)) - 0.5).abs() <= 0.2);
}

#[test]
fn constant_speed_record_inverts() {
    let g = cube(48);
    let phi = sphere(g, mid(&g), 10.0);
    let s = EvolutionSchedule::uniform(3, 4.0, 2.0).unwrap();
    let rec = mst_decompose(&phi, &VelocityModel::constant(0.5), &s).unwrap();
    let rebuilt = imst_cascade(&rec, 0.0).unwrap();
    for (i, f) in rebuilt.iter().enumerate() {
        let r = volume_radius(volume(f));
        let r0 = volume_radius(volume(&rec.level_fields[i]));
        assert!((r - r0).abs() <= 1.0, "level {i}: {r} vs {r0}");
    }
}

#[test]
fn smooth_shape_single_level_returns_coarse() {
    let g = cube(40);
    let phi = sphere(g, mid(&g), 10.0);
    let s = EvolutionSchedule::uniform(1, 2.0, 2.0).unwrap();
    let rec = mst_decompose(&phi, &vp(), &s).unwrap();
    let out = imst_reconstruct(&rec, 0).unwrap();
    for (a, b) in out.values().iter().zip(rec.coarse.values()) {
        if b.abs() < 6.0 {
            assert!((a - b).abs() <= 0.5);
        }
    }
}

fn bumpy_record() -> (ScalarGrid, MultiscaleRecord) {
    let g = cube(48);
    let phi = bumpy(g, mid(&g), 16.0, 0.1, 6);
    let s = EvolutionSchedule::uniform(3, 4.0, 2.0).unwrap();
    let rec = mst_decompose(&phi, &vp(), &s).unwrap();
    (phi, rec)
}

#[test]
fn viscosity_free_paths_agree() {
    let (_, rec) = bumpy_record();
    let all = imst_cascade(&rec, 0.0).unwrap();
    for (i, f) in all.iter().enumerate() {
        assert_eq!(*f, imst_reconstruct(&rec, i).unwrap());
        assert_eq!(*f, imst_viscous(&rec, i, 0.0).unwrap());
    }
}

#[test]
fn strong_viscosity_smooths_the_reconstruction() {
    let (_, rec) = bumpy_record();
    let sharp = imst_reconstruct(&rec, 0).unwrap();
    let smooth = imst_viscous(&rec, 0, 0.9).unwrap();
    assert!(area(&smooth) < area(&sharp));
}

#[test]
fn record_points_telescope() {
    let (_, rec) = bumpy_record();
    let mut sums = vec![Vec3::zeros(); rec.initial_points.len()];
    for l in &rec.levels {
        for (id, w) in l.ids.iter().zip(&l.vectors) {
            sums[*id] += w;
        }
    }
    for (id, x_n) in rec.final_points() {
        let x0 = rec.initial_points[id];
        assert!((x0 - (x_n - sums[id])).norm() <= 1e-10);
    }
}

#[test]
fn oversized_displacement_fails_in_strict_mode() {
    let g = cube(40);
    let phi = sphere(g, mid(&g), 8.0);
    let s = EvolutionSchedule::uniform(1, 8.0, 2.0).unwrap();
    let m = VelocityModel::constant(0.5);
    let err = mst_decompose(&phi, &m, &s).unwrap_err();
    assert!(matches!(err, shape_msr::Error::DisplacementTooLarge { level: 1, .. }), "{err}");
    let opts = MstOptions {
        policy: DisplacementPolicy::Drop,
        ..MstOptions::default()
    };
    assert!(matches!(
        mst_decompose_with(&phi, &m, &s, opts),
        Err(shape_msr::Error::ShapeCollapsed(_))
    ));
}
