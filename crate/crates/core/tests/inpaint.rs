mod common;

use common::*;
use shape_msr::evolution::EvolutionSchedule;
use shape_msr::inpaint::*;
use shape_msr::metrics::{count_components, hausdorff};
use shape_msr::Vec3;

#[test]
fn seed_region_matches_ball_band_enumeration() {
    let g = cube(48);
    let c = Vec3::new(24.0, 24.0, 24.0);
    let phi = sphere(g, c, 16.0);
    let seed = c + Vec3::new(16.0, 0.0, 0.0);
    let mask = region_from_seeds(&phi, &[seed], 4.0).unwrap();
    let oracle = (0..g.len())
        .filter(|&i| (g.position_of(i) - seed).norm() <= 4.0 && phi.values()[i].abs() <= 6.0)
        .count();
    assert_eq!(mask.count(), oracle);
    assert!(oracle > 100);
}

#[test]
fn minimum_radius_region_contains_seed_voxel() {
    let g = cube(48);
    let c = Vec3::new(24.0, 24.0, 24.0);
    let phi = sphere(g, c, 16.0);
    let seed = c + Vec3::new(0.0, 16.3, 0.0);
    let mask = region_from_seeds(&phi, &[seed], 2.0).unwrap();
    assert!(!mask.is_empty());
    assert!(mask.in_region()[g.index(24, 40, 24)]);
    assert!(region_from_seeds(&phi, &[seed], 1.5).is_err());
}

#[test]
fn far_seeds_give_two_patches() {
    let g = cube(48);
    let c = Vec3::new(24.0, 24.0, 24.0);
    let phi = sphere(g, c, 16.0);
    let seeds = [c + Vec3::new(16.0, 0.0, 0.0), c - Vec3::new(16.0, 0.0, 0.0)];
    let mask = region_from_seeds(&phi, &seeds, 4.0).unwrap();
    assert_eq!(count_components(&g, mask.in_region()), 2);
}

#[test]
fn unprojectable_seed_is_reported_by_index() {
    let g = cube(48);
    let phi = sphere(g, mid(&g), 10.0);
    let err = region_from_seeds(&phi, &[mid(&g) + Vec3::new(10.0, 0.0, 0.0), Vec3::new(100.0, 0.0, 0.0)], 4.0)
        .unwrap_err();
    assert!(matches!(err, shape_msr::Error::SeedProjection { index: 1 }), "{err}");
}

#[test]
fn empty_region_leaves_the_shape_alone() {
    let g = cube(40);
    let phi = bumpy(g, mid(&g), 10.0, 0.1, 4);
    let s = EvolutionSchedule::uniform(2, 4.0, 2.0).unwrap();
    let mut p = InpaintingProblem::new(phi.clone(), RegionMask::empty(g), s);
    assert!(p.validate().is_err());
    p.allow_empty_region = true;
    p.max_outer = 3;
    let (out, report) = inpaint(&p).unwrap();
    assert!(report.converged);
    assert!(hausdorff(&out, &phi).unwrap() <= 1.0);
    assert_eq!(inpainted_fraction(&out, &phi, &p.mask).unwrap(), 0.0);
}

#[test]
fn unchanged_result_has_zero_fraction() {
    let g = cube(40);
    let phi = sphere(g, mid(&g), 10.0);
    let mask = RegionMask::from_fn(g, |p| p.x > 20.0);
    assert_eq!(inpainted_fraction(&phi, &phi, &mask).unwrap(), 0.0);
}

#[test]
fn four_scenarios_format_as_one_row() {
    assert_eq!(format_fractions(&[5.3, 19.2, 6.7, 5.7]), "5.3% 19.2% 6.7% 5.7%");
}
