mod common;

use std::f64::consts::PI;
use std::process::Command;

use common::*;
use rand::{Rng, SeedableRng};
use shape_msr::evolution::{EvolutionSchedule, VelocityModel};
use shape_msr::io::*;
use shape_msr::mesh::{export_mesh, extract_mesh};
use shape_msr::msr::mst_decompose;
use shape_msr::phantoms::{make_primitive, Primitive};
use shape_msr::{Error, GridGeometry, ScalarGrid, Vec3, VectorGrid};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shape-msr"))
}

#[test]
fn scalar_grid_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridGeometry::new([7, 5, 6], 0.37, Vec3::new(-1.25, 3.5, 1e-3)).unwrap();
    let f = ScalarGrid::from_fn(g, |p| (p.x * 1.7).sin() + p.y * p.z / 3.0);
    let path = dir.path().join("f.grid");
    save_grid(&path, &f, ScalarWidth::W64).unwrap();
    let back = load_grid(&path).unwrap();
    assert_eq!(back.geometry(), f.geometry());
    assert!(back.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn narrow_width_round_trips_through_f32() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridGeometry::cube(6, 0.5).unwrap();
    let f = ScalarGrid::from_fn(g, |p| p.x - 1.1);
    let path = dir.path().join("f32.grid");
    save_grid(&path, &f, ScalarWidth::W32).unwrap();
    let back = load_grid(&path).unwrap();
    for (a, b) in back.values().iter().zip(f.values()) {
        assert_eq!(*a, f64::from(*b as f32));
    }
}

#[test]
fn truncated_payload_names_byte_counts() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridGeometry::cube(5, 1.0).unwrap();
    let path = dir.path().join("t.grid");
    save_grid(&path, &ScalarGrid::filled(g, 1.0), ScalarWidth::W64).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 16]).unwrap();
    match load_grid(&path).unwrap_err() {
        Error::PayloadSize { expected, actual } => {
            assert_eq!(expected, 125 * 8);
            assert_eq!(actual, 125 * 8 - 16);
        }
        e => panic!("unexpected error {e}"),
    }
}

#[test]
fn bad_headers_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridGeometry::cube(4, 1.0).unwrap();
    let path = dir.path().join("v.grid");
    save_grid(&path, &ScalarGrid::filled(g, 0.5), ScalarWidth::W64).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let text = String::from_utf8_lossy(&bytes).replacen("version=1", "version=2", 1);
    std::fs::write(&path, text.as_bytes()).unwrap();
    let msg = load_grid(&path).unwrap_err().to_string();
    assert!(msg.contains("version 2"), "{msg}");

    let mut nan = Vec::new();
    let header = String::from_utf8_lossy(&bytes).lines().next().unwrap().to_string();
    nan.extend_from_slice(header.as_bytes());
    nan.push(b'\n');
    for i in 0..64 {
        let v = if i == 9 { f64::NAN } else { 0.0 };
        nan.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(&path, nan).unwrap();
    let msg = load_grid(&path).unwrap_err().to_string();
    assert!(msg.contains("non-finite"), "{msg}");
}

#[test]
fn random_vector_grid_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridGeometry::new([6, 7, 8], 0.9, Vec3::new(2.0, -3.0, 0.5)).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let values: Vec<Vec3> = (0..g.len())
        .map(|_| Vec3::new(rng.gen_range(-1e3..1e3), rng.gen(), rng.gen_range(-1e-9..1e-9)))
        .collect();
    let v = VectorGrid::new(g, values).unwrap();
    let path = dir.path().join("w.grid");
    save_vector_grid(&path, &v, ScalarWidth::W64).unwrap();
    let back = load_vector_grid(&path).unwrap();
    assert_eq!(back.values(), v.values());
    assert!(load_grid(&path).is_err());
}

#[test]
fn record_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let g = cube(32);
    let phi = bumpy(g, mid(&g), 9.0, 0.1, 4);
    let s = EvolutionSchedule::new(vec![0.0, 2.0, 6.0], 2.0).unwrap();
    let rec = mst_decompose(&phi, &VelocityModel::volume_preserving(), &s).unwrap();
    let path = dir.path().join("r.rec");
    save_record(&path, &rec).unwrap();
    let back = load_record(&path).unwrap();
    assert_eq!(back, rec);
}

#[test]
fn sphere_mesh_area() {
    let g = cube(48);
    let phi = sphere(g, Vec3::new(23.6, 24.2, 23.9), 16.0);
    let m = extract_mesh(&phi).unwrap();
    let a = 4.0 * PI * 256.0;
    assert!((m.area() - a).abs() <= 0.03 * a);
    for v in &m.vertices {
        assert!(shape_msr::field::interpolate(&phi, v).unwrap().abs() <= 0.1);
    }
}

#[test]
fn cube_mesh_stays_in_bounds() {
    let g = cube(40);
    let c = Vec3::new(19.3, 20.1, 19.7);
    let phi = make_primitive(&Primitive::Cube { center: c, side: 16.0 }, g).unwrap();
    let m = extract_mesh(&phi).unwrap();
    let (lo, hi) = (c - Vec3::repeat(8.0), c + Vec3::repeat(8.0));
    for v in &m.vertices {
        for a in 0..3 {
            assert!(v[a] >= lo[a] - 1.0 && v[a] <= hi[a] + 1.0);
        }
    }
}

#[test]
fn bumpy_mesh_is_a_sphere_topologically() {
    let dir = tempfile::tempdir().unwrap();
    let g = cube(48);
    let phi = bumpy(g, mid(&g), 16.0, 0.15, 6);
    let path = dir.path().join("b.obj");
    let m = export_mesh(&phi, &path).unwrap();
    assert_eq!(m.euler_characteristic(), 2);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), m.vertices.len());
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), m.triangles.len());
}

#[test]
fn empty_surface_cannot_be_meshed() {
    let g = cube(8);
    assert!(matches!(extract_mesh(&ScalarGrid::filled(g, 1.0)), Err(Error::NoSurface)));
}

#[test]
fn cli_gen_then_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("s.grid");
    let out = bin()
        .args(["gen", "sphere", "--n", "48", "--radius", "16", "-o"])
        .arg(&grid)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("params:"));
    let out = bin().arg("metrics").arg(&grid).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let row = stdout.lines().last().unwrap();
    let v: f64 = row.split_whitespace().nth(1).unwrap().parse().unwrap();
    let exact = 4.0 / 3.0 * PI * 16f64.powi(3);
    assert!((v - exact).abs() <= 0.02 * exact, "{row}");
}

#[test]
fn cli_decompose_then_reconstruct_reports_each_level() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("b.grid");
    let rec = dir.path().join("b.rec");
    let recon = dir.path().join("r.grid");
    let hist = dir.path().join("hist");
    let run = |c: &mut Command| {
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8_lossy(&o.stdout).to_string()
    };
    run(bin()
        .args(["gen", "bumpy-sphere", "--n", "48", "--radius", "14", "--amplitude", "0.08", "-o"])
        .arg(&grid));
    let dec = run(bin()
        .args(["decompose", "--nodes", "0,2,6", "-i"])
        .arg(&grid)
        .arg("-r")
        .arg(&rec)
        .arg("--histograms")
        .arg(&hist));
    assert!(dec.contains("level 2"));
    assert!(hist.join("hist_1.txt").exists() && hist.join("hist_2.txt").exists());
    let out = run(bin().arg("reconstruct").arg("-r").arg(&rec).arg("-o").arg(&recon));
    let line = out.lines().find(|l| l.starts_with("hausdorff: ")).unwrap();
    let values: Vec<f64> = line["hausdorff: ".len()..]
        .split(", ")
        .map(|v| v.trim_end_matches('h').parse().unwrap())
        .collect();
    assert_eq!(values.len(), 2, "{line}");
    assert!(values.iter().all(|&v| v <= 1.5), "{line}");
    assert!(load_grid(&recon).is_ok());
}

#[test]
fn cli_usage_errors_exit_one() {
    let out = bin().args(["gen", "sphere", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(out.stdout.is_empty());
}

#[test]
fn cli_runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("metrics").arg(dir.path().join("missing.grid")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.grid"));
}

#[test]
fn cli_inpaint_reports_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("t.grid");
    let seeds = dir.path().join("seeds.txt");
    let out = dir.path().join("o.grid");
    let o = bin()
        .args(["gen", "tube", "--n", "40", "--radius", "4", "--chop", "10,14", "-o"])
        .arg(&grid)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // Tube axis runs along x from 9.75 to 29.25 at y = z = 19.5; the gap spans x in [19.75, 23.75].
    std::fs::write(&seeds, "# chop ends\n18.75 23.5 19.5\n24.75 23.5 19.5\n").unwrap();
    let o = bin()
        .args(["inpaint", "--levels", "4", "--max-outer", "2", "--radius", "6", "-i"])
        .arg(&grid)
        .arg("-s")
        .arg(&seeds)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("inpainted ") && l.ends_with('%')), "{stdout}");
    assert!(load_grid(&out).is_ok());
}
