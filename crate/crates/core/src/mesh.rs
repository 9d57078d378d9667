//! Zero level set extraction: edge crossings and a tetrahedral marching
//! triangulation for export and inspection.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{ScalarGrid, Vec3};

/// Zero crossings along the grid's axis-aligned edges, located by linear
/// interpolation. These are the marching-cubes vertex positions.
pub fn edge_crossings(grid: &ScalarGrid) -> Vec<Vec3> {
    let geom = grid.geometry();
    let [nx, ny, nz] = geom.dims();
    let v = grid.values();
    let strides = [1, nx, nx * ny];
    let mut out = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = geom.index(i, j, k);
                let a = v[idx];
                let pa = geom.position(i, j, k);
                let ijk = [i, j, k];
                for axis in 0..3 {
                    if ijk[axis] + 1 >= geom.dims()[axis] {
                        continue;
                    }
                    let b = v[idx + strides[axis]];
                    if (a < 0.0) != (b < 0.0) {
                        let t = a / (a - b);
                        let mut p = pa;
                        p[axis] += t * geom.spacing();
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    /// Signed enclosed volume by the divergence theorem.
    pub fn volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// V - E + F over the vertex-welded mesh.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Plain-text OBJ: `v x y z` lines followed by 1-based `f a b c` lines.
    pub fn write_obj(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for t in &self.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        w.flush()?;
        Ok(())
    }
}

// Freudenthal split of the unit cube into six tetrahedra sharing the 0-7
// diagonal; corner bit b selects +1 along axis b. The split is consistent
// across neighbouring cubes, so the output has no cracks.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// Triangulates the zero level set; vertices on shared edges are welded.
pub fn extract_mesh(grid: &ScalarGrid) -> Result<TriangleMesh> {
    if !grid.has_interface() {
        return Err(Error::NoSurface);
    }
    let geom = grid.geometry();
    let [nx, ny, nz] = geom.dims();
    let v = grid.values();
    let mut mesh = TriangleMesh::default();
    let mut edge_vertex: HashMap<(usize, usize), u32> = HashMap::new();

    let mut vertex_on = |a: usize, b: usize, mesh: &mut TriangleMesh| -> u32 {
        let key = (a.min(b), a.max(b));
        *edge_vertex.entry(key).or_insert_with(|| {
            let (fa, fb) = (v[a], v[b]);
            let t = fa / (fa - fb);
            let p = geom.position_of(a) + (geom.position_of(b) - geom.position_of(a)) * t;
            mesh.vertices.push(p);
            (mesh.vertices.len() - 1) as u32
        })
    };

    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corner: [usize; 8] = std::array::from_fn(|c| {
                    geom.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1))
                });
                let any_in = corner.iter().any(|&c| v[c] < 0.0);
                let any_out = corner.iter().any(|&c| v[c] >= 0.0);
                if !(any_in && any_out) {
                    continue;
                }
                for tet in TETS {
                    let nodes = tet.map(|c| corner[c]);
                    let (ins, outs): (Vec<usize>, Vec<usize>) =
                        nodes.iter().partition(|&&n| v[n] < 0.0);
                    if ins.is_empty() || outs.is_empty() {
                        continue;
                    }
                    let centroid = |s: &[usize]| {
                        s.iter().map(|&n| geom.position_of(n)).sum::<Vec3>() / s.len() as f64
                    };
                    let outward = centroid(&outs) - centroid(&ins);
                    let emit = |tri: [u32; 3], mesh: &mut TriangleMesh| {
                        let [a, b, c] = tri.map(|x| mesh.vertices[x as usize]);
                        let n = (b - a).cross(&(c - a));
                        if n.dot(&outward) < 0.0 {
                            mesh.triangles.push([tri[0], tri[2], tri[1]]);
                        } else {
                            mesh.triangles.push(tri);
                        }
                    };
                    match (ins.len(), outs.len()) {
                        (1, 3) | (3, 1) => {
                            let (apex, base) = if ins.len() == 1 {
                                (ins[0], &outs)
                            } else {
                                (outs[0], &ins)
                            };
                            let tri = [
                                vertex_on(apex, base[0], &mut mesh),
                                vertex_on(apex, base[1], &mut mesh),
                                vertex_on(apex, base[2], &mut mesh),
                            ];
                            emit(tri, &mut mesh);
                        }
                        (2, 2) => {
                            // Quad with cyclic order a0b0, a0b1, a1b1, a1b0.
                            let q = [
                                vertex_on(ins[0], outs[0], &mut mesh),
                                vertex_on(ins[0], outs[1], &mut mesh),
                                vertex_on(ins[1], outs[1], &mut mesh),
                                vertex_on(ins[1], outs[0], &mut mesh),
                            ];
                            emit([q[0], q[1], q[2]], &mut mesh);
                            emit([q[0], q[2], q[3]], &mut mesh);
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
    }
    Ok(mesh)
}

/// Extracts the zero level set and writes it as an OBJ file.
pub fn export_mesh(grid: &ScalarGrid, path: &Path) -> Result<TriangleMesh> {
    let mesh = extract_mesh(grid)?;
    mesh.write_obj(path)?;
    Ok(mesh)
}
