//! Uniform spatial hash for nearest-point queries over surface samples.

use std::collections::HashMap;

use crate::grid::Vec3;

pub struct PointHash<'a> {
    points: &'a [Vec3],
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<u32>>,
    lo: [i64; 3],
    hi: [i64; 3],
}

impl<'a> PointHash<'a> {
    pub fn new(points: &'a [Vec3], cell: f64) -> Self {
        assert!(cell > 0.0, "hash cell size must be positive");
        let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for (i, p) in points.iter().enumerate() {
            let key = Self::key_for(p, cell);
            for a in 0..3 {
                lo[a] = lo[a].min(key[a]);
                hi[a] = hi[a].max(key[a]);
            }
            buckets.entry(key).or_default().push(i as u32);
        }
        Self {
            points,
            cell,
            buckets,
            lo,
            hi,
        }
    }

    #[inline]
    fn key_for(p: &Vec3, cell: f64) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index and distance of the closest stored point. Ties go to the lower index.
    pub fn nearest(&self, p: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let c = Self::key_for(p, self.cell);
        // Shells beyond this radius cannot contain any point.
        let max_ring = (0..3)
            .map(|a| (c[a] - self.lo[a]).abs().max((self.hi[a] - c[a]).abs()))
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=max_ring {
            if let Some((_, d)) = best {
                // Every point in shell `ring` is at least (ring - 1) * cell away.
                if d <= (ring - 1) as f64 * self.cell {
                    break;
                }
            }
            for dz in -ring..=ring {
                for dy in -ring..=ring {
                    for dx in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        let key = [c[0] + dx, c[1] + dy, c[2] + dz];
                        if let Some(bucket) = self.buckets.get(&key) {
                            for &i in bucket {
                                let d = (self.points[i as usize] - p).norm();
                                let better = match best {
                                    None => true,
                                    Some((bi, bd)) => d < bd || (d == bd && (i as usize) < bi),
                                };
                                if better {
                                    best = Some((i as usize, d));
                                }
                            }
                        }
                    }
                }
            }
        }
        best
    }

    /// True if some stored point lies strictly closer than `r` to `p`.
    pub fn any_within(&self, p: &Vec3, r: f64) -> bool {
        let c = Self::key_for(p, self.cell);
        let reach = (r / self.cell).ceil() as i64;
        for dz in -reach..=reach {
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    if let Some(bucket) = self.buckets.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if bucket
                            .iter()
                            .any(|&i| (self.points[i as usize] - p).norm() < r)
                        {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Incrementally built hash used for greedy thinning of point sets.
pub(crate) struct GrowingHash {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<Vec3>>,
}

impl GrowingHash {
    pub fn new(cell: f64) -> Self {
        Self {
            cell,
            buckets: HashMap::new(),
        }
    }

    pub fn any_within(&self, p: &Vec3, r: f64) -> bool {
        let c = PointHash::key_for(p, self.cell);
        let reach = (r / self.cell).ceil() as i64;
        for dz in -reach..=reach {
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    if let Some(bucket) = self.buckets.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if bucket.iter().any(|q| (q - p).norm() < r) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    pub fn insert(&mut self, p: Vec3) {
        self.buckets
            .entry(PointHash::key_for(&p, self.cell))
            .or_default()
            .push(p);
    }
}
