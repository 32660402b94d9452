//! Equal-area Fibonacci cells on the unit sphere with exact nearest-centre lookup.

use std::f64::consts::PI;

pub struct FibonacciSphere {
    centers: Vec<[f64; 3]>,
    edge: f64,
    dim: usize,
    buckets: Vec<Vec<u32>>,
}

impl FibonacciSphere {
    pub fn new(n_cells: usize) -> Self {
        assert!(n_cells > 0);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let centers: Vec<[f64; 3]> = (0..n_cells)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / n_cells as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * PI * (i as f64 / golden).fract();
                [rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect();
        // voxel edge of one cell diameter; lookups scan the 27 voxels around the query
        let edge = (4.0 * PI / n_cells as f64).sqrt().min(2.0);
        let dim = (2.0 / edge).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); dim * dim * dim];
        let mut sphere = FibonacciSphere { centers, edge, dim, buckets: Vec::new() };
        for (i, c) in sphere.centers.iter().enumerate() {
            buckets[sphere.bucket(sphere.voxel(c))].push(i as u32);
        }
        sphere.buckets = buckets;
        sphere
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn center(&self, i: usize) -> [f64; 3] {
        self.centers[i]
    }

    fn voxel(&self, p: &[f64; 3]) -> [usize; 3] {
        p.map(|v| (((v + 1.0) / self.edge).floor().max(0.0) as usize).min(self.dim - 1))
    }

    fn bucket(&self, v: [usize; 3]) -> usize {
        (v[0] * self.dim + v[1]) * self.dim + v[2]
    }

    fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
    }

    /// Index of the cell whose centre is nearest to the unit vector `p`.
    pub fn nearest(&self, p: &[f64; 3]) -> usize {
        let v = self.voxel(p);
        let mut best = (f64::INFINITY, 0usize);
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                for dz in -1i64..=1 {
                    let q = [v[0] as i64 + dx, v[1] as i64 + dy, v[2] as i64 + dz];
                    if q.iter().any(|&k| k < 0 || k >= self.dim as i64) {
                        continue;
                    }
                    for &i in &self.buckets[self.bucket(q.map(|k| k as usize))] {
                        let d = Self::dist2(p, &self.centers[i as usize]);
                        if d < best.0 || (d == best.0 && (i as usize) < best.1) {
                            best = (d, i as usize);
                        }
                    }
                }
            }
        }
        // anything outside the 27 voxels is farther than one edge
        if best.0 <= self.edge * self.edge {
            best.1
        } else {
            self.nearest_brute(p)
        }
    }

    pub fn nearest_brute(&self, p: &[f64; 3]) -> usize {
        let mut best = (f64::INFINITY, 0usize);
        for (i, c) in self.centers.iter().enumerate() {
            let d = Self::dist2(p, c);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Typical angular cell size √(4π/n).
    pub fn cell_size(&self) -> f64 {
        (4.0 * PI / self.len() as f64).sqrt()
    }
}
