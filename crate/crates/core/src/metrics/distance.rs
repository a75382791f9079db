//! Area-uniform surface sampling and point-to-surface distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SgrError};
use crate::mesh::TriangleMesh;
use crate::Vec3;

/// Points drawn uniformly by area from a mesh surface.
#[derive(Debug, Clone)]
pub struct SurfaceSamples {
    pub points: Vec<Vec3>,
}

/// Draws `count` area-uniform points. Sample `k` depends only on `seed` and
/// `k`, so the result does not depend on thread scheduling.
pub fn sample_surface(mesh: &TriangleMesh, count: usize, seed: u64) -> Result<SurfaceSamples> {
    let mut cdf = Vec::with_capacity(mesh.face_count());
    let mut total = 0.0;
    for f in 0..mesh.face_count() {
        total += mesh.face_area(f);
        cdf.push(total);
    }
    if !(total > 0.0) {
        return Err(SgrError::ZeroArea);
    }
    let points = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let pick: f64 = rng.random::<f64>() * total;
            let f = cdf.partition_point(|&c| c <= pick).min(cdf.len() - 1);
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            let [a, b, c] = mesh.triangle(f);
            a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2)
        })
        .collect();
    Ok(SurfaceSamples { points })
}

/// Closest point on triangle `abc` to `p`.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn dist_sq(&self, p: &Vec3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros());
        d.norm_squared()
    }
}

struct Node {
    bounds: Aabb,
    /// Leaf: `faces[start..start + count]`. Inner: children at `start` and `start + 1`.
    start: usize,
    count: usize,
}

const LEAF_SIZE: usize = 4;

/// Bounding-volume hierarchy answering nearest-surface queries on one mesh.
pub struct DistanceField<'a> {
    mesh: &'a TriangleMesh,
    nodes: Vec<Node>,
    faces: Vec<usize>,
}

impl<'a> DistanceField<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        let mut faces: Vec<usize> = (0..mesh.face_count()).collect();
        let centroids: Vec<Vec3> = (0..mesh.face_count())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                (a + b + c) / 3.0
            })
            .collect();
        let mut nodes = vec![Node {
            bounds: Aabb::empty(),
            start: 0,
            count: 0,
        }];
        let mut stack = vec![(0usize, 0usize, faces.len())];
        while let Some((id, lo, hi)) = stack.pop() {
            let mut bounds = Aabb::empty();
            let mut cbox = Aabb::empty();
            for &f in &faces[lo..hi] {
                for p in mesh.triangle(f) {
                    bounds.grow(&p);
                }
                cbox.grow(&centroids[f]);
            }
            nodes[id].bounds = bounds;
            if hi - lo <= LEAF_SIZE {
                nodes[id].start = lo;
                nodes[id].count = hi - lo;
                continue;
            }
            let axis = (cbox.hi - cbox.lo).imax();
            let mid = (lo + hi) / 2;
            faces[lo..hi].select_nth_unstable_by(mid - lo, |&f, &g| {
                centroids[f][axis].total_cmp(&centroids[g][axis]).then(f.cmp(&g))
            });
            let left = nodes.len();
            for _ in 0..2 {
                nodes.push(Node {
                    bounds: Aabb::empty(),
                    start: 0,
                    count: 0,
                });
            }
            nodes[id].start = left;
            stack.push((left, lo, mid));
            stack.push((left + 1, mid, hi));
        }
        DistanceField { mesh, nodes, faces }
    }

    /// Distance from `p` to the nearest point of the surface.
    pub fn distance(&self, p: &Vec3) -> f64 {
        if self.faces.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bounds.dist_sq(p) >= best {
                continue;
            }
            if node.count > 0 {
                for &f in &self.faces[node.start..node.start + node.count] {
                    let [a, b, c] = self.mesh.triangle(f);
                    best = best.min((closest_point_on_triangle(p, &a, &b, &c) - p).norm_squared());
                }
            } else {
                let (l, r) = (node.start, node.start + 1);
                let (dl, dr) = (self.nodes[l].bounds.dist_sq(p), self.nodes[r].bounds.dist_sq(p));
                if dl < dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best.sqrt()
    }

    pub fn distances(&self, points: &[Vec3]) -> Vec<f64> {
        points.par_iter().map(|p| self.distance(p)).collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn chamfer_from(a_to_b: &[f64], b_to_a: &[f64]) -> f64 {
    // Summed in a fixed order so swapping the meshes gives the same bits.
    let (x, y) = (mean(a_to_b), mean(b_to_a));
    (x.min(y) + x.max(y)) / 2.0
}

pub(crate) fn f_score_from(a_to_b: &[f64], b_to_a: &[f64], tau: f64) -> f64 {
    let within = |d: &[f64]| d.iter().filter(|&&x| x <= tau).count() as f64 / d.len() as f64;
    let (precision, recall) = (within(a_to_b), within(b_to_a));
    if precision + recall == 0.0 {
        0.0
    } else {
        100.0 * 2.0 * precision * recall / (precision + recall)
    }
}

fn both_ways(a: &TriangleMesh, b: &TriangleMesh, samples: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let sa = sample_surface(a, samples, seed)?;
    let sb = sample_surface(b, samples, seed)?;
    Ok((
        DistanceField::new(b).distances(&sa.points),
        DistanceField::new(a).distances(&sb.points),
    ))
}

/// Symmetric mean nearest-surface distance between two meshes.
pub fn chamfer_distance(a: &TriangleMesh, b: &TriangleMesh, samples: usize, seed: u64) -> Result<f64> {
    let (ab, ba) = both_ways(a, b, samples, seed)?;
    Ok(chamfer_from(&ab, &ba))
}

/// F-score in percent: harmonic mean of the fractions of samples on each
/// mesh lying within `tau` of the other.
pub fn f_score(a: &TriangleMesh, b: &TriangleMesh, tau: f64, samples: usize, seed: u64) -> Result<f64> {
    let (ab, ba) = both_ways(a, b, samples, seed)?;
    Ok(f_score_from(&ab, &ba, tau))
}
