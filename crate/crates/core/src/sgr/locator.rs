use std::collections::HashMap;

use crate::equal_area::{sphere_to_square, square_to_sphere, SquarePoint};
use crate::error::{Result, SgrError};
use crate::geom::{arc_length, solid_angle, triple_sign};
use crate::param::SphericalEmbedding;
use crate::Vec3;

/// Containing face and barycentric weights of a sphere point.
///
/// `lambda[c]` weights corner `c` of the face and is the spherical area of
/// the sub-triangle opposite that corner over the face's area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricHit {
    pub face_index: usize,
    pub lambda: [f64; 3],
}

/// Closed containment: `s` is inside or on the boundary of face `(a, b, c)`.
#[inline]
fn contains(tri: &[Vec3; 3], s: &Vec3) -> bool {
    triple_sign(s, &tri[0], &tri[1]) >= 0.0
        && triple_sign(s, &tri[1], &tri[2]) >= 0.0
        && triple_sign(s, &tri[2], &tri[0]) >= 0.0
}

/// Below this solid angle the face is treated as planar.
const TINY_STERADIANS: f64 = 1e-14;

/// Barycentric weights of `s` in the spherical triangle `tri`.
pub fn spherical_barycentric(tri: &[Vec3; 3], s: &Vec3) -> [f64; 3] {
    let [a, b, c] = tri;
    let raw = if solid_angle(a, b, c) < TINY_STERADIANS {
        gnomonic_barycentric(tri, s)
    } else {
        [solid_angle(s, b, c), solid_angle(a, s, c), solid_angle(a, b, s)]
    };
    let clamped = raw.map(|x| if x.is_finite() { x.max(0.0) } else { 0.0 });
    let sum: f64 = clamped.iter().sum();
    if sum > 0.0 {
        clamped.map(|x| x / sum)
    } else {
        [1.0 / 3.0; 3]
    }
}

/// Planar barycentric weights after projecting `s` onto the plane of the chord triangle.
pub fn gnomonic_barycentric(tri: &[Vec3; 3], s: &Vec3) -> [f64; 3] {
    let [a, b, c] = tri;
    let n = (b - a).cross(&(c - a));
    let denom = s.dot(&n);
    if denom.abs() < 1e-300 {
        return [1.0 / 3.0; 3];
    }
    let p = s * (a.dot(&n) / denom);
    let area = |x: &Vec3, y: &Vec3, z: &Vec3| (y - x).cross(&(z - x)).dot(&n);
    let total = n.norm_squared();
    [area(&p, b, c) / total, area(a, &p, c) / total, area(a, b, &p) / total]
}

/// First face in index order whose closed spherical triangle contains `s`.
pub fn locate_brute_force(embedding: &SphericalEmbedding, s: &Vec3) -> Option<usize> {
    (0..embedding.face_count()).find(|&f| contains(&embedding.triangle(f), s))
}

/// Bounding cap (unit center, angular radius) of a set of sphere points.
fn cap(points: &[Vec3], center: Vec3) -> (Vec3, f64) {
    let len = center.norm();
    if len < 1e-12 {
        return (Vec3::z(), std::f64::consts::PI);
    }
    let c = center / len;
    let r = points.iter().map(|p| arc_length(&c, p)).fold(0.0, f64::max);
    (c, r)
}

/// Point-location index over the faces of a spherical embedding.
///
/// The unit square is cut into `bins x bins` cells. Each cell keeps the faces
/// whose bounding cap meets the cell's bounding cap, in ascending order, so a
/// query scans only its own cell and returns the same face as a full scan.
pub struct TriangleLocator<'a> {
    embedding: &'a SphericalEmbedding,
    bins: usize,
    cells: Vec<Vec<u32>>,
}

impl<'a> TriangleLocator<'a> {
    pub fn new(embedding: &'a SphericalEmbedding) -> Result<Self> {
        if let Some(f) = embedding.first_invalid_face() {
            return Err(SgrError::InvalidEmbedding(f));
        }
        let bins = ((embedding.face_count() as f64 / 4.0).sqrt().ceil() as usize).clamp(1, 256);
        let face_caps: Vec<(Vec3, f64)> = (0..embedding.face_count())
            .map(|f| {
                let t = embedding.triangle(f);
                let (c, r) = cap(&t, t[0] + t[1] + t[2]);
                // A face reaching past a right angle from its centroid direction is
                // treated as covering everything.
                if r >= std::f64::consts::FRAC_PI_2 {
                    (c, std::f64::consts::PI)
                } else {
                    (c, r)
                }
            })
            .collect();

        let per_side = 8;
        let cell_caps: Vec<(Vec3, f64)> = (0..bins * bins)
            .map(|k| cell_cap(k % bins, k / bins, bins, per_side))
            .collect();
        let max_cell = cell_caps.iter().map(|c| c.1).fold(0.0, f64::max);

        // Faces with small caps go into a hash over their centers; the rest are
        // checked against every cell.
        let small_limit = 0.5;
        let max_small = face_caps
            .iter()
            .map(|c| c.1)
            .filter(|&r| r <= small_limit)
            .fold(0.0, f64::max);
        let reach = max_small + max_cell + 1e-9;
        let spacing = (2.0 * (0.5 * reach).min(std::f64::consts::FRAC_PI_2).sin()).max(1e-6);
        let key = |p: &Vec3| {
            [
                (p.x / spacing).floor() as i64,
                (p.y / spacing).floor() as i64,
                (p.z / spacing).floor() as i64,
            ]
        };
        let mut hash: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        let mut large = Vec::new();
        for (f, (c, r)) in face_caps.iter().enumerate() {
            if *r <= small_limit {
                hash.entry(key(c)).or_default().push(f as u32);
            } else {
                large.push(f as u32);
            }
        }

        let cells = cell_caps
            .iter()
            .map(|(cc, cr)| {
                let meets = |f: u32| {
                    let (c, r) = &face_caps[f as usize];
                    // Small absolute slack absorbs rounding in the angle computations.
                    arc_length(c, cc) <= r + cr + 1e-9
                };
                let mut list: Vec<u32> = large.iter().copied().filter(|&f| meets(f)).collect();
                let [kx, ky, kz] = key(cc);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(fs) = hash.get(&[kx + dx, ky + dy, kz + dz]) {
                                list.extend(fs.iter().copied().filter(|&f| meets(f)));
                            }
                        }
                    }
                }
                list.sort_unstable();
                list
            })
            .collect();
        Ok(TriangleLocator {
            embedding,
            bins,
            cells,
        })
    }

    pub fn embedding(&self) -> &SphericalEmbedding {
        self.embedding
    }

    fn cell_of(&self, s: &Vec3) -> usize {
        let p = sphere_to_square(s);
        let n = self.bins as f64;
        let cx = ((p.s * n) as usize).min(self.bins - 1);
        let cy = ((p.t * n) as usize).min(self.bins - 1);
        cy * self.bins + cx
    }

    /// Lowest-index face containing `s`.
    pub fn locate_face(&self, s: &Vec3) -> usize {
        let found = self.cells[self.cell_of(s)]
            .iter()
            .map(|&f| f as usize)
            .find(|&f| contains(&self.embedding.triangle(f), s));
        // The caps are conservative, so this only triggers on a bug; fall back
        // to the full scan rather than fail.
        found
            .or_else(|| locate_brute_force(self.embedding, s))
            .unwrap_or(0)
    }

    /// Locates `s` (normalized first) and computes its barycentric weights.
    pub fn locate(&self, s: &Vec3) -> BarycentricHit {
        let s = s.normalize();
        let f = self.locate_face(&s);
        BarycentricHit {
            face_index: f,
            lambda: spherical_barycentric(&self.embedding.triangle(f), &s),
        }
    }
}

/// Bounding cap of one square cell's image, from samples along its boundary.
/// The radius is padded by the largest gap between neighbouring samples, which
/// bounds how far the unsampled boundary can reach.
fn cell_cap(cx: usize, cy: usize, bins: usize, per_side: usize) -> (Vec3, f64) {
    let n = bins as f64;
    let (s0, t0) = (cx as f64 / n, cy as f64 / n);
    let h = 1.0 / n;
    let mut boundary = Vec::with_capacity(4 * per_side);
    for k in 0..per_side {
        let a = k as f64 / per_side as f64;
        boundary.push((s0 + a * h, t0));
        boundary.push((s0 + h, t0 + a * h));
        boundary.push((s0 + h - a * h, t0 + h));
        boundary.push((s0, t0 + h - a * h));
    }
    // Walk order around the boundary for the gap estimate.
    boundary.sort_by(|p, q| {
        let key = |(s, t): &(f64, f64)| {
            let (ds, dt) = (s - s0, t - t0);
            if dt == 0.0 {
                ds
            } else if (ds - h).abs() < 1e-15 {
                h + dt
            } else if (dt - h).abs() < 1e-15 {
                3.0 * h - ds
            } else {
                4.0 * h - dt
            }
        };
        key(p).total_cmp(&key(q))
    });
    let points: Vec<Vec3> = boundary
        .iter()
        .map(|&(s, t)| square_to_sphere(SquarePoint::new(s.clamp(0.0, 1.0), t.clamp(0.0, 1.0))))
        .collect();
    let center = square_to_sphere(SquarePoint::new(s0 + 0.5 * h, t0 + 0.5 * h));
    let (c, r) = cap(&points, center);
    let gap = (0..points.len())
        .map(|k| arc_length(&points[k], &points[(k + 1) % points.len()]))
        .fold(0.0, f64::max);
    (c, r + gap)
}
