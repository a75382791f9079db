//! Equal-area bijection between the unit square and the unit sphere.
//!
//! The square is centered as `u = 2s - 1`, `v = 2t - 1` and cut into eight
//! triangles by the axes and the diagonals `|u| + |v| = 1`:
//!
//! | region            | hemisphere | radius `r`         | `z`          |
//! |-------------------|------------|--------------------|--------------|
//! | `\|u\|+\|v\| <= 1` (inner) | north | `\|u\| + \|v\|`     | `1 - r^2`    |
//! | `\|u\|+\|v\| > 1` (outer)  | south | `2 - \|u\| - \|v\|` | `-(1 - r^2)` |
//!
//! In every quadrant the disk angle is `phi = pi/4 * ((|v| - |u|) / r + 1)`,
//! measured from the quadrant's `u` axis, and the point is lifted with
//! `x = sign(u) cos(phi) r sqrt(2 - r^2)`, `y = sign(v) sin(phi) r sqrt(2 - r^2)`.
//! The quadrant is picked by the signs of `u` and `v`, with zero counted as
//! positive. At the poles (`r = 0`) `phi` is taken as zero.
//!
//! The inverse assigns `x >= 0` to `u >= 0`, `y >= 0` to `v >= 0`, and `z >= 0`
//! to the inner triangles, so seam points resolve to a single preimage. All four
//! square corners map to the south pole; its canonical preimage is `(1, 1)`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

use crate::Vec3;

/// A point of the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquarePoint {
    pub s: f64,
    pub t: f64,
}

impl SquarePoint {
    pub fn new(s: f64, t: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t));
        SquarePoint { s, t }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn square_to_sphere(p: SquarePoint) -> Vec3 {
    let u = 2.0 * p.s - 1.0;
    let v = 2.0 * p.t - 1.0;
    let (au, av) = (u.abs(), v.abs());
    let signed_distance = 1.0 - au - av;
    let r = 1.0 - signed_distance.abs();
    let phi = if r == 0.0 {
        0.0
    } else {
        FRAC_PI_4 * ((av - au) / r + 1.0)
    };
    let z = sign(signed_distance) * (1.0 - r * r);
    let k = r * (2.0 - r * r).max(0.0).sqrt();
    Vec3::new(sign(u) * phi.cos() * k, sign(v) * phi.sin() * k, z)
}

pub fn sphere_to_square(q: &Vec3) -> SquarePoint {
    let (ax, ay, az) = (q.x.abs(), q.y.abs(), q.z.abs());
    // 1 - |z| without cancellation near the poles.
    let r = ((ax * ax + ay * ay) / (1.0 + az)).sqrt();
    let phi = if ax == 0.0 && ay == 0.0 {
        0.0
    } else {
        ay.atan2(ax) / (2.0 * FRAC_PI_4)
    };
    let mut v = phi * r;
    let mut u = r - v;
    if q.z < 0.0 {
        (u, v) = (1.0 - v, 1.0 - u);
    }
    u *= sign(q.x);
    v *= sign(q.y);
    SquarePoint {
        s: (0.5 * (u + 1.0)).clamp(0.0, 1.0),
        t: (0.5 * (v + 1.0)).clamp(0.0, 1.0),
    }
}

/// One sample of the regular grid.
#[derive(Debug, Clone, Copy)]
pub struct GridSample {
    /// Column index `i` in `1..=W`.
    pub i: usize,
    /// Row index `j` in `1..=H`.
    pub j: usize,
    pub square: SquarePoint,
    pub sphere: Vec3,
}

/// Grouping of grid samples whose sphere points coincide.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeldMap {
    /// For every sample, the index of its distinct sphere point.
    pub canonical: Vec<usize>,
    /// For every distinct point, the first sample that produced it.
    pub representatives: Vec<usize>,
}

impl WeldMap {
    pub fn distinct_count(&self) -> usize {
        self.representatives.len()
    }

    /// Samples grouped by distinct point.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.representatives.len()];
        for (sample, &c) in self.canonical.iter().enumerate() {
            g[c].push(sample);
        }
        g
    }
}

pub const WELD_TOLERANCE: f64 = 1e-12;

/// Samples `u_ij = (i/R, j/R)` for `i, j` in `1..=R`, row-major (`j` outer),
/// lifted to the sphere.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub resolution: usize,
    pub samples: Vec<GridSample>,
    pub weld: WeldMap,
}

impl SphereGrid {
    /// Row-major sample index of grid position `(i, j)` (both 1-based).
    pub fn index(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.resolution + (i - 1)
    }

    /// Distinct sphere points in weld order.
    pub fn distinct_points(&self) -> Vec<Vec3> {
        self.weld
            .representatives
            .iter()
            .map(|&s| self.samples[s].sphere)
            .collect()
    }
}

pub fn uniform_grid(resolution: usize) -> SphereGrid {
    assert!(resolution >= 2, "grid resolution must be at least 2");
    let n = resolution as f64;
    let mut samples = Vec::with_capacity(resolution * resolution);
    for j in 1..=resolution {
        for i in 1..=resolution {
            let square = SquarePoint::new(i as f64 / n, j as f64 / n);
            samples.push(GridSample {
                i,
                j,
                square,
                sphere: square_to_sphere(square),
            });
        }
    }
    let weld = weld_points(&samples.iter().map(|s| s.sphere).collect::<Vec<_>>(), WELD_TOLERANCE);
    SphereGrid {
        resolution,
        samples,
        weld,
    }
}

/// Merges points closer than `tol`, keeping first-seen order.
pub fn weld_points(points: &[Vec3], tol: f64) -> WeldMap {
    let cell = (tol * 1e3).max(1e-9);
    let key = |p: &Vec3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut canonical = Vec::with_capacity(points.len());
    let mut representatives: Vec<usize> = Vec::new();
    for (idx, p) in points.iter().enumerate() {
        let (kx, ky, kz) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = buckets.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &d in list {
                            if (points[representatives[d]] - p).norm() < tol {
                                found = Some(d);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        let d = found.unwrap_or_else(|| {
            representatives.push(idx);
            let d = representatives.len() - 1;
            buckets.entry((kx, ky, kz)).or_default().push(d);
            d
        });
        canonical.push(d);
    }
    WeldMap {
        canonical,
        representatives,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn hand_evaluated_points() {
        assert!(close(square_to_sphere(SquarePoint::new(0.5, 0.5)), Vec3::z(), 1e-15));
        assert!(close(square_to_sphere(SquarePoint::new(1.0, 1.0)), -Vec3::z(), 1e-15));
        let p = square_to_sphere(SquarePoint::new(0.75, 0.5));
        assert!(close(p, Vec3::new(0.5 * 1.75f64.sqrt(), 0.0, 0.75), 1e-15));
        assert!((p.x - 0.661438).abs() < 1e-6);
    }

    #[test]
    fn all_corners_reach_the_south_pole() {
        for (s, t) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            assert!(close(square_to_sphere(SquarePoint::new(s, t)), -Vec3::z(), 1e-15));
        }
        let q = sphere_to_square(&-Vec3::z());
        assert_eq!((q.s, q.t), (1.0, 1.0));
        let n = sphere_to_square(&Vec3::z());
        assert_eq!((n.s, n.t), (0.5, 0.5));
    }

    #[test]
    fn quadrant_signs_follow_square_axes() {
        // Each of the eight triangles lands in its own octant.
        for (s, t, sx, sy, sz) in [
            (0.6, 0.55, 1.0, 1.0, 1.0),
            (0.4, 0.55, -1.0, 1.0, 1.0),
            (0.4, 0.45, -1.0, -1.0, 1.0),
            (0.6, 0.45, 1.0, -1.0, 1.0),
            (0.95, 0.9, 1.0, 1.0, -1.0),
            (0.05, 0.9, -1.0, 1.0, -1.0),
            (0.05, 0.1, -1.0, -1.0, -1.0),
            (0.95, 0.1, 1.0, -1.0, -1.0),
        ] {
            let p = square_to_sphere(SquarePoint::new(s, t));
            assert!(p.x * sx > 0.0 && p.y * sy > 0.0 && p.z * sz > 0.0, "{s} {t} -> {p:?}");
        }
    }

    #[test]
    fn small_grid_enumeration() {
        let g = uniform_grid(2);
        assert_eq!(g.samples.len(), 4);
        let last = g.samples[g.index(2, 2)];
        assert!(close(last.sphere, -Vec3::z(), 1e-15));
        // (1/2, 1) and (1, 1/2) sit on the outer edge midpoints.
        assert!(close(g.samples[g.index(1, 1)].sphere, Vec3::z(), 1e-15));
    }

    #[test]
    fn edge_samples_weld_in_mirrored_pairs() {
        // On the edge s = 1 the points (1, t) and (1, 1 - t) coincide.
        let r = 8;
        let g = uniform_grid(r);
        let a = g.samples[g.index(r, 2)].sphere;
        let b = g.samples[g.index(r, r - 2)].sphere;
        assert!(close(a, b, 1e-12));
        assert_eq!(
            g.weld.canonical[g.index(r, 2)],
            g.weld.canonical[g.index(r, r - 2)]
        );
        assert!(g.weld.distinct_count() < r * r);
        for s in &g.samples {
            assert!((s.sphere.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn continuity_across_diagonal_seam() {
        // Points straddling |u|+|v| = 1 at distance delta map close together.
        let mut worst: f64 = 0.0;
        for k in 1..200 {
            let s = 0.5 + 0.5 * k as f64 / 200.0;
            let t = 1.0 - s + 0.5;
            let d = 1e-7;
            let a = square_to_sphere(SquarePoint::new(s - d, t - d));
            let b = square_to_sphere(SquarePoint::new(s + d, t + d));
            worst = worst.max((a - b).norm() / (2.0 * 2f64.sqrt() * d));
        }
        assert!(worst < 10.0, "seam Lipschitz ratio {worst}");
    }

    proptest! {
        #[test]
        fn round_trip_interior(s in 0.0005f64..0.9995, t in 0.0005f64..0.9995) {
            let p = square_to_sphere(SquarePoint::new(s, t));
            prop_assert!((p.norm() - 1.0).abs() <= 1e-12);
            let q = sphere_to_square(&p);
            prop_assert!((q.s - s).abs() <= 1e-9 && (q.t - t).abs() <= 1e-9, "{s} {t} -> {q:?}");
        }

        #[test]
        fn inverse_then_forward(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let d = Vec3::new(x, y, z);
            prop_assume!(d.norm() > 1e-3);
            let d = d.normalize();
            let back = square_to_sphere(sphere_to_square(&d));
            prop_assert!((back - d).norm() <= 1e-9);
        }
    }
}
