//! Canonical test solids.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::TriangleMesh;
use crate::Vec3;

/// Flips faces of a star-shaped (about the origin) closed mesh so normals point outward.
fn orient_outward(vertices: &[Vec3], faces: &mut [[usize; 3]]) {
    for f in faces.iter_mut() {
        let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }
}

fn build(vertices: Vec<Vec3>, mut faces: Vec<[usize; 3]>) -> TriangleMesh {
    orient_outward(&vertices, &mut faces);
    TriangleMesh::new(vertices, faces).expect("canonical solid is well formed")
}

/// Regular tetrahedron inscribed in the unit sphere.
pub fn tetrahedron() -> TriangleMesh {
    let s = 1.0 / 3f64.sqrt();
    let v = vec![
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ];
    build(v, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])
}

/// Octahedron with vertices on the coordinate axes.
pub fn octahedron() -> TriangleMesh {
    let v = vec![
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
    ];
    let f = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    build(v, f)
}

/// Regular icosahedron inscribed in the unit sphere.
pub fn icosahedron() -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let v = raw
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    build(v, f)
}

/// Unit icosphere: `level` rounds of 1-to-4 subdivision of the icosahedron.
/// Level 3 has 642 vertices.
pub fn icosphere(level: u32) -> TriangleMesh {
    let (mut v, mut f) = icosahedron().into_parts();
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(f.len() * 4);
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push(((v[a] + v[b]) * 0.5).normalize());
                v.len() - 1
            })
        };
        for &[a, b, c] in &f {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        f = next;
    }
    TriangleMesh::new(v, f).expect("icosphere is well formed")
}

/// Icosphere with a smooth random radial bump field: radius `1 + amplitude * n(v)`
/// with `|n| <= 1`, built from a few low-frequency cosine waves.
pub fn deformed_icosphere(level: u32, amplitude: f64, seed: u64) -> TriangleMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(Vec3, f64, f64, f64)> = (0..4)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            let dir = Vec3::new(r * a.cos(), r * a.sin(), z);
            (dir, rng.random_range(1.0..3.0), rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.2..1.0))
        })
        .collect();
    let total: f64 = waves.iter().map(|w| w.3).sum();
    icosphere(level).map_vertices(|v| {
        let n: f64 = waves
            .iter()
            .map(|(d, freq, phase, w)| w * (freq * d.dot(v) + phase).cos())
            .sum::<f64>()
            / total;
        v * (1.0 + amplitude * n)
    })
}

/// Torus around the z axis with `major` x `minor` quad cells split into triangles.
pub fn torus(major: usize, minor: usize, r_major: f64, r_minor: f64) -> TriangleMesh {
    let mut v = Vec::with_capacity(major * minor);
    for i in 0..major {
        let u = i as f64 / major as f64 * std::f64::consts::TAU;
        for j in 0..minor {
            let w = j as f64 / minor as f64 * std::f64::consts::TAU;
            let r = r_major + r_minor * w.cos();
            v.push(Vec3::new(r * u.cos(), r * u.sin(), r_minor * w.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % major) * minor + (j % minor);
    let mut f = Vec::new();
    for i in 0..major {
        for j in 0..minor {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            f.push([a, b, c]);
            f.push([a, c, d]);
        }
    }
    TriangleMesh::new(v, f).expect("torus is well formed")
}
