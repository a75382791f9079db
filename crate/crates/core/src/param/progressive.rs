//! Half-edge-collapse decimation down to a tetrahedron, recorded as vertex splits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Result, SgrError};
use crate::mesh::{validate_topology, TriangleMesh};
use crate::Vec3;

/// Inverse of one collapse of `vertex` into `parent`.
///
/// Face ids index the original face array; replaying a split restores the two
/// faces that the collapse removed and hands the listed corners back from
/// `parent` to `vertex`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSplit {
    pub parent: usize,
    pub vertex: usize,
    /// Apex of the face containing the directed edge `parent -> vertex`.
    pub left: usize,
    /// Apex of the face containing the directed edge `vertex -> parent`.
    pub right: usize,
    pub left_face: (usize, [usize; 3]),
    pub right_face: (usize, [usize; 3]),
    /// `(face id, corner slot)` pairs whose corner goes from `parent` back to `vertex`.
    pub moved_corners: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct ProgressiveMesh {
    pub vertex_count: usize,
    pub face_count: usize,
    pub base_vertices: [usize; 4],
    /// `(face id, corners)` of the four faces that survive decimation.
    pub base_faces: Vec<(usize, [usize; 3])>,
    /// Coarse-to-fine order.
    pub splits: Vec<VertexSplit>,
}

impl ProgressiveMesh {
    /// Replays every split from the base and returns the full face array.
    pub fn replay(&self) -> Vec<[usize; 3]> {
        let mut faces: Vec<Option<[usize; 3]>> = vec![None; self.face_count];
        for &(id, f) in &self.base_faces {
            faces[id] = Some(f);
        }
        for s in &self.splits {
            apply_split(&mut faces, s);
        }
        faces
            .into_iter()
            .map(|f| f.expect("replay restores every face"))
            .collect()
    }
}

pub(crate) fn apply_split(faces: &mut [Option<[usize; 3]>], s: &VertexSplit) {
    faces[s.left_face.0] = Some(s.left_face.1);
    faces[s.right_face.0] = Some(s.right_face.1);
    for &(fid, slot) in &s.moved_corners {
        if let Some(f) = faces[fid].as_mut() {
            f[slot] = s.vertex;
        }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    cost: f64,
    tie: u64,
    from: usize,
    to: usize,
    stamp_from: u32,
    stamp_to: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // Reversed so the max-heap pops the cheapest collapse first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.tie.cmp(&self.tie))
            .then_with(|| other.from.cmp(&self.from))
            .then_with(|| other.to.cmp(&self.to))
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn aspect(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let (l0, l1, l2) = ((b - a).norm(), (c - b).norm(), (a - c).norm());
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    if area <= 0.0 {
        return f64::INFINITY;
    }
    l0.max(l1).max(l2) * (l0 + l1 + l2) / (4.0 * 3f64.sqrt() * area)
}

struct Decimator<'a> {
    pos: &'a [Vec3],
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vfaces: Vec<Vec<usize>>,
    quadrics: Vec<Matrix4<f64>>,
    stamps: Vec<u32>,
    alive: usize,
    seed: u64,
    /// Offset added to quadric error so flat regions still prefer short edges.
    length_bias: f64,
}

impl<'a> Decimator<'a> {
    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self.vfaces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&w| w != v)
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    /// The two faces on edge (from, to) as `(left apex, right apex, left face, right face)`,
    /// where left holds the directed edge `to -> from`.
    fn wing(&self, from: usize, to: usize) -> Option<(usize, usize, usize, usize)> {
        let mut left = None;
        let mut right = None;
        for &f in &self.vfaces[from] {
            let tri = self.faces[f];
            for k in 0..3 {
                let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                if a == to && b == from {
                    left = Some((c, f));
                }
                if a == from && b == to {
                    right = Some((c, f));
                }
            }
        }
        let ((l, lf), (r, rf)) = (left?, right?);
        Some((l, r, lf, rf))
    }

    fn legal(&self, from: usize, to: usize) -> Option<(usize, usize, usize, usize)> {
        if self.alive <= 4 {
            return None;
        }
        let w = self.wing(from, to)?;
        let nf = self.neighbors(from);
        let nt = self.neighbors(to);
        let common = nf.iter().filter(|x| nt.binary_search(x).is_ok()).count();
        (common == 2 && w.0 != w.1).then_some(w)
    }

    fn cost(&self, from: usize, to: usize) -> Option<f64> {
        let (_, _, lf, rf) = self.legal(from, to)?;
        let target = self.pos[to];
        let q = self.quadrics[from] + self.quadrics[to];
        let h = Vector4::new(target.x, target.y, target.z, 1.0);
        let err = (h.transpose() * q * h)[0].max(0.0);
        let len2 = (self.pos[from] - target).norm_squared();
        let mut worst: f64 = 1.0;
        let mut flips = 0;
        for &f in &self.vfaces[from] {
            if f == lf || f == rf {
                continue;
            }
            let tri = self.faces[f];
            let old = tri.map(|i| self.pos[i]);
            let new = tri.map(|i| if i == from { target } else { self.pos[i] });
            let n_old = (old[1] - old[0]).cross(&(old[2] - old[0]));
            let n_new = (new[1] - new[0]).cross(&(new[2] - new[0]));
            if n_old.dot(&n_new) <= 0.0 {
                flips += 1;
            }
            worst = worst.max(aspect(&new[0], &new[1], &new[2]));
        }
        let penalty = if worst.is_finite() { worst } else { 1e12 };
        Some((err + self.length_bias * len2) * penalty * (1.0 + 1e6 * flips as f64))
    }

    fn push(&self, heap: &mut BinaryHeap<Candidate>, from: usize, to: usize) {
        if let Some(cost) = self.cost(from, to) {
            heap.push(Candidate {
                cost,
                tie: splitmix(self.seed ^ ((from as u64) << 32 | to as u64)),
                from,
                to,
                stamp_from: self.stamps[from],
                stamp_to: self.stamps[to],
            });
        }
    }

    fn collapse(&mut self, from: usize, to: usize) -> VertexSplit {
        let (l, r, lf, rf) = self.wing(from, to).expect("legal collapse has two wings");
        let left_face = (lf, self.faces[lf]);
        let right_face = (rf, self.faces[rf]);
        for dead in [lf, rf] {
            self.face_alive[dead] = false;
            for v in self.faces[dead] {
                self.vfaces[v].retain(|&f| f != dead);
            }
        }
        let mut moved = Vec::new();
        for f in std::mem::take(&mut self.vfaces[from]) {
            let slot = self.faces[f].iter().position(|&x| x == from).expect("incident");
            self.faces[f][slot] = to;
            self.vfaces[to].push(f);
            moved.push((f, slot));
        }
        moved.sort_unstable();
        let q = self.quadrics[from];
        self.quadrics[to] += q;
        self.alive -= 1;
        VertexSplit {
            parent: to,
            vertex: from,
            left: l,
            right: r,
            left_face,
            right_face,
            moved_corners: moved,
        }
    }
}

/// Decimates a closed genus-zero mesh to a tetrahedron.
///
/// Collapses are ordered by quadric error (plus a small squared-length term)
/// scaled by the worst aspect ratio among the triangles they produce, with a
/// heavy penalty on collapses that flip a triangle. Only collapses satisfying
/// the link condition are taken, so every intermediate mesh stays a closed
/// 2-manifold.
pub fn simplify_to_tetrahedron(mesh: &TriangleMesh, seed: u64) -> Result<ProgressiveMesh> {
    let report = validate_topology(mesh);
    if !(report.is_watertight && report.is_manifold) {
        return Err(SgrError::Topology(
            "mesh must be a watertight 2-manifold".into(),
        ));
    }
    if report.genus != Some(0) || report.components != 1 {
        return Err(SgrError::NonZeroGenus(report.genus.unwrap_or(-1)));
    }
    let n = mesh.vertex_count();
    if n < 4 {
        return Err(SgrError::Topology("need at least 4 vertices".into()));
    }
    let pos = mesh.vertices();
    let faces = mesh.faces().to_vec();
    let mut vfaces = vec![Vec::new(); n];
    let mut quadrics = vec![Matrix4::zeros(); n];
    for (fi, f) in faces.iter().enumerate() {
        let [a, b, c] = f.map(|i| pos[i]);
        let nrm = (b - a).cross(&(c - a));
        let area = 0.5 * nrm.norm();
        if area > 0.0 {
            let u = nrm.normalize();
            let plane = Vector4::new(u.x, u.y, u.z, -u.dot(&a));
            let k = plane * plane.transpose() * area;
            for &v in f {
                quadrics[v] += k;
            }
        }
        for &v in f {
            vfaces[v].push(fi);
        }
    }
    let mean_area = mesh.total_area() / faces.len() as f64;
    let mut dec = Decimator {
        pos,
        face_alive: vec![true; faces.len()],
        faces,
        vfaces,
        quadrics,
        stamps: vec![0; n],
        alive: n,
        seed,
        length_bias: 1e-3 * mean_area,
    };

    let mut heap = BinaryHeap::new();
    for (a, b) in mesh.edges() {
        dec.push(&mut heap, a, b);
        dec.push(&mut heap, b, a);
    }
    let mut collapses = Vec::with_capacity(n - 4);
    while dec.alive > 4 {
        let Some(c) = heap.pop() else {
            return Err(SgrError::Internal(format!(
                "no legal collapse left at {} vertices",
                dec.alive
            )));
        };
        if dec.stamps[c.from] != c.stamp_from || dec.stamps[c.to] != c.stamp_to {
            continue;
        }
        if dec.vfaces[c.from].is_empty() || dec.legal(c.from, c.to).is_none() {
            continue;
        }
        let split = dec.collapse(c.from, c.to);
        let mut touched = dec.neighbors(c.to);
        touched.push(c.to);
        for &t in &touched {
            dec.stamps[t] = dec.stamps[t].wrapping_add(1);
        }
        for &t in &touched {
            for w in dec.neighbors(t) {
                dec.push(&mut heap, t, w);
                dec.push(&mut heap, w, t);
            }
        }
        collapses.push(split);
    }

    let base_faces: Vec<(usize, [usize; 3])> = (0..dec.faces.len())
        .filter(|&f| dec.face_alive[f])
        .map(|f| (f, dec.faces[f]))
        .collect();
    let mut base: Vec<usize> = base_faces.iter().flat_map(|(_, f)| *f).collect();
    base.sort_unstable();
    base.dedup();
    if base.len() != 4 || base_faces.len() != 4 {
        return Err(SgrError::Internal(format!(
            "decimation ended with {} vertices and {} faces",
            base.len(),
            base_faces.len()
        )));
    }
    collapses.reverse();
    Ok(ProgressiveMesh {
        vertex_count: n,
        face_count: mesh.face_count(),
        base_vertices: [base[0], base[1], base[2], base[3]],
        base_faces,
        splits: collapses,
    })
}
