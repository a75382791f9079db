use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SgrError};
use crate::geom::{arc_length, triple_sign};
use crate::mesh::TriangleMesh;
use crate::param::kernel::kernel_point_near;
use crate::param::linesearch;
use crate::param::progressive::{apply_split, ProgressiveMesh, VertexSplit};
use crate::param::stretch::{face_energy, EnergyWeights, MeshFrame};
use crate::param::ParamConfig;
use crate::Vec3;

/// Per-vertex unit-sphere positions sharing a mesh's connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalEmbedding {
    positions: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

impl SphericalEmbedding {
    /// Checks that every position is unit length and every face is positively oriented.
    pub fn new(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= positions.len() {
                    return Err(SgrError::MissingVertex {
                        face: f,
                        index: v,
                        vertex_count: positions.len(),
                    });
                }
            }
        }
        if let Some(v) = positions.iter().position(|p| (p.norm() - 1.0).abs() > 1e-9) {
            return Err(SgrError::Parse(format!("position {v} is not on the unit sphere")));
        }
        let e = SphericalEmbedding { positions, faces };
        match e.first_invalid_face() {
            Some(f) => Err(SgrError::InvalidEmbedding(f)),
            None => Ok(e),
        }
    }

    pub fn from_parts_unchecked(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        SphericalEmbedding { positions, faces }
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.positions[a], self.positions[b], self.positions[c]]
    }

    /// First face whose spherical triangle is not strictly counter-clockwise
    /// seen from outside the sphere.
    pub fn first_invalid_face(&self) -> Option<usize> {
        (0..self.faces.len()).find(|&f| {
            let [a, b, c] = self.triangle(f);
            triple_sign(&a, &b, &c) <= 0.0
        })
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Vec<[usize; 3]>) {
        (self.positions, self.faces)
    }
}

fn base_positions(pm: &ProgressiveMesh) -> Vec<Vec3> {
    let s = 1.0 / 3f64.sqrt();
    let mut corners = [
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ];
    let mut positions = vec![Vec3::zeros(); pm.vertex_count];
    let place = |positions: &mut Vec<Vec3>, corners: &[Vec3; 4]| {
        for (k, &v) in pm.base_vertices.iter().enumerate() {
            positions[v] = corners[k];
        }
    };
    place(&mut positions, &corners);
    let [a, b, c] = pm.base_faces[0].1;
    if triple_sign(&positions[a], &positions[b], &positions[c]) < 0.0 {
        // Swapping two corners mirrors the tetrahedron and flips every face.
        corners.swap(0, 1);
        place(&mut positions, &corners);
    }
    positions
}

/// Places the base tetrahedron of `pm` on the sphere as a regular tetrahedron.
/// Vertices outside the base sit at the origin until they are inserted.
pub fn embed_base(pm: &ProgressiveMesh) -> SphericalEmbedding {
    SphericalEmbedding {
        positions: base_positions(pm),
        faces: pm.base_faces.iter().map(|&(_, f)| f).collect(),
    }
}

/// Local energy of `v`'s incident faces with `v` at `x`.
fn local_energy(
    positions: &[Vec3],
    v: usize,
    x: &Vec3,
    faces: &[(Option<MeshFrame>, [usize; 3])],
    w: &EnergyWeights,
) -> f64 {
    let mut sum = 0.0;
    for (frame, tri) in faces {
        let t = tri.map(|i| if i == v { *x } else { positions[i] });
        match frame {
            Some(fr) => sum += face_energy(fr, &t, w),
            None => {
                if triple_sign(&t[0], &t[1], &t[2]) <= 0.0 {
                    return f64::INFINITY;
                }
            }
        }
    }
    sum
}

/// Moves `v` along random great circles, keeping each accepted point inside
/// the kernel of its ring. Returns the arc length `v` travelled.
fn relax(
    positions: &mut [Vec3],
    v: usize,
    faces: &[(Option<MeshFrame>, [usize; 3])],
    w: &EnergyWeights,
    cfg: &ParamConfig,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let start = positions[v];
    let normals: Vec<Vec3> = faces
        .iter()
        .filter_map(|(_, tri)| {
            let k = tri.iter().position(|&i| i == v)?;
            let a = positions[tri[(k + 1) % 3]];
            let b = positions[tri[(k + 2) % 3]];
            let n = a.cross(&b);
            let len = n.norm();
            (len > 1e-300).then(|| n / len)
        })
        .collect();
    // May start infinite right after an insertion; any finite point is then an improvement.
    let mut f_cur = local_energy(positions, v, &start, faces, w);
    for _ in 0..cfg.directions_per_pass {
        let p0 = positions[v];
        let r = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let d = r - p0 * r.dot(&p0);
        if d.norm() < 1e-8 {
            continue;
        }
        let d = d.normalize();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let (mut lo, mut hi) = (-half_pi, half_pi);
        for n in &normals {
            let alpha = n.dot(&d).atan2(n.dot(&p0));
            lo = lo.max(alpha - half_pi);
            hi = hi.min(alpha + half_pi);
        }
        lo *= 0.999;
        hi *= 0.999;
        if !(lo < 0.0 && hi > 0.0) {
            continue;
        }
        let at = |theta: f64| (p0 * theta.cos() + d * theta.sin()).normalize();
        let mut f = |theta: f64| local_energy(positions, v, &at(theta), faces, w);
        let step = 0.1 * hi.min(-lo);
        let (theta, f_new) = linesearch::minimize(&mut f, lo, hi, step, f_cur, cfg.local_tolerance);
        let improved = if f_cur.is_finite() {
            f_new < f_cur - 1e-14 * f_cur.abs()
        } else {
            f_new.is_finite()
        };
        if theta != 0.0 && improved {
            let x = at(theta);
            let exact = local_energy(positions, v, &x, faces, w);
            if exact.is_finite() && exact < f_cur {
                positions[v] = x;
                f_cur = exact;
            }
        }
    }
    arc_length(&start, &positions[v])
}

/// Relaxes one vertex of a complete embedding of `mesh`. The local energy of
/// its incident faces never increases and the embedding stays valid.
pub fn optimize_vertex(
    embedding: &mut SphericalEmbedding,
    v: usize,
    mesh: &TriangleMesh,
    cfg: &ParamConfig,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    if embedding.faces() != mesh.faces() {
        return Err(SgrError::Topology(
            "embedding connectivity differs from mesh".into(),
        ));
    }
    if v >= mesh.vertex_count() {
        return Err(SgrError::Unsupported(format!("vertex {v} out of range")));
    }
    let faces: Vec<(Option<MeshFrame>, [usize; 3])> = mesh
        .faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.contains(&v))
        .map(|(i, &f)| (MeshFrame::new(&mesh.triangle(i)), f))
        .collect();
    let w = EnergyWeights::new(mesh.total_area(), cfg);
    Ok(relax(&mut embedding.positions, v, &faces, &w, cfg, rng))
}

#[derive(Clone, Copy)]
struct Pending {
    priority: f64,
    vertex: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(other.vertex.cmp(&self.vertex))
    }
}

/// Embedding of a partially refined progressive mesh.
pub struct ProgressiveEmbedding<'a> {
    mesh: &'a TriangleMesh,
    faces: Vec<Option<[usize; 3]>>,
    frames: Vec<Option<MeshFrame>>,
    vfaces: Vec<Vec<usize>>,
    positions: Vec<Vec3>,
    active: Vec<bool>,
    active_count: usize,
    mesh_area: f64,
}

impl<'a> ProgressiveEmbedding<'a> {
    pub fn new(mesh: &'a TriangleMesh, pm: &ProgressiveMesh) -> Result<Self> {
        if pm.vertex_count != mesh.vertex_count() || pm.face_count != mesh.face_count() {
            return Err(SgrError::Internal("progressive mesh does not match mesh".into()));
        }
        let mut state = ProgressiveEmbedding {
            mesh,
            faces: vec![None; pm.face_count],
            frames: vec![None; pm.face_count],
            vfaces: vec![Vec::new(); pm.vertex_count],
            positions: base_positions(pm),
            active: vec![false; pm.vertex_count],
            active_count: 4,
            mesh_area: 0.0,
        };
        for &v in &pm.base_vertices {
            state.active[v] = true;
        }
        for &(id, f) in &pm.base_faces {
            state.faces[id] = Some(f);
            for v in f {
                state.vfaces[v].push(id);
            }
            state.refresh_frame(id);
        }
        if let Some(f) = state.first_flipped() {
            return Err(SgrError::InvalidEmbedding(f));
        }
        Ok(state)
    }

    fn refresh_frame(&mut self, id: usize) {
        if let Some(old) = self.frames[id] {
            self.mesh_area -= old.area;
        }
        let frame = self.faces[id].and_then(|[a, b, c]| {
            let v = self.mesh.vertices();
            MeshFrame::new(&[v[a], v[b], v[c]])
        });
        if let Some(new) = frame {
            self.mesh_area += new.area;
        }
        self.frames[id] = frame;
    }

    fn first_flipped(&self) -> Option<usize> {
        self.faces.iter().enumerate().find_map(|(id, f)| {
            let [a, b, c] = (*f)?;
            let p = &self.positions;
            (triple_sign(&p[a], &p[b], &p[c]) <= 0.0).then_some(id)
        })
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn is_active(&self, v: usize) -> bool {
        self.active[v]
    }

    /// Ring of `v` in counter-clockwise order.
    fn ring(&self, v: usize) -> Result<Vec<usize>> {
        let mut next = Vec::with_capacity(self.vfaces[v].len());
        for &id in &self.vfaces[v] {
            let f = self.faces[id].expect("incident face is live");
            let k = f.iter().position(|&x| x == v).expect("incident");
            next.push((f[(k + 1) % 3], f[(k + 2) % 3]));
        }
        let mut ring = vec![next[0].0];
        while ring.len() < next.len() {
            let last = *ring.last().expect("non-empty");
            let &(_, b) = next
                .iter()
                .find(|(a, _)| *a == last)
                .ok_or_else(|| SgrError::Internal(format!("open ring around vertex {v}")))?;
            ring.push(b);
        }
        Ok(ring)
    }

    /// Undoes one collapse, placing the new vertex inside the kernel of its ring.
    pub fn insert_vertex(&mut self, split: &VertexSplit) -> Result<()> {
        let (v, parent) = (split.vertex, split.parent);
        if self.active[v] || !self.active[parent] {
            return Err(SgrError::Internal(format!("split of vertex {v} out of order")));
        }
        apply_split(&mut self.faces, split);
        self.vfaces[parent].retain(|id| !split.moved_corners.iter().any(|(f, _)| f == id));
        for &(id, _) in &split.moved_corners {
            self.vfaces[v].push(id);
        }
        for (id, f) in [split.left_face, split.right_face] {
            for x in f {
                self.vfaces[x].push(id);
            }
        }
        self.active[v] = true;
        self.active_count += 1;

        let ring = self.ring(v)?;
        let points: Vec<Vec3> = ring.iter().map(|&i| self.positions[i]).collect();
        let anchor = ring
            .iter()
            .position(|&i| i == parent)
            .ok_or_else(|| SgrError::Internal(format!("parent {parent} not in ring of {v}")))?;
        self.positions[v] = kernel_point_near(&points, anchor)?;

        let touched: Vec<usize> = self.vfaces[v].clone();
        for id in touched {
            self.refresh_frame(id);
        }
        Ok(())
    }

    fn incident(&self, v: usize) -> Vec<(Option<MeshFrame>, [usize; 3])> {
        self.vfaces[v]
            .iter()
            .map(|&id| (self.frames[id], self.faces[id].expect("live")))
            .collect()
    }

    /// Line-search relaxation of one active vertex; returns the arc it moved.
    pub fn optimize_vertex(&mut self, v: usize, cfg: &ParamConfig, rng: &mut ChaCha8Rng) -> f64 {
        if !self.active[v] {
            return 0.0;
        }
        let faces = self.incident(v);
        let w = EnergyWeights::new(self.mesh_area, cfg);
        relax(&mut self.positions, v, &faces, &w, cfg, rng)
    }

    /// Active neighbors of `v`, ascending.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vfaces[v]
            .iter()
            .flat_map(|&id| self.faces[id].expect("live"))
            .filter(|&x| x != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Total energy of the current level.
    pub fn energy(&self, cfg: &ParamConfig) -> f64 {
        let w = EnergyWeights::new(self.mesh_area, cfg);
        let mut sum = 0.0;
        for (f, frame) in self.faces.iter().zip(&self.frames) {
            let (Some([a, b, c]), Some(fr)) = (f, frame) else {
                continue;
            };
            let p = &self.positions;
            sum += face_energy(fr, &[p[*a], p[*b], p[*c]], &w);
        }
        sum
    }

    pub fn flipped_faces(&self) -> usize {
        self.faces
            .iter()
            .flatten()
            .filter(|[a, b, c]| {
                let p = &self.positions;
                triple_sign(&p[*a], &p[*b], &p[*c]) <= 0.0
            })
            .count()
    }

    /// Relaxes vertices in order of how far their neighborhoods have moved,
    /// until the largest pending change drops below the convergence threshold.
    pub fn global_sweep(&mut self, cfg: &ParamConfig, rng: &mut ChaCha8Rng) {
        let n = self.positions.len();
        let mut priority = vec![0.0f64; n];
        let mut heap = BinaryHeap::new();
        for v in (0..n).filter(|&v| self.active[v]) {
            priority[v] = f64::INFINITY;
            heap.push(Pending {
                priority: f64::INFINITY,
                vertex: v,
            });
        }
        let budget = cfg.max_sweep_visits * self.active_count;
        let mut visits = 0;
        while let Some(Pending { priority: p, vertex: v }) = heap.pop() {
            if p != priority[v] {
                continue;
            }
            if p < cfg.global_convergence_threshold || visits >= budget {
                break;
            }
            visits += 1;
            priority[v] = 0.0;
            let moved = self.optimize_vertex(v, cfg, rng);
            if moved > 0.0 {
                for w in self.neighbors(v) {
                    if priority[w].is_finite() {
                        priority[w] += moved;
                        heap.push(Pending {
                            priority: priority[w],
                            vertex: w,
                        });
                    }
                }
            }
        }
    }

    /// The finished embedding; fails unless every split has been applied.
    pub fn to_embedding(&self) -> Result<SphericalEmbedding> {
        let faces: Option<Vec<[usize; 3]>> = self.faces.iter().copied().collect();
        let faces = faces.ok_or_else(|| SgrError::Internal("embedding is not fully refined".into()))?;
        if self.active_count != self.positions.len() {
            return Err(SgrError::Internal("embedding is not fully refined".into()));
        }
        SphericalEmbedding::new(self.positions.clone(), faces)
    }
}
