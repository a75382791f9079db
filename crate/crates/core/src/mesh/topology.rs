use std::collections::HashMap;
use std::fmt;

use crate::error::{Result, SgrError};
use crate::mesh::TriangleMesh;

/// Counts and flags describing whether a mesh is an admissible closed genus-zero surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
    pub is_watertight: bool,
    /// Every edge has at most two faces, adjacent faces agree on orientation and
    /// every vertex fan is a single disk or half-disk.
    pub is_manifold: bool,
    /// `(2 - (V - E + F)) / 2`, defined only for closed manifolds.
    pub genus: Option<i64>,
    pub boundary_edge_count: usize,
    pub euler_characteristic: i64,
    pub components: usize,
}

impl TopologyReport {
    pub fn is_closed_genus_zero(&self) -> bool {
        self.is_watertight && self.is_manifold && self.genus == Some(0) && self.components == 1
    }
}

impl fmt::Display for TopologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices: {}", self.vertex_count)?;
        writeln!(f, "edges: {}", self.edge_count)?;
        writeln!(f, "faces: {}", self.face_count)?;
        writeln!(f, "watertight: {}", self.is_watertight)?;
        writeln!(f, "manifold: {}", self.is_manifold)?;
        match self.genus {
            Some(g) => writeln!(f, "genus: {g}")?,
            None => writeln!(f, "genus: undefined")?,
        }
        writeln!(f, "boundary_edges: {}", self.boundary_edge_count)?;
        writeln!(f, "euler_characteristic: {}", self.euler_characteristic)?;
        write!(f, "components: {}", self.components)
    }
}

struct EdgeUse {
    faces: Vec<usize>,
    /// Number of uses as a->b with a < b, and as b->a.
    forward: usize,
    backward: usize,
}

fn edge_uses(mesh: &TriangleMesh) -> HashMap<(usize, usize), EdgeUse> {
    let mut map: HashMap<(usize, usize), EdgeUse> = HashMap::new();
    for (fi, f) in mesh.faces().iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let e = map.entry((a.min(b), a.max(b))).or_insert(EdgeUse {
                faces: Vec::new(),
                forward: 0,
                backward: 0,
            });
            e.faces.push(fi);
            if a < b {
                e.forward += 1;
            } else {
                e.backward += 1;
            }
        }
    }
    map
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// True when the faces around every vertex form one connected fan.
fn vertex_fans_connected(mesh: &TriangleMesh) -> bool {
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        for &v in f {
            around[v].push(fi);
        }
    }
    let faces = mesh.faces();
    for (v, fs) in around.iter().enumerate() {
        if fs.len() <= 1 {
            continue;
        }
        // Union faces around v that share an edge incident to v.
        let mut parent: Vec<usize> = (0..fs.len()).collect();
        let mut by_other: HashMap<usize, usize> = HashMap::new();
        for (slot, &fi) in fs.iter().enumerate() {
            for &w in &faces[fi] {
                if w == v {
                    continue;
                }
                if let Some(&other) = by_other.get(&w) {
                    let (ra, rb) = (find(&mut parent, slot), find(&mut parent, other));
                    parent[ra] = rb;
                } else {
                    by_other.insert(w, slot);
                }
            }
        }
        let root = find(&mut parent, 0);
        if (1..fs.len()).any(|s| find(&mut parent, s) != root) {
            return false;
        }
    }
    true
}

pub fn validate_topology(mesh: &TriangleMesh) -> TopologyReport {
    let uses = edge_uses(mesh);
    let mut boundary = 0;
    let mut manifold = true;
    for e in uses.values() {
        match e.faces.len() {
            1 => boundary += 1,
            2 => {
                if e.forward != 1 || e.backward != 1 {
                    manifold = false;
                }
            }
            _ => manifold = false,
        }
    }
    if manifold && !vertex_fans_connected(mesh) {
        manifold = false;
    }

    let n = mesh.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    for f in mesh.faces() {
        for k in 0..3 {
            used[f[k]] = true;
            let (ra, rb) = (find(&mut parent, f[k]), find(&mut parent, f[(k + 1) % 3]));
            parent[ra] = rb;
        }
    }
    let components = (0..n).filter(|&v| used[v] && find(&mut parent, v) == v).count();

    let (v, e, f) = (n as i64, uses.len() as i64, mesh.face_count() as i64);
    let chi = v - e + f;
    let watertight = boundary == 0;
    let genus = (watertight && manifold && chi % 2 == 0).then(|| (2 - chi) / 2);
    TopologyReport {
        vertex_count: n,
        edge_count: uses.len(),
        face_count: mesh.face_count(),
        is_watertight: watertight,
        is_manifold: manifold,
        genus,
        boundary_edge_count: boundary,
        euler_characteristic: chi,
        components,
    }
}

/// Unordered pairs of faces sharing an edge, one pair per interior edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceAdjacency {
    pub pairs: Vec<(usize, usize)>,
}

pub fn face_adjacency(mesh: &TriangleMesh) -> Result<FaceAdjacency> {
    let uses = edge_uses(mesh);
    let mut keys: Vec<_> = uses.keys().copied().collect();
    keys.sort_unstable();
    let mut pairs = Vec::with_capacity(keys.len());
    for k in keys {
        let e = &uses[&k];
        match e.faces.len() {
            1 => {}
            2 => pairs.push((e.faces[0].min(e.faces[1]), e.faces[0].max(e.faces[1]))),
            _ => return Err(SgrError::NonManifoldEdge(k.0, k.1)),
        }
    }
    Ok(FaceAdjacency { pairs })
}
