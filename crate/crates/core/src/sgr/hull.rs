//! Incremental 3D convex hull with conflict lists and exact orientation tests.
//!
//! A point is added when it lies strictly above at least one face; points on
//! a face's plane do not see that face. For points on a sphere every input
//! point ends up a hull vertex and the hull is their spherical Delaunay
//! triangulation.

use std::collections::HashMap;

use crate::error::{Result, SgrError};
use crate::geom::orient_above;
use crate::Vec3;

struct Face {
    v: [usize; 3],
    /// `nbr[k]` shares the edge `v[k] -> v[k + 1]`.
    nbr: [usize; 3],
    alive: bool,
    conflicts: Vec<usize>,
}

/// Distance-like float used only to pick the next point; the decision itself is exact.
fn height(points: &[Vec3], f: &[usize; 3], p: &Vec3) -> f64 {
    let [a, b, c] = f.map(|i| points[i]);
    (b - a).cross(&(c - a)).dot(&(p - a))
}

fn sees(points: &[Vec3], f: &[usize; 3], p: usize) -> bool {
    let [a, b, c] = f.map(|i| &points[i]);
    orient_above(a, b, c, &points[p]) > 0.0
}

fn initial_simplex(points: &[Vec3]) -> Option<[usize; 4]> {
    let n = points.len();
    let a = 0;
    let b = (0..n).max_by(|&i, &j| {
        (points[i] - points[a])
            .norm_squared()
            .total_cmp(&(points[j] - points[a]).norm_squared())
    })?;
    let ab = points[b] - points[a];
    let c = (0..n).max_by(|&i, &j| {
        ab.cross(&(points[i] - points[a]))
            .norm_squared()
            .total_cmp(&ab.cross(&(points[j] - points[a])).norm_squared())
    })?;
    let normal = ab.cross(&(points[c] - points[a]));
    if normal.norm_squared() == 0.0 {
        return None;
    }
    let d = (0..n).max_by(|&i, &j| {
        normal
            .dot(&(points[i] - points[a]))
            .abs()
            .total_cmp(&normal.dot(&(points[j] - points[a])).abs())
    })?;
    if orient_above(&points[a], &points[b], &points[c], &points[d]) == 0.0 {
        return None;
    }
    Some([a, b, c, d])
}

/// Convex hull of `points` as outward-oriented triangles over input indices.
///
/// Fails with [`SgrError::TooFewPoints`] when the points span less than a
/// tetrahedron.
pub fn convex_hull(points: &[Vec3]) -> Result<Vec<[usize; 3]>> {
    if points.len() < 4 {
        return Err(SgrError::TooFewPoints(points.len()));
    }
    let [a, b, c, d] = initial_simplex(points).ok_or(SgrError::TooFewPoints(points.len()))?;
    // Orient the first face so that `d` is below it.
    let (b, c) = if orient_above(&points[a], &points[b], &points[c], &points[d]) > 0.0 {
        (c, b)
    } else {
        (b, c)
    };
    let mut faces: Vec<Face> = [[a, b, c], [a, d, b], [b, d, c], [c, d, a]]
        .into_iter()
        .map(|v| Face {
            v,
            nbr: [0; 3],
            alive: true,
            conflicts: Vec::new(),
        })
        .collect();
    link_all(&mut faces);

    let used = [a, b, c, d];
    for p in 0..points.len() {
        if used.contains(&p) {
            continue;
        }
        if let Some(f) = (0..4).find(|&f| sees(points, &faces[f].v, p)) {
            faces[f].conflicts.push(p);
        }
    }

    let mut pending: Vec<usize> = (0..4).collect();
    let mut visible = Vec::new();
    let mut stack = Vec::new();
    let mut mark: Vec<u32> = vec![0; 4];
    let mut stamp = 0u32;
    while let Some(start) = pending.pop() {
        if !faces[start].alive || faces[start].conflicts.is_empty() {
            continue;
        }
        let fv = faces[start].v;
        let &p = faces[start]
            .conflicts
            .iter()
            .max_by(|&&i, &&j| {
                height(points, &fv, &points[i])
                    .total_cmp(&height(points, &fv, &points[j]))
                    .then(j.cmp(&i))
            })
            .expect("non-empty");

        // Flood the faces that see `p`.
        stamp += 1;
        visible.clear();
        stack.push(start);
        mark[start] = stamp;
        while let Some(f) = stack.pop() {
            visible.push(f);
            for k in 0..3 {
                let g = faces[f].nbr[k];
                if mark[g] != stamp && sees(points, &faces[g].v, p) {
                    mark[g] = stamp;
                    stack.push(g);
                }
            }
        }

        // Horizon edges keep the orientation of the visible face they bound.
        let mut horizon = Vec::new();
        for &f in &visible {
            for k in 0..3 {
                let g = faces[f].nbr[k];
                if mark[g] != stamp {
                    horizon.push((faces[f].v[k], faces[f].v[(k + 1) % 3], g));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            orphans.append(&mut faces[f].conflicts);
        }

        let first_new = faces.len();
        let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(horizon.len());
        for (k, &(u, w, outside)) in horizon.iter().enumerate() {
            let id = first_new + k;
            faces.push(Face {
                v: [u, w, p],
                nbr: [outside, 0, 0],
                alive: true,
                conflicts: Vec::new(),
            });
            mark.push(0);
            by_start.insert(u, id);
            let slot = (0..3)
                .find(|&s| faces[outside].v[s] == w && faces[outside].v[(s + 1) % 3] == u)
                .expect("horizon neighbour shares the edge");
            faces[outside].nbr[slot] = id;
        }
        for k in 0..horizon.len() {
            let id = first_new + k;
            let w = horizon[k].1;
            // Edge w -> p borders the new face starting at w, whose edge p -> w closes it.
            let next = by_start[&w];
            faces[id].nbr[1] = next;
            faces[next].nbr[2] = id;
        }

        for q in orphans {
            if q == p {
                continue;
            }
            if let Some(f) = (first_new..faces.len()).find(|&f| sees(points, &faces[f].v, q)) {
                faces[f].conflicts.push(q);
            }
        }
        pending.extend(first_new..faces.len());
    }

    Ok(faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect())
}

fn link_all(faces: &mut [Face]) {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, face) in faces.iter().enumerate() {
        for k in 0..3 {
            edges.insert((face.v[k], face.v[(k + 1) % 3]), f);
        }
    }
    for f in 0..faces.len() {
        for k in 0..3 {
            let (u, w) = (faces[f].v[k], faces[f].v[(k + 1) % 3]);
            faces[f].nbr[k] = edges[&(w, u)];
        }
    }
}
