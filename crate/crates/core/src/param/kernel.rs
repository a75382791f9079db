use crate::error::{Result, SgrError};
use crate::geom::triple_sign;
use crate::Vec3;

/// Feasible region for a vertex surrounded by a closed ring of sphere points:
/// the intersection of the open hemispheres `{x : n_e . x > 0}`, one per ring edge.
#[derive(Debug, Clone)]
pub struct KernelRegion {
    pub half_space_normals: Vec<Vec3>,
    pub is_empty: bool,
    /// A point strictly inside every half space, when one was found.
    pub point: Option<Vec3>,
}

/// Strict membership using exact orientation of `x` against each ring edge.
pub(crate) fn strictly_inside(ring: &[Vec3], x: &Vec3) -> bool {
    let n = ring.len();
    (0..n).all(|k| triple_sign(x, &ring[k], &ring[(k + 1) % n]) > 0.0)
}

/// Normals `normalize(r_e x r_{e+1})` of the ring's directed edges.
pub(crate) fn edge_normals(ring: &[Vec3]) -> Result<Vec<Vec3>> {
    let n = ring.len();
    if n < 3 {
        return Err(SgrError::Topology(format!("ring of {n} points")));
    }
    (0..n)
        .map(|k| {
            let c = ring[k].cross(&ring[(k + 1) % n]);
            let len = c.norm();
            // Identical or antipodal consecutive points leave the edge circle undefined.
            if len <= 1e-14 {
                Err(SgrError::DegenerateRingEdge(k))
            } else {
                Ok(c / len)
            }
        })
        .collect()
}

/// Average of the kernel polygon's corners, which are the pairwise great-circle
/// intersections satisfying every constraint.
fn corner_average(normals: &[Vec3]) -> Option<Vec3> {
    let tol = 1e-12;
    let mut sum = Vec3::zeros();
    let mut count = 0;
    for i in 0..normals.len() {
        for j in i + 1..normals.len() {
            let c = normals[i].cross(&normals[j]);
            let len = c.norm();
            if len <= 1e-12 {
                continue;
            }
            for cand in [c / len, -c / len] {
                if normals.iter().all(|n| n.dot(&cand) >= -tol) {
                    sum += cand;
                    count += 1;
                }
            }
        }
    }
    let len = sum.norm();
    (count >= 3 && len > 1e-12).then(|| sum / len)
}

/// Nudges `x` toward satisfying every constraint by ascending the worst margin.
fn push_inside(normals: &[Vec3], ring: &[Vec3], mut x: Vec3) -> Option<Vec3> {
    for _ in 0..200 {
        if strictly_inside(ring, &x) {
            return Some(x);
        }
        let worst = normals
            .iter()
            .min_by(|a, b| a.dot(&x).total_cmp(&b.dot(&x)))?;
        let margin = worst.dot(&x);
        let step = (0.05f64).max(-margin * 1.5);
        let tangent = worst - x * worst.dot(&x);
        if tangent.norm() < 1e-15 {
            return None;
        }
        x = (x + tangent.normalize() * step).normalize();
    }
    None
}

/// Center of the largest disk inside the kernel, measured in the gnomonic
/// plane tangent at `c`. The optimum of this small linear program sits where
/// three constraints are tight, so every triple is tried.
fn deepest_point(normals: &[Vec3], c: &Vec3) -> Option<Vec3> {
    let e1 = c.cross(&if c.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() }).normalize();
    let e2 = c.cross(&e1);
    // Lines a*x + b*y + d >= 0 in the plane, scaled to unit normal.
    let mut lines: Vec<[f64; 3]> = normals
        .iter()
        .filter_map(|n| {
            let (a, b) = (n.dot(&e1), n.dot(&e2));
            let len = a.hypot(b);
            (len > 1e-300).then(|| [a / len, b / len, n.dot(c) / len])
        })
        .collect();
    let bound = 50.0;
    lines.extend([[1.0, 0.0, bound], [-1.0, 0.0, bound], [0.0, 1.0, bound], [0.0, -1.0, bound]]);
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            for k in j + 1..lines.len() {
                // Solve a x + b y - t = -d for the three lines.
                let m = nalgebra::Matrix3::new(
                    lines[i][0], lines[i][1], -1.0,
                    lines[j][0], lines[j][1], -1.0,
                    lines[k][0], lines[k][1], -1.0,
                );
                let rhs = Vec3::new(-lines[i][2], -lines[j][2], -lines[k][2]);
                let Some(sol) = m.lu().solve(&rhs) else { continue };
                let (x, y, t) = (sol.x, sol.y, sol.z);
                if !(t.is_finite() && t > 0.0) || best.is_some_and(|b| b.2 >= t) {
                    continue;
                }
                if lines.iter().all(|l| l[0] * x + l[1] * y + l[2] >= t * (1.0 - 1e-9) - 1e-15) {
                    best = Some((x, y, t));
                }
            }
        }
    }
    let (x, y, _) = best?;
    Some((c + e1 * x + e2 * y).normalize())
}

/// Replaces `p` by a point deeper inside the kernel when one can be found.
fn deepen(normals: &[Vec3], ring: &[Vec3], p: Vec3) -> Vec3 {
    deepest_point(normals, &p)
        .filter(|q| strictly_inside(ring, q))
        .unwrap_or(p)
}

pub fn polygon_kernel(ring: &[Vec3]) -> Result<KernelRegion> {
    let normals = edge_normals(ring)?;
    let mut point = corner_average(&normals).filter(|p| strictly_inside(ring, p));
    if point.is_none() {
        let c: Vec3 = ring.iter().sum();
        if c.norm() > 1e-12 {
            point = push_inside(&normals, ring, c.normalize());
        }
    }
    let point = point.map(|p| deepen(&normals, ring, p));
    Ok(KernelRegion {
        is_empty: point.is_none(),
        half_space_normals: normals,
        point,
    })
}

/// Kernel point for a ring that contains `anchor` at `anchor_slot` and whose
/// other edges all see `anchor` strictly on their inner side. Such a kernel is
/// never empty near the anchor, so this falls back to a point just off it.
pub(crate) fn kernel_point_near(ring: &[Vec3], anchor_slot: usize) -> Result<Vec3> {
    let region = polygon_kernel(ring)?;
    if let Some(p) = region.point {
        return Ok(p);
    }
    let n = ring.len();
    let u = ring[anchor_slot];
    let prev = ring[(anchor_slot + n - 1) % n];
    let next = ring[(anchor_slot + 1) % n];
    let n1 = prev.cross(&u);
    let n2 = u.cross(&next);
    let w = n1.normalize() + n2.normalize();
    let w = w - u * w.dot(&u);
    if w.norm() < 1e-15 {
        return Err(SgrError::EmptyKernel(anchor_slot));
    }
    let w = w.normalize();
    let mut delta = ring
        .iter()
        .filter(|p| (*p - u).norm() > 0.0)
        .map(|p| (p - u).norm())
        .fold(f64::INFINITY, f64::min)
        * 0.25;
    for _ in 0..80 {
        let x = (u + w * delta).normalize();
        if strictly_inside(ring, &x) {
            return Ok(deepen(&region.half_space_normals, ring, x));
        }
        delta *= 0.5;
    }
    Err(SgrError::EmptyKernel(anchor_slot))
}
