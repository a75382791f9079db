use nalgebra::Matrix2;

use crate::error::{Result, SgrError};
use crate::geom::triple_sign;
use crate::mesh::TriangleMesh;
use crate::param::{ParamConfig, SphericalEmbedding};
use crate::Vec3;

/// Edge matrix of a triangle in its own orthonormal frame: columns are
/// `b - a` and `c - a`, with the first edge along the x axis and the third
/// vertex on the positive y side. `None` when the triangle has no area.
pub(crate) fn flatten(tri: &[Vec3; 3]) -> Option<Matrix2<f64>> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let l1 = e1.norm();
    let n = e1.cross(&e2);
    let nn = n.norm();
    if !(nn > 1e-15 * l1 * e2.norm()) || !nn.is_finite() {
        return None;
    }
    let x = e1 / l1;
    let y = n.cross(&x) / nn;
    Some(Matrix2::new(l1, e2.dot(&x), 0.0, e2.dot(&y)))
}

/// Edge matrix of a spherical triangle after central projection onto the
/// plane tangent at the direction of its vertex sum. Unlike the chord
/// triangle, the projected triangle grows without bound as the spherical
/// triangle opens up towards a hemisphere.
///
/// Very obtuse triangles, where a vertex is nearly perpendicular to the vertex
/// sum, are projected onto the plane parallel to their chord triangle instead.
pub(crate) fn flatten_spherical(tri: &[Vec3; 3]) -> Option<Matrix2<f64>> {
    let sum = tri[0] + tri[1] + tri[2];
    let len = sum.norm();
    if len > 1e-12 {
        let c = sum / len;
        let d = tri.map(|x| x.dot(&c));
        if d.iter().all(|&d| d > 1e-3) {
            return flatten(&[tri[0] / d[0], tri[1] / d[1], tri[2] / d[2]]);
        }
    }
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    let h = tri[0].dot(&n) / n.norm();
    if !(h > 0.0) {
        return None;
    }
    flatten(tri).map(|m| m / h)
}

/// Singular values `(max, min)` of a 2x2 matrix.
pub(crate) fn singular_values(m: &Matrix2<f64>) -> (f64, f64) {
    let f = m.norm_squared();
    let d = m.determinant().abs();
    let disc = (f * f - 4.0 * d * d).max(0.0).sqrt();
    let big = ((f + disc) * 0.5).sqrt();
    let small = if big > 0.0 { d / big } else { 0.0 };
    (big, small)
}

/// Singular values `(Γ, γ)`, `Γ >= γ > 0`, of the linear map taking the
/// centrally projected sphere triangle onto the flattened mesh triangle.
pub fn face_stretch(mesh_triangle: &[Vec3; 3], sphere_triangle: &[Vec3; 3]) -> Result<(f64, f64)> {
    let m = flatten(mesh_triangle).ok_or(SgrError::ZeroArea)?;
    let s = flatten_spherical(sphere_triangle).ok_or(SgrError::ZeroArea)?;
    let s_inv = s.try_inverse().ok_or(SgrError::ZeroArea)?;
    Ok(singular_values(&(m * s_inv)))
}

/// Per-face quantities of the mesh side that stay fixed while the sphere side moves.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MeshFrame {
    pub edges: Matrix2<f64>,
    pub area: f64,
}

impl MeshFrame {
    pub fn new(tri: &[Vec3; 3]) -> Option<Self> {
        let m = flatten(tri)?;
        Some(MeshFrame {
            edges: m,
            area: 0.5 * m.determinant(),
        })
    }
}

/// Scale factors that make the energy independent of the mesh's size.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EnergyWeights {
    /// Multiplies `area * (Γ² + γ²) / 2`.
    pub stretch: f64,
    /// Multiplies `area * (1/γ)^p`.
    pub inverse: f64,
    pub p: i32,
}

impl EnergyWeights {
    pub fn new(mesh_area: f64, cfg: &ParamConfig) -> Self {
        let four_pi = 4.0 * std::f64::consts::PI;
        let ratio = mesh_area / four_pi;
        EnergyWeights {
            stretch: four_pi / (mesh_area * mesh_area),
            inverse: cfg.epsilon * ratio.powf(cfg.p as f64 / 2.0) / mesh_area,
            p: cfg.p as i32,
        }
    }
}

/// Stretch terms of one face for the sphere-to-mesh map `J = M S^-1` with
/// singular values `Γ >= γ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FaceTerms {
    /// `(Γ² + γ²) / 2`
    pub mean_sq: f64,
    /// `Γ γ`
    pub det: f64,
    pub big: f64,
    /// `1/γ`, the largest stretch of the inverse map.
    pub inverse_big: f64,
    /// Area of the projected sphere triangle.
    pub sphere_area: f64,
}

#[inline]
pub(crate) fn face_terms(frame: &MeshFrame, sphere: &[Vec3; 3]) -> Option<FaceTerms> {
    if triple_sign(&sphere[0], &sphere[1], &sphere[2]) <= 0.0 {
        return None;
    }
    let s = flatten_spherical(sphere)?;
    let j = frame.edges * s.try_inverse()?;
    let (big, small) = singular_values(&j);
    if !(small > 0.0) || !big.is_finite() {
        return None;
    }
    Some(FaceTerms {
        mean_sq: 0.5 * j.norm_squared(),
        det: big * small,
        big,
        inverse_big: 1.0 / small,
        sphere_area: 0.5 * s.determinant(),
    })
}

/// Energy contribution of one face; infinite when the sphere face is flipped or degenerate.
#[inline]
pub(crate) fn face_energy(frame: &MeshFrame, sphere: &[Vec3; 3], w: &EnergyWeights) -> f64 {
    match face_terms(frame, sphere) {
        Some(t) => frame.area * (w.stretch * t.mean_sq + w.inverse * t.inverse_big.powi(w.p)),
        None => f64::INFINITY,
    }
}

/// Aggregate stretch of an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchStats {
    /// Normalized L2 stretch, `>= 1` with equality for a scaled isometry.
    pub l2_stretch: f64,
    /// Largest per-face stretch `Γ`, normalized like `l2_stretch`.
    pub linf_stretch: f64,
    /// `η = 1 / l2_stretch^2` in `(0, 1]`.
    pub efficiency: f64,
    /// `stretch_term + epsilon * inverse_stretch_term`.
    pub energy: f64,
    /// `4π Σ A_T (Γ² + γ²) / 2 / A_M²`.
    pub stretch_term: f64,
    /// `(A_M/4π)^{p/2} Σ (A_T/A_M) (1/γ)^p`, the regularizer before its ε weight.
    pub inverse_stretch_term: f64,
    /// `(Γ, γ)` per face.
    pub per_face_singular_values: Vec<(f64, f64)>,
}

impl StretchStats {
    fn invalid(faces: usize) -> Self {
        StretchStats {
            l2_stretch: f64::INFINITY,
            linf_stretch: f64::INFINITY,
            efficiency: 0.0,
            energy: f64::INFINITY,
            stretch_term: f64::INFINITY,
            inverse_stretch_term: f64::INFINITY,
            per_face_singular_values: vec![(f64::INFINITY, 0.0); faces],
        }
    }
}

/// Stretch statistics of `embedding` against `mesh`. A flipped or degenerate
/// spherical face makes every aggregate infinite (efficiency zero).
///
/// Efficiency compares against the total area of the projected spherical
/// triangles, so it reaches 1 exactly when every face maps by the same similarity.
pub fn stretch_energy(
    mesh: &TriangleMesh,
    embedding: &SphericalEmbedding,
    cfg: &ParamConfig,
) -> Result<StretchStats> {
    if embedding.faces() != mesh.faces() {
        return Err(SgrError::Topology(
            "embedding connectivity differs from mesh".into(),
        ));
    }
    let mesh_area = mesh.total_area();
    let w = EnergyWeights::new(mesh_area, cfg);
    let mut sum_mean_sq = 0.0;
    let mut sum_inv = 0.0;
    let mut domain_area = 0.0;
    let mut max_big: f64 = 0.0;
    let mut per_face = Vec::with_capacity(mesh.face_count());
    for f in 0..mesh.face_count() {
        let frame = MeshFrame::new(&mesh.triangle(f)).ok_or(SgrError::DegenerateFace(f))?;
        let Some(t) = face_terms(&frame, &embedding.triangle(f)) else {
            return Ok(StretchStats::invalid(mesh.face_count()));
        };
        sum_mean_sq += frame.area * t.mean_sq;
        sum_inv += frame.area * t.inverse_big.powi(w.p);
        domain_area += t.sphere_area;
        max_big = max_big.max(t.big);
        per_face.push((t.big, (t.det / t.big).min(t.big)));
    }
    let stretch_term = w.stretch * sum_mean_sq;
    let ratio = mesh_area / (4.0 * std::f64::consts::PI);
    let inverse_stretch_term = ratio.powf(cfg.p as f64 / 2.0) / mesh_area * sum_inv;
    // L2 stretch normalized so that a uniform scaling onto the domain scores 1.
    let l2_sq = sum_mean_sq * domain_area / (mesh_area * mesh_area);
    Ok(StretchStats {
        l2_stretch: l2_sq.sqrt(),
        linf_stretch: max_big * (domain_area / mesh_area).sqrt(),
        efficiency: 1.0 / l2_sq,
        energy: stretch_term + cfg.epsilon * inverse_stretch_term,
        stretch_term,
        inverse_stretch_term,
        per_face_singular_values: per_face,
    })
}
