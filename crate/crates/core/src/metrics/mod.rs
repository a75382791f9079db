//! Mesh regularization terms, triangle quality and surface-distance scores.

mod distance;

pub use distance::{chamfer_distance, f_score, sample_surface, DistanceField, SurfaceSamples};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgrError};
use crate::mesh::{face_adjacency, uniform_laplacian, TriangleMesh};

/// Default number of surface samples per mesh for distance scores.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Sum over face pairs sharing an edge of `1 - cos` of the angle between their normals.
pub fn normals_consistency(mesh: &TriangleMesh) -> Result<f64> {
    let normals: Vec<_> = (0..mesh.face_count()).map(|f| mesh.face_normal(f)).collect();
    if let Some(f) = normals.iter().position(|n| n.norm_squared() == 0.0) {
        return Err(SgrError::DegenerateFace(f));
    }
    let adj = face_adjacency(mesh)?;
    Ok(adj
        .pairs
        .iter()
        .map(|&(f, g)| {
            let (a, b) = (&normals[f], &normals[g]);
            1.0 - a.dot(b) / (a.norm() * b.norm())
        })
        .sum())
}

/// `sum_i |L v_i|^2` with the uniform graph Laplacian.
pub fn laplacian_smoothing(mesh: &TriangleMesh) -> Result<f64> {
    let l = uniform_laplacian(mesh)?;
    Ok(l.apply(mesh.vertices()).iter().map(|d| d.norm_squared()).sum())
}

/// Target edge length for [`edge_length_reg`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum E0Policy {
    /// Mean edge length of the mesh being evaluated.
    #[default]
    MeanEdgeLength,
    Explicit(f64),
}

/// Mean squared deviation of the edge lengths from the target length.
pub fn edge_length_reg(mesh: &TriangleMesh, policy: E0Policy) -> Result<f64> {
    let lengths: Vec<f64> = mesh
        .edges()
        .iter()
        .map(|&(a, b)| (mesh.vertices()[a] - mesh.vertices()[b]).norm())
        .collect();
    if lengths.is_empty() {
        return Err(SgrError::EmptyMesh);
    }
    Ok(length_deviation(&lengths, policy))
}

/// `(1/E) sum (l - e0)^2` over a list of edge lengths.
pub fn length_deviation(lengths: &[f64], policy: E0Policy) -> f64 {
    let n = lengths.len() as f64;
    let e0 = match policy {
        E0Policy::MeanEdgeLength => lengths.iter().sum::<f64>() / n,
        E0Policy::Explicit(v) => v,
    };
    lengths.iter().map(|l| (l - e0).powi(2)).sum::<f64>() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegWeights {
    pub alpha_nor: f64,
    pub alpha_lap: f64,
    pub alpha_edg: f64,
    pub e0_policy: E0Policy,
}

impl Default for RegWeights {
    fn default() -> Self {
        RegWeights {
            alpha_nor: 0.1,
            alpha_lap: 0.5,
            alpha_edg: 0.1,
            e0_policy: E0Policy::MeanEdgeLength,
        }
    }
}

impl RegWeights {
    pub fn validate(&self) -> Result<()> {
        let ws = [self.alpha_nor, self.alpha_lap, self.alpha_edg];
        if ws.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(SgrError::Unsupported(format!("regularization weights must be >= 0, got {ws:?}")));
        }
        Ok(())
    }
}

/// The three regularization terms and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegTerms {
    pub l_nor: f64,
    pub l_lap: f64,
    pub l_edge: f64,
    pub total: f64,
}

pub fn regularization_terms(mesh: &TriangleMesh, w: &RegWeights) -> Result<RegTerms> {
    w.validate()?;
    let l_nor = normals_consistency(mesh)?;
    let l_lap = laplacian_smoothing(mesh)?;
    let l_edge = edge_length_reg(mesh, w.e0_policy)?;
    Ok(RegTerms {
        l_nor,
        l_lap,
        l_edge,
        total: w.alpha_nor * l_nor + w.alpha_lap * l_lap + w.alpha_edg * l_edge,
    })
}

pub fn geometric_reg_total(mesh: &TriangleMesh, w: &RegWeights) -> Result<f64> {
    Ok(regularization_terms(mesh, w)?.total)
}

/// `q = L_max (L0 + L1 + L2) / (4 sqrt(3) A)`; infinite for a zero-area triangle.
pub fn triangle_quality(a: &crate::Vec3, b: &crate::Vec3, c: &crate::Vec3) -> f64 {
    let l = [(b - a).norm(), (c - b).norm(), (a - c).norm()];
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    if area == 0.0 {
        return f64::INFINITY;
    }
    let lmax = l[0].max(l[1]).max(l[2]);
    lmax * (l[0] + l[1] + l[2]) / (4.0 * 3f64.sqrt() * area)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspectRatio {
    pub per_face: Vec<f64>,
    pub mean: f64,
    pub max: f64,
    /// Faces with zero area; their entries in `per_face` are infinite.
    pub degenerate: Vec<usize>,
}

pub fn aspect_ratio(mesh: &TriangleMesh) -> AspectRatio {
    let per_face: Vec<f64> = (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            triangle_quality(&a, &b, &c)
        })
        .collect();
    let degenerate = (0..per_face.len()).filter(|&f| per_face[f].is_infinite()).collect();
    let mean = per_face.iter().sum::<f64>() / per_face.len().max(1) as f64;
    let max = per_face.iter().copied().fold(0.0, f64::max);
    AspectRatio {
        per_face,
        mean,
        max,
        degenerate,
    }
}

/// Everything the evaluation reports for one mesh, optionally against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub l_nor: f64,
    pub l_lap: f64,
    pub l_edge: f64,
    pub reg_total: f64,
    pub aspect_ratio_mean: f64,
    pub aspect_ratio_max: f64,
    pub chamfer_mm: Option<f64>,
    pub f_score_pct: Option<f64>,
    pub tau_mm: Option<f64>,
}

impl MetricsReport {
    pub fn single(mesh: &TriangleMesh, w: &RegWeights) -> Result<Self> {
        let reg = regularization_terms(mesh, w)?;
        let ar = aspect_ratio(mesh);
        Ok(MetricsReport {
            l_nor: reg.l_nor,
            l_lap: reg.l_lap,
            l_edge: reg.l_edge,
            reg_total: reg.total,
            aspect_ratio_mean: ar.mean,
            aspect_ratio_max: ar.max,
            chamfer_mm: None,
            f_score_pct: None,
            tau_mm: None,
        })
    }

    /// Single-mesh terms for `mesh` plus distance scores against `reference`.
    pub fn pair(
        mesh: &TriangleMesh,
        reference: &TriangleMesh,
        w: &RegWeights,
        samples: usize,
        tau: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut r = Self::single(mesh, w)?;
        let sa = sample_surface(mesh, samples, seed)?;
        let sb = sample_surface(reference, samples, seed)?;
        let da = DistanceField::new(reference).distances(&sa.points);
        let db = DistanceField::new(mesh).distances(&sb.points);
        r.chamfer_mm = Some(distance::chamfer_from(&da, &db));
        r.f_score_pct = Some(distance::f_score_from(&da, &db, tau));
        r.tau_mm = Some(tau);
        Ok(r)
    }

    /// `key: value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: f64| s.push_str(&format!("{k}: {v}\n"));
        line("l_nor", self.l_nor);
        line("l_lap", self.l_lap);
        line("l_edge", self.l_edge);
        line("reg_total", self.reg_total);
        line("aspect_ratio_mean", self.aspect_ratio_mean);
        line("aspect_ratio_max", self.aspect_ratio_max);
        if let Some(v) = self.chamfer_mm {
            line("chamfer_mm", v);
        }
        if let Some(v) = self.f_score_pct {
            line("f_score_pct", v);
        }
        if let Some(v) = self.tau_mm {
            line("tau_mm", v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use crate::Vec3;

    fn tri(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> TriangleMesh {
        TriangleMesh::new(vec![a, b, c, d], vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn normals_of_flat_and_folded_pairs() {
        let flat = tri(Vec3::zeros(), Vec3::x(), Vec3::new(1.0, 1.0, 0.0), Vec3::y());
        assert_eq!(normals_consistency(&flat).unwrap(), 0.0);
        let perp = TriangleMesh::new(
            vec![Vec3::zeros(), Vec3::y(), Vec3::x(), Vec3::z()],
            vec![[0, 1, 2], [0, 3, 1]],
        )
        .unwrap();
        assert!((normals_consistency(&perp).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tetrahedron_normals() {
        let v = normals_consistency(&shapes::tetrahedron()).unwrap();
        assert!((v - 8.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn octahedron_laplacian() {
        let v = laplacian_smoothing(&shapes::octahedron()).unwrap();
        assert!((v - 6.0).abs() < 1e-9);
        let m = shapes::octahedron();
        let moved = m.map_vertices(|p| p + Vec3::new(3.0, -1.0, 2.0));
        assert!((laplacian_smoothing(&moved).unwrap() - 6.0).abs() < 1e-9);
        let scaled = m.map_vertices(|p| p * 2.5);
        assert!((laplacian_smoothing(&scaled).unwrap() - 6.0 * 6.25).abs() < 1e-9);
    }

    #[test]
    fn edge_lengths() {
        let ico = shapes::icosahedron();
        let (a, b) = ico.edges()[0];
        let e = (ico.vertices()[a] - ico.vertices()[b]).norm();
        assert!(edge_length_reg(&ico, E0Policy::Explicit(e)).unwrap() < 1e-24);
        assert!(edge_length_reg(&ico, E0Policy::MeanEdgeLength).unwrap() < 1e-24);
        assert_eq!(length_deviation(&[1.0, 3.0], E0Policy::MeanEdgeLength), 1.0);
        // Collinear triangle with edges 1, 2, 3 and e0 = 2: (1 + 0 + 1) / 3.
        let m = TriangleMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 3.0], vec![[0, 1, 2]]).unwrap();
        let v = edge_length_reg(&m, E0Policy::Explicit(2.0)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_total_is_the_component_dot_product() {
        let m = shapes::tetrahedron();
        let w = RegWeights::default();
        let t = regularization_terms(&m, &w).unwrap();
        let expect = 0.1 * normals_consistency(&m).unwrap()
            + 0.5 * laplacian_smoothing(&m).unwrap()
            + 0.1 * edge_length_reg(&m, E0Policy::MeanEdgeLength).unwrap();
        assert_eq!(t.total, expect);
        let zero = RegWeights {
            alpha_nor: 0.0,
            alpha_lap: 0.0,
            alpha_edg: 0.0,
            ..w
        };
        assert_eq!(geometric_reg_total(&m, &zero).unwrap(), 0.0);
        let doubled = RegWeights { alpha_nor: 0.2, ..w };
        let d = regularization_terms(&m, &doubled).unwrap();
        assert!((d.total - t.total - 0.1 * t.l_nor).abs() < 1e-12);
    }

    #[test]
    fn quality_formula() {
        let s3 = 3f64.sqrt();
        let eq = triangle_quality(&Vec3::zeros(), &Vec3::x(), &Vec3::new(0.5, s3 / 2.0, 0.0));
        assert!((eq - 1.0).abs() < 1e-12);
        let right = triangle_quality(&Vec3::zeros(), &Vec3::x(), &Vec3::y());
        assert!((right - (2f64.sqrt() + 1.0) / s3).abs() < 1e-9);
        let needle = triangle_quality(&Vec3::zeros(), &Vec3::x(), &Vec3::new(0.5, 1e-9, 0.0));
        assert!(needle > 1e8);
        let flat = TriangleMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0], vec![[0, 1, 2]]).unwrap();
        let ar = aspect_ratio(&flat);
        assert!(ar.max.is_infinite());
        assert_eq!(ar.degenerate, vec![0]);
    }

    #[test]
    fn zero_area_face_poisons_normals() {
        let flat = TriangleMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0], vec![[0, 1, 2]]).unwrap();
        assert!(matches!(normals_consistency(&flat), Err(SgrError::DegenerateFace(0))));
    }
}
