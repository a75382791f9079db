//! Spherical geometry representation: surface signals resampled on the
//! equal-area grid, and meshes rebuilt from such grids.
//!
//! Baking locates every grid sample's sphere point in the spherical
//! embedding and blends the three corner values with spherical barycentric
//! weights. Reconstruction triangulates the grid's sphere points with a
//! convex hull (their spherical Delaunay triangulation) and places each hull
//! vertex at the geometry value stored for it.

mod file;
mod hull;
mod locator;
mod pad;

pub use file::{meta_path, read_sgr, write_sgr, QUANT_LEVELS_16, QUANT_LEVELS_8};
pub use hull::convex_hull;
pub use locator::{
    gnomonic_barycentric, locate_brute_force, spherical_barycentric, BarycentricHit, TriangleLocator,
};
pub use pad::center_symmetric_pad;

use rayon::prelude::*;

use crate::equal_area::{sphere_to_square, uniform_grid, SphereGrid, SquarePoint, WeldMap};
use crate::error::{Result, SgrError};
use crate::mesh::TriangleMesh;
use crate::param::SphericalEmbedding;
use crate::Vec3;

/// Row-major `height x width` grid with `channels` values per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Grid {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    #[inline]
    pub fn cell(&self, x: usize, y: usize) -> &[f64] {
        let k = (y * self.width + x) * self.channels;
        &self.data[k..k + self.channels]
    }

    #[inline]
    pub fn cell_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        let k = (y * self.width + x) * self.channels;
        &mut self.data[k..k + self.channels]
    }

    /// Per-channel `(min, max)`.
    pub fn channel_ranges(&self) -> Vec<(f64, f64)> {
        let mut r = vec![(f64::INFINITY, f64::NEG_INFINITY); self.channels];
        for cell in self.data.chunks_exact(self.channels) {
            for (k, &v) in cell.iter().enumerate() {
                r[k].0 = r[k].0.min(v);
                r[k].1 = r[k].1.max(v);
            }
        }
        r
    }
}

/// What the channels of an SGR map mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgrKind {
    /// Absolute vertex positions, three channels.
    Geometry,
    Texture,
    Displacement,
}

impl SgrKind {
    pub fn name(self) -> &'static str {
        match self {
            SgrKind::Geometry => "geometry",
            SgrKind::Texture => "texture",
            SgrKind::Displacement => "displacement",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geometry" => Ok(SgrKind::Geometry),
            "texture" => Ok(SgrKind::Texture),
            "displacement" => Ok(SgrKind::Displacement),
            other => Err(SgrError::Parse(format!("unknown SGR kind: {other}"))),
        }
    }

    /// Bits per channel in the PNG file.
    pub fn bit_depth(self) -> u8 {
        match self {
            SgrKind::Geometry => 16,
            SgrKind::Texture | SgrKind::Displacement => 8,
        }
    }
}

/// A signal sampled on the `R x R` equal-area grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SgrMap {
    pub kind: SgrKind,
    /// `values.cell(i - 1, j - 1)` holds the sample at `u_ij = (i/R, j/R)`.
    pub values: Grid,
    /// Per-channel `(min, max)` used when the map is quantized for storage.
    pub quantization: Vec<(f64, f64)>,
    pub weld: WeldMap,
    /// Content hash of the mesh the map was baked from, if known.
    pub source_hash: Option<String>,
}

impl SgrMap {
    /// Wraps a grid, taking quantization ranges from its values.
    pub fn new(kind: SgrKind, values: Grid, source_hash: Option<String>) -> Result<Self> {
        if values.width != values.height || values.width < 2 {
            return Err(SgrError::Unsupported(format!(
                "SGR maps are square with side >= 2, got {}x{}",
                values.width, values.height
            )));
        }
        if kind == SgrKind::Geometry && values.channels != 3 {
            return Err(SgrError::Unsupported(format!(
                "geometry maps have 3 channels, got {}",
                values.channels
            )));
        }
        let weld = uniform_grid(values.width).weld;
        Ok(SgrMap {
            kind,
            quantization: values.channel_ranges(),
            values,
            weld,
            source_hash,
        })
    }

    pub fn resolution(&self) -> usize {
        self.values.width
    }

    pub fn channels(&self) -> usize {
        self.values.channels
    }
}

/// Per-vertex signal: `channels` values per vertex, vertex-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSignal {
    pub channels: usize,
    pub data: Vec<f64>,
}

impl VertexSignal {
    pub fn new(channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || data.len() % channels != 0 {
            return Err(SgrError::Unsupported(format!(
                "{} values do not split into {channels} channels",
                data.len()
            )));
        }
        Ok(VertexSignal { channels, data })
    }

    pub fn from_points(points: &[Vec3]) -> Self {
        VertexSignal {
            channels: 3,
            data: points.iter().flat_map(|p| [p.x, p.y, p.z]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.data[v * self.channels..(v + 1) * self.channels]
    }
}

/// Resamples a per-vertex signal onto the `resolution x resolution` grid.
///
/// Samples that weld to the same sphere point receive the mean of their values.
pub fn bake(
    embedding: &SphericalEmbedding,
    signal: &VertexSignal,
    resolution: usize,
    kind: SgrKind,
) -> Result<SgrMap> {
    let locator = TriangleLocator::new(embedding)?;
    bake_with(&locator, signal, resolution, kind)
}

/// [`bake`] with a prebuilt locator.
pub fn bake_with(
    locator: &TriangleLocator<'_>,
    signal: &VertexSignal,
    resolution: usize,
    kind: SgrKind,
) -> Result<SgrMap> {
    let embedding = locator.embedding();
    if signal.len() != embedding.vertex_count() {
        return Err(SgrError::SignalMismatch {
            signal: signal.len(),
            vertices: embedding.vertex_count(),
        });
    }
    if kind == SgrKind::Geometry && signal.channels != 3 {
        return Err(SgrError::Unsupported("geometry signals have 3 channels".into()));
    }
    if resolution < 2 {
        return Err(SgrError::Unsupported(format!("resolution {resolution} is below 2")));
    }
    let grid = uniform_grid(resolution);
    let c = signal.channels;
    let mut values = Grid::zeros(resolution, resolution, c);
    values
        .data
        .par_chunks_mut(c)
        .zip(grid.samples.par_iter())
        .for_each(|(out, sample)| {
            let hit = locator.locate(&sample.sphere);
            let face = embedding.faces()[hit.face_index];
            for (k, o) in out.iter_mut().enumerate() {
                *o = (0..3).map(|corner| hit.lambda[corner] * signal.vertex(face[corner])[k]).sum();
            }
        });
    average_welded(&grid, &mut values);
    let mut map = SgrMap::new(kind, values, None)?;
    map.weld = grid.weld;
    Ok(map)
}

fn average_welded(grid: &SphereGrid, values: &mut Grid) {
    let c = values.channels;
    for group in grid.weld.groups() {
        if group.len() < 2 {
            continue;
        }
        let mut mean = vec![0.0; c];
        for &s in &group {
            for k in 0..c {
                mean[k] += values.data[s * c + k];
            }
        }
        for m in &mut mean {
            *m /= group.len() as f64;
        }
        for &s in &group {
            values.data[s * c..(s + 1) * c].copy_from_slice(&mean);
        }
    }
}

/// Bakes a mesh's own vertex positions through its embedding.
pub fn bake_geometry(embedding: &SphericalEmbedding, mesh: &TriangleMesh, resolution: usize) -> Result<SgrMap> {
    let mut map = bake(embedding, &VertexSignal::from_points(mesh.vertices()), resolution, SgrKind::Geometry)?;
    map.source_hash = Some(mesh.content_hash());
    Ok(map)
}

/// One original vertex placed on the sphere and the square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexRecord {
    pub sphere: Vec3,
    pub square: SquarePoint,
    pub position: Vec3,
}

/// Original-vertex mode: one record per mesh vertex plus the mesh's faces.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSgr {
    pub records: Vec<VertexRecord>,
    pub faces: Vec<[usize; 3]>,
}

impl SparseSgr {
    pub fn to_mesh(&self) -> Result<TriangleMesh> {
        TriangleMesh::new(self.records.iter().map(|r| r.position).collect(), self.faces.clone())
    }
}

/// Records every vertex with its sphere and square coordinates without resampling.
pub fn bake_vertices_only(embedding: &SphericalEmbedding, mesh: &TriangleMesh) -> Result<SparseSgr> {
    if embedding.faces() != mesh.faces() {
        return Err(SgrError::Topology(
            "embedding connectivity differs from mesh".into(),
        ));
    }
    let records = embedding
        .positions()
        .iter()
        .zip(mesh.vertices())
        .map(|(s, p)| VertexRecord {
            sphere: *s,
            square: sphere_to_square(s),
            position: *p,
        })
        .collect();
    Ok(SparseSgr {
        records,
        faces: mesh.faces().to_vec(),
    })
}

/// Rebuilds a mesh from a geometry map.
///
/// Vertices are the distinct sphere points of the grid (welded samples become
/// one vertex holding their mean value); faces come from the convex hull of
/// those points.
pub fn reconstruct(map: &SgrMap) -> Result<TriangleMesh> {
    if map.kind != SgrKind::Geometry {
        return Err(SgrError::GeometryKindRequired);
    }
    let grid = uniform_grid(map.resolution());
    let points = grid.distinct_points();
    let faces = convex_hull(&points)?;
    let mut positions = vec![Vec3::zeros(); points.len()];
    let mut counts = vec![0usize; points.len()];
    for (s, &d) in grid.weld.canonical.iter().enumerate() {
        let v = map.values.data[s * 3..s * 3 + 3].to_vec();
        positions[d] += Vec3::new(v[0], v[1], v[2]);
        counts[d] += 1;
    }
    for (p, n) in positions.iter_mut().zip(&counts) {
        *p /= *n as f64;
    }
    TriangleMesh::new(positions, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{shapes, validate_topology};

    fn own(m: &TriangleMesh) -> SphericalEmbedding {
        SphericalEmbedding::new(
            m.vertices().iter().map(|v| v.normalize()).collect(),
            m.faces().to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn constant_signal_is_reproduced_exactly() {
        let m = shapes::icosphere(2);
        let e = own(&m);
        let sig = VertexSignal::new(2, [0.5, -3.0].repeat(m.vertex_count())).unwrap();
        let map = bake(&e, &sig, 16, SgrKind::Texture).unwrap();
        for cell in map.values.data.chunks(2) {
            assert!((cell[0] - 0.5).abs() < 1e-15 && (cell[1] + 3.0).abs() < 1e-15, "{cell:?}");
        }
    }

    #[test]
    fn identity_signal_stays_near_the_sphere() {
        let m = shapes::icosphere(2);
        let e = own(&m);
        let map = bake(&e, &VertexSignal::from_points(e.positions()), 32, SgrKind::Geometry).unwrap();
        // Largest sagitta over the faces: 1 - distance of the chord plane from the center.
        let sag = (0..e.face_count())
            .map(|f| {
                let [a, b, c] = e.triangle(f);
                let n = (b - a).cross(&(c - a)).normalize();
                1.0 - n.dot(&a)
            })
            .fold(0.0, f64::max);
        for cell in map.values.data.chunks(3) {
            let r = Vec3::new(cell[0], cell[1], cell[2]).norm();
            assert!(r <= 1.0 + 1e-12 && r >= 1.0 - sag - 1e-12, "{r} {sag}");
        }
    }

    #[test]
    fn signal_length_is_checked() {
        let m = shapes::octahedron();
        let e = own(&m);
        let sig = VertexSignal::new(1, vec![0.0; 5]).unwrap();
        assert!(matches!(
            bake(&e, &sig, 4, SgrKind::Displacement),
            Err(SgrError::SignalMismatch { signal: 5, vertices: 6 })
        ));
    }

    #[test]
    fn grid_hull_is_a_closed_sphere() {
        let grid = uniform_grid(32);
        let points = grid.distinct_points();
        let faces = convex_hull(&points).unwrap();
        let m = TriangleMesh::new(points.clone(), faces).unwrap();
        let r = validate_topology(&m);
        assert!(r.is_watertight && r.is_manifold && r.components == 1);
        assert_eq!(r.genus, Some(0));
        let mut used = vec![false; points.len()];
        for f in m.faces() {
            for &v in f {
                used[v] = true;
            }
        }
        assert!(used.iter().all(|&u| u));
    }

    #[test]
    fn vertices_only_round_trip_is_exact() {
        let base = shapes::icosphere(1);
        let e = own(&base);
        let m = base.map_vertices(|v| v * 3.0 + Vec3::new(1.0, 2.0, 3.0));
        let sparse = bake_vertices_only(&e, &m).unwrap();
        assert_eq!(sparse.records.len(), m.vertex_count());
        assert_eq!(sparse.to_mesh().unwrap(), m);
    }

    #[test]
    fn reconstruct_requires_geometry() {
        let m = shapes::octahedron();
        let e = own(&m);
        let map = bake(&e, &VertexSignal::from_points(m.vertices()), 4, SgrKind::Texture).unwrap();
        assert!(matches!(reconstruct(&map), Err(SgrError::GeometryKindRequired)));
    }

    #[test]
    fn sphere_round_trip_lands_on_the_sphere() {
        let m = shapes::icosphere(3);
        let e = own(&m);
        let map = bake_geometry(&e, &m, 32).unwrap();
        let rec = reconstruct(&map).unwrap();
        assert_eq!(rec.vertex_count(), map.weld.distinct_count());
        for v in rec.vertices() {
            assert!((v.norm() - 1.0).abs() < 5e-3);
        }
    }
}
