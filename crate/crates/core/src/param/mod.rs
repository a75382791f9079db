//! Low-stretch spherical parameterization of closed genus-zero meshes.
//!
//! The mesh is decimated to a tetrahedron ([`simplify_to_tetrahedron`]), the
//! tetrahedron is placed on the sphere ([`embed_base`]), and the collapses are
//! undone one vertex split at a time. Each new vertex goes inside the kernel
//! of its ring so no spherical triangle ever flips, after which the new vertex
//! and its ring are relaxed by great-circle line searches. Whenever the vertex
//! count has grown by a constant factor, a global sweep relaxes every vertex in
//! order of how much its neighborhood has moved.

mod embedding;
mod io;
mod kernel;
mod linesearch;
mod progressive;
mod stretch;

pub use embedding::{embed_base, optimize_vertex, ProgressiveEmbedding, SphericalEmbedding};
pub use io::{read_embedding, write_embedding, EMBEDDING_MAGIC};
pub use kernel::{polygon_kernel, KernelRegion};
pub use progressive::{simplify_to_tetrahedron, ProgressiveMesh, VertexSplit};
pub use stretch::{face_stretch, stretch_energy, StretchStats};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgrError};
use crate::mesh::{validate_topology, TriangleMesh};

/// Knobs of the parameterizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamConfig {
    /// Weight of the inverse-stretch regularizer.
    pub epsilon: f64,
    /// Exponent of the inverse-stretch regularizer (even, >= 2).
    pub p: u32,
    /// Random great-circle directions tried per vertex optimization.
    pub directions_per_pass: usize,
    /// Line-search tolerance as great-circle arc length.
    pub local_tolerance: f64,
    /// A global sweep runs whenever the vertex count has grown by this factor.
    pub global_sweep_growth_factor: f64,
    /// A sweep stops once the largest pending neighborhood change is below this arc length.
    pub global_convergence_threshold: f64,
    pub rng_seed: u64,
    /// Turn the periodic and final global sweeps on or off.
    pub global_sweeps: bool,
    /// Upper bound on vertex visits per sweep, as a multiple of the vertex count.
    pub max_sweep_visits: usize,
}

impl Default for ParamConfig {
    fn default() -> Self {
        ParamConfig {
            epsilon: 1e-3,
            p: 4,
            directions_per_pass: 8,
            local_tolerance: 1e-6,
            global_sweep_growth_factor: 1.5,
            global_convergence_threshold: 1e-5,
            rng_seed: 0,
            global_sweeps: true,
            max_sweep_visits: 12,
        }
    }
}

impl ParamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon >= 0.0
            && self.p >= 2
            && self.p % 2 == 0
            && self.directions_per_pass >= 1
            && self.local_tolerance > 0.0
            && self.global_sweep_growth_factor > 1.0
            && self.global_convergence_threshold > 0.0
            && self.max_sweep_visits >= 1;
        if ok {
            Ok(())
        } else {
            Err(SgrError::Unsupported(format!("invalid parameterization config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Insert,
    Sweep,
}

/// State after one step of the coarse-to-fine pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub kind: StepKind,
    pub active_vertices: usize,
    pub flipped_faces: usize,
    pub energy_before: f64,
    pub energy_after: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamTrace {
    pub steps: Vec<TraceStep>,
    /// Efficiency of the embedding right after the last insertion, before the final sweep.
    pub efficiency_after_insertion: f64,
}

fn check_input(mesh: &TriangleMesh) -> Result<()> {
    let report = validate_topology(mesh);
    if !(report.is_watertight && report.is_manifold) || report.components != 1 {
        return Err(SgrError::Topology(
            "mesh must be a single watertight 2-manifold".into(),
        ));
    }
    if report.genus != Some(0) {
        return Err(SgrError::NonZeroGenus(report.genus.unwrap_or(-1)));
    }
    for f in 0..mesh.face_count() {
        if stretch::MeshFrame::new(&mesh.triangle(f)).is_none() {
            return Err(SgrError::DegenerateFace(f));
        }
    }
    Ok(())
}

/// Computes a fold-free spherical embedding of `mesh`.
pub fn parameterize(mesh: &TriangleMesh, cfg: &ParamConfig) -> Result<(SphericalEmbedding, StretchStats)> {
    let (e, s, _) = run(mesh, cfg, false)?;
    Ok((e, s))
}

/// Like [`parameterize`], also recording validity and energy after every step.
pub fn parameterize_traced(
    mesh: &TriangleMesh,
    cfg: &ParamConfig,
) -> Result<(SphericalEmbedding, StretchStats, ParamTrace)> {
    run(mesh, cfg, true)
}

fn run(
    mesh: &TriangleMesh,
    cfg: &ParamConfig,
    traced: bool,
) -> Result<(SphericalEmbedding, StretchStats, ParamTrace)> {
    cfg.validate()?;
    check_input(mesh)?;
    let pm = simplify_to_tetrahedron(mesh, cfg.rng_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut state = ProgressiveEmbedding::new(mesh, &pm)?;
    let mut trace = ParamTrace::default();
    let mut last_sweep = state.active_count() as f64;

    for split in &pm.splits {
        let before = if traced { state.energy(cfg) } else { 0.0 };
        state.insert_vertex(split)?;
        state.optimize_vertex(split.vertex, cfg, &mut rng);
        for w in state.neighbors(split.vertex) {
            state.optimize_vertex(w, cfg, &mut rng);
        }
        if traced {
            trace.steps.push(TraceStep {
                kind: StepKind::Insert,
                active_vertices: state.active_count(),
                flipped_faces: state.flipped_faces(),
                energy_before: before,
                energy_after: state.energy(cfg),
            });
        }
        let grown = state.active_count() as f64 >= last_sweep * cfg.global_sweep_growth_factor;
        if cfg.global_sweeps && grown && state.active_count() < mesh.vertex_count() {
            sweep(&mut state, cfg, &mut rng, traced, &mut trace);
            last_sweep = state.active_count() as f64;
        }
    }
    if traced {
        let e = state.to_embedding()?;
        trace.efficiency_after_insertion = stretch_energy(mesh, &e, cfg)?.efficiency;
    }
    if cfg.global_sweeps {
        sweep(&mut state, cfg, &mut rng, traced, &mut trace);
    }

    let embedding = state.to_embedding()?;
    if let Some(f) = embedding.first_invalid_face() {
        return Err(SgrError::InvalidEmbedding(f));
    }
    let stats = stretch_energy(mesh, &embedding, cfg)?;
    Ok((embedding, stats, trace))
}

fn sweep(
    state: &mut ProgressiveEmbedding<'_>,
    cfg: &ParamConfig,
    rng: &mut ChaCha8Rng,
    traced: bool,
    trace: &mut ParamTrace,
) {
    let before = if traced { state.energy(cfg) } else { 0.0 };
    state.global_sweep(cfg, rng);
    if traced {
        trace.steps.push(TraceStep {
            kind: StepKind::Sweep,
            active_vertices: state.active_count(),
            flipped_faces: state.flipped_faces(),
            energy_before: before,
            energy_after: state.energy(cfg),
        });
    }
}
