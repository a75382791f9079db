//! `sgr`: validate, parameterize, bake, reconstruct, pad and evaluate meshes.
//!
//! Exit status is 0 on success, 1 when the input is rejected for domain
//! reasons (topology, hash mismatch, wrong map kind) and 2 on I/O or parse
//! failures.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sgr_core::equal_area::WeldMap;
use sgr_core::mesh::{load_mesh, save_mesh, validate_topology, MeshFormat};
use sgr_core::metrics::{length_deviation, MetricsReport};
use sgr_core::param::{parameterize, read_embedding, write_embedding, SphericalEmbedding};
use sgr_core::sgr::{
    bake, center_symmetric_pad, read_sgr, reconstruct, write_sgr, SgrKind, SgrMap, VertexSignal,
};
use sgr_core::{Result, SgrError, TriangleMesh, Vec3};

use config::{Overrides, PipelineConfig};
use report::{table, ReportFile, ReportRow};

#[derive(Parser)]
#[command(name = "sgr", version, about = "Spherical geometry representation toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid side length R.
    #[arg(long, short = 'r', global = true)]
    resolution: Option<usize>,
    /// Default directory for outputs (falls back to $SGR_OUTPUT_DIR, then `.`).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// F-score distance threshold.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Surface samples per mesh for distance scores.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Geometry,
    Texture,
    Displacement,
}

impl From<KindArg> for SgrKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Geometry => SgrKind::Geometry,
            KindArg::Texture => SgrKind::Texture,
            KindArg::Displacement => SgrKind::Displacement,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a mesh is a closed genus-zero 2-manifold.
    Validate { mesh: PathBuf },
    /// Embed a mesh on the unit sphere.
    Param {
        mesh: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Resample a per-vertex signal onto the equal-area grid.
    Bake {
        mesh: PathBuf,
        embedding: PathBuf,
        #[arg(long, value_enum, default_value = "geometry")]
        kind: KindArg,
        /// Whitespace-separated per-vertex values, one line per vertex.
        /// Defaults: positions (geometry), normals mapped to [0, 1] (texture),
        /// offset from the sphere point (displacement).
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Rebuild a mesh from a geometry map.
    Reconstruct {
        sgr: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Parameterize, bake and reconstruct at several resolutions and score each result.
    Roundtrip {
        mesh: PathBuf,
        /// Comma-separated resolutions.
        #[arg(long, value_delimiter = ',')]
        resolutions: Option<Vec<usize>>,
        /// Also write each reconstructed mesh.
        #[arg(long)]
        keep_meshes: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Regularization terms and aspect ratio of a mesh; distance scores against a second mesh.
    Metrics {
        meshes: Vec<PathBuf>,
        /// Score every mesh on its own and average the edge term over the list.
        #[arg(long)]
        batch: bool,
        /// Write the rows as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the rows of an existing report file.
        #[arg(long, conflicts_with_all = ["meshes", "batch", "report"])]
        table: Option<PathBuf>,
    },
    /// Add the one-cell center-symmetric border to a map.
    Pad {
        sgr: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Domain rejection carrying its own message; exits with status 1.
struct Rejected;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = Overrides {
        resolution: cli.common.resolution,
        seed: cli.common.seed,
        tau_mm: cli.common.tau,
        chamfer_samples: cli.common.samples,
        output_dir: cli.common.output_dir.clone(),
        resolutions: match &cli.cmd {
            Cmd::Roundtrip { resolutions, .. } => resolutions.clone(),
            _ => None,
        },
    };
    let outcome = PipelineConfig::load(cli.common.config.as_deref(), &o).and_then(|cfg| run(cli.cmd, &cfg));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Rejected)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn load(path: &Path) -> Result<TriangleMesh> {
    load_mesh(path, MeshFormat::from_path(path)?)
}

fn save(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    save_mesh(mesh, path, MeshFormat::from_path(path)?)
}

fn run(cmd: Cmd, cfg: &PipelineConfig) -> Result<std::result::Result<(), Rejected>> {
    match cmd {
        Cmd::Validate { mesh } => validate(&mesh),
        Cmd::Param { mesh, output } => param(&mesh, output.as_deref(), cfg).map(Ok),
        Cmd::Bake {
            mesh,
            embedding,
            kind,
            signal,
            output,
        } => bake_cmd(&mesh, &embedding, kind.into(), signal.as_deref(), output.as_deref(), cfg).map(Ok),
        Cmd::Reconstruct { sgr, output } => reconstruct_cmd(&sgr, output.as_deref(), cfg).map(Ok),
        Cmd::Roundtrip {
            mesh,
            keep_meshes,
            output,
            ..
        } => roundtrip(&mesh, keep_meshes, output.as_deref(), cfg),
        Cmd::Metrics {
            meshes,
            batch,
            report,
            table: existing,
        } => {
            if let Some(p) = existing {
                print!("{}", table(&ReportFile::load(&p)?.rows));
                return Ok(Ok(()));
            }
            metrics(&meshes, batch, report.as_deref(), cfg).map(Ok)
        }
        Cmd::Pad { sgr, output } => pad(&sgr, output.as_deref(), cfg).map(Ok),
    }
}

fn validate(path: &Path) -> Result<std::result::Result<(), Rejected>> {
    let mesh = load(path)?;
    let r = validate_topology(&mesh);
    println!("vertices: {}", r.vertex_count);
    println!("edges: {}", r.edge_count);
    println!("faces: {}", r.face_count);
    println!("watertight: {}", r.is_watertight);
    println!("manifold: {}", r.is_manifold);
    println!("components: {}", r.components);
    println!("boundary_edges: {}", r.boundary_edge_count);
    println!("euler_characteristic: {}", r.euler_characteristic);
    match r.genus {
        Some(g) => println!("genus: {g}"),
        None => println!("genus: undefined"),
    }
    println!("valid: {}", r.is_closed_genus_zero());
    Ok(if r.is_closed_genus_zero() { Ok(()) } else { Err(Rejected) })
}

fn param(path: &Path, output: Option<&Path>, cfg: &PipelineConfig) -> Result<()> {
    let mesh = load(path)?;
    let (embedding, stats) = parameterize(&mesh, &cfg.param)?;
    let out = cfg.output_path(output, path, ".sphere.ply")?;
    let side = write_embedding(&out, &mesh, &embedding)?;
    println!("embedding: {}", out.display());
    println!("sidecar: {}", side.display());
    println!("vertices: {}", mesh.vertex_count());
    println!("efficiency: {:.6}", stats.efficiency);
    println!("l2_stretch: {:.6}", stats.l2_stretch);
    println!("linf_stretch: {:.6}", stats.linf_stretch);
    println!("energy: {:.6}", stats.energy);
    Ok(())
}

fn vertex_normals(mesh: &TriangleMesh) -> Vec<Vec3> {
    let mut n = vec![Vec3::zeros(); mesh.vertex_count()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let fnorm = mesh.face_normal(f);
        for &v in face {
            n[v] += fnorm;
        }
    }
    n.into_iter()
        .map(|v| v.try_normalize(0.0).unwrap_or_else(Vec3::zeros))
        .collect()
}

fn read_signal(path: &Path) -> Result<VertexSignal> {
    let text = std::fs::read_to_string(path).map_err(|e| SgrError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut channels = None;
    let mut data = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| SgrError::Parse(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if *channels.get_or_insert(row.len()) != row.len() {
            return Err(SgrError::Parse(format!(
                "{}:{}: expected {} values",
                path.display(),
                n + 1,
                channels.unwrap_or(0)
            )));
        }
        data.extend(row);
    }
    VertexSignal::new(channels.unwrap_or(1), data)
}

fn default_signal(kind: SgrKind, mesh: &TriangleMesh, embedding: &SphericalEmbedding) -> VertexSignal {
    match kind {
        SgrKind::Geometry => VertexSignal::from_points(mesh.vertices()),
        SgrKind::Texture => VertexSignal::from_points(
            &vertex_normals(mesh)
                .iter()
                .map(|n| n * 0.5 + Vec3::repeat(0.5))
                .collect::<Vec<_>>(),
        ),
        SgrKind::Displacement => VertexSignal::from_points(
            &mesh
                .vertices()
                .iter()
                .zip(embedding.positions())
                .map(|(p, s)| p - s)
                .collect::<Vec<_>>(),
        ),
    }
}

fn bake_cmd(
    mesh_path: &Path,
    embedding_path: &Path,
    kind: SgrKind,
    signal: Option<&Path>,
    output: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<()> {
    let mesh = load(mesh_path)?;
    let embedding = read_embedding(embedding_path, &mesh)?;
    let signal = match signal {
        Some(p) => read_signal(p)?,
        None => default_signal(kind, &mesh, &embedding),
    };
    let mut map = bake(&embedding, &signal, cfg.resolution, kind)?;
    map.source_hash = Some(mesh.content_hash());
    let out = cfg.output_path(output, mesh_path, &format!(".{}.png", kind.name()))?;
    write_sgr(&map, &out)?;
    println!("sgr: {}", out.display());
    println!("kind: {}", kind.name());
    println!("resolution: {}x{}", map.resolution(), map.resolution());
    println!("channels: {}", map.channels());
    println!("bit_depth: {}", kind.bit_depth());
    Ok(())
}

fn reconstruct_cmd(path: &Path, output: Option<&Path>, cfg: &PipelineConfig) -> Result<()> {
    let map = read_sgr(path)?;
    let mesh = reconstruct(&map)?;
    let out = cfg.output_path(output, path, ".recon.ply")?;
    save(&mesh, &out)?;
    println!("mesh: {}", out.display());
    println!("vertices: {}", mesh.vertex_count());
    println!("faces: {}", mesh.face_count());
    Ok(())
}

fn pad(path: &Path, output: Option<&Path>, cfg: &PipelineConfig) -> Result<()> {
    let map = read_sgr(path)?;
    let padded = SgrMap {
        kind: map.kind,
        values: center_symmetric_pad(&map.values),
        quantization: map.quantization.clone(),
        weld: WeldMap::default(),
        source_hash: map.source_hash.clone(),
    };
    let out = cfg.output_path(output, path, ".pad.png")?;
    write_sgr(&padded, &out)?;
    println!("sgr: {}", out.display());
    println!("size: {}x{}", padded.values.width, padded.values.height);
    Ok(())
}

fn roundtrip(
    path: &Path,
    keep_meshes: bool,
    output: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<std::result::Result<(), Rejected>> {
    let mesh = load(path)?;
    let (embedding, stats) = parameterize(&mesh, &cfg.param)?;
    println!("efficiency: {:.6}", stats.efficiency);
    let signal = VertexSignal::from_points(mesh.vertices());
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
    let mut rows = Vec::new();
    let mut all_valid = true;
    for &r in &cfg.resolutions {
        let map = bake(&embedding, &signal, r, SgrKind::Geometry)?;
        let rec = reconstruct(&map)?;
        let valid = validate_topology(&rec).is_closed_genus_zero();
        all_valid &= valid;
        if keep_meshes {
            save(&rec, &cfg.output_path(None, path, &format!(".r{r}.ply"))?)?;
        }
        let m = MetricsReport::pair(&rec, &mesh, &cfg.reg_weights, cfg.chamfer_samples, cfg.tau_mm, cfg.seed)?;
        println!(
            "R={r} vertices={} valid={valid} chamfer_mm={:.6} f_score_pct={:.2} aspect_ratio_mean={:.4}",
            rec.vertex_count(),
            m.chamfer_mm.unwrap_or(f64::NAN),
            m.f_score_pct.unwrap_or(f64::NAN),
            m.aspect_ratio_mean
        );
        rows.push(ReportRow {
            label: stem.to_string(),
            resolution: Some(r),
            vertices: rec.vertex_count(),
            faces: rec.face_count(),
            metrics: m,
        });
    }
    let out = cfg.output_path(output, path, ".roundtrip.json")?;
    ReportFile { rows }.save(&out)?;
    println!("report: {}", out.display());
    if all_valid {
        Ok(Ok(()))
    } else {
        eprintln!("error: a reconstruction is not a closed genus-zero manifold");
        Ok(Err(Rejected))
    }
}

fn label(p: &Path) -> String {
    p.file_name().and_then(|s| s.to_str()).unwrap_or("mesh").to_string()
}

fn metrics(paths: &[PathBuf], batch: bool, report: Option<&Path>, cfg: &PipelineConfig) -> Result<()> {
    let w = &cfg.reg_weights;
    println!("weights: alpha_nor={} alpha_lap={} alpha_edg={}", w.alpha_nor, w.alpha_lap, w.alpha_edg);
    let rows = match (paths, batch) {
        ([], _) => return Err(SgrError::Unsupported("no mesh given".into())),
        ([a, b], false) => {
            let (ma, mb) = (load(a)?, load(b)?);
            let m = MetricsReport::pair(&ma, &mb, w, cfg.chamfer_samples, cfg.tau_mm, cfg.seed)?;
            vec![row(label(a), &ma, m)]
        }
        ([_], _) | (_, true) => {
            let results: Vec<Result<(ReportRow, Vec<f64>)>> = thread::scope(|s| {
                let handles: Vec<_> = paths
                    .iter()
                    .map(|p| {
                        s.spawn(move || {
                            let m = load(p)?;
                            let lengths = m
                                .edges()
                                .iter()
                                .map(|&(a, b)| (m.vertices()[a] - m.vertices()[b]).norm())
                                .collect();
                            Ok((row(label(p), &m, MetricsReport::single(&m, w)?), lengths))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            let mut rows = Vec::new();
            let mut per_mesh_edge = Vec::new();
            for r in results {
                let (row, lengths) = r?;
                per_mesh_edge.push(length_deviation(&lengths, w.e0_policy));
                rows.push(row);
            }
            if batch {
                let mean = per_mesh_edge.iter().sum::<f64>() / per_mesh_edge.len() as f64;
                println!("meshes: {}", rows.len());
                println!("mean_l_edge: {mean}");
            }
            rows
        }
        _ => {
            return Err(SgrError::Unsupported(
                "give one mesh, two meshes to compare, or --batch with a list".into(),
            ))
        }
    };
    if rows.len() == 1 {
        print!("{}", rows[0].metrics.to_key_value());
    } else {
        print!("{}", table(&rows));
    }
    if let Some(p) = report {
        ReportFile { rows }.save(p)?;
    }
    Ok(())
}

fn row(label: String, mesh: &TriangleMesh, metrics: MetricsReport) -> ReportRow {
    ReportRow {
        label,
        resolution: None,
        vertices: mesh.vertex_count(),
        faces: mesh.face_count(),
        metrics,
    }
}
