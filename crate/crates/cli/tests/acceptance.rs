//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgr_core::equal_area::{sphere_to_square, square_to_sphere, uniform_grid, SquarePoint};
use sgr_core::mesh::{load_mesh, shapes, validate_topology, MeshFormat, TriangleMesh};
use sgr_core::metrics::{
    chamfer_distance, f_score, laplacian_smoothing, normals_consistency, triangle_quality, MetricsReport,
    RegWeights, DEFAULT_SAMPLES,
};
use sgr_core::param::{parameterize_traced, ParamConfig, SphericalEmbedding, StepKind};
use sgr_core::sgr::{bake, center_symmetric_pad, convex_hull, reconstruct, Grid, SgrKind, VertexSignal};
use sgr_core::Vec3;

use common::{sgr, write};

const R_PAPER: usize = 256;
const PAPER_VERTICES: usize = 65_536;
const BAKE_RECONSTRUCT_BUDGET_S: f64 = 30.0;
const EQUAL_AREA_BUDGET_S: f64 = 20.0;
const CHI_SQUARE_SAMPLES: usize = 1_000_000;
const CHI_SQUARE_BINS: usize = 100;
const SIGNIFICANCE_Z: f64 = 3.090_232_306_167_813; // upper 0.001 normal quantile
const SUBRECT_COUNT: usize = 100;
const SUBRECT_REL_TOL: f64 = 1e-2;
const BIJECTION_POINTS: usize = 100_000;
const BIJECTION_TOL: f64 = 1e-9;
const PAD_GRIDS: usize = 1000;
const HULL_SETS: usize = 50;
const HULL_POINTS: usize = 32;
const DEFORMED_MESHES: u64 = 10;
const DEFORM_AMPLITUDE: f64 = 0.2;
const ETA_MIN_ICOSPHERE: f64 = 0.99;
const ROUNDTRIP_RESOLUTIONS: [usize; 4] = [32, 64, 128, 256];
const CD_DIAGONAL_FRACTION: f64 = 0.01;
const AR_MEAN_MAX: f64 = 1.6;
const TOL_NOR: f64 = 1e-9;
const TOL_LAP: f64 = 1e-9;
const TOL_Q_EQUILATERAL: f64 = 1e-12;
const TOL_Q_RIGHT: f64 = 1e-9;
const CHAMFER_REL_TOL: f64 = 0.02;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Chi-square upper quantile by the Wilson-Hilferty cube approximation.
fn chi_square_critical(df: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Uniform point on the sphere from Archimedes' hat-box theorem.
fn uniform_sphere(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * a.cos(), r * a.sin(), z)
}

fn criterion_grid_cardinality(dir: &Path) -> Outcome {
    let grid = uniform_grid(R_PAPER);
    let samples = grid.samples.len();
    // Distinct sphere points counted independently of the weld map.
    let distinct: HashSet<[i64; 3]> = grid
        .samples
        .iter()
        .map(|s| [s.sphere.x, s.sphere.y, s.sphere.z].map(|c| (c * 1e9).round() as i64))
        .collect();

    let mesh = shapes::deformed_icosphere(3, DEFORM_AMPLITUDE, 100);
    write(dir, "card.ply", &mesh);
    let p = sgr(dir, &["param", "card.ply", "-o", "card.sphere.ply"]);
    if p.code != 0 {
        return outcome(false, format!("param failed: {}", p.stderr.trim()));
    }
    let t = Instant::now();
    let b = sgr(dir, &["bake", "card.ply", "card.sphere.ply", "-r", "256", "-o", "card.png"]);
    let r = sgr(dir, &["reconstruct", "card.png", "-o", "card.recon.ply"]);
    let secs = t.elapsed().as_secs_f64();
    if b.code != 0 || r.code != 0 {
        return outcome(false, format!("bake/reconstruct failed: {}{}", b.stderr.trim(), r.stderr.trim()));
    }
    let png = fs::read(dir.join("card.png")).unwrap();
    // IHDR: width and height at bytes 16..24, bit depth at 24.
    let w = u32::from_be_bytes(png[16..20].try_into().unwrap());
    let h = u32::from_be_bytes(png[20..24].try_into().unwrap());
    let depth = png[24];
    let rec = load_mesh(&dir.join("card.recon.ply"), MeshFormat::Ply).unwrap();
    let pass = samples == PAPER_VERTICES
        && rec.vertex_count() == distinct.len()
        && rec.vertex_count() == grid.weld.distinct_count()
        && (w, h, depth) == (256, 256, 16)
        && secs <= BAKE_RECONSTRUCT_BUDGET_S;
    outcome(
        pass,
        format!(
            "samples={samples} (expect {PAPER_VERTICES}); PNG {w}x{h} {depth}-bit; reconstructed V={} vs distinct sphere samples {} ({} samples welded on the square's border); bake+reconstruct {secs:.2}s (<= {BAKE_RECONSTRUCT_BUDGET_S}s)",
            rec.vertex_count(),
            distinct.len(),
            samples - distinct.len()
        ),
    )
}

fn criterion_equal_area() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // 10 equal-height z bands x 10 longitude sectors: equal spherical areas.
    let mut counts = vec![0usize; CHI_SQUARE_BINS];
    for _ in 0..CHI_SQUARE_SAMPLES {
        let q = square_to_sphere(SquarePoint::new(rng.random(), rng.random()));
        let band = (((q.z + 1.0) / 2.0 * 10.0) as usize).min(9);
        let lon = q.y.atan2(q.x).rem_euclid(std::f64::consts::TAU);
        let sector = ((lon / std::f64::consts::TAU * 10.0) as usize).min(9);
        counts[band * 10 + sector] += 1;
    }
    let expected = CHI_SQUARE_SAMPLES as f64 / CHI_SQUARE_BINS as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = chi_square_critical((CHI_SQUARE_BINS - 1) as f64, SIGNIFICANCE_Z);

    let sphere_pts: Vec<SquarePoint> = (0..CHI_SQUARE_SAMPLES)
        .map(|_| sphere_to_square(&uniform_sphere(&mut rng)))
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..SUBRECT_COUNT {
        let (w, h): (f64, f64) = (rng.random_range(0.4..1.0), rng.random_range(0.4..1.0));
        let (s0, t0): (f64, f64) = (rng.random_range(0.0..1.0 - w), rng.random_range(0.0..1.0 - h));
        let inside = sphere_pts
            .iter()
            .filter(|p| p.s >= s0 && p.s < s0 + w && p.t >= t0 && p.t < t0 + h)
            .count();
        let frac = inside as f64 / CHI_SQUARE_SAMPLES as f64;
        worst = worst.max((frac - w * h).abs() / (w * h));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        chi2 <= critical && worst <= SUBRECT_REL_TOL && secs <= EQUAL_AREA_BUDGET_S,
        format!(
            "chi2={chi2:.2} (critical {critical:.2} at p=0.001, df=99); worst sub-rectangle area error {worst:.4} relative (<= {SUBRECT_REL_TOL}); {secs:.2}s (<= {EQUAL_AREA_BUDGET_S}s)"
        ),
    )
}

fn criterion_bijection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..BIJECTION_POINTS {
        let p = SquarePoint::new(rng.random_range(1e-6..1.0 - 1e-6), rng.random_range(1e-6..1.0 - 1e-6));
        let back = sphere_to_square(&square_to_sphere(p));
        worst = worst.max((back.s - p.s).abs().max((back.t - p.t).abs()));
    }
    outcome(
        worst <= BIJECTION_TOL,
        format!("max square->sphere->square error {worst:.2e} over {BIJECTION_POINTS} points (<= {BIJECTION_TOL:e})"),
    )
}

/// Border extension written out cell by cell from the algorithm's listing.
fn reference_pad(g: &Grid) -> Grid {
    let (h, w, c) = (g.height, g.width, g.channels);
    let mut q = vec![0.0; (h + 2) * (w + 2) * c];
    let at = |y: usize, x: usize, k: usize| g.data[(y * w + x) * c + k];
    let idx = |y: usize, x: usize, k: usize| (y * (w + 2) + x) * c + k;
    for k in 0..c {
        for i in 1..=h {
            for j in 1..=w {
                q[idx(i, j, k)] = at(i - 1, j - 1, k);
            }
        }
        for i in 1..=h {
            q[idx(i, 0, k)] = at(h - i, 0, k);
            q[idx(i, w + 1, k)] = at(h - i, w - 1, k);
        }
        for j in 1..=w {
            q[idx(0, j, k)] = at(0, w - j, k);
            q[idx(h + 1, j, k)] = at(h - 1, w - j, k);
        }
        let nu = (at(0, 0, k) + at(0, w - 1, k) + at(h - 1, 0, k) + at(h - 1, w - 1, k)) / 4.0;
        for (y, x) in [(0, 0), (0, w + 1), (h + 1, 0), (h + 1, w + 1)] {
            q[idx(y, x, k)] = nu;
        }
    }
    Grid {
        width: w + 2,
        height: h + 2,
        channels: c,
        data: q,
    }
}

fn criterion_padding() -> Outcome {
    let (a, b, c, d) = (0.3, -1.25, 7.0, 2.5);
    let nu = (a + b + c + d) / 4.0;
    let hand = [nu, b, a, nu, c, a, b, d, a, c, d, b, nu, d, c, nu];
    let two = Grid {
        width: 2,
        height: 2,
        channels: 1,
        data: vec![a, b, c, d],
    };
    let hand_ok = center_symmetric_pad(&two).data == hand;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..PAD_GRIDS {
        let (w, h, ch) = (rng.random_range(1..12), rng.random_range(1..12), rng.random_range(1..5));
        let g = Grid {
            width: w,
            height: h,
            channels: ch,
            data: (0..w * h * ch).map(|_| rng.random_range(-10.0..10.0)).collect(),
        };
        let ours = center_symmetric_pad(&g);
        let theirs = reference_pad(&g);
        if ours.data.iter().map(|v| v.to_bits()).ne(theirs.data.iter().map(|v| v.to_bits())) {
            mismatches += 1;
        }
    }
    outcome(
        hand_ok && mismatches == 0,
        format!("2x2 hand trace {}; {mismatches}/{PAD_GRIDS} random grids differ bitwise", if hand_ok { "matches" } else { "differs" }),
    )
}

fn criterion_hull() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut checks = 0usize;
    for set in 0..HULL_SETS {
        let pts: Vec<Vec3> = (0..HULL_POINTS).map(|_| uniform_sphere(&mut rng)).collect();
        let faces = match convex_hull(&pts) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("set {set}: {e}"));
                continue;
            }
        };
        let mesh = TriangleMesh::new(pts.clone(), faces.clone()).unwrap();
        let topo = validate_topology(&mesh);
        if !topo.is_closed_genus_zero() || topo.euler_characteristic != 2 {
            failures.push(format!("set {set}: not a closed genus-0 manifold"));
        }
        for t in &faces {
            let [a, b, c] = t.map(|i| pts[i]);
            let n = (b - a).cross(&(c - a));
            if n.dot(&(a + b + c)) <= 0.0 {
                failures.push(format!("set {set}: inward face"));
            }
            // Cap bounded by the plane through a, b, c: no other point above it.
            let rim = n.dot(&a);
            for (k, q) in pts.iter().enumerate() {
                if t.contains(&k) {
                    continue;
                }
                checks += 1;
                if n.dot(q) > rim + 1e-12 * n.norm() {
                    failures.push(format!("set {set}: point {k} inside a face cap"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{HULL_SETS} sets of {HULL_POINTS} points, {checks} cap checks, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

struct Parameterized {
    name: String,
    mesh: TriangleMesh,
    embedding: SphericalEmbedding,
}

fn criterion_parameterization(out: &mut Vec<Parameterized>) -> Outcome {
    let mut inputs = vec![("icosphere".to_string(), shapes::icosphere(3))];
    for seed in 0..DEFORMED_MESHES {
        inputs.push((format!("deformed-{seed}"), shapes::deformed_icosphere(3, DEFORM_AMPLITUDE, seed)));
    }
    let cfg = ParamConfig::default();
    let t = Instant::now();
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = inputs
            .iter()
            .map(|(_, m)| s.spawn(|| parameterize_traced(m, &cfg)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut problems = Vec::new();
    let mut etas = Vec::new();
    let mut max_flipped = 0;
    for ((name, mesh), r) in inputs.into_iter().zip(results) {
        let (embedding, stats, trace) = match r {
            Ok(v) => v,
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                continue;
            }
        };
        let flipped = trace.steps.iter().map(|s| s.flipped_faces).max().unwrap_or(0);
        max_flipped = max_flipped.max(flipped);
        if flipped > 0 || embedding.first_invalid_face().is_some() {
            problems.push(format!("{name}: flipped faces"));
        }
        let eta = stats.efficiency;
        if !(eta <= 1.0) || (name == "icosphere" && eta < ETA_MIN_ICOSPHERE) {
            problems.push(format!("{name}: eta {eta}"));
        }
        if trace.efficiency_after_insertion > 1.0 {
            problems.push(format!("{name}: eta after insertion {}", trace.efficiency_after_insertion));
        }
        for s in trace.steps.iter().filter(|s| s.kind == StepKind::Sweep) {
            if s.energy_after > s.energy_before {
                problems.push(format!("{name}: sweep raised energy {} -> {}", s.energy_before, s.energy_after));
            }
        }
        etas.push(format!("{name}={eta:.4}"));
        out.push(Parameterized { name, mesh, embedding });
    }
    outcome(
        problems.is_empty(),
        format!(
            "11 meshes in {:.1}s; max flipped faces at any step {max_flipped}; eta: {}{}",
            t.elapsed().as_secs_f64(),
            etas.join(" "),
            problems.first().map(|p| format!("; first problem: {p}")).unwrap_or_default()
        ),
    )
}

fn criterion_roundtrip(params: &[Parameterized]) -> Outcome {
    let w = RegWeights::default();
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for p in params.iter().filter(|p| p.name.starts_with("deformed")) {
        let signal = VertexSignal::from_points(p.mesh.vertices());
        let diag = p.mesh.bounding_box_diagonal();
        let mut cds = Vec::new();
        let mut ar256 = f64::NAN;
        for &r in &ROUNDTRIP_RESOLUTIONS {
            let rec = bake(&p.embedding, &signal, r, SgrKind::Geometry).and_then(|m| reconstruct(&m));
            let rec = match rec {
                Ok(m) => m,
                Err(e) => {
                    problems.push(format!("{} R={r}: {e}", p.name));
                    continue;
                }
            };
            let m = MetricsReport::pair(&rec, &p.mesh, &w, DEFAULT_SAMPLES, 1.0, 0).unwrap();
            cds.push(m.chamfer_mm.unwrap());
            ar256 = m.aspect_ratio_mean;
        }
        if cds.windows(2).any(|c| c[1] > c[0]) {
            problems.push(format!("{}: CD not monotone {cds:?}", p.name));
        }
        let last = *cds.last().unwrap_or(&f64::NAN);
        if !(last <= CD_DIAGONAL_FRACTION * diag) {
            problems.push(format!("{}: CD@256 {last} > 1% of diagonal {diag}", p.name));
        }
        if !(ar256 <= AR_MEAN_MAX) {
            problems.push(format!("{}: AR mean {ar256}", p.name));
        }
        summary.push(format!(
            "{}: CD {} ({:.3}% diag) AR {ar256:.3}",
            p.name,
            cds.iter().map(|c| format!("{c:.2e}")).collect::<Vec<_>>().join(">"),
            100.0 * last / diag
        ));
    }
    outcome(
        problems.is_empty(),
        format!(
            "{}{}",
            summary.join("; "),
            problems.first().map(|p| format!("; first problem: {p}")).unwrap_or_default()
        ),
    )
}

fn criterion_metric_oracles() -> Outcome {
    let s3 = 3f64.sqrt();
    let l_nor = normals_consistency(&shapes::tetrahedron()).unwrap();
    let l_lap = laplacian_smoothing(&shapes::octahedron()).unwrap();
    let q_eq = triangle_quality(&Vec3::zeros(), &Vec3::x(), &Vec3::new(0.5, s3 / 2.0, 0.0));
    let q_right = triangle_quality(&Vec3::zeros(), &Vec3::x(), &Vec3::y());
    let q_right_expect = (2f64.sqrt() + 1.0) / s3;
    // Outward normals of a regular tetrahedron meet at cos = -1/3 across each of 6 edges.
    let l_nor_expect = 6.0 * (1.0 + 1.0 / 3.0);
    // Each octahedron vertex minus the mean of its 4 neighbours (which is 0) has unit length.
    let l_lap_expect = 6.0;
    let small = shapes::icosphere(5);
    let big = small.map_vertices(|v| v * 1.05);
    let cd = chamfer_distance(&small, &big, DEFAULT_SAMPLES, 0).unwrap();
    let f_tight = f_score(&small, &big, 0.01, DEFAULT_SAMPLES, 0).unwrap();
    let f_loose = f_score(&small, &big, 0.1, DEFAULT_SAMPLES, 0).unwrap();
    let checks = [
        (l_nor - l_nor_expect).abs() <= TOL_NOR,
        (l_lap - l_lap_expect).abs() <= TOL_LAP,
        (q_eq - 1.0).abs() <= TOL_Q_EQUILATERAL,
        (q_right - q_right_expect).abs() <= TOL_Q_RIGHT,
        (cd - 0.05).abs() <= CHAMFER_REL_TOL * 0.05,
        f_tight == 0.0 && f_loose == 100.0,
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "L_nor={l_nor:.12} L_lap={l_lap:.12} q_eq={q_eq:.15} q_right={q_right:.12} (expect {q_right_expect:.12}) CD={cd:.5} (0.05 +/- 2%) F@0.01={f_tight} F@0.1={f_loose}"
        ),
    )
}

fn run_pipeline(dir: &Path) -> Vec<(String, String)> {
    fs::create_dir_all(dir).unwrap();
    write(dir, "m.ply", &shapes::deformed_icosphere(2, 0.15, 9));
    let cmds: [&[&str]; 8] = [
        &["validate", "m.ply"],
        &["param", "m.ply", "--seed", "5", "-o", "e.ply"],
        &["bake", "m.ply", "e.ply", "-r", "64", "-o", "g.png"],
        &["bake", "m.ply", "e.ply", "-r", "32", "--kind", "texture", "-o", "t.png"],
        &["reconstruct", "g.png", "-o", "rec.ply"],
        &["pad", "g.png", "-o", "pad.png"],
        &["metrics", "rec.ply", "m.ply", "--samples", "20000", "--report", "metrics.json"],
        &["roundtrip", "m.ply", "--resolutions", "16,32", "--samples", "5000", "-o", "rt.json"],
    ];
    let mut out = Vec::new();
    for c in cmds {
        let r = sgr(dir, c);
        out.push((format!("{} exit", c[0]), r.code.to_string()));
        out.push((format!("{} stdout", c[0]), r.stdout.replace(&dir.display().to_string(), "<dir>")));
    }
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    for f in files {
        let bytes = fs::read(&f).unwrap();
        out.push((
            f.file_name().unwrap().to_string_lossy().into_owned(),
            format!("{} bytes, {:x?}", bytes.len(), sha(&bytes)),
        ));
    }
    out
}

fn sha(bytes: &[u8]) -> u64 {
    // FNV-1a is enough to compare two runs.
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

fn criterion_determinism(dir: &Path) -> Outcome {
    let a = run_pipeline(&dir.join("run_a"));
    let b = run_pipeline(&dir.join("run_b"));
    let failed_cmds: Vec<_> = a.iter().filter(|(k, v)| k.ends_with(" exit") && v != "0").map(|(k, _)| k.clone()).collect();
    let diffs: Vec<_> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.clone()).collect();
    let files = a.iter().filter(|(k, _)| !k.contains(' ')).count();
    outcome(
        a.len() == b.len() && diffs.is_empty() && failed_cmds.is_empty(),
        format!(
            "8 commands run twice, {files} output files compared byte for byte; differences: {}; failed commands: {}",
            if diffs.is_empty() { "none".to_string() } else { diffs.join(",") },
            if failed_cmds.is_empty() { "none".to_string() } else { failed_cmds.join(",") }
        ),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let mut params = Vec::new();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 grid cardinality", criterion_grid_cardinality(dir.path())));
    results.push(("2 equal-area property", criterion_equal_area()));
    results.push(("3 bijection", criterion_bijection()));
    results.push(("4 padding oracle", criterion_padding()));
    results.push(("5 hull / Delaunay", criterion_hull()));
    results.push(("6 parameterization validity", criterion_parameterization(&mut params)));
    results.push(("7 round-trip fidelity", criterion_roundtrip(&params)));
    results.push(("8 metric oracles", criterion_metric_oracles()));
    results.push(("9 determinism", criterion_determinism(dir.path())));

    println!();
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let passed = results.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
