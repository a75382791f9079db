mod common;

use std::fs;

use common::{field, sgr, write};
use sgr_core::mesh::{load_mesh, shapes, validate_topology, MeshFormat, TriangleMesh};
use sgr_core::sgr::read_sgr;
use sgr_core::Vec3;

fn open_fan() -> TriangleMesh {
    let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::new(-1.0, 0.2, 0.0)];
    TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "icosphere.obj", &shapes::icosphere(2));
    write(d, "open_fan.obj", &open_fan());
    fs::write(d.join("garbage.obj"), "this is not a mesh\nv 1 2\n").unwrap();

    let ok = sgr(d, &["validate", "icosphere.obj"]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert_eq!(field(&ok.stdout, "genus").as_deref(), Some("0"));

    let fan = sgr(d, &["validate", "open_fan.obj"]);
    assert_eq!(fan.code, 1);
    assert!(fan.stdout.contains("watertight: false"));

    assert_eq!(sgr(d, &["validate", "garbage.obj"]).code, 2);
    assert_eq!(sgr(d, &["validate", "missing.obj"]).code, 2);
}

#[test]
fn param_is_deterministic_and_rejects_torus() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "ico.ply", &shapes::icosphere(2));
    write(d, "torus.obj", &shapes::torus(12, 8, 1.0, 0.3));

    let a = sgr(d, &["param", "ico.ply", "-o", "a.ply", "--seed", "3"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let eta: f64 = field(&a.stdout, "efficiency").unwrap().parse().unwrap();
    assert!(eta >= 0.99, "{eta}");
    let b = sgr(d, &["param", "ico.ply", "-o", "b.ply", "--seed", "3"]);
    assert_eq!(b.code, 0);
    assert_eq!(fs::read(d.join("a.ply")).unwrap(), fs::read(d.join("b.ply")).unwrap());
    assert_eq!(fs::read(d.join("a.emb")).unwrap(), fs::read(d.join("b.emb")).unwrap());

    let t = sgr(d, &["param", "torus.obj"]);
    assert_eq!(t.code, 1, "{}", t.stderr);
}

#[test]
fn bake_reconstruct_and_pad() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mesh = shapes::deformed_icosphere(2, 0.1, 1);
    write(d, "m.ply", &mesh);
    assert_eq!(sgr(d, &["param", "m.ply", "-o", "m.sphere.ply"]).code, 0);

    let b = sgr(d, &["bake", "m.ply", "m.sphere.ply", "-r", "64", "-o", "g.png"]);
    assert_eq!(b.code, 0, "{}", b.stderr);
    let map = read_sgr(&d.join("g.png")).unwrap();
    assert_eq!((map.values.width, map.values.height, map.values.channels), (64, 64, 3));
    let meta = fs::read_to_string(d.join("g.meta")).unwrap();
    assert!(meta.contains("bit_depth: 16"));
    assert!(meta.contains(&format!("source_hash: {}", mesh.content_hash())));

    let r = sgr(d, &["reconstruct", "g.png", "-o", "rec.obj"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rec = load_mesh(&d.join("rec.obj"), MeshFormat::Obj).unwrap();
    assert_eq!(rec.vertex_count(), map.weld.distinct_count());
    assert_eq!(sgr(d, &["validate", "rec.obj"]).code, 0);

    let t = sgr(d, &["bake", "m.ply", "m.sphere.ply", "-r", "16", "--kind", "texture", "-o", "t.png"]);
    assert_eq!(t.code, 0, "{}", t.stderr);
    assert!(fs::read_to_string(d.join("t.meta")).unwrap().contains("bit_depth: 8"));
    let bad = sgr(d, &["reconstruct", "t.png"]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("geometry kind required"));

    let p = sgr(d, &["pad", "g.png", "-o", "gp.png"]);
    assert_eq!(p.code, 0, "{}", p.stderr);
    let padded = read_sgr(&d.join("gp.png")).unwrap();
    assert_eq!((padded.values.width, padded.values.height), (66, 66));

    fs::remove_file(d.join("g.meta")).unwrap();
    let missing = sgr(d, &["reconstruct", "g.png"]);
    assert_eq!(missing.code, 2);
    assert!(missing.stderr.contains("missing quantization metadata"));
}

#[test]
fn stale_embedding_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "m.ply", &shapes::icosphere(1));
    assert_eq!(sgr(d, &["param", "m.ply", "-o", "e.ply"]).code, 0);
    write(d, "m.ply", &shapes::icosphere(1).map_vertices(|v| v * 1.5));
    let b = sgr(d, &["bake", "m.ply", "e.ply", "-r", "8"]);
    assert_eq!(b.code, 1);
    assert!(b.stderr.contains("embedding does not match mesh"));
}

#[test]
fn output_dir_from_environment_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "m.ply", &shapes::icosphere(1));
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_sgr"))
        .args(["param", "m.ply"])
        .current_dir(d)
        .env("SGR_OUTPUT_DIR", d.join("env_out"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.join("env_out/m.sphere.ply").exists());
    assert_eq!(sgr(d, &["param", "m.ply", "--output-dir", "flag_out"]).code, 0);
    assert!(d.join("flag_out/m.sphere.ply").exists());
}

#[test]
fn metrics_modes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "tet.obj", &shapes::tetrahedron());
    write(d, "ico.obj", &shapes::icosphere(2));

    let s = sgr(d, &["metrics", "tet.obj"]);
    assert_eq!(s.code, 0, "{}", s.stderr);
    assert!(s.stdout.contains("alpha_nor=0.1 alpha_lap=0.5 alpha_edg=0.1"));
    let l_nor: f64 = field(&s.stdout, "l_nor").unwrap().parse().unwrap();
    assert!((l_nor - 8.0).abs() < 1e-9);

    let p = sgr(d, &["metrics", "ico.obj", "ico.obj", "--samples", "2000", "--report", "r.json"]);
    assert_eq!(p.code, 0, "{}", p.stderr);
    let cd: f64 = field(&p.stdout, "chamfer_mm").unwrap().parse().unwrap();
    let f: f64 = field(&p.stdout, "f_score_pct").unwrap().parse().unwrap();
    assert!(cd < 1e-9);
    assert_eq!(f, 100.0);
    let t = sgr(d, &["metrics", "--table", "r.json"]);
    assert_eq!(t.code, 0, "{}", t.stderr);
    assert!(t.stdout.contains("ico.obj"));

    let b = sgr(d, &["metrics", "--batch", "tet.obj", "ico.obj", "tet.obj"]);
    assert_eq!(b.code, 0, "{}", b.stderr);
    assert_eq!(field(&b.stdout, "meshes").as_deref(), Some("3"));
}

#[test]
fn roundtrip_report_is_readable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "m.ply", &shapes::deformed_icosphere(2, 0.15, 4));
    let r = sgr(
        d,
        &["roundtrip", "m.ply", "--resolutions", "16,32", "--samples", "3000", "--keep-meshes"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(d.join("m.roundtrip.json").exists());
    for res in [16, 32] {
        let m = load_mesh(&d.join(format!("m.r{res}.ply")), MeshFormat::Ply).unwrap();
        assert!(validate_topology(&m).is_closed_genus_zero());
    }
    let t = sgr(d, &["metrics", "--table", "m.roundtrip.json"]);
    assert_eq!(t.code, 0);
    assert_eq!(t.stdout.lines().count(), 3);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "m.ply", &shapes::icosphere(1));
    assert_eq!(sgr(d, &["param", "m.ply", "-o", "e.ply"]).code, 0);
    fs::write(d.join("c.toml"), "resolution = 12\n").unwrap();
    assert_eq!(sgr(d, &["bake", "m.ply", "e.ply", "--config", "c.toml", "-o", "a.png"]).code, 0);
    assert_eq!(read_sgr(&d.join("a.png")).unwrap().values.width, 12);
    assert_eq!(
        sgr(d, &["bake", "m.ply", "e.ply", "--config", "c.toml", "-r", "10", "-o", "b.png"]).code,
        0
    );
    assert_eq!(read_sgr(&d.join("b.png")).unwrap().values.width, 10);
    fs::write(d.join("bad.toml"), "resolution = \"x\"\n").unwrap();
    assert_eq!(sgr(d, &["bake", "m.ply", "e.ply", "--config", "bad.toml"]).code, 2);
}
