//! Embedding files: a PLY of the sphere positions with the mesh's faces, plus
//! a binary `.emb` sidecar that ties the positions to the source mesh.
//!
//! Sidecar layout, little-endian: 8-byte magic, 64 ASCII hex digits of the
//! mesh content hash, `u64` vertex count, then `3 * V` `f64` coordinates.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SgrError};
use crate::mesh::{save_mesh, MeshFormat, TriangleMesh};
use crate::param::SphericalEmbedding;
use crate::Vec3;

pub const EMBEDDING_MAGIC: [u8; 8] = *b"SGREMB01";

const HASH_LEN: usize = 64;

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("emb")
}

/// Writes `embedding` of `mesh` to `path` (PLY) and its `.emb` sidecar.
/// Returns the sidecar path.
pub fn write_embedding(path: &Path, mesh: &TriangleMesh, embedding: &SphericalEmbedding) -> Result<PathBuf> {
    if embedding.faces() != mesh.faces() {
        return Err(SgrError::Topology(
            "embedding connectivity differs from mesh".into(),
        ));
    }
    let sphere = TriangleMesh::new(embedding.positions().to_vec(), embedding.faces().to_vec())?;
    save_mesh(&sphere, path, MeshFormat::Ply)?;

    let hash = mesh.content_hash();
    let mut buf = Vec::with_capacity(8 + HASH_LEN + 8 + 24 * embedding.vertex_count());
    buf.extend_from_slice(&EMBEDDING_MAGIC);
    buf.extend_from_slice(hash.as_bytes());
    buf.extend_from_slice(&(embedding.vertex_count() as u64).to_le_bytes());
    for p in embedding.positions() {
        for c in p.iter() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    let side = sidecar_path(path);
    fs::write(&side, buf).map_err(|e| SgrError::io(&side, e))?;
    Ok(side)
}

/// Reads the embedding stored at `path` and checks it belongs to `mesh`.
pub fn read_embedding(path: &Path, mesh: &TriangleMesh) -> Result<SphericalEmbedding> {
    let side = sidecar_path(path);
    let bytes = fs::read(&side).map_err(|e| SgrError::io(&side, e))?;
    let header = 8 + HASH_LEN + 8;
    if bytes.len() < header || bytes[..8] != EMBEDDING_MAGIC {
        return Err(SgrError::Parse(format!("{} is not an embedding sidecar", side.display())));
    }
    let hash = std::str::from_utf8(&bytes[8..8 + HASH_LEN])
        .map_err(|_| SgrError::Parse("embedding hash is not ASCII".into()))?;
    if hash != mesh.content_hash() {
        return Err(SgrError::HashMismatch);
    }
    let n = u64::from_le_bytes(bytes[8 + HASH_LEN..header].try_into().expect("8 bytes")) as usize;
    if n != mesh.vertex_count() || bytes.len() != header + 24 * n {
        return Err(SgrError::Parse("embedding sidecar has the wrong length".into()));
    }
    let positions = bytes[header..]
        .chunks_exact(24)
        .map(|c| {
            let f = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().expect("8 bytes"));
            Vec3::new(f(0), f(1), f(2))
        })
        .collect();
    SphericalEmbedding::new(positions, mesh.faces().to_vec())
}
