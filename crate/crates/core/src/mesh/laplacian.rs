use crate::error::{Result, SgrError};
use crate::mesh::TriangleMesh;
use crate::Vec3;

/// Graph Laplacian `L = I - D^-1 A` in compressed row form.
///
/// Row `i` has a unit diagonal and `-1/deg(i)` on each neighbor.
#[derive(Debug, Clone)]
pub struct UniformLaplacian {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl UniformLaplacian {
    pub fn size(&self) -> usize {
        self.row_start.len() - 1
    }

    /// `(column, value)` entries of row `i`, diagonal first.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn apply(&self, x: &[Vec3]) -> Vec<Vec3> {
        (0..self.size())
            .map(|i| self.row(i).fold(Vec3::zeros(), |acc, (j, w)| acc + x[j] * w))
            .collect()
    }
}

pub fn uniform_laplacian(mesh: &TriangleMesh) -> Result<UniformLaplacian> {
    let nbrs = mesh.vertex_neighbors();
    let mut row_start = Vec::with_capacity(nbrs.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_start.push(0);
    for (i, ns) in nbrs.iter().enumerate() {
        if ns.is_empty() {
            return Err(SgrError::IsolatedVertex(i));
        }
        let w = -1.0 / ns.len() as f64;
        cols.push(i);
        vals.push(1.0);
        for &j in ns {
            cols.push(j);
            vals.push(w);
        }
        row_start.push(cols.len());
    }
    Ok(UniformLaplacian {
        row_start,
        cols,
        vals,
    })
}
