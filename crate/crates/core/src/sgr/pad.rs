use crate::sgr::Grid;

/// Pads a grid by one cell on every side, continuing it across the edges the
/// way the equal-area layout folds: each edge is mirrored about its midpoint.
///
/// Left and right columns are the source's outer columns flipped vertically,
/// top and bottom rows its outer rows flipped horizontally, and the four
/// corners hold the mean of the source's four corners.
pub fn center_symmetric_pad(g: &Grid) -> Grid {
    let (h, w, c) = (g.height, g.width, g.channels);
    let mut out = Grid::zeros(w + 2, h + 2, c);
    for y in 0..h {
        for x in 0..w {
            out.cell_mut(x + 1, y + 1).copy_from_slice(g.cell(x, y));
        }
    }
    for y in 0..h {
        out.cell_mut(0, y + 1).copy_from_slice(g.cell(0, h - 1 - y));
        out.cell_mut(w + 1, y + 1).copy_from_slice(g.cell(w - 1, h - 1 - y));
    }
    for x in 0..w {
        out.cell_mut(x + 1, 0).copy_from_slice(g.cell(w - 1 - x, 0));
        out.cell_mut(x + 1, h + 1).copy_from_slice(g.cell(w - 1 - x, h - 1));
    }
    let corners = [g.cell(0, 0), g.cell(w - 1, 0), g.cell(0, h - 1), g.cell(w - 1, h - 1)];
    let mean: Vec<f64> = (0..c)
        .map(|k| corners.iter().map(|p| p[k]).sum::<f64>() / 4.0)
        .collect();
    for (x, y) in [(0, 0), (w + 1, 0), (0, h + 1), (w + 1, h + 1)] {
        out.cell_mut(x, y).copy_from_slice(&mean);
    }
    out
}
