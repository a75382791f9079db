use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sgr_core::metrics::MetricsReport;
use sgr_core::{Result, SgrError};

/// Rows written by `metrics --report` and `roundtrip`, read back by `metrics --table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub resolution: Option<usize>,
    pub vertices: usize,
    pub faces: usize,
    pub metrics: MetricsReport,
}

impl ReportFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| SgrError::Internal(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| SgrError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| SgrError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| SgrError::Parse(format!("{}: {e}", path.display())))
    }
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"))
}

pub fn table(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:>6} {:>8} {:>12} {:>12} {:>12} {:>12} {:>8} {:>8} {:>12} {:>8}",
        "label", "R", "V", "L_nor", "L_lap", "L_edge", "reg_total", "AR_mean", "AR_max", "CD", "F@tau"
    );
    for r in rows {
        let m = &r.metrics;
        let _ = writeln!(
            s,
            "{:<24} {:>6} {:>8} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>8.4} {:>8.3} {:>12} {:>8}",
            r.label,
            r.resolution.map_or_else(|| "-".to_string(), |x| x.to_string()),
            r.vertices,
            m.l_nor,
            m.l_lap,
            m.l_edge,
            m.reg_total,
            m.aspect_ratio_mean,
            m.aspect_ratio_max,
            opt(m.chamfer_mm, 6),
            opt(m.f_score_pct, 2),
        );
    }
    s
}
