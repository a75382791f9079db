//! SGR maps on disk: a PNG holding quantized channels and a `.meta` text
//! sidecar with the ranges needed to undo the quantization.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::error::{Result, SgrError};
use crate::sgr::{Grid, SgrKind, SgrMap};

pub const QUANT_LEVELS_16: f64 = 65535.0;
pub const QUANT_LEVELS_8: f64 = 255.0;

/// Sidecar path for an SGR image: same basename, `.meta` suffix.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

fn levels(bit_depth: u8) -> f64 {
    if bit_depth == 16 {
        QUANT_LEVELS_16
    } else {
        QUANT_LEVELS_8
    }
}

fn color_type(channels: usize) -> Result<png::ColorType> {
    Ok(match channels {
        1 => png::ColorType::Grayscale,
        2 => png::ColorType::GrayscaleAlpha,
        3 => png::ColorType::Rgb,
        4 => png::ColorType::Rgba,
        c => return Err(SgrError::Unsupported(format!("{c} channels do not fit a PNG pixel"))),
    })
}

fn quantize(v: f64, (lo, hi): (f64, f64), levels: f64) -> u16 {
    if hi <= lo {
        return 0;
    }
    ((v - lo) / (hi - lo) * levels).round().clamp(0.0, levels) as u16
}

fn dequantize(q: u16, (lo, hi): (f64, f64), levels: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    lo + q as f64 / levels * (hi - lo)
}

/// Writes `map` as a PNG at `path` and its sidecar next to it.
pub fn write_sgr(map: &SgrMap, path: &Path) -> Result<()> {
    let g = &map.values;
    let depth = map.kind.bit_depth();
    let n = levels(depth);
    let ranges = &map.quantization;
    let mut bytes = Vec::with_capacity(g.data.len() * depth as usize / 8);
    for cell in g.data.chunks_exact(g.channels) {
        for (k, &v) in cell.iter().enumerate() {
            let q = quantize(v, ranges[k], n);
            if depth == 16 {
                bytes.extend_from_slice(&q.to_be_bytes());
            } else {
                bytes.push(q as u8);
            }
        }
    }

    let file = File::create(path).map_err(|e| SgrError::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), g.width as u32, g.height as u32);
    enc.set_color(color_type(g.channels)?);
    enc.set_depth(if depth == 16 {
        png::BitDepth::Sixteen
    } else {
        png::BitDepth::Eight
    });
    let mut writer = enc
        .write_header()
        .map_err(|e| SgrError::Internal(format!("png: {e}")))?;
    writer
        .write_image_data(&bytes)
        .map_err(|e| SgrError::Internal(format!("png: {e}")))?;
    writer
        .finish()
        .map_err(|e| SgrError::Internal(format!("png: {e}")))?;

    let mut meta = String::new();
    meta.push_str(&format!("kind: {}\n", map.kind.name()));
    meta.push_str(&format!("width: {}\n", g.width));
    meta.push_str(&format!("height: {}\n", g.height));
    meta.push_str(&format!("channels: {}\n", g.channels));
    meta.push_str(&format!("bit_depth: {depth}\n"));
    let mut constant = Vec::new();
    for (k, &(lo, hi)) in ranges.iter().enumerate() {
        // {:?} keeps enough digits to read the exact f64 back.
        meta.push_str(&format!("channel_{k}_min: {lo:?}\n"));
        meta.push_str(&format!("channel_{k}_max: {hi:?}\n"));
        if hi <= lo {
            constant.push(k.to_string());
        }
    }
    meta.push_str(&format!("constant_channels: {}\n", constant.join(",")));
    if let Some(h) = &map.source_hash {
        meta.push_str(&format!("source_hash: {h}\n"));
    }
    let mp = meta_path(path);
    fs::write(&mp, meta).map_err(|e| SgrError::io(&mp, e))
}

fn parse_meta(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn field<'a>(meta: &'a [(String, String)], key: &str, path: &Path) -> Result<&'a str> {
    meta.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| SgrError::Parse(format!("{}: missing key `{key}`", path.display())))
}

fn number<T: std::str::FromStr>(meta: &[(String, String)], key: &str, path: &Path) -> Result<T> {
    let v = field(meta, key, path)?;
    v.parse()
        .map_err(|_| SgrError::Parse(format!("{}: bad value for `{key}`: {v}", path.display())))
}

/// Reads a map written by [`write_sgr`].
pub fn read_sgr(path: &Path) -> Result<SgrMap> {
    let mp = meta_path(path);
    if !mp.exists() {
        return Err(SgrError::MissingMetadata(mp));
    }
    let text = fs::read_to_string(&mp).map_err(|e| SgrError::io(&mp, e))?;
    let meta = parse_meta(&text);
    let kind = SgrKind::parse(field(&meta, "kind", &mp)?)?;
    let width: usize = number(&meta, "width", &mp)?;
    let height: usize = number(&meta, "height", &mp)?;
    let channels: usize = number(&meta, "channels", &mp)?;
    let depth: u8 = number(&meta, "bit_depth", &mp)?;
    let ranges = (0..channels)
        .map(|k| {
            Ok((
                number(&meta, &format!("channel_{k}_min"), &mp)?,
                number(&meta, &format!("channel_{k}_max"), &mp)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let source_hash = meta
        .iter()
        .find(|(k, _)| k == "source_hash")
        .map(|(_, v)| v.clone());

    let file = File::open(path).map_err(|e| SgrError::io(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| SgrError::Parse(format!("{}: {e}", path.display())))?;
    let mut buf = vec![
        0;
        reader
            .output_buffer_size()
            .ok_or_else(|| SgrError::Parse(format!("{}: image too large", path.display())))?
    ];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| SgrError::Parse(format!("{}: {e}", path.display())))?;
    let file_depth = match info.bit_depth {
        png::BitDepth::Sixteen => 16,
        png::BitDepth::Eight => 8,
        other => {
            return Err(SgrError::Parse(format!(
                "{}: unsupported bit depth {other:?}",
                path.display()
            )))
        }
    };
    if info.width as usize != width
        || info.height as usize != height
        || info.color_type != color_type(channels)?
        || file_depth != depth
    {
        return Err(SgrError::Parse(format!(
            "{}: image does not match its metadata",
            path.display()
        )));
    }

    let n = levels(depth);
    let mut values = Grid::zeros(width, height, channels);
    for (s, v) in values.data.iter_mut().enumerate() {
        let q = if depth == 16 {
            u16::from_be_bytes([buf[2 * s], buf[2 * s + 1]])
        } else {
            buf[s] as u16
        };
        *v = dequantize(q, ranges[s % channels], n);
    }
    let mut map = SgrMap::new(kind, values, source_hash)?;
    map.quantization = ranges;
    Ok(map)
}
