use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Result, SgrError};
use crate::mesh::TriangleMesh;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    /// Binary little-endian on write; ASCII and both binary encodings on read.
    Ply,
    PlyAscii,
}

impl MeshFormat {
    /// Picks a format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(SgrError::Parse(format!(
                "unknown mesh extension: {}",
                path.display()
            ))),
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh> {
    let bytes = fs::read(path).map_err(|e| SgrError::io(path, e))?;
    match format {
        MeshFormat::Obj => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| SgrError::Parse("OBJ is not valid UTF-8".into()))?;
            parse_obj(text)
        }
        MeshFormat::Ply | MeshFormat::PlyAscii => parse_ply(&bytes),
    }
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path, format: MeshFormat) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        MeshFormat::Obj => write_obj(mesh, &mut buf),
        MeshFormat::Ply => write_ply_binary(mesh, &mut buf),
        MeshFormat::PlyAscii => write_ply_ascii(mesh, &mut buf),
    }
    .map_err(|e| SgrError::io(path, e))?;
    let file = fs::File::create(path).map_err(|e| SgrError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&buf)
        .and_then(|_| w.flush())
        .map_err(|e| SgrError::io(path, e))
}

pub(crate) fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut c = [0.0f64; 3];
                for slot in &mut c {
                    let tok = it.next().ok_or_else(|| {
                        SgrError::Parse(format!("line {}: vertex needs 3 coordinates", lineno + 1))
                    })?;
                    *slot = tok.parse().map_err(|_| {
                        SgrError::Parse(format!("line {}: bad coordinate {tok:?}", lineno + 1))
                    })?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in it {
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx.parse().map_err(|_| {
                        SgrError::Parse(format!("line {}: bad face index {tok:?}", lineno + 1))
                    })?;
                    // 1-based; negative indices count back from the latest vertex.
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(SgrError::Parse(format!(
                            "line {}: face index 0",
                            lineno + 1
                        )));
                    };
                    if resolved < 0 {
                        return Err(SgrError::MissingVertex {
                            face: faces.len(),
                            index: 0,
                            vertex_count: vertices.len(),
                        });
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(SgrError::Parse(format!(
                        "line {}: face with fewer than 3 vertices",
                        lineno + 1
                    )));
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

fn write_obj(mesh: &TriangleMesh, w: &mut impl Write) -> std::io::Result<()> {
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

fn write_ply_header(mesh: &TriangleMesh, format: &str, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format {format} 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertex_count())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    writeln!(w, "element face {}", mesh.face_count())?;
    writeln!(w, "property list uchar uint vertex_indices")?;
    writeln!(w, "end_header")
}

fn write_ply_binary(mesh: &TriangleMesh, w: &mut impl Write) -> std::io::Result<()> {
    write_ply_header(mesh, "binary_little_endian", w)?;
    for v in mesh.vertices() {
        for c in v.iter() {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    for f in mesh.faces() {
        w.write_all(&[3u8])?;
        for &i in f {
            w.write_all(&(i as u32).to_le_bytes())?;
        }
    }
    Ok(())
}

fn write_ply_ascii(mesh: &TriangleMesh, w: &mut impl Write) -> std::io::Result<()> {
    write_ply_header(mesh, "ascii", w)?;
    for v in mesh.vertices() {
        writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    LittleEndian,
    BigEndian,
}

#[derive(Debug, Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            other => return Err(SgrError::Parse(format!("unknown PLY type {other}"))),
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

/// Sequential reader over the PLY body in either encoding.
struct Body<'a> {
    bytes: &'a [u8],
    pos: usize,
    encoding: Encoding,
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Body<'a> {
    fn read(&mut self, ty: Scalar) -> Result<f64> {
        if self.encoding == Encoding::Ascii {
            let tok = self
                .tokens
                .next()
                .ok_or_else(|| SgrError::Parse("truncated PLY body".into()))?;
            return tok
                .parse::<f64>()
                .map_err(|_| SgrError::Parse(format!("bad PLY value {tok:?}")));
        }
        let n = ty.size();
        let raw = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| SgrError::Parse("truncated PLY body".into()))?;
        self.pos += n;
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(raw);
        if self.encoding == Encoding::BigEndian {
            buf[..n].reverse();
        }
        Ok(match ty {
            Scalar::I8 => buf[0] as i8 as f64,
            Scalar::U8 => buf[0] as f64,
            Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(buf),
        })
    }
}

pub(crate) fn parse_ply(bytes: &[u8]) -> Result<TriangleMesh> {
    const END: &[u8] = b"end_header";
    let header_end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| SgrError::Parse("PLY header has no end_header".into()))?;
    let mut body_start = header_end + END.len();
    if bytes.get(body_start) == Some(&b'\r') {
        body_start += 1;
    }
    if bytes.get(body_start) == Some(&b'\n') {
        body_start += 1;
    }
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| SgrError::Parse("PLY header is not UTF-8".into()))?;

    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(SgrError::Parse("missing PLY magic".into()));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", fmt, _] => {
                encoding = Some(match *fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::LittleEndian,
                    "binary_big_endian" => Encoding::BigEndian,
                    other => return Err(SgrError::Parse(format!("unknown PLY format {other}"))),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| SgrError::Parse(format!("bad element count {count}")))?,
                props: Vec::new(),
            }),
            ["property", "list", cty, ity, name] => elements
                .last_mut()
                .ok_or_else(|| SgrError::Parse("property before element".into()))?
                .props
                .push(Property::List(name.to_string(), Scalar::parse(cty)?, Scalar::parse(ity)?)),
            ["property", ty, name] => elements
                .last_mut()
                .ok_or_else(|| SgrError::Parse("property before element".into()))?
                .props
                .push(Property::Scalar(name.to_string(), Scalar::parse(ty)?)),
            _ => {}
        }
    }
    let encoding = encoding.ok_or_else(|| SgrError::Parse("PLY format line missing".into()))?;
    let body_bytes = &bytes[body_start..];
    let text = if encoding == Encoding::Ascii {
        std::str::from_utf8(body_bytes)
            .map_err(|_| SgrError::Parse("ASCII PLY body is not UTF-8".into()))?
    } else {
        ""
    };
    let mut body = Body {
        bytes: body_bytes,
        pos: 0,
        encoding,
        tokens: text.split_ascii_whitespace(),
    };

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for el in &elements {
        for _ in 0..el.count {
            let mut xyz = [0.0; 3];
            let mut poly: Vec<usize> = Vec::new();
            for p in &el.props {
                match p {
                    Property::Scalar(name, ty) => {
                        let v = body.read(*ty)?;
                        match name.as_str() {
                            "x" => xyz[0] = v,
                            "y" => xyz[1] = v,
                            "z" => xyz[2] = v,
                            _ => {}
                        }
                    }
                    Property::List(name, cty, ity) => {
                        let n = body.read(*cty)? as usize;
                        let keep = name == "vertex_indices" || name == "vertex_index";
                        for _ in 0..n {
                            let v = body.read(*ity)?;
                            if keep {
                                if v < 0.0 {
                                    return Err(SgrError::Parse("negative PLY index".into()));
                                }
                                poly.push(v as usize);
                            }
                        }
                    }
                }
            }
            match el.name.as_str() {
                "vertex" => vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2])),
                "face" => {
                    if poly.len() < 3 {
                        return Err(SgrError::Parse("face with fewer than 3 vertices".into()));
                    }
                    for k in 1..poly.len() - 1 {
                        faces.push([poly[0], poly[k], poly[k + 1]]);
                    }
                }
                _ => {}
            }
        }
    }
    TriangleMesh::new(vertices, faces)
}
