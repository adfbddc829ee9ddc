//! PLY reading and writing.
//!
//! Only the `vertex` element is interpreted: `x,y,z` as `float`/`double`,
//! optional `red,green,blue` as `uchar`. Everything else in the file (faces,
//! normals, custom properties) is skipped without error, since real scans
//! routinely carry extras. ASCII and binary-little-endian encodings are
//! supported.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

use super::PointCloud;

/// Body encoding for [`save_ply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(word: &str) -> Option<Self> {
        Some(match word {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, ScalarType::F32 | ScalarType::F64)
    }
}

#[derive(Debug, Clone)]
enum PropertyKind {
    Scalar(ScalarType),
    List { count: ScalarType, elem: ScalarType },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropertyKind,
}

#[derive(Debug, Clone)]
struct ElementDef {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

struct Header {
    encoding: Encoding,
    elements: Vec<ElementDef>,
    body_offset: usize,
}

fn format_err(line_no: usize, line: &str, why: &str) -> Error {
    Error::Format(format!("line {line_no} ({line:?}): {why}"))
}

fn parse_header(data: &[u8]) -> Result<Header> {
    let mut offset = 0usize;
    let mut line_no = 0usize;
    let mut next_line = || -> Result<(usize, String)> {
        if offset >= data.len() {
            return Err(Error::Format("unexpected end of file inside header".into()));
        }
        let rest = &data[offset..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("header line without newline terminator".into()))?;
        let raw = &rest[..end];
        offset += end + 1;
        line_no += 1;
        let text = std::str::from_utf8(raw)
            .map_err(|_| Error::Format(format!("line {line_no}: header is not valid UTF-8")))?
            .trim_end_matches('\r')
            .to_string();
        Ok((line_no, text))
    };

    let (no, magic) = next_line()?;
    if magic.trim() != "ply" {
        return Err(format_err(no, &magic, "expected 'ply' magic"));
    }

    let mut encoding = None;
    let mut elements: Vec<ElementDef> = Vec::new();
    loop {
        let (no, line) = next_line()?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("comment") || trimmed.starts_with("obj_info")
        {
            continue;
        }
        let mut words = trimmed.split_whitespace();
        match words.next() {
            Some("format") => {
                let kind = words.next().unwrap_or("");
                let version = words.next().unwrap_or("");
                if version != "1.0" {
                    return Err(format_err(no, &line, "unsupported PLY version"));
                }
                encoding = Some(match kind {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLe,
                    "binary_big_endian" => {
                        return Err(format_err(no, &line, "big-endian PLY is not supported"))
                    }
                    _ => return Err(format_err(no, &line, "unknown format")),
                });
            }
            Some("element") => {
                let name = words
                    .next()
                    .ok_or_else(|| format_err(no, &line, "element needs a name"))?;
                let count: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| format_err(no, &line, "element needs a vertex count"))?;
                elements.push(ElementDef {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| format_err(no, &line, "property before any element"))?;
                let first = words
                    .next()
                    .ok_or_else(|| format_err(no, &line, "property needs a type"))?;
                let kind = if first == "list" {
                    let count = words
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| format_err(no, &line, "bad list count type"))?;
                    let elem = words
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| format_err(no, &line, "bad list element type"))?;
                    PropertyKind::List { count, elem }
                } else {
                    PropertyKind::Scalar(
                        ScalarType::parse(first)
                            .ok_or_else(|| format_err(no, &line, "unknown property type"))?,
                    )
                };
                let name = words
                    .next()
                    .ok_or_else(|| format_err(no, &line, "property needs a name"))?;
                element.properties.push(Property {
                    name: name.to_string(),
                    kind,
                });
            }
            Some("end_header") => break,
            _ => return Err(format_err(no, &line, "unrecognized header keyword")),
        }
    }

    let encoding =
        encoding.ok_or_else(|| Error::Format("header missing 'format' declaration".into()))?;
    Ok(Header {
        encoding,
        elements,
        body_offset: offset,
    })
}

/// Per-vertex column layout we care about inside the vertex element.
struct VertexLayout {
    x: usize,
    y: usize,
    z: usize,
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(def: &ElementDef) -> Result<VertexLayout> {
    let find = |name: &str| def.properties.iter().position(|p| p.name == name);
    let coord = |name: &str| -> Result<usize> {
        let idx = find(name).ok_or_else(|| {
            Error::Format(format!("vertex element is missing property '{name}'"))
        })?;
        match def.properties[idx].kind {
            PropertyKind::Scalar(t) if t.is_float() => Ok(idx),
            _ => Err(Error::Format(format!(
                "vertex property '{name}' must be float or double"
            ))),
        }
    };
    let x = coord("x")?;
    let y = coord("y")?;
    let z = coord("z")?;

    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => {
            for idx in [r, g, b] {
                match def.properties[idx].kind {
                    PropertyKind::Scalar(ScalarType::U8) => {}
                    _ => {
                        return Err(Error::Format(format!(
                            "vertex color property '{}' must be 8-bit (uchar)",
                            def.properties[idx].name
                        )))
                    }
                }
            }
            Some([r, g, b])
        }
        (None, None, None) => None,
        _ => {
            return Err(Error::Format(
                "vertex colors must declare all of red, green, blue".into(),
            ))
        }
    };
    Ok(VertexLayout { x, y, z, rgb })
}

/// Loads a point cloud from a PLY file, one entry per vertex, order preserved.
pub fn load_ply<T: Scalar>(path: impl AsRef<Path>) -> Result<PointCloud<T>> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(e, path.display().to_string()))?;
    load_ply_bytes(&data)
}

/// Same as [`load_ply`] but over an in-memory buffer.
pub fn load_ply_bytes<T: Scalar>(data: &[u8]) -> Result<PointCloud<T>> {
    let header = parse_header(data)?;
    let body = &data[header.body_offset..];
    match header.encoding {
        Encoding::Ascii => read_ascii_body(body, &header.elements),
        Encoding::BinaryLe => read_binary_body(body, &header.elements),
    }
}

fn read_ascii_body<T: Scalar>(body: &[u8], elements: &[ElementDef]) -> Result<PointCloud<T>> {
    let text = std::str::from_utf8(body)
        .map_err(|_| Error::Format("ASCII body is not valid UTF-8".into()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());

    let mut positions = Vec::new();
    let mut colors: Option<Vec<[u8; 3]>> = None;

    for def in elements {
        let layout = if def.name == "vertex" {
            let l = vertex_layout(def)?;
            positions.reserve(def.count);
            if l.rgb.is_some() {
                colors = Some(Vec::with_capacity(def.count));
            }
            Some(l)
        } else {
            None
        };

        for row in 0..def.count {
            let line = lines.next().ok_or_else(|| {
                Error::Format(format!(
                    "element '{}' declares {} rows but body ends after {}",
                    def.name, def.count, row
                ))
            })?;
            if let Some(layout) = &layout {
                let values = parse_ascii_row(line, def)?;
                positions.push(Vec3::new(
                    T::from_f64_lossy(values[layout.x]),
                    T::from_f64_lossy(values[layout.y]),
                    T::from_f64_lossy(values[layout.z]),
                ));
                if let (Some(cols), Some(rgb)) = (colors.as_mut(), layout.rgb) {
                    cols.push([
                        values[rgb[0]] as u8,
                        values[rgb[1]] as u8,
                        values[rgb[2]] as u8,
                    ]);
                }
            }
            // Non-vertex rows are skipped wholesale.
        }
    }
    PointCloud::new(positions, colors)
}

/// Parses one ASCII row into per-property values (the first value for lists).
fn parse_ascii_row(line: &str, def: &ElementDef) -> Result<Vec<f64>> {
    let mut tokens = line.split_whitespace();
    let mut values = Vec::with_capacity(def.properties.len());
    let mut take = |what: &str| -> Result<f64> {
        tokens
            .next()
            .ok_or_else(|| {
                Error::Format(format!(
                    "row {line:?} of element '{}' is missing {what}",
                    def.name
                ))
            })?
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("row {line:?}: {what} is not a number")))
    };
    for prop in &def.properties {
        match prop.kind {
            PropertyKind::Scalar(_) => values.push(take(&prop.name)?),
            PropertyKind::List { .. } => {
                let n = take(&format!("{} list length", prop.name))? as usize;
                values.push(n as f64);
                for _ in 0..n {
                    take(&format!("{} list item", prop.name))?;
                }
            }
        }
    }
    Ok(values)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Format(format!(
                "binary body truncated while reading {what}"
            )));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn read_scalar(&mut self, t: ScalarType, what: &str) -> Result<f64> {
        let bytes = self.take(t.size(), what)?;
        Ok(match t {
            ScalarType::I8 => bytes[0] as i8 as f64,
            ScalarType::U8 => bytes[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::I32 => {
                i32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64
            }
            ScalarType::U32 => {
                u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64
            }
            ScalarType::F32 => {
                f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64
            }
            ScalarType::F64 => f64::from_le_bytes(bytes.try_into().expect("8 bytes")),
        })
    }
}

fn read_binary_body<T: Scalar>(body: &[u8], elements: &[ElementDef]) -> Result<PointCloud<T>> {
    let mut cur = Cursor { data: body, pos: 0 };
    let mut positions = Vec::new();
    let mut colors: Option<Vec<[u8; 3]>> = None;

    for def in elements {
        let layout = if def.name == "vertex" {
            let l = vertex_layout(def)?;
            positions.reserve(def.count);
            if l.rgb.is_some() {
                colors = Some(Vec::with_capacity(def.count));
            }
            Some(l)
        } else {
            None
        };

        for row in 0..def.count {
            let what = format!("element '{}' row {row}", def.name);
            let mut values = Vec::with_capacity(def.properties.len());
            for prop in &def.properties {
                match prop.kind {
                    PropertyKind::Scalar(t) => values.push(cur.read_scalar(t, &what)?),
                    PropertyKind::List { count, elem } => {
                        let n = cur.read_scalar(count, &what)? as usize;
                        values.push(n as f64);
                        cur.take(n * elem.size(), &what)?;
                    }
                }
            }
            if let Some(layout) = &layout {
                positions.push(Vec3::new(
                    T::from_f64_lossy(values[layout.x]),
                    T::from_f64_lossy(values[layout.y]),
                    T::from_f64_lossy(values[layout.z]),
                ));
                if let (Some(cols), Some(rgb)) = (colors.as_mut(), layout.rgb) {
                    cols.push([
                        values[rgb[0]] as u8,
                        values[rgb[1]] as u8,
                        values[rgb[2]] as u8,
                    ]);
                }
            }
        }
    }
    PointCloud::new(positions, colors)
}

/// Writes a cloud as PLY with colors, choosing `float` or `double` coordinate
/// properties to match the scalar width of `T`.
pub fn save_ply<T: Scalar>(
    path: impl AsRef<Path>,
    cloud: &PointCloud<T>,
    encoding: PlyEncoding,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let wide = std::mem::size_of::<T>() == 8;
    let coord_type = if wide { "double" } else { "float" };
    let format = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        out,
        "ply\nformat {format} 1.0\nelement vertex {}\n\
         property {coord_type} x\nproperty {coord_type} y\nproperty {coord_type} z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        cloud.len()
    )
    .expect("write to vec");

    for i in 0..cloud.len() {
        let p = cloud.position(i);
        let [r, g, b] = cloud.color(i);
        match encoding {
            PlyEncoding::Ascii => {
                if wide {
                    writeln!(
                        out,
                        "{} {} {} {r} {g} {b}",
                        p.x.to_f64_lossy(),
                        p.y.to_f64_lossy(),
                        p.z.to_f64_lossy()
                    )
                } else {
                    writeln!(
                        out,
                        "{} {} {} {r} {g} {b}",
                        p.x.to_f64_lossy() as f32,
                        p.y.to_f64_lossy() as f32,
                        p.z.to_f64_lossy() as f32
                    )
                }
                .expect("write to vec");
            }
            PlyEncoding::BinaryLittleEndian => {
                for c in [p.x, p.y, p.z] {
                    if wide {
                        out.extend_from_slice(&c.to_f64_lossy().to_le_bytes());
                    } else {
                        out.extend_from_slice(&(c.to_f64_lossy() as f32).to_le_bytes());
                    }
                }
                out.extend_from_slice(&[r, g, b]);
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(e, path.display().to_string()))
}
