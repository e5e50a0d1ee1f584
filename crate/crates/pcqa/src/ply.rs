//! PLY reading and writing for colored point clouds.
//!
//! Reads `ascii` and `binary_little_endian` files whose `vertex` element
//! carries `x`, `y`, `z` and `red`, `green`, `blue`. Other vertex
//! properties and other elements are skipped. Writes integer coordinates
//! and `uchar` colors.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use pcqa_core::cloud::{Point, PointCloud, RawPoint};
use pcqa_core::round_half_away;

use crate::error::{io_error, Error, Location, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
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

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => f64::from(b[0] as i8),
            Scalar::U8 => f64::from(b[0]),
            Scalar::I16 => f64::from(i16::from_le_bytes([b[0], b[1]])),
            Scalar::U16 => f64::from(u16::from_le_bytes([b[0], b[1]])),
            Scalar::I32 => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::U32 => f64::from(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        }
    }
}

#[derive(Clone, Debug)]
enum PropertyKind {
    Scalar(Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Clone, Debug)]
struct Property {
    name: String,
    kind: PropertyKind,
}

#[derive(Clone, Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
    line: usize,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    /// Byte offset of the first body byte.
    body_start: usize,
    /// Line number of the first body line.
    body_line: usize,
}

struct Parser<'a> {
    path: &'a Path,
}

impl Parser<'_> {
    fn err(&self, location: Location, message: impl Into<String>) -> Error {
        Error::Ply {
            path: self.path.to_path_buf(),
            location,
            message: message.into(),
        }
    }

    fn header(&self, bytes: &[u8]) -> Result<Header> {
        let mut offset = 0;
        let mut line_no = 0;
        let mut format = None;
        let mut elements: Vec<Element> = Vec::new();
        loop {
            line_no += 1;
            let Some(len) = bytes[offset..].iter().position(|&b| b == b'\n') else {
                return Err(self.err(Location::Line(line_no), "header ends before end_header"));
            };
            let raw = &bytes[offset..offset + len];
            offset += len + 1;
            let line = std::str::from_utf8(raw)
                .map_err(|_| self.err(Location::Line(line_no), "header is not valid text"))?
                .trim_end_matches('\r')
                .trim();
            let here = Location::Line(line_no);
            if line_no == 1 {
                if line != "ply" {
                    return Err(self.err(here, "not a PLY file (missing 'ply' magic)"));
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                [] => {}
                ["comment", ..] | ["obj_info", ..] => {}
                ["format", kind, version] => {
                    if *version != "1.0" {
                        return Err(self.err(here, format!("unsupported PLY version {version}")));
                    }
                    format = Some(match *kind {
                        "ascii" => PlyFormat::Ascii,
                        "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                        "binary_big_endian" => {
                            return Err(self.err(here, "binary_big_endian PLY is not supported"));
                        }
                        other => return Err(self.err(here, format!("unknown PLY format '{other}'"))),
                    });
                }
                ["element", name, count] => {
                    let count = count
                        .parse()
                        .map_err(|_| self.err(here, format!("invalid element count '{count}'")))?;
                    elements.push(Element {
                        name: name.to_string(),
                        count,
                        properties: Vec::new(),
                        line: line_no,
                    });
                }
                ["property", "list", count, item, name] => {
                    let element = elements
                        .last_mut()
                        .ok_or_else(|| self.err(here, "property before any element"))?;
                    let scalar = |t: &str| {
                        Scalar::parse(t).ok_or_else(|| self.err(here, format!("unknown property type '{t}'")))
                    };
                    element.properties.push(Property {
                        name: name.to_string(),
                        kind: PropertyKind::List {
                            count: scalar(count)?,
                            item: scalar(item)?,
                        },
                    });
                }
                ["property", ty, name] => {
                    let element = elements
                        .last_mut()
                        .ok_or_else(|| self.err(here, "property before any element"))?;
                    let ty =
                        Scalar::parse(ty).ok_or_else(|| self.err(here, format!("unknown property type '{ty}'")))?;
                    element.properties.push(Property {
                        name: name.to_string(),
                        kind: PropertyKind::Scalar(ty),
                    });
                }
                ["end_header"] => break,
                _ => return Err(self.err(here, format!("malformed header line '{line}'"))),
            }
        }
        let format = format.ok_or_else(|| self.err(Location::Line(2), "missing format line"))?;
        Ok(Header {
            format,
            elements,
            body_start: offset,
            body_line: line_no + 1,
        })
    }
}

/// Column of each required vertex property.
struct VertexLayout {
    columns: [usize; 6],
}

const REQUIRED: [&str; 6] = ["x", "y", "z", "red", "green", "blue"];

fn vertex_layout(parser: &Parser, element: &Element) -> Result<VertexLayout> {
    let mut columns = [0; 6];
    for (k, name) in REQUIRED.iter().enumerate() {
        let position = element.properties.iter().position(|p| p.name == *name);
        let Some(i) = position else {
            let what = if k < 3 { "coordinate" } else { "color" };
            return Err(parser.err(
                Location::Line(element.line),
                format!("missing {what} property '{name}'"),
            ));
        };
        if matches!(element.properties[i].kind, PropertyKind::List { .. }) {
            return Err(parser.err(
                Location::Line(element.line),
                format!("property '{name}' must be a scalar"),
            ));
        }
        columns[k] = i;
    }
    Ok(VertexLayout { columns })
}

fn color_value(parser: &Parser, v: f64, at: Location) -> Result<u8> {
    if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
        return Err(parser.err(at, format!("color value {v} is not an integer in 0..=255")));
    }
    Ok(v as u8)
}

fn to_raw(parser: &Parser, values: &[f64], layout: &VertexLayout, at: Location) -> Result<RawPoint> {
    let c = &layout.columns;
    let position = [values[c[0]], values[c[1]], values[c[2]]];
    if position.iter().any(|v| !v.is_finite()) {
        return Err(parser.err(at, "non-finite coordinate"));
    }
    Ok(RawPoint {
        position,
        color: [
            color_value(parser, values[c[3]], at)?,
            color_value(parser, values[c[4]], at)?,
            color_value(parser, values[c[5]], at)?,
        ],
    })
}

fn read_ascii(parser: &Parser, header: &Header, bytes: &[u8]) -> Result<Vec<RawPoint>> {
    let body = std::str::from_utf8(&bytes[header.body_start..])
        .map_err(|_| parser.err(Location::Line(header.body_line), "ASCII body is not valid text"))?;
    let mut lines = body.lines().enumerate().map(|(i, l)| (header.body_line + i, l));
    let mut points = Vec::new();
    for element in &header.elements {
        let layout = if element.name == "vertex" {
            Some(vertex_layout(parser, element)?)
        } else {
            None
        };
        if layout.is_some() {
            points.reserve(element.count);
        }
        let mut read = 0;
        while read < element.count {
            let Some((line_no, line)) = lines.next() else {
                return Err(parser.err(
                    Location::Line(header.body_line + body.lines().count()),
                    format!(
                        "truncated body: {} of {} {} entries read",
                        read, element.count, element.name
                    ),
                ));
            };
            if line.trim().is_empty() {
                continue;
            }
            let at = Location::Line(line_no);
            let mut tokens = line.split_whitespace();
            let mut next = |what: &str| -> Result<f64> {
                let t = tokens
                    .next()
                    .ok_or_else(|| parser.err(at, format!("missing value for '{what}'")))?;
                t.parse::<f64>()
                    .map_err(|_| parser.err(at, format!("invalid number '{t}' for '{what}'")))
            };
            let mut values = Vec::with_capacity(element.properties.len());
            for p in &element.properties {
                match p.kind {
                    PropertyKind::Scalar(_) => values.push(next(&p.name)?),
                    PropertyKind::List { .. } => {
                        let n = next(&p.name)?;
                        if n < 0.0 || n.fract() != 0.0 {
                            return Err(parser.err(at, format!("invalid list length {n}")));
                        }
                        for _ in 0..n as usize {
                            next(&p.name)?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if let Some(layout) = &layout {
                points.push(to_raw(parser, &values, layout, at)?);
            }
            read += 1;
        }
        if layout.is_some() {
            return Ok(points);
        }
    }
    Err(parser.err(Location::Line(1), "no vertex element"))
}

fn read_binary(parser: &Parser, header: &Header, bytes: &[u8]) -> Result<Vec<RawPoint>> {
    let mut offset = header.body_start;
    let take = |offset: &mut usize, n: usize, what: &str| -> Result<&[u8]> {
        if *offset + n > bytes.len() {
            return Err(parser.err(Location::Byte(*offset), format!("truncated body while reading {what}")));
        }
        let s = &bytes[*offset..*offset + n];
        *offset += n;
        Ok(s)
    };
    for element in &header.elements {
        let layout = if element.name == "vertex" {
            Some(vertex_layout(parser, element)?)
        } else {
            None
        };
        let mut points = Vec::with_capacity(if layout.is_some() { element.count } else { 0 });
        let mut values = vec![0.0; element.properties.len()];
        for index in 0..element.count {
            let start = offset;
            for (k, p) in element.properties.iter().enumerate() {
                match p.kind {
                    PropertyKind::Scalar(t) => {
                        let what = format!("{} {index} property '{}'", element.name, p.name);
                        values[k] = t.read_le(take(&mut offset, t.size(), &what)?);
                    }
                    PropertyKind::List { count, item } => {
                        let what = format!("{} {index} list '{}'", element.name, p.name);
                        let n = count.read_le(take(&mut offset, count.size(), &what)?);
                        if n < 0.0 {
                            return Err(parser.err(Location::Byte(offset), format!("negative list length in {what}")));
                        }
                        take(&mut offset, n as usize * item.size(), &what)?;
                        values[k] = f64::NAN;
                    }
                }
            }
            if let Some(layout) = &layout {
                points.push(to_raw(parser, &values, layout, Location::Byte(start))?);
            }
        }
        if layout.is_some() {
            return Ok(points);
        }
    }
    Err(parser.err(Location::Line(1), "no vertex element"))
}

/// Parses PLY bytes into real-valued points; `path` only labels errors.
pub fn parse_ply_raw(bytes: &[u8], path: &Path) -> Result<Vec<RawPoint>> {
    let parser = Parser { path };
    let header = parser.header(bytes)?;
    match header.format {
        PlyFormat::Ascii => read_ascii(&parser, &header, bytes),
        PlyFormat::BinaryLittleEndian => read_binary(&parser, &header, bytes),
    }
}

/// Rounds real coordinates to the integer grid.
pub fn round_points(path: &Path, raw: &[RawPoint]) -> Result<Vec<Point>> {
    raw.iter()
        .enumerate()
        .map(|(i, p)| {
            let mut g = [0i32; 3];
            for (slot, &coordinate) in g.iter_mut().zip(&p.position) {
                let v = round_half_away(coordinate);
                if v < f64::from(i32::MIN) || v > f64::from(i32::MAX) {
                    return Err(Error::Ply {
                        path: path.to_path_buf(),
                        location: Location::Line(0),
                        message: format!("vertex {i}: coordinate {coordinate} outside the integer grid"),
                    });
                }
                *slot = v as i32;
            }
            Ok(Point::new(g, p.color))
        })
        .collect()
}

fn cloud_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "cloud".into(), |s| s.to_string_lossy().into_owned())
}

/// Parses PLY bytes into a cloud with coordinates rounded to integers.
pub fn parse_ply(bytes: &[u8], path: &Path) -> Result<PointCloud> {
    let raw = parse_ply_raw(bytes, path)?;
    Ok(PointCloud::new(cloud_name(path), round_points(path, &raw)?))
}

/// Loads a cloud, rounding float coordinates to the nearest integer. The
/// cloud is named after the file stem.
pub fn load_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_error(path))?;
    parse_ply(&bytes, path)
}

/// Loads the vertices with their stored real-valued coordinates.
pub fn load_ply_raw(path: impl AsRef<Path>) -> Result<Vec<RawPoint>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_error(path))?;
    parse_ply_raw(&bytes, path)
}

/// Encodes a cloud as PLY.
pub fn write_ply(cloud: &PointCloud, format: PlyFormat, out: &mut impl Write) -> std::io::Result<()> {
    let name = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        out,
        "ply\nformat {name} 1.0\nelement vertex {}\nproperty int x\nproperty int y\nproperty int z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        cloud.len()
    )?;
    for p in &cloud.points {
        match format {
            PlyFormat::Ascii => {
                let [x, y, z] = p.position;
                let [r, g, b] = p.color;
                writeln!(out, "{x} {y} {z} {r} {g} {b}")?;
            }
            PlyFormat::BinaryLittleEndian => {
                for c in p.position {
                    out.write_all(&c.to_le_bytes())?;
                }
                out.write_all(&p.color)?;
            }
        }
    }
    Ok(())
}

pub fn to_ply_bytes(cloud: &PointCloud, format: PlyFormat) -> Vec<u8> {
    let mut buf = Vec::with_capacity(64 + cloud.len() * 16);
    write_ply(cloud, format, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Writes a non-empty cloud to `path`.
pub fn save_ply(cloud: &PointCloud, path: impl AsRef<Path>, format: PlyFormat) -> Result<()> {
    let path = path.as_ref();
    cloud.ensure_nonempty()?;
    let file = fs::File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    write_ply(cloud, format, &mut out)
        .and_then(|_| out.flush())
        .map_err(io_error(path))
}
