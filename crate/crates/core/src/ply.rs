//! PLY reader and writer.
//!
//! Supports `ascii 1.0` and `binary_little_endian 1.0`, a vertex element
//! with `x`, `y`, `z` (float or double) and optional `red`, `green`, `blue`
//! (uchar). Unknown properties are skipped by size; unknown elements are
//! skipped entirely. Organized-grid dimensions ride along as
//! `obj_info width N` / `obj_info height M` (comments with the same shape
//! are recognized on input).

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    Char,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Float,
    Double,
}

impl ScalarType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::Char,
            "uchar" | "uint8" => Self::UChar,
            "short" | "int16" => Self::Short,
            "ushort" | "uint16" => Self::UShort,
            "int" | "int32" => Self::Int,
            "uint" | "uint32" => Self::UInt,
            "float" | "float32" => Self::Float,
            "double" | "float64" => Self::Double,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::Char | Self::UChar => 1,
            Self::Short | Self::UShort => 2,
            Self::Int | Self::UInt => 4,
            Self::Float => 4,
            Self::Double => 8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum PropType {
    Scalar(ScalarType),
    List(ScalarType, ScalarType),
}

#[derive(Debug)]
struct ElementDecl {
    name: String,
    count: usize,
    props: Vec<(String, PropType)>,
}

#[derive(Debug)]
struct Header {
    format: PlyFormat,
    elements: Vec<ElementDecl>,
    grid: Option<(u32, u32)>,
    body_start: usize,
    header_lines: usize,
}

fn header_err(line: usize, message: impl Into<String>) -> Error {
    Error::PlyHeader {
        line,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut format = None;
    let mut elements: Vec<ElementDecl> = Vec::new();
    let mut grid_w = None;
    let mut grid_h = None;
    let mut saw_end = false;

    while pos < bytes.len() {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .ok_or_else(|| header_err(line_no + 1, "unterminated header line"))?;
        let raw = &bytes[pos..end];
        pos = end + 1;
        line_no += 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| header_err(line_no, "header is not valid utf-8"))?
            .trim_end_matches('\r');

        if line_no == 1 {
            if line != "ply" {
                return Err(header_err(1, "missing 'ply' magic line"));
            }
            continue;
        }

        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        match keyword {
            "format" => {
                let kind = words.next().unwrap_or("");
                let version = words.next().unwrap_or("");
                if version != "1.0" {
                    return Err(header_err(line_no, format!("unsupported version '{version}'")));
                }
                format = Some(match kind {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    "binary_big_endian" => {
                        return Err(header_err(line_no, "binary_big_endian is not supported"))
                    }
                    other => return Err(header_err(line_no, format!("unknown format '{other}'"))),
                });
            }
            "comment" | "obj_info" => {
                let key = words.next().unwrap_or("");
                let val = words.next();
                if let (Some(v), true) = (val, key == "width" || key == "height") {
                    if let Ok(n) = v.parse::<u32>() {
                        if key == "width" {
                            grid_w = Some(n);
                        } else {
                            grid_h = Some(n);
                        }
                    }
                }
            }
            "element" => {
                let name = words
                    .next()
                    .ok_or_else(|| header_err(line_no, "element without a name"))?;
                let count: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| header_err(line_no, "element without a valid count"))?;
                elements.push(ElementDecl {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            "property" => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| header_err(line_no, "property before any element"))?;
                let first = words
                    .next()
                    .ok_or_else(|| header_err(line_no, "property without a type"))?;
                if first == "list" {
                    let count_ty = words
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| header_err(line_no, "bad list count type"))?;
                    let item_ty = words
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| header_err(line_no, "bad list item type"))?;
                    let name = words
                        .next()
                        .ok_or_else(|| header_err(line_no, "list property without a name"))?;
                    elem.props
                        .push((name.to_string(), PropType::List(count_ty, item_ty)));
                } else {
                    let ty = ScalarType::parse(first)
                        .ok_or_else(|| header_err(line_no, format!("unknown type '{first}'")))?;
                    let name = words
                        .next()
                        .ok_or_else(|| header_err(line_no, "property without a name"))?;
                    elem.props.push((name.to_string(), PropType::Scalar(ty)));
                }
            }
            "end_header" => {
                saw_end = true;
                break;
            }
            "" => return Err(header_err(line_no, "blank line inside header")),
            other => return Err(header_err(line_no, format!("unknown keyword '{other}'"))),
        }
    }

    if !saw_end {
        return Err(header_err(line_no, "missing end_header"));
    }
    let format = format.ok_or_else(|| header_err(line_no, "missing format line"))?;
    let grid = match (grid_w, grid_h) {
        (Some(w), Some(h)) => Some((w, h)),
        _ => None,
    };
    Ok(Header {
        format,
        elements,
        grid,
        body_start: pos,
        header_lines: line_no,
    })
}

/// Column layout of the vertex element: where x/y/z and r/g/b live.
struct VertexLayout {
    x: (usize, ScalarType),
    y: (usize, ScalarType),
    z: (usize, ScalarType),
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(elem: &ElementDecl, header_lines: usize) -> Result<VertexLayout> {
    let mut x = None;
    let mut y = None;
    let mut z = None;
    let mut r = None;
    let mut g = None;
    let mut b = None;
    for (i, (name, ty)) in elem.props.iter().enumerate() {
        match name.as_str() {
            "x" | "y" | "z" => {
                let st = match ty {
                    PropType::Scalar(st @ (ScalarType::Float | ScalarType::Double)) => *st,
                    _ => {
                        return Err(header_err(
                            header_lines,
                            format!("vertex property '{name}' must be float or double"),
                        ))
                    }
                };
                match name.as_str() {
                    "x" => x = Some((i, st)),
                    "y" => y = Some((i, st)),
                    _ => z = Some((i, st)),
                }
            }
            "red" | "green" | "blue" => {
                if !matches!(ty, PropType::Scalar(ScalarType::UChar)) {
                    return Err(header_err(
                        header_lines,
                        format!("vertex property '{name}' must be uchar"),
                    ));
                }
                match name.as_str() {
                    "red" => r = Some(i),
                    "green" => g = Some(i),
                    _ => b = Some(i),
                }
            }
            _ => {}
        }
    }
    let missing = |c| header_err(header_lines, format!("vertex element lacks property '{c}'"));
    let rgb = match (r, g, b) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    Ok(VertexLayout {
        x: x.ok_or_else(|| missing("x"))?,
        y: y.ok_or_else(|| missing("y"))?,
        z: z.ok_or_else(|| missing("z"))?,
        rgb,
    })
}

/// Parse a PLY byte stream into a point cloud. Coordinates are converted to
/// the target scalar type; no unit rescaling happens.
pub fn parse_ply<S: Real>(bytes: &[u8]) -> Result<PointCloud<S>> {
    let header = parse_header(bytes)?;
    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| header_err(header.header_lines, "no vertex element declared"))?;
    let vertex = &header.elements[vertex_pos];
    let layout = vertex_layout(vertex, header.header_lines)?;

    if let Some((w, h)) = header.grid {
        if (w as usize) * (h as usize) != vertex.count {
            return Err(header_err(
                header.header_lines,
                format!(
                    "grid {w}x{h} does not cover {} vertices",
                    vertex.count
                ),
            ));
        }
    }

    let body = &bytes[header.body_start..];
    let (points, colors) = match header.format {
        PlyFormat::Ascii => parse_body_ascii::<S>(
            body,
            &header.elements,
            vertex_pos,
            &layout,
            header.header_lines,
        )?,
        PlyFormat::BinaryLittleEndian => {
            parse_body_binary::<S>(body, &header.elements, vertex_pos, &layout)?
        }
    };

    let mut cloud = PointCloud::new(points);
    if let Some(colors) = colors {
        cloud = cloud.with_colors(colors);
    }
    if let Some((w, h)) = header.grid {
        cloud = cloud.with_grid(w, h);
    }
    Ok(cloud)
}

fn parse_scalar<S: Real>(token: &str, ty: ScalarType, line: usize) -> Result<S> {
    let bad = || Error::PlyBody {
        message: format!("line {line}: cannot parse '{token}' as {ty:?}"),
    };
    match ty {
        ScalarType::Float => {
            let v: f32 = token.parse().map_err(|_| bad())?;
            Ok(S::from_f64_lossy(v as f64))
        }
        ScalarType::Double => {
            let v: f64 = token.parse().map_err(|_| bad())?;
            Ok(S::from_f64_lossy(v))
        }
        _ => unreachable!("coordinates are float or double"),
    }
}

type ParsedBody<S> = (Vec<[S; 3]>, Option<Vec<[u8; 3]>>);

fn parse_body_ascii<S: Real>(
    body: &[u8],
    elements: &[ElementDecl],
    vertex_pos: usize,
    layout: &VertexLayout,
    header_lines: usize,
) -> Result<ParsedBody<S>> {
    let text = std::str::from_utf8(body).map_err(|_| Error::PlyBody {
        message: "ascii body is not valid utf-8".into(),
    })?;
    let mut lines = text.lines();
    let mut line_no = header_lines;

    let mut points = Vec::new();
    let mut colors = layout.rgb.map(|_| Vec::new());

    for (ei, elem) in elements.iter().enumerate() {
        if ei > vertex_pos {
            break; // trailing elements are not needed
        }
        for _ in 0..elem.count {
            line_no += 1;
            let line = lines.next().ok_or(Error::PlyBody {
                message: format!("line {line_no}: unexpected end of data"),
            })?;
            let mut tokens = line.split_whitespace();
            if ei != vertex_pos {
                // skip row: consume tokens per property, honoring lists
                for (_, ty) in &elem.props {
                    match ty {
                        PropType::Scalar(_) => {
                            tokens.next().ok_or(Error::PlyBody {
                                message: format!("line {line_no}: row too short"),
                            })?;
                        }
                        PropType::List(_, _) => {
                            let n: usize = tokens
                                .next()
                                .and_then(|t| t.parse().ok())
                                .ok_or(Error::PlyBody {
                                    message: format!("line {line_no}: bad list count"),
                                })?;
                            for _ in 0..n {
                                tokens.next().ok_or(Error::PlyBody {
                                    message: format!("line {line_no}: row too short"),
                                })?;
                            }
                        }
                    }
                }
                continue;
            }
            let row: Vec<&str> = tokens.collect();
            if row.len() < elem.props.len() {
                return Err(Error::PlyBody {
                    message: format!(
                        "line {line_no}: vertex row has {} values, expected {}",
                        row.len(),
                        elem.props.len()
                    ),
                });
            }
            let p = [
                parse_scalar::<S>(row[layout.x.0], layout.x.1, line_no)?,
                parse_scalar::<S>(row[layout.y.0], layout.y.1, line_no)?,
                parse_scalar::<S>(row[layout.z.0], layout.z.1, line_no)?,
            ];
            points.push(p);
            if let (Some(out), Some(rgb)) = (colors.as_mut(), layout.rgb) {
                let mut c = [0u8; 3];
                for (k, &col) in rgb.iter().enumerate() {
                    c[k] = row[col].parse().map_err(|_| Error::PlyBody {
                        message: format!("line {line_no}: cannot parse '{}' as uchar", row[col]),
                    })?;
                }
                out.push(c);
            }
        }
    }
    Ok((points, colors))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).unwrap_or(usize::MAX);
        if end > self.data.len() {
            return Err(Error::PlyTruncated {
                expected: end,
                actual: self.data.len(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn read_usize(&mut self, ty: ScalarType) -> Result<usize> {
        let raw = self.take(ty.size())?;
        Ok(match ty {
            ScalarType::Char => raw[0] as i8 as usize,
            ScalarType::UChar => raw[0] as usize,
            ScalarType::Short => i16::from_le_bytes([raw[0], raw[1]]) as usize,
            ScalarType::UShort => u16::from_le_bytes([raw[0], raw[1]]) as usize,
            ScalarType::Int => i32::from_le_bytes(raw.try_into().unwrap()) as usize,
            ScalarType::UInt => u32::from_le_bytes(raw.try_into().unwrap()) as usize,
            ScalarType::Float | ScalarType::Double => {
                return Err(Error::PlyBody {
                    message: "list count must be an integer type".into(),
                })
            }
        })
    }

    fn read_coord<S: Real>(&mut self, ty: ScalarType) -> Result<S> {
        Ok(match ty {
            ScalarType::Float => {
                let raw = self.take(4)?;
                S::from_f64_lossy(f32::from_le_bytes(raw.try_into().unwrap()) as f64)
            }
            ScalarType::Double => {
                let raw = self.take(8)?;
                S::from_f64_lossy(f64::from_le_bytes(raw.try_into().unwrap()))
            }
            _ => unreachable!("coordinates are float or double"),
        })
    }
}

fn parse_body_binary<S: Real>(
    body: &[u8],
    elements: &[ElementDecl],
    vertex_pos: usize,
    layout: &VertexLayout,
) -> Result<ParsedBody<S>> {
    let mut cur = Cursor { data: body, pos: 0 };
    let mut points = Vec::new();
    let mut colors = layout.rgb.map(|_| Vec::new());

    // with no list properties the body size is known up-front, so a short
    // body can report the full expected byte count (u128 to survive absurd
    // declared counts)
    let mut expected_total = Some(0u128);
    for elem in &elements[..=vertex_pos] {
        let row: Option<usize> = elem.props.iter().try_fold(0usize, |acc, (_, ty)| match ty {
            PropType::Scalar(st) => Some(acc + st.size()),
            PropType::List(_, _) => None,
        });
        expected_total = match (expected_total, row) {
            (Some(total), Some(row)) => Some(total + row as u128 * elem.count as u128),
            _ => None,
        };
    }
    if let Some(total) = expected_total {
        if (body.len() as u128) < total {
            return Err(Error::PlyTruncated {
                expected: usize::try_from(total).unwrap_or(usize::MAX),
                actual: body.len(),
            });
        }
    }

    for (ei, elem) in elements.iter().enumerate() {
        if ei > vertex_pos {
            break;
        }
        for _ in 0..elem.count {
            if ei != vertex_pos {
                for (_, ty) in &elem.props {
                    match ty {
                        PropType::Scalar(st) => {
                            cur.take(st.size())?;
                        }
                        PropType::List(ct, it) => {
                            let n = cur.read_usize(*ct)?;
                            cur.take(n.checked_mul(it.size()).unwrap_or(usize::MAX))?;
                        }
                    }
                }
                continue;
            }
            let mut p = [S::zero(); 3];
            let mut c = [0u8; 3];
            for (pi, (_, ty)) in elem.props.iter().enumerate() {
                if pi == layout.x.0 {
                    p[0] = cur.read_coord::<S>(layout.x.1)?;
                } else if pi == layout.y.0 {
                    p[1] = cur.read_coord::<S>(layout.y.1)?;
                } else if pi == layout.z.0 {
                    p[2] = cur.read_coord::<S>(layout.z.1)?;
                } else if let Some(rgb) = layout.rgb {
                    if let Some(k) = rgb.iter().position(|&col| col == pi) {
                        c[k] = cur.take(1)?[0];
                        continue;
                    }
                    skip_prop(&mut cur, ty)?;
                } else {
                    skip_prop(&mut cur, ty)?;
                }
            }
            points.push(p);
            if let Some(out) = colors.as_mut() {
                out.push(c);
            }
        }
    }
    Ok((points, colors))
}

fn skip_prop(cur: &mut Cursor, ty: &PropType) -> Result<()> {
    match ty {
        PropType::Scalar(st) => {
            cur.take(st.size())?;
        }
        PropType::List(ct, it) => {
            let n = cur.read_usize(*ct)?;
            cur.take(n.checked_mul(it.size()).unwrap_or(usize::MAX))?;
        }
    }
    Ok(())
}

fn coord_type_name<S: Real>() -> &'static str {
    if std::mem::size_of::<S>() == 4 {
        "float"
    } else {
        "double"
    }
}

/// Serialize a point cloud. Coordinate precision follows the scalar type
/// (f32 -> float, f64 -> double); invalid points are written as NaN so the
/// organized grid stays dense.
pub fn write_ply<S: Real>(cloud: &PointCloud<S>, format: PlyFormat) -> Vec<u8> {
    assert!(!cloud.is_empty(), "cannot write an empty cloud");
    let mut out = Vec::new();
    out.extend_from_slice(b"ply\n");
    match format {
        PlyFormat::Ascii => out.extend_from_slice(b"format ascii 1.0\n"),
        PlyFormat::BinaryLittleEndian => {
            out.extend_from_slice(b"format binary_little_endian 1.0\n")
        }
    }
    if let Some(grid) = cloud.grid() {
        out.extend_from_slice(format!("obj_info width {}\n", grid.width).as_bytes());
        out.extend_from_slice(format!("obj_info height {}\n", grid.height).as_bytes());
    }
    out.extend_from_slice(format!("element vertex {}\n", cloud.len()).as_bytes());
    let ty = coord_type_name::<S>();
    for axis in ["x", "y", "z"] {
        out.extend_from_slice(format!("property {ty} {axis}\n").as_bytes());
    }
    if cloud.colors().is_some() {
        for ch in ["red", "green", "blue"] {
            out.extend_from_slice(format!("property uchar {ch}\n").as_bytes());
        }
    }
    out.extend_from_slice(b"end_header\n");

    match format {
        PlyFormat::Ascii => {
            for (i, p) in cloud.points().iter().enumerate() {
                let mut line = format!("{} {} {}", p[0], p[1], p[2]);
                if let Some(colors) = cloud.colors() {
                    let c = colors[i];
                    line.push_str(&format!(" {} {} {}", c[0], c[1], c[2]));
                }
                line.push('\n');
                out.extend_from_slice(line.as_bytes());
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let f32_coords = std::mem::size_of::<S>() == 4;
            for (i, p) in cloud.points().iter().enumerate() {
                for &c in p {
                    if f32_coords {
                        out.extend_from_slice(&(c.to_f64_lossy() as f32).to_le_bytes());
                    } else {
                        out.extend_from_slice(&c.to_f64_lossy().to_le_bytes());
                    }
                }
                if let Some(colors) = cloud.colors() {
                    out.extend_from_slice(&colors[i]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_three_vertices() {
        let data = b"ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 0 0\n0 1 0\n";
        let cloud: PointCloud<f64> = parse_ply(data).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.valid_count(), 3);
        assert!(cloud.colors().is_none());
        assert!(cloud.grid().is_none());
        assert_eq!(cloud.points()[1], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn binary_nan_vertex_is_invalid() {
        let mut data = Vec::new();
        data.extend_from_slice(
            b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        );
        data.extend_from_slice(&f32::NAN.to_le_bytes());
        data.extend_from_slice(&0f32.to_le_bytes());
        data.extend_from_slice(&0f32.to_le_bytes());
        let cloud: PointCloud<f32> = parse_ply(&data).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.valid_count(), 0);
    }

    #[test]
    fn big_endian_rejected() {
        let data = b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(
            parse_ply::<f64>(data),
            Err(Error::PlyHeader { .. })
        ));
    }

    #[test]
    fn truncated_binary_body_reports_byte_counts() {
        let mut data = Vec::new();
        data.extend_from_slice(
            b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        );
        data.extend_from_slice(&[0u8; 12]); // one vertex only
        match parse_ply::<f64>(&data) {
            Err(Error::PlyTruncated { expected, actual }) => {
                assert_eq!(expected, 24);
                assert_eq!(actual, 12);
            }
            other => panic!("expected PlyTruncated, got {other:?}"),
        }
    }

    #[test]
    fn grid_from_obj_info() {
        let data = b"ply\nformat ascii 1.0\nobj_info width 2\nobj_info height 2\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n";
        let cloud: PointCloud<f64> = parse_ply(data).unwrap();
        let grid = cloud.grid().unwrap();
        assert_eq!((grid.width, grid.height), (2, 2));
    }

    #[test]
    fn grid_mismatching_vertex_count_rejected() {
        let data = b"ply\nformat ascii 1.0\nobj_info width 3\nobj_info height 2\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n";
        assert!(parse_ply::<f64>(data).is_err());
    }

    #[test]
    fn unknown_scalar_property_skipped() {
        let data = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float intensity\nproperty float y\nproperty float z\nend_header\n1 99 2 3\n";
        let cloud: PointCloud<f64> = parse_ply(data).unwrap();
        assert_eq!(cloud.points()[0], [1.0, 2.0, 3.0]);
    }

    #[test]
    fn colors_parsed_when_all_three_present() {
        let data = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n1 2 3 10 20 30\n";
        let cloud: PointCloud<f64> = parse_ply(data).unwrap();
        assert_eq!(cloud.colors().unwrap()[0], [10, 20, 30]);
    }

    #[test]
    fn write_header_lists_colors_after_xyz() {
        let cloud = PointCloud::<f64>::new(vec![[1.0, 2.0, 3.0]]).with_colors(vec![[9, 8, 7]]);
        let bytes = write_ply(&cloud, PlyFormat::Ascii);
        let text = String::from_utf8(bytes).unwrap();
        let z = text.find("property double z").unwrap();
        let r = text.find("property uchar red").unwrap();
        assert!(r > z);
        assert!(text.ends_with("1 2 3 9 8 7\n"));
    }

    #[test]
    fn one_point_ascii_cloud() {
        let cloud = PointCloud::<f64>::new(vec![[1.5, -2.0, 0.25]]);
        let text = String::from_utf8(write_ply(&cloud, PlyFormat::Ascii)).unwrap();
        assert!(text.contains("element vertex 1\n"));
        assert_eq!(text.lines().count(), 8);
    }

    #[test]
    fn roundtrip_f32_binary_is_bit_exact() {
        let pts: Vec<[f32; 3]> = vec![
            [0.1, 0.2, 0.3],
            [f32::NAN, 1.0, 2.0],
            [1e-20, -1e20, 123.456],
        ];
        let cloud = PointCloud::new(pts.clone());
        let bytes = write_ply(&cloud, PlyFormat::BinaryLittleEndian);
        let back: PointCloud<f32> = parse_ply(&bytes).unwrap();
        for (a, b) in pts.iter().zip(back.points()) {
            for k in 0..3 {
                assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
        assert!(!back.is_valid(1));
    }

    #[test]
    fn roundtrip_f64_ascii_preserves_values() {
        let pts = vec![[0.1f64, 0.2, 0.3], [1e-15, std::f64::consts::PI, -4.5]];
        let cloud = PointCloud::new(pts.clone());
        let bytes = write_ply(&cloud, PlyFormat::Ascii);
        let back: PointCloud<f64> = parse_ply(&bytes).unwrap();
        assert_eq!(back.points(), pts.as_slice());
    }
}
