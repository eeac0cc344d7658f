use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{AxisOrder, ColoredVertex, GeoPoint, PointCloud, Rgb, DECIMALS};
use crate::error::{Error, Result};

/// Write vertices as ASCII PLY with `x y z red green blue` properties.
pub fn write_ply_vertices<W: Write>(vertices: &[ColoredVertex], mut writer: W) -> Result<()> {
    if vertices.is_empty() {
        return Err(Error::EmptyCloud);
    }
    writeln!(writer, "ply")?;
    writeln!(writer, "format ascii 1.0")?;
    writeln!(writer, "element vertex {}", vertices.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(writer, "property float {axis}")?;
    }
    for channel in ["red", "green", "blue"] {
        writeln!(writer, "property uchar {channel}")?;
    }
    writeln!(writer, "end_header")?;
    for v in vertices {
        let [r, g, b] = v.color;
        writeln!(
            writer,
            "{:.DECIMALS$} {:.DECIMALS$} {:.DECIMALS$} {r} {g} {b}",
            v.x, v.y, v.z
        )?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a cloud as ASCII PLY. Uncolored points are written white.
pub fn write_ply<W: Write>(cloud: &PointCloud, writer: W) -> Result<()> {
    let vertices: Vec<ColoredVertex> = cloud.points.iter().map(ColoredVertex::from).collect();
    write_ply_vertices(&vertices, writer)
}

pub fn save_ply_vertices(vertices: &[ColoredVertex], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if vertices.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ply_vertices(vertices, BufWriter::new(file)).map_err(|e| match e {
        Error::Stream(source) => Error::io(path, source),
        other => other,
    })
}

pub fn save_ply(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let vertices: Vec<ColoredVertex> = cloud.points.iter().map(ColoredVertex::from).collect();
    save_ply_vertices(&vertices, path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    X,
    Y,
    Z,
    Red,
    Green,
    Blue,
    Other,
}

/// Read the vertex element of an ASCII PLY stream.
///
/// Vertex colors are taken from `red`/`green`/`blue` properties when all
/// three are present. Elements after the vertex element are ignored.
pub fn parse_ply<R: BufRead>(reader: R) -> Result<PointCloud> {
    let mut lines = reader.lines().enumerate();
    let mut vertex_count: Option<usize> = None;
    let mut elements_before_vertex = false;
    let mut in_vertex = false;
    let mut slots = Vec::new();

    let magic = lines.next().map(|(_, line)| line).transpose()?;
    if magic.as_deref().map(str::trim) != Some("ply") {
        return Err(parse_error(1, "missing `ply` magic"));
    }
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(parse_error(0, "missing end_header"));
        };
        let line = line?;
        let line_no = n + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => {
                return Err(parse_error(line_no, format!("unsupported format `{other}`")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", "vertex", count] => {
                if elements_before_vertex {
                    return Err(parse_error(line_no, "vertex element must come first"));
                }
                vertex_count = Some(
                    count
                        .parse()
                        .map_err(|_| parse_error(line_no, "invalid vertex count"))?,
                );
                in_vertex = true;
            }
            ["element", ..] => {
                if vertex_count.is_none() {
                    elements_before_vertex = true;
                }
                in_vertex = false;
            }
            ["property", "list", ..] if in_vertex => {
                return Err(parse_error(line_no, "list properties on vertices are unsupported"))
            }
            ["property", _ty, name] if in_vertex => slots.push(match *name {
                "x" => Slot::X,
                "y" => Slot::Y,
                "z" => Slot::Z,
                "red" => Slot::Red,
                "green" => Slot::Green,
                "blue" => Slot::Blue,
                _ => Slot::Other,
            }),
            ["property", ..] => {}
            ["end_header"] => break,
            _ => return Err(parse_error(line_no, format!("unexpected header line `{line}`"))),
        }
    }

    let count = vertex_count.ok_or_else(|| parse_error(0, "no vertex element"))?;
    for needed in [Slot::X, Slot::Y, Slot::Z] {
        if !slots.contains(&needed) {
            return Err(parse_error(0, format!("missing {needed:?} property")));
        }
    }
    let has_color = [Slot::Red, Slot::Green, Slot::Blue]
        .iter()
        .all(|s| slots.contains(s));

    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let Some((n, line)) = lines.next() else {
            return Err(parse_error(
                0,
                format!("expected {count} vertices, found {}", points.len()),
            ));
        };
        let line = line?;
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut values = [0.0f64; 6];
        let mut seen = 0;
        for (slot, field) in slots.iter().zip(line.split_whitespace()) {
            seen += 1;
            if *slot == Slot::Other {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(line_no, format!("`{field}` is not a number")))?;
            values[*slot as usize] = v;
        }
        if seen < slots.len() {
            return Err(parse_error(line_no, "too few values on vertex line"));
        }
        let mut p = GeoPoint::new(values[Slot::Y as usize], values[Slot::X as usize], values[Slot::Z as usize]);
        if !p.is_finite() {
            return Err(parse_error(line_no, "non-finite coordinate"));
        }
        if has_color {
            let channel = |s: Slot| values[s as usize] / 255.0;
            p.color = Some(
                Rgb::new(channel(Slot::Red), channel(Slot::Green), channel(Slot::Blue))
                    .ok_or_else(|| parse_error(line_no, "color channel outside 0..=255"))?,
            );
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(PointCloud::new(points, AxisOrder::Xyz))
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ply(BufReader::new(file)).map_err(|e| match e {
        Error::Stream(source) => Error::io(path, source),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn single_point_header() {
        let cloud = PointCloud::new(vec![GeoPoint::new(1.0, 2.0, 3.0)], AxisOrder::GeoYxz);
        let mut out = Vec::new();
        write_ply(&cloud, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("ply\nformat ascii 1.0\nelement vertex 1\n"));
        assert!(text.contains("property float x\nproperty float y\nproperty float z\n"));
        assert!(text.contains("property uchar red\nproperty uchar green\nproperty uchar blue\n"));
        assert!(text.ends_with("end_header\n2.000000 1.000000 3.000000 255 255 255\n"));
    }

    #[test]
    fn reads_back_colors() {
        let p = GeoPoint::new(1.0, 2.0, 3.0).with_color(Rgb::from_u8([10, 20, 30]));
        let cloud = PointCloud::new(vec![p], AxisOrder::GeoYxz);
        let mut out = Vec::new();
        write_ply(&cloud, &mut out).unwrap();
        let back = parse_ply(Cursor::new(out)).unwrap();
        assert_eq!(back.points[0].color.unwrap().to_u8(), [10, 20, 30]);
        assert_eq!(back.points[0].yxz(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_binary() {
        let text = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse_ply(Cursor::new(text)), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn ignores_extra_properties_and_faces() {
        let text = "ply\nformat ascii 1.0\ncomment x\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n1 2 3 9\n4 5 6 9\n3 0 1 1\n";
        let cloud = parse_ply(Cursor::new(text)).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.points[1], GeoPoint::new(5.0, 4.0, 6.0));
    }

    #[test]
    fn truncated_body_is_an_error() {
        let text = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n";
        assert!(parse_ply(Cursor::new(text)).is_err());
    }

    #[test]
    fn empty_vertices_refused_on_write() {
        assert!(matches!(
            write_ply_vertices(&[], Vec::new()),
            Err(Error::EmptyCloud)
        ));
    }
}
