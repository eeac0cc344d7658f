use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{AxisOrder, GeoPoint, PointCloud, Rgb, DECIMALS};
use crate::error::{Error, Result};

/// Read the `v` records of a Wavefront OBJ stream.
///
/// Faces, normals, texture coordinates, comments and any other record are
/// skipped. A vertex line carries three coordinates, optionally followed by
/// a homogeneous `w` or by an `r g b` color triple in `[0, 1]`.
pub fn parse_obj<R: BufRead>(reader: R, axis_order: AxisOrder) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        let record = line.split('#').next().unwrap_or("");
        let mut fields = record.split_whitespace();
        if fields.next() != Some("v") {
            continue;
        }
        let mut numbers = [0.0f64; 6];
        let mut count = 0;
        for field in fields {
            if count == numbers.len() {
                return Err(parse_error(line_no, "too many values on vertex line"));
            }
            numbers[count] = field
                .parse::<f64>()
                .map_err(|_| parse_error(line_no, format!("`{field}` is not a number")))?;
            if !numbers[count].is_finite() {
                return Err(parse_error(line_no, format!("`{field}` is not finite")));
            }
            count += 1;
        }
        let color = match count {
            3 | 4 => None,
            6 => Some(
                Rgb::new(numbers[3], numbers[4], numbers[5])
                    .ok_or_else(|| parse_error(line_no, "color channel outside [0, 1]"))?,
            ),
            0..=2 => {
                return Err(parse_error(
                    line_no,
                    format!("vertex needs 3 coordinates, found {count}"),
                ))
            }
            _ => {
                return Err(parse_error(
                    line_no,
                    format!("vertex line has {count} values, expected 3 or 6"),
                ))
            }
        };
        let [y, x, z] = axis_order.to_yxz(numbers[0], numbers[1], numbers[2]);
        points.push(GeoPoint { y, x, z, color });
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(PointCloud::new(points, axis_order))
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_obj(path: impl AsRef<Path>, axis_order: AxisOrder) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_obj(BufReader::new(file), axis_order).map_err(|e| match e {
        Error::Stream(source) => Error::io(path, source),
        other => other,
    })
}

/// Write one `v` line per point with coordinates in the requested order.
pub fn write_obj<W: Write>(cloud: &PointCloud, mut writer: W, axis_order: AxisOrder) -> Result<()> {
    cloud.require_non_empty()?;
    for p in &cloud.points {
        let [a, b, c] = axis_order.from_yxz(p);
        write!(writer, "v {a:.DECIMALS$} {b:.DECIMALS$} {c:.DECIMALS$}")?;
        if let Some(rgb) = p.color {
            write!(
                writer,
                " {:.DECIMALS$} {:.DECIMALS$} {:.DECIMALS$}",
                rgb.r, rgb.g, rgb.b
            )?;
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_obj(cloud: &PointCloud, path: impl AsRef<Path>, axis_order: AxisOrder) -> Result<()> {
    let path = path.as_ref();
    cloud.require_non_empty()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_obj(cloud, BufWriter::new(file), axis_order).map_err(|e| match e {
        Error::Stream(source) => Error::io(path, source),
        other => other,
    })
}

/// Write axis-aligned boxes as an OBJ mesh: 8 corner vertices and 6 quads per box.
///
/// Each box is `[[y_lo, y_hi], [x_lo, x_hi], [z_lo, z_hi]]`.
pub fn write_obj_boxes<W: Write>(
    boxes: &[[[f64; 2]; 3]],
    mut writer: W,
    axis_order: AxisOrder,
) -> Result<()> {
    if boxes.is_empty() {
        return Err(Error::EmptyCloud);
    }
    // Corner c has bit 0 -> y, bit 1 -> x, bit 2 -> z.
    const FACES: [[usize; 4]; 6] = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    for [ys, xs, zs] in boxes {
        for c in 0..8 {
            let p = GeoPoint::new(ys[c & 1], xs[(c >> 1) & 1], zs[(c >> 2) & 1]);
            let [a, b, c] = axis_order.from_yxz(&p);
            writeln!(writer, "v {a:.DECIMALS$} {b:.DECIMALS$} {c:.DECIMALS$}")?;
        }
    }
    for n in 0..boxes.len() {
        let base = n * 8 + 1;
        for face in FACES {
            writeln!(
                writer,
                "f {} {} {} {}",
                base + face[0],
                base + face[1],
                base + face[2],
                base + face[3]
            )?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, order: AxisOrder) -> Result<PointCloud> {
        parse_obj(Cursor::new(text), order)
    }

    #[test]
    fn geographic_order_maps_fields_directly() {
        let cloud = parse("v 1.0 2.0 3.0\n", AxisOrder::GeoYxz).unwrap();
        assert_eq!(cloud.points, vec![GeoPoint::new(1.0, 2.0, 3.0)]);
        assert_eq!(cloud.axis_order, AxisOrder::GeoYxz);
    }

    #[test]
    fn xyz_order_swaps_first_two() {
        let cloud = parse("v 1.0 2.0 3.0\n", AxisOrder::Xyz).unwrap();
        assert_eq!(cloud.points[0].y, 2.0);
        assert_eq!(cloud.points[0].x, 1.0);
    }

    #[test]
    fn vertex_color_extension() {
        let cloud = parse("v 1.0 2.0 3.0 0.5 0.5 0.5\n", AxisOrder::GeoYxz).unwrap();
        assert_eq!(cloud.points[0].color, Rgb::new(0.5, 0.5, 0.5));
    }

    #[test]
    fn homogeneous_w_is_ignored() {
        let cloud = parse("v 1 2 3 1.0\n", AxisOrder::GeoYxz).unwrap();
        assert_eq!(cloud.points[0], GeoPoint::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn malformed_vertex_reports_line() {
        let err = parse("# header\nv 0 0 0\nv 1.0 abc 3.0\n", AxisOrder::GeoYxz).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_vertex_is_an_error() {
        let err = parse("v 1.0 2.0\n", AxisOrder::GeoYxz).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn out_of_range_color_is_an_error() {
        let err = parse("v 1 2 3 255 0 0\n", AxisOrder::GeoYxz).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn non_vertex_records_are_skipped() {
        let text = "# comment\nvn 0 0 1\nv 1 2 3\nvt 0.5 0.5\nf 1 2 3\ng group\nv 4 5 6 # trailing\n\n";
        let cloud = parse(text, AxisOrder::GeoYxz).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.points[1], GeoPoint::new(4.0, 5.0, 6.0));
    }

    #[test]
    fn no_vertices_is_empty_cloud() {
        let err = parse("f 1 2 3\n# nothing\n", AxisOrder::GeoYxz).unwrap_err();
        assert!(matches!(err, Error::EmptyCloud));
    }

    #[test]
    fn writes_geo_order_with_six_decimals() {
        let cloud = PointCloud::new(vec![GeoPoint::new(1.0, 2.0, 3.0)], AxisOrder::GeoYxz);
        let mut out = Vec::new();
        write_obj(&cloud, &mut out, AxisOrder::GeoYxz).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "v 1.000000 2.000000 3.000000\n");

        let mut out = Vec::new();
        write_obj(&cloud, &mut out, AxisOrder::Xyz).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "v 2.000000 1.000000 3.000000\n");
    }

    #[test]
    fn refuses_to_write_empty_cloud() {
        let err = write_obj(&PointCloud::default(), Vec::new(), AxisOrder::GeoYxz).unwrap_err();
        assert!(matches!(err, Error::EmptyCloud));
    }

    #[test]
    fn box_mesh_layout() {
        let mut out = Vec::new();
        write_obj_boxes(&[[[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]]], &mut out, AxisOrder::GeoYxz)
            .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 6);
        let cloud = parse(&text, AxisOrder::GeoYxz).unwrap();
        assert!(cloud.points.contains(&GeoPoint::new(1.0, 2.0, 3.0)));
    }
}
