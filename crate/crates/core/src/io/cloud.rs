use std::fmt::Write as _;
use std::path::Path;

use crate::depth::PointCloud;
use crate::geometry::Vec3;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    /// ASCII PLY with `x`, `y`, `z` vertex properties.
    Ply,
    /// One point per line, whitespace separated; extra columns are ignored.
    Xyz,
}

impl CloudFormat {
    fn sniff(text: &str) -> Self {
        if text.trim_start().starts_with("ply") {
            CloudFormat::Ply
        } else {
            CloudFormat::Xyz
        }
    }
}

pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_point_cloud(&text, path)
}

/// Parses cloud text; `path` is only used in error messages.
pub fn parse_point_cloud(text: &str, path: &Path) -> Result<PointCloud> {
    match CloudFormat::sniff(text) {
        CloudFormat::Ply => parse_ply(text, path),
        CloudFormat::Xyz => parse_xyz(text, path),
    }
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Malformed { path: path.into(), line, message: message.into() }
}

fn number(token: &str, path: &Path, line: usize) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(malformed(path, line, format!("expected a number, found {token:?}"))),
    }
}

fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let mut xyz = [0.0; 3];
        for c in &mut xyz {
            let tok = tokens.next().ok_or_else(|| malformed(path, line_no, "expected at least 3 columns"))?;
            *c = number(tok, path, line_no)?;
        }
        points.push(Vec3::from(xyz));
    }
    Ok(PointCloud::new(points))
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

fn parse_ply(text: &str, path: &Path) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    lines.next();
    let body_start = loop {
        let Some((n, line)) = lines.next() else {
            return Err(malformed(path, text.lines().count(), "missing end_header"));
        };
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    return Err(malformed(path, n, "only ASCII PLY is supported"));
                }
                format_seen = true;
            }
            Some("element") => {
                let (Some(name), Some(count)) = (tok.next(), tok.next()) else {
                    return Err(malformed(path, n, "element needs a name and a count"));
                };
                let count = count.parse().map_err(|_| malformed(path, n, format!("bad element count {count:?}")))?;
                elements.push(Element { name: name.to_string(), count, properties: Vec::new() });
            }
            Some("property") => {
                let Some(element) = elements.last_mut() else {
                    return Err(malformed(path, n, "property before any element"));
                };
                let parts: Vec<&str> = tok.collect();
                let name = match parts.as_slice() {
                    ["list", _, _, name] if element.name != "vertex" => name,
                    [_, name] => name,
                    _ => return Err(malformed(path, n, format!("unsupported property {line:?}"))),
                };
                element.properties.push(name.to_string());
            }
            Some("end_header") => break n,
            Some("comment" | "obj_info") | None => {}
            Some(other) => return Err(malformed(path, n, format!("unknown header keyword {other:?}"))),
        }
    };
    if !format_seen {
        return Err(malformed(path, body_start, "header has no format line"));
    }
    let mut points = Vec::new();
    for element in &elements {
        if element.name != "vertex" {
            for _ in 0..element.count {
                lines.next();
            }
            continue;
        }
        let index = |axis: &str| {
            element
                .properties
                .iter()
                .position(|p| p == axis)
                .ok_or_else(|| malformed(path, body_start, format!("vertex element has no {axis} property")))
        };
        let cols = [index("x")?, index("y")?, index("z")?];
        for _ in 0..element.count {
            let (n, line) = lines.next().ok_or_else(|| malformed(path, text.lines().count(), "truncated vertex list"))?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != element.properties.len() {
                return Err(malformed(
                    path,
                    n,
                    format!("expected {} values, found {}", element.properties.len(), tokens.len()),
                ));
            }
            let mut xyz = [0.0; 3];
            for (c, &col) in xyz.iter_mut().zip(&cols) {
                *c = number(tokens[col], path, n)?;
            }
            points.push(Vec3::from(xyz));
        }
    }
    Ok(PointCloud::new(points))
}

/// ASCII PLY text with only `x y z` vertex properties. Values are written
/// with the shortest representation that parses back exactly.
pub fn write_ply(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(32 * cloud.len() + 128);
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", cloud.len()).unwrap();
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in &cloud.points {
        writeln!(out, "{} {} {}", p.x, p.y, p.z).unwrap();
    }
    super::create_parent(path)?;
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<PointCloud> {
        parse_point_cloud(text, Path::new("test"))
    }

    #[test]
    fn xyz_text() {
        let cloud = parse("1 2 3\n\n# comment\n4 5 6 0.5\n-1e-3 0 7\n").unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.points[2], Vec3::new(-1e-3, 0.0, 7.0));
    }

    #[test]
    fn xyz_errors_name_the_line() {
        match parse("1 2 3\n1 two 3\n") {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse("1 2\n") {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ply_with_extra_properties() {
        let text = "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty float intensity\n\
                    property float x\nproperty float y\nproperty float z\nproperty uchar red\n\
                    element face 1\nproperty list uchar int vertex_indices\nend_header\n\
                    9 1 2 3 255\n9 4 5 6 0\n3 0 1 1\n";
        let cloud = parse(text).unwrap();
        assert_eq!(cloud.points, vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0)]);
    }

    #[test]
    fn ply_errors() {
        let binary = "ply\nformat binary_little_endian 1.0\nelement vertex 1\nend_header\n";
        assert!(matches!(parse(binary), Err(Error::Malformed { line: 2, .. })));
        let bad = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\n\
                   end_header\n1 2 3\n1 2 nan?\n";
        assert!(matches!(parse(bad), Err(Error::Malformed { line: 9, .. })));
        let short = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n\
                     end_header\n1 2 3\n";
        assert!(parse(short).is_err());
    }

    #[test]
    fn ply_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let cloud = PointCloud::new(vec![Vec3::new(0.1, -2.0 / 3.0, 1e-17), Vec3::new(3.0, 4.0, 5.0)]);
        write_ply(&cloud, &path).unwrap();
        assert_eq!(read_point_cloud(&path).unwrap(), cloud);
    }
}
