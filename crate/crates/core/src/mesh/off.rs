use std::fmt::Write as _;
use std::path::Path;

use super::TriangleMesh;
use crate::error::MeshError;
use crate::Scalar;

/// Reads an ASCII OFF file containing a closed triangle mesh.
pub fn load_off<T: Scalar>(path: impl AsRef<Path>) -> Result<TriangleMesh<T>, MeshError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_off(&text)
}

/// Parses ASCII OFF text. Comments start with `#`; the element counts may
/// share the header line (`OFF 6 8 12`) or follow it. Extra tokens after a
/// vertex position or face index list (colours) are ignored.
pub fn parse_off<T: Scalar>(text: &str) -> Result<TriangleMesh<T>, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: &str| MeshError::Parse {
        line,
        message: message.to_string(),
    };

    let (header_line, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(err(header_line, "expected OFF header"));
    }
    let rest: Vec<&str> = header_tokens.collect();
    let (count_line, counts): (usize, Vec<&str>) = if rest.is_empty() {
        let (n, l) = lines.next().ok_or_else(|| err(header_line, "missing counts line"))?;
        (n, l.split_whitespace().collect())
    } else {
        (header_line, rest)
    };
    if counts.len() < 2 {
        return Err(err(count_line, "counts line needs vertex and face counts"));
    }
    let parse_count = |s: &str| s.parse::<usize>().map_err(|_| err(count_line, "invalid count"));
    let n_vertices = parse_count(counts[0])?;
    let n_faces = parse_count(counts[1])?;

    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (n, l) = lines.next().ok_or_else(|| err(count_line, "fewer vertex lines than declared"))?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .take(3)
            .map(|t| t.parse::<f64>().map_err(|_| err(n, "invalid coordinate")))
            .collect::<Result<_, _>>()?;
        if coords.len() != 3 {
            return Err(err(n, "vertex needs three coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(err(n, "non-finite coordinate"));
        }
        vertices.push([T::lit(coords[0]), T::lit(coords[1]), T::lit(coords[2])]);
    }

    let mut faces = Vec::with_capacity(n_faces);
    for face in 0..n_faces {
        let (n, l) = lines.next().ok_or_else(|| err(count_line, "fewer face lines than declared"))?;
        let mut tokens = l.split_whitespace();
        let arity: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(n, "invalid face arity"))?;
        if arity != 3 {
            return Err(MeshError::NonTriangleFace { face, arity });
        }
        let idx: Vec<usize> = tokens
            .take(3)
            .map(|t| t.parse::<usize>().map_err(|_| err(n, "invalid vertex index")))
            .collect::<Result<_, _>>()?;
        if idx.len() != 3 {
            return Err(err(n, "triangle needs three vertex indices"));
        }
        faces.push([idx[0], idx[1], idx[2]]);
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "unexpected content after the declared faces"));
    }
    TriangleMesh::new(vertices, faces)
}

/// Serializes a mesh as ASCII OFF.
pub fn write_off<T: Scalar>(mesh: &TriangleMesh<T>) -> String {
    let mut out = String::new();
    writeln!(out, "OFF").unwrap();
    writeln!(out, "{} {} {}", mesh.vertices().len(), mesh.faces().len(), mesh.n_edges()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0].as_f64(), v[1].as_f64(), v[2].as_f64()).unwrap();
    }
    for f in mesh.faces() {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::octahedron;

    const OCTAHEDRON: &str = "OFF
# regular octahedron
6 8 12
1 0 0
-1 0 0
0 1 0
0 -1 0
0 0 1
0 0 -1
3 0 2 4
3 2 1 4
3 1 3 4
3 3 0 4
3 2 0 5
3 1 2 5
3 3 1 5
3 0 3 5
";

    #[test]
    fn parses_octahedron() {
        let m = parse_off::<f64>(OCTAHEDRON).unwrap();
        assert_eq!(m.n_edges(), 12);
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m, octahedron());
    }

    #[test]
    fn counts_on_header_line() {
        let text = OCTAHEDRON.replacen("OFF\n# regular octahedron\n6 8 12", "OFF 6 8 12", 1);
        assert!(parse_off::<f64>(&text).is_ok());
    }

    #[test]
    fn quad_face_is_rejected() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(
            parse_off::<f64>(text),
            Err(MeshError::NonTriangleFace { face: 0, arity: 4 })
        ));
    }

    #[test]
    fn open_surface_is_rejected() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        assert!(matches!(parse_off::<f64>(text), Err(MeshError::BoundaryEdge(..))));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_off::<f64>(""), Err(MeshError::Parse { .. })));
        assert!(matches!(parse_off::<f64>("PLY\n"), Err(MeshError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_off::<f64>("OFF\n1 0 0\n0 zero 0\n"),
            Err(MeshError::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_off::<f64>("OFF\n2 0 0\n0 0 0\n"), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn write_then_read() {
        let m = crate::mesh::icosphere::<f64>(1);
        let back = parse_off::<f64>(&write_off(&m)).unwrap();
        assert_eq!(back, m);
    }
}
