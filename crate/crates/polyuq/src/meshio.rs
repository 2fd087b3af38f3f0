//! The text mesh format: header `polymesh 1`, a vertex block
//! `V <n>` with `x y` lines, and an element block `E <m>` with
//! whitespace-separated 0-based counterclockwise vertex indices per line.
//! Boundary entities are inferred from edge adjacency after loading.

use std::fmt;
use std::fs;
use std::path::Path;

use polyuq_core::geometry::{GeometryError, PolygonalMesh};
use polyuq_core::Point;

#[derive(Debug)]
pub enum MeshIoError {
    Io(std::io::Error),
    /// Parse failure with the 1-based line number.
    Parse { line: usize, message: String },
    /// Structural failure reported by the mesh validator.
    Topology(GeometryError),
}

impl fmt::Display for MeshIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "io: {e}"),
            Self::Parse { line, message } => write!(f, "line {line}: {message}"),
            Self::Topology(e) => write!(f, "topology: {e}"),
        }
    }
}

impl std::error::Error for MeshIoError {}

impl From<std::io::Error> for MeshIoError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Parses a mesh from its text representation. Clockwise element loops are
/// reoriented and reported as warnings rather than rejected.
pub fn parse_mesh(text: &str) -> Result<(PolygonalMesh, Vec<String>), MeshIoError> {
    let mut warnings = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    if header != "polymesh 1" {
        return Err(parse_err(line_no, "expected header `polymesh 1`"));
    }

    let (line_no, vdecl) = lines
        .next()
        .ok_or_else(|| parse_err(line_no, "missing vertex block"))?;
    let n_vertices = parse_count(line_no, vdecl, 'V')?;
    let mut vertices: Vec<Point> = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(line_no, "vertex block ends early"))?;
        let mut it = l.split_whitespace();
        let x = parse_f64(ln, it.next())?;
        let y = parse_f64(ln, it.next())?;
        if it.next().is_some() {
            return Err(parse_err(ln, "expected exactly two coordinates"));
        }
        vertices.push([x, y]);
    }

    let (line_no, edecl) = lines
        .next()
        .ok_or_else(|| parse_err(line_no, "missing element block"))?;
    let n_elements = parse_count(line_no, edecl, 'E')?;
    let mut elements: Vec<Vec<usize>> = Vec::with_capacity(n_elements);
    for _ in 0..n_elements {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(line_no, "element block ends early"))?;
        let loop_: Vec<usize> = l
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| parse_err(ln, &format!("bad vertex index `{tok}`")))
            })
            .collect::<Result<_, _>>()?;
        if loop_.len() < 3 {
            return Err(parse_err(ln, "element needs at least three vertices"));
        }
        for &v in &loop_ {
            if v >= n_vertices {
                return Err(parse_err(ln, &format!("vertex index {v} out of range")));
            }
        }
        elements.push(loop_);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after element block"));
    }

    // reorient clockwise loops
    for (e, loop_) in elements.iter_mut().enumerate() {
        let coords: Vec<Point> = loop_.iter().map(|&v| vertices[v]).collect();
        if polyuq_core::geometry::polygon::signed_area(&coords) < 0.0 {
            loop_.reverse();
            warnings.push(format!("element {e}: clockwise loop reoriented"));
        }
    }

    let mesh = PolygonalMesh::new(vertices, elements).map_err(MeshIoError::Topology)?;
    Ok((mesh, warnings))
}

/// Loads and validates a mesh file.
pub fn load_mesh(path: &Path) -> Result<(PolygonalMesh, Vec<String>), MeshIoError> {
    let text = fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Serializes a mesh; coordinates print with enough digits to round-trip
/// bit-exactly.
pub fn write_mesh(mesh: &PolygonalMesh) -> String {
    let mut out = String::from("polymesh 1\n");
    out.push_str(&format!("V {}\n", mesh.n_vertices()));
    for v in mesh.vertices() {
        out.push_str(&format!("{:?} {:?}\n", v[0], v[1]));
    }
    out.push_str(&format!("E {}\n", mesh.n_elements()));
    for e in 0..mesh.n_elements() {
        let idx: Vec<String> = mesh.element(e).iter().map(|v| v.to_string()).collect();
        out.push_str(&idx.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_mesh(mesh: &PolygonalMesh, path: &Path) -> Result<(), MeshIoError> {
    fs::write(path, write_mesh(mesh))?;
    Ok(())
}

/// A deterministically jittered `n0 x n0` quadrilateral mesh of the unit
/// square: interior vertices move by at most `amplitude` cell widths.
/// Refining it uniformly yields nested polygonal meshes with no accidental
/// symmetries (uniform grids make symmetric functionals cancel exactly,
/// which hides convergence orders).
pub fn jittered_quad_mesh(
    n0: usize,
    amplitude: f64,
    seed: u64,
) -> Result<PolygonalMesh, GeometryError> {
    assert!(n0 >= 1 && amplitude >= 0.0 && amplitude < 0.45);
    let stream = polyuq_core::stochastic::SampleStream::new(seed, 0x6a697474); // "jitt"
    let s = 1.0 / n0 as f64;
    let mut vertices = Vec::with_capacity((n0 + 1) * (n0 + 1));
    for j in 0..=n0 {
        for i in 0..=n0 {
            let mut x = i as f64 * s;
            let mut y = j as f64 * s;
            if i > 0 && i < n0 && j > 0 && j < n0 {
                x += amplitude * s * stream.uniform(i, j, 0, -1.0, 1.0);
                y += amplitude * s * stream.uniform(i, j, 1, -1.0, 1.0);
            }
            vertices.push([x, y]);
        }
    }
    let vid = |i: usize, j: usize| j * (n0 + 1) + i;
    let mut elements = Vec::with_capacity(n0 * n0);
    for j in 0..n0 {
        for i in 0..n0 {
            elements.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    PolygonalMesh::new(vertices, elements)
}

fn parse_err(line: usize, message: &str) -> MeshIoError {
    MeshIoError::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_f64(line: usize, tok: Option<&str>) -> Result<f64, MeshIoError> {
    let tok = tok.ok_or_else(|| parse_err(line, "expected a coordinate"))?;
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, &format!("bad coordinate `{tok}`")))
}

fn parse_count(line: usize, decl: &str, tag: char) -> Result<usize, MeshIoError> {
    let mut it = decl.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(t), Some(n), None) if t.len() == 1 && t.starts_with(tag) => n
            .parse::<usize>()
            .map_err(|_| parse_err(line, &format!("bad count `{n}`"))),
        _ => Err(parse_err(line, &format!("expected `{tag} <count>`"))),
    }
}
