//! Field snapshot format: one CSV row per element with its scaled-monomial
//! coefficients. Used to persist estimator payloads (reference fields) for
//! later comparison; coordinates-free, so the matching mesh and order must
//! be supplied on load.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use polyuq_core::fields::PiecewisePolyField;
use polyuq_core::geometry::PolygonalMesh;
use polyuq_core::vem::basis::monomial_count;

#[derive(Debug)]
pub enum FieldIoError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
    Shape { expected: usize, found: usize },
}

impl fmt::Display for FieldIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "io: {e}"),
            Self::Parse { line, message } => write!(f, "line {line}: {message}"),
            Self::Shape { expected, found } => write!(
                f,
                "snapshot has {found} coefficient rows but the mesh/order needs {expected}"
            ),
        }
    }
}

impl std::error::Error for FieldIoError {}

impl From<std::io::Error> for FieldIoError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Serializes a field; coefficients print with round-trip precision.
pub fn write_field(field: &PiecewisePolyField) -> String {
    let mut out = String::from("element,coefficients\n");
    for e in 0..field.mesh().n_elements() {
        let coeffs: Vec<String> = field
            .element_coeffs(e)
            .iter()
            .map(|c| format!("{c:?}"))
            .collect();
        out.push_str(&format!("{e},{}\n", coeffs.join(",")));
    }
    out
}

pub fn save_field(field: &PiecewisePolyField, path: &Path) -> Result<(), FieldIoError> {
    std::fs::write(path, write_field(field))?;
    Ok(())
}

/// Loads a snapshot onto the given mesh and order.
pub fn load_field(
    path: &Path,
    mesh: Arc<PolygonalMesh>,
    order: usize,
) -> Result<PiecewisePolyField, FieldIoError> {
    let text = std::fs::read_to_string(path)?;
    parse_field(&text, mesh, order)
}

pub fn parse_field(
    text: &str,
    mesh: Arc<PolygonalMesh>,
    order: usize,
) -> Result<PiecewisePolyField, FieldIoError> {
    let n_p = monomial_count(order);
    let n_el = mesh.n_elements();
    let mut coeffs = vec![0.0f64; n_el * n_p];
    let mut rows = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with("element") || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',');
        let e: usize = it
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| FieldIoError::Parse {
                line: ln,
                message: "bad element index".into(),
            })?;
        if e >= n_el {
            return Err(FieldIoError::Parse {
                line: ln,
                message: format!("element index {e} out of range"),
            });
        }
        let values: Vec<f64> = it
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| FieldIoError::Parse {
                    line: ln,
                    message: format!("bad coefficient `{t}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != n_p {
            return Err(FieldIoError::Parse {
                line: ln,
                message: format!("expected {n_p} coefficients, found {}", values.len()),
            });
        }
        coeffs[e * n_p..(e + 1) * n_p].copy_from_slice(&values);
        rows += 1;
    }
    if rows != n_el {
        return Err(FieldIoError::Shape {
            expected: n_el,
            found: rows,
        });
    }
    Ok(PiecewisePolyField::from_raw(mesh, order, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyuq_core::geometry::{MeshHierarchy, Rectangle};

    #[test]
    fn snapshot_round_trips_bit_exactly() {
        let mesh = MeshHierarchy::cartesian(1, 2, Rectangle::UNIT)
            .unwrap()
            .mesh(0)
            .clone();
        let n_p = monomial_count(2);
        let coeffs: Vec<f64> = (0..mesh.n_elements() * n_p)
            .map(|i| (i as f64 + 0.37) / 7.1)
            .collect();
        let field = PiecewisePolyField::from_raw(mesh.clone(), 2, coeffs);
        let text = write_field(&field);
        let again = parse_field(&text, mesh, 2).unwrap();
        for (a, b) in field.coeffs().iter().zip(again.coeffs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn wrong_row_count_is_reported() {
        let mesh = MeshHierarchy::cartesian(1, 2, Rectangle::UNIT)
            .unwrap()
            .mesh(0)
            .clone();
        let r = parse_field("element,coefficients\n0,1.0,0.0,0.0\n", mesh, 1);
        assert!(matches!(r, Err(FieldIoError::Shape { expected: 4, found: 1 })));
    }
}
