use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::polygon;
use crate::geometry::{GeometryError, PolygonalMesh};
use crate::Point;

/// Uniformly refines a mesh: every polygon with `n` vertices is split
/// through its centroid and edge midpoints into `n` quadrilateral children.
/// Returns the refined mesh together with the child-to-parent map. Edge
/// midpoints are shared exactly between neighbours, so the refined mesh
/// nests in the original one.
pub fn refine_uniform(mesh: &PolygonalMesh) -> Result<(PolygonalMesh, Vec<usize>), GeometryError> {
    let mut vertices: Vec<Point> = mesh.vertices().to_vec();
    let mut midpoint_of_edge: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, edge) in mesh.edges().iter().enumerate() {
        let a = mesh.vertex(edge.vertices[0]);
        let b = mesh.vertex(edge.vertices[1]);
        midpoint_of_edge.insert(i, vertices.len());
        vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }

    let mut elements: Vec<Vec<usize>> = Vec::new();
    let mut parent_map: Vec<usize> = Vec::new();
    for e in 0..mesh.n_elements() {
        let loop_ = mesh.element(e);
        let edge_ids = mesh.element_edge_indices(e);
        let n = loop_.len();
        let centroid_id = vertices.len();
        vertices.push(mesh.element_centroid(e));
        for k in 0..n {
            let v = loop_[k];
            let m_next = midpoint_of_edge[&edge_ids[k]];
            let m_prev = midpoint_of_edge[&edge_ids[(k + n - 1) % n]];
            let child = vec![v, m_next, centroid_id, m_prev];
            let coords: Vec<Point> = child.iter().map(|&i| vertices[i]).collect();
            if polygon::signed_area(&coords) <= 0.0 || !polygon::is_simple_loop(&coords) {
                return Err(GeometryError::RefinementFailed { element: e });
            }
            elements.push(child);
            parent_map.push(e);
        }
    }
    let refined = PolygonalMesh::new(vertices, elements)?;
    Ok((refined, parent_map))
}
