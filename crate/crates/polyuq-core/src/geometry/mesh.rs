use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::polygon;
use crate::geometry::GeometryError;
use crate::Point;

/// Relative tolerance (times the domain diameter) below which two vertices
/// are merged at construction.
pub const VERTEX_MERGE_TOL: f64 = 1e-12;

/// Default lower bound on the ratio between the minimum vertex distance
/// within an element and the element diameter.
pub const DEFAULT_MIN_VERTEX_SPACING: f64 = 1e-3;

/// An edge of the mesh: its two vertex endpoints (smaller index first) and
/// the elements on either side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub elements: Vec<usize>,
}

/// A conforming mesh of simple, counterclockwise polygons.
///
/// Immutable after construction; cheap to share behind an `Arc`.
#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// `(element, local edge) -> edge index`; local edge `k` joins local
    /// vertices `k` and `k + 1`.
    element_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    element_diameter: Vec<f64>,
    element_area: Vec<f64>,
    element_centroid: Vec<Point>,
    mesh_size: f64,
}

impl PolygonalMesh {
    /// Validates and builds a mesh from raw vertex coordinates and per
    /// element counterclockwise vertex loops.
    pub fn new(vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Self, GeometryError> {
        Self::with_spacing_bound(vertices, elements, DEFAULT_MIN_VERTEX_SPACING)
    }

    /// As [`PolygonalMesh::new`] with an explicit minimum vertex spacing
    /// bound (relative to the element diameter).
    pub fn with_spacing_bound(
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
        min_spacing: f64,
    ) -> Result<Self, GeometryError> {
        if elements.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        let (vertices, remap) = dedup_vertices(vertices);
        let elements: Vec<Vec<usize>> = elements
            .into_iter()
            .map(|el| {
                let mut loop_: Vec<usize> = el.into_iter().map(|v| remap[v]).collect();
                loop_.dedup();
                if loop_.len() > 1 && loop_.first() == loop_.last() {
                    loop_.pop();
                }
                loop_
            })
            .collect();

        let n_vertices = vertices.len();
        let mut element_diameter = Vec::with_capacity(elements.len());
        let mut element_area = Vec::with_capacity(elements.len());
        let mut element_centroid = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            if el.len() < 3 {
                return Err(GeometryError::DegenerateElement { element: e });
            }
            for &v in el {
                if v >= n_vertices {
                    return Err(GeometryError::VertexIndexOutOfRange {
                        element: e,
                        vertex: v,
                    });
                }
            }
            let coords: Vec<Point> = el.iter().map(|&v| vertices[v]).collect();
            let area = polygon::signed_area(&coords);
            if !(area > 0.0) || !area.is_finite() {
                return Err(GeometryError::NotCounterClockwise { element: e });
            }
            if !polygon::is_simple_loop(&coords) {
                return Err(GeometryError::SelfIntersecting { element: e });
            }
            let diam = polygon::diameter(&coords);
            if !(diam > 0.0) || !diam.is_finite() {
                return Err(GeometryError::DegenerateElement { element: e });
            }
            let min_dist = polygon::min_vertex_distance(&coords);
            if min_dist < min_spacing * diam {
                return Err(GeometryError::VertexSpacing {
                    element: e,
                    ratio: min_dist / diam,
                });
            }
            element_diameter.push(diam);
            element_area.push(area);
            element_centroid.push(polygon::centroid(&coords));
        }

        // edge table, first-encounter order
        let mut edge_lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut element_edges: Vec<Vec<usize>> = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            let mut locals = Vec::with_capacity(el.len());
            for k in 0..el.len() {
                let a = el[k];
                let b = el[(k + 1) % el.len()];
                let key = (a.min(b), a.max(b));
                let idx = *edge_lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        elements: Vec::new(),
                    });
                    edges.len() - 1
                });
                edges[idx].elements.push(e);
                if edges[idx].elements.len() > 2 {
                    return Err(GeometryError::NonManifoldEdge {
                        vertices: key,
                        elements: edges[idx].elements.clone(),
                    });
                }
                locals.push(idx);
            }
            element_edges.push(locals);
        }

        let boundary_edge: Vec<bool> = edges.iter().map(|e| e.elements.len() == 1).collect();
        let mut boundary_vertex = vec![false; n_vertices];
        for (i, edge) in edges.iter().enumerate() {
            if boundary_edge[i] {
                boundary_vertex[edge.vertices[0]] = true;
                boundary_vertex[edge.vertices[1]] = true;
            }
        }
        let mesh_size = element_diameter.iter().cloned().fold(0.0, f64::max);

        Ok(Self {
            vertices,
            elements,
            edges,
            element_edges,
            boundary_vertex,
            boundary_edge,
            element_diameter,
            element_area,
            element_centroid,
            mesh_size,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e]
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn element_vertices(&self, e: usize) -> Vec<Point> {
        self.elements[e].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices around element `e`; entry `k` joins local vertices `k`
    /// and `k + 1`.
    pub fn element_edge_indices(&self, e: usize) -> &[usize] {
        &self.element_edges[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, i: usize) -> bool {
        self.boundary_edge[i]
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        self.element_diameter[e]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        self.element_area[e]
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        self.element_centroid[e]
    }

    /// Largest element diameter.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }
}

/// Merges vertices closer than `VERTEX_MERGE_TOL` times the point-cloud
/// diameter; returns the kept coordinates and an old-to-new index map.
fn dedup_vertices(vertices: Vec<Point>) -> (Vec<Point>, Vec<usize>) {
    let n = vertices.len();
    if n == 0 {
        return (vertices, Vec::new());
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in &vertices {
        for d in 0..2 {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    let diam = crate::math::hypot(hi[0] - lo[0], hi[1] - lo[1]);
    let tol2 = (VERTEX_MERGE_TOL * diam) * (VERTEX_MERGE_TOL * diam);

    // sort by x to limit the candidate window
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        vertices[a][0]
            .partial_cmp(&vertices[b][0])
            .expect("NaN coordinate")
            .then(
                vertices[a][1]
                    .partial_cmp(&vertices[b][1])
                    .expect("NaN coordinate"),
            )
    });
    let tol = VERTEX_MERGE_TOL * diam;
    let mut remap = vec![usize::MAX; n];
    let mut kept: Vec<Point> = Vec::with_capacity(n);
    let mut kept_of_sorted: Vec<(usize, usize)> = Vec::with_capacity(n); // (sorted pos, kept id)
    for (pos, &i) in order.iter().enumerate() {
        let p = vertices[i];
        let mut found = None;
        for &(qpos, kid) in kept_of_sorted.iter().rev() {
            if p[0] - vertices[order[qpos]][0] > tol {
                break;
            }
            if polygon::dist2(p, kept[kid]) <= tol2 {
                found = Some(kid);
                break;
            }
        }
        let kid = match found {
            Some(k) => k,
            None => {
                kept.push(p);
                kept.len() - 1
            }
        };
        remap[i] = kid;
        kept_of_sorted.push((pos, kid));
    }
    // keep original ordering of first occurrences
    let mut final_ids = vec![usize::MAX; kept.len()];
    let mut final_pts: Vec<Point> = Vec::with_capacity(kept.len());
    let mut final_remap = vec![usize::MAX; n];
    for i in 0..n {
        let kid = remap[i];
        if final_ids[kid] == usize::MAX {
            final_ids[kid] = final_pts.len();
            final_pts.push(kept[kid]);
        }
        final_remap[i] = final_ids[kid];
    }
    (final_pts, final_remap)
}
