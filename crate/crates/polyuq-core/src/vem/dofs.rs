use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{gauss_lobatto, PolygonalMesh};
use crate::Point;

/// Global degree-of-freedom enumeration of the order-`p` space on a mesh:
/// vertex values first, then the `p - 1` interior Gauss–Lobatto nodes of
/// every edge, then `p(p-1)/2` scaled-monomial moments per element.
///
/// Edge-interior nodes are ordered from the edge's smaller global vertex to
/// the larger one, so the two adjacent elements address the same geometric
/// point with the same global index.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub p: usize,
    n_vertices: usize,
    n_edges: usize,
    n_elements: usize,
    /// Homogeneous Dirichlet mask (boundary vertex and boundary edge DOFs).
    dirichlet: Vec<bool>,
    /// Global DOF -> free index, or `usize::MAX` for constrained DOFs.
    free_index: Vec<usize>,
    /// Global DOF -> index among the constrained DOFs, or `usize::MAX`.
    constrained_index: Vec<usize>,
    n_free: usize,
    local_to_global: Vec<Vec<usize>>,
}

impl DofLayout {
    pub fn new(mesh: &PolygonalMesh, p: usize) -> Self {
        assert!(p >= 1, "order must be at least 1");
        let n_vertices = mesh.n_vertices();
        let n_edges = mesh.n_edges();
        let n_elements = mesh.n_elements();
        let per_edge = p - 1;
        let per_elem = p * (p - 1) / 2;
        let total = n_vertices + per_edge * n_edges + per_elem * n_elements;

        let mut dirichlet = vec![false; total];
        for v in 0..n_vertices {
            if mesh.is_boundary_vertex(v) {
                dirichlet[v] = true;
            }
        }
        for e in 0..n_edges {
            if mesh.is_boundary_edge(e) {
                for j in 0..per_edge {
                    dirichlet[n_vertices + e * per_edge + j] = true;
                }
            }
        }

        let mut free_index = vec![usize::MAX; total];
        let mut constrained_index = vec![usize::MAX; total];
        let mut n_free = 0;
        let mut n_constrained = 0;
        for g in 0..total {
            if dirichlet[g] {
                constrained_index[g] = n_constrained;
                n_constrained += 1;
            } else {
                free_index[g] = n_free;
                n_free += 1;
            }
        }

        let mut local_to_global = Vec::with_capacity(n_elements);
        for e in 0..n_elements {
            let loop_ = mesh.element(e);
            let edge_ids = mesh.element_edge_indices(e);
            let mut map = Vec::with_capacity(loop_.len() * p + per_elem);
            map.extend_from_slice(loop_);
            for &edge in edge_ids {
                for j in 0..per_edge {
                    map.push(n_vertices + edge * per_edge + j);
                }
            }
            let base = n_vertices + per_edge * n_edges + e * per_elem;
            for m in 0..per_elem {
                map.push(base + m);
            }
            local_to_global.push(map);
        }

        Self {
            p,
            n_vertices,
            n_edges,
            n_elements,
            dirichlet,
            free_index,
            constrained_index,
            n_free,
            local_to_global,
        }
    }

    pub fn total(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn is_dirichlet(&self, g: usize) -> bool {
        self.dirichlet[g]
    }

    /// Free (interior) index of a global DOF, if unconstrained.
    pub fn free_index(&self, g: usize) -> Option<usize> {
        let f = self.free_index[g];
        (f != usize::MAX).then_some(f)
    }

    /// Index of a global DOF among the constrained (Dirichlet) DOFs.
    pub fn constrained_index(&self, g: usize) -> Option<usize> {
        let c = self.constrained_index[g];
        (c != usize::MAX).then_some(c)
    }

    pub fn local_to_global(&self, element: usize) -> &[usize] {
        &self.local_to_global[element]
    }

    /// Local DOF count of an element with `n_e` vertices.
    pub fn local_dim(&self, n_e: usize) -> usize {
        n_e * self.p + self.p * (self.p - 1) / 2
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edge_dofs(&self) -> usize {
        (self.p - 1) * self.n_edges
    }

    pub fn n_moment_dofs(&self) -> usize {
        self.n_elements * self.p * (self.p - 1) / 2
    }

    /// Geometric positions of the vertex and edge-interior DOFs (moment
    /// DOFs have no node); indexed by global DOF.
    pub fn node_positions(&self, mesh: &PolygonalMesh) -> Vec<Option<Point>> {
        let mut pos: Vec<Option<Point>> = vec![None; self.total()];
        for v in 0..self.n_vertices {
            pos[v] = Some(mesh.vertex(v));
        }
        if self.p >= 2 {
            let nodes = gauss_lobatto(self.p + 1);
            for e in 0..self.n_edges {
                let [a, b] = mesh.edge(e).vertices;
                let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
                for j in 0..(self.p - 1) {
                    let t = nodes[j + 1].0; // interior node, in (-1, 1)
                    let s = 0.5 * (t + 1.0);
                    pos[self.n_vertices + e * (self.p - 1) + j] = Some([
                        pa[0] + s * (pb[0] - pa[0]),
                        pa[1] + s * (pb[1] - pa[1]),
                    ]);
                }
            }
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MeshHierarchy, Rectangle};

    #[test]
    fn local_and_global_dimensions() {
        let h = MeshHierarchy::cartesian(1, 2, Rectangle::UNIT).unwrap();
        let mesh = h.mesh(0); // 2x2 cells: 9 vertices, 12 edges, 4 elements
        for p in 1..=3 {
            let layout = DofLayout::new(mesh, p);
            assert_eq!(layout.local_dim(4), 4 * p + p * (p - 1) / 2);
            assert_eq!(
                layout.total(),
                9 + (p - 1) * 12 + 4 * p * (p - 1) / 2
            );
            for e in 0..4 {
                assert_eq!(layout.local_to_global(e).len(), layout.local_dim(4));
            }
        }
        // p = 2 on the unit square: local dimension 9 = 4 * 2 + 1
        let single = MeshHierarchy::cartesian(1, 1, Rectangle::UNIT).unwrap();
        let layout = DofLayout::new(single.mesh(0), 2);
        assert_eq!(layout.local_dim(4), 9);
    }

    #[test]
    fn shared_edge_dofs_have_identical_global_ids_and_positions() {
        let h = MeshHierarchy::cartesian(1, 2, Rectangle::UNIT).unwrap();
        let mesh = h.mesh(0);
        let layout = DofLayout::new(mesh, 3);
        let pos = layout.node_positions(mesh);
        // find an interior edge and its two elements
        let (edge_id, edge) = mesh
            .edges()
            .iter()
            .enumerate()
            .find(|(_, e)| e.elements.len() == 2)
            .expect("interior edge");
        let (e1, e2) = (edge.elements[0], edge.elements[1]);
        let globals_of = |el: usize| -> Vec<usize> {
            let k = mesh
                .element_edge_indices(el)
                .iter()
                .position(|&ed| ed == edge_id)
                .unwrap();
            let n_e = mesh.element(el).len();
            (0..2).map(|j| layout.local_to_global(el)[n_e + k * 2 + j]).collect()
        };
        assert_eq!(globals_of(e1), globals_of(e2));
        for g in globals_of(e1) {
            assert!(pos[g].is_some());
            assert!(!layout.is_dirichlet(g) || mesh.is_boundary_edge(edge_id));
        }
    }

    #[test]
    fn dirichlet_mask_on_2x2_mesh_p1_leaves_one_free_dof() {
        let h = MeshHierarchy::cartesian(1, 2, Rectangle::UNIT).unwrap();
        let layout = DofLayout::new(h.mesh(0), 1);
        assert_eq!(layout.n_free(), 1);
        assert_eq!(layout.free_index(4), Some(0)); // the single interior vertex
    }
}
