use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::refine::refine_uniform;
use crate::geometry::{GeometryError, PolygonalMesh};
use crate::math;

/// An axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rectangle {
    pub const UNIT: Rectangle = Rectangle {
        x0: 0.0,
        y0: 0.0,
        x1: 1.0,
        y1: 1.0,
    };

    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// A sequence of nested meshes, coarsest first, with child-to-parent maps
/// between consecutive levels.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    meshes: Vec<Arc<PolygonalMesh>>,
    /// `parent_maps[l][child] = parent`, mapping elements of level `l + 1`
    /// (0-based) to elements of level `l`.
    parent_maps: Vec<Vec<usize>>,
}

impl MeshHierarchy {
    /// Builds `levels` nested Cartesian meshes of square cells on `domain`.
    /// Level `l` (1-based) has `n0 * 2^(l-1)` cells along the shorter side;
    /// the longer side must carry an integer number of the same square
    /// cells. Mesh sizes are element diameters, so they halve per level.
    pub fn cartesian(levels: usize, n0: usize, domain: Rectangle) -> Result<Self, GeometryError> {
        if levels == 0 || n0 == 0 {
            return Err(GeometryError::InvalidHierarchyParameters);
        }
        let (w, h) = (domain.width(), domain.height());
        if !(w > 0.0) || !(h > 0.0) {
            return Err(GeometryError::InvalidHierarchyParameters);
        }
        let short = w.min(h);
        let cell = short / n0 as f64;
        let nx0 = math::floor(w / cell + 0.5) as usize;
        let ny0 = math::floor(h / cell + 0.5) as usize;
        if math::abs(nx0 as f64 * cell - w) > 1e-9 * short
            || math::abs(ny0 as f64 * cell - h) > 1e-9 * short
        {
            return Err(GeometryError::NonCommensurableDomain);
        }
        // guard the vertex count of the finest level
        let fine_factor = 1usize
            .checked_shl(levels as u32 - 1)
            .ok_or(GeometryError::HierarchyTooLarge)?;
        let nx_fine = nx0
            .checked_mul(fine_factor)
            .ok_or(GeometryError::HierarchyTooLarge)?;
        let ny_fine = ny0
            .checked_mul(fine_factor)
            .ok_or(GeometryError::HierarchyTooLarge)?;
        nx_fine
            .checked_add(1)
            .and_then(|a| a.checked_mul(ny_fine.checked_add(1)?))
            .filter(|&n| n < u32::MAX as usize)
            .ok_or(GeometryError::HierarchyTooLarge)?;

        let mut meshes = Vec::with_capacity(levels);
        let mut parent_maps = Vec::with_capacity(levels.saturating_sub(1));
        for l in 0..levels {
            let f = 1usize << l;
            let (nx, ny) = (nx0 * f, ny0 * f);
            meshes.push(Arc::new(cartesian_grid(domain, nx, ny)?));
            if l > 0 {
                let coarse_nx = nx0 * (f >> 1);
                let mut map = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        map.push((j / 2) * coarse_nx + i / 2);
                    }
                }
                parent_maps.push(map);
            }
        }
        Ok(Self {
            meshes,
            parent_maps,
        })
    }

    /// Builds a hierarchy by uniformly refining `coarse` `levels - 1` times.
    pub fn by_refinement(
        coarse: PolygonalMesh,
        levels: usize,
    ) -> Result<Self, GeometryError> {
        if levels == 0 {
            return Err(GeometryError::InvalidHierarchyParameters);
        }
        let mut meshes = vec![Arc::new(coarse)];
        let mut parent_maps = Vec::new();
        for _ in 1..levels {
            let (fine, map) = refine_uniform(meshes.last().expect("nonempty"))?;
            meshes.push(Arc::new(fine));
            parent_maps.push(map);
        }
        Ok(Self {
            meshes,
            parent_maps,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.meshes.len()
    }

    /// Mesh of 0-based level `l`.
    pub fn mesh(&self, l: usize) -> &Arc<PolygonalMesh> {
        &self.meshes[l]
    }

    pub fn finest(&self) -> &Arc<PolygonalMesh> {
        self.meshes.last().expect("hierarchy has at least one level")
    }

    /// Parent element (on level `l - 1`) of `element` on level `l`.
    pub fn parent(&self, l: usize, element: usize) -> usize {
        self.parent_maps[l - 1][element]
    }

    pub fn parent_map(&self, l: usize) -> &[usize] {
        &self.parent_maps[l - 1]
    }

    /// Mesh size (largest element diameter) of level `l`.
    pub fn mesh_size(&self, l: usize) -> f64 {
        self.meshes[l].mesh_size()
    }

    /// Global degrees of freedom of the order-`p` space on level `l`.
    pub fn dof_count(&self, l: usize, p: usize) -> usize {
        let m = &self.meshes[l];
        m.n_vertices() + (p - 1) * m.n_edges() + m.n_elements() * p * (p - 1) / 2
    }

    /// Ancestor of `element` (on level `from`) at the coarser level `to`.
    pub fn ancestor(&self, from: usize, element: usize, to: usize) -> usize {
        assert!(to <= from);
        let mut e = element;
        for l in ((to + 1)..=from).rev() {
            e = self.parent(l, e);
        }
        e
    }
}

fn cartesian_grid(domain: Rectangle, nx: usize, ny: usize) -> Result<PolygonalMesh, GeometryError> {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // endpoints exact, interior points affine
            let x = if i == nx {
                domain.x1
            } else {
                domain.x0 + (domain.x1 - domain.x0) * (i as f64 / nx as f64)
            };
            let y = if j == ny {
                domain.y1
            } else {
                domain.y0 + (domain.y1 - domain.y0) * (j as f64 / ny as f64)
            };
            vertices.push([x, y]);
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    PolygonalMesh::new(vertices, elements)
}
