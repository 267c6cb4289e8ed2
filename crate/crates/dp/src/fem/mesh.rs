//! Simplicial meshes: intervals in 1D, triangles in 2D.
//!
//! Node coordinates are stored as `[f64; 2]` in both dimensions (y = 0 in
//! 1D) so gradients and quadrature points share one representation. Per
//! element the volume and the constant P1 basis gradients are precomputed.

use crate::error::{Error, Result};

/// Axis-aligned box domain, `dim` ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub dim: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BoxDomain {
    pub fn interval(a: f64, b: f64) -> Self {
        BoxDomain {
            dim: 1,
            lo: [a, 0.0],
            hi: [b, 0.0],
        }
    }

    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Self {
        BoxDomain { dim: 2, lo, hi }
    }

    pub fn unit_interval() -> Self {
        Self::interval(0.0, 1.0)
    }

    pub fn unit_square() -> Self {
        Self::rectangle([0.0, 0.0], [1.0, 1.0])
    }
}

#[derive(Debug)]
pub struct Mesh {
    pub dim: usize,
    /// Node coordinates; `[x, 0]` in 1D.
    pub nodes: Vec<[f64; 2]>,
    /// Flat connectivity, `dim + 1` node indices per element.
    pub elements: Vec<usize>,
    /// Indices of boundary nodes (Dirichlet set), sorted ascending.
    pub boundary: Vec<usize>,
    /// Dirichlet mask, one flag per node.
    pub is_boundary: Vec<bool>,
    /// Element measures (length in 1D, area in 2D).
    volumes: Vec<f64>,
    /// Constant basis gradients, `dim + 1` vectors per element.
    grads: Vec<[f64; 2]>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.volumes.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.dim + 1
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.nodes_per_element();
        &self.elements[e * k..(e + 1) * k]
    }

    pub fn volume(&self, e: usize) -> f64 {
        self.volumes[e]
    }

    /// Gradient of the local basis function `local` on element `e`.
    pub fn basis_gradient(&self, e: usize, local: usize) -> [f64; 2] {
        self.grads[e * self.nodes_per_element() + local]
    }

    /// Physical coordinates of the barycentric point `bary` on element `e`.
    pub fn point(&self, e: usize, bary: &[f64; 3]) -> [f64; 2] {
        let conn = self.element(e);
        let mut x = [0.0; 2];
        for (local, &node) in conn.iter().enumerate() {
            x[0] += bary[local] * self.nodes[node][0];
            x[1] += bary[local] * self.nodes[node][1];
        }
        x
    }

    /// Mesh size h: the longest element edge.
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for e in 0..self.n_elements() {
            let conn = self.element(e);
            for i in 0..conn.len() {
                for j in (i + 1)..conn.len() {
                    let a = self.nodes[conn[i]];
                    let b = self.nodes[conn[j]];
                    h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
                }
            }
        }
        h
    }

    /// Total measure of the domain.
    pub fn domain_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Build a conforming uniform mesh over an axis-aligned box.
    /// `resolution[i]` is the number of cells along axis i; 2D cells are
    /// split into two triangles.
    pub fn uniform(domain: BoxDomain, resolution: &[usize]) -> Result<Mesh> {
        if domain.dim != 1 && domain.dim != 2 {
            return Err(Error::Config(format!(
                "mesh dimension must be 1 or 2, got {}",
                domain.dim
            )));
        }
        if resolution.len() != domain.dim || resolution.iter().any(|&r| r == 0) {
            return Err(Error::Config(format!(
                "resolution must have {} positive entries, got {:?}",
                domain.dim, resolution
            )));
        }
        for axis in 0..domain.dim {
            if domain.hi[axis] <= domain.lo[axis] {
                return Err(Error::Config(format!(
                    "box side along axis {} must have positive length",
                    axis
                )));
            }
        }
        match domain.dim {
            1 => Self::uniform_1d(domain.lo[0], domain.hi[0], resolution[0]),
            _ => Self::uniform_2d(domain.lo, domain.hi, resolution[0], resolution[1]),
        }
    }

    fn uniform_1d(a: f64, b: f64, n: usize) -> Result<Mesh> {
        let h = (b - a) / n as f64;
        let nodes: Vec<[f64; 2]> = (0..=n).map(|i| [a + i as f64 * h, 0.0]).collect();
        let mut elements = Vec::with_capacity(2 * n);
        for i in 0..n {
            elements.push(i);
            elements.push(i + 1);
        }
        let boundary = vec![0, n];
        Self::from_parts(1, nodes, elements, boundary)
    }

    fn uniform_2d(lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize) -> Result<Mesh> {
        let hx = (hi[0] - lo[0]) / nx as f64;
        let hy = (hi[1] - lo[1]) / ny as f64;
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([lo[0] + i as f64 * hx, lo[1] + j as f64 * hy]);
            }
        }
        let mut elements = Vec::with_capacity(6 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                elements.extend_from_slice(&[a, b, c]);
                elements.extend_from_slice(&[a, c, d]);
            }
        }
        let mut boundary = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                if i == 0 || i == nx || j == 0 || j == ny {
                    boundary.push(idx(i, j));
                }
            }
        }
        boundary.sort_unstable();
        Self::from_parts(2, nodes, elements, boundary)
    }

    /// Assemble a mesh from raw parts, computing volumes and basis gradients
    /// and validating the structural invariants.
    pub fn from_parts(
        dim: usize,
        nodes: Vec<[f64; 2]>,
        elements: Vec<usize>,
        boundary: Vec<usize>,
    ) -> Result<Mesh> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("unsupported dimension {}", dim)));
        }
        let k = dim + 1;
        if elements.len() % k != 0 {
            return Err(Error::Config(
                "element connectivity length not divisible by nodes-per-element".into(),
            ));
        }
        let n_nodes = nodes.len();
        if let Some(&bad) = elements.iter().find(|&&i| i >= n_nodes) {
            return Err(Error::Config(format!(
                "element connectivity index {} out of range (n_nodes = {})",
                bad, n_nodes
            )));
        }
        if let Some(&bad) = boundary.iter().find(|&&i| i >= n_nodes) {
            return Err(Error::Config(format!(
                "boundary node index {} out of range (n_nodes = {})",
                bad, n_nodes
            )));
        }
        let n_elems = elements.len() / k;
        let mut volumes = Vec::with_capacity(n_elems);
        let mut grads = Vec::with_capacity(n_elems * k);
        for e in 0..n_elems {
            let conn = &elements[e * k..(e + 1) * k];
            match dim {
                1 => {
                    let x0 = nodes[conn[0]][0];
                    let x1 = nodes[conn[1]][0];
                    let h = x1 - x0;
                    if h <= 0.0 {
                        return Err(Error::Config(format!(
                            "1D element {} has non-positive length {}",
                            e, h
                        )));
                    }
                    volumes.push(h);
                    grads.push([-1.0 / h, 0.0]);
                    grads.push([1.0 / h, 0.0]);
                }
                _ => {
                    let v0 = nodes[conn[0]];
                    let v1 = nodes[conn[1]];
                    let v2 = nodes[conn[2]];
                    let signed_area2 = (v1[0] - v0[0]) * (v2[1] - v0[1])
                        - (v2[0] - v0[0]) * (v1[1] - v0[1]);
                    if signed_area2 <= 0.0 {
                        return Err(Error::Config(format!(
                            "triangle {} is degenerate or negatively oriented (2A = {})",
                            e, signed_area2
                        )));
                    }
                    volumes.push(0.5 * signed_area2);
                    grads.push([(v1[1] - v2[1]) / signed_area2, (v2[0] - v1[0]) / signed_area2]);
                    grads.push([(v2[1] - v0[1]) / signed_area2, (v0[0] - v2[0]) / signed_area2]);
                    grads.push([(v0[1] - v1[1]) / signed_area2, (v1[0] - v0[0]) / signed_area2]);
                }
            }
        }
        let mut is_boundary = vec![false; n_nodes];
        for &b in &boundary {
            is_boundary[b] = true;
        }
        let mut boundary = boundary;
        boundary.sort_unstable();
        boundary.dedup();
        Ok(Mesh {
            dim,
            nodes,
            elements,
            boundary,
            is_boundary,
            volumes,
            grads,
        })
    }
}

/// Mapping between full nodal indexing and the free (non-Dirichlet) subset.
#[derive(Debug, Clone)]
pub struct DofMap {
    /// Free node index -> full node index.
    pub free: Vec<usize>,
    /// Full node index -> free index, None on boundary nodes.
    pub full_to_free: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> DofMap {
        let mut free = Vec::new();
        let mut full_to_free = vec![None; mesh.n_nodes()];
        for node in 0..mesh.n_nodes() {
            if !mesh.is_boundary[node] {
                full_to_free[node] = Some(free.len());
                free.push(node);
            }
        }
        DofMap { free, full_to_free }
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_counts() {
        let mesh = Mesh::uniform(BoxDomain::unit_interval(), &[4]).unwrap();
        assert_eq!(mesh.n_nodes(), 5);
        assert_eq!(mesh.n_elements(), 4);
        assert_eq!(mesh.boundary, vec![0, 4]);
    }

    #[test]
    fn unit_square_counts() {
        let mesh = Mesh::uniform(BoxDomain::unit_square(), &[2, 2]).unwrap();
        assert_eq!(mesh.n_nodes(), 9);
        assert_eq!(mesh.n_elements(), 8);
        assert_eq!(mesh.boundary.len(), 8);
        assert!((mesh.domain_volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(matches!(
            Mesh::uniform(BoxDomain::unit_interval(), &[0]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_dimension_rejected() {
        let domain = BoxDomain {
            dim: 3,
            lo: [0.0; 2],
            hi: [1.0; 2],
        };
        assert!(matches!(Mesh::uniform(domain, &[2, 2]), Err(Error::Config(_))));
    }

    #[test]
    fn positive_volumes() {
        let mesh = Mesh::uniform(BoxDomain::unit_square(), &[3, 5]).unwrap();
        for e in 0..mesh.n_elements() {
            assert!(mesh.volume(e) > 0.0);
        }
    }

    #[test]
    fn dofmap_excludes_boundary() {
        let mesh = Mesh::uniform(BoxDomain::unit_interval(), &[4]).unwrap();
        let dofs = DofMap::new(&mesh);
        assert_eq!(dofs.n_free(), 3);
        assert_eq!(dofs.free, vec![1, 2, 3]);
        assert!(dofs.full_to_free[0].is_none());
    }
}
