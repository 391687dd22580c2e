use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Unstructured tetrahedral mesh. Elements are stored with positive orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    nodes: Vec<[f64; 3]>,
    elements: Vec<[usize; 4]>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn signed_volume(nodes: &[[f64; 3]], e: &[usize; 4]) -> f64 {
    let x0 = nodes[e[0]];
    det3(sub(nodes[e[1]], x0), sub(nodes[e[2]], x0), sub(nodes[e[3]], x0)) / 6.0
}

impl TetMesh {
    /// Validates indices, repairs inverted elements, and checks connectivity.
    /// Zero-volume elements are rejected with their index.
    pub fn new(nodes: Vec<[f64; 3]>, elements: Vec<[usize; 4]>) -> Result<Self> {
        let n = nodes.len();
        if n < 4 || elements.is_empty() {
            return Err(Error::InvalidMesh(format!(
                "need at least 4 nodes and 1 element, got {n} nodes and {} elements",
                elements.len()
            )));
        }
        let mut elements = elements;
        for (k, e) in elements.iter_mut().enumerate() {
            if let Some(&bad) = e.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!("element {k} references node {bad}, mesh has {n} nodes")));
            }
            let x0 = nodes[e[0]];
            let edge = (1..4)
                .map(|i| {
                    let d = sub(nodes[e[i]], x0);
                    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
                })
                .fold(0.0, f64::max);
            let vol = signed_volume(&nodes, e);
            if !(vol.abs() > 1e-12 * edge * edge * edge) {
                return Err(Error::DegenerateElement { element: k, volume: vol });
            }
            if vol < 0.0 {
                e.swap(2, 3);
            }
        }
        let mesh = Self { nodes, elements };
        mesh.check_connected()?;
        Ok(mesh)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut node_elements: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, e) in self.elements.iter().enumerate() {
            for &i in e {
                node_elements[i].push(k);
            }
        }
        if let Some(orphan) = node_elements.iter().position(|v| v.is_empty()) {
            return Err(Error::InvalidMesh(format!("node {orphan} belongs to no element")));
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut reached = 1;
        while let Some(i) = queue.pop_front() {
            for &k in &node_elements[i] {
                for &j in &self.elements[k] {
                    if !seen[j] {
                        seen[j] = true;
                        reached += 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        if reached != n {
            return Err(Error::InvalidMesh(format!(
                "mesh is not connected: {reached} of {n} nodes reachable from node 0"
            )));
        }
        Ok(())
    }

    /// Structured box `[origin, origin + lengths]` with `cells[d]` cells per axis,
    /// each cube split into six tetrahedra around its main diagonal.
    pub fn box_grid(cells: [usize; 3], lengths: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if cells.contains(&0) {
            return Err(Error::InvalidMesh(format!("box needs at least one cell per axis, got {cells:?}")));
        }
        let [nx, ny, nz] = [cells[0] + 1, cells[1] + 1, cells[2] + 1];
        let id = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
        let mut nodes = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    nodes.push([
                        origin[0] + lengths[0] * i as f64 / cells[0] as f64,
                        origin[1] + lengths[1] * j as f64 / cells[1] as f64,
                        origin[2] + lengths[2] * k as f64 / cells[2] as f64,
                    ]);
                }
            }
        }
        const PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut elements = Vec::with_capacity(6 * cells[0] * cells[1] * cells[2]);
        for k in 0..cells[2] {
            for j in 0..cells[1] {
                for i in 0..cells[0] {
                    for path in PATHS {
                        let mut corner = [i, j, k];
                        let mut tet = [id(i, j, k); 4];
                        for (step, &axis) in path.iter().enumerate() {
                            corner[axis] += 1;
                            tet[step + 1] = id(corner[0], corner[1], corner[2]);
                        }
                        elements.push(tet);
                    }
                }
            }
        }
        Self::new(nodes, elements)
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_volume(&self, k: usize) -> f64 {
        signed_volume(&self.nodes, &self.elements[k])
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.elements.len()).map(|k| self.element_volume(k)).sum()
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        for p in &mut self.nodes {
            for c in p.iter_mut() {
                *c *= factor;
            }
        }
        self
    }

    /// Gradients of the four barycentric (linear) basis functions on element `k`.
    pub fn basis_gradients(&self, k: usize) -> [[f64; 3]; 4] {
        let e = &self.elements[k];
        let x0 = self.nodes[e[0]];
        let c1 = sub(self.nodes[e[1]], x0);
        let c2 = sub(self.nodes[e[2]], x0);
        let c3 = sub(self.nodes[e[3]], x0);
        let det = det3(c1, c2, c3);
        // Rows of J^{-1} with J = [c1 c2 c3] are the cross products over det.
        let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let g1 = cross(c2, c3).map(|v| v / det);
        let g2 = cross(c3, c1).map(|v| v / det);
        let g3 = cross(c1, c2).map(|v| v / det);
        let g0 = [-(g1[0] + g2[0] + g3[0]), -(g1[1] + g2[1] + g3[1]), -(g1[2] + g2[2] + g3[2])];
        [g0, g1, g2, g3]
    }
}

/// Lumped mass (control-volume measure per node) and stiffness of the
/// vertex-centred finite volume scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MassStiffness {
    pub mass: Vec<f64>,
    pub stiffness: SparseOperator,
}

/// Vertex-centred finite volume assembly on linear tetrahedra.
///
/// With median-dual control volumes the flux matrix coincides with the linear
/// finite-element stiffness `K_ij = sum_e |e| grad(phi_i) . grad(phi_j)`, and each
/// node owns a quarter of every incident element.
pub fn build_fvm_tet(mesh: &TetMesh) -> Result<MassStiffness> {
    let n = mesh.n_nodes();
    let mut mass = vec![0.0; n];
    let mut triplets = Vec::with_capacity(16 * mesh.elements.len());
    for (k, e) in mesh.elements.iter().enumerate() {
        let vol = mesh.element_volume(k);
        if !(vol > 0.0) {
            return Err(Error::DegenerateElement { element: k, volume: vol });
        }
        let grads = mesh.basis_gradients(k);
        for a in 0..4 {
            mass[e[a]] += vol / 4.0;
            for b in 0..4 {
                let g = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1] + grads[a][2] * grads[b][2];
                triplets.push((e[a], e[b], vol * g));
            }
        }
    }
    Ok(MassStiffness {
        mass,
        stiffness: SparseOperator::from_triplets(n, &triplets),
    })
}
