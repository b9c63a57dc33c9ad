//! Closed triangle meshes and the low Laplace–Beltrami spectrum of the
//! surfaces they approximate.

mod assemble;
mod eigensolve;
mod off;
mod shapes;

use std::collections::BTreeMap;

pub use assemble::{assemble, AssemblyOptions};
pub use eigensolve::{cluster_eigenvalues, eigensolve, EigResult, EigensolveOptions, MeshStats, CLUSTER_REL_GAP};
pub use off::{load_off, parse_off, write_off};
pub use shapes::{icosphere, octahedron};

use crate::error::MeshError;
use crate::Scalar;

/// A validated closed, consistently oriented, 2-manifold triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T> {
    vertices: Vec<[T; 3]>,
    faces: Vec<[usize; 3]>,
}

pub(crate) fn sub<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot3<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3<T: Scalar>(a: [T; 3]) -> T {
    dot3(a, a).sqrt()
}

impl<T: Scalar> TriangleMesh<T> {
    /// Validates indices, face areas, and the closed-manifold and orientation
    /// conditions on every edge.
    pub fn new(vertices: Vec<[T; 3]>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let count = vertices.len();
        let mut used = vec![false; count];
        let scale = vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(T::zero(), |m, &x| m.max(x.abs()))
            .max(T::min_positive_value());
        for (f, tri) in faces.iter().enumerate() {
            for &index in tri {
                if index >= count {
                    return Err(MeshError::IndexOutOfRange { face: f, index, count });
                }
                used[index] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateFace { face: f });
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let doubled_area = norm3(cross(sub(b, a), sub(c, a)));
            if !(doubled_area > T::eps() * scale * scale) {
                return Err(MeshError::DegenerateFace { face: f });
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(MeshError::UnreferencedVertex(v));
        }

        let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for tri in &faces {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push((a, b));
            }
        }
        for (&(a, b), uses) in &edges {
            match uses.len() {
                1 => return Err(MeshError::BoundaryEdge(a, b)),
                2 if uses[0] == uses[1] => return Err(MeshError::InconsistentOrientation(a, b)),
                2 => {}
                k => return Err(MeshError::NonManifoldEdge(a, b, k)),
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[[T; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Every edge borders exactly two faces, so `E = 3F / 2`.
    pub fn n_edges(&self) -> usize {
        3 * self.faces.len() / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.n_edges() as i64 + self.faces.len() as i64
    }

    pub fn connected_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for tri in &self.faces {
            for k in 1..3 {
                let (ra, rb) = (find(&mut parent, tri[0]), find(&mut parent, tri[k]));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        (0..self.vertices.len())
            .filter(|&v| find(&mut parent, v) == v)
            .count()
    }

    pub fn face_area(&self, f: usize) -> T {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        norm3(cross(sub(b, a), sub(c, a))) * T::lit(0.5)
    }

    pub fn area(&self) -> T {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Interior angles of face `f`, indexed by corner.
    pub fn face_angles(&self, f: usize) -> [T; 3] {
        let p = self.faces[f].map(|i| self.vertices[i]);
        std::array::from_fn(|k| {
            let u = sub(p[(k + 1) % 3], p[k]);
            let v = sub(p[(k + 2) % 3], p[k]);
            norm3(cross(u, v)).atan2(dot3(u, v))
        })
    }

    /// Smallest interior angle over all faces, in degrees, and the face attaining it.
    pub fn min_angle_deg(&self) -> (T, usize) {
        let mut best = (T::infinity(), 0);
        for f in 0..self.faces.len() {
            for a in self.face_angles(f) {
                if a < best.0 {
                    best = (a, f);
                }
            }
        }
        (best.0.to_degrees(), best.1)
    }

    pub fn translated(&self, offset: [T; 3]) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] + offset[0], v[1] + offset[1], v[2] + offset[2]])
                .collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v.map(|x| x * s)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Disjoint union; the result is revalidated.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self, MeshError> {
        let shift = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|t| t.map(|i| i + shift)));
        Self::new(vertices, faces)
    }
}
