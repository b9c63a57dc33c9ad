use super::{cross, dot3, norm3, sub, TriangleMesh};
use crate::error::{MeshError, Result};
use crate::linalg::CsrMatrix;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Reject meshes whose smallest angle is below `min_angle_deg`.
    pub strict: bool,
    pub min_angle_deg: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            strict: false,
            min_angle_deg: 1.0,
        }
    }
}

/// Cotangent stiffness matrix and lumped (barycentric) mass diagonal.
///
/// For each face and each corner with angle `α`, the edge opposite the
/// corner receives `cot α / 2`: `K_ij -= w`, `K_ii += w`, `K_jj += w`.
/// Each vertex receives a third of the area of every incident face.
pub fn assemble<T: Scalar>(
    mesh: &TriangleMesh<T>,
    options: &AssemblyOptions,
) -> Result<(CsrMatrix<T>, Vec<T>)> {
    if options.strict {
        let (angle, face) = mesh.min_angle_deg();
        if angle.as_f64() < options.min_angle_deg {
            return Err(MeshError::IllConditioned {
                face,
                angle_deg: angle.as_f64(),
                floor_deg: options.min_angle_deg,
            }
            .into());
        }
    }
    let n = mesh.vertices().len();
    let half = T::lit(0.5);
    let third = T::one() / T::lit(3.0);
    let mut triplets = Vec::with_capacity(mesh.faces().len() * 9);
    let mut mass = vec![T::zero(); n];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let p = tri.map(|i| mesh.vertices()[i]);
        for k in 0..3 {
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let u = sub(p[(k + 1) % 3], p[k]);
            let v = sub(p[(k + 2) % 3], p[k]);
            let w = half * dot3(u, v) / norm3(cross(u, v));
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
            triplets.push((i, i, w));
            triplets.push((j, j, w));
        }
        let share = mesh.face_area(f) * third;
        for &i in tri {
            mass[i] += share;
        }
    }
    Ok((CsrMatrix::from_triplets(n, n, &triplets), mass))
}
