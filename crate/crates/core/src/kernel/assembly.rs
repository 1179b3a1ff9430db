use std::collections::BTreeMap;

use super::matrix::DenseMatrix;
use super::{Dof, FrameElement, KernelError, StructModel};

/// Global stiffness and lumped mass over the free degrees of freedom.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub k: DenseMatrix,
    /// Diagonal of the lumped mass matrix.
    pub m: Vec<f64>,
    /// Row/column order of `k` and `m`.
    pub dofs: Vec<(i64, Dof)>,
    index: BTreeMap<(i64, Dof), usize>,
}

impl Assembled {
    pub fn index_of(&self, node: i64, dof: Dof) -> Option<usize> {
        self.index.get(&(node, dof)).copied()
    }
}

/// 6×6 element stiffness in local axes, DOF order (u1, v1, θ1, u2, v2, θ2).
pub fn element_stiffness_local(e: f64, a: f64, i: f64, length: f64) -> [[f64; 6]; 6] {
    let ea = e * a / length;
    let k1 = 12.0 * e * i / length.powi(3);
    let k2 = 6.0 * e * i / length.powi(2);
    let k3 = 4.0 * e * i / length;
    let k4 = 2.0 * e * i / length;
    [
        [ea, 0.0, 0.0, -ea, 0.0, 0.0],
        [0.0, k1, k2, 0.0, -k1, k2],
        [0.0, k2, k3, 0.0, -k2, k4],
        [-ea, 0.0, 0.0, ea, 0.0, 0.0],
        [0.0, -k1, -k2, 0.0, k1, -k2],
        [0.0, k2, k4, 0.0, -k2, k3],
    ]
}

/// Element stiffness rotated to global axes, `Tᵀ k T`.
pub fn element_stiffness_global(
    el: &FrameElement,
    xi: (f64, f64),
    xj: (f64, f64),
) -> Result<[[f64; 6]; 6], KernelError> {
    let (dx, dy) = (xj.0 - xi.0, xj.1 - xi.1);
    let length = dx.hypot(dy);
    if !(length > 0.0) {
        return Err(KernelError::SingularGeometry { element: el.tag });
    }
    let (c, s) = (dx / length, dy / length);
    let local = element_stiffness_local(el.e, el.a, el.i, length);
    let mut t = [[0.0; 6]; 6];
    for b in [0, 3] {
        t[b][b] = c;
        t[b][b + 1] = s;
        t[b + 1][b] = -s;
        t[b + 1][b + 1] = c;
        t[b + 2][b + 2] = 1.0;
    }
    let mut kt = [[0.0; 6]; 6];
    for r in 0..6 {
        for col in 0..6 {
            kt[r][col] = (0..6).map(|m| local[r][m] * t[m][col]).sum();
        }
    }
    let mut out = [[0.0; 6]; 6];
    for r in 0..6 {
        for col in 0..6 {
            out[r][col] = (0..6).map(|m| t[m][r] * kt[m][col]).sum();
        }
    }
    Ok(out)
}

pub fn assemble(model: &StructModel) -> Result<Assembled, KernelError> {
    if model.elements.is_empty() {
        return Err(KernelError::EmptyModel);
    }
    let mut dofs = Vec::new();
    let mut index = BTreeMap::new();
    for &node in model.nodes.keys() {
        for dof in Dof::ALL {
            if !model.fixed_dofs.contains(&(node, dof)) {
                index.insert((node, dof), dofs.len());
                dofs.push((node, dof));
            }
        }
    }
    if dofs.is_empty() {
        return Err(KernelError::EmptyModel);
    }
    let n = dofs.len();
    let mut k = DenseMatrix::zeros(n, n);
    for el in &model.elements {
        let coord = |node: i64| {
            model
                .nodes
                .get(&node)
                .copied()
                .ok_or(KernelError::MissingNode { element: el.tag, node })
        };
        let ke = element_stiffness_global(el, coord(el.node_i)?, coord(el.node_j)?)?;
        let slots: Vec<Option<usize>> = [el.node_i, el.node_j]
            .iter()
            .flat_map(|&node| Dof::ALL.map(|d| index.get(&(node, d)).copied()))
            .collect();
        for (r, gr) in slots.iter().enumerate() {
            let Some(gr) = *gr else { continue };
            for (c, gc) in slots.iter().enumerate() {
                if let Some(gc) = *gc {
                    k[(gr, gc)] += ke[r][c];
                }
            }
        }
    }
    let m = dofs
        .iter()
        .map(|key| model.masses.get(key).copied().unwrap_or(0.0))
        .collect();
    Ok(Assembled { k, m, dofs, index })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(e: f64, a: f64, i: f64, l: f64) -> StructModel {
        let mut m = StructModel::default();
        m.nodes.insert(1, (0.0, 0.0));
        m.nodes.insert(2, (0.0, l));
        for d in Dof::ALL {
            m.fixed_dofs.insert((1, d));
        }
        m.elements.push(FrameElement { tag: 1, node_i: 1, node_j: 2, e, a, i });
        m
    }

    #[test]
    fn vertical_column_axial_term() {
        let (e, a, i, l) = (2.0e11, 0.01, 8.0e-5, 3.0);
        let asm = assemble(&column(e, a, i, l)).unwrap();
        assert_eq!(asm.dofs.len(), 3);
        let uy = asm.index_of(2, Dof::Uy).unwrap();
        let ux = asm.index_of(2, Dof::Ux).unwrap();
        let rz = asm.index_of(2, Dof::Rz).unwrap();
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        assert!(rel(asm.k[(uy, uy)], e * a / l) < 1e-12);
        assert!(rel(asm.k[(ux, ux)], 12.0 * e * i / l.powi(3)) < 1e-12);
        assert!(rel(asm.k[(rz, rz)], 4.0 * e * i / l) < 1e-12);
        assert!(rel(asm.k[(ux, rz)].abs(), 6.0 * e * i / l.powi(2)) < 1e-12);
        assert!(asm.k.asymmetry() < 1e-10);
    }

    #[test]
    fn parallel_columns_into_rigid_mass_dof() {
        // Two columns sharing one lateral DOF; vertical and rotation restrained at the top.
        let (e, a, i, l) = (3.0e10, 0.25, 5.2e-3, 3.5);
        let mut m = StructModel::default();
        for (tag, x) in [(1, 0.0), (2, 6.0)] {
            m.nodes.insert(tag, (x, 0.0));
            for d in Dof::ALL {
                m.fixed_dofs.insert((tag, d));
            }
        }
        m.nodes.insert(3, (0.0, l));
        m.fixed_dofs.insert((3, Dof::Uy));
        m.fixed_dofs.insert((3, Dof::Rz));
        m.elements.push(FrameElement { tag: 1, node_i: 1, node_j: 3, e, a, i });
        // The second column is drawn to a coincident top node so both land on one DOF.
        m.nodes.insert(4, (6.0, l));
        m.elements.push(FrameElement { tag: 2, node_i: 2, node_j: 4, e, a, i });
        m.fixed_dofs.insert((4, Dof::Uy));
        m.fixed_dofs.insert((4, Dof::Rz));
        let asm = assemble(&m).unwrap();
        let k3 = asm.k[(asm.index_of(3, Dof::Ux).unwrap(), asm.index_of(3, Dof::Ux).unwrap())];
        let k4 = asm.k[(asm.index_of(4, Dof::Ux).unwrap(), asm.index_of(4, Dof::Ux).unwrap())];
        let want = 2.0 * 12.0 * e * i / l.powi(3);
        assert!(((k3 + k4 - want) / want).abs() < 1e-12);
    }

    #[test]
    fn inclined_element_is_symmetric() {
        let mut m = column(2.0e11, 0.01, 1e-4, 1.0);
        m.nodes.insert(2, (3.0, 4.0));
        let asm = assemble(&m).unwrap();
        assert!(asm.k.asymmetry() < 1e-10);
    }

    #[test]
    fn errors() {
        let empty = StructModel::default();
        assert_eq!(assemble(&empty).unwrap_err(), KernelError::EmptyModel);
        let mut zero = column(1.0, 1.0, 1.0, 1.0);
        zero.nodes.insert(2, (0.0, 0.0));
        assert_eq!(assemble(&zero).unwrap_err(), KernelError::SingularGeometry { element: 1 });
        let mut fixed = column(1.0, 1.0, 1.0, 1.0);
        for d in Dof::ALL {
            fixed.fixed_dofs.insert((2, d));
        }
        assert_eq!(assemble(&fixed).unwrap_err(), KernelError::EmptyModel);
    }
}
