//! Linear plane-frame statics and modal analysis.
//!
//! Units are SI throughout: metres, kilograms, newtons, seconds.

mod assembly;
mod empirical;
pub mod jacobi;
pub mod matrix;
mod modal;

pub use assembly::{assemble, element_stiffness_global, element_stiffness_local, Assembled};
pub use empirical::{empirical_period, EmpiricalPeriod};
pub use matrix::{Cholesky, DenseMatrix};
pub use modal::{solve_periods, ModalResult};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Ux,
    Uy,
    Rz,
}

impl Dof {
    pub const ALL: [Dof; 3] = [Dof::Ux, Dof::Uy, Dof::Rz];

    pub fn index(self) -> usize {
        match self {
            Dof::Ux => 0,
            Dof::Uy => 1,
            Dof::Rz => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameElement {
    pub tag: i64,
    pub node_i: i64,
    pub node_j: i64,
    /// Young's modulus, Pa.
    pub e: f64,
    /// Area, m².
    pub a: f64,
    /// Second moment of area, m⁴. Zero gives a pin-ended bar.
    pub i: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StructModel {
    pub nodes: BTreeMap<i64, (f64, f64)>,
    pub fixed_dofs: BTreeSet<(i64, Dof)>,
    /// kg for translations, kg·m² for rotation.
    pub masses: BTreeMap<(i64, Dof), f64>,
    pub elements: Vec<FrameElement>,
}

impl StructModel {
    pub fn total_mass(&self, dof: Dof) -> f64 {
        self.masses
            .iter()
            .filter(|((node, d), _)| *d == dof && !self.fixed_dofs.contains(&(*node, *d)))
            .map(|(_, m)| m)
            .sum()
    }

    /// Multiplies every element modulus by `s`.
    pub fn scale_stiffness(&mut self, s: f64) {
        self.elements.iter_mut().for_each(|e| e.e *= s);
    }

    pub fn scale_masses(&mut self, s: f64) {
        self.masses.values_mut().for_each(|m| *m *= s);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("element {element} has zero length")]
    SingularGeometry { element: i64 },
    #[error("element {element} references undefined node {node}")]
    MissingNode { element: i64, node: i64 },
    #[error("model has no elements or no free degrees of freedom")]
    EmptyModel,
    #[error("no free degree of freedom carries mass")]
    NoMass,
    #[error("static condensation failed: massless sub-structure is a mechanism")]
    SingularCondensation,
    #[error("stiffness matrix is singular: structure is unstable")]
    SingularStiffness,
    #[error("non-positive eigenvalue {value:e}: structure has a rigid-body or unstable mode")]
    NonPositiveEigen { value: f64 },
    #[error("mode count must be at least 1")]
    InvalidModeCount,
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}
