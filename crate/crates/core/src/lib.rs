//! Linear generalized port-Hamiltonian DAE systems.
//!
//! A system pairs a Dirac structure `D ⊂ X × X*` (the interconnection) with
//! a Lagrangian subspace `L ⊂ X × X*` (the energy storage). In
//! coordinates `D = {K f + L e = 0}` and `L = im [P; S]`, giving the DAE
//! `K P ż = L S z` with energy `H(z) = ½ z^T S^T P z`.
//!
//! ```
//! use gphdae::{matcore::{Matrix, Tolerances}, systemlib};
//!
//! let tol = Tolerances::default();
//! let sys = systemlib::mass_spring_zero_mass(1.0, &tol).unwrap();
//! let pencil = sys.primal_pencil();
//! assert_eq!(pencil.e, Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
//! assert!(!sys.lagrange().state_space(&tol).unwrap().regular);
//! ```

pub mod daesim;
pub mod dirac;
pub mod error;
pub mod lagrange;
pub mod matcore;
pub mod sample;
pub mod system;
pub mod systemlib;

pub use daesim::{PencilReport, Scheme, Trajectory};
pub use dirac::{ConstrainedDiracForm, DiracStructure};
pub use error::{Error, Result};
pub use lagrange::{ConstrainedLagrangeForm, LagrangianSubspace, PartitionRep};
pub use matcore::{Matrix, Subspace, Tolerances, Vector};
pub use system::{compose, DescriptorPencil, GphDaeSystem, PencilKind};
