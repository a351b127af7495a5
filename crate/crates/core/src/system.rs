//! Generalized port-Hamiltonian DAE systems: a Dirac structure paired with a
//! Lagrangian subspace on the same state space, with dynamics
//! `(-ẋ, e) ∈ D`, `(x, e) ∈ L`.

use nalgebra::LU;

use crate::daesim::{self, Scheme, Trajectory};
use crate::dirac::{ConstrainedDiracForm, DiracStructure};
use crate::error::{Error, Result};
use crate::lagrange::{ConstrainedLagrangeForm, LagrangianSubspace};
use crate::matcore::{
    block_diag, hstack, skew_part, symmetric_part, vstack, Matrix, Tolerances, Vector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilKind {
    /// `K P ż = L S z`
    Primal,
    /// `P^T K^T v̇ = -S^T L^T v`
    Dual,
    /// primal pencil of a multiplier extension
    Extended,
}

/// Linear DAE `E ż = A z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorPencil {
    pub e: Matrix,
    pub a: Matrix,
    pub kind: PencilKind,
}

impl DescriptorPencil {
    pub fn n(&self) -> usize {
        self.e.nrows()
    }
}

/// Sizes of the coordinate blocks of an extended system `(x, λ, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extension {
    pub base_dim: usize,
    pub dirac_multipliers: usize,
    pub lagrange_multipliers: usize,
}

#[derive(Debug, Clone)]
pub struct GphDaeSystem {
    dirac: DiracStructure,
    lagrange: LagrangianSubspace,
    labels: Vec<String>,
    extension: Option<Extension>,
}

pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("z_{i}")).collect()
}

/// Pairs `D` and `L`. Any pair of matching dimension is admissible.
pub fn compose(dirac: DiracStructure, lagrange: LagrangianSubspace) -> Result<GphDaeSystem> {
    if dirac.n() != lagrange.n() {
        return Err(Error::DimensionMismatch(format!(
            "Dirac structure has n = {}, Lagrangian subspace has n = {}",
            dirac.n(),
            lagrange.n()
        )));
    }
    let labels = default_labels(dirac.n());
    Ok(GphDaeSystem {
        dirac,
        lagrange,
        labels,
        extension: None,
    })
}

impl GphDaeSystem {
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.dirac.n()
    }

    pub fn dirac(&self) -> &DiracStructure {
        &self.dirac
    }

    pub fn lagrange(&self) -> &LagrangianSubspace {
        &self.lagrange
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Block sizes when this system was produced by one of the extensions.
    pub fn extension(&self) -> Option<Extension> {
        self.extension
    }

    pub fn primal_pencil(&self) -> DescriptorPencil {
        DescriptorPencil {
            e: self.dirac.k() * self.lagrange.p(),
            a: self.dirac.l() * self.lagrange.s(),
            kind: if self.extension.is_some() {
                PencilKind::Extended
            } else {
                PencilKind::Primal
            },
        }
    }

    pub fn dual_pencil(&self) -> DescriptorPencil {
        DescriptorPencil {
            e: self.lagrange.p().transpose() * self.dirac.k().transpose(),
            a: -(self.lagrange.s().transpose() * self.dirac.l().transpose()),
            kind: PencilKind::Dual,
        }
    }

    pub fn hamiltonian_matrix(&self) -> Matrix {
        self.lagrange.hamiltonian_matrix()
    }

    /// `H(z) = ½ z^T S^T P z`
    pub fn hamiltonian(&self, z: &Vector) -> Result<f64> {
        if z.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: z.len(),
            });
        }
        Ok(0.5 * z.dot(&(self.hamiltonian_matrix() * z)))
    }

    /// Matrix taking the state `z` to the energy variables `x`. For an
    /// extension this selects the leading `x` block.
    pub fn energy_map(&self) -> Matrix {
        match self.extension {
            Some(ext) => {
                let mut sel = Matrix::zeros(ext.base_dim, self.n());
                sel.view_mut((0, 0), (ext.base_dim, ext.base_dim))
                    .fill_with_identity();
                sel
            }
            None => self.lagrange.p().clone(),
        }
    }

    /// Replaces Dirac algebraic constraints by Lagrange ones: state `(x, λ)`,
    /// `K̃ = I`, `L̃ = [[J, G], [-G^T, 0]]`, `P̃ = diag(I, 0)`, `S̃ = diag(Q, I)`.
    /// Requires a regular Lagrangian part; when `P ≠ I` the state is first
    /// changed to `x = P z`.
    pub fn extend_dirac_multipliers(&self, tol: &Tolerances) -> Result<GphDaeSystem> {
        let q = self.regular_lagrange_graph(tol)?;
        let dform = self.dirac.to_constrained_form(tol)?;
        let n = self.n();
        let lform = ConstrainedLagrangeForm::new(q, Matrix::zeros(n, 0), tol)?;
        merged_from_forms(&dform, &lform, self.labels.clone(), tol)
    }

    /// Replaces Lagrange algebraic constraints by Dirac ones: state `(x, μ)`,
    /// `K̃ = diag(I, 0)`, `L̃ = diag(J, I)`, `P̃ = I`, `S̃ = [[Q, M], [M^T, 0]]`.
    /// Requires a regular Dirac part; `J = K⁻¹ L` when `K ≠ I`.
    pub fn extend_lagrange_multipliers(&self, tol: &Tolerances) -> Result<GphDaeSystem> {
        let j = self.regular_dirac_graph(tol)?;
        let n = self.n();
        let dform = ConstrainedDiracForm::new(j, Matrix::zeros(n, 0), tol)?;
        let lform = self.lagrange.to_constrained_form(tol)?;
        merged_from_forms(&dform, &lform, self.labels.clone(), tol)
    }

    /// Both constructions at once on `(x, λ, μ)`.
    pub fn extend_merged(&self, tol: &Tolerances) -> Result<GphDaeSystem> {
        let dform = self.dirac.to_constrained_form(tol)?;
        let lform = self.lagrange.to_constrained_form(tol)?;
        merged_from_forms(&dform, &lform, self.labels.clone(), tol)
    }

    fn regular_lagrange_graph(&self, tol: &Tolerances) -> Result<Matrix> {
        let n = self.n();
        let p = self.lagrange.p();
        if !self.lagrange.state_space(tol)?.regular {
            return Err(Error::PreconditionViolated(
                "Lagrangian subspace must be regular (rank P = n)".into(),
            ));
        }
        if *p == Matrix::identity(n, n) {
            return Ok(self.lagrange.s().clone());
        }
        // S P⁻¹ = (P^T)⁻¹ (S^T P) P⁻¹ is symmetric
        let sol = LU::new(p.transpose())
            .solve(&self.lagrange.s().transpose())
            .ok_or_else(|| Error::PreconditionViolated("P is singular".into()))?;
        Ok(symmetric_part(&sol.transpose()))
    }

    fn regular_dirac_graph(&self, tol: &Tolerances) -> Result<Matrix> {
        let n = self.n();
        let k = self.dirac.k();
        if !self.dirac.effort_space(tol)?.regular {
            return Err(Error::PreconditionViolated(
                "Dirac structure must be regular (K invertible)".into(),
            ));
        }
        if *k == Matrix::identity(n, n) {
            return Ok(self.dirac.l().clone());
        }
        let j = LU::new(k.clone())
            .solve(self.dirac.l())
            .ok_or_else(|| Error::PreconditionViolated("K is singular".into()))?;
        Ok(skew_part(&j))
    }

    /// Projects `z0` onto the consistent subspace of the primal pencil and
    /// integrates it.
    pub fn simulate(
        &self,
        z0: &Vector,
        dt: f64,
        steps: usize,
        scheme: Scheme,
        tol: &Tolerances,
    ) -> Result<Trajectory> {
        if z0.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: z0.len(),
            });
        }
        let pencil = self.primal_pencil();
        let start = daesim::project_consistent(&pencil.e, &pencil.a, z0, tol)?;
        daesim::integrate(
            &pencil.e,
            &pencil.a,
            &start,
            dt,
            steps,
            scheme,
            &self.hamiltonian_matrix(),
            tol,
        )
    }
}

/// Builds the extended system on `(x, λ, μ)` from a Dirac form `(J, G)` and
/// a Lagrange form `(Q, M)`:
///
/// ```text
/// K̃ = diag(I, I, 0)   L̃ = [[J, G, 0], [-G^T, 0, 0], [0, 0, I]]
/// P̃ = diag(I, 0, I)   S̃ = [[Q, 0, M], [0, I, 0], [M^T, 0, 0]]
/// ```
///
/// With `M` empty this is the Dirac-multiplier extension, with `G` empty the
/// Lagrange-multiplier one. `labels` names the `x` block; multiplier labels
/// are appended.
pub fn merged_from_forms(
    dirac: &ConstrainedDiracForm,
    lagrange: &ConstrainedLagrangeForm,
    labels: Vec<String>,
    tol: &Tolerances,
) -> Result<GphDaeSystem> {
    let n = dirac.n();
    if lagrange.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "Dirac form has n = {n}, Lagrange form has n = {}",
            lagrange.n()
        )));
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    let k = dirac.multipliers();
    let l = lagrange.multipliers();
    let (g, m) = (dirac.g(), lagrange.m());

    let kt = block_diag(&[
        &Matrix::identity(n, n),
        &Matrix::identity(k, k),
        &Matrix::zeros(l, l),
    ]);
    let lt = vstack(&[
        &hstack(&[dirac.j(), g, &Matrix::zeros(n, l)]),
        &hstack(&[&(-g.transpose()), &Matrix::zeros(k, k + l)]),
        &hstack(&[&Matrix::zeros(l, n + k), &Matrix::identity(l, l)]),
    ]);
    let pt = block_diag(&[
        &Matrix::identity(n, n),
        &Matrix::zeros(k, k),
        &Matrix::identity(l, l),
    ]);
    let st = vstack(&[
        &hstack(&[lagrange.q(), &Matrix::zeros(n, k), m]),
        &hstack(&[
            &Matrix::zeros(k, n),
            &Matrix::identity(k, k),
            &Matrix::zeros(k, l),
        ]),
        &hstack(&[&m.transpose(), &Matrix::zeros(l, k + l)]),
    ]);

    let mut names = labels;
    names.extend((1..=k).map(|i| format!("lambda_{i}")));
    names.extend((1..=l).map(|i| format!("mu_{i}")));

    let sys = compose(
        DiracStructure::from_kernel(kt, lt, tol)?,
        LagrangianSubspace::from_pair(pt, st, tol)?,
    )?;
    Ok(GphDaeSystem {
        labels: names,
        extension: Some(Extension {
            base_dim: n,
            dirac_multipliers: k,
            lagrange_multipliers: l,
        }),
        ..sys
    })
}
