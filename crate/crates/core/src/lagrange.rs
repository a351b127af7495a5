//! Lagrangian subspaces `L ⊂ X × X*`, held as the pair `(P, S)` that is
//! simultaneously an image representation `L = im [P; S]` and a kernel
//! representation `L = {(x, e) : S^T x - P^T e = 0}`.

use nalgebra::LU;

use crate::dirac::RestrictedForm;
use crate::error::{Axiom, Error, Result, StructureKind};
use crate::matcore::{
    self, canonical_signs, companion, ensure_finite, hstack, lstsq, max_principal_angle,
    rank_factor, rank_factor_abs, subspace_equal, symmetric_part, symmetry_defect, vstack, Matrix,
    PairingForm, Subspace, Tolerances,
};

#[derive(Debug, Clone)]
pub struct LagrangianSubspace {
    p: Matrix,
    s: Matrix,
    space: Subspace,
}

/// State projection `π(L)` together with the regularity verdict.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub space: Subspace,
    pub regular: bool,
}

fn axiom(which: Axiom, residual: f64) -> Error {
    Error::AxiomViolation {
        structure: StructureKind::Lagrange,
        which,
        residual,
    }
}

impl LagrangianSubspace {
    pub fn from_pair(p: Matrix, s: Matrix, tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        let n = p.nrows();
        if !p.is_square() || s.shape() != p.shape() {
            return Err(Error::DimensionMismatch(format!(
                "P is {:?} and S is {:?}; both must be n x n",
                p.shape(),
                s.shape()
            )));
        }
        ensure_finite(&p)?;
        ensure_finite(&s)?;

        let defect = (s.transpose() * &p - p.transpose() * &s).norm();
        if defect > tol.axiom_abs_tol * (1.0 + s.norm() * p.norm()) {
            return Err(axiom(Axiom::LagrangeSymmetry, defect));
        }

        let image = rank_factor(&vstack(&[&p, &s]), tol)?;
        if image.rank != n {
            return Err(axiom(Axiom::LagrangeRank, (n - image.rank) as f64));
        }
        let space = image.col_space;

        let comp = companion(&space, PairingForm::Minus, tol)?;
        if comp.dim() != n {
            return Err(axiom(Axiom::LagrangeCompanion, f64::INFINITY));
        }
        let angle = max_principal_angle(&space, &comp)?;
        if angle > tol.subspace_angle_tol {
            return Err(axiom(Axiom::LagrangeCompanion, angle));
        }

        let kernel = rank_factor(&hstack(&[&s.transpose(), &(-p.transpose())]), tol)?.null_space;
        if kernel.dim() != n {
            return Err(axiom(Axiom::LagrangeKernelImage, f64::INFINITY));
        }
        let angle = max_principal_angle(&space, &kernel)?;
        if angle > tol.subspace_angle_tol {
            return Err(axiom(Axiom::LagrangeKernelImage, angle));
        }

        Ok(Self { p, s, space })
    }

    /// Graph `{(x, Q x)}` of a symmetric map.
    pub fn from_graph(q: Matrix, tol: &Tolerances) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Q is {:?}, expected square",
                q.shape()
            )));
        }
        ensure_finite(&q)?;
        let defect = symmetry_defect(&q);
        if defect > tol.axiom_abs_tol * (1.0 + q.norm()) {
            return Err(Error::NotSymmetric(defect));
        }
        let n = q.nrows();
        Self::from_pair(Matrix::identity(n, n), q, tol)
    }

    /// Image representation of `{e = Q x + M μ, M^T x = 0}`:
    /// `P = [N, 0]`, `S = [Q N, M]` with `N` spanning `ker M^T`.
    pub fn from_constrained(form: &ConstrainedLagrangeForm, tol: &Tolerances) -> Result<Self> {
        let n = form.n();
        let k = form.multipliers();
        let admissible = rank_factor(&form.m.transpose(), tol)?.null_space;
        let nb = canonical_signs(admissible.basis().clone());
        let p = hstack(&[&nb, &Matrix::zeros(n, k)]);
        let s = hstack(&[&(&form.q * &nb), &form.m]);
        Self::from_pair(p, s, tol)
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    /// Singular value cutoff for the blocks `P` and `S`, relative to the
    /// norm of the whole representation `[P; S]`.
    fn cutoff(&self, tol: &Tolerances) -> f64 {
        let sv = matcore::singular_values(&self.image_basis());
        tol.rank_rel_tol * sv.first().copied().unwrap_or(0.0)
    }

    fn block_rank(&self, m: &Matrix, tol: &Tolerances) -> Result<usize> {
        Ok(rank_factor_abs(m, self.cutoff(tol))?.rank)
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    /// `L` as a subspace of `R^{2n}` ordered `(x, e)`.
    pub fn subspace(&self) -> &Subspace {
        &self.space
    }

    pub fn image_basis(&self) -> Matrix {
        vstack(&[&self.p, &self.s])
    }

    /// `π(L) = im P`. Singular when this is a proper subspace: the state is
    /// then confined by Lagrange algebraic constraints.
    pub fn state_space(&self, tol: &Tolerances) -> Result<StateSpace> {
        let space = rank_factor_abs(&self.p, self.cutoff(tol))?.col_space;
        let regular = space.dim() == self.n();
        Ok(StateSpace { space, regular })
    }

    /// Symmetric matrix `½(S^T P + P^T S)`; the energy is `H(z) = ½ z^T H z`.
    pub fn hamiltonian_matrix(&self) -> Matrix {
        symmetric_part(&(self.s.transpose() * &self.p))
    }

    /// The symmetric form `Σ(π(v), π(w)) = <π*(v) | π(w)>` on `π(L)`.
    pub fn sigma_matrix(&self, tol: &Tolerances) -> Result<RestrictedForm> {
        let n = self.n();
        let basis = self.state_space(tol)?.space.basis().clone();
        if basis.ncols() == 0 {
            return Ok(RestrictedForm {
                basis,
                matrix: Matrix::zeros(0, 0),
            });
        }
        let b = self.space.basis();
        let bx = b.rows(0, n).into_owned();
        let be = b.rows(n, n).into_owned();
        let coeffs = lstsq(&bx, &basis, tol);
        let efforts = be * coeffs;
        let sigma = efforts.transpose() * &basis;
        Ok(RestrictedForm {
            basis,
            matrix: symmetric_part(&sigma),
        })
    }

    /// Multiplier form `(Q, M)`: `M` spans the annihilator of `π(L)` and
    /// `Q` is the zero extension of `Σ`. Checked to reproduce `L`.
    pub fn to_constrained_form(&self, tol: &Tolerances) -> Result<ConstrainedLagrangeForm> {
        let sigma = self.sigma_matrix(tol)?;
        let states = Subspace::from_orthonormal(sigma.basis.clone());
        let m = canonical_signs(states.orthogonal_complement().basis().clone());
        let q = symmetric_part(&(&sigma.basis * &sigma.matrix * sigma.basis.transpose()));
        let form = ConstrainedLagrangeForm { q, m };
        let rebuilt = form.subspace(tol)?;
        if !subspace_equal(&rebuilt, &self.space, tol)? {
            return Err(Error::ReconstructionMismatch("Lagrange constrained form"));
        }
        Ok(form)
    }

    /// Mixed energy/co-energy representation
    /// `(e₁, x₂) = Q̂ (x₁, e₂)` with `x₁` chosen by pivoted row selection
    /// on `P`.
    pub fn partition_rep(&self, tol: &Tolerances) -> Result<PartitionRep> {
        let m = self.block_rank(&self.p, tol)?;
        let rows = pivoted_rows(&self.p, m);
        self.partition_with(&rows, tol)
    }

    /// Partition with a caller-chosen energy index set.
    pub fn partition_with(&self, energy: &[usize], tol: &Tolerances) -> Result<PartitionRep> {
        let n = self.n();
        let mut energy: Vec<usize> = energy.to_vec();
        energy.sort_unstable();
        energy.dedup();
        if energy.iter().any(|&i| i >= n) {
            return Err(Error::NoValidPartition(format!(
                "index out of range for n = {n}"
            )));
        }
        let coenergy: Vec<usize> = (0..n).filter(|i| !energy.contains(i)).collect();

        // [x1; e2] = [P1; S2] z and [e1; x2] = [S1; P2] z
        let inputs = vstack(&[&self.p.select_rows(&energy), &self.s.select_rows(&coenergy)]);
        let outputs = vstack(&[&self.s.select_rows(&energy), &self.p.select_rows(&coenergy)]);
        if self.block_rank(&inputs, tol)? != n {
            return Err(Error::NoValidPartition(format!(
                "[P1; S2] is singular for energy indices {energy:?}"
            )));
        }
        let lu = LU::new(inputs.transpose());
        let qhat = lu
            .solve(&outputs.transpose())
            .ok_or_else(|| Error::NoValidPartition("[P1; S2] is singular".into()))?
            .transpose();

        let rep = PartitionRep {
            energy_indices: energy,
            coenergy_indices: coenergy,
            qhat,
        };
        let defect = rep.signature_defect();
        if defect > tol.axiom_abs_tol * (1.0 + rep.qhat.norm()) {
            return Err(Error::NoValidPartition(format!(
                "signature identity fails (defect {defect:.3e})"
            )));
        }
        if !subspace_equal(&rep.subspace(tol)?, &self.space, tol)? {
            return Err(Error::NoValidPartition(
                "reconstruction does not match the source".into(),
            ));
        }
        Ok(rep)
    }

    /// Co-energy matrix: `x = C e` on `L`, defined when `S` is invertible.
    /// For a graph of an invertible `Q` this is `Q⁻¹`.
    pub fn legendre(&self, tol: &Tolerances) -> Result<Matrix> {
        if self.block_rank(&self.s, tol)? != self.n() {
            return Err(Error::SingularS);
        }
        Ok(symmetric_part(&self.partition_with(&[], tol)?.qhat))
    }
}

/// Greedy row selection by residual norm (pivoted Gram-Schmidt on `P^T`).
fn pivoted_rows(p: &Matrix, count: usize) -> Vec<usize> {
    let mut residual: Vec<_> = p.row_iter().map(|r| r.transpose()).collect();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let (best, _) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, r.norm()))
            .fold(
                (usize::MAX, -1.0),
                |acc, cur| if cur.1 > acc.1 { cur } else { acc },
            );
        chosen.push(best);
        let q = residual[best].normalize();
        for r in residual.iter_mut() {
            let c = q.dot(r);
            *r -= &q * c;
        }
    }
    chosen.sort_unstable();
    chosen
}

/// `{(x, e) : e = Q x + M μ for some μ, M^T x = 0}` with `Q` symmetric and
/// `M` of full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedLagrangeForm {
    q: Matrix,
    m: Matrix,
}

impl ConstrainedLagrangeForm {
    pub fn new(q: Matrix, m: Matrix, tol: &Tolerances) -> Result<Self> {
        let n = q.nrows();
        if !q.is_square() || m.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "Q is {:?} and M is {:?}",
                q.shape(),
                m.shape()
            )));
        }
        ensure_finite(&q)?;
        ensure_finite(&m)?;
        let defect = symmetry_defect(&q);
        if defect > tol.axiom_abs_tol * (1.0 + q.norm()) {
            return Err(Error::NotSymmetric(defect));
        }
        if matcore::rank(&m, tol)? != m.ncols() {
            return Err(Error::PreconditionViolated(
                "M must have full column rank".into(),
            ));
        }
        Ok(Self { q, m })
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn multipliers(&self) -> usize {
        self.m.ncols()
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn subspace(&self, tol: &Tolerances) -> Result<Subspace> {
        let n = self.n();
        let k = self.multipliers();
        let admissible = rank_factor(&self.m.transpose(), tol)?.null_space;
        let nb = admissible.basis();
        let top = hstack(&[nb, &Matrix::zeros(n, k)]);
        let bottom = hstack(&[&(&self.q * nb), &self.m]);
        Subspace::span(&vstack(&[&top, &bottom]), tol)
    }

    /// `[[Q, M], [M^T, 0]]`
    pub fn extended_symmetric(&self) -> Matrix {
        let k = self.multipliers();
        vstack(&[
            &hstack(&[&self.q, &self.m]),
            &hstack(&[&self.m.transpose(), &Matrix::zeros(k, k)]),
        ])
    }
}

/// Mixed parametrization `(e₁; x₂) = Q̂ (x₁; e₂)` of a Lagrangian subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRep {
    /// Indices whose energy variable `x_i` is an input (size `m`).
    pub energy_indices: Vec<usize>,
    /// Complementary indices whose co-energy variable `e_i` is an input.
    pub coenergy_indices: Vec<usize>,
    pub qhat: Matrix,
}

impl PartitionRep {
    fn signature(&self) -> Matrix {
        let m = self.energy_indices.len();
        let n = m + self.coenergy_indices.len();
        Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| {
            if i < m {
                1.0
            } else {
                -1.0
            }
        }))
    }

    /// `‖Q̂^T Σ - Σ Q̂‖_F` with `Σ = diag(I_m, -I_{n-m})`.
    pub fn signature_defect(&self) -> f64 {
        let sig = self.signature();
        (self.qhat.transpose() * &sig - &sig * &self.qhat).norm()
    }

    /// The subspace `{(x, e)}` described by the partition.
    pub fn subspace(&self, tol: &Tolerances) -> Result<Subspace> {
        let m = self.energy_indices.len();
        let n = m + self.coenergy_indices.len();
        let mut basis = Matrix::zeros(2 * n, n);
        for c in 0..n {
            let w = self.qhat.column(c);
            // input coordinate c, outputs from column c of Q̂
            if c < m {
                basis[(self.energy_indices[c], c)] = 1.0;
            } else {
                basis[(n + self.coenergy_indices[c - m], c)] = 1.0;
            }
            for (r, &i) in self.energy_indices.iter().enumerate() {
                basis[(n + i, c)] = w[r];
            }
            for (r, &i) in self.coenergy_indices.iter().enumerate() {
                basis[(i, c)] = w[m + r];
            }
        }
        Subspace::span(&basis, tol)
    }
}
