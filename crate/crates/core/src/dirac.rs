//! Constant Dirac structures `D ⊂ X × X*` in kernel representation
//! `{(f, e) : K f + L e = 0}`.

use crate::error::{Axiom, Error, Result, StructureKind};
use crate::matcore::{
    self, canonical_signs, companion, ensure_finite, hstack, lstsq, max_principal_angle,
    rank_factor, skew_defect, skew_part, subspace_equal, subspace_intersect, vstack, Matrix,
    PairingForm, Subspace, Tolerances,
};

/// A validated Dirac structure. Construction checks every axiom; there is
/// no way to obtain an unchecked value.
#[derive(Debug, Clone)]
pub struct DiracStructure {
    k: Matrix,
    l: Matrix,
    space: Subspace,
}

/// Effort projection `π*(D)` together with the regularity verdict.
#[derive(Debug, Clone)]
pub struct EffortSpace {
    pub space: Subspace,
    pub regular: bool,
}

/// A bilinear form restricted to a subspace, expressed in an orthonormal
/// basis of that subspace.
#[derive(Debug, Clone)]
pub struct RestrictedForm {
    /// `n x r` orthonormal basis, one column per basis vector.
    pub basis: Matrix,
    /// `r x r` matrix of the form in that basis.
    pub matrix: Matrix,
}

fn axiom(which: Axiom, residual: f64) -> Error {
    Error::AxiomViolation {
        structure: StructureKind::Dirac,
        which,
        residual,
    }
}

impl DiracStructure {
    pub fn from_kernel(k: Matrix, l: Matrix, tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        let n = k.nrows();
        if !k.is_square() || l.shape() != k.shape() {
            return Err(Error::DimensionMismatch(format!(
                "K is {:?} and L is {:?}; both must be n x n",
                k.shape(),
                l.shape()
            )));
        }
        ensure_finite(&k)?;
        ensure_finite(&l)?;

        let defect = (&k * l.transpose() + &l * k.transpose()).norm();
        if defect > tol.axiom_abs_tol * (1.0 + k.norm() * l.norm()) {
            return Err(axiom(Axiom::DiracSkew, defect));
        }

        let kl = hstack(&[&k, &l]);
        let factor = rank_factor(&kl, tol)?;
        if factor.rank != n {
            return Err(axiom(Axiom::DiracRank, (n - factor.rank) as f64));
        }

        let space = factor.null_space;
        let comp = companion(&space, PairingForm::Plus, tol)?;
        if comp.dim() != space.dim() {
            return Err(axiom(Axiom::DiracCompanion, f64::INFINITY));
        }
        let angle = max_principal_angle(&space, &comp)?;
        if angle > tol.subspace_angle_tol {
            return Err(axiom(Axiom::DiracCompanion, angle));
        }
        Ok(Self { k, l, space })
    }

    /// Graph of `-J`, i.e. `{(f, e) : f = -J e}`.
    pub fn from_skew(j: Matrix, tol: &Tolerances) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "J is {:?}, expected square",
                j.shape()
            )));
        }
        ensure_finite(&j)?;
        let defect = skew_defect(&j);
        if defect > tol.axiom_abs_tol * (1.0 + j.norm()) {
            return Err(Error::NotSkew(defect));
        }
        let n = j.nrows();
        Self::from_kernel(Matrix::identity(n, n), j, tol)
    }

    /// Kernel representation of `{-f = J e + G λ, G^T e = 0}`:
    /// `K = [N^T; 0]`, `L = [N^T J; G^T]` with `N` spanning `ker G^T`.
    pub fn from_constrained(form: &ConstrainedDiracForm, tol: &Tolerances) -> Result<Self> {
        let n = form.n();
        let k_mult = form.multipliers();
        let complement = rank_factor(&form.g.transpose(), tol)?.null_space;
        let nt = canonical_signs(complement.basis().clone()).transpose();
        let k = vstack(&[&nt, &Matrix::zeros(k_mult, n)]);
        let l = vstack(&[&(&nt * &form.j), &form.g.transpose()]);
        Self::from_kernel(k, l, tol)
    }

    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    pub fn k(&self) -> &Matrix {
        &self.k
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    /// `D` as a subspace of `R^{2n}` ordered `(f, e)`.
    pub fn subspace(&self) -> &Subspace {
        &self.space
    }

    /// `[L^T; K^T]`, whose columns span `D`.
    pub fn image_basis(&self) -> Matrix {
        vstack(&[&self.l.transpose(), &self.k.transpose()])
    }

    pub fn effort_space(&self, tol: &Tolerances) -> Result<EffortSpace> {
        let n = self.n();
        let space = self.space.project_block(n, n, tol)?;
        let regular = space.dim() == n;
        Ok(EffortSpace { space, regular })
    }

    /// `D ∩ (0 × X*)`, reported inside `X*`. Each vector `c` in it gives a
    /// conserved quantity `c^T x`.
    pub fn conserved_space(&self, tol: &Tolerances) -> Result<Subspace> {
        let n = self.n();
        let efforts =
            Subspace::from_orthonormal(vstack(&[&Matrix::zeros(n, n), &Matrix::identity(n, n)]));
        let meet = subspace_intersect(&self.space, &efforts, tol)?;
        Subspace::span(&meet.basis().rows(n, n).into_owned(), tol)
    }

    /// The skew form `Δ(π*(v), π*(w)) = <π*(v) | π(w)>` on `π*(D)`.
    pub fn delta_matrix(&self, tol: &Tolerances) -> Result<RestrictedForm> {
        let n = self.n();
        let efforts = self.effort_space(tol)?.space;
        let basis = efforts.basis().clone();
        if basis.ncols() == 0 {
            return Ok(RestrictedForm {
                basis,
                matrix: Matrix::zeros(0, 0),
            });
        }
        let b = self.space.basis();
        let bf = b.rows(0, n).into_owned();
        let be = b.rows(n, n).into_owned();
        // (f_j, e_j) ∈ D with e_j the j-th basis vector
        let coeffs = lstsq(&be, &basis, tol);
        let flows = bf * coeffs;
        let delta = basis.transpose() * flows;
        Ok(RestrictedForm {
            basis,
            matrix: skew_part(&delta),
        })
    }

    /// Multiplier form `(J, G)` with `G` spanning the annihilator of
    /// `π*(D)` and `J` the zero extension of `-Δ`. The result is checked to
    /// reproduce `D`.
    pub fn to_constrained_form(&self, tol: &Tolerances) -> Result<ConstrainedDiracForm> {
        let delta = self.delta_matrix(tol)?;
        let efforts = Subspace::from_orthonormal(delta.basis.clone());
        let g = canonical_signs(efforts.orthogonal_complement().basis().clone());
        let j = skew_part(&(-(&delta.basis * &delta.matrix * delta.basis.transpose())));
        let form = ConstrainedDiracForm { j, g };
        let rebuilt = form.subspace(tol)?;
        if !subspace_equal(&rebuilt, &self.space, tol)? {
            return Err(Error::ReconstructionMismatch("Dirac constrained form"));
        }
        Ok(form)
    }
}

/// `{(f, e) : -f = J e + G λ for some λ, G^T e = 0}` with `J` skew and `G`
/// of full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedDiracForm {
    j: Matrix,
    g: Matrix,
}

impl ConstrainedDiracForm {
    pub fn new(j: Matrix, g: Matrix, tol: &Tolerances) -> Result<Self> {
        let n = j.nrows();
        if !j.is_square() || g.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "J is {:?} and G is {:?}",
                j.shape(),
                g.shape()
            )));
        }
        ensure_finite(&j)?;
        ensure_finite(&g)?;
        let defect = skew_defect(&j);
        if defect > tol.axiom_abs_tol * (1.0 + j.norm()) {
            return Err(Error::NotSkew(defect));
        }
        if matcore::rank(&g, tol)? != g.ncols() {
            return Err(Error::PreconditionViolated(
                "G must have full column rank".into(),
            ));
        }
        Ok(Self { j, g })
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    /// Number of multipliers `k`.
    pub fn multipliers(&self) -> usize {
        self.g.ncols()
    }

    pub fn j(&self) -> &Matrix {
        &self.j
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    /// The set described by the form, as a subspace of `R^{2n}`.
    pub fn subspace(&self, tol: &Tolerances) -> Result<Subspace> {
        let n = self.n();
        let k = self.multipliers();
        let admissible = rank_factor(&self.g.transpose(), tol)?.null_space;
        let nb = admissible.basis();
        let top = hstack(&[&(-(&self.j * nb)), &(-&self.g)]);
        let bottom = hstack(&[nb, &Matrix::zeros(n, k)]);
        Subspace::span(&vstack(&[&top, &bottom]), tol)
    }

    /// `[[-J, -G], [G^T, 0]]`, mapping `X* × Λ*` to `X × Λ`.
    pub fn extended_skew(&self) -> Matrix {
        let k = self.multipliers();
        vstack(&[
            &hstack(&[&(-&self.j), &(-&self.g)]),
            &hstack(&[&self.g.transpose(), &Matrix::zeros(k, k)]),
        ])
    }
}
