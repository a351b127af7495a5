//! Seeded random Dirac structures and Lagrangian subspaces for property tests
//! and benchmarks.
//!
//! A structure is drawn in multiplier form, mapped by a random symplectic
//! change of coordinates `(x, e) ↦ (T x, T^{-T} e)`, passed through the
//! companion construction and finally given a random kernel or image
//! representation.

use rand::Rng;

use crate::dirac::{ConstrainedDiracForm, DiracStructure};
use crate::error::Result;
use crate::lagrange::{ConstrainedLagrangeForm, LagrangianSubspace};
use crate::matcore::{
    block_diag, companion, skew_part, symmetric_part, Matrix, PairingForm, Tolerances, Vector,
};

fn uniform<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Random orthogonal matrix from the QR factor of a uniform matrix.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let a = uniform(rng, n, n);
        let qr = a.qr();
        if qr.r().diagonal().iter().all(|d| d.abs() > 1e-3) {
            return qr.q();
        }
    }
}

/// Random `n x n` matrix with singular values in `[0.5, 2]`.
pub fn well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let u = orthogonal(rng, n);
    let v = orthogonal(rng, n);
    let d = Vector::from_fn(n, |_, _| rng.random_range(0.5..=2.0));
    u * Matrix::from_diagonal(&d) * v.transpose()
}

fn full_column_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Matrix {
    // first k columns of a well-conditioned matrix
    well_conditioned(rng, n).columns(0, k).into_owned()
}

/// Applies `(x, e) ↦ (T x, T^{-T} e)` to a `2n x d` basis.
fn transform(basis: &Matrix, t: &Matrix) -> Matrix {
    let t_inv_t = t
        .clone()
        .try_inverse()
        .expect("well-conditioned transform is invertible")
        .transpose();
    block_diag(&[t, &t_inv_t]) * basis
}

/// Random Dirac structure on `R^n` whose effort space has dimension `rank`.
pub fn dirac_with_rank<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    rank: usize,
    tol: &Tolerances,
) -> Result<DiracStructure> {
    let j = skew_part(&uniform(rng, n, n)) * 2.0;
    let g = full_column_rank(rng, n, n - rank);
    let form = ConstrainedDiracForm::new(j, g, tol)?;
    let w = transform(form.subspace(tol)?.basis(), &well_conditioned(rng, n));
    let d = companion(
        &crate::matcore::Subspace::span(&w, tol)?,
        PairingForm::Plus,
        tol,
    )?;
    let normal = d.orthogonal_complement();
    // rows of [K L] span the Euclidean complement of D
    let kl = well_conditioned(rng, n) * normal.basis().transpose();
    DiracStructure::from_kernel(
        kl.columns(0, n).into_owned(),
        kl.columns(n, n).into_owned(),
        tol,
    )
}

pub fn dirac<R: Rng + ?Sized>(rng: &mut R, n: usize, tol: &Tolerances) -> Result<DiracStructure> {
    let rank = rng.random_range(0..=n);
    dirac_with_rank(rng, n, rank, tol)
}

/// Random Lagrangian subspace on `R^n` with `rank P = rank`.
pub fn lagrangian_with_rank<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    rank: usize,
    tol: &Tolerances,
) -> Result<LagrangianSubspace> {
    let q = symmetric_part(&uniform(rng, n, n)) * 2.0;
    let m = full_column_rank(rng, n, n - rank);
    let form = ConstrainedLagrangeForm::new(q, m, tol)?;
    let w = transform(form.subspace(tol)?.basis(), &well_conditioned(rng, n));
    let l = companion(
        &crate::matcore::Subspace::span(&w, tol)?,
        PairingForm::Minus,
        tol,
    )?;
    let image = l.basis() * well_conditioned(rng, n);
    LagrangianSubspace::from_pair(
        image.rows(0, n).into_owned(),
        image.rows(n, n).into_owned(),
        tol,
    )
}

pub fn lagrangian<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    tol: &Tolerances,
) -> Result<LagrangianSubspace> {
    let rank = rng.random_range(0..=n);
    lagrangian_with_rank(rng, n, rank, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn requested_ranks_are_met() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=6 {
            for r in 0..=n {
                let d = dirac_with_rank(&mut rng, n, r, &tol).unwrap();
                assert_eq!(d.effort_space(&tol).unwrap().space.dim(), r);
                let l = lagrangian_with_rank(&mut rng, n, r, &tol).unwrap();
                assert_eq!(l.state_space(&tol).unwrap().space.dim(), r);
            }
        }
    }

    #[test]
    fn well_conditioned_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = well_conditioned(&mut rng, 5);
        let sv = crate::matcore::singular_values(&a);
        assert!(sv[0] <= 2.0 + 1e-12 && sv[4] >= 0.5 - 1e-12);
        let q = orthogonal(&mut rng, 4);
        assert!((q.transpose() * &q - Matrix::identity(4, 4)).norm() < 1e-12);
    }
}
