//! Tolerance-aware dense linear algebra and subspace calculus.
//!
//! Every structure in this crate is ultimately a linear subspace of some
//! `R^N`, stored through an orthonormal basis. Rank decisions are made from
//! singular values against a relative threshold; subspace comparisons use
//! principal angles.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Numerical thresholds used by rank decisions, axiom checks and
/// subspace comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Singular values below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Absolute threshold for the matrix identities defining the structures.
    pub axiom_abs_tol: f64,
    /// Largest principal angle (radians) at which two subspaces are equal.
    pub subspace_angle_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-11,
            axiom_abs_tol: 1e-9,
            subspace_angle_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(rank_rel_tol: f64, axiom_abs_tol: f64, subspace_angle_tol: f64) -> Result<Self> {
        let tol = Self {
            rank_rel_tol,
            axiom_abs_tol,
            subspace_angle_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("axiom_abs_tol", self.axiom_abs_tol),
            ("subspace_angle_tol", self.subspace_angle_tol),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteEntries)
    }
}

/// A linear subspace of `R^ambient`, held as an orthonormal basis
/// (one column per basis vector).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            basis: Matrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            basis: Matrix::identity(ambient, ambient),
        }
    }

    /// Column span of an arbitrary matrix.
    pub fn span(m: &Matrix, tol: &Tolerances) -> Result<Self> {
        Ok(rank_factor(m, tol)?.col_space)
    }

    /// Wraps a basis that is already orthonormal.
    pub(crate) fn from_orthonormal(basis: Matrix) -> Self {
        Self { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, v: &Vector) -> Vector {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Euclidean orthogonal complement in the ambient space.
    pub fn orthogonal_complement(&self) -> Self {
        if self.dim() == 0 {
            return Self::full(self.ambient_dim());
        }
        let u = svd(&self.basis).u;
        let n = self.ambient_dim();
        Self {
            basis: u.columns(self.dim(), n - self.dim()).into_owned(),
        }
    }

    /// Distance of `v` from the subspace relative to `1 + |v|`.
    pub fn contains(&self, v: &Vector, tol: &Tolerances) -> bool {
        let r = v - self.project(v);
        r.norm() <= tol.subspace_angle_tol * (1.0 + v.norm())
    }

    /// Rows `start..start+len` of every basis vector, i.e. the image of the
    /// subspace under a coordinate projection.
    pub fn project_block(&self, start: usize, len: usize, tol: &Tolerances) -> Result<Self> {
        let block = self.basis.rows(start, len).into_owned();
        // rows of an orthonormal basis: singular values are measured against 1
        Ok(factor_with_threshold(&block, tol.rank_rel_tol).col_space)
    }
}

/// Output of [`rank_factor`].
#[derive(Debug, Clone)]
pub struct RankFactor {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub col_space: Subspace,
    pub null_space: Subspace,
    pub left_null_space: Subspace,
}

/// Full singular value decomposition `a = U diag(σ) V^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, length `min(nrows, ncols)`.
    pub singular_values: Vec<f64>,
    /// `nrows x nrows`
    pub u: Matrix,
    /// `ncols x ncols`
    pub v: Matrix,
}

/// Full SVD computed with faer. nalgebra's own SVD occasionally stalls at a
/// poor approximation on rank-deficient input, which rank decisions here
/// cannot tolerate.
pub fn svd(a: &Matrix) -> Svd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd {
            singular_values: Vec::new(),
            u: Matrix::identity(m, m),
            v: Matrix::identity(n, n),
        };
    }
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = fa.svd().expect("SVD of a finite matrix converges");
    let (fu, fv) = (dec.U(), dec.V());
    Svd {
        singular_values: dec.S().column_vector().iter().copied().collect(),
        u: Matrix::from_fn(m, m, |i, j| fu[(i, j)]),
        v: Matrix::from_fn(n, n, |i, j| fv[(i, j)]),
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let fa = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    fa.singular_values()
        .expect("SVD of a finite matrix converges")
}

fn numeric_rank(sigma: &[f64], rel_tol: f64) -> usize {
    let max = sigma.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s >= rel_tol * max).count()
}

/// Rank, column space, null space and left null space of `a`.
pub fn rank_factor(a: &Matrix, tol: &Tolerances) -> Result<RankFactor> {
    ensure_finite(a)?;
    let dec = svd(a);
    let max = dec.singular_values.first().copied().unwrap_or(0.0);
    let threshold = if max == 0.0 {
        f64::INFINITY
    } else {
        tol.rank_rel_tol * max
    };
    Ok(factor_from_svd(dec, threshold))
}

/// Like [`rank_factor`] but with an absolute singular value cutoff: values
/// below `threshold` count as zero.
pub fn rank_factor_abs(a: &Matrix, threshold: f64) -> Result<RankFactor> {
    ensure_finite(a)?;
    Ok(factor_with_threshold(a, threshold))
}

fn factor_with_threshold(a: &Matrix, threshold: f64) -> RankFactor {
    factor_from_svd(svd(a), threshold)
}

/// Factorization keeping singular values at or above `threshold`.
fn factor_from_svd(dec: Svd, threshold: f64) -> RankFactor {
    let (m, n) = (dec.u.nrows(), dec.v.nrows());
    let rank = dec
        .singular_values
        .iter()
        .filter(|&&s| s >= threshold && s > 0.0)
        .count();
    let col_space = Subspace::from_orthonormal(dec.u.columns(0, rank).into_owned());
    let left_null_space = Subspace::from_orthonormal(dec.u.columns(rank, m - rank).into_owned());
    let null_space = Subspace::from_orthonormal(dec.v.columns(rank, n - rank).into_owned());
    RankFactor {
        rank,
        singular_values: dec.singular_values,
        col_space,
        null_space,
        left_null_space,
    }
}

pub fn rank(a: &Matrix, tol: &Tolerances) -> Result<usize> {
    ensure_finite(a)?;
    Ok(numeric_rank(&singular_values(a), tol.rank_rel_tol))
}

/// Null space of `a` keeping singular values at most `threshold` (absolute).
fn null_space_abs(a: &Matrix, threshold: f64) -> Subspace {
    let dec = svd(a);
    let n = dec.v.nrows();
    let r = dec
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count();
    Subspace::from_orthonormal(dec.v.columns(r, n - r).into_owned())
}

/// Choice of bilinear form on `X x X*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingForm {
    /// `<(f1,e1),(f2,e2)>_+ = e1.f2 + e2.f1`
    Plus,
    /// `<(x1,e1),(x2,e2)>_- = e1.x2 - e2.x1`
    Minus,
}

impl PairingForm {
    /// Gram matrix `Omega` with `<v, w> = v^T Omega w` on `R^{2n}`.
    pub fn gram(self, n: usize) -> Matrix {
        let mut omega = Matrix::zeros(2 * n, 2 * n);
        let (upper, lower) = match self {
            PairingForm::Plus => (1.0, 1.0),
            PairingForm::Minus => (-1.0, 1.0),
        };
        for i in 0..n {
            omega[(i, n + i)] = upper;
            omega[(n + i, i)] = lower;
        }
        omega
    }
}

/// Orthogonal companion of `v` with respect to the chosen pairing.
pub fn companion(v: &Subspace, form: PairingForm, tol: &Tolerances) -> Result<Subspace> {
    let ambient = v.ambient_dim();
    if !ambient.is_multiple_of(2) {
        return Err(Error::OddAmbient(ambient));
    }
    if v.dim() == 0 {
        return Ok(Subspace::full(ambient));
    }
    let omega = form.gram(ambient / 2);
    let constraints = v.basis().transpose() * omega;
    Ok(rank_factor(&constraints, tol)?.null_space)
}

/// Principal angles (radians, ascending) between two subspaces. The result
/// has `min(dim v1, dim v2)` entries.
pub fn principal_angles(v1: &Subspace, v2: &Subspace) -> Result<Vec<f64>> {
    if v1.ambient_dim() != v2.ambient_dim() {
        return Err(Error::AmbientMismatch(v1.ambient_dim(), v2.ambient_dim()));
    }
    let (big, small) = if v1.dim() >= v2.dim() {
        (v1, v2)
    } else {
        (v2, v1)
    };
    let k = small.dim();
    if k == 0 {
        return Ok(Vec::new());
    }
    // sines from the residual of the smaller basis, cosines from the overlap;
    // each is accurate where the other is not.
    let residual = small.basis() - big.projector() * small.basis();
    let mut sines = singular_values(&residual);
    sines.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let overlap = big.basis().transpose() * small.basis();
    let mut cosines = singular_values(&overlap);
    cosines.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let angles = sines
        .iter()
        .zip(cosines.iter())
        .map(|(&s, &c)| {
            if s < std::f64::consts::FRAC_1_SQRT_2 {
                s.min(1.0).asin()
            } else {
                c.clamp(0.0, 1.0).acos()
            }
        })
        .collect();
    Ok(angles)
}

/// Largest principal angle between two subspaces of equal dimension.
pub fn max_principal_angle(v1: &Subspace, v2: &Subspace) -> Result<f64> {
    if v1.dim() != v2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of dimension {} and {}",
            v1.dim(),
            v2.dim()
        )));
    }
    Ok(principal_angles(v1, v2)?.into_iter().fold(0.0, f64::max))
}

pub fn subspace_equal(v1: &Subspace, v2: &Subspace, tol: &Tolerances) -> Result<bool> {
    if v1.ambient_dim() != v2.ambient_dim() {
        return Err(Error::AmbientMismatch(v1.ambient_dim(), v2.ambient_dim()));
    }
    if v1.dim() != v2.dim() {
        return Ok(false);
    }
    Ok(max_principal_angle(v1, v2)? <= tol.subspace_angle_tol)
}

/// `v1 ∩ v2`, as the common null space of the two complement projectors.
pub fn subspace_intersect(v1: &Subspace, v2: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    if v1.ambient_dim() != v2.ambient_dim() {
        return Err(Error::AmbientMismatch(v1.ambient_dim(), v2.ambient_dim()));
    }
    let n = v1.ambient_dim();
    let eye = Matrix::identity(n, n);
    let stacked = vstack(&[&(&eye - v1.projector()), &(&eye - v2.projector())]);
    Ok(null_space_abs(&stacked, tol.subspace_angle_tol))
}

/// Least-squares solution of `a x = b` for every column of `b`.
pub fn lstsq(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Matrix {
    if a.ncols() == 0 {
        return Matrix::zeros(0, b.ncols());
    }
    if a.nrows() == 0 || b.ncols() == 0 {
        return Matrix::zeros(a.ncols(), b.ncols());
    }
    let dec = svd(a);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = (tol.rank_rel_tol * smax).max(f64::MIN_POSITIVE);
    let r = dec.singular_values.iter().filter(|&&s| s >= cutoff).count();
    let inv = Matrix::from_diagonal(&Vector::from_iterator(
        r,
        dec.singular_values[..r].iter().map(|s| 1.0 / s),
    ));
    dec.v.columns(0, r) * inv * (dec.u.columns(0, r).transpose() * b)
}

/// `‖M + M^T‖_F`
pub fn skew_defect(m: &Matrix) -> f64 {
    (m + m.transpose()).norm()
}

/// `‖M - M^T‖_F`
pub fn symmetry_defect(m: &Matrix) -> f64 {
    (m - m.transpose()).norm()
}

pub fn symmetric_part(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn skew_part(m: &Matrix) -> Matrix {
    (m - m.transpose()) * 0.5
}

/// Concatenates matrices side by side. All parts must share a row count.
pub fn hstack(parts: &[&Matrix]) -> Matrix {
    let rows = parts.first().map_or(0, |m| m.nrows());
    let cols = parts.iter().map(|m| m.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for m in parts {
        assert_eq!(m.nrows(), rows, "hstack row mismatch");
        out.columns_mut(c, m.ncols()).copy_from(m);
        c += m.ncols();
    }
    out
}

/// Stacks matrices vertically. All parts must share a column count.
pub fn vstack(parts: &[&Matrix]) -> Matrix {
    let cols = parts.first().map_or(0, |m| m.ncols());
    let rows = parts.iter().map(|m| m.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for m in parts {
        assert_eq!(m.ncols(), cols, "vstack column mismatch");
        out.rows_mut(r, m.nrows()).copy_from(m);
        r += m.nrows();
    }
    out
}

pub fn block_diag(parts: &[&Matrix]) -> Matrix {
    let rows = parts.iter().map(|m| m.nrows()).sum();
    let cols = parts.iter().map(|m| m.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for m in parts {
        out.view_mut((r, c), m.shape()).copy_from(m);
        r += m.nrows();
        c += m.ncols();
    }
    out
}

/// Flips the sign of each column so that its largest-magnitude entry is
/// positive.
pub(crate) fn canonical_signs(mut m: Matrix) -> Matrix {
    for mut col in m.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    m
}
