//! Analysis and time stepping of linear descriptor systems `E ż = A z`.

use nalgebra::LU;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matcore::{self, rank_factor_abs, Matrix, Subspace, Tolerances, Vector};

pub const DEFAULT_TRIALS: usize = 7;
const SAMPLE_SEED: u64 = 0x5eed_da35;

#[derive(Debug, Clone)]
pub struct PencilReport {
    pub regular: bool,
    /// Number of strict dimension drops in the consistency recursion. This
    /// is an estimate and not the Kronecker index.
    pub index_estimate: usize,
    pub consistent_space: Subspace,
    pub sample_points: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    ImplicitMidpoint,
    ImplicitEuler,
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitMidpoint => 0.5,
            Scheme::ImplicitEuler => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One row per sample.
    pub states: Matrix,
    pub hamiltonian: Vec<f64>,
    pub constraint_residual: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> Vector {
        self.states.row(k).transpose()
    }

    /// Applies `map` to every state (`z ↦ map · z`), keeping times, energy
    /// and residuals.
    pub fn map_states(&self, map: &Matrix) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: &self.states * map.transpose(),
            hamiltonian: self.hamiltonian.clone(),
            constraint_residual: self.constraint_residual.clone(),
        }
    }

    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.hamiltonian.first().copied().unwrap_or(0.0);
        self.hamiltonian
            .iter()
            .map(|h| (h - h0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.constraint_residual.iter().copied().fold(0.0, f64::max)
    }
}

fn check_pencil(e: &Matrix, a: &Matrix) -> Result<()> {
    if !e.is_square() || e.shape() != a.shape() {
        return Err(Error::DimensionMismatch(format!(
            "pencil blocks are {:?} and {:?}; both must be n x n",
            e.shape(),
            a.shape()
        )));
    }
    matcore::ensure_finite(e)?;
    matcore::ensure_finite(a)
}

/// Reference magnitude for absolute cutoffs inside the pencil routines.
fn scale(e: &Matrix, a: &Matrix) -> f64 {
    let s = e.norm().max(a.norm());
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Deterministic sample points in `[1, 2]`. At least `n + 1` are drawn so
/// that a nonzero `det(sE - A)` cannot vanish at all of them.
pub fn sample_points(n: usize, trials: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    (0..trials.max(n + 1))
        .map(|_| rng.random_range(1.0..=2.0))
        .collect()
}

fn regular_at(e: &Matrix, a: &Matrix, points: &[f64], tol: &Tolerances) -> Result<bool> {
    let n = e.nrows();
    for &s in points {
        if matcore::rank(&(e * s - a), tol)? != n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest subspace `V` with `A V ⊆ E V`, by the descending recursion
/// `V_{j+1} = {v ∈ V_j : A v ∈ E V_j}`.
fn consistent_space(e: &Matrix, a: &Matrix, tol: &Tolerances) -> Result<(Subspace, usize)> {
    let n = e.nrows();
    let cutoff = tol.subspace_angle_tol * scale(e, a);
    let mut basis = Matrix::identity(n, n);
    let mut drops = 0;
    while basis.ncols() > 0 {
        let image = rank_factor_abs(&(e * &basis), cutoff)?.col_space;
        let ab = a * &basis;
        let outside = &ab - image.basis() * (image.basis().transpose() * &ab);
        let keep = rank_factor_abs(&outside, cutoff)?.null_space;
        if keep.dim() == basis.ncols() {
            break;
        }
        basis = &basis * keep.basis();
        drops += 1;
    }
    Ok((Subspace::span(&basis, tol)?, drops))
}

pub fn analyze_pencil(e: &Matrix, a: &Matrix, tol: &Tolerances) -> Result<PencilReport> {
    analyze_pencil_with(e, a, tol, DEFAULT_TRIALS)
}

pub fn analyze_pencil_with(
    e: &Matrix,
    a: &Matrix,
    tol: &Tolerances,
    trials: usize,
) -> Result<PencilReport> {
    check_pencil(e, a)?;
    let points = sample_points(e.nrows(), trials);
    let regular = regular_at(e, a, &points, tol)?;
    let (consistent_space, index_estimate) = consistent_space(e, a, tol)?;
    Ok(PencilReport {
        regular,
        index_estimate,
        consistent_space,
        sample_points: points,
    })
}

/// Orthogonal projection of `z0` onto the consistent subspace.
pub fn project_consistent(e: &Matrix, a: &Matrix, z0: &Vector, tol: &Tolerances) -> Result<Vector> {
    let report = consistent_report(e, a, z0, tol)?;
    Ok(report.consistent_space.project(z0))
}

/// Consistent point that agrees with `z0` on the coordinates in `fixed`
/// (least squares when no exact match exists). The remaining coordinates,
/// typically multipliers, are filled in by the constraints.
pub fn complete_consistent(
    e: &Matrix,
    a: &Matrix,
    z0: &Vector,
    fixed: &[usize],
    tol: &Tolerances,
) -> Result<Vector> {
    let report = consistent_report(e, a, z0, tol)?;
    let basis = report.consistent_space.basis();
    if let Some(&bad) = fixed.iter().find(|&&i| i >= z0.len()) {
        return Err(Error::LengthMismatch {
            expected: z0.len(),
            actual: bad + 1,
        });
    }
    let rows = basis.select_rows(fixed);
    let target = Matrix::from_column_slice(fixed.len(), 1, z0.select_rows(fixed).as_slice());
    let coeffs = matcore::lstsq(&rows, &target, tol);
    Ok((basis * coeffs).column(0).into_owned())
}

fn consistent_report(
    e: &Matrix,
    a: &Matrix,
    z0: &Vector,
    tol: &Tolerances,
) -> Result<PencilReport> {
    check_pencil(e, a)?;
    if z0.len() != e.nrows() {
        return Err(Error::LengthMismatch {
            expected: e.nrows(),
            actual: z0.len(),
        });
    }
    let report = analyze_pencil(e, a, tol)?;
    if !report.regular {
        return Err(Error::IrregularPencil);
    }
    Ok(report)
}

/// Fixed-step integration of `E ż = A z`.
///
/// Midpoint: `(E - dt/2 A) z_{k+1} = (E + dt/2 A) z_k`.
/// Euler: `(E - dt A) z_{k+1} = E z_k`.
///
/// `h` is the energy matrix, recorded as `½ z^T h z`. The residual is the
/// algebraic part `‖W^T A z_k‖` with `W` spanning the left null space of
/// `E`. `z0` is used as given.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    e: &Matrix,
    a: &Matrix,
    z0: &Vector,
    dt: f64,
    steps: usize,
    scheme: Scheme,
    h: &Matrix,
    tol: &Tolerances,
) -> Result<Trajectory> {
    check_pencil(e, a)?;
    let n = e.nrows();
    if z0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: z0.len(),
        });
    }
    if h.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "energy matrix is {:?}, expected {n} x {n}",
            h.shape()
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParam {
            param: "dt".into(),
            value: dt,
            reason: "must be positive and finite",
        });
    }
    if !regular_at(e, a, &sample_points(n, DEFAULT_TRIALS), tol)? {
        return Err(Error::IrregularPencil);
    }

    let theta = scheme.theta();
    let lhs = e - a * (theta * dt);
    let rhs = e + a * ((1.0 - theta) * dt);
    let sv = matcore::singular_values(&lhs);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if n > 0 && smin.partial_cmp(&(tol.rank_rel_tol * smax)) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::SingularStepMatrix(dt));
    }
    let lu = LU::new(lhs);

    let cutoff = tol.subspace_angle_tol * scale(e, a);
    let algebraic = rank_factor_abs(e, cutoff)?.left_null_space;
    let wa = algebraic.basis().transpose() * a;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Matrix::zeros(steps + 1, n);
    let mut hamiltonian = Vec::with_capacity(steps + 1);
    let mut residual = Vec::with_capacity(steps + 1);
    let mut z = z0.clone();
    for k in 0..=steps {
        if k > 0 {
            z = lu
                .solve(&(&rhs * &z))
                .ok_or(Error::SingularStepMatrix(dt))?;
        }
        times.push(k as f64 * dt);
        states.set_row(k, &z.transpose());
        hamiltonian.push(0.5 * z.dot(&(h * &z)));
        residual.push((&wa * &z).norm());
    }
    Ok(Trajectory {
        times,
        states,
        hamiltonian,
        constraint_residual: residual,
    })
}

/// `max_k ‖full.states[k, keep] - reduced.states[k, :]‖`.
pub fn compare_projection(full: &Trajectory, reduced: &Trajectory, keep: &[usize]) -> Result<f64> {
    if full.len() != reduced.len()
        || full
            .times
            .iter()
            .zip(&reduced.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::GridMismatch);
    }
    if keep.len() != reduced.states.ncols() || keep.iter().any(|&i| i >= full.states.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {} kept columns of a {}-column trajectory with a {}-column one",
            keep.len(),
            full.states.ncols(),
            reduced.states.ncols()
        )));
    }
    let kept = full.states.select_columns(keep);
    Ok((kept - &reduced.states)
        .row_iter()
        .map(|r| r.norm())
        .fold(0.0, f64::max))
}
