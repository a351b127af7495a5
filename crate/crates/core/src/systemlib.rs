//! Builders for a small library of mechanical and electrical example systems.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::dirac::{ConstrainedDiracForm, DiracStructure};
use crate::error::{Error, Result};
use crate::lagrange::{ConstrainedLagrangeForm, LagrangianSubspace};
use crate::matcore::{block_diag, vstack, Matrix, Tolerances};
use crate::system::{compose, merged_from_forms, GphDaeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleName {
    ConstrainedMechanical,
    MassSpringZeroMass,
    TwoMassRigidRod,
    TwoMassFiniteSpring,
    TransformerLc,
    MergedWorkedExample,
}

impl ExampleName {
    pub const ALL: [ExampleName; 6] = [
        ExampleName::ConstrainedMechanical,
        ExampleName::MassSpringZeroMass,
        ExampleName::TwoMassRigidRod,
        ExampleName::TwoMassFiniteSpring,
        ExampleName::TransformerLc,
        ExampleName::MergedWorkedExample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleName::ConstrainedMechanical => "constrained-mechanical",
            ExampleName::MassSpringZeroMass => "mass-spring-zero-mass",
            ExampleName::TwoMassRigidRod => "two-mass-rigid-rod",
            ExampleName::TwoMassFiniteSpring => "two-mass-finite-spring",
            ExampleName::TransformerLc => "transformer-lc",
            ExampleName::MergedWorkedExample => "merged-worked-example",
        }
    }

    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            ExampleName::ConstrainedMechanical => &["m", "k", "a"],
            ExampleName::MassSpringZeroMass => &["k"],
            ExampleName::TwoMassRigidRod => &["k1", "m1", "m2"],
            ExampleName::TwoMassFiniteSpring => &["k1", "k12", "m1", "m2"],
            ExampleName::TransformerLc => &["N1", "N2", "Rm", "C", "L"],
            ExampleName::MergedWorkedExample => &["k1", "m1", "m2"],
        }
    }

    pub fn optional_params(self) -> &'static [&'static str] {
        match self {
            ExampleName::TransformerLc => &["Rl1", "Rl2"],
            _ => &[],
        }
    }
}

impl fmt::Display for ExampleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleName::ALL
            .into_iter()
            .find(|name| name.as_str() == s)
            .ok_or_else(|| Error::UnknownExample(s.to_string()))
    }
}

/// Named example plus its physical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSpec {
    pub name: ExampleName,
    pub params: BTreeMap<String, f64>,
}

impl ExampleSpec {
    pub fn new(name: ExampleName) -> Self {
        Self {
            name,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str) -> Result<f64> {
        let value = *self.params.get(key).ok_or_else(|| Error::MissingParam {
            example: self.name.to_string(),
            param: key.to_string(),
        })?;
        positive(key, value)
    }

    fn get_optional(&self, key: &str) -> Result<Option<f64>> {
        self.params.get(key).map(|&v| positive(key, v)).transpose()
    }

    fn check_keys(&self) -> Result<()> {
        let known = |k: &str| {
            self.name.required_params().contains(&k) || self.name.optional_params().contains(&k)
        };
        match self.params.keys().find(|k| !known(k)) {
            Some(k) => Err(Error::UnknownParam {
                example: self.name.to_string(),
                param: k.clone(),
            }),
            None => Ok(()),
        }
    }
}

fn positive(param: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParam {
            param: param.to_string(),
            value,
            reason: "must be positive and finite",
        })
    }
}

pub fn build(spec: &ExampleSpec, tol: &Tolerances) -> Result<GphDaeSystem> {
    spec.check_keys()?;
    match spec.name {
        ExampleName::ConstrainedMechanical => {
            let (m, k, a) = (spec.get("m")?, spec.get("k")?, spec.get("a")?);
            constrained_mechanical(
                &Matrix::from_element(1, 1, m),
                &Matrix::from_element(1, 1, k),
                &Matrix::from_element(1, 1, a),
                tol,
            )
        }
        ExampleName::MassSpringZeroMass => mass_spring_zero_mass(spec.get("k")?, tol),
        ExampleName::TwoMassRigidRod => {
            two_mass_rigid_rod(spec.get("k1")?, spec.get("m1")?, spec.get("m2")?, tol)
        }
        ExampleName::TwoMassFiniteSpring => two_mass_finite_spring(
            spec.get("k1")?,
            spec.get("k12")?,
            spec.get("m1")?,
            spec.get("m2")?,
            tol,
        ),
        ExampleName::TransformerLc => transformer_lc(
            &TransformerLc {
                n1: spec.get("N1")?,
                n2: spec.get("N2")?,
                rm: spec.get("Rm")?,
                c: spec.get("C")?,
                l: spec.get("L")?,
                rl1: spec.get_optional("Rl1")?,
                rl2: spec.get_optional("Rl2")?,
            },
            tol,
        ),
        ExampleName::MergedWorkedExample => {
            merged_worked_example(spec.get("k1")?, spec.get("m1")?, spec.get("m2")?, tol)
        }
    }
}

/// `[[0, I], [-I, 0]]` of size `2n`.
pub fn canonical_skew(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn inverse_spd(m: &Matrix, param: &str) -> Result<Matrix> {
    let invalid = || Error::InvalidParam {
        param: param.to_string(),
        value: f64::NAN,
        reason: "must be symmetric positive definite",
    };
    if (m - m.transpose()).norm() > 0.0 {
        return Err(invalid());
    }
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(invalid)
}

/// Masses with kinematic constraints `A^T q̇ = 0` on state `(q, p)`:
/// `-f = [[0, I], [-I, 0]] e + [0; A] λ`, `A^T e_p = 0`, energy
/// `½ p^T M⁻¹ p + ½ q^T K q`.
pub fn constrained_mechanical(
    mass: &Matrix,
    stiffness: &Matrix,
    a: &Matrix,
    tol: &Tolerances,
) -> Result<GphDaeSystem> {
    let n = mass.nrows();
    if !mass.is_square() || stiffness.shape() != (n, n) || a.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "mass {:?}, stiffness {:?}, constraint matrix {:?}",
            mass.shape(),
            stiffness.shape(),
            a.shape()
        )));
    }
    let g = vstack(&[&Matrix::zeros(n, a.ncols()), a]);
    let form = ConstrainedDiracForm::new(canonical_skew(n), g, tol)?;
    let q = block_diag(&[stiffness, &inverse_spd(mass, "m")?]);
    let mut labels = names("q", n);
    labels.extend(names("p", n));
    compose(
        DiracStructure::from_constrained(&form, tol)?,
        LagrangianSubspace::from_graph(q, tol)?,
    )?
    .with_labels(labels)
}

/// Spring with a massless body: `z = (q, e_p)`, `P = [[1, 0], [0, 0]]`,
/// `S = [[k, 0], [0, 1]]`.
pub fn mass_spring_zero_mass(k: f64, tol: &Tolerances) -> Result<GphDaeSystem> {
    let p = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let s = Matrix::from_row_slice(2, 2, &[k, 0.0, 0.0, 1.0]);
    compose(
        DiracStructure::from_skew(canonical_skew(1), tol)?,
        LagrangianSubspace::from_pair(p, s, tol)?,
    )?
    .with_labels(vec!["q".into(), "e_p".into()])
}

fn two_mass_s(k1: f64, m1: f64, m2: f64) -> Matrix {
    Matrix::from_row_slice(
        4,
        4,
        &[
            k1,
            -1.0,
            0.0,
            0.0, //
            0.0,
            1.0,
            0.0,
            0.0, //
            0.0,
            0.0,
            1.0 / m1,
            0.0, //
            0.0,
            0.0,
            0.0,
            1.0 / m2,
        ],
    )
}

/// `P` of the two-mass chain with `z = (q1, k12 (q2 - q1), p1, p2)`;
/// `compliance = 1/k12`, zero for the rigid rod.
fn two_mass_p(compliance: f64) -> Matrix {
    Matrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            1.0, compliance, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
}

fn two_mass(compliance: f64, k1: f64, m1: f64, m2: f64, tol: &Tolerances) -> Result<GphDaeSystem> {
    compose(
        DiracStructure::from_skew(canonical_skew(2), tol)?,
        LagrangianSubspace::from_pair(two_mass_p(compliance), two_mass_s(k1, m1, m2), tol)?,
    )?
    .with_labels(vec!["q1".into(), "F12".into(), "p1".into(), "p2".into()])
}

/// Two masses, the first tied to the wall by a spring `k1`, joined by a
/// second spring `k12`. State `z = (q1, k12 (q2 - q1), p1, p2)`.
pub fn two_mass_finite_spring(
    k1: f64,
    k12: f64,
    m1: f64,
    m2: f64,
    tol: &Tolerances,
) -> Result<GphDaeSystem> {
    two_mass(1.0 / k12, k1, m1, m2, tol)
}

/// Limit `k12 → ∞` of [`two_mass_finite_spring`]: the masses are joined by
/// a rigid rod and `z2` becomes the rod force.
pub fn two_mass_rigid_rod(k1: f64, m1: f64, m2: f64, tol: &Tolerances) -> Result<GphDaeSystem> {
    two_mass(0.0, k1, m1, m2, tol)
}

/// Transformer with a capacitor on port 1 and an inductor on port 2.
/// Leaving out `rl1`/`rl2` gives the ideal transformer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformerLc {
    pub n1: f64,
    pub n2: f64,
    pub rm: f64,
    pub c: f64,
    pub l: f64,
    pub rl1: Option<f64>,
    pub rl2: Option<f64>,
}

pub fn transformer_lc(t: &TransformerLc, tol: &Tolerances) -> Result<GphDaeSystem> {
    let leak = |rl: Option<f64>| 1.0 + rl.map_or(0.0, |r| t.rm / r);
    let coupling = Matrix::from_row_slice(
        2,
        2,
        &[
            t.n1 / t.n2 * leak(t.rl1),
            1.0,
            1.0,
            t.n2 / t.n1 * leak(t.rl2),
        ],
    );
    let p = block_diag(&[
        &coupling,
        &Matrix::from_row_slice(2, 2, &[t.c, 0.0, 0.0, t.l]),
    ]);
    let s = block_diag(&[
        &(Matrix::identity(2, 2) * (t.rm / (t.n1 * t.n2))),
        &Matrix::identity(2, 2),
    ]);
    let l = Matrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        ],
    );
    compose(
        DiracStructure::from_kernel(Matrix::identity(4, 4), l, tol)?,
        LagrangianSubspace::from_pair(p, s, tol)?,
    )
}

/// The two-mass chain with an additional kinematic constraint `q̇1 = 0`,
/// written with both multipliers on `(q1, q2, p1, p2, λ, μ)`.
pub fn merged_worked_example(k1: f64, m1: f64, m2: f64, tol: &Tolerances) -> Result<GphDaeSystem> {
    let dirac = ConstrainedDiracForm::new(
        canonical_skew(2),
        Matrix::from_column_slice(4, 1, &[0.0, 0.0, 1.0, 0.0]),
        tol,
    )?;
    let q = Matrix::from_row_slice(
        4,
        4,
        &[
            k1,
            -1.0,
            0.0,
            0.0, //
            -1.0,
            0.0,
            0.0,
            0.0, //
            0.0,
            0.0,
            1.0 / m1,
            0.0, //
            0.0,
            0.0,
            0.0,
            1.0 / m2,
        ],
    );
    let lagrange = ConstrainedLagrangeForm::new(
        q,
        Matrix::from_column_slice(4, 1, &[1.0, -1.0, 0.0, 0.0]),
        tol,
    )?;
    let labels = vec!["q1".into(), "q2".into(), "p1".into(), "p2".into()];
    merged_from_forms(&dirac, &lagrange, labels, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{max_principal_angle, rank};
    use approx::assert_relative_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn names_round_trip() {
        for name in ExampleName::ALL {
            assert_eq!(name.as_str().parse::<ExampleName>().unwrap(), name);
        }
        assert!(matches!(
            "pendulum".parse::<ExampleName>(),
            Err(Error::UnknownExample(_))
        ));
    }

    #[test]
    fn missing_and_invalid_params() {
        let spec = ExampleSpec::new(ExampleName::TwoMassRigidRod)
            .with("k1", 1.0)
            .with("m1", 1.0);
        assert!(matches!(
            build(&spec, &tol()),
            Err(Error::MissingParam { ref param, .. }) if param == "m2"
        ));
        let spec = spec.with("m2", -1.0);
        assert!(matches!(
            build(&spec, &tol()),
            Err(Error::InvalidParam { .. })
        ));
        let spec = ExampleSpec::new(ExampleName::MassSpringZeroMass)
            .with("k", 1.0)
            .with("m", 1.0);
        assert!(matches!(
            build(&spec, &tol()),
            Err(Error::UnknownParam { .. })
        ));
    }

    #[test]
    fn every_example_builds() {
        let specs = [
            ExampleSpec::new(ExampleName::ConstrainedMechanical)
                .with("m", 2.0)
                .with("k", 3.0)
                .with("a", 1.0),
            ExampleSpec::new(ExampleName::MassSpringZeroMass).with("k", 1.0),
            ExampleSpec::new(ExampleName::TwoMassRigidRod)
                .with("k1", 1.0)
                .with("m1", 1.0)
                .with("m2", 1.0),
            ExampleSpec::new(ExampleName::TwoMassFiniteSpring)
                .with("k1", 1.0)
                .with("k12", 10.0)
                .with("m1", 1.0)
                .with("m2", 1.0),
            ExampleSpec::new(ExampleName::TransformerLc)
                .with("N1", 1.0)
                .with("N2", 2.0)
                .with("Rm", 1.0)
                .with("C", 1.0)
                .with("L", 1.0),
            ExampleSpec::new(ExampleName::MergedWorkedExample)
                .with("k1", 1.0)
                .with("m1", 1.0)
                .with("m2", 2.0),
        ];
        for spec in &specs {
            let sys = build(spec, &tol()).unwrap();
            assert_eq!(sys.labels().len(), sys.n());
        }
    }

    #[test]
    fn constrained_mass_kernel_matrices() {
        let sys =
            constrained_mechanical(&m(1, 1, &[1.0]), &m(1, 1, &[1.0]), &m(1, 1, &[1.0]), &tol())
                .unwrap();
        assert_eq!(sys.dirac().k(), &m(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(sys.dirac().l(), &m(2, 2, &[0.0, 1.0, 0.0, 1.0]));
        assert!(!sys.dirac().effort_space(&tol()).unwrap().regular);
        assert_eq!(sys.labels(), &["q", "p"]);
    }

    #[test]
    fn constrained_mechanical_rejects_bad_mass() {
        let err = constrained_mechanical(
            &m(1, 1, &[-1.0]),
            &m(1, 1, &[1.0]),
            &m(1, 1, &[1.0]),
            &tol(),
        );
        assert!(matches!(err, Err(Error::InvalidParam { .. })));
    }

    #[test]
    fn rigid_rod_matrices() {
        let sys = two_mass_rigid_rod(1.0, 1.0, 1.0, &tol()).unwrap();
        assert_eq!(rank(sys.lagrange().p(), &tol()).unwrap(), 3);
        let pencil = sys.primal_pencil();
        assert_eq!(
            pencil.e,
            m(
                4,
                4,
                &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]
            )
        );
        assert_eq!(pencil.a, canonical_skew(2) * two_mass_s(1.0, 1.0, 1.0));
    }

    #[test]
    fn finite_spring_approaches_rigid_rod() {
        let rod = two_mass_rigid_rod(1.0, 1.0, 1.0, &tol()).unwrap();
        let mut last = f64::INFINITY;
        for k12 in [1e2, 1e4, 1e6] {
            let spring = two_mass_finite_spring(1.0, k12, 1.0, 1.0, &tol()).unwrap();
            let angle =
                max_principal_angle(spring.lagrange().subspace(), rod.lagrange().subspace())
                    .unwrap();
            assert!(angle < last);
            last = angle;
        }
        assert!(last <= 1e-5);
    }

    #[test]
    fn transformer_ratio() {
        let t = TransformerLc {
            n1: 3.0,
            n2: 2.0,
            rm: 1.0,
            c: 1.0,
            l: 1.0,
            rl1: None,
            rl2: None,
        };
        let sys = transformer_lc(&t, &tol()).unwrap();
        assert_eq!(rank(sys.lagrange().p(), &tol()).unwrap(), 3);
        // every admissible flux pair satisfies φ1 / φ2 = N1 / N2
        let states = sys.lagrange().state_space(&tol()).unwrap().space;
        for col in states.basis().column_iter() {
            assert_relative_eq!(2.0 * col[0], 3.0 * col[1], epsilon = 1e-12);
        }

        let leaky = transformer_lc(
            &TransformerLc {
                rl1: Some(1e3),
                rl2: Some(1e3),
                ..t
            },
            &tol(),
        )
        .unwrap();
        assert_eq!(rank(leaky.lagrange().p(), &tol()).unwrap(), 4);
    }

    #[test]
    fn leaky_transformer_converges_to_ideal() {
        let ideal = TransformerLc {
            n1: 1.0,
            n2: 2.0,
            rm: 1.0,
            c: 1.0,
            l: 1.0,
            rl1: None,
            rl2: None,
        };
        let reference = transformer_lc(&ideal, &tol()).unwrap();
        let mut last = f64::INFINITY;
        for rl in [1e2, 1e4, 1e6] {
            let sys = transformer_lc(
                &TransformerLc {
                    rl1: Some(rl),
                    rl2: Some(rl),
                    ..ideal
                },
                &tol(),
            )
            .unwrap();
            let angle =
                max_principal_angle(sys.lagrange().subspace(), reference.lagrange().subspace())
                    .unwrap();
            assert!(angle < last);
            last = angle;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn worked_example_shape() {
        let sys = merged_worked_example(1.0, 1.0, 1.0, &tol()).unwrap();
        assert_eq!(sys.n(), 6);
        assert_eq!(sys.labels(), &["q1", "q2", "p1", "p2", "lambda_1", "mu_1"]);
        let e = sys.primal_pencil().e;
        assert_eq!(
            e,
            block_diag(&[&Matrix::identity(4, 4), &Matrix::zeros(2, 2)])
        );
    }
}
