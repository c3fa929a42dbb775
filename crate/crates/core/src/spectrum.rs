//! Solvable models described by their eigenvalue function `E(n)`.
//!
//! Every algebraic quantity in the crate is a function of `E(n)` alone, so a
//! [`Model`] is little more than that function plus, for the built-in cases, the
//! analytic potential `V0(x)` used by the position-space code.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type EnergyFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    HarmonicOscillator,
    PoschlTeller,
    Custom,
}

#[derive(Clone)]
enum Inner {
    Harmonic,
    PoschlTeller { nu: f64 },
    Table(Arc<[f64]>),
    Function { name: String, f: EnergyFn },
}

/// An exactly solvable initial Hamiltonian `H0`, immutable after construction.
#[derive(Clone)]
pub struct Model {
    inner: Inner,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Inner::Harmonic => write!(f, "HarmonicOscillator"),
            Inner::PoschlTeller { nu } => write!(f, "PoschlTeller(nu={nu})"),
            Inner::Table(levels) => write!(f, "Custom(table, {} levels)", levels.len()),
            Inner::Function { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Inner::Harmonic => write!(f, "harmonic"),
            Inner::PoschlTeller { nu } => write!(f, "poschl-teller(nu={nu})"),
            Inner::Table(levels) => write!(f, "custom({} levels)", levels.len()),
            Inner::Function { name, .. } => write!(f, "custom({name})"),
        }
    }
}

impl Model {
    /// `V0 = x^2/2`, `E(n) = n + 1/2`.
    pub fn harmonic() -> Self {
        Model { inner: Inner::Harmonic }
    }

    /// Trigonometric Pöschl-Teller well `V0 = nu(nu-1)/(2 cos^2 x)` on `(-pi/2, pi/2)`,
    /// `E(n) = (n + nu)^2 / 2`. Requires `nu > 1`.
    pub fn poschl_teller(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 1.0) {
            return Err(Error::InvalidModel(format!(
                "Pöschl-Teller parameter must satisfy nu > 1, got {nu}"
            )));
        }
        Ok(Model { inner: Inner::PoschlTeller { nu } })
    }

    /// Finite table of levels. Levels beyond the table are reported as missing.
    pub fn custom_table(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidModel("custom level table is empty".into()));
        }
        if let Some(bad) = levels.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidModel(format!("level {bad} is not finite")));
        }
        Ok(Model { inner: Inner::Table(levels.into()) })
    }

    /// Custom spectrum given by a closure, defined for every `n >= 0`.
    pub fn custom_fn(
        name: impl Into<String>,
        f: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Model { inner: Inner::Function { name: name.into(), f: Arc::new(f) } }
    }

    pub fn kind(&self) -> ModelKind {
        match self.inner {
            Inner::Harmonic => ModelKind::HarmonicOscillator,
            Inner::PoschlTeller { .. } => ModelKind::PoschlTeller,
            Inner::Table(_) | Inner::Function { .. } => ModelKind::Custom,
        }
    }

    /// Pöschl-Teller parameter, if any.
    pub fn nu(&self) -> Option<f64> {
        match self.inner {
            Inner::PoschlTeller { nu } => Some(nu),
            _ => None,
        }
    }

    /// `E_n`.
    pub fn energy(&self, n: usize) -> Result<f64> {
        match &self.inner {
            Inner::Harmonic => Ok(n as f64 + 0.5),
            Inner::PoschlTeller { nu } => {
                let s = n as f64 + nu;
                Ok(0.5 * s * s)
            }
            Inner::Table(levels) => levels
                .get(n)
                .copied()
                .ok_or(Error::MissingLevel { n: n as i64 }),
            Inner::Function { f, .. } => Ok(f(n)),
        }
    }

    /// `E(n)` for possibly negative `n`, using the analytic form of the built-in
    /// models. Custom models only answer for `n >= 0`.
    pub fn energy_signed(&self, n: i64) -> Result<f64> {
        if n >= 0 {
            return self.energy(n as usize);
        }
        match &self.inner {
            Inner::Harmonic => Ok(n as f64 + 0.5),
            Inner::PoschlTeller { nu } => {
                let s = n as f64 + nu;
                Ok(0.5 * s * s)
            }
            _ => Err(Error::MissingLevel { n }),
        }
    }

    pub fn ground_energy(&self) -> Result<f64> {
        self.energy(0)
    }

    /// `f(n) = E(n+1) - E(n)`.
    pub fn gap(&self, n: usize) -> Result<f64> {
        Ok(self.energy(n + 1)? - self.energy(n)?)
    }

    /// `f_m(n) = E(n+m) - E(n)`.
    pub fn multiphoton_gap(&self, m: usize, n: usize) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidParameter("photon order m must be >= 1".into()));
        }
        Ok(self.energy(n + m)? - self.energy(n)?)
    }

    /// `f_m(n)` for signed `n`; needed for `f_m(N - m)` on the lowest levels.
    pub fn multiphoton_gap_signed(&self, m: usize, n: i64) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidParameter("photon order m must be >= 1".into()));
        }
        Ok(self.energy_signed(n + m as i64)? - self.energy_signed(n)?)
    }

    /// Checks strict monotonicity of `E` on `0..=n_max`.
    pub fn validate(&self, n_max: usize) -> ValidationReport {
        let mut prev = match self.energy(0) {
            Ok(e) => e,
            Err(_) => {
                return ValidationReport { checked: 0, first_violation: None, missing_level: Some(0) }
            }
        };
        for n in 1..=n_max.max(1) {
            match self.energy(n) {
                Ok(e) => {
                    if !(e > prev) {
                        return ValidationReport {
                            checked: n,
                            first_violation: Some(n - 1),
                            missing_level: None,
                        };
                    }
                    prev = e;
                }
                Err(_) => {
                    return ValidationReport { checked: n, first_violation: None, missing_level: Some(n) }
                }
            }
        }
        ValidationReport { checked: n_max.max(1), first_violation: None, missing_level: None }
    }

    /// Initial potential `V0(x)`; `None` for custom models.
    pub fn potential(&self, x: f64) -> Option<f64> {
        match self.inner {
            Inner::Harmonic => Some(0.5 * x * x),
            Inner::PoschlTeller { nu } => {
                let c = x.cos();
                Some(nu * (nu - 1.0) / (2.0 * c * c))
            }
            _ => None,
        }
    }

    /// Open interval on which `V0` is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self.inner {
            Inner::PoschlTeller { .. } => (-FRAC_PI_2, FRAC_PI_2),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Outcome of [`Model::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Number of consecutive pairs examined.
    pub checked: usize,
    /// `n` such that `E(n+1) <= E(n)`.
    pub first_violation: Option<usize>,
    /// First level the model could not provide.
    pub missing_level: Option<usize>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.first_violation.is_none() && self.missing_level.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt2() -> Model {
        Model::poschl_teller(2.0).unwrap()
    }

    #[test]
    fn energies() {
        assert_eq!(Model::harmonic().energy(0).unwrap(), 0.5);
        assert_eq!(pt2().energy(1).unwrap(), 4.5);
        let custom = Model::custom_table(vec![1.0, 2.5]).unwrap();
        assert_eq!(custom.energy(1).unwrap(), 2.5);
        assert_eq!(custom.energy(2), Err(Error::MissingLevel { n: 2 }));
    }

    #[test]
    fn gaps() {
        assert_eq!(Model::harmonic().gap(7).unwrap(), 1.0);
        assert_eq!(pt2().gap(0).unwrap(), 2.5);
        assert_eq!(pt2().gap(1).unwrap(), 3.5);
        assert_eq!(Model::harmonic().multiphoton_gap(3, 5).unwrap(), 3.0);
        assert_eq!(pt2().multiphoton_gap(2, 0).unwrap(), 6.0);
        for n in 0..20 {
            assert_eq!(pt2().multiphoton_gap(1, n).unwrap(), pt2().gap(n).unwrap());
        }
        let custom = Model::custom_table(vec![1.0, 2.5]).unwrap();
        assert!(matches!(custom.gap(1), Err(Error::MissingLevel { n: 2 })));
    }

    #[test]
    fn nu_must_exceed_one() {
        assert!(Model::poschl_teller(1.0).is_err());
        assert!(Model::poschl_teller(0.5).is_err());
        assert!(Model::poschl_teller(f64::NAN).is_err());
        assert!(Model::poschl_teller(1.5).is_ok());
    }

    #[test]
    fn validation() {
        assert!(Model::harmonic().validate(1000).is_ok());
        assert!(pt2().validate(1000).is_ok());
        let flat = Model::custom_table(vec![1.0, 1.0]).unwrap();
        let report = flat.validate(1);
        assert_eq!(report.first_violation, Some(0));
        let short = Model::custom_table(vec![1.0, 2.0]).unwrap();
        assert_eq!(short.validate(5).missing_level, Some(2));
    }

    #[test]
    fn monotone_builtins() {
        for model in [Model::harmonic(), pt2(), Model::poschl_teller(1.5).unwrap()] {
            for n in 0..10_000 {
                assert!(model.gap(n).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn analytic_continuation() {
        assert_eq!(Model::harmonic().energy_signed(-1).unwrap(), -0.5);
        assert_eq!(pt2().energy_signed(-1).unwrap(), 0.5);
        let custom = Model::custom_table(vec![1.0, 2.0]).unwrap();
        assert!(custom.energy_signed(-1).is_err());
    }

    #[test]
    fn closure_model() {
        let quad = Model::custom_fn("n^2+1", |n| (n * n) as f64 + 1.0);
        assert_eq!(quad.kind(), ModelKind::Custom);
        assert_eq!(quad.energy(3).unwrap(), 10.0);
        assert!(quad.validate(100).is_ok());
    }

    #[test]
    fn potentials() {
        assert_eq!(Model::harmonic().potential(2.0), Some(2.0));
        assert!((pt2().potential(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(Model::custom_table(vec![1.0]).unwrap().potential(0.0).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn telescoping(m in 1usize..=8, n in 0usize..=1000, which in 0usize..4) {
                let model = match which {
                    0 => Model::harmonic(),
                    1 => Model::poschl_teller(1.5).unwrap(),
                    2 => Model::poschl_teller(2.0).unwrap(),
                    _ => Model::poschl_teller(3.0).unwrap(),
                };
                let direct = model.multiphoton_gap(m, n).unwrap();
                let summed: f64 = (0..m).map(|i| model.gap(n + i).unwrap()).sum();
                prop_assert!((direct - summed).abs() <= 1e-12);
            }
        }
    }
}
