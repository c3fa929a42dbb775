//! Barut-Girardello multiphoton coherent states.
//!
//! A state `|z>_j` lives on the single ladder `j, j+m, j+2m, ...` and has
//! coefficients `c_n ~ exp(-i alpha (E_{j+nm} - E_j)) z^n / sqrt(rho_n)`
//! (`phi_n` in place of `rho_n` for the partner Hamiltonian). The series is
//! accumulated in log space, because `rho_n` grows factorially and the terms
//! `|z|^{2n}/rho_n` overflow long before they start to decay for large `|z|`.
//!
//! Truncation happens at the first index `N` where the successive ratio
//! `r = |z|^2 rho_N / rho_{N+1}` is below 1/2, the geometric tail bound
//! `t_N r / (1 - r)` is below `tol` relative to the accumulated norm, and the
//! eigen-relation defect `|z| |c_N|` is below `tol` as well.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ladder::{self, phase, LadderSpec};
use crate::spectrum::Model;
use crate::susy::{self, SusyConfig};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_N_CAP: usize = 512;

/// Parameters of a multiphoton coherent state. With `cfg = None` the state is an
/// eigenstate of `a_m` on `H0`; otherwise of `l_{k,m}` on `Hk` (and `z` plays
/// the role of `w`).
#[derive(Debug, Clone)]
pub struct CoherentSpec {
    pub model: Model,
    pub cfg: Option<SusyConfig>,
    pub m: usize,
    pub j: usize,
    pub z: C64,
    pub alpha: f64,
    pub tol: f64,
    pub n_cap: usize,
}

impl CoherentSpec {
    pub fn new(model: Model, m: usize, j: usize, z: C64) -> Self {
        CoherentSpec { model, cfg: None, m, j, z, alpha: 0.0, tol: DEFAULT_TOL, n_cap: DEFAULT_N_CAP }
    }

    pub fn with_susy(mut self, cfg: SusyConfig) -> Self {
        self.cfg = Some(cfg);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_n_cap(mut self, n_cap: usize) -> Self {
        self.n_cap = n_cap;
        self
    }

    pub fn with_z(mut self, z: C64) -> Self {
        self.z = z;
        self
    }

    pub fn validate(&self) -> Result<()> {
        LadderSpec::new(self.m, self.alpha)?;
        if self.j >= self.m {
            return Err(Error::InvalidParameter(format!(
                "ladder index j = {} must be below m = {}",
                self.j, self.m
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.n_cap < 1 {
            return Err(Error::InvalidParameter("n_cap must be >= 1".into()));
        }
        if !(self.z.re.is_finite() && self.z.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("eigenvalue {} is not finite", self.z)));
        }
        Ok(())
    }

    pub fn ladder_spec(&self) -> LadderSpec {
        LadderSpec::new(self.m, self.alpha).expect("validated ladder spec")
    }

    /// The factorization energies, or the empty configuration for `H0`.
    pub fn susy(&self) -> SusyConfig {
        self.cfg.clone().unwrap_or_else(SusyConfig::trivial)
    }

    /// Level index of the `n`-th ladder term.
    pub fn level(&self, n: usize) -> usize {
        self.j + n * self.m
    }
}

/// Truncated, normalized coefficient vector of a coherent state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub m: usize,
    pub j: usize,
    /// `c_n` for `n = 0..=truncation`, sitting on level `j + n m`.
    pub entries: Vec<C64>,
    /// Estimate of the probability mass beyond the window.
    pub tail_bound: f64,
}

impl CoefficientVector {
    /// Largest ladder step kept.
    pub fn truncation(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn level(&self, n: usize) -> usize {
        self.j + n * self.m
    }

    /// `(level, c_n)` pairs.
    pub fn levels(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.entries.iter().enumerate().map(move |(n, &c)| (self.level(n), c))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Normalized series weights `|c_n|^2` over the truncation window.
#[derive(Debug, Clone)]
pub(crate) struct SeriesWindow {
    pub weights: Vec<f64>,
    pub tail_bound: f64,
}

/// `rho_n^j`: `prod_{l=0}^{nm-1} (E_{j+nm-l} - E0)`, and 1 for `n = 0`.
pub fn rho(model: &Model, m: usize, j: usize, n: usize) -> Result<f64> {
    check_ladder(m, j)?;
    if n == 0 {
        return Ok(1.0);
    }
    ladder::descending_product(model, (j + n * m) as i64, n * m)
}

/// `phi_n^j` of the partner Hamiltonian.
pub fn phi(model: &Model, cfg: &SusyConfig, m: usize, j: usize, n: usize) -> Result<f64> {
    check_ladder(m, j)?;
    if n == 0 {
        return Ok(1.0);
    }
    let mut numerator = rho(model, m, j, n)?;
    for eps in cfg.epsilons() {
        for p in 0..=n {
            let d = model.energy(j + p * m)? - eps;
            numerator *= d * d;
        }
    }
    let denominator = bk_shift(model, cfg, j + n * m)? * bk_shift(model, cfg, j)?;
    Ok(numerator / denominator)
}

fn bk_shift(model: &Model, cfg: &SusyConfig, level: usize) -> Result<f64> {
    susy::bk_eigenvalue(model, cfg, level)
}

fn check_ladder(m: usize, j: usize) -> Result<()> {
    if m == 0 || j >= m {
        return Err(Error::InvalidParameter(format!("need 0 <= j < m, got j = {j}, m = {m}")));
    }
    Ok(())
}

/// `rho_{n+1}/rho_n` (or `phi_{n+1}/phi_n`): the squared annihilation amplitude
/// on level `j + (n+1) m`.
pub(crate) fn successive_ratio(spec: &CoherentSpec, cfg: &SusyConfig, n: usize) -> Result<f64> {
    susy::ell_dag_ell_eigenvalue(&spec.model, cfg, spec.m, spec.level(n + 1))
}

pub(crate) fn series_window(spec: &CoherentSpec) -> Result<SeriesWindow> {
    spec.validate()?;
    let cfg = spec.susy();
    let abs2 = spec.z.norm_sqr();
    let log_abs2 = abs2.ln();
    let log_tol = spec.tol.ln();

    let mut log_terms = vec![0.0f64];
    // running norm sum_i exp(log_terms[i] - reference)
    let mut reference = 0.0f64;
    let mut scaled_sum = 1.0f64;
    let mut last_tail = f64::INFINITY;

    for n in 0..=spec.n_cap {
        let log_t = log_terms[n];
        let log_norm = reference + scaled_sum.ln();
        let ratio = successive_ratio(spec, &cfg, n)?;
        let r = abs2 / ratio;
        if r < 0.5 {
            let log_tail = log_t + (r / (1.0 - r)).ln();
            let log_defect = log_abs2 + log_t;
            last_tail = (log_tail - log_norm).exp();
            if log_tail < log_tol + log_norm && log_defect < 2.0 * log_tol + log_norm {
                let weights = log_terms.iter().map(|lt| (lt - log_norm).exp()).collect();
                return Ok(SeriesWindow { weights, tail_bound: last_tail });
            }
        }
        if n == spec.n_cap {
            break;
        }
        let next = log_t + log_abs2 - ratio.ln();
        if next > reference {
            scaled_sum = scaled_sum * (reference - next).exp() + 1.0;
            reference = next;
        } else {
            scaled_sum += (next - reference).exp();
        }
        log_terms.push(next);
    }
    Err(Error::TruncationFailure { n_cap: spec.n_cap, tail: last_tail })
}

/// Normalized, truncated coefficients of the coherent state described by `spec`.
pub fn coefficients(spec: &CoherentSpec) -> Result<CoefficientVector> {
    let window = series_window(spec)?;
    let e_j = spec.model.energy(spec.j)?;
    let arg = spec.z.arg();
    let entries = window
        .weights
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let e = spec.model.energy(spec.level(n))?;
            let direction = if n == 0 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, n as f64 * arg) };
            Ok(phase(spec.alpha, -(e - e_j)) * direction * w.sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientVector { m: spec.m, j: spec.j, entries, tail_bound: window.tail_bound })
}

/// `|| A v - z v ||` with `A = a_m` (or `l_{k,m}`), evaluated through the ladder
/// actions on the truncated vector.
pub fn eigen_residual(spec: &CoherentSpec, vector: &CoefficientVector) -> Result<f64> {
    let cfg = spec.susy();
    let lspec = spec.ladder_spec();
    let len = vector.entries.len();
    let mut image = vec![C64::new(0.0, 0.0); len];
    for (n, &c) in vector.entries.iter().enumerate() {
        let action = susy::ell_annihilate(&spec.model, &cfg, lspec, vector.level(n))?;
        if action.is_zero() {
            continue;
        }
        // lands on ladder step n - 1
        image[n - 1] += action.amplitude * c;
    }
    Ok(image
        .iter()
        .zip(&vector.entries)
        .map(|(av, v)| (av - spec.z * v).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ho() -> Model {
        Model::harmonic()
    }

    fn pt2() -> Model {
        Model::poschl_teller(2.0).unwrap()
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(&ho(), 2, 0, 1).unwrap(), 2.0);
        assert_eq!(rho(&pt2(), 2, 1, 0).unwrap(), 1.0);
        assert_eq!(rho(&pt2(), 2, 0, 1).unwrap(), 15.0);
        // (2n)! for the even oscillator ladder
        for n in 0..15 {
            let f = factorial(2 * n);
            assert!((rho(&ho(), 2, 0, n).unwrap() - f).abs() <= 1e-14 * f);
        }
        assert!(rho(&ho(), 2, 2, 1).is_err());
    }

    #[test]
    fn phi_values() {
        let c = SusyConfig::new(&ho(), vec![-0.5]).unwrap();
        assert!((phi(&ho(), &c, 2, 0, 1).unwrap() - 6.0).abs() < 1e-12);
        assert!((phi(&ho(), &c, 2, 1, 1).unwrap() - 48.0).abs() < 1e-12);
        assert_eq!(phi(&ho(), &c, 2, 1, 0).unwrap(), 1.0);
    }

    #[test]
    fn incremental_ratio_matches_explicit_products() {
        let c = SusyConfig::new(&pt2(), vec![-0.5, -2.0]).unwrap();
        for m in 1..=3 {
            for j in 0..m {
                let spec = CoherentSpec::new(pt2(), m, j, C64::new(1.0, 0.0)).with_susy(c.clone());
                let mut running = 1.0;
                for n in 0..12 {
                    let explicit = phi(&pt2(), &c, m, j, n).unwrap();
                    assert!((running - explicit).abs() <= 1e-12 * explicit, "m={m} j={j} n={n}");
                    running *= successive_ratio(&spec, &c, n).unwrap();
                }
            }
        }
    }

    #[test]
    fn standard_coherent_state() {
        let spec = CoherentSpec::new(ho(), 1, 0, C64::new(1.0, 0.0));
        let v = coefficients(&spec).unwrap();
        for (n, c) in v.entries.iter().enumerate() {
            let expected = (-0.5f64).exp() / factorial(n).sqrt();
            assert!((c.re - expected).abs() < 1e-12 && c.im.abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn zero_eigenvalue_is_extremal_state() {
        let c = SusyConfig::new(&pt2(), vec![-0.5]).unwrap();
        for spec in [
            CoherentSpec::new(ho(), 3, 2, C64::new(0.0, 0.0)),
            CoherentSpec::new(pt2(), 2, 1, C64::new(0.0, 0.0)).with_susy(c),
        ] {
            let v = coefficients(&spec).unwrap();
            assert_eq!(v.entries, vec![C64::new(1.0, 0.0)]);
            assert_eq!(eigen_residual(&spec, &v).unwrap(), 0.0);
        }
    }

    #[test]
    fn odd_oscillator_state() {
        let z = 0.5f64;
        let spec = CoherentSpec::new(ho(), 2, 1, C64::new(z, 0.0));
        let v = coefficients(&spec).unwrap();
        let norm = (z / z.sinh()).sqrt();
        for (n, c) in v.entries.iter().enumerate() {
            let expected = norm * z.powi(n as i32) / factorial(2 * n + 1).sqrt();
            assert!((c.re - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn residuals() {
        let spec = CoherentSpec::new(ho(), 1, 0, C64::new(1.0, 0.0)).with_tol(1e-14);
        let v = coefficients(&spec).unwrap();
        assert!(eigen_residual(&spec, &v).unwrap() < 1e-12);

        let c = SusyConfig::new(&ho(), vec![-0.5]).unwrap();
        let spec = CoherentSpec::new(ho(), 2, 0, C64::new(2.0, 0.0)).with_susy(c).with_tol(1e-14);
        let v = coefficients(&spec).unwrap();
        assert!(eigen_residual(&spec, &v).unwrap() < 1e-10);
    }

    #[test]
    fn residual_tracks_tolerance() {
        for tol in [1e-6, 1e-10, 1e-14] {
            let spec = CoherentSpec::new(pt2(), 2, 1, C64::new(3.0, -1.0)).with_tol(tol);
            let v = coefficients(&spec).unwrap();
            let res = eigen_residual(&spec, &v).unwrap();
            assert!(res <= 10.0 * tol, "tol={tol} residual={res}");
            assert!(v.tail_bound <= tol);
        }
    }

    #[test]
    fn large_eigenvalue_does_not_overflow() {
        // |z|^{2n}/n! peaks near e^2500 here
        let spec = CoherentSpec::new(ho(), 1, 0, C64::new(50.0, 0.0)).with_n_cap(6000);
        let v = coefficients(&spec).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        let peak = v.entries.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(peak > 0.0 && peak.is_finite());
        // Poisson photon statistics with mean |z|^2
        let mean: f64 = v.entries.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum();
        assert!((mean - 2500.0).abs() < 1e-8);

        for spec in [
            CoherentSpec::new(ho(), 2, 1, C64::new(0.0, 50.0)),
            CoherentSpec::new(pt2(), 1, 0, C64::new(50.0, 0.0)),
            CoherentSpec::new(pt2(), 2, 0, C64::new(-50.0, 10.0)),
        ] {
            let v = coefficients(&spec).unwrap();
            assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_failure() {
        let spec = CoherentSpec::new(ho(), 1, 0, C64::new(30.0, 0.0)).with_n_cap(10);
        assert!(matches!(coefficients(&spec), Err(Error::TruncationFailure { n_cap: 10, .. })));
    }

    #[test]
    fn invalid_specs() {
        assert!(coefficients(&CoherentSpec::new(ho(), 2, 2, C64::new(1.0, 0.0))).is_err());
        assert!(coefficients(&CoherentSpec::new(ho(), 0, 0, C64::new(1.0, 0.0))).is_err());
        assert!(coefficients(&CoherentSpec::new(ho(), 1, 0, C64::new(1.0, 0.0)).with_tol(0.0)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spec_strategy() -> impl Strategy<Value = CoherentSpec> {
            (0usize..3, 0usize..3, 1usize..=3, 0usize..3, -4.0f64..4.0, -4.0f64..4.0, -2.0f64..2.0).prop_map(
                |(which, k, m, j, re, im, alpha)| {
                    let model = match which {
                        0 => Model::harmonic(),
                        1 => Model::poschl_teller(1.5).unwrap(),
                        _ => Model::poschl_teller(3.0).unwrap(),
                    };
                    let e0 = model.ground_energy().unwrap();
                    let mut spec = CoherentSpec::new(model.clone(), m, j % m, C64::new(re, im)).with_alpha(alpha);
                    if k > 0 {
                        let eps = (0..k).map(|i| e0 - 0.5 - i as f64).collect();
                        spec = spec.with_susy(SusyConfig::new(&model, eps).unwrap());
                    }
                    spec
                },
            )
        }

        proptest! {
            #[test]
            fn normalized_and_pure(spec in spec_strategy()) {
                let v = coefficients(&spec).unwrap();
                prop_assert!((v.norm_sqr() - 1.0).abs() <= 1e-12);
                prop_assert!(v.tail_bound <= spec.tol);
                for (n, (level, _)) in v.levels().enumerate() {
                    prop_assert_eq!(level % spec.m, spec.j);
                    prop_assert_eq!(level, spec.j + n * spec.m);
                }
                prop_assert!(eigen_residual(&spec, &v).unwrap() <= 10.0 * spec.tol);
            }

            #[test]
            fn phase_covariance(spec in spec_strategy(), alpha in -3.0f64..3.0) {
                let a = coefficients(&spec).unwrap();
                let b = coefficients(&spec.clone().with_alpha(alpha)).unwrap();
                prop_assert_eq!(a.entries.len(), b.entries.len());
                for (x, y) in a.entries.iter().zip(&b.entries) {
                    prop_assert!((x.norm() - y.norm()).abs() <= 1e-14);
                }
            }
        }
    }
}
