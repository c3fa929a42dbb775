//! Spectral side of k-th order SUSY: factorization energies, the spectrum of
//! the partner `Hk`, the ladder operators `l_{k,m} = Bk^dag a_m Bk` and the
//! structure functions of their algebra.
//!
//! Isolated states at the factorization energies carry their own label type,
//! so they can never be confused with an isospectral level index. Every ladder
//! action on them is exactly zero and the structure functions are only defined
//! on isospectral labels, which is how the projector onto the isospectral
//! subspace enters.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ladder::{self, phase, Action, LadderAddress, LadderSpec};
use crate::spectrum::Model;

/// Factorization energies `eps_1 > eps_2 > ... > eps_k`, all below `E0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SusyConfig {
    epsilons: Vec<f64>,
}

impl SusyConfig {
    pub fn new(model: &Model, epsilons: Vec<f64>) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::InvalidSusyConfig("at least one factorization energy is required".into()));
        }
        if let Some(bad) = epsilons.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidSusyConfig(format!("non-finite factorization energy {bad}")));
        }
        for pair in epsilons.windows(2) {
            if !(pair[1] < pair[0]) {
                return Err(Error::InvalidSusyConfig(format!(
                    "factorization energies must be strictly decreasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        let e0 = model.ground_energy()?;
        if !(epsilons[0] < e0) {
            return Err(Error::InvalidSusyConfig(format!(
                "factorization energy {} is not below the ground energy {e0}",
                epsilons[0]
            )));
        }
        Ok(SusyConfig { epsilons })
    }

    /// The `k = 0` configuration: every product over factorization energies is 1
    /// and all operations reduce to those of `H0`.
    pub fn trivial() -> Self {
        SusyConfig { epsilons: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.epsilons.len()
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    /// `prod_i (E - eps_i)`.
    pub(crate) fn shifted_product(&self, energy: f64) -> f64 {
        self.epsilons.iter().fold(1.0, |acc, eps| acc * (energy - eps))
    }
}

/// Eigenstate label of `Hk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    /// `|psi_n^(k)>`, energy `E_n`.
    Iso(usize),
    /// `|psi_{eps_i}^(k)>`, `i` in `1..=k`.
    Isolated(usize),
}

/// `Sp(Hk)` bookkeeping for a given ladder order.
#[derive(Debug, Clone, PartialEq)]
pub struct PartnerSpectrum {
    pub m: usize,
    /// `(i, eps_i)`, each a single-step ladder.
    pub isolated: Vec<(usize, f64)>,
    /// `(n, E_n, address)` for `n < n_levels`.
    pub iso_levels: Vec<(usize, f64, LadderAddress)>,
}

impl PartnerSpectrum {
    /// The `k + m` states annihilated by `l_{k,m}`.
    pub fn extremal_states(&self) -> Vec<StateLabel> {
        (0..self.m)
            .map(StateLabel::Iso)
            .chain(self.isolated.iter().map(|&(i, _)| StateLabel::Isolated(i)))
            .collect()
    }

    /// All energies, isolated levels first, sorted ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.isolated.iter().map(|&(_, e)| e).collect();
        all.extend(self.iso_levels.iter().map(|&(_, e, _)| e));
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all
    }
}

pub fn partner_spectrum(model: &Model, cfg: &SusyConfig, m: usize, n_levels: usize) -> Result<PartnerSpectrum> {
    if m == 0 {
        return Err(Error::InvalidParameter("photon order m must be >= 1".into()));
    }
    let mut isolated: Vec<(usize, f64)> = cfg.epsilons.iter().copied().enumerate().map(|(i, e)| (i + 1, e)).collect();
    isolated.reverse();
    let iso_levels = (0..n_levels)
        .map(|n| Ok((n, model.energy(n)?, LadderAddress::decompose(n, m))))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartnerSpectrum { m, isolated, iso_levels })
}

/// `prod_i (E_n - eps_i)`: eigenvalue of `Bk Bk^dag` on `|psi_n^(0)>` and of
/// `Bk^dag Bk` on `|psi_n^(k)>`.
pub fn bk_eigenvalue(model: &Model, cfg: &SusyConfig, n: usize) -> Result<f64> {
    Ok(cfg.shifted_product(model.energy(n)?))
}

/// `|l_{k,m}|^2` on the iso level `n`:
/// `prod_l (E_{n-l} - E0) prod_i (E_n - eps_i)(E_{n-m} - eps_i)`, zero for `n < m`.
pub fn ell_dag_ell_eigenvalue(model: &Model, cfg: &SusyConfig, m: usize, n: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("photon order m must be >= 1".into()));
    }
    if n < m {
        return Ok(0.0);
    }
    let ladder = ladder::descending_product(model, n as i64, m)?;
    Ok(ladder * (bk_eigenvalue(model, cfg, n)? * bk_eigenvalue(model, cfg, n - m)?))
}

/// `|l_{k,m}^dag|^2` on the iso level `n`, i.e. `|l_{k,m}|^2` on level `n + m`.
fn ell_ell_dag_eigenvalue(model: &Model, cfg: &SusyConfig, m: usize, n: usize) -> Result<f64> {
    ell_dag_ell_eigenvalue(model, cfg, m, n + m)
}

pub fn ell_annihilate(model: &Model, cfg: &SusyConfig, spec: LadderSpec, n: usize) -> Result<Action> {
    let m = spec.m();
    let target = n as i64 - m as i64;
    if n < m {
        return Ok(Action::zero(target));
    }
    let squared = ell_dag_ell_eigenvalue(model, cfg, m, n)?;
    let delta = model.energy(n)? - model.energy(n - m)?;
    Ok(Action { target, amplitude: phase(spec.alpha(), delta) * squared.sqrt() })
}

pub fn ell_create(model: &Model, cfg: &SusyConfig, spec: LadderSpec, n: usize) -> Result<Action> {
    let m = spec.m();
    let squared = ell_ell_dag_eigenvalue(model, cfg, m, n)?;
    let delta = model.energy(n + m)? - model.energy(n)?;
    Ok(Action { target: (n + m) as i64, amplitude: phase(spec.alpha(), -delta) * squared.sqrt() })
}

/// `(l_{k,m}, l_{k,m}^dag)` amplitudes on the isolated state `|psi_{eps_i}^(k)>`:
/// both vanish because the state lies in the kernel of `Bk`.
pub fn ell_on_isolated(cfg: &SusyConfig, i: usize) -> Result<(C64, C64)> {
    if i == 0 || i > cfg.k() {
        return Err(Error::InvalidParameter(format!(
            "isolated state index {i} outside 1..={}",
            cfg.k()
        )));
    }
    Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0)))
}

/// Action of any ladder operator on a labelled state of `Hk`.
pub fn ell_apply(
    model: &Model,
    cfg: &SusyConfig,
    spec: LadderSpec,
    state: StateLabel,
    create: bool,
) -> Result<Option<(StateLabel, C64)>> {
    match state {
        StateLabel::Isolated(i) => {
            ell_on_isolated(cfg, i)?;
            Ok(None)
        }
        StateLabel::Iso(n) => {
            let action =
                if create { ell_create(model, cfg, spec, n)? } else { ell_annihilate(model, cfg, spec, n)? };
            if action.is_zero() {
                Ok(None)
            } else {
                Ok(Some((StateLabel::Iso(action.target as usize), action.amplitude)))
            }
        }
    }
}

/// Eigenvalue of `N_k`: `n` on iso states, `0` on isolated ones.
pub fn number_operator_k(label: StateLabel) -> usize {
    match label {
        StateLabel::Iso(n) => n,
        StateLabel::Isolated(_) => 0,
    }
}

/// Eigenvalue of `[l_{k,m}, l_{k,m}^dag]` on `|psi_n^(k)>`.
pub fn commutator_structure_susy(model: &Model, cfg: &SusyConfig, m: usize, n: usize) -> Result<f64> {
    let raising = ell_ell_dag_eigenvalue(model, cfg, m, n)?;
    let lowering = ell_dag_ell_eigenvalue(model, cfg, m, n)?;
    Ok(raising - lowering)
}

/// Same quantity on a labelled state; isolated states are projected out.
pub fn commutator_on_label(model: &Model, cfg: &SusyConfig, m: usize, label: StateLabel) -> Result<f64> {
    match label {
        StateLabel::Iso(n) => commutator_structure_susy(model, cfg, m, n),
        StateLabel::Isolated(i) => ell_on_isolated(cfg, i).map(|_| 0.0),
    }
}

/// `(f_m(n - m), f_m(n))`: factors of `[Hk, l^dag]` and `-[Hk, l]` at `N_k = n`.
pub fn hk_ladder_factors(model: &Model, m: usize, n: usize) -> Result<(f64, f64)> {
    let create = model.multiphoton_gap_signed(m, n as i64 - m as i64)?;
    let annihilate = model.multiphoton_gap(m, n)?;
    Ok((create, annihilate))
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

    fn cfg(model: &Model, eps: &[f64]) -> SusyConfig {
        SusyConfig::new(model, eps.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn config_validation() {
        let ho = ho();
        assert!(SusyConfig::new(&ho, vec![]).is_err());
        assert!(SusyConfig::new(&ho, vec![0.5]).is_err());
        assert!(SusyConfig::new(&ho, vec![1.0]).is_err());
        assert!(SusyConfig::new(&ho, vec![-1.0, -0.5]).is_err());
        assert!(SusyConfig::new(&ho, vec![-0.5, -0.5]).is_err());
        assert!(SusyConfig::new(&ho, vec![-0.5, -1.5, -2.0]).is_ok());
    }

    #[test]
    fn bk() {
        let c = cfg(&ho(), &[-0.5]);
        assert_eq!(bk_eigenvalue(&ho(), &c, 0).unwrap(), 1.0);
        assert_eq!(bk_eigenvalue(&ho(), &c, 1).unwrap(), 2.0);
        assert_eq!(bk_eigenvalue(&pt2(), &cfg(&pt2(), &[-0.5]), 1).unwrap(), 5.0);
    }

    #[test]
    fn ell_actions() {
        let ho = ho();
        let c = cfg(&ho, &[-0.5]);
        let two = LadderSpec::order(2).unwrap();
        let one = LadderSpec::order(1).unwrap();
        let a = ell_annihilate(&ho, &c, two, 2).unwrap();
        assert_eq!(a.target, 0);
        assert!(close(a.amplitude.re, 6f64.sqrt(), 1e-15));
        let a = ell_annihilate(&ho, &c, one, 0).unwrap();
        assert_eq!(a.target, -1);
        assert!(a.is_zero());
        let p = pt2();
        let cp = cfg(&p, &[-0.5]);
        let a = ell_annihilate(&p, &cp, one, 1).unwrap();
        assert!(close(a.amplitude.re, 31.25f64.sqrt(), 1e-15));

        let up = ell_create(&ho, &c, one, 0).unwrap();
        assert_eq!(up.target, 1);
        assert!(close(up.amplitude.re, 2f64.sqrt(), 1e-15));
        let up = ell_create(&ho, &c, two, 1).unwrap();
        assert_eq!(up.target, 3);
        assert!(close(up.amplitude.norm_sqr(), 48.0, 1e-14));
        let up = ell_create(&p, &cp, two, 0).unwrap();
        assert!(close(up.amplitude.norm_sqr(), 318.75, 1e-14));
    }

    #[test]
    fn isolated_states() {
        let c1 = cfg(&ho(), &[-0.5]);
        assert_eq!(ell_on_isolated(&c1, 1).unwrap(), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        let c3 = cfg(&ho(), &[-0.5, -1.5, -2.5]);
        assert!(ell_on_isolated(&c3, 2).is_ok());
        assert!(ell_on_isolated(&c3, 4).is_err());
        let two = LadderSpec::order(2).unwrap();
        assert_eq!(ell_apply(&ho(), &c3, two, StateLabel::Isolated(2), false).unwrap(), None);
        assert_eq!(ell_apply(&ho(), &c3, two, StateLabel::Isolated(2), true).unwrap(), None);
        assert_eq!(commutator_on_label(&ho(), &c3, 2, StateLabel::Isolated(1)).unwrap(), 0.0);
    }

    #[test]
    fn ell_dag_ell() {
        let ho = ho();
        let c = cfg(&ho, &[-0.5]);
        assert_eq!(ell_dag_ell_eigenvalue(&ho, &c, 1, 1).unwrap(), 2.0);
        assert_eq!(ell_dag_ell_eigenvalue(&ho, &c, 2, 1).unwrap(), 0.0);
        let p = pt2();
        assert!(close(ell_dag_ell_eigenvalue(&p, &cfg(&p, &[-0.5]), 2, 2).unwrap(), 318.75, 1e-14));
    }

    #[test]
    fn number_operator() {
        assert_eq!(number_operator_k(StateLabel::Iso(5)), 5);
        assert_eq!(number_operator_k(StateLabel::Isolated(1)), 0);
        assert_eq!(number_operator_k(StateLabel::Iso(0)), 0);
    }

    #[test]
    fn structure_functions() {
        let ho = ho();
        let c = cfg(&ho, &[-0.5]);
        assert_eq!(commutator_structure_susy(&ho, &c, 1, 0).unwrap(), 2.0);
        assert_eq!(commutator_structure_susy(&ho, &c, 2, 0).unwrap(), 6.0);
    }

    #[test]
    fn ho_susy_polynomial_form() {
        // HO partner algebra as a polynomial in Hk on the isospectral subspace
        let ho = ho();
        let c = cfg(&ho, &[-0.5, -1.7]);
        for m in 1..=3usize {
            for n in 0..30usize {
                let h = n as f64 + 0.5;
                let mf = m as f64;
                let up: f64 = (0..m).map(|l| h + mf - l as f64 - 0.5).product::<f64>()
                    * c.epsilons().iter().map(|e| (h + mf - e) * (h - e)).product::<f64>();
                let down: f64 = (0..m).map(|l| h - l as f64 - 0.5).product::<f64>()
                    * c.epsilons().iter().map(|e| (h - mf - e) * (h - e)).product::<f64>();
                let got = commutator_structure_susy(&ho, &c, m, n).unwrap();
                assert!(close(got, up - down, 1e-12), "m={m} n={n}: {got} vs {}", up - down);
            }
        }
    }

    #[test]
    fn hk_factors() {
        assert_eq!(hk_ladder_factors(&ho(), 2, 4).unwrap(), (2.0, 2.0));
        assert_eq!(hk_ladder_factors(&pt2(), 2, 2).unwrap(), (6.0, 10.0));
        assert_eq!(hk_ladder_factors(&pt2(), 1, 0).unwrap(), (1.5, 2.5));
        for n in 0..20 {
            assert_eq!(hk_ladder_factors(&ho(), 3, n).unwrap(), (3.0, 3.0));
        }
    }

    #[test]
    fn spectrum_bookkeeping() {
        let c = cfg(&ho(), &[-0.5, -1.5, -2.5]);
        for m in 1..=4 {
            let sp = partner_spectrum(&ho(), &c, m, 40).unwrap();
            let extremal = sp.extremal_states();
            assert_eq!(extremal.len(), c.k() + m);
            let two = LadderSpec::order(m).unwrap();
            for state in extremal {
                assert_eq!(ell_apply(&ho(), &c, two, state, false).unwrap(), None);
            }
            // no other iso state is annihilated
            for n in m..40 {
                assert!(ell_dag_ell_eigenvalue(&ho(), &c, m, n).unwrap() > 0.0);
            }
            let energies = sp.energies();
            assert!(energies.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(energies[0], -2.5);
        }
    }

    #[test]
    fn trivial_config_reduces_bitwise() {
        let t = SusyConfig::trivial();
        for model in [ho(), pt2(), Model::poschl_teller(1.5).unwrap()] {
            for m in 1..=4 {
                let spec = LadderSpec::new(m, 0.37).unwrap();
                for n in 0..60 {
                    let a = ladder::annihilate_m(&model, spec, n).unwrap();
                    let l = ell_annihilate(&model, &t, spec, n).unwrap();
                    assert_eq!(a, l);
                    assert_eq!(ladder::create_m(&model, spec, n).unwrap(), ell_create(&model, &t, spec, n).unwrap());
                    assert_eq!(
                        ladder::commutator_structure(&model, m, n).unwrap().to_bits(),
                        commutator_structure_susy(&model, &t, m, n).unwrap().to_bits()
                    );
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn setup(which: usize, k: usize) -> (Model, SusyConfig) {
            let model = match which {
                0 => Model::harmonic(),
                1 => Model::poschl_teller(1.5).unwrap(),
                2 => Model::poschl_teller(2.0).unwrap(),
                _ => Model::poschl_teller(3.0).unwrap(),
            };
            let e0 = model.ground_energy().unwrap();
            let eps: Vec<f64> = (0..k).map(|i| e0 - 0.75 - 1.3 * i as f64).collect();
            let cfg = SusyConfig::new(&model, eps).unwrap();
            (model, cfg)
        }

        proptest! {
            #[test]
            fn ell_adjointness(which in 0usize..4, k in 1usize..=3, m in 1usize..=4, n in 0usize..=50, alpha in -2.0f64..2.0) {
                let (model, cfg) = setup(which, k);
                let spec = LadderSpec::new(m, alpha).unwrap();
                let up = ell_create(&model, &cfg, spec, n).unwrap();
                let down = ell_annihilate(&model, &cfg, spec, n + m).unwrap();
                prop_assert!((up.amplitude - down.amplitude.conj()).norm() <= 1e-12 * up.amplitude.norm());
            }

            #[test]
            fn factorised_amplitude(which in 0usize..4, k in 1usize..=3, m in 1usize..=4, n in 0usize..=50) {
                let (model, cfg) = setup(which, k);
                let spec = LadderSpec::order(m).unwrap();
                let amp2 = ell_annihilate(&model, &cfg, spec, n).unwrap().amplitude.norm_sqr();
                let expected = if n < m { 0.0 } else {
                    let e0 = model.energy(0).unwrap();
                    let mut p = 1.0;
                    for l in 0..m { p *= model.energy(n - l).unwrap() - e0; }
                    for e in cfg.epsilons() {
                        p *= (model.energy(n).unwrap() - e) * (model.energy(n - m).unwrap() - e);
                    }
                    p
                };
                prop_assert!((amp2 - expected).abs() <= 1e-12 * expected.max(1.0));
                let a0 = ladder::annihilate_m(&model, spec, n).unwrap().amplitude.norm_sqr();
                if n >= m {
                    let via_bk = bk_eigenvalue(&model, &cfg, n).unwrap() * a0 * bk_eigenvalue(&model, &cfg, n - m).unwrap();
                    prop_assert!((amp2 - via_bk).abs() <= 1e-12 * via_bk);
                }
            }

            #[test]
            fn commutator_consistency(which in 0usize..4, k in 1usize..=3, m in 1usize..=4, n in 0usize..=50) {
                let (model, cfg) = setup(which, k);
                let spec = LadderSpec::order(m).unwrap();
                let up = ell_create(&model, &cfg, spec, n).unwrap().amplitude.norm_sqr();
                let down = ell_annihilate(&model, &cfg, spec, n).unwrap().amplitude.norm_sqr();
                let c = commutator_structure_susy(&model, &cfg, m, n).unwrap();
                prop_assert!((c - (up - down)).abs() <= 1e-12 * up);
            }
        }
    }
}
