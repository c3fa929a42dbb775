//! Quadrature uncertainty products on multiphoton coherent states.
//!
//! Every expectation value is a ratio of two series over the coherent-state
//! ladder, sharing the truncation window of the state. The same numbers can be
//! recovered as quadratic forms over the coefficient vector by applying the
//! ladder actions directly; tests hold the two routes against each other.

use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::coherent::{self, CoefficientVector, CoherentSpec};
use crate::error::{Error, Result};
use crate::ladder::LadderSpec;
use crate::spectrum::Model;
use crate::susy::{self, SusyConfig};

/// Radicands of the `m = 2` branch may dip this far below zero from rounding.
pub const RADICAND_SLACK: f64 = 1e-12;

/// Which pair of quadratures `X = (A^dag + A)/sqrt2`, `P = i(A^dag - A)/sqrt2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureKind {
    /// `A = a` on `H0`.
    IntrinsicH0,
    /// `A = a_m` on `H0`.
    MultiphotonH0,
    /// `A = l_{k,1}` on `Hk`.
    NaturalHk,
    /// `A = l_{k,m}` on `Hk`.
    MultiphotonHk,
}

impl QuadratureKind {
    pub const ALL: [QuadratureKind; 4] = [
        QuadratureKind::IntrinsicH0,
        QuadratureKind::MultiphotonH0,
        QuadratureKind::NaturalHk,
        QuadratureKind::MultiphotonHk,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            QuadratureKind::IntrinsicH0 => "intrinsic-h0",
            QuadratureKind::MultiphotonH0 => "multiphoton-h0",
            QuadratureKind::NaturalHk => "natural-hk",
            QuadratureKind::MultiphotonHk => "multiphoton-hk",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn needs_susy(&self) -> bool {
        matches!(self, QuadratureKind::NaturalHk | QuadratureKind::MultiphotonHk)
    }

    /// Whether the quadratures are built from the single-step operator.
    pub fn single_step(&self) -> bool {
        matches!(self, QuadratureKind::IntrinsicH0 | QuadratureKind::NaturalHk)
    }

    pub(crate) fn check(&self, spec: &CoherentSpec) -> Result<()> {
        match (self.needs_susy(), spec.cfg.is_some()) {
            (true, false) => Err(Error::KindMismatch { kind: self.name(), reason: "requires factorization energies" }),
            (false, true) => Err(Error::KindMismatch { kind: self.name(), reason: "is defined on H0 only" }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expectation values that enter the uncertainty products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    /// `<a^dag a>`
    ADagA,
    /// `<[a, a^dag]>`
    Commutator,
    /// `<a_m a_m^dag>`
    MultiAADag,
    /// `<l_k^dag l_k>`
    EllDagEll,
    /// `<l_k l_k^dag>`
    EllEllDag,
    /// `<l_{k,m} l_{k,m}^dag>`
    MultiEllEllDag,
}

impl Moment {
    pub const ALL: [Moment; 6] = [
        Moment::ADagA,
        Moment::Commutator,
        Moment::MultiAADag,
        Moment::EllDagEll,
        Moment::EllEllDag,
        Moment::MultiEllEllDag,
    ];

    pub fn needs_susy(&self) -> bool {
        matches!(self, Moment::EllDagEll | Moment::EllEllDag | Moment::MultiEllEllDag)
    }
}

/// How the `m = 2` cross moment `Re<A^2>` of the single-step quadratures is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossMoment {
    /// `<A^2>` summed over the state. On `Hk` this is
    /// `w <prod_i (E(N_k + 1) - eps_i)>`, since `l_k^2 != l_{k,2}` once `k >= 1`.
    Exact,
    /// `<A^2>` replaced by the eigenvalue `w`. Exact on `H0`; on `Hk` it only
    /// holds at `w = 0`.
    Eigenvalue,
}

fn energy_sum<F>(spec: &CoherentSpec, weights: &[f64], term: F) -> Result<f64>
where
    F: Fn(&Model, usize) -> Result<f64>,
{
    let mut acc = 0.0;
    for (n, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        acc += w * term(&spec.model, spec.level(n))?;
    }
    Ok(acc)
}

fn shifted(model: &Model, eps: &[f64], level: usize) -> Result<f64> {
    let e = model.energy(level)?;
    Ok(eps.iter().map(|x| e - x).product())
}

/// Series term for `moment` on ladder level `p`, written directly in terms of
/// energies.
fn series_term(model: &Model, eps: &[f64], m: usize, moment: Moment, p: usize) -> Result<f64> {
    let e0 = model.ground_energy()?;
    Ok(match moment {
        Moment::ADagA => model.energy(p)? - e0,
        Moment::Commutator => model.energy(p + 1)? - model.energy(p)?,
        Moment::MultiAADag => {
            let mut acc = 1.0;
            for l in 0..m {
                acc *= model.energy(p + m - l)? - e0;
            }
            acc
        }
        Moment::EllDagEll => {
            if p == 0 {
                0.0
            } else {
                (model.energy(p)? - e0) * shifted(model, eps, p)? * shifted(model, eps, p - 1)?
            }
        }
        Moment::EllEllDag => (model.energy(p + 1)? - e0) * shifted(model, eps, p + 1)? * shifted(model, eps, p)?,
        Moment::MultiEllEllDag => {
            let mut acc = 1.0;
            for l in 0..m {
                acc *= model.energy(p + m - l)? - e0;
            }
            acc * shifted(model, eps, p + m)? * shifted(model, eps, p)?
        }
    })
}

fn check_moment(spec: &CoherentSpec, moment: Moment) -> Result<()> {
    if moment.needs_susy() != spec.cfg.is_some() {
        return Err(Error::KindMismatch {
            kind: if moment.needs_susy() { "Hk moment" } else { "H0 moment" },
            reason: if moment.needs_susy() { "requires factorization energies" } else { "is defined on H0 only" },
        });
    }
    Ok(())
}

/// Closed-form ratio-of-series value of `moment` on the coherent state.
pub fn expect_number_moment(spec: &CoherentSpec, moment: Moment) -> Result<f64> {
    check_moment(spec, moment)?;
    let window = coherent::series_window(spec)?;
    let cfg = spec.susy();
    energy_sum(spec, &window.weights, |model, p| series_term(model, cfg.epsilons(), spec.m, moment, p))
}

/// `<A^2>` for the single-step operator `A` (`a` or `l_k`) on an `m = 2` state.
/// Zero for `m >= 3`; `z^2` for `m = 1`.
pub fn ladder_square_moment(spec: &CoherentSpec) -> Result<C64> {
    let window = coherent::series_window(spec)?;
    match spec.m {
        1 => Ok(spec.z * spec.z),
        2 => {
            let cfg = spec.susy();
            let last = window.weights.len() - 1;
            let sum = energy_sum(spec, &window.weights[..last], |model, p| shifted(model, cfg.epsilons(), p + 1))?;
            Ok(spec.z * sum)
        }
        _ => Ok(C64::new(0.0, 0.0)),
    }
}

/// Applies the single-step (`m = 1`) or the spec's `m`-step operator to a
/// state given on arbitrary levels.
fn apply(
    spec: &CoherentSpec,
    cfg: &SusyConfig,
    ladder: LadderSpec,
    state: &[(usize, C64)],
    create: bool,
) -> Result<Vec<(usize, C64)>> {
    let mut out = Vec::with_capacity(state.len());
    for &(level, c) in state {
        let action = if create {
            susy::ell_create(&spec.model, cfg, ladder, level)?
        } else {
            susy::ell_annihilate(&spec.model, cfg, ladder, level)?
        };
        if !action.is_zero() {
            out.push((action.target as usize, action.amplitude * c));
        }
    }
    Ok(out)
}

fn norm_sqr(state: &[(usize, C64)]) -> f64 {
    state.iter().map(|(_, c)| c.norm_sqr()).sum()
}

fn inner(bra: &[(usize, C64)], ket: &[(usize, C64)]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &(lb, b) in bra {
        for &(lk, k) in ket {
            if lb == lk {
                acc += b.conj() * k;
            }
        }
    }
    acc
}

/// `moment` evaluated as `||A v||^2` (or `||A^dag v||^2`) over the truncated
/// coefficient vector, through the ladder actions.
pub fn quadratic_form_moment(spec: &CoherentSpec, vector: &CoefficientVector, moment: Moment) -> Result<f64> {
    check_moment(spec, moment)?;
    let cfg = spec.susy();
    let state: Vec<(usize, C64)> = vector.levels().collect();
    let one = LadderSpec::new(1, spec.alpha)?;
    let multi = spec.ladder_spec();
    Ok(match moment {
        Moment::ADagA | Moment::EllDagEll => norm_sqr(&apply(spec, &cfg, one, &state, false)?),
        Moment::Commutator => {
            norm_sqr(&apply(spec, &cfg, one, &state, true)?) - norm_sqr(&apply(spec, &cfg, one, &state, false)?)
        }
        Moment::EllEllDag => norm_sqr(&apply(spec, &cfg, one, &state, true)?),
        Moment::MultiAADag | Moment::MultiEllEllDag => norm_sqr(&apply(spec, &cfg, multi, &state, true)?),
    })
}

/// `<A^2>` of the single-step operator over the truncated vector.
pub fn quadratic_form_cross(spec: &CoherentSpec, vector: &CoefficientVector) -> Result<C64> {
    let cfg = spec.susy();
    let state: Vec<(usize, C64)> = vector.levels().collect();
    let one = LadderSpec::new(1, spec.alpha)?;
    let once = apply(spec, &cfg, one, &state, false)?;
    let twice = apply(spec, &cfg, one, &once, false)?;
    Ok(inner(&state, &twice))
}

/// `(Delta X)(Delta P)` on the coherent state described by `spec`.
pub fn uncertainty_product(spec: &CoherentSpec, kind: QuadratureKind) -> Result<f64> {
    uncertainty_product_with(spec, kind, CrossMoment::Exact)
}

pub fn uncertainty_product_with(spec: &CoherentSpec, kind: QuadratureKind, cross: CrossMoment) -> Result<f64> {
    kind.check(spec)?;
    let z2 = spec.z.norm_sqr();
    match kind {
        QuadratureKind::MultiphotonH0 => Ok(0.5 * (expect_number_moment(spec, Moment::MultiAADag)? - z2)),
        QuadratureKind::MultiphotonHk => Ok(0.5 * (expect_number_moment(spec, Moment::MultiEllEllDag)? - z2)),
        QuadratureKind::IntrinsicH0 | QuadratureKind::NaturalHk => {
            let h0 = kind == QuadratureKind::IntrinsicH0;
            if spec.m == 1 {
                return if h0 {
                    Ok(0.5 * expect_number_moment(spec, Moment::Commutator)?)
                } else {
                    Ok(0.5 * (expect_number_moment(spec, Moment::EllEllDag)? - z2))
                };
            }
            let half_sum = if h0 {
                expect_number_moment(spec, Moment::ADagA)? + 0.5 * expect_number_moment(spec, Moment::Commutator)?
            } else {
                0.5 * (expect_number_moment(spec, Moment::EllDagEll)? + expect_number_moment(spec, Moment::EllEllDag)?)
            };
            if spec.m >= 3 {
                return Ok(half_sum);
            }
            let re_cross = match cross {
                CrossMoment::Exact => ladder_square_moment(spec)?.re,
                CrossMoment::Eigenvalue => spec.z.re,
            };
            let radicand = half_sum * half_sum - re_cross * re_cross;
            if radicand < -RADICAND_SLACK * half_sum.max(1.0).powi(2) {
                return Err(Error::NegativeRadicand { value: radicand });
            }
            Ok(radicand.max(0.0).sqrt())
        }
    }
}

/// One point of an uncertainty scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub z: C64,
    pub product: Result<f64>,
}

/// Evaluates `kind` at every point of `grid`, in parallel, keeping input order.
/// Per-point failures are recorded, not propagated.
pub fn scan(template: &CoherentSpec, grid: &[C64], kind: QuadratureKind) -> Result<Vec<ScanPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("scan grid is empty".into()));
    }
    kind.check(template)?;
    Ok(grid
        .par_iter()
        .map(|&z| {
            let spec = template.clone().with_z(z);
            ScanPoint { z, product: uncertainty_product(&spec, kind) }
        })
        .collect())
}

/// `points` real values evenly spaced on `[0, z_max]`.
pub fn radial_grid(z_max: f64, points: usize) -> Vec<C64> {
    if points <= 1 {
        return vec![C64::new(0.0, 0.0)];
    }
    (0..points).map(|i| C64::new(z_max * i as f64 / (points - 1) as f64, 0.0)).collect()
}

/// `points x points` grid on `[-z_max, z_max]^2`, row-major in the imaginary part.
pub fn square_grid(z_max: f64, points: usize) -> Vec<C64> {
    let axis: Vec<f64> = if points <= 1 {
        vec![0.0]
    } else {
        (0..points).map(|i| -z_max + 2.0 * z_max * i as f64 / (points - 1) as f64).collect()
    };
    axis.iter().flat_map(|&im| axis.iter().map(move |&re| C64::new(re, im))).collect()
}
