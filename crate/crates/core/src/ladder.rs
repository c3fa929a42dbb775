//! Intrinsic and multiphoton ladder operators of `H0`, represented by their
//! action on eigenstates: a target level and a complex amplitude.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spectrum::Model;

/// Photon order `m` and phase parameter `alpha` of the ladder operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderSpec {
    m: usize,
    alpha: f64,
}

impl LadderSpec {
    pub fn new(m: usize, alpha: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("photon order m must be >= 1".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be finite, got {alpha}")));
        }
        Ok(LadderSpec { m, alpha })
    }

    /// Order `m` with `alpha = 0`.
    pub fn order(m: usize) -> Result<Self> {
        Self::new(m, 0.0)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Position of a level inside the `m`-ladder decomposition: `level = j + step*m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderAddress {
    pub j: usize,
    pub step: usize,
}

impl LadderAddress {
    pub fn decompose(level: usize, m: usize) -> Self {
        assert!(m >= 1, "photon order must be positive");
        LadderAddress { j: level % m, step: level / m }
    }

    pub fn level(&self, m: usize) -> usize {
        self.j + self.step * m
    }
}

/// Result of applying a ladder operator to an eigenstate. A zero amplitude
/// stands for the zero vector; `target` may then be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub target: i64,
    pub amplitude: C64,
}

impl Action {
    pub fn zero(target: i64) -> Self {
        Action { target, amplitude: C64::new(0.0, 0.0) }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == C64::new(0.0, 0.0)
    }
}

pub(crate) fn phase(alpha: f64, delta_e: f64) -> C64 {
    if alpha == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        C64::from_polar(1.0, alpha * delta_e)
    }
}

/// `prod_{l=0}^{count-1} (E_{top-l} - E0)`, scanning `l` upwards and stopping at
/// the first vanishing factor. Levels below zero are never evaluated: the
/// factor at level 0 is reached first and is exactly zero.
pub(crate) fn descending_product(model: &Model, top: i64, count: usize) -> Result<f64> {
    let e0 = model.ground_energy()?;
    let mut acc = 1.0;
    for l in 0..count as i64 {
        let level = top - l;
        if level <= 0 {
            return Ok(0.0);
        }
        acc *= model.energy(level as usize)? - e0;
    }
    Ok(acc)
}

/// `r(n) = exp(i alpha (E_n - E_{n-1})) sqrt(E_n - E0)`; zero for `n = 0`.
pub fn r_coefficient(model: &Model, alpha: f64, n: usize) -> Result<C64> {
    if n == 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let en = model.energy(n)?;
    let prev = model.energy(n - 1)?;
    let modulus = (en - model.ground_energy()?).sqrt();
    Ok(phase(alpha, en - prev) * modulus)
}

/// `a_m |n> = exp(i alpha (E_n - E_{n-m})) sqrt(prod_{l<m} (E_{n-l} - E0)) |n-m>`.
pub fn annihilate_m(model: &Model, spec: LadderSpec, n: usize) -> Result<Action> {
    let m = spec.m;
    let target = n as i64 - m as i64;
    if n < m {
        return Ok(Action::zero(target));
    }
    let squared = descending_product(model, n as i64, m)?;
    let delta = model.energy(n)? - model.energy(n - m)?;
    Ok(Action { target, amplitude: phase(spec.alpha, delta) * squared.sqrt() })
}

/// `a_m^dag |n> = exp(-i alpha (E_{n+m} - E_n)) sqrt(prod_{l<m} (E_{n+1+l} - E0)) |n+m>`.
pub fn create_m(model: &Model, spec: LadderSpec, n: usize) -> Result<Action> {
    let m = spec.m;
    let squared = descending_product(model, (n + m) as i64, m)?;
    let delta = model.energy(n + m)? - model.energy(n)?;
    Ok(Action { target: (n + m) as i64, amplitude: phase(spec.alpha, -delta) * squared.sqrt() })
}

/// Eigenvalue of `[a_m, a_m^dag]` on `|n>`:
/// `prod_l (E(n+m-l) - E0) - prod_l (E(n-l) - E0)`.
pub fn commutator_structure(model: &Model, m: usize, n: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("photon order m must be >= 1".into()));
    }
    let raising = descending_product(model, (n + m) as i64, m)?;
    let lowering = descending_product(model, n as i64, m)?;
    Ok(raising - lowering)
}

/// Levels annihilated by `a_m`: `0, 1, ..., m-1`.
pub fn extremal_levels(m: usize) -> Vec<usize> {
    (0..m).collect()
}

/// One row of the harmonic-oscillator multiphoton algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoAlgebraRow {
    pub n: usize,
    /// `[a_m, a_m^dag]` from the generic product form.
    pub commutator: f64,
    /// The same quantity as a polynomial in `H0 = n + 1/2`.
    pub commutator_polynomial: f64,
    /// Factor `c` in `[H0, a_m^dag] = c a_m^dag` on the state `a_m^dag |n>`.
    pub h_create_factor: f64,
    /// Factor `c` in `[H0, a_m] = -c a_m` on `|n>`.
    pub h_annihilate_factor: f64,
}

/// Harmonic-oscillator algebra table for `n` in `n_range`.
pub fn ho_algebra_table(m: usize, n_range: std::ops::Range<usize>) -> Result<Vec<HoAlgebraRow>> {
    let model = Model::harmonic();
    n_range
        .map(|n| {
            let h0 = model.energy(n)?;
            let up: f64 = (0..m).map(|l| h0 + (m - l) as f64 - 0.5).product();
            let down: f64 = (0..m).map(|l| h0 - l as f64 - 0.5).product();
            Ok(HoAlgebraRow {
                n,
                commutator: commutator_structure(&model, m, n)?,
                commutator_polynomial: up - down,
                h_create_factor: model.multiphoton_gap(m, n)?,
                h_annihilate_factor: model.multiphoton_gap(m, n)?,
            })
        })
        .collect()
}

/// Pöschl-Teller commutator factors `(m/2)[2(n+nu) - m]` (with `a_m^dag`) and
/// `(m/2)[2(n+nu) + m]` (with `a_m`).
pub fn pt_algebra_factors(nu: f64, m: usize, n: usize) -> (f64, f64) {
    let half_m = m as f64 / 2.0;
    let s = 2.0 * (n as f64 + nu);
    (half_m * (s - m as f64), half_m * (s + m as f64))
}
