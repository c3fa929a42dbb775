//! SUSY partners in position space: seed solutions, the chain of `beta_j`,
//! partner potentials and transformed eigenfunctions on a uniform grid.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::spectrum::{Model, ModelKind};
use crate::susy::SusyConfig;

/// Distance kept from the poles of the Pöschl-Teller potential.
pub const PT_GUARD: f64 = 0.05;
pub const MIN_POINTS: usize = 101;
/// Seed values are renormalized before they can exceed `1e300`.
const RESCALE_AT: f64 = 1e280;
/// RK4 steps per grid interval.
pub const RK4_SUBSTEPS: usize = 4;

/// Uniform grid `x_i = x_min + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidGrid(format!("need finite x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_POINTS} points, got {n_points}")));
        }
        Ok(Grid { x_min, x_max, n_points })
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.h()).round();
        i.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Rejects models without a potential and grids entering the PT guard band.
    pub fn check(&self, model: &Model) -> Result<()> {
        match model.kind() {
            ModelKind::Custom => Err(Error::InvalidModel("custom spectra have no potential".into())),
            ModelKind::HarmonicOscillator => Ok(()),
            ModelKind::PoschlTeller => {
                if self.x_min < -FRAC_PI_2 + PT_GUARD {
                    return Err(Error::PoleProximity { x: self.x_min, guard: PT_GUARD });
                }
                if self.x_max > FRAC_PI_2 - PT_GUARD {
                    return Err(Error::PoleProximity { x: self.x_max, guard: PT_GUARD });
                }
                Ok(())
            }
        }
    }

    fn potential(&self, model: &Model) -> Vec<f64> {
        (0..self.n_points).map(|i| model.potential(self.x(i)).unwrap_or(f64::NAN)).collect()
    }
}

/// Initial data `(u, u')` at `anchor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedInit {
    pub anchor: f64,
    pub u0: f64,
    pub du0: f64,
}

impl SeedInit {
    pub fn even() -> Self {
        SeedInit { anchor: 0.0, u0: 1.0, du0: 0.0 }
    }

    pub fn odd() -> Self {
        SeedInit { anchor: 0.0, u0: 0.0, du0: 1.0 }
    }

    /// Alternating parity: even for the first factorization energy, odd for
    /// the second, and so on.
    pub fn alternating(i: usize) -> Self {
        if i % 2 == 0 {
            Self::even()
        } else {
            Self::odd()
        }
    }
}

/// Solution of `u'' = 2 (V0 - eps) u` sampled on a grid. The true values are
/// `u[i] * exp(log_scale[i])` (likewise for `u_prime`).
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSolution {
    pub epsilon: f64,
    pub grid: Grid,
    pub u: Vec<f64>,
    pub u_prime: Vec<f64>,
    pub log_scale: Vec<f64>,
    /// Whether `1/u` decays towards both grid ends, i.e. looks square-integrable.
    pub normalizable: bool,
}

impl SeedSolution {
    pub fn value(&self, i: usize) -> f64 {
        self.u[i] * self.log_scale[i].exp()
    }

    /// `ln |u|` at every grid point.
    pub fn log_abs(&self) -> Vec<f64> {
        self.u.iter().zip(&self.log_scale).map(|(u, s)| u.abs().ln() + s).collect()
    }

    /// Interior points where `u` vanishes or changes sign.
    pub fn zero_crossings(&self) -> Vec<f64> {
        let n = self.u.len();
        let mut out = Vec::new();
        for i in 1..n - 1 {
            if self.u[i] == 0.0 {
                out.push(self.grid.x(i));
            } else if i + 1 < n - 1 && self.u[i].signum() != self.u[i + 1].signum() && self.u[i + 1] != 0.0 {
                let (a, b) = (self.u[i], self.u[i + 1] * (self.log_scale[i + 1] - self.log_scale[i]).exp());
                out.push(self.grid.x(i) + self.grid.h() * a / (a - b));
            }
        }
        out
    }
}

fn rk4_step(model: &Model, eps: f64, x: f64, h: f64, u: f64, p: f64) -> (f64, f64) {
    let g = |x: f64| 2.0 * (model.potential(x).unwrap_or(f64::NAN) - eps);
    let gm = g(x + 0.5 * h);
    let (k1u, k1p) = (p, g(x) * u);
    let (k2u, k2p) = (p + 0.5 * h * k1p, gm * (u + 0.5 * h * k1u));
    let (k3u, k3p) = (p + 0.5 * h * k2p, gm * (u + 0.5 * h * k2u));
    let (k4u, k4p) = (p + h * k3p, g(x + h) * (u + h * k3u));
    (u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u), p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))
}

/// Integrates the seed equation with fixed-step RK4 ([`RK4_SUBSTEPS`] steps
/// per grid interval) from the grid point nearest to `init.anchor`, in both
/// directions.
pub fn solve_seed(model: &Model, epsilon: f64, grid: &Grid, init: SeedInit) -> Result<SeedSolution> {
    grid.check(model)?;
    let e0 = model.ground_energy()?;
    if !(epsilon < e0) {
        return Err(Error::InvalidParameter(format!("seed energy {epsilon} is not below E0 = {e0}")));
    }
    if !(init.anchor >= grid.x_min && init.anchor <= grid.x_max) {
        return Err(Error::InvalidGrid(format!("anchor {} outside the grid", init.anchor)));
    }
    let n = grid.n_points;
    let h = grid.h();
    let start = grid.nearest(init.anchor);
    let mut u = vec![0.0; n];
    let mut up = vec![0.0; n];
    let mut ls = vec![0.0; n];
    u[start] = init.u0;
    up[start] = init.du0;

    for dir in [1i64, -1] {
        let (mut cu, mut cp, mut cs) = (init.u0, init.du0, 0.0);
        let mut i = start as i64;
        loop {
            let next = i + dir;
            if next < 0 || next >= n as i64 {
                break;
            }
            let step = dir as f64 * h / RK4_SUBSTEPS as f64;
            let x0 = grid.x(i as usize);
            for s in 0..RK4_SUBSTEPS {
                (cu, cp) = rk4_step(model, epsilon, x0 + s as f64 * step, step, cu, cp);
            }
            let size = cu.abs().max(cp.abs());
            if size > RESCALE_AT {
                cu /= size;
                cp /= size;
                cs += size.ln();
            }
            i = next;
            u[i as usize] = cu;
            up[i as usize] = cp;
            ls[i as usize] = cs;
        }
    }

    let mut seed = SeedSolution {
        epsilon,
        grid: grid.clone(),
        u,
        u_prime: up,
        log_scale: ls,
        normalizable: false,
    };
    seed.normalizable = reciprocal_decays(&seed);
    Ok(seed)
}

/// `1/u` is taken as square-integrable when `u` has no nodes and `|u|` grows
/// monotonically over the outer tenth of the grid on both sides, ending at
/// least four times above its minimum.
fn reciprocal_decays(seed: &SeedSolution) -> bool {
    if !seed.zero_crossings().is_empty() {
        return false;
    }
    let log_u = seed.log_abs();
    let n = log_u.len();
    let min = log_u.iter().cloned().fold(f64::INFINITY, f64::min);
    let edge = (n / 10).max(2);
    let rising_right = log_u[n - edge..].windows(2).all(|w| w[1] > w[0]);
    let rising_left = log_u[..edge].windows(2).all(|w| w[0] > w[1]);
    let margin = 4f64.ln();
    rising_left && rising_right && log_u[0] - min > margin && log_u[n - 1] - min > margin
}

/// Relative residual of `u'' = 2 (V0 - eps) u` at interior points, with a
/// five-point second difference.
pub fn seed_residual(model: &Model, seed: &SeedSolution) -> f64 {
    let grid = &seed.grid;
    let h = grid.h();
    let n = grid.n_points;
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let at = |j: usize| seed.u[j] * (seed.log_scale[j] - seed.log_scale[i]).exp();
        let d2 = (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2)) / (12.0 * h * h);
        let rhs = 2.0 * (model.potential(grid.x(i)).unwrap_or(f64::NAN) - seed.epsilon) * at(i);
        let scale = rhs.abs().max(at(i).abs());
        if scale > 0.0 {
            worst = worst.max((d2 - rhs).abs() / scale);
        }
    }
    worst
}

/// `u'/u` at every grid point; infinite at exact nodes.
pub fn log_derivative(seed: &SeedSolution) -> Vec<f64> {
    seed.u.iter().zip(&seed.u_prime).map(|(u, p)| p / u).collect()
}

/// `beta_1 = u'/u`, refusing seeds with interior nodes.
pub fn beta_from_seed(seed: &SeedSolution) -> Result<Vec<f64>> {
    let zeros = seed.zero_crossings();
    if !zeros.is_empty() {
        return Err(Error::ZeroCrossing { locations: zeros });
    }
    Ok(log_derivative(seed))
}

/// First derivative: three-point centered inside, second-order one-sided at the ends.
pub fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    out
}

/// Second derivative: three-point centered inside, second-order one-sided at the ends.
pub fn second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    out
}

/// Sup-norm of `beta' + beta^2 - 2 (V - eps)` over the interior.
pub fn riccati_residual(beta: &[f64], potential: &[f64], epsilon: f64, h: f64) -> f64 {
    let d = derivative(beta, h);
    (1..beta.len() - 1)
        .map(|i| (d[i] + beta[i] * beta[i] - 2.0 * (potential[i] - epsilon)).abs())
        .fold(0.0, f64::max)
}

/// One step of the finite-difference formula: `beta_j(x, eps)` from
/// `beta_{j-1}(x, eps_{j-1})` and `beta_{j-1}(x, eps)`.
pub fn beta_recursion(
    grid: &Grid,
    beta_prev: &[f64],
    eps_prev: f64,
    beta_prev_at_eps: &[f64],
    eps: f64,
) -> Result<Vec<f64>> {
    let denominator: Vec<f64> = beta_prev.iter().zip(beta_prev_at_eps).map(|(a, b)| a - b).collect();
    let singular = denominator_zeros(grid, &denominator);
    if !singular.is_empty() {
        return Err(Error::SingularDenominator { locations: singular });
    }
    Ok(beta_prev
        .iter()
        .zip(&denominator)
        .map(|(b, d)| -b - 2.0 * (eps_prev - eps) / d)
        .collect())
}

/// Zeros of a sampled function, telling sign changes through zero apart from
/// sign changes through a pole.
fn denominator_zeros(grid: &Grid, d: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..d.len() {
        if d[i] == 0.0 || d[i].is_nan() {
            out.push(grid.x(i));
            continue;
        }
        if i + 1 < d.len() && d[i + 1] != 0.0 && d[i].signum() != d[i + 1].signum() {
            let (a, b) = (d[i].abs(), d[i + 1].abs());
            if a + b < 1.0 / a + 1.0 / b {
                out.push(grid.x(i) + grid.h() * a / (a + b));
            }
        }
    }
    out
}

/// `beta_1 .. beta_k`, each at its own factorization energy.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaChain {
    pub epsilons: Vec<f64>,
    pub betas: Vec<Vec<f64>>,
}

impl BetaChain {
    pub fn k(&self) -> usize {
        self.betas.len()
    }
}

/// Seeds at every factorization energy, with alternating parity anchors at `x = 0`.
pub fn default_seeds(model: &Model, cfg: &SusyConfig, grid: &Grid) -> Result<Vec<SeedSolution>> {
    cfg.epsilons()
        .iter()
        .enumerate()
        .map(|(i, &eps)| solve_seed(model, eps, grid, SeedInit::alternating(i)))
        .collect()
}

/// Runs the recursion over the triangular table `beta_i(x, eps_j)`, `j >= i`.
/// The first seed must be nodeless; later seeds may have nodes.
pub fn build_chain(grid: &Grid, seeds: &[SeedSolution]) -> Result<BetaChain> {
    let first = seeds.first().ok_or_else(|| Error::InvalidSusyConfig("no seeds given".into()))?;
    let mut row: Vec<Vec<f64>> = Vec::with_capacity(seeds.len());
    row.push(beta_from_seed(first)?);
    row.extend(seeds[1..].iter().map(log_derivative));
    let epsilons: Vec<f64> = seeds.iter().map(|s| s.epsilon).collect();
    let mut betas = vec![row[0].clone()];
    for level in 1..seeds.len() {
        let eps_prev = epsilons[level - 1];
        let next = (level..seeds.len())
            .map(|j| beta_recursion(grid, &row[0], eps_prev, &row[j - level + 1], epsilons[j]))
            .collect::<Result<Vec<_>>>()?;
        let locations: Vec<f64> =
            next[0].iter().enumerate().filter(|(_, b)| !b.is_finite()).map(|(i, _)| grid.x(i)).collect();
        if !locations.is_empty() {
            return Err(Error::SingularDenominator { locations });
        }
        betas.push(next[0].clone());
        row = next;
    }
    Ok(BetaChain { epsilons, betas })
}

/// `V_{j}` for `j = 0..=k` from the sum form `V0 - sum_{i<=j} beta_i'`.
pub fn chain_potentials(model: &Model, grid: &Grid, chain: &BetaChain) -> Vec<Vec<f64>> {
    let h = grid.h();
    let mut current = grid.potential(model);
    let mut out = vec![current.clone()];
    for beta in &chain.betas {
        let d = derivative(beta, h);
        current = current.iter().zip(&d).map(|(v, b)| v - b).collect();
        out.push(current.clone());
    }
    out
}

/// Riccati residual of every `beta_j` against the level-`(j-1)` potential.
pub fn chain_riccati_residuals(model: &Model, grid: &Grid, chain: &BetaChain) -> Vec<f64> {
    let potentials = chain_potentials(model, grid, chain);
    chain
        .betas
        .iter()
        .enumerate()
        .map(|(j, beta)| riccati_residual(beta, &potentials[j], chain.epsilons[j], grid.h()))
        .collect()
}

/// `V_k` on the grid interior by both formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    pub x: Vec<f64>,
    pub v0: Vec<f64>,
    pub sum_form: Vec<f64>,
    pub wronskian_form: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Determinant of a small square matrix by Gaussian elimination with partial pivoting.
fn small_det(mut a: Vec<Vec<f64>>) -> f64 {
    let k = a.len();
    let mut det = 1.0;
    for c in 0..k {
        let pivot = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[pivot][c] == 0.0 {
            return 0.0;
        }
        if pivot != c {
            a.swap(pivot, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for cc in c..k {
                a[r][cc] -= f * a[c][cc];
            }
        }
    }
    det
}

/// `ln |W(u_1, ..., u_k)|` and the sign of `W` at every grid point. Higher
/// derivatives come from `u^(r) = A_r u + B_r u'` with
/// `A_{r+1} = A_r' + 2 (V - eps) B_r`, `B_{r+1} = A_r + B_r'`.
pub fn log_wronskian(model: &Model, grid: &Grid, seeds: &[SeedSolution]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n_points;
    let k = seeds.len();
    let h = grid.h();
    let v = grid.potential(model);
    let coefficients: Vec<Vec<(Vec<f64>, Vec<f64>)>> = seeds
        .iter()
        .map(|seed| {
            let mut rows = vec![(vec![1.0; n], vec![0.0; n])];
            for r in 1..k {
                let (a, b) = &rows[r - 1];
                let (da, db) = (derivative(a, h), derivative(b, h));
                let next_a = (0..n).map(|i| da[i] + 2.0 * (v[i] - seed.epsilon) * b[i]).collect();
                let next_b = (0..n).map(|i| a[i] + db[i]).collect();
                rows.push((next_a, next_b));
            }
            rows
        })
        .collect();
    let mut log_w = vec![0.0; n];
    let mut sign = vec![0.0; n];
    for i in 0..n {
        let mut matrix = vec![vec![0.0; k]; k];
        let mut log_scale = 0.0;
        for (col, seed) in seeds.iter().enumerate() {
            let mut column: Vec<f64> = coefficients[col]
                .iter()
                .map(|(a, b)| a[i] * seed.u[i] + b[i] * seed.u_prime[i])
                .collect();
            let size = column.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if size > 0.0 {
                column.iter_mut().for_each(|c| *c /= size);
                log_scale += size.ln();
            }
            log_scale += seed.log_scale[i];
            for (row, c) in column.into_iter().enumerate() {
                matrix[row][col] = c;
            }
        }
        let det = small_det(matrix);
        log_w[i] = det.abs().ln() + log_scale;
        sign[i] = det.signum();
    }
    (log_w, sign)
}

/// Both forms of `V_k` on the interior points `2..n-3`.
pub fn partner_potential(model: &Model, grid: &Grid, chain: &BetaChain, seeds: &[SeedSolution]) -> Result<PotentialTable> {
    let n = grid.n_points;
    let h = grid.h();
    let (log_w, sign) = log_wronskian(model, grid, seeds);
    let mut bad = Vec::new();
    for i in 0..n {
        let flips = i + 1 < n && sign[i] * sign[i + 1] < 0.0;
        if !log_w[i].is_finite() || flips {
            bad.push(grid.x(i));
        }
    }
    if !bad.is_empty() {
        return Err(Error::SingularWronskian { locations: bad });
    }
    let potentials = chain_potentials(model, grid, chain);
    let v0 = &potentials[0];
    let vk = &potentials[chain.k()];
    let mut table = PotentialTable {
        x: Vec::new(),
        v0: Vec::new(),
        sum_form: Vec::new(),
        wronskian_form: Vec::new(),
        max_discrepancy: 0.0,
    };
    for i in 2..n - 2 {
        let d2 = (-log_w[i + 2] + 16.0 * log_w[i + 1] - 30.0 * log_w[i] + 16.0 * log_w[i - 1] - log_w[i - 2])
            / (12.0 * h * h);
        let wronskian = v0[i] - d2;
        table.x.push(grid.x(i));
        table.v0.push(v0[i]);
        table.sum_form.push(vk[i]);
        table.wronskian_form.push(wronskian);
        table.max_discrepancy = table.max_discrepancy.max((vk[i] - wronskian).abs());
    }
    Ok(table)
}

/// Closed-form normalized eigenfunction `psi_n^(0)` of the built-in models.
pub fn eigenfunction(model: &Model, n: usize, grid: &Grid) -> Result<Vec<f64>> {
    grid.check(model)?;
    let xs = grid.points();
    match model.nu() {
        None => Ok(xs.iter().map(|&x| hermite_function(n, x)).collect()),
        Some(nu) => {
            let log_norm = 0.5 * (PI.ln() + (1.0 - 2.0 * nu) * 2f64.ln() + libm::lgamma(n as f64 + 2.0 * nu)
                - libm::lgamma(n as f64 + 1.0)
                - (n as f64 + nu).ln()
                - 2.0 * libm::lgamma(nu));
            Ok(xs
                .iter()
                .map(|&x| x.cos().powf(nu) * gegenbauer(n, nu, x.sin()) * (-log_norm).exp())
                .collect())
        }
    }
}

fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        let next = (2.0 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn gegenbauer(n: usize, nu: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * nu * t;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 * t * (kf + nu) * cur - (kf + 2.0 * nu - 1.0) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn apply_b_dag(psi: &[f64], chain: &BetaChain, h: f64) -> Vec<f64> {
    let mut current = psi.to_vec();
    for beta in &chain.betas {
        let d = derivative(&current, h);
        current = (0..current.len()).map(|i| (-d[i] + beta[i] * current[i]) / SQRT_2).collect();
    }
    current
}

/// `psi_n^(k) = B_k^dag psi_n^(0) / sqrt(prod_i (E_n - eps_i))`.
pub fn transform_eigenfunction(grid: &Grid, chain: &BetaChain, psi0: &[f64], energy: f64) -> Result<Vec<f64>> {
    let product: f64 = chain.epsilons.iter().map(|e| energy - e).product();
    if !(product > 0.0) {
        return Err(Error::InvalidParameter(format!("energy {energy} is not above the factorization energies")));
    }
    let scale = product.sqrt();
    Ok(apply_b_dag(psi0, chain, grid.h()).into_iter().map(|v| v / scale).collect())
}

/// Trapezoidal `<f, g>` on the grid.
pub fn inner_product(grid: &Grid, f: &[f64], g: &[f64]) -> f64 {
    let n = f.len();
    let inner: f64 = (1..n - 1).map(|i| f[i] * g[i]).sum();
    grid.h() * (inner + 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]))
}

pub fn l2_norm(grid: &Grid, f: &[f64]) -> f64 {
    inner_product(grid, f, f).sqrt()
}

fn hamiltonian(f: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let d2 = second_derivative(f, h);
    (0..f.len()).map(|i| -0.5 * d2[i] + v[i] * f[i]).collect()
}

/// `max ||(Hk Bk^dag - Bk^dag H0) phi|| / ||Bk^dag phi||` over the test
/// functions, away from the grid ends where one-sided stencils reach in.
pub fn intertwining_residual(model: &Model, grid: &Grid, chain: &BetaChain, tests: &[Vec<f64>]) -> f64 {
    let h = grid.h();
    let potentials = chain_potentials(model, grid, chain);
    let v0 = &potentials[0];
    let vk = &potentials[chain.k()];
    let margin = chain.k() + 4;
    let n = grid.n_points;
    let interior = |f: &[f64]| (margin..n - margin).map(|i| f[i] * f[i]).sum::<f64>().sqrt();
    tests
        .iter()
        .map(|phi| {
            let lifted = apply_b_dag(phi, chain, h);
            let left = hamiltonian(&lifted, vk, h);
            let right = apply_b_dag(&hamiltonian(phi, v0, h), chain, h);
            let diff: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a - b).collect();
            interior(&diff) / interior(&lifted)
        })
        .fold(0.0, f64::max)
}

/// For `k = 1`: the state `~ 1/u` at the factorization energy, normalized on
/// the grid, together with the seed's normalizability verdict.
pub fn isolated_state(seed: &SeedSolution) -> Result<(Vec<f64>, bool)> {
    let zeros = seed.zero_crossings();
    if !zeros.is_empty() {
        return Err(Error::ZeroCrossing { locations: zeros });
    }
    let log_u = seed.log_abs();
    let min = log_u.iter().cloned().fold(f64::INFINITY, f64::min);
    let sign = seed.u[seed.grid.nearest(0.5 * (seed.grid.x_min + seed.grid.x_max))].signum();
    let raw: Vec<f64> = log_u.iter().map(|l| sign * (min - l).exp()).collect();
    let norm = l2_norm(&seed.grid, &raw);
    Ok((raw.into_iter().map(|v| v / norm).collect(), seed.normalizable))
}

/// Seeds, chain and potential table for a full configuration.
#[derive(Debug, Clone)]
pub struct Darboux {
    pub seeds: Vec<SeedSolution>,
    pub chain: BetaChain,
    pub table: PotentialTable,
}

pub fn darboux(model: &Model, cfg: &SusyConfig, grid: &Grid) -> Result<Darboux> {
    if cfg.k() == 0 {
        return Err(Error::InvalidSusyConfig("position-space partners need at least one factorization energy".into()));
    }
    let seeds = default_seeds(model, cfg, grid)?;
    let chain = build_chain(grid, &seeds)?;
    let table = partner_potential(model, grid, &chain, &seeds)?;
    Ok(Darboux { seeds, chain, table })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ho_grid() -> Grid {
        Grid::new(-4.0, 4.0, 801).unwrap()
    }

    fn pt_grid() -> Grid {
        Grid::new(-1.2, 1.2, 801).unwrap()
    }

    fn pt2() -> Model {
        Model::poschl_teller(2.0).unwrap()
    }

    fn sup(a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
        a.iter().enumerate().map(|(i, v)| (v - b(i)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_rules() {
        assert!(Grid::new(0.0, 1.0, 100).is_err());
        assert!(Grid::new(1.0, 0.0, 201).is_err());
        let g = Grid::new(-1.0, 1.0, 201).unwrap();
        assert_eq!(g.nearest(0.0), 100);
        assert!((g.h() - 0.01).abs() < 1e-15);
        assert!(matches!(Grid::new(-1.55, 1.2, 201).unwrap().check(&pt2()), Err(Error::PoleProximity { .. })));
        assert!(pt_grid().check(&pt2()).is_ok());
        let custom = Model::custom_table(vec![1.0, 2.0]).unwrap();
        assert!(ho_grid().check(&custom).is_err());
    }

    #[test]
    fn oscillator_seed() {
        let grid = ho_grid();
        let seed = solve_seed(&Model::harmonic(), -0.5, &grid, SeedInit::even()).unwrap();
        let rel = (0..grid.n_points)
            .map(|i| {
                let x = grid.x(i);
                (seed.value(i) / (0.5 * x * x).exp() - 1.0).abs()
            })
            .fold(0.0, f64::max);
        assert!(rel < 1e-8, "{rel}");
        let beta = beta_from_seed(&seed).unwrap();
        assert!(sup(&beta, |i| grid.x(i)) < 1e-8);
        assert!((beta[grid.nearest(1.0)] - 1.0).abs() < 1e-8);
        let v: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
        assert!(riccati_residual(&beta, &v, -0.5, grid.h()) < 1e-6);
        assert!(seed.normalizable);
    }

    #[test]
    fn pt_seed_residual() {
        let seed = solve_seed(&pt2(), -0.5, &pt_grid(), SeedInit::even()).unwrap();
        assert!(seed_residual(&pt2(), &seed) < 1e-6);
        assert!(seed.normalizable);
    }

    #[test]
    fn seed_preconditions() {
        let grid = ho_grid();
        assert!(solve_seed(&Model::harmonic(), 0.5, &grid, SeedInit::even()).is_err());
        let far = SeedInit { anchor: 10.0, u0: 1.0, du0: 0.0 };
        assert!(matches!(solve_seed(&Model::harmonic(), -0.5, &grid, far), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn noded_seed_is_rejected() {
        let seed = solve_seed(&Model::harmonic(), -1.5, &ho_grid(), SeedInit::odd()).unwrap();
        assert!(matches!(beta_from_seed(&seed), Err(Error::ZeroCrossing { .. })));
        assert!(!seed.normalizable);
    }

    #[test]
    fn rescaling_keeps_values() {
        let grid = Grid::new(-40.0, 40.0, 8001).unwrap();
        let seed = solve_seed(&Model::harmonic(), -0.5, &grid, SeedInit::even()).unwrap();
        assert!(seed.log_scale.iter().any(|&s| s > 0.0));
        let end = grid.n_points - 1;
        let log_u = seed.log_abs()[end];
        assert!((log_u - 800.0).abs() < 1e-6 * 800.0, "{log_u}");
        let beta = beta_from_seed(&seed).unwrap();
        assert!((beta[end] - 40.0).abs() < 1e-6);
        assert!(seed.normalizable);
    }

    #[test]
    fn first_order_oscillator_partner() {
        let model = Model::harmonic();
        let grid = ho_grid();
        let cfg = SusyConfig::new(&model, vec![-0.5]).unwrap();
        let d = darboux(&model, &cfg, &grid).unwrap();
        assert!(sup(&d.table.sum_form, |i| 0.5 * d.table.x[i] * d.table.x[i] - 1.0) < 1e-6);
        assert!(d.table.max_discrepancy < 1e-6, "{}", d.table.max_discrepancy);
    }

    #[test]
    fn second_order_oscillator_partner() {
        let model = Model::harmonic();
        let grid = ho_grid();
        let cfg = SusyConfig::new(&model, vec![-0.5, -1.5]).unwrap();
        let d = darboux(&model, &cfg, &grid).unwrap();
        let inner = 1..grid.n_points - 1;
        assert!(sup(&d.chain.betas[1][inner.clone()], |i| grid.x(i + 1)) < 1e-6);
        assert!(sup(&d.table.sum_form, |i| 0.5 * d.table.x[i] * d.table.x[i] - 2.0) < 1e-6);
        assert!(d.table.max_discrepancy < 1e-6, "{}", d.table.max_discrepancy);
        for r in chain_riccati_residuals(&model, &grid, &d.chain) {
            assert!(r < 1e-5, "{r}");
        }
    }

    #[test]
    fn pt_partner_forms_agree() {
        let model = pt2();
        let cfg = SusyConfig::new(&model, vec![-0.5]).unwrap();
        // the sum form carries the O(h^2) error of the three-point beta'
        let coarse = darboux(&model, &cfg, &pt_grid()).unwrap().table.max_discrepancy;
        let fine = darboux(&model, &cfg, &Grid::new(-1.2, 1.2, 6401).unwrap()).unwrap().table.max_discrepancy;
        assert!(fine < 1e-5, "{fine}");
        assert!(coarse / fine > 50.0);
    }

    #[test]
    fn singular_denominator_is_reported() {
        let grid = Grid::new(-1.0, 1.0, 201).unwrap();
        let a: Vec<f64> = grid.points();
        let b = vec![0.0; grid.n_points];
        assert!(matches!(beta_recursion(&grid, &a, -0.5, &b, -1.5), Err(Error::SingularDenominator { .. })));
        let fine: Vec<f64> = grid.points().iter().map(|x| if x.abs() < 1e-12 { f64::INFINITY } else { 1.0 / x }).collect();
        assert!(beta_recursion(&grid, &vec![0.0; grid.n_points], -0.5, &fine, -1.5).is_ok());
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        let grid = Grid::new(-8.0, 8.0, 1601).unwrap();
        let model = Model::harmonic();
        let fs: Vec<Vec<f64>> = (0..4).map(|n| eigenfunction(&model, n, &grid).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner_product(&grid, &fs[i], &fs[j]) - expected).abs() < 1e-10);
            }
        }
        let grid = Grid::new(-FRAC_PI_2 + PT_GUARD, FRAC_PI_2 - PT_GUARD, 2001).unwrap();
        let model = pt2();
        for n in 0..4 {
            let f = eigenfunction(&model, n, &grid).unwrap();
            assert!((l2_norm(&grid, &f) - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn transformed_ground_state() {
        let model = Model::harmonic();
        let grid = ho_grid();
        let cfg = SusyConfig::new(&model, vec![-0.5]).unwrap();
        let d = darboux(&model, &cfg, &grid).unwrap();
        let psi0 = eigenfunction(&model, 0, &grid).unwrap();
        let psi = transform_eigenfunction(&grid, &d.chain, &psi0, 0.5).unwrap();
        let expected: Vec<f64> = grid.points().iter().zip(&psi0).map(|(x, p)| SQRT_2 * x * p).collect();
        assert!(sup(&psi[1..800], |i| expected[i + 1]) < 1e-4);
        assert!((l2_norm(&grid, &psi) - 1.0).abs() < 1e-4);
        let psi1 = transform_eigenfunction(&grid, &d.chain, &eigenfunction(&model, 1, &grid).unwrap(), 1.5).unwrap();
        assert!(inner_product(&grid, &psi, &psi1).abs() < 1e-4);
    }

    #[test]
    fn intertwining_converges() {
        let model = Model::harmonic();
        let cfg = SusyConfig::new(&model, vec![-0.5]).unwrap();
        let residual = |n: usize| {
            let grid = Grid::new(-4.0, 4.0, n).unwrap();
            let d = darboux(&model, &cfg, &grid).unwrap();
            let tests: Vec<Vec<f64>> = (0..5).map(|k| eigenfunction(&model, k, &grid).unwrap()).collect();
            intertwining_residual(&model, &grid, &d.chain, &tests)
        };
        let (r1, r2, r3) = (residual(401), residual(801), residual(1601));
        assert!(r3 < 1e-4, "{r3}");
        assert!(r1 / r2 > 3.5 && r2 / r3 > 3.5, "{r1} {r2} {r3}");
    }

    #[test]
    fn pt_intertwining() {
        let model = pt2();
        let cfg = SusyConfig::new(&model, vec![-0.5]).unwrap();
        let grid = pt_grid();
        let d = darboux(&model, &cfg, &grid).unwrap();
        let tests: Vec<Vec<f64>> = (0..4).map(|k| eigenfunction(&model, k, &grid).unwrap()).collect();
        assert!(intertwining_residual(&model, &grid, &d.chain, &tests) < 1e-3);
    }

    #[test]
    fn isolated_ground_state() {
        let model = Model::harmonic();
        let grid = ho_grid();
        let seed = solve_seed(&model, -0.5, &grid, SeedInit::even()).unwrap();
        let (psi, normalizable) = isolated_state(&seed).unwrap();
        assert!(normalizable);
        let gauss: Vec<f64> = grid.points().iter().map(|x| PI.powf(-0.25) * (-0.5 * x * x).exp()).collect();
        assert!(sup(&psi, |i| gauss[i]) < 1e-6);
        let spec = crate::susy::partner_spectrum(&model, &SusyConfig::new(&model, vec![-0.5]).unwrap(), 1, 4).unwrap();
        assert!(spec.energies().contains(&-0.5));
    }

    #[test]
    fn chain_consistency_first_order() {
        // b1 b1^dag + eps1 reproduces H0 on its eigenfunctions
        let model = Model::harmonic();
        let grid = ho_grid();
        let seed = solve_seed(&model, -0.5, &grid, SeedInit::even()).unwrap();
        let beta = beta_from_seed(&seed).unwrap();
        let h = grid.h();
        for n in 0..3 {
            let psi = eigenfunction(&model, n, &grid).unwrap();
            let dpsi = derivative(&psi, h);
            let up: Vec<f64> = (0..psi.len()).map(|i| (-dpsi[i] + beta[i] * psi[i]) / SQRT_2).collect();
            let dup = derivative(&up, h);
            let down: Vec<f64> = (0..psi.len()).map(|i| (dup[i] + beta[i] * up[i]) / SQRT_2 - 0.5 * psi[i]).collect();
            let e = model.energy(n).unwrap();
            let worst = (5..psi.len() - 5).map(|i| (down[i] - e * psi[i]).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-3, "{worst}");
        }
    }
}
