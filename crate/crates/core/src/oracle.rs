//! Brute-force validator built from truncated matrices.
//!
//! Only the ladder coefficients `r(n)`, the energies and `prod_i (E_n - eps_i)`
//! enter the matrices; every composite operator is a matrix product. The
//! checks then compare these products against the closed-form structure
//! functions, and the uncertainty products against raw matrix moments.

use num_complex::Complex64 as C64;

use crate::coherent::{CoefficientVector, CoherentSpec};
use crate::error::{Error, Result};
use crate::ladder::{self, LadderSpec};
use crate::spectrum::Model;
use crate::susy::{self, SusyConfig};
use crate::uncertainty::{self, QuadratureKind};

pub const DEFAULT_DIM: usize = 256;
pub const MIN_DIM: usize = 8;

/// Terms of the matrix-built coherent vector below this relative weight are
/// considered converged.
const VECTOR_TAIL: f64 = 1e-30;

/// Square dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut out = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            out[(i, i)] = C64::new(*v, 0.0);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Matrix product; zero entries of `self` are skipped, so banded operands
    /// cost `O(nnz * D)`.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out.data[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    if *b != C64::new(0.0, 0.0) {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, n: usize) -> Matrix {
        let mut out = self.clone();
        for _ in 1..n.max(1) {
            out = out.mul(self);
        }
        if n == 0 {
            Self::identity(self.dim)
        } else {
            out
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { dim: self.dim, data }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { dim: self.dim, data }
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                self.data[i * d..(i + 1) * d]
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| **a != C64::new(0.0, 0.0))
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// Eigenbasis `|psi_n^(0)>` of `H0`.
    H0,
    /// Isospectral eigenbasis `|psi_n^(k)>` of `Hk`.
    HkIso,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub tag: BasisTag,
    pub matrix: Matrix,
}

impl TruncatedOperator {
    fn new(tag: BasisTag, matrix: Matrix) -> Self {
        TruncatedOperator { tag, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Single-step annihilation matrix with `a[n-1][n] = r(n)`; no dimension limits.
pub fn ladder_matrix(model: &Model, alpha: f64, dim: usize) -> Result<Matrix> {
    let mut a = Matrix::zeros(dim);
    for n in 1..dim {
        a[(n - 1, n)] = ladder::r_coefficient(model, alpha, n)?;
    }
    Ok(a)
}

/// All operators of one configuration. `b` maps the `Hk` basis to the `H0`
/// basis; without factorization energies it is the identity and the `Hk`
/// operators coincide with their `H0` counterparts.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub model: Model,
    pub cfg: Option<SusyConfig>,
    pub ladder: LadderSpec,
    pub a: TruncatedOperator,
    pub a_dag: TruncatedOperator,
    pub a_m: TruncatedOperator,
    pub a_m_dag: TruncatedOperator,
    pub h0: TruncatedOperator,
    pub b: TruncatedOperator,
    pub b_dag: TruncatedOperator,
    pub ell: TruncatedOperator,
    pub ell_dag: TruncatedOperator,
    /// `Bk^dag a Bk`, the single-step ladder operator of `Hk`.
    pub ell_one: TruncatedOperator,
    pub hk: TruncatedOperator,
    pub n: TruncatedOperator,
    pub n_k: TruncatedOperator,
}

impl OperatorSet {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn m(&self) -> usize {
        self.ladder.m()
    }
}

pub fn build(model: &Model, cfg: Option<&SusyConfig>, ladder: LadderSpec, dim: usize) -> Result<OperatorSet> {
    let m = ladder.m();
    let required = MIN_DIM.max(2 * m + 1);
    if dim < required {
        return Err(Error::DimensionTooSmall { dim, required });
    }
    let trivial = SusyConfig::trivial();
    let config = cfg.unwrap_or(&trivial);

    let a = ladder_matrix(model, ladder.alpha(), dim)?;
    let a_dag = a.adjoint();
    let a_m = a.pow(m);
    let a_m_dag = a_dag.pow(m);
    let energies = (0..dim).map(|n| model.energy(n)).collect::<Result<Vec<_>>>()?;
    let h0 = Matrix::diagonal(&energies);
    let root_bk = (0..dim)
        .map(|n| susy::bk_eigenvalue(model, config, n).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    let b = Matrix::diagonal(&root_bk);
    let b_dag = b.adjoint();
    let ell = b_dag.mul(&a_m).mul(&b);
    let ell_dag = b_dag.mul(&a_m_dag).mul(&b);
    let ell_one = b_dag.mul(&a).mul(&b);
    let number = Matrix::diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>());

    use BasisTag::*;
    Ok(OperatorSet {
        model: model.clone(),
        cfg: cfg.cloned(),
        ladder,
        a: TruncatedOperator::new(H0, a),
        a_dag: TruncatedOperator::new(H0, a_dag),
        a_m: TruncatedOperator::new(H0, a_m),
        a_m_dag: TruncatedOperator::new(H0, a_m_dag),
        h0: TruncatedOperator::new(H0, h0.clone()),
        b: TruncatedOperator::new(H0, b),
        b_dag: TruncatedOperator::new(HkIso, b_dag),
        ell: TruncatedOperator::new(HkIso, ell),
        ell_dag: TruncatedOperator::new(HkIso, ell_dag),
        ell_one: TruncatedOperator::new(HkIso, ell_one),
        hk: TruncatedOperator::new(HkIso, h0),
        n: TruncatedOperator::new(H0, number.clone()),
        n_k: TruncatedOperator::new(HkIso, number),
    })
}

/// Outcome of one matrix identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub dim: usize,
    pub margin: usize,
    pub max_deviation: f64,
}

impl CheckResult {
    pub fn passes(&self, threshold: f64) -> bool {
        self.max_deviation < threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    pub checks: Vec<CheckResult>,
}

impl CommutatorReport {
    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }

    pub fn passes(&self, threshold: f64) -> bool {
        self.checks.iter().all(|c| c.passes(threshold))
    }
}

pub fn default_margin(m: usize) -> usize {
    2 * m + 2
}

/// Largest entrywise deviation of `[x, y]` from `predicted` on the leading
/// `rows x rows` block, each entry measured relative to `max(1, |xy| + |yx|)`.
fn commutator_deviation(x: &Matrix, y: &Matrix, predicted: &Matrix, rows: usize) -> f64 {
    let xy = x.mul(y);
    let yx = y.mul(x);
    let mut worst = 0.0f64;
    for i in 0..rows {
        for j in 0..rows {
            let got = xy[(i, j)] - yx[(i, j)];
            let scale = (xy[(i, j)].norm() + yx[(i, j)].norm()).max(1.0);
            worst = worst.max((got - predicted[(i, j)]).norm() / scale);
        }
    }
    worst
}

fn diag_times(values: &[f64], m: &Matrix) -> Matrix {
    Matrix::diagonal(values).mul(m)
}

/// Compares matrix commutators with the closed-form structure functions on
/// rows and columns below `dim - margin`.
pub fn check_commutators(ops: &OperatorSet, margin: usize) -> Result<CommutatorReport> {
    let d = ops.dim();
    let m = ops.m();
    let rows = d.saturating_sub(margin);
    let model = &ops.model;
    let mut checks = Vec::new();
    let mut push = |name: &str, dev: f64| {
        checks.push(CheckResult { name: name.to_string(), dim: d, margin, max_deviation: dev })
    };

    let f1 = (0..d).map(|n| ladder::commutator_structure(model, 1, n)).collect::<Result<Vec<_>>>()?;
    push("[a,a+]", commutator_deviation(&ops.a.matrix, &ops.a_dag.matrix, &Matrix::diagonal(&f1), rows));

    let fm = (0..d).map(|n| ladder::commutator_structure(model, m, n)).collect::<Result<Vec<_>>>()?;
    push("[a_m,a_m+]", commutator_deviation(&ops.a_m.matrix, &ops.a_m_dag.matrix, &Matrix::diagonal(&fm), rows));

    let factors = (0..d).map(|n| susy::hk_ladder_factors(model, m, n)).collect::<Result<Vec<_>>>()?;
    let create: Vec<f64> = factors.iter().map(|f| f.0).collect();
    let annihilate: Vec<f64> = factors.iter().map(|f| -f.1).collect();
    push(
        "[H0,a_m+]",
        commutator_deviation(&ops.h0.matrix, &ops.a_m_dag.matrix, &diag_times(&create, &ops.a_m_dag.matrix), rows),
    );
    push(
        "[H0,a_m]",
        commutator_deviation(&ops.h0.matrix, &ops.a_m.matrix, &diag_times(&annihilate, &ops.a_m.matrix), rows),
    );

    if let Some(cfg) = &ops.cfg {
        let fk = (0..d)
            .map(|n| susy::commutator_structure_susy(model, cfg, m, n))
            .collect::<Result<Vec<_>>>()?;
        push("[l,l+]", commutator_deviation(&ops.ell.matrix, &ops.ell_dag.matrix, &Matrix::diagonal(&fk), rows));
        push(
            "[Hk,l+]",
            commutator_deviation(&ops.hk.matrix, &ops.ell_dag.matrix, &diag_times(&create, &ops.ell_dag.matrix), rows),
        );
        push(
            "[Hk,l]",
            commutator_deviation(&ops.hk.matrix, &ops.ell.matrix, &diag_times(&annihilate, &ops.ell.matrix), rows),
        );
        let intertwining = ops.hk.matrix.mul(&ops.b_dag.matrix).sub(&ops.b_dag.matrix.mul(&ops.h0.matrix));
        push("HkB+-B+H0", max_abs(&intertwining, d));
    }

    push("a_m+ = (a_m)+", hermitian_pairing(&ops.a_m.matrix, &ops.a_m_dag.matrix));
    if ops.cfg.is_some() {
        push("l+ = (l)+", hermitian_pairing(&ops.ell.matrix, &ops.ell_dag.matrix));
    }
    push("shift(a_m)", off_band(&ops.a_m.matrix, m));
    Ok(CommutatorReport { checks })
}

fn max_abs(x: &Matrix, rows: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..rows {
        for j in 0..rows {
            worst = worst.max(x[(i, j)].norm());
        }
    }
    worst
}

fn hermitian_pairing(x: &Matrix, x_dag: &Matrix) -> f64 {
    let adj = x.adjoint();
    let d = x.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let scale = adj[(i, j)].norm().max(1.0);
            worst = worst.max((adj[(i, j)] - x_dag[(i, j)]).norm() / scale);
        }
    }
    worst
}

/// Largest entry of `x` off the `j - i = m` band.
fn off_band(x: &Matrix, m: usize) -> f64 {
    let d = x.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if j != i + m {
                worst = worst.max(x[(i, j)].norm());
            }
        }
    }
    worst
}

fn step_operator<'a>(ops: &'a OperatorSet, kind: QuadratureKind) -> &'a Matrix {
    match kind {
        QuadratureKind::IntrinsicH0 => &ops.a.matrix,
        QuadratureKind::MultiphotonH0 => &ops.a_m.matrix,
        QuadratureKind::NaturalHk => &ops.ell_one.matrix,
        QuadratureKind::MultiphotonHk => &ops.ell.matrix,
    }
}

/// Coherent state built from the annihilation matrix alone:
/// `v[p] = z v[p - m] / L[p - m][p]`, stopping `2m` short of the truncation.
pub fn matrix_coherent_vector(ops: &OperatorSet, spec: &CoherentSpec) -> Result<Vec<C64>> {
    let d = ops.dim();
    let m = spec.m;
    if m != ops.m() {
        return Err(Error::InvalidParameter(format!("operator set has m = {}, state has m = {m}", ops.m())));
    }
    let annihilator = if spec.cfg.is_some() { &ops.ell.matrix } else { &ops.a_m.matrix };
    let limit = d - 2 * m;
    if spec.j >= limit {
        return Err(Error::DimensionTooSmall { dim: d, required: spec.j + 2 * m + 1 });
    }
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[spec.j] = C64::new(1.0, 0.0);
    let mut norm = 1.0;
    let mut last = 1.0;
    let mut p = spec.j + m;
    while p < limit {
        let entry = annihilator[(p - m, p)];
        v[p] = spec.z * v[p - m] / entry;
        last = v[p].norm_sqr();
        norm += last;
        p += m;
    }
    if spec.z.norm() > 0.0 && last > VECTOR_TAIL * norm {
        return Err(Error::DimensionTooSmall { dim: d, required: 2 * d });
    }
    let scale = norm.sqrt();
    Ok(v.into_iter().map(|c| c / scale).collect())
}

fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `(Delta X)(Delta P)` from raw matrix moments on a prebuilt operator set.
pub fn oracle_uncertainty_with(ops: &OperatorSet, spec: &CoherentSpec, kind: QuadratureKind) -> Result<f64> {
    kind.check(spec)?;
    let v = matrix_coherent_vector(ops, spec)?;
    let a = step_operator(ops, kind);
    let a_dag = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = a_dag.add(a).scale(C64::new(s, 0.0));
    let p = a_dag.sub(a).scale(C64::new(0.0, s));
    let variance = |q: &Matrix| {
        let qv = q.matvec(&v);
        let mean = inner(&v, &qv).re;
        let second = inner(&qv, &qv).re;
        (second - mean * mean).max(0.0)
    };
    Ok(variance(&x).sqrt() * variance(&p).sqrt())
}

pub fn oracle_uncertainty(spec: &CoherentSpec, kind: QuadratureKind, dim: usize) -> Result<f64> {
    let ops = build(&spec.model, spec.cfg.as_ref(), spec.ladder_spec(), dim)?;
    oracle_uncertainty_with(&ops, spec, kind)
}

/// `|closed form - oracle|`.
pub fn compare(spec: &CoherentSpec, kind: QuadratureKind, dim: usize) -> Result<f64> {
    let closed = uncertainty::uncertainty_product(spec, kind)?;
    Ok((closed - oracle_uncertainty(spec, kind, dim)?).abs())
}

/// `|| L v - z v ||` through the matrix of `a_m` (or `l_{k,m}`), with `v` the
/// truncated coefficient vector embedded by level.
pub fn matrix_eigen_residual(ops: &OperatorSet, spec: &CoherentSpec, vector: &CoefficientVector) -> Result<f64> {
    let d = ops.dim();
    let mut v = vec![C64::new(0.0, 0.0); d];
    for (level, c) in vector.levels() {
        if level >= d {
            return Err(Error::DimensionTooSmall { dim: d, required: level + 1 });
        }
        v[level] = c;
    }
    let annihilator = if spec.cfg.is_some() { &ops.ell.matrix } else { &ops.a_m.matrix };
    let image = annihilator.matvec(&v);
    Ok(image.iter().zip(&v).map(|(lv, x)| (lv - spec.z * x).norm_sqr()).sum::<f64>().sqrt())
}
