//! Smallest eigenpairs of the pencil `S w = lambda M w`.
//!
//! The default strategy works with the inverted problem `M w = nu S w`: block
//! subspace iteration on `S^{-1} M` converges the largest `nu`, and `lambda = 1 / nu`.
//! Each sweep ends with a Rayleigh-Ritz projection so the block stays `M`-orthonormal.

use faer::linalg::solvers::Solve;
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem::sparse::{dot, norm2, CsrMatrix};

/// Sparse Cholesky factorization with a fill-reducing ordering.
pub struct Factorization {
    llt: Llt<usize, f64>,
    n: usize,
}

pub fn factorize(s: &CsrMatrix) -> Result<Factorization> {
    let a = s.to_faer()?;
    let llt = a.sp_cholesky(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
    Ok(Factorization { llt, n: s.n })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut block = vec![b.to_vec()];
        self.solve_block(&mut block);
        block.pop().unwrap()
    }

    /// Overwrites every vector with the solution of `S x = b`.
    pub fn solve_block(&self, vectors: &mut [Vec<f64>]) {
        if vectors.is_empty() {
            return;
        }
        let mut rhs = Mat::from_fn(self.n, vectors.len(), |i, j| vectors[j][i]);
        self.llt.solve_in_place(rhs.as_mut());
        for (j, v) in vectors.iter_mut().enumerate() {
            for (i, x) in v.iter_mut().enumerate() {
                *x = rhs[(i, j)];
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Iterate with `S^{-1} M` and invert the converged `nu`.
    #[default]
    Inverted,
    /// Iterate with `M^{-1} S`; dominated by the top of the spectrum, so it only
    /// succeeds when the subspace spans essentially everything.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub n_val: usize,
    pub n_sub: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub strategy: Strategy,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            n_val: 10,
            n_sub: 25,
            tolerance: 1e-6,
            max_iterations: 2000,
            seed: 0,
            strategy: Strategy::Inverted,
        }
    }
}

impl SolverParams {
    pub fn new(n_val: usize, n_sub: usize, tolerance: f64) -> Self {
        SolverParams { n_val, n_sub, tolerance, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_val < 1 {
            return Err(Error::InvalidParameter("n_val must be at least 1".into()));
        }
        if self.n_sub < self.n_val + 1 {
            return Err(Error::InvalidParameter(format!(
                "n_sub = {} must be at least n_val + 1 = {}",
                self.n_sub,
                self.n_val + 1
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `|S w - lambda M w| / |w|`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// Raw inverted values `1 / lambda`.
    pub nu: Vec<f64>,
}

impl EigenResult {
    /// Eigenvalues below the essential-spectrum threshold 1.
    pub fn bound_states(&self) -> Vec<f64> {
        self.eigenvalues.iter().copied().filter(|&l| l < 1.0).collect()
    }

    pub fn bound_state_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < 1.0).count()
    }
}

pub fn residual(s: &CsrMatrix, m: &CsrMatrix, lambda: f64, w: &[f64]) -> f64 {
    let sw = s.mul(w);
    let mw = m.mul(w);
    let r: Vec<f64> = sw.iter().zip(&mw).map(|(a, b)| a - lambda * b).collect();
    norm2(&r) / norm2(w)
}

/// Rayleigh-Ritz step: with `k = X^T A X`, `b = X^T B X`, returns ascending
/// `(values, Q)` where `Q^T b Q = I` and `Q^T k Q = diag(values)`.
fn projected_eigen(k: &Mat<f64>, b: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let p = k.nrows();
    let sym = |a: &Mat<f64>| Mat::from_fn(p, p, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let b = sym(b);
    let llt = b.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
    let l = llt.L();
    // c = L^{-1} k L^{-T}
    let mut w = sym(k);
    solve_lower_triangular_in_place(l, w.as_mut(), Par::Seq);
    let mut c = w.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = sym(&c);
    let eig = c.self_adjoint_eigen(Side::Lower).map_err(|_| {
        Error::Unresolved("dense symmetric eigensolver failed".into())
    })?;
    let values: Vec<f64> = (0..p).map(|i| eig.S().column_vector()[i]).collect();
    let mut q = eig.U().to_owned();
    solve_upper_triangular_in_place(l.transpose(), q.as_mut(), Par::Seq);
    Ok((values, q))
}

fn combine(block: &[Vec<f64>], q: &Mat<f64>, count: usize) -> Vec<Vec<f64>> {
    let n = block[0].len();
    (0..count)
        .map(|j| {
            let mut v = vec![0.0; n];
            for (i, b) in block.iter().enumerate() {
                let c = q[(i, j)];
                if c != 0.0 {
                    v.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
                }
            }
            v
        })
        .collect()
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> Mat<f64> {
    Mat::from_fn(a.len(), b.len(), |i, j| dot(&a[i], &b[j]))
}

fn start_block(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..p).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

/// Smallest `n_val` eigenpairs of `S w = lambda M w`.
pub fn solve_gevp(s: &CsrMatrix, m: &CsrMatrix, params: &SolverParams) -> Result<EigenResult> {
    params.validate()?;
    let n = s.n;
    if m.n != n {
        return Err(Error::InvalidParameter("S and M differ in size".into()));
    }
    if params.n_val > n {
        return Err(Error::InvalidParameter(format!("n_val = {} exceeds the dimension {n}", params.n_val)));
    }
    let p = params.n_sub.min(n);
    match params.strategy {
        Strategy::Inverted => {
            let fact = factorize(s)?;
            iterate(s, m, params, p, |block| {
                let mut y: Vec<Vec<f64>> = block.iter().map(|x| m.mul(x)).collect();
                let rhs = y.clone();
                fact.solve_block(&mut y);
                // y now holds S^{-1} M x; projected S is y^T (M x)
                let k = gram(&y, &rhs);
                let mb: Vec<Vec<f64>> = y.iter().map(|v| m.mul(v)).collect();
                let b = gram(&y, &mb);
                Ok((y, k, b))
            })
        }
        Strategy::Direct => {
            let fact = factorize(m)?;
            iterate(s, m, params, p, |block| {
                let mut y: Vec<Vec<f64>> = block.iter().map(|x| s.mul(x)).collect();
                fact.solve_block(&mut y);
                let sy: Vec<Vec<f64>> = y.iter().map(|v| s.mul(v)).collect();
                let my: Vec<Vec<f64>> = y.iter().map(|v| m.mul(v)).collect();
                Ok((y.clone(), gram(&y, &sy), gram(&y, &my)))
            })
        }
    }
}

/// One sweep maps the block to `(Y, Y^T S Y, Y^T M Y)`.
fn iterate(
    s: &CsrMatrix,
    m: &CsrMatrix,
    params: &SolverParams,
    p: usize,
    mut step: impl FnMut(&[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Mat<f64>, Mat<f64>)>,
) -> Result<EigenResult> {
    let n = s.n;
    let nv = params.n_val;
    let scale = s.norm1();
    let mut block = start_block(n, p, params.seed);
    let mut previous: Option<Vec<f64>> = None;
    let mut residuals = vec![f64::INFINITY; nv];
    for it in 1..=params.max_iterations {
        let (y, k, b) = step(&block)?;
        let (values, q) = projected_eigen(&k, &b)?;
        block = combine(&y, &q, p);
        let lambdas = values[..nv].to_vec();
        residuals = (0..nv).map(|j| residual(s, m, lambdas[j], &block[j])).collect();
        let settled = previous.as_ref().is_some_and(|old| {
            old.iter().zip(&lambdas).all(|(a, b)| (a - b).abs() <= params.tolerance * b.abs())
        });
        let small = residuals.iter().all(|&r| r <= params.tolerance * scale);
        if settled && small {
            return Ok(EigenResult {
                nu: lambdas.iter().map(|l| 1.0 / l).collect(),
                eigenvalues: lambdas,
                eigenvectors: block[..nv].to_vec(),
                residuals,
                iterations: it,
            });
        }
        previous = Some(lambdas);
    }
    Err(Error::NoConvergence { iterations: params.max_iterations, residuals })
}

/// Independent verification of a computed result.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub residuals: Vec<f64>,
    /// `max |w_i^T M w_j - delta_ij|`.
    pub orthonormality_error: f64,
    pub s_norm1: f64,
    pub tolerance: f64,
    pub sorted: bool,
    pub violations: Vec<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn certify(s: &CsrMatrix, m: &CsrMatrix, result: &EigenResult, tolerance: f64) -> CertificateReport {
    let residuals: Vec<f64> = result
        .eigenvalues
        .iter()
        .zip(&result.eigenvectors)
        .map(|(&l, w)| residual(s, m, l, w))
        .collect();
    let mw: Vec<Vec<f64>> = result.eigenvectors.iter().map(|w| m.mul(w)).collect();
    let mut orth: f64 = 0.0;
    for (i, wi) in result.eigenvectors.iter().enumerate() {
        for (j, mwj) in mw.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            orth = orth.max((dot(wi, mwj) - target).abs());
        }
    }
    let s_norm1 = s.norm1();
    let sorted = result.eigenvalues.windows(2).all(|w| w[0] <= w[1]);
    let mut violations = Vec::new();
    for (j, r) in residuals.iter().enumerate() {
        if !(*r <= tolerance * s_norm1) {
            violations.push(format!("residual of pair {} is {r:e} > {:e}", j + 1, tolerance * s_norm1));
        }
    }
    if orth > 1e-8 {
        violations.push(format!("M-orthonormality defect {orth:e}"));
    }
    if !sorted {
        violations.push("eigenvalues are not sorted".into());
    }
    CertificateReport { residuals, orthonormality_error: orth, s_norm1, tolerance, sorted, violations }
}
