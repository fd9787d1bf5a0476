//! Dense complex linear algebra for small qudit dimensions (2 through 16).
//!
//! Everything here works on row-major `ComplexMatrix` values. The Hermitian
//! eigensolver is a cyclic complex Jacobi method, which is plenty for the
//! matrix sizes this crate deals with and has no failure modes on Hermitian
//! input.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::states::DensityState;

pub type C64 = Complex64;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 16;

/// Symmetry tolerance accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |j, k| if j == k { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                entries.push(f(j, k));
            }
        }
        Self { dim, entries }
    }

    /// Builds a matrix from row-major entries; the length must be a perfect square.
    pub fn from_entries(entries: Vec<C64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("rows of unequal length".into()));
        }
        Ok(Self::from_fn(dim, |j, k| rows[j][k]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("rows of unequal length".into()));
        }
        Ok(Self::from_fn(dim, |j, k| c64(rows[j][k], 0.0)))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |j, k| {
            if j == k {
                c64(values[j], 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
    }

    /// The projector `|v><v|`.
    pub fn outer(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), |j, k| ket[j] * ket[k].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(k, j)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|j| self[(j, j)]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c64(factor, 0.0))
    }

    /// Hilbert–Schmidt inner product `tr(self^dagger other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M_jk - conj(M_kj)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.dim {
            for k in j..self.dim {
                worst = worst.max((self[(j, k)] - self[(k, j)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |j, k| (self[(j, k)] + self[(k, j)].conj()) * 0.5)
    }

    pub fn pow(&self, power: usize) -> Self {
        let mut result = Self::identity(self.dim);
        for _ in 0..power {
            result = &result * self;
        }
        result
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|k| self[(j, k)] * v[k]).sum())
            .collect()
    }

    /// `<v| M |v>` for a (not necessarily normalized) ket.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mut acc = c64(0.0, 0.0);
        for j in 0..self.dim {
            let mut row = c64(0.0, 0.0);
            for k in 0..self.dim {
                row += self[(j, k)] * v[k];
            }
            acc += v[j].conj() * row;
        }
        acc
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.dim;
        let mut acc = c64(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += self[(j, k)] * other[(k, j)];
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        &self.entries[j * self.dim + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut C64 {
        &mut self.entries[j * self.dim + k]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            for l in 0..n {
                let a = self.entries[j * n + l];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    out.entries[j * n + k] += a * rhs.entries[l * n + k];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for j in 0..self.dim {
            write!(f, "  ")?;
            for k in 0..self.dim {
                let z = self[(j, k)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are ascending; column `k` of `eigenvectors` belongs to
/// `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        let n = self.eigenvectors.dim();
        (0..n).map(|j| self.eigenvectors[(j, k)]).collect()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.dim();
        ComplexMatrix::from_fn(n, |j, k| {
            (0..n)
                .map(|l| v[(j, l)] * self.eigenvalues[l] * v[(k, l)].conj())
                .sum()
        })
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = h.dim();
    if n > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim: n, max: MAX_DIM });
    }
    let residual = h.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { residual });
    }

    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    if scale > 0.0 {
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) < JACOBI_REL_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |j, k| v[(j, order[k])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                sum += a[(j, k)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

// One complex Jacobi rotation annihilating a[p][q]. The unitary U acts on the
// (p, q) plane as diag(1, e^{-i alpha}) followed by the real rotation that
// diagonalizes the resulting real symmetric 2x2 block.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / b;
    let theta = (aqq - app) / (2.0 * b);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let u_pp = c64(c, 0.0);
    let u_pq = c64(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = c64(0.0, 0.0);
    a[(q, p)] = c64(0.0, 0.0);
    a[(p, p)] = c64(a[(p, p)].re, 0.0);
    a[(q, q)] = c64(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// `tr(M^power)` by repeated multiplication.
pub fn trace_power(m: &ComplexMatrix, power: usize) -> Result<C64> {
    if m.dim() > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: m.dim(),
            max: MAX_DIM,
        });
    }
    if power == 0 || power > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "trace power {power} outside 1..={MAX_DIM}"
        )));
    }
    if power == 1 {
        return Ok(m.trace());
    }
    let half = m.pow(power - 1);
    Ok(half.trace_product(m))
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Result of orthonormalizing up to three real 3-vectors.
///
/// `change` is the lower-triangular matrix whose rows hold the input vectors
/// in the new orthonormal frame (so `change * change^T` is the Gram matrix);
/// `inverse` maps the inputs onto the orthonormal vectors.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    pub basis: Vec<[f64; 3]>,
    pub change: Vec<Vec<f64>>,
    pub inverse: Vec<Vec<f64>>,
}

pub fn gram_matrix(vectors: &[[f64; 3]]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot3(a, b)).collect())
        .collect()
}

pub fn determinant(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => {
            // Laplace expansion along the first row; only used for tiny inputs.
            (0..m.len())
                .map(|c| {
                    let minor: Vec<Vec<f64>> = m[1..]
                        .iter()
                        .map(|row| {
                            row.iter()
                                .enumerate()
                                .filter(|&(k, _)| k != c)
                                .map(|(_, &x)| x)
                                .collect()
                        })
                        .collect();
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    sign * m[0][c] * determinant(&minor)
                })
                .sum()
        }
    }
}

pub fn gram_schmidt(vectors: &[[f64; 3]]) -> Result<GramSchmidt> {
    if vectors.is_empty() || vectors.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "gram_schmidt takes 1 to 3 vectors, got {}",
            vectors.len()
        )));
    }
    let det = determinant(&gram_matrix(vectors));
    if det < 1e-10 {
        return Err(Error::LinearlyDependent { det });
    }

    let k = vectors.len();
    let mut basis: Vec<[f64; 3]> = Vec::with_capacity(k);
    let mut change = vec![vec![0.0; k]; k];
    for (i, a) in vectors.iter().enumerate() {
        let mut w = *a;
        for (j, v) in basis.iter().enumerate() {
            let proj = dot3(a, v);
            change[i][j] = proj;
            for c in 0..3 {
                w[c] -= proj * v[c];
            }
        }
        let len = norm3(&w);
        change[i][i] = len;
        basis.push([w[0] / len, w[1] / len, w[2] / len]);
    }

    // forward substitution for the inverse of the lower-triangular change matrix
    let mut inverse = vec![vec![0.0; k]; k];
    for col in 0..k {
        for row in col..k {
            let rhs = if row == col { 1.0 } else { 0.0 };
            let acc: f64 = (col..row).map(|m| change[row][m] * inverse[m][col]).sum();
            inverse[row][col] = (rhs - acc) / change[row][row];
        }
    }

    Ok(GramSchmidt {
        basis,
        change,
        inverse,
    })
}

/// Deterministic random source used for fixtures and probe directions.
///
/// Uniforms come from ChaCha8 seeded through `seed_from_u64`; normals are
/// produced by the Box–Muller transform, consuming two uniforms per pair.
#[derive(Debug, Clone)]
pub struct SeededRng {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn complex_normal(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        c64(re, im)
    }

    /// Haar-random unit ket.
    pub fn ket(&mut self, dim: usize) -> Vec<C64> {
        let raw: Vec<C64> = (0..dim).map(|_| self.complex_normal()).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        raw.into_iter().map(|z| z / norm).collect()
    }

    /// Uniformly distributed unit vector in `R^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let raw: Vec<f64> = (0..n).map(|_| self.normal()).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return raw.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Random Hermitian matrix with independent Gaussian entries (GUE-like).
    pub fn hermitian(&mut self, dim: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(dim, |_, _| self.complex_normal());
        (&g + &g.adjoint()).scale_real(0.5)
    }
}

/// Seeded random density operator of the requested rank.
///
/// Rank one draws a Haar-random ket; higher ranks use the Ginibre
/// construction `G G^dagger / tr(G G^dagger)` with a `dim x rank` Gaussian `G`.
pub fn random_state(dim: usize, rank: usize, seed: u64) -> Result<DensityState> {
    let mut rng = SeededRng::new(seed);
    random_state_with(&mut rng, dim, rank)
}

pub fn random_state_with(rng: &mut SeededRng, dim: usize, rank: usize) -> Result<DensityState> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidDimension(dim));
    }
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} must lie in 1..={dim}"
        )));
    }
    if rank == 1 {
        let ket = rng.ket(dim);
        return DensityState::new(ComplexMatrix::outer(&ket));
    }
    let g: Vec<Vec<C64>> = (0..dim)
        .map(|_| (0..rank).map(|_| rng.complex_normal()).collect())
        .collect();
    let mut rho = ComplexMatrix::from_fn(dim, |j, k| {
        (0..rank).map(|l| g[j][l] * g[k][l].conj()).sum()
    });
    let tr = rho.trace().re;
    rho = rho.scale_real(1.0 / tr);
    // exact Hermiticity after rounding
    DensityState::new(rho.hermitian_part())
}
