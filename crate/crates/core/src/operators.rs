//! Named operator families: Weyl–Heisenberg basis, MUBs for prime
//! dimensions, spin-j angular momentum, the spin-1 nine-operator set, qubit
//! axis operators, SIC-POVMs and the two-projector fixture.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, cross3, hermitian_eig, norm3, ComplexMatrix, C64, MAX_DIM};
use crate::measures::EndpointPair;

/// Tolerance for the Hermitian flag attached to set members.
pub const HERMITIAN_FLAG_TOL: f64 = 1e-12;

/// An ordered, labeled list of `dim x dim` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    name: String,
    dim: usize,
    labels: Vec<String>,
    operators: Vec<ComplexMatrix>,
    hermitian: Vec<bool>,
}

impl OperatorSet {
    /// Builds a set, flagging each member Hermitian when it is so within
    /// [`HERMITIAN_FLAG_TOL`].
    pub fn new(name: impl Into<String>, members: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        let dim = members
            .first()
            .map(|(_, m)| m.dim())
            .ok_or_else(|| Error::InvalidArgument("operator set is empty".into()))?;
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
        }
        let mut labels = Vec::with_capacity(members.len());
        let mut operators = Vec::with_capacity(members.len());
        let mut hermitian = Vec::with_capacity(members.len());
        for (label, m) in members {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            hermitian.push(m.is_hermitian(HERMITIAN_FLAG_TOL));
            labels.push(label);
            operators.push(m);
        }
        Ok(Self {
            name: name.into(),
            dim,
            labels,
            operators,
            hermitian,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn operator(&self, i: usize) -> &ComplexMatrix {
        &self.operators[i]
    }

    pub fn is_hermitian(&self, i: usize) -> bool {
        self.hermitian[i]
    }

    pub fn all_hermitian(&self) -> bool {
        self.hermitian.iter().all(|&h| h)
    }

    /// Errors with the first non-Hermitian label, if any.
    pub fn require_hermitian(&self) -> Result<()> {
        match self.hermitian.iter().position(|&h| !h) {
            Some(i) => Err(Error::NonHermitianOperator(self.labels[i].clone())),
            None => Ok(()),
        }
    }

    pub fn get(&self, label: &str) -> Option<&ComplexMatrix> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.operators[i])
    }

    /// The first `n` members as a new set.
    pub fn prefix(&self, name: impl Into<String>, n: usize) -> Result<Self> {
        let members = self
            .labels
            .iter()
            .cloned()
            .zip(self.operators.iter().cloned())
            .take(n)
            .collect();
        Self::new(name, members)
    }

    /// Eigenvalue interval `[a_min, a_max]` of every member.
    pub fn endpoints(&self) -> Result<Vec<EndpointPair>> {
        self.require_hermitian()?;
        self.operators
            .iter()
            .map(|op| {
                let eig = hermitian_eig(op)?;
                EndpointPair::new(eig.min(), eig.max())
            })
            .collect()
    }

    /// `sum_i w_i A_i`.
    pub fn weighted_sum(&self, weights: &[f64]) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim);
        for (w, op) in weights.iter().zip(&self.operators) {
            if *w != 0.0 {
                acc = &acc + &op.scale_real(*w);
            }
        }
        acc
    }
}

/// Index pair of the Weyl operator `X^x Z^z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeylLabel {
    pub x: usize,
    pub z: usize,
}

impl WeylLabel {
    /// Reduces signed indices modulo `dim`.
    pub fn new(x: i64, z: i64, dim: usize) -> Self {
        let d = dim as i64;
        Self {
            x: x.rem_euclid(d) as usize,
            z: z.rem_euclid(d) as usize,
        }
    }

    pub fn all(dim: usize) -> Vec<WeylLabel> {
        let mut out = Vec::with_capacity(dim * dim);
        for x in 0..dim {
            for z in 0..dim {
                out.push(WeylLabel { x, z });
            }
        }
        out
    }
}

impl fmt::Display for WeylLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X^{}Z^{}", self.x, self.z)
    }
}

/// `exp(2 pi i k / d)`.
pub fn omega_pow(k: i64, dim: usize) -> C64 {
    let d = dim as i64;
    let r = k.rem_euclid(d) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / dim as f64)
}

/// Cyclic shift `X|j> = |j+1>`.
pub fn shift(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |r, c| {
        if r == (c + 1) % dim {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Phase operator `Z|j> = omega^j |j>`.
pub fn phase(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |r, c| {
        if r == c {
            omega_pow(r as i64, dim)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// `X^x Z^z`; the matrix has a single entry `omega^{z c}` in each column `c`,
/// at row `c + x mod d`.
pub fn weyl(x: usize, z: usize, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |r, c| {
        if r == (c + x) % dim {
            omega_pow((z * c) as i64, dim)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Coefficients `c_xz = tr((X^x Z^z)^dagger A) / d` of `A` in the Weyl basis.
pub fn weyl_coefficients(a: &ComplexMatrix, dim: usize) -> Result<BTreeMap<WeylLabel, C64>> {
    if a.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: a.dim(),
        });
    }
    let mut out = BTreeMap::new();
    for label in WeylLabel::all(dim) {
        let w = weyl(label.x, label.z, dim);
        out.insert(label, w.hs_inner(a) / dim as f64);
    }
    Ok(out)
}

/// All `d^2` Weyl operators as a (mostly non-Hermitian) set.
pub fn weyl_set(dim: usize) -> Result<OperatorSet> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let members = WeylLabel::all(dim)
        .into_iter()
        .map(|l| (l.to_string(), weyl(l.x, l.z, dim)))
        .collect();
    OperatorSet::new(format!("weyl-{dim}"), members)
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// `d + 1` mutually unbiased bases for prime `d`.
///
/// `bases[z]` for `z < d` is the eigenbasis of `X Z^z`, ordered by eigenvalue
/// phase; `bases[d]` is the computational basis.
#[derive(Debug, Clone)]
pub struct MubFamily {
    pub dim: usize,
    pub bases: Vec<Vec<Vec<C64>>>,
}

pub fn mub_family(dim: usize) -> Result<MubFamily> {
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    if !is_prime(dim) {
        return Err(Error::NotPrime(dim));
    }
    let d = dim as f64;
    let norm = 1.0 / d.sqrt();
    let mut bases = Vec::with_capacity(dim + 1);
    for z in 0..dim {
        // (X Z^z)^d = omega^{z d (d-1) / 2} I; for odd d that is I and the
        // eigenvalues are exactly omega^j, for d = 2 they pick up exp(i pi z / 2).
        let mu = if dim % 2 == 1 {
            c64(1.0, 0.0)
        } else {
            C64::from_polar(1.0, PI * (z * (dim - 1)) as f64 / d)
        };
        let mut basis = Vec::with_capacity(dim);
        for j in 0..dim {
            let lambda = mu * omega_pow(j as i64, dim);
            let ket: Vec<C64> = (0..dim)
                .map(|n| {
                    let tri = (z * n * n.saturating_sub(1) / 2) as i64;
                    lambda.powi(-(n as i32)) * omega_pow(tri, dim) * norm
                })
                .collect();
            basis.push(ket);
        }
        bases.push(basis);
    }
    let computational = (0..dim)
        .map(|j| {
            (0..dim)
                .map(|n| if n == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
                .collect()
        })
        .collect();
    bases.push(computational);
    Ok(MubFamily { dim, bases })
}

fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

impl MubFamily {
    /// Largest `| |<u|v>|^2 - 1/d |` over kets from distinct bases.
    pub fn unbiasedness_deviation(&self) -> f64 {
        let target = 1.0 / self.dim as f64;
        let mut worst: f64 = 0.0;
        for (a, ba) in self.bases.iter().enumerate() {
            for bb in &self.bases[a + 1..] {
                for u in ba {
                    for v in bb {
                        worst = worst.max((inner(u, v).norm_sqr() - target).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|<u_j|u_k> - delta_jk|` within any one basis.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for basis in &self.bases {
            for (j, u) in basis.iter().enumerate() {
                for (k, v) in basis.iter().enumerate() {
                    let expect = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((inner(u, v) - expect).norm());
                }
            }
        }
        worst
    }

    /// Born probabilities `<u|rho|u>` for every ket, grouped by basis.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Result<Vec<Vec<f64>>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(self
            .bases
            .iter()
            .map(|basis| basis.iter().map(|u| rho.expectation(u).re).collect())
            .collect())
    }

    /// All `d (d + 1)` basis projectors as one set, labeled `P[b,j]`.
    pub fn projector_set(&self) -> Result<OperatorSet> {
        let mut members = Vec::with_capacity(self.dim * (self.dim + 1));
        for (b, basis) in self.bases.iter().enumerate() {
            for (j, u) in basis.iter().enumerate() {
                members.push((format!("P[{b},{j}]"), ComplexMatrix::outer(u)));
            }
        }
        OperatorSet::new(format!("mub-{}", self.dim), members)
    }
}

/// Spin-j operators `(J_x, J_y, J_z)` in the `|m>` basis, row `k` holding
/// `m = j - k`.
pub fn spin_operators(two_j: usize) -> Result<OperatorSet> {
    let dim = two_j + 1;
    if two_j == 0 {
        return Err(Error::InvalidArgument("two_j must be at least 1".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    let j = two_j as f64 / 2.0;
    let m_of = |k: usize| j - k as f64;
    // J_+ |m> = sqrt((j - m)(j + m + 1)) |m + 1>; |m + 1> sits one row up.
    let j_plus = ComplexMatrix::from_fn(dim, |r, c| {
        if c >= 1 && r == c - 1 {
            let m = m_of(c);
            c64(((j - m) * (j + m + 1.0)).sqrt(), 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let j_minus = j_plus.adjoint();
    let jx = (&j_plus + &j_minus).scale_real(0.5);
    let jy = (&j_plus - &j_minus).scale(c64(0.0, -0.5));
    let jz = ComplexMatrix::diagonal(&(0..dim).map(m_of).collect::<Vec<_>>());
    OperatorSet::new(
        format!("spin-{two_j}"),
        vec![("J_x".into(), jx), ("J_y".into(), jy), ("J_z".into(), jz)],
    )
}

fn ket_bra(j: usize, k: usize, dim: usize, coeff: C64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    m[(j, k)] = coeff;
    m
}

/// Labels of the spin-1 nine-set in fixed order.
pub const SPIN1_LABELS: [&str; 9] = [
    "J_x", "J_y", "J_z", "K_yz", "K_zx", "K_xy", "J_x^2", "J_y^2", "J_z^2",
];

/// The nine spin-1 operators `J_x, J_y, J_z, K_yz, K_zx, K_xy, J_x^2, J_y^2,
/// J_z^2` with `K_ab = J_a J_b + J_b J_a`, in the Cartesian basis where
/// `J_x = -i(|0><1| - |1><0|)` and cyclically.
pub fn spin1_nine_set() -> OperatorSet {
    let mi = c64(0.0, -1.0);
    let pi = c64(0.0, 1.0);
    let gen = |a: usize, b: usize| &ket_bra(a, b, 3, mi) + &ket_bra(b, a, 3, pi);
    let jx = gen(0, 1);
    let jy = gen(0, 2);
    let jz = gen(1, 2);
    let kyz = jy.anticommutator(&jz);
    let kzx = jz.anticommutator(&jx);
    let kxy = jx.anticommutator(&jy);
    let jx2 = &jx * &jx;
    let jy2 = &jy * &jy;
    let jz2 = &jz * &jz;
    let ops = [jx, jy, jz, kyz, kzx, kxy, jx2, jy2, jz2];
    let members = SPIN1_LABELS
        .iter()
        .map(|s| s.to_string())
        .zip(ops)
        .collect();
    OperatorSet::new("spin1-nine", members).expect("spin-1 set is well formed")
}

/// First six members of [`spin1_nine_set`].
pub fn spin1_six_set() -> OperatorSet {
    spin1_nine_set()
        .prefix("spin1-six", 6)
        .expect("spin-1 set is well formed")
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = c64(0.0, -1.0);
    m[(1, 0)] = c64(0.0, 1.0);
    m
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

/// `a . sigma` for a unit 3-vector.
pub fn axis_operator(unit: [f64; 3]) -> Result<ComplexMatrix> {
    let norm = norm3(&unit);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit { norm });
    }
    let x = pauli_x().scale_real(unit[0]);
    let y = pauli_y().scale_real(unit[1]);
    let z = pauli_z().scale_real(unit[2]);
    Ok(&(&x + &y) + &z)
}

/// Qubit observables `a_i . sigma`, labeled `A`, `B`, `C`, ...
pub fn qubit_axes_set(axes: &[[f64; 3]]) -> Result<OperatorSet> {
    let members = axes
        .iter()
        .enumerate()
        .map(|(i, &a)| Ok((((b'A' + i as u8) as char).to_string(), axis_operator(a)?)))
        .collect::<Result<Vec<_>>>()?;
    OperatorSet::new("qubit-axes", members)
}

/// Unit vectors realizing the pairwise dot products `(a.b, a.c, b.c)`.
///
/// `a` is along x, `b` in the xy-plane and `c` fills the remaining direction;
/// fails if the Gram matrix is not positive definite.
pub fn axes_from_dots(dab: f64, dac: f64, dbc: f64) -> Result<[[f64; 3]; 3]> {
    for v in [dab, dac, dbc] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::ValueOutOfRange {
                value: v,
                min: -1.0,
                max: 1.0,
            });
        }
    }
    let a = [1.0, 0.0, 0.0];
    let by = (1.0 - dab * dab).sqrt();
    if by < 1e-12 {
        return Err(Error::LinearlyDependent { det: 0.0 });
    }
    let b = [dab, by, 0.0];
    let cx = dac;
    let cy = (dbc - dab * dac) / by;
    let cz2 = 1.0 - cx * cx - cy * cy;
    if cz2 < 1e-12 {
        return Err(Error::LinearlyDependent { det: cz2 });
    }
    Ok([a, b, [cx, cy, cz2.sqrt()]])
}

/// Normalized cross product `a x b / |a x b|`.
pub fn normal_axis(a: &[f64; 3], b: &[f64; 3]) -> Result<[f64; 3]> {
    let c = cross3(a, b);
    let n = norm3(&c);
    if n < 1e-12 {
        return Err(Error::LinearlyDependent { det: n * n });
    }
    Ok([c[0] / n, c[1] / n, c[2] / n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SicVariant {
    /// Bloch vectors are the rows of the Gram–Schmidt change matrix.
    Gram,
    /// Bloch vectors `(1,-1,-1)/sqrt3` and its sign-cyclic partners.
    WeylHeisenberg,
}

#[derive(Debug, Clone)]
pub struct SicQubit {
    pub set: OperatorSet,
    pub bloch: [[f64; 3]; 4],
}

/// Qubit SIC-POVM `Pi_i = (I + a_i . sigma) / 4`.
pub fn sic_qubit(variant: SicVariant) -> SicQubit {
    let s3 = 3f64.sqrt();
    let first3: [[f64; 3]; 3] = match variant {
        SicVariant::Gram => {
            let r = 2f64.sqrt();
            [
                [1.0, 0.0, 0.0],
                [-1.0 / 3.0, 2.0 * r / 3.0, 0.0],
                [-1.0 / 3.0, -r / 3.0, (2.0f64 / 3.0).sqrt()],
            ]
        }
        SicVariant::WeylHeisenberg => [
            [1.0 / s3, -1.0 / s3, -1.0 / s3],
            [-1.0 / s3, 1.0 / s3, -1.0 / s3],
            [-1.0 / s3, -1.0 / s3, 1.0 / s3],
        ],
    };
    let a4 = [
        -(first3[0][0] + first3[1][0] + first3[2][0]),
        -(first3[0][1] + first3[1][1] + first3[2][1]),
        -(first3[0][2] + first3[1][2] + first3[2][2]),
    ];
    let bloch = [first3[0], first3[1], first3[2], a4];
    let id = ComplexMatrix::identity(2);
    let members = bloch
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let n = norm3(a);
            let unit = [a[0] / n, a[1] / n, a[2] / n];
            let op = &id + &axis_operator(unit).expect("unit vector");
            (format!("Pi_{}", i + 1), op.scale_real(0.25))
        })
        .collect();
    let set = OperatorSet::new("sic", members).expect("SIC set is well formed");
    SicQubit { set, bloch }
}

/// The two rank-1 projectors `P = |a><a|`, `Q = |b><b|` on a qutrit with
/// `|<a|b>|^2 = 169/675`.
///
/// `a = (1/sqrt75, i/sqrt3, 7/(5 sqrt3))`, `b = (2, 1, -2)/3`.
pub fn fig1_projectors() -> (ComplexMatrix, ComplexMatrix) {
    let r = |x: f64| c64(x, 0.0);
    let i = |x: f64| c64(0.0, x);
    let p = ComplexMatrix::from_rows(&[
        vec![r(1.0 / 75.0), i(-1.0 / 15.0), r(7.0 / 75.0)],
        vec![i(1.0 / 15.0), r(1.0 / 3.0), i(7.0 / 15.0)],
        vec![r(7.0 / 75.0), i(-7.0 / 15.0), r(49.0 / 75.0)],
    ])
    .expect("3x3");
    let q = ComplexMatrix::from_real_rows(&[
        vec![4.0, 2.0, -4.0],
        vec![2.0, 1.0, -2.0],
        vec![-4.0, -2.0, 4.0],
    ])
    .expect("3x3")
    .scale_real(1.0 / 9.0);
    (p, q)
}

pub fn fig1_set() -> OperatorSet {
    let (p, q) = fig1_projectors();
    OperatorSet::new("fig1", vec![("P".into(), p), ("Q".into(), q)]).expect("fig1 set")
}

/// Two rank-1 qubit projectors `|a><a|`, `|b><b|` with `|<a|b>|^2 = overlap_sq`.
pub fn qubit_projector_pair(overlap_sq: f64) -> Result<OperatorSet> {
    if !(overlap_sq > 0.0 && overlap_sq < 1.0) {
        return Err(Error::DegenerateOverlap(overlap_sq));
    }
    let a = [c64(1.0, 0.0), c64(0.0, 0.0)];
    let b = [c64(overlap_sq.sqrt(), 0.0), c64((1.0 - overlap_sq).sqrt(), 0.0)];
    OperatorSet::new(
        format!("qubit-projectors-{overlap_sq}"),
        vec![
            ("P".into(), ComplexMatrix::outer(&a)),
            ("Q".into(), ComplexMatrix::outer(&b)),
        ],
    )
}

/// Bloch axes `a = z` and `b` in the xz-plane with `a.b = cos_angle`.
pub fn qubit_two_axes(cos_angle: f64) -> Result<OperatorSet> {
    if !(cos_angle > -1.0 && cos_angle < 1.0) {
        return Err(Error::LinearlyDependent { det: 0.0 });
    }
    qubit_axes_set(&[
        [0.0, 0.0, 1.0],
        [(1.0 - cos_angle * cos_angle).sqrt(), 0.0, cos_angle],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot3, SeededRng};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn weyl_examples() {
        assert!(close(&weyl(1, 0, 2), &pauli_x(), 0.0));
        let w = omega_pow(1, 3);
        let z3 = weyl(0, 1, 3);
        assert!((z3[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((z3[(1, 1)] - w).norm() < 1e-15);
        assert!((z3[(2, 2)] - w * w).norm() < 1e-15);
        for l in WeylLabel::all(5) {
            let t = weyl(l.x, l.z, 5).trace();
            let expect = if l.x == 0 && l.z == 0 { 5.0 } else { 0.0 };
            assert!((t - c64(expect, 0.0)).norm() < 1e-12, "{l}");
            assert!(weyl(l.x, l.z, 5).is_unitary(1e-12));
        }
    }

    #[test]
    fn weyl_is_product_of_powers() {
        for d in [2, 3, 5] {
            for l in WeylLabel::all(d) {
                let prod = &shift(d).pow(l.x) * &phase(d).pow(l.z);
                assert!(close(&weyl(l.x, l.z, d), &prod, 1e-12));
            }
        }
    }

    #[test]
    fn weyl_commutation() {
        for d in [2, 3, 5] {
            for x in 0..d {
                for z in 0..d {
                    let zx = &phase(d).pow(z) * &shift(d).pow(x);
                    let rhs = weyl(x, z, d).scale(omega_pow((x * z) as i64, d));
                    assert!(close(&zx, &rhs, 1e-12));
                }
            }
        }
    }

    #[test]
    fn weyl_orthogonality_d3() {
        for a in WeylLabel::all(3) {
            for b in WeylLabel::all(3) {
                let ip = weyl(a.x, a.z, 3).hs_inner(&weyl(b.x, b.z, 3));
                let expect = if a == b { 3.0 } else { 0.0 };
                assert!((ip - c64(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_coefficients_examples() {
        let id = weyl_coefficients(&ComplexMatrix::identity(3), 3).unwrap();
        for (l, c) in &id {
            let expect = if l.x == 0 && l.z == 0 { 1.0 } else { 0.0 };
            assert!((c - c64(expect, 0.0)).norm() < 1e-14);
        }
        let kb = ket_bra(0, 1, 3, c64(1.0, 0.0));
        let coeffs = weyl_coefficients(&kb, 3).unwrap();
        for (l, c) in &coeffs {
            if l.x == 2 {
                let expect = omega_pow(-(l.z as i64), 3) / 3.0;
                assert!((c - expect).norm() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn weyl_ket_bra_expansion_all_pairs() {
        let d = 4;
        for j in 0..d {
            for k in 0..d {
                let coeffs = weyl_coefficients(&ket_bra(j, k, d, c64(1.0, 0.0)), d).unwrap();
                let x = (j + d - k) % d;
                for z in 0..d {
                    let expect = omega_pow(-((k * z) as i64), d) / d as f64;
                    assert!((coeffs[&WeylLabel { x, z }] - expect).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn weyl_reconstruction_random() {
        let rho = crate::linalg::random_state(3, 3, 3).unwrap();
        let coeffs = weyl_coefficients(rho.matrix(), 3).unwrap();
        let mut acc = ComplexMatrix::zeros(3);
        for (l, c) in coeffs {
            acc = &acc + &weyl(l.x, l.z, 3).scale(c);
        }
        assert!(close(&acc, rho.matrix(), 1e-10));
    }

    #[test]
    fn conjugate_expectation_identity() {
        let mut rng = SeededRng::new(64);
        for d in [2, 3, 5] {
            let rho = crate::linalg::random_state_with(&mut rng, d, d).unwrap();
            for l in WeylLabel::all(d) {
                let w = weyl(l.x, l.z, d);
                let e = rho.matrix().trace_product(&w);
                let e_dag = rho.matrix().trace_product(&w.adjoint());
                let inv = WeylLabel::new(-(l.x as i64), -(l.z as i64), d);
                let e_inv = rho.matrix().trace_product(&weyl(inv.x, inv.z, d));
                assert!((e_dag - e.conj()).norm() < 1e-12);
                let rhs = omega_pow((l.x * l.z) as i64, d) * e_inv;
                assert!((e_dag - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mub_examples() {
        let m2 = mub_family(2).unwrap();
        assert_eq!(m2.bases.len(), 3);
        assert!(m2.unbiasedness_deviation() < 1e-12);
        let m3 = mub_family(3).unwrap();
        assert_eq!(m3.bases.len(), 4);
        assert!(m3.unbiasedness_deviation() < 1e-10);
        assert!(m3.orthonormality_deviation() < 1e-10);
        assert_eq!(mub_family(4).unwrap_err(), Error::NotPrime(4));
        assert_eq!(mub_family(1).unwrap_err(), Error::NotPrime(1));
    }

    #[test]
    fn mub_kets_are_eigenvectors_in_order() {
        for d in [2, 3, 5, 7] {
            let fam = mub_family(d).unwrap();
            for z in 0..d {
                let op = weyl(1, z, d);
                let mut last_arg = f64::NEG_INFINITY;
                for ket in &fam.bases[z] {
                    let image = op.mul_vec(ket);
                    let lambda = image[0] / ket[0];
                    let res: f64 = image
                        .iter()
                        .zip(ket)
                        .map(|(a, b)| (a - lambda * b).norm())
                        .fold(0.0, f64::max);
                    assert!(res < 1e-12);
                    assert!((lambda.norm() - 1.0).abs() < 1e-12);
                    let mut arg = lambda.arg().rem_euclid(2.0 * PI);
                    if arg > 2.0 * PI - 1e-9 {
                        arg = 0.0;
                    }
                    assert!(arg > last_arg);
                    last_arg = arg;
                    assert!(ket[0].im.abs() < 1e-15 && ket[0].re > 0.0);
                }
            }
        }
    }

    #[test]
    fn mub_spectral_form_of_weyl_subsets() {
        // X^k Z^{kz} = (X Z^z)^k up to a phase; rebuild (X Z^z)^k from its eigenbasis.
        let d = 5;
        let fam = mub_family(d).unwrap();
        for z in 0..d {
            let op = weyl(1, z, d);
            for k in 1..d {
                let target = op.pow(k);
                let mut acc = ComplexMatrix::zeros(d);
                for (j, ket) in fam.bases[z].iter().enumerate() {
                    let lambda = omega_pow(j as i64, d);
                    acc = &acc + &ComplexMatrix::outer(ket).scale(lambda.powi(k as i32));
                }
                assert!(close(&acc, &target, 1e-10));
                let wk = weyl(k % d, (k * z) % d, d);
                let ratio = target[(k % d, 0)] / wk[(k % d, 0)];
                assert!(close(&wk.scale(ratio), &target, 1e-10));
            }
        }
    }

    #[test]
    fn spin_examples() {
        let half = spin_operators(1).unwrap();
        assert!(close(half.operator(0), &pauli_x().scale_real(0.5), 1e-15));
        assert!(close(half.operator(1), &pauli_y().scale_real(0.5), 1e-15));
        assert!(close(half.operator(2), &pauli_z().scale_real(0.5), 1e-15));
        let one = spin_operators(2).unwrap();
        assert!(close(one.operator(2), &ComplexMatrix::diagonal(&[1.0, 0.0, -1.0]), 0.0));
        let two = spin_operators(4).unwrap();
        let eig = hermitian_eig(two.operator(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(spin_operators(0).is_err());
    }

    #[test]
    fn spin_algebra() {
        for two_j in 1..=8 {
            let s = spin_operators(two_j).unwrap();
            let (x, y, z) = (s.operator(0), s.operator(1), s.operator(2));
            let i = c64(0.0, 1.0);
            assert!(close(&x.commutator(y), &z.scale(i), 1e-12));
            assert!(close(&y.commutator(z), &x.scale(i), 1e-12));
            assert!(close(&z.commutator(x), &y.scale(i), 1e-12));
            let j = two_j as f64 / 2.0;
            let casimir = &(&(x * x) + &(y * y)) + &(z * z);
            let expect = ComplexMatrix::identity(two_j + 1).scale_real(j * (j + 1.0));
            assert!(close(&casimir, &expect, 1e-12));
        }
    }

    #[test]
    fn spin1_nine_properties() {
        let s = spin1_nine_set();
        let a = s.operators();
        let i = c64(0.0, 1.0);
        assert!(close(&a[0].commutator(&a[1]), &a[2].scale(i), 1e-14));
        assert!(close(&a[1].commutator(&a[2]), &a[0].scale(i), 1e-14));
        assert!(close(&a[2].commutator(&a[0]), &a[1].scale(i), 1e-14));
        let sum = &(&a[6] + &a[7]) + &a[8];
        assert!(close(&sum, &ComplexMatrix::identity(3).scale_real(2.0), 1e-14));
        let eig = hermitian_eig(&a[0]).unwrap();
        for (l, e) in eig.eigenvalues.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((l - e).abs() < 1e-12);
        }
        // A_i^2 = A_{7,8,9} pattern: J_x^2 = K_yz^2 = A_7 and cyclic
        for (k, sq) in [(0, 6), (3, 6), (1, 7), (4, 7), (2, 8), (5, 8)] {
            assert!(close(&(&a[k] * &a[k]), &a[sq], 1e-14));
        }
        for k in 6..9 {
            assert!(close(&(&a[k] * &a[k]), &a[k], 1e-14));
        }
        assert!(s.all_hermitian());
        let endpoints = s.endpoints().unwrap();
        for (k, ep) in endpoints.iter().enumerate() {
            let lo = if k < 6 { -1.0 } else { 0.0 };
            assert!((ep.a_min - lo).abs() < 1e-12 && (ep.a_max - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spin1_nine_are_linearly_independent() {
        let s = spin1_nine_set();
        let n = s.len();
        // Gram matrix of the real Hermitian basis is positive definite.
        let gram = ComplexMatrix::from_fn(n, |r, c| s.operator(r).hs_inner(s.operator(c)));
        let eig = hermitian_eig(&gram).unwrap();
        assert!(eig.min() > 1e-6);
    }

    #[test]
    fn axis_operator_examples() {
        assert!(close(&axis_operator([0.0, 0.0, 1.0]).unwrap(), &pauli_z(), 0.0));
        assert!(matches!(axis_operator([1.0, 1.0, 0.0]), Err(Error::NotUnit { .. })));
        let mut rng = SeededRng::new(17);
        for _ in 0..50 {
            let a: Vec<f64> = rng.unit_vector(3);
            let b: Vec<f64> = rng.unit_vector(3);
            let (a, b) = ([a[0], a[1], a[2]], [b[0], b[1], b[2]]);
            let oa = axis_operator(a).unwrap();
            let ob = axis_operator(b).unwrap();
            let c = cross3(&a, &b);
            let cn = norm3(&c);
            let cross_op = axis_operator([c[0] / cn, c[1] / cn, c[2] / cn])
                .unwrap()
                .scale(c64(0.0, cn));
            let rhs = &ComplexMatrix::identity(2).scale_real(dot3(&a, &b)) + &cross_op;
            assert!(close(&(&oa * &ob), &rhs, 1e-12));
            assert!((oa.hs_inner(&ob).re - 2.0 * dot3(&a, &b)).abs() < 1e-12);
            assert!(close(&(&oa * &oa), &ComplexMatrix::identity(2), 1e-12));
        }
    }

    #[test]
    fn sic_properties() {
        for variant in [SicVariant::Gram, SicVariant::WeylHeisenberg] {
            let sic = sic_qubit(variant);
            for i in 0..4 {
                assert!((norm3(&sic.bloch[i]) - 1.0).abs() < 1e-12);
                for j in 0..4 {
                    if i != j {
                        assert!((dot3(&sic.bloch[i], &sic.bloch[j]) + 1.0 / 3.0).abs() < 1e-12);
                    }
                }
                let eig = hermitian_eig(sic.set.operator(i)).unwrap();
                assert!(eig.min().abs() < 1e-12 && (eig.max() - 0.5).abs() < 1e-12);
            }
            let mut total = ComplexMatrix::zeros(2);
            for op in sic.set.operators() {
                total = &total + op;
            }
            assert!(close(&total, &ComplexMatrix::identity(2), 1e-12));
            for c in 0..3 {
                let s: f64 = sic.bloch.iter().map(|a| a[c]).sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fig1_examples() {
        let (p, q) = fig1_projectors();
        assert!((p.trace() - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((q.trace() - c64(1.0, 0.0)).norm() < 1e-15);
        assert!(close(&(&p * &p), &p, 1e-14));
        assert!(close(&(&q * &q), &q, 1e-14));
        assert!(p.is_hermitian(1e-15) && q.is_hermitian(1e-15));
        assert!((p.trace_product(&q).re - 169.0 / 675.0).abs() < 1e-12);
    }

    #[test]
    fn axes_from_dots_round_trip() {
        let axes = axes_from_dots(0.5, 0.0, 0.0).unwrap();
        assert!((dot3(&axes[0], &axes[1]) - 0.5).abs() < 1e-15);
        assert!(dot3(&axes[0], &axes[2]).abs() < 1e-15);
        assert!(dot3(&axes[1], &axes[2]).abs() < 1e-15);
        assert!(axes_from_dots(1.0, 0.0, 0.0).is_err());
    }
}
