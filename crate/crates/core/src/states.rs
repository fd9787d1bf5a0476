//! Density operators, the hyperspherical pure-state parametrization, spin
//! coherent states and the map from a state to its expectation values.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, C64, MAX_DIM};
use crate::operators::OperatorSet;

const TAU: f64 = 2.0 * PI;

/// Imaginary residue accepted for expectation values of Hermitian operators.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

/// A square complex matrix intended as a density operator.
///
/// Construction only checks the shape; use
/// [`crate::constraints::validate_state`] to test Hermiticity, trace and
/// positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
        }
        Ok(Self { matrix })
    }

    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm_sq: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq.sqrt() - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnit {
                norm: norm_sq.sqrt(),
            });
        }
        Self::new(ComplexMatrix::outer(ket))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// `w rho + (1 - w) sigma`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(&self.matrix.scale_real(w) + &other.matrix.scale_real(1.0 - w))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Angles `(theta_0 .. theta_{d-2}, phi_1 .. phi_{d-1})` of a pure state.
///
/// The ket is `(cos t0, sin t0 cos t1 e^{i p1}, ..., sin t0 ... sin t_{d-2} e^{i p_{d-1}})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureStateAngles {
    thetas: Vec<f64>,
    phis: Vec<f64>,
}

impl PureStateAngles {
    /// Thetas must lie in `[0, pi/2]`; phis are reduced modulo `2 pi`.
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != phis.len() {
            return Err(Error::InvalidArgument(format!(
                "need equal, nonzero numbers of thetas and phis (got {} and {})",
                thetas.len(),
                phis.len()
            )));
        }
        if thetas.len() + 1 > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                dim: thetas.len() + 1,
                max: MAX_DIM,
            });
        }
        for (l, &t) in thetas.iter().enumerate() {
            if !t.is_finite() || !(0.0..=FRAC_PI_2).contains(&t) {
                return Err(Error::AngleOutOfRange {
                    name: format!("theta_{l}"),
                    value: t,
                });
            }
        }
        let mut reduced = Vec::with_capacity(phis.len());
        for (l, &p) in phis.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::AngleOutOfRange {
                    name: format!("phi_{}", l + 1),
                    value: p,
                });
            }
            reduced.push(wrap_angle(p));
        }
        Ok(Self {
            thetas,
            phis: reduced,
        })
    }

    /// Splits a flat `[thetas.., phis..]` vector.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "angle vector has odd length {}",
                flat.len()
            )));
        }
        let half = flat.len() / 2;
        Self::new(flat[..half].to_vec(), flat[half..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.thetas.len() + 1
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn flat(&self) -> Vec<f64> {
        self.thetas.iter().chain(&self.phis).copied().collect()
    }
}

fn wrap_angle(p: f64) -> f64 {
    let r = p.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub fn ket_from_angles(angles: &PureStateAngles) -> Vec<C64> {
    ket_from_raw(angles.thetas(), angles.phis())
}

/// The same component pattern for arbitrary real angles. The result is still
/// a unit vector, which lets unconstrained optimizers roam freely.
pub fn ket_from_raw(thetas: &[f64], phis: &[f64]) -> Vec<C64> {
    let dim = thetas.len() + 1;
    let mut ket = Vec::with_capacity(dim);
    let mut prefix = 1.0;
    for k in 0..dim {
        let radial = if k + 1 < dim {
            prefix * thetas[k].cos()
        } else {
            prefix
        };
        let amp = if k == 0 {
            c64(radial, 0.0)
        } else {
            C64::from_polar(radial, phis[k - 1])
        };
        ket.push(amp);
        if k + 1 < dim {
            prefix *= thetas[k].sin();
        }
    }
    ket
}

/// Canonical angles of a ket: the global phase is removed so that the first
/// nonzero amplitude is real positive, then each `theta_k` is read off as
/// `atan2(tail norm, |c_k|)`.
pub fn angles_from_ket(ket: &[C64]) -> Result<PureStateAngles> {
    let dim = ket.len();
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(Error::NotUnit { norm });
    }
    let lead = ket
        .iter()
        .find(|z| z.norm() > 1e-14 * norm)
        .copied()
        .unwrap_or(c64(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    let c: Vec<C64> = ket.iter().map(|z| z * phase / norm).collect();

    let mut tail_sq: Vec<f64> = vec![0.0; dim + 1];
    for k in (0..dim).rev() {
        tail_sq[k] = tail_sq[k + 1] + c[k].norm_sqr();
    }
    let mut thetas = Vec::with_capacity(dim - 1);
    let mut phis = Vec::with_capacity(dim - 1);
    for k in 0..dim - 1 {
        thetas.push(tail_sq[k + 1].sqrt().atan2(c[k].norm()).clamp(0.0, FRAC_PI_2));
    }
    for z in c.iter().skip(1) {
        phis.push(if z.norm() > 1e-14 { wrap_angle(z.arg()) } else { 0.0 });
    }
    PureStateAngles::new(thetas, phis)
}

/// Spin coherent state `|alpha, beta>` for spin `j = two_j / 2`, with
/// amplitudes `sqrt(C(2j, j+m)) cos(a/2)^{j+m} sin(a/2)^{j-m} e^{-i m b}`.
pub fn coherent_ket(two_j: usize, alpha: f64, beta: f64) -> Result<Vec<C64>> {
    if two_j == 0 || two_j + 1 > MAX_DIM {
        return Err(Error::InvalidDimension(two_j + 1));
    }
    if !alpha.is_finite() || !(0.0..=PI).contains(&alpha) {
        return Err(Error::AngleOutOfRange {
            name: "alpha".into(),
            value: alpha,
        });
    }
    if !beta.is_finite() {
        return Err(Error::AngleOutOfRange {
            name: "beta".into(),
            value: beta,
        });
    }
    let beta = wrap_angle(beta);
    let (s, c) = (alpha / 2.0).sin_cos();
    let j = two_j as f64 / 2.0;
    Ok((0..=two_j)
        .map(|k| {
            let m = j - k as f64;
            let up = two_j - k;
            let amp = binomial(two_j, up).sqrt() * c.powi(up as i32) * s.powi(k as i32);
            C64::from_polar(amp, -m * beta)
        })
        .collect())
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expectation values `<A_i>` attached to the set they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationPoint {
    pub set_name: String,
    pub values: Vec<f64>,
}

impl ExpectationPoint {
    pub fn new(set_name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            set_name: set_name.into(),
            values,
        }
    }

    pub fn for_set(ops: &OperatorSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != ops.len() {
            return Err(Error::ArityMismatch {
                expected: ops.len(),
                found: values.len(),
            });
        }
        Ok(Self::new(ops.name(), values))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `Re tr(rho A_i)` for every member; errors if a Hermitian member yields a
/// noticeably complex value.
pub fn expectations(rho: &DensityState, ops: &OperatorSet) -> Result<ExpectationPoint> {
    if rho.dim() != ops.dim() {
        return Err(Error::DimensionMismatch {
            expected: ops.dim(),
            found: rho.dim(),
        });
    }
    let mut values = Vec::with_capacity(ops.len());
    for (i, op) in ops.operators().iter().enumerate() {
        let e = rho.matrix().trace_product(op);
        if ops.is_hermitian(i) && e.im.abs() > EXPECTATION_IMAG_TOL {
            return Err(Error::NonRealExpectation {
                label: ops.labels()[i].clone(),
                imag: e.im,
            });
        }
        values.push(e.re);
    }
    Ok(ExpectationPoint::new(ops.name(), values))
}

/// `Re <psi|A_i|psi>` for a ket; no Hermiticity checks (hot path).
pub fn ket_expectations(ket: &[C64], ops: &OperatorSet) -> Vec<f64> {
    ops.operators().iter().map(|op| op.expectation(ket).re).collect()
}

/// Closed-form expectations of the spin-1 nine-set in a pure qutrit state.
pub fn spin1_pure_expectations(angles: &PureStateAngles) -> Result<[f64; 9]> {
    if angles.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: angles.dim(),
        });
    }
    let (t0, t1) = (angles.thetas()[0], angles.thetas()[1]);
    let (p1, p2) = (angles.phis()[0], angles.phis()[1]);
    let s2t0 = (2.0 * t0).sin();
    let s0sq = t0.sin().powi(2);
    let c0sq = t0.cos().powi(2);
    let s2t1 = (2.0 * t1).sin();
    Ok([
        s2t0 * t1.cos() * p1.sin(),
        s2t0 * t1.sin() * p2.sin(),
        -s0sq * s2t1 * (p1 - p2).sin(),
        s2t0 * t1.cos() * p1.cos(),
        -s2t0 * t1.sin() * p2.cos(),
        s0sq * s2t1 * (p1 - p2).cos(),
        c0sq + s0sq * t1.cos().powi(2),
        c0sq + s0sq * t1.sin().powi(2),
        s0sq,
    ])
}
