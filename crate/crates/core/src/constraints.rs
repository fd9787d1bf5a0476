//! Density-operator validity through the moments `tr(rho^m)`.
//!
//! `S_n` follows the Newton recursion
//! `S_n = (1/n) sum_{m=1}^{n} (-1)^{m-1} tr(rho^m) S_{n-m}` with `S_0 = 1`,
//! which makes `S_n` the n-th elementary symmetric polynomial of the
//! eigenvalues. A Hermitian unit-trace matrix is positive semi-definite iff
//! `S_n >= 0` for `n = 1..d`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, C64, MAX_DIM};
use crate::operators::{omega_pow, WeylLabel};
use crate::states::DensityState;

/// Default absolute tolerance on `S_n`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Imaginary part accepted on `tr(rho^m)`, relative to `1 + |tr(rho^m)|`.
pub const MOMENT_IMAG_TOL: f64 = 1e-10;

/// `(tr rho, tr rho^2, ..., tr rho^d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVector {
    pub dim: usize,
    pub moments: Vec<f64>,
}

impl MomentVector {
    pub fn new(moments: Vec<f64>) -> Self {
        Self {
            dim: moments.len(),
            moments,
        }
    }

    /// `tr(rho^m)`, `m >= 1`.
    pub fn get(&self, m: usize) -> f64 {
        self.moments[m - 1]
    }
}

/// Which validity condition failed first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    NonFinite,
    Hermiticity { residual: f64 },
    Trace { trace: f64 },
    Positivity { n: usize, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// `S_1 .. S_d`.
    pub s_values: Vec<f64>,
    pub satisfied: Vec<bool>,
    pub tolerance: f64,
    pub hermiticity_residual: f64,
    pub trace: f64,
    pub violation: Option<Violation>,
}

impl ConstraintReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }

    /// `S_n` with `n >= 1`.
    pub fn s(&self, n: usize) -> f64 {
        self.s_values[n - 1]
    }
}

pub fn moments_of(rho: &DensityState) -> Result<MomentVector> {
    moments_of_matrix(rho.matrix())
}

pub fn moments_of_matrix(m: &ComplexMatrix) -> Result<MomentVector> {
    let d = m.dim();
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim: d, max: MAX_DIM });
    }
    let mut moments = Vec::with_capacity(d);
    let mut power = m.clone();
    for k in 1..=d {
        let t = power.trace();
        if t.im.abs() > MOMENT_IMAG_TOL * (1.0 + t.re.abs()) {
            return Err(Error::NonRealMoment {
                power: k,
                imag: t.im,
            });
        }
        moments.push(t.re);
        if k < d {
            power = &power * m;
        }
    }
    Ok(MomentVector::new(moments))
}

/// Raw Newton recursion, `S_1 ..= S_len`.
pub fn newton_values(moments: &[f64]) -> Vec<f64> {
    let mut s = Vec::with_capacity(moments.len() + 1);
    s.push(1.0);
    for n in 1..=moments.len() {
        let mut acc = 0.0;
        for m in 1..=n {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * moments[m - 1] * s[n - m];
        }
        s.push(acc / n as f64);
    }
    s.remove(0);
    s
}

pub fn newton_s(moments: &MomentVector) -> ConstraintReport {
    newton_s_with_tol(moments, DEFAULT_TOL)
}

pub fn newton_s_with_tol(moments: &MomentVector, tol: f64) -> ConstraintReport {
    let s_values = newton_values(&moments.moments);
    let satisfied: Vec<bool> = s_values.iter().map(|&s| s >= -tol).collect();
    let violation = satisfied
        .iter()
        .position(|ok| !ok)
        .map(|i| Violation::Positivity {
            n: i + 1,
            s: s_values[i],
        });
    ConstraintReport {
        trace: moments.moments.first().copied().unwrap_or(0.0),
        s_values,
        satisfied,
        tolerance: tol,
        hermiticity_residual: 0.0,
        violation,
    }
}

/// Checks Hermiticity, unit trace and `S_n >= -tol`, each within `tol`.
///
/// Non-Hermitian input is reported, with `S_n` evaluated on its Hermitian
/// part for information.
pub fn validate_state(rho: &DensityState, tol: f64) -> ConstraintReport {
    let m = rho.matrix();
    let d = m.dim();
    if m.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return ConstraintReport {
            s_values: vec![f64::NAN; d],
            satisfied: vec![false; d],
            tolerance: tol,
            hermiticity_residual: f64::NAN,
            trace: f64::NAN,
            violation: Some(Violation::NonFinite),
        };
    }
    let residual = m.hermiticity_residual();
    let herm = m.hermitian_part();
    let moments = moments_of_matrix(&herm).expect("Hermitian moments are real");
    let mut report = newton_s_with_tol(&moments, tol);
    report.hermiticity_residual = residual;
    let trace = herm.trace().re;
    report.trace = trace;
    if residual > tol {
        report.violation = Some(Violation::Hermiticity { residual });
    } else if (trace - 1.0).abs() > tol {
        report.violation = Some(Violation::Trace { trace });
    }
    report
}

/// The explicit low-order constraints, each evaluated as written for a
/// unit-trace state:
/// `1 - tr r^2`, `1 - 3 tr r^2 + 2 tr r^3`,
/// `1 - 6 tr r^2 + 8 tr r^3 + 3 (tr r^2)^2 - 6 tr r^4`.
/// They equal `2! S_2`, `3! S_3`, `4! S_4` when `tr rho = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExplicitConstraints {
    pub s2: f64,
    pub s3: Option<f64>,
    pub s4: Option<f64>,
}

pub fn explicit_s234(moments: &MomentVector) -> Result<ExplicitConstraints> {
    if moments.dim < 2 {
        return Err(Error::InvalidDimension(moments.dim));
    }
    let p2 = moments.get(2);
    let s3 = (moments.dim >= 3).then(|| 1.0 - 3.0 * p2 + 2.0 * moments.get(3));
    let s4 = (moments.dim >= 4)
        .then(|| 1.0 - 6.0 * p2 + 8.0 * moments.get(3) + 3.0 * p2 * p2 - 6.0 * moments.get(4));
    Ok(ExplicitConstraints {
        s2: 1.0 - p2,
        s3,
        s4,
    })
}

/// `(tr rho, tr rho^2, tr rho^3)` of a qutrit from its matrix entries.
pub fn qutrit_moments_standard(r: &[[C64; 3]; 3]) -> Result<(f64, f64, f64)> {
    for j in 0..3 {
        for k in j..3 {
            if (r[j][k] - r[k][j].conj()).norm() > 1e-10 {
                return Err(Error::HermiticityViolation { row: j, col: k });
            }
        }
    }
    let (r00, r11, r22) = (r[0][0].re, r[1][1].re, r[2][2].re);
    let a01 = r[0][1].norm_sqr();
    let a02 = r[0][2].norm_sqr();
    let a12 = r[1][2].norm_sqr();
    let tr1 = r00 + r11 + r22;
    let tr2 = r00 * r00 + r11 * r11 + r22 * r22 + 2.0 * (a01 + a02 + a12);
    let cyc = r[0][1] * r[1][2] * r[2][0];
    let tr3 = r00.powi(3)
        + r11.powi(3)
        + r22.powi(3)
        + 3.0 * r00 * (a01 + a02)
        + 3.0 * r11 * (a01 + a12)
        + 3.0 * r22 * (a02 + a12)
        + 3.0 * (cyc + cyc.conj()).re;
    Ok((tr1, tr2, tr3))
}

fn lookup(e: &BTreeMap<WeylLabel, C64>, x: usize, z: usize) -> Result<C64> {
    let l = WeylLabel { x, z };
    e.get(&l).copied().ok_or_else(|| Error::MissingLabel(l.to_string()))
}

/// Qutrit `tr(rho^3)` from the nine Weyl expectation values `<X^x Z^z>`.
pub fn qutrit_tr3_weyl(e: &BTreeMap<WeylLabel, C64>) -> Result<C64> {
    let g = |x, z| lookup(e, x, z);
    let one = g(0, 0)?;
    let (x1, x2) = (g(1, 0)?, g(2, 0)?);
    let (z1, z2) = (g(0, 1)?, g(0, 2)?);
    let (xz, x2z2) = (g(1, 1)?, g(2, 2)?);
    let (xz2, x2z) = (g(1, 2)?, g(2, 1)?);
    let w = omega_pow(1, 3);
    let w2 = omega_pow(2, 3);
    let cubes = one.powi(3)
        + x1.powi(3)
        + x2.powi(3)
        + xz.powi(3)
        + x2z2.powi(3)
        + xz2.powi(3)
        + x2z.powi(3)
        + z1.powi(3)
        + z2.powi(3);
    let squares = 6.0 * (x1.norm_sqr() + xz.norm_sqr() + xz2.norm_sqr() + z1.norm_sqr());
    let triples = x1 * xz * xz2
        + x2 * x2z * x2z2
        + z1 * xz * x2z
        + z2 * xz2 * x2z2
        + w * z1 * x2 * xz2
        + w * z2 * x1 * x2z
        + w2 * z1 * x1 * x2z2
        + w2 * z2 * x2 * xz;
    Ok((cubes + squares - triples * 3.0) / 9.0)
}

/// `tr(rho^2) = (1/d) sum |<X^x Z^z>|^2`.
pub fn weyl_tr2(e: &BTreeMap<WeylLabel, C64>, dim: usize) -> Result<f64> {
    let mut acc = 0.0;
    for l in WeylLabel::all(dim) {
        acc += lookup(e, l.x, l.z)?.norm_sqr();
    }
    Ok(acc / dim as f64)
}

/// General-`d` cubic moment
/// `(1/d^2) sum <X^-x1 Z^-z1><X^-x2 Z^-z2><X^{x1+x2} Z^{z1+z2}> omega^{z1(x1+x2) + z2 x2}`.
pub fn weyl_tr3(e: &BTreeMap<WeylLabel, C64>, dim: usize) -> Result<C64> {
    let d = dim as i64;
    let mut acc = c64(0.0, 0.0);
    for a in WeylLabel::all(dim) {
        let ea = lookup(e, (dim - a.x) % dim, (dim - a.z) % dim)?;
        for b in WeylLabel::all(dim) {
            let eb = lookup(e, (dim - b.x) % dim, (dim - b.z) % dim)?;
            let ec = lookup(e, (a.x + b.x) % dim, (a.z + b.z) % dim)?;
            let (x1, z1, x2, z2) = (a.x as i64, a.z as i64, b.x as i64, b.z as i64);
            let phase = omega_pow((z1 * (x1 + x2) + z2 * x2).rem_euclid(d), dim);
            acc += ea * eb * ec * phase;
        }
    }
    Ok(acc / (dim * dim) as f64)
}

/// `<X^x Z^z> = tr(rho X^x Z^z)` for all labels.
pub fn weyl_expectations(rho: &ComplexMatrix) -> BTreeMap<WeylLabel, C64> {
    let d = rho.dim();
    WeylLabel::all(d)
        .into_iter()
        .map(|l| (l, rho.trace_product(&crate::operators::weyl(l.x, l.z, d))))
        .collect()
}

const PROB_SUM_TOL: f64 = 1e-10;
const PROB_NEG_TOL: f64 = 1e-12;

pub fn check_probabilities(p: &[f64]) -> Result<()> {
    if let Some(&bad) = p.iter().find(|&&x| !x.is_finite() || x < -PROB_NEG_TOL) {
        return Err(Error::NotNormalized(format!("entry {bad} is negative")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::NotNormalized(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// `sum_b sum_j (p_j^(b))^2` over `d + 1` MUB probability vectors; a state
/// gives `tr(rho^2) + 1`, hence the quadratic constraint `<= 2`.
pub fn mub_quadratic(prob_vectors: &[Vec<f64>]) -> Result<f64> {
    let d = prob_vectors.first().map(Vec::len).unwrap_or(0);
    if d < 2 || prob_vectors.len() != d + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected d + 1 probability vectors of length d, got {} of length {d}",
            prob_vectors.len()
        )));
    }
    let mut acc = 0.0;
    for p in prob_vectors {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        check_probabilities(p)?;
        acc += p.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(acc)
}

/// `(tr rho, tr rho^2, tr rho^3)` of a spin-1 state from the nine mean values
/// `<J_x>, <J_y>, <J_z>, <K_yz>, <K_zx>, <K_xy>, <J_x^2>, <J_y^2>, <J_z^2>`.
pub fn spin1_moments(a: &[f64; 9]) -> (f64, f64, f64) {
    let [jx, jy, jz, kyz, kzx, kxy, x2, y2, z2] = *a;
    let tr1 = (x2 + y2 + z2) / 2.0;
    let tr2 = -1.0
        + x2 * x2
        + y2 * y2
        + z2 * z2
        + 0.5 * (jx * jx + jy * jy + jz * jz + kxy * kxy + kyz * kyz + kzx * kzx);
    let tr3 = 1.0 - 3.0 * x2 * y2 * z2
        + 0.75
            * ((jx * jx + kyz * kyz) * x2 + (jy * jy + kzx * kzx) * y2 + (jz * jz + kxy * kxy) * z2
                - kxy * kyz * kzx
                + jx * kxy * jy
                + jy * kyz * jz
                + jz * kzx * jx);
    (tr1, tr2, tr3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, random_state, random_state_with, trace_power, SeededRng};
    use crate::operators::{mub_family, spin1_nine_set};
    use crate::states::expectations;

    fn diag_state(v: &[f64]) -> DensityState {
        DensityState::new(ComplexMatrix::diagonal(v)).unwrap()
    }

    fn grid(m: &ComplexMatrix) -> [[C64; 3]; 3] {
        let mut r = [[c64(0.0, 0.0); 3]; 3];
        for (j, row) in r.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = m[(j, k)];
            }
        }
        r
    }

    #[test]
    fn moments_examples() {
        let mm = moments_of(&DensityState::maximally_mixed(3).unwrap()).unwrap();
        for (g, w) in mm.moments.iter().zip([1.0, 1.0 / 3.0, 1.0 / 9.0]) {
            assert!((g - w).abs() < 1e-15);
        }
        let pure = random_state(4, 1, 21).unwrap();
        let m = moments_of(&pure).unwrap();
        assert!(m.moments.iter().all(|x| (x - 1.0).abs() < 1e-12));

        let rho = random_state(3, 3, 2).unwrap();
        let m = moments_of(&rho).unwrap();
        let eig = hermitian_eig(rho.matrix()).unwrap();
        for k in 1..=3 {
            let oracle: f64 = eig.eigenvalues.iter().map(|l| l.powi(k as i32)).sum();
            assert!((m.get(k) - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn moments_reject_complex_trace() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 0)] = c64(1.0, 0.1);
        let st = DensityState::new(m).unwrap();
        assert!(matches!(moments_of(&st), Err(Error::NonRealMoment { power: 1, .. })));
    }

    #[test]
    fn newton_examples() {
        let r = newton_s(&MomentVector::new(vec![1.0; 4]));
        assert!(r.s_values[1..].iter().all(|s| s.abs() < 1e-15));
        assert!(r.is_valid());
        let r = newton_s(&MomentVector::new(vec![1.0, 1.0 / 3.0, 1.0 / 9.0]));
        assert!((r.s(2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.s(3) - 1.0 / 27.0).abs() < 1e-15);
        let r = newton_s(&MomentVector::new(vec![1.0, 2.5]));
        assert!((r.s(2) + 0.75).abs() < 1e-15);
        assert!(!r.is_valid());
        assert_eq!(r.satisfied, vec![true, false]);
    }

    #[test]
    fn newton_matches_elementary_symmetric() {
        let mut rng = SeededRng::new(8);
        for d in 2..=6 {
            let h = rng.hermitian(d);
            let eig = hermitian_eig(&h).unwrap();
            let m = moments_of_matrix(&h).unwrap();
            let s = newton_values(&m.moments);
            // e_n via the product expansion of prod (1 + l_i t)
            let mut e = vec![1.0];
            for &l in &eig.eigenvalues {
                let mut next = vec![0.0; e.len() + 1];
                for (k, &c) in e.iter().enumerate() {
                    next[k] += c;
                    next[k + 1] += c * l;
                }
                e = next;
            }
            for n in 1..=d {
                assert!((s[n - 1] - e[n]).abs() < 1e-9 * (1.0 + e[n].abs()));
            }
        }
    }

    #[test]
    fn validate_examples() {
        assert!(validate_state(&diag_state(&[0.5, 0.5]), DEFAULT_TOL).is_valid());
        let bad = validate_state(&diag_state(&[1.5, -0.5]), DEFAULT_TOL);
        assert!(matches!(bad.violation, Some(Violation::Positivity { n: 2, .. })));
        let mut m = ComplexMatrix::diagonal(&[0.5, 0.5]);
        m[(0, 1)] = c64(0.0, 1e-3);
        let r = validate_state(&DensityState::new(m).unwrap(), DEFAULT_TOL);
        assert!(matches!(r.violation, Some(Violation::Hermiticity { .. })));
        let r = validate_state(&diag_state(&[0.6, 0.6]), DEFAULT_TOL);
        assert!(matches!(r.violation, Some(Violation::Trace { .. })));
        let r = validate_state(&diag_state(&[f64::NAN, 0.5]), DEFAULT_TOL);
        assert_eq!(r.violation, Some(Violation::NonFinite));
    }

    #[test]
    fn explicit_examples() {
        let e = explicit_s234(&MomentVector::new(vec![1.0; 4])).unwrap();
        assert!(e.s2.abs() < 1e-15 && e.s3.unwrap().abs() < 1e-15 && e.s4.unwrap().abs() < 1e-15);
        let mm = moments_of(&DensityState::maximally_mixed(4).unwrap()).unwrap();
        assert!((explicit_s234(&mm).unwrap().s2 - 0.75).abs() < 1e-15);

        let rho = random_state(4, 4, 13).unwrap();
        let m = moments_of(&rho).unwrap();
        let s = newton_values(&m.moments);
        let e = explicit_s234(&m).unwrap();
        assert!((e.s2 - 2.0 * s[1]).abs() < 1e-12);
        assert!((e.s3.unwrap() - 6.0 * s[2]).abs() < 1e-12);
        assert!((e.s4.unwrap() - 24.0 * s[3]).abs() < 1e-12);
        assert_eq!(e.s2 >= 0.0, s[1] >= 0.0);
    }

    #[test]
    fn qutrit_standard_examples() {
        let third = c64(1.0 / 3.0, 0.0);
        let z = c64(0.0, 0.0);
        let (t1, t2, t3) = qutrit_moments_standard(&[[third, z, z], [z, third, z], [z, z, third]]).unwrap();
        assert!((t1 - 1.0).abs() < 1e-15 && (t2 - 1.0 / 3.0).abs() < 1e-15 && (t3 - 1.0 / 9.0).abs() < 1e-15);

        let pure = random_state(3, 1, 4).unwrap();
        let (t1, t2, t3) = qutrit_moments_standard(&grid(pure.matrix())).unwrap();
        assert!((t1 - 1.0).abs() < 1e-10 && (t2 - 1.0).abs() < 1e-10 && (t3 - 1.0).abs() < 1e-10);

        let rho = random_state(3, 3, 8).unwrap();
        let (_, t2, t3) = qutrit_moments_standard(&grid(rho.matrix())).unwrap();
        assert!((t2 - trace_power(rho.matrix(), 2).unwrap().re).abs() < 1e-10);
        assert!((t3 - trace_power(rho.matrix(), 3).unwrap().re).abs() < 1e-10);

        let mut g = grid(rho.matrix());
        g[0][1] += c64(1e-3, 0.0);
        assert!(matches!(
            qutrit_moments_standard(&g),
            Err(Error::HermiticityViolation { row: 0, col: 1 })
        ));
    }

    #[test]
    fn qutrit_weyl_examples() {
        let mm = weyl_expectations(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0));
        assert!((qutrit_tr3_weyl(&mm).unwrap() - c64(1.0 / 9.0, 0.0)).norm() < 1e-15);

        let zero = weyl_expectations(&ComplexMatrix::diagonal(&[1.0, 0.0, 0.0]));
        assert!((zero[&WeylLabel { x: 0, z: 1 }] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((qutrit_tr3_weyl(&zero).unwrap() - c64(1.0, 0.0)).norm() < 1e-14);

        let mut rng = SeededRng::new(70);
        for _ in 0..100 {
            let rank = 1 + rng.index(3);
            let rho = random_state_with(&mut rng, 3, rank).unwrap();
            let e = weyl_expectations(rho.matrix());
            let oracle = trace_power(rho.matrix(), 3).unwrap().re;
            let v = qutrit_tr3_weyl(&e).unwrap();
            assert!((v.re - oracle).abs() < 1e-9 && v.im.abs() < 1e-9);
        }

        let mut partial = mm.clone();
        partial.remove(&WeylLabel { x: 2, z: 1 });
        assert_eq!(
            qutrit_tr3_weyl(&partial).unwrap_err(),
            Error::MissingLabel("X^2Z^1".into())
        );
    }

    #[test]
    fn weyl_tr2_examples() {
        for d in 2..=6 {
            let e = weyl_expectations(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64));
            assert!((weyl_tr2(&e, d).unwrap() - 1.0 / d as f64).abs() < 1e-14);
        }
        let pure = random_state(3, 1, 6).unwrap();
        assert!((weyl_tr2(&weyl_expectations(pure.matrix()), 3).unwrap() - 1.0).abs() < 1e-10);
        let rho = random_state(5, 3, 1).unwrap();
        let oracle = trace_power(rho.matrix(), 2).unwrap().re;
        assert!((weyl_tr2(&weyl_expectations(rho.matrix()), 5).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn general_weyl_cubic_matches_trace() {
        let mut rng = SeededRng::new(68);
        for d in 2..=6 {
            for _ in 0..20 {
                let rank = 1 + rng.index(d);
                let rho = random_state_with(&mut rng, d, rank).unwrap();
                let v = weyl_tr3(&weyl_expectations(rho.matrix()), d).unwrap();
                let oracle = trace_power(rho.matrix(), 3).unwrap().re;
                assert!((v.re - oracle).abs() < 1e-9 && v.im.abs() < 1e-9, "d={d}: {v} vs {oracle}");
            }
        }
    }

    #[test]
    fn mub_quadratic_examples() {
        let u = vec![vec![1.0 / 3.0; 3]; 4];
        assert!((mub_quadratic(&u).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let fam = mub_family(3).unwrap();
        let probs = fam.probabilities(&ComplexMatrix::diagonal(&[1.0, 0.0, 0.0])).unwrap();
        assert!((mub_quadratic(&probs).unwrap() - 2.0).abs() < 1e-12);
        let certain = vec![vec![1.0, 0.0, 0.0]; 4];
        assert!(mub_quadratic(&certain).unwrap() > 2.0);
        assert!(matches!(
            mub_quadratic(&[vec![0.5, 0.6], vec![0.5, 0.5], vec![0.5, 0.5]]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            mub_quadratic(&[vec![1.0 + 1e-13, -1e-13], vec![0.5, 0.5], vec![0.5, 0.5]]),
            Ok(_)
        ));
        assert!(matches!(
            mub_quadratic(&[vec![1.1, -0.1], vec![0.5, 0.5], vec![0.5, 0.5]]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn mub_quadratic_equals_purity_plus_one() {
        for d in [2, 3, 5] {
            let fam = mub_family(d).unwrap();
            for seed in 0..20 {
                let rho = random_state(d, 1 + (seed as usize % d), seed).unwrap();
                let q = mub_quadratic(&fam.probabilities(rho.matrix()).unwrap()).unwrap();
                let p = trace_power(rho.matrix(), 2).unwrap().re;
                assert!((q - p - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn spin1_moment_examples() {
        let t = 2.0 / 3.0;
        let (a, b, c) = spin1_moments(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, t, t, t]);
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0 / 3.0).abs() < 1e-15 && (c - 1.0 / 9.0).abs() < 1e-15);
        let (a, b, c) = spin1_moments(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);

        let set = spin1_nine_set();
        let mut rng = SeededRng::new(84);
        for _ in 0..100 {
            let rank = 1 + rng.index(3);
            let rho = random_state_with(&mut rng, 3, rank).unwrap();
            let v: [f64; 9] = expectations(&rho, &set).unwrap().values.try_into().unwrap();
            let (a, b, c) = spin1_moments(&v);
            let m = moments_of(&rho).unwrap();
            assert!((a - m.get(1)).abs() < 1e-9);
            assert!((b - m.get(2)).abs() < 1e-9);
            assert!((c - m.get(3)).abs() < 1e-9);
        }
    }
}
