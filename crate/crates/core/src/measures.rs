//! Uncertainty and certainty measures on expectation values.
//!
//! Each operator `A` with spectrum in `[a_min, a_max]` is mapped to the pair
//! `dotA = (a_max - <A>) / (a_max - a_min)`, `ringA = 1 - dotA`, on which the
//! two-outcome entropy `H`, the power measures `u_kappa` and `u_max` are
//! defined. Sums of these over an operator set give the combined measures.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::constraints::check_probabilities;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{DensityState, ExpectationPoint};

/// Slack allowed outside `[a_min, a_max]` before a value is rejected.
pub const RANGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointPair {
    pub a_min: f64,
    pub a_max: f64,
}

impl EndpointPair {
    pub fn new(a_min: f64, a_max: f64) -> Result<Self> {
        if !(a_max - a_min > 1e-12) {
            if (a_max - a_min).abs() <= 1e-12 {
                return Err(Error::DegenerateSpectrum(a_min));
            }
            return Err(Error::InvalidArgument(format!(
                "a_min {a_min} exceeds a_max {a_max}"
            )));
        }
        Ok(Self { a_min, a_max })
    }

    pub fn width(&self) -> f64 {
        self.a_max - self.a_min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a_min + self.a_max)
    }

    /// Clamps `value` into the interval, rejecting larger excursions.
    pub fn clamp(&self, value: f64) -> Result<f64> {
        if !value.is_finite()
            || value < self.a_min - RANGE_TOL
            || value > self.a_max + RANGE_TOL
        {
            return Err(Error::ValueOutOfRange {
                value,
                min: self.a_min,
                max: self.a_max,
            });
        }
        Ok(value.clamp(self.a_min, self.a_max))
    }
}

/// `(dotA, ringA)`.
pub fn normalized_pair(value: f64, ep: &EndpointPair) -> Result<(f64, f64)> {
    let v = ep.clamp(value)?;
    let dot = ((ep.a_max - v) / ep.width()).clamp(0.0, 1.0);
    Ok((dot, 1.0 - dot))
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `-(dotA ln dotA + ringA ln ringA)`, in `[0, ln 2]`.
pub fn h_measure(value: f64, ep: &EndpointPair) -> Result<f64> {
    let (a, b) = normalized_pair(value, ep)?;
    Ok(-(xlnx(a) + xlnx(b)))
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa <= 0.0 || kappa == 1.0 {
        return Err(Error::InvalidKappa(kappa));
    }
    Ok(())
}

/// `dotA^kappa + ringA^kappa`.
pub fn u_kappa(value: f64, ep: &EndpointPair, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let (a, b) = normalized_pair(value, ep)?;
    Ok(a.powf(kappa) + b.powf(kappa))
}

/// `max(dotA, ringA)`, in `[1/2, 1]`.
pub fn u_max(value: f64, ep: &EndpointPair) -> Result<f64> {
    let (a, b) = normalized_pair(value, ep)?;
    Ok(a.max(b))
}

/// `-ln u_2`.
pub fn renyi2(value: f64, ep: &EndpointPair) -> Result<f64> {
    Ok(-u_kappa(value, ep, 2.0)?.ln())
}

/// Binary entropy `-(p ln p + (1-p) ln(1-p))`.
pub fn binary_entropy(p: f64) -> f64 {
    -(xlnx(p) + xlnx(1.0 - p))
}

/// `sqrt(<A^2> - <A>^2)`; radicands down to `-1e-12` are read as zero.
pub fn std_dev(rho: &DensityState, a: &ComplexMatrix) -> f64 {
    let mean = rho.matrix().trace_product(a).re;
    let sq = rho.matrix().trace_product(&(a * a)).re;
    sqrt_variance(sq - mean * mean)
}

pub(crate) fn sqrt_variance(v: f64) -> f64 {
    if v < 0.0 {
        0.0
    } else {
        v.sqrt()
    }
}

/// Standard deviation of an operator with only two eigenvalues, from its
/// mean alone: `sqrt((a_max - v)(v - a_min))`.
pub fn two_level_std_dev(value: f64, ep: &EndpointPair) -> Result<f64> {
    let v = ep.clamp(value)?;
    Ok(sqrt_variance((ep.a_max - v) * (v - ep.a_min)))
}

/// Shannon entropy with `0 ln 0 = 0`.
pub fn shannon(probs: &[f64]) -> Result<f64> {
    check_probabilities(probs)?;
    Ok(-probs.iter().map(|&p| xlnx(p.max(0.0))).sum::<f64>())
}

/// Which combined measure to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "kappa", rename_all = "snake_case")]
pub enum MeasureKind {
    /// Two-outcome entropy per operator.
    H,
    /// `u_kappa` per operator.
    UKappa(f64),
    UMax,
    /// `-ln u_2` per operator.
    Renyi2,
    StdDev,
    StdDevSquared,
    /// Shannon entropy of the expectation vector read as probabilities.
    ShannonProbs,
    /// `sum_i <A_i>^kappa` of the expectation vector read as probabilities.
    PowerSum(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl MeasureKind {
    /// Minimize for concave kinds, maximize for convex ones.
    pub fn natural_direction(&self) -> Direction {
        match *self {
            MeasureKind::H
            | MeasureKind::Renyi2
            | MeasureKind::StdDev
            | MeasureKind::StdDevSquared
            | MeasureKind::ShannonProbs => Direction::Minimize,
            MeasureKind::UKappa(k) | MeasureKind::PowerSum(k) => {
                if k < 1.0 {
                    Direction::Minimize
                } else {
                    Direction::Maximize
                }
            }
            MeasureKind::UMax => Direction::Maximize,
        }
    }

    pub fn needs_state(&self) -> bool {
        matches!(self, MeasureKind::StdDev | MeasureKind::StdDevSquared)
    }

    /// Kinds that act on the whole expectation vector instead of summing
    /// per-operator terms.
    pub fn is_vector_kind(&self) -> bool {
        matches!(self, MeasureKind::ShannonProbs | MeasureKind::PowerSum(_))
    }

    fn validate(&self) -> Result<()> {
        match *self {
            MeasureKind::UKappa(k) | MeasureKind::PowerSum(k) => check_kappa(k),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::H => write!(f, "H"),
            MeasureKind::UKappa(k) => write!(f, "u:{k}"),
            MeasureKind::UMax => write!(f, "u_max"),
            MeasureKind::Renyi2 => write!(f, "H2"),
            MeasureKind::StdDev => write!(f, "std"),
            MeasureKind::StdDevSquared => write!(f, "var"),
            MeasureKind::ShannonProbs => write!(f, "shannon"),
            MeasureKind::PowerSum(k) => write!(f, "power:{k}"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    /// Accepts `H`, `H2`, `u_max`, `u_half`, `u2`, `u:K`, `std`, `var`,
    /// `shannon`, `power:K`.
    fn from_str(s: &str) -> Result<Self> {
        let kappa = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad kappa '{t}'")))
        };
        let kind = match s {
            "H" => MeasureKind::H,
            "H2" => MeasureKind::Renyi2,
            "u_max" => MeasureKind::UMax,
            "u_half" => MeasureKind::UKappa(0.5),
            "u2" => MeasureKind::UKappa(2.0),
            "std" => MeasureKind::StdDev,
            "var" => MeasureKind::StdDevSquared,
            "shannon" => MeasureKind::ShannonProbs,
            _ => {
                if let Some(k) = s.strip_prefix("u:") {
                    MeasureKind::UKappa(kappa(k)?)
                } else if let Some(k) = s.strip_prefix("power:") {
                    MeasureKind::PowerSum(kappa(k)?)
                } else {
                    return Err(Error::InvalidArgument(format!("unknown measure '{s}'")));
                }
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub direction: Direction,
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            direction: kind.natural_direction(),
        })
    }

    /// Rejects a direction that does not match the kind's curvature.
    pub fn with_direction(kind: MeasureKind, direction: Direction) -> Result<Self> {
        kind.validate()?;
        if kind.natural_direction() != direction {
            return Err(Error::InconsistentDirection);
        }
        Ok(Self { kind, direction })
    }

    pub fn h() -> Self {
        Self::new(MeasureKind::H).unwrap()
    }

    pub fn u_kappa(kappa: f64) -> Result<Self> {
        Self::new(MeasureKind::UKappa(kappa))
    }

    pub fn u_max() -> Self {
        Self::new(MeasureKind::UMax).unwrap()
    }

    pub fn renyi2() -> Self {
        Self::new(MeasureKind::Renyi2).unwrap()
    }

    pub fn std_dev() -> Self {
        Self::new(MeasureKind::StdDev).unwrap()
    }

    pub fn variance() -> Self {
        Self::new(MeasureKind::StdDevSquared).unwrap()
    }

    pub fn shannon() -> Self {
        Self::new(MeasureKind::ShannonProbs).unwrap()
    }

    pub fn power_sum(kappa: f64) -> Result<Self> {
        Self::new(MeasureKind::PowerSum(kappa))
    }

    /// Whether `value` lies in the region carved out by `bound`, i.e. the
    /// relation `value >= bound` (minimize) or `value <= bound` (maximize).
    pub fn satisfies(&self, value: f64, bound: f64, tol: f64) -> bool {
        match self.direction {
            Direction::Minimize => value >= bound - tol,
            Direction::Maximize => value <= bound + tol,
        }
    }
}

/// Per-operator term of a non-vector, non-state kind.
pub fn single_measure(kind: MeasureKind, value: f64, ep: &EndpointPair) -> Result<f64> {
    match kind {
        MeasureKind::H => h_measure(value, ep),
        MeasureKind::UKappa(k) => u_kappa(value, ep, k),
        MeasureKind::UMax => u_max(value, ep),
        MeasureKind::Renyi2 => renyi2(value, ep),
        MeasureKind::StdDev | MeasureKind::StdDevSquared => Err(Error::MeasureNeedsState),
        MeasureKind::ShannonProbs | MeasureKind::PowerSum(_) => Err(Error::InvalidArgument(
            format!("{kind} acts on the whole vector"),
        )),
    }
}

fn vector_measure(kind: MeasureKind, values: &[f64]) -> Result<f64> {
    match kind {
        MeasureKind::ShannonProbs => shannon(values),
        MeasureKind::PowerSum(k) => {
            check_probabilities(values)?;
            Ok(values.iter().map(|&p| p.max(0.0).powf(k)).sum())
        }
        _ => unreachable!("not a vector kind"),
    }
}

/// Sum of the measure over all operators of the point.
///
/// Standard-deviation kinds need the state and yield
/// [`Error::MeasureNeedsState`]; see [`combined_two_level`] and
/// [`combined_state`].
pub fn combined(point: &ExpectationPoint, spec: &MeasureSpec, endpoints: &[EndpointPair]) -> Result<f64> {
    if spec.kind.is_vector_kind() {
        return vector_measure(spec.kind, &point.values);
    }
    if endpoints.len() != point.values.len() {
        return Err(Error::ArityMismatch {
            expected: endpoints.len(),
            found: point.values.len(),
        });
    }
    point
        .values
        .iter()
        .zip(endpoints)
        .map(|(&v, ep)| single_measure(spec.kind, v, ep))
        .sum()
}

/// As [`combined`], with standard deviations taken from the mean values,
/// which is exact for operators with two distinct eigenvalues.
pub fn combined_two_level(
    point: &ExpectationPoint,
    spec: &MeasureSpec,
    endpoints: &[EndpointPair],
) -> Result<f64> {
    match spec.kind {
        MeasureKind::StdDev | MeasureKind::StdDevSquared => {
            let mut acc = 0.0;
            for (&v, ep) in point.values.iter().zip(endpoints) {
                let s = two_level_std_dev(v, ep)?;
                acc += if spec.kind == MeasureKind::StdDev { s } else { s * s };
            }
            Ok(acc)
        }
        _ => combined(point, spec, endpoints),
    }
}

/// Combined measure of a state, covering every kind.
pub fn combined_state(
    rho: &DensityState,
    ops: &crate::operators::OperatorSet,
    spec: &MeasureSpec,
    endpoints: &[EndpointPair],
) -> Result<f64> {
    match spec.kind {
        MeasureKind::StdDev | MeasureKind::StdDevSquared => {
            ops.require_hermitian()?;
            let mut acc = 0.0;
            for op in ops.operators() {
                let s = std_dev(rho, op);
                acc += if spec.kind == MeasureKind::StdDev { s } else { s * s };
            }
            Ok(acc)
        }
        _ => {
            let point = crate::states::expectations(rho, ops)?;
            combined(&point, spec, endpoints)
        }
    }
}
