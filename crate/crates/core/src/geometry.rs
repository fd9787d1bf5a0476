//! The allowed region of expectation values as a convex body.
//!
//! For Hermitian `A_1..A_N` the set of attainable `(<A_1>, .., <A_N>)` is
//! compact and convex, and its support function is
//! `h(w) = lambda_max(sum_i w_i A_i)`. A point `e` belongs to the region iff
//! `h(w) - w.e >= 0` for every unit `w`; [`MembershipOracle`] searches for the
//! most negative value of that margin. Closed-form regions (qubit Gram
//! ellipsoids, two projectors, spin balls) serve as cross-checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{determinant, dot3, gram_matrix, hermitian_eig, ComplexMatrix, SeededRng};
use crate::measures::{combined, combined_two_level, EndpointPair, MeasureKind, MeasureSpec};
use crate::operators::OperatorSet;
use crate::states::{ket_expectations, ExpectationPoint};

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-7;
pub const DEFAULT_PROBES: usize = 512;
pub const MIN_PROBES: usize = 100;
pub const DEFAULT_RESOLUTION: usize = 400;

const PROBE_SEED: u64 = 0x005e_ed0f_9eb5;
const DESCENT_STARTS: usize = 4;
const DESCENT_MAX_ITERS: usize = 200;
const JITTER: f64 = 1e-3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 1e-300 && n.is_finite()).then(|| a.iter().map(|x| x / n).collect())
}

/// Inverse of a small symmetric positive-definite matrix by Gauss–Jordan.
fn invert(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::LinearlyDependent {
                det: determinant(m),
            });
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..n {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for k in 0..n {
                        a[row][k] -= f * a[col][k];
                        inv[row][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Ellipsoid `(e - c)^T G^{-1} (e - c) <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticRegion {
    pub gram: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    inverse: Vec<Vec<f64>>,
}

impl QuadraticRegion {
    pub fn new(gram: Vec<Vec<f64>>, center: Vec<f64>) -> Result<Self> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|r| r.len() != n) || center.len() != n {
            return Err(Error::InvalidArgument("Gram matrix must be square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if (gram[i][j] - gram[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument("Gram matrix is not symmetric".into()));
                }
            }
        }
        let det = determinant(&gram);
        if det < 1e-10 {
            return Err(Error::LinearlyDependent { det });
        }
        let inverse = invert(&gram)?;
        Ok(Self {
            gram,
            center,
            inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn inverse(&self) -> &[Vec<f64>] {
        &self.inverse
    }

    /// `(e - c)^T G^{-1} (e - c)`.
    pub fn quadratic_form(&self, e: &[f64]) -> f64 {
        let d: Vec<f64> = e.iter().zip(&self.center).map(|(x, c)| x - c).collect();
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += d[i] * self.inverse[i][j] * d[j];
            }
        }
        acc
    }

    pub fn contains(&self, e: &[f64], tol: f64) -> bool {
        self.quadratic_form(e) <= 1.0 + tol
    }

    /// `w.c + sqrt(w^T G w)`.
    pub fn support(&self, w: &[f64]) -> f64 {
        let n = self.dim();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += w[i] * self.gram[i][j] * w[j];
            }
        }
        dot(w, &self.center) + q.max(0.0).sqrt()
    }
}

/// Region of `(<a_1.sigma>, ..)` for linearly independent qubit axes.
pub fn gram_region(axes: &[[f64; 3]]) -> Result<QuadraticRegion> {
    if !(2..=3).contains(&axes.len()) {
        return Err(Error::InvalidArgument(format!(
            "gram_region takes 2 or 3 axes, got {}",
            axes.len()
        )));
    }
    for a in axes {
        let n = dot3(a, a).sqrt();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnit { norm: n });
        }
    }
    QuadraticRegion::new(gram_matrix(axes), vec![0.0; axes.len()])
}

/// Principal axes: `O^T G O = diag(lambdas)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipsoidAxes {
    /// Ascending eigenvalues of `G`; the semi-axes are their square roots.
    pub lambdas: Vec<f64>,
    /// Columns are unit eigenvectors, first nonzero component positive.
    pub orientation: Vec<Vec<f64>>,
}

impl EllipsoidAxes {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.orientation.iter().map(|row| row[k]).collect()
    }
}

pub fn ellipsoid_axes(region: &QuadraticRegion) -> Result<EllipsoidAxes> {
    let n = region.dim();
    let g = ComplexMatrix::from_real_rows(&region.gram)?;
    let eig = hermitian_eig(&g)?;
    let mut orientation = vec![vec![0.0; n]; n];
    for k in 0..n {
        let v = eig.eigenvector(k);
        // Real symmetric input keeps the Jacobi rotations real up to a global phase.
        let lead = v
            .iter()
            .find(|z| z.norm() > 1e-12)
            .copied()
            .unwrap_or(crate::linalg::c64(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        for (i, z) in v.iter().enumerate() {
            orientation[i][k] = (z * phase).re;
        }
    }
    Ok(EllipsoidAxes {
        lambdas: eig.eigenvalues,
        orientation,
    })
}

/// `(1 - <A>^2)(1 - <B>^2) - (1 - (a.b)^2) <C>^2 - (a.b - <A><B>)^2` for
/// `C` along `a x b / |a x b|`; nonnegative on states and zero on pure ones.
pub fn schrodinger_form(ea: f64, eb: f64, ec: f64, dot_ab: f64) -> f64 {
    (1.0 - ea * ea) * (1.0 - eb * eb)
        - (1.0 - dot_ab * dot_ab) * ec * ec
        - (dot_ab - ea * eb).powi(2)
}

/// Allowed region of `(<P>, <Q>)` for rank-1 projectors with
/// `|<a|b>|^2 = overlap_sq` on a `dim`-level system.
///
/// For a qubit it is the ellipse `E^T G^{-1} E <= 1` with
/// `E = (2<P> - 1, 2<Q> - 1)` and off-diagonal Gram entry `2 overlap_sq - 1`;
/// for `dim > 2` it is the convex hull of that ellipse and the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoProjectorRegion {
    pub overlap_sq: f64,
    pub dim: usize,
    ellipse: QuadraticRegion,
}

pub fn two_projector_region(overlap_sq: f64, dim: usize) -> Result<TwoProjectorRegion> {
    if !(overlap_sq > 0.0 && overlap_sq < 1.0) {
        return Err(Error::DegenerateOverlap(overlap_sq));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let c = 2.0 * overlap_sq - 1.0;
    let ellipse = QuadraticRegion::new(vec![vec![1.0, c], vec![c, 1.0]], vec![0.0, 0.0])?;
    Ok(TwoProjectorRegion {
        overlap_sq,
        dim,
        ellipse,
    })
}

impl TwoProjectorRegion {
    /// `E^T G^{-1} E` at `(p, q)`.
    pub fn ellipse_form(&self, p: f64, q: f64) -> f64 {
        self.ellipse.quadratic_form(&[2.0 * p - 1.0, 2.0 * q - 1.0])
    }

    /// Membership. For `dim > 2`, `x` is in the hull iff `mu x` lies in the
    /// ellipse for some `mu >= 1`, a quadratic condition in `mu`.
    pub fn contains(&self, p: f64, q: f64, tol: f64) -> bool {
        if self.ellipse_form(p, q) <= 1.0 + tol {
            return true;
        }
        if self.dim == 2 {
            return false;
        }
        if p.abs() <= tol && q.abs() <= tol {
            return true;
        }
        // (2 mu x - 1)^T Gi (2 mu x - 1) <= 1  <=>  a mu^2 + b mu + c <= 0
        let gi = self.ellipse.inverse();
        let x = [p, q];
        let one = [1.0, 1.0];
        let form = |u: &[f64; 2], v: &[f64; 2]| {
            let mut acc = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    acc += u[i] * gi[i][j] * v[j];
                }
            }
            acc
        };
        let a = 4.0 * form(&x, &x);
        let b = -4.0 * form(&x, &one);
        let c = form(&one, &one) - 1.0 - tol;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return false;
        }
        let mu_hi = (-b + disc.sqrt()) / (2.0 * a);
        mu_hi >= 1.0
    }

    /// `max(0, w.(1/2, 1/2) + sqrt(w^T G w) / 2)`, without the `max` for a qubit.
    pub fn support(&self, w: &[f64]) -> f64 {
        let s = 0.5 * (w[0] + w[1]) + 0.5 * self.ellipse.support(w);
        if self.dim == 2 {
            s
        } else {
            s.max(0.0)
        }
    }
}

/// `lambda_max(sum_i w_i A_i)`.
pub fn support_value(direction: &[f64], ops: &OperatorSet) -> Result<f64> {
    Ok(support_point(direction, ops)?.0)
}

/// Support value and touch point `<A_i>` in the top eigenvector.
pub fn support_point(direction: &[f64], ops: &OperatorSet) -> Result<(f64, Vec<f64>)> {
    ops.require_hermitian()?;
    if direction.len() != ops.len() {
        return Err(Error::ArityMismatch {
            expected: ops.len(),
            found: direction.len(),
        });
    }
    if norm(direction) == 0.0 {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    Ok(support_unchecked(direction, ops))
}

fn support_unchecked(direction: &[f64], ops: &OperatorSet) -> (f64, Vec<f64>) {
    let m = ops.weighted_sum(direction).hermitian_part();
    let eig = hermitian_eig(&m).expect("Hermitian combination");
    let top = eig.eigenvector(ops.dim() - 1);
    (eig.max(), ket_expectations(&top, ops))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub inside: bool,
    /// Smallest `h(w) - w.e` found over unit directions.
    pub margin: f64,
    pub witness_direction: Vec<f64>,
}

/// Membership tester with probe directions and their support data cached.
#[derive(Debug, Clone)]
pub struct MembershipOracle {
    ops: OperatorSet,
    directions: Vec<Vec<f64>>,
    supports: Vec<f64>,
    touches: Vec<Vec<f64>>,
    /// Estimated largest distance from a unit vector to its nearest probe.
    covering: f64,
}

fn probe_directions(n: usize, probes: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(probes + 2 * n);
    match n {
        1 => {}
        2 => {
            for k in 0..probes {
                let t = 2.0 * std::f64::consts::PI * k as f64 / probes as f64;
                dirs.push(vec![t.cos(), t.sin()]);
            }
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..probes {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / probes as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * k as f64;
                dirs.push(vec![r * t.cos(), r * t.sin(), z]);
            }
        }
        _ => {
            let mut rng = SeededRng::new(PROBE_SEED);
            for _ in 0..probes {
                dirs.push(rng.unit_vector(n));
            }
        }
    }
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            dirs.push(e);
        }
    }
    dirs
}

fn covering_estimate(n: usize, dirs: &[Vec<f64>]) -> f64 {
    match n {
        1 => 0.0,
        2 => {
            let probes = dirs.len() - 4;
            2.0 * (std::f64::consts::PI / (2.0 * probes as f64)).sin()
        }
        _ => {
            let mut rng = SeededRng::new(PROBE_SEED ^ 0xc0fe);
            let mut worst: f64 = 0.0;
            for _ in 0..2048 {
                let u = rng.unit_vector(n);
                let best = dirs.iter().map(|d| dot(d, &u)).fold(f64::MIN, f64::max);
                worst = worst.max((2.0 - 2.0 * best.min(1.0)).max(0.0).sqrt());
            }
            // sampled, so pad generously
            1.5 * worst
        }
    }
}

impl MembershipOracle {
    pub fn new(ops: &OperatorSet, probes: usize) -> Result<Self> {
        ops.require_hermitian()?;
        if probes < MIN_PROBES {
            return Err(Error::InvalidArgument(format!(
                "at least {MIN_PROBES} probes are required, got {probes}"
            )));
        }
        let n = ops.len();
        let directions = probe_directions(n, probes);
        let data: Vec<(f64, Vec<f64>)> = directions
            .par_iter()
            .map(|w| support_unchecked(w, ops))
            .collect();
        let (supports, touches): (Vec<f64>, Vec<Vec<f64>>) = data.into_iter().unzip();
        let covering = covering_estimate(n, &directions);
        Ok(Self {
            ops: ops.clone(),
            directions,
            supports,
            touches,
            covering,
        })
    }

    pub fn with_defaults(ops: &OperatorSet) -> Result<Self> {
        Self::new(ops, DEFAULT_PROBES)
    }

    pub fn ops(&self) -> &OperatorSet {
        &self.ops
    }

    pub fn probe_count(&self) -> usize {
        self.directions.len()
    }

    fn eval(&self, w: &[f64], e: &[f64]) -> (f64, Vec<f64>) {
        let (h, t) = support_unchecked(w, &self.ops);
        (h - dot(w, e), t)
    }

    /// Projected-gradient descent of `g(w) = h(w) - w.e` on the unit sphere.
    /// The gradient of `h` is the touch point.
    fn descend(&self, e: &[f64], start: &[f64], rng: &mut SeededRng) -> (f64, Vec<f64>) {
        let n = e.len();
        let mut w = start.to_vec();
        let (mut g, mut t) = self.eval(&w, e);
        let mut step = 1.0;
        let mut jitters = 0;
        let mut best = (g, w.clone());
        for _ in 0..DESCENT_MAX_ITERS {
            let g_prev = g;
            let grad: Vec<f64> = t.iter().zip(e).map(|(a, b)| a - b).collect();
            let radial = dot(&grad, &w);
            let tangent: Vec<f64> = grad.iter().zip(&w).map(|(gr, wi)| gr - radial * wi).collect();
            let tn2 = dot(&tangent, &tangent);
            if tn2.sqrt() < 1e-12 {
                break;
            }
            let mut accepted = false;
            let mut s = step;
            while s > 1e-12 {
                let trial: Vec<f64> = w.iter().zip(&tangent).map(|(wi, p)| wi - s * p).collect();
                let trial = normalize(&trial).expect("nonzero trial");
                let (gt, tt) = self.eval(&trial, e);
                if gt <= g - 1e-4 * s * tn2 {
                    let (mut best_w, mut best_g, mut best_t) = (trial, gt, tt);
                    // a symmetric overshoot passes Armijo with almost no gain
                    while s > 1e-12 {
                        let half: Vec<f64> = w.iter().zip(&tangent).map(|(wi, p)| wi - 0.5 * s * p).collect();
                        let half = normalize(&half).expect("nonzero trial");
                        let (gh, th) = self.eval(&half, e);
                        if gh >= best_g {
                            break;
                        }
                        s *= 0.5;
                        (best_w, best_g, best_t) = (half, gh, th);
                    }
                    w = best_w;
                    g = best_g;
                    t = best_t;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if accepted {
                step = (2.0 * s).min(4.0);
                if g_prev - g < 1e-15 * (1.0 + g.abs()) {
                    break;
                }
                continue;
            }
            // likely a kink in h; nudge off it
            if g < best.0 {
                best = (g, w.clone());
            }
            if jitters >= 3 || n < 2 {
                break;
            }
            jitters += 1;
            let mut nudged: Vec<f64> = w.iter().map(|wi| wi + JITTER * rng.normal()).collect();
            let r = dot(&nudged, &w);
            for (x, wi) in nudged.iter_mut().zip(&w) {
                *x -= (r - 1.0) * wi;
            }
            let nudged = normalize(&nudged).expect("nonzero nudge");
            let (gn, tn) = self.eval(&nudged, e);
            if gn < best.0 {
                best = (gn, nudged.clone());
            }
            // allow a small uphill move so the search can leave the kink
            if gn < g + 1e-3 * JITTER {
                w = nudged;
                g = gn;
                t = tn;
                step = 1.0;
            }
        }
        if g < best.0 {
            (g, w)
        } else {
            best
        }
    }

    pub fn check(&self, point: &[f64], tol: f64) -> Result<MembershipVerdict> {
        let n = self.ops.len();
        if point.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: point.len(),
            });
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("point has non-finite coordinates".into()));
        }
        let margins: Vec<f64> = self
            .directions
            .iter()
            .zip(&self.supports)
            .map(|(w, h)| h - dot(w, point))
            .collect();
        let mut order: Vec<usize> = (0..margins.len()).collect();
        order.sort_by(|&a, &b| margins[a].total_cmp(&margins[b]));
        let best = order[0];
        let verdict = |margin: f64, w: Vec<f64>| MembershipVerdict {
            inside: margin >= -tol,
            margin,
            witness_direction: w,
        };
        if n == 1 {
            return Ok(verdict(margins[best], self.directions[best].clone()));
        }
        // Within distance r of probe k, h(w) >= w.t_k, so
        // g(w) >= g_k - r |t_k - e|; positive for all k certifies the point.
        let certified = margins
            .iter()
            .zip(&self.touches)
            .map(|(g, t)| {
                let d: f64 = t.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
                g - self.covering * d.sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        if certified > tol {
            return Ok(verdict(margins[best], self.directions[best].clone()));
        }
        if margins[best] < -tol {
            // certainly outside; a short descent only sharpens the margin
            let mut rng = SeededRng::new(PROBE_SEED);
            let (g, w) = self.descend(point, &self.directions[best], &mut rng);
            return Ok(if g < margins[best] {
                verdict(g, w)
            } else {
                verdict(margins[best], self.directions[best].clone())
            });
        }
        let mut rng = SeededRng::new(PROBE_SEED);
        let mut best_g = margins[best];
        let mut best_w = self.directions[best].clone();
        for &k in order.iter().take(DESCENT_STARTS) {
            let (g, w) = self.descend(point, &self.directions[k], &mut rng);
            if g < best_g {
                best_g = g;
                best_w = w;
            }
        }
        Ok(verdict(best_g, best_w))
    }

    /// Touch points of the cached probe directions.
    pub fn probe_touches(&self) -> &[Vec<f64>] {
        &self.touches
    }
}

/// One-shot membership test.
pub fn membership(
    point: &ExpectationPoint,
    ops: &OperatorSet,
    tol: f64,
    probes: usize,
) -> Result<MembershipVerdict> {
    MembershipOracle::new(ops, probes)?.check(&point.values, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySample {
    pub direction: Vec<f64>,
    pub touch: Vec<f64>,
    pub support: f64,
}

/// Support values and touch points along seeded random directions.
pub fn boundary_sample(ops: &OperatorSet, n_directions: usize, seed: u64) -> Result<Vec<BoundarySample>> {
    ops.require_hermitian()?;
    if n_directions == 0 {
        return Err(Error::InvalidArgument("need at least one direction".into()));
    }
    let n = ops.len();
    let mut rng = SeededRng::new(seed);
    let dirs: Vec<Vec<f64>> = (0..n_directions)
        .map(|k| {
            if n == 1 {
                vec![if k % 2 == 0 { 1.0 } else { -1.0 }]
            } else {
                rng.unit_vector(n)
            }
        })
        .collect();
    Ok(dirs
        .into_par_iter()
        .map(|w| {
            let (h, t) = support_unchecked(&w, ops);
            BoundarySample {
                direction: w,
                touch: t,
                support: h,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub coords: Vec<f64>,
    pub in_e: bool,
    pub in_r: bool,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionGrid {
    pub resolution: usize,
    pub endpoints: Vec<EndpointPair>,
    pub bound: f64,
    /// Row-major over the axes, last axis fastest.
    pub cells: Vec<GridCell>,
}

fn is_two_level(op: &ComplexMatrix) -> Result<bool> {
    let eig = hermitian_eig(op)?;
    let (lo, hi) = (eig.min(), eig.max());
    let scale = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    Ok(eig
        .eigenvalues
        .iter()
        .all(|&l| (l - lo).abs() < scale || (l - hi).abs() < scale))
}

/// Rasterizes the box of eigenvalue intervals, flagging each cell center for
/// membership in the allowed region and for the relation `measure vs bound`.
pub fn measure_region_grid(
    ops: &OperatorSet,
    spec: &MeasureSpec,
    bound: f64,
    resolution: usize,
) -> Result<RegionGrid> {
    let oracle = MembershipOracle::with_defaults(ops)?;
    measure_region_grid_with(&oracle, spec, bound, resolution, DEFAULT_MEMBERSHIP_TOL)
}

pub fn measure_region_grid_with(
    oracle: &MembershipOracle,
    spec: &MeasureSpec,
    bound: f64,
    resolution: usize,
    tol: f64,
) -> Result<RegionGrid> {
    let ops = oracle.ops();
    let n = ops.len();
    if n > 3 {
        return Err(Error::TooManyOperators(n));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    if spec.kind.is_vector_kind() {
        return Err(Error::InvalidArgument(format!(
            "{} needs a complete probability vector per cell",
            spec.kind
        )));
    }
    if spec.kind.needs_state() {
        for (i, op) in ops.operators().iter().enumerate() {
            if !is_two_level(op)? {
                return Err(Error::InvalidArgument(format!(
                    "standard deviation of {} is not a function of its mean",
                    ops.labels()[i]
                )));
            }
        }
    }
    let endpoints = ops.endpoints()?;
    let total = resolution.pow(n as u32);
    let cells: Vec<Result<GridCell>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rem = idx;
            let mut coords = vec![0.0; n];
            for axis in (0..n).rev() {
                let k = rem % resolution;
                rem /= resolution;
                let ep = &endpoints[axis];
                coords[axis] = ep.a_min + ep.width() * (k as f64 + 0.5) / resolution as f64;
            }
            let point = ExpectationPoint::new(ops.name(), coords.clone());
            let measure = match spec.kind {
                MeasureKind::StdDev | MeasureKind::StdDevSquared => {
                    combined_two_level(&point, spec, &endpoints)?
                }
                _ => combined(&point, spec, &endpoints)?,
            };
            let in_r = spec.satisfies(measure, bound, 1e-12);
            let in_e = oracle.check(&coords, tol)?.inside;
            Ok(GridCell {
                coords,
                in_e,
                in_r,
                measure,
            })
        })
        .collect();
    Ok(RegionGrid {
        resolution,
        endpoints,
        bound,
        cells: cells.into_iter().collect::<Result<_>>()?,
    })
}
