//! Extremization of combined measures over pure states, and the catalog of
//! named tight bounds.
//!
//! Concave measures take their minimum and convex ones their maximum at
//! extreme points of the allowed region, so it suffices to search the pure
//! states. The search evaluates a lattice over the hyperspherical angles,
//! then refines the best cells with Nelder–Mead.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::mub_quadratic;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, SeededRng, C64};
use crate::measures::{binary_entropy, combined, Direction, EndpointPair, MeasureSpec};
use crate::operators::{
    mub_family, qubit_two_axes, sic_qubit, spin1_nine_set, spin1_six_set, spin_operators,
    OperatorSet, SicVariant,
};
use crate::states::{angles_from_ket, ket_expectations, ket_from_angles, ket_from_raw, ExpectationPoint, PureStateAngles};

pub const DEFAULT_RESTARTS: usize = 16;
pub const DEFAULT_ITERATIONS: usize = 400;
pub const DEFAULT_MAX_LATTICE: usize = 1 << 18;
pub const DEFAULT_WITNESS_STARTS: usize = 96;
/// States closer than this (in `arccos |<psi|phi>|`) are one witness.
pub const WITNESS_ANGLE_TOL: f64 = 1e-3;

const EXACT_GATE: f64 = 1e-6;
const ROUNDED_GATE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Lattice points per angle; `None` means 24 for `d <= 3` and 12 above.
    pub grid_points: Option<usize>,
    /// Cap on the lattice size; points per angle shrink to fit.
    pub max_lattice: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Relative slack for counting a refined point as optimal.
    pub tolerance: f64,
    /// Extra random starts used only by the witness search.
    pub witness_starts: usize,
    pub collect_witnesses: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points: None,
            max_lattice: DEFAULT_MAX_LATTICE,
            iterations: DEFAULT_ITERATIONS,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            tolerance: 1e-7,
            witness_starts: DEFAULT_WITNESS_STARTS,
            collect_witnesses: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} must be positive")));
        if self.grid_points.is_some_and(|k| k < 2) {
            return Err(Error::InvalidArgument("grid points per angle must be at least 2".into()));
        }
        if self.max_lattice == 0 {
            return bad("max_lattice");
        }
        if self.iterations == 0 {
            return bad("iterations");
        }
        if self.restarts == 0 {
            return bad("restarts");
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad("tolerance");
        }
        Ok(())
    }

    /// Points per angle for a `dim`-level system after applying the cap.
    pub fn points_per_angle(&self, dim: usize) -> usize {
        let n_angles = 2 * (dim - 1) as u32;
        let mut k = self.grid_points.unwrap_or(if dim <= 3 { 24 } else { 12 });
        while k > 2 && (k as f64).powi(n_angles as i32) > self.max_lattice as f64 {
            k -= 1;
        }
        k
    }
}

/// What is extremized over pure states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "objective", rename_all = "snake_case")]
pub enum Objective {
    /// A combined measure of the expectation values.
    Measure(MeasureSpec),
    /// `sum_i Delta A_i` (or its squares) computed from the state.
    StdDev { squared: bool },
    /// `sum_{b,j} p_{bj}^2` over a complete family of MUB projectors.
    MubQuadratic,
}

impl Objective {
    pub fn direction(&self) -> Direction {
        match self {
            Objective::Measure(spec) => spec.direction,
            Objective::StdDev { .. } => Direction::Minimize,
            Objective::MubQuadratic => Direction::Maximize,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Measure(spec) => write!(f, "{}", spec.kind),
            Objective::StdDev { squared: false } => write!(f, "std"),
            Objective::StdDev { squared: true } => write!(f, "var"),
            Objective::MubQuadratic => write!(f, "mub-quadratic"),
        }
    }
}

struct Evaluator<'a> {
    ops: &'a OperatorSet,
    endpoints: Vec<EndpointPair>,
    objective: Objective,
    sign: f64,
}

impl<'a> Evaluator<'a> {
    fn new(ops: &'a OperatorSet, objective: Objective) -> Result<Self> {
        ops.require_hermitian()?;
        let mut endpoints = Vec::new();
        match objective {
            Objective::Measure(spec) => {
                if spec.kind.needs_state() {
                    return Err(Error::MeasureNeedsState);
                }
                if !spec.kind.is_vector_kind() {
                    endpoints = ops.endpoints()?;
                }
            }
            Objective::StdDev { .. } => {}
            Objective::MubQuadratic => {
                let d = ops.dim();
                if ops.len() != d * (d + 1) {
                    return Err(Error::InvalidArgument(format!(
                        "expected {} MUB projectors, got {}",
                        d * (d + 1),
                        ops.len()
                    )));
                }
            }
        }
        let sign = match objective.direction() {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        Ok(Self {
            ops,
            endpoints,
            objective,
            sign,
        })
    }

    fn value(&self, ket: &[C64]) -> Result<f64> {
        match self.objective {
            Objective::Measure(spec) => {
                let point = ExpectationPoint::new(self.ops.name(), ket_expectations(ket, self.ops));
                combined(&point, &spec, &self.endpoints)
            }
            Objective::StdDev { squared } => Ok(self
                .ops
                .operators()
                .iter()
                .map(|a| {
                    // |(A - <A>) psi|^2 keeps its accuracy near eigenstates
                    let a_psi = a.mul_vec(ket);
                    let m: f64 = ket.iter().zip(&a_psi).map(|(k, v)| (k.conj() * v).re).sum();
                    let var: f64 = a_psi.iter().zip(ket).map(|(v, k)| (v - k * m).norm_sqr()).sum();
                    if squared {
                        var
                    } else {
                        var.sqrt()
                    }
                })
                .sum()),
            Objective::MubQuadratic => {
                let p = ket_expectations(ket, self.ops);
                let groups: Vec<Vec<f64>> = p.chunks(self.ops.dim()).map(<[f64]>::to_vec).collect();
                mub_quadratic(&groups)
            }
        }
    }

    /// Signed so that smaller is better; failures rank last.
    fn cost(&self, x: &[f64]) -> f64 {
        let half = x.len() / 2;
        match self.value(&ket_from_raw(&x[..half], &x[half..])) {
            Ok(v) if v.is_finite() => self.sign * v,
            _ => f64::INFINITY,
        }
    }
}

/// Minimizes `f` from `x0` with reflection 1, expansion 2, contraction 1/2
/// and shrink 1/2.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], steps: &[f64], iterations: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let toward = |c: &[f64], x: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(x).map(|(ci, xi)| ci + t * (xi - ci)).collect()
    };
    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= 1e-15 * (1.0 + best.abs()) && diameter < 1e-11 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let xr = toward(&centroid, &simplex[n].0, -1.0);
        let fr = f(&xr);
        if fr < best {
            let xe = toward(&centroid, &xr, 2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = toward(&centroid, &xr, 0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = toward(&centroid, &simplex[n].0, 0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x0 = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x = toward(&x0, &entry.0, 0.5);
            let fx = f(&x);
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn lattice_point(mut idx: usize, k: usize, n_theta: usize) -> Vec<f64> {
    let mut x = vec![0.0; 2 * n_theta];
    for (a, slot) in x.iter_mut().enumerate() {
        let i = idx % k;
        idx /= k;
        *slot = if a < n_theta {
            FRAC_PI_2 * i as f64 / (k - 1) as f64
        } else {
            2.0 * PI * i as f64 / k as f64
        };
    }
    x
}

fn lattice_steps(k: usize, n_theta: usize, scale: f64) -> Vec<f64> {
    (0..2 * n_theta)
        .map(|a| {
            scale
                * if a < n_theta {
                    FRAC_PI_2 / (k - 1) as f64
                } else {
                    2.0 * PI / k as f64
                }
        })
        .collect()
}

/// Lattice cells ranked by cost, best first, ties by index.
fn ranked_lattice(eval: &Evaluator, config: &OptimizerConfig) -> (usize, Vec<(f64, usize)>) {
    let dim = eval.ops.dim();
    let k = config.points_per_angle(dim);
    let n = 2 * (dim - 1);
    let total = k.pow(n as u32);
    let mut scored: Vec<(f64, usize)> = (0..total)
        .into_par_iter()
        .map(|i| (eval.cost(&lattice_point(i, k, dim - 1)), i))
        .collect();
    let keep = config.restarts.min(total);
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if keep < total {
        scored.select_nth_unstable_by(keep, cmp);
        scored.truncate(keep);
    }
    scored.sort_by(cmp);
    (k, scored)
}

/// Simplex descent followed by two restarts with shrinking simplices.
fn refine(eval: &Evaluator, x0: &[f64], steps: &[f64], iterations: usize) -> (Vec<f64>, f64) {
    let f = |x: &[f64]| eval.cost(x);
    let (mut x, mut fx) = nelder_mead(&f, x0, steps, iterations);
    for scale in [1e-2, 1e-4] {
        let small: Vec<f64> = vec![scale; x.len()];
        let (y, fy) = nelder_mead(&f, &x, &small, iterations);
        if fy <= fx {
            x = y;
            fx = fy;
        }
    }
    (x, fx)
}

/// Eigenvectors of every member, where standard deviations vanish and
/// per-operator measures hit their extremes. Such kinks stall the simplex
/// search, so they are tried directly.
fn eigen_seeds(ops: &OperatorSet) -> Result<Vec<Vec<f64>>> {
    let mut seeds = Vec::new();
    for op in ops.operators() {
        let eig = hermitian_eig(op)?;
        for k in 0..ops.dim() {
            seeds.push(angles_from_ket(&eig.eigenvector(k))?.flat());
        }
    }
    Ok(seeds)
}

fn canonical(x: &[f64]) -> Result<PureStateAngles> {
    let half = x.len() / 2;
    angles_from_ket(&ket_from_raw(&x[..half], &x[half..]))
}

struct Optimum {
    value: f64,
    angles: PureStateAngles,
}

fn optimize(ops: &OperatorSet, objective: Objective, config: &OptimizerConfig) -> Result<Optimum> {
    config.validate()?;
    let eval = Evaluator::new(ops, objective)?;
    let n_theta = ops.dim() - 1;
    let (k, seeds) = ranked_lattice(&eval, config);
    let steps = lattice_steps(k, n_theta, 0.5);
    let mut starts: Vec<Vec<f64>> = seeds.iter().map(|&(_, i)| lattice_point(i, k, n_theta)).collect();
    starts.extend(eigen_seeds(ops)?);
    let refined: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|x| refine(&eval, x, &steps, config.iterations))
        .collect();
    // the lattice point itself may already be optimal (basis kets)
    let mut best = (lattice_point(seeds[0].1, k, n_theta), seeds[0].0);
    for (x, fx) in refined {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::InvalidArgument(format!("objective {objective} is undefined on every state")));
    }
    let angles = canonical(&best.0)?;
    // closed loop: re-evaluate from the reported angles
    let value = eval.value(&ket_from_angles(&angles))?;
    Ok(Optimum { value, angles })
}

fn state_angle(a: &[C64], b: &[C64]) -> f64 {
    let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    ov.norm().min(1.0).acos()
}

/// Every distinct optimal pure state found from the lattice seeds and from
/// `witness_starts` random starts.
fn witnesses(ops: &OperatorSet, objective: Objective, config: &OptimizerConfig) -> Result<Vec<PureStateAngles>> {
    config.validate()?;
    let eval = Evaluator::new(ops, objective)?;
    let n_theta = ops.dim() - 1;
    let (k, seeds) = ranked_lattice(&eval, config);
    let mut starts: Vec<Vec<f64>> = seeds.iter().map(|&(_, i)| lattice_point(i, k, n_theta)).collect();
    starts.extend(eigen_seeds(ops)?);
    let mut rng = SeededRng::new(config.seed ^ 0x3717_4e55);
    // Haar-random kets give symmetric optima basins of equal weight
    for _ in 0..config.witness_starts {
        starts.push(angles_from_ket(&rng.ket(ops.dim()))?.flat());
    }
    let steps = lattice_steps(k, n_theta, 0.5);
    let mut refined: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|x| refine(&eval, x, &steps, config.iterations))
        .collect();
    refined.sort_by(|a, b| a.1.total_cmp(&b.1));
    let best = refined[0].1;
    let slack = config.tolerance * (1.0 + best.abs());
    let mut kets: Vec<Vec<C64>> = Vec::new();
    let mut found = Vec::new();
    for (x, _) in refined.iter().filter(|(_, fx)| *fx <= best + slack) {
        let angles = canonical(x)?;
        let ket = ket_from_angles(&angles);
        if kets.iter().all(|k| state_angle(k, &ket) >= WITNESS_ANGLE_TOL) {
            kets.push(ket);
            found.push(angles);
        }
    }
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub name: String,
    pub set: String,
    pub objective: Objective,
    pub direction: Direction,
    pub value: f64,
    pub angles: PureStateAngles,
    pub reference_value: Option<f64>,
    pub reference_expr: Option<String>,
    pub deviation: Option<f64>,
    pub gate: Option<f64>,
    pub witnesses: Option<Vec<PureStateAngles>>,
}

impl BoundResult {
    /// True unless the deviation from a reference value exceeds its gate.
    pub fn passes(&self) -> bool {
        match (self.deviation, self.gate) {
            (Some(d), Some(g)) => d <= g,
            _ => true,
        }
    }
}

fn result_for(name: String, ops: &OperatorSet, objective: Objective, config: &OptimizerConfig) -> Result<BoundResult> {
    let opt = optimize(ops, objective, config)?;
    let witnesses = if config.collect_witnesses {
        Some(witnesses(ops, objective, config)?)
    } else {
        None
    };
    Ok(BoundResult {
        name,
        set: ops.name().to_string(),
        objective,
        direction: objective.direction(),
        value: opt.value,
        angles: opt.angles,
        reference_value: None,
        reference_expr: None,
        deviation: None,
        gate: None,
        witnesses,
    })
}

/// Tight bound of a combined measure: the minimum of a concave measure or the
/// maximum of a convex one over pure states.
pub fn optimize_bound(ops: &OperatorSet, spec: &MeasureSpec, config: &OptimizerConfig) -> Result<BoundResult> {
    result_for(format!("{}.{}", ops.name(), spec.kind), ops, Objective::Measure(*spec), config)
}

/// Minimum of `sum_i Delta A_i`, or of `sum_i (Delta A_i)^2` when `squared`.
pub fn std_dev_bound(ops: &OperatorSet, squared: bool, config: &OptimizerConfig) -> Result<BoundResult> {
    let objective = Objective::StdDev { squared };
    result_for(format!("{}.{objective}", ops.name()), ops, objective, config)
}

/// A named bound with its reference value.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub ops: OperatorSet,
    pub objective: Objective,
    pub reference_expr: String,
    pub reference_value: f64,
    pub gate: f64,
}

fn entry(name: impl Into<String>, ops: &OperatorSet, objective: Objective, expr: &str, value: f64) -> CatalogEntry {
    CatalogEntry {
        name: name.into(),
        ops: ops.clone(),
        objective,
        reference_expr: expr.to_string(),
        reference_value: value,
        gate: EXACT_GATE,
    }
}

fn measure(s: &str) -> Objective {
    Objective::Measure(MeasureSpec::new(s.parse().expect("known measure")).expect("valid measure"))
}

fn spin_label(two_j: usize) -> String {
    if two_j % 2 == 0 {
        format!("{}", two_j / 2)
    } else {
        format!("{two_j}/2")
    }
}

/// All named bounds, in a fixed order.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let mut out = Vec::new();

    let nine = spin1_nine_set();
    let six = spin1_six_set();
    out.push(entry("spin1.H", &nine, measure("H"), "6 ln 2", 6.0 * LN_2));
    out.push(entry("spin1.u_half", &nine, measure("u_half"), "3 + 6 sqrt2", 3.0 + 6.0 * r2));
    out.push(entry("spin1.u2", &nine, measure("u2"), "6", 6.0));
    let mut umax = entry("spin1.u_max", &nine, measure("u_max"), "6.51702", 6.51702);
    umax.gate = ROUNDED_GATE;
    out.push(umax);
    out.push(entry("spin1.std9", &nine, Objective::StdDev { squared: false }, "4", 4.0));
    out.push(entry("spin1.std6", &six, Objective::StdDev { squared: false }, "1 + 2 sqrt2", 1.0 + 2.0 * r2));
    out.push(entry("spin1.var9", &nine, Objective::StdDev { squared: true }, "10/3", 10.0 / 3.0));
    out.push(entry("spin1.var6", &six, Objective::StdDev { squared: true }, "8/3", 8.0 / 3.0));

    for two_j in 1..=4 {
        let ops = spin_operators(two_j).expect("small spin");
        let j = two_j as f64 / 2.0;
        let p = format!("spin_j={}", spin_label(two_j));
        out.push(entry(format!("{p}.H"), &ops, measure("H"), "2 ln 2", 2.0 * LN_2));
        out.push(entry(format!("{p}.H2"), &ops, measure("H2"), "3 ln(3/2)", 3.0 * (1.5f64).ln()));
        out.push(entry(format!("{p}.u_half"), &ops, measure("u_half"), "1 + 2 sqrt2", 1.0 + 2.0 * r2));
        out.push(entry(format!("{p}.u2"), &ops, measure("u2"), "2", 2.0));
        out.push(entry(format!("{p}.u_max"), &ops, measure("u_max"), "(3 + sqrt3)/2", (3.0 + r3) / 2.0));
        out.push(entry(format!("{p}.var"), &ops, Objective::StdDev { squared: true }, "j", j));
    }

    // two +-1 observables whose axes satisfy a.b = 2 eps - 1
    let eps: f64 = 0.75;
    let pair = qubit_two_axes(2.0 * eps - 1.0).expect("valid angle");
    let p = "qubit.eps=3/4";
    out.push(entry(
        format!("{p}.std"),
        &pair,
        Objective::StdDev { squared: false },
        "sqrt(1 - (2 eps - 1)^2)",
        (1.0 - (2.0 * eps - 1.0).powi(2)).sqrt(),
    ));
    out.push(entry(
        format!("{p}.H"),
        &pair,
        measure("H"),
        "2 h((1 + sqrt eps)/2)",
        2.0 * binary_entropy((1.0 + eps.sqrt()) / 2.0),
    ));
    out.push(entry(
        format!("{p}.u_half"),
        &pair,
        measure("u_half"),
        "1 + sqrt eps + sqrt(1 - eps)",
        1.0 + eps.sqrt() + (1.0 - eps).sqrt(),
    ));
    out.push(entry(format!("{p}.u2"), &pair, measure("u2"), "max(2 - eps, 1 + eps)", (2.0 - eps).max(1.0 + eps)));
    out.push(entry(
        format!("{p}.u_max"),
        &pair,
        measure("u_max"),
        "max(1 + sqrt(1 - eps), 1 + sqrt eps)",
        (1.0 + (1.0 - eps).sqrt()).max(1.0 + eps.sqrt()),
    ));

    let sic = sic_qubit(SicVariant::Gram);
    let axes = crate::operators::qubit_axes_set(&sic.bloch).expect("unit axes");
    out.push(entry("sic.std", &axes, Objective::StdDev { squared: false }, "2 sqrt2", 2.0 * r2));
    out.push(entry("sic.entropy", &sic.set, measure("shannon"), "ln 3", 3f64.ln()));
    out.push(entry("sic.u_half", &sic.set, measure("power:0.5"), "sqrt3", r3));
    out.push(entry("sic.purity", &sic.set, measure("power:2"), "1/3", 1.0 / 3.0));
    out.push(entry("sic.var", &axes, Objective::StdDev { squared: true }, "8/3", 8.0 / 3.0));

    let mub3 = mub_family(3).expect("prime").projector_set().expect("projectors");
    out.push(entry("mub3.quadratic", &mub3, Objective::MubQuadratic, "2", 2.0));
    out
}

pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    catalog_entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownBound(name.to_string()))
}

pub fn run_entry(entry: &CatalogEntry, config: &OptimizerConfig) -> Result<BoundResult> {
    let mut r = result_for(entry.name.clone(), &entry.ops, entry.objective, config)?;
    r.reference_value = Some(entry.reference_value);
    r.reference_expr = Some(entry.reference_expr.clone());
    r.deviation = Some((r.value - entry.reference_value).abs());
    r.gate = Some(entry.gate);
    Ok(r)
}

/// Runs every named bound.
pub fn catalog(config: &OptimizerConfig) -> Result<Vec<BoundResult>> {
    catalog_entries().iter().map(|e| run_entry(e, config)).collect()
}

/// Distinct optimal states of a named bound.
pub fn minimizer_witnesses(name: &str, config: &OptimizerConfig) -> Result<Vec<PureStateAngles>> {
    let e = catalog_entry(name)?;
    witnesses(&e.ops, e.objective, config)
}
