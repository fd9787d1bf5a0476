//! Command-line front end.
//!
//! Exit codes: 0 for success or a positive verdict, 1 for a negative verdict
//! or a failed gate, 2 for unusable input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constraints::{explicit_s234, moments_of_matrix, validate_state, weyl_expectations, weyl_tr2, weyl_tr3, DEFAULT_TOL};
use crate::error::Error;
use crate::geometry::{
    boundary_sample, gram_region, measure_region_grid_with, two_projector_region, MembershipOracle,
    DEFAULT_MEMBERSHIP_TOL, DEFAULT_PROBES, DEFAULT_RESOLUTION,
};
use crate::linalg::{random_state, ComplexMatrix, C64};
use crate::measures::MeasureSpec;
use crate::operators::{
    axes_from_dots, fig1_set, mub_family, qubit_axes_set, sic_qubit, spin1_nine_set, spin1_six_set,
    spin_operators, weyl_set, OperatorSet, SicVariant,
};
use crate::optimizer::{catalog_entries, catalog_entry, run_entry, BoundResult, OptimizerConfig};
use crate::states::DensityState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qbound", version, about = "Quantum constraints, allowed regions and tight uncertainty bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true, env = "QBOUND_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check Hermiticity, unit trace and positivity of a density matrix.
    ValidateState {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Moments, Newton terms and the explicit low-order constraints.
    Qc {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Decide whether a vector of expectation values is attainable.
    Membership {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_MEMBERSHIP_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_PROBES)]
        probes: usize,
    },
    /// Compute the named tight bounds and compare with reference values.
    Catalog {
        /// Restrict to these names; repeatable.
        #[arg(long)]
        only: Vec<String>,
        /// Also list every distinct optimal state.
        #[arg(long)]
        witnesses: bool,
        /// Print the names and exit.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Export boundary samples and a measure-region grid as CSV.
    Region {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 720)]
        directions: usize,
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        /// Measure for the grid, e.g. H, u_half, u2, u_max, std.
        #[arg(long)]
        measure: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        bound: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MEMBERSHIP_TOL)]
        tol: f64,
    },
    /// Mutually unbiased bases for a prime dimension.
    Mub {
        #[arg(long)]
        dim: usize,
        /// Density matrix for the quadratic sum; random when omitted.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Print an operator set as JSON, readable back through `file:PATH`.
    DumpSet {
        #[command(flatten)]
        set: SetArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SetArgs {
    /// fig1, spin, spin1-nine, spin1-six, sic, qubit-axes, weyl, mub or file:PATH.
    #[arg(long = "set")]
    pub selector: String,
    #[arg(long)]
    pub two_j: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// a.b, a.c, b.c for qubit-axes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub dots: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), writes the report to `out` and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::ValidateState { file, tol } => cmd_validate_state(file, *tol, cli.format, out),
        Command::Qc { file, tol } => cmd_qc(file, *tol, cli.format, out),
        Command::Membership {
            set,
            point,
            tol,
            probes,
        } => cmd_membership(set, point, *tol, *probes, out),
        Command::Catalog {
            only,
            witnesses,
            list,
            opt,
        } => {
            if *list {
                for e in catalog_entries() {
                    writeln!(out, "{}", e.name).map_err(io)?;
                }
                return Ok(EXIT_OK);
            }
            cmd_catalog(only, *witnesses, opt, cli.seed, cli.format, out)
        }
        Command::Region {
            set,
            directions,
            boundary,
            grid,
            resolution,
            measure,
            bound,
            tol,
        } => cmd_region(
            set,
            &RegionOptions {
                directions: *directions,
                boundary: boundary.as_deref(),
                grid: grid.as_deref(),
                resolution: *resolution,
                measure: measure.as_deref(),
                bound: *bound,
                tol: *tol,
                seed: cli.seed,
            },
            out,
        ),
        Command::Mub { dim, state } => cmd_mub(*dim, state.as_deref(), cli.seed, cli.format, out),
        Command::DumpSet { set } => {
            let ops = resolve_set(set)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&SetFile::from_set(&ops)).expect("serializable")).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// 12 significant digits, scientific for very small or large magnitudes.
pub fn fmt12(x: f64) -> String {
    let r = sig12(x);
    if r != 0.0 && r.is_finite() && !(1e-4..1e12).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(sig12(x))
    } else {
        Value::Null
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn print_json(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable")).map_err(io)
}

fn print_kv(out: &mut dyn Write, rows: &[(String, String)]) -> CliResult<()> {
    writeln!(out, "key,value").map_err(io)?;
    for (k, v) in rows {
        writeln!(out, "{k},{v}").map_err(io)?;
    }
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
struct MatrixFile {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.display().to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Reads a JSON matrix `{dim, entries: [[re, im], ...]}` (row-major) or a
/// real CSV matrix.
pub fn read_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        parse_json_matrix(path, &text)
    } else {
        parse_csv_matrix(path, &text)
    }
}

fn parse_json_matrix(path: &Path, text: &str) -> CliResult<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| parse_error(path, e.line(), e.column(), e.to_string()))?;
    if file.dim == 0 || file.entries.len() != file.dim * file.dim {
        return Err(parse_error(
            path,
            1,
            1,
            format!("dim {} needs {} entries, found {}", file.dim, file.dim * file.dim, file.entries.len()),
        ));
    }
    let entries = file.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    ComplexMatrix::from_entries(entries).map_err(CliError::from)
}

fn parse_csv_matrix(path: &Path, text: &str) -> CliResult<ComplexMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        let mut col = 1;
        for field in line.split(',') {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_error(path, ln + 1, col, format!("not a number: '{}'", field.trim())))?;
            row.push(value);
            col += field.chars().count() + 1;
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    path,
                    ln + 1,
                    1,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows.len() != rows[0].len() {
        let n = rows.first().map_or(0, Vec::len);
        return Err(parse_error(path, rows.len().max(1), 1, format!("matrix is not square ({} x {n})", rows.len())));
    }
    ComplexMatrix::from_real_rows(&rows).map_err(CliError::from)
}

#[derive(Debug, Deserialize, Serialize)]
struct SetMember {
    label: String,
    entries: Vec<[f64; 2]>,
}

/// Serialized operator set; floats keep full precision so a reload is exact.
#[derive(Debug, Deserialize, Serialize)]
struct SetFile {
    name: String,
    dim: usize,
    operators: Vec<SetMember>,
}

impl SetFile {
    fn from_set(ops: &OperatorSet) -> Self {
        Self {
            name: ops.name().to_string(),
            dim: ops.dim(),
            operators: ops
                .labels()
                .iter()
                .zip(ops.operators())
                .map(|(l, m)| SetMember {
                    label: l.clone(),
                    entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}

fn read_set(path: &Path) -> CliResult<OperatorSet> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: SetFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.column(), e.to_string()))?;
    let mut members = Vec::with_capacity(file.operators.len());
    for m in file.operators {
        if m.entries.len() != file.dim * file.dim {
            return Err(parse_error(path, 1, 1, format!("operator {} has {} entries", m.label, m.entries.len())));
        }
        let entries = m.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        members.push((m.label, ComplexMatrix::from_entries(entries)?));
    }
    Ok(OperatorSet::new(file.name, members)?)
}

fn need<T: Copy>(v: Option<T>, flag: &str, sel: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("--set {sel} needs --{flag}")))
}

/// Resolves a named selector to an operator set.
pub fn resolve_set(args: &SetArgs) -> CliResult<OperatorSet> {
    let sel = args.selector.as_str();
    if let Some(path) = sel.strip_prefix("file:") {
        return read_set(Path::new(path));
    }
    Ok(match sel {
        "fig1" => fig1_set(),
        "spin" => spin_operators(need(args.two_j, "two-j", sel)?)?,
        "spin1-nine" => spin1_nine_set(),
        "spin1-six" => spin1_six_set(),
        "sic" => sic_qubit(SicVariant::Gram).set,
        "qubit-axes" => {
            let [dab, dac, dbc] = dots(args)?;
            qubit_axes_set(&axes_from_dots(dab, dac, dbc)?)?
        }
        "weyl" => weyl_set(need(args.dim, "dim", sel)?)?,
        "mub" => mub_family(need(args.dim, "dim", sel)?)?.projector_set()?,
        _ => return Err(CliError::Usage(format!("unknown operator set '{sel}'"))),
    })
}

fn dots(args: &SetArgs) -> CliResult<[f64; 3]> {
    <[f64; 3]>::try_from(args.dots.as_slice())
        .map_err(|_| CliError::Usage("--set qubit-axes needs --dots dab,dac,dbc".into()))
}

fn cmd_validate_state(file: &Path, tol: f64, format: Format, out: &mut dyn Write) -> CliResult<i32> {
    let m = read_matrix(file)?;
    let report = validate_state(&DensityState::new(m)?, tol);
    let verdict = if report.is_valid() { "valid" } else { "invalid" };
    match format {
        Format::Json => print_json(
            out,
            &json!({
                "dim": report.s_values.len(),
                "verdict": verdict,
                "hermiticity_residual": num(report.hermiticity_residual),
                "trace": num(report.trace),
                "s": nums(&report.s_values),
                "tolerance": report.tolerance,
                "violation": report.violation,
            }),
        )?,
        Format::Csv => {
            let mut rows = vec![
                ("verdict".to_string(), verdict.to_string()),
                ("hermiticity_residual".into(), format!("{:e}", sig12(report.hermiticity_residual))),
                ("trace".into(), fmt12(report.trace)),
            ];
            for (n, s) in report.s_values.iter().enumerate() {
                rows.push((format!("S_{}", n + 1), fmt12(*s)));
            }
            print_kv(out, &rows)?;
        }
    }
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_qc(file: &Path, tol: f64, format: Format, out: &mut dyn Write) -> CliResult<i32> {
    let m = read_matrix(file)?;
    let report = validate_state(&DensityState::new(m.clone())?, tol);
    let herm = m.hermitian_part();
    let moments = moments_of_matrix(&herm)?;
    let explicit = if m.dim() >= 2 { Some(explicit_s234(&moments)?) } else { None };
    let weyl = weyl_expectations(&herm);
    let tr2 = weyl_tr2(&weyl, m.dim())?;
    let tr3 = weyl_tr3(&weyl, m.dim())?;
    match format {
        Format::Json => print_json(
            out,
            &json!({
                "dim": m.dim(),
                "moments": nums(&moments.moments),
                "s": nums(&report.s_values),
                "explicit": explicit.map(|e| json!({
                    "s2": num(e.s2),
                    "s3": e.s3.map(num),
                    "s4": e.s4.map(num),
                })),
                "weyl_tr2": num(tr2),
                "weyl_tr3": num(tr3.re),
                "valid": report.is_valid(),
                "violation": report.violation,
            }),
        )?,
        Format::Csv => {
            let mut rows = Vec::new();
            for (k, p) in moments.moments.iter().enumerate() {
                rows.push((format!("tr_rho^{}", k + 1), fmt12(*p)));
            }
            for (n, s) in report.s_values.iter().enumerate() {
                rows.push((format!("S_{}", n + 1), fmt12(*s)));
            }
            rows.push(("weyl_tr2".into(), fmt12(tr2)));
            rows.push(("weyl_tr3".into(), fmt12(tr3.re)));
            rows.push(("valid".into(), report.is_valid().to_string()));
            print_kv(out, &rows)?;
        }
    }
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Closed-form verdict for sets that have one.
fn closed_form(args: &SetArgs, ops: &OperatorSet, point: &[f64], tol: f64) -> CliResult<Option<Value>> {
    Ok(match args.selector.as_str() {
        "fig1" => {
            let p = fig1_set();
            let s = p.operator(0).trace_product(p.operator(1)).re;
            let region = two_projector_region(s, 3)?;
            Some(json!({ "region": "two-projector hull", "inside": region.contains(point[0], point[1], tol) }))
        }
        "qubit-axes" => {
            let [dab, dac, dbc] = dots(args)?;
            let region = gram_region(&axes_from_dots(dab, dac, dbc)?)?;
            Some(json!({
                "region": "gram ellipsoid",
                "quadratic_form": num(region.quadratic_form(point)),
                "inside": region.contains(point, tol),
            }))
        }
        "spin" => {
            let j = (ops.dim() - 1) as f64 / 2.0;
            let r = point.iter().map(|x| x * x).sum::<f64>().sqrt();
            Some(json!({ "region": "ball", "radius": num(j), "norm": num(r), "inside": r <= j + tol }))
        }
        _ => None,
    })
}

fn cmd_membership(args: &SetArgs, point: &[f64], tol: f64, probes: usize, out: &mut dyn Write) -> CliResult<i32> {
    let ops = resolve_set(args)?;
    if point.len() != ops.len() {
        return Err(Error::ArityMismatch {
            expected: ops.len(),
            found: point.len(),
        }
        .into());
    }
    let verdict = MembershipOracle::new(&ops, probes)?.check(point, tol)?;
    let on_boundary = verdict.margin.abs() <= tol;
    print_json(
        out,
        &json!({
            "set": ops.name(),
            "point": nums(point),
            "inside": verdict.inside,
            "boundary": on_boundary,
            "margin": num(verdict.margin),
            "witness_direction": nums(&verdict.witness_direction),
            "closed_form": closed_form(args, &ops, point, tol)?,
        }),
    )?;
    Ok(if verdict.inside { EXIT_OK } else { EXIT_NEGATIVE })
}

fn optimizer_config(opt: &OptimizerArgs, seed: u64, witnesses: bool) -> CliResult<OptimizerConfig> {
    let mut config = OptimizerConfig {
        seed,
        collect_witnesses: witnesses,
        grid_points: opt.grid_points,
        ..OptimizerConfig::default()
    };
    if let Some(r) = opt.restarts {
        config.restarts = r;
    }
    if let Some(i) = opt.iterations {
        config.iterations = i;
    }
    config.validate()?;
    Ok(config)
}

fn result_json(r: &BoundResult) -> Value {
    json!({
        "name": r.name,
        "set": r.set,
        "measure": r.objective.to_string(),
        "direction": r.direction,
        "computed": num(r.value),
        "reference_value": r.reference_value.map(num),
        "expression": r.reference_expr,
        "deviation": r.deviation,
        "gate": r.gate,
        "pass": r.passes(),
        "angles": { "thetas": nums(r.angles.thetas()), "phis": nums(r.angles.phis()) },
        "witness_count": r.witnesses.as_ref().map(Vec::len),
        "witnesses": r.witnesses.as_ref().map(|ws| ws.iter().map(|w| json!({
            "thetas": nums(w.thetas()),
            "phis": nums(w.phis()),
        })).collect::<Vec<_>>()),
    })
}

fn cmd_catalog(
    only: &[String],
    witnesses: bool,
    opt: &OptimizerArgs,
    seed: u64,
    format: Format,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let config = optimizer_config(opt, seed, witnesses)?;
    let entries = if only.is_empty() {
        catalog_entries()
    } else {
        only.iter().map(|n| catalog_entry(n)).collect::<Result<Vec<_>, _>>()?
    };
    let results = entries
        .iter()
        .map(|e| run_entry(e, &config))
        .collect::<Result<Vec<_>, _>>()?;
    match format {
        Format::Json => print_json(out, &Value::Array(results.iter().map(result_json).collect()))?,
        Format::Csv => {
            writeln!(out, "name,computed,reference_value,deviation,witness_count,pass").map_err(io)?;
            for r in &results {
                writeln!(
                    out,
                    "{},{},{},{:.3e},{},{}",
                    r.name,
                    sig12(r.value),
                    r.reference_value.map_or(String::new(), fmt12),
                    r.deviation.unwrap_or(f64::NAN),
                    r.witnesses.as_ref().map_or(String::new(), |w| w.len().to_string()),
                    r.passes()
                )
                .map_err(io)?;
            }
            if witnesses {
                writeln!(out).map_err(io)?;
                writeln!(out, "name,witness,thetas,phis").map_err(io)?;
                for r in &results {
                    for (k, w) in r.witnesses.iter().flatten().enumerate() {
                        let join = |xs: &[f64]| xs.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(" ");
                        writeln!(out, "{},{},{},{}", r.name, k + 1, join(w.thetas()), join(w.phis())).map_err(io)?;
                    }
                }
            }
        }
    }
    Ok(if results.iter().all(BoundResult::passes) {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

struct RegionOptions<'a> {
    directions: usize,
    boundary: Option<&'a Path>,
    grid: Option<&'a Path>,
    resolution: usize,
    measure: Option<&'a str>,
    bound: Option<f64>,
    tol: f64,
    seed: u64,
}

fn cmd_region(args: &SetArgs, o: &RegionOptions, out: &mut dyn Write) -> CliResult<i32> {
    let ops = resolve_set(args)?;
    let n = ops.len();
    if n > 3 {
        return Err(Error::TooManyOperators(n).into());
    }
    let samples = boundary_sample(&ops, o.directions, o.seed)?;
    let mut csv = String::new();
    let head: Vec<String> = (1..=n)
        .map(|i| format!("dir_{i}"))
        .chain((1..=n).map(|i| format!("touch_{i}")))
        .chain(["support".to_string()])
        .collect();
    csv.push_str(&head.join(","));
    csv.push('\n');
    for s in &samples {
        let row: Vec<String> = s
            .direction
            .iter()
            .chain(&s.touch)
            .chain([&s.support])
            .map(|x| fmt12(*x))
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    match o.boundary {
        Some(path) => fs::write(path, &csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None if o.grid.is_none() => out.write_all(csv.as_bytes()).map_err(io)?,
        None => {}
    }
    let mut summary = json!({ "set": ops.name(), "directions": samples.len() });
    if let Some(path) = o.grid {
        let measure = o
            .measure
            .ok_or_else(|| CliError::Usage("--grid needs --measure and --bound".into()))?;
        let bound = o
            .bound
            .ok_or_else(|| CliError::Usage("--grid needs --measure and --bound".into()))?;
        let spec = MeasureSpec::new(measure.parse()?)?;
        let oracle = MembershipOracle::with_defaults(&ops)?;
        let grid = measure_region_grid_with(&oracle, &spec, bound, o.resolution, o.tol)?;
        let axes = ["x", "y", "z"];
        let mut text = axes[..n].join(",");
        text.push_str(",in_E,in_R\n");
        for c in &grid.cells {
            for x in &c.coords {
                text.push_str(&fmt12(*x));
                text.push(',');
            }
            text.push_str(&format!("{},{}\n", c.in_e as u8, c.in_r as u8));
        }
        fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let in_e = grid.cells.iter().filter(|c| c.in_e).count();
        let in_r = grid.cells.iter().filter(|c| c.in_r).count();
        let escaped = grid.cells.iter().filter(|c| c.in_e && !c.in_r).count();
        summary["grid"] = json!({
            "cells": grid.cells.len(),
            "in_E": in_e,
            "in_R": in_r,
            "in_E_not_R": escaped,
        });
    }
    if o.boundary.is_some() || o.grid.is_some() {
        print_json(out, &summary)?;
    }
    Ok(EXIT_OK)
}

fn cmd_mub(dim: usize, state: Option<&Path>, seed: u64, format: Format, out: &mut dyn Write) -> CliResult<i32> {
    let family = mub_family(dim)?;
    let (rho, source) = match state {
        Some(path) => (read_matrix(path)?, path.display().to_string()),
        None => (random_state(dim, dim, seed)?.into_matrix(), format!("random(seed={seed})")),
    };
    let probs = family.probabilities(&rho)?;
    let quadratic = crate::constraints::mub_quadratic(&probs)?;
    let purity = rho.trace_product(&rho).re;
    match format {
        Format::Json => {
            let bases: Vec<Value> = family
                .bases
                .iter()
                .map(|b| {
                    Value::Array(
                        b.iter()
                            .map(|ket| Value::Array(ket.iter().map(|z| json!([sig12(z.re), sig12(z.im)])).collect()))
                            .collect(),
                    )
                })
                .collect();
            print_json(
                out,
                &json!({
                    "dim": dim,
                    "bases": bases,
                    "unbiasedness_deviation": family.unbiasedness_deviation(),
                    "orthonormality_deviation": family.orthonormality_deviation(),
                    "state": source,
                    "quadratic": num(quadratic),
                    "one_plus_purity": num(1.0 + purity),
                }),
            )?;
        }
        Format::Csv => {
            writeln!(out, "basis,vector,component,re,im").map_err(io)?;
            for (b, basis) in family.bases.iter().enumerate() {
                for (j, ket) in basis.iter().enumerate() {
                    for (k, z) in ket.iter().enumerate() {
                        writeln!(out, "{b},{j},{k},{},{}", sig12(z.re), sig12(z.im)).map_err(io)?;
                    }
                }
            }
            writeln!(out).map_err(io)?;
            print_kv(
                out,
                &[
                    ("unbiasedness_deviation".into(), format!("{:e}", family.unbiasedness_deviation())),
                    ("quadratic".into(), fmt12(quadratic)),
                    ("state".into(), source),
                ],
            )?;
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("qbound").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sig12_rounds() {
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(123456789.123456789), 123456789.123);
        assert!(sig12(f64::NAN).is_nan());
    }

    #[test]
    fn csv_parse_errors_carry_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "1,0\n0,x\n").unwrap();
        match read_matrix(&p).unwrap_err() {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (2, 3)),
            e => panic!("{e:?}"),
        }
        fs::write(&p, "1,0,0\n0,1,0\n").unwrap();
        assert!(matches!(read_matrix(&p), Err(CliError::Parse { .. })));
    }

    #[test]
    fn json_parse_errors_carry_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        fs::write(&p, "{\"dim\": 2,\n \"entries\": [[1, 0], [0, 0], [0, 0], oops]}").unwrap();
        match read_matrix(&p).unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e:?}"),
        }
        fs::write(&p, "{\"dim\": 2, \"entries\": [[1, 0]]}").unwrap();
        assert!(matches!(read_matrix(&p), Err(CliError::Parse { .. })));
    }

    #[test]
    fn selectors() {
        let mk = |sel: &str| SetArgs {
            selector: sel.into(),
            two_j: Some(2),
            dim: Some(3),
            dots: vec![0.5, 0.0, 0.0],
        };
        for (sel, n) in [("fig1", 2), ("spin", 3), ("spin1-nine", 9), ("spin1-six", 6), ("sic", 4), ("qubit-axes", 3), ("weyl", 9), ("mub", 12)] {
            assert_eq!(resolve_set(&mk(sel)).unwrap().len(), n, "{sel}");
        }
        assert!(matches!(resolve_set(&mk("nope")), Err(CliError::Usage(_))));
        let mut a = mk("spin");
        a.two_j = None;
        assert!(resolve_set(&a).is_err());
    }

    #[test]
    fn membership_exit_codes() {
        assert_eq!(run_str(&["membership", "--set", "fig1", "--point", "0.8,0.8"]).0, EXIT_NEGATIVE);
        assert_eq!(run_str(&["membership", "--set", "fig1", "--point", "0,0"]).0, EXIT_OK);
        assert_eq!(run_str(&["membership", "--set", "fig1", "--point", "0,0,0"]).0, EXIT_INPUT);
        let (code, out, _) = run_str(&["membership", "--set", "spin", "--two-j", "4", "--point", "0,0,-2"]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["boundary"], true);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
        assert_eq!(run_str(&["mub", "--dim", "6"]).0, EXIT_INPUT);
        assert_eq!(run_str(&["catalog", "--only", "nope"]).0, EXIT_INPUT);
    }
}
