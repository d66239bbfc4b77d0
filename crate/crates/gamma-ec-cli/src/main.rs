//! `gamma-ec`: runs one job file and writes JSON or CSV results.
//!
//! Exit status 0 on success, 2 when the job or flags fail validation, 3 when
//! a solver fails; on 2 and 3 a diagnostic JSON object is still written.

mod job;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gamma_ec::contour::{build_box, winding_number, Contour};
use gamma_ec::exp_rouche::{solve_exp_equation_with, ExpOptions, ExpZero};
use gamma_ec::gamma::{alpha, gamma, verify_gamma_algebraic_identity, verify_identities};
use gamma_ec::level_curves::{CurveKind, LevelCurve, Terminus, Tracer, DEFAULT_TRACE_TOL};
use gamma_ec::solver_1d::{certify_with_restarts, enumerate_zeros_with, solve_plane_curve_with, CertifiedZero, SolverOptions};
use gamma_ec::solver_nd::{periodic_points_with, real_fixed_point, solve_system, SystemOptions, SystemSpec};
use gamma_ec::algebraic::PolydiskDomain;
use gamma_ec::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use job::{check_tol, ValidationError};
use output::{to_csv, to_json, Cell, Table};

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "gamma-ec", version, about = "Certified solutions of Gamma(z) = A(z) and related equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job file (JSON, "schema": 1).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Result file; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long = "tol-root", global = true)]
    tol_root: Option<f64>,
    #[arg(long = "tol-trace", global = true)]
    tol_trace: Option<f64>,
    /// Overrides the seed in the job file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, env = "GAMMA_EC_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Zeros of Gamma(z) - A(z) (or p(z, Gamma(z))) in a ball.
    Solve1d,
    /// Solutions of Gamma(z_i) = A_i(z_1, ..., z_n).
    Solvend,
    /// Zeros of exp(z) - A(z).
    SolveExp,
    /// Curve |Gamma(z)| = r in the upper half plane.
    TraceModulus,
    /// Curve arg Gamma(z) = theta through a start point.
    TraceArgument,
    /// Argument-principle count in a box, or family counts in balls.
    CountZeros,
    /// Points of exact period n of Gamma.
    PeriodicPoints,
    /// Residuals of the Gamma identities at random points.
    VerifyIdentities,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve1d => "solve1d",
            Command::Solvend => "solvend",
            Command::SolveExp => "solve-exp",
            Command::TraceModulus => "trace-modulus",
            Command::TraceArgument => "trace-argument",
            Command::CountZeros => "count-zeros",
            Command::PeriodicPoints => "periodic-points",
            Command::VerifyIdentities => "verify-identities",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Validation(String),
    Solver(Error),
}

impl From<ValidationError> for Failure {
    fn from(e: ValidationError) -> Self {
        Failure::Validation(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Invalid(_) => Failure::Validation(e.to_string()),
            other => Failure::Solver(other),
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Pole(_) => "pole",
        Error::Domain(_) => "domain",
        Error::BranchPoint(_) => "branch_point",
        Error::DegenerateDirection => "degenerate_direction",
        Error::NoRadiusFound(_) => "no_radius_found",
        Error::TraceDivergence { .. } => "trace_divergence",
        Error::Geometry(_) => "geometry",
        Error::ZeroOnContour(_) => "zero_on_contour",
        Error::NonConvergence(_) => "non_convergence",
        Error::NoCrossing(_) => "no_crossing",
        Error::SeparationFailure { .. } => "separation_failure",
        Error::NewtonDivergence(_) => "newton_divergence",
        Error::SelectionFailure { .. } => "selection_failure",
        Error::Parse { .. } => "parse",
        Error::Invalid(_) => "invalid",
    }
}

/// Run-wide settings after merging flags and the job file.
struct Settings {
    seed: u64,
    root_tol: Option<f64>,
    trace_tol: Option<f64>,
}

impl Settings {
    fn new(cli: &Cli, seed: Option<u64>, tols: job::Tolerances) -> Result<Self, ValidationError> {
        let root_tol = cli.tol_root.or(tols.root).map(|v| check_tol("root", v)).transpose()?;
        let trace_tol = cli.tol_trace.or(tols.trace).map(|v| check_tol("trace", v)).transpose()?;
        Ok(Settings {
            seed: cli.seed.or(seed).unwrap_or(DEFAULT_SEED),
            root_tol,
            trace_tol,
        })
    }

    fn solver_1d(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            seed: self.seed,
            root_tol: self.root_tol.unwrap_or(d.root_tol),
            trace_tol: self.trace_tol.unwrap_or(d.trace_tol),
            ..d
        }
    }

    fn system(&self) -> SystemOptions {
        let d = SystemOptions::default();
        SystemOptions {
            seed: self.seed,
            root_tol: self.root_tol.unwrap_or(d.root_tol),
            ..d
        }
    }
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

struct Report {
    json: Value,
    table: Table,
}

fn c2(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn region_json(c: &Contour) -> Value {
    Value::Array(c.vertices().into_iter().map(c2).collect())
}

fn zero_json(z: &CertifiedZero) -> Value {
    json!({
        "root": c2(z.root),
        "residual": z.residual,
        "winding": z.winding,
        "winding_dense": z.winding_dense,
        "xi": c2(z.xi),
        "beta": c2(z.beta),
        "beta_star": c2(z.beta_star),
        "big_r": z.big_r,
        "margins": serde_json::to_value(z.margins).expect("plain data"),
        "mirrored": z.mirrored,
        "region_bbox": z.region.bbox(),
        "region": region_json(&z.region),
    })
}

fn exp_zero_json(z: &ExpZero) -> Value {
    json!({
        "root": c2(z.root),
        "residual": z.residual,
        "winding": z.winding,
        "winding_frozen": z.winding_frozen,
        "xi": c2(z.state.xi),
        "beta": c2(z.state.beta),
        "checks": serde_json::to_value(z.checks).expect("plain data"),
        "region_bbox": z.region.bbox(),
        "region": region_json(&z.region),
    })
}

fn zero_rows(items: impl Iterator<Item = (Complex64, f64, i64, Complex64, Complex64)>) -> Vec<Vec<Cell>> {
    items
        .map(|(root, res, w, xi, beta)| {
            vec![
                Cell::F(root.re),
                Cell::F(root.im),
                Cell::F(res),
                Cell::I(w),
                Cell::F(xi.re),
                Cell::F(xi.im),
                Cell::F(beta.re),
                Cell::F(beta.im),
            ]
        })
        .collect()
}

const ZERO_HEADER: [&str; 8] = ["root_re", "root_im", "residual", "winding", "xi_re", "xi_im", "beta_re", "beta_im"];

fn run_solve1d(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::Solve1d = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    let opts = s.solver_1d();
    if !(job.ball > 0.0) || !(job.epsilon > 0.0) {
        return Err(Failure::Validation("ball and epsilon must be positive".into()));
    }
    let (zeros, extra) = match (&job.a, &job.plane_curve) {
        (Some(a), None) => {
            let a = a.build(1)?;
            match job.xi {
                Some(xi) => (vec![certify_with_restarts(&a, xi.value(), &opts)?], json!({})),
                None => {
                    let fam = enumerate_zeros_with(&a, job.ball, job.epsilon, &opts)?;
                    let extra = json!({"b": c2(fam.b), "offset": fam.offset(), "mirrored": fam.mirrored});
                    (fam.zeros, extra)
                }
            }
        }
        (None, Some(p)) => {
            if job.xi.is_some() {
                return Err(Failure::Validation("xi applies only together with a".into()));
            }
            (solve_plane_curve_with(&p.build()?, job.ball, job.epsilon, &opts)?, json!({}))
        }
        _ => return Err(Failure::Validation("give exactly one of a and plane_curve".into())),
    };
    let mut out = json!({
        "schema": job::SCHEMA,
        "command": "solve1d",
        "status": "ok",
        "seed": s.seed,
        "count": zeros.len(),
        "count_in_ball": zeros.iter().filter(|z| z.root.norm() <= job.ball).count(),
        "zeros": zeros.iter().map(zero_json).collect::<Vec<_>>(),
    });
    if let Value::Object(m) = extra {
        out.as_object_mut().unwrap().extend(m);
    }
    Ok(Report {
        json: out,
        table: Table {
            comment: format!("command=solve1d schema=1 count={}", zeros.len()),
            header: strings(&ZERO_HEADER),
            rows: zero_rows(zeros.iter().map(|z| (z.root, z.residual, z.winding, z.xi, z.beta))),
        },
    })
}

fn run_solve_exp(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::SolveExp = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    if job.count == 0 {
        return Err(Failure::Validation("count must be positive".into()));
    }
    let a = job.a.build(1)?;
    let d = ExpOptions::default();
    let opts = ExpOptions {
        seed: s.seed,
        root_tol: s.root_tol.unwrap_or(d.root_tol),
        ..d
    };
    let zeros = solve_exp_equation_with(&a, job.count, &opts)?;
    Ok(Report {
        json: json!({
            "schema": job::SCHEMA,
            "command": "solve-exp",
            "status": "ok",
            "seed": s.seed,
            "count": zeros.len(),
            "zeros": zeros.iter().map(exp_zero_json).collect::<Vec<_>>(),
        }),
        table: Table {
            comment: format!("command=solve-exp schema=1 count={}", zeros.len()),
            header: strings(&ZERO_HEADER),
            rows: zero_rows(zeros.iter().map(|z| (z.root, z.residual, z.winding, z.state.xi, z.state.beta))),
        },
    })
}

fn run_solvend(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::SolveNd = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    let n = job.functions.len();
    if n == 0 || job.count == 0 {
        return Err(Failure::Validation("need at least one function and a positive count".into()));
    }
    let domain = match &job.domain {
        Some(d) => d.build()?,
        None => PolydiskDomain::quadrant(n),
    };
    let refs: Vec<&str> = job.functions.iter().map(String::as_str).collect();
    let spec = SystemSpec::parse(&refs, domain, s.seed)?;
    let d = s.system();
    let opts = SystemOptions {
        count: job.count,
        max_modulus: job.max_modulus.unwrap_or(d.max_modulus),
        samples_per_factor: job.samples_per_factor.unwrap_or(d.samples_per_factor),
        ..d
    };
    let sols = solve_system(&spec, &opts)?;
    let mut rows = Vec::new();
    for (k, sol) in sols.solutions.iter().enumerate() {
        for (i, z) in sol.z.iter().enumerate() {
            rows.push(vec![
                Cell::I(k as i64),
                Cell::I(i as i64 + 1),
                Cell::F(z.re),
                Cell::F(z.im),
                Cell::F(sol.residual),
                Cell::F(sol.oracle_residual),
                Cell::F(sol.margin),
            ]);
        }
    }
    Ok(Report {
        json: json!({
            "schema": job::SCHEMA,
            "command": "solvend",
            "status": "ok",
            "seed": s.seed,
            "count": sols.solutions.len(),
            "certification_level": sols.certification_level,
            "rejected_regions": sols.rejected_regions,
            "solutions": serde_json::to_value(&sols.solutions).expect("plain data"),
        }),
        table: Table {
            comment: format!("command=solvend schema=1 count={} certification_level={}", sols.solutions.len(), sols.certification_level),
            header: strings(&["solution", "coordinate", "re", "im", "residual", "oracle_residual", "margin"]),
            rows,
        },
    })
}

fn curve_report(command: &str, curve: &LevelCurve) -> Report {
    let (kind, key, value) = match curve.kind {
        CurveKind::ConstantModulus { r } => ("constant_modulus", "r", r),
        CurveKind::ConstantArgument { theta } => ("constant_argument", "theta", theta),
    };
    let terminus = match curve.terminus {
        Terminus::RealAxis => "real_axis",
        Terminus::AlphaLine => "alpha_line",
    };
    let rows = curve
        .points
        .iter()
        .zip(&curve.log_values)
        .map(|(z, l)| vec![Cell::F(z.re), Cell::F(z.im), Cell::F(l.re), Cell::F(l.im)])
        .collect();
    let mut j = json!({
        "schema": job::SCHEMA,
        "command": command,
        "status": "ok",
        "kind": kind,
        "tol": curve.tol,
        "terminus": terminus,
        "points": curve.points.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
        "log_values": curve.log_values.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
    });
    j.as_object_mut().unwrap().insert(key.into(), json!(value));
    Report {
        json: j,
        table: Table {
            comment: format!(
                "kind={kind} {key}={} tol={} terminus={terminus}",
                output::fmt_f64(value),
                output::fmt_f64(curve.tol)
            ),
            header: strings(&["re", "im", "log_re", "log_im"]),
            rows,
        },
    }
}

fn tracer(s: &Settings) -> Tracer {
    Tracer::with_tol(s.trace_tol.unwrap_or(DEFAULT_TRACE_TOL))
}

fn run_trace_modulus(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::TraceModulus = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    if !(job.r > 0.0) || !job.x_end.is_finite() {
        return Err(Failure::Validation("r must be positive and x_end finite".into()));
    }
    let curve = tracer(&s).trace_modulus_curve(job.r, job.x_end)?;
    Ok(curve_report("trace-modulus", &curve))
}

fn run_trace_argument(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::TraceArgument = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    if !job.theta.is_finite() || !job.x_end.is_finite() {
        return Err(Failure::Validation("theta and x_end must be finite".into()));
    }
    let curve = tracer(&s).trace_argument_curve(job.theta, job.start.value(), job.x_end)?;
    Ok(curve_report("trace-argument", &curve))
}

fn run_count_zeros(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::CountZeros = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    let a = job.a.build(1)?;
    match (job.lower_left, job.upper_right, &job.radii) {
        (Some(ll), Some(ur), None) => {
            let rect = build_box(ll.value(), ur.value()).map_err(|e| Failure::Validation(e.to_string()))?;
            let w = winding_number(|z| Ok(gamma(z)?.value - a.evaluate1(z)?), &rect)?;
            Ok(Report {
                json: json!({
                    "schema": job::SCHEMA,
                    "command": "count-zeros",
                    "status": "ok",
                    "lower_left": c2(ll.value()),
                    "upper_right": c2(ur.value()),
                    "count": w.winding,
                    "min_image_modulus": w.min_image_modulus,
                    "samples_used": w.samples_used,
                }),
                table: Table {
                    comment: "command=count-zeros schema=1 mode=box".into(),
                    header: strings(&["count", "min_image_modulus", "samples_used"]),
                    rows: vec![vec![Cell::I(w.winding), Cell::F(w.min_image_modulus), Cell::I(w.samples_used as i64)]],
                },
            })
        }
        (None, None, Some(radii)) => {
            if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || !(job.epsilon > 0.0) {
                return Err(Failure::Validation("radii must be positive and non-empty, epsilon positive".into()));
            }
            let top = radii.iter().cloned().fold(0.0, f64::max);
            let fam = enumerate_zeros_with(&a, top, job.epsilon, &s.solver_1d())?;
            let c = fam.offset();
            let counts: Vec<Value> = radii
                .iter()
                .map(|&r| json!({"radius": r, "count": fam.count_in_ball(r), "bound": 2.0 * r / 3.0 - c}))
                .collect();
            let rows = radii
                .iter()
                .map(|&r| vec![Cell::F(r), Cell::I(fam.count_in_ball(r) as i64), Cell::F(2.0 * r / 3.0 - c)])
                .collect();
            Ok(Report {
                json: json!({
                    "schema": job::SCHEMA,
                    "command": "count-zeros",
                    "status": "ok",
                    "b": c2(fam.b),
                    "offset": c,
                    "spacing_violations": fam.spacing_violations(),
                    "counts": counts,
                }),
                table: Table {
                    comment: format!("command=count-zeros schema=1 mode=balls offset={}", output::fmt_f64(c)),
                    header: strings(&["radius", "count", "bound"]),
                    rows,
                },
            })
        }
        _ => Err(Failure::Validation("give either lower_left and upper_right, or radii".into())),
    }
}

fn run_periodic(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::PeriodicPoints = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    if job.period == 0 || job.count == 0 {
        return Err(Failure::Validation("period and count must be positive".into()));
    }
    let opts = SystemOptions {
        count: job.count,
        ..s.system()
    };
    let points = periodic_points_with(job.period, &opts)?;
    let mut rows = Vec::new();
    for (k, p) in points.iter().enumerate() {
        for (i, z) in p.orbit.iter().enumerate() {
            rows.push(vec![Cell::I(k as i64), Cell::I(i as i64), Cell::F(z.re), Cell::F(z.im), Cell::F(p.residual), Cell::F(p.minimality)]);
        }
    }
    let mut j = json!({
        "schema": job::SCHEMA,
        "command": "periodic-points",
        "status": "ok",
        "seed": s.seed,
        "period": job.period,
        "count": points.len(),
        "points": serde_json::to_value(&points).expect("plain data"),
    });
    if job.period == 1 {
        j.as_object_mut().unwrap().insert("real_fixed_point".into(), json!(real_fixed_point()?));
    }
    Ok(Report {
        json: j,
        table: Table {
            comment: format!("command=periodic-points schema=1 period={} count={}", job.period, points.len()),
            header: strings(&["point", "orbit_index", "re", "im", "residual", "minimality"]),
            rows,
        },
    })
}

fn run_verify(cli: &Cli, text: &str) -> Result<Report, Failure> {
    let job: job::VerifyIdentities = job::parse(text)?;
    let s = Settings::new(cli, job.seed, job.tolerances)?;
    let a0 = alpha();
    if !(job.radius > a0) || job.points == 0 {
        return Err(Failure::Validation(format!("radius must exceed {a0} and points be positive")));
    }
    if job.multiplication.iter().any(|&n| n < 2) {
        return Err(Failure::Validation("multiplication orders start at 2".into()));
    }
    // Uniform on the part of the disc of the given radius with Re >= alpha, Im >= 0.
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut pts = Vec::with_capacity(job.points);
    while pts.len() < job.points {
        let z = Complex64::new(rng.gen_range(a0..job.radius), rng.gen_range(0.0..job.radius));
        if z.norm() <= job.radius {
            pts.push(z);
        }
    }
    let orders = job.multiplication.clone();
    let per_point: Vec<(f64, Option<f64>, Vec<f64>)> = pts
        .par_iter()
        .map(|&z| {
            let base = verify_identities(z, 1)?;
            let mult = orders
                .iter()
                .map(|&n| verify_identities(z, n).map(|r| r.multiplication))
                .collect::<gamma_ec::Result<Vec<_>>>()?;
            Ok((base.recurrence, base.reflection, mult))
        })
        .collect::<gamma_ec::Result<_>>()?;
    let max_rec = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    let max_refl = per_point.iter().filter_map(|p| p.1).fold(0.0, f64::max);
    let max_mult: Vec<f64> = (0..orders.len()).map(|k| per_point.iter().map(|p| p.2[k]).fold(0.0, f64::max)).collect();
    let algebraic = verify_gamma_algebraic_identity();
    let overall = max_mult.iter().cloned().fold(max_rec.max(max_refl), f64::max);
    let mut header: Vec<String> = ["re", "im", "recurrence", "reflection"].map(String::from).to_vec();
    header.extend(orders.iter().map(|n| format!("multiplication_{n}")));
    let rows = pts
        .iter()
        .zip(&per_point)
        .map(|(z, p)| {
            let mut row = vec![Cell::F(z.re), Cell::F(z.im), Cell::F(p.0), p.1.map(Cell::F).unwrap_or(Cell::S(String::new()))];
            row.extend(p.2.iter().map(|v| Cell::F(*v)));
            row
        })
        .collect();
    Ok(Report {
        json: json!({
            "schema": job::SCHEMA,
            "command": "verify-identities",
            "status": "ok",
            "seed": s.seed,
            "points": job.points,
            "radius": job.radius,
            "max_residual": overall,
            "max": {
                "recurrence": max_rec,
                "reflection": max_refl,
                "multiplication": orders.iter().zip(&max_mult).map(|(n, v)| json!({"n": n, "residual": v})).collect::<Vec<_>>(),
            },
            "algebraic_identity": algebraic,
        }),
        table: Table {
            comment: format!("command=verify-identities schema=1 seed={} algebraic_identity={}", s.seed, output::fmt_f64(algebraic)),
            header,
            rows,
        },
    })
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Validation("--threads must be positive".into()));
        }
        // Fails only when a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = match &cli.input {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?,
        None => return Err(Failure::Validation("--input is required".into())),
    };
    match cli.command {
        Command::Solve1d => run_solve1d(cli, &text),
        Command::Solvend => run_solvend(cli, &text),
        Command::SolveExp => run_solve_exp(cli, &text),
        Command::TraceModulus => run_trace_modulus(cli, &text),
        Command::TraceArgument => run_trace_argument(cli, &text),
        Command::CountZeros => run_count_zeros(cli, &text),
        Command::PeriodicPoints => run_periodic(cli, &text),
        Command::VerifyIdentities => run_verify(cli, &text),
    }
}

fn emit(cli: &Cli, bytes: &[u8]) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let (bytes, code) = match run(&cli) {
        Ok(report) => {
            let bytes = match cli.format {
                Format::Json => to_json(&report.json),
                Format::Csv => to_csv(&report.table),
            };
            (bytes, 0)
        }
        Err(failure) => {
            let (code, kind, message) = match &failure {
                Failure::Validation(msg) => (2u8, "validation", msg.clone()),
                Failure::Solver(e) => (3u8, error_kind(e), e.to_string()),
            };
            eprintln!("gamma-ec {}: {message}", cli.command.name());
            let diag = json!({
                "schema": job::SCHEMA,
                "command": cli.command.name(),
                "status": "error",
                "exit_code": code,
                "error": {"kind": kind, "message": message},
            });
            (to_json(&diag), code)
        }
    };
    if let Err(e) = emit(&cli, &bytes) {
        eprintln!("gamma-ec: cannot write output: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
