//! The `hofa` command line: argument parsing, dispatch and run reports.
//!
//! Every successful run prints one report
//! `{"schema":"hofa/1","command","inputs","outputs","timings","seed"}` to
//! standard output. Validation failures print a diagnostic to standard
//! error and exit with status 2. Apart from `timings`, reports depend only
//! on the inputs and the seed.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::cube_check_suite;
use crate::decomposition::{
    fourier_truncate_with, matching_pursuit_with, Atom, DecompositionResult,
};
use crate::error::{invalid, HofaError, Result};
use crate::gfunc::GroupFunction;
use crate::gowers::{gowers_u_with, GowersMethod};
use crate::group::FiniteAbelianGroup;
use crate::io::{
    function_from_json, function_to_json, group_to_json, kernel_from_json, parse_group_literal,
    phase_from_json, phase_to_json, read_json, Json,
};
use crate::kernels::{
    ck_membership_report, planted_phase_report_with, reconstruct, spectral_decomposition,
};
use crate::limits::Limits;
use crate::phases::{
    correlation_spectrum, phase_dictionary_with, prime_power_shape, PolynomialPhase,
};

pub const SCHEMA: &str = "hofa/1";
pub const THREADS_ENV: &str = "HOFA_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "hofa",
    version,
    about = "Higher-order Fourier analysis on finite abelian groups"
)]
struct Cli {
    /// Worker threads; HOFA_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on order^(k+1) for cube sums.
    #[arg(long, global = true, value_parser = parse_cap)]
    cube_cap: Option<u128>,
    /// Cap on order^(2k) for the definition path.
    #[arg(long, global = true, value_parser = parse_cap)]
    definition_cap: Option<u128>,
    /// Cap on the number of dictionary phases.
    #[arg(long, global = true, value_parser = parse_cap)]
    dictionary_cap: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gowers norm U_k of a function.
    Norm {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Cube)]
        method: MethodArg,
    },
    /// Correlations with polynomial phases, largest first.
    Spectrum {
        #[arg(long)]
        group: Option<String>,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long)]
        top: Option<usize>,
        /// Also write the character spectrum as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Structured-plus-uniform decomposition.
    Decompose {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = DecomposeArg::Pursuit)]
        method: DecomposeArg,
    },
    /// Kernel spectra, level membership and phase recovery.
    Kernel {
        #[arg(long, value_enum)]
        op: KernelOp,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Cube-group membership and face-action diagnostics.
    CubeCheck {
        #[arg(long)]
        group: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Generate a function file.
    Gen {
        #[arg(long)]
        group: String,
        /// phase, indicator, random-pm1 (or random±1), noisy-phase
        #[arg(long)]
        kind: String,
        /// Univariate coefficients c_0,c_1,.. for phase kinds.
        #[arg(long)]
        coeffs: Option<String>,
        /// Phase JSON file, for phases in several variables.
        #[arg(long)]
        phase: Option<PathBuf>,
        /// Element indices for the indicator kind.
        #[arg(long)]
        set: Option<String>,
        /// Sup-norm of the noise for noisy-phase.
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Cube,
    Definition,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecomposeArg {
    Pursuit,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelOp {
    Spectrum,
    Membership,
    Recover,
}

fn parse_cap(text: &str) -> std::result::Result<u128, String> {
    if let Ok(v) = text.parse::<u128>() {
        return Ok(v);
    }
    match text.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e38 => Ok(v as u128),
        _ => Err(format!("{text:?} is not a non-negative integer")),
    }
}

/// Failure of a run; `code` is the process exit status.
struct Failure {
    code: i32,
    message: String,
}

impl From<HofaError> for Failure {
    fn from(e: HofaError) -> Self {
        let code = if matches!(e, HofaError::Internal(_)) {
            1
        } else {
            2
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

struct Timer {
    start: Instant,
    last: Instant,
    marks: Vec<(String, f64)>,
}

impl Timer {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            marks: Vec::new(),
        }
    }

    fn mark(&mut self, name: &str) {
        let now = Instant::now();
        self.marks
            .push((format!("{name}_ms"), (now - self.last).as_secs_f64() * 1e3));
        self.last = now;
    }

    fn finish(mut self) -> Json {
        self.marks
            .push(("total_ms".into(), self.start.elapsed().as_secs_f64() * 1e3));
        Json::Obj(
            self.marks
                .into_iter()
                .map(|(k, v)| (k, Json::Num(v)))
                .collect(),
        )
    }
}

struct Outcome {
    inputs: Json,
    outputs: Json,
}

/// Runs the CLI with `HOFA_THREADS` read from the environment.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let env = std::env::var(THREADS_ENV).ok();
    run_with_env(args, env.as_deref(), out, err)
}

/// Runs the CLI; `threads_env` plays the role of `HOFA_THREADS`.
pub fn run_with_env(
    args: &[String],
    threads_env: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli, threads_env) {
        Ok(report) => {
            let _ = writeln!(out, "{}", report.to_pretty());
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn thread_count(
    cli: Option<usize>,
    env: Option<&str>,
) -> std::result::Result<Option<usize>, Failure> {
    let parsed = match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => Some(s.parse::<usize>().map_err(|_| Failure {
            code: 2,
            message: format!("{THREADS_ENV}={s:?} is not a thread count"),
        })?),
        None => cli,
    };
    if parsed == Some(0) {
        return Err(invalid("thread count must be positive").into());
    }
    Ok(parsed)
}

fn execute(cli: Cli, threads_env: Option<&str>) -> std::result::Result<Json, Failure> {
    let threads = thread_count(cli.threads, threads_env)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| HofaError::Internal(e.to_string()))?;
    let defaults = Limits::default();
    let limits = Limits {
        cube_terms: cli.cube_cap.unwrap_or(defaults.cube_terms),
        definition_terms: cli.definition_cap.unwrap_or(defaults.definition_terms),
        dictionary: cli.dictionary_cap.unwrap_or(defaults.dictionary),
        ..defaults
    };
    let seed = cli.seed;
    let name = command_name(&cli.command);
    let mut timer = Timer::new();
    let outcome = pool.install(|| dispatch(cli.command, seed, &limits, &mut timer))?;
    Ok(Json::obj([
        ("schema", Json::str(SCHEMA)),
        ("command", Json::str(name)),
        ("inputs", outcome.inputs),
        ("outputs", outcome.outputs),
        ("timings", timer.finish()),
        ("seed", Json::Int(seed as i128)),
    ]))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Norm { .. } => "norm",
        Command::Spectrum { .. } => "spectrum",
        Command::Decompose { .. } => "decompose",
        Command::Kernel { .. } => "kernel",
        Command::CubeCheck { .. } => "cube-check",
        Command::Gen { .. } => "gen",
    }
}

fn path_json(p: &Path) -> Json {
    Json::str(p.display().to_string())
}

/// Loads a function and checks it against the optional `--group` literal.
fn load_function(path: &Path, group: Option<&str>) -> Result<GroupFunction> {
    let f = function_from_json(&read_json(path)?)?;
    if let Some(lit) = group {
        if &parse_group_literal(lit)? != f.group() {
            return Err(invalid(format!(
                "--group {lit} does not match the group {:?} of {}",
                f.group().factors(),
                path.display()
            )));
        }
    }
    Ok(f)
}

fn dispatch(command: Command, seed: u64, limits: &Limits, timer: &mut Timer) -> Result<Outcome> {
    match command {
        Command::Norm {
            group,
            k,
            function,
            method,
        } => {
            let f = load_function(&function, group.as_deref())?;
            timer.mark("load");
            let inputs = Json::obj([
                ("group", group_to_json(f.group())),
                ("k", Json::Int(k as i128)),
                ("fn", path_json(&function)),
                ("method", Json::str(method_name(method))),
            ]);
            let cube = matches!(method, MethodArg::Cube | MethodArg::Both)
                .then(|| gowers_u_with(&f, k, GowersMethod::Cube, limits))
                .transpose()?;
            let definition = matches!(method, MethodArg::Definition | MethodArg::Both)
                .then(|| gowers_u_with(&f, k, GowersMethod::Definition, limits))
                .transpose()?;
            timer.mark("compute");
            let value = cube.or(definition).expect("at least one path ran");
            let opt = |v: Option<f64>| v.map_or(Json::Null, Json::Num);
            let agreement = cube.zip(definition).map(|(a, b)| (a - b).abs());
            Ok(Outcome {
                inputs,
                outputs: Json::obj([
                    ("U_k", Json::Num(value)),
                    ("method", Json::str(method_name(method))),
                    ("cube", opt(cube)),
                    ("definition", opt(definition)),
                    ("agreement", opt(agreement)),
                ]),
            })
        }
        Command::Spectrum {
            group,
            function,
            degree,
            top,
            csv,
        } => {
            let f = load_function(&function, group.as_deref())?;
            timer.mark("load");
            let inputs = Json::obj([
                ("group", group_to_json(f.group())),
                ("fn", path_json(&function)),
                ("degree", Json::Int(degree as i128)),
                ("top", top.map_or(Json::Null, |t| Json::Int(t as i128))),
            ]);
            if let Some(path) = &csv {
                let mut file = std::fs::File::create(path)
                    .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
                f.fourier()
                    .write_csv(&mut file)
                    .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
            }
            let entries = spectrum_entries(&f, degree, limits)?;
            timer.mark("compute");
            let total = entries.len();
            let shown: Vec<Json> = entries
                .into_iter()
                .take(top.unwrap_or(usize::MAX))
                .collect();
            Ok(Outcome {
                inputs,
                outputs: Json::obj([
                    ("family_size", Json::Int(total as i128)),
                    ("entries", Json::Arr(shown)),
                ]),
            })
        }
        Command::Decompose {
            group,
            k,
            function,
            delta,
            max_iter,
            method,
        } => {
            let f = load_function(&function, group.as_deref())?;
            timer.mark("load");
            let inputs = Json::obj([
                ("group", group_to_json(f.group())),
                ("k", Json::Int(k as i128)),
                ("fn", path_json(&function)),
                ("delta", Json::Num(delta)),
                ("max_iter", Json::Int(max_iter as i128)),
                (
                    "method",
                    Json::str(match method {
                        DecomposeArg::Pursuit => "pursuit",
                        DecomposeArg::Fourier => "fourier",
                    }),
                ),
            ]);
            let result = match method {
                DecomposeArg::Pursuit => matching_pursuit_with(&f, k, delta, max_iter, limits)?,
                DecomposeArg::Fourier => fourier_truncate_with(&f, delta, limits)?,
            };
            timer.mark("compute");
            Ok(Outcome {
                inputs,
                outputs: decomposition_json(&f, &result, delta)?,
            })
        }
        Command::Kernel { op, k, input, tol } => {
            let kernel = kernel_from_json(&read_json(&input)?)?;
            timer.mark("load");
            let op_name = match op {
                KernelOp::Spectrum => "spectrum",
                KernelOp::Membership => "membership",
                KernelOp::Recover => "recover",
            };
            let inputs = Json::obj([
                ("group", group_to_json(kernel.group())),
                ("op", Json::str(op_name)),
                ("k", Json::Int(k as i128)),
                ("in", path_json(&input)),
                ("tol", Json::Num(tol)),
            ]);
            let outputs = match op {
                KernelOp::Spectrum => {
                    let spec = spectral_decomposition(&kernel)?;
                    let err = reconstruct(kernel.group(), &spec)?.max_abs_diff(&kernel)?;
                    Json::obj([
                        (
                            "eigenspaces",
                            Json::Arr(
                                spec.iter()
                                    .map(|s| {
                                        Json::obj([
                                            ("value", Json::Num(s.value)),
                                            ("dimension", Json::Int(s.vectors.len() as i128)),
                                            (
                                                "vectors",
                                                Json::Arr(
                                                    s.vectors
                                                        .iter()
                                                        .map(|v| {
                                                            Json::Arr(
                                                                v.values()
                                                                    .iter()
                                                                    .map(|&c| Json::complex(c))
                                                                    .collect(),
                                                            )
                                                        })
                                                        .collect(),
                                                ),
                                            ),
                                        ])
                                    })
                                    .collect(),
                            ),
                        ),
                        ("reconstruction_error", Json::Num(err)),
                    ])
                }
                KernelOp::Membership => {
                    let rep = ck_membership_report(&kernel, k, tol)?;
                    Json::obj([
                        ("max_residual", Json::Num(rep.max_residual)),
                        ("passed", Json::Bool(rep.passed)),
                        (
                            "self_adjoint_deviation",
                            Json::Num(kernel.self_adjoint_deviation()),
                        ),
                    ])
                }
                KernelOp::Recover => {
                    let rep = planted_phase_report_with(&kernel, k, limits)?;
                    Json::obj([(
                        "phases",
                        Json::Arr(
                            rep.iter()
                                .map(|r| {
                                    Json::obj([
                                        ("eigenvalue", Json::Num(r.eigenvalue)),
                                        ("phase", phase_to_json(&r.phase)),
                                        ("correlation", Json::complex(r.correlation)),
                                        ("magnitude", Json::Num(r.correlation.norm())),
                                    ])
                                })
                                .collect(),
                        ),
                    )])
                }
            };
            timer.mark("compute");
            Ok(Outcome { inputs, outputs })
        }
        Command::CubeCheck {
            group,
            k,
            trials,
            tol,
        } => {
            let g = parse_group_literal(&group)?;
            let inputs = Json::obj([
                ("group", group_to_json(&g)),
                ("k", Json::Int(k as i128)),
                ("trials", Json::Int(trials as i128)),
                ("tol", Json::Num(tol)),
            ]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tuples: Vec<Vec<GroupFunction>> = (0..trials)
                .map(|_| {
                    (0..1usize << k.min(crate::cube::MAX_CUBE_DIM))
                        .map(|_| random_complex(&g, &mut rng))
                        .collect()
                })
                .collect();
            let report = cube_check_suite(&g, k, &tuples, tol)?;
            timer.mark("compute");
            Ok(Outcome {
                inputs,
                outputs: Json::from_serialize(&report)?,
            })
        }
        Command::Gen {
            group,
            kind,
            coeffs,
            phase,
            set,
            noise,
            out,
        } => {
            let g = parse_group_literal(&group)?;
            let inputs = Json::obj([
                ("group", group_to_json(&g)),
                ("kind", Json::str(kind.clone())),
                ("coeffs", coeffs.clone().map_or(Json::Null, Json::Str)),
                ("phase", phase.as_deref().map_or(Json::Null, path_json)),
                ("set", set.clone().map_or(Json::Null, Json::Str)),
                ("noise", Json::Num(noise)),
                ("out", out.as_deref().map_or(Json::Null, path_json)),
            ]);
            let f = generate(
                &g,
                &kind,
                coeffs.as_deref(),
                phase.as_deref(),
                set.as_deref(),
                noise,
                seed,
            )?;
            timer.mark("generate");
            let doc = function_to_json(&f);
            let outputs = match &out {
                Some(path) => {
                    std::fs::write(path, doc.to_pretty() + "\n")
                        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
                    Json::obj([
                        ("written", path_json(path)),
                        ("order", Json::Int(g.order() as i128)),
                    ])
                }
                None => Json::obj([("function", doc)]),
            };
            Ok(Outcome { inputs, outputs })
        }
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Cube => "cube",
        MethodArg::Definition => "definition",
        MethodArg::Both => "both",
    }
}

fn spectrum_entries(f: &GroupFunction, degree: u32, limits: &Limits) -> Result<Vec<Json>> {
    let entry = |key: &str, atom: Json, c: Complex64| {
        Json::obj([
            (key, atom),
            ("correlation", Json::complex(c)),
            ("magnitude", Json::Num(c.norm())),
        ])
    };
    match prime_power_shape(f.group()) {
        Some((p, n)) => {
            let family = phase_dictionary_with(p, n, degree, limits)?;
            Ok(correlation_spectrum(f, &family)?
                .into_iter()
                .map(|(ph, c)| entry("phase", phase_to_json(&ph), c))
                .collect())
        }
        None if degree == 1 => {
            let g = f.group();
            let spec = f.fourier();
            let mut order: Vec<usize> = (0..g.order()).collect();
            order.sort_by_key(|&xi| {
                (
                    std::cmp::Reverse(crate::phases::magnitude_key(spec.coeffs()[xi])),
                    xi,
                )
            });
            Ok(order
                .into_iter()
                .map(|xi| {
                    let res = g
                        .element_at(xi)
                        .residues()
                        .iter()
                        .map(|&r| r as usize)
                        .collect::<Vec<_>>();
                    entry("character", Json::uints(res), spec.coeffs()[xi])
                })
                .collect())
        }
        None => Err(invalid(
            "phases of degree above 1 need Z_p^n with p an odd prime",
        )),
    }
}

fn decomposition_json(f: &GroupFunction, d: &DecompositionResult, delta: f64) -> Result<Json> {
    let terms = d
        .terms
        .iter()
        .map(|t| {
            let atom = match &t.atom {
                Atom::Phase(ph) => ("phase", phase_to_json(ph)),
                Atom::Character(xi) => (
                    "character",
                    Json::uints(xi.residues().iter().map(|&r| r as usize)),
                ),
            };
            Json::obj([
                atom,
                ("coeff", Json::complex(t.coeff)),
                ("magnitude", Json::Num(t.coeff.norm())),
            ])
        })
        .collect();
    let err = d.reconstruct()?.max_abs_diff(f)?;
    Ok(Json::obj([
        ("terms", Json::Arr(terms)),
        ("iterations", Json::Int(d.iterations as i128)),
        ("converged", Json::Bool(d.converged)),
        (
            "iteration_bound",
            Json::Num(f.norm_sq() / (delta * delta) + 1.0),
        ),
        ("residual_norm", Json::Num(d.residual.norm())),
        ("residual_gowers", Json::Num(d.residual_gowers)),
        ("gowers_order", Json::Int(d.gowers_order as i128)),
        ("reconstruction_error", Json::Num(err)),
        ("residual", function_to_json(&d.residual)),
    ]))
}

fn random_complex(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupFunction {
    GroupFunction::from_fn(g, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| invalid(format!("bad {what} list {text:?}")))
        })
        .collect()
}

fn load_phase(
    g: &FiniteAbelianGroup,
    coeffs: Option<&str>,
    phase: Option<&Path>,
) -> Result<PolynomialPhase> {
    let (p, n) = prime_power_shape(g)
        .ok_or_else(|| invalid("phase generators need Z_p^n with p an odd prime"))?;
    let phi = match (coeffs, phase) {
        (Some(c), None) if n == 1 => {
            PolynomialPhase::univariate(p, &parse_list::<i64>(c, "coefficient")?)?
        }
        (Some(_), None) => {
            return Err(invalid(
                "--coeffs describes one variable; use --phase for several",
            ))
        }
        (None, Some(path)) => phase_from_json(&read_json(path)?)?,
        _ => return Err(invalid("give exactly one of --coeffs or --phase")),
    };
    if (phi.p(), phi.n()) != (p, n) {
        return Err(HofaError::GroupMismatch);
    }
    Ok(phi)
}

/// Builds a generated function; all randomness comes from `seed`.
fn generate(
    g: &FiniteAbelianGroup,
    kind: &str,
    coeffs: Option<&str>,
    phase: Option<&Path>,
    set: Option<&str>,
    noise: f64,
    seed: u64,
) -> Result<GroupFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        "phase" => Ok(load_phase(g, coeffs, phase)?.eval()),
        "indicator" => {
            let members = parse_list::<usize>(
                set.ok_or_else(|| invalid("indicator needs --set"))?,
                "element",
            )?;
            GroupFunction::indicator(g, &members)
        }
        "random-pm1" | "random±1" => Ok(GroupFunction::from_fn(g, |_| {
            Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0)
        })),
        "noisy-phase" => {
            if noise.is_nan() || noise < 0.0 {
                return Err(invalid("--noise must be non-negative"));
            }
            let base = load_phase(g, coeffs, phase)?.eval();
            // uniform on the disc of radius `noise`
            let eta = GroupFunction::from_fn(g, |_| {
                let r = noise * rng.gen::<f64>().sqrt();
                Complex64::from_polar(r, rng.gen_range(0.0..TAU))
            });
            base.add(&eta)
        }
        other => Err(invalid(format!(
            "unknown kind {other:?}; expected phase, indicator, random-pm1 or noisy-phase"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let args: Vec<String> = std::iter::once("hofa")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with_env(&args, None, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn caps_accept_scientific_notation() {
        assert_eq!(parse_cap("100000000"), Ok(100_000_000));
        assert_eq!(parse_cap("1e8"), Ok(100_000_000));
        assert!(parse_cap("1.5").is_err());
        assert!(parse_cap("-3").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["norm", "--k", "2"]).0, 2);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("norm"));
    }

    #[test]
    fn gen_without_out_embeds_the_function() {
        let (code, out, _) = call(&["gen", "--group", "5", "--kind", "indicator", "--set", "0,1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        let values = v["outputs"]["function"]["values"].as_array().unwrap();
        let re: Vec<f64> = values.iter().map(|c| c[0].as_f64().unwrap()).collect();
        assert_eq!(re, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn invalid_generator_parameters() {
        assert_eq!(call(&["gen", "--group", "5", "--kind", "indicator"]).0, 2);
        assert_eq!(
            call(&["gen", "--group", "6", "--kind", "phase", "--coeffs", "0,1"]).0,
            2
        );
        assert_eq!(call(&["gen", "--group", "5", "--kind", "squiggle"]).0, 2);
        assert_eq!(
            call(&["gen", "--group", "5", "--kind", "indicator", "--set", "7"]).0,
            2
        );
    }

    #[test]
    fn thread_env_overrides_flag() {
        assert_eq!(thread_count(Some(3), Some("1")).ok().flatten(), Some(1));
        assert_eq!(thread_count(Some(3), None).ok().flatten(), Some(3));
        assert!(thread_count(None, Some("many")).is_err());
        assert!(thread_count(Some(0), None).is_err());
    }
}
