//! `nls-asy`: batch front end for the standard-form reduction, the
//! quadratic-flow closed forms, fixed-point analysis and asymptotic profiles.
//!
//! Exit codes: 0 success, 1 bad input or failed evaluation, 2 non-coercive
//! system, 3 no closed form in closed mode.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod input;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use nls_asymptotics::closed_form::{classify, solve_case};
use nls_asymptotics::profile::{case1_profile, case3_profile, profile_csv, sample_profile, sync_decay, FinalData};
use nls_asymptotics::quadratic_flow::{detect_sync, fixed_points, fmt17, integrate_quad, stability, QuadState, StabilityClass};
use nls_asymptotics::standard_form::{reduce_to_standard, StandardParams};
use nls_asymptotics::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonCoercive => 2,
            Error::Unsupported(_) | Error::UnsupportedRatio(_) => 3,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nls-asy", version, about = "Quadratic-flow asymptotics for two-component cubic NLS systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a general cubic system `{"lambda": [..12]}` to standard form.
    Standardize {
        #[arg(long)]
        params: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sample the quadratic flow `(D, R, I)` from a closed form, the oracle or both.
    Solve(SolveArgs),
    /// List the fixed points on the sphere of radius rho with stability reports.
    FixedPoints {
        #[arg(long)]
        params: String,
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate the asymptotic profile on a (t, x) grid.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Closed,
    Oracle,
    Both,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Standard parameters `{"p": [..5], "q": [..3]}`, inline or as a file.
    #[arg(long)]
    params: String,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    /// Initial state `D,R,I` on the sphere; drawn from `--seed` when absent.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "0,1")]
    span: String,
    #[arg(long, default_value_t = 101)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Mode::Closed)]
    mode: Mode,
    /// Local tolerance of the oracle integrator.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long)]
    params: String,
    /// Final data table with header `xi,re_a1,im_a1,re_a2,im_a2`.
    #[arg(long)]
    final_data: String,
    /// Comma-separated times.
    #[arg(long, allow_hyphen_values = true)]
    t_list: String,
    /// `a,b,n`: n equally spaced positions from a to b.
    #[arg(long, allow_hyphen_values = true)]
    x_grid: String,
    /// Cross-check against the explicit pure-p1 or pure-p3 profile.
    #[arg(long)]
    special: bool,
    /// Report the √t-weighted sup of the synchronizing combination.
    #[arg(long)]
    sync_check: bool,
    /// `a,b`: the ξ region used by `--sync-check`; the whole grid when absent.
    #[arg(long, allow_hyphen_values = true)]
    sync_region: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

fn emit(out: &OutArgs, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_rho(rho: f64) -> Result<(), Failure> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Failure::input(format!("--rho must be positive and finite, got {rho}")));
    }
    Ok(())
}

fn params_json(p: &StandardParams) -> serde_json::Value {
    json!({ "p": p.p(), "q": p.q() })
}

fn cmd_standardize(source: &str, out: &OutArgs) -> Result<(), Failure> {
    let g = input::parse_general(source)?;
    let (p, trace) = reduce_to_standard(&g)?;
    info!("reduced to p = {:?}, q = {:?}", p.p(), p.q());
    let mut doc = params_json(&p);
    doc["trace"] = json!({
        "mass_form": trace.mass_form,
        "linear_change": trace.linear_change,
        "rotation_angle": trace.rotation_angle,
        "component_sign_flip": trace.component_sign_flip,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("plain JSON values")))
}

/// Uniform point on the sphere of radius `rho`.
fn random_state(seed: u64, rho: f64) -> QuadState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    QuadState::new(rho * r * phi.cos(), rho * r * phi.sin(), rho * z)
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    let p = input::parse_params(&a.params)?;
    check_rho(a.rho)?;
    let span = input::parse_span(&a.span)?;
    if a.samples < 2 {
        return Err(Failure::input("--samples must be at least 2"));
    }
    if !(1e-14..=1e-3).contains(&a.tol) {
        return Err(Failure::input(format!("--tol must lie in [1e-14, 1e-3], got {}", a.tol)));
    }
    let s0 = match &a.init {
        Some(text) => input::parse_init(text)?,
        None => random_state(a.seed, a.rho),
    };
    info!("{} with initial state {:?}", classify(&p)?.case, s0);
    let times: Vec<f64> = (0..a.samples)
        .map(|k| span.0 + (span.1 - span.0) * k as f64 / (a.samples - 1) as f64)
        .collect();
    let closed = match a.mode {
        Mode::Oracle => None,
        _ => {
            let sol = solve_case(&p, a.rho, s0)?;
            debug!("closed form branch {:?}", sol.branch);
            Some(times.iter().map(|&t| sol.eval(t)).collect::<Vec<_>>())
        }
    };
    let oracle = match a.mode {
        Mode::Closed => None,
        _ => {
            let traj = integrate_quad(&p, a.rho, s0, (span.0.min(0.0), span.1.max(0.0)), a.tol)?;
            Some(times.iter().map(|&t| traj.eval(t)).collect::<Vec<_>>())
        }
    };
    let mut csv = String::from(if a.mode == Mode::Both { "tau,D,R,I,deviation\n" } else { "tau,D,R,I\n" });
    let mut worst = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        let s = closed.as_ref().or(oracle.as_ref()).expect("one source is always computed")[k];
        let _ = write!(csv, "{},{},{},{}", fmt17(t), fmt17(s.d), fmt17(s.r), fmt17(s.i));
        if let (Some(c), Some(o)) = (&closed, &oracle) {
            let dev = c[k].max_abs_diff(o[k]);
            worst = worst.max(dev);
            let _ = write!(csv, ",{}", fmt17(dev));
        }
        csv.push('\n');
    }
    if a.mode == Mode::Both {
        info!("max deviation between closed form and oracle: {worst:e}");
    }
    emit(&a.out, &csv)
}

fn cmd_fixed_points(source: &str, rho: f64, out: &OutArgs) -> Result<(), Failure> {
    let p = input::parse_params(source)?;
    check_rho(rho)?;
    let fps = fixed_points(&p, rho)?;
    let isolated: Vec<_> = fps
        .isolated
        .iter()
        .map(|x| {
            let point = x.to_array();
            match stability(&p, rho, *x) {
                Ok(r) => json!({
                    "point": point,
                    "tangent_form_eigenvalues": r.tangent_form_eigenvalues,
                    "classification": match r.classification {
                        StabilityClass::AsymptoticallyStableSufficient => "asymptotically stable (sufficient)",
                        StabilityClass::Inconclusive => "inconclusive",
                    },
                }),
                Err(e) => json!({ "point": point, "classification": format!("unavailable: {e}") }),
            }
        })
        .collect();
    let continua: Vec<_> = fps
        .continua
        .iter()
        .map(|c| json!({ "description": c.description, "normal": c.normal, "offset": c.offset }))
        .collect();
    let doc = json!({
        "case": classify(&p)?.case.to_string(),
        "rho": rho,
        "isolated": isolated,
        "continua": continua,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("plain JSON values")))
}

type ExplicitProfile = fn(f64, [f64; 3], &FinalData, f64, f64) -> nls_asymptotics::Result<(Complex64, Complex64)>;

/// Which explicit profile applies to `p`.
fn special_profile(p: &StandardParams) -> Option<(u8, ExplicitProfile, f64)> {
    let [p1, p2, p3, p4, p5] = p.p();
    if p2 == 0.0 && p4 == 0.0 && p5 == 0.0 {
        if p3 == 0.0 && p1 > 0.0 {
            return Some((1, case1_profile, p1));
        }
        if p1 == 0.0 && p3 > 0.0 {
            return Some((3, case3_profile, p3));
        }
    }
    None
}

fn cmd_profile(a: &ProfileArgs) -> Result<(), Failure> {
    let p = input::parse_params(&a.params)?;
    let fd = input::parse_final_data(&a.final_data)?;
    let ts = input::parse_list(&a.t_list, "--t-list")?;
    let xs = input::parse_grid(&a.x_grid)?;
    let mut samples = Vec::with_capacity(ts.len() * xs.len());
    for &t in &ts {
        samples.extend(sample_profile(&p, &fd, t, &xs)?);
    }
    if a.special {
        let (case, f, coef) =
            special_profile(&p).ok_or_else(|| Failure::input("--special needs a pure p1 (Case 1) or pure p3 (Case 3) system"))?;
        let mut worst = 0.0f64;
        let mut compared = 0usize;
        for s in samples.iter().filter(|s| s.t > 1.0) {
            match f(coef, p.q(), &fd, s.t, s.x) {
                Ok((e1, e2)) => {
                    let scale = s.u1.norm().max(s.u2.norm());
                    if scale > 0.0 {
                        worst = worst.max((s.u1 - e1).norm().max((s.u2 - e2).norm()) / scale);
                        compared += 1;
                    }
                }
                Err(e) => debug!("skipping t = {}, x = {}: {e}", s.t, s.x),
            }
        }
        eprintln!("special Case {case}: max relative deviation {} over {compared} points", fmt17(worst));
    }
    if a.sync_check {
        let region = match &a.sync_region {
            Some(text) => input::parse_span(text)?,
            None => (fd.xi_grid[0], fd.xi_grid[fd.xi_grid.len() - 1]),
        };
        let rho = fd
            .xi_grid
            .iter()
            .filter(|&&x| x >= region.0 && x <= region.1)
            .map(|&x| fd.at(x).map(|a| a.rho()))
            .collect::<nls_asymptotics::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        check_rho(rho)?;
        match detect_sync(&p, rho)? {
            None => eprintln!("sync: no synchronizing fixed point at rho = {}", fmt17(rho)),
            Some((point, gamma)) => {
                eprintln!(
                    "sync: point {:?} gamma ({}, {}) ({}, {})",
                    point.to_array(),
                    fmt17(gamma.0.re),
                    fmt17(gamma.0.im),
                    fmt17(gamma.1.re),
                    fmt17(gamma.1.im)
                );
                for &t in ts.iter().filter(|&&t| t > 1.0) {
                    let v = sync_decay(&p, &fd, gamma, t, region)?;
                    eprintln!("sync t = {}: sup {}", fmt17(t), fmt17(v));
                }
            }
        }
    }
    emit(&a.out, &profile_csv(&samples))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Standardize { params, out } => cmd_standardize(params, out),
        Command::Solve(a) => cmd_solve(a),
        Command::FixedPoints { params, rho, out } => cmd_fixed_points(params, *rho, out),
        Command::Profile(a) => cmd_profile(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NLS_ASY_LOG", "error")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 3 {
                eprintln!("hint: rerun with --mode oracle");
            }
            ExitCode::from(f.code)
        }
    }
}
