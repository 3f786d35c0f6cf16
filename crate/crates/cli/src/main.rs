mod files;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use monge_core::forms::classify;
use monge_core::oracle::{residual_on_trajectory, simulate};
use monge_core::param::{
    build_from_solution, construct_order12, verify_flat_output, verify_numeric, verify_symbolic, FlatConfig,
    GermConfig, Parameterization,
};
use monge_core::pde::{branch_gammas, generate_pde, invert_g, regularity, supply_gamma, Branch, GammaDelta, PdeSystem};
use monge_core::symcore::{is_zero, sub_seed, Expr};
use monge_core::system::SystemDef;
use monge_core::{Error, DEFAULT_SEED};
use serde_json::json;

use files::{read_json, CandidateFile, FlatFile, LoadedSystem};

#[derive(Parser)]
#[command(name = "monge", version, about = "Flatness invariants, PDE systems and parameterizations of z' = h + g x'")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum PdeFormat {
    Text,
    Json,
    Latex,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Symbolic,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrajFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct PdeArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(short = 'k')]
    k: usize,
    #[arg(short = 'l')]
    l: usize,
    /// Branch of a two-branch system (1 or 2), or of a quadratic inversion.
    #[arg(long)]
    branch: Option<String>,
    /// User-supplied γ(x, y, z, w); checked against g.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Invariants S, T, J and the classification of a system.
    Classify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// The PDE system for the given orders.
    GenPde {
        #[command(flatten)]
        pde: PdeArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: PdeFormat,
    },
    /// Equations, inequations and regularity of a candidate solution.
    CheckSolution {
        #[command(flatten)]
        pde: PdeArgs,
        #[arg(long)]
        candidate: PathBuf,
    },
    /// Parameterization generated by a solution at a point.
    BuildParam {
        #[command(flatten)]
        pde: PdeArgs,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        germs: Option<PathBuf>,
    },
    /// Symbolic or numeric verification of a parameterization.
    VerifyParam {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        param: PathBuf,
        #[arg(long, value_enum, default_value = "symbolic")]
        mode: Mode,
        #[arg(long)]
        germs: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Order-(1,2) parameterization from a first integral.
    ConstructParam12 {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        first_integral: String,
        #[arg(long)]
        at: PathBuf,
        /// Flat output to check against the result, as `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        flat: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Round trips of a candidate flat output through a parameterization.
    VerifyFlat {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        param: PathBuf,
        #[arg(long)]
        flat: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Integrates the system along polynomial x(t), y(t).
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        z0: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: TrajFormat,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &serde_json::Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).expect("reports serialize")));
}

fn select_gamma(ls: &LoadedSystem, args: &PdeArgs) -> Result<GammaDelta> {
    let gamma = match &args.gamma {
        Some(g) => Some(files::parse_expr(g, "gamma")?),
        None => ls.gamma()?,
    };
    if let Some(g) = gamma {
        return Ok(supply_gamma(&ls.sys, g, args.seed)?);
    }
    let branch = match &args.branch {
        Some(b) => Some(b.parse::<Branch>()?),
        None => ls.branch()?,
    };
    if let (Some(nf), Some(b)) = (ls.normal_form()?, branch) {
        if let Ok(nf_sys) = nf.as_system() {
            check_same_system(&nf_sys, &ls.sys, "normal_form", args.seed)?;
        }
        let (g1, g2) = branch_gammas(&nf, args.seed)?;
        return Ok(if b == Branch::Plus { g1 } else { g2 });
    }
    Ok(invert_g(&ls.sys, branch, args.seed)?)
}

fn check_same_system(nf: &SystemDef, sys: &SystemDef, section: &str, seed: u64) -> Result<()> {
    for (what, a, b) in [("g", &nf.g, &sys.g), ("h", &nf.h, &sys.h)] {
        let v = is_zero(&Expr::sub(a.clone(), b.clone()), &sys.domain, seed)?;
        if v.is_nonzero() {
            bail!(Error::Precondition(format!("{section} does not reproduce {what}: {}", v.label())));
        }
    }
    Ok(())
}

fn load_pde(args: &PdeArgs) -> Result<(LoadedSystem, PdeSystem)> {
    let ls = LoadedSystem::load(&args.system)?;
    let gd = select_gamma(&ls, args)?;
    let pde = generate_pde(&gd, args.k, args.l)?;
    Ok((ls, pde))
}

fn germ_config(path: &Option<PathBuf>) -> Result<GermConfig> {
    path.as_ref().map(|p| read_json(p)).transpose().map(Option::unwrap_or_default)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Classify { system, seed, format } => {
            let ls = LoadedSystem::load(&system)?;
            let r = classify(&ls.sys, seed)?;
            match format {
                ReportFormat::Json => print_json(&r.to_json()),
                ReportFormat::Text => {
                    let mut out = String::new();
                    for (name, v, verdict) in
                        [("S", &r.s, &r.verdicts[0]), ("T", &r.t, &r.verdicts[1]), ("J", &r.j, &r.verdicts[2])]
                    {
                        out += &format!("{name} = {v} ({})\n", verdict.label());
                    }
                    out += &format!("class: {}\n", r.classification.as_str());
                    for n in &r.notes {
                        out += &format!("note: {n}\n");
                    }
                    emit(&out);
                }
            }
            Ok(Outcome::Pass)
        }
        Command::GenPde { pde, format } => {
            let (_, sys) = load_pde(&pde)?;
            match format {
                PdeFormat::Text => emit(&sys.to_text()),
                PdeFormat::Json => print_json(&sys.to_json()),
                PdeFormat::Latex => emit(&sys.to_latex()),
            }
            Ok(Outcome::Pass)
        }
        Command::CheckSolution { pde, candidate } => {
            let (ls, sys) = load_pde(&pde)?;
            let p = read_json::<CandidateFile>(&candidate)?.expr()?;
            let rep = regularity(&p, &sys, &ls.sys.domain, pde.seed)?;
            print_json(&serde_json::to_value(&rep)?);
            let ok =
                rep.equations_hold() && rep.inequations_hold() && rep.identities_hold() && rep.k_regular().is_some();
            Ok(if ok { Outcome::Pass } else { Outcome::Fail })
        }
        Command::BuildParam { pde, candidate, point, germs } => {
            let (ls, sys) = load_pde(&pde)?;
            let p = read_json::<CandidateFile>(&candidate)?.expr()?;
            let point: BTreeMap<String, f64> = read_json(&point)?;
            let par = build_from_solution(&p, &sys, &point, &ls.sys.domain, pde.seed)?;
            let rep = verify_numeric(&par, &ls.sys, &germ_config(&germs)?, sub_seed(pde.seed, 1))?;
            print_json(&json!({ "parameterization": par.to_json(), "numeric": rep.to_json() }));
            Ok(if rep.passed() { Outcome::Pass } else { Outcome::Fail })
        }
        Command::VerifyParam { system, param, mode, germs, seed } => {
            let ls = LoadedSystem::load(&system)?;
            let par: Parameterization = read_json(&param)?;
            let rep = match mode {
                Mode::Symbolic => verify_symbolic(&par, &ls.sys, seed)?,
                Mode::Numeric => verify_numeric(&par, &ls.sys, &germ_config(&germs)?, seed)?,
            };
            print_json(&rep.to_json());
            Ok(if rep.passed() { Outcome::Pass } else { Outcome::Fail })
        }
        Command::ConstructParam12 { system, first_integral, at, flat, seed } => {
            let ls = LoadedSystem::load(&system)?;
            let nf = ls
                .normal_form_12()?
                .ok_or_else(|| Error::Precondition("the system file has no normal_form_12 section".into()))?;
            check_same_system(&nf.as_system()?, &ls.sys, "normal_form_12", seed)?;
            let h = files::parse_expr(&first_integral, "first integral")?;
            let point: BTreeMap<String, f64> = read_json(&at)?;
            let (par, report) = construct_order12(&nf, &h, &point, &GermConfig::default(), seed)?;
            let mut out = json!({ "parameterization": par.to_json(), "report": serde_json::to_value(&report)? });
            let mut ok = true;
            if let Some(fl) = flat {
                let (a, b) = fl.split_once(',').context("--flat expects `a,b`")?;
                let fo = FlatFile { a: a.into(), b: b.into(), order: 1 }.to_flat()?;
                let rep = verify_flat_output(&par, &fo, &ls.sys, &FlatConfig::default(), sub_seed(seed, 7))?;
                ok = rep.passed();
                out["flat_output"] = rep.to_json();
            }
            print_json(&out);
            Ok(if ok { Outcome::Pass } else { Outcome::Fail })
        }
        Command::VerifyFlat { system, param, flat, config, seed } => {
            let ls = LoadedSystem::load(&system)?;
            let par: Parameterization = read_json(&param)?;
            let fo = read_json::<FlatFile>(&flat)?.to_flat()?;
            let cfg: FlatConfig = config.as_ref().map(|p| read_json(p)).transpose()?.unwrap_or_default();
            let rep = verify_flat_output(&par, &fo, &ls.sys, &cfg, seed)?;
            print_json(&rep.to_json());
            Ok(if rep.passed() { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Simulate { system, x, y, z0, t0, t1, dt, format } => {
            let ls = LoadedSystem::load(&system)?;
            let (xe, ye) = (files::parse_expr(&x, "x(t)")?, files::parse_expr(&y, "y(t)")?);
            let traj = simulate(&ls.sys, &xe, &ye, z0, t0, t1, dt)?;
            let res = residual_on_trajectory(&traj, &ls.sys)?;
            match format {
                TrajFormat::Csv => emit(&traj.to_csv()),
                TrajFormat::Json => print_json(&json!({ "trajectory": traj, "residual": res })),
            }
            if res < 1e-6 {
                Ok(Outcome::Pass)
            } else {
                eprintln!("post-hoc residual {res:e} exceeds 1e-6: step too large or unstable");
                Ok(Outcome::Fail)
            }
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Syntax { .. }
            | Error::UnknownFunction { .. }
            | Error::NonIntegerExponent { .. }
            | Error::Unregistered(_)
            | Error::Unbound(_),
        ) => 1,
        Some(
            Error::Precondition(_)
            | Error::Domain { .. }
            | Error::DivisionByZero(_)
            | Error::NoAdmissiblePoint { .. }
            | Error::Degree(_)
            | Error::Unsupported(_),
        ) => 2,
        Some(Error::Verification(_) | Error::Numeric(_) | Error::Inconsistent(_)) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
