//! Command-line front end to the shockphase library.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::{
    ClapeyronArgs, CoexistenceArgs, Command, CriticalPointArgs, Ctx, ExponentsArgs, FitArgs, IsothermArgs, MaxwellArgs,
    PdeArgs, PearceyArgs, PhaseDiagramArgs, ShocksArgs, UniversalArgs,
};
use config::{FileConfig, Units};
use shockphase::{Error, ErrorClass, Result, ScalarFn};

const EXIT_CODES: &str = "Exit codes:
  0  success
  2  invalid input or configuration
  3  numerical non-convergence
  4  infeasible model (no solution of the requested kind)";

#[derive(Parser)]
#[command(
    name = "shockphase",
    version,
    about = "Equations of state as nonlinear waves: isotherms, coexistence, critical scaling and phase boundaries",
    after_help = EXIT_CODES
)]
struct Cli {
    /// TOML run configuration; flags win over its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// vdw-hydrogen, vdw-reduced, vdw (needs a [vdw] table) or a JSON file [default: vdw-reduced]
    #[arg(long, global = true)]
    eos: Option<String>,
    /// Unit system for all inputs and outputs [default: si]
    #[arg(long, global = true, value_enum)]
    units: Option<Units>,
    /// Shorthand for `--units reduced`
    #[arg(long, global = true, conflicts_with = "units")]
    reduced: bool,
    /// Output file [default: stdout]
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Isotherms P(V), raw and with the Maxwell plateau (CSV)
    Isotherm(IsothermArgs),
    /// Critical volume, pressure and temperature (CSV)
    CriticalPoint(CriticalPointArgs),
    /// Saturation states at given temperatures (CSV)
    Maxwell(MaxwellArgs),
    /// Coexistence curve with latent heat (CSV)
    Coexistence(CoexistenceArgs),
    /// Jump-speed ratio against the saturation slope (CSV)
    Clapeyron(ClapeyronArgs),
    /// Quartic-exponent integral and its profile on a grid (CSV)
    Pearcey(PearceyArgs),
    /// Near-critical volume from the universal profile (CSV)
    Universal(UniversalArgs),
    /// Critical exponents from power-law fits (JSON)
    Exponents(ExponentsArgs),
    /// Viscous balance law marched in pressure (CSV)
    Pde(PdeArgs),
    /// Liquid-gas boundary from the jump-speed ODE (CSV)
    Shocks(ShocksArgs),
    /// Recover the state surface from two isotherms (JSON)
    Fit(FitArgs),
    /// Vapor and fusion boundaries and their triple point (JSON)
    PhaseDiagram(PhaseDiagramArgs),
}

fn check<C: Command + Default>(t: &toml::Table) -> Result<()> {
    config::merge(C::SECTION, Some(t), &C::default()).map(|_| ())
}

fn check_section(name: &str, t: &toml::Table) -> Result<()> {
    match name {
        "isotherm" => check::<IsothermArgs>(t),
        "critical_point" => check::<CriticalPointArgs>(t),
        "maxwell" => check::<MaxwellArgs>(t),
        "coexistence" => check::<CoexistenceArgs>(t),
        "clapeyron" => check::<ClapeyronArgs>(t),
        "pearcey" => check::<PearceyArgs>(t),
        "universal" => check::<UniversalArgs>(t),
        "exponents" => check::<ExponentsArgs>(t),
        "pde" => check::<PdeArgs>(t),
        "shocks" => check::<ShocksArgs>(t),
        "fit" => check::<FitArgs>(t),
        "phase_diagram" => check::<PhaseDiagramArgs>(t),
        _ => unreachable!("sections are listed in commands::SECTIONS"),
    }
}

fn execute<C: Command>(cli: &Cli, file: &FileConfig, flags: &C) -> Result<String> {
    let args = config::merge(C::SECTION, file.section(C::SECTION), flags)?;
    let units = if cli.reduced {
        Units::Reduced
    } else {
        cli.units.or(file.units).unwrap_or(Units::Si)
    };

    let mut ctx = Ctx {
        command: C::NAME,
        hash: String::new(),
        eos: None,
        cp: None,
        entropy: None,
    };
    let mut s0 = file.s0.clone();
    if C::NEEDS_EOS {
        let name = cli.eos.as_deref().or(file.eos.as_deref()).unwrap_or("vdw-reduced");
        let mut eos = config::resolve_eos(name, file.vdw)?;
        if units == Units::Reduced {
            let (reduced, cp) = eos.to_reduced()?;
            eos = reduced;
            // S0 scales so that alpha S0' = 1 holds in the new units
            s0 = s0.map(|f| ScalarFn::Scaled {
                inner: Box::new(f),
                x_scale: cp.v_c,
                y_scale: cp.t_c / (cp.p_c * cp.v_c),
            });
        }
        ctx.cp = Some(eos.critical_point()?);
        if C::NEEDS_ENTROPY {
            ctx.entropy = Some(config::resolve_entropy(&eos, s0.as_ref())?);
        }
        ctx.eos = Some(eos);
    }

    let mut inputs = BTreeMap::new();
    for path in args.inputs() {
        inputs.insert(path.display().to_string(), config::file_digest(&path)?);
    }
    let record = serde_json::json!({
        "command": C::NAME,
        "units": units,
        "eos": ctx.eos,
        "s0": if C::NEEDS_ENTROPY { s0 } else { None },
        "args": args,
        "inputs": inputs,
    });
    ctx.hash = config::digest(&record);
    args.run(&ctx)
}

fn run(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => {
            let f = FileConfig::load(path)?;
            config::check_sections(&f, check_section)?;
            f
        }
        None => FileConfig::default(),
    };
    let text = match &cli.command {
        Cmd::Isotherm(a) => execute(cli, &file, a),
        Cmd::CriticalPoint(a) => execute(cli, &file, a),
        Cmd::Maxwell(a) => execute(cli, &file, a),
        Cmd::Coexistence(a) => execute(cli, &file, a),
        Cmd::Clapeyron(a) => execute(cli, &file, a),
        Cmd::Pearcey(a) => execute(cli, &file, a),
        Cmd::Universal(a) => execute(cli, &file, a),
        Cmd::Exponents(a) => execute(cli, &file, a),
        Cmd::Pde(a) => execute(cli, &file, a),
        Cmd::Shocks(a) => execute(cli, &file, a),
        Cmd::Fit(a) => execute(cli, &file, a),
        Cmd::PhaseDiagram(a) => execute(cli, &file, a),
    }?;
    match cli.out.as_ref().or(file.out.as_ref()) {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Input => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Infeasible => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
