use clap::{Args, Parser, Subcommand, ValueEnum};
use emsrs::constants::beam_kinematics;
use emsrs::estimation::mle_study;
use emsrs::magnetostatics::{
    ab_phase_analytic, ab_phase_quadrature, deflection_analytic, validity_limits, BeamGeometry, DipoleSource,
};
use emsrs::quantum::theta_for;
use emsrs::scenario::units::{parse_quantity, split_number, Dimension};
use emsrs::scenario::{
    beta_grid, beta_sweep, default_phase_rows, fringe_sweep, phase_table, protocol_b_config, resonance_grid,
    resonance_scan, run_protocol_a, run_protocol_b, Accumulation, Cell, RunResult, ScenarioConfig, SpeciesChoice,
    Table,
};
use emsrs::{Error, Vector2};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "emsrs",
    version,
    about = "Spin resonance spectroscopy with an electron interferometer"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Scenario file (`key = value unit` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides the seed of the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Magnitude,
    Coherent,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Aharonov–Bohm phase of one spin and the resulting deflection.
    Phase {
        #[arg(long)]
        species: Option<String>,
        /// Distance to each arm, with unit (e.g. `0.1nm`).
        #[arg(long, allow_hyphen_values = true)]
        d: Option<String>,
        /// Beam kinetic energy, with unit (e.g. `200keV`).
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<String>,
    },
    /// Fringe phase and visibility over the configured t0 grid.
    Fringe,
    /// π-pulse toggle (or π/2 null) protocol with the bias along x.
    ProtocolA,
    /// π/2-pulse precession protocol with the bias along z.
    ProtocolB,
    /// Integrated protocol-b signal against the pulse rate.
    Resonance {
        /// Relative half-width of the rate grid around ω0.
        #[arg(long, default_value_t = 0.2)]
        span: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Mode::Magnitude)]
        mode: Mode,
    },
    /// Phase and visibility deficit against the spin orientation angle.
    BetaSweep {
        #[arg(long, default_value_t = 360)]
        points: usize,
    },
    /// Differential phases of the reference scenarios.
    Table,
    /// Monte Carlo study of the maximum-likelihood estimator against the
    /// Cramér–Rao bound.
    Estimate {
        /// Interferometer phase; bare numbers are radians.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        phi: String,
        #[arg(long = "Ne", alias = "n-e", default_value_t = 100_000)]
        n_e: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// True coupling; bare numbers are radians.
        #[arg(long, default_value = "0.125pi", allow_hyphen_values = true)]
        theta: String,
        /// ⟨σ_x⟩ of the spin during the passage.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sx: f64,
    },
    /// Validity of the semiclassical passage model.
    Check {
        /// Longitudinal wave-packet length, with unit.
        #[arg(long, default_value = "1nm", allow_hyphen_values = true)]
        dz: String,
        /// Transverse wave-packet width, with unit.
        #[arg(long, default_value = "0.01nm", allow_hyphen_values = true)]
        dr: String,
    },
}

struct Output {
    table: Table,
    summary: String,
    extra: Value,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        Error::Domain(_) | Error::Capacity(_) | Error::NonIdentifiable(_) => 3,
        Error::Convergence { .. } => 4,
        Error::Io(_) => 1,
    }
}

fn load_config(global: &Global, fallback: fn() -> ScenarioConfig) -> emsrs::Result<ScenarioConfig> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            ScenarioConfig::parse(&text)?
        }
        None => fallback(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn angle_arg(text: &str) -> emsrs::Result<f64> {
    let (v, unit) = split_number(text)?;
    if unit.is_empty() {
        Ok(v)
    } else {
        parse_quantity(text, Dimension::Angle)
    }
}

fn protocol_output(res: RunResult) -> Output {
    let mut summary = format!("{} ({})", res.protocol, res.variant);
    for (k, v) in &res.summary {
        summary.push_str(&format!("\n  {k} = {v:.6e}"));
    }
    for w in &res.warnings {
        summary.push_str(&format!("\n  warning: {w}"));
    }
    let extra = json!({
        "protocol": res.protocol,
        "variant": res.variant,
        "summary": res.summary,
        "fits": res.fits,
        "warnings": res.warnings,
    });
    Output {
        table: res.table,
        summary,
        extra,
    }
}

fn run(command: &Command, cfg: &ScenarioConfig) -> emsrs::Result<Output> {
    match command {
        Command::Phase { species, d, energy } => {
            let choice = match species {
                Some(s) => SpeciesChoice::parse(s)?,
                None => cfg.species.clone(),
            };
            let sp = choice.species()?;
            let d = match d {
                Some(t) => parse_quantity(t, Dimension::Length)?,
                None => cfg.d,
            };
            let energy = match energy {
                Some(t) => parse_quantity(t, Dimension::Energy)?,
                None => cfg.beam_energy,
            };
            let kin = beam_kinematics(energy)?;
            let analytic = ab_phase_analytic(d, sp.mu)?;
            let geom = BeamGeometry::new(Vector2::new(0.0, d), kin, 0.0)?;
            let quad = ab_phase_quadrature(&geom, &DipoleSource::new(sp.mu, emsrs::Vector3::x())?)?;
            let theta = theta_for(d, sp.mu)?;
            let alpha = deflection_analytic(d, analytic, &kin)?;
            let mut table = Table::new(&[
                "species",
                "d_m",
                "theta_rad",
                "delta_phi_analytic_rad",
                "delta_phi_quadrature_rad",
                "differential_phase_rad",
                "deflection_rad",
            ]);
            table.push(vec![
                Cell::from(sp.name.as_str()),
                Cell::Num(d),
                Cell::Num(theta),
                Cell::Num(analytic),
                Cell::Num(quad),
                Cell::Num(2.0 * analytic),
                Cell::Num(alpha),
            ]);
            let summary = format!(
                "{} at d = {:.4} nm: 2Δφ_S = {:.5} mrad (quadrature {:.5} mrad), deflection {:.3} nrad at {:.0} keV",
                sp.name,
                d * 1e9,
                2.0 * analytic * 1e3,
                2.0 * quad * 1e3,
                alpha * 1e9,
                energy / 1e3
            );
            Ok(Output {
                table,
                summary,
                extra: Value::Null,
            })
        }
        Command::Fringe => {
            let table = fringe_sweep(cfg)?;
            let summary = format!("fringe: {} t0 points", table.rows.len());
            Ok(Output {
                table,
                summary,
                extra: Value::Null,
            })
        }
        Command::ProtocolA => Ok(protocol_output(run_protocol_a(cfg)?)),
        Command::ProtocolB => Ok(protocol_output(run_protocol_b(cfg)?)),
        Command::Resonance { span, points, mode } => {
            let omega0 = cfg.bias_field()?.omega0();
            let grid = resonance_grid(omega0, *span, *points)?;
            let mode = match mode {
                Mode::Magnitude => Accumulation::Magnitude,
                Mode::Coherent => Accumulation::Coherent,
            };
            let scan = resonance_scan(cfg, &grid, mode)?;
            let summary = format!(
                "resonance ({mode:?}): argmax ω_e = {:.6e} rad/s at index {}, ω0 = {:.6e} rad/s",
                scan.argmax_omega, scan.argmax_index, scan.omega0
            );
            let extra = json!({
                "mode": mode,
                "omega0": scan.omega0,
                "argmax_omega": scan.argmax_omega,
                "argmax_index": scan.argmax_index,
            });
            Ok(Output {
                table: scan.table,
                summary,
                extra,
            })
        }
        Command::BetaSweep { points } => {
            if *points == 0 {
                return Err(Error::Domain("beta sweep needs at least one point".into()));
            }
            let table = beta_sweep(cfg, &beta_grid(*points))?;
            let summary = format!("beta sweep: {points} orientations");
            Ok(Output {
                table,
                summary,
                extra: Value::Null,
            })
        }
        Command::Table => {
            let table = phase_table(&default_phase_rows())?;
            let mut summary = String::from("differential phases:");
            for row in &table.rows {
                let num = |k: usize| row[k].as_f64().unwrap_or(f64::NAN);
                summary.push_str(&format!(
                    "\n  {:8} d = {:.1} nm, N_S = {:4}, polarization {:5.1} %: 2Δφ_S = {:.4e} mrad",
                    row[0].to_string(),
                    num(1) * 1e9,
                    num(2),
                    num(3) * 100.0,
                    num(5) * 1e3
                ));
            }
            Ok(Output {
                table,
                summary,
                extra: Value::Null,
            })
        }
        Command::Estimate {
            phi,
            n_e,
            trials,
            theta,
            sx,
        } => {
            let phi = angle_arg(phi)?;
            let theta = angle_arg(theta)?;
            let res = mle_study(theta, phi, *sx, *n_e, *trials, cfg.seed)?;
            let ratio = res.efficiency_ratio();
            let mut table = Table::new(&[
                "theta_true_rad",
                "phi_rad",
                "sx_expect",
                "n_electrons",
                "trials",
                "theta_hat_mean_rad",
                "variance_rad2",
                "mse_rad2",
                "crb_rad2",
                "variance_over_crb",
                "clamped_trials",
            ]);
            table.push(vec![
                Cell::Num(theta),
                Cell::Num(phi),
                Cell::Num(*sx),
                Cell::Int(*n_e),
                Cell::Int(res.n_trials as u64),
                Cell::Num(res.theta_hat),
                Cell::Num(res.variance),
                Cell::Num(res.mse),
                Cell::Num(res.crb),
                Cell::Num(ratio),
                Cell::Int(res.clamped_trials as u64),
            ]);
            let summary = format!(
                "estimate: θ = {theta:.6e} rad, φ = {phi:.4} rad, N_e = {n_e}, {} trials: variance/CRB = {ratio:.4} ({} clamped)",
                res.n_trials, res.clamped_trials
            );
            Ok(Output {
                table,
                summary,
                extra: serde_json::to_value(&res).unwrap_or(Value::Null),
            })
        }
        Command::Check { dz, dr } => {
            let dz = parse_quantity(dz, Dimension::Length)?;
            let dr = parse_quantity(dr, Dimension::Length)?;
            let sp = cfg.spin_species()?;
            let kin = beam_kinematics(cfg.beam_energy)?;
            let omega0 = cfg.bias_field()?.omega0().abs();
            let rep = validity_limits(cfg.d, &sp, omega0, &kin, dz, dr)?;
            let mut table = Table::new(&[
                "d_m",
                "delta_y_max_m",
                "momentum_kick_ratio",
                "momentum_kick_ok",
                "spin_flip_ratio",
                "spin_flip_ok",
            ]);
            table.push(vec![
                Cell::Num(cfg.d),
                Cell::Num(rep.delta_y_max),
                Cell::Num(rep.momentum_kick_ratio),
                Cell::Int(rep.momentum_kick_ok as u64),
                Cell::Num(rep.spin_flip_ratio),
                Cell::Int(rep.spin_flip_ok as u64),
            ]);
            let verdict = |ok: bool| if ok { "ok" } else { "violated" };
            let summary = format!(
                "check: Δy_max = {:.3e} m; momentum kick ratio {:.3e} ({}); spin flip ratio {:.3e} ({})",
                rep.delta_y_max,
                rep.momentum_kick_ratio,
                verdict(rep.momentum_kick_ok),
                rep.spin_flip_ratio,
                verdict(rep.spin_flip_ok)
            );
            Ok(Output {
                table,
                summary,
                extra: serde_json::to_value(rep).unwrap_or(Value::Null),
            })
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Phase { .. } => "phase",
        Command::Fringe => "fringe",
        Command::ProtocolA => "protocol-a",
        Command::ProtocolB => "protocol-b",
        Command::Resonance { .. } => "resonance",
        Command::BetaSweep { .. } => "beta-sweep",
        Command::Table => "table",
        Command::Estimate { .. } => "estimate",
        Command::Check { .. } => "check",
    }
}

fn execute(cli: &Cli) -> emsrs::Result<()> {
    let fallback: fn() -> ScenarioConfig = match cli.command {
        Command::ProtocolB | Command::Resonance { .. } => protocol_b_config,
        _ => ScenarioConfig::default,
    };
    let cfg = load_config(&cli.global, fallback)?;
    let out = run(&cli.command, &cfg)?;
    let text = match cli.global.format {
        Format::Csv => out.table.to_csv(),
        Format::Json => {
            let mut meta = json!({
                "tool": "emsrs",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command_name(&cli.command),
                "seed": cfg.seed,
                "config_hash": cfg.hash(),
                "config": cfg.to_canonical(),
            });
            if !out.extra.is_null() {
                meta["result"] = out.extra;
            }
            out.table.to_json(meta)
        }
    };
    match &cli.global.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    if !cli.global.quiet {
        eprintln!("{}", out.summary);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.class());
            ExitCode::from(exit_code(&err))
        }
    }
}
