use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use drumhead_rom::cli::{self, Command, Integrator, OutputFormat, PlotKind, RunSpec, OUTPUT_DIR_ENV};
use drumhead_rom::dynamics::{EnergyConvention, IcKind};
use drumhead_rom::Error;

#[derive(Parser)]
#[command(name = "drumhead-rom", version, about = "Buckled-drumhead phononic waveguide model")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Isolated-cell equilibrium and buckling stiffness over temperature.
    CellSweep(Opts),
    /// Dispersion at one temperature, or band edges over a temperature grid.
    Bloch(Opts),
    /// Coupled static equilibrium of an N-cell waveguide.
    Equilibrium(Opts),
    /// Normal modes, participation ratios and selected mode shapes.
    Modes(Opts),
    /// Transient response, cell energies and spectra.
    Simulate(Opts),
    /// Cell-by-frequency transmission map at one temperature.
    Transmission(Opts),
    /// Temperature-by-frequency transmission at a probe cell.
    TransmissionSweep(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum IcArg {
    Translational,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    None,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Modal,
    Rk,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyArg {
    Conserving,
    Printed,
}

#[derive(Args, Clone)]
struct Opts {
    /// JSON run spec; its fields override the flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of cells.
    #[arg(long)]
    n: Option<usize>,
    /// Thickness disorder level σ_h (0.05 for 5%).
    #[arg(long)]
    disorder: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Temperature, K.
    #[arg(long)]
    temp: Option<f64>,
    /// Temperature grid start:stop:step, K.
    #[arg(long)]
    temp_grid: Option<String>,
    #[arg(long, value_enum)]
    ic: Option<IcArg>,
    /// Use the rotational tap v̇√χ instead of v̇/√χ for the mixed tap.
    #[arg(long)]
    ic_literal: bool,
    /// Record length, s.
    #[arg(long)]
    t_end: Option<f64>,
    /// Output sample spacing, s.
    #[arg(long)]
    dt_out: Option<f64>,
    #[arg(long)]
    eps_ths: Option<f64>,
    #[arg(long)]
    eps_sat: Option<f64>,
    /// Extended-mode threshold as a fraction of N.
    #[arg(long)]
    extended_fraction: Option<f64>,
    #[arg(long, value_enum)]
    energy: Option<EnergyArg>,
    #[arg(long, value_enum)]
    integrator: Option<IntegratorArg>,
    #[arg(long)]
    rk_tol: Option<f64>,
    #[arg(long)]
    probe_cell: Option<usize>,
    /// Mode shapes to export, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<usize>>,
    /// Keep every k-th sample in time-domain tables.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    max_freq_mhz: Option<f64>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum)]
    plot: Option<PlotArg>,
    /// Display-only heatmap exponent.
    #[arg(long)]
    gamma: Option<f64>,
}

fn build_spec(command: Command, o: Opts) -> Result<RunSpec, Error> {
    let d = RunSpec::default();
    let ic_kind = match (o.ic, o.ic_literal) {
        (Some(IcArg::Translational), _) => Some(IcKind::Translational),
        (Some(IcArg::Mixed), true) | (None, true) => Some(IcKind::MixedLiteral),
        (Some(IcArg::Mixed), false) => Some(IcKind::Mixed),
        (None, false) => None,
    };
    let spec = RunSpec {
        command,
        n: o.n.unwrap_or(d.n),
        sigma_h: o.disorder.unwrap_or(d.sigma_h),
        seed: o.seed.unwrap_or(d.seed),
        temperature: o.temp,
        temp_grid: o.temp_grid,
        ic_kind,
        t_end: o.t_end.unwrap_or(d.t_end),
        dt_out: o.dt_out.unwrap_or(d.dt_out),
        eps_ths: o.eps_ths.unwrap_or(d.eps_ths),
        eps_sat: o.eps_sat.unwrap_or(d.eps_sat),
        extended_fraction: o.extended_fraction.unwrap_or(d.extended_fraction),
        energy_convention: match o.energy {
            Some(EnergyArg::Printed) => EnergyConvention::Printed,
            Some(EnergyArg::Conserving) => EnergyConvention::Conserving,
            None => d.energy_convention,
        },
        integrator: match o.integrator {
            Some(IntegratorArg::Rk) => Integrator::Rk,
            Some(IntegratorArg::Modal) => Integrator::Modal,
            None => d.integrator,
        },
        rk_tol: o.rk_tol.unwrap_or(d.rk_tol),
        probe_cell: o.probe_cell.unwrap_or(d.probe_cell),
        mode_indices: o.modes.unwrap_or(d.mode_indices),
        series_stride: o.stride.unwrap_or(d.series_stride),
        max_freq_mhz: o.max_freq_mhz.unwrap_or(d.max_freq_mhz),
        output_dir: o.out.unwrap_or(d.output_dir),
        format: match o.format {
            Some(FormatArg::Json) => OutputFormat::Json,
            Some(FormatArg::Csv) => OutputFormat::Csv,
            None => d.format,
        },
        plot: match o.plot {
            Some(PlotArg::Svg) => PlotKind::Svg,
            Some(PlotArg::None) => PlotKind::None,
            None => d.plot,
        },
        gamma: o.gamma.unwrap_or(d.gamma),
    };
    let Some(path) = o.spec else { return Ok(spec) };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
    let file: Value = serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
    let Value::Object(overrides) = file else {
        return Err(Error::InvalidSpec("run spec must be a JSON object".into()));
    };
    let mut merged = serde_json::to_value(&spec).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    if let Value::Object(base) = &mut merged {
        base.extend(overrides);
    }
    serde_json::from_value(merged).map_err(|e| Error::InvalidSpec(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Sub::CellSweep(o) => (Command::CellSweep, o),
        Sub::Bloch(o) => (Command::Bloch, o),
        Sub::Equilibrium(o) => (Command::Equilibrium, o),
        Sub::Modes(o) => (Command::Modes, o),
        Sub::Simulate(o) => (Command::Simulate, o),
        Sub::Transmission(o) => (Command::Transmission, o),
        Sub::TransmissionSweep(o) => (Command::TransmissionSweep, o),
    };
    let spec = build_spec(command, opts);
    let result = spec.as_ref().map_err(Clone::clone).and_then(cli::run);
    match result {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(err) => {
            let record = cli::error_record(&err);
            let text = serde_json::to_string_pretty(&record).unwrap_or_default();
            if let Ok(spec) = &spec {
                if std::fs::create_dir_all(&spec.output_dir).is_ok() {
                    let _ = std::fs::write(spec.output_dir.join("error.json"), format!("{text}\n"));
                }
            }
            eprintln!("{text}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
