use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oam_swipt::config::{Scenario, ScenarioConfig};
use oam_swipt::scenario::run_scenario;
use oam_swipt::SimError;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "oam-swipt", version, about = "OAM-based SWIPT rate-energy simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario: fig2, fig3, fig5, field or custom.
    Run(Box<RunArgs>),
    /// Print the resolved configuration for a scenario in config-file syntax.
    Config {
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    scenario: String,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
}

/// One flag per config key; values use config-file syntax, lists may be comma-separated.
#[derive(Args, Default)]
#[command(rename_all = "snake_case")]
struct ParamArgs {
    #[arg(long)]
    elements: Option<String>,
    #[arg(long)]
    radius_m: Option<String>,
    #[arg(long)]
    distance_m: Option<String>,
    #[arg(long)]
    frequency_hz: Option<String>,
    #[arg(long)]
    tx_power_dbm_per_hz: Option<String>,
    #[arg(long)]
    noise_dbm_per_hz: Option<String>,
    #[arg(long)]
    conversion_noise_ratio: Option<String>,
    #[arg(long)]
    conversion_efficiency: Option<String>,
    #[arg(long)]
    bandwidth_hz: Option<String>,
    #[arg(long)]
    lateral_offset_m: Option<String>,
    #[arg(long)]
    tilt_deg: Option<String>,
    #[arg(long)]
    grid_size: Option<String>,
    #[arg(long)]
    baselines: Option<String>,
    #[arg(long)]
    lagrangian: Option<String>,
    #[arg(long)]
    conversion_noise_ratios: Option<String>,
    #[arg(long)]
    distances_m: Option<String>,
    /// e.g. `0:0,0.5:5,1:10` (offset m : tilt deg).
    #[arg(long)]
    misalignments: Option<String>,
    #[arg(long)]
    field_z_m: Option<String>,
    #[arg(long)]
    field_extent_m: Option<String>,
    #[arg(long)]
    field_resolution: Option<String>,
    #[arg(long)]
    field_modes: Option<String>,
    #[arg(long)]
    aperture_radius_m: Option<String>,
    #[arg(long)]
    parallel: Option<String>,
}

impl ParamArgs {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("elements", &self.elements),
            ("radius_m", &self.radius_m),
            ("distance_m", &self.distance_m),
            ("frequency_hz", &self.frequency_hz),
            ("tx_power_dbm_per_hz", &self.tx_power_dbm_per_hz),
            ("noise_dbm_per_hz", &self.noise_dbm_per_hz),
            ("conversion_noise_ratio", &self.conversion_noise_ratio),
            ("conversion_efficiency", &self.conversion_efficiency),
            ("bandwidth_hz", &self.bandwidth_hz),
            ("lateral_offset_m", &self.lateral_offset_m),
            ("tilt_deg", &self.tilt_deg),
            ("grid_size", &self.grid_size),
            ("baselines", &self.baselines),
            ("lagrangian", &self.lagrangian),
            ("conversion_noise_ratios", &self.conversion_noise_ratios),
            ("distances_m", &self.distances_m),
            ("misalignments", &self.misalignments),
            ("field_z_m", &self.field_z_m),
            ("field_extent_m", &self.field_extent_m),
            ("field_resolution", &self.field_resolution),
            ("field_modes", &self.field_modes),
            ("aperture_radius_m", &self.aperture_radius_m),
            ("parallel", &self.parallel),
        ]
    }
}

fn resolve(scenario: &str, file: Option<&PathBuf>) -> Result<ScenarioConfig, SimError> {
    let scenario: Scenario = scenario.parse()?;
    let mut cfg = ScenarioConfig::new(scenario);
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config {
            key: "--config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        cfg.apply_text(&text)?;
        // the positional scenario wins over a `scenario` key in the file
        cfg.apply_override("scenario", &format!("\"{}\"", scenario.name()))?;
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), SimError> {
    let mut cfg = resolve(&args.scenario, args.config.as_ref())?;
    for (key, value) in args.params.pairs() {
        if let Some(v) = value {
            cfg.apply_override(key, v)?;
        }
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.samples = samples;
    }
    if let Some(format) = &args.format {
        cfg.apply_override("formats", format)?;
    }
    let out = run_scenario(&cfg)?;
    let mut summary = String::new();
    for c in &out.bundle.curves {
        let _ = writeln!(
            summary,
            "{:<9} {:<12} {}={:<10} max rate {:.6} bits/s/Hz, max harvested {:.6e} W/Hz",
            c.baseline.name(),
            c.method.name(),
            c.param_name,
            c.param_value,
            c.region.max_rate(),
            c.region.q_max()
        );
    }
    for f in &out.bundle.fields {
        let _ = writeln!(
            summary,
            "mode {} (order {}): ring {:.4} m, captured {:.4e}, on-axis {:.3e}",
            f.mode, f.mode_order, f.ring_radius_m, f.captured_power_rel_m2, f.on_axis_intensity_rel
        );
    }
    for file in &out.files {
        let _ = writeln!(summary, "wrote {}", file.display());
    }
    print_quietly(&summary);
    Ok(())
}

// a closed pipe (e.g. `| head`) is not an error worth reporting
fn print_quietly(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(*args),
        Command::Config { scenario, config } => resolve(&scenario, config.as_ref()).map(|cfg| {
            print_quietly(&cfg.to_config_text());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                SimError::Config { .. } => EXIT_CONFIG,
                SimError::Io { .. } => EXIT_IO,
                _ => EXIT_RUNTIME,
            })
        }
    }
}
