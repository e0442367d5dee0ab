//! `iosbench`: batch experiments on IOS-aided links.
//!
//! Failures print one line `error[<kind>]: <message>` on stderr and exit
//! with 2 (config), 3 (physics/domain) or 4 (I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ios_core::workbench::{
    random_scenario, rng_for, run_experiment, scenario_to_text, ArtifactWriter, ConfigSource,
    Experiment, ExperimentSpec,
};
use ios_core::{
    BeamDesign, ElementState, Error, ErrorKind, InteractionMode, ResponseModel, Side, SidedAngle,
    SurfaceConfiguration, SweepGrid, Verdict,
};

#[derive(Parser, Debug)]
#[command(name = "iosbench", version, about = "Channel and beam experiments for intelligent omni-surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Angular step of the pattern sweep, degrees.
    #[arg(long, default_value_t = 1.0)]
    grid_step: f64,
    /// Response model: ideal or angle-aware.
    #[arg(long, default_value = "angle-aware")]
    model: String,
    /// Seed for anything random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override a scenario value, e.g. `--set element.exponent_n=0`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Sweep the whole hemisphere instead of the phi = 0/180 plane.
    #[arg(long)]
    hemisphere: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Far-field pattern for a fixed or designed configuration.
    Pattern {
        #[command(flatten)]
        common: Common,
        /// Incident direction `theta,phi[,side]`.
        #[arg(long)]
        incident: String,
        /// reflect or refract.
        #[arg(long, default_value = "reflect")]
        mode: String,
        /// on, off, random, a bit string, or `steer:theta,phi[,side]`.
        #[arg(long, default_value = "on")]
        config: String,
    },
    /// Design a configuration toward a target and report the beam.
    Beamform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        incident: String,
        #[arg(long)]
        target: String,
    },
    /// Downlink vs uplink channel reciprocity.
    RecipChannel {
        #[command(flatten)]
        common: Common,
        /// on, off, random or a bit string.
        #[arg(long, default_value = "random")]
        config: String,
        /// Run over this many seeded random scenarios instead of --scenario.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Beam round trip under a fixed configuration.
    RecipBeam {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "60,0,reflection")]
        incident: String,
        #[arg(long, default_value = "refract")]
        mode: String,
        /// Steering target; by default the best-performing sweep direction.
        #[arg(long)]
        target: Option<String>,
        /// Fixed configuration bits instead of a design.
        #[arg(long, conflicts_with = "target")]
        config: Option<String>,
    },
    /// Ideal-phase vs angle-aware beamforming.
    CompareModels {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        incident: String,
        #[arg(long)]
        target: String,
    },
    /// Two-antenna S21/S12 campaign.
    S21Campaign {
        #[command(flatten)]
        common: Common,
        /// Antenna distance from the surface center, meters.
        #[arg(long, default_value_t = 1.0)]
        range: f64,
    },
    /// Write seeded random scenario files.
    GenRandom {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

fn parse_angle(text: &str, default_side: Side) -> ios_core::Result<SidedAngle> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::Config(format!("bad angle '{text}': '{s}' is not a number")))
    };
    let (t, p, side) = match parts.as_slice() {
        [t, p] => (num(t)?, num(p)?, default_side),
        [t, p, side] => (num(t)?, num(p)?, side.parse()?),
        _ => {
            return Err(Error::Config(format!(
                "bad angle '{text}': expected theta,phi[,side]"
            )))
        }
    };
    SidedAngle::new(t, p, side).map_err(|e| Error::Config(format!("bad angle '{text}': {e}")))
}

fn parse_config(text: &str, seed: u64) -> ios_core::Result<ConfigSource> {
    Ok(match text.trim() {
        "on" => ConfigSource::Uniform(ElementState::On),
        "off" => ConfigSource::Uniform(ElementState::Off),
        "random" => ConfigSource::Random { seed },
        bits => ConfigSource::Bits(bits.parse::<SurfaceConfiguration>()?),
    })
}

impl Common {
    fn model(&self) -> ios_core::Result<ResponseModel> {
        self.model.parse()
    }

    fn grid(&self) -> SweepGrid {
        if self.hemisphere {
            SweepGrid::hemisphere(self.grid_step)
        } else {
            SweepGrid::plane_cut(self.grid_step)
        }
    }

    fn overrides(&self) -> ios_core::Result<Vec<(String, String)>> {
        self.overrides
            .iter()
            .map(|o| {
                o.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Config(format!("--set '{o}': expected section.key=value")))
            })
            .collect()
    }

    fn spec(&self, experiment: Experiment) -> ios_core::Result<ExperimentSpec> {
        Ok(ExperimentSpec {
            experiment,
            scenario_path: self.scenario.clone(),
            overrides: self.overrides()?,
            out_dir: self.out.clone(),
        })
    }
}

fn run(cli: Cli) -> ios_core::Result<Option<Verdict>> {
    let spec = match &cli.command {
        Command::Pattern {
            common,
            incident,
            mode,
            config,
        } => {
            let incident = parse_angle(incident, Side::Reflection)?;
            let mode: InteractionMode = mode.parse()?;
            let config = match config.strip_prefix("steer:") {
                Some(target) => ConfigSource::Design {
                    target: parse_angle(target, mode.departure_side(incident.side))?,
                    model: common.model()?,
                },
                None => parse_config(config, common.seed)?,
            };
            common.spec(Experiment::Pattern {
                incident,
                mode,
                config,
                grid: common.grid(),
            })?
        }
        Command::Beamform {
            common,
            incident,
            target,
        } => {
            let incident = parse_angle(incident, Side::Reflection)?;
            common.spec(Experiment::Beamform {
                incident,
                target: parse_angle(target, incident.side)?,
                model: common.model()?,
                grid: common.grid(),
            })?
        }
        Command::RecipChannel {
            common,
            config,
            random,
            tolerance,
        } => match random {
            Some(count) => common.spec(Experiment::ChannelReciprocityCampaign {
                count: *count,
                seed: common.seed,
                tolerance: *tolerance,
            })?,
            None => common.spec(Experiment::ChannelReciprocity {
                config: parse_config(config, common.seed)?,
                tolerance: *tolerance,
            })?,
        },
        Command::RecipBeam {
            common,
            incident,
            mode,
            target,
            config,
        } => {
            let incident = parse_angle(incident, Side::Reflection)?;
            let mode: InteractionMode = mode.parse()?;
            let model = common.model()?;
            let design = match (target, config) {
                (Some(t), _) => BeamDesign::Target {
                    target: parse_angle(t, mode.departure_side(incident.side))?,
                    model,
                },
                (None, Some(bits)) => BeamDesign::Fixed(bits.parse()?),
                (None, None) => BeamDesign::BestTarget { model },
            };
            common.spec(Experiment::BeamReciprocity {
                incident,
                mode,
                design,
                grid: common.grid(),
            })?
        }
        Command::CompareModels {
            common,
            incident,
            target,
        } => {
            let incident = parse_angle(incident, Side::Reflection)?;
            common.spec(Experiment::ModelCompare {
                incident,
                target: parse_angle(target, incident.side)?,
                grid: common.grid(),
            })?
        }
        Command::S21Campaign { common, range } => common.spec(Experiment::S21Campaign {
            range_m: *range,
            model: common.model()?,
        })?,
        Command::GenRandom { common, count } => {
            let mut rng = rng_for(common.seed);
            let mut writer = ArtifactWriter::new();
            for i in 0..*count {
                let scn = random_scenario(&mut rng);
                let text = format!(
                    "# random scenario {i}, seed {}\n\n{}",
                    common.seed,
                    scenario_to_text(&scn, None)
                );
                writer.create(common.out.join(format!("random_{i:04}.ini")), text);
            }
            let written = writer.commit()?;
            println!("wrote {} scenario files to {}", written.len(), common.out.display());
            return Ok(None);
        }
    };
    let outcome = run_experiment(&spec)?;
    println!("{}", outcome.summary);
    for path in &outcome.artifacts {
        println!("  {}", path.display());
    }
    Ok(outcome.verdict)
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Domain => 3,
        ErrorKind::Io => 4,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Config => "config",
        ErrorKind::Domain => "domain",
        ErrorKind::Io => "io",
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[config]: {}", one_line(first.trim_start_matches("error: ")));
            eprintln!("{rendered}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(Some(Verdict::Fail)) => {
            eprintln!("error[domain]: reciprocity check failed (artifacts kept)");
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            eprintln!("error[{}]: {}", kind_name(kind), one_line(&e.to_string()));
            ExitCode::from(exit_code(kind))
        }
    }
}
