use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use covplan::pipeline::{
    load_map, plan_mission, render_svg, stage_assign, stage_partition, stage_route, stage_trails, validate_mission_with,
    Config, FieldMap, Layer, MissionPlan, StageFile,
};
use covplan::{Error, Result};

/// Coverage mission planner for a UAV fleet and its support car.
#[derive(Parser)]
#[command(name = "covplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// GeoJSON map with farmland, obstacle and road features.
    #[arg(long)]
    map: PathBuf,
    /// TOML config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write the plan.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Include wall-clock stage timings in the plan.
        #[arg(long)]
        timings: bool,
    },
    /// Split the field into sub-areas.
    Partition {
        #[command(flatten)]
        common: Common,
    },
    /// Lay coverage trails in a partition stage file.
    Trails {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Assign trails and refine access points in a trails stage file.
    Assign {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Choose car spots and the car tour for an assign stage file, giving a plan.
    Route {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Check a plan against its map and fleet.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Draw a plan as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
        /// field, partition, trails, routes, car or all.
        #[arg(long, default_value = "all")]
        layer: Layer,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn setup(c: &Common) -> Result<(FieldMap, Config)> {
    let cfg = match &c.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let map = load_map(&c.map)?;
    for w in &map.warnings {
        log::warn!("{w}");
    }
    Ok((map, cfg))
}

/// Returns whether the command's own check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Plan { common, timings } => {
            let (map, cfg) = setup(&common)?;
            let plan = plan_mission(&map, &cfg, common.seed)?;
            emit(&common.out, &plan.to_json(timings))?;
        }
        Command::Partition { common } => {
            let (map, cfg) = setup(&common)?;
            emit(&common.out, &stage_partition(&map, &cfg, common.seed)?.to_json())?;
        }
        Command::Trails { common, input } => {
            let (_, cfg) = setup(&common)?;
            let f = StageFile::from_json(&read(&input)?)?;
            emit(&common.out, &stage_trails(&f, &cfg)?.to_json())?;
        }
        Command::Assign { common, input } => {
            let (_, cfg) = setup(&common)?;
            let f = StageFile::from_json(&read(&input)?)?;
            emit(&common.out, &stage_assign(&f, &cfg)?.to_json())?;
        }
        Command::Route { common, input } => {
            let (map, cfg) = setup(&common)?;
            let f = StageFile::from_json(&read(&input)?)?;
            emit(&common.out, &stage_route(&f, &map, &cfg)?.to_json(false))?;
        }
        Command::Validate { common, plan } => {
            let (map, cfg) = setup(&common)?;
            let plan = MissionPlan::from_json(&read(&plan)?)?;
            let report = validate_mission_with(&plan, &map, &cfg.fleet, cfg.validation.samples_per_subarea);
            emit(&common.out, &report.summary())?;
            return Ok(report.passed);
        }
        Command::Render { common, plan, layer } => {
            let (map, _) = setup(&common)?;
            let plan = MissionPlan::from_json(&read(&plan)?)?;
            emit(&common.out, &render_svg(&plan, &map, layer))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
