//! `synopsis`: command-line front end for the tube-based video synopsis
//! engine. The online phase (`track`) turns raw frames into a tube
//! database; the response phase (`group`, `schedule`, `sweep`, `render`,
//! `energy`) builds and inspects synopses from it. `synth` generates
//! scripted test scenes.
//!
//! Every subcommand prints one machine-readable JSON summary to stdout.
//! Exit codes: 0 success, 1 invalid input, 2 runtime failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use synopsis_core::energy::total_energy;
use synopsis_core::grouping::group_tubes;
use synopsis_core::io;
use synopsis_core::render;
use synopsis_core::scheduler::{evaluate_schedule, minimize_length, sweep, SweepAxis};
use synopsis_core::tracker::{track_frames, GrayFrame};
use synopsis_core::tube::{GroupingMode, SigmaMode};
use synopsis_core::{
    EnergyBreakdown, Error, Fps, Params, Scalar, SolverOptions, SynopsisSchedule, TrackerConfig,
};

#[derive(Parser)]
#[command(
    name = "synopsis",
    version,
    about = "Tube-based video synopsis: track objects, group tubes, pack them in time, render the result",
    after_help = "Set RUST_LOG=info (or debug) for progress logging."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Literal,
    Transitive,
}

impl From<ModeArg> for GroupingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Literal => GroupingMode::Literal,
            ModeArg::Transitive => GroupingMode::Transitive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaArg {
    Area,
    SqrtArea,
}

impl From<SigmaArg> for SigmaMode {
    fn from(m: SigmaArg) -> Self {
        match m {
            SigmaArg::Area => SigmaMode::Area,
            SigmaArg::SqrtArea => SigmaMode::SqrtArea,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Alpha,
    Beta,
    Budget,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Alpha => SweepAxis::Alpha,
            AxisArg::Beta => SweepAxis::Beta,
            AxisArg::Budget => SweepAxis::Budget,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderMode {
    Boxes,
    Stitch,
}

/// Shared scheduling/grouping parameter flags.
#[derive(clap::Args, Clone, Copy)]
struct ParamFlags {
    /// Spatio-temporal grouping threshold.
    #[arg(long, default_value_t = 0.0)]
    alpha: Scalar,
    /// Chronological grouping threshold in frames.
    #[arg(long, default_value_t = 0.0)]
    beta: Scalar,
    /// Max allowed per-frame box intersection (pixels^2) when packing.
    #[arg(long, default_value_t = 0.0)]
    budget: Scalar,
    /// Constant cost for violating chronological order.
    #[arg(long, default_value_t = 1.0)]
    chrono_cost: Scalar,
    /// Weight of the collision term in the energy.
    #[arg(long, default_value_t = 1.0)]
    collision_weight: Scalar,
    /// Grouping mode.
    #[arg(long, value_enum, default_value = "transitive")]
    mode: ModeArg,
    /// Object-size normalization in the interaction distance.
    #[arg(long, value_enum, default_value = "sqrt-area")]
    sigma_mode: SigmaArg,
}

impl ParamFlags {
    fn params(&self) -> Params {
        Params {
            alpha: self.alpha,
            beta: self.beta,
            chrono_constant: self.chrono_cost,
            collision_weight: self.collision_weight,
            collision_budget: self.budget,
            grouping_mode: self.mode.into(),
            sigma_mode: self.sigma_mode.into(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Online phase: track objects in a PGM frame sequence into a tube database.
    Track {
        /// Directory of P5 .pgm frames, ordered by filename.
        frames_dir: PathBuf,
        /// Output tube database (JSON).
        #[arg(short, long)]
        output: PathBuf,
        /// Background blend rate per frame.
        #[arg(long, default_value_t = 0.05)]
        learning_rate: Scalar,
        /// Foreground threshold in standard deviations.
        #[arg(long, default_value_t = 3.0)]
        k_sigma: Scalar,
        /// Minimum accepted component area in pixels.
        #[arg(long, default_value_t = 20)]
        min_area: u64,
        /// Max center distance for matching detections to tracks.
        #[arg(long, default_value_t = 40.0)]
        gating: Scalar,
        /// Consecutive misses before a track terminates.
        #[arg(long, default_value_t = 5)]
        max_missed: u32,
        /// Shortest track kept, in frames.
        #[arg(long, default_value_t = 3)]
        min_length: u32,
        /// Frame rate, `N` or `N/D`.
        #[arg(long, default_value = "30", value_parser = parse_fps)]
        fps: Fps,
    },
    /// Partition a tube database into groups.
    Group {
        tubes: PathBuf,
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Response phase: group tubes and pack them into a minimal-length synopsis.
    Schedule {
        tubes: PathBuf,
        #[command(flatten)]
        params: ParamFlags,
        /// Output schedule (JSON).
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Sweep a threshold and record (value, length, energy) per sample.
    Sweep {
        tubes: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated ascending values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<Scalar>,
        #[command(flatten)]
        params: ParamFlags,
        /// Output CSV.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Render a schedule to PPM frames.
    Render {
        tubes: PathBuf,
        schedule: PathBuf,
        #[arg(long, value_enum, default_value = "boxes")]
        mode: RenderMode,
        /// Output directory for frame_%06d.ppm.
        #[arg(short, long)]
        output: PathBuf,
        /// Original frames (PGM/PPM) to crop object patches from; required for stitch mode.
        #[arg(long)]
        frames_dir: Option<PathBuf>,
        /// Background image (PGM/PPM); defaults to a flat mid-gray canvas.
        #[arg(long)]
        background: Option<PathBuf>,
        /// Poisson solver residual tolerance.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: Scalar,
        /// Poisson solver iteration cap.
        #[arg(long, default_value_t = 10_000)]
        max_iters: u32,
    },
    /// Generate a synthetic scene from a scene-spec JSON file.
    Synth {
        spec: PathBuf,
        /// Output tube database (JSON).
        #[arg(short, long)]
        output: PathBuf,
        /// Also render the scene as PGM frames into this directory.
        #[arg(long)]
        frames: Option<PathBuf>,
    },
    /// Recompute and print the energy breakdown of a schedule.
    Energy { tubes: PathBuf, schedule: PathBuf },
}

fn parse_fps(s: &str) -> Result<Fps, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: u32 = num.parse().map_err(|_| format!("bad fps numerator {num:?}"))?;
    let den: u32 = den.parse().map_err(|_| format!("bad fps denominator {den:?}"))?;
    Fps::new(num, den).map_err(|e| e.to_string())
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_runtime() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn validation(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own message includes the usage text.
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn require_exists(path: &Path) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(validation(format!("{} does not exist", path.display())))
    }
}

fn energy_json(e: &EnergyBreakdown) -> serde_json::Value {
    json!({
        "activity": e.activity,
        "temporal": e.temporal,
        "chrono": e.chrono,
        "collision": e.collision,
        "total": e.total,
    })
}

fn run(command: Command) -> Result<String, Failure> {
    let summary = match command {
        Command::Track {
            frames_dir,
            output,
            learning_rate,
            k_sigma,
            min_area,
            gating,
            max_missed,
            min_length,
            fps,
        } => {
            require_exists(&frames_dir)?;
            let frames = load_pgm_sequence(&frames_dir)?;
            log::info!("tracking {} frames", frames.len());
            let cfg = TrackerConfig {
                learning_rate,
                k_sigma,
                min_area,
                gating_radius: gating,
                max_missed,
                min_length,
                fps,
                ..TrackerConfig::default()
            };
            let db = track_frames(&frames, &cfg)?;
            io::save_tube_db(&db, &output)?;
            json!({
                "command": "track",
                "frames": frames.len(),
                "tubes": db.len(),
                "output": output,
            })
        }

        Command::Group { tubes, params } => {
            require_exists(&tubes)?;
            let db = io::load_tube_db(&tubes)?;
            let p = params.params();
            let g = group_tubes(&db, &p)?;
            json!({
                "command": "group",
                "tubes": db.len(),
                "groups": g.groups.len(),
                "alpha": g.alpha,
                "beta": g.beta,
                "mode": g.mode.to_string(),
                "members": g.groups.iter()
                    .map(|grp| grp.members().map(|id| id.0).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            })
        }

        Command::Schedule {
            tubes,
            params,
            output,
        } => {
            require_exists(&tubes)?;
            let db = io::load_tube_db(&tubes)?;
            let p = params.params();
            let g = group_tubes(&db, &p)?;
            let s = minimize_length(&db, &g, &p)?;
            io::save_schedule(&s, &db, &output)?;
            log::info!(
                "packed {} groups into {} frames (original {})",
                g.groups.len(),
                s.length,
                db.original_length()
            );
            json!({
                "command": "schedule",
                "tubes": db.len(),
                "groups": g.groups.len(),
                "length": s.length,
                "original_length": db.original_length(),
                "energy": energy_json(&s.energy),
                "output": output,
            })
        }

        Command::Sweep {
            tubes,
            axis,
            values,
            params,
            output,
        } => {
            require_exists(&tubes)?;
            let db = io::load_tube_db(&tubes)?;
            let rows = sweep(&db, axis.into(), &values, &params.params())?;
            io::export_curve_csv(&rows, &output)?;
            json!({
                "command": "sweep",
                "axis": SweepAxis::from(axis).to_string(),
                "samples": rows.len(),
                "output": output,
            })
        }

        Command::Render {
            tubes,
            schedule,
            mode,
            output,
            frames_dir,
            background,
            tolerance,
            max_iters,
        } => {
            require_exists(&tubes)?;
            require_exists(&schedule)?;
            let db = io::load_tube_db(&tubes)?;
            let s: SynopsisSchedule = io::load_schedule(&schedule, &db)?;
            let bg = match &background {
                Some(path) => {
                    require_exists(path)?;
                    io::netpbm::read_rgb_any(path)?
                }
                None => {
                    render::RgbImage::filled(db.scene_width(), db.scene_height(), [96, 96, 96])
                }
            };
            let frames = match mode {
                RenderMode::Boxes => render::render_boxes(&db, &s, &bg)?,
                RenderMode::Stitch => {
                    let dir = frames_dir
                        .ok_or_else(|| validation("--frames-dir is required for stitch mode"))?;
                    require_exists(&dir)?;
                    let solver = SolverOptions {
                        max_iters,
                        tolerance,
                    };
                    render::render_stitched(&db, &s, &bg, &dir, &solver)?
                }
            };
            std::fs::create_dir_all(&output)
                .map_err(|e| Error::Io {
                    path: output.display().to_string(),
                    source: e,
                })
                .map_err(Failure::from)?;
            for (i, frame) in frames.iter().enumerate() {
                let path = output.join(format!("frame_{i:06}.ppm"));
                io::netpbm::write_ppm(frame, &path)?;
            }
            json!({
                "command": "render",
                "mode": match mode { RenderMode::Boxes => "boxes", RenderMode::Stitch => "stitch" },
                "frames": frames.len(),
                "output": output,
            })
        }

        Command::Synth {
            spec,
            output,
            frames,
        } => {
            require_exists(&spec)?;
            let text = std::fs::read_to_string(&spec).map_err(|e| Error::Io {
                path: spec.display().to_string(),
                source: e,
            })?;
            let scene_spec: io::SceneSpec = serde_json::from_str(&text)
                .map_err(|e| validation(format!("{}: {e}", spec.display())))?;
            let scene = io::synth_scene(&scene_spec)?;
            io::save_tube_db(&scene.db, &output)?;
            let mut rendered = 0usize;
            if let Some(dir) = &frames {
                std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                    path: dir.display().to_string(),
                    source: e,
                })?;
                for (i, frame) in io::render_scene_frames(&scene_spec)?.iter().enumerate() {
                    io::netpbm::write_pgm(frame, &dir.join(format!("frame_{i:06}.pgm")))?;
                    rendered += 1;
                }
            }
            json!({
                "command": "synth",
                "objects": scene_spec.objects.len(),
                "tubes": scene.db.len(),
                "output": output,
                "frames_rendered": rendered,
            })
        }

        Command::Energy { tubes, schedule } => {
            require_exists(&tubes)?;
            require_exists(&schedule)?;
            let db = io::load_tube_db(&tubes)?;
            let s: SynopsisSchedule = io::load_schedule(&schedule, &db)?;
            // Recompute from the mapping rather than trusting the file.
            let recomputed = total_energy(&db, &s.mapping, &s.params, &[])?;
            let rescored = evaluate_schedule(&db, &s.mapping, &s.params)?;
            json!({
                "command": "energy",
                "length": rescored.length,
                "energy": energy_json(&recomputed),
                "pairs": recomputed.per_pair.len(),
            })
        }
    };
    Ok(summary.to_string())
}

/// All .pgm files in a directory, sorted by filename.
fn load_pgm_sequence(dir: &Path) -> Result<Vec<GrayFrame>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|s| s.to_str()) == Some("pgm"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(validation(format!(
            "no .pgm frames found in {}",
            dir.display()
        )));
    }
    let mut frames = Vec::with_capacity(files.len());
    for f in &files {
        frames.push(io::netpbm::read_pgm(f)?);
    }
    Ok(frames)
}
