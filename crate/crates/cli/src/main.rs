// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use facecue::econ::SeType;
use facecue::ingest::Chair;
use facecue::market::Units;
use facecue::pipeline::{compare_deepfake, write_outputs, Outputs, Run};
use facecue::synth::{generate, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "facecue", version, about = "Facial-cue event-study pipeline for press-conference minute data")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for per-meeting work; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Units for market changes.
    #[arg(long, global = true)]
    units: Option<Units>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Minimum chair similarity for a frame to be kept.
    #[arg(long, global = true)]
    similarity_threshold: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every input file and the regression specs.
    Validate,
    /// Facial, text and market feature tables.
    Features,
    /// Minute-level panel with stage audit.
    BuildPanel,
    /// Fit regression tables.
    Regress {
        /// Spec files; defaults to those listed in the config.
        #[arg(long = "spec")]
        specs: Vec<PathBuf>,
        /// Standard errors for every column: classical, hc1 or cluster:meeting.
        #[arg(long)]
        se: Option<SeType>,
    },
    /// Min-max normalized emotion changes between original and face-swapped clips.
    CompareDeepfake {
        /// Frame scores of an original clip; pairs with the matching --swapped.
        #[arg(long = "original", required = true)]
        originals: Vec<PathBuf>,
        #[arg(long = "swapped", required = true)]
        swapped: Vec<PathBuf>,
    },
    /// Meeting nearest the centroid of each chair's emotion profiles.
    SelectRepresentative {
        #[arg(long)]
        chair: Option<Chair>,
    },
    /// Write a seeded synthetic corpus and config.
    GenerateSynthetic {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Two short meetings per chair instead of the full calendar.
        #[arg(long)]
        small: bool,
        /// Spec paths written into the generated config, relative to it.
        #[arg(long = "spec")]
        specs: Vec<String>,
    },
}

fn load_run(cli: &Cli) -> Result<Run> {
    let path = cli.config.as_deref().context("--config is required for this command")?;
    let mut run = Run::load(path).with_context(|| format!("loading {}", path.display()))?;
    let mut overrides = Vec::new();
    if let Some(u) = cli.units {
        run.cfg.market.units = u;
        overrides.push(format!("units={u:?}"));
    }
    if let Some(th) = cli.similarity_threshold {
        run.cfg.frames.similarity_threshold = th;
        run.cfg.frames.validate()?;
        overrides.push(format!("similarity_threshold={th}"));
    }
    if !overrides.is_empty() {
        run.provenance.push_bytes("overrides", overrides.join(";").as_bytes());
    }
    Ok(run)
}

fn out_dir(cli: &Cli, run: Option<&Run>) -> Result<PathBuf> {
    match (&cli.out, run) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(r)) => Ok(r.cfg.output_dir()),
        (None, None) => bail!("--out is required for this command"),
    }
}

fn emit(dir: &Path, outputs: &Outputs) -> Result<()> {
    write_outputs(dir, outputs)?;
    for name in outputs.keys() {
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Validate => {
            let run = load_run(cli)?;
            let (errors, report) = run.validate();
            print!("{report}");
            let mut out = Outputs::new();
            out.insert("validation_report.txt".into(), report);
            write_outputs(&out_dir(cli, Some(&run))?, &out)?;
            return Ok(if errors == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Features => {
            let run = load_run(cli)?;
            let (_, feats, out) = run.features()?;
            for w in &feats.warnings {
                log::warn!("{w}");
            }
            emit(&out_dir(cli, Some(&run))?, &out)?;
        }
        Command::BuildPanel => {
            let run = load_run(cli)?;
            let (panel, out) = run.build_panel()?;
            if panel.is_empty() {
                log::warn!("panel is empty");
            }
            print!("{}", panel.audit.to_text());
            emit(&out_dir(cli, Some(&run))?, &out)?;
        }
        Command::Regress { specs, se } => {
            let run = load_run(cli)?;
            let out = run.regress(specs, *se)?;
            for (name, body) in &out {
                if name.ends_with(".txt") {
                    print!("{body}");
                }
            }
            emit(&out_dir(cli, Some(&run))?, &out)?;
        }
        Command::CompareDeepfake { originals, swapped } => {
            if originals.len() != swapped.len() {
                bail!("{} --original paths but {} --swapped paths", originals.len(), swapped.len());
            }
            let pairs: Vec<_> = originals.iter().cloned().zip(swapped.iter().cloned()).collect();
            let out = compare_deepfake(&pairs)?;
            print!("{}", out["deepfake_deltas.txt"]);
            let run = match &cli.config {
                Some(_) => Some(load_run(cli)?),
                None => None,
            };
            emit(&out_dir(cli, run.as_ref())?, &out)?;
        }
        Command::SelectRepresentative { chair } => {
            let run = load_run(cli)?;
            let (sels, out) = run.select_representative(*chair)?;
            for s in &sels {
                print!("{}", s.to_text());
            }
            emit(&out_dir(cli, Some(&run))?, &out)?;
        }
        Command::GenerateSynthetic { seed, small, specs } => {
            let dir = out_dir(cli, None)?;
            let cfg = if *small { SynthConfig::small(*seed) } else { SynthConfig { seed: *seed, ..SynthConfig::default() } };
            let corpus = generate(&cfg)?;
            corpus.write_to(&dir, specs)?;
            println!(
                "wrote {} meetings, {} frames, {} segments, {} bars to {}",
                corpus.meetings.len(),
                corpus.frames.len(),
                corpus.transcript.len(),
                corpus.bars.len(),
                dir.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
