//! `afford3d`: surround-view rendering, element annotation, chain-of-thought
//! reasoning, and scoring for 3D affordance tasks.
//!
//! Exit codes: 0 success, 1 input error, 2 backend/protocol failures present
//! in the batch.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use afford3d_cli::commands::{cmd_annotate, cmd_eval, cmd_render, cmd_run};
use afford3d_cli::config::{ConfigFlags, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "afford3d",
    version,
    about = "Fine-grained 3D affordance reasoning pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the surround-view sweep of a scene.
    Render(ConfigFlags),
    /// Project element proposals into the rendered views.
    Annotate(ConfigFlags),
    /// Run the three-step reasoning pipeline over a tasks file.
    Run(ConfigFlags),
    /// Score predictions against ground truth.
    Eval(ConfigFlags),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };

    let (flags, runner): (&ConfigFlags, fn(&PipelineConfig) -> anyhow::Result<i32>) =
        match &cli.command {
            Command::Render(f) => (f, |cfg| cmd_render(cfg).map(|()| 0)),
            Command::Annotate(f) => (f, |cfg| cmd_annotate(cfg).map(|()| 0)),
            Command::Run(f) => (f, |cfg| {
                cmd_run(cfg).map(|failures| if failures > 0 { 2 } else { 0 })
            }),
            Command::Eval(f) => (f, |cfg| {
                cmd_eval(cfg).map(|table| {
                    print!("{table}");
                    0
                })
            }),
        };

    let code = PipelineConfig::resolve(flags)
        .and_then(|cfg| runner(&cfg))
        .unwrap_or_else(|e| {
            eprintln!("error: {e:#}");
            1
        });
    std::process::exit(code);
}
