//! Command-line front end for `weakval-core`.
//!
//! Exit codes: 0 success, 2 bad arguments or specs, 3 math-domain error
//! (orthogonal post-selection, exceptional point, invalid parameter, ...),
//! 4 a cross-check between two routes failed, 1 I/O failure.

pub mod commands;
pub mod output;
pub mod specs;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{ChannelArgs, DiracArgs, ExpectationArgs, Fig1Args, Fig2Args, PtArgs, RamanujanArgs};
use output::{Format, RunManifest, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Math(weakval_core::Error),
    #[error("{0}")]
    Invariant(weakval_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<weakval_core::Error> for CliError {
    fn from(e: weakval_core::Error) -> Self {
        if e.is_invariant_violation() {
            CliError::Invariant(e)
        } else {
            CliError::Math(e)
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Math(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "weakval",
    version,
    about = "Expectation values from weak values and polar decomposition"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here instead of stdout; a `<out>.manifest.json`
    /// sidecar records command, parameters, seed, version and timestamp.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed for Monte Carlo runs and random bases/channels.
    #[arg(long, global = true, env = "WEAKVAL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// ⟨ψ|A|ψ⟩ via the polar weak-value route, exactly or by simulated pointer readings.
    ///
    /// Columns: method, expect_re, expect_im, direct_re, direct_im, weak_re,
    /// weak_im, overlap_re, overlap_im, se_re, se_im, n_trials, n_postselected.
    #[command(allow_negative_numbers = true)]
    Expectation(ExpectationArgs),
    /// Creation/annihilation uncertainty table in a phase state.
    ///
    /// Columns: s, lhs, rhs, slack, matrix_lhs, matrix_rhs, polar_rhs.
    #[command(allow_negative_numbers = true)]
    Fig1(Fig1Args),
    /// Amplitude-damping bounds on the Kraus deviation product.
    ///
    /// Columns: p, lower, product, upper, lower_weak.
    #[command(allow_negative_numbers = true)]
    Fig2(Fig2Args),
    /// Square-root sums recovered from ⟨a†⟩ and their remainder.
    ///
    /// Columns: s, direct_sum, formula_minus_phi, phi, imag_residue.
    #[command(allow_negative_numbers = true)]
    Ramanujan(RamanujanArgs),
    /// Dirac quasi-distribution ⟨ψ|Π_i(B)Π_j(C)|ψ⟩ over all (i, j).
    ///
    /// Columns: i, j, re, im, protocol_undefined.
    #[command(allow_negative_numbers = true)]
    Dirac(DiracArgs),
    /// Two-level PT-symmetric Hamiltonian: spectrum and ⟨H⟩ by three routes.
    ///
    /// Columns: eps_plus_re, eps_plus_im, eps_minus_re, eps_minus_im, broken,
    /// route, expect_re, expect_im, general_re, general_im, printed_re,
    /// printed_im, direct_re, direct_im.
    #[command(allow_negative_numbers = true)]
    Pt(PtArgs),
    /// Channel fidelity by Kraus weak values and by the output state.
    ///
    /// Columns: fidelity, fidelity_weak, variance_sum, upper, product, lower,
    /// fidelity_mc, fidelity_mc_se.
    #[command(allow_negative_numbers = true)]
    Channel(ChannelArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Expectation(_) => "expectation",
            Command::Fig1(_) => "fig1",
            Command::Fig2(_) => "fig2",
            Command::Ramanujan(_) => "ramanujan",
            Command::Dirac(_) => "dirac",
            Command::Pt(_) => "pt",
            Command::Channel(_) => "channel",
        }
    }
}

pub fn run_command(command: &Command, seed: u64) -> Result<Table, CliError> {
    match command {
        Command::Expectation(a) => commands::expectation(a, seed),
        Command::Fig1(a) => commands::fig1(a),
        Command::Fig2(a) => commands::fig2(a),
        Command::Ramanujan(a) => commands::ramanujan(a),
        Command::Dirac(a) => commands::dirac(a, seed),
        Command::Pt(a) => commands::pt(a),
        Command::Channel(a) => commands::channel(a, seed),
    }
}

/// Runs the parsed command and writes its output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let table = run_command(&cli.command, cli.seed)?;
    let text = table.render(cli.format);
    match &cli.out {
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
        Some(path) => {
            std::fs::write(path, text)?;
            let params = serde_json::to_value(&cli.command).expect("arguments serialize");
            let manifest = RunManifest::new(cli.command.name(), params, cli.seed, cli.format);
            let mut sidecar = path.clone().into_os_string();
            sidecar.push(".manifest.json");
            let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            body.push('\n');
            std::fs::write(sidecar, body)?;
        }
    }
    Ok(())
}
