use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use multiport_core::{
    is_unitary, matrix_from_json, parse_arrangement, ComplexMatrix, ModeOccupation, Multiport,
    Species, C64,
};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError, CliResult};

/// Exact many-particle scattering on n-mode multiports.
#[derive(Debug, Parser)]
#[command(name = "multiport", version, about)]
pub struct Cli {
    /// JSON file supplying defaults for any flag (same field names as the flags).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output distribution for an input arrangement, `mixed`, or `equiprobable`.
    Distribution(RunArgs),
    /// Class-pair grid with probabilities, enhancement ratios and law tags.
    Enhancement(RunArgs),
    /// Suppression-law verdicts for an input against one output or all outputs.
    Suppression {
        #[command(flatten)]
        run: RunArgs,
        /// Also compute the exact probability and flag predictions that fail.
        #[arg(long)]
        check: bool,
    },
    /// Run a verification suite and report each check.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// `fourier`, `random` (uses --seed) or a path to a JSON matrix file.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Number of modes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of particles.
    #[arg(long, short = 'N')]
    pub particles: Option<usize>,
    #[arg(long)]
    pub species: Option<Species>,
    /// Occupation list such as `0,1,2,0,1,2`, or an assignment list such as `d:2,3,3,5,6,6`.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Merge outputs related by cyclic shifts and mode reversal.
    #[arg(long)]
    pub group_by_class: bool,
    /// Restrict arrangements to at most one particle per mode.
    #[arg(long = "pauli")]
    pub pauli_only: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write to this file instead of stdout.
    #[arg(long = "out", value_name = "PATH")]
    pub output_path: Option<PathBuf>,
    /// Multiply the last diagonal matrix entry by exp(i * PHASE).
    #[arg(long, hide = true, allow_negative_numbers = true, value_name = "PHASE")]
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Distribution,
    Enhancement,
    Suppression,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    #[default]
    Quick,
    Full,
    #[serde(rename = "paper-numbers")]
    #[value(name = "paper-numbers")]
    Reference,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Quick => "quick",
            Suite::Full => "full",
            Suite::Reference => "paper-numbers",
        }
    }
}

/// Every setting a run can take. Loaded from `--config` and overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub n: Option<usize>,
    pub particles: Option<usize>,
    pub species: Option<Species>,
    pub matrix: Option<String>,
    pub input: Option<String>,
    pub output: Option<String>,
    pub format: Option<Format>,
    pub group_by_class: bool,
    pub pauli_only: bool,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub check: bool,
    pub suite: Option<Suite>,
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Fourier,
    Random,
    File(PathBuf),
}

/// What `--input` asks for in `distribution`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Pure(ModeOccupation),
    Mixed,
    Equiprobable,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn from_command(command: Command) -> Self {
        let (name, run, check, suite) = match command {
            Command::Distribution(run) => (CommandName::Distribution, run, false, None),
            Command::Enhancement(run) => (CommandName::Enhancement, run, false, None),
            Command::Suppression { run, check } => (CommandName::Suppression, run, check, None),
            Command::Verify { suite, run } => (CommandName::Verify, run, false, suite),
        };
        RunConfig {
            command: Some(name),
            n: run.n,
            particles: run.particles,
            species: run.species,
            matrix: run.matrix,
            input: run.input,
            output: run.output,
            format: run.format,
            group_by_class: run.group_by_class,
            pauli_only: run.pauli_only,
            seed: run.seed,
            output_path: run.output_path,
            check,
            suite,
            perturb: run.perturb,
        }
    }

    /// Values set in `self` win; unset ones fall back to `base`.
    pub fn overlay(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            n: self.n.or(base.n),
            particles: self.particles.or(base.particles),
            species: self.species.or(base.species),
            matrix: self.matrix.or(base.matrix),
            input: self.input.or(base.input),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
            group_by_class: self.group_by_class || base.group_by_class,
            pauli_only: self.pauli_only || base.pauli_only,
            seed: self.seed.or(base.seed),
            output_path: self.output_path.or(base.output_path),
            check: self.check || base.check,
            suite: self.suite.or(base.suite),
            perturb: self.perturb.or(base.perturb),
        }
    }

    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let from_flags = cli.command.map(Self::from_command).unwrap_or_default();
        let config = match &cli.config {
            Some(path) => from_flags.overlay(Self::load(path)?),
            None => from_flags,
        };
        if config.command.is_none() {
            return Err(usage(
                "no command given (use a subcommand or set \"command\" in --config)",
            ));
        }
        Ok(config)
    }

    pub fn species(&self) -> Species {
        self.species.unwrap_or(Species::Boson)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn matrix_source(&self) -> MatrixSource {
        match self.matrix.as_deref() {
            None | Some("fourier") => MatrixSource::Fourier,
            Some("random") => MatrixSource::Random,
            Some(path) => MatrixSource::File(PathBuf::from(path)),
        }
    }

    /// Mode count from `--n`, else from the arrangements, else from a matrix file.
    pub fn modes(&self) -> CliResult<usize> {
        if let Some(n) = self.n {
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            return Ok(n);
        }
        for text in [&self.input, &self.output].into_iter().flatten() {
            let text = text.trim();
            if !text.starts_with("d:") && !matches!(text, "mixed" | "equiprobable") {
                return Ok(parse_arrangement(text, None)?.modes());
            }
        }
        if let MatrixSource::File(path) = self.matrix_source() {
            return Ok(read_matrix(&path)?.rows());
        }
        Err(usage("cannot determine the number of modes; pass --n"))
    }

    pub fn input_spec(&self, n: usize) -> CliResult<InputSpec> {
        match self.input.as_deref().map(str::trim) {
            None => Err(usage("--input is required")),
            Some("mixed") => Ok(InputSpec::Mixed),
            Some("equiprobable") => Ok(InputSpec::Equiprobable),
            Some(text) => Ok(InputSpec::Pure(parse_arrangement(text, Some(n))?)),
        }
    }

    pub fn input_occupation(&self, n: usize) -> CliResult<ModeOccupation> {
        match self.input_spec(n)? {
            InputSpec::Pure(occ) => Ok(occ),
            _ => Err(usage("this command needs an explicit input arrangement")),
        }
    }

    pub fn output_occupation(&self, n: usize) -> CliResult<Option<ModeOccupation>> {
        self.output
            .as_deref()
            .map(|text| parse_arrangement(text, Some(n)).map_err(CliError::from))
            .transpose()
    }

    /// Particle number from `--particles`, else from the input arrangement.
    pub fn particles(&self, n: usize) -> CliResult<usize> {
        let from_input = match self.input.as_deref() {
            Some(_) => match self.input_spec(n)? {
                InputSpec::Pure(occ) => Some(occ.particles()),
                _ => None,
            },
            None => None,
        };
        match (self.particles, from_input) {
            (Some(a), Some(b)) if a != b => Err(usage(format!(
                "--particles {a} disagrees with the input arrangement ({b} particles)"
            ))),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(usage("--particles is required")),
        }
    }

    pub fn multiport(&self, n: usize) -> CliResult<Multiport> {
        let base = match self.matrix_source() {
            MatrixSource::Fourier => Multiport::fourier(n),
            MatrixSource::Random => Multiport::random(n, self.seed()),
            MatrixSource::File(path) => {
                let matrix = read_matrix(&path)?;
                if matrix.rows() != n {
                    return Err(usage(format!(
                        "matrix file has {} modes but {n} were requested",
                        matrix.rows()
                    )));
                }
                if !is_unitary(&matrix, 1e-10)? {
                    return Err(usage(format!("{} is not unitary", path.display())));
                }
                Multiport::custom(matrix, format!("file:{}", path.display()))?
            }
        };
        match self.perturb {
            None => Ok(base),
            Some(phase) => Ok(perturbed(&base, phase)?),
        }
    }
}

pub fn perturbed(mp: &Multiport, phase: f64) -> multiport_core::Result<Multiport> {
    let mut matrix = mp.matrix().clone();
    let last = matrix.rows() - 1;
    matrix[(last, last)] *= C64::from_polar(1.0, phase);
    Multiport::custom(matrix, format!("{}+perturbed", mp.label()))
}

fn read_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(matrix_from_json(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_values() {
        let flags = RunConfig {
            n: Some(4),
            species: Some(Species::Fermion),
            ..Default::default()
        };
        let file = RunConfig {
            command: Some(CommandName::Distribution),
            n: Some(6),
            input: Some("1,1,0,0".into()),
            group_by_class: true,
            ..Default::default()
        };
        let merged = flags.overlay(file);
        assert_eq!(merged.n, Some(4));
        assert_eq!(merged.species(), Species::Fermion);
        assert_eq!(merged.input.as_deref(), Some("1,1,0,0"));
        assert!(merged.group_by_class);
        assert_eq!(merged.command, Some(CommandName::Distribution));
    }

    #[test]
    fn modes_are_inferred_from_arrangements() {
        let config = RunConfig {
            input: Some("0,1,2,0,1,2".into()),
            ..Default::default()
        };
        assert_eq!(config.modes().unwrap(), 6);
        assert_eq!(config.particles(6).unwrap(), 6);

        let assignment = RunConfig {
            input: Some("d:1,1".into()),
            ..Default::default()
        };
        assert!(assignment.modes().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = RunConfig {
            command: Some(CommandName::Verify),
            suite: Some(Suite::Reference),
            format: Some(Format::Csv),
            ..Default::default()
        };
        let text = serde_json::to_string(&config).unwrap();
        assert!(text.contains("\"paper-numbers\""));
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
        assert!(serde_json::from_str::<RunConfig>("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn perturbation_breaks_unitarity() {
        let mp = perturbed(&Multiport::fourier(3), 0.4).unwrap();
        assert!(!mp.is_fourier());
        assert!(!is_unitary(mp.matrix(), 1e-10).unwrap());
    }
}
