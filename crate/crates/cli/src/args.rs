use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "kamscope", version, about = "Resonance geometry, action-angle tables and torus surveys for H = |y|^2/2 + eps f(x)")]
pub struct Cli {
    /// Output directory [default: $KAMSCOPE_OUT, else ./kamscope-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the data-parallel loops (1 runs sequentially)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Rerun the command recorded in a manifest
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Sample or inspect potentials
    #[command(subcommand)]
    Potential(PotentialCmd),
    /// Check or repair the genericity conditions
    #[command(subcommand)]
    Class(ClassCmd),
    /// Resonant zone decomposition of an action region
    Zones(ZonesArgs),
    /// Action-angle tables for the projection onto one mode
    Aa(AaArgs),
    /// Measure lemmas for one-degree-of-freedom profiles
    #[command(subcommand)]
    Lemmas(LemmasCmd),
    /// Non-torus fraction at one epsilon
    Survey(SurveyArgs),
    /// Surveys over several epsilons and the scaling fit
    Scaling(ScalingArgs),
}

/// Where the potential comes from.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Source {
    /// Potential file (JSON)
    #[arg(long, conflicts_with = "sample")]
    pub potential: Option<PathBuf>,
    /// Sampler spec `mu|nu,n=N,s=S,seed=SEED[,index=I][,kmax=K]`
    #[arg(long)]
    pub sample: Option<String>,
    /// Repair into the good set with this theta before use
    #[arg(long)]
    pub repair: Option<f64>,
    /// Constant in the P1 cutoff K_s = (2/s) ln(c_K/delta) [default: 2n]
    #[arg(long)]
    pub c_k: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Mu,
    Nu,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum PotentialCmd {
    /// Draw a potential from mu_s or nu_s
    Sample(SampleArgs),
    /// Summarise a potential and tabulate its modes
    Show(ShowArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value = "mu")]
    pub measure: Measure,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    /// Support cutoff [default: ceil(12 ln 10 / s)]
    #[arg(long)]
    pub k_max: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ShowArgs {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum ClassCmd {
    /// Classify against a grid of delta values
    Check(CheckArgs),
    /// Move the potential into the open good set
    Repair(RepairArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    pub delta_grid: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RepairArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegionArgs {
    /// Cube [lo, hi]^n in action space
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.6, 1.4])]
    pub region: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ZoneKnobs {
    /// Modes with |k| <= |ln eps|^e are resonant [default: 2 for zones, 1 for surveys]
    #[arg(long)]
    pub mode_exponent: Option<f64>,
    /// Zone half-width sqrt(eps) |ln eps|^w [default: c_n = 2n+6 for zones, 0 for surveys]
    #[arg(long)]
    pub width_exponent: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ZonesArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub region: RegionArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub zones: ZoneKnobs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ProfileArgs {
    /// Potential file whose projection is analysed
    #[arg(long = "profile-of")]
    pub profile_of: PathBuf,
    /// Mode k selecting the projection F_k
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub mode: Vec<i64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AaArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long, default_value_t = 24)]
    pub interior: usize,
    #[arg(long, default_value_t = 20)]
    pub min_depth: u32,
    #[arg(long, default_value_t = 36)]
    pub max_depth: u32,
    /// Also report the Kolmogorov margin at theta = exp(-a ln^2 eps)
    #[arg(long)]
    pub eps: Option<f64>,
    /// Exponent a in theta = exp(-a ln^2 eps) [default: 12 ln 10 / ln^2 eps]
    #[arg(long)]
    pub a: Option<f64>,
    /// Threshold constant c in |E''| >= c theta
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum LemmasCmd {
    /// Measure of the band |E - E0| <= theta around critical energies
    Band(BandArgs),
    /// Measure of {|g| <= theta} on an interval
    Level(LevelArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BandArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Critical energy [default: every critical value of F_k]
    #[arg(long, allow_negative_numbers = true)]
    pub e0: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5,1e-6")]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LevelArgs {
    /// Polynomial coefficients c0,c1,... of g
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub poly: Vec<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
    pub x1: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub x2: f64,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-4")]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Leapfrog,
    Yoshida4,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SurveyKnobs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub region: RegionArgs,
    #[arg(long, default_value_t = 2000)]
    pub orbits: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// delta grid for the class report when the potential is not repaired
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    pub delta_grid: Vec<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Minimum analysis window length
    #[arg(long)]
    pub window: Option<f64>,
    /// Minimum window length in units of 2 pi / sqrt(eps)
    #[arg(long)]
    pub window_periods: Option<f64>,
    #[arg(long)]
    pub max_doublings: Option<u32>,
    /// C in tol_freq = C / T_w^2
    #[arg(long)]
    pub tol_c: Option<f64>,
    /// Drift above escalation * tol_freq is non-torus
    #[arg(long)]
    pub escalation: Option<f64>,
    /// Largest accepted |Delta H| / eps
    #[arg(long)]
    pub energy_tol: Option<f64>,
    #[arg(long)]
    pub undecided_limit: Option<f64>,
    #[command(flatten)]
    pub zones: ZoneKnobs,
    /// Skip the SVG scatter
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SurveyArgs {
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub knobs: SurveyKnobs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScalingArgs {
    /// At least three values spanning 1.5 decades
    #[arg(long, value_delimiter = ',', default_value = "1e-2,3e-3,1e-3,3e-4")]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub knobs: SurveyKnobs,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn parser_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lists_and_negative_modes_parse() {
        let cli = Cli::try_parse_from(["kamscope", "aa", "--profile-of", "p.json", "--mode", "1,-1"]).unwrap();
        match cli.command {
            Some(Command::Aa(a)) => assert_eq!(a.profile.mode, vec![1, -1]),
            other => panic!("{other:?}"),
        }
        let cli = Cli::try_parse_from(["kamscope", "class", "check", "--sample", "mu,n=2,s=1,seed=1", "--delta-grid", "0.2,0.1"]).unwrap();
        match cli.command {
            Some(Command::Class(ClassCmd::Check(a))) => assert_eq!(a.delta_grid, vec![0.2, 0.1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn commands_round_trip_through_json() {
        let cli = Cli::try_parse_from(["kamscope", "scaling", "--eps", "1e-2,1e-3", "--orbits", "600", "--dt", "0.05"]).unwrap();
        let cmd = cli.command.unwrap();
        let text = serde_json::to_string(&cmd).unwrap();
        let back: Command = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn unknown_flags_rejected() {
        assert!(Cli::try_parse_from(["kamscope", "zones", "--eps", "1e-3", "--bogus"]).is_err());
        assert!(Cli::try_parse_from(["kamscope", "survey"]).is_err());
    }
}
