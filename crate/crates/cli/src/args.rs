use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "landau", version, about = "Cluster spectra of perturbed Landau Hamiltonians")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// `ci` caps all sizes for quick runs.
    #[arg(long, global = true, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Ci,
    Desk,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Circle averages of V over orbits of radius sqrt(E/2).
    Radon(RadonArgs),
    /// The reduced symbol Phi(xi, n) and its distance to the circle average.
    Symbol(SymbolArgs),
    /// Eigenvalues of the reduced operator in the Hermite basis.
    ReducedSpectrum(ReducedArgs),
    /// Scaled traces against phase-plane integrals along a list of levels.
    SzegoCheck(SzegoArgs),
    /// Full 2D spectrum near E in a tensor oscillator basis.
    ClusterSpectrum(ClusterArgs),
    /// Landau block of the full 2D operator against the reduced matrix.
    TwoRoute(TwoRouteArgs),
    /// Ring-profile recovery from I(r) on a log grid.
    Inverse(InverseArgs),
    /// Sobolev norms of V.
    Sobolev(SobolevArgs),
    /// Zeros of L_n with their asymptotic checks.
    LaguerreZeros(ZerosArgs),
    /// Samples of psi_n for plotting.
    PsiFigure(PsiArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Radon(_) => "radon",
            Command::Symbol(_) => "symbol",
            Command::ReducedSpectrum(_) => "reduced-spectrum",
            Command::SzegoCheck(_) => "szego-check",
            Command::ClusterSpectrum(_) => "cluster-spectrum",
            Command::TwoRoute(_) => "two-route",
            Command::Inverse(_) => "inverse",
            Command::Sobolev(_) => "sobolev",
            Command::LaguerreZeros(_) => "laguerre-zeros",
            Command::PsiFigure(_) => "psi-figure",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PotentialArg {
    /// JSON potential spec; the unit Gaussian when absent.
    #[arg(long)]
    pub potential: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RadonArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 3.0)]
    pub energy: f64,
    /// `min:max:count` along x2.
    #[arg(long, allow_hyphen_values = true, default_value = "-3:3:13")]
    pub x_range: String,
    /// `min:max:count` along p2.
    #[arg(long, allow_hyphen_values = true, default_value = "-3:3:13")]
    pub p_range: String,
    /// Add the Fourier-side value as an independent check.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SymbolArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 3.0)]
    pub energy: f64,
    /// Landau indices, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128")]
    pub n_list: Vec<usize>,
    /// Phase points `x2,p2`; repeatable.
    #[arg(long = "xi", allow_hyphen_values = true, value_parser = parse_pair, default_values = ["1,0"])]
    pub xi: Vec<(f64, f64)>,
    /// Also report the Laguerre tail beyond this energy.
    #[arg(long)]
    pub tail_cut: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReducedArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 3.0)]
    pub energy: f64,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Basis size, or `cover` for the support-covering rule.
    #[arg(long, default_value = "64")]
    pub basis: String,
    #[arg(long, value_enum, default_value_t = AssemblyArg::Auto)]
    pub assembly: AssemblyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssemblyArg {
    Auto,
    PhaseGrid,
    Radial,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SzegoArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 3.0)]
    pub energy: f64,
    /// `power:k`, `poly:k[:half_width]` or `bump:center:half_width`.
    #[arg(long, default_value = "poly:2")]
    pub rho: String,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    pub n_list: Vec<usize>,
    /// Basis size, or `cover` for the support-covering rule.
    #[arg(long, default_value = "cover")]
    pub basis: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 3.0)]
    pub energy: f64,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long = "N1", default_value_t = 24)]
    pub n1: usize,
    #[arg(long = "N2", default_value_t = 24)]
    pub n2: usize,
    /// Gauss-Hermite order per phase-plane axis.
    #[arg(long, default_value_t = 48)]
    pub q: usize,
    /// Memory cap in MiB.
    #[arg(long, default_value_t = 2048)]
    pub mem_cap_mb: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TwoRouteArgs {
    #[command(flatten)]
    pub cluster: ClusterArgs,
    /// Reduced basis size.
    #[arg(long = "M", default_value_t = 16)]
    pub m: usize,
    /// Number of top eigenvalues compared.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseData {
    /// I(r) from the frequency-side quadrature.
    Invariant,
    /// I(r) from the discrete forward model applied to the true profile.
    Forward,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InverseArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    /// Radii where I(r) is sampled, `log:min:max:count`.
    #[arg(long, default_value = "log:0.1:10:64")]
    pub r_grid: String,
    /// Grid carrying the unknown ring profile.
    #[arg(long, default_value = "log:0.05:2e5:240")]
    pub rho_grid: String,
    /// `auto`, `auto:noise_floor` or a fixed ridge parameter.
    #[arg(long, default_value = "auto")]
    pub lambda: String,
    #[arg(long, value_enum, default_value_t = InverseData::Invariant)]
    pub data: InverseData,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SobolevArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-1,0,1,2")]
    pub s: Vec<f64>,
    /// `half` uses the weight exponent s/2, `standard` uses s.
    #[arg(long, default_value = "half")]
    pub convention: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ZerosArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PsiArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 3.0)]
    pub energy: f64,
    #[arg(long, default_value_t = 5.0)]
    pub u_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected x,p but got '{s}'"))?;
    let x = a.trim().parse::<f64>().map_err(|e| format!("'{a}': {e}"))?;
    let p = b.trim().parse::<f64>().map_err(|e| format!("'{b}': {e}"))?;
    Ok((x, p))
}

/// `min:max:count`.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range '{s}' is not min:max:count"));
    }
    let lo = parts[0].parse::<f64>().map_err(|e| format!("'{s}': {e}"))?;
    let hi = parts[1].parse::<f64>().map_err(|e| format!("'{s}': {e}"))?;
    let count = parts[2].parse::<usize>().map_err(|e| format!("'{s}': {e}"))?;
    if count == 0 || !(hi >= lo) {
        return Err(format!("range '{s}' needs min <= max and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
}
