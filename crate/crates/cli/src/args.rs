use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const COLUMNS: &str = "\
Output columns (times in units of 1/ω₀, energies in units of ħω₀, ħ = 1):
  energy       t, gamma_t, E, E_standard_bopp
  uncertainty  t, dx, dp, dx_dp, X_sq, P_sq, dX_dY, dPx_dPy, dX_dPx
  ep-check     t, a, b, d, rho, ep_residual
  nc-recover   t, theta, omega_nc, c, residual_a, residual_b, residual_d
               (roundtrip preset adds theta_true, omega_nc_true, relative_error)

CSV carries a header row `name [unit]`; JSON is an array of objects keyed by name.
Numbers are written with 17 significant digits.

Families:
  exp       a = σe^{−Γt}, b = Δe^{Γt}, ρ = μe^{−Γt/2}; needs sigma delta mu gamma cconst
            (kconst derived from the constraint when omitted, cconst may be inf)
  rational  τ = Γt + χ; needs sigma delta mu gamma chi korder
            (small-delta derived from the constraint when omitted)
  static    constant a = sigma, b = delta, d = 0

Exit codes: 0 success, 1 verification or evaluation failure, 2 configuration error.
NCHO_QUAD_ORDER_MARGIN overrides the Gauss-Laguerre order margin (default 2).";

#[derive(Parser, Debug)]
#[command(name = "ncho", version, about = "Verification suites and expectation time series for the time-dependent noncommutative oscillator", after_help = COLUMNS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the verification suites and report each suite's max residual against its tolerance.
    Verify(VerifyArgs),
    /// Energy expectation over the time grid, with the standard-Bopp comparison curve.
    #[command(after_help = COLUMNS)]
    Energy(RunArgs),
    /// Commutative and noncommutative uncertainty products over the time grid.
    #[command(after_help = COLUMNS)]
    Uncertainty(RunArgs),
    /// Pointwise Ermakov-Pinney residuals of a family.
    #[command(after_help = COLUMNS)]
    EpCheck(RunArgs),
    /// Recover (θ, Ω, c) along the time grid from a family and (M, ω).
    #[command(after_help = COLUMNS)]
    NcRecover(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig2,
    Static,
    Roundtrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Exp,
    Rational,
    Static,
    /// Synthetic coefficient path with known (θ, Ω); nc-recover only.
    Roundtrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Ep,
    Chiellini,
    Laguerre,
    AppendixA,
    Orthonormality,
    Expectation,
    Invariance,
    NcRoundtrip,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Flat key=value file using the long flag names as keys; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub cconst: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kconst: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<f64>,
    /// Rational family exponent k ≥ 1.
    #[arg(long)]
    pub korder: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub small_delta: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Oscillator mass M.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Oscillator frequency ω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// NC position parameter θ (uncertainty).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// NC momentum parameter Ω (uncertainty).
    #[arg(long, allow_hyphen_values = true)]
    pub omega_nc: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance override NAME=VAL (repeatable).
    #[arg(long = "tol", value_name = "NAME=VAL")]
    pub tol: Vec<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Restrict to the named suites (repeatable); all suites by default.
    #[arg(long = "suite", value_enum)]
    pub suites: Vec<Suite>,
    /// Scale b by (1 + ε) in the EP suite's families (negative control).
    #[arg(long, allow_hyphen_values = true)]
    pub perturb_constraint: Option<f64>,
    /// Basis truncation N per mode for the invariance suite.
    #[arg(long)]
    pub basis: Option<usize>,
}

/// Long flag name of a value-enum variant.
pub fn enum_name<T: ValueEnum>(value: &T) -> String {
    value
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

impl RunArgs {
    /// Flag values as (key, value) pairs keyed like the config file.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut put = |key: &'static str, value: Option<String>| {
            if let Some(v) = value {
                out.push((key, v));
            }
        };
        put("preset", self.preset.as_ref().map(enum_name));
        put("family", self.family.as_ref().map(enum_name));
        put("sigma", self.sigma.map(|v| v.to_string()));
        put("delta", self.delta.map(|v| v.to_string()));
        put("mu", self.mu.map(|v| v.to_string()));
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("cconst", self.cconst.map(|v| v.to_string()));
        put("kconst", self.kconst.map(|v| v.to_string()));
        put("chi", self.chi.map(|v| v.to_string()));
        put("korder", self.korder.map(|v| v.to_string()));
        put("small-delta", self.small_delta.map(|v| v.to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("m", self.m.map(|v| v.to_string()));
        put("t-start", self.t_start.map(|v| v.to_string()));
        put("t-end", self.t_end.map(|v| v.to_string()));
        put("samples", self.samples.map(|v| v.to_string()));
        put("mass", self.mass.map(|v| v.to_string()));
        put("omega", self.omega.map(|v| v.to_string()));
        put("theta", self.theta.map(|v| v.to_string()));
        put("omega-nc", self.omega_nc.map(|v| v.to_string()));
        put("format", self.format.as_ref().map(enum_name));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        out
    }
}
