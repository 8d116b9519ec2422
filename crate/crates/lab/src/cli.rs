use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Command;

#[derive(Debug, Parser)]
#[command(name = "sibm-lab", version, about = "Simulate and verify set-indexed Brownian motion on rectangles")]
pub struct Cli {
    #[command(flatten)]
    pub keys: KeyArgs,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sample paths along a flow, or a field snapshot.
    Simulate,
    /// Closure, numbering, cells and flow of a set list.
    Lattice,
    /// Statistical checks.
    Verify {
        #[command(subcommand)]
        which: VerifyCmd,
    },
    /// Hitting and exit probabilities.
    Mc {
        #[command(subcommand)]
        which: McCmd,
    },
    /// Large-domain diagnostics.
    Diag {
        #[command(subcommand)]
        which: DiagCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Brownian suite over random lattices after retiming.
    Bm,
    /// Quadratic variation along two staircase flows.
    Siv,
    /// Increment laws at different base sets.
    Stationarity,
}

#[derive(Debug, Subcommand)]
pub enum McCmd {
    /// Probability of reaching `level` before the end of the flow.
    Hit,
    /// Probability of leaving `(a, b)` through `a`.
    Exit,
}

#[derive(Debug, Subcommand)]
pub enum DiagCmd {
    Slln,
    Lil,
    Zeros,
    /// Level-crossing frontier of a field.
    Frontier,
}

impl Sub {
    pub fn command(&self) -> Command {
        match self {
            Sub::Simulate => Command::Simulate,
            Sub::Lattice => Command::Lattice,
            Sub::Verify { which: VerifyCmd::Bm } => Command::VerifyBm,
            Sub::Verify { which: VerifyCmd::Siv } => Command::VerifySiv,
            Sub::Verify { which: VerifyCmd::Stationarity } => Command::VerifyStationarity,
            Sub::Mc { which: McCmd::Hit } => Command::McHit,
            Sub::Mc { which: McCmd::Exit } => Command::McExit,
            Sub::Diag { which: DiagCmd::Slln } => Command::DiagSlln,
            Sub::Diag { which: DiagCmd::Lil } => Command::DiagLil,
            Sub::Diag { which: DiagCmd::Zeros } => Command::DiagZeros,
            Sub::Diag { which: DiagCmd::Frontier } => Command::DiagFrontier,
        }
    }
}

/// Flags mirror the config keys one to one and are validated later, so a
/// bad value is reported against its key.
#[derive(Debug, Default, Args)]
pub struct KeyArgs {
    /// key=value file, or a JSON report whose embedded config is replayed.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seed: Option<String>,
    #[arg(long, global = true, visible_alias = "n", allow_hyphen_values = true)]
    pub replicates: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mesh: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tmax: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dim: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// json or csv.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// sibm, poisson, common-factor or variance-skew.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub level: Option<String>,
    #[arg(long = "sigma-end", global = true, allow_hyphen_values = true)]
    pub sigma_end: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub steps: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub increments: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lattices: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// path or field.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub reflect: Option<String>,
    /// Retime simulated paths onto a uniform clock grid with this step.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub retime: Option<String>,
    /// Worker threads, 0 for the default pool.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub threads: Option<String>,
    /// Input set list (JSON).
    #[arg(long = "in", global = true)]
    pub input: Option<String>,
    /// CSV file for raw per-replicate statistics.
    #[arg(long, global = true)]
    pub raw: Option<String>,
}

impl KeyArgs {
    pub fn flags(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("seed", &self.seed),
            ("replicates", &self.replicates),
            ("mesh", &self.mesh),
            ("grid", &self.grid),
            ("tmax", &self.tmax),
            ("dim", &self.dim),
            ("out", &self.out),
            ("format", &self.format),
            ("model", &self.model),
            ("lambda", &self.lambda),
            ("alpha", &self.alpha),
            ("a", &self.a),
            ("b", &self.b),
            ("level", &self.level),
            ("sigma-end", &self.sigma_end),
            ("steps", &self.steps),
            ("increments", &self.increments),
            ("lattices", &self.lattices),
            ("eps", &self.eps),
            ("mode", &self.mode),
            ("reflect", &self.reflect),
            ("retime", &self.retime),
            ("threads", &self.threads),
            ("in", &self.input),
            ("raw", &self.raw),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}
