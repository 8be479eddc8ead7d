use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use toricdual::duality::Side;
use toricdual::lattice::SplitSearch;
use toricdual_cli::{cmd_analyze, cmd_check_pair, cmd_dual, cmd_table, cmd_verify_cert, PairInput, PolytopeInput};

/// Picard lattices of toric K3 families and lattice duality of reflexive polytope pairs.
#[derive(Parser)]
#[command(name = "toricdual", version)]
struct Cli {
    /// Emit a key-sorted JSON report envelope instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Coefficient box for the hyperbolic-plane search.
    #[arg(long, global = true, value_name = "N")]
    search_bound: Option<i64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polar dual, reflexivity and L0 of a polytope.
    Dual {
        #[command(flatten)]
        input: PolytopeArgs,
        /// Exit with status 3 unless the polytope is reflexive.
        #[arg(long)]
        require_reflexive: bool,
    },
    /// Picard lattice of the K3 family with the given Newton polytope.
    Analyze {
        #[command(flatten)]
        input: PolytopeArgs,
    },
    /// Full duality verdict for a pair.
    CheckPair {
        #[command(flatten)]
        input: PairArgs,
    },
    /// Verify the explicit basis-change certificates of a pair.
    VerifyCert {
        #[command(flatten)]
        input: PairArgs,
    },
    /// Recompute the duality table for the builtin pairs (or a pair file).
    Table {
        /// Pair file (one pair or an array); defaults to the builtin dataset.
        file: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PolytopeArgs {
    /// Polytope file ({"vertices": ...} or {weights, monomials}) or a pair file.
    #[arg(conflicts_with = "builtin")]
    file: Option<PathBuf>,
    /// Builtin pair id, such as 50 or 11-14/c1.
    #[arg(long, value_name = "ID")]
    builtin: Option<String>,
    /// Which polytope of a pair to use.
    #[arg(long, value_enum, default_value = "delta")]
    side: SideArg,
}

#[derive(Args)]
struct PairArgs {
    /// Pair file holding one pair or an array of pairs.
    #[arg(conflicts_with_all = ["builtin", "all"])]
    file: Option<PathBuf>,
    /// Builtin pair id or row, such as 15 or 26/c2.
    #[arg(long, value_name = "ID", conflicts_with = "all")]
    builtin: Option<String>,
    /// Every builtin pair.
    #[arg(long)]
    all: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Delta,
    DeltaPrime,
}

impl From<PolytopeArgs> for PolytopeInput {
    fn from(a: PolytopeArgs) -> Self {
        let side = match a.side {
            SideArg::Delta => Side::Delta,
            SideArg::DeltaPrime => Side::DeltaPrime,
        };
        PolytopeInput { file: a.file, builtin: a.builtin, side: Some(side) }
    }
}

impl From<PairArgs> for PairInput {
    fn from(a: PairArgs) -> Self {
        PairInput { file: a.file, builtin: a.builtin, all: a.all }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut search = SplitSearch::default();
    if let Some(b) = cli.search_bound {
        search.bound = b.max(1);
    }
    let outcome = match cli.command {
        Command::Dual { input, require_reflexive } => cmd_dual(&input.into(), require_reflexive),
        Command::Analyze { input } => cmd_analyze(&input.into(), search),
        Command::CheckPair { input } => cmd_check_pair(&input.into(), search),
        Command::VerifyCert { input } => cmd_verify_cert(&input.into()),
        Command::Table { file } => cmd_table(&PairInput { file, builtin: None, all: false }, search),
    };
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    let out = outcome.render(cli.json);
    if !out.is_empty() {
        print!("{out}");
        if cli.json {
            println!();
        }
    }
    ExitCode::from(outcome.exit_status() as u8)
}
