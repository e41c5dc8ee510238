use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "shapdag", version, about = "Möbius inversion and Shapley values on weighted DAMGs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the synergy function w of the document's values.
    Moebius {
        #[command(flatten)]
        input: Input,
        /// Treat the values as synergies and print the value function instead.
        #[arg(long)]
        invert: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Compute Shapley values for the roots.
    Shapley {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = EngineFlag::Recursive)]
        engine: EngineFlag,
        #[arg(long, value_enum)]
        kernel: Option<KernelFlag>,
        /// Include the total path weights s(r|y).
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Project the document onto the complement of a vertex set.
    Project {
        #[command(flatten)]
        input: Input,
        /// Comma-separated vertices to remove.
        #[arg(long, value_delimiter = ',', num_args = 0..=1, conflicts_with = "onto", required_unless_present = "onto")]
        remove: Option<Vec<String>>,
        /// Comma-separated vertices to keep.
        #[arg(long, value_delimiter = ',', num_args = 0..=1)]
        onto: Option<Vec<String>>,
        #[arg(long, value_enum)]
        kernel: Option<KernelFlag>,
        /// Abort once the working graph would exceed this many edges.
        #[arg(long, default_value_t = shapdag::projection::DEFAULT_EDGE_CAP)]
        cap: usize,
    },
    /// Path counts and strengths, or the paths between two vertices.
    Paths {
        #[command(flatten)]
        input: Input,
        #[arg(long, requires = "to")]
        from: Option<String>,
        #[arg(long, requires = "from")]
        to: Option<String>,
        /// Refuse to list more than this many paths.
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run the identity and axiom checks on the document.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        kernel: Option<KernelFlag>,
    },
    /// Rebuild a worked instance and compare against its known numbers.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct Input {
    /// Graph document, or `-` for standard input.
    pub file: String,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Render numbers as decimals with 12 significant digits.
    #[arg(long)]
    pub float: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineFlag {
    Recursive,
    TotalWeights,
    PathUniform,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelFlag {
    PathUniform,
    EdgeUniform,
    Induced,
    /// The kernel given in the document.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    WeakMiddle,
    ReverseTree,
    PosetGame,
    Ising,
    Coalition,
    Classic,
}
