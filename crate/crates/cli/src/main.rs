mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "talentmine", version, about = "Table-aware retrieval and question answering over benefits documents")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Linearizer {
    Reference,
    Provider,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Granularity {
    PerSentence,
    PerTable,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnswererArg {
    Extractive,
    /// Provider prompted through `--provider-endpoint`.
    Provider,
    /// Offline QA model that answers from the prompt's passages.
    Mock,
}

#[derive(Args, Clone)]
pub struct ProviderArgs {
    /// URL of an HTTP completion endpoint.
    #[arg(long)]
    pub provider_endpoint: Option<String>,
    /// Bearer token for the endpoint; defaults to $TALENTMINE_PROVIDER_API_KEY.
    #[arg(long)]
    pub provider_api_key: Option<String>,
    #[arg(long)]
    pub provider_model: Option<String>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Write a seeded synthetic benefits corpus with its gold questions.
    GenFixtures {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        months: usize,
        #[arg(long, default_value_t = 5)]
        tiers: usize,
        #[arg(long, default_value_t = 3)]
        categories: usize,
        /// Minimum number of gold questions.
        #[arg(long, default_value_t = 50)]
        gold_target: usize,
        #[arg(long)]
        out: PathBuf,
        /// Skip the page rasters.
        #[arg(long)]
        no_render: bool,
    },
    /// Split documents into prose and table regions.
    Ingest {
        /// Document bundles (.json) or table manifests.
        #[arg(required = true)]
        docs: Vec<PathBuf>,
        /// Write the annotated tables as a manifest.
        #[arg(long)]
        tables_out: Option<PathBuf>,
    },
    /// Build a knowledge base file from documents.
    Index {
        #[arg(required = true)]
        docs: Vec<PathBuf>,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value = "talentmine")]
        kb_id: String,
        #[arg(long, value_enum, default_value_t = Linearizer::Reference)]
        linearizer: Linearizer,
        #[arg(long, value_enum, default_value_t = Granularity::PerSentence)]
        granularity: Granularity,
        /// Leave prose out of the knowledge base.
        #[arg(long)]
        no_prose: bool,
        #[arg(long, default_value_t = talentmine_core::index::DEFAULT_DIM)]
        dim: usize,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Print the linearization of every table in a document.
    Linearize {
        doc: PathBuf,
        #[arg(long, value_enum, default_value_t = Linearizer::Reference)]
        linearizer: Linearizer,
        /// Emit a caption sentence before each table's cell sentences.
        #[arg(long)]
        preamble: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Render the tables of a manifest to page rasters and a document bundle.
    Render {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Embed the rasters in the bundle instead of writing PGM files.
        #[arg(long)]
        inline: bool,
    },
    /// Answer one question from a knowledge base.
    Ask {
        question: String,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value_t = talentmine_core::qa::DEFAULT_K)]
        k: usize,
        #[arg(long, value_enum, default_value_t = AnswererArg::Extractive)]
        answerer: AnswererArg,
        /// Also print the retrieved chunks.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Score pipelines on a gold file.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        /// Corpus documents; each method builds its own knowledge base from them.
        #[arg(long = "docs", num_args = 1..)]
        docs: Vec<PathBuf>,
        /// Comma-separated methods: semantic, csv.
        #[arg(long, default_value = "semantic,csv")]
        methods: String,
        /// Evaluate an existing knowledge base instead of building one.
        #[arg(long, conflicts_with = "methods")]
        kb: Option<PathBuf>,
        #[arg(long, default_value_t = talentmine_core::qa::DEFAULT_K)]
        k: usize,
        /// Directory for the report files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        /// key = value settings file; TALENTMINE_* variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
