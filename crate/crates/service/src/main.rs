use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use topictrap_core::corpus::FetchMode;
use topictrap_service::api::{self, Params};
use topictrap_service::config::{self, ServiceConfig};
use topictrap_service::server::{api_settings, serve};
use topictrap_service::store::Engine;
use topictrap_service::{build, CliError};

/// Topic search that never leads to an empty result page.
#[derive(Parser)]
#[command(name = "topictrap", version)]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, env = config::ENV_VAR)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch or read cached definitions and write the corpus dump.
    BuildCorpus {
        /// Read the cache only.
        #[arg(long, conflicts_with = "online")]
        offline: bool,
        /// Fetch missing definitions over the network.
        #[arg(long)]
        online: bool,
    },
    /// Merge manual, structural and textual edges into the relatives graph.
    BuildRelatives,
    /// Index resources and publish a new index generation.
    BuildIndex,
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Answer one query and print the JSON body the HTTP API would return.
    /// Without a subcommand this is a search.
    Query(Box<QueryCommand>),
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct QueryCommand {
    #[command(subcommand)]
    kind: Option<QueryKind>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Subcommand)]
enum QueryKind {
    Search(SearchArgs),
    Autocomplete {
        #[arg(long)]
        q: String,
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        limit: Option<String>,
    },
    Suggest {
        #[arg(long)]
        term: String,
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        limit: Option<String>,
    },
    Topic {
        uri: String,
        #[arg(long)]
        lang: Option<String>,
    },
}

#[derive(Args, Default)]
struct SearchArgs {
    #[arg(long)]
    term: Option<String>,
    #[arg(long)]
    words: Option<String>,
    #[arg(long)]
    lang: Option<String>,
    #[arg(long)]
    offset: Option<String>,
    #[arg(long)]
    limit: Option<String>,
}

fn pairs(list: &[(&str, &Option<String>)]) -> Vec<(String, String)> {
    list.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
}

fn query(config: &ServiceConfig, cmd: QueryCommand) -> Result<String, CliError> {
    let engine = Engine::load(&config.paths.index_dir)?;
    let settings = api_settings(config);
    let kind = cmd.kind.unwrap_or(QueryKind::Search(cmd.search));
    match kind {
        QueryKind::Search(a) => {
            let p = pairs(&[
                ("term", &a.term),
                ("words", &a.words),
                ("lang", &a.lang),
                ("offset", &a.offset),
                ("limit", &a.limit),
            ]);
            api::search(&engine, &settings, &Params::new(p)?)
        }
        QueryKind::Autocomplete { q, lang, limit } => {
            let p = pairs(&[("q", &Some(q)), ("lang", &lang), ("limit", &limit)]);
            api::autocomplete(&engine, &settings, &Params::new(p)?)
        }
        QueryKind::Suggest { term, lang, limit } => {
            let p = pairs(&[("term", &Some(term)), ("lang", &lang), ("limit", &limit)]);
            api::suggestions(&engine, &settings, &Params::new(p)?)
        }
        QueryKind::Topic { uri, lang } => {
            api::topic(&engine, &settings, &uri, &Params::new(pairs(&[("lang", &lang)]))?)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = ServiceConfig::load(&config::locate(cli.config)?)?;
    match cli.command {
        Command::BuildCorpus { offline, online } => {
            let mode = match (offline, online) {
                (true, _) => Some(FetchMode::Offline),
                (_, true) => Some(FetchMode::Online),
                _ => None,
            };
            summary(&build::corpus(&config, mode)?);
        }
        Command::BuildRelatives => summary(&build::relatives(&config)?),
        Command::BuildIndex => summary(&build::index(&config)?),
        Command::Serve { bind, port } => {
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(CliError::io)?;
            runtime.block_on(serve(&config, bind, port))?;
        }
        Command::Query(cmd) => println!("{}", query(&config, *cmd)?),
    }
    Ok(())
}

fn summary<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("summaries serialize"));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
