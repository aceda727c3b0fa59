use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kwsearch_core::store::connect;
use kwsearch_core::{
    register_application, AdminAnnotations, Config, InterpMode, OutputFormat, RankMode, SearchRequest, Searcher, SsDb,
};

#[derive(Parser)]
#[command(name = "kwsearch", version, about = "Keyword search over a relational database")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StoreArgs {
    /// Configuration file; `KWSEARCH_*` environment variables override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Search system store, overriding the configuration.
    #[arg(long)]
    ssdb: Option<PathBuf>,
}

impl StoreArgs {
    fn resolve(&self) -> kwsearch_core::Result<Config> {
        let mut config = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default().apply_env(|k| std::env::var(k).ok())?,
        };
        if let Some(p) = &self.ssdb {
            config.ssdb = p.clone();
        }
        Ok(config)
    }

    fn open_store(&self) -> kwsearch_core::Result<kwsearch_core::SsDbContent> {
        SsDb::open(&self.resolve()?.ssdb)?.load()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Rank {
    FkCount,
    AppSort,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum Interp {
    Best,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Introspect a database, merge annotations, build the value index and
    /// vocabulary, compute join paths and save the store.
    Register {
        /// Connection descriptor: sqlite://path, sqlite::memory:name or postgres://...
        uri: String,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        ssdb: PathBuf,
        /// Longest join path to precompute.
        #[arg(long, default_value_t = 3)]
        max_hops: usize,
    },
    /// Print the stored join paths between two tables, preferred first.
    Paths {
        from: String,
        to: String,
        #[command(flatten)]
        store: StoreArgs,
    },
    /// Run a keyword query.
    Search {
        query: String,
        #[arg(long, value_enum, default_value_t = Rank::None)]
        rank: Rank,
        #[arg(long, value_enum, default_value_t = Interp::Best)]
        interp: Interp,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        offset: usize,
        #[arg(long, group = "format")]
        json: bool,
        #[arg(long, group = "format")]
        html: bool,
        #[arg(long, group = "format")]
        table: bool,
        /// Application database, overriding the configuration and the
        /// descriptor recorded at registration.
        #[arg(long)]
        uri: Option<String>,
        #[command(flatten)]
        store: StoreArgs,
    },
    /// Inspect the value index.
    Vmap {
        #[command(subcommand)]
        action: VmapAction,
    },
    /// Serve the HTTP interface.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Directory of user interface assets.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VmapAction {
    /// Columns in which a value occurs.
    Lookup {
        value: String,
        #[command(flatten)]
        store: StoreArgs,
    },
}

fn run(cli: Cli) -> kwsearch_core::Result<()> {
    match cli.command {
        Command::Register {
            uri,
            annotations,
            ssdb,
            max_hops,
        } => {
            let annotations = match annotations {
                Some(p) => AdminAnnotations::load(&p)?,
                None => AdminAnnotations::default(),
            };
            let gateway = connect(&uri)?;
            let (content, report) = register_application(gateway.as_ref(), &annotations, max_hops)?;
            SsDb::create(&ssdb)?.save(&content)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("tables: {}", report.tables);
            println!("columns: {}", report.columns);
            println!("keys: {}", report.keys);
            println!("foreign keys: {}", report.foreign_keys);
            println!("paths: {}", report.paths);
            println!("vmap entries: {}", report.vmap_entries);
            println!("vocabulary entries: {}", report.voc_entries);
            println!("sort orders: {}", report.sort_orders);
            println!("saved {}", ssdb.display());
        }
        Command::Paths { from, to, store } => {
            let content = store.open_store()?;
            let cat = &content.catalog;
            let id = |name: &str| {
                cat.table_by_name(name)
                    .map(|t| t.table_id)
                    .ok_or_else(|| kwsearch_core::Error::UnknownTable(name.to_owned()))
            };
            let paths = cat.find_paths(id(&from)?, id(&to)?)?;
            if paths.is_empty() {
                println!("no path within {} hops", cat.max_hops());
            }
            for p in paths {
                println!("{}", p.display(cat));
            }
        }
        Command::Search {
            query,
            rank,
            interp,
            limit,
            offset,
            json,
            html,
            table: _,
            uri,
            store,
        } => {
            let mut config = store.resolve()?;
            if uri.is_some() {
                config.uri = uri;
            }
            let searcher = Searcher::open(config)?;
            let format = if json {
                OutputFormat::Json
            } else if html {
                OutputFormat::Html
            } else {
                OutputFormat::Table
            };
            let req = SearchRequest {
                q: query,
                rank: match rank {
                    Rank::FkCount => RankMode::FkCount,
                    Rank::AppSort => RankMode::AppSort,
                    Rank::None => RankMode::None,
                },
                interp: match interp {
                    Interp::Best => InterpMode::Best,
                    Interp::All => InterpMode::All,
                },
                limit,
                offset,
                format,
            };
            print!("{}", searcher.respond(&req, "")?.body);
        }
        Command::Vmap {
            action: VmapAction::Lookup { value, store },
        } => {
            let content = store.open_store()?;
            let cat = &content.catalog;
            let hits = content.lexicon.lookup_value(&value);
            if hits.is_empty() {
                println!("{value}: not indexed");
            }
            for c in hits {
                println!("{}.{}", cat.table_name(c.table), cat.column_name(c));
            }
        }
        Command::Serve { config, assets } => {
            let config = Config::load(&config)?;
            tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
                )
                .init();
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(kwsearch_server::serve(config, assets))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
