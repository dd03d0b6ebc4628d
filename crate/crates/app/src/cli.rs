//! `hiertable extract` and `hiertable serve`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use hiertable_core::blocks::DepthCombo;
use hiertable_core::charts::write_charts;
use hiertable_core::config::EngineConfig;
use hiertable_core::facts::{FactType, FactTypeSet};
use hiertable_core::ingest::parse_any;
use hiertable_core::pipeline::{facts_json, pages_json, scoped_facts, Analysis, ArtifactScope};

use crate::service::router;
use crate::store::SessionStore;

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_FLAGS: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hiertable", version, about = "Data facts and semantic zoom for hierarchical tables")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Extract facts and pages from a table file.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated fact types to keep, e.g. `dominance,trend`.
        #[arg(long, value_delimiter = ',', value_parser = parse_type)]
        types: Option<Vec<FactType>>,
        /// Restrict to one depth combination, written `R,C`.
        #[arg(long, value_parser = parse_combo)]
        combo: Option<DepthCombo>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_type(s: &str) -> Result<FactType, String> {
    s.parse()
}

fn parse_combo(s: &str) -> Result<DepthCombo, String> {
    let (r, c) = s.split_once(',').ok_or("expected R,C")?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    let combo = DepthCombo::new(num(r)?, num(c)?);
    if combo.s_depth() == 0 {
        return Err("(0,0) is not a page".into());
    }
    Ok(combo)
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig, String> {
    match path {
        Some(p) => EngineConfig::load(p).map_err(|e| e.to_string()),
        None => Ok(EngineConfig::default()),
    }
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_FLAGS),
            };
        }
    };
    match cli.command {
        Cmd::Extract { input, out_dir, types, combo, config } => {
            extract(&input, &out_dir, types, combo, config.as_deref())
        }
        Cmd::Serve { port, host, data_dir, config } => serve(&host, port, &data_dir, config.as_deref()),
    }
}

fn extract(
    input: &Path,
    out_dir: &Path,
    types: Option<Vec<FactType>>,
    combo: Option<DepthCombo>,
    config: Option<&Path>,
) -> ExitCode {
    let config = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FLAGS);
        }
    };
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", input.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let table = match parse_any(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", input.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let analysis = Analysis::new(table, config);
    if let Some(c) = combo {
        if !analysis.graph.contains(c) {
            eprintln!("error: --combo {},{} is outside this table", c.r_depth, c.c_depth);
            return ExitCode::from(EXIT_FLAGS);
        }
    }
    let scope = ArtifactScope {
        types: types.map(|t| t.into_iter().collect::<FactTypeSet>()).unwrap_or_else(hiertable_core::facts::all_fact_types),
        combo,
    };
    let charts: Vec<_> = scoped_facts(&analysis, &scope).into_iter().cloned().collect();
    let written = std::fs::create_dir_all(out_dir)
        .and_then(|_| std::fs::write(out_dir.join("facts.json"), facts_json(&analysis, &scope)))
        .and_then(|_| std::fs::write(out_dir.join("pages.json"), pages_json(&analysis, &scope)))
        .and_then(|_| write_charts(&out_dir.join("charts"), &charts));
    if let Err(e) = written {
        eprintln!("error: cannot write to {}: {e}", out_dir.display());
        return ExitCode::FAILURE;
    }
    println!("{} facts, {} pages written to {}", charts.len(), scope.combo.map_or(analysis.graph.nodes.len(), |_| 1), out_dir.display());
    ExitCode::SUCCESS
}

fn serve(host: &str, port: u16, data_dir: &Path, config: Option<&Path>) -> ExitCode {
    let config = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FLAGS);
        }
    };
    let store = match SessionStore::open(data_dir, config) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("error: cannot use data dir {}: {e}", data_dir.display());
            return ExitCode::FAILURE;
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind((host, port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot listen on {host}:{port}: {e}");
                return ExitCode::FAILURE;
            }
        };
        let addr = listener.local_addr().map(|a| a.to_string()).unwrap_or_default();
        eprintln!("listening on http://{addr} ({} sessions restored)", store.session_ids().len());
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        match axum::serve(listener, router(store)).with_graceful_shutdown(shutdown).await {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        }
    })
}
