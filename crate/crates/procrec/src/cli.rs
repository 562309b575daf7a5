//! Argument parsing and dispatch for the `procrec` binary.
//!
//! Every command reads its inputs, writes derived files under `--out`
//! (default from `PROCREC_OUT`), and leaves the inputs untouched, so
//! re-running with the same inputs reproduces the same bytes and exit code.
//!
//! Exit codes: 0 success, 1 bad input, 2 broken internal invariant.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::context::{lint_context, ContextMatrix, ContextVector, VariableCatalog};
use crate::corpus::{ingest_elements, AbstractionDictionary, ElementStore};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_against_extracted, format_confusion_table, format_reports_table, percent,
    replay_metrics, MetricsReport,
};
use crate::recommender::recommend;
use crate::render::{check_well_formed, render_dot, slug, ProcessGraphSpec, RenderOptions};
use crate::similarity::{
    export_biplot, find_similar, find_within_threshold, fit_pca, PcaModel, SimilarityRanking,
};

#[derive(Parser, Debug)]
#[command(
    name = "procrec",
    version,
    about = "Recommend development processes for a game project from what similar projects did."
)]
struct Cli {
    /// Directory generated files are written to.
    #[arg(long, global = true, env = "PROCREC_OUT", default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a raw element file and write the store.
    Ingest {
        /// Raw JSONL element file.
        #[arg(long)]
        input: PathBuf,
        /// Abstraction dictionary applied before writing.
        #[arg(long)]
        dict: Option<PathBuf>,
    },
    /// Re-key an existing store through an abstraction dictionary.
    Normalize {
        /// Store written by `ingest`.
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        dict: PathBuf,
    },
    /// Inspect and extend the context matrix.
    Context {
        #[command(subcommand)]
        action: ContextAction,
    },
    /// Rank similar projects for a new target and merge their processes.
    Recommend {
        #[command(flatten)]
        fit: FitArgs,
        /// One-row context CSV describing the target project.
        #[arg(long)]
        target: PathBuf,
    },
    /// Score recommendations for stored games against their own elements.
    Evaluate {
        #[command(flatten)]
        fit: FitArgs,
        /// Games to score, each treated as the target in turn.
        #[arg(required = true)]
        targets: Vec<String>,
    },
    /// Recompute the published-style metric tables from raw confusion counts.
    ReplayMetrics {
        /// CSV with header run,tp,fp,fn,tn,sa.
        #[arg(long)]
        input: PathBuf,
    },
    /// Draw one stored game's extracted process as DOT.
    Render {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Game whose process to draw.
        #[arg(long)]
        game: String,
        /// Append the gold-master terminal after the end disc.
        #[arg(long)]
        gold: bool,
    },
    /// Export PCA scores and loadings for plotting.
    Biplot {
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        components: u32,
    },
}

#[derive(Subcommand, Debug)]
enum ContextAction {
    /// Append one project and write the extended matrix.
    Add {
        /// Existing matrix; started empty when the file is missing.
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        game: String,
        /// Variable ids that hold for the project, comma separated (v01,v07,...).
        #[arg(long, required = true, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// List stored projects, or one project's variables with descriptions.
    List {
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        game: Option<String>,
    },
    /// Report consistency warnings for every stored context.
    Lint {
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

/// Inputs and knobs shared by `recommend` and `evaluate`.
#[derive(Args, Debug)]
struct FitArgs {
    /// Store written by `ingest`.
    #[arg(long)]
    store: PathBuf,
    /// Abstraction dictionary applied to the store on load.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Context matrix CSV.
    #[arg(long)]
    contexts: PathBuf,
    /// Variable catalog JSON; the bundled 61-variable catalog when omitted.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Neighbors to keep.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Principal components retained by the fit.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    components: u32,
    /// Distance cutoff in score space; replaces --k when given.
    #[arg(long, value_parser = parse_nonneg)]
    threshold: Option<f64>,
    /// Fit the model with the target row included (default).
    #[arg(long, conflicts_with = "exclude_target")]
    include_target: bool,
    /// Fit without the target row and project it afterward.
    #[arg(long)]
    exclude_target: bool,
}

fn parse_nonneg(raw: &str) -> std::result::Result<f64, String> {
    let value: f64 = raw.parse().map_err(|e| format!("{e}"))?;
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err("must be a finite non-negative number".into())
    }
}

/// Parses and runs one invocation; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let out = cli.out;
    match cli.command {
        Command::Ingest { input, dict } => cmd_ingest(&out, &input, dict.as_deref()),
        Command::Normalize { store, dict } => cmd_normalize(&out, &store, &dict),
        Command::Context { action } => match action {
            ContextAction::Add {
                contexts,
                catalog,
                game,
                vars,
            } => cmd_context_add(&out, &contexts, catalog.as_deref(), &game, &vars),
            ContextAction::List {
                contexts,
                catalog,
                game,
            } => cmd_context_list(&contexts, catalog.as_deref(), game.as_deref()),
            ContextAction::Lint { contexts, catalog } => {
                cmd_context_lint(&contexts, catalog.as_deref())
            }
        },
        Command::Recommend { fit, target } => cmd_recommend(&out, &fit, &target),
        Command::Evaluate { fit, targets } => cmd_evaluate(&out, &fit, &targets),
        Command::ReplayMetrics { input } => cmd_replay(&out, &input),
        Command::Render {
            store,
            dict,
            game,
            gold,
        } => cmd_render(&out, &store, dict.as_deref(), &game, gold),
        Command::Biplot {
            contexts,
            catalog,
            components,
        } => cmd_biplot(&out, &contexts, catalog.as_deref(), components as usize),
    }
}

fn load_catalog(path: Option<&Path>) -> Result<VariableCatalog> {
    match path {
        Some(p) => VariableCatalog::from_json(&fs::read_to_string(p)?),
        None => Ok(VariableCatalog::bundled()),
    }
}

fn load_dict(path: &Path) -> Result<AbstractionDictionary> {
    AbstractionDictionary::from_json(&fs::read_to_string(path)?)
}

fn load_store(path: &Path, dict: Option<&Path>) -> Result<ElementStore> {
    let store = ingest_elements(BufReader::new(fs::File::open(path)?))?;
    match dict {
        Some(p) => Ok(store.normalize(&load_dict(p)?)),
        None => Ok(store),
    }
}

fn load_matrix(path: &Path, catalog: &VariableCatalog) -> Result<ContextMatrix> {
    ContextMatrix::read_csv(fs::File::open(path)?, catalog)
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn distinct_keys(store: &ElementStore) -> usize {
    store
        .records()
        .iter()
        .map(|r| r.key.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

fn cmd_ingest(out: &Path, input: &Path, dict: Option<&Path>) -> Result<()> {
    let raw = ingest_elements(BufReader::new(fs::File::open(input)?))?;
    let before = distinct_keys(&raw);
    let store = match dict {
        Some(p) => raw.normalize(&load_dict(p)?),
        None => raw,
    };
    let after = distinct_keys(&store);
    println!(
        "ingested {} records from {} projects",
        store.len(),
        store.game_count()
    );
    println!("distinct element keys: {before} before normalization, {after} after");
    write_out(out, "store.jsonl", &store.to_jsonl_string()?)
}

fn cmd_normalize(out: &Path, store_path: &Path, dict: &Path) -> Result<()> {
    let raw = load_store(store_path, None)?;
    let before = distinct_keys(&raw);
    let store = raw.normalize(&load_dict(dict)?);
    println!(
        "distinct element keys: {before} before normalization, {} after",
        distinct_keys(&store)
    );
    write_out(out, "store.jsonl", &store.to_jsonl_string()?)
}

fn cmd_context_add(
    out: &Path,
    contexts: &Path,
    catalog: Option<&Path>,
    game: &str,
    vars: &[String],
) -> Result<()> {
    let catalog = load_catalog(catalog)?;
    let mut matrix = if contexts.exists() {
        load_matrix(contexts, &catalog)?
    } else {
        ContextMatrix::new()
    };
    let vector = ContextVector::from_ids(game, vars, &catalog)?;
    for warning in lint_context(&vector, &catalog) {
        println!("warning: {game}: {warning}");
    }
    println!("added {game} ({} variables set)", vector.true_count());
    matrix.append(vector)?;
    write_out(out, "contexts.csv", &matrix.to_csv_string(&catalog)?)
}

fn cmd_context_list(contexts: &Path, catalog: Option<&Path>, game: Option<&str>) -> Result<()> {
    let catalog = load_catalog(catalog)?;
    let matrix = load_matrix(contexts, &catalog)?;
    match game {
        None => {
            for row in matrix.rows() {
                println!("{} ({} variables set)", row.game, row.true_count());
            }
        }
        Some(name) => {
            let row = matrix.get(name).ok_or_else(|| Error::UnknownGame {
                name: name.to_string(),
            })?;
            for id in row.true_ids(&catalog) {
                let description = catalog.get(id).map(|v| v.description.as_str()).unwrap_or("");
                println!("{id}  {description}");
            }
        }
    }
    Ok(())
}

fn cmd_context_lint(contexts: &Path, catalog: Option<&Path>) -> Result<()> {
    let catalog = load_catalog(catalog)?;
    let matrix = load_matrix(contexts, &catalog)?;
    let mut total = 0usize;
    for row in matrix.rows() {
        for warning in lint_context(row, &catalog) {
            println!("warning: {}: {warning}", row.game);
            total += 1;
        }
    }
    if total == 0 {
        println!("no warnings across {} contexts", matrix.len());
    } else {
        println!("{total} warnings across {} contexts", matrix.len());
    }
    Ok(())
}

/// Fits the model and ranks candidates for `target`. With the default
/// include mode the target row joins the fit; exclude mode drops it and
/// projects the target afterward.
fn rank_target(
    fit: &FitArgs,
    matrix: &ContextMatrix,
    target: &ContextVector,
) -> Result<(PcaModel, SimilarityRanking)> {
    let stored = matrix.get(&target.game).is_some();
    let model = if fit.exclude_target {
        let mut rest = ContextMatrix::new();
        for row in matrix.rows() {
            if row.game != target.game {
                rest.append(row.clone())?;
            }
        }
        fit_pca(&rest, fit.components as usize)?
    } else if stored {
        fit_pca(matrix, fit.components as usize)?
    } else {
        let mut all = matrix.clone();
        all.append(target.clone())?;
        fit_pca(&all, fit.components as usize)?
    };
    let ranking = match fit.threshold {
        Some(threshold) => find_within_threshold(&model, target, threshold)?,
        None => find_similar(&model, target, fit.k as usize)?,
    };
    Ok((model, ranking))
}

fn cmd_recommend(out: &Path, fit: &FitArgs, target_path: &Path) -> Result<()> {
    let store = load_store(&fit.store, fit.dict.as_deref())?;
    let catalog = load_catalog(fit.catalog.as_deref())?;
    let matrix = load_matrix(&fit.contexts, &catalog)?;
    let targets = ContextMatrix::read_csv(fs::File::open(target_path)?, &catalog)?;
    if targets.len() != 1 {
        return Err(Error::InvalidContext {
            line: targets.len() + 1,
            reason: format!("target file must contain exactly one row, got {}", targets.len()),
        });
    }
    let target = targets.rows()[0].clone();
    if matrix.get(&target.game).is_some() {
        return Err(Error::DuplicateGame {
            name: target.game.clone(),
        });
    }
    let (model, ranking) = rank_target(fit, &matrix, &target)?;
    for (rank, neighbor) in ranking.neighbors.iter().enumerate() {
        println!("{}. {} (distance {:.6})", rank + 1, neighbor.game, neighbor.distance);
    }
    let process = recommend(&store, &ranking)?;
    println!(
        "merged {} elements from {} neighbors",
        process.elements.len(),
        ranking.len()
    );
    write_out(out, "recommendation.json", &process.to_json()?)?;
    let spec = ProcessGraphSpec::from_recommended(&process)?;
    let dot = render_dot(&spec, &RenderOptions::default());
    check_well_formed(&dot)?;
    write_out(out, "process.dot", &dot)?;
    if model.retained() >= 2 {
        write_out(out, "biplot.csv", &export_biplot(&model)?)?;
    } else {
        println!("biplot skipped: needs at least 2 retained components");
    }
    Ok(())
}

#[derive(Serialize)]
struct LabeledReport<'a> {
    run: &'a str,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

fn write_reports(out: &Path, name: &str, rows: &[(String, MetricsReport)]) -> Result<()> {
    let labeled: Vec<LabeledReport> = rows
        .iter()
        .map(|(run, report)| LabeledReport { run, report })
        .collect();
    let json = serde_json::to_string_pretty(&labeled)
        .map_err(|e| Error::Internal(format!("serializing reports: {e}")))?;
    write_out(out, name, &json)
}

fn print_report_tables(rows: &[(String, MetricsReport)]) {
    let cms: Vec<(String, crate::evaluation::ConfusionMatrix)> = rows
        .iter()
        .map(|(run, report)| (run.clone(), report.cm))
        .collect();
    print!("{}", format_confusion_table(&cms));
    println!();
    print!("{}", format_reports_table(rows));
}

fn cmd_evaluate(out: &Path, fit: &FitArgs, targets: &[String]) -> Result<()> {
    let store = load_store(&fit.store, fit.dict.as_deref())?;
    let catalog = load_catalog(fit.catalog.as_deref())?;
    let matrix = load_matrix(&fit.contexts, &catalog)?;
    let mut rows: Vec<(String, MetricsReport)> = Vec::new();
    for name in targets {
        let target = matrix
            .get(name)
            .ok_or_else(|| Error::UnknownGame { name: name.clone() })?
            .clone();
        let (_, ranking) = rank_target(fit, &matrix, &target)?;
        let report = evaluate_against_extracted(&store, name, &ranking)?;
        rows.push((name.clone(), report));
    }
    print_report_tables(&rows);
    write_reports(out, "evaluation.json", &rows)
}

fn cmd_replay(out: &Path, input: &Path) -> Result<()> {
    let rows = replay_metrics(fs::File::open(input)?)?;
    print_report_tables(&rows);
    write_reports(out, "replay.json", &rows)
}

fn cmd_render(
    out: &Path,
    store_path: &Path,
    dict: Option<&Path>,
    game: &str,
    gold: bool,
) -> Result<()> {
    let store = load_store(store_path, dict)?;
    let spec = ProcessGraphSpec::from_extracted(&store, game)?;
    let options = RenderOptions {
        gold_terminal: gold,
        ..RenderOptions::default()
    };
    let dot = render_dot(&spec, &options);
    check_well_formed(&dot)?;
    println!(
        "{}: {} elements, {} quotes",
        game,
        spec.node_count(),
        spec.quote_count()
    );
    write_out(out, &format!("extracted_{}.dot", slug(game)), &dot)
}

fn cmd_biplot(
    out: &Path,
    contexts: &Path,
    catalog: Option<&Path>,
    components: usize,
) -> Result<()> {
    let catalog = load_catalog(catalog)?;
    let matrix = load_matrix(contexts, &catalog)?;
    let model = fit_pca(&matrix, components)?;
    let total: f64 = model.eigenvalues().iter().sum();
    let mut cumulative = 0.0;
    for (i, value) in model.eigenvalues().iter().take(model.retained()).enumerate() {
        cumulative += value;
        println!(
            "pc{}: eigenvalue {:.6}, variance {}%, cumulative {}%",
            i + 1,
            value,
            percent(value / total),
            percent(cumulative / total)
        );
    }
    write_out(out, "biplot.csv", &export_biplot(&model)?)
}
