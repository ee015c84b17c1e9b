use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use scanb::corpus::{
    document_from_tree, load_reuters, parse_document, read_ndjson, reuters_documents, write_ndjson,
    ContextualizedDocument, CorpusConfig, CorpusSummary, ParseMode, TokenizeConfig,
};
use scanb::eval::{
    compare_models, cross_validate_with_plan, make_folds, ComparisonTable, CvOptions, EvalReport, NamedConfig,
    Prediction,
};
use scanb::model::{load_model, save_model, train_with, Margins, ScanbModel};
use scanb::Execution;
use serde::{Deserialize, Serialize};

use crate::config::{tokenizer_digest, ExperimentConfig};
use crate::error::CliError;

/// Preprocessing a saved model needs to read new documents the way its
/// training corpus was read.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub config_sha256: String,
    pub tokenizer: TokenizeConfig,
    pub whitelist: Vec<String>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalOutput {
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub report: EvalReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CompareOutput {
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub comparison: ComparisonTable,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IngestOutput {
    pub config_sha256: String,
    pub summary: CorpusSummary,
}

pub fn execution(config: &ExperimentConfig) -> Execution {
    if config.jobs == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn is_dump(path: &Path) -> bool {
    path.is_file() && path.extension().is_some_and(|e| e == "ndjson" || e == "jsonl")
}

/// Reads a `.sgm` directory or a corpus dump, keeping only configured labels.
pub fn load_corpus(config: &ExperimentConfig) -> Result<Vec<ContextualizedDocument>, CliError> {
    let path = config.corpus_path()?;
    let mut docs = if is_dump(path) {
        let file = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
        read_ndjson(BufReader::new(file)).map_err(|e| CliError::io(path.display(), e))?
    } else {
        let corpus = CorpusConfig {
            execution: execution(config),
            ..config.corpus_config()
        };
        load_reuters(path, &corpus)?
    };
    let keep: BTreeSet<&String> = config.categories.iter().collect();
    docs.retain_mut(|d| {
        d.labels.retain(|l| keep.contains(l));
        !d.labels.is_empty()
    });
    info!("loaded {} documents from {}", docs.len(), path.display());
    Ok(docs)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent.display(), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display(), e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let mut out = create(path)?;
    out.write_all(contents)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path.display(), e))
}

fn pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn ingest(config: &ExperimentConfig, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let docs = load_corpus(config)?;
    if let Some(path) = out {
        let mut w = create(path)?;
        write_ndjson(&docs, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(path.display(), e))?;
        info!("wrote corpus dump to {}", path.display());
    }
    let output = IngestOutput {
        config_sha256: config.fingerprint(),
        summary: CorpusSummary::of(&docs),
    };
    writeln!(stdout, "{}", pretty(&output)?).map_err(|e| CliError::io("stdout", e))
}

pub fn train(config: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let model_config = config.primary_model()?;
    let docs = load_corpus(config)?;
    let model = train_with(&docs, &config.categories, &model_config, execution(config))?;
    let metadata = ModelMetadata {
        config_sha256: config.fingerprint(),
        tokenizer: config.tokenizer.clone(),
        whitelist: config.whitelist.clone(),
        config: config.clone(),
    };
    let model = model.with_metadata(serde_json::to_value(metadata).map_err(|e| CliError::Internal(e.to_string()))?);
    let mut w = create(out)?;
    save_model(&model, &mut w)?;
    w.flush().map_err(|e| CliError::io(out.display(), e))?;
    info!("trained on {} documents, model written to {}", docs.len(), out.display());
    Ok(())
}

fn read_model(path: &Path) -> Result<(ScanbModel, ModelMetadata), CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
    let model = load_model(BufReader::new(file)).map_err(|e| CliError::io(path.display(), e))?;
    let metadata = model
        .metadata()
        .cloned()
        .ok_or_else(|| CliError::Io(format!("{}: model carries no preprocessing metadata", path.display())))
        .and_then(|m| {
            serde_json::from_value::<ModelMetadata>(m).map_err(|e| CliError::io(path.display(), e))
        })?;
    Ok((model, metadata))
}

/// Documents in one markup file: each REUTERS element, or the whole file.
fn documents_in(path: &Path, corpus: &CorpusConfig) -> Result<Vec<ContextualizedDocument>, CliError> {
    let raw = std::fs::read(path).map_err(|e| CliError::io(path.display(), e))?;
    let tree = parse_document(&raw, ParseMode::Lenient).map_err(|e| CliError::io(path.display(), e))?;
    let docs = reuters_documents(&tree, corpus);
    if !docs.is_empty() {
        return Ok(docs);
    }
    let name = path.file_stem().map_or_else(|| "document".into(), |s| s.to_string_lossy().into_owned());
    Ok(vec![document_from_tree(name, &tree, corpus)])
}

pub fn classify(
    model_path: &Path,
    files: &[PathBuf],
    multilabel: bool,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let (model, metadata) = read_model(model_path)?;
    let corpus = CorpusConfig {
        categories: None,
        context_whitelist: (!metadata.whitelist.is_empty()).then(|| metadata.whitelist.iter().cloned().collect()),
        tokenizer: metadata.tokenizer.clone(),
        ..CorpusConfig::default()
    };
    let margins = Margins::uniform(metadata.config.margin);
    for file in files {
        for doc in documents_in(file, &corpus)? {
            let labels = if multilabel {
                let set = model.classify_multilabel(&doc, &margins);
                if set.is_empty() {
                    "-".to_owned()
                } else {
                    set.into_iter().collect::<Vec<_>>().join(",")
                }
            } else {
                model.classify(&doc)
            };
            writeln!(stdout, "{}\t{labels}", doc.doc_id).map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(())
}

fn cv_options(config: &ExperimentConfig) -> CvOptions {
    CvOptions {
        k: config.folds,
        seed: config.seed,
        margins: Margins::uniform(config.margin),
        execution: execution(config),
    }
}

pub fn evaluate(config: &ExperimentConfig, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model_config = config.primary_model()?;
    let docs = load_corpus(config)?;
    let plan = make_folds(&docs, config.folds, config.seed)?;
    let outcome = cross_validate_with_plan(&docs, &config.categories, &model_config, &plan, &cv_options(config))?;
    let mut report = outcome.report;
    report.fingerprint.tokenizer = Some(tokenizer_digest(&config.tokenizer));
    let output = EvalOutput {
        config_sha256: config.fingerprint(),
        config: config.clone(),
        report,
    };
    let text = format!(
        "# config sha256 {}\n# {} documents, {} folds, seed {}\n{}",
        output.config_sha256,
        output.report.documents,
        output.report.folds,
        output.report.seed,
        output.report.to_text()
    );
    if let Some(dir) = out {
        write_file(&dir.join("report.json"), pretty(&output)?.as_bytes())?;
        write_file(&dir.join("report.txt"), text.as_bytes())?;
        write_predictions(&dir.join("predictions.ndjson"), &outcome.predictions)?;
        info!("evaluation written to {}", dir.display());
    }
    write!(stdout, "{text}").map_err(|e| CliError::io("stdout", e))
}

fn write_predictions(path: &Path, predictions: &[Prediction]) -> Result<(), CliError> {
    let mut w = create(path)?;
    for p in predictions {
        serde_json::to_writer(&mut w, p).map_err(|e| CliError::io(path.display(), e))?;
        w.write_all(b"\n").map_err(|e| CliError::io(path.display(), e))?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn compare(config: &ExperimentConfig, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let named = config
        .compare
        .iter()
        .map(|s| Ok(NamedConfig::new(s.name.clone(), config.model_config(s.mapping, &s.strategy)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    if named.is_empty() {
        return Err(CliError::Validation("compare needs at least one model".into()));
    }
    let docs = load_corpus(config)?;
    let mut comparison = compare_models(&docs, &config.categories, &named, &cv_options(config))?;
    let digest = tokenizer_digest(&config.tokenizer);
    for row in &mut comparison.rows {
        row.report.fingerprint.tokenizer = Some(digest.clone());
    }
    let output = CompareOutput {
        config_sha256: config.fingerprint(),
        config: config.clone(),
        comparison,
    };
    let text = format!(
        "# config sha256 {}\n# {} documents, {} folds, seed {}\n{}",
        output.config_sha256,
        docs.len(),
        config.folds,
        config.seed,
        output.comparison.to_text()
    );
    if let Some(dir) = out {
        write_file(&dir.join("comparison.json"), pretty(&output)?.as_bytes())?;
        write_file(&dir.join("comparison.txt"), text.as_bytes())?;
        write_file(&dir.join("comparison.csv"), output.comparison.to_csv().as_bytes())?;
        info!("comparison written to {}", dir.display());
    }
    write!(stdout, "{text}").map_err(|e| CliError::io("stdout", e))
}
