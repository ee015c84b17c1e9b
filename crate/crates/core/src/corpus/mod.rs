//! Semi-structured documents: markup parsing, structural contexts of text
//! leaves, tokenization, and the Reuters-21578 loader.

mod context;
mod document;
mod parse;
mod reuters;
mod tokenize;
mod tree;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use context::{extract_contexts, extract_contexts_under, leaf_context, StructuralContext};
pub use document::{read_ndjson, write_ndjson, ContextualizedDocument, Occurrences, TermCounts};
pub use parse::{decode, parse_document, parse_str, ParseMode, SYNTHETIC_ROOT};
pub use reuters::{
    document_from_tree, load_reuters, load_sgm_file, occurrences_under, reuters_documents, sgm_files,
    topic_labels, CorpusConfig, CorpusSummary, SplitFilter, REUTERS_COMPONENTS, REUTERS_TEN,
};
pub use tokenize::{is_stop_word, tokenize, Token, TokenizeConfig};
pub use tree::{DocTree, Node, NodeId, TEXT_ELEMENT};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed markup at byte {position}: {reason}")]
    MalformedMarkup { position: usize, reason: String },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("no .sgm files found in {0}")]
    NoSgmFiles(PathBuf),
    #[error("invalid structural context: {0}")]
    InvalidContext(String),
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error("corpus dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
