//! MT evaluation: corpus BLEU, vocabulary reports, Direct Assessment
//! aggregation and rank-sum based system clustering.

mod bleu;
mod da;
mod vocab;
mod wilcoxon;

pub use bleu::{bleu, bleu_with_smoothing, tokenize_lines, BleuResult, Smoothing};
pub use da::{
    cluster_systems, da_aggregate, parse_da_csv, Assessment, DaReport, SystemDa,
    DEFAULT_CLUSTER_ALPHA,
};
pub use vocab::{vocab_report, CorpusVocab, VocabCounter, VocabReduction, VocabReport};
pub use wilcoxon::{wilcoxon_rank_sum, RankSumTest};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("corpora are not aligned: {hypotheses} hypotheses vs {references} references")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("line {line}: score {score} outside [0, 100]")]
    ScoreOutOfRange { line: usize, score: f64 },
    #[error("assessment CSV line {line}: {reason}")]
    CsvParse { line: usize, reason: String },
    #[error("no assessments")]
    NoAssessments,
}
