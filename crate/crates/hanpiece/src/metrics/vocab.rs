//! Vocabulary size and embedding-parameter reporting.
//!
//! Counts distinct types and total tokens per corpus and estimates the
//! embedding-table parameter count as `types × dim`. The estimate covers
//! embedding tables only, not a full network, so it shows the direction and
//! rough magnitude of a vocabulary-driven size change.

use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusVocab {
    pub name: String,
    pub types: usize,
    pub tokens: u64,
}

/// Streaming type/token counter for one corpus.
#[derive(Debug, Default)]
pub struct VocabCounter {
    types: HashSet<String>,
    tokens: u64,
}

impl VocabCounter {
    pub fn new() -> VocabCounter {
        VocabCounter::default()
    }

    pub fn add_line(&mut self, line: &str) {
        for token in line.split_whitespace() {
            self.tokens += 1;
            if !self.types.contains(token) {
                self.types.insert(token.to_string());
            }
        }
    }

    pub fn finish(self, name: &str) -> CorpusVocab {
        CorpusVocab {
            name: name.to_string(),
            types: self.types.len(),
            tokens: self.tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocabReduction {
    pub from: String,
    pub to: String,
    /// `(types_from − types_to) / types_from`, as a percentage. Negative
    /// when the second corpus has the larger vocabulary.
    pub type_reduction_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocabReport {
    pub embedding_dim: usize,
    pub corpora: Vec<CorpusVocab>,
    pub reductions: Vec<VocabReduction>,
}

impl VocabReport {
    pub fn embedding_params(&self, corpus: &CorpusVocab) -> u64 {
        corpus.types as u64 * self.embedding_dim as u64
    }
}

/// Builds the report over already-counted corpora, including the reduction
/// percentage for every ordered pair.
pub fn vocab_report(corpora: Vec<CorpusVocab>, embedding_dim: usize) -> VocabReport {
    let mut reductions = Vec::new();
    for i in 0..corpora.len() {
        for j in 0..corpora.len() {
            if i == j {
                continue;
            }
            let from = &corpora[i];
            let to = &corpora[j];
            let percent = if from.types == 0 {
                0.0
            } else {
                (from.types as f64 - to.types as f64) / from.types as f64 * 100.0
            };
            reductions.push(VocabReduction {
                from: from.name.clone(),
                to: to.name.clone(),
                type_reduction_percent: percent,
            });
        }
    }
    VocabReport {
        embedding_dim,
        corpora,
        reductions,
    }
}

impl fmt::Display for VocabReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<20} {:>12} {:>14} {:>18}",
            "corpus", "types", "tokens", "embedding params"
        )?;
        for corpus in &self.corpora {
            writeln!(
                f,
                "{:<20} {:>12} {:>14} {:>18}",
                corpus.name,
                corpus.types,
                corpus.tokens,
                self.embedding_params(corpus)
            )?;
        }
        writeln!(f, "(embedding params = types x dim, dim = {}; embedding tables only)", self.embedding_dim)?;
        for reduction in &self.reductions {
            writeln!(
                f,
                "type reduction {} -> {}: {:.2}%",
                reduction.from, reduction.to, reduction.type_reduction_percent
            )?;
        }
        Ok(())
    }
}
