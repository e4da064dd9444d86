//! Corpus-level BLEU with clipped n-gram precisions (n = 1..4) and the
//! brevity penalty, on caller-tokenized text. Single reference.

use std::collections::HashMap;

use super::MetricsError;

pub const MAX_NGRAM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Plain BLEU: a zero n-gram precision zeroes the whole score.
    None,
    /// Add-one smoothing on the higher-order precisions, for toy corpora
    /// where exact 4-gram matches are unlikely.
    AddOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuResult {
    /// Modified (clipped) n-gram precisions for n = 1..4.
    pub precisions: [f64; MAX_NGRAM],
    pub brevity_penalty: f64,
    /// `100 · BP · exp(mean of ln pn)`; 0 when any precision is 0.
    pub score: f64,
    pub hypothesis_length: usize,
    pub reference_length: usize,
}

/// Splits whitespace-tokenized text into one token vector per line.
pub fn tokenize_lines(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| line.split_whitespace().map(str::to_string).collect())
        .collect()
}

/// Corpus BLEU without smoothing.
pub fn bleu(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
) -> Result<BleuResult, MetricsError> {
    bleu_with_smoothing(hypotheses, references, Smoothing::None)
}

pub fn bleu_with_smoothing(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
    smoothing: Smoothing,
) -> Result<BleuResult, MetricsError> {
    if hypotheses.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }

    let hypothesis_length: usize = hypotheses.iter().map(Vec::len).sum();
    let reference_length: usize = references.iter().map(Vec::len).sum();
    if hypothesis_length == 0 {
        return Err(MetricsError::EmptyCorpus);
    }

    let mut matches = [0u64; MAX_NGRAM];
    let mut totals = [0u64; MAX_NGRAM];
    for (hyp, reference) in hypotheses.iter().zip(references) {
        for n in 1..=MAX_NGRAM {
            if hyp.len() < n {
                continue;
            }
            let mut hyp_counts: HashMap<&[String], u64> = HashMap::new();
            for gram in hyp.windows(n) {
                *hyp_counts.entry(gram).or_insert(0) += 1;
            }
            let mut ref_counts: HashMap<&[String], u64> = HashMap::new();
            for gram in reference.windows(n) {
                *ref_counts.entry(gram).or_insert(0) += 1;
            }
            totals[n - 1] += (hyp.len() - n + 1) as u64;
            for (gram, count) in hyp_counts {
                let clip = ref_counts.get(gram).copied().unwrap_or(0);
                matches[n - 1] += count.min(clip);
            }
        }
    }

    let mut precisions = [0.0; MAX_NGRAM];
    for n in 0..MAX_NGRAM {
        if totals[n] == 0 {
            continue;
        }
        precisions[n] = match smoothing {
            Smoothing::AddOne if n > 0 => (matches[n] + 1) as f64 / (totals[n] + 1) as f64,
            _ => matches[n] as f64 / totals[n] as f64,
        };
    }

    let brevity_penalty = if hypothesis_length > reference_length {
        1.0
    } else {
        (1.0 - reference_length as f64 / hypothesis_length as f64).exp()
    };

    let score = if precisions.contains(&0.0) {
        0.0
    } else {
        let mean_log: f64 = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_NGRAM as f64;
        100.0 * brevity_penalty * mean_log.exp()
    };

    Ok(BleuResult {
        precisions,
        brevity_penalty,
        score,
        hypothesis_length,
        reference_length,
    })
}
