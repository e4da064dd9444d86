//! Bilingual multiword-expression extraction and glossary handling.
//!
//! Monolingual candidates come from PoS-pattern matching over tagged
//! corpora (`surface<TAB>pos<TAB>lemma` per token, blank line between
//! sentences, the shape common taggers emit). Candidates from aligned
//! sentence pairs are paired, scored with a Dice coefficient over
//! sentence-level co-occurrence, filtered at a quality threshold, and can
//! then be decomposed on the Chinese side and appended to a training corpus
//! as extra aligned pseudo-sentences.

use std::collections::HashMap;
use std::io::Write;

use thiserror::Error;

use crate::corpus::{transform_line, TransformConfig};
use crate::decompose::DecompositionTable;

/// Quality threshold used when none is given on the command line.
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.85;

/// Built-in English extraction patterns (Penn-style tags).
pub const DEFAULT_PATTERNS_EN: &str = include_str!("../data/patterns_en.txt");
/// Built-in Chinese extraction patterns (PKU-style tags).
pub const DEFAULT_PATTERNS_ZH: &str = include_str!("../data/patterns_zh.txt");

#[derive(Debug, Error, PartialEq)]
pub enum MweError {
    #[error("line {line}: {reason}")]
    TaggedParse { line: usize, reason: String },
    #[error("pattern {name:?}: {reason}")]
    InvalidPattern { name: String, reason: String },
    #[error("pattern file line {line}: {reason}")]
    PatternParse { line: usize, reason: String },
    #[error("corpora are not aligned: {left} vs {right} sentences")]
    UnalignedCorpora { left: usize, right: usize },
    #[error("inconsistent counts: joint {joint} exceeds min of {src} and {tgt}")]
    InconsistentCounts { src: u64, tgt: u64, joint: u64 },
    #[error("glossary line {line}: {reason}")]
    GlossaryParse { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub pos: String,
    pub lemma: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedSentence {
    pub tokens: Vec<TaggedToken>,
}

/// Parses tagger output: one `surface<TAB>pos<TAB>lemma` token per line,
/// blank line between sentences. A lemma of `<unknown>` or an empty lemma
/// falls back to the surface form.
pub fn parse_tagged_corpus(text: &str) -> Result<Vec<TaggedSentence>, MweError> {
    let mut sentences = Vec::new();
    let mut current = TaggedSentence::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !current.tokens.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(MweError::TaggedParse {
                line: idx + 1,
                reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let (surface, pos, lemma) = (fields[0], fields[1], fields[2]);
        if surface.is_empty() || pos.is_empty() {
            return Err(MweError::TaggedParse {
                line: idx + 1,
                reason: "surface and pos must be non-empty".to_string(),
            });
        }
        let lemma = if lemma.is_empty() || lemma == "<unknown>" {
            surface
        } else {
            lemma
        };
        current.tokens.push(TaggedToken {
            surface: surface.to_string(),
            pos: pos.to_string(),
            lemma: lemma.to_string(),
        });
    }
    if !current.tokens.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagMatcher {
    /// `*`: any tag.
    Any,
    /// `N*`: any tag with the given prefix.
    Prefix(String),
    /// A literal tag.
    Exact(String),
}

impl TagMatcher {
    fn parse(token: &str) -> TagMatcher {
        if token == "*" {
            TagMatcher::Any
        } else if let Some(prefix) = token.strip_suffix('*') {
            TagMatcher::Prefix(prefix.to_string())
        } else {
            TagMatcher::Exact(token.to_string())
        }
    }

    fn matches(&self, tag: &str) -> bool {
        match self {
            TagMatcher::Any => true,
            TagMatcher::Prefix(prefix) => tag.starts_with(prefix.as_str()),
            TagMatcher::Exact(exact) => tag == exact,
        }
    }
}

/// A named sequence of 2..=7 tag matchers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosPattern {
    pub name: String,
    pub matchers: Vec<TagMatcher>,
}

/// Pattern spans are MWEs: at least two tokens, and no longer than seven.
pub const PATTERN_MIN_LEN: usize = 2;
pub const PATTERN_MAX_LEN: usize = 7;

impl PosPattern {
    pub fn new(name: &str, tags: &[&str]) -> Result<PosPattern, MweError> {
        let matchers: Vec<TagMatcher> = tags.iter().map(|t| TagMatcher::parse(t)).collect();
        let pattern = PosPattern {
            name: name.to_string(),
            matchers,
        };
        pattern.check()?;
        Ok(pattern)
    }

    fn check(&self) -> Result<(), MweError> {
        let n = self.matchers.len();
        if !(PATTERN_MIN_LEN..=PATTERN_MAX_LEN).contains(&n) {
            return Err(MweError::InvalidPattern {
                name: self.name.clone(),
                reason: format!(
                    "length {n} outside {PATTERN_MIN_LEN}..={PATTERN_MAX_LEN} tokens"
                ),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.matchers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchers.is_empty()
    }
}

/// Parses a pattern file: one `name: TAG TAG ...` per line, `*` as wildcard,
/// `#` comments and blank lines skipped.
pub fn parse_pattern_file(text: &str) -> Result<Vec<PosPattern>, MweError> {
    let mut patterns = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, tags) = line.split_once(':').ok_or_else(|| MweError::PatternParse {
            line: idx + 1,
            reason: "expected `name: TAG TAG ...`".to_string(),
        })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(MweError::PatternParse {
                line: idx + 1,
                reason: "empty pattern name".to_string(),
            });
        }
        let tags: Vec<&str> = tags.split_whitespace().collect();
        let pattern = PosPattern::new(name, &tags).map_err(|e| MweError::PatternParse {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        patterns.push(pattern);
    }
    Ok(patterns)
}

/// A monolingual candidate: the surface tokens of one pattern match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MweCandidate {
    pub tokens: Vec<String>,
    pub pattern: String,
    pub frequency: u64,
}

impl MweCandidate {
    pub fn phrase(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Emits every contiguous window of `sentence` matched by any pattern,
/// overlaps included, in position order then pattern order.
pub fn match_patterns(sentence: &TaggedSentence, patterns: &[PosPattern]) -> Vec<MweCandidate> {
    let tags: Vec<&str> = sentence.tokens.iter().map(|t| t.pos.as_str()).collect();
    let mut out = Vec::new();
    for start in 0..tags.len() {
        for pattern in patterns {
            let end = start + pattern.len();
            if end > tags.len() {
                continue;
            }
            let matched = pattern
                .matchers
                .iter()
                .zip(&tags[start..end])
                .all(|(m, tag)| m.matches(tag));
            if matched {
                out.push(MweCandidate {
                    tokens: sentence.tokens[start..end]
                        .iter()
                        .map(|t| t.surface.clone())
                        .collect(),
                    pattern: pattern.name.clone(),
                    frequency: 1,
                });
            }
        }
    }
    out
}

/// Corpus-level candidate extraction: per-sentence matches merged by token
/// sequence, frequencies summed, first-seen order preserved.
pub fn extract_candidates(
    corpus: &[TaggedSentence],
    patterns: &[PosPattern],
) -> Vec<MweCandidate> {
    let mut order: Vec<MweCandidate> = Vec::new();
    let mut index: HashMap<Vec<String>, usize> = HashMap::new();
    for sentence in corpus {
        for candidate in match_patterns(sentence, patterns) {
            match index.get(&candidate.tokens) {
                Some(&i) => order[i].frequency += 1,
                None => {
                    index.insert(candidate.tokens.clone(), order.len());
                    order.push(candidate);
                }
            }
        }
    }
    order
}

/// Marginal and joint sentence-level co-occurrence counts for one phrase
/// pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub src: u64,
    pub tgt: u64,
    pub joint: u64,
}

/// Dice coefficient `2·c(s,t) / (c(s) + c(t))`; 0 when either marginal is 0.
pub fn score_pair(counts: PairCounts) -> Result<f64, MweError> {
    if counts.joint > counts.src.min(counts.tgt) {
        return Err(MweError::InconsistentCounts {
            src: counts.src,
            tgt: counts.tgt,
            joint: counts.joint,
        });
    }
    if counts.src == 0 || counts.tgt == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * counts.joint as f64 / (counts.src + counts.tgt) as f64)
}

/// A scored bilingual phrase pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BilingualMwePair {
    pub source: String,
    pub target: String,
    pub score: f64,
}

/// Extracts and scores bilingual candidate pairs from sentence-aligned
/// tagged corpora.
///
/// Within each aligned sentence pair, every combination of a source-side and
/// a target-side candidate counts as one co-occurrence. Scores are Dice
/// coefficients over sentence-level counts across the whole corpus.
/// `min_frequency` drops candidates occurring fewer times than that in their
/// corpus. The result is sorted by descending score, ties broken by source
/// then target phrase order.
pub fn extract_bilingual(
    src_corpus: &[TaggedSentence],
    tgt_corpus: &[TaggedSentence],
    src_patterns: &[PosPattern],
    tgt_patterns: &[PosPattern],
    min_frequency: u64,
) -> Result<Vec<BilingualMwePair>, MweError> {
    if src_corpus.len() != tgt_corpus.len() {
        return Err(MweError::UnalignedCorpora {
            left: src_corpus.len(),
            right: tgt_corpus.len(),
        });
    }

    let src_occurrences = occurrence_counts(src_corpus, src_patterns);
    let tgt_occurrences = occurrence_counts(tgt_corpus, tgt_patterns);

    let mut src_sentences: HashMap<String, u64> = HashMap::new();
    let mut tgt_sentences: HashMap<String, u64> = HashMap::new();
    let mut joint: HashMap<(String, String), u64> = HashMap::new();

    for (src_sentence, tgt_sentence) in src_corpus.iter().zip(tgt_corpus) {
        let src_phrases = distinct_phrases(src_sentence, src_patterns, &src_occurrences, min_frequency);
        let tgt_phrases = distinct_phrases(tgt_sentence, tgt_patterns, &tgt_occurrences, min_frequency);
        for phrase in &src_phrases {
            *src_sentences.entry(phrase.clone()).or_insert(0) += 1;
        }
        for phrase in &tgt_phrases {
            *tgt_sentences.entry(phrase.clone()).or_insert(0) += 1;
        }
        for s in &src_phrases {
            for t in &tgt_phrases {
                *joint.entry((s.clone(), t.clone())).or_insert(0) += 1;
            }
        }
    }

    let mut pairs = Vec::with_capacity(joint.len());
    for ((source, target), joint_count) in joint {
        let counts = PairCounts {
            src: src_sentences[&source],
            tgt: tgt_sentences[&target],
            joint: joint_count,
        };
        let score = score_pair(counts)?;
        pairs.push(BilingualMwePair {
            source,
            target,
            score,
        });
    }
    pairs.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.source.cmp(&b.source))
            .then_with(|| a.target.cmp(&b.target))
    });
    Ok(pairs)
}

fn occurrence_counts(corpus: &[TaggedSentence], patterns: &[PosPattern]) -> HashMap<String, u64> {
    extract_candidates(corpus, patterns)
        .into_iter()
        .map(|c| (c.phrase(), c.frequency))
        .collect()
}

fn distinct_phrases(
    sentence: &TaggedSentence,
    patterns: &[PosPattern],
    occurrences: &HashMap<String, u64>,
    min_frequency: u64,
) -> Vec<String> {
    let mut phrases = Vec::new();
    for candidate in match_patterns(sentence, patterns) {
        let phrase = candidate.phrase();
        if occurrences.get(&phrase).copied().unwrap_or(0) < min_frequency {
            continue;
        }
        if !phrases.contains(&phrase) {
            phrases.push(phrase);
        }
    }
    phrases
}

/// Keeps exactly the pairs scoring at or above `threshold` (inclusive),
/// order preserved. Idempotent.
pub fn filter_pairs(pairs: Vec<BilingualMwePair>, threshold: f64) -> Vec<BilingualMwePair> {
    pairs
        .into_iter()
        .filter(|p| p.score >= threshold)
        .collect()
}

/// Replaces each pair's source phrase with its decomposed piece form; target
/// and score are untouched.
pub fn decompose_glossary(
    pairs: &[BilingualMwePair],
    table: &DecompositionTable,
    cfg: &TransformConfig,
) -> Vec<BilingualMwePair> {
    pairs
        .iter()
        .map(|pair| BilingualMwePair {
            source: transform_line(&pair.source, table, cfg),
            target: pair.target.clone(),
            score: pair.score,
        })
        .collect()
}

/// Appends each pair as one aligned pseudo-sentence pair at the end of the
/// training corpus. Original lines are untouched.
pub fn inject_glossary(
    train_src: Vec<String>,
    train_tgt: Vec<String>,
    pairs: &[BilingualMwePair],
) -> Result<(Vec<String>, Vec<String>), MweError> {
    if train_src.len() != train_tgt.len() {
        return Err(MweError::UnalignedCorpora {
            left: train_src.len(),
            right: train_tgt.len(),
        });
    }
    let mut src = train_src;
    let mut tgt = train_tgt;
    src.reserve(pairs.len());
    tgt.reserve(pairs.len());
    for pair in pairs {
        src.push(pair.source.clone());
        tgt.push(pair.target.clone());
    }
    Ok((src, tgt))
}

/// Writes a glossary as TSV `source<TAB>target<TAB>score`, score to six
/// decimal places.
pub fn write_glossary<W: Write>(mut out: W, pairs: &[BilingualMwePair]) -> std::io::Result<()> {
    for pair in pairs {
        writeln!(out, "{}\t{}\t{:.6}", pair.source, pair.target, pair.score)?;
    }
    Ok(())
}

/// Reads a glossary TSV written by [`write_glossary`].
pub fn read_glossary(text: &str) -> Result<Vec<BilingualMwePair>, MweError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(MweError::GlossaryParse {
                line: idx + 1,
                reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(MweError::GlossaryParse {
                line: idx + 1,
                reason: "phrases must be non-empty".to_string(),
            });
        }
        let score: f64 = fields[2].parse().map_err(|_| MweError::GlossaryParse {
            line: idx + 1,
            reason: format!("unparseable score {:?}", fields[2]),
        })?;
        if !(0.0..=1.0).contains(&score) {
            return Err(MweError::GlossaryParse {
                line: idx + 1,
                reason: format!("score {score} outside [0, 1]"),
            });
        }
        pairs.push(BilingualMwePair {
            source: fields[0].to_string(),
            target: fields[1].to_string(),
            score,
        });
    }
    Ok(pairs)
}
