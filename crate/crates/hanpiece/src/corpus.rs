//! Corpus transformation.
//!
//! Input is the usual MT preprocessing shape: UTF-8 text, one sentence per
//! line, tokens separated by single ASCII spaces (the corpus arrives
//! word-segmented). Each token's characters are decomposed at the configured
//! level and emitted as space-separated pieces; an explicit marker token is
//! placed between word groups so the original word boundaries survive in the
//! flat output stream. Tokens whose characters all pass through unchanged
//! (Latin words, numbers, atoms) are emitted verbatim, and a marker is only
//! placed next to groups that actually decomposed, so a line with nothing
//! to decompose comes out byte-identical.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::decompose::{DecompositionConfig, DecompositionTable, Piece};
use crate::ids::is_idc;

/// Default word-boundary marker (U+2016 DOUBLE VERTICAL LINE).
pub const DEFAULT_BOUNDARY_MARKER: &str = "‖";

/// Lines transformed per parallel batch. Fixed so that output and report are
/// independent of the worker count.
const CHUNK_LINES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformConfig {
    pub decomposition: DecompositionConfig,
    /// Token emitted between word groups. Must not collide with anything the
    /// decomposer can emit; checked by [`TransformConfig::validate`].
    pub word_boundary_marker: String,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            decomposition: DecompositionConfig::default(),
            word_boundary_marker: DEFAULT_BOUNDARY_MARKER.to_string(),
        }
    }
}

impl TransformConfig {
    pub fn with_level(level: usize) -> TransformConfig {
        TransformConfig {
            decomposition: DecompositionConfig::with_level(level),
            ..TransformConfig::default()
        }
    }

    /// Startup validation: the decomposition config is consistent and the
    /// marker cannot be mistaken for a piece produced by `table`.
    pub fn validate(&self, table: &DecompositionTable) -> Result<(), TransformError> {
        self.decomposition.validate()?;
        let marker = &self.word_boundary_marker;
        if marker.is_empty() {
            return Err(TransformError::MarkerCollision {
                marker: marker.clone(),
                reason: "marker must not be empty".to_string(),
            });
        }
        if marker.chars().any(char::is_whitespace) {
            return Err(TransformError::MarkerCollision {
                marker: marker.clone(),
                reason: "marker must not contain whitespace".to_string(),
            });
        }
        let mut marker_chars = marker.chars();
        let first = marker_chars.next().expect("non-empty");
        if marker_chars.next().is_none() {
            if is_idc(first) {
                return Err(TransformError::MarkerCollision {
                    marker: marker.clone(),
                    reason: "marker is an IDC operator".to_string(),
                });
            }
            if table.expression(first).is_some() {
                return Err(TransformError::MarkerCollision {
                    marker: marker.clone(),
                    reason: "marker is a dictionary character".to_string(),
                });
            }
        }
        for (glyph, pieces) in table.expansions() {
            for piece in pieces {
                let collides = match piece {
                    Piece::Char(c) => marker == &c.to_string(),
                    Piece::Entity(_) | Piece::Operator(_) => marker == &piece.to_string(),
                };
                if collides {
                    return Err(TransformError::MarkerCollision {
                        marker: marker.clone(),
                        reason: format!("marker appears in the expansion of {glyph:?}"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("word boundary marker {marker:?} is unusable: {reason}")]
    MarkerCollision { marker: String, reason: String },
    #[error("invalid transform config: {0}")]
    Config(#[from] crate::decompose::TableError),
    #[error("I/O error at line {line}: {source}")]
    Io {
        line: u64,
        #[source]
        source: io::Error,
    },
}

/// Exact totals for one transformation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransformReport {
    pub lines_in: u64,
    pub lines_out: u64,
    pub tokens_in: u64,
    pub pieces_out: u64,
    pub chars_decomposed: u64,
    pub chars_passed_through: u64,
}

impl std::fmt::Display for TransformReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "lines_in: {}", self.lines_in)?;
        writeln!(f, "lines_out: {}", self.lines_out)?;
        writeln!(f, "tokens_in: {}", self.tokens_in)?;
        writeln!(f, "pieces_out: {}", self.pieces_out)?;
        writeln!(f, "chars_decomposed: {}", self.chars_decomposed)?;
        write!(f, "chars_passed_through: {}", self.chars_passed_through)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct LineStats {
    tokens: u64,
    pieces: u64,
    chars_decomposed: u64,
    chars_passed_through: u64,
}

enum WordGroup<'a> {
    /// Token emitted unchanged: nothing in it decomposes at this level.
    Verbatim(&'a str),
    /// Space-joined pieces of a token in which at least one character
    /// decomposed.
    Pieces(String),
}

fn token_group<'a>(
    token: &'a str,
    table: &DecompositionTable,
    cfg: &TransformConfig,
    stats: &mut LineStats,
) -> WordGroup<'a> {
    let level = cfg.decomposition.level;
    let char_count = token.chars().count() as u64;
    if level == 0 || token.chars().all(|c| !table.expands(c)) {
        stats.chars_passed_through += char_count;
        stats.pieces += 1;
        return WordGroup::Verbatim(token);
    }
    let mut text = String::new();
    for c in token.chars() {
        if table.expands(c) {
            stats.chars_decomposed += 1;
        } else {
            stats.chars_passed_through += 1;
        }
        for piece in table.decompose_char(c, &cfg.decomposition).iter() {
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(&piece.to_string());
            stats.pieces += 1;
        }
    }
    WordGroup::Pieces(text)
}

fn transform_line_with_stats(
    line: &str,
    table: &DecompositionTable,
    cfg: &TransformConfig,
) -> (String, LineStats) {
    let mut stats = LineStats::default();
    if line.is_empty() {
        return (String::new(), stats);
    }
    let groups: Vec<WordGroup> = line
        .split(' ')
        .map(|token| {
            stats.tokens += 1;
            token_group(token, table, cfg, &mut stats)
        })
        .collect();

    let mut out = String::with_capacity(line.len());
    for (i, group) in groups.iter().enumerate() {
        if i > 0 {
            out.push(' ');
            let boundary_is_marked = matches!(groups[i - 1], WordGroup::Pieces(_))
                || matches!(group, WordGroup::Pieces(_));
            if boundary_is_marked {
                out.push_str(&cfg.word_boundary_marker);
                out.push(' ');
            }
        }
        match group {
            WordGroup::Verbatim(token) => out.push_str(token),
            WordGroup::Pieces(text) => out.push_str(text),
        }
    }
    (out, stats)
}

/// Transforms one pre-segmented line. The configuration is assumed to have
/// passed [`TransformConfig::validate`]; the function itself is total over
/// valid UTF-8.
pub fn transform_line(line: &str, table: &DecompositionTable, cfg: &TransformConfig) -> String {
    transform_line_with_stats(line, table, cfg).0
}

fn split_terminator(raw: &str) -> (&str, &str) {
    if let Some(stripped) = raw.strip_suffix("\r\n") {
        (stripped, "\r\n")
    } else if let Some(stripped) = raw.strip_suffix('\n') {
        (stripped, "\n")
    } else {
        (raw, "")
    }
}

/// Streams `input` to `output`, transforming every line in order.
///
/// Lines are processed in fixed-size batches that are transformed in
/// parallel on the current rayon pool; output order and the report are
/// identical whatever the worker count. Line terminators (LF, CRLF, or a
/// missing final newline) are passed through so an untouched corpus is
/// byte-identical.
pub fn transform_corpus<R: BufRead, W: Write>(
    input: R,
    output: W,
    table: &DecompositionTable,
    cfg: &TransformConfig,
) -> Result<TransformReport, TransformError> {
    cfg.validate(table)?;
    transform_corpus_unchecked(input, output, table, cfg)
}

fn transform_corpus_unchecked<R: BufRead, W: Write>(
    mut input: R,
    mut output: W,
    table: &DecompositionTable,
    cfg: &TransformConfig,
) -> Result<TransformReport, TransformError> {
    let mut report = TransformReport::default();
    let mut chunk: Vec<(String, &'static str)> = Vec::with_capacity(CHUNK_LINES);
    let mut buf = String::new();
    loop {
        buf.clear();
        let read_line_no = report.lines_in + chunk.len() as u64 + 1;
        let n = input
            .read_line(&mut buf)
            .map_err(|source| TransformError::Io {
                line: read_line_no,
                source,
            })?;
        if n > 0 {
            let (content, term) = split_terminator(&buf);
            let term = match term {
                "\r\n" => "\r\n",
                "\n" => "\n",
                _ => "",
            };
            chunk.push((content.to_string(), term));
        }
        if chunk.len() >= CHUNK_LINES || (n == 0 && !chunk.is_empty()) {
            flush_chunk(&chunk, &mut report, &mut output, table, cfg)?;
            chunk.clear();
        }
        if n == 0 {
            break;
        }
    }
    Ok(report)
}

fn flush_chunk<W: Write>(
    chunk: &[(String, &'static str)],
    report: &mut TransformReport,
    output: &mut W,
    table: &DecompositionTable,
    cfg: &TransformConfig,
) -> Result<(), TransformError> {
    let transformed: Vec<(String, LineStats)> = chunk
        .par_iter()
        .map(|(content, _)| transform_line_with_stats(content, table, cfg))
        .collect();
    for ((out_line, stats), (_, term)) in transformed.iter().zip(chunk) {
        report.lines_in += 1;
        write_all(output, out_line.as_bytes(), report.lines_out + 1)?;
        write_all(output, term.as_bytes(), report.lines_out + 1)?;
        report.lines_out += 1;
        report.tokens_in += stats.tokens;
        report.pieces_out += stats.pieces;
        report.chars_decomposed += stats.chars_decomposed;
        report.chars_passed_through += stats.chars_passed_through;
    }
    Ok(())
}

fn write_all<W: Write>(output: &mut W, bytes: &[u8], line: u64) -> Result<(), TransformError> {
    output
        .write_all(bytes)
        .map_err(|source| TransformError::Io { line, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::build_table;
    use crate::ids::{default_preference, parse_ids_file};

    fn table() -> DecompositionTable {
        let text = "U+4E00\t一\t一\nU+660E\t明\t⿰日月\nU+65E5\t日\t日\nU+6708\t月\t月\nU+5929\t天\t天\n";
        build_table(&parse_ids_file(text).unwrap(), &default_preference()).unwrap()
    }

    #[test]
    fn level_zero_is_identity() {
        let t = table();
        let cfg = TransformConfig::with_level(0);
        for line in ["明 天", "abc 123", "明天 的 明", ""] {
            assert_eq!(transform_line(line, &t, &cfg), line);
        }
    }

    #[test]
    fn atom_tokens_pass_through() {
        let t = table();
        let cfg = TransformConfig::with_level(3);
        assert_eq!(transform_line("abc 123", &t, &cfg), "abc 123");
    }

    #[test]
    fn boundary_marker_between_word_groups() {
        let t = table();
        let cfg = TransformConfig::with_level(1);
        assert_eq!(transform_line("明 天", &t, &cfg), "⿰ 日 月 ‖ 天");
        assert_eq!(transform_line("天 明", &t, &cfg), "天 ‖ ⿰ 日 月");
        assert_eq!(transform_line("明 明", &t, &cfg), "⿰ 日 月 ‖ ⿰ 日 月");
    }

    #[test]
    fn verbatim_runs_keep_plain_spaces() {
        let t = table();
        let cfg = TransformConfig::with_level(1);
        assert_eq!(
            transform_line("abc 123 明 xyz uvw", &t, &cfg),
            "abc 123 ‖ ⿰ 日 月 ‖ xyz uvw"
        );
    }

    #[test]
    fn mixed_token_decomposes_only_han() {
        let t = table();
        let cfg = TransformConfig::with_level(1);
        assert_eq!(transform_line("明x天 ok", &t, &cfg), "⿰ 日 月 x 天 ‖ ok");
    }

    #[test]
    fn empty_line_stays_empty() {
        let t = table();
        assert_eq!(transform_line("", &t, &TransformConfig::with_level(2)), "");
    }

    #[test]
    fn consecutive_spaces_survive_untouched_lines() {
        let t = table();
        let cfg = TransformConfig::with_level(3);
        assert_eq!(transform_line("a  b ", &t, &cfg), "a  b ");
    }

    #[test]
    fn marker_validation_rejects_collisions() {
        let t = table();
        let mut cfg = TransformConfig::with_level(1);
        assert!(cfg.validate(&t).is_ok());
        cfg.word_boundary_marker = "日".to_string();
        assert!(matches!(
            cfg.validate(&t),
            Err(TransformError::MarkerCollision { .. })
        ));
        cfg.word_boundary_marker = "⿰".to_string();
        assert!(cfg.validate(&t).is_err());
        cfg.word_boundary_marker = "a b".to_string();
        assert!(cfg.validate(&t).is_err());
        cfg.word_boundary_marker = String::new();
        assert!(cfg.validate(&t).is_err());
        cfg.word_boundary_marker = "<w>".to_string();
        assert!(cfg.validate(&t).is_ok());
    }

    #[test]
    fn corpus_report_counts_are_exact() {
        let t = table();
        let cfg = TransformConfig::with_level(1);
        let input = "明 天\nabc 123\n\n";
        let mut out = Vec::new();
        let report = transform_corpus(input.as_bytes(), &mut out, &t, &cfg).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "⿰ 日 月 ‖ 天\nabc 123\n\n"
        );
        assert_eq!(report.lines_in, 3);
        assert_eq!(report.lines_out, 3);
        assert_eq!(report.tokens_in, 4);
        // 明 expands to three pieces; 天, abc, 123 are one piece each.
        assert_eq!(report.pieces_out, 6);
        assert_eq!(report.chars_decomposed, 1);
        assert_eq!(report.chars_passed_through, 7);
    }

    #[test]
    fn latin_corpus_is_byte_identical() {
        let t = table();
        let cfg = TransformConfig::with_level(3);
        let input = "the quick fox\r\nsecond line\nlast without newline";
        let mut out = Vec::new();
        transform_corpus(input.as_bytes(), &mut out, &t, &cfg).unwrap();
        assert_eq!(out, input.as_bytes());
    }

    #[test]
    fn pieces_out_matches_an_output_side_recount() {
        let t = table();
        let cfg = TransformConfig::with_level(3);
        let input = "明 天 quick\n一 明\n\nabc 123\n明明 x 明\nthe end\n天 天 天\n明\nmix明ed tokens\n明 天 明 天\n";
        let mut out = Vec::new();
        let report = transform_corpus(input.as_bytes(), &mut out, &t, &cfg).unwrap();
        let text = String::from_utf8(out).unwrap();
        // every output token is either a piece or the boundary marker
        let marker = cfg.word_boundary_marker.as_str();
        let recount: u64 = text
            .lines()
            .flat_map(|line| line.split(' '))
            .filter(|tok| !tok.is_empty() && *tok != marker)
            .count() as u64;
        assert_eq!(report.pieces_out, recount);
        assert_eq!(report.lines_in, 10);
        assert_eq!(report.tokens_in, 22);
    }

    #[test]
    fn line_counts_are_preserved() {
        let t = table();
        let cfg = TransformConfig::with_level(2);
        let input: String = (0..100)
            .map(|i| {
                if i % 7 == 0 {
                    String::new()
                } else {
                    format!("明 token{i} 天")
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        let mut out = Vec::new();
        let report = transform_corpus(input.as_bytes(), &mut out, &t, &cfg).unwrap();
        assert_eq!(report.lines_in, 100);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.split('\n').count(), 100);
    }

    #[test]
    fn corpora_larger_than_one_chunk_stream_correctly() {
        let t = table();
        let cfg = TransformConfig::with_level(1);
        let n = CHUNK_LINES * 2 + 17;
        let input: String = (0..n).map(|i| format!("明 w{i}\n")).collect();
        let mut out = Vec::new();
        let report = transform_corpus(input.as_bytes(), &mut out, &t, &cfg).unwrap();
        assert_eq!(report.lines_in as usize, n);
        assert_eq!(report.lines_out as usize, n);
        assert_eq!(report.tokens_in as usize, 2 * n);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), n);
        assert!(text.starts_with("⿰ 日 月 ‖ w0\n"));
        assert!(text.ends_with(&format!("⿰ 日 月 ‖ w{}\n", n - 1)));
    }
}
