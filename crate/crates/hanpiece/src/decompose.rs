//! Level-based character decomposition.
//!
//! A [`DecompositionTable`] holds one selected expression per character.
//! Decomposing at level L applies L substitution passes to a flat piece
//! sequence: each pass replaces every character piece that has a
//! non-reflexive table entry with the flattened pieces of its expression.
//! Atoms, entity references, IDC operators and out-of-dictionary characters
//! pass through unchanged, so the sequence eventually stabilizes at the
//! stroke-level fixpoint.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::ids::{self, IdsEntry, IdsExpression, Leaf, SourceTag};

/// One element of a decomposed sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Piece {
    /// An encoded character.
    Char(char),
    /// An entity reference token for an unencoded component (name without
    /// the `&`/`;` delimiters). Always atomic.
    Entity(String),
    /// A structural IDC operator, present only when the configuration keeps
    /// them.
    Operator(char),
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Char(c) | Piece::Operator(c) => write!(f, "{c}"),
            Piece::Entity(name) => write!(f, "&{name};"),
        }
    }
}

/// A flat, ordered decomposition result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PieceSequence(pub Vec<Piece>);

impl PieceSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Piece> {
        self.0.iter()
    }

    pub fn contains_char(&self, c: char) -> bool {
        self.0.iter().any(|p| matches!(p, Piece::Char(x) if *x == c))
    }
}

impl fmt::Display for PieceSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, piece) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{piece}")?;
        }
        Ok(())
    }
}

/// Controls decomposition depth and output shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionConfig {
    /// Number of substitution passes. 0 is the identity.
    pub level: usize,
    /// Emit IDC operators as pieces. Dropping them yields a pure
    /// radical/stroke stream.
    pub keep_idc_operators: bool,
    /// Upper bound for fixpoint iteration.
    pub max_fixpoint_iterations: usize,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig {
            level: 1,
            keep_idc_operators: true,
            max_fixpoint_iterations: 16,
        }
    }
}

impl DecompositionConfig {
    pub fn with_level(level: usize) -> DecompositionConfig {
        DecompositionConfig {
            level,
            ..DecompositionConfig::default()
        }
    }

    /// Checks `level <= max_fixpoint_iterations` and a positive cap.
    pub fn validate(&self) -> Result<(), TableError> {
        if self.max_fixpoint_iterations == 0 {
            return Err(TableError::InvalidConfig(
                "max_fixpoint_iterations must be positive".to_string(),
            ));
        }
        if self.level > self.max_fixpoint_iterations {
            return Err(TableError::InvalidConfig(format!(
                "level {} exceeds max_fixpoint_iterations {}",
                self.level, self.max_fixpoint_iterations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("duplicate table entry for {0:?}")]
    DuplicateGlyph(char),
    #[error("invalid decomposition config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug)]
struct TableSlot {
    expression: IdsExpression,
    /// Flattened pre-order pieces of the expression, operators included.
    pieces: Vec<Piece>,
    /// Leaf count only, for the operator-dropping mode.
    leaf_count: usize,
    /// False for reflexive entries and for expressions that mention their
    /// own character, which are treated as atoms to break the loop.
    expandable: bool,
}

/// Immutable map from character to its selected decomposition expression.
#[derive(Debug)]
pub struct DecompositionTable {
    slots: HashMap<char, TableSlot>,
    preference: Vec<SourceTag>,
}

fn flatten(expr: &IdsExpression, out: &mut Vec<Piece>) {
    match expr {
        IdsExpression::Operator { idc, children } => {
            out.push(Piece::Operator(*idc));
            for child in children {
                flatten(child, out);
            }
        }
        IdsExpression::Leaf(Leaf::Char(c)) => out.push(Piece::Char(*c)),
        IdsExpression::Leaf(Leaf::Entity(name)) => out.push(Piece::Entity(name.clone())),
    }
}

/// Builds the table by applying [`ids::select_variant`] to every entry.
pub fn build_table(
    entries: &[IdsEntry],
    preference: &[SourceTag],
) -> Result<DecompositionTable, TableError> {
    let mut slots = HashMap::with_capacity(entries.len());
    for entry in entries {
        let expression = ids::select_variant(entry, preference).clone();
        let mut pieces = Vec::new();
        flatten(&expression, &mut pieces);
        let leaf_count = pieces
            .iter()
            .filter(|p| !matches!(p, Piece::Operator(_)))
            .count();
        let reflexive = expression.is_reflexive(entry.glyph);
        let self_looping = pieces
            .iter()
            .any(|p| matches!(p, Piece::Char(c) if *c == entry.glyph));
        let slot = TableSlot {
            expression,
            pieces,
            leaf_count,
            expandable: !reflexive && !self_looping,
        };
        if slots.insert(entry.glyph, slot).is_some() {
            return Err(TableError::DuplicateGlyph(entry.glyph));
        }
    }
    Ok(DecompositionTable {
        slots,
        preference: preference.to_vec(),
    })
}

impl DecompositionTable {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn preference(&self) -> &[SourceTag] {
        &self.preference
    }

    /// The expression selected for `c` at build time, if any.
    pub fn expression(&self, c: char) -> Option<&IdsExpression> {
        self.slots.get(&c).map(|s| &s.expression)
    }

    /// Characters with a table entry, in unspecified order.
    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.slots.keys().copied()
    }

    /// True when `c` has no entry or its entry is reflexive.
    pub fn is_atom(&self, c: char) -> bool {
        match self.slots.get(&c) {
            None => true,
            Some(slot) => slot.expression.is_reflexive(c),
        }
    }

    fn expansion(&self, c: char) -> Option<&TableSlot> {
        self.slots.get(&c).filter(|slot| slot.expandable)
    }

    /// True when a substitution pass would replace `c`. Stricter than
    /// `!is_atom(c)`: a self-mentioning expression does not expand.
    pub fn expands(&self, c: char) -> bool {
        self.expansion(c).is_some()
    }

    /// Every entry's flattened one-step expansion, operators included.
    pub fn expansions(&self) -> impl Iterator<Item = (char, &[Piece])> {
        self.slots
            .iter()
            .map(|(glyph, slot)| (*glyph, slot.pieces.as_slice()))
    }

    /// One substitution pass over `seq`.
    fn step(&self, seq: &[Piece], keep_idc_operators: bool) -> Vec<Piece> {
        let mut next = Vec::with_capacity(seq.len());
        for piece in seq {
            match piece {
                Piece::Char(c) => match self.expansion(*c) {
                    Some(slot) => {
                        if keep_idc_operators {
                            next.extend(slot.pieces.iter().cloned());
                        } else {
                            next.reserve(slot.leaf_count);
                            next.extend(
                                slot.pieces
                                    .iter()
                                    .filter(|p| !matches!(p, Piece::Operator(_)))
                                    .cloned(),
                            );
                        }
                    }
                    None => next.push(piece.clone()),
                },
                other => next.push(other.clone()),
            }
        }
        next
    }

    /// Decomposes a single character at the configured level.
    pub fn decompose_char(&self, c: char, cfg: &DecompositionConfig) -> PieceSequence {
        let mut seq = vec![Piece::Char(c)];
        for _ in 0..cfg.level {
            seq = self.step(&seq, cfg.keep_idc_operators);
        }
        PieceSequence(seq)
    }

    /// Iterates substitution passes until the sequence stops changing or the
    /// configured cap is reached.
    pub fn decompose_to_fixpoint(&self, c: char, cfg: &DecompositionConfig) -> FixpointResult {
        let mut seq = vec![Piece::Char(c)];
        let mut levels_used = 0;
        loop {
            if levels_used >= cfg.max_fixpoint_iterations {
                return FixpointResult {
                    pieces: PieceSequence(seq),
                    levels_used,
                    converged: false,
                };
            }
            let next = self.step(&seq, cfg.keep_idc_operators);
            if next == seq {
                return FixpointResult {
                    pieces: PieceSequence(seq),
                    levels_used,
                    converged: true,
                };
            }
            seq = next;
            levels_used += 1;
        }
    }
}

/// Result of [`DecompositionTable::decompose_to_fixpoint`]. `converged` is
/// false when the iteration cap was hit before the sequence stabilized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixpointResult {
    pub pieces: PieceSequence,
    pub levels_used: usize,
    pub converged: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{default_preference, parse_ids_file};

    fn table_from(text: &str) -> DecompositionTable {
        let entries = parse_ids_file(text).unwrap();
        build_table(&entries, &default_preference()).unwrap()
    }

    fn small_table() -> DecompositionTable {
        table_from(
            "U+4E00\t一\t一\nU+660E\t明\t⿰日月\nU+65E5\t日\t日\nU+6708\t月\t月\nU+5929\t天\t天\n",
        )
    }

    fn pieces(table: &DecompositionTable, c: char, level: usize) -> String {
        table
            .decompose_char(c, &DecompositionConfig::with_level(level))
            .to_string()
    }

    #[test]
    fn builds_table_with_atoms_and_trees() {
        let table = table_from("U+4E00\t一\t一\nU+660E\t明\t⿰日月\n");
        assert_eq!(table.len(), 2);
        assert!(table.is_atom('一'));
        assert!(!table.is_atom('明'));
        assert_eq!(table.expression('明').unwrap().serialize(), "⿰日月");
    }

    #[test]
    fn empty_entry_list_gives_empty_table() {
        let table = build_table(&[], &default_preference()).unwrap();
        assert!(table.is_empty());
        assert!(table.is_atom('明'));
        assert_eq!(pieces(&table, '明', 3), "明");
    }

    #[test]
    fn table_applies_variant_preference() {
        let table = table_from("U+4E43\t乃\t⿻𠄌乀[GTK]\t⿻丿𠄎[J]\n");
        assert_eq!(table.expression('乃').unwrap().serialize(), "⿻𠄌乀");
    }

    #[test]
    fn duplicate_glyphs_are_an_error() {
        let entries = parse_ids_file("U+4E00\t一\t一\n").unwrap();
        let doubled: Vec<_> = entries.iter().cloned().chain(entries.clone()).collect();
        assert_eq!(
            build_table(&doubled, &default_preference()).unwrap_err(),
            TableError::DuplicateGlyph('一')
        );
    }

    #[test]
    fn level_zero_is_identity() {
        let table = small_table();
        for c in ['明', '一', 'A', '↯'] {
            assert_eq!(pieces(&table, c, 0), c.to_string());
        }
    }

    #[test]
    fn level_one_splits_into_radicals() {
        let table = small_table();
        assert_eq!(pieces(&table, '明', 1), "⿰ 日 月");
    }

    #[test]
    fn atoms_are_fixed_points() {
        let table = small_table();
        assert_eq!(pieces(&table, '一', 3), "一");
        assert_eq!(pieces(&table, '天', 5), "天");
    }

    #[test]
    fn out_of_dictionary_characters_pass_through() {
        let table = small_table();
        assert_eq!(pieces(&table, 'A', 4), "A");
        assert!(table.is_atom('A'));
    }

    #[test]
    fn operators_can_be_dropped() {
        let table = small_table();
        let cfg = DecompositionConfig {
            level: 1,
            keep_idc_operators: false,
            ..DecompositionConfig::default()
        };
        assert_eq!(table.decompose_char('明', &cfg).to_string(), "日 月");
    }

    #[test]
    fn self_looping_entry_is_treated_as_atom() {
        // 木's expression mentions 木 itself: expanding would never settle.
        let table = table_from("U+6728\t木\t⿻木一\n");
        assert_eq!(pieces(&table, '木', 4), "木");
        let result = table.decompose_to_fixpoint('木', &DecompositionConfig::default());
        assert!(result.converged);
        assert_eq!(result.levels_used, 0);
        // The entry is not reflexive, so it is not an atom in the dictionary
        // sense even though substitution leaves it alone.
        assert!(!table.is_atom('木'));
    }

    #[test]
    fn fixpoint_of_atom_is_immediate() {
        let table = small_table();
        let result = table.decompose_to_fixpoint('一', &DecompositionConfig::default());
        assert_eq!(result.pieces.to_string(), "一");
        assert_eq!(result.levels_used, 0);
        assert!(result.converged);
    }

    #[test]
    fn fixpoint_of_two_level_character() {
        let table = small_table();
        let result = table.decompose_to_fixpoint('明', &DecompositionConfig::default());
        assert_eq!(result.pieces.to_string(), "⿰ 日 月");
        assert_eq!(result.levels_used, 1);
        assert!(result.converged);
    }

    #[test]
    fn indirect_cycle_hits_the_iteration_cap() {
        // 甲 and 由 rewrite to each other; the sequence flips forever.
        let table = table_from("U+7532\t甲\t由\nU+7531\t由\t甲\n");
        let result = table.decompose_to_fixpoint('甲', &DecompositionConfig::default());
        assert!(!result.converged);
        assert_eq!(result.levels_used, 16);
    }

    #[test]
    fn entity_references_are_atomic_pieces() {
        let table = table_from("U+4E52\t乒\t⿸&CDP-89CE;丶\n");
        assert_eq!(pieces(&table, '乒', 3), "⿸ &CDP-89CE; 丶");
    }

    #[test]
    fn monotone_piece_counts_per_level() {
        let table = small_table();
        for keep in [true, false] {
            for c in ['明', '一', 'x'] {
                let mut prev = 0;
                for level in 0..6 {
                    let cfg = DecompositionConfig {
                        level,
                        keep_idc_operators: keep,
                        ..DecompositionConfig::default()
                    };
                    let n = table.decompose_char(c, &cfg).len();
                    assert!(n >= prev, "{c} level {level}: {n} < {prev}");
                    prev = n;
                }
            }
        }
    }

    #[test]
    fn config_validation_rejects_bad_combinations() {
        let cfg = DecompositionConfig {
            level: 20,
            ..DecompositionConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(DecompositionConfig::default().validate().is_ok());
        let cfg = DecompositionConfig {
            max_fixpoint_iterations: 0,
            level: 0,
            keep_idc_operators: true,
        };
        assert!(cfg.validate().is_err());
    }
}
