//! IDS dictionary parsing.
//!
//! An IDS (Ideographic Description Sequence) describes the spatial layout of
//! a CJK character in prefix notation: an IDC operator (U+2FF0..U+2FFB)
//! followed by its operands, which are themselves expressions. The dictionary
//! file maps each encoded character to one or more such expressions, each
//! optionally tagged with the glyph tradition it describes (`[GTK]`, `[J]`,
//! ...). A character whose expression is the character itself is an atom:
//! the dictionary's way of saying "this does not decompose".

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// First codepoint of the supported IDC operator block.
const IDC_FIRST: char = '\u{2FF0}';
/// Last codepoint of the supported IDC operator block.
const IDC_LAST: char = '\u{2FFB}';

/// Returns true for the twelve base IDC operators.
pub fn is_idc(c: char) -> bool {
    (IDC_FIRST..=IDC_LAST).contains(&c)
}

/// Extended description characters we reject: the Unicode 15.1 additions
/// directly after the base block and the subtraction operator.
fn is_rejected_idc(c: char) -> bool {
    ('\u{2FFC}'..='\u{2FFF}').contains(&c) || c == '\u{31EF}'
}

/// Operand count of an IDC operator. Only U+2FF2 (⿲) and U+2FF3 (⿳) take
/// three operands.
pub fn idc_arity(c: char) -> usize {
    match c {
        '\u{2FF2}' | '\u{2FF3}' => 3,
        _ => 2,
    }
}

/// Region tag attached to a dictionary expression (`G`, `T`, `J`, ...).
///
/// The known letters mark Mainland, Hong Kong, Taiwan, Japanese, Korean and
/// Vietnamese glyph traditions, but any uppercase ASCII letter is accepted
/// since the dictionary format has grown new tags over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceTag(char);

impl SourceTag {
    pub fn new(c: char) -> Result<SourceTag, ParseError> {
        if c.is_ascii_uppercase() {
            Ok(SourceTag(c))
        } else {
            Err(ParseError::new(
                Position::none(),
                ParseErrorKind::InvalidTag(c),
            ))
        }
    }

    pub fn letter(self) -> char {
        self.0
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The default variant preference: Mainland first, then Taiwan, Hong Kong,
/// Japanese, Korean, Vietnamese.
pub fn default_preference() -> Vec<SourceTag> {
    ['G', 'T', 'H', 'J', 'K', 'V']
        .into_iter()
        .map(SourceTag)
        .collect()
}

/// A leaf of an IDS expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Leaf {
    /// An encoded character (a single Unicode scalar).
    Char(char),
    /// An entity reference for an unencoded component, e.g. `&CDP-8B5E;`.
    /// The stored string is the name between `&` and `;`.
    Entity(String),
}

/// An IDS expression tree in prefix IDC notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IdsExpression {
    Operator {
        idc: char,
        children: Vec<IdsExpression>,
    },
    Leaf(Leaf),
}

impl IdsExpression {
    /// Serializes the tree back to its source text. Parsing followed by
    /// serialization reproduces the input byte-exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.write_to(&mut out);
        out
    }

    fn write_to(&self, out: &mut String) {
        match self {
            IdsExpression::Operator { idc, children } => {
                out.push(*idc);
                for child in children {
                    child.write_to(out);
                }
            }
            IdsExpression::Leaf(Leaf::Char(c)) => out.push(*c),
            IdsExpression::Leaf(Leaf::Entity(name)) => {
                out.push('&');
                out.push_str(name);
                out.push(';');
            }
        }
    }

    /// True when the expression is exactly the given character: the
    /// dictionary's atom convention.
    pub fn is_reflexive(&self, glyph: char) -> bool {
        matches!(self, IdsExpression::Leaf(Leaf::Char(c)) if *c == glyph)
    }

    /// Pre-order walk over the tree's leaves.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            IdsExpression::Operator { children, .. } => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
            IdsExpression::Leaf(leaf) => out.push(leaf),
        }
    }
}

/// One expression of a dictionary entry together with its region tags.
/// The tag list preserves source order; letters are unique within a variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub expression: IdsExpression,
    pub tags: Vec<SourceTag>,
}

impl Variant {
    pub fn has_tag(&self, tag: SourceTag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn is_untagged(&self) -> bool {
        self.tags.is_empty()
    }
}

/// One record of the IDS dictionary: a codepoint, its glyph, and at least
/// one decomposition variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdsEntry {
    pub codepoint: u32,
    pub glyph: char,
    pub variants: Vec<Variant>,
}

impl IdsEntry {
    /// True when the entry's only content is itself (no variant decomposes).
    pub fn is_atom(&self) -> bool {
        self.variants
            .iter()
            .all(|v| v.expression.is_reflexive(self.glyph))
    }
}

/// Line/column of a parse error. Columns count characters, 1-based; line 0
/// means "no line context" (bare expression parsing).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    fn none() -> Position {
        Position { line: 0, column: 0 }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "column {}", self.column)
        } else {
            write!(f, "line {}, column {}", self.line, self.column)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Input ended while an operator still expected operands.
    PrematureEnd,
    /// A complete expression was followed by extra characters.
    TrailingInput(char),
    /// `&` was not closed by `;` or the name contained invalid characters.
    UnterminatedEntity,
    /// Whitespace cannot be a component: pieces must stay whole tokens.
    WhitespaceComponent(char),
    /// An extended description character outside U+2FF0..U+2FFB.
    UnsupportedIdc(char),
    /// Empty expression field.
    EmptyExpression,
    /// Codepoint field is not `U+<hex>` or not a Unicode scalar value.
    MalformedCodepoint(String),
    /// The glyph field does not match the codepoint field.
    GlyphMismatch { codepoint: u32, glyph: String },
    /// Line does not have at least codepoint, glyph and one expression field.
    MissingFields(usize),
    /// The same codepoint appears on two lines.
    DuplicateCodepoint(u32),
    /// Tag suffix is present but empty or not uppercase ASCII letters.
    MalformedTagGroup(String),
    /// The same tag letter appears twice in one bracket group.
    DuplicateTag(char),
    /// Tag letter outside A-Z.
    InvalidTag(char),
    /// More than one variant of an entry carries no tags.
    MultipleUntaggedVariants,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::PrematureEnd => {
                write!(f, "expression ended before all operands were supplied")
            }
            ParseErrorKind::TrailingInput(c) => {
                write!(f, "trailing input after complete expression: {c:?}")
            }
            ParseErrorKind::UnterminatedEntity => write!(f, "unterminated entity reference"),
            ParseErrorKind::WhitespaceComponent(c) => {
                write!(f, "whitespace {c:?} cannot appear in an expression")
            }
            ParseErrorKind::UnsupportedIdc(c) => write!(
                f,
                "unsupported ideographic description character U+{:04X}",
                *c as u32
            ),
            ParseErrorKind::EmptyExpression => write!(f, "empty expression"),
            ParseErrorKind::MalformedCodepoint(s) => write!(f, "malformed codepoint field {s:?}"),
            ParseErrorKind::GlyphMismatch { codepoint, glyph } => write!(
                f,
                "glyph field {glyph:?} does not match codepoint U+{codepoint:04X}"
            ),
            ParseErrorKind::MissingFields(n) => {
                write!(f, "expected at least 3 tab-separated fields, found {n}")
            }
            ParseErrorKind::DuplicateCodepoint(cp) => {
                write!(f, "duplicate entry for codepoint U+{cp:04X}")
            }
            ParseErrorKind::MalformedTagGroup(s) => write!(f, "malformed tag group {s:?}"),
            ParseErrorKind::DuplicateTag(c) => write!(f, "duplicate tag letter {c:?}"),
            ParseErrorKind::InvalidTag(c) => write!(f, "tag letter {c:?} is not A-Z"),
            ParseErrorKind::MultipleUntaggedVariants => {
                write!(f, "more than one untagged variant")
            }
        }
    }
}

/// Parse error with source position.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(position: Position, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }

    fn at_line(mut self, line: usize) -> ParseError {
        self.position.line = line;
        self
    }
}

struct ExprParser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    /// 1-based character offset of the next character to be consumed,
    /// relative to the start of the enclosing line.
    column: usize,
}

impl<'a> ExprParser<'a> {
    fn new(s: &'a str, start_column: usize) -> ExprParser<'a> {
        ExprParser {
            chars: s.chars().peekable(),
            column: start_column,
        }
    }

    fn here(&self) -> Position {
        Position {
            line: 0,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c.is_some() {
            self.column += 1;
        }
        c
    }

    fn parse_expression(&mut self) -> Result<IdsExpression, ParseError> {
        let pos = self.here();
        let c = self
            .bump()
            .ok_or_else(|| ParseError::new(pos, ParseErrorKind::PrematureEnd))?;
        if is_idc(c) {
            let arity = idc_arity(c);
            let mut children = Vec::with_capacity(arity);
            for _ in 0..arity {
                children.push(self.parse_expression()?);
            }
            Ok(IdsExpression::Operator { idc: c, children })
        } else if is_rejected_idc(c) {
            Err(ParseError::new(pos, ParseErrorKind::UnsupportedIdc(c)))
        } else if c == '&' {
            let mut name = String::new();
            loop {
                match self.bump() {
                    Some(';') => break,
                    Some(c) if c.is_ascii_alphanumeric() || c == '+' || c == '-' => name.push(c),
                    _ => return Err(ParseError::new(pos, ParseErrorKind::UnterminatedEntity)),
                }
            }
            if name.is_empty() {
                return Err(ParseError::new(pos, ParseErrorKind::UnterminatedEntity));
            }
            Ok(IdsExpression::Leaf(Leaf::Entity(name)))
        } else if c.is_whitespace() {
            Err(ParseError::new(pos, ParseErrorKind::WhitespaceComponent(c)))
        } else {
            Ok(IdsExpression::Leaf(Leaf::Char(c)))
        }
    }
}

/// Parses a single IDS expression. The whole input must be consumed.
pub fn parse_ids_expression(s: &str) -> Result<IdsExpression, ParseError> {
    parse_expression_at(s, 1)
}

/// As [`parse_ids_expression`], reporting columns relative to an enclosing
/// line: `start_column` is the 1-based character offset of `s` in that line.
fn parse_expression_at(s: &str, start_column: usize) -> Result<IdsExpression, ParseError> {
    if s.is_empty() {
        return Err(ParseError::new(
            Position {
                line: 0,
                column: start_column,
            },
            ParseErrorKind::EmptyExpression,
        ));
    }
    let mut parser = ExprParser::new(s, start_column);
    let expr = parser.parse_expression()?;
    if let Some(&c) = parser.chars.peek() {
        return Err(ParseError::new(
            parser.here(),
            ParseErrorKind::TrailingInput(c),
        ));
    }
    Ok(expr)
}

/// Splits an expression field into expression text and tag letters. The tag
/// group is a trailing `[...]` whose content must be uppercase ASCII.
fn split_tag_suffix(field: &str) -> Result<(&str, Vec<SourceTag>), ParseErrorKind> {
    if !field.ends_with(']') {
        return Ok((field, Vec::new()));
    }
    let open = match field.rfind('[') {
        Some(i) => i,
        None => return Err(ParseErrorKind::MalformedTagGroup(field.to_string())),
    };
    let inner = &field[open + 1..field.len() - 1];
    if inner.is_empty() || !inner.chars().all(|c| c.is_ascii_uppercase()) {
        return Err(ParseErrorKind::MalformedTagGroup(
            field[open..].to_string(),
        ));
    }
    let mut tags = Vec::with_capacity(inner.len());
    for c in inner.chars() {
        let tag = SourceTag(c);
        if tags.contains(&tag) {
            return Err(ParseErrorKind::DuplicateTag(c));
        }
        tags.push(tag);
    }
    Ok((&field[..open], tags))
}

fn parse_codepoint_field(field: &str) -> Result<u32, ParseErrorKind> {
    let hex = field
        .strip_prefix("U+")
        .ok_or_else(|| ParseErrorKind::MalformedCodepoint(field.to_string()))?;
    if hex.is_empty() || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(ParseErrorKind::MalformedCodepoint(field.to_string()));
    }
    let cp = u32::from_str_radix(hex, 16)
        .map_err(|_| ParseErrorKind::MalformedCodepoint(field.to_string()))?;
    if char::from_u32(cp).is_none() {
        return Err(ParseErrorKind::MalformedCodepoint(field.to_string()));
    }
    Ok(cp)
}

/// Parses a whole IDS dictionary document.
///
/// Records are `U+XXXX<TAB>glyph<TAB>expr[<TAB>expr]*`, one per line, with an
/// optional `[TAGS]` suffix per expression. Lines starting with `;;` are
/// comments; blank lines are skipped. LF and CRLF endings are both accepted.
/// Entry order is preserved and duplicate codepoints are an error.
pub fn parse_ids_file(text: &str) -> Result<Vec<IdsEntry>, ParseError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.is_empty() || line.starts_with(";;") {
            continue;
        }
        let entry = parse_entry_line(line).map_err(|e| e.at_line(line_no))?;
        if !seen.insert(entry.codepoint) {
            return Err(ParseError::new(
                Position {
                    line: line_no,
                    column: 1,
                },
                ParseErrorKind::DuplicateCodepoint(entry.codepoint),
            ));
        }
        entries.push(entry);
    }
    Ok(entries)
}

fn parse_entry_line(line: &str) -> Result<IdsEntry, ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 3 {
        return Err(ParseError::new(
            Position { line: 0, column: 1 },
            ParseErrorKind::MissingFields(fields.len()),
        ));
    }

    let codepoint = parse_codepoint_field(fields[0])
        .map_err(|kind| ParseError::new(Position { line: 0, column: 1 }, kind))?;
    let expected = char::from_u32(codepoint).expect("validated scalar");

    let glyph_column = fields[0].chars().count() + 2;
    let mut glyph_chars = fields[1].chars();
    let glyph = glyph_chars.next();
    if glyph != Some(expected) || glyph_chars.next().is_some() {
        return Err(ParseError::new(
            Position {
                line: 0,
                column: glyph_column,
            },
            ParseErrorKind::GlyphMismatch {
                codepoint,
                glyph: fields[1].to_string(),
            },
        ));
    }

    // Character offset of the current field within the line, counting the
    // tab separators.
    let mut column = glyph_column + fields[1].chars().count() + 1;
    let mut variants = Vec::with_capacity(fields.len() - 2);
    let mut saw_untagged = false;
    for field in &fields[2..] {
        let (expr_text, tags) = split_tag_suffix(field).map_err(|kind| {
            ParseError::new(
                Position {
                    line: 0,
                    column: column + expr_text_len_on_error(field),
                },
                kind,
            )
        })?;
        let expression = parse_expression_at(expr_text, column)?;
        if tags.is_empty() {
            if saw_untagged {
                return Err(ParseError::new(
                    Position {
                        line: 0,
                        column,
                    },
                    ParseErrorKind::MultipleUntaggedVariants,
                ));
            }
            saw_untagged = true;
        }
        variants.push(Variant { expression, tags });
        column += field.chars().count() + 1;
    }

    Ok(IdsEntry {
        codepoint,
        glyph: expected,
        variants,
    })
}

// Point tag-group errors at the opening bracket when there is one.
fn expr_text_len_on_error(field: &str) -> usize {
    field.rfind('[').map_or(0, |i| field[..i].chars().count())
}

/// Picks one expression from an entry by region preference.
///
/// Walks `preference` in order and returns the first variant carrying the
/// current tag. Falls back to the first untagged variant, then to the first
/// variant. Total over valid entries: some expression is always returned.
pub fn select_variant<'a>(entry: &'a IdsEntry, preference: &[SourceTag]) -> &'a IdsExpression {
    for tag in preference {
        if let Some(v) = entry.variants.iter().find(|v| v.has_tag(*tag)) {
            return &v.expression;
        }
    }
    if let Some(v) = entry.variants.iter().find(|v| v.is_untagged()) {
        return &v.expression;
    }
    &entry.variants[0].expression
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(c: char) -> IdsExpression {
        IdsExpression::Leaf(Leaf::Char(c))
    }

    #[test]
    fn parses_binary_operator() {
        let expr = parse_ids_expression("⿰日月").unwrap();
        assert_eq!(
            expr,
            IdsExpression::Operator {
                idc: '⿰',
                children: vec![leaf('日'), leaf('月')],
            }
        );
    }

    #[test]
    fn parses_single_char() {
        assert_eq!(parse_ids_expression("日").unwrap(), leaf('日'));
    }

    #[test]
    fn parses_ternary_operator() {
        let expr = parse_ids_expression("⿲丨丨丨").unwrap();
        assert_eq!(
            expr,
            IdsExpression::Operator {
                idc: '⿲',
                children: vec![leaf('丨'), leaf('丨'), leaf('丨')],
            }
        );
    }

    #[test]
    fn missing_operand_is_an_error() {
        let err = parse_ids_expression("⿰日").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::PrematureEnd);
        assert_eq!(err.position.column, 3);
    }

    #[test]
    fn trailing_input_is_an_error() {
        let err = parse_ids_expression("⿰日月月").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TrailingInput('月'));
    }

    #[test]
    fn entity_reference_is_a_leaf() {
        let expr = parse_ids_expression("⿱&CDP-8B5E;一").unwrap();
        assert_eq!(
            expr,
            IdsExpression::Operator {
                idc: '⿱',
                children: vec![
                    IdsExpression::Leaf(Leaf::Entity("CDP-8B5E".to_string())),
                    leaf('一'),
                ],
            }
        );
        assert_eq!(expr.serialize(), "⿱&CDP-8B5E;一");
    }

    #[test]
    fn unterminated_entity_is_an_error() {
        let err = parse_ids_expression("&CDP-8B5E").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnterminatedEntity);
    }

    #[test]
    fn whitespace_components_are_rejected() {
        let err = parse_ids_expression("⿰ 日").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::WhitespaceComponent(' '));
        assert_eq!(err.position.column, 2);
        assert!(parse_ids_expression(" ").is_err());
    }

    #[test]
    fn extended_idc_is_rejected_by_codepoint() {
        let err = parse_ids_expression("\u{2FFC}日月").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnsupportedIdc('\u{2FFC}'));
        assert!(err.to_string().contains("U+2FFC"));
    }

    #[test]
    fn nested_expressions_round_trip() {
        for s in ["⿰日月", "⿳亼吅从", "⿱人⿻王丷", "⿲丨&AJ1-13890;丨", "𠄌"] {
            let expr = parse_ids_expression(s).unwrap();
            assert_eq!(expr.serialize(), s);
        }
    }

    #[test]
    fn parses_atom_entry_line() {
        let entries = parse_ids_file("U+4E00\t一\t一\n").unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].codepoint, 0x4E00);
        assert_eq!(entries[0].glyph, '一');
        assert_eq!(entries[0].variants.len(), 1);
        assert!(entries[0].variants[0].is_untagged());
        assert!(entries[0].is_atom());
    }

    #[test]
    fn parses_tagged_variants() {
        let entries = parse_ids_file("U+4E43\t乃\t⿻𠄌乀[GTK]\t⿻丿𠄎[J]\n").unwrap();
        assert_eq!(entries.len(), 1);
        let entry = &entries[0];
        assert_eq!(entry.variants.len(), 2);
        let tags0: Vec<char> = entry.variants[0].tags.iter().map(|t| t.letter()).collect();
        let tags1: Vec<char> = entry.variants[1].tags.iter().map(|t| t.letter()).collect();
        assert_eq!(tags0, vec!['G', 'T', 'K']);
        assert_eq!(tags1, vec!['J']);
        assert_eq!(entry.variants[0].expression.serialize(), "⿻𠄌乀");
        assert!(!entry.is_atom());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = ";; IDS fixture\n\nU+4E00\t一\t一\n;; another comment\r\nU+4E8C\t二\t⿱一一\r\n";
        let entries = parse_ids_file(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[1].codepoint, 0x4E8C);
    }

    #[test]
    fn duplicate_codepoint_is_an_error() {
        let err = parse_ids_file("U+4E00\t一\t一\nU+4E00\t一\t一\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateCodepoint(0x4E00));
        assert_eq!(err.position.line, 2);
    }

    #[test]
    fn glyph_mismatch_is_an_error() {
        let err = parse_ids_file("U+4E00\t二\t一\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::GlyphMismatch { .. }));
        assert_eq!(err.position.line, 1);
    }

    #[test]
    fn malformed_codepoint_is_an_error() {
        for bad in ["4E00\t一\t一\n", "U+ZZZZ\tZ\tZ\n", "U+110000\tx\tx\n"] {
            let err = parse_ids_file(bad).unwrap_err();
            assert!(
                matches!(err.kind, ParseErrorKind::MalformedCodepoint(_)),
                "{bad:?} -> {err:?}"
            );
        }
    }

    #[test]
    fn expression_errors_carry_line_and_column() {
        let err = parse_ids_file("U+4E00\t一\t一\nU+660E\t明\t⿰日\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::PrematureEnd);
        assert_eq!(err.position.line, 2);
        // Fields: "U+660E" (6 chars) TAB "明" TAB "⿰日". The expression
        // starts at column 10 and the missing operand is at column 12.
        assert_eq!(err.position.column, 12);
    }

    #[test]
    fn missing_fields_is_an_error() {
        let err = parse_ids_file("U+4E00\t一\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingFields(2));
    }

    #[test]
    fn two_untagged_variants_are_an_error() {
        let err = parse_ids_file("U+660E\t明\t⿰日月\t⿱日月\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MultipleUntaggedVariants);
    }

    #[test]
    fn duplicate_tag_letter_is_an_error() {
        let err = parse_ids_file("U+660E\t明\t⿰日月[GG]\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateTag('G'));
    }

    #[test]
    fn malformed_tag_group_is_an_error() {
        let err = parse_ids_file("U+660E\t明\t⿰日月[g1]\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::MalformedTagGroup(_)));
    }

    fn entry_with(variants: Vec<(&str, &str)>) -> IdsEntry {
        IdsEntry {
            codepoint: 0x4E43,
            glyph: '乃',
            variants: variants
                .into_iter()
                .map(|(expr, tags)| Variant {
                    expression: parse_ids_expression(expr).unwrap(),
                    tags: tags.chars().map(|c| SourceTag::new(c).unwrap()).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn select_variant_prefers_highest_ranked_tag() {
        let entry = entry_with(vec![("⿻𠄌乀", "GTK"), ("⿻丿𠄎", "J")]);
        let selected = select_variant(&entry, &default_preference());
        assert_eq!(selected.serialize(), "⿻𠄌乀");
    }

    #[test]
    fn select_variant_walks_preference_in_order() {
        let entry = entry_with(vec![("⿻丿𠄎", "J"), ("⿻𠄌乀", "T")]);
        let selected = select_variant(&entry, &default_preference());
        // No G variant; T outranks J.
        assert_eq!(selected.serialize(), "⿻𠄌乀");
    }

    #[test]
    fn select_variant_falls_back_to_untagged_then_first() {
        let untagged = entry_with(vec![("⿻𠄌乀", "")]);
        assert_eq!(
            select_variant(&untagged, &default_preference()).serialize(),
            "⿻𠄌乀"
        );

        let no_match = entry_with(vec![("⿻丿𠄎", "X"), ("⿻𠄌乀", "")]);
        assert_eq!(
            select_variant(&no_match, &default_preference()).serialize(),
            "⿻𠄌乀"
        );

        let all_tagged = entry_with(vec![("⿻丿𠄎", "X"), ("⿻𠄌乀", "Y")]);
        assert_eq!(
            select_variant(&all_tagged, &default_preference()).serialize(),
            "⿻丿𠄎"
        );
    }

    #[test]
    fn select_variant_is_deterministic() {
        let entry = entry_with(vec![("⿻𠄌乀", "GTK"), ("⿻丿𠄎", "J")]);
        let pref = default_preference();
        let a = select_variant(&entry, &pref).serialize();
        let b = select_variant(&entry, &pref).serialize();
        assert_eq!(a, b);
    }
}
