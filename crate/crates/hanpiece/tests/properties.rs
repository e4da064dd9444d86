//! Property tests for the parser and decomposition invariants.

use proptest::prelude::*;

use hanpiece::corpus::{transform_line, TransformConfig};
use hanpiece::decompose::{build_table, DecompositionConfig, DecompositionTable, Piece};
use hanpiece::ids::{
    default_preference, idc_arity, is_idc, parse_ids_expression, parse_ids_file, IdsExpression,
    Leaf,
};

const FIXTURE: &str = include_str!("../data/ids_fixture.txt");

fn table() -> DecompositionTable {
    build_table(&parse_ids_file(FIXTURE).unwrap(), &default_preference()).unwrap()
}

fn fixture_chars() -> Vec<char> {
    let mut chars: Vec<char> = table().chars().collect();
    chars.sort_unstable();
    chars
}

fn cfg(level: usize, keep: bool) -> DecompositionConfig {
    DecompositionConfig {
        level,
        keep_idc_operators: keep,
        ..DecompositionConfig::default()
    }
}

/// Arbitrary well-formed expression trees: leaves are CJK-range characters
/// or entity references, operators respect their arity.
fn expression_tree() -> impl Strategy<Value = IdsExpression> {
    let leaf = prop_oneof![
        (0x4E00u32..0x9FFF).prop_map(|cp| {
            IdsExpression::Leaf(Leaf::Char(char::from_u32(cp).unwrap()))
        }),
        "[A-Za-z0-9+-]{1,10}".prop_map(|name| IdsExpression::Leaf(Leaf::Entity(name))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        (0x2FF0u32..=0x2FFB, prop::collection::vec(inner, 3))
            .prop_map(|(op, mut children)| {
                let idc = char::from_u32(op).unwrap();
                children.truncate(idc_arity(idc));
                IdsExpression::Operator { idc, children }
            })
    })
}

proptest! {
    #[test]
    fn generated_trees_round_trip_through_the_parser(expr in expression_tree()) {
        let text = expr.serialize();
        let parsed = parse_ids_expression(&text).unwrap();
        prop_assert_eq!(parsed, expr);
    }

    #[test]
    fn arbitrary_input_never_panics_the_parser(s in "\\PC*") {
        if let Ok(expr) = parse_ids_expression(&s) {
            // accepted input always reproduces itself
            prop_assert_eq!(expr.serialize(), s);
        }
    }

    #[test]
    fn parsed_operators_always_satisfy_their_arity(expr in expression_tree()) {
        fn check(e: &IdsExpression) -> bool {
            match e {
                IdsExpression::Operator { idc, children } => {
                    is_idc(*idc)
                        && children.len() == idc_arity(*idc)
                        && children.iter().all(check)
                }
                IdsExpression::Leaf(_) => true,
            }
        }
        let reparsed = parse_ids_expression(&expr.serialize()).unwrap();
        prop_assert!(check(&reparsed));
    }

    #[test]
    fn piece_counts_grow_monotonically(
        idx in 0usize..372,
        level in 0usize..6,
        keep in any::<bool>(),
    ) {
        let chars = fixture_chars();
        let c = chars[idx % chars.len()];
        let table = table();
        let shallow = table.decompose_char(c, &cfg(level, keep));
        let deep = table.decompose_char(c, &cfg(level + 1, keep));
        prop_assert!(deep.len() >= shallow.len());
    }

    #[test]
    fn one_more_level_on_level_one_equals_level_two(idx in 0usize..372) {
        let chars = fixture_chars();
        let c = chars[idx % chars.len()];
        let table = table();
        let level_one = table.decompose_char(c, &cfg(1, true));
        let mut recomposed = Vec::new();
        for piece in level_one.iter() {
            match piece {
                Piece::Char(x) => {
                    recomposed.extend(table.decompose_char(*x, &cfg(1, true)).0);
                }
                other => recomposed.push(other.clone()),
            }
        }
        let level_two = table.decompose_char(c, &cfg(2, true));
        prop_assert_eq!(recomposed, level_two.0);
    }

    #[test]
    fn fixpoints_are_stable_under_further_levels(
        idx in 0usize..372,
        extra in 1usize..4,
        keep in any::<bool>(),
    ) {
        let chars = fixture_chars();
        let c = chars[idx % chars.len()];
        let table = table();
        let mut config = cfg(0, keep);
        let fixpoint = table.decompose_to_fixpoint(c, &config);
        prop_assert!(fixpoint.converged);
        config.level = fixpoint.levels_used + extra;
        let deeper = table.decompose_char(c, &config);
        prop_assert_eq!(deeper, fixpoint.pieces);
    }

    #[test]
    fn decomposition_is_deterministic(idx in 0usize..372, level in 0usize..5) {
        let chars = fixture_chars();
        let c = chars[idx % chars.len()];
        let first = table().decompose_char(c, &cfg(level, true));
        let second = table().decompose_char(c, &cfg(level, true));
        prop_assert_eq!(first, second);
    }

    #[test]
    fn transformed_lines_preserve_word_group_counts(
        indices in prop::collection::vec(0usize..372, 1..8),
        level in 0usize..4,
    ) {
        let chars = fixture_chars();
        let table = table();
        let tokens: Vec<String> = indices
            .iter()
            .map(|&i| {
                // alternate single characters and two-character words
                if i % 3 == 0 {
                    format!("{}{}", chars[i % chars.len()], chars[(i * 7 + 1) % chars.len()])
                } else {
                    chars[i % chars.len()].to_string()
                }
            })
            .collect();
        let line = tokens.join(" ");
        let config = TransformConfig::with_level(level);
        let out = transform_line(&line, &table, &config);

        // count word groups in the output: marker-delimited segments are
        // verbatim runs or single piece groups
        let marker = config.word_boundary_marker.as_str();
        let mut groups = 0usize;
        for segment in out.split(&format!(" {marker} ")) {
            let is_verbatim_run = segment
                .split(' ')
                .all(|tok| tokens.iter().any(|t| t == tok));
            if is_verbatim_run && !segment.is_empty() {
                groups += segment.split(' ').count();
            } else {
                groups += 1;
            }
        }
        prop_assert_eq!(groups, tokens.len(), "line {:?} -> {:?}", line, out);
    }
}
