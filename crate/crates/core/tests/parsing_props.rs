use bindbench_core::parsing::{
    parse_bool_with, parse_choice_with, parse_count_with, parse_object_list_with, ParseOptions,
    ParseStatus, Synonyms,
};
use proptest::prelude::*;

fn options() -> Vec<String> {
    ["top-left", "top-right", "bottom-left", "bottom-right"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn statuses(text: &str, opts: ParseOptions) -> [ParseStatus; 4] {
    [
        parse_bool_with(text, opts).status,
        parse_count_with(text, opts).status,
        parse_object_list_with(text, opts, Synonyms::builtin()).status,
        parse_choice_with(text, &options(), opts).status,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    // Parsers never panic and report a value exactly when not failed.
    #[test]
    fn total_on_arbitrary_text(text in ".{0,400}") {
        for opts in [ParseOptions::default(), ParseOptions::STRICT_ONLY] {
            let all = [
                parse_bool_with(&text, opts),
                parse_count_with(&text, opts),
                parse_object_list_with(&text, opts, Synonyms::builtin()),
                parse_choice_with(&text, &options(), opts),
            ];
            for p in all {
                prop_assert_eq!(p.value.is_some(), p.status != ParseStatus::Failed);
            }
        }
    }

    // Turning off the fallback never changes a strict result and never
    // produces one out of nothing.
    #[test]
    fn strictness_is_monotone(text in "[a-zA-Z0-9 \\[\\]\n.,:-]{0,200}") {
        let loose = statuses(&text, ParseOptions::default());
        let strict = statuses(&text, ParseOptions::STRICT_ONLY);
        for (l, s) in loose.iter().zip(strict.iter()) {
            match l {
                ParseStatus::Strict => prop_assert_eq!(*s, ParseStatus::Strict),
                _ => prop_assert_eq!(*s, ParseStatus::Failed),
            }
        }
    }

    #[test]
    fn bracketed_count_always_strict(prefix in "[a-z ]{0,40}", n in 0u64..100_000) {
        let p = parse_count_with(&format!("{prefix} [{n}]"), ParseOptions::default());
        prop_assert_eq!(p.status, ParseStatus::Strict);
        prop_assert_eq!(p.value, Some(bindbench_core::AnswerValue::Count(n)));
    }
}
