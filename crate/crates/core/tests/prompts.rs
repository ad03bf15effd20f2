mod common;

use icl_gap::corpus::{Example, Split};
use common::golden_cases;
use icl_gap::prompt::{parse_prompt, render_prompt, PromptTemplate};
use proptest::prelude::*;

#[test]
fn builtin_templates_match_golden_files() {
    for (name, template, exemplars, golden) in golden_cases() {
        let rendered = render_prompt(&template, &exemplars, "<evaluation input>").unwrap();
        assert_eq!(rendered.as_bytes(), golden.as_bytes(), "template {name}");
    }
}

fn line() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9(){}?_.,*]{1,8}( [a-zA-Z0-9(){}?_.,*]{1,8}){0,5}"
}

proptest! {
    #[test]
    fn rendering_round_trips(
        pairs in proptest::collection::vec((line(), line()), 1..6),
        query in line(),
    ) {
        let template = PromptTemplate::geoquery();
        let exemplars: Vec<Example> = pairs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| Example::new(i, a, b, Split::Train).unwrap())
            .collect();
        let prompt = render_prompt(&template, &exemplars, &query).unwrap();

        let (parsed, q) = parse_prompt(&template, &prompt).unwrap();
        let expect: Vec<(String, String)> = exemplars
            .iter()
            .map(|e| (e.input_text.clone(), e.output_text.clone()))
            .collect();
        prop_assert_eq!(parsed, expect);
        prop_assert_eq!(q, query.trim());

        // one output prefix per exemplar plus the generation point
        let marker = format!("\n{}", template.output_prefix);
        prop_assert_eq!(prompt.matches(&marker).count(), exemplars.len() + 1);
        prop_assert!(prompt.ends_with(&marker));
    }

    #[test]
    fn distinct_orders_give_distinct_prompts(
        pairs in proptest::collection::vec((line(), line()), 2..5),
    ) {
        let template = PromptTemplate::scan();
        let exemplars: Vec<Example> = pairs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| Example::new(i, a, b, Split::Train).unwrap())
            .collect();
        let mut reversed = exemplars.clone();
        reversed.reverse();
        let same_seq = exemplars.iter().zip(&reversed).all(|(a, b)| {
            a.input_text == b.input_text && a.output_text == b.output_text
        });
        let p1 = render_prompt(&template, &exemplars, "q").unwrap();
        let p2 = render_prompt(&template, &reversed, "q").unwrap();
        prop_assert_eq!(p1 == p2, same_seq);
    }
}
