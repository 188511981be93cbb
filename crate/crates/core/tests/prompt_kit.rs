use mathpvs_core::prompt::*;
use mathpvs_core::pvs::{analyze, print_theory, PreludeIndex};
use proptest::prelude::*;
use std::collections::BTreeMap;

#[test]
fn few_shot_examples_are_clean_and_canonical() {
    let reg = TemplateRegistry::bundled();
    let t = reg.latest(FORMALIZE).unwrap();
    let blocks = extract_code_blocks(&t.role_preamble);
    assert_eq!(blocks.len(), 3);
    let prelude = PreludeIndex::bundled();
    let mut names = Vec::new();
    for b in &blocks {
        assert_eq!(b.language_tag.as_deref(), Some("pvs"));
        let (ast, diags) = analyze(&b.text, &prelude);
        assert!(diags.is_empty(), "{}\n{diags:?}", b.text);
        let ast = ast.unwrap();
        assert_eq!(print_theory(&ast).unwrap(), b.text);
        names.push(ast);
    }
    // One imports after BEGIN, one uses `sets`, one has a LEMMA.
    assert!(names.iter().any(|a| !a.importings.is_empty()));
    assert!(names.iter().any(|a| a.importings.iter().any(|i| i.name == "sets")));
    assert!(names.iter().any(|a| a.formula_names().count() == 1 && b_has_lemma(&print_theory(a).unwrap())));
}

fn b_has_lemma(text: &str) -> bool {
    text.contains(": LEMMA")
}

#[test]
fn formalize_prompt_carries_abstraction_and_examples() {
    let reg = TemplateRegistry::bundled();
    let bindings: BTreeMap<String, String> = [
        ("statement_body", "A symbolic space is a set."),
        ("abstraction", "A set with an injection into the positive integers."),
        ("theory_name", "SymbolicSpace"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v.to_owned()))
    .collect();
    let p = reg.latest(FORMALIZE).unwrap().render(&bindings).unwrap();
    assert!(p.system.contains("Examples of correct PVS syntax"));
    assert!(p.user.contains("PVS theory named SymbolicSpace"));
    assert!(p.user.contains("A set with an injection"));
    assert_eq!(p, reg.latest(FORMALIZE).unwrap().render(&bindings).unwrap());
}

fn response_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("```\n".to_owned()),
        Just("```pvs\n".to_owned()),
        Just("A: THEORY\n".to_owned()),
        Just("theory B\n".to_owned()),
        Just("END A\n".to_owned()),
        Just("\n".to_owned()),
        "[a-z ]{0,10}\n",
    ];
    prop::collection::vec(piece, 0..20).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn blocks_never_overlap(r in response_text()) {
        let blocks = extract_code_blocks(&r);
        for w in blocks.windows(2) {
            prop_assert!(w[0].origin_span.1 <= w[1].origin_span.0);
        }
        let total: usize = blocks.iter().map(|b| b.text.len()).sum();
        prop_assert!(total <= r.len());
        for b in &blocks {
            prop_assert!(!b.text.trim().is_empty());
            prop_assert!(b.origin_span.1 <= r.len());
        }
    }
}
