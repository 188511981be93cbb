use mathpvs_core::graph::{build_graph, ConceptGraph};
use mathpvs_core::ingest::*;
use proptest::prelude::*;
use std::collections::BTreeSet;

const TEX: &str = include_str!("../fixtures/summary.tex");
const MMD: &str = include_str!("../fixtures/summary.mmd");

fn by_term<'a>(stmts: &'a [StatementRecord], term: &str) -> &'a StatementRecord {
    stmts
        .iter()
        .find(|s| s.canonical_term() == Some(term))
        .unwrap_or_else(|| panic!("no statement introduces {term}"))
}

fn theorem(stmts: &[StatementRecord]) -> &StatementRecord {
    stmts.iter().find(|s| s.kind == StatementKind::Theorem).unwrap()
}

fn has_edge(g: &ConceptGraph, from: &str, to: &str) -> bool {
    g.edges.iter().any(|e| e.from == from && e.to == to)
}

/// Reachability by repeated relaxation, independent of the graph module.
fn brute_ancestors(g: &ConceptGraph, id: &str) -> BTreeSet<String> {
    let mut reach: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = reach.len();
        for e in &g.edges {
            if (e.to == id || reach.contains(&e.to)) && e.from != id {
                reach.insert(e.from.clone());
            }
        }
        if reach.len() == before {
            return reach;
        }
    }
}

fn check_fixture(stmts: &[StatementRecord]) {
    let kinds: Vec<_> = stmts.iter().map(|s| s.kind).collect();
    use StatementKind::*;
    assert_eq!(kinds, vec![Definition, Definition, Definition, Definition, Theorem]);
    let terms: Vec<_> = stmts.iter().filter_map(|s| s.canonical_term()).collect();
    assert_eq!(terms, vec!["mapping", "cantor space", "symbolic space", "effective symbolic space"]);

    let ess = by_term(stmts, "effective symbolic space");
    assert!(ess.used_terms.contains(&"symbolic space".to_owned()));
    assert_eq!(theorem(stmts).label.as_deref(), Some("Theorem"));
    let labels: Vec<_> = stmts.iter().take(4).map(|s| s.label.clone().unwrap()).collect();
    assert_eq!(labels, vec!["Definition 1", "Definition 2", "Definition 3", "Definition 4"]);

    let g = build_graph(stmts).unwrap();
    let id = |t: &str| by_term(stmts, t).stmt_id.clone();
    let thm = theorem(stmts).stmt_id.clone();
    assert!(has_edge(&g, &id("mapping"), &id("effective symbolic space")));
    assert!(has_edge(&g, &id("symbolic space"), &id("effective symbolic space")));
    assert!(has_edge(&g, &id("effective symbolic space"), &thm));
    assert!(has_edge(&g, &id("cantor space"), &thm));

    let order = g.topo_order().unwrap();
    let pos = |n: &str| order.iter().position(|o| o == n).unwrap();
    for e in &g.edges {
        assert!(pos(&e.from) < pos(&e.to), "{e:?}");
    }
    assert_eq!(pos(&thm), 4);

    for n in &g.nodes {
        assert_eq!(g.ancestors(n).unwrap(), brute_ancestors(&g, n), "{n}");
    }
    let defs: BTreeSet<String> = stmts.iter().take(4).map(|s| s.stmt_id.clone()).collect();
    assert_eq!(g.ancestors(&thm).unwrap(), defs);
    assert!(g.ancestors(&id("mapping")).unwrap().is_empty());
}

#[test]
fn latex_fixture() {
    let (doc, stmts) = ingest_bytes(TEX.as_bytes(), None).unwrap();
    assert_eq!(doc.format, DocFormat::Latex);
    for s in &stmts {
        let (a, b) = s.source_span;
        let src = &doc.raw_text[a..b];
        assert!(src.contains(&s.body_latex), "{src}");
    }
    check_fixture(&stmts);
}

#[test]
fn markdown_fixture_matches_latex() {
    let (doc, stmts) = ingest_bytes(MMD.as_bytes(), None).unwrap();
    assert_eq!(doc.format, DocFormat::NougatMarkdown);
    check_fixture(&stmts);
    let (_, tex) = ingest_bytes(TEX.as_bytes(), None).unwrap();
    let bodies = |v: &[StatementRecord]| v.iter().map(|s| s.body_latex.clone()).collect::<Vec<_>>();
    assert_eq!(bodies(&stmts), bodies(&tex));
}

#[test]
fn extraction_is_deterministic() {
    let a = ingest_bytes(TEX.as_bytes(), None).unwrap();
    let b = ingest_bytes(TEX.as_bytes(), None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn graph_is_permutation_insensitive() {
    let (_, stmts) = ingest_bytes(TEX.as_bytes(), None).unwrap();
    let g = build_graph(&stmts).unwrap();
    let mut rev = stmts.clone();
    rev.reverse();
    let h = build_graph(&rev).unwrap();
    assert_eq!(g.edges, h.edges);
    assert_eq!(g.nodes.iter().collect::<BTreeSet<_>>(), h.nodes.iter().collect::<BTreeSet<_>>());
}

fn md_fragment() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("**Definition 1** ".to_owned()),
        Just("**Theorem** ".to_owned()),
        Just("**Lemma 2.** ".to_owned()),
        Just("**Proof** ".to_owned()),
        Just("\\(x\\in X\\)".to_owned()),
        Just("\\[y\\]".to_owned()),
        Just("\\\\".to_owned()),
        Just("\n".to_owned()),
        Just("\n\n".to_owned()),
        Just("# Heading\n".to_owned()),
        Just("$a$".to_owned()),
        "[a-z ]{1,8}",
    ];
    prop::collection::vec(piece, 0..16).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normalize_markup_is_idempotent(text in md_fragment()) {
        for format in [DocFormat::NougatMarkdown, DocFormat::Latex] {
            let once = normalize_markup(&SourceDocument::new(format, text.clone()));
            prop_assert_eq!(&normalize_markup(&once), &once);
        }
    }

    #[test]
    fn spans_are_sorted_and_in_bounds(text in md_fragment()) {
        for format in [DocFormat::NougatMarkdown, DocFormat::Latex] {
            let doc = normalize_markup(&SourceDocument::new(format, text.clone()));
            for w in doc.spans.windows(2) {
                prop_assert!(w[0].1 <= w[1].0);
            }
            prop_assert!(doc.spans.iter().all(|&(a, b)| a <= b && b <= doc.raw_text.len()));
        }
    }
}
