mod common;

use std::collections::BTreeSet;

use chrono::{TimeZone, Utc};
use gptlods_core::annotation::{annotate, render_html};
use gptlods_core::labels::LabelTable;
use gptlods_core::ntriples::{parse_line, parse_ntriples, ParseMode};
use gptlods_core::recognition::{ensemble_merge, Candidate, RawSpan, RecognizerOutput};
use gptlods_core::snapshot::{read_snapshot, write_snapshot};
use gptlods_core::validation::relations_between;
use gptlods_core::{CanonicalEntityId, DatasetId, Index};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use common::*;

/// Decodes the HTML produced by `render_html` back to text.
fn strip_markup(html: &str) -> String {
    let mut out = String::new();
    let mut in_tag = false;
    let mut entity: Option<String> = None;
    for c in html.chars() {
        if in_tag {
            in_tag = c != '>';
        } else if let Some(buf) = entity.as_mut() {
            if c == ';' {
                out.push(match buf.as_str() {
                    "amp" => '&',
                    "lt" => '<',
                    "gt" => '>',
                    "quot" => '"',
                    "#39" => '\'',
                    other => panic!("unexpected entity &{other};"),
                });
                entity = None;
            } else {
                buf.push(c);
            }
        } else if c == '<' {
            in_tag = true;
        } else if c == '&' {
            entity = Some(String::new());
        } else {
            out.push(c);
        }
    }
    out
}

fn arb_outputs(max_len: usize) -> impl Strategy<Value = Vec<RecognizerOutput>> {
    let span = (0..max_len, 1..8usize, 0..4u32);
    prop::collection::vec(prop::collection::vec(span, 0..8), 1..4).prop_map(move |outs| {
        outs.into_iter()
            .enumerate()
            .map(|(i, spans)| RecognizerOutput {
                recognizer_name: format!("r{i}"),
                spans: spans
                    .into_iter()
                    .map(|(start, len, id)| RawSpan {
                        start: start.min(max_len - 1),
                        end: (start + len).min(max_len),
                        candidate: Candidate::Entity(CanonicalEntityId(id)),
                    })
                    .filter(|s| s.start < s.end)
                    .collect(),
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closure_matches_bfs(seed in any::<u64>(), n in 1..200usize, m in 0..300usize) {
        let mut rng = StdRng::seed_from_u64(seed);
        let triples = random_same_as(&mut rng, n, m);
        let index = Index::build(triples.clone(), registry(1));
        prop_assert_eq!(index_partition(&index), bfs_partition(&triples));
    }

    #[test]
    fn build_is_order_invariant(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let triples = random_kg(&mut rng, 200);
        let mut shuffled = triples.clone();
        shuffled.shuffle(&mut rng);
        let a = Index::build(triples, registry(3));
        let b = Index::build(shuffled, registry(3));
        prop_assert_eq!(index_partition(&a), index_partition(&b));
        for id in a.entity_ids() {
            prop_assert_eq!(a.entity_card(id), b.entity_card(id));
        }
        let (mut sa, mut sb) = (Vec::new(), Vec::new());
        write_snapshot(&a, &mut sa).unwrap();
        write_snapshot(&b, &mut sb).unwrap();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn statistics_are_consistent(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let index = Index::build(random_kg(&mut rng, 300), registry(3));
        let mut seen_iris = BTreeSet::new();
        for id in index.entity_ids() {
            let card = index.entity_card(id).unwrap();
            let mut all = Vec::new();
            for page in 0.. {
                let facts = index.entity_facts(id, page, 7).unwrap();
                if facts.is_empty() { break; }
                all.extend(facts);
            }
            prop_assert_eq!(card.fact_count, all.len());
            prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(card.dataset_count, index.entity_datasets(id).unwrap().len());
            prop_assert_eq!(card.uri_count, card.uris.len());
            prop_assert!(card.uris.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(&card.representative, &card.uris[0]);
            for uri in &card.uris {
                prop_assert!(seen_iris.insert(uri.clone()), "IRI in two classes");
                prop_assert_eq!(index.resolve(uri.as_str()), Some(id));
            }
        }
        for t in index.triples() {
            for iri in [t.subject.as_iri(), t.object.as_iri()].into_iter().flatten() {
                prop_assert!(index.resolve_iri(iri).is_some());
            }
        }
    }

    #[test]
    fn relations_match_double_loop(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let triples = random_kg(&mut rng, 150);
        let index = Index::build(triples.clone(), registry(3));
        let partition: Vec<BTreeSet<String>> = bfs_partition(&triples).into_iter().collect();
        let class_of = |id: CanonicalEntityId| -> &BTreeSet<String> {
            let rep = index.representative(id).unwrap().to_string();
            partition.iter().find(|c| c.contains(&rep)).unwrap()
        };
        let ids: Vec<_> = index.entity_ids().collect();
        for &a in ids.iter().take(12) {
            for &b in ids.iter().rev().take(12) {
                if a == b { continue; }
                let got: BTreeSet<OracleEvidence> = relations_between(a, b, &index)
                    .unwrap()
                    .into_iter()
                    .map(|e| (
                        e.subject_entity == a,
                        e.predicate.to_string(),
                        e.datasets.iter().map(|d| d.0).collect(),
                        e.sample_triples.iter().map(|t| format!("{}\t{}", t.dataset, t.to_ntriples())).collect(),
                    ))
                    .collect();
                prop_assert_eq!(got, brute_force_relations(&triples, class_of(a), class_of(b)));

                // swapping the pair swaps directions over the same triples
                let flip = |ev: Vec<gptlods_core::FactEvidence>| -> BTreeSet<(CanonicalEntityId, String)> {
                    ev.into_iter()
                        .flat_map(|e| e.sample_triples.into_iter().map(move |t| (e.subject_entity, t.to_ntriples())))
                        .collect()
                };
                prop_assert_eq!(flip(relations_between(a, b, &index).unwrap()), flip(relations_between(b, a, &index).unwrap()));
            }
        }
    }

    #[test]
    fn merge_output_is_sorted_disjoint_and_consistent(
        text in "[a-zA-Z <>&\"'é]{1,40}",
        outputs in arb_outputs(40),
    ) {
        let len = text.chars().count();
        let outputs: Vec<RecognizerOutput> = outputs
            .into_iter()
            .map(|mut o| { o.spans.retain(|s| s.end <= len); o })
            .collect();
        let merged = ensemble_merge(&text, &outputs, outputs.len());
        let chars: Vec<char> = text.chars().collect();
        for w in merged.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        for span in &merged {
            prop_assert_eq!(&span.surface, &chars[span.start..span.end].iter().collect::<String>());
            prop_assert!(span.confidence > 0.0 && span.confidence <= 1.0);
        }
        let mut reversed = outputs.clone();
        reversed.reverse();
        prop_assert_eq!(&merged, &ensemble_merge(&text, &reversed, outputs.len()));
    }

    #[test]
    fn merge_of_single_disjoint_output_is_identity(starts in prop::collection::btree_set(0..20usize, 0..8)) {
        let text = "x".repeat(40);
        let spans: Vec<RawSpan> = starts
            .iter()
            .map(|&s| RawSpan { start: 2 * s, end: 2 * s + 1, candidate: Candidate::Entity(CanonicalEntityId(s as u32)) })
            .collect();
        let merged = ensemble_merge(&text, &[RecognizerOutput { recognizer_name: "g".into(), spans: spans.clone() }], 1);
        let got: Vec<_> = merged.iter().map(|s| (s.start, s.end, s.entity, s.confidence)).collect();
        let want: Vec<_> = spans
            .iter()
            .map(|s| match s.candidate { Candidate::Entity(e) => (s.start, s.end, e, 1.0), _ => unreachable!() })
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn render_html_strips_back_to_text(text in "\\PC{0,60}", cuts in prop::collection::vec(0..60usize, 0..6)) {
        let mut registry = registry(1);
        registry.set_triple_count(DatasetId(0), 1).unwrap();
        let index = Index::build(vec![link("http://a", "http://p", "http://b", 0)], registry);
        let len = text.chars().count();
        let mut points: Vec<usize> = cuts.into_iter().filter(|&c| c <= len).collect();
        points.sort();
        points.dedup();
        let chars: Vec<char> = text.chars().collect();
        let spans = points
            .chunks_exact(2)
            .filter(|p| p[0] < p[1])
            .map(|p| gptlods_core::EntitySpan {
                start: p[0],
                end: p[1],
                surface: chars[p[0]..p[1]].iter().collect(),
                entity: CanonicalEntityId((p[0] % 2) as u32),
                confidence: 1.0,
                recognizers: Default::default(),
            })
            .collect();
        let at = Utc.timestamp_opt(0, 0).unwrap();
        let annotated = annotate(&text, spans, &index, "none", at).unwrap();
        prop_assert_eq!(strip_markup(&render_html(&annotated)), text);
        let referenced: BTreeSet<_> = annotated.spans.iter().map(|s| s.entity).collect();
        prop_assert_eq!(annotated.cards.keys().copied().collect::<BTreeSet<_>>(), referenced);
    }

    #[test]
    fn lenient_parse_accounts_for_every_line(lines in prop::collection::vec(
        prop_oneof![
            Just("<http://a> <http://b> <http://c> .".to_string()),
            Just("# comment".to_string()),
            Just("".to_string()),
            "\\PC{0,30}",
            "<http://[a-z]{1,5}> <http://p> \"[a-z\\\\\"]{0,8}\" \\.",
        ],
        0..30,
    )) {
        let input = lines.join("\n");
        let out = parse_ntriples(input.as_bytes(), DatasetId(0), ParseMode::Lenient).unwrap();
        let statements = input
            .split('\n')
            .filter(|l| {
                let t = l.trim_matches(|c| c == ' ' || c == '\t' || c == '\r');
                !t.is_empty() && !t.starts_with('#')
            })
            .count();
        prop_assert_eq!(out.triples.len() + out.errors.len(), statements);
        for t in &out.triples {
            let again = parse_line(&t.to_ntriples(), DatasetId(0)).unwrap();
            prop_assert_eq!(again.as_ref(), Some(t));
        }
    }

    #[test]
    fn label_forms_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let index = Index::build(random_kg(&mut rng, 200), registry(3));
        let table = LabelTable::extract(&index);
        for form in table.forms() {
            prop_assert!(table.lookup(&form.normalized_tokens).contains(&form.entity));
        }
    }

    #[test]
    fn snapshot_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let index = Index::build(random_kg(&mut rng, 150), registry(3));
        let mut bytes = Vec::new();
        write_snapshot(&index, &mut bytes).unwrap();
        let loaded = read_snapshot(&bytes[..]).unwrap();
        for id in index.entity_ids() {
            prop_assert_eq!(loaded.entity_card(id), index.entity_card(id));
            prop_assert_eq!(loaded.entity_facts(id, 0, 1000), index.entity_facts(id, 0, 1000));
        }
    }
}
