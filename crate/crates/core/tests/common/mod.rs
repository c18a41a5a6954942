//! Independent oracles shared by the property tests. None of these touch the
//! union-find or the per-class fact lists of the index.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use gptlods_core::model::OWL_SAME_AS;
use gptlods_core::{DatasetId, DatasetRegistry, Iri, Subject, Term, Triple};
use rand::rngs::StdRng;
use rand::Rng;

pub fn iri(s: &str) -> Iri {
    Iri::parse(s).unwrap()
}

pub fn registry(n: usize) -> DatasetRegistry {
    let mut r = DatasetRegistry::new();
    for i in 0..n {
        r.register(&format!("kg{i}"), &format!("kg{i}.nt")).unwrap();
    }
    r
}

pub fn link(s: &str, p: &str, o: &str, dataset: u32) -> Triple {
    Triple {
        subject: Subject::Iri { value: iri(s) },
        predicate: iri(p),
        object: Term::iri(iri(o)),
        dataset: DatasetId(dataset),
    }
}

/// Partition of the subject/object IRIs by BFS over the undirected sameAs graph.
pub fn bfs_partition(triples: &[Triple]) -> BTreeSet<BTreeSet<String>> {
    let mut nodes = BTreeSet::new();
    let mut adjacency: HashMap<String, Vec<String>> = HashMap::new();
    for t in triples {
        let s = t.subject.as_iri().map(|i| i.to_string());
        let o = t.object.as_iri().map(|i| i.to_string());
        nodes.extend(s.clone());
        nodes.extend(o.clone());
        if t.predicate.as_str() == OWL_SAME_AS {
            if let (Some(s), Some(o)) = (s, o) {
                adjacency.entry(s.clone()).or_default().push(o.clone());
                adjacency.entry(o).or_default().push(s);
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut partition = BTreeSet::new();
    for start in &nodes {
        if seen.contains(start) {
            continue;
        }
        let mut class = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start.clone());
        while let Some(node) = queue.pop_front() {
            for next in adjacency.get(&node).into_iter().flatten() {
                if seen.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
            class.insert(node);
        }
        partition.insert(class);
    }
    partition
}

pub fn index_partition(index: &gptlods_core::Index) -> BTreeSet<BTreeSet<String>> {
    index
        .entity_ids()
        .map(|id| index.entity_uris(id).unwrap().into_iter().map(|i| i.to_string()).collect())
        .collect()
}

/// Random sameAs graph over `n` IRIs with `m` edges.
pub fn random_same_as(rng: &mut StdRng, n: usize, m: usize) -> Vec<Triple> {
    (0..m)
        .map(|_| {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            link(&format!("http://e.org/{a}"), OWL_SAME_AS, &format!("http://e.org/{b}"), 0)
        })
        .collect()
}

/// A random small KG mixing sameAs links, relations and labels across datasets.
pub fn random_kg(rng: &mut StdRng, max_triples: usize) -> Vec<Triple> {
    let iris = rng.random_range(2..60usize);
    let datasets = rng.random_range(1..4u32);
    let predicates = ["http://p.org/a", "http://p.org/b", "http://p.org/c"];
    let count = rng.random_range(1..=max_triples);
    (0..count)
        .map(|_| {
            let s = format!("http://e.org/{}", rng.random_range(0..iris));
            let d = rng.random_range(0..datasets);
            match rng.random_range(0..10) {
                0 | 1 => link(&s, OWL_SAME_AS, &format!("http://e.org/{}", rng.random_range(0..iris)), d),
                2 => Triple {
                    subject: Subject::Iri { value: iri(&s) },
                    predicate: iri(gptlods_core::model::RDFS_LABEL),
                    object: Term::literal(format!("label {}", rng.random_range(0..iris))),
                    dataset: DatasetId(d),
                },
                3 => Triple {
                    subject: Subject::Blank { value: format!("_:b{}", rng.random_range(0..5)) },
                    predicate: iri(predicates[0]),
                    object: Term::iri(iri(&s)),
                    dataset: DatasetId(d),
                },
                _ => link(
                    &s,
                    predicates[rng.random_range(0..predicates.len())],
                    &format!("http://e.org/{}", rng.random_range(0..iris)),
                    d,
                ),
            }
        })
        .collect()
}

/// (subject→object?, predicate, dataset set, supporting triples) by double loop.
pub type OracleEvidence = (bool, String, BTreeSet<u32>, BTreeSet<String>);

pub fn brute_force_relations(
    triples: &[Triple],
    class_a: &BTreeSet<String>,
    class_b: &BTreeSet<String>,
) -> BTreeSet<OracleEvidence> {
    let mut grouped: HashMap<(bool, String), (BTreeSet<u32>, BTreeSet<String>)> = HashMap::new();
    let distinct: BTreeSet<&Triple> = triples.iter().collect();
    for t in distinct {
        if t.predicate.as_str() == OWL_SAME_AS {
            continue;
        }
        let (Some(s), Some(o)) = (t.subject.as_iri(), t.object.as_iri()) else { continue };
        for (forward, from, to) in [(true, class_a, class_b), (false, class_b, class_a)] {
            if from.contains(s.as_str()) && to.contains(o.as_str()) {
                let entry = grouped.entry((forward, t.predicate.to_string())).or_default();
                entry.0.insert(t.dataset.0);
                entry.1.insert(format!("{}\t{}", t.dataset, t.to_ntriples()));
            }
        }
    }
    grouped.into_iter().map(|((f, p), (d, s))| (f, p, d, s)).collect()
}
