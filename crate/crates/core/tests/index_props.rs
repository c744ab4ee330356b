use proptest::prelude::*;
use talentmine_core::build::{build_knowledge_base, BuildConfig};
use talentmine_core::fixtures::{generate_fixtures, FixtureSpec};
use talentmine_core::index::{
    decode_kb, encode_kb, kb_build, kb_load, kb_save, retrieve, Chunk, ChunkKind, Embedder, HashEmbedder, KnowledgeBase,
};
use talentmine_core::linearize::ReferenceProvider;
use talentmine_core::tablemodel::CellRef;

fn fixture_kb() -> KnowledgeBase {
    let f = generate_fixtures(&FixtureSpec::default()).unwrap();
    let (kb, _, _) =
        build_knowledge_base(&[f.bundle], &BuildConfig::default(), &HashEmbedder::default(), Some(&ReferenceProvider::new())).unwrap();
    kb
}

/// Independent signed feature hashing, written from the definition.
fn oracle_embed(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for tok in text.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in tok.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[(h % dim as u64) as usize] += sign;
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn oracle_cos(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn embedder_matches_independent_hashing() {
    let e = HashEmbedder::default();
    for text in ["", "For January, the network deductible for You only is $250.00.", "HRA hra HRA", "café +"] {
        let got = e.embed(text);
        let want = oracle_embed(text, 1024);
        assert_eq!(got.0.len(), 1024);
        for (g, w) in got.0.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}

#[test]
fn month_word_outweighs_extra_token() {
    let c = |a: &str, b: &str| oracle_cos(&oracle_embed(a, 1024), &oracle_embed(b, 1024));
    assert!(c("January HRA contribution", "February HRA contribution") < c("January HRA contribution", "January HRA contribution amount"));
}

#[test]
fn first_question_top_hit_is_the_brute_force_argmax() {
    let kb = fixture_kb();
    let query = "network deductible for yourself in January";
    let r = retrieve(&kb, &HashEmbedder::default(), query, 1).unwrap();
    let qv = oracle_embed(query, 1024);
    let mut scored: Vec<(f64, &Chunk)> = kb.chunks().iter().map(|c| (oracle_cos(&qv, &oracle_embed(&c.text, 1024)), c)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.chunk_id.cmp(&b.1.chunk_id)));
    assert_eq!(r.hits[0].chunk_id, scored[0].1.chunk_id);
    assert!((r.hits[0].score - scored[0].0).abs() < 1e-12);
    let top = kb.chunk(&r.hits[0].chunk_id).unwrap();
    assert_eq!(top.provenance, Some(CellRef::new("network-deductible", 1, 1)));
}

#[test]
fn rankings_agree_with_brute_force_over_the_whole_kb() {
    let kb = fixture_kb();
    let e = HashEmbedder::default();
    for query in ["What is the HRA contribution for you and your spouse in March?", "deductible family", "benefits office"] {
        let r = retrieve(&kb, &e, query, kb.len()).unwrap();
        let qv = oracle_embed(query, 1024);
        let mut scored: Vec<(f64, &str)> =
            kb.chunks().iter().map(|c| (oracle_cos(&qv, &oracle_embed(&c.text, 1024)), c.chunk_id.as_str())).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let got: Vec<&str> = r.hits.iter().map(|h| h.chunk_id.as_str()).collect();
        let want: Vec<&str> = scored.iter().map(|s| s.1).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn every_chunk_retrieves_itself() {
    let kb = fixture_kb();
    let e = HashEmbedder::default();
    for c in kb.chunks() {
        let r = retrieve(&kb, &e, &c.text, 1).unwrap();
        let top = kb.chunk(&r.hits[0].chunk_id).unwrap();
        assert!(top.chunk_id == c.chunk_id || top.text == c.text, "{} retrieved {}", c.chunk_id, top.chunk_id);
        assert!((r.hits[0].score - 1.0).abs() < 1e-9);
    }
}

#[test]
fn fixture_kb_round_trips_through_a_file() {
    let kb = fixture_kb();
    assert_eq!(kb.chunks().iter().filter(|c| c.kind == ChunkKind::TableSentence).count(), 180);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.kb");
    kb_save(&kb, &path).unwrap();
    let back = kb_load(&path).unwrap();
    assert_eq!(back, kb);
    for (a, b) in back.vectors().iter().zip(kb.vectors()) {
        assert!(a.0.iter().zip(&b.0).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_eq!(encode_kb(&back).unwrap(), std::fs::read_to_string(&path).unwrap());
}

#[test]
fn repeated_builds_are_byte_identical() {
    assert_eq!(encode_kb(&fixture_kb()).unwrap(), encode_kb(&fixture_kb()).unwrap());
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["january", "HRA", "deductible", "You", "+", "spouse", "$1,250.00", "only", "family", "é"]).prop_map(String::from)
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 0..12).prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embeddings_are_unit_or_zero(t in text(), dim in 1usize..2048) {
        let v = HashEmbedder::new(dim).embed(&t);
        prop_assert_eq!(v.dim(), dim);
        let n = v.norm();
        prop_assert!(v.is_zero() || (n - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_kbs_round_trip_and_rank_stably(texts in prop::collection::vec(text(), 0..20), q in text(), k in 1usize..30) {
        let chunks: Vec<Chunk> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Chunk { chunk_id: format!("d/prose/{i:05}"), text: t.clone(), kind: ChunkKind::Prose, provenance: None, doc_id: "d".into() })
            .collect();
        let e = HashEmbedder::default();
        let kb = kb_build("random", chunks, &e).unwrap();
        let back = decode_kb(&encode_kb(&kb).unwrap()).unwrap();
        prop_assert_eq!(&back, &kb);
        if !q.trim().is_empty() {
            let a = retrieve(&kb, &e, &q, k).unwrap();
            let b = retrieve(&back, &e, &q, k).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.hits.len(), k.min(kb.len()));
            for h in &a.hits {
                prop_assert!(h.score.is_finite() && (-1.0 - 1e-12..=1.0 + 1e-12).contains(&h.score));
            }
            for w in a.hits.windows(2) {
                prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].chunk_id < w[1].chunk_id));
            }
        }
    }
}
