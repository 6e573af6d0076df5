mod common;

use common::oracle;
use parenting::corpus::load_dataset;
use parenting::datagen::{
    distractor_vocabulary, generate_dataset, generate_instance, write_dataset, DivergenceConfig,
};

fn config(h: f64, o: f64, count: usize, seed: u64) -> DivergenceConfig {
    DivergenceConfig {
        hallucination_rate: h,
        omission_rate: o,
        count,
        seed,
        ..DivergenceConfig::default()
    }
}

#[test]
fn hallucination_fraction_tracks_rate() {
    let cfg = config(0.3, 0.1, 1000, 7);
    let hits = (0..1000)
        .filter(|&i| !generate_instance(&cfg, i).unwrap().annotation.hallucinated_spans.is_empty())
        .count();
    let frac = hits as f64 / 1000.0;
    assert!((frac - 0.3).abs() <= 0.04, "{frac}");
}

#[test]
fn omission_fraction_tracks_rate() {
    let cfg = config(0.0, 0.1, 1000, 7);
    let hits = (0..1000)
        .filter(|&i| !generate_instance(&cfg, i).unwrap().annotation.omitted_attributes.is_empty())
        .count();
    let frac = hits as f64 / 1000.0;
    assert!((frac - 0.1).abs() <= 0.04, "{frac}");
}

#[test]
fn hallucinated_spans_are_ungrounded() {
    let cfg = config(0.5, 0.1, 300, 9);
    let distractors = distractor_vocabulary();
    for i in 0..300 {
        let g = generate_instance(&cfg, i).unwrap();
        let lexicon = oracle::lexicon(g.instance.table());
        let reference = g.instance.primary_reference();
        for [s, e] in &g.annotation.hallucinated_spans {
            for t in &reference[*s..*e] {
                assert!(distractors.contains(t) && !lexicon.contains(t), "{t}");
            }
        }
    }
}

#[test]
fn clean_corpus_is_fully_recoverable_by_oracle_metric() {
    let data = generate_dataset(&config(0.0, 0.0, 200, 3)).unwrap();
    for inst in data.train.instances.iter().chain(&data.dev.instances).chain(&data.test.instances) {
        let s = oracle::parent(inst.primary_reference(), inst, 0.5, 4);
        assert_eq!(s.f_score, 1.0, "{inst:?}");
    }
}

#[test]
fn splits_are_index_disjoint() {
    let data = generate_dataset(&config(0.3, 0.1, 100, 13)).unwrap();
    assert_eq!(
        (data.train.instances.len(), data.dev.instances.len(), data.test.instances.len()),
        (80, 10, 10)
    );
    let idx = |s: &parenting::datagen::SplitData| s.annotations.iter().map(|a| a.index).collect::<Vec<_>>();
    assert_eq!(idx(&data.train), (0..80).collect::<Vec<_>>());
    assert_eq!(idx(&data.dev), (80..90).collect::<Vec<_>>());
    assert_eq!(idx(&data.test), (90..100).collect::<Vec<_>>());
}

#[test]
fn written_corpus_reloads() {
    let data = generate_dataset(&config(0.3, 0.1, 50, 2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_dataset(&data, dir.path()).unwrap();
    assert_eq!(files.len(), 6);
    assert_eq!(load_dataset(dir.path().join("dev.jsonl")).unwrap(), data.dev.instances);
    assert_eq!(generate_dataset(&config(0.3, 0.1, 50, 2)).unwrap(), data);
}
