use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bleu::corpus_bleu;
use super::lcs::lcs_length;
use crate::corpus::{Instance, Table, Tokens};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 4;

/// PARENT components for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParentScore {
    pub precision: f64,
    pub recall_reference: f64,
    pub coverage_table: f64,
    pub recall: f64,
    pub f_score: f64,
    pub lambda: f64,
}

impl ParentScore {
    /// Combines the three components; `lambda` weighs reference recall
    /// against table coverage geometrically.
    pub fn combine(precision: f64, recall_reference: f64, coverage_table: f64, lambda: f64) -> Self {
        let recall = combine_recall(recall_reference, coverage_table, lambda);
        ParentScore {
            precision,
            recall_reference,
            coverage_table,
            recall,
            f_score: f_measure(precision, recall),
            lambda,
        }
    }
}

/// `recall_reference^λ · coverage^(1-λ)`, exact at λ ∈ {0, 1}.
pub fn combine_recall(recall_reference: f64, coverage_table: f64, lambda: f64) -> f64 {
    if lambda == 1.0 {
        recall_reference
    } else if lambda == 0.0 {
        coverage_table
    } else {
        recall_reference.powf(lambda) * coverage_table.powf(1.0 - lambda)
    }
}

pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub type Lexicon = BTreeSet<String>;

/// Value tokens of every record plus the tokenized attribute names.
pub fn table_lexicon(table: &Table) -> Lexicon {
    table.lexicon()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn is_entailed(gram: &[String], lexicon: &Lexicon) -> bool {
    gram.iter().all(|t| lexicon.contains(t))
}

fn check_order(n_max: usize) {
    assert!(n_max >= 1, "n-gram order must be at least 1");
}

/// Mean over n of the fraction of candidate n-grams found in the reference
/// (clipped by reference counts) or entailed by the table (uncapped).
///
/// Orders longer than the candidate are skipped; an empty candidate scores 0.
pub fn entailed_precision_with(
    candidate: &[String],
    reference: &[String],
    lexicon: &Lexicon,
    n_max: usize,
) -> f64 {
    check_order(n_max);
    let mut sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=n_max.min(candidate.len()) {
        let cand = ngram_counts(candidate, n);
        let refs = ngram_counts(reference, n);
        let total = candidate.len() - n + 1;
        let credited: usize = cand
            .iter()
            .map(|(gram, &c)| {
                if is_entailed(gram, lexicon) {
                    c
                } else {
                    c.min(refs.get(gram).copied().unwrap_or(0))
                }
            })
            .sum();
        sum += credited as f64 / total as f64;
        orders += 1;
    }
    if orders == 0 {
        0.0
    } else {
        sum / orders as f64
    }
}

/// Mean over n of the fraction of table-entailed reference n-grams that the
/// candidate reproduces (clipped counts).
///
/// Orders with no entailed reference n-gram are skipped; when no order has
/// any, the recall is vacuously 1.
pub fn entailed_recall_reference_with(
    candidate: &[String],
    reference: &[String],
    lexicon: &Lexicon,
    n_max: usize,
) -> f64 {
    check_order(n_max);
    let mut sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=n_max {
        let refs = ngram_counts(reference, n);
        let mut total = 0usize;
        let mut found = 0usize;
        let mut cand: Option<HashMap<&[String], usize>> = None;
        for (gram, &c) in &refs {
            if !is_entailed(gram, lexicon) {
                continue;
            }
            total += c;
            let cand = cand.get_or_insert_with(|| ngram_counts(candidate, n));
            found += c.min(cand.get(gram).copied().unwrap_or(0));
        }
        if total > 0 {
            sum += found as f64 / total as f64;
            orders += 1;
        }
    }
    if orders == 0 {
        1.0
    } else {
        sum / orders as f64
    }
}

pub fn entailed_precision(candidate: &[String], reference: &[String], table: &Table, n_max: usize) -> f64 {
    entailed_precision_with(candidate, reference, &table_lexicon(table), n_max)
}

pub fn entailed_recall_reference(
    candidate: &[String],
    reference: &[String],
    table: &Table,
    n_max: usize,
) -> f64 {
    entailed_recall_reference_with(candidate, reference, &table_lexicon(table), n_max)
}

/// Average over records of `LCS(value, candidate) / |value|`.
pub fn table_coverage(candidate: &[String], table: &Table) -> f64 {
    let records = table.records();
    let sum: f64 = records
        .iter()
        .map(|r| {
            let value = r.value_tokens();
            lcs_length(value, candidate) as f64 / value.len() as f64
        })
        .sum();
    sum / records.len() as f64
}

fn check_lambda(lambda: f64) {
    assert!(
        (0.0..=1.0).contains(&lambda),
        "lambda must lie in [0, 1], got {lambda}"
    );
}

/// PARENT score of `candidate` against `instance`.
///
/// With several references the score against each is computed and the one
/// with the highest F-score is returned (first wins on ties).
pub fn parent(candidate: &[String], instance: &Instance, lambda: f64, n_max: usize) -> ParentScore {
    check_lambda(lambda);
    let table = instance.table();
    let lexicon = table_lexicon(table);
    let coverage = table_coverage(candidate, table);
    let precision_recall = instance.references().iter().map(|reference| {
        (
            entailed_precision_with(candidate, reference, &lexicon, n_max),
            entailed_recall_reference_with(candidate, reference, &lexicon, n_max),
        )
    });
    best_of(precision_recall, coverage, lambda)
}

fn best_of(
    precision_recall: impl Iterator<Item = (f64, f64)>,
    coverage: f64,
    lambda: f64,
) -> ParentScore {
    let mut best: Option<ParentScore> = None;
    for (p, r) in precision_recall {
        let score = ParentScore::combine(p, r, coverage, lambda);
        if best.is_none_or(|b| score.f_score > b.f_score) {
            best = Some(score);
        }
    }
    best.expect("instances always carry a reference")
}

/// PARENT F-score only. At `lambda == 1` table coverage does not enter the
/// score and is not computed, so no LCS is run.
pub fn parent_f(candidate: &[String], instance: &Instance, lambda: f64, n_max: usize) -> f64 {
    check_lambda(lambda);
    if lambda != 1.0 {
        return parent(candidate, instance, lambda, n_max).f_score;
    }
    let lexicon = table_lexicon(instance.table());
    instance
        .references()
        .iter()
        .map(|reference| {
            let p = entailed_precision_with(candidate, reference, &lexicon, n_max);
            let r = entailed_recall_reference_with(candidate, reference, &lexicon, n_max);
            f_measure(p, r)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Corpus-level aggregate: mean PARENT components plus corpus BLEU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub mean: ParentScore,
    pub bleu: f64,
    pub count: usize,
    pub per_instance: Vec<ParentScore>,
}

/// Scores aligned candidates; means are plain arithmetic averages reduced in
/// index order.
pub fn corpus_parent(candidates: &[Tokens], instances: &[Instance], lambda: f64) -> Result<CorpusReport> {
    if candidates.len() != instances.len() {
        return Err(Error::LengthMismatch {
            left_name: "candidates",
            left: candidates.len(),
            right_name: "instances",
            right: instances.len(),
        });
    }
    if instances.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} outside [0, 1]")));
    }
    let per_instance: Vec<ParentScore> = candidates
        .par_iter()
        .zip(instances.par_iter())
        .map(|(c, inst)| parent(c, inst, lambda, DEFAULT_MAX_ORDER))
        .collect();
    let mean = mean_score(&per_instance, lambda);
    let references: Vec<Vec<Tokens>> = instances.iter().map(|i| i.references().to_vec()).collect();
    let bleu = corpus_bleu(candidates, &references)?;
    Ok(CorpusReport {
        mean,
        bleu,
        count: per_instance.len(),
        per_instance,
    })
}

pub(crate) fn mean_score(scores: &[ParentScore], lambda: f64) -> ParentScore {
    let n = scores.len() as f64;
    let mut acc = [0.0f64; 5];
    for s in scores {
        acc[0] += s.precision;
        acc[1] += s.recall_reference;
        acc[2] += s.coverage_table;
        acc[3] += s.recall;
        acc[4] += s.f_score;
    }
    ParentScore {
        precision: acc[0] / n,
        recall_reference: acc[1] / n,
        coverage_table: acc[2] / n,
        recall: acc[3] / n,
        f_score: acc[4] / n,
        lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use proptest::prelude::*;

    fn t(s: &str) -> Tokens {
        tokenize(s)
    }

    fn inst(pairs: &[(&str, &str)], refs: &[&str]) -> Instance {
        Instance::new(
            Table::from_pairs(pairs).unwrap(),
            refs.iter().map(|r| t(r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn lexicon_examples() {
        let lex = table_lexicon(&Table::from_pairs(&[("name", "john smith")]).unwrap());
        assert_eq!(lex, ["john", "smith", "name"].iter().map(|s| s.to_string()).collect());
        let lex = table_lexicon(&Table::from_pairs(&[("birth_date", "4 august 1961")]).unwrap());
        let expected: Lexicon = ["4", "august", "1961", "birth", "date"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(lex, expected);
    }

    #[test]
    fn precision_examples() {
        let table = Table::from_pairs(&[("name", "john")]).unwrap();
        let p = entailed_precision(&t("john is a pilot"), &t("john is an engineer"), &table, 4);
        assert!((p - (0.5 + 1.0 / 3.0) / 4.0).abs() < 1e-15);
        assert_eq!(entailed_precision(&[], &t("john"), &table, 4), 0.0);

        let table = Table::from_pairs(&[("name", "john smith")]).unwrap();
        assert_eq!(entailed_precision(&t("john smith"), &t("john smith"), &table, 4), 1.0);
    }

    #[test]
    fn recall_reference_examples() {
        let table = Table::from_pairs(&[("name", "john"), ("occupation", "engineer")]).unwrap();
        let reference = t("john is an engineer");
        assert_eq!(entailed_recall_reference(&t("john"), &reference, &table, 4), 0.5);
        assert_eq!(entailed_recall_reference(&reference, &reference, &table, 4), 1.0);
        assert_eq!(entailed_recall_reference(&[], &reference, &table, 4), 0.0);
        // nothing in the reference is entailed
        assert_eq!(entailed_recall_reference(&[], &t("foo bar"), &table, 4), 1.0);
    }

    #[test]
    fn coverage_examples() {
        let table = Table::from_pairs(&[("name", "ada lovelace"), ("occupation", "mathematician")]).unwrap();
        assert_eq!(table_coverage(&t("ada was a mathematician"), &table), 0.75);
        assert_eq!(table_coverage(&[], &table), 0.0);
        assert_eq!(table_coverage(&t("ada lovelace , mathematician"), &table), 1.0);
    }

    #[test]
    fn parent_limits_and_f() {
        let i = inst(&[("name", "john smith"), ("occupation", "engineer")], &["john smith is an engineer"]);
        let cand = t("john smith , engineer");
        let s1 = parent(&cand, &i, 1.0, 4);
        assert_eq!(s1.recall, s1.recall_reference);
        let s0 = parent(&cand, &i, 0.0, 4);
        assert_eq!(s0.recall, s0.coverage_table);
        assert_eq!(parent_f(&cand, &i, 1.0, 4), s1.f_score);
        assert_eq!(parent_f(&cand, &i, 0.5, 4), parent(&cand, &i, 0.5, 4).f_score);

        let full = inst(&[("name", "john smith")], &["john smith"]);
        let s = parent(&t("john smith"), &full, 1.0, 4);
        assert_eq!((s.precision, s.recall_reference, s.f_score), (1.0, 1.0, 1.0));

        assert!((f_measure(0.8, 0.4) - 0.8 * 0.8 / 1.2).abs() < 1e-15);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
    }

    #[test]
    fn empty_candidate_scores_zero() {
        let i = inst(&[("name", "john smith")], &["john smith"]);
        let s = parent(&[], &i, 0.5, 4);
        assert_eq!((s.precision, s.recall, s.f_score), (0.0, 0.0, 0.0));
    }

    #[test]
    fn multi_reference_picks_best_f() {
        let i = inst(&[("name", "john smith")], &["someone else entirely", "john smith is here"]);
        let s = parent(&t("john smith is here"), &i, 0.5, 4);
        let single = inst(&[("name", "john smith")], &["john smith is here"]);
        assert_eq!(s, parent(&t("john smith is here"), &single, 0.5, 4));
    }

    #[test]
    fn corpus_examples() {
        let a = inst(&[("name", "john smith")], &["john smith"]);
        let b = inst(&[("name", "mary jones")], &["mary jones"]);
        let report = corpus_parent(&[t("john smith")], std::slice::from_ref(&a), 0.5).unwrap();
        assert_eq!(report.mean, report.per_instance[0]);

        let report = corpus_parent(&[t("john smith"), t("mary jones")], &[a.clone(), b.clone()], 0.5).unwrap();
        assert_eq!(report.mean.f_score, 1.0);
        assert_eq!(report.bleu, 100.0);

        assert!(matches!(
            corpus_parent(&[t("x")], &[a, b], 0.5),
            Err(Error::LengthMismatch { left: 1, right: 2, .. })
        ));
        assert!(corpus_parent(&[], &[], 0.5).is_err());
    }

    #[test]
    fn mean_of_two() {
        let s = |f| ParentScore { precision: f, recall_reference: f, coverage_table: f, recall: f, f_score: f, lambda: 0.5 };
        let m = mean_score(&[s(0.4), s(0.6)], 0.5);
        assert!((m.f_score - 0.5).abs() < 1e-15);
    }

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![Just("a"), Just("b"), Just("c"), Just("d"), Just("e")].prop_map(str::to_owned)
    }

    proptest! {
        #[test]
        fn components_in_unit_interval(
            cand in proptest::collection::vec(word(), 0..10),
            reference in proptest::collection::vec(word(), 1..10),
            values in proptest::collection::vec(proptest::collection::vec(word(), 1..3), 1..3),
            lambda in 0.0f64..=1.0,
        ) {
            let pairs: Vec<(String, String)> = values.iter().enumerate().map(|(i, v)| (format!("f{i}"), v.join(" "))).collect();
            let instance = Instance::new(Table::from_pairs(&pairs).unwrap(), vec![reference]).unwrap();
            let s = parent(&cand, &instance, lambda, 4);
            for v in [s.precision, s.recall_reference, s.coverage_table, s.recall, s.f_score] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(s.f_score <= s.precision.max(s.recall) + 1e-15);
        }

        #[test]
        fn unsupported_token_never_raises_unigram_precision(
            cand in proptest::collection::vec(word(), 1..10),
            reference in proptest::collection::vec(word(), 1..10),
            value in proptest::collection::vec(word(), 1..3),
            at in 0usize..10,
        ) {
            let table = Table::from_pairs(&[("f", value.join(" "))]).unwrap();
            let before = entailed_precision(&cand, &reference, &table, 1);
            let mut longer = cand.clone();
            longer.insert(at.min(cand.len()), "zzz".to_owned());
            prop_assert!(entailed_precision(&longer, &reference, &table, 1) <= before);
        }
    }
}
