//! Brute-force reference implementations used to check the engine.
//!
//! Everything here is written from the metric definitions with plain loops
//! over token positions; nothing is shared with the library beyond the
//! input types.

#![allow(dead_code)]

use parenting::corpus::{Instance, Table};

pub fn lexicon(table: &Table) -> Vec<String> {
    let mut words = Vec::new();
    for record in table.records() {
        for t in record.value_tokens() {
            words.push(t.clone());
        }
        for part in record.attribute().split('_') {
            if !part.is_empty() {
                words.push(part.to_lowercase());
            }
        }
    }
    words
}

fn ngram_at(seq: &[String], i: usize, n: usize) -> &[String] {
    &seq[i..i + n]
}

fn count_in(seq: &[String], gram: &[String]) -> usize {
    let n = gram.len();
    if seq.len() < n {
        return 0;
    }
    (0..=seq.len() - n).filter(|&i| ngram_at(seq, i, n) == gram).count()
}

/// Occurrences of `gram` in `seq` strictly before position `end`.
fn count_before(seq: &[String], gram: &[String], end: usize) -> usize {
    (0..end).filter(|&i| ngram_at(seq, i, gram.len()) == gram).count()
}

fn entailed(gram: &[String], lexicon: &[String]) -> bool {
    gram.iter().all(|t| lexicon.contains(t))
}

/// Occurrence-level precision: the k-th occurrence of a non-entailed
/// n-gram is credited when the reference holds at least k copies.
pub fn precision(candidate: &[String], reference: &[String], lexicon: &[String], n_max: usize) -> f64 {
    let mut per_order = Vec::new();
    for n in 1..=n_max {
        if candidate.len() < n {
            break;
        }
        let total = candidate.len() - n + 1;
        let mut credited = 0usize;
        for i in 0..total {
            let gram = ngram_at(candidate, i, n);
            let kth = count_before(candidate, gram, i) + 1;
            if entailed(gram, lexicon) || kth <= count_in(reference, gram) {
                credited += 1;
            }
        }
        per_order.push(credited as f64 / total as f64);
    }
    if per_order.is_empty() {
        0.0
    } else {
        per_order.iter().sum::<f64>() / per_order.len() as f64
    }
}

pub fn recall_reference(candidate: &[String], reference: &[String], lexicon: &[String], n_max: usize) -> f64 {
    let mut per_order = Vec::new();
    for n in 1..=n_max {
        if reference.len() < n {
            break;
        }
        let mut total = 0usize;
        let mut found = 0usize;
        for i in 0..=reference.len() - n {
            let gram = ngram_at(reference, i, n);
            if !entailed(gram, lexicon) {
                continue;
            }
            total += 1;
            let kth = count_before(reference, gram, i) + 1;
            if kth <= count_in(candidate, gram) {
                found += 1;
            }
        }
        if total > 0 {
            per_order.push(found as f64 / total as f64);
        }
    }
    if per_order.is_empty() {
        1.0
    } else {
        per_order.iter().sum::<f64>() / per_order.len() as f64
    }
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// Longest common subsequence by trying every subsequence of the shorter
/// input, longest first.
pub fn lcs(a: &[String], b: &[String]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 20, "exhaustive LCS is exponential");
    let mut best = 0;
    for mask in 0u32..(1u32 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let picked: Vec<&String> = (0..short.len()).filter(|i| mask & (1 << i) != 0).map(|i| &short[i]).collect();
        if is_subsequence(&picked, long) {
            best = size;
        }
    }
    best
}

pub fn coverage(candidate: &[String], table: &Table) -> f64 {
    let records = table.records();
    records
        .iter()
        .map(|r| lcs(r.value_tokens(), candidate) as f64 / r.value_tokens().len() as f64)
        .sum::<f64>()
        / records.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub precision: f64,
    pub recall_reference: f64,
    pub coverage_table: f64,
    pub recall: f64,
    pub f_score: f64,
}

pub fn parent(candidate: &[String], instance: &Instance, lambda: f64, n_max: usize) -> Score {
    let lex = lexicon(instance.table());
    let cov = coverage(candidate, instance.table());
    let mut best: Option<Score> = None;
    for reference in instance.references() {
        let p = precision(candidate, reference, &lex, n_max);
        let rr = recall_reference(candidate, reference, &lex, n_max);
        let r = rr.powf(lambda) * cov.powf(1.0 - lambda);
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let s = Score {
            precision: p,
            recall_reference: rr,
            coverage_table: cov,
            recall: r,
            f_score: f,
        };
        if best.is_none_or(|b| s.f_score > b.f_score) {
            best = Some(s);
        }
    }
    best.unwrap()
}

/// Corpus BLEU-4 written out directly from the textbook definition:
/// clipped counts against the per-n-gram maximum over references, closest
/// reference length (shorter on ties), epsilon for empty higher orders,
/// orders with no candidate n-grams at all left out.
pub fn bleu(candidates: &[Vec<String>], references: &[Vec<Vec<String>>]) -> f64 {
    let mut matched = [0f64; 4];
    let mut totals = [0f64; 4];
    let (mut c_len, mut r_len) = (0usize, 0usize);
    for (cand, refs) in candidates.iter().zip(references) {
        c_len += cand.len();
        let mut closest = refs[0].len();
        for r in refs {
            let (d, best) = (r.len().abs_diff(cand.len()), closest.abs_diff(cand.len()));
            if d < best || (d == best && r.len() < closest) {
                closest = r.len();
            }
        }
        r_len += closest;
        for n in 1..=4 {
            if cand.len() < n {
                continue;
            }
            for i in 0..=cand.len() - n {
                let gram = ngram_at(cand, i, n);
                totals[n - 1] += 1.0;
                let kth = count_before(cand, gram, i) + 1;
                let max_ref = refs.iter().map(|r| count_in(r, gram)).max().unwrap_or(0);
                if kth <= max_ref {
                    matched[n - 1] += 1.0;
                }
            }
        }
    }
    if matched[0] == 0.0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0.0;
    for n in 0..4 {
        if totals[n] == 0.0 {
            continue;
        }
        let m = if matched[n] == 0.0 { 1e-9 } else { matched[n] };
        log_sum += (m / totals[n]).ln();
        orders += 1.0;
    }
    let bp = if c_len < r_len { (1.0 - r_len as f64 / c_len as f64).exp() } else { 1.0 };
    100.0 * bp * (log_sum / orders).exp()
}
