use std::collections::HashMap;

use crate::corpus::Tokens;
use crate::error::{Error, Result};

const MAX_ORDER: usize = 4;
/// Numerator used for higher-order precisions with no matches.
pub const SMOOTHING_EPSILON: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Reference length closest to `len`, preferring the shorter one on ties.
fn closest_reference_length(len: usize, references: &[Tokens]) -> usize {
    references
        .iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(len), r))
        .unwrap_or(0)
}

/// Corpus BLEU-4 on a 0-100 scale.
///
/// Clipped n-gram counts are pooled over the corpus (clipping against the
/// maximum count in any reference of the same instance). Higher orders with
/// no match use [`SMOOTHING_EPSILON`] as numerator; no unigram match gives 0.
/// Orders longer than every candidate are skipped.
/// The brevity penalty is `exp(1 - r/c)` when `c < r`.
pub fn corpus_bleu(candidates: &[Tokens], references: &[Vec<Tokens>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left_name: "candidates",
            left: candidates.len(),
            right_name: "references",
            right: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(Error::Empty("corpus"));
    }

    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;

    for (cand, refs) in candidates.iter().zip(references) {
        cand_len += cand.len();
        ref_len += closest_reference_length(cand.len(), refs);
        for n in 1..=MAX_ORDER {
            let cand_counts = ngram_counts(cand, n);
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            for r in refs {
                for (gram, c) in ngram_counts(r, n) {
                    let slot = max_ref.entry(gram).or_insert(0);
                    *slot = (*slot).max(c);
                }
            }
            for (gram, c) in &cand_counts {
                matches[n - 1] += (*c).min(max_ref.get(gram).copied().unwrap_or(0));
            }
            totals[n - 1] += cand.len().saturating_sub(n - 1);
        }
    }

    if matches[0] == 0 || cand_len == 0 {
        return Ok(0.0);
    }
    // Orders with no candidate n-gram anywhere in the corpus are left out of
    // the geometric mean.
    let orders = totals.iter().filter(|&&t| t > 0).count();
    let mut log_sum = 0.0;
    for n in 0..orders {
        let p = if matches[n] > 0 {
            matches[n] as f64 / totals[n] as f64
        } else {
            SMOOTHING_EPSILON / totals[n] as f64
        };
        log_sum += p.ln() / orders as f64;
    }
    let brevity = if cand_len < ref_len {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    } else {
        1.0
    };
    Ok(100.0 * brevity * log_sum.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    #[test]
    fn identical_is_100() {
        let refs = vec![tokenize("the cat sat on the mat ."), tokenize("a b c d e")];
        let multi: Vec<Vec<Tokens>> = refs.iter().map(|r| vec![r.clone()]).collect();
        assert_eq!(corpus_bleu(&refs, &multi).unwrap(), 100.0);
    }

    #[test]
    fn disjoint_is_zero() {
        let cands = vec![tokenize("x y z w")];
        let refs = vec![vec![tokenize("a b c d")]];
        assert_eq!(corpus_bleu(&cands, &refs).unwrap(), 0.0);
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(corpus_bleu(&[], &[]), Err(Error::Empty(_))));
        assert!(corpus_bleu(&[vec![]], &[]).is_err());
    }

    #[test]
    fn brevity_penalty_applies() {
        let cands = vec![tokenize("a b c d")];
        let refs = vec![vec![tokenize("a b c d e f g h")]];
        let expected = 100.0 * (1.0f64 - 2.0).exp();
        assert!((corpus_bleu(&cands, &refs).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn multi_reference_clipping_uses_max() {
        let cands = vec![tokenize("the the the")];
        let refs = vec![vec![tokenize("the cat"), tokenize("the the dog")]];
        // unigram precision 2/3, trigram smoothed, no 4-grams at all.
        let got = corpus_bleu(&cands, &refs).unwrap();
        let p2: f64 = 1.0 / 2.0; // "the the" appears once in the second reference
        let p3 = SMOOTHING_EPSILON / 1.0;
        let expected = 100.0 * (((2.0f64 / 3.0).ln() + p2.ln() + p3.ln()) / 3.0).exp();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }
}
