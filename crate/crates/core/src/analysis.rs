//! Comparative statistics between two systems' outputs and length-conditioned
//! PARENT scores.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::{Instance, Table, Tokens};
use crate::error::{Error, Result};
use crate::metric::{mean_score, parent, ParentScore, DEFAULT_MAX_ORDER};

/// JSON has no NaN; undefined statistics are written as `null` and read back
/// as NaN.
fn nan_from_null<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub count: usize,
    pub lambda: f64,
    pub avg_length_a: f64,
    pub avg_length_b: f64,
    pub avg_length_delta: f64,
    pub f_score_a: f64,
    pub f_score_b: f64,
    pub f_score_delta: f64,
    /// Pearson correlation of per-instance length and F-score deltas.
    #[serde(deserialize_with = "nan_from_null")]
    pub correlation: f64,
    /// Welch two-sample test of per-instance F-scores, two-sided.
    #[serde(deserialize_with = "nan_from_null")]
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub copy_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionedReport {
    pub threshold: f64,
    pub lambda: f64,
    /// Outputs strictly shorter than the threshold; `None` when empty.
    pub short: Option<ClusterStats>,
    pub long: Option<ClusterStats>,
    #[serde(deserialize_with = "nan_from_null")]
    pub p_precision: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub p_recall: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub p_f_score: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub p_copy_count: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation; NaN when either side has zero variance or fewer
/// than two points.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "pearson needs aligned samples");
    if xs.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}

/// Two-sided p-value of Welch's unequal-variance t-test. NaN when a sample
/// has fewer than two values or when both are constant and equal.
pub fn welch_t_test(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 || ys.len() < 2 {
        return f64::NAN;
    }
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (va, vb) = (sample_variance(xs) / na, sample_variance(ys) / nb);
    let diff = mean(xs) - mean(ys);
    let se = (va + vb).sqrt();
    if se == 0.0 {
        return if diff == 0.0 { f64::NAN } else { 0.0 };
    }
    let t = diff / se;
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

fn check_aligned(a: usize, a_name: &'static str, b: usize, b_name: &'static str) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch {
            left_name: a_name,
            left: a,
            right_name: b_name,
            right: b,
        });
    }
    Ok(())
}

fn scores(outputs: &[Tokens], instances: &[Instance], lambda: f64) -> Vec<ParentScore> {
    outputs
        .par_iter()
        .zip(instances.par_iter())
        .map(|(o, inst)| parent(o, inst, lambda, DEFAULT_MAX_ORDER))
        .collect()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda {lambda} outside [0, 1]")))
    }
}

/// Length and F-score comparison of system `b` against system `a`.
pub fn length_stats(a: &[Tokens], b: &[Tokens], instances: &[Instance], lambda: f64) -> Result<LengthReport> {
    check_aligned(a.len(), "outputs_a", b.len(), "outputs_b")?;
    check_aligned(a.len(), "outputs_a", instances.len(), "instances")?;
    check_lambda(lambda)?;
    if a.is_empty() {
        return Err(Error::Empty("outputs"));
    }
    let fa: Vec<f64> = scores(a, instances, lambda).iter().map(|s| s.f_score).collect();
    let fb: Vec<f64> = scores(b, instances, lambda).iter().map(|s| s.f_score).collect();
    let len_a: Vec<f64> = a.iter().map(|o| o.len() as f64).collect();
    let len_b: Vec<f64> = b.iter().map(|o| o.len() as f64).collect();
    let d_len: Vec<f64> = len_a.iter().zip(&len_b).map(|(x, y)| y - x).collect();
    let d_f: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| y - x).collect();
    Ok(LengthReport {
        count: a.len(),
        lambda,
        avg_length_a: mean(&len_a),
        avg_length_b: mean(&len_b),
        avg_length_delta: mean(&d_len),
        f_score_a: mean(&fa),
        f_score_b: mean(&fb),
        f_score_delta: mean(&d_f),
        correlation: pearson(&d_len, &d_f),
        p_value: welch_t_test(&fa, &fb),
    })
}

/// Percentile with linear interpolation between closest ranks.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn nearest(centroids: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (j, c) in centroids.iter().enumerate().skip(1) {
        if (x - c).abs() < (x - centroids[best]).abs() {
            best = j;
        }
    }
    best
}

/// One-dimensional k-means (Lloyd iterations), returning ascending
/// centroids.
///
/// Centroid `j` starts at the `(j + 0.5) / k` percentile of the values; when
/// those coincide the same percentiles of the distinct values are used.
pub fn kmeans_1d(values: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} distinct values, need at least {k}",
            distinct.len()
        )));
    }
    let seeds = |xs: &[f64]| -> Vec<f64> { (0..k).map(|j| percentile(xs, (j as f64 + 0.5) / k as f64)).collect() };
    let mut centroids = seeds(&sorted);
    if centroids.windows(2).any(|w| w[0] >= w[1]) {
        centroids = seeds(&distinct);
    }
    let mut assignment: Vec<usize> = sorted.iter().map(|&x| nearest(&centroids, x)).collect();
    for _ in 0..1000 {
        for (j, c) in centroids.iter_mut().enumerate() {
            let members: Vec<f64> = sorted
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == j)
                .map(|(&x, _)| x)
                .collect();
            if !members.is_empty() {
                *c = mean(&members);
            }
        }
        let next: Vec<usize> = sorted.iter().map(|&x| nearest(&centroids, x)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    centroids.sort_by(f64::total_cmp);
    Ok(centroids)
}

/// Short/long boundary: midpoint between the two lowest of `k` centroids.
pub fn cluster_lengths(lengths: &[usize], k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument("need at least two clusters for a threshold".into()));
    }
    let values: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let centroids = kmeans_1d(&values, k)?;
    Ok((centroids[0] + centroids[1]) / 2.0)
}

/// Occurrences in `candidate` of tokens that appear among the table's value
/// tokens.
pub fn copy_count(candidate: &[String], table: &Table) -> usize {
    let values: HashSet<&str> = table.value_tokens().collect();
    candidate.iter().filter(|t| values.contains(t.as_str())).count()
}

fn cluster_stats(scores: &[ParentScore], copies: &[f64], lambda: f64) -> Option<ClusterStats> {
    if scores.is_empty() {
        return None;
    }
    let m = mean_score(scores, lambda);
    Some(ClusterStats {
        count: scores.len(),
        precision: m.precision,
        recall: m.recall,
        f_score: m.f_score,
        copy_count: mean(copies),
    })
}

/// PARENT components and copy counts of short versus long outputs.
pub fn conditioned_scores(outputs: &[Tokens], instances: &[Instance], threshold: f64, lambda: f64) -> Result<ConditionedReport> {
    check_aligned(outputs.len(), "outputs", instances.len(), "instances")?;
    check_lambda(lambda)?;
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    let all = scores(outputs, instances, lambda);
    let (mut short, mut long) = ((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
    for ((output, inst), score) in outputs.iter().zip(instances).zip(all) {
        let copies = copy_count(output, inst.table()) as f64;
        let side = if (output.len() as f64) < threshold { &mut short } else { &mut long };
        side.0.push(score);
        side.1.push(copies);
    }
    let p = |f: fn(&ParentScore) -> f64| {
        let a: Vec<f64> = short.0.iter().map(f).collect();
        let b: Vec<f64> = long.0.iter().map(f).collect();
        welch_t_test(&a, &b)
    };
    Ok(ConditionedReport {
        threshold,
        lambda,
        p_precision: p(|s| s.precision),
        p_recall: p(|s| s.recall),
        p_f_score: p(|s| s.f_score),
        p_copy_count: welch_t_test(&short.1, &long.1),
        short: cluster_stats(&short.0, &short.1, lambda),
        long: cluster_stats(&long.0, &long.1, lambda),
    })
}

/// Aligned-column plain-text table.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
    };
    let mut out = vec![line(headers.to_vec())];
    out.push(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for row in rows {
        out.push(line(row.iter().map(String::as_str).collect()));
    }
    out.join("\n") + "\n"
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "n/a".to_owned()
    } else {
        format!("{x:.4}")
    }
}

impl LengthReport {
    pub fn to_table(&self) -> String {
        render_table(
            &["statistic", "A", "B", "delta"],
            &[
                vec!["avg length".into(), fmt(self.avg_length_a), fmt(self.avg_length_b), fmt(self.avg_length_delta)],
                vec!["PARENT F".into(), fmt(self.f_score_a), fmt(self.f_score_b), fmt(self.f_score_delta)],
                vec!["correlation".into(), String::new(), String::new(), fmt(self.correlation)],
                vec!["p-value".into(), String::new(), String::new(), fmt(self.p_value)],
            ],
        )
    }
}

impl ConditionedReport {
    pub fn to_table(&self) -> String {
        let row = |name: &str, s: &Option<ClusterStats>| match s {
            Some(s) => vec![
                name.to_owned(),
                s.count.to_string(),
                fmt(s.precision),
                fmt(s.recall),
                fmt(s.f_score),
                format!("{:.2}", s.copy_count),
            ],
            None => vec![name.to_owned(), "0".into(), "absent".into(), String::new(), String::new(), String::new()],
        };
        let mut text = format!("threshold {:.2} tokens\n", self.threshold);
        text += &render_table(
            &["cluster", "n", "precision", "recall", "f_score", "nb_copy"],
            &[
                row("short", &self.short),
                row("long", &self.long),
                vec![
                    "p-value".into(),
                    String::new(),
                    fmt(self.p_precision),
                    fmt(self.p_recall),
                    fmt(self.p_f_score),
                    fmt(self.p_copy_count),
                ],
            ],
        );
        text
    }
}
