//! Maximum-likelihood pretraining and self-critical fine-tuning.
//!
//! Both phases share one step: per instance, a loss
//! `rl_weight * L_rl + ml_weight * L_ml` is built on its own graph, the
//! gradients are summed in batch order and averaged, optionally clipped by
//! global norm, and applied with [`Adam`]. Maximum likelihood is the special
//! case `rl_weight = 0`, in which case nothing is sampled.

mod adam;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use adam::Adam;

use crate::corpus::{write_jsonl, Instance, Tokens};
use crate::error::{Error, Result};
use crate::metric::{corpus_parent, parent_f, CorpusReport, DEFAULT_MAX_ORDER};
use crate::neural::{DecodeMode, Gradients, Graph, Model, ModelConfig, NodeId, ParamStore, Vocab};

/// Checkpoint-selection criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    /// Corpus-mean PARENT F-score of greedy dev outputs at `eval_lambda`.
    DevParentF,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the policy-gradient term in the mixed loss.
    pub gamma: f64,
    /// PARENT lambda used inside the reward.
    pub lambda_train: f64,
    /// PARENT lambda used for dev selection and reporting.
    pub eval_lambda: f64,
    pub lr_mle: f64,
    pub lr_rl: f64,
    pub batch_size: usize,
    pub epochs_mle: usize,
    pub epochs_rl: usize,
    pub seed: u64,
    pub max_len: usize,
    pub selection: SelectionMetric,
    /// Global gradient-norm ceiling; zero or negative disables clipping.
    pub clip_norm: f64,
    /// Minimum training frequency for the generation vocabulary.
    pub min_count: usize,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.9,
            lambda_train: 1.0,
            eval_lambda: 0.5,
            lr_mle: 1e-3,
            lr_rl: 1e-4,
            batch_size: 16,
            epochs_mle: 10,
            epochs_rl: 5,
            seed: 1,
            max_len: 40,
            selection: SelectionMetric::DevParentF,
            clip_norm: 5.0,
            min_count: 2,
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("gamma", self.gamma)?;
        unit("lambda_train", self.lambda_train)?;
        unit("eval_lambda", self.eval_lambda)?;
        for (name, lr) in [("lr_mle", self.lr_mle), ("lr_rl", self.lr_rl)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {lr}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        if self.max_len == 0 {
            return Err(Error::InvalidArgument("max_len must be at least 1".into()));
        }
        if self.model.hidden == 0 || self.model.max_entities == 0 {
            return Err(Error::InvalidArgument("model dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// One reward computation: sampled candidate against the greedy baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub candidate: Tokens,
    pub baseline: Tokens,
    pub parent_candidate: f64,
    pub parent_baseline: f64,
    pub reward: f64,
}

/// Improvement in PARENT F-score of `candidate` over `baseline`.
pub fn reward(candidate: &[String], baseline: &[String], instance: &Instance, lambda_train: f64) -> RewardRecord {
    let parent_candidate = parent_f(candidate, instance, lambda_train, DEFAULT_MAX_ORDER);
    let parent_baseline = parent_f(baseline, instance, lambda_train, DEFAULT_MAX_ORDER);
    RewardRecord {
        candidate: candidate.to_vec(),
        baseline: baseline.to_vec(),
        parent_candidate,
        parent_baseline,
        reward: parent_candidate - parent_baseline,
    }
}

/// `-r * Σ log p` for already-computed log-probabilities.
pub fn rl_loss(log_probs: &[f64], reward: f64) -> f64 {
    -reward * log_probs.iter().sum::<f64>()
}

/// Differentiable form of [`rl_loss`]; the reward is a constant.
pub fn rl_loss_node(g: &mut Graph, log_probs: &[NodeId], reward: f64) -> NodeId {
    let all = g.concat(log_probs);
    let total = g.sum(all);
    g.scale(total, -reward)
}

pub fn mixed_loss(gamma: f64, rl: f64, ml: f64) -> f64 {
    gamma * rl + (1.0 - gamma) * ml
}

/// Weights of the two loss terms for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub rl_weight: f64,
    pub ml_weight: f64,
}

impl Objective {
    pub fn mle() -> Self {
        Objective {
            rl_weight: 0.0,
            ml_weight: 1.0,
        }
    }

    pub fn mixed(gamma: f64) -> Self {
        Objective {
            rl_weight: gamma,
            ml_weight: 1.0 - gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Mle,
    Rl,
}

/// Seeded generator for one instance in one epoch.
pub fn instance_rng(seed: u64, epoch: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 32) | index as u64);
    rng
}

struct InstanceResult {
    grads: Gradients,
    loss: f64,
    nll: Option<f64>,
    reward: Option<RewardRecord>,
}

fn instance_pass(
    model: &Model,
    instance: &Instance,
    index: usize,
    objective: Objective,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<InstanceResult> {
    let src = model.prepare_table(instance.table())?;
    let mut g = Graph::new(&model.params);
    let enc = model.encode(&mut g, &src)?;
    let mut terms = Vec::with_capacity(2);
    let mut record = None;
    if objective.rl_weight != 0.0 {
        let sampled = model.decode(&mut g, &enc, &src, config.max_len, DecodeMode::Sample(rng));
        let greedy = model.decode::<ChaCha8Rng>(&mut g, &enc, &src, config.max_len, DecodeMode::Greedy);
        let rec = reward(
            &model.ids_to_tokens(&src, &sampled.ids),
            &model.ids_to_tokens(&src, &greedy.ids),
            instance,
            config.lambda_train,
        );
        let rl = rl_loss_node(&mut g, &sampled.log_probs, rec.reward);
        terms.push(g.scale(rl, objective.rl_weight));
        record = Some(rec);
    }
    let mut nll = None;
    if objective.ml_weight != 0.0 {
        let targets = model.target_ids(&src, instance.primary_reference());
        let ml = model.teacher_forced_loss(&mut g, &enc, &src, &targets);
        nll = Some(g.value(ml).item());
        terms.push(g.scale(ml, objective.ml_weight));
    }
    let loss = match terms[..] {
        [single] => single,
        [a, b] => g.add(a, b),
        _ => return Err(Error::InvalidArgument("objective has no active term".into())),
    };
    let value = g.value(loss).item();
    if !value.is_finite() {
        return Err(non_finite(value, index, instance));
    }
    let grads = g.backward(loss)?;
    if !grads.all_finite() {
        return Err(non_finite(value, index, instance));
    }
    Ok(InstanceResult {
        grads,
        loss: value,
        nll,
        reward: record,
    })
}

fn non_finite(loss: f64, index: usize, instance: &Instance) -> Error {
    Error::NonFiniteLoss {
        loss,
        index,
        dump: serde_json::to_string(instance).unwrap_or_default(),
    }
}

/// Summary of one optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub loss: f64,
    pub nll: Option<f64>,
    pub rewards: Vec<RewardRecord>,
    pub grad_norm: f64,
}

/// Batch-averaged gradients of `objective`; `batch` pairs each instance with
/// its dataset index (which seeds its sampler together with `epoch`).
pub fn batch_gradients(
    model: &Model,
    batch: &[(usize, &Instance)],
    objective: Objective,
    config: &TrainConfig,
    epoch: usize,
) -> Result<(Gradients, StepReport)> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let results: Vec<Result<InstanceResult>> = batch
        .par_iter()
        .map(|&(index, instance)| {
            let mut rng = instance_rng(config.seed, epoch, index);
            instance_pass(model, instance, index, objective, config, &mut rng)
        })
        .collect();
    let mut grads = Gradients::zeros_like(&model.params);
    let (mut loss, mut nll_sum, mut nll_count) = (0.0, 0.0, 0usize);
    let mut rewards = Vec::new();
    for result in results {
        let r = result?;
        grads.add_assign(&r.grads);
        loss += r.loss;
        if let Some(n) = r.nll {
            nll_sum += n;
            nll_count += 1;
        }
        rewards.extend(r.reward);
    }
    let n = batch.len() as f64;
    grads.scale(1.0 / n);
    let grad_norm = grads.l2_norm();
    Ok((
        grads,
        StepReport {
            loss: loss / n,
            nll: (nll_count > 0).then(|| nll_sum / nll_count as f64),
            rewards,
            grad_norm,
        },
    ))
}

/// One optimizer update on `batch`.
pub fn train_step(
    model: &mut Model,
    adam: &mut Adam,
    batch: &[(usize, &Instance)],
    objective: Objective,
    config: &TrainConfig,
    lr: f64,
    epoch: usize,
) -> Result<StepReport> {
    let (mut grads, report) = batch_gradients(model, batch, objective, config, epoch)?;
    if config.clip_norm > 0.0 && report.grad_norm > config.clip_norm {
        grads.scale(config.clip_norm / report.grad_norm);
    }
    adam.update(&mut model.params, &grads, lr);
    if !model.params.all_finite() {
        let (index, instance) = batch[0];
        return Err(non_finite(report.loss, index, instance));
    }
    Ok(report)
}

/// Mixed-objective step with the configured `gamma` and RL learning rate.
pub fn mixed_step(
    model: &mut Model,
    adam: &mut Adam,
    batch: &[(usize, &Instance)],
    config: &TrainConfig,
    epoch: usize,
) -> Result<StepReport> {
    train_step(model, adam, batch, Objective::mixed(config.gamma), config, config.lr_rl, epoch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub epoch: usize,
    pub split: Split,
    pub nll: Option<f64>,
    pub mean_reward: Option<f64>,
    pub parent_f: Option<f64>,
    pub bleu: Option<f64>,
}

pub fn write_log(entries: &[LogEntry], path: impl AsRef<Path>) -> Result<()> {
    write_jsonl(entries, path.as_ref())
}

/// Greedy outputs for every instance, in order.
pub fn greedy_corpus(model: &Model, instances: &[Instance], max_len: usize) -> Result<Vec<Tokens>> {
    instances
        .par_iter()
        .map(|inst| model.greedy_decode(inst.table(), max_len))
        .collect()
}

/// Sampled outputs; instance `i` draws from stream `i` of `seed`.
pub fn sampled_corpus(model: &Model, instances: &[Instance], max_len: usize, seed: u64) -> Result<Vec<Tokens>> {
    instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut rng = instance_rng(seed, 0, i);
            model.sample_decode_with(inst.table(), max_len, &mut rng).map(|(t, _)| t)
        })
        .collect()
}

/// Mean teacher-forced NLL plus PARENT/BLEU of greedy outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub nll: f64,
    pub outputs: Vec<Tokens>,
    pub report: CorpusReport,
}

pub fn evaluate(model: &Model, instances: &[Instance], max_len: usize, lambda: f64) -> Result<Evaluation> {
    if instances.is_empty() {
        return Err(Error::Empty("evaluation split"));
    }
    let nlls: Vec<f64> = instances
        .par_iter()
        .map(|inst| model.teacher_forced_nll(inst))
        .collect::<Result<_>>()?;
    let outputs = greedy_corpus(model, instances, max_len)?;
    let report = corpus_parent(&outputs, instances, lambda)?;
    Ok(Evaluation {
        nll: nlls.iter().sum::<f64>() / nlls.len() as f64,
        outputs,
        report,
    })
}

/// Result of a training phase: the selected model and the full log.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub log: Vec<LogEntry>,
    /// Epoch of the selected checkpoint; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
    pub best_score: Option<f64>,
}

fn epoch_order(len: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - epoch as u64);
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut rng);
    order
}

fn check_splits(train: &[Instance], dev: &[Instance]) -> Result<()> {
    if train.is_empty() {
        return Err(Error::Empty("training split"));
    }
    if dev.is_empty() {
        return Err(Error::Empty("dev split"));
    }
    Ok(())
}

/// Runs one phase from `model`, keeping the epoch with the best dev score
/// (earliest on ties).
pub fn run_phase(mut model: Model, train: &[Instance], dev: &[Instance], config: &TrainConfig, phase: Phase) -> Result<TrainOutcome> {
    config.validate()?;
    check_splits(train, dev)?;
    let (objective, lr, epochs) = match phase {
        Phase::Mle => (Objective::mle(), config.lr_mle, config.epochs_mle),
        Phase::Rl => (Objective::mixed(config.gamma), config.lr_rl, config.epochs_rl),
    };
    let mut adam = Adam::new(&model.params);
    let mut log = Vec::with_capacity(2 * epochs);
    let mut best: Option<(f64, usize, ParamStore)> = None;
    for epoch in 1..=epochs {
        let order = epoch_order(train.len(), config.seed, epoch);
        let (mut nll_sum, mut nll_batches) = (0.0, 0usize);
        let (mut reward_sum, mut reward_count) = (0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(usize, &Instance)> = chunk.iter().map(|&i| (i, &train[i])).collect();
            let report = train_step(&mut model, &mut adam, &batch, objective, config, lr, epoch)?;
            if let Some(n) = report.nll {
                nll_sum += n;
                nll_batches += 1;
            }
            for r in &report.rewards {
                reward_sum += r.reward;
                reward_count += 1;
            }
        }
        log.push(LogEntry {
            epoch,
            split: Split::Train,
            nll: (nll_batches > 0).then(|| nll_sum / nll_batches as f64),
            mean_reward: (reward_count > 0).then(|| reward_sum / reward_count as f64),
            parent_f: None,
            bleu: None,
        });
        let eval = evaluate(&model, dev, config.max_len, config.eval_lambda)?;
        let score = match config.selection {
            SelectionMetric::DevParentF => eval.report.mean.f_score,
        };
        log.push(LogEntry {
            epoch,
            split: Split::Dev,
            nll: Some(eval.nll),
            mean_reward: None,
            parent_f: Some(eval.report.mean.f_score),
            bleu: Some(eval.report.bleu),
        });
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, epoch, model.params.clone()));
        }
    }
    let (best_score, best_epoch) = match best {
        Some((score, epoch, params)) => {
            model.params = params;
            (Some(score), Some(epoch))
        }
        None => (None, None),
    };
    Ok(TrainOutcome {
        model,
        log,
        best_epoch,
        best_score,
    })
}

/// Fresh model for `train`: vocabularies from the training split, weights
/// from `config.seed`.
pub fn init_model(train: &[Instance], config: &TrainConfig) -> Result<Model> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training split"));
    }
    let vocab = Vocab::build(train, config.min_count);
    let attributes = Vocab::build_attributes(train);
    Ok(Model::new(config.model.clone(), vocab, attributes, config.seed))
}

/// Maximum-likelihood pretraining from scratch.
pub fn train_mle(train: &[Instance], dev: &[Instance], config: &TrainConfig) -> Result<TrainOutcome> {
    check_splits(train, dev)?;
    let model = init_model(train, config)?;
    run_phase(model, train, dev, config, Phase::Mle)
}

/// Mixed-objective fine-tuning from a pretrained model.
pub fn train_rl(pretrained: Model, train: &[Instance], dev: &[Instance], config: &TrainConfig) -> Result<TrainOutcome> {
    run_phase(pretrained, train, dev, config, Phase::Rl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Table};
    use crate::neural::Tensor;

    fn instance(pairs: &[(&str, &str)], reference: &str) -> Instance {
        Instance::new(Table::from_pairs(pairs).unwrap(), vec![tokenize(reference)]).unwrap()
    }

    fn tiny() -> TrainConfig {
        TrainConfig {
            batch_size: 2,
            epochs_mle: 2,
            epochs_rl: 1,
            max_len: 8,
            min_count: 1,
            model: ModelConfig {
                word_dim: 6,
                attr_dim: 4,
                pos_dim: 2,
                hidden: 8,
                ..ModelConfig::default()
            },
            ..TrainConfig::default()
        }
    }

    fn corpus() -> Vec<Instance> {
        vec![
            instance(&[("name", "ann lee"), ("occupation", "poet")], "ann lee is a poet ."),
            instance(&[("name", "bo chen"), ("occupation", "chef")], "bo chen is a chef ."),
            instance(&[("name", "cy diaz"), ("occupation", "poet")], "cy diaz was a poet ."),
        ]
    }

    #[test]
    fn reward_examples() {
        let inst = instance(&[("name", "ann lee")], "ann lee");
        let same = reward(&tokenize("ann"), &tokenize("ann"), &inst, 1.0);
        assert_eq!(same.reward, 0.0);
        let worse = reward(&[], &tokenize("ann lee"), &inst, 1.0);
        assert_eq!(worse.parent_baseline, 1.0);
        assert_eq!(worse.reward, -1.0);
        let a = tokenize("ann is lee");
        let b = tokenize("lee");
        assert_eq!(reward(&a, &b, &inst, 1.0).reward, -reward(&b, &a, &inst, 1.0).reward);
    }

    #[test]
    fn loss_arithmetic() {
        assert!((rl_loss(&[-2.0, -3.0], 0.1) - 0.5).abs() < 1e-12);
        assert_eq!(rl_loss(&[-2.0, -3.0], 0.0), 0.0);
        assert!((mixed_loss(0.9, 1.0, 2.0) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn positive_reward_gradient_raises_likelihood() {
        let mut params = ParamStore::new();
        let id = params.add("logits", Tensor::row(vec![0.0, 0.0]));
        let grad = {
            let mut g = Graph::new(&params);
            let w = g.param(id);
            let p = g.softmax(w);
            let chosen = g.gather(p, &[1]);
            let lp = g.log(chosen, 1e-12);
            let loss = rl_loss_node(&mut g, &[lp], 0.5);
            g.backward(loss).unwrap().get(id).data.clone()
        };
        // descending the loss raises the chosen logit and lowers the other
        assert!(grad[1] < 0.0 && grad[0] > 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            gamma: 1.5,
            ..TrainConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidArgument(_))));
        let toml_like: TrainConfig = serde_json::from_str(r#"{"gamma":0.5,"model":{"hidden":4}}"#).unwrap();
        assert_eq!(toml_like.gamma, 0.5);
        assert_eq!(toml_like.model.hidden, 4);
        assert_eq!(toml_like.lambda_train, 1.0);
    }

    #[test]
    fn one_epoch_reduces_nll_on_single_instance() {
        let data = vec![corpus().remove(0)];
        let config = TrainConfig {
            epochs_mle: 1,
            lr_mle: 1e-2,
            batch_size: 1,
            ..tiny()
        };
        let model = init_model(&data, &config).unwrap();
        let before = model.teacher_forced_nll(&data[0]).unwrap();
        let mut trained = model.clone();
        let mut adam = Adam::new(&trained.params);
        for _ in 0..5 {
            train_step(&mut trained, &mut adam, &[(0, &data[0])], Objective::mle(), &config, config.lr_mle, 1).unwrap();
        }
        let after = trained.teacher_forced_nll(&data[0]).unwrap();
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn gamma_zero_matches_mle_bitwise() {
        let data = corpus();
        let config = TrainConfig { gamma: 0.0, ..tiny() };
        let model = init_model(&data, &config).unwrap();
        let batch: Vec<(usize, &Instance)> = data.iter().enumerate().collect();
        let mut a = model.clone();
        let mut b = model.clone();
        let (mut adam_a, mut adam_b) = (Adam::new(&a.params), Adam::new(&b.params));
        let ra = mixed_step(&mut a, &mut adam_a, &batch, &config, 1).unwrap();
        let rb = train_step(&mut b, &mut adam_b, &batch, Objective::mle(), &config, config.lr_rl, 1).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn mixed_step_reports_rewards_and_is_deterministic() {
        let data = corpus();
        let config = tiny();
        let model = init_model(&data, &config).unwrap();
        let batch: Vec<(usize, &Instance)> = data.iter().enumerate().collect();
        let run = || {
            let mut m = model.clone();
            let mut adam = Adam::new(&m.params);
            let report = mixed_step(&mut m, &mut adam, &batch, &config, 3).unwrap();
            (report, m.params)
        };
        let (r1, p1) = run();
        let (r2, p2) = run();
        assert_eq!(r1, r2);
        assert_eq!(p1, p2);
        assert_eq!(r1.rewards.len(), 3);
        for rec in &r1.rewards {
            assert_eq!(rec.reward, rec.parent_candidate - rec.parent_baseline);
            assert!(rec.candidate.len() <= config.max_len);
        }
    }

    #[test]
    fn phases_log_and_select() {
        let data = corpus();
        let config = tiny();
        let out = train_mle(&data, &data[..1], &config).unwrap();
        assert_eq!(out.log.len(), 4);
        assert_eq!(out.log[0].split, Split::Train);
        assert!(out.log[0].mean_reward.is_none());
        assert!(out.log[1].parent_f.is_some());
        let again = train_mle(&data, &data[..1], &config).unwrap();
        assert_eq!(out.log, again.log);
        assert_eq!(out.model.params, again.model.params);

        let rl = train_rl(out.model, &data, &data[..1], &config).unwrap();
        assert_eq!(rl.log.len(), 2);
        assert!(rl.log[0].mean_reward.is_some());
        assert_eq!(rl.best_epoch, Some(1));

        assert!(matches!(train_mle(&[], &data, &config), Err(Error::Empty(_))));
        assert!(matches!(train_mle(&data, &[], &config), Err(Error::Empty(_))));
    }
}
