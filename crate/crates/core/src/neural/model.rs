//! Encoder-decoder over linearized tables, with additive input features,
//! a bidirectional gated recurrent encoder, bilinear attention and a
//! conditional copy gate.
//!
//! Dimension table (defaults in brackets; `Dw` word, `Da` attribute, `Dp`
//! position, `De` entity, `H` hidden, `V` generation vocabulary, `A`
//! attribute vocabulary, `P` position slots):
//!
//! | parameter                    | shape                 |
//! |------------------------------|-----------------------|
//! | `word_emb`                   | V x Dw [32]           |
//! | `attr_emb`                   | A x Da [32]           |
//! | `pos_fwd_emb`, `pos_bwd_emb` | P x Dp [8]            |
//! | `entity_emb` (optional)      | E x De [8]            |
//! | `enc_{fwd,bwd}_wx`           | F x 3H, F = Dw+Da+2Dp(+De) |
//! | `enc_{fwd,bwd}_wh`           | H x 3H [H = 64]       |
//! | `enc_{fwd,bwd}_b`            | 1 x 3H                |
//! | `bridge_w`, `bridge_b`       | 2H x H, 1 x H         |
//! | `dec_wx`, `dec_wh`, `dec_b`  | (Dw+2H) x 3H, H x 3H, 1 x 3H |
//! | `attn_w`                     | H x 2H                |
//! | `out_w`, `out_b`             | 3H x V, 1 x V         |
//! | `gate_w`, `gate_b`           | (2H+H+Dw) x 1, 1 x 1  |
//!
//! Gate blocks of the recurrent weights are laid out `[update | reset | candidate]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::autodiff::{Gradients, Graph, NodeId, ParamId, ParamStore, Tensor};
use super::vocab::{Vocab, BOS_ID, EOS_ID, UNK_ID};
use crate::corpus::{linearize_table, Instance, SourceToken, Table, Tokens};
use crate::error::{Error, Result};

/// Probabilities are clamped below at this value before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub word_dim: usize,
    pub attr_dim: usize,
    pub pos_dim: usize,
    pub entity_dim: usize,
    pub hidden: usize,
    /// Positions above this are clipped to it.
    pub max_position: usize,
    pub max_entities: usize,
    pub use_entities: bool,
    pub init_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_dim: 32,
            attr_dim: 32,
            pos_dim: 8,
            entity_dim: 8,
            hidden: 64,
            max_position: 30,
            max_entities: 8,
            use_entities: false,
            init_scale: 0.1,
        }
    }
}

impl ModelConfig {
    fn feature_dim(&self) -> usize {
        self.word_dim + self.attr_dim + 2 * self.pos_dim + if self.use_entities { self.entity_dim } else { 0 }
    }
}

#[derive(Debug, Clone, Copy)]
struct ParamIds {
    word_emb: ParamId,
    attr_emb: ParamId,
    pos_fwd_emb: ParamId,
    pos_bwd_emb: ParamId,
    entity_emb: Option<ParamId>,
    enc_fwd: GruIds,
    enc_bwd: GruIds,
    bridge_w: ParamId,
    bridge_b: ParamId,
    dec: GruIds,
    attn_w: ParamId,
    out_w: ParamId,
    out_b: ParamId,
    gate_w: ParamId,
    gate_b: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct GruIds {
    wx: ParamId,
    wh: ParamId,
    b: ParamId,
}

fn parameter_shapes(config: &ModelConfig, vocab: usize, attributes: usize) -> Vec<(String, usize, usize)> {
    let h = config.hidden;
    let positions = config.max_position + 1;
    let mut shapes = vec![
        ("word_emb".to_owned(), vocab, config.word_dim),
        ("attr_emb".to_owned(), attributes, config.attr_dim),
        ("pos_fwd_emb".to_owned(), positions, config.pos_dim),
        ("pos_bwd_emb".to_owned(), positions, config.pos_dim),
    ];
    if config.use_entities {
        shapes.push(("entity_emb".to_owned(), config.max_entities, config.entity_dim));
    }
    for dir in ["fwd", "bwd"] {
        shapes.push((format!("enc_{dir}_wx"), config.feature_dim(), 3 * h));
        shapes.push((format!("enc_{dir}_wh"), h, 3 * h));
        shapes.push((format!("enc_{dir}_b"), 1, 3 * h));
    }
    shapes.extend([
        ("bridge_w".to_owned(), 2 * h, h),
        ("bridge_b".to_owned(), 1, h),
        ("dec_wx".to_owned(), config.word_dim + 2 * h, 3 * h),
        ("dec_wh".to_owned(), h, 3 * h),
        ("dec_b".to_owned(), 1, 3 * h),
        ("attn_w".to_owned(), h, 2 * h),
        ("out_w".to_owned(), 3 * h, vocab),
        ("out_b".to_owned(), 1, vocab),
        ("gate_w".to_owned(), 3 * h + config.word_dim, 1),
        ("gate_b".to_owned(), 1, 1),
    ]);
    shapes
}

fn resolve_ids(params: &ParamStore, config: &ModelConfig) -> Result<ParamIds> {
    let get = |name: &str| {
        params
            .id_of(name)
            .ok_or_else(|| Error::Checkpoint(format!("missing parameter `{name}`")))
    };
    let gru = |dir: &str| -> Result<GruIds> {
        Ok(GruIds {
            wx: get(&format!("{dir}_wx"))?,
            wh: get(&format!("{dir}_wh"))?,
            b: get(&format!("{dir}_b"))?,
        })
    };
    Ok(ParamIds {
        word_emb: get("word_emb")?,
        attr_emb: get("attr_emb")?,
        pos_fwd_emb: get("pos_fwd_emb")?,
        pos_bwd_emb: get("pos_bwd_emb")?,
        entity_emb: if config.use_entities { Some(get("entity_emb")?) } else { None },
        enc_fwd: gru("enc_fwd")?,
        enc_bwd: gru("enc_bwd")?,
        bridge_w: get("bridge_w")?,
        bridge_b: get("bridge_b")?,
        dec: gru("dec")?,
        attn_w: get("attn_w")?,
        out_w: get("out_w")?,
        out_b: get("out_b")?,
        gate_w: get("gate_w")?,
        gate_b: get("gate_b")?,
    })
}

/// A table prepared for one forward pass: feature ids per source position
/// plus the per-instance extended vocabulary for copying.
#[derive(Debug, Clone)]
pub struct PreparedSource {
    word_ids: Vec<usize>,
    attr_ids: Vec<usize>,
    fwd_ids: Vec<usize>,
    bwd_ids: Vec<usize>,
    entity_ids: Vec<usize>,
    ext_ids: Vec<usize>,
    oov: Vec<String>,
    vocab_len: usize,
}

impl PreparedSource {
    pub fn len(&self) -> usize {
        self.word_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_ids.is_empty()
    }

    /// Size of the extended vocabulary (generation vocabulary plus source
    /// tokens outside it).
    pub fn extended_len(&self) -> usize {
        self.vocab_len + self.oov.len()
    }

    /// Extended-vocabulary id of each source position.
    pub fn extended_ids(&self) -> &[usize] {
        &self.ext_ids
    }

    pub fn extended_id(&self, vocab: &Vocab, token: &str) -> usize {
        vocab.get(token).unwrap_or_else(|| {
            self.oov
                .iter()
                .position(|t| t == token)
                .map_or(UNK_ID, |k| self.vocab_len + k)
        })
    }

    pub fn token<'a>(&'a self, vocab: &'a Vocab, id: usize) -> &'a str {
        if id < self.vocab_len {
            vocab.token(id)
        } else {
            &self.oov[id - self.vocab_len]
        }
    }
}

/// Encoder output for one source sequence.
#[derive(Debug, Clone, Copy)]
pub struct EncoderStates {
    /// `S x 2H`, one row per source token.
    pub states: NodeId,
    states_t: NodeId,
    pub init_hidden: NodeId,
    pub len: usize,
}

/// Recurrent decoder state between steps.
#[derive(Debug, Clone)]
pub struct DecodeState {
    pub hidden: NodeId,
    pub context: NodeId,
    pub step: usize,
    pub prefix: Vec<usize>,
}

/// What one decoder step produced.
#[derive(Debug, Clone, Copy)]
pub struct StepOutput {
    /// `1 x extended_len` probability vector.
    pub distribution: NodeId,
    pub attention: NodeId,
    pub gate: NodeId,
}

pub enum DecodeMode<'r, R: Rng> {
    Greedy,
    Sample(&'r mut R),
}

/// A decoded sequence: extended-vocabulary ids (no EOS) and, per step, the
/// log-probability node of the chosen token (including the final EOS).
pub struct Decoded {
    pub ids: Vec<usize>,
    pub log_probs: Vec<NodeId>,
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            cumulative += p;
            last_positive = i;
            if cumulative > u {
                return i;
            }
        }
    }
    last_positive
}

#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub attributes: Vocab,
    pub params: ParamStore,
    ids: ParamIds,
}

impl Model {
    /// Parameters drawn uniformly from `±init_scale`, biases zero.
    pub fn new(config: ModelConfig, vocab: Vocab, attributes: Vocab, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        for (name, rows, cols) in parameter_shapes(&config, vocab.len(), attributes.len()) {
            let data = if rows == 1 && name.ends_with('b') {
                vec![0.0; cols]
            } else {
                (0..rows * cols)
                    .map(|_| rng.random_range(-config.init_scale..config.init_scale))
                    .collect()
            };
            params.add(name, Tensor::new(rows, cols, data));
        }
        Self::from_parts(config, vocab, attributes, params).expect("freshly built parameters")
    }

    /// All parameters zero.
    pub fn zeros(config: ModelConfig, vocab: Vocab, attributes: Vocab) -> Self {
        let mut params = ParamStore::new();
        for (name, rows, cols) in parameter_shapes(&config, vocab.len(), attributes.len()) {
            params.add(name, Tensor::zeros(rows, cols));
        }
        Self::from_parts(config, vocab, attributes, params).expect("freshly built parameters")
    }

    /// Reassembles a model, checking every parameter's presence and shape.
    pub fn from_parts(config: ModelConfig, vocab: Vocab, attributes: Vocab, params: ParamStore) -> Result<Self> {
        for (name, rows, cols) in parameter_shapes(&config, vocab.len(), attributes.len()) {
            let id = params
                .id_of(&name)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter `{name}`")))?;
            let t = params.get(id);
            if t.shape() != (rows, cols) || t.data.len() != rows * cols {
                return Err(Error::Checkpoint(format!(
                    "parameter `{name}` has shape {:?}, expected {:?}",
                    t.shape(),
                    (rows, cols)
                )));
            }
        }
        let ids = resolve_ids(&params, &config)?;
        Ok(Model {
            config,
            vocab,
            attributes,
            params,
            ids,
        })
    }

    pub fn param_id(&self, name: &str) -> Option<ParamId> {
        self.params.id_of(name)
    }

    pub fn prepare(&self, source: &[SourceToken]) -> Result<PreparedSource> {
        if source.is_empty() {
            return Err(Error::Empty("source sequence"));
        }
        let clip = |p: u32| (p as usize).min(self.config.max_position);
        let mut oov: Vec<String> = Vec::new();
        let mut ext_ids = Vec::with_capacity(source.len());
        for tok in source {
            let id = match self.vocab.get(&tok.value_token) {
                Some(id) => id,
                None => match oov.iter().position(|t| *t == tok.value_token) {
                    Some(k) => self.vocab.len() + k,
                    None => {
                        oov.push(tok.value_token.clone());
                        self.vocab.len() + oov.len() - 1
                    }
                },
            };
            ext_ids.push(id);
        }
        Ok(PreparedSource {
            word_ids: source.iter().map(|t| self.vocab.id_or_unk(&t.value_token)).collect(),
            attr_ids: source.iter().map(|t| self.attributes.id_or_unk(&t.attribute)).collect(),
            fwd_ids: source.iter().map(|t| clip(t.pos_fwd)).collect(),
            bwd_ids: source.iter().map(|t| clip(t.pos_bwd)).collect(),
            entity_ids: source
                .iter()
                .map(|t| (t.entity_index.unwrap_or(0) as usize).min(self.config.max_entities - 1))
                .collect(),
            ext_ids,
            oov,
            vocab_len: self.vocab.len(),
        })
    }

    pub fn prepare_table(&self, table: &Table) -> Result<PreparedSource> {
        self.prepare(&linearize_table(table))
    }

    /// One gated recurrent update; `xw` already holds the input projection
    /// plus bias.
    fn gru_step(&self, g: &mut Graph, xw: NodeId, h: NodeId, wh: ParamId) -> NodeId {
        let size = self.config.hidden;
        let whn = g.param(wh);
        let hu = g.matmul(h, whn);
        let xz = g.slice_cols(xw, 0, size);
        let hz = g.slice_cols(hu, 0, size);
        let z = g.add(xz, hz);
        let z = g.sigmoid(z);
        let xr = g.slice_cols(xw, size, size);
        let hr = g.slice_cols(hu, size, size);
        let r = g.add(xr, hr);
        let r = g.sigmoid(r);
        let xn = g.slice_cols(xw, 2 * size, size);
        let hn = g.slice_cols(hu, 2 * size, size);
        let rh = g.mul(r, hn);
        let n = g.add(xn, rh);
        let n = g.tanh(n);
        let diff = g.sub(h, n);
        let keep = g.mul(z, diff);
        g.add(n, keep)
    }

    fn run_direction(&self, g: &mut Graph, projected: NodeId, len: usize, ids: GruIds, reverse: bool) -> Vec<NodeId> {
        let width = 3 * self.config.hidden;
        let bias = g.param(ids.b);
        let mut h = g.input(Tensor::zeros(1, self.config.hidden));
        let mut states = vec![h; len];
        let order: Vec<usize> = if reverse { (0..len).rev().collect() } else { (0..len).collect() };
        for i in order {
            let indices: Vec<usize> = (i * width..(i + 1) * width).collect();
            let row = g.gather(projected, &indices);
            let xw = g.add(row, bias);
            h = self.gru_step(g, xw, h, ids.wh);
            states[i] = h;
        }
        states
    }

    /// Bidirectional encoding: one `2H` state per source token.
    pub fn encode(&self, g: &mut Graph, src: &PreparedSource) -> Result<EncoderStates> {
        if src.is_empty() {
            return Err(Error::Empty("source sequence"));
        }
        let ids = self.ids;
        let word = g.embedding(ids.word_emb, &src.word_ids);
        let attr = g.embedding(ids.attr_emb, &src.attr_ids);
        let fwd = g.embedding(ids.pos_fwd_emb, &src.fwd_ids);
        let bwd = g.embedding(ids.pos_bwd_emb, &src.bwd_ids);
        let mut parts = vec![word, attr, fwd, bwd];
        if let Some(ent) = ids.entity_emb {
            parts.push(g.embedding(ent, &src.entity_ids));
        }
        let features = g.concat(&parts);

        let len = src.len();
        let wf = g.param(ids.enc_fwd.wx);
        let proj_f = g.matmul(features, wf);
        let forward = self.run_direction(g, proj_f, len, ids.enc_fwd, false);
        let wb = g.param(ids.enc_bwd.wx);
        let proj_b = g.matmul(features, wb);
        let backward = self.run_direction(g, proj_b, len, ids.enc_bwd, true);

        let fwd_stack = g.stack(&forward);
        let bwd_stack = g.stack(&backward);
        let states = g.concat(&[fwd_stack, bwd_stack]);
        let states_t = g.transpose(states);

        let summary = g.concat(&[forward[len - 1], backward[0]]);
        let bw = g.param(ids.bridge_w);
        let bb = g.param(ids.bridge_b);
        let init = g.matmul(summary, bw);
        let init = g.add(init, bb);
        let init_hidden = g.tanh(init);
        Ok(EncoderStates {
            states,
            states_t,
            init_hidden,
            len,
        })
    }

    pub fn initial_state(&self, g: &mut Graph, enc: &EncoderStates) -> DecodeState {
        let context = g.input(Tensor::zeros(1, 2 * self.config.hidden));
        DecodeState {
            hidden: enc.init_hidden,
            context,
            step: 0,
            prefix: Vec::new(),
        }
    }

    /// One decoder step from `prev` (an extended-vocabulary id).
    pub fn decode_step(
        &self,
        g: &mut Graph,
        enc: &EncoderStates,
        src: &PreparedSource,
        state: &DecodeState,
        prev: usize,
    ) -> (StepOutput, DecodeState) {
        let ids = self.ids;
        let vocab_len = self.vocab.len();
        let input_id = if prev < vocab_len { prev } else { UNK_ID };
        let x = g.embedding(ids.word_emb, &[input_id]);
        let inp = g.concat(&[x, state.context]);
        let wx = g.param(ids.dec.wx);
        let b = g.param(ids.dec.b);
        let xw = g.matmul(inp, wx);
        let xw = g.add(xw, b);
        let hidden = self.gru_step(g, xw, state.hidden, ids.dec.wh);

        let aw = g.param(ids.attn_w);
        let query = g.matmul(hidden, aw);
        let scores = g.matmul(query, enc.states_t);
        let attention = g.softmax(scores);
        let context = g.matmul(attention, enc.states);

        let readout = g.concat(&[hidden, context]);
        let ow = g.param(ids.out_w);
        let ob = g.param(ids.out_b);
        let logits = g.matmul(readout, ow);
        let logits = g.add(logits, ob);
        let vocab_probs = g.softmax(logits);

        let gate_in = g.concat(&[context, hidden, x]);
        let gw = g.param(ids.gate_w);
        let gb = g.param(ids.gate_b);
        let gate = g.matmul(gate_in, gw);
        let gate = g.add(gate, gb);
        let gate = g.sigmoid(gate);
        let copy_weight = g.affine(gate, -1.0, 1.0);

        let ext_len = src.extended_len();
        let generated = if ext_len == vocab_len {
            vocab_probs
        } else {
            let identity: Vec<usize> = (0..vocab_len).collect();
            g.scatter_add(vocab_probs, &identity, ext_len)
        };
        let generated = g.mul_scalar(generated, gate);
        let copied = g.scatter_add(attention, src.extended_ids(), ext_len);
        let copied = g.mul_scalar(copied, copy_weight);
        let distribution = g.add(generated, copied);

        let mut prefix = state.prefix.clone();
        prefix.push(prev);
        let next = DecodeState {
            hidden,
            context,
            step: state.step + 1,
            prefix,
        };
        (
            StepOutput {
                distribution,
                attention,
                gate,
            },
            next,
        )
    }

    /// Extended-vocabulary ids of `reference` followed by EOS.
    pub fn target_ids(&self, src: &PreparedSource, reference: &[String]) -> Vec<usize> {
        reference
            .iter()
            .map(|t| src.extended_id(&self.vocab, t))
            .chain(std::iter::once(EOS_ID))
            .collect()
    }

    /// `-Σ log p(target_t | target_<t)` with gold previous tokens.
    pub fn teacher_forced_loss(
        &self,
        g: &mut Graph,
        enc: &EncoderStates,
        src: &PreparedSource,
        targets: &[usize],
    ) -> NodeId {
        let mut state = self.initial_state(g, enc);
        let mut prev = BOS_ID;
        let mut terms = Vec::with_capacity(targets.len());
        for &target in targets {
            let (out, next) = self.decode_step(g, enc, src, &state, prev);
            let p = g.gather(out.distribution, &[target]);
            terms.push(g.log(p, LOG_FLOOR));
            state = next;
            prev = target;
        }
        let all = g.concat(&terms);
        let total = g.sum(all);
        g.scale(total, -1.0)
    }

    /// Greedy or ancestral decoding, at most `max_len` tokens before EOS.
    pub fn decode<R: Rng>(
        &self,
        g: &mut Graph,
        enc: &EncoderStates,
        src: &PreparedSource,
        max_len: usize,
        mut mode: DecodeMode<'_, R>,
    ) -> Decoded {
        let mut state = self.initial_state(g, enc);
        let mut prev = BOS_ID;
        let mut ids = Vec::new();
        let mut log_probs = Vec::new();
        while state.step < max_len {
            let (out, next) = self.decode_step(g, enc, src, &state, prev);
            let probs = &g.value(out.distribution).data;
            let choice = match &mut mode {
                DecodeMode::Greedy => argmax(probs),
                DecodeMode::Sample(rng) => sample_index(probs, *rng),
            };
            let p = g.gather(out.distribution, &[choice]);
            log_probs.push(g.log(p, LOG_FLOOR));
            if choice == EOS_ID {
                break;
            }
            ids.push(choice);
            state = next;
            prev = choice;
        }
        Decoded { ids, log_probs }
    }

    pub fn ids_to_tokens(&self, src: &PreparedSource, ids: &[usize]) -> Tokens {
        ids.iter().map(|&id| src.token(&self.vocab, id).to_owned()).collect()
    }

    /// Teacher-forced negative log-likelihood of the primary reference.
    pub fn teacher_forced_nll(&self, instance: &Instance) -> Result<f64> {
        let src = self.prepare_table(instance.table())?;
        let mut g = Graph::new(&self.params);
        let enc = self.encode(&mut g, &src)?;
        let targets = self.target_ids(&src, instance.primary_reference());
        let loss = self.teacher_forced_loss(&mut g, &enc, &src, &targets);
        Ok(g.value(loss).item())
    }

    /// Loss and parameter gradients of [`Model::teacher_forced_nll`].
    pub fn nll_gradients(&self, instance: &Instance) -> Result<(f64, Gradients)> {
        let src = self.prepare_table(instance.table())?;
        let mut g = Graph::new(&self.params);
        let enc = self.encode(&mut g, &src)?;
        let targets = self.target_ids(&src, instance.primary_reference());
        let loss = self.teacher_forced_loss(&mut g, &enc, &src, &targets);
        let grads = g.backward(loss)?;
        Ok((g.value(loss).item(), grads))
    }

    pub fn greedy_decode(&self, table: &Table, max_len: usize) -> Result<Tokens> {
        let src = self.prepare_table(table)?;
        let mut g = Graph::new(&self.params);
        let enc = self.encode(&mut g, &src)?;
        let decoded = self.decode::<ChaCha8Rng>(&mut g, &enc, &src, max_len, DecodeMode::Greedy);
        Ok(self.ids_to_tokens(&src, &decoded.ids))
    }

    /// Ancestral sample plus the log-probability of every sampled token
    /// (the final entry belongs to EOS when the sample stopped on its own).
    pub fn sample_decode_with<R: Rng>(&self, table: &Table, max_len: usize, rng: &mut R) -> Result<(Tokens, Vec<f64>)> {
        let src = self.prepare_table(table)?;
        let mut g = Graph::new(&self.params);
        let enc = self.encode(&mut g, &src)?;
        let decoded = self.decode(&mut g, &enc, &src, max_len, DecodeMode::Sample(rng));
        let log_probs = decoded.log_probs.iter().map(|&n| g.value(n).item()).collect();
        Ok((self.ids_to_tokens(&src, &decoded.ids), log_probs))
    }

    pub fn sample_decode(&self, table: &Table, max_len: usize, seed: u64) -> Result<(Tokens, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_decode_with(table, max_len, &mut rng)
    }
}
