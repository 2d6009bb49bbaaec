use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Attention, ModelConfig, Seq2SeqError};
use crate::numerics::{Tape, Tensor, Var};

pub(crate) const GATES: [&str; 4] = ["i", "f", "c", "o"];
const FORGET: usize = 1;

/// Parameter indices of one LSTM block, gates ordered input, forget, cell, output.
#[derive(Clone, Debug)]
pub struct LstmIds {
    pub w_e: [usize; 4],
    pub w_h: [usize; 4],
    pub b: [usize; 4],
}

#[derive(Clone, Debug)]
pub enum AttentionIds {
    None,
    Dot,
    General { w_g: usize },
    Concat { w_cc: usize },
    Tensor { w: usize, v: usize, b: usize, u: usize },
}

/// Where each named parameter lives in the flat tensor list.
#[derive(Clone, Debug)]
pub struct Layout {
    pub enc_embedding: usize,
    pub dec_embedding: usize,
    /// Per layer, `[forward, backward]`.
    pub encoder: Vec<[LstmIds; 2]>,
    pub decoder: Vec<LstmIds>,
    pub attention: AttentionIds,
    /// `(W_c, b_c)`; absent without attention.
    pub combine: Option<(usize, usize)>,
    pub projection: (usize, usize),
}

struct Builder {
    names: Vec<String>,
    shapes: Vec<Vec<usize>>,
}

impl Builder {
    fn add(&mut self, name: String, shape: Vec<usize>) -> usize {
        self.names.push(name);
        self.shapes.push(shape);
        self.names.len() - 1
    }

    fn lstm(&mut self, prefix: &str, input: usize, hidden: usize) -> LstmIds {
        let mut ids = LstmIds {
            w_e: [0; 4],
            w_h: [0; 4],
            b: [0; 4],
        };
        for (g, gate) in GATES.iter().enumerate() {
            ids.w_e[g] = self.add(format!("{prefix}.W_e{gate}"), vec![hidden, input]);
        }
        for (g, gate) in GATES.iter().enumerate() {
            ids.w_h[g] = self.add(format!("{prefix}.W_h{gate}"), vec![hidden, hidden]);
        }
        for (g, gate) in GATES.iter().enumerate() {
            ids.b[g] = self.add(format!("{prefix}.b_{gate}"), vec![hidden, 1]);
        }
        ids
    }
}

fn build_layout(config: &ModelConfig) -> (Layout, Vec<String>, Vec<Vec<usize>>) {
    let mut b = Builder {
        names: Vec::new(),
        shapes: Vec::new(),
    };
    let (d_emb, d_h, half) = (config.d_emb, config.d_h, config.enc_hidden());

    let enc_embedding = b.add("enc.embedding".into(), vec![d_emb, config.src_vocab_size]);
    let mut encoder = Vec::with_capacity(config.enc_layers);
    for l in 0..config.enc_layers {
        let input = if l == 0 { d_emb } else { d_h };
        let fwd = b.lstm(&format!("enc.l{l}.fwd"), input, half);
        let bwd = b.lstm(&format!("enc.l{l}.bwd"), input, half);
        encoder.push([fwd, bwd]);
    }

    let dec_embedding = b.add("dec.embedding".into(), vec![d_emb, config.tgt_vocab_size]);
    let decoder = (0..config.dec_layers)
        .map(|l| {
            let input = if l == 0 { d_emb } else { d_h };
            b.lstm(&format!("dec.l{l}"), input, d_h)
        })
        .collect();

    let attention = match config.attention {
        Attention::None => AttentionIds::None,
        Attention::Dot => AttentionIds::Dot,
        Attention::General => AttentionIds::General {
            w_g: b.add("attn.W_g".into(), vec![d_h, d_h]),
        },
        Attention::Concat => AttentionIds::Concat {
            w_cc: b.add("attn.W_cc".into(), vec![1, 2 * d_h]),
        },
        Attention::Tensor { k } => AttentionIds::Tensor {
            w: b.add("attn.W".into(), vec![d_h, k, d_h]),
            v: b.add("attn.V".into(), vec![k, 2 * d_h]),
            b: b.add("attn.b".into(), vec![k, 1]),
            u: b.add("attn.U".into(), vec![1, k]),
        },
    };
    let combine = (!config.attention.is_none()).then(|| {
        (
            b.add("combine.W_c".into(), vec![d_h, 2 * d_h]),
            b.add("combine.b_c".into(), vec![d_h, 1]),
        )
    });
    let projection = (
        b.add("proj.W_p".into(), vec![config.tgt_vocab_size, d_h]),
        b.add("proj.b_p".into(), vec![config.tgt_vocab_size, 1]),
    );

    let layout = Layout {
        enc_embedding,
        dec_embedding,
        encoder,
        decoder,
        attention,
        combine,
        projection,
    };
    (layout, b.names, b.shapes)
}

/// Every learnable tensor of the model, in a fixed order derived from the config.
#[derive(Clone, Debug)]
pub struct ModelParams {
    config: ModelConfig,
    layout: Layout,
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

/// Serialized form: config plus named tensors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl ModelParams {
    /// All-zero parameters.
    pub fn zeros(config: &ModelConfig) -> Result<Self, Seq2SeqError> {
        config.validate()?;
        let (layout, names, shapes) = build_layout(config);
        let tensors = shapes.iter().map(|s| Tensor::zeros(s)).collect();
        Ok(ModelParams {
            config: config.clone(),
            layout,
            names,
            tensors,
        })
    }

    /// Glorot-uniform matrices, zero biases except forget-gate biases at 1.
    pub fn initialize<R: Rng>(config: &ModelConfig, rng: &mut R) -> Result<Self, Seq2SeqError> {
        let mut p = Self::zeros(config)?;
        let forget: Vec<usize> = p
            .layout
            .encoder
            .iter()
            .flat_map(|dirs| dirs.iter().map(|d| d.b[FORGET]))
            .chain(p.layout.decoder.iter().map(|d| d.b[FORGET]))
            .collect();
        for (name, t) in p.names.iter().zip(p.tensors.iter_mut()) {
            let leaf = name.rsplit('.').next().unwrap_or_default();
            if leaf == "b" || leaf.starts_with("b_") {
                continue;
            }
            let fan_out = t.shape()[0];
            let fan_in: usize = t.shape()[1..].iter().product();
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for x in t.data_mut() {
                *x = rng.gen_range(-r..r);
            }
        }
        for id in forget {
            p.tensors[id] = Tensor::filled(p.tensors[id].shape(), 1.0);
        }
        Ok(p)
    }

    /// Rebuild from serialized tensors, validating every shape against `config`.
    pub fn from_named(config: &ModelConfig, named: Vec<NamedTensor>) -> Result<Self, Seq2SeqError> {
        let mut p = Self::zeros(config)?;
        if named.len() != p.names.len() {
            return Err(Seq2SeqError::Checkpoint(format!(
                "expected {} tensors, found {}",
                p.names.len(),
                named.len()
            )));
        }
        let mut seen = vec![false; p.names.len()];
        for nt in named {
            let id = p
                .index_of(&nt.name)
                .ok_or_else(|| Seq2SeqError::Checkpoint(format!("unexpected tensor {:?}", nt.name)))?;
            if std::mem::replace(&mut seen[id], true) {
                return Err(Seq2SeqError::Checkpoint(format!("duplicate tensor {:?}", nt.name)));
            }
            if p.tensors[id].shape() != nt.shape.as_slice() {
                return Err(Seq2SeqError::Checkpoint(format!(
                    "tensor {:?} has shape {:?}, config requires {:?}",
                    nt.name,
                    nt.shape,
                    p.tensors[id].shape()
                )));
            }
            let t = Tensor::new(nt.shape, nt.data)
                .map_err(|e| Seq2SeqError::Checkpoint(format!("tensor {:?}: {e}", nt.name)))?;
            if !t.is_finite() {
                return Err(Seq2SeqError::Checkpoint(format!("tensor {:?} is not finite", nt.name)));
            }
            p.tensors[id] = t;
        }
        Ok(p)
    }

    pub fn to_named(&self) -> Vec<NamedTensor> {
        self.names
            .iter()
            .zip(&self.tensors)
            .map(|(n, t)| NamedTensor {
                name: n.clone(),
                shape: t.shape().to_vec(),
                data: t.data().to_vec(),
            })
            .collect()
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index_of(name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index_of(name).map(move |i| &mut self.tensors[i])
    }

    /// Replace one tensor; the shape must match.
    pub fn set(&mut self, name: &str, value: Tensor) -> Result<(), Seq2SeqError> {
        let slot = self
            .get_mut(name)
            .ok_or_else(|| Seq2SeqError::Checkpoint(format!("no tensor named {name:?}")))?;
        if slot.shape() != value.shape() {
            return Err(Seq2SeqError::Checkpoint(format!(
                "tensor {name:?} has shape {:?}, got {:?}",
                slot.shape(),
                value.shape()
            )));
        }
        *slot = value;
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Register every tensor on `tape` as a parameter.
    pub fn bind(&self, tape: &mut Tape) -> Vec<Var> {
        self.tensors.iter().map(|t| tape.param(t.clone())).collect()
    }
}

/// Closed-form parameter count for a config.
pub fn parameter_count(config: &ModelConfig) -> usize {
    let (e, h, half) = (config.d_emb, config.d_h, config.enc_hidden());
    let lstm = |input: usize, hidden: usize| 4 * (hidden * input + hidden * hidden + hidden);
    let embeddings = e * (config.src_vocab_size + config.tgt_vocab_size);
    let encoder: usize = (0..config.enc_layers)
        .map(|l| 2 * lstm(if l == 0 { e } else { h }, half))
        .sum();
    let decoder: usize = (0..config.dec_layers)
        .map(|l| lstm(if l == 0 { e } else { h }, h))
        .sum();
    let attention = match config.attention {
        Attention::None | Attention::Dot => 0,
        Attention::General => h * h,
        Attention::Concat => 2 * h,
        Attention::Tensor { k } => h * k * h + k * 2 * h + k + k,
    };
    let combine = if config.attention.is_none() { 0 } else { h * 2 * h + h };
    let projection = config.tgt_vocab_size * h + config.tgt_vocab_size;
    embeddings + encoder + decoder + attention + combine + projection
}
